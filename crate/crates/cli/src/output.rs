//! Text formats: numbers, manifests, CSV tables and atomic file writes.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use gravdec_core::ScenarioResult;
use tempfile::NamedTempFile;

use crate::error::CliError;

pub const CSV_HEADER: &str = "h_m,sigma_c_m,sigma_sd_m,delta_m,overlap,C,C_N";

/// Scientific notation with 12 significant digits. Negative zero prints
/// as zero.
pub fn sci(x: f64) -> String {
    format!("{:.11e}", if x == 0.0 { 0.0 } else { x })
}

/// Ordered `key = value` pairs describing how an artifact was produced.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunManifest {
    entries: Vec<(String, String)>,
}

impl RunManifest {
    /// Starts with the tool name, version and a UTC timestamp.
    pub fn new() -> Self {
        let mut m = RunManifest::default();
        m.push("tool", "gravdec");
        m.push("version", env!("CARGO_PKG_VERSION"));
        m.push(
            "timestamp",
            chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        );
        m
    }

    pub fn push(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.entries.push((key.to_string(), value.to_string()));
        self
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    /// One `# key = value` line per entry.
    pub fn comment_block(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.entries {
            let _ = writeln!(s, "# {k} = {v}");
        }
        s
    }
}

pub fn csv_row(r: &ScenarioResult) -> String {
    [
        r.height,
        r.sigma_c,
        r.sigma_sd,
        r.delta,
        r.overlap,
        r.coincidence,
        r.normalized,
    ]
    .iter()
    .map(|&v| sci(v))
    .collect::<Vec<_>>()
    .join(",")
}

pub fn render_csv(manifest: &RunManifest, rows: &[ScenarioResult]) -> String {
    let mut s = manifest.comment_block();
    s.push_str(CSV_HEADER);
    s.push('\n');
    for r in rows {
        s.push_str(&csv_row(r));
        s.push('\n');
    }
    s
}

/// Writes every file or none. Contents go to temporary files beside their
/// targets and are renamed into place only after all writes succeed.
pub fn write_all_atomic(files: &[(&Path, &str)]) -> Result<(), CliError> {
    let mut staged = Vec::with_capacity(files.len());
    for &(path, contents) in files {
        let dir = match path.parent() {
            Some(p) if !p.as_os_str().is_empty() => p,
            _ => Path::new("."),
        };
        let mut tmp = NamedTempFile::new_in(dir).map_err(|e| CliError::io(path, e))?;
        tmp.write_all(contents.as_bytes())
            .and_then(|_| tmp.as_file().sync_all())
            .map_err(|e| CliError::io(path, e))?;
        staged.push((tmp, path));
    }
    let mut done: Vec<PathBuf> = Vec::new();
    for (tmp, path) in staged {
        if let Err(e) = tmp.persist(path) {
            for p in &done {
                let _ = std::fs::remove_file(p);
            }
            return Err(CliError::io(path, e.error));
        }
        done.push(path.to_path_buf());
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(sci(4e5), "4.00000000000e5");
        assert_eq!(sci(-1.7421212448777e-5), "-1.74212124488e-5");
        assert_eq!(sci(-0.0), "0.00000000000e0");
        assert_eq!(sci(1.0), "1.00000000000e0");
        let x = 0.048060726585049_6_f64;
        let back: f64 = sci(x).parse().unwrap();
        assert!((back - x).abs() <= 5e-12 * x);
    }

    #[test]
    fn manifest_block() {
        let mut m = RunManifest::default();
        m.push("re", sci(6.38e6)).push("source", "pdc");
        assert_eq!(
            m.comment_block(),
            "# re = 6.38000000000e6\n# source = pdc\n"
        );
        let fresh = RunManifest::new();
        let keys: Vec<_> = fresh.entries().iter().map(|(k, _)| k.as_str()).collect();
        assert_eq!(keys, ["tool", "version", "timestamp"]);
    }

    #[test]
    fn atomic_write_leaves_nothing_on_failure() {
        let dir = tempfile::tempdir().unwrap();
        let good = dir.path().join("a.csv");
        let bad = dir.path().join("missing").join("b.svg");
        let err = write_all_atomic(&[(&good, "x\n"), (&bad, "y\n")]).unwrap_err();
        assert_eq!(err.exit_code(), 4);
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);

        write_all_atomic(&[(&good, "x\n")]).unwrap();
        assert_eq!(std::fs::read_to_string(&good).unwrap(), "x\n");
    }
}

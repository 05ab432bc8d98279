//! `key = value` configuration files and the settings they populate.

use std::fmt;
use std::fs;
use std::path::Path;

use gravdec_core::modes::{self, ModeFunction};
use gravdec_core::registry;
use gravdec_core::{ExperimentConfig, MetricContext, PathGeometry, SourceModel};

use crate::error::CliError;

pub const DEFAULT_RADIUS: f64 = 6.38e6;
pub const DEFAULT_MASS: f64 = 4.432e-3;
pub const DEFAULT_DT: f64 = 1e-5;
pub const DEFAULT_DX: f64 = 1e-3;
pub const DEFAULT_CHI: f64 = 0.01;
pub const DEFAULT_ALPHA: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum SourceKind {
    Pdc,
    Coherent,
}

impl fmt::Display for SourceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SourceKind::Pdc => "pdc",
            SourceKind::Coherent => "coherent",
        })
    }
}

/// Scenario parameters after defaults, file values and flags are merged.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub re: f64,
    pub mass: f64,
    pub dt: f64,
    pub dx: f64,
    pub source: SourceKind,
    pub alpha: Option<f64>,
    pub chi: Option<f64>,
    pub method: Option<String>,
    pub swap: bool,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            re: DEFAULT_RADIUS,
            mass: DEFAULT_MASS,
            dt: DEFAULT_DT,
            dx: DEFAULT_DX,
            source: SourceKind::Pdc,
            alpha: None,
            chi: None,
            method: None,
            swap: false,
        }
    }
}

impl Settings {
    /// Parses a configuration file on top of the defaults.
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Settings::parse(&text, path)
    }

    /// `path` only labels error messages.
    pub fn parse(text: &str, path: &Path) -> Result<Self, CliError> {
        let mut settings = Settings::default();
        let mut seen: Vec<String> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let fail = |message: String| CliError::Config {
                path: path.to_path_buf(),
                line,
                message,
            };
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| fail(format!("expected `key = value`, got `{content}`")))?;
            let (key, value) = (key.trim(), value.trim());
            if seen.iter().any(|k| k == key) {
                return Err(fail(format!("duplicate key `{key}`")));
            }
            let number = || {
                value
                    .parse::<f64>()
                    .map_err(|_| fail(format!("`{key}` needs a number, got `{value}`")))
            };
            match key {
                "re" => settings.re = number()?,
                "M" => settings.mass = number()?,
                "dt" => settings.dt = number()?,
                "dx" => settings.dx = number()?,
                "alpha" => settings.alpha = Some(number()?),
                "chi" => settings.chi = Some(number()?),
                "source" => {
                    settings.source = <SourceKind as clap::ValueEnum>::from_str(value, false)
                        .map_err(|_| fail(format!("unknown source `{value}` (pdc, coherent)")))?
                }
                "method" => {
                    let names = registry::delta_methods().names();
                    if !names.contains(&value) {
                        return Err(fail(format!(
                            "unknown method `{value}` ({})",
                            names.join(", ")
                        )));
                    }
                    settings.method = Some(value.to_string());
                }
                "swap" => {
                    settings.swap = match value {
                        "true" | "yes" | "1" => true,
                        "false" | "no" | "0" => false,
                        _ => {
                            return Err(fail(format!("`swap` needs true or false, got `{value}`")))
                        }
                    }
                }
                _ => {
                    return Err(fail(format!(
                        "unknown key `{key}` (re, M, dt, dx, source, alpha, chi, method, swap)"
                    )))
                }
            }
            seen.push(key.to_string());
        }
        Ok(settings)
    }

    pub fn metric(&self) -> Result<MetricContext, CliError> {
        Ok(MetricContext::new(self.mass, self.re)?)
    }

    /// Rejects a source parameter that belongs to the other source.
    pub fn source_model(&self) -> Result<SourceModel, CliError> {
        match self.source {
            SourceKind::Pdc => {
                if self.alpha.is_some() {
                    return Err(CliError::Usage(
                        "alpha applies only to the coherent source; use chi with pdc".into(),
                    ));
                }
                Ok(SourceModel::pdc(self.chi.unwrap_or(DEFAULT_CHI))?)
            }
            SourceKind::Coherent => {
                if self.chi.is_some() {
                    return Err(CliError::Usage(
                        "chi applies only to the pdc source; use alpha with coherent".into(),
                    ));
                }
                Ok(SourceModel::coherent(self.alpha.unwrap_or(DEFAULT_ALPHA))?)
            }
        }
    }

    /// Builds a validated configuration at `h = 0`. `mode` replaces the
    /// Gaussian built from `dt`, `dx`.
    pub fn build(
        &self,
        mode: Option<ModeFunction>,
        default_method: &str,
        engine: &str,
    ) -> Result<ExperimentConfig, CliError> {
        let metric = self.metric()?;
        let mode = match mode {
            Some(m) => m,
            None => modes::gaussian_mode(self.dt, self.dx)?,
        };
        let source = self.source_model()?;
        let method =
            registry::delta_methods().get(self.method.as_deref().unwrap_or(default_method))?;
        let engine = registry::coincidence_engines().get(engine)?;
        Ok(
            ExperimentConfig::new(metric, PathGeometry::new(0.0)?, mode, source)?
                .with_delta_method(method)
                .with_engine(engine)
                .with_swap_paths(self.swap),
        )
    }
}

/// Reads `path` and returns the validated configuration it describes, with
/// the weak-field delay and the Wick engine unless the file says otherwise.
pub fn load_config(path: &Path) -> Result<ExperimentConfig, CliError> {
    Settings::from_file(path)?.build(None, "weak", "wick")
}

/// Loads a tabulated mode grid.
pub fn load_mode_file(path: &Path) -> Result<ModeFunction, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let grid: modes::TabulatedMode = text
        .parse()
        .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    Ok(grid.into())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<Settings, CliError> {
        Settings::parse(text, Path::new("test.cfg"))
    }

    #[test]
    fn empty_text_gives_defaults() {
        assert_eq!(parse("").unwrap(), Settings::default());
        assert_eq!(parse("# nothing\n\n   \n").unwrap(), Settings::default());
    }

    #[test]
    fn all_keys() {
        let s = parse(
            "re = 7e6\nM=1e-3 # trailing\ndt = 2e-5\ndx = 3e-3\nsource = coherent\n\
             alpha = 0.5\nmethod = exact\nswap = yes\n",
        )
        .unwrap();
        assert_eq!(s.re, 7e6);
        assert_eq!(s.mass, 1e-3);
        assert_eq!(s.dt, 2e-5);
        assert_eq!(s.dx, 3e-3);
        assert_eq!(s.source, SourceKind::Coherent);
        assert_eq!(s.alpha, Some(0.5));
        assert_eq!(s.method.as_deref(), Some("exact"));
        assert!(s.swap);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let cases = [
            ("re = 1\nfoo = 2\n", 2, "unknown key `foo`"),
            ("\n\nre = abc\n", 3, "`re` needs a number"),
            ("source = laser\n", 1, "unknown source"),
            ("method = approx\n", 1, "unknown method"),
            ("swap = maybe\n", 1, "`swap` needs true or false"),
            ("chi 0.1\n", 1, "expected `key = value`"),
            ("chi = 0.1\nchi = 0.2\n", 2, "duplicate key"),
        ];
        for (text, want_line, fragment) in cases {
            let err = parse(text).unwrap_err();
            match &err {
                CliError::Config { line, message, .. } => {
                    assert_eq!(*line, want_line, "{text:?}");
                    assert!(message.contains(fragment), "{message}");
                }
                other => panic!("unexpected {other:?}"),
            }
            assert_eq!(err.exit_code(), 2);
            assert!(err
                .to_string()
                .starts_with(&format!("test.cfg:{want_line}:")));
        }
    }

    #[test]
    fn mismatched_source_parameters() {
        let s = parse("alpha = 1\n").unwrap();
        assert_eq!(s.source_model().unwrap_err().exit_code(), 2);
        let s = parse("source = coherent\nchi = 0.01\n").unwrap();
        assert_eq!(s.source_model().unwrap_err().exit_code(), 2);
    }

    #[test]
    fn build_applies_defaults_and_validation() {
        let config = Settings::default().build(None, "weak", "wick").unwrap();
        assert_eq!(config.delta_method.name(), "weak");
        assert_eq!(config.engine.name(), "wick");
        assert_eq!(config.source, SourceModel::pdc(DEFAULT_CHI).unwrap());

        let err = parse("chi = 0.5\n")
            .unwrap()
            .build(None, "weak", "wick")
            .unwrap_err();
        assert_eq!(err.exit_code(), 3);
        let err = parse("re = 1e-3\n")
            .unwrap()
            .build(None, "weak", "wick")
            .unwrap_err();
        assert_eq!(err.exit_code(), 3);
        let err = Settings::default()
            .build(None, "weak", "magic")
            .unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }
}

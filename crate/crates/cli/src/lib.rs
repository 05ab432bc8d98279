//! Command-line front end: `gravdec <delta|run|sweep>`.
//!
//! Settings come from built-in defaults (Earth, `d_t = 1e-5 m`,
//! `d_x = 1e-3 m`, down-conversion with `χ = 0.01`), then an optional
//! `--config` file, then flags. All lengths are in meters.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use gravdec_core::experiment::{self, ExperimentConfig, ScenarioResult};
use gravdec_core::geometry::{self, PathGeometry};
use gravdec_core::registry;

pub mod config;
pub mod error;
pub mod output;
pub mod plot;

pub use config::{load_config, Settings, SourceKind};
pub use error::CliError;
pub use output::{RunManifest, CSV_HEADER};

use output::sci;

#[derive(Debug, Parser)]
#[command(
    name = "gravdec",
    version,
    about = "Gravitationally induced decoherence of photon pairs"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Shell-frame times and the path asymmetry at one height.
    Delta(DeltaArgs),
    /// Coincidence rate at one height.
    Run(RunArgs),
    /// Coincidence rate over a uniform height grid, written as CSV.
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, Args)]
pub struct MetricArgs {
    /// `key = value` file (re, M, dt, dx, source, alpha, chi, method, swap).
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Reference radius r_e in meters.
    #[arg(long, allow_negative_numbers = true)]
    pub re: Option<f64>,
    /// Mass parameter M = GM/c² in meters.
    #[arg(long, allow_negative_numbers = true)]
    pub mass: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct DeltaArgs {
    #[command(flatten)]
    pub metric: MetricArgs,
    /// Height h in meters.
    #[arg(long, allow_negative_numbers = true)]
    pub height: f64,
    /// exact, weak or both [default: exact].
    #[arg(long)]
    pub method: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct ScenarioArgs {
    #[command(flatten)]
    pub metric: MetricArgs,
    /// Mode time width d_t in meters.
    #[arg(long, allow_negative_numbers = true)]
    pub dt: Option<f64>,
    /// Mode space width d_x in meters.
    #[arg(long, allow_negative_numbers = true)]
    pub dx: Option<f64>,
    /// Tabulated mode grid; replaces the Gaussian.
    #[arg(long, value_name = "FILE")]
    pub mode_file: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub source: Option<SourceKind>,
    /// Coherent amplitude [default: 1].
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    /// Down-conversion strength [default: 0.01].
    #[arg(long, allow_negative_numbers = true)]
    pub chi: Option<f64>,
    /// exact or weak [default: weak].
    #[arg(long)]
    pub method: Option<String>,
    /// wick, second-order or fock.
    #[arg(long, default_value = "wick")]
    pub engine: String,
    /// Exchange the photons' paths before detection.
    #[arg(long)]
    pub swap: bool,
    /// Worker threads for parallel evaluation [default: all cores].
    #[arg(long)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    /// Height h in meters.
    #[arg(long, allow_negative_numbers = true)]
    pub height: f64,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub h_min: f64,
    #[arg(long, default_value_t = 8e5, allow_negative_numbers = true)]
    pub h_max: f64,
    /// Grid points, endpoints included.
    #[arg(long, default_value_t = 81)]
    pub steps: usize,
    /// CSV output path.
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
    /// Optional SVG plot of C_N against h.
    #[arg(long, value_name = "FILE")]
    pub svg: Option<PathBuf>,
}

pub fn execute(cli: Cli, out: &mut dyn Write) -> Result<(), CliError> {
    match cli.command {
        Command::Delta(args) => cmd_delta(&args, out),
        Command::Run(args) => cmd_run(&args, out),
        Command::Sweep(args) => cmd_sweep(&args, out),
    }
}

fn base_settings(metric: &MetricArgs) -> Result<Settings, CliError> {
    let mut s = match &metric.config {
        Some(path) => Settings::from_file(path)?,
        None => Settings::default(),
    };
    if let Some(re) = metric.re {
        s.re = re;
    }
    if let Some(mass) = metric.mass {
        s.mass = mass;
    }
    Ok(s)
}

fn scenario_settings(args: &ScenarioArgs) -> Result<Settings, CliError> {
    let mut s = base_settings(&args.metric)?;
    if let Some(dt) = args.dt {
        s.dt = dt;
    }
    if let Some(dx) = args.dx {
        s.dx = dx;
    }
    if let Some(source) = args.source {
        // Switching source drops the other source's file parameter.
        if source != s.source {
            s.alpha = None;
            s.chi = None;
        }
        s.source = source;
    }
    if args.alpha.is_some() {
        s.alpha = args.alpha;
    }
    if args.chi.is_some() {
        s.chi = args.chi;
    }
    if args.method.is_some() {
        s.method = args.method.clone();
    }
    s.swap |= args.swap;
    Ok(s)
}

fn build_scenario(args: &ScenarioArgs) -> Result<(Settings, ExperimentConfig), CliError> {
    let settings = scenario_settings(args)?;
    let mode = args
        .mode_file
        .as_deref()
        .map(config::load_mode_file)
        .transpose()?;
    let config = settings.build(mode, "weak", &args.engine)?;
    Ok((settings, config))
}

fn with_pool<T: Send>(
    jobs: Option<usize>,
    f: impl FnOnce() -> Result<T, CliError> + Send,
) -> Result<T, CliError> {
    match jobs {
        None => f(),
        Some(0) => Err(CliError::Usage("--jobs must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Usage(format!("cannot start {n} worker threads: {e}")))?
            .install(f),
    }
}

fn emit(out: &mut dyn Write, lines: &[(&str, String)]) -> Result<(), CliError> {
    for (k, v) in lines {
        writeln!(out, "{k} = {v}").map_err(|e| CliError::io("<stdout>", e))?;
    }
    Ok(())
}

pub fn cmd_delta(args: &DeltaArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let settings = base_settings(&args.metric)?;
    let method = args
        .method
        .clone()
        .or(settings.method.clone())
        .unwrap_or_else(|| "exact".to_string());
    let methods = registry::delta_methods();
    let selected = if method == "both" {
        vec![methods.get("exact")?, methods.get("weak")?]
    } else {
        vec![methods.get(&method)?]
    };

    let ctx = settings.metric()?;
    let path = PathGeometry::new(args.height)?;
    let mut lines = vec![
        ("h_m", sci(path.height())),
        ("sigma_c_m", sci(geometry::shell_time_climb(&ctx, &path)?)),
        (
            "sigma_sd_m",
            sci(geometry::sd_shell_time_climb(&ctx, &path)?),
        ),
    ];
    let keys: Vec<String> = selected
        .iter()
        .map(|m| format!("delta_{}_m", m.name()))
        .collect();
    for (m, key) in selected.iter().zip(&keys) {
        lines.push((key.as_str(), sci(m.delta(&ctx, &path)?)));
    }
    emit(out, &lines)
}

fn source_line(settings: &Settings, config: &ExperimentConfig) -> Vec<(&'static str, String)> {
    let mut v = vec![("source", settings.source.to_string())];
    match config.source {
        gravdec_core::SourceModel::Pdc { chi } => v.push(("chi", sci(chi))),
        gravdec_core::SourceModel::Coherent { alpha } => v.push(("alpha", sci(alpha.re))),
    }
    v
}

pub fn cmd_run(args: &RunArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let (settings, config) = build_scenario(&args.scenario)?;
    let config = config.with_height(args.height)?;
    let r = with_pool(args.scenario.jobs, || Ok(experiment::run(&config)?))?;

    let mut lines = vec![("h_m", sci(r.height))];
    lines.extend(source_line(&settings, &config));
    lines.extend([
        ("method", config.delta_method.name().to_string()),
        ("engine", config.engine.name().to_string()),
        ("swap", config.swap_paths.to_string()),
        ("sigma_c_m", sci(r.sigma_c)),
        ("sigma_sd_m", sci(r.sigma_sd)),
        ("delta_m", sci(r.delta)),
        ("delta_effective_m", sci(r.delta_effective)),
        ("overlap", sci(r.overlap)),
        ("C", sci(r.coincidence)),
        ("C_second_order", sci(r.coincidence_second_order)),
        ("C_N", sci(r.normalized)),
        ("C_N_exact", sci(r.normalized_exact)),
    ]);
    emit(out, &lines)
}

/// Manifest for a sweep: configuration as parsed plus the grid.
pub fn sweep_manifest(
    args: &SweepArgs,
    settings: &Settings,
    config: &ExperimentConfig,
) -> RunManifest {
    let mut m = RunManifest::new();
    let config_path = args.scenario.metric.config.as_deref().map(Path::display);
    m.push(
        "config",
        config_path.map_or("none".to_string(), |p| p.to_string()),
    );
    m.push("re", sci(settings.re)).push("M", sci(settings.mass));
    match &args.scenario.mode_file {
        Some(p) => m.push("mode_file", p.display()),
        None => m.push("dt", sci(settings.dt)).push("dx", sci(settings.dx)),
    };
    for (k, v) in source_line(settings, config) {
        m.push(k, v);
    }
    m.push("method", config.delta_method.name())
        .push("engine", config.engine.name())
        .push("swap", config.swap_paths)
        .push("h_min", sci(args.h_min))
        .push("h_max", sci(args.h_max))
        .push("steps", args.steps);
    m
}

pub fn cmd_sweep(args: &SweepArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let (settings, config) = build_scenario(&args.scenario)?;
    let rows: Vec<ScenarioResult> = with_pool(args.scenario.jobs, || {
        // Evaluate at the heights as printed so each row can be re-run exactly.
        let grid: Vec<f64> = experiment::height_grid(args.h_min, args.h_max, args.steps)?
            .into_iter()
            .map(|h| sci(h).parse().unwrap_or(h))
            .collect();
        Ok(experiment::run_at_heights(&config, &grid)?)
    })?
    .into_iter()
    .map(|(_, r)| r)
    .collect();

    let manifest = sweep_manifest(args, &settings, &config);
    let csv = output::render_csv(&manifest, &rows);
    let svg = args.svg.as_ref().map(|_| {
        let points: Vec<(f64, f64)> = rows.iter().map(|r| (r.height, r.normalized)).collect();
        plot::render_svg(&plot::LinePlot {
            title: "Normalized coincidence rate",
            x_label: "h (m)",
            y_label: "C_N",
            points: &points,
        })
    });

    let mut files: Vec<(&Path, &str)> = vec![(&args.out, &csv)];
    if let (Some(path), Some(svg)) = (&args.svg, &svg) {
        files.push((path, svg));
    }
    output::write_all_atomic(&files)?;
    writeln!(out, "wrote {} rows to {}", rows.len(), args.out.display())
        .map_err(|e| CliError::io("<stdout>", e))
}

//! The two-path apparatus: source and detectors share the SD-shell, mode 1
//! runs horizontally to mirror m1, mode 2 climbs a height `h` to mirror m2.
//!
//! Mirror m1 sits where both round trips take equal SD-shell time
//! (condition (i)); the vacuum-label intervals `σ_v1`, `σ_v2` absorb the
//! difference in integrated shell-frame time so that both paths evolve over
//! the same total (condition (ii)). The evolved-back labels then differ by
//! `Δ = σ_v1 - σ_v2 = 2(σ_f - σ_c)` in both time and position.
//!
//! Only label differences are observable. Labels are reported with
//! `t₀ = 0` and `σ_v1 = 0`, so `ξ₁ = (0, 0)` and `ξ₂ = (-Δ, -Δ)`; the
//! source-leg interval `σ_s` cancels and is not represented.

use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{self, DeltaMethod, ExactDelta, MetricContext, PathGeometry};
use crate::modes::{self, ModeFunction, SpaceTimeLabel};
use crate::opalg::{CoincidenceEngine, SourceModel, WickEngine};

/// Largest height tried when bracketing the half-decoherence point, in
/// units of the reference radius.
const HALF_SEARCH_LIMIT_RADII: f64 = 1e3;

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub metric: MetricContext,
    pub path: PathGeometry,
    pub mode: ModeFunction,
    pub source: SourceModel,
    pub delta_method: Arc<dyn DeltaMethod>,
    pub engine: Arc<dyn CoincidenceEngine>,
    /// Resend each photon along the other's path before detection.
    pub swap_paths: bool,
}

impl ExperimentConfig {
    /// Exact `Δ`, Wick engine, no path swap.
    pub fn new(
        metric: MetricContext,
        path: PathGeometry,
        mode: ModeFunction,
        source: SourceModel,
    ) -> Result<Self> {
        let config = ExperimentConfig {
            metric,
            path,
            mode,
            source,
            delta_method: Arc::new(ExactDelta),
            engine: Arc::new(WickEngine),
            swap_paths: false,
        };
        config.validate()?;
        Ok(config)
    }

    /// Earth at sea level with `d_t = 1e-5 m`, `d_x = 1e-3 m`, at `h = 0`.
    pub fn earth_reference(source: SourceModel) -> Result<Self> {
        ExperimentConfig::new(
            MetricContext::earth(),
            PathGeometry::new(0.0)?,
            modes::gaussian_mode(1e-5, 1e-3)?,
            source,
        )
    }

    pub fn with_height(mut self, height: f64) -> Result<Self> {
        self.path = PathGeometry::new(height)?;
        Ok(self)
    }

    pub fn with_delta_method(mut self, method: Arc<dyn DeltaMethod>) -> Self {
        self.delta_method = method;
        self
    }

    pub fn with_engine(mut self, engine: Arc<dyn CoincidenceEngine>) -> Self {
        self.engine = engine;
        self
    }

    pub fn with_swap_paths(mut self, swap: bool) -> Self {
        self.swap_paths = swap;
        self
    }

    /// Source ranges, plus a non-zero normalization for `C_N`.
    pub fn validate(&self) -> Result<()> {
        self.source.validated()?;
        match self.source {
            SourceModel::Coherent { alpha } if alpha.norm_sqr() == 0.0 => {
                Err(Error::InvalidSource(
                    "alpha must be non-zero to normalize the coincidence rate".into(),
                ))
            }
            SourceModel::Pdc { chi: 0.0 } => Err(Error::InvalidSource(
                "chi must be positive to normalize the coincidence rate".into(),
            )),
            _ => Ok(()),
        }
    }
}

/// Shell-frame bookkeeping for one height.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathIntervals {
    /// Integrated shell-frame time of mode 2's climb (and of its descent).
    pub sigma_c: f64,
    /// SD-shell time of mode 1's leg to m1, equal to the SD-shell time of the climb.
    pub sigma_f: f64,
    pub sigma_v1: f64,
    pub sigma_v2: f64,
    /// `σ_v1 - σ_v2` from the selected method.
    pub delta: f64,
}

impl PathIntervals {
    /// `σ₁ - σ₂ = (2σ_c + σ_v1) - (2σ_f + σ_v2)`; zero up to rounding.
    pub fn total_time_mismatch(&self) -> f64 {
        (2.0 * self.sigma_c + self.sigma_v1) - (2.0 * self.sigma_f + self.sigma_v2)
    }
}

pub fn path_intervals(config: &ExperimentConfig) -> Result<PathIntervals> {
    let sigma_c = geometry::shell_time_climb(&config.metric, &config.path)?;
    let sigma_f = geometry::mirror1_distance(&config.metric, &config.path)?;
    let delta = config.delta_method.delta(&config.metric, &config.path)?;
    let sigma_v1 = 0.0;
    Ok(PathIntervals {
        sigma_c,
        sigma_f,
        sigma_v1,
        sigma_v2: sigma_v1 - delta,
        delta,
    })
}

fn labels_for(delta: f64, swap: bool) -> (SpaceTimeLabel, SpaceTimeLabel) {
    let t0 = 0.0;
    let sigma_v1 = 0.0;
    let first = SpaceTimeLabel::new(t0 - sigma_v1, t0 - sigma_v1);
    if swap {
        // Each photon covers both legs, so both accumulate σ_c + σ_f.
        (first, first)
    } else {
        (first, first.translated(-delta))
    }
}

/// Evolved-back labels `(ξ₁, ξ₂)` of the two detector modes.
pub fn evolved_labels(config: &ExperimentConfig) -> Result<(SpaceTimeLabel, SpaceTimeLabel)> {
    let delta = config.delta_method.delta(&config.metric, &config.path)?;
    Ok(labels_for(delta, config.swap_paths))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScenarioResult {
    pub height: f64,
    /// Path asymmetry `Δ = σ_v1 - σ_v2`.
    pub delta: f64,
    /// Label separation actually seen by the detectors (0 when swapped).
    pub delta_effective: f64,
    pub sigma_c: f64,
    pub sigma_sd: f64,
    /// Overlap commutator `K(ξ₁, ξ₂)`.
    pub overlap: f64,
    /// `C` from the configured engine.
    pub coincidence: f64,
    /// `χ² K²` for down-conversion, `C` for a coherent source.
    pub coincidence_second_order: f64,
    /// `C_N`: `K²` for down-conversion (the second-order rate over `χ²`),
    /// `C / |α|⁴` for a coherent source.
    pub normalized: f64,
    /// Engine rate over `χ²` or `|α|⁴`; exceeds `normalized` by `O(χ²)`.
    pub normalized_exact: f64,
}

pub fn run(config: &ExperimentConfig) -> Result<ScenarioResult> {
    config.validate()?;
    let intervals = path_intervals(config)?;
    let (l1, l2) = labels_for(intervals.delta, config.swap_paths);
    let overlap = modes::overlap(&config.mode, l1, l2)?;
    let coincidence = config
        .engine
        .coincidence(&config.source, l1, l2, &config.mode)?;

    let (coincidence_second_order, normalized, scale) = match config.source {
        SourceModel::Pdc { chi } => (chi * chi * overlap * overlap, overlap * overlap, chi * chi),
        SourceModel::Coherent { alpha } => {
            let scale = alpha.norm_sqr().powi(2);
            (coincidence, coincidence / scale, scale)
        }
    };

    Ok(ScenarioResult {
        height: config.path.height(),
        delta: intervals.delta,
        delta_effective: l1.s - l2.s,
        sigma_c: intervals.sigma_c,
        sigma_sd: intervals.sigma_f,
        overlap,
        coincidence,
        coincidence_second_order,
        normalized,
        normalized_exact: coincidence / scale,
    })
}

/// Uniform height grid from `h_min` to `h_max` inclusive.
pub fn height_grid(h_min: f64, h_max: f64, steps: usize) -> Result<Vec<f64>> {
    if !(h_min.is_finite() && h_max.is_finite() && 0.0 <= h_min && h_min < h_max) {
        return Err(Error::InvalidSweep(format!(
            "need 0 <= h_min < h_max, got [{h_min}, {h_max}]"
        )));
    }
    if steps < 2 {
        return Err(Error::InvalidSweep(format!(
            "need at least 2 steps, got {steps}"
        )));
    }
    let last = (steps - 1) as f64;
    Ok((0..steps)
        .map(|i| {
            if i + 1 == steps {
                h_max
            } else {
                h_min + (h_max - h_min) * (i as f64 / last)
            }
        })
        .collect())
}

/// Runs the scenario on a uniform height grid. Grid points are evaluated in
/// parallel on the current rayon pool; the output is in grid order.
pub fn sweep_heights(
    config: &ExperimentConfig,
    h_min: f64,
    h_max: f64,
    steps: usize,
) -> Result<Vec<(f64, ScenarioResult)>> {
    run_at_heights(config, &height_grid(h_min, h_max, steps)?)
}

/// Runs the scenario at each height, in parallel, preserving input order.
pub fn run_at_heights(
    config: &ExperimentConfig,
    heights: &[f64],
) -> Result<Vec<(f64, ScenarioResult)>> {
    config.validate()?;
    heights
        .par_iter()
        .map(|&h| {
            let point = config.clone().with_height(h)?;
            run(&point).map(|r| (h, r))
        })
        .collect()
}

fn normalized_at(config: &ExperimentConfig, height: f64) -> Result<f64> {
    let path = PathGeometry::new(height)?;
    let delta = config.delta_method.delta(&config.metric, &path)?;
    let (l1, l2) = labels_for(delta, config.swap_paths);
    let k = modes::overlap(&config.mode, l1, l2)?;
    Ok(k * k)
}

/// Height `h*` at which the down-conversion `C_N` falls to one half, by
/// bracketing and bisection on the monotone curve.
pub fn half_decoherence_height(config: &ExperimentConfig) -> Result<f64> {
    config.validate()?;
    if !matches!(config.source, SourceModel::Pdc { .. }) {
        return Err(Error::WrongSource { expected: "pdc" });
    }
    let limit = HALF_SEARCH_LIMIT_RADII * config.metric.reference_radius();
    let above = |h: f64| normalized_at(config, h).map(|c| c > 0.5);

    let mut lo = 0.0;
    let mut hi = 1.0;
    while above(hi)? {
        lo = hi;
        if hi >= limit {
            return Err(Error::NoCrossing { h_max: limit });
        }
        hi = (2.0 * hi).min(limit);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= 1e-12 * hi {
            break;
        }
        if above(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::WeakFieldDelta;

    fn pdc() -> ExperimentConfig {
        ExperimentConfig::earth_reference(SourceModel::pdc(0.01).unwrap()).unwrap()
    }

    fn weak(config: ExperimentConfig) -> ExperimentConfig {
        config.with_delta_method(Arc::new(WeakFieldDelta))
    }

    #[test]
    fn labels_at_zero_height_coincide() {
        let (a, b) = evolved_labels(&pdc()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn weak_field_labels_at_400_km() {
        let config = weak(pdc()).with_height(4e5).unwrap();
        let (a, b) = evolved_labels(&config).unwrap();
        assert!(((b.s - a.s) - 1.7421e-5).abs() < 1e-9);
        assert_eq!(b.s - a.s, b.l - a.l);
    }

    #[test]
    fn swapped_labels_coincide() {
        for h in [0.0, 1e4, 4e5, 1e7] {
            let config = pdc().with_height(h).unwrap().with_swap_paths(true);
            let (a, b) = evolved_labels(&config).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn condition_bookkeeping() {
        for h in [0.0, 1e3, 4e5, 1e7] {
            let config = pdc().with_height(h).unwrap();
            let p = path_intervals(&config).unwrap();
            assert_eq!(
                p.sigma_f,
                geometry::sd_shell_time_climb(&config.metric, &config.path).unwrap()
            );
            assert_eq!(p.sigma_v1 - p.sigma_v2, p.delta);
            // Cancellation in 2(σ_f - σ_c) leaves a few ulps of h.
            assert!(p.total_time_mismatch().abs() <= 8.0 * f64::EPSILON * h.max(1.0));
        }
    }

    #[test]
    fn run_reference_points() {
        let r0 = run(&weak(pdc())).unwrap();
        assert_eq!(r0.normalized, 1.0);
        assert!((r0.normalized_exact - 1.0).abs() <= 1e-4 + 1e-12);

        let r = run(&weak(pdc()).with_height(4e5).unwrap()).unwrap();
        assert!((r.normalized - 0.048).abs() < 1e-3);
        assert!(r.normalized <= r.normalized_exact);
        assert!(r.normalized_exact <= 1.0 + 10.0 * 1e-4);

        let coherent =
            ExperimentConfig::earth_reference(SourceModel::coherent(1.0).unwrap()).unwrap();
        for h in [0.0, 4e5, 8e5] {
            let r = run(&coherent.clone().with_height(h).unwrap()).unwrap();
            assert_eq!(r.coincidence, 1.0);
            assert_eq!(r.normalized, 1.0);
        }
    }

    #[test]
    fn zero_amplitude_cannot_be_normalized() {
        let r = ExperimentConfig::earth_reference(SourceModel::coherent(0.0).unwrap());
        assert!(matches!(r, Err(Error::InvalidSource(_))));
        let r = ExperimentConfig::earth_reference(SourceModel::pdc(0.0).unwrap());
        assert!(matches!(r, Err(Error::InvalidSource(_))));
    }

    #[test]
    fn sweep_grid_and_order() {
        let rows = sweep_heights(&weak(pdc()), 0.0, 8e5, 81).unwrap();
        assert_eq!(rows.len(), 81);
        assert_eq!(rows[0].0, 0.0);
        assert_eq!(rows[80].0, 8e5);
        assert!((rows[40].0 - 4e5).abs() < 1e-9);
        assert_eq!(rows[0].1.normalized, 1.0);
        assert!((rows[40].1.normalized - 0.048).abs() < 1e-3);
        assert!(rows[80].1.normalized < 1e-20);
        for w in rows.windows(2) {
            assert!(w[1].1.normalized <= w[0].1.normalized);
            assert_eq!(w[1].1.height, w[1].0);
        }
        assert_eq!(sweep_heights(&pdc(), 0.0, 1.0, 2).unwrap().len(), 2);
    }

    #[test]
    fn sweep_rejects_bad_grids() {
        assert!(matches!(
            sweep_heights(&pdc(), 1.0, 1.0, 5),
            Err(Error::InvalidSweep(_))
        ));
        assert!(matches!(
            sweep_heights(&pdc(), -1.0, 1.0, 5),
            Err(Error::InvalidSweep(_))
        ));
        assert!(matches!(
            sweep_heights(&pdc(), 0.0, 1.0, 1),
            Err(Error::InvalidSweep(_))
        ));
    }

    #[test]
    fn flat_curves_for_coherent_and_swapped() {
        let coherent =
            ExperimentConfig::earth_reference(SourceModel::coherent(0.7).unwrap()).unwrap();
        let swapped = pdc().with_swap_paths(true);
        for config in [coherent, swapped] {
            for (_, r) in sweep_heights(&config, 0.0, 8e5, 17).unwrap() {
                assert!((r.normalized - 1.0).abs() < 1e-12);
            }
        }
    }

    // Inverting exp(-Δ²/d_eff²) = 1/2 with Δ = -h² M / r_e².
    fn closed_form_half_height(config: &ExperimentConfig) -> f64 {
        let d_eff = config.mode.effective_width().unwrap();
        let r_e = config.metric.reference_radius();
        (r_e * r_e * d_eff * 2f64.ln().sqrt() / config.metric.mass_parameter()).sqrt()
    }

    #[test]
    fn half_decoherence_matches_inversion() {
        let config = weak(pdc());
        let h = half_decoherence_height(&config).unwrap();
        let expected = closed_form_half_height(&config);
        assert!((h - expected).abs() < 1e-6 * expected, "{h} vs {expected}");
        assert!((h - 2.77e5).abs() < 1e3);

        let wide = ExperimentConfig {
            mode: modes::gaussian_mode(2e-5, 2e-3).unwrap(),
            ..config
        };
        let h2 = half_decoherence_height(&wide).unwrap();
        assert!((h2 / h - 2f64.sqrt()).abs() < 1e-6);
    }

    #[test]
    fn half_decoherence_errors() {
        let broad = ExperimentConfig {
            mode: modes::gaussian_mode(1e10, 1e12).unwrap(),
            ..pdc()
        };
        assert!(matches!(
            half_decoherence_height(&broad),
            Err(Error::NoCrossing { .. })
        ));
        assert!(matches!(
            half_decoherence_height(&pdc().with_swap_paths(true)),
            Err(Error::NoCrossing { .. })
        ));
        let coherent =
            ExperimentConfig::earth_reference(SourceModel::coherent(1.0).unwrap()).unwrap();
        assert!(matches!(
            half_decoherence_height(&coherent),
            Err(Error::WrongSource { .. })
        ));
    }

    #[test]
    fn exact_and_weak_curves_agree_at_low_heights() {
        let exact = sweep_heights(&pdc(), 0.0, 1e5, 21).unwrap();
        let approx = sweep_heights(&weak(pdc()), 0.0, 1e5, 21).unwrap();
        for ((_, e), (_, w)) in exact.iter().zip(&approx) {
            assert!((e.normalized - w.normalized).abs() < 0.02);
        }
    }
}

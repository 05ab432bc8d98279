//! Acceptance gate. One test per criterion; each prints a single
//! `PASS`/`FAIL` line before asserting.
//!
//! Run with `cargo test -p gravdec-core --test acceptance -- --nocapture`.

use std::sync::Arc;
use std::time::{Duration, Instant};

use gravdec_core::experiment::{self, ExperimentConfig};
use gravdec_core::fock::FockEngine;
use gravdec_core::geometry::{self, WeakFieldDelta};
use gravdec_core::modes::{self, SpaceTimeLabel};
use gravdec_core::opalg::{CoincidenceEngine, WickEngine};
use gravdec_core::{MetricContext, PathGeometry, SourceModel};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

const SEED: u64 = 0x0067_7261_7664_6563;

fn report(id: u32, title: &str, pass: bool, detail: String) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    println!("[acceptance {id}] {verdict} {title}: {detail}");
}

fn pdc(chi: f64) -> ExperimentConfig {
    ExperimentConfig::earth_reference(SourceModel::pdc(chi).unwrap()).unwrap()
}

fn weak(config: ExperimentConfig) -> ExperimentConfig {
    config.with_delta_method(Arc::new(WeakFieldDelta))
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        ((a - b) / b).abs()
    }
}

#[test]
fn criterion_1_reference_curve() {
    let config = weak(pdc(0.01));
    let start = Instant::now();
    let rows = experiment::sweep_heights(&config, 0.0, 8e5, 200).unwrap();
    let elapsed = start.elapsed();
    let at_ground = rows[0].1.normalized;
    let monotone = rows
        .windows(2)
        .all(|w| w[1].1.normalized < w[0].1.normalized);
    let mid = experiment::run(&config.clone().with_height(4e5).unwrap())
        .unwrap()
        .normalized;
    let exact_mid = experiment::run(&pdc(0.01).with_height(4e5).unwrap())
        .unwrap()
        .normalized;

    let pass = (at_ground - 1.0).abs() <= 1e-9
        && monotone
        && (mid - 0.048).abs() <= 1e-3
        && elapsed < Duration::from_secs(1);
    report(
        1,
        "reference curve",
        pass,
        format!(
            "C_N(0) = {at_ground}, monotone = {monotone}, C_N(4e5) = {mid:.6} \
             (exact metric: {exact_mid:.6}), 200 points in {elapsed:?}"
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_2_weak_field_delay() {
    let ctx = MetricContext::earth();
    let at = |h: f64| PathGeometry::new(h).unwrap();
    let weak_far = geometry::delta_weak_field(&ctx, &at(4e5)).unwrap();
    let exact_far = geometry::delta_exact(&ctx, &at(4e5)).unwrap();
    let weak_near = geometry::delta_weak_field(&ctx, &at(1e3)).unwrap();
    let exact_near = geometry::delta_exact(&ctx, &at(1e3)).unwrap();
    let (gap_far, gap_near) = (rel(exact_far, weak_far), rel(exact_near, weak_near));

    let pass = (weak_far - -1.7421e-5).abs() <= 1e-9 && gap_far <= 0.1 && gap_near <= 1e-3;
    report(
        2,
        "weak-field delay",
        pass,
        format!(
            "weak(4e5) = {weak_far:e}, exact(4e5) = {exact_far:e} ({:.2}% apart), \
             exact vs weak at 1e3: {:.4}%",
            100.0 * gap_far,
            100.0 * gap_near
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_3_dual_method_numerics() {
    let mut rng = StdRng::seed_from_u64(SEED);
    let ctx = MetricContext::earth();
    let mut worst_sigma = 0.0f64;
    for _ in 0..1000 {
        let h = 10f64.powf(rng.gen_range(0.0..=7.0));
        let path = PathGeometry::new(h).unwrap();
        let pairs = [
            (
                geometry::shell_time_climb(&ctx, &path).unwrap(),
                geometry::shell_time_climb_quadrature(&ctx, &path).unwrap(),
            ),
            (
                geometry::sd_shell_time_climb(&ctx, &path).unwrap(),
                geometry::sd_shell_time_climb_quadrature(&ctx, &path).unwrap(),
            ),
        ];
        for (closed, quad) in pairs {
            worst_sigma = worst_sigma.max(rel(closed, quad));
        }
    }

    let (d_t, d_x) = (1e-5, 1e-3);
    let mode = modes::gaussian_mode(d_t, d_x).unwrap();
    let z = SpaceTimeLabel::default();
    let mut worst_overlap = 0.0f64;
    for _ in 0..200 {
        let shift = SpaceTimeLabel::new(
            rng.gen_range(-10.0..=10.0) * d_t,
            rng.gen_range(-10.0..=10.0) * d_x,
        );
        let closed = modes::overlap(&mode, z, shift).unwrap();
        let quad = modes::overlap_numeric(&mode, z, shift).unwrap();
        worst_overlap = worst_overlap.max((closed - quad).abs());
    }

    let pass = worst_sigma <= 1e-12 && worst_overlap <= 1e-9;
    report(
        3,
        "dual-method numerics",
        pass,
        format!(
            "sigma closed form vs quadrature: worst rel {worst_sigma:.2e} over 1000 heights; \
             overlap closed form vs quadrature: worst abs {worst_overlap:.2e} over 200 shifts"
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_4_source_dichotomy() {
    let alpha = 0.8f64;
    let coherent =
        ExperimentConfig::earth_reference(SourceModel::coherent(alpha).unwrap()).unwrap();
    let target = alpha.powi(4);
    let worst_coherent = experiment::sweep_heights(&coherent, 0.0, 8e5, 100)
        .unwrap()
        .iter()
        .map(|(_, r)| rel(r.coincidence, target))
        .fold(0.0f64, f64::max);

    let chi = 0.01;
    let worst_pdc = experiment::sweep_heights(&pdc(chi), 0.0, 8e5, 100)
        .unwrap()
        .iter()
        .map(|(_, r)| (r.coincidence / (chi * chi) - r.overlap * r.overlap).abs())
        .fold(0.0f64, f64::max);

    let pass = worst_coherent <= 1e-12 && worst_pdc <= 10.0 * chi * chi;
    report(
        4,
        "source dichotomy",
        pass,
        format!(
            "coherent |C/|alpha|^4 - 1| <= {worst_coherent:.2e}; \
             pdc |C/chi^2 - K^2| <= {worst_pdc:.3e} (bound {:.0e})",
            10.0 * chi * chi
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_5_oracle_equivalence() {
    let mut rng = StdRng::seed_from_u64(SEED ^ 5);
    let mode = modes::gaussian_mode(1e-5, 1e-3).unwrap();
    let d_eff = mode.effective_width().unwrap();
    let (wick, fock) = (WickEngine, FockEngine);

    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut failures = 0;
    for case in 0..500 {
        // A handful of fully separated pairs covers K = 0.
        let k: f64 = if case % 50 == 0 {
            0.0
        } else {
            rng.gen_range(1e-3..=1.0)
        };
        let delta = if k == 0.0 {
            100.0 * 1e-5
        } else {
            d_eff * (-2.0 * k.ln()).sqrt()
        };
        let (l1, l2) = (SpaceTimeLabel::default(), SpaceTimeLabel::new(delta, delta));
        let source = if case % 2 == 0 {
            SourceModel::coherent(rng.gen_range(0.0..=1.0)).unwrap()
        } else {
            SourceModel::pdc(rng.gen_range(1e-3..=0.1)).unwrap()
        };
        let w = wick.coincidence(&source, l1, l2, &mode).unwrap();
        let f = fock.coincidence(&source, l1, l2, &mode).unwrap();
        let err = rel(w, f);
        worst = worst.max(err);
        if err > 1e-9 {
            failures += 1;
        }
    }
    let elapsed = start.elapsed();

    let pass = failures == 0 && elapsed < Duration::from_secs(10);
    report(
        5,
        "oracle equivalence",
        pass,
        format!("500 cases, worst rel {worst:.2e}, {failures} over 1e-9, {elapsed:?}"),
    );
    assert!(pass);
}

#[test]
fn criterion_6_reversibility() {
    let config = weak(pdc(0.01)).with_swap_paths(true);
    let rows = experiment::sweep_heights(&config, 0.0, 8e5, 50).unwrap();
    let worst = rows
        .iter()
        .map(|(_, r)| (r.normalized - 1.0).abs())
        .fold(0.0f64, f64::max);
    let all_asymmetric = rows.iter().skip(1).all(|(_, r)| r.delta < 0.0);

    let pass = worst <= 1e-12 && all_asymmetric;
    report(
        6,
        "reversibility",
        pass,
        format!("swapped paths: max |C_N - 1| = {worst:.2e} over 50 heights"),
    );
    assert!(pass);
}

#[test]
fn criterion_7_half_decoherence_height() {
    let config = weak(pdc(0.01));
    let bisected = experiment::half_decoherence_height(&config).unwrap();
    let d_eff = config.mode.effective_width().unwrap();
    let r_e = config.metric.reference_radius();
    let inverted = r_e * (d_eff * 2f64.ln().sqrt() / config.metric.mass_parameter()).sqrt();
    let exact_metric = experiment::half_decoherence_height(&pdc(0.01)).unwrap();

    let pass = (bisected - 2.77e5).abs() <= 1e3 && rel(bisected, inverted) <= 1e-6;
    report(
        7,
        "half-decoherence height",
        pass,
        format!(
            "bisection h* = {bisected:.1} m, closed-form inversion {inverted:.1} m \
             (exact metric: {exact_metric:.1} m)"
        ),
    );
    assert!(pass);
}

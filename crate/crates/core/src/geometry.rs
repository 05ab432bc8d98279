//! Schwarzschild shell-frame intervals along the radial path of mode 2.
//!
//! A stationary shell observer at radius `r` measures proper time
//! `ds = sqrt(1 - 2M/r) dt` and proper length `dl = dr / sqrt(1 - 2M/r)`.
//! Light has `ds = dl` locally, so the integrated shell-frame time of the
//! climb from `r_e` to `r_e + h` is `σ_c = ∫ dr / sqrt(1 - 2M/r)`, while the
//! same leg timed by SD-shell clocks is
//! `σ_sd = sqrt(1 - 2M/r_e) ∫ dr / (1 - 2M/r)`.
//!
//! The path asymmetry `Δ = 2(σ_sd - σ_c)` is eleven orders of magnitude
//! smaller than either integral at Earth parameters, so [`delta_exact`]
//! integrates an algebraically rearranged difference integrand instead of
//! subtracting the two.
//!
//! All integrals are written in the offset `u = r - r_e`, which keeps the
//! height exact in floating point.

use std::fmt::Debug;

use crate::error::{Error, Result};
use crate::quadrature::{self, Tolerance};

/// Relative tolerance for the two shell-time integrals.
pub const SIGMA_REL_TOL: f64 = 1e-13;
/// Absolute tolerance (metres) for the Δ difference integral.
pub const DELTA_ABS_TOL: f64 = 1e-20;

const HORIZON_MARGIN: f64 = 10.0 * f64::EPSILON;

/// Mass parameter `M` and source/detector shell radius `r_e`, both in
/// geometric metres.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricContext {
    mass: f64,
    radius: f64,
}

impl MetricContext {
    /// Earth's mass in geometric units.
    pub const EARTH_MASS: f64 = 4.432e-3;
    /// Earth's sea-level radius.
    pub const EARTH_RADIUS: f64 = 6.38e6;

    pub fn new(mass_parameter: f64, reference_radius: f64) -> Result<Self> {
        if !(mass_parameter.is_finite() && mass_parameter > 0.0) {
            return Err(Error::Domain(format!(
                "mass parameter must be positive and finite, got {mass_parameter}"
            )));
        }
        if !reference_radius.is_finite() {
            return Err(Error::Domain(format!(
                "reference radius must be finite, got {reference_radius}"
            )));
        }
        check_outside_horizon(mass_parameter, reference_radius)?;
        Ok(MetricContext {
            mass: mass_parameter,
            radius: reference_radius,
        })
    }

    pub fn earth() -> Self {
        MetricContext {
            mass: Self::EARTH_MASS,
            radius: Self::EARTH_RADIUS,
        }
    }

    pub fn mass_parameter(&self) -> f64 {
        self.mass
    }

    pub fn reference_radius(&self) -> f64 {
        self.radius
    }

    /// `2M/r`, guarded against the horizon.
    fn compactness(&self, r: f64) -> Result<f64> {
        check_outside_horizon(self.mass, r)?;
        Ok(2.0 * self.mass / r)
    }

    /// `sqrt(1 - 2M/r_e)`: the SD-shell lapse.
    pub fn lapse(&self) -> f64 {
        (1.0 - 2.0 * self.mass / self.radius).sqrt()
    }
}

fn check_outside_horizon(mass: f64, r: f64) -> Result<()> {
    let horizon = 2.0 * mass;
    if r <= horizon * (1.0 + HORIZON_MARGIN) {
        return Err(Error::Domain(format!(
            "radius {r} m is at or inside the horizon 2M = {horizon} m"
        )));
    }
    Ok(())
}

/// Radial height of mirror m2 above the SD-shell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathGeometry {
    height: f64,
}

impl PathGeometry {
    pub fn new(height: f64) -> Result<Self> {
        if !(height.is_finite() && height >= 0.0) {
            return Err(Error::Domain(format!(
                "height must be finite and non-negative, got {height}"
            )));
        }
        Ok(PathGeometry { height })
    }

    pub fn height(&self) -> f64 {
        self.height
    }
}

fn check_path(ctx: &MetricContext, path: &PathGeometry) -> Result<()> {
    ctx.compactness(ctx.radius + path.height).map(|_| ())
}

/// Integrated shell-frame time `σ_c` of the climb, closed form.
///
/// Antiderivative `sqrt(r(r-2M)) + 2M ln(sqrt(r) + sqrt(r-2M))`, with both
/// differences rewritten so that nothing of size `r_e` is subtracted.
pub fn shell_time_climb(ctx: &MetricContext, path: &PathGeometry) -> Result<f64> {
    check_path(ctx, path)?;
    let h = path.height;
    if h == 0.0 {
        return Ok(0.0);
    }
    let m2 = 2.0 * ctx.mass;
    let r1 = ctx.radius;
    let r2 = r1 + h;

    let root1 = (r1 * (r1 - m2)).sqrt();
    let root2 = (r2 * (r2 - m2)).sqrt();
    let algebraic = h * (r1 + r2 - m2) / (root1 + root2);

    let (s1, s2) = (r1.sqrt(), r2.sqrt());
    let (t1, t2) = ((r1 - m2).sqrt(), (r2 - m2).sqrt());
    let numerator = h / (s1 + s2) + h / (t1 + t2);
    let logarithmic = m2 * (numerator / (s1 + t1)).ln_1p();

    Ok(algebraic + logarithmic)
}

/// `σ_c` by adaptive quadrature; independent cross-check of the closed form.
pub fn shell_time_climb_quadrature(ctx: &MetricContext, path: &PathGeometry) -> Result<f64> {
    check_path(ctx, path)?;
    let (m, r_e) = (ctx.mass, ctx.radius);
    let integrand = |u: f64| 1.0 / (1.0 - 2.0 * m / (r_e + u)).sqrt();
    quadrature::integrate(
        integrand,
        0.0,
        path.height,
        Tolerance::new(0.0, SIGMA_REL_TOL),
    )
    .map(|r| r.value)
}

/// The climb as timed by SD-shell clocks, `σ_sd`, closed form
/// `sqrt(1 - 2M/r_e) [h + 2M ln((r_e + h - 2M)/(r_e - 2M))]`.
pub fn sd_shell_time_climb(ctx: &MetricContext, path: &PathGeometry) -> Result<f64> {
    check_path(ctx, path)?;
    let h = path.height;
    if h == 0.0 {
        return Ok(0.0);
    }
    let m2 = 2.0 * ctx.mass;
    let coordinate = h + m2 * (h / (ctx.radius - m2)).ln_1p();
    Ok(ctx.lapse() * coordinate)
}

/// `σ_sd` by adaptive quadrature.
pub fn sd_shell_time_climb_quadrature(ctx: &MetricContext, path: &PathGeometry) -> Result<f64> {
    check_path(ctx, path)?;
    let (m, r_e) = (ctx.mass, ctx.radius);
    let integrand = |u: f64| 1.0 / (1.0 - 2.0 * m / (r_e + u));
    let coordinate = quadrature::integrate(
        integrand,
        0.0,
        path.height,
        Tolerance::new(0.0, SIGMA_REL_TOL),
    )?;
    Ok(ctx.lapse() * coordinate.value)
}

/// Path asymmetry `Δ = σ_v1 - σ_v2 = 2(σ_sd - σ_c)`, non-positive.
///
/// The integrand `sqrt(1-ε_e)/(1-ε) - 1/sqrt(1-ε)` with `ε = 2M/r` is
/// rewritten as `-(2M u / (r r_e)) / ((sqrt(1-ε_e) + sqrt(1-ε)) (1-ε))`,
/// which carries full relative precision even where the two original terms
/// agree to sixteen digits.
pub fn delta_exact(ctx: &MetricContext, path: &PathGeometry) -> Result<f64> {
    check_path(ctx, path)?;
    if path.height == 0.0 {
        return Ok(0.0);
    }
    let (m, r_e) = (ctx.mass, ctx.radius);
    let lapse_e = ctx.lapse();
    let integrand = |u: f64| {
        let r = r_e + u;
        let eps = 2.0 * m / r;
        let lapse = (1.0 - eps).sqrt();
        -(2.0 * m * u / (r * r_e)) / ((lapse_e + lapse) * (1.0 - eps))
    };
    let half = quadrature::integrate(
        integrand,
        0.0,
        path.height,
        Tolerance::new(DELTA_ABS_TOL, SIGMA_REL_TOL),
    )?;
    Ok(2.0 * half.value)
}

/// Weak-field, small-height approximation `Δ ≈ -h² M / r_e²`.
pub fn delta_weak_field(ctx: &MetricContext, path: &PathGeometry) -> Result<f64> {
    check_path(ctx, path)?;
    let h = path.height;
    // `+ 0.0` folds the negative zero at h = 0.
    Ok(-(h * h * ctx.mass) / (ctx.radius * ctx.radius) + 0.0)
}

/// Frequency ratio `g = sqrt(1 - 2M/r_emit) / sqrt(1 - 2M/r_final)` between
/// the initial and final shells.
pub fn redshift_factor(ctx: &MetricContext, r_emit: f64, r_final: f64) -> Result<f64> {
    if !(r_emit.is_finite() && r_final.is_finite()) {
        return Err(Error::Domain("radii must be finite".into()));
    }
    if r_emit == r_final {
        check_outside_horizon(ctx.mass, r_emit)?;
        return Ok(1.0);
    }
    let e = ctx.compactness(r_emit)?;
    let f = ctx.compactness(r_final)?;
    Ok(((1.0 - e) / (1.0 - f)).sqrt())
}

/// One-way SD-shell path length of mode 1. Condition (i) fixes it to the
/// SD-shell duration of mode 2's climb.
pub fn mirror1_distance(ctx: &MetricContext, path: &PathGeometry) -> Result<f64> {
    sd_shell_time_climb(ctx, path)
}

/// A way of computing the path asymmetry `Δ`.
pub trait DeltaMethod: Debug + Send + Sync {
    /// Registry name, e.g. `"exact"`.
    fn name(&self) -> &'static str;

    fn delta(&self, ctx: &MetricContext, path: &PathGeometry) -> Result<f64>;
}

/// Cancellation-safe quadrature of the full Schwarzschild expression.
#[derive(Debug, Clone, Copy, Default)]
pub struct ExactDelta;

impl DeltaMethod for ExactDelta {
    fn name(&self) -> &'static str {
        "exact"
    }

    fn delta(&self, ctx: &MetricContext, path: &PathGeometry) -> Result<f64> {
        delta_exact(ctx, path)
    }
}

/// Leading order in `M/r_e` and `h/r_e`.
#[derive(Debug, Clone, Copy, Default)]
pub struct WeakFieldDelta;

impl DeltaMethod for WeakFieldDelta {
    fn name(&self) -> &'static str {
        "weak"
    }

    fn delta(&self, ctx: &MetricContext, path: &PathGeometry) -> Result<f64> {
        delta_weak_field(ctx, path)
    }
}

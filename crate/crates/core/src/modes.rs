//! Spatio-temporal mode functions and the overlap commutator.
//!
//! A detector mode centred on the label `(s, l)` has the real envelope
//! `G(t - s, x - l)` with `∬ G² dt dx = 1`. The commutator between two such
//! modes of the same beam is the overlap
//! `K = ∬ G(t - s₁, x - l₁) G(t - s₂, x - l₂) dt dx`, which lies in `[0, 1]`
//! for non-negative envelopes. Carrier phases are not modelled: both labels
//! always carry the same mean frequency and wave number here.

use std::f64::consts::PI;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::quadrature::{self, Tolerance};

/// Overlaps below this are reported as exactly zero.
pub const UNDERFLOW_CLAMP: f64 = 1e-300;

/// Support half-width of a tabulated mode, in RMS widths of `G²`.
pub const GRID_COVERAGE_WIDTHS: f64 = 6.0;

/// Gaussian integration window half-width beyond the labels, in `d_t`/`d_x`.
const GAUSSIAN_WINDOW_WIDTHS: f64 = 10.0;

/// Time and position label `(s, l)` of an evolved mode operator.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SpaceTimeLabel {
    pub s: f64,
    pub l: f64,
}

impl SpaceTimeLabel {
    pub const fn new(s: f64, l: f64) -> Self {
        SpaceTimeLabel { s, l }
    }

    /// Free propagation over a shell-frame interval `τ`, `(s, l) → (s+τ, l+τ)`.
    pub fn translated(self, tau: f64) -> Self {
        SpaceTimeLabel {
            s: self.s + tau,
            l: self.l + tau,
        }
    }

    fn is_finite(&self) -> bool {
        self.s.is_finite() && self.l.is_finite()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianMode {
    d_t: f64,
    d_x: f64,
}

impl GaussianMode {
    pub fn d_t(&self) -> f64 {
        self.d_t
    }

    pub fn d_x(&self) -> f64 {
        self.d_x
    }

    /// Amplitude at the centre, `sqrt(2 / (π d_t d_x))`.
    pub fn peak(&self) -> f64 {
        (2.0 / (PI * self.d_t * self.d_x)).sqrt()
    }

    fn amplitude(&self, t: f64, x: f64) -> f64 {
        let (a, b) = (t / self.d_t, x / self.d_x);
        self.peak() * (-(a * a) - b * b).exp()
    }

    /// Closed form `exp(-δs²/(2d_t²) - δl²/(2d_x²))`.
    fn overlap(&self, ds: f64, dl: f64) -> f64 {
        let (a, b) = (ds / self.d_t, dl / self.d_x);
        (-0.5 * (a * a + b * b)).exp()
    }
}

/// Samples on a uniform grid centred on the origin, `t`-major. Sample
/// `(i, j)` sits at `t = (i - (n_t - 1)/2) dt`, `x = (j - (n_x - 1)/2) dx`.
/// Bilinear in between, zero outside.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedMode {
    dt: f64,
    dx: f64,
    n_t: usize,
    n_x: usize,
    values: Vec<f64>,
}

impl TabulatedMode {
    /// Builds a tabulated mode, rescaling the samples so that the
    /// trapezoidal `∬ G²` is one.
    pub fn new(dt: f64, dx: f64, n_t: usize, n_x: usize, mut values: Vec<f64>) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0 && dx.is_finite() && dx > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "spacings must be positive, got dt = {dt}, dx = {dx}"
            )));
        }
        if n_t < 3 || n_x < 3 {
            return Err(Error::InvalidGrid(format!(
                "need at least 3x3 samples, got {n_t}x{n_x}"
            )));
        }
        if values.len() != n_t * n_x {
            return Err(Error::InvalidGrid(format!(
                "expected {} samples for a {n_t}x{n_x} grid, got {}",
                n_t * n_x,
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::InvalidGrid(format!(
                "amplitudes must be finite and non-negative, found {v}"
            )));
        }

        let mut mode = TabulatedMode {
            dt,
            dx,
            n_t,
            n_x,
            values: Vec::new(),
        };
        let norm = mode.trapezoid(|i, j| {
            let v = values[i * n_x + j];
            v * v
        });
        if norm <= 0.0 {
            return Err(Error::InvalidGrid("all amplitudes are zero".into()));
        }
        let scale = norm.sqrt().recip();
        values.iter_mut().for_each(|v| *v *= scale);
        mode.values = values;
        mode.check_coverage()?;
        Ok(mode)
    }

    /// Samples a function on a `n_t × n_x` grid with the given spacings.
    pub fn sample<F>(dt: f64, dx: f64, n_t: usize, n_x: usize, f: F) -> Result<Self>
    where
        F: Fn(f64, f64) -> f64,
    {
        let mut values = Vec::with_capacity(n_t * n_x);
        for i in 0..n_t {
            for j in 0..n_x {
                values.push(f(node(i, n_t, dt), node(j, n_x, dx)));
            }
        }
        TabulatedMode::new(dt, dx, n_t, n_x, values)
    }

    pub fn spacing(&self) -> (f64, f64) {
        (self.dt, self.dx)
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.n_t, self.n_x)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn half_extent(&self) -> (f64, f64) {
        (
            0.5 * (self.n_t - 1) as f64 * self.dt,
            0.5 * (self.n_x - 1) as f64 * self.dx,
        )
    }

    fn trapezoid<F>(&self, f: F) -> f64
    where
        F: Fn(usize, usize) -> f64,
    {
        let mut sum = 0.0;
        for i in 0..self.n_t {
            let wi = if i == 0 || i + 1 == self.n_t {
                0.5
            } else {
                1.0
            };
            for j in 0..self.n_x {
                let wj = if j == 0 || j + 1 == self.n_x {
                    0.5
                } else {
                    1.0
                };
                sum += wi * wj * f(i, j);
            }
        }
        sum * self.dt * self.dx
    }

    /// Centroid and RMS width of `G²` along each axis must leave
    /// [`GRID_COVERAGE_WIDTHS`] widths of room to every grid edge.
    fn check_coverage(&self) -> Result<()> {
        let weight = |i: usize, j: usize| {
            let v = self.values[i * self.n_x + j];
            v * v
        };
        let mean_t = self.trapezoid(|i, j| weight(i, j) * node(i, self.n_t, self.dt));
        let mean_x = self.trapezoid(|i, j| weight(i, j) * node(j, self.n_x, self.dx));
        let var_t = self.trapezoid(|i, j| {
            let d = node(i, self.n_t, self.dt) - mean_t;
            weight(i, j) * d * d
        });
        let var_x = self.trapezoid(|i, j| {
            let d = node(j, self.n_x, self.dx) - mean_x;
            weight(i, j) * d * d
        });
        let (ht, hx) = self.half_extent();
        let reach_t = mean_t.abs() + GRID_COVERAGE_WIDTHS * var_t.sqrt();
        let reach_x = mean_x.abs() + GRID_COVERAGE_WIDTHS * var_x.sqrt();
        if reach_t > ht || reach_x > hx {
            return Err(Error::InvalidGrid(format!(
                "grid half-extent ({ht:e}, {hx:e}) does not cover {GRID_COVERAGE_WIDTHS} RMS widths \
                 around the centroid (needs {reach_t:e}, {reach_x:e})"
            )));
        }
        Ok(())
    }

    fn amplitude(&self, t: f64, x: f64) -> f64 {
        let (ht, hx) = self.half_extent();
        let ft = (t + ht) / self.dt;
        let fx = (x + hx) / self.dx;
        let (max_t, max_x) = ((self.n_t - 1) as f64, (self.n_x - 1) as f64);
        if !(0.0..=max_t).contains(&ft) || !(0.0..=max_x).contains(&fx) {
            return 0.0;
        }
        let i = (ft.floor() as usize).min(self.n_t - 2);
        let j = (fx.floor() as usize).min(self.n_x - 2);
        let (wt, wx) = (ft - i as f64, fx - j as f64);
        let at = |a: usize, b: usize| self.values[a * self.n_x + b];
        (1.0 - wt) * ((1.0 - wx) * at(i, j) + wx * at(i, j + 1))
            + wt * ((1.0 - wx) * at(i + 1, j) + wx * at(i + 1, j + 1))
    }

    /// Trapezoidal overlap on this mode's own grid with the partner
    /// interpolated at the shifted nodes.
    fn overlap(&self, ds: f64, dl: f64) -> f64 {
        self.trapezoid(|i, j| {
            let t = node(i, self.n_t, self.dt);
            let x = node(j, self.n_x, self.dx);
            self.values[i * self.n_x + j] * self.amplitude(t + ds, x + dl)
        })
    }
}

fn node(i: usize, n: usize, spacing: f64) -> f64 {
    (i as f64 - 0.5 * (n - 1) as f64) * spacing
}

impl FromStr for TabulatedMode {
    type Err = Error;

    /// Parses the grid file format: a `# dt <spacing> dx <spacing>` header
    /// followed by whitespace-separated amplitude rows, one row per time
    /// sample. Blank lines and further `#` lines are ignored.
    fn from_str(text: &str) -> Result<Self> {
        let mut spacing = None;
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            let lineno = idx + 1;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(comment) = line.strip_prefix('#') {
                if spacing.is_none() {
                    spacing = Some(parse_grid_header(comment, lineno)?);
                }
                continue;
            }
            if spacing.is_none() {
                return Err(Error::InvalidGrid(format!(
                    "line {lineno}: expected `# dt <spacing> dx <spacing>` header before data"
                )));
            }
            let row = line
                .split_whitespace()
                .map(|tok| {
                    tok.parse::<f64>().map_err(|_| {
                        Error::InvalidGrid(format!("line {lineno}: bad amplitude `{tok}`"))
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            if let Some(first) = rows.first() {
                if first.len() != row.len() {
                    return Err(Error::InvalidGrid(format!(
                        "line {lineno}: row has {} columns, expected {}",
                        row.len(),
                        first.len()
                    )));
                }
            }
            rows.push(row);
        }
        let (dt, dx) = spacing.ok_or_else(|| {
            Error::InvalidGrid("missing `# dt <spacing> dx <spacing>` header".into())
        })?;
        let n_t = rows.len();
        let n_x = rows.first().map_or(0, Vec::len);
        TabulatedMode::new(dt, dx, n_t, n_x, rows.into_iter().flatten().collect())
    }
}

fn parse_grid_header(comment: &str, lineno: usize) -> Result<(f64, f64)> {
    let tokens: Vec<&str> = comment.split_whitespace().collect();
    let bad = || {
        Error::InvalidGrid(format!(
            "line {lineno}: header must read `# dt <spacing> dx <spacing>`"
        ))
    };
    match tokens.as_slice() {
        ["dt", dt, "dx", dx] => Ok((
            dt.parse().map_err(|_| bad())?,
            dx.parse().map_err(|_| bad())?,
        )),
        _ => Err(bad()),
    }
}

/// Normalized real envelope `G(t, x)` of a detection mode.
#[derive(Debug, Clone, PartialEq)]
pub enum ModeFunction {
    Gaussian(GaussianMode),
    Tabulated(TabulatedMode),
}

impl ModeFunction {
    pub fn amplitude(&self, t: f64, x: f64) -> f64 {
        match self {
            ModeFunction::Gaussian(g) => g.amplitude(t, x),
            ModeFunction::Tabulated(m) => m.amplitude(t, x),
        }
    }

    /// Effective combined width `d_eff` with `1/d_eff² = 1/d_t² + 1/d_x²`,
    /// for Gaussian modes.
    pub fn effective_width(&self) -> Option<f64> {
        match self {
            ModeFunction::Gaussian(g) => Some(
                (g.d_t.powi(2).recip() + g.d_x.powi(2).recip())
                    .sqrt()
                    .recip(),
            ),
            ModeFunction::Tabulated(_) => None,
        }
    }
}

impl From<TabulatedMode> for ModeFunction {
    fn from(m: TabulatedMode) -> Self {
        ModeFunction::Tabulated(m)
    }
}

/// `G = sqrt(2/(π d_t d_x)) exp(-t²/d_t² - x²/d_x²)`.
pub fn gaussian_mode(d_t: f64, d_x: f64) -> Result<ModeFunction> {
    let ok = |d: f64| d.is_finite() && d > 0.0;
    if !(ok(d_t) && ok(d_x)) {
        return Err(Error::InvalidWidth { d_t, d_x });
    }
    Ok(ModeFunction::Gaussian(GaussianMode { d_t, d_x }))
}

fn clamp(k: f64) -> f64 {
    if k < UNDERFLOW_CLAMP {
        0.0
    } else {
        k.min(1.0)
    }
}

fn check_labels(a: &SpaceTimeLabel, b: &SpaceTimeLabel) -> Result<()> {
    if a.is_finite() && b.is_finite() {
        Ok(())
    } else {
        Err(Error::Integration(format!(
            "non-finite labels {a:?}, {b:?}"
        )))
    }
}

/// Overlap commutator `K = [â(a), â†(b)]` between modes of one beam.
///
/// Closed form for Gaussian modes, grid quadrature for tabulated ones.
pub fn overlap(mode: &ModeFunction, a: SpaceTimeLabel, b: SpaceTimeLabel) -> Result<f64> {
    check_labels(&a, &b)?;
    match mode {
        ModeFunction::Gaussian(g) => Ok(clamp(g.overlap(a.s - b.s, a.l - b.l))),
        ModeFunction::Tabulated(_) => overlap_numeric(mode, a, b),
    }
}

/// Overlap by direct two-dimensional integration of the envelopes.
pub fn overlap_numeric(mode: &ModeFunction, a: SpaceTimeLabel, b: SpaceTimeLabel) -> Result<f64> {
    check_labels(&a, &b)?;
    match mode {
        ModeFunction::Gaussian(g) => {
            let window = |p: f64, q: f64, w: f64| {
                (
                    p.min(q) - GAUSSIAN_WINDOW_WIDTHS * w,
                    p.max(q) + GAUSSIAN_WINDOW_WIDTHS * w,
                )
            };
            let (t0, t1) = window(a.s, b.s, g.d_t);
            let (x0, x1) = window(a.l, b.l, g.d_x);
            let inner_tol = Tolerance::new(1e-14 / (t1 - t0), 1e-12).with_initial_pieces(8);
            let outer_tol = Tolerance::new(1e-13, 1e-12).with_initial_pieces(8);

            // A failure inside the inner integral is surfaced after the outer pass.
            let failure = std::cell::RefCell::new(None);
            let inner = |t: f64| {
                let f =
                    |x: f64| mode.amplitude(t - a.s, x - a.l) * mode.amplitude(t - b.s, x - b.l);
                match quadrature::integrate(f, x0, x1, inner_tol) {
                    Ok(r) => r.value,
                    Err(e) => {
                        failure.borrow_mut().get_or_insert(e);
                        0.0
                    }
                }
            };
            let outer = quadrature::integrate(inner, t0, t1, outer_tol)?;
            if let Some(e) = failure.into_inner() {
                return Err(e);
            }
            Ok(clamp(outer.value))
        }
        ModeFunction::Tabulated(m) => Ok(clamp(m.overlap(a.s - b.s, a.l - b.l))),
    }
}

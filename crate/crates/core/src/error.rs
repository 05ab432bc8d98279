use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Inputs at or inside the horizon, or otherwise outside the metric's domain.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid mode width: d_t = {d_t}, d_x = {d_x} (both must be positive and finite)")]
    InvalidWidth { d_t: f64, d_x: f64 },

    #[error("invalid mode grid: {0}")]
    InvalidGrid(String),

    #[error("integration failed: {0}")]
    Integration(String),

    #[error("invalid source: {0}")]
    InvalidSource(String),

    #[error("operation requires a {expected} source")]
    WrongSource { expected: &'static str },

    #[error("monomial with {0} ladder operators exceeds the limit of 16")]
    MonomialTooLong(usize),

    #[error("Fock cutoff {cutoff} too small: truncated weight {tail_mass:e} exceeds 1e-12")]
    CutoffTooSmall { cutoff: usize, tail_mass: f64 },

    #[error("normalized coincidence stays above 1/2 up to h = {h_max:e} m")]
    NoCrossing { h_max: f64 },

    #[error("invalid sweep: {0}")]
    InvalidSweep(String),

    #[error("unknown {kind} `{name}` (available: {available})")]
    UnknownStrategy {
        kind: &'static str,
        name: String,
        available: String,
    },
}

//! Simulation core for gravitationally induced decoherence of photon-pair
//! correlations.
//!
//! One photon of a pair stays in the source/detector shell while its partner
//! climbs radially to a mirror at height `h` and returns. The two paths
//! accumulate different integrated shell-frame times, which displaces the
//! space-time labels of the detected mode operators by `Δ`. Entangled pairs
//! lose their coincidences once `Δ` exceeds the mode bandwidth; classically
//! correlated pulses do not.
//!
//! Everything is expressed in geometric units (`c = G = 1`), so masses,
//! times and distances are all lengths in metres.
//!
//! Module map:
//!
//! * [`geometry`]: shell-frame intervals and the path asymmetry `Δ`.
//! * [`modes`]: normalized mode functions and the overlap commutator `K`.
//! * [`opalg`]: affine ladder-operator expressions and Wick evaluation.
//! * [`fock`]: truncated Fock-space oracle for the coincidence rate.
//! * [`experiment`]: the two-path scenario, height sweeps, summary statistics.
//! * [`registry`]: named strategies for `Δ` and for the coincidence engine.

pub mod error;
pub mod experiment;
pub mod fock;
pub mod geometry;
pub mod modes;
pub mod opalg;
pub mod quadrature;
pub mod registry;

pub use error::{Error, Result};
pub use experiment::{ExperimentConfig, ScenarioResult};
pub use geometry::{MetricContext, PathGeometry};
pub use modes::{ModeFunction, SpaceTimeLabel};
pub use opalg::{OperatorExpr, SourceModel};

//! Affine ladder-operator expressions and their vacuum expectation values.
//!
//! Detector operators evolved back to the source inputs are affine in the
//! input ladder operators: a scalar plus a linear combination of `â_b(ξ)`
//! and `â_b†(ξ)`. A product of such factors expands into monomials whose
//! vacuum expectations follow from full contraction with the commutator
//! kernel `[â_b(ξ), â_b'†(ξ')] = δ_bb' K(ξ, ξ')`, where `K` is
//! [`modes::overlap`].

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::modes::{self, ModeFunction, SpaceTimeLabel};

/// Longest ladder-operator monomial the contraction engine accepts.
pub const MAX_MONOMIAL_LEN: usize = 16;

/// Above this the down-conversion gain is flagged as outside the weak-pump regime.
pub const CHI_WARN: f64 = 0.1;
/// Hard cap on the down-conversion gain.
pub const CHI_MAX: f64 = 0.3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Beam {
    One,
    Two,
}

impl Beam {
    pub fn partner(self) -> Beam {
        match self {
            Beam::One => Beam::Two,
            Beam::Two => Beam::One,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LadderOp {
    pub beam: Beam,
    pub label: SpaceTimeLabel,
    pub dagger: bool,
}

impl LadderOp {
    pub fn annihilate(beam: Beam, label: SpaceTimeLabel) -> Self {
        LadderOp {
            beam,
            label,
            dagger: false,
        }
    }

    pub fn create(beam: Beam, label: SpaceTimeLabel) -> Self {
        LadderOp {
            beam,
            label,
            dagger: true,
        }
    }

    pub fn adjoint(self) -> Self {
        LadderOp {
            dagger: !self.dagger,
            ..self
        }
    }
}

impl fmt::Display for LadderOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let b = match self.beam {
            Beam::One => 1,
            Beam::Two => 2,
        };
        let dag = if self.dagger { "†" } else { "" };
        write!(f, "a{b}{dag}({:e},{:e})", self.label.s, self.label.l)
    }
}

/// `scalar + Σ cᵢ opᵢ`, affine in ladder operators.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct OperatorExpr {
    pub scalar: Complex64,
    pub terms: Vec<(Complex64, LadderOp)>,
}

impl OperatorExpr {
    pub fn op(op: LadderOp) -> Self {
        OperatorExpr {
            scalar: Complex64::new(0.0, 0.0),
            terms: vec![(Complex64::new(1.0, 0.0), op)],
        }
    }

    pub fn plus_scalar(mut self, c: Complex64) -> Self {
        self.scalar += c;
        self
    }

    pub fn plus_term(mut self, coefficient: Complex64, op: LadderOp) -> Self {
        self.terms.push((coefficient, op));
        self
    }

    pub fn adjoint(&self) -> Self {
        OperatorExpr {
            scalar: self.scalar.conj(),
            terms: self
                .terms
                .iter()
                .map(|(c, op)| (c.conj(), op.adjoint()))
                .collect(),
        }
    }
}

impl fmt::Display for OperatorExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        for (c, op) in &self.terms {
            parts.push(if *c == Complex64::new(1.0, 0.0) {
                op.to_string()
            } else {
                format!("({c})·{op}")
            });
        }
        if self.scalar != Complex64::new(0.0, 0.0) || parts.is_empty() {
            parts.push(format!("({})", self.scalar));
        }
        f.write_str(&parts.join(" + "))
    }
}

/// The source at `S`: matched coherent displacement or weak down-conversion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SourceModel {
    Coherent { alpha: Complex64 },
    Pdc { chi: f64 },
}

impl SourceModel {
    pub fn coherent(alpha: f64) -> Result<Self> {
        SourceModel::Coherent {
            alpha: Complex64::new(alpha, 0.0),
        }
        .validated()
    }

    /// Values of `chi` above [`CHI_WARN`] are accepted with a logged warning.
    pub fn pdc(chi: f64) -> Result<Self> {
        let source = SourceModel::Pdc { chi }.validated()?;
        if chi > CHI_WARN {
            log::warn!(
                "chi = {chi} exceeds {CHI_WARN}; the affine down-conversion map assumes chi << 1"
            );
        }
        Ok(source)
    }

    /// Checks parameter ranges. `chi` must lie in `[0, CHI_MAX]`.
    pub fn validated(self) -> Result<Self> {
        match self {
            SourceModel::Coherent { alpha } => {
                if !(alpha.re.is_finite() && alpha.im.is_finite()) {
                    return Err(Error::InvalidSource(format!(
                        "alpha must be finite, got {alpha}"
                    )));
                }
            }
            SourceModel::Pdc { chi } => {
                if !(chi.is_finite() && (0.0..=CHI_MAX).contains(&chi)) {
                    return Err(Error::InvalidSource(format!(
                        "chi must lie in [0, {CHI_MAX}], got {chi}"
                    )));
                }
            }
        }
        Ok(self)
    }

    pub fn name(&self) -> &'static str {
        match self {
            SourceModel::Coherent { .. } => "coherent",
            SourceModel::Pdc { .. } => "pdc",
        }
    }
}

/// Detector operators `(â_m1, â_m2)` in terms of the source inputs.
///
/// * Coherent: `â₁(ξ₁) + α`, `â₂(ξ₂) + α`.
/// * Down-conversion: `â₁(ξ₁) + χ â₂†(ξ₁)`, `â₂(ξ₂) + χ â₁†(ξ₂)`; each
///   conjugate term carries its partner detector's label.
pub fn apply_source(
    source: &SourceModel,
    label_1: SpaceTimeLabel,
    label_2: SpaceTimeLabel,
) -> (OperatorExpr, OperatorExpr) {
    let a1 = OperatorExpr::op(LadderOp::annihilate(Beam::One, label_1));
    let a2 = OperatorExpr::op(LadderOp::annihilate(Beam::Two, label_2));
    match *source {
        SourceModel::Coherent { alpha } => (a1.plus_scalar(alpha), a2.plus_scalar(alpha)),
        SourceModel::Pdc { chi } => {
            let chi = Complex64::new(chi, 0.0);
            (
                a1.plus_term(chi, LadderOp::create(Beam::Two, label_1)),
                a2.plus_term(chi, LadderOp::create(Beam::One, label_2)),
            )
        }
    }
}

/// Pairwise commutator `[x, y]` of two ladder operators.
///
/// Zero unless the operators share a beam and exactly one is a creator;
/// `[â(ξ), â†(ξ')] = K(ξ, ξ')`, `[â†(ξ), â(ξ')] = -K(ξ', ξ)`.
pub fn commutator(mode: &ModeFunction, x: &LadderOp, y: &LadderOp) -> Result<f64> {
    if x.beam != y.beam || x.dagger == y.dagger {
        return Ok(0.0);
    }
    if x.dagger {
        Ok(-modes::overlap(mode, y.label, x.label)?)
    } else {
        modes::overlap(mode, x.label, y.label)
    }
}

/// Overlap lookup over the distinct labels of one expectation.
struct Kernel {
    labels: Vec<SpaceTimeLabel>,
    table: Vec<f64>,
}

impl Kernel {
    fn build(mode: &ModeFunction, factors: &[OperatorExpr]) -> Result<Self> {
        let mut labels: Vec<SpaceTimeLabel> = Vec::new();
        for (_, op) in factors.iter().flat_map(|f| f.terms.iter()) {
            if !labels.contains(&op.label) {
                labels.push(op.label);
            }
        }
        let n = labels.len();
        let mut table = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                table[i * n + j] = modes::overlap(mode, labels[i], labels[j])?;
            }
        }
        Ok(Kernel { labels, table })
    }

    fn index(&self, label: &SpaceTimeLabel) -> usize {
        self.labels
            .iter()
            .position(|l| l == label)
            .expect("kernel built from the same factors")
    }
}

/// A monomial with operators replaced by kernel indices.
#[derive(Clone, Copy)]
struct IndexedOp {
    beam: Beam,
    label: usize,
    dagger: bool,
}

/// `⟨0| x₁ x₂ … xₙ |0⟩` by moving the leftmost annihilator to the right.
fn contract(ops: &[IndexedOp], kernel: &Kernel) -> f64 {
    let Some((first, rest)) = ops.split_first() else {
        return 1.0;
    };
    if first.dagger {
        return 0.0;
    }
    let creators = rest.iter().filter(|o| o.dagger).count();
    if creators != rest.len() - creators + 1 {
        return 0.0;
    }
    let n = kernel.labels.len();
    let mut total = 0.0;
    let mut remaining = Vec::with_capacity(rest.len().saturating_sub(1));
    for (j, partner) in rest.iter().enumerate() {
        if !partner.dagger || partner.beam != first.beam {
            continue;
        }
        let k = kernel.table[first.label * n + partner.label];
        if k == 0.0 {
            continue;
        }
        remaining.clear();
        remaining.extend(
            rest.iter()
                .enumerate()
                .filter(|&(i, _)| i != j)
                .map(|(_, o)| *o),
        );
        total += k * contract(&remaining, kernel);
    }
    total
}

/// Vacuum expectation of an ordered product of affine factors.
///
/// The product is expanded distributively and each ladder monomial is
/// contracted exactly; nothing is truncated in the source parameters. Pass
/// `expr.adjoint()` for adjoint factors.
pub fn vacuum_expectation(factors: &[OperatorExpr], mode: &ModeFunction) -> Result<Complex64> {
    let total_ops: usize = factors
        .iter()
        .map(|f| usize::from(!f.terms.is_empty()))
        .sum();
    if total_ops > MAX_MONOMIAL_LEN {
        return Err(Error::MonomialTooLong(total_ops));
    }
    let kernel = Kernel::build(mode, factors)?;

    let indexed: Vec<Vec<(Complex64, IndexedOp)>> = factors
        .iter()
        .map(|f| {
            f.terms
                .iter()
                .map(|(c, op)| {
                    (
                        *c,
                        IndexedOp {
                            beam: op.beam,
                            label: kernel.index(&op.label),
                            dagger: op.dagger,
                        },
                    )
                })
                .collect()
        })
        .collect();

    let mut sum = Complex64::new(0.0, 0.0);
    let mut monomial = Vec::with_capacity(factors.len());
    expand(
        factors,
        &indexed,
        0,
        Complex64::new(1.0, 0.0),
        &mut monomial,
        &kernel,
        &mut sum,
    );
    Ok(sum)
}

fn expand(
    factors: &[OperatorExpr],
    indexed: &[Vec<(Complex64, IndexedOp)>],
    depth: usize,
    coefficient: Complex64,
    monomial: &mut Vec<IndexedOp>,
    kernel: &Kernel,
    sum: &mut Complex64,
) {
    if coefficient == Complex64::new(0.0, 0.0) {
        return;
    }
    if depth == factors.len() {
        *sum += coefficient * contract(monomial, kernel);
        return;
    }
    let scalar = factors[depth].scalar;
    expand(
        factors,
        indexed,
        depth + 1,
        coefficient * scalar,
        monomial,
        kernel,
        sum,
    );
    for (c, op) in &indexed[depth] {
        monomial.push(*op);
        expand(
            factors,
            indexed,
            depth + 1,
            coefficient * c,
            monomial,
            kernel,
            sum,
        );
        monomial.pop();
    }
}

/// Coincidence rate `⟨â_m1† â_m1 â_m2† â_m2⟩` from the exact Wick engine.
pub fn coincidence(
    source: &SourceModel,
    label_1: SpaceTimeLabel,
    label_2: SpaceTimeLabel,
    mode: &ModeFunction,
) -> Result<f64> {
    let (m1, m2) = apply_source(source, label_1, label_2);
    let value = vacuum_expectation(&[m1.adjoint(), m1, m2.adjoint(), m2], mode)?;
    debug_assert!(value.im.abs() < 1e-14 * value.re.abs().max(1.0));
    Ok(value.re)
}

/// The coincidence rate kept to second order in `χ`: `χ² K(ξ₁, ξ₂)²`.
pub fn coincidence_second_order(
    source: &SourceModel,
    label_1: SpaceTimeLabel,
    label_2: SpaceTimeLabel,
    mode: &ModeFunction,
) -> Result<f64> {
    match *source {
        SourceModel::Pdc { chi } => {
            let k = modes::overlap(mode, label_1, label_2)?;
            Ok(chi * chi * k * k)
        }
        SourceModel::Coherent { .. } => Err(Error::WrongSource { expected: "pdc" }),
    }
}

/// Strategy interface for evaluating the coincidence rate.
pub trait CoincidenceEngine: fmt::Debug + Send + Sync {
    fn name(&self) -> &'static str;

    fn coincidence(
        &self,
        source: &SourceModel,
        label_1: SpaceTimeLabel,
        label_2: SpaceTimeLabel,
        mode: &ModeFunction,
    ) -> Result<f64>;
}

/// Exact affine Wick contraction.
#[derive(Debug, Clone, Copy, Default)]
pub struct WickEngine;

impl CoincidenceEngine for WickEngine {
    fn name(&self) -> &'static str {
        "wick"
    }

    fn coincidence(
        &self,
        source: &SourceModel,
        label_1: SpaceTimeLabel,
        label_2: SpaceTimeLabel,
        mode: &ModeFunction,
    ) -> Result<f64> {
        coincidence(source, label_1, label_2, mode)
    }
}

/// `χ² K²` for down-conversion; coherent sources have no truncation and
/// fall back to the exact engine.
#[derive(Debug, Clone, Copy, Default)]
pub struct SecondOrderEngine;

impl CoincidenceEngine for SecondOrderEngine {
    fn name(&self) -> &'static str {
        "second-order"
    }

    fn coincidence(
        &self,
        source: &SourceModel,
        label_1: SpaceTimeLabel,
        label_2: SpaceTimeLabel,
        mode: &ModeFunction,
    ) -> Result<f64> {
        match source {
            SourceModel::Pdc { .. } => coincidence_second_order(source, label_1, label_2, mode),
            SourceModel::Coherent { .. } => coincidence(source, label_1, label_2, mode),
        }
    }
}

//! Truncated Fock-space evaluation of the coincidence rate.
//!
//! Independent of the contraction engine in [`crate::opalg`]: the two labelled
//! modes of each beam are orthonormalized with the overlap `K`, every ladder
//! operator becomes an explicit action on number-basis state vectors, and
//! `⟨n₁ n₂⟩` is an inner product.
//!
//! * Coherent source: the displaced vacuum `|α⟩ ⊗ |α⟩` is built directly in
//!   the number basis (Schrödinger picture) and the bare detector number
//!   operators are measured.
//! * Down-conversion: the affine detector operators
//!   `â₁(ξ₁) + χ â₂†(ξ₁)`, `â₂(ξ₂) + χ â₁†(ξ₂)` act on the vacuum.
//!
//! [`squeezed_vacuum_coincidence`] measures the same detector modes on the
//! unitary two-mode squeezed vacuum instead, for comparison with the affine
//! map at fourth order.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::modes::{self, ModeFunction, SpaceTimeLabel};
use crate::opalg::SourceModel;

/// Largest discarded weight tolerated from truncation.
pub const TAIL_MASS_LIMIT: f64 = 1e-12;

/// Per-mode relative accuracy target used by [`required_cutoff`].
const CUTOFF_TAIL_TARGET: f64 = 1e-13;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Product space of truncated oscillators; mode `k` keeps levels `0..dims[k]`.
#[derive(Debug, Clone)]
struct FockSpace {
    dims: Vec<usize>,
    strides: Vec<usize>,
    size: usize,
}

impl FockSpace {
    fn new(dims: Vec<usize>) -> Self {
        let mut strides = vec![1; dims.len()];
        for k in (0..dims.len().saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * dims[k + 1];
        }
        let size = dims.iter().product();
        FockSpace {
            dims,
            strides,
            size,
        }
    }

    fn vacuum(&self) -> Vec<Complex64> {
        let mut v = vec![ZERO; self.size];
        v[0] = Complex64::new(1.0, 0.0);
        v
    }

    fn level(&self, index: usize, mode: usize) -> usize {
        (index / self.strides[mode]) % self.dims[mode]
    }

    /// `out += c · â_mode ψ`.
    fn add_lower(&self, mode: usize, c: f64, psi: &[Complex64], out: &mut [Complex64]) {
        let stride = self.strides[mode];
        for (i, amp) in psi.iter().enumerate() {
            let n = self.level(i, mode);
            if n > 0 && *amp != ZERO {
                out[i - stride] += amp * (c * (n as f64).sqrt());
            }
        }
    }

    /// `out += c · â_mode† ψ`, returning the squared norm lost at the cutoff.
    fn add_raise(&self, mode: usize, c: f64, psi: &[Complex64], out: &mut [Complex64]) -> f64 {
        let stride = self.strides[mode];
        let top = self.dims[mode] - 1;
        let mut dropped = 0.0;
        for (i, amp) in psi.iter().enumerate() {
            if *amp == ZERO {
                continue;
            }
            let n = self.level(i, mode);
            let v = amp * (c * ((n + 1) as f64).sqrt());
            if n == top {
                dropped += v.norm_sqr();
            } else {
                out[i + stride] += v;
            }
        }
        dropped
    }
}

/// `Σ c (â or â†)` over orthonormal modes.
#[derive(Debug, Clone, Default)]
struct ModeOperator {
    lower: Vec<(usize, f64)>,
    raise: Vec<(usize, f64)>,
}

impl ModeOperator {
    fn annihilator(components: &[(usize, f64)]) -> Self {
        ModeOperator {
            lower: components.to_vec(),
            ..Default::default()
        }
    }

    fn with_creator(mut self, c: f64, components: &[(usize, f64)]) -> Self {
        self.raise
            .extend(components.iter().map(|&(m, w)| (m, c * w)));
        self
    }

    /// Applies the operator, tracking the relative weight lost at the cutoff.
    fn apply(&self, space: &FockSpace, psi: &[Complex64], tail: &mut f64) -> Vec<Complex64> {
        let mut out = vec![ZERO; psi.len()];
        for &(m, c) in &self.lower {
            space.add_lower(m, c, psi, &mut out);
        }
        let mut dropped = 0.0;
        for &(m, c) in &self.raise {
            dropped += space.add_raise(m, c, psi, &mut out);
        }
        if dropped > 0.0 {
            let kept = norm_sqr(&out);
            *tail = tail.max(dropped / (dropped + kept));
        }
        out
    }
}

fn norm_sqr(psi: &[Complex64]) -> f64 {
    psi.iter().map(Complex64::norm_sqr).sum()
}

fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Components of the two labelled modes in an orthonormal pair `(e₁, e₂)`
/// with `e₁ = G_ξ₁`: `ξ₁ → (1, 0)`, `ξ₂ → (K, sqrt(1 - K²))`.
fn gram_schmidt(k: f64) -> ([f64; 2], [f64; 2]) {
    ([1.0, 0.0], [k, (1.0 - k * k).max(0.0).sqrt()])
}

fn components(offset: usize, coeffs: [f64; 2]) -> Vec<(usize, f64)> {
    coeffs
        .iter()
        .enumerate()
        .filter(|(_, c)| **c != 0.0)
        .map(|(i, c)| (offset + i, *c))
        .collect()
}

fn check_cutoff(cutoff: usize) -> Result<()> {
    if cutoff < 2 {
        return Err(Error::CutoffTooSmall {
            cutoff,
            tail_mass: 1.0,
        });
    }
    Ok(())
}

/// Smallest cutoff whose truncation loss is below the oracle's tail limit.
///
/// For a coherent mode the cutoff also bounds the relative error of the
/// photon number: levels at and above `cutoff` carry a fraction
/// `P(n >= cutoff - 1)` of `⟨n⟩`.
pub fn required_cutoff(source: &SourceModel) -> usize {
    match *source {
        // Products of four affine operators reach at most two quanta per mode.
        SourceModel::Pdc { .. } => 3,
        SourceModel::Coherent { alpha } => {
            let mean = alpha.norm_sqr();
            let mut n = 0;
            while poisson_tail(mean, n) > CUTOFF_TAIL_TARGET {
                n += 1;
            }
            (n + 1).max(3)
        }
    }
}

/// Weight of a Poisson(`mean`) distribution at `n` and above, summed
/// upward so small tails keep their relative precision.
fn poisson_tail(mean: f64, n: usize) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let mut term = (-mean).exp();
    for k in 0..n {
        term *= mean / (k + 1) as f64;
    }
    let mut sum = 0.0;
    let mut k = n;
    while term > 0.0 && (term > 1e-17 * sum || (k as f64) < mean) {
        sum += term;
        k += 1;
        term *= mean / k as f64;
    }
    sum.min(1.0)
}

/// Number-basis amplitudes of the coherent state `|β⟩` up to `cutoff`.
fn coherent_amplitudes(beta: f64, cutoff: usize) -> Vec<f64> {
    let mut amps = Vec::with_capacity(cutoff);
    let mut a = (-0.5 * beta * beta).exp();
    for n in 0..cutoff {
        amps.push(a);
        a *= beta / ((n + 1) as f64).sqrt();
    }
    amps
}

/// Coincidence rate `⟨n₁ n₂⟩` from the truncated Fock space.
///
/// Fails with [`Error::CutoffTooSmall`] when truncation discards more than
/// [`TAIL_MASS_LIMIT`] of the state.
pub fn fock_oracle(
    source: &SourceModel,
    label_1: SpaceTimeLabel,
    label_2: SpaceTimeLabel,
    mode: &ModeFunction,
    cutoff: usize,
) -> Result<f64> {
    check_cutoff(cutoff)?;
    let k = modes::overlap(mode, label_1, label_2)?;
    let (xi1, xi2) = gram_schmidt(k);

    match *source {
        SourceModel::Coherent { alpha } => {
            // Modes: beam 1 along ξ₁, beam 2 along e₁ and e₂. The displaced
            // mode of beam 2 is ξ₂, i.e. amplitudes (Kα, sqrt(1-K²)α).
            let space = FockSpace::new(vec![cutoff; 3]);
            let magnitude = alpha.norm();
            let phase = if magnitude > 0.0 {
                alpha / magnitude
            } else {
                Complex64::new(1.0, 0.0)
            };
            let factors = [
                coherent_amplitudes(magnitude, cutoff),
                coherent_amplitudes(xi2[0] * magnitude, cutoff),
                coherent_amplitudes(xi2[1] * magnitude, cutoff),
            ];
            let kept: f64 = factors
                .iter()
                .map(|f| f.iter().map(|a| a * a).sum::<f64>())
                .product();
            let tail_mass = 1.0 - kept;
            if tail_mass > TAIL_MASS_LIMIT {
                return Err(Error::CutoffTooSmall { cutoff, tail_mass });
            }
            let mut psi = vec![ZERO; space.size];
            for (i, amp) in psi.iter_mut().enumerate() {
                let (n0, n1, n2) = (space.level(i, 0), space.level(i, 1), space.level(i, 2));
                let total = (n0 + n1 + n2) as i32;
                *amp = phase.powi(total) * (factors[0][n0] * factors[1][n1] * factors[2][n2]);
            }
            let norm = norm_sqr(&psi).sqrt();
            psi.iter_mut().for_each(|a| *a /= norm);

            let mut tail = 0.0;
            let d1 = ModeOperator::annihilator(&components(0, xi1));
            let d2 = ModeOperator::annihilator(&components(1, xi2));
            let n1 = number(&space, &d1, &psi, &mut tail);
            let n2 = number(&space, &d2, &psi, &mut tail);
            Ok(inner(&n1, &n2).re)
        }
        SourceModel::Pdc { chi } => {
            // Modes: beam 1 (e₁, e₂), beam 2 (e₁, e₂).
            let space = FockSpace::new(vec![cutoff; 4]);
            let b1 = |c: [f64; 2]| components(0, c);
            let b2 = |c: [f64; 2]| components(2, c);
            let m1 = ModeOperator::annihilator(&b1(xi1)).with_creator(chi, &b2(xi1));
            let m2 = ModeOperator::annihilator(&b2(xi2)).with_creator(chi, &b1(xi2));
            let m2_dag = adjoint(&m2);

            let mut tail = 0.0;
            let vac = space.vacuum();
            // ⟨0| m1† m1 m2† m2 |0⟩ = ⟨m1 0 | m1 m2† m2 0⟩
            let left = m1.apply(&space, &vac, &mut tail);
            let right = m2.apply(&space, &vac, &mut tail);
            let right = m2_dag.apply(&space, &right, &mut tail);
            let right = m1.apply(&space, &right, &mut tail);
            if tail > TAIL_MASS_LIMIT {
                return Err(Error::CutoffTooSmall {
                    cutoff,
                    tail_mass: tail,
                });
            }
            Ok(inner(&left, &right).re)
        }
    }
}

fn adjoint(op: &ModeOperator) -> ModeOperator {
    ModeOperator {
        lower: op.raise.clone(),
        raise: op.lower.clone(),
    }
}

/// `d† d ψ` for a real-coefficient annihilator `d`.
fn number(
    space: &FockSpace,
    d: &ModeOperator,
    psi: &[Complex64],
    tail: &mut f64,
) -> Vec<Complex64> {
    let lowered = d.apply(space, psi, tail);
    adjoint(d).apply(space, &lowered, tail)
}

/// `⟨n₁ n₂⟩` for the unitary two-mode squeezed vacuum with `sinh r = χ`,
/// pairing beam 1 and beam 2 in each orthonormal mode.
///
/// Analytically `sinh⁴ r + cosh² r sinh² r K²`, which exceeds the affine
/// result `χ⁴ + χ² K²` by `χ⁴ K²`.
pub fn squeezed_vacuum_coincidence(
    chi: f64,
    label_1: SpaceTimeLabel,
    label_2: SpaceTimeLabel,
    mode: &ModeFunction,
    cutoff: usize,
) -> Result<f64> {
    check_cutoff(cutoff)?;
    SourceModel::pdc(chi)?;
    let k = modes::overlap(mode, label_1, label_2)?;
    let (xi1, xi2) = gram_schmidt(k);

    let r = chi.asinh();
    let lambda = r.tanh();
    let tail_mass = 1.0 - (1.0 - lambda.powi(2 * cutoff as i32)).powi(2);
    if tail_mass > TAIL_MASS_LIMIT {
        return Err(Error::CutoffTooSmall { cutoff, tail_mass });
    }

    // Modes: beam 1 (e₁, e₂), beam 2 (e₁, e₂); pairs (0, 2) and (1, 3).
    let space = FockSpace::new(vec![cutoff; 4]);
    let pair: Vec<f64> = (0..cutoff)
        .map(|n| lambda.powi(n as i32) / r.cosh())
        .collect();
    let mut psi = vec![ZERO; space.size];
    for p in 0..cutoff {
        for q in 0..cutoff {
            let idx = p * space.strides[0]
                + q * space.strides[1]
                + p * space.strides[2]
                + q * space.strides[3];
            psi[idx] = Complex64::new(pair[p] * pair[q], 0.0);
        }
    }
    let norm = norm_sqr(&psi).sqrt();
    psi.iter_mut().for_each(|a| *a /= norm);

    let mut tail = 0.0;
    let d1 = ModeOperator::annihilator(&components(0, xi1));
    let d2 = ModeOperator::annihilator(&components(2, xi2));
    let n1 = number(&space, &d1, &psi, &mut tail);
    let n2 = number(&space, &d2, &psi, &mut tail);
    Ok(inner(&n1, &n2).re)
}

/// [`fock_oracle`] as a [`crate::opalg::CoincidenceEngine`], with the
/// cutoff picked by [`required_cutoff`].
#[derive(Debug, Clone, Copy, Default)]
pub struct FockEngine;

impl crate::opalg::CoincidenceEngine for FockEngine {
    fn name(&self) -> &'static str {
        "fock"
    }

    fn coincidence(
        &self,
        source: &SourceModel,
        label_1: SpaceTimeLabel,
        label_2: SpaceTimeLabel,
        mode: &ModeFunction,
    ) -> Result<f64> {
        fock_oracle(source, label_1, label_2, mode, required_cutoff(source))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modes::gaussian_mode;

    fn mode() -> ModeFunction {
        gaussian_mode(1e-5, 1e-3).unwrap()
    }

    fn labels_for_overlap(k: f64) -> (SpaceTimeLabel, SpaceTimeLabel) {
        // Joint shift δ in s and l with exp(-δ²/(2 d_eff²)) = K.
        let d_eff = mode().effective_width().unwrap();
        let delta = d_eff * (-2.0 * k.ln()).sqrt();
        (SpaceTimeLabel::default(), SpaceTimeLabel::new(delta, delta))
    }

    #[test]
    fn coherent_matches_alpha_fourth() {
        let source = SourceModel::coherent(0.5).unwrap();
        for k in [1.0, 0.5, 1e-3] {
            let (l1, l2) = labels_for_overlap(k);
            let c = fock_oracle(&source, l1, l2, &mode(), required_cutoff(&source)).unwrap();
            assert!((c - 0.0625).abs() < 1e-10, "K = {k}: {c}");
        }
    }

    #[test]
    fn pdc_coincident_labels() {
        let source = SourceModel::pdc(0.01).unwrap();
        let (l1, l2) = labels_for_overlap(1.0);
        let c = fock_oracle(&source, l1, l2, &mode(), 3).unwrap();
        // χ² plus the χ⁴ term of the affine map.
        let expected = 1e-4 + 1e-8;
        assert!((c - expected).abs() < 1e-12 * expected, "{c:e}");
    }

    #[test]
    fn pdc_orthogonal_labels() {
        let source = SourceModel::pdc(0.01).unwrap();
        let l1 = SpaceTimeLabel::default();
        let l2 = SpaceTimeLabel::new(1.0, 1.0);
        let c = fock_oracle(&source, l1, l2, &mode(), 3).unwrap();
        // The correlated χ² term is gone; only the accidental χ⁴ pair remains.
        assert!((c - 1e-8).abs() < 1e-20, "{c:e}");
    }

    #[test]
    fn cutoff_too_small() {
        let (l1, l2) = labels_for_overlap(0.7);
        let pdc = SourceModel::pdc(0.05).unwrap();
        assert!(matches!(
            fock_oracle(&pdc, l1, l2, &mode(), 2),
            Err(Error::CutoffTooSmall { cutoff: 2, .. })
        ));
        let coherent = SourceModel::coherent(1.0).unwrap();
        assert!(matches!(
            fock_oracle(&coherent, l1, l2, &mode(), 5),
            Err(Error::CutoffTooSmall { cutoff: 5, .. })
        ));
        assert!(fock_oracle(&pdc, l1, l2, &mode(), 1).is_err());
    }

    #[test]
    fn required_cutoff_grows_with_amplitude() {
        let small = required_cutoff(&SourceModel::coherent(0.1).unwrap());
        let large = required_cutoff(&SourceModel::coherent(1.0).unwrap());
        assert!(small >= 3 && small < large);
        assert!(poisson_tail(1.0, large - 1) <= CUTOFF_TAIL_TARGET);
        assert!((poisson_tail(1.0, 0) - 1.0).abs() < 1e-15);
        assert!((poisson_tail(1.0, 2) - (1.0 - 2.0 / 1f64.exp())).abs() < 1e-15);
        let mu = 1e-4;
        assert!((poisson_tail(mu, 3) / (mu.powi(3) / 6.0) - 1.0).abs() < 1e-3);
        assert_eq!(required_cutoff(&SourceModel::pdc(0.1).unwrap()), 3);
    }

    #[test]
    fn weak_coherent_source_keeps_relative_accuracy() {
        let alpha = 0.0087;
        let source = SourceModel::coherent(alpha).unwrap();
        let (l1, l2) = labels_for_overlap(0.65);
        let c = fock_oracle(&source, l1, l2, &mode(), required_cutoff(&source)).unwrap();
        assert!((c / alpha.powi(4) - 1.0).abs() < 1e-12, "{c}");
    }

    #[test]
    fn squeezed_vacuum_closed_form_and_affine_gap() {
        for (chi, k) in [(0.01, 1.0), (0.05, 0.6), (0.1, 0.2), (0.1, 1.0)] {
            let (l1, l2) = labels_for_overlap(k);
            let r: f64 = f64::asinh(chi);
            let (s, c) = (r.sinh(), r.cosh());
            let expected = s.powi(4) + c * c * s * s * k * k;
            let v = squeezed_vacuum_coincidence(chi, l1, l2, &mode(), 12).unwrap();
            assert!(
                (v - expected).abs() < 1e-12 * expected,
                "{v:e} vs {expected:e}"
            );

            let affine = fock_oracle(&SourceModel::pdc(chi).unwrap(), l1, l2, &mode(), 3).unwrap();
            assert!((v - affine).abs() <= chi.powi(4) * (1.0 + 1e-9));
        }
    }
}

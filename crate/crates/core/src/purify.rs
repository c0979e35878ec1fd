//! Canonical purifications and compression by purification.
//!
//! A mixed state ρ = Σ λᵢ |eᵢ⟩⟨eᵢ| has the canonical purification
//! |ψ⟩ = Σ √λᵢ |eᵢ⟩⊗|eᵢ⟩. For simultaneously diagonal states these are
//! pairwise as parallel as Uhlmann's theorem allows, so sending them through
//! pure-state (Schumacher) compression costs the entropy of their mixture.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::measures::{binary_entropy, holevo, vn_entropy, Ensemble, ProbVector, COMMUTE_TOL};
use crate::qmat::{partial_trace, ComplexMatrix, DensityOperator, PureState, C64};

/// A pure state on H_d ⊗ H_d whose first factor is `source`.
#[derive(Clone, Debug)]
pub struct Purification {
    pub state: PureState,
    pub source: DensityOperator,
    pub factor_dim: usize,
}

impl Purification {
    /// Reduced state after tracing out the second factor.
    pub fn reduced(&self) -> DensityOperator {
        partial_trace(&self.state.density(), &[self.factor_dim, self.factor_dim], 0)
            .expect("purification dimensions are consistent")
    }
}

fn purification_in_basis(weights: &[f64], basis: &DMatrix<C64>) -> DVector<C64> {
    let d = weights.len();
    let mut psi = DVector::<C64>::zeros(d * d);
    for (i, &w) in weights.iter().enumerate() {
        if w <= 0.0 {
            continue;
        }
        let e = basis.column(i).into_owned();
        psi += e.kronecker(&e) * C64::new(w.sqrt(), 0.0);
    }
    psi
}

/// |ψ⟩ = Σ √λᵢ |eᵢ⟩⊗|eᵢ⟩ over the spectrum of ρ.
pub fn canonical_purification(rho: &DensityOperator) -> Purification {
    let spec = rho.spectrum();
    let psi = purification_in_basis(&spec.eigenvalues, spec.eigenvectors.as_dmatrix());
    Purification {
        state: PureState::normalized(psi).expect("a density operator has a nonzero eigenvalue"),
        source: rho.clone(),
        factor_dim: rho.dim(),
    }
}

/// |⟨ψ₁|ψ₂⟩|² for the canonical purifications of two commuting states,
/// built in a shared diagonalizing basis.
///
/// `basis` (columns) may be supplied explicitly; otherwise a basis is derived
/// from a generic combination of the two states. The overlap does not depend
/// on how degenerate joint eigenspaces are split.
pub fn canonical_overlap(r1: &DensityOperator, r2: &DensityOperator, basis: Option<&ComplexMatrix>) -> Result<f64> {
    if r1.dim() != r2.dim() {
        return Err(Error::DimensionMismatch(format!(
            "states of dimension {} and {}",
            r1.dim(),
            r2.dim()
        )));
    }
    let norm = r1.matrix().commutator(r2.matrix()).max_abs();
    if norm > COMMUTE_TOL {
        return Err(Error::NotCommuting {
            norm,
            tolerance: COMMUTE_TOL,
        });
    }
    let basis = match basis {
        Some(b) => b.clone(),
        None => {
            let pair = Ensemble::new(ProbVector::uniform(2)?, vec![r1.clone(), r2.clone()])?;
            pair.common_eigenbasis().ok_or(Error::NotCommuting {
                norm,
                tolerance: COMMUTE_TOL,
            })?
        }
    };
    if basis.rows() != r1.dim() || !basis.is_square() {
        return Err(Error::DimensionMismatch("common basis must be a d x d unitary".into()));
    }
    let d1 = r1.matrix().conjugate_by(&basis);
    let d2 = r2.matrix().conjugate_by(&basis);
    let off = off_diagonal_norm(&d1).max(off_diagonal_norm(&d2));
    if off > COMMUTE_TOL {
        return Err(Error::NotCommuting {
            norm: off,
            tolerance: COMMUTE_TOL,
        });
    }
    let p: Vec<f64> = d1.diagonal_real().into_iter().map(|x| x.max(0.0)).collect();
    let q: Vec<f64> = d2.diagonal_real().into_iter().map(|x| x.max(0.0)).collect();
    let psi1 = purification_in_basis(&p, basis.as_dmatrix());
    let psi2 = purification_in_basis(&q, basis.as_dmatrix());
    Ok(psi1.dotc(&psi2).norm_sqr().clamp(0.0, 1.0))
}

fn off_diagonal_norm(m: &ComplexMatrix) -> f64 {
    let n = m.rows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                worst = worst.max(m.get(i, j).norm());
            }
        }
    }
    worst
}

/// Schumacher rate of the 50/50 canonical-purification ensemble of
/// diag(ε, 1−ε) and diag(1−ε, ε): H(½ + √(ε(1−ε)), ½ − √(ε(1−ε))).
pub fn purification_rate(epsilon: f64) -> Result<f64> {
    if !(0.0..=0.5).contains(&epsilon) {
        return Err(Error::Domain(format!("epsilon must lie in [0, 1/2], got {epsilon}")));
    }
    let r = (epsilon * (1.0 - epsilon)).sqrt();
    Ok(binary_entropy(0.5 + r))
}

/// d equiprobable states, the i-th uniform on every basis vector except |i⟩.
pub fn photographic_negative_ensemble(d: usize) -> Result<Ensemble> {
    if d < 3 {
        return Err(Error::Domain(format!("photographic-negative ensemble needs d >= 3, got {d}")));
    }
    let w = 1.0 / (d as f64 - 1.0);
    let states = (0..d)
        .map(|i| {
            let diag: Vec<f64> = (0..d).map(|j| if j == i { 0.0 } else { w }).collect();
            DensityOperator::from_diagonal(&diag)
        })
        .collect::<Result<Vec<_>>>()?;
    Ensemble::new(ProbVector::uniform(d)?, states)
}

#[derive(Clone, Debug, Serialize)]
pub struct PhotographicNegativeReport {
    pub d: usize,
    /// Spectrum of the purification mixture, descending.
    pub spectrum: Vec<f64>,
    /// Compression rate S(mixture) of the purification scheme.
    pub q: f64,
    /// Holevo quantity −log₂(1 − 1/d).
    pub chi: f64,
    /// q − χ.
    pub gap: f64,
}

/// Closed-form rate (2/d) log₂(d−1) − log₂(1 − 1/d).
pub fn photographic_negative_rate_closed_form(d: usize) -> f64 {
    let df = d as f64;
    2.0 / df * (df - 1.0).log2() - (1.0 - 1.0 / df).log2()
}

/// Builds the equal mixture of canonical purifications of the
/// photographic-negative states and reports its entropy next to χ.
///
/// The purifications live in span{|eᵢ⟩⊗|eᵢ⟩}; the mixture is assembled in
/// that d-dimensional subspace.
pub fn photographic_negative_report(d: usize) -> Result<PhotographicNegativeReport> {
    let ensemble = photographic_negative_ensemble(d)?;
    let mut mixture = DMatrix::<C64>::zeros(d, d);
    for (p, rho) in ensemble.probs().as_slice().iter().zip(ensemble.states()) {
        let psi = canonical_purification(rho).state;
        let amps = psi.amplitudes();
        let coords = DVector::from_fn(d, |j, _| amps[j * d + j]);
        let leaked = amps.norm_squared() - coords.norm_squared();
        if leaked.abs() > 1e-10 {
            return Err(Error::Domain(format!(
                "purification left the symmetric subspace (weight {leaked:e})"
            )));
        }
        mixture += &coords * coords.adjoint() * C64::new(*p, 0.0);
    }
    let mixture = DensityOperator::new(ComplexMatrix::from_dmatrix(mixture))?;
    let df = d as f64;
    let expected_top = (df - 1.0) / df;
    let expected_rest = 1.0 / (df * (df - 1.0));
    let spectrum = mixture.eigenvalues();
    let deviation = spectrum
        .iter()
        .enumerate()
        .map(|(i, &x)| (x - if i == 0 { expected_top } else { expected_rest }).abs())
        .fold(0.0f64, f64::max);
    if deviation > 1e-8 {
        return Err(Error::InvariantViolation(format!(
            "purification mixture spectrum deviates from {{(d-1)/d, 1/(d(d-1))}} by {deviation:e}"
        )));
    }
    let q = vn_entropy(&mixture);
    let chi = -(1.0 - 1.0 / d as f64).log2();
    Ok(PhotographicNegativeReport {
        d,
        spectrum: mixture.eigenvalues().to_vec(),
        q,
        chi,
        gap: q - chi,
    })
}

/// Holevo quantity of the photographic-negative ensemble evaluated directly.
pub fn photographic_negative_holevo(d: usize) -> Result<f64> {
    Ok(holevo(&photographic_negative_ensemble(d)?))
}

/// Entropy of the mixture of canonical purifications of simultaneously
/// diagonal states, computed from their Gram matrix.
#[cfg(test)]
fn purification_mixture_entropy(probs: &[f64], diagonals: &[Vec<f64>]) -> Result<f64> {
    use crate::measures::entropy_bits;
    use crate::qmat::eig_hermitian;

    let n = probs.len();
    let gram = DMatrix::<C64>::from_fn(n, n, |i, j| {
        let overlap: f64 = diagonals[i]
            .iter()
            .zip(&diagonals[j])
            .map(|(a, b)| (a.max(0.0) * b.max(0.0)).sqrt())
            .sum();
        C64::new((probs[i] * probs[j]).sqrt() * overlap, 0.0)
    });
    let spec = eig_hermitian(&ComplexMatrix::from_dmatrix(gram).hermitian_part())?;
    Ok(entropy_bits(&spec.eigenvalues))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::fidelity;
    use crate::random::{random_density, random_probs, random_unitary, rotated_diagonal, rng};

    #[test]
    fn pure_state_purifies_to_product() {
        let rho = DensityOperator::from_diagonal(&[1.0, 0.0]).unwrap();
        let p = canonical_purification(&rho);
        let expected = PureState::basis(4, 0).unwrap();
        assert!((p.state.inner(&expected).unwrap().norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn maximally_mixed_purifies_to_bell_state() {
        let p = canonical_purification(&DensityOperator::maximally_mixed(2));
        let s = 1.0 / 2f64.sqrt();
        let amps = p.state.amplitudes();
        assert!((amps[0].re - s).abs() < 1e-15 && (amps[3].re - s).abs() < 1e-15);
        assert!(amps[1].norm() < 1e-15 && amps[2].norm() < 1e-15);
    }

    #[test]
    fn purification_round_trip() {
        let mut r = rng(41);
        for d in 2..5 {
            let diag = random_probs(&mut r, d);
            let rho = DensityOperator::from_diagonal(&diag).unwrap();
            assert!(canonical_purification(&rho).reduced().matrix().max_abs_diff(rho.matrix()) < 1e-8);
            let rho = random_density(&mut r, d, d);
            assert!(canonical_purification(&rho).reduced().matrix().max_abs_diff(rho.matrix()) < 1e-8);
        }
    }

    #[test]
    fn overlap_of_flip_pair() {
        for k in 0..=10 {
            let e = k as f64 * 0.05;
            let a = DensityOperator::from_diagonal(&[e, 1.0 - e]).unwrap();
            let b = DensityOperator::from_diagonal(&[1.0 - e, e]).unwrap();
            let o = canonical_overlap(&a, &b, None).unwrap();
            assert!((o - 4.0 * e * (1.0 - e)).abs() < 1e-12);
        }
    }

    #[test]
    fn overlap_of_identical_states() {
        let mut r = rng(43);
        let u = random_unitary(&mut r, 3);
        let a = rotated_diagonal(&[0.2, 0.2, 0.6], &u);
        assert!((canonical_overlap(&a, &a, Some(&u)).unwrap() - 1.0).abs() < 1e-10);
        assert!((canonical_overlap(&a, &a, None).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn overlap_matches_fidelity_for_rotated_commuting_pairs() {
        let mut r = rng(47);
        for _ in 0..20 {
            let u = random_unitary(&mut r, 3);
            let a = rotated_diagonal(&random_probs(&mut r, 3), &u);
            let b = rotated_diagonal(&random_probs(&mut r, 3), &u);
            let o = canonical_overlap(&a, &b, None).unwrap();
            assert!((o - fidelity(&a, &b).unwrap()).abs() < 1e-8);
        }
    }

    #[test]
    fn overlap_rejects_non_commuting() {
        let mut r = rng(53);
        let a = random_density(&mut r, 2, 2);
        let b = random_density(&mut r, 2, 2);
        assert!(matches!(canonical_overlap(&a, &b, None), Err(Error::NotCommuting { .. })));
    }

    #[test]
    fn purification_rate_endpoints() {
        assert!((purification_rate(0.0).unwrap() - 1.0).abs() < 1e-15);
        assert!(purification_rate(0.5).unwrap().abs() < 1e-15);
        let r = (0.25f64 * 0.75).sqrt();
        let expected = -((0.5 + r) * (0.5 + r).log2() + (0.5 - r) * (0.5 - r).log2());
        assert!((purification_rate(0.25).unwrap() - expected).abs() < 1e-15);
        assert!((expected - 0.3546).abs() < 5e-5);
        assert!(purification_rate(0.6).is_err());
        assert!(purification_rate(-0.1).is_err());
    }

    #[test]
    fn photographic_negative_states() {
        let e = photographic_negative_ensemble(3).unwrap();
        assert!(e.states()[0]
            .matrix()
            .max_abs_diff(&ComplexMatrix::from_diagonal(&[0.0, 0.5, 0.5]))
            < 1e-15);
        for d in 3..8 {
            let e = photographic_negative_ensemble(d).unwrap();
            assert!(e
                .average()
                .matrix()
                .max_abs_diff(&ComplexMatrix::identity(d).scale(1.0 / d as f64))
                < 1e-14);
            for s in e.states() {
                assert!((vn_entropy(s) - (d as f64 - 1.0).log2()).abs() < 1e-12);
            }
        }
        assert!(photographic_negative_ensemble(2).is_err());
    }

    #[test]
    fn photographic_negative_d3() {
        let rep = photographic_negative_report(3).unwrap();
        let expected = [2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0];
        for (a, b) in rep.spectrum.iter().zip(expected) {
            assert!((a - b).abs() < 1e-10);
        }
        assert!((rep.chi - 1.5f64.log2()).abs() < 1e-15);
        assert!((rep.q - (2.0 / 3.0 + 1.5f64.log2())).abs() < 1e-10);
        assert!((rep.q - photographic_negative_rate_closed_form(3)).abs() < 1e-10);
        assert!((photographic_negative_holevo(3).unwrap() - rep.chi).abs() < 1e-10);
    }

    #[test]
    fn photographic_negative_mixture_form() {
        for d in 3..7 {
            let df = d as f64;
            let e = photographic_negative_ensemble(d).unwrap();
            let mut mixture = DMatrix::<C64>::zeros(d, d);
            for rho in e.states() {
                let amps = canonical_purification(rho).state.amplitudes().clone();
                let c = DVector::from_fn(d, |j, _| amps[j * d + j]);
                mixture += &c * c.adjoint() / C64::new(df, 0.0);
            }
            let psi = DVector::from_element(d, C64::new(1.0 / df.sqrt(), 0.0));
            let expected = &psi * psi.adjoint() * C64::new((df - 2.0) / (df - 1.0), 0.0)
                + DMatrix::<C64>::identity(d, d) * C64::new(1.0 / ((df - 1.0) * df), 0.0);
            assert!((mixture - expected).camax() < 1e-12);
        }
    }

    #[test]
    fn gram_entropy_matches_two_state_rate() {
        for k in 0..=10 {
            let e = k as f64 * 0.05;
            let s = purification_mixture_entropy(&[0.5, 0.5], &[vec![e, 1.0 - e], vec![1.0 - e, e]]).unwrap();
            assert!((s - purification_rate(e).unwrap()).abs() < 1e-10);
        }
    }
}

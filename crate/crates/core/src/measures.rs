//! Entropies, fidelities and the Holevo quantity.
//!
//! All logarithms are base 2, so entropies and rates are in bits (qubits)
//! per signal.

use crate::error::{Error, Result};
use crate::qmat::{eig_hermitian, ComplexMatrix, DensityOperator, PSD_TOL};

/// Eigenvalues / probabilities below this are treated as exact zeros in
/// `x log x`.
pub const ZERO_PROB: f64 = 1e-15;
/// Probability vectors must sum to one within this tolerance.
pub const PROB_TOL: f64 = 1e-10;
/// POVM elements must sum to the identity within this tolerance.
pub const POVM_TOL: f64 = 1e-8;
/// Commutator norm below which two operators are considered commuting.
pub const COMMUTE_TOL: f64 = 1e-8;
/// Eigenvalues of ρ below this are dropped before taking √ρ in fidelity
/// evaluations; rounding noise of order 1e-16 would otherwise contribute
/// O(1e-8) to the trace norm.
const FIDELITY_SQRT_FLOOR: f64 = 1e-14;

/// Nonnegative vector summing to one.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbVector(Vec<f64>);

impl ProbVector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidProbabilities("vector is empty".into()));
        }
        if let Some(bad) = entries.iter().find(|x| !x.is_finite() || **x < 0.0) {
            return Err(Error::InvalidProbabilities(format!("entries must be nonnegative, found {bad}")));
        }
        let sum: f64 = entries.iter().sum();
        if (sum - 1.0).abs() > PROB_TOL {
            return Err(Error::InvalidProbabilities(format!(
                "entries must sum to 1 within {PROB_TOL:e}, sum is {sum}"
            )));
        }
        Ok(Self(entries))
    }

    pub fn uniform(n: usize) -> Result<Self> {
        Self::new(vec![1.0 / n as f64; n])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Probability-weighted list of same-dimension density operators.
#[derive(Clone, Debug)]
pub struct Ensemble {
    probs: ProbVector,
    states: Vec<DensityOperator>,
}

impl Ensemble {
    pub fn new(probs: ProbVector, states: Vec<DensityOperator>) -> Result<Self> {
        if probs.len() != states.len() {
            return Err(Error::LengthMismatch {
                left: probs.len(),
                right: states.len(),
            });
        }
        let dim = states[0].dim();
        if let Some(s) = states.iter().find(|s| s.dim() != dim) {
            return Err(Error::DimensionMismatch(format!(
                "ensemble states must share one dimension: found {dim} and {}",
                s.dim()
            )));
        }
        Ok(Self { probs, states })
    }

    pub fn from_pairs(pairs: Vec<(f64, DensityOperator)>) -> Result<Self> {
        let (p, s): (Vec<f64>, Vec<DensityOperator>) = pairs.into_iter().unzip();
        Self::new(ProbVector::new(p)?, s)
    }

    /// One state with probability 1.
    pub fn single(state: DensityOperator) -> Self {
        Self {
            probs: ProbVector(vec![1.0]),
            states: vec![state],
        }
    }

    pub fn probs(&self) -> &ProbVector {
        &self.probs
    }

    pub fn states(&self) -> &[DensityOperator] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.states[0].dim()
    }

    /// ρ̄ = Σ pᵢ ρᵢ.
    pub fn average(&self) -> DensityOperator {
        let refs: Vec<&DensityOperator> = self.states.iter().collect();
        DensityOperator::mix(self.probs.as_slice(), &refs).expect("ensemble invariants guarantee a valid mixture")
    }

    /// Largest pairwise commutator entry.
    pub fn max_commutator(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, a) in self.states.iter().enumerate() {
            for b in &self.states[i + 1..] {
                worst = worst.max(a.matrix().commutator(b.matrix()).max_abs());
            }
        }
        worst
    }

    pub fn is_commuting(&self) -> bool {
        self.max_commutator() <= COMMUTE_TOL
    }

    /// True when every state is diagonal in the computational basis.
    pub fn is_diagonal(&self, tol: f64) -> bool {
        self.states.iter().all(|s| s.matrix().is_diagonal(tol))
    }

    /// A unitary whose columns diagonalize every state, if the states commute.
    ///
    /// Uses a generic linear combination of the states so that joint
    /// eigenspaces separate.
    pub fn common_eigenbasis(&self) -> Option<ComplexMatrix> {
        if !self.is_commuting() {
            return None;
        }
        if self.is_diagonal(0.0) {
            return Some(ComplexMatrix::identity(self.dim()));
        }
        let mut combo = ComplexMatrix::zeros(self.dim(), self.dim());
        for (i, s) in self.states.iter().enumerate() {
            let w = 1.0 + ((i as f64 + 1.0) * std::f64::consts::SQRT_2).fract() * std::f64::consts::PI;
            combo = &combo + &s.matrix().scale(w);
        }
        let basis = eig_hermitian(&combo.hermitian_part()).ok()?.eigenvectors;
        self.states
            .iter()
            .all(|s| s.matrix().conjugate_by(&basis).is_diagonal(COMMUTE_TOL))
            .then_some(basis)
    }

    /// Ensemble {pᵢ, U†ρᵢU}.
    pub fn conjugated_by(&self, u: &ComplexMatrix) -> Self {
        Self {
            probs: self.probs.clone(),
            states: self.states.iter().map(|s| s.conjugate_by(u)).collect(),
        }
    }
}

/// Positive-operator-valued measure.
#[derive(Clone, Debug)]
pub struct Povm {
    elements: Vec<ComplexMatrix>,
}

impl Povm {
    pub fn new(elements: Vec<ComplexMatrix>) -> Result<Self> {
        let Some(first) = elements.first() else {
            return Err(Error::InvalidPovm("no elements".into()));
        };
        let dim = first.rows();
        let mut total = ComplexMatrix::zeros(dim, dim);
        for (i, e) in elements.iter().enumerate() {
            if !e.is_square() || e.rows() != dim {
                return Err(Error::InvalidPovm(format!("element {i} is not {dim}x{dim}")));
            }
            let spec = eig_hermitian(e).map_err(|err| Error::InvalidPovm(format!("element {i}: {err}")))?;
            if let Some(&min) = spec.eigenvalues.last() {
                if min < -PSD_TOL {
                    return Err(Error::InvalidPovm(format!(
                        "element {i} is not positive semidefinite (eigenvalue {min:e})"
                    )));
                }
            }
            total = &total + e;
        }
        let deviation = total.max_abs_diff(&ComplexMatrix::identity(dim));
        if deviation > POVM_TOL {
            return Err(Error::InvalidPovm(format!(
                "elements must sum to the identity within {POVM_TOL:e}, deviation {deviation:e}"
            )));
        }
        Ok(Self { elements })
    }

    /// Single-outcome measurement {I}.
    pub fn trivial(dim: usize) -> Self {
        Self {
            elements: vec![ComplexMatrix::identity(dim)],
        }
    }

    /// Projective measurement onto the columns of a unitary.
    pub fn from_basis(u: &ComplexMatrix) -> Result<Self> {
        let dim = u.rows();
        let elements = (0..u.cols())
            .map(|j| {
                let v = u.as_dmatrix().column(j).into_owned();
                ComplexMatrix::outer(&v, &v)
            })
            .collect();
        let povm = Self::new(elements)?;
        if povm.dim() != dim {
            return Err(Error::InvalidPovm("basis matrix must be square".into()));
        }
        Ok(povm)
    }

    pub fn dim(&self) -> usize {
        self.elements[0].rows()
    }

    pub fn elements(&self) -> &[ComplexMatrix] {
        &self.elements
    }

    /// Outcome distribution tr(ρ Eᵢ), clamped at zero.
    pub fn outcome_probs(&self, rho: &DensityOperator) -> Result<Vec<f64>> {
        if rho.dim() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "POVM of dimension {} applied to a state of dimension {}",
                self.dim(),
                rho.dim()
            )));
        }
        Ok(self
            .elements
            .iter()
            .map(|e| (rho.matrix() * e).trace().re.max(0.0))
            .collect())
    }
}

/// −Σ xᵢ log₂ xᵢ over raw nonnegative weights, with 0 log 0 = 0.
pub fn entropy_bits(values: &[f64]) -> f64 {
    values
        .iter()
        .filter(|&&x| x >= ZERO_PROB)
        .map(|&x| -x * x.log2())
        .sum::<f64>()
        .max(0.0)
}

/// H(x, 1−x).
pub fn binary_entropy(x: f64) -> f64 {
    entropy_bits(&[x, 1.0 - x])
}

/// Von Neumann entropy S(ρ) = −tr ρ log₂ ρ.
pub fn vn_entropy(rho: &DensityOperator) -> f64 {
    let max = (rho.dim() as f64).log2();
    entropy_bits(rho.eigenvalues()).min(max)
}

/// Shannon entropy H(p) in bits.
pub fn shannon_entropy(p: &ProbVector) -> f64 {
    let max = (p.len() as f64).log2();
    entropy_bits(p.as_slice()).min(max)
}

fn check_same_dim(a: &DensityOperator, b: &DensityOperator) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(format!(
            "states of dimension {} and {}",
            a.dim(),
            b.dim()
        )));
    }
    Ok(())
}

/// tr|√a √b|, the trace norm of √a√b.
fn root_fidelity_one_way(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    let x = a * b;
    if x.is_diagonal(0.0) {
        return x.as_dmatrix().diagonal().iter().map(|z| z.norm()).sum();
    }
    let svd = x
        .into_dmatrix()
        .try_svd(false, false, f64::EPSILON, 0)
        .expect("SVD of a small dense matrix converges");
    svd.singular_values.iter().sum()
}

fn root_fidelity_pair(r1: &DensityOperator, r2: &DensityOperator) -> (f64, f64) {
    if r1.matrix().as_dmatrix() == r2.matrix().as_dmatrix() {
        return (1.0, 1.0);
    }
    if r1.matrix().is_diagonal(0.0) && r2.matrix().is_diagonal(0.0) {
        let floored = |x: f64| if x < FIDELITY_SQRT_FLOOR { 0.0 } else { x };
        let g: f64 = r1
            .matrix()
            .diagonal_real()
            .into_iter()
            .zip(r2.matrix().diagonal_real())
            .map(|(a, b)| (floored(a) * floored(b)).sqrt())
            .sum();
        return (g, g);
    }
    let s1 = r1.sqrt_with_floor(FIDELITY_SQRT_FLOOR);
    let s2 = r2.sqrt_with_floor(FIDELITY_SQRT_FLOOR);
    (root_fidelity_one_way(&s1, &s2), root_fidelity_one_way(&s2, &s1))
}

/// G(ρ₁, ρ₂) = tr √(√ρ₁ ρ₂ √ρ₁), the square root of the fidelity.
pub fn sqrt_fidelity(r1: &DensityOperator, r2: &DensityOperator) -> Result<f64> {
    check_same_dim(r1, r2)?;
    let (g12, g21) = root_fidelity_pair(r1, r2);
    Ok((0.5 * (g12 + g21)).clamp(0.0, 1.0))
}

/// Bures–Uhlmann fidelity F = (tr √(√ρ₁ ρ₂ √ρ₁))², symmetrized.
pub fn fidelity(r1: &DensityOperator, r2: &DensityOperator) -> Result<f64> {
    check_same_dim(r1, r2)?;
    let (g12, g21) = root_fidelity_pair(r1, r2);
    Ok((0.5 * (g12 * g12 + g21 * g21)).clamp(0.0, 1.0))
}

/// Bhattacharyya overlap (Σ √(pᵢ qᵢ))² over raw nonnegative weights.
pub fn overlap_fidelity(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::LengthMismatch {
            left: p.len(),
            right: q.len(),
        });
    }
    let g: f64 = p.iter().zip(q).map(|(a, b)| (a.max(0.0) * b.max(0.0)).sqrt()).sum();
    Ok((g * g).clamp(0.0, 1.0))
}

/// Classical fidelity F_cl(p, q) = (Σ √(pᵢ qᵢ))².
pub fn classical_fidelity(p: &ProbVector, q: &ProbVector) -> Result<f64> {
    overlap_fidelity(p.as_slice(), q.as_slice())
}

/// Holevo quantity χ(E) = S(ρ̄) − Σ pᵢ S(ρᵢ).
pub fn holevo(e: &Ensemble) -> f64 {
    let s_bar = vn_entropy(&e.average());
    (s_bar - average_entropy(e)).clamp(0.0, s_bar)
}

/// Σ pᵢ S(ρᵢ).
pub fn average_entropy(e: &Ensemble) -> f64 {
    e.probs
        .as_slice()
        .iter()
        .zip(&e.states)
        .map(|(p, s)| p * vn_entropy(s))
        .sum()
}

fn check_same_shape(a: &Ensemble, b: &Ensemble) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(format!(
            "ensembles of dimension {} and {}",
            a.dim(),
            b.dim()
        )));
    }
    let deviation = a
        .probs
        .as_slice()
        .iter()
        .zip(b.probs.as_slice())
        .fold(0.0f64, |acc, (x, y)| acc.max((x - y).abs()));
    if deviation > PROB_TOL {
        return Err(Error::ProbabilityMismatch { deviation });
    }
    Ok(())
}

/// F̄(A, B) = Σ pᵢ F(ρᵢ, σᵢ) for ensembles sharing one prior.
pub fn avg_ensemble_fidelity(a: &Ensemble, b: &Ensemble) -> Result<f64> {
    check_same_shape(a, b)?;
    let mut total = 0.0;
    for ((p, r), s) in a.probs.as_slice().iter().zip(&a.states).zip(&b.states) {
        total += p * fidelity(r, s)?;
    }
    Ok(total.clamp(0.0, 1.0))
}

/// Average fidelity above which the Holevo continuity bound applies.
pub fn holevo_continuity_threshold() -> f64 {
    (35.0f64 / 36.0).sqrt()
}

/// Right-hand side of a continuity inequality together with whether its
/// hypothesis holds.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ContinuityBound {
    pub avg_fidelity: f64,
    pub bound: f64,
    pub applicable: bool,
}

/// (2 + 2√2) √(1 − F̄) log₂ d + 1, applicable when F̄ > √(35/36).
pub fn holevo_bound_from_fidelity(avg_fidelity: f64, dim: usize) -> ContinuityBound {
    let coeff = 2.0 + 2.0 * std::f64::consts::SQRT_2;
    ContinuityBound {
        avg_fidelity,
        bound: coeff * (1.0 - avg_fidelity).max(0.0).sqrt() * (dim as f64).log2() + 1.0,
        applicable: avg_fidelity > holevo_continuity_threshold(),
    }
}

/// Bound on |χ(A) − χ(B)| in terms of the average fidelity.
pub fn holevo_continuity_bound(a: &Ensemble, b: &Ensemble) -> Result<ContinuityBound> {
    let f = avg_ensemble_fidelity(a, b)?;
    Ok(holevo_bound_from_fidelity(f, a.dim()))
}

/// 2 √(1 − F̄) log₂ d + 1, bounding |Σ pᵢ S(ρᵢ) − Σ pᵢ S(σᵢ)|.
pub fn avg_entropy_continuity_bound(a: &Ensemble, b: &Ensemble) -> Result<f64> {
    let f = avg_ensemble_fidelity(a, b)?;
    Ok(2.0 * (1.0 - f).max(0.0).sqrt() * (a.dim() as f64).log2() + 1.0)
}

/// F_cl of the outcome distributions of `m` on ρ₁ and ρ₂.
///
/// Never smaller than the quantum fidelity; equal to it for an optimal
/// measurement.
pub fn measured_classical_fidelity(r1: &DensityOperator, r2: &DensityOperator, m: &Povm) -> Result<f64> {
    check_same_dim(r1, r2)?;
    let p = m.outcome_probs(r1)?;
    let q = m.outcome_probs(r2)?;
    overlap_fidelity(&p, &q)
}

//! Seeded generators for random states, ensembles and measurements.
//!
//! All generators take an explicit RNG handle so property runs are
//! reproducible and safe to run concurrently.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::measures::{Ensemble, Povm, ProbVector};
use crate::qmat::{eig_hermitian, ComplexMatrix, DensityOperator, PureState, C64};

pub type SimRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream `stream` derived from `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> SimRng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Complex Ginibre matrix with standard normal entries.
pub fn ginibre<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> DMatrix<C64> {
    DMatrix::from_fn(rows, cols, |_, _| gaussian(rng))
}

pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> ComplexMatrix {
    let g = ginibre(rng, dim, dim);
    ComplexMatrix::from_dmatrix((&g + g.adjoint()) * C64::new(0.5, 0.0))
}

/// Random density operator of rank at most `rank` (Ginibre construction).
pub fn random_density<R: Rng + ?Sized>(rng: &mut R, dim: usize, rank: usize) -> DensityOperator {
    let g = ginibre(rng, dim, rank.max(1));
    let m = &g * g.adjoint();
    let tr = m.trace().re;
    DensityOperator::from_trusted(ComplexMatrix::from_dmatrix(m / C64::new(tr, 0.0)))
}

pub fn random_pure<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> PureState {
    let v = DVector::from_fn(dim, |_, _| gaussian(rng));
    PureState::normalized(v).expect("gaussian vector is nonzero almost surely")
}

/// Haar-random unitary via QR with phase correction.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> ComplexMatrix {
    let qr = ginibre(rng, dim, dim).qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        let col = q.column(j) * phase;
        q.set_column(j, &col);
    }
    ComplexMatrix::from_dmatrix(q)
}

/// Random point of the probability simplex (flat Dirichlet).
pub fn random_probs<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (0..n).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    let s: f64 = v.iter().sum();
    for x in v.iter_mut() {
        *x /= s;
    }
    v
}

pub fn random_prob_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ProbVector {
    ProbVector::new(random_probs(rng, n)).expect("normalized by construction")
}

/// Random ensemble of `n` states of dimension `dim` with random ranks.
pub fn random_ensemble<R: Rng + ?Sized>(rng: &mut R, dim: usize, n: usize) -> Ensemble {
    let states = (0..n)
        .map(|_| {
            let rank = rng.random_range(1..=dim);
            random_density(rng, dim, rank)
        })
        .collect();
    Ensemble::new(random_prob_vector(rng, n), states).expect("valid by construction")
}

/// Diagonal state in the basis given by the columns of `u`.
pub fn rotated_diagonal(diag: &[f64], u: &ComplexMatrix) -> DensityOperator {
    let d = ComplexMatrix::from_diagonal(diag);
    DensityOperator::from_trusted(&(u * &d) * &u.adjoint())
}

/// `k` orthonormal columns spanning a Haar-random subspace.
pub fn random_subspace<R: Rng + ?Sized>(rng: &mut R, dim: usize, k: usize) -> ComplexMatrix {
    let u = random_unitary(rng, dim);
    ComplexMatrix::from_dmatrix(u.as_dmatrix().columns(0, k.clamp(1, dim)).into_owned())
}

/// Random state supported on the span of the columns of `v`.
pub fn random_supported_density<R: Rng + ?Sized>(rng: &mut R, v: &ComplexMatrix) -> DensityOperator {
    let inner = random_density(rng, v.cols(), v.cols());
    DensityOperator::from_trusted((&(v * inner.matrix()) * &v.adjoint()).hermitian_part())
}

/// Random POVM with `outcomes` elements: E_i = S^{-1/2} A_i†A_i S^{-1/2}.
pub fn random_povm<R: Rng + ?Sized>(rng: &mut R, dim: usize, outcomes: usize) -> Povm {
    let parts: Vec<DMatrix<C64>> = (0..outcomes.max(1))
        .map(|_| {
            let a = ginibre(rng, dim, dim);
            a.adjoint() * a
        })
        .collect();
    let total = parts.iter().fold(DMatrix::<C64>::zeros(dim, dim), |acc, p| acc + p);
    let spec = eig_hermitian(&ComplexMatrix::from_dmatrix(total).hermitian_part())
        .expect("sum of Gram matrices is Hermitian");
    let inv_sqrt = spec.map_eigenvalues(|x| 1.0 / x.sqrt()).into_dmatrix();
    let elements = parts
        .into_iter()
        .map(|p| ComplexMatrix::from_dmatrix(&inv_sqrt * p * &inv_sqrt).hermitian_part())
        .collect();
    Povm::new(elements).expect("normalized by construction")
}

/// Projective measurement in a Haar-random basis.
pub fn random_projective_povm<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Povm {
    let u = random_unitary(rng, dim);
    Povm::from_basis(&u).expect("unitary columns are orthonormal")
}

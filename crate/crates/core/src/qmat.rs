//! Dense complex linear algebra and validated quantum-state types.
//!
//! Everything here works on small dense matrices backed by `nalgebra`.
//! The state types ([`DensityOperator`], [`PureState`]) check their
//! invariants on construction so downstream code can rely on them.

use std::fmt;
use std::ops::{Add, Mul, Sub};
use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Max entrywise |A - A†| accepted for a Hermitian matrix.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Eigenvalues in `[-PSD_TOL, 0)` are clamped to zero.
pub const PSD_TOL: f64 = 1e-9;
/// Allowed |tr(ρ) - 1|.
pub const TRACE_TOL: f64 = 1e-10;
/// Allowed |‖v‖² - 1| for pure states.
pub const NORM_TOL: f64 = 1e-10;
/// Allowed Gram deviation for orthonormal vector sets.
pub const ORTHONORMAL_TOL: f64 = 1e-8;
/// Default bound on the dimension of any constructed operator.
pub const DEFAULT_DIM_CAP: usize = 4096;

/// Dense complex matrix, `rows x cols`.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix(DMatrix<C64>);

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ComplexMatrix{}", self.0)
    }
}

impl ComplexMatrix {
    /// Builds a matrix from row-major entries.
    pub fn from_row_major(rows: usize, cols: usize, entries: Vec<C64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::DimensionMismatch(format!(
                "matrix dimensions must be positive, got {rows}x{cols}"
            )));
        }
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                entries.len()
            )));
        }
        Ok(Self(DMatrix::from_row_slice(rows, cols, &entries)))
    }

    pub fn from_dmatrix(m: DMatrix<C64>) -> Self {
        Self(m)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self(DMatrix::zeros(rows, cols))
    }

    pub fn identity(dim: usize) -> Self {
        Self(DMatrix::identity(dim, dim))
    }

    /// Real diagonal matrix.
    pub fn from_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        Self(DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                C64::new(diag[i], 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        }))
    }

    /// Outer product |v⟩⟨w|.
    pub fn outer(v: &DVector<C64>, w: &DVector<C64>) -> Self {
        Self(v * w.adjoint())
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.0[(i, j)]
    }

    pub fn as_dmatrix(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_dmatrix(self) -> DMatrix<C64> {
        self.0
    }

    /// Entries in row-major order.
    pub fn row_major(&self) -> Vec<C64> {
        let mut out = Vec::with_capacity(self.rows() * self.cols());
        for i in 0..self.rows() {
            for j in 0..self.cols() {
                out.push(self.0[(i, j)]);
            }
        }
        out
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self(&self.0 * C64::new(s, 0.0))
    }

    pub fn kron(&self, other: &Self) -> Self {
        Self(self.0.kronecker(&other.0))
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |acc, z| acc.max(z.norm()))
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (&self.0 - &other.0).iter().fold(0.0, |acc, z| acc.max(z.norm()))
    }

    /// max |A - A†| entry, or infinity for non-square input.
    pub fn hermitian_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.rows();
        let mut dev: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                dev = dev.max((self.0[(i, j)] - self.0[(j, i)].conj()).norm());
            }
        }
        dev
    }

    /// (A + A†)/2.
    pub fn hermitian_part(&self) -> Self {
        Self((&self.0 + self.0.adjoint()) * C64::new(0.5, 0.0))
    }

    /// True when every off-diagonal entry has modulus at most `tol`.
    pub fn is_diagonal(&self, tol: f64) -> bool {
        let (r, c) = self.0.shape();
        (0..r).all(|i| (0..c).all(|j| i == j || self.0[(i, j)].norm() <= tol))
    }

    /// Real parts of the diagonal.
    pub fn diagonal_real(&self) -> Vec<f64> {
        (0..self.rows().min(self.cols())).map(|i| self.0[(i, i)].re).collect()
    }

    /// AB - BA.
    pub fn commutator(&self, other: &Self) -> Self {
        Self(&self.0 * &other.0 - &other.0 * &self.0)
    }

    /// U† A U.
    pub fn conjugate_by(&self, u: &Self) -> Self {
        Self(u.0.adjoint() * &self.0 * &u.0)
    }
}

impl<'a> Mul<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 * &rhs.0)
    }
}

impl<'a> Add<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 + &rhs.0)
    }
}

impl<'a> Sub<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 - &rhs.0)
    }
}

/// Eigen-decomposition of a Hermitian matrix.
///
/// Eigenvalues are sorted non-increasing; equal eigenvalues keep the order
/// in which the solver produced them. Each eigenvector's first non-negligible
/// amplitude is made real and positive.
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors as columns, aligned with `eigenvalues`.
    pub eigenvectors: ComplexMatrix,
}

impl Spectrum {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn vector(&self, i: usize) -> DVector<C64> {
        self.eigenvectors.0.column(i).into_owned()
    }

    /// V diag(f(λ)) V†.
    pub fn map_eigenvalues(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let v = &self.eigenvectors.0;
        let d = DMatrix::from_fn(self.dim(), self.dim(), |i, j| {
            if i == j {
                C64::new(f(self.eigenvalues[i]), 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        ComplexMatrix(v * d * v.adjoint())
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.map_eigenvalues(|x| x)
    }

    /// Sum of the `k` largest eigenvalues.
    pub fn top_sum(&self, k: usize) -> f64 {
        self.eigenvalues.iter().take(k).sum()
    }
}

fn sort_and_fix(values: Vec<f64>, vectors: DMatrix<C64>) -> Spectrum {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    // stable: ties keep solver order
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    let eigenvalues = order.iter().map(|&i| values[i]).collect();
    let mut sorted = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut col = vectors.column(src).into_owned();
        if let Some(pivot) = col.iter().find(|z| z.norm() > 1e-12).copied() {
            let phase = pivot.conj() / pivot.norm();
            col *= phase;
        }
        sorted.set_column(dst, &col);
    }
    Spectrum {
        eigenvalues,
        eigenvectors: ComplexMatrix(sorted),
    }
}

/// Eigen-decomposition of a Hermitian matrix.
pub fn eig_hermitian(m: &ComplexMatrix) -> Result<Spectrum> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "eigendecomposition needs a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let deviation = m.hermitian_deviation();
    if deviation > HERMITIAN_TOL {
        return Err(Error::NotHermitian {
            deviation,
            tolerance: HERMITIAN_TOL,
        });
    }
    let n = m.rows();
    if m.is_diagonal(0.0) {
        return Ok(sort_and_fix(m.diagonal_real(), DMatrix::identity(n, n)));
    }
    let h = m.hermitian_part().0;
    let eig = h
        .try_symmetric_eigen(f64::EPSILON, 10_000 * n.max(1))
        .ok_or(Error::NoConvergence { dim: n })?;
    Ok(sort_and_fix(
        eig.eigenvalues.iter().copied().collect(),
        eig.eigenvectors,
    ))
}

/// Principal square root of a PSD Hermitian matrix.
pub fn matrix_sqrt_psd(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let spec = eig_hermitian(m)?;
    check_psd(&spec)?;
    Ok(spec.map_eigenvalues(|x| x.max(0.0).sqrt()))
}

fn check_psd(spec: &Spectrum) -> Result<()> {
    match spec.eigenvalues.last() {
        Some(&min) if min < -PSD_TOL => Err(Error::NotPsd {
            eigenvalue: min,
            tolerance: PSD_TOL,
        }),
        _ => Ok(()),
    }
}

/// Unit-norm complex vector.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    amplitudes: DVector<C64>,
}

impl PureState {
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        Self::from_dvector(DVector::from_vec(amplitudes))
    }

    pub fn from_dvector(v: DVector<C64>) -> Result<Self> {
        if v.is_empty() {
            return Err(Error::DimensionMismatch("pure state must have positive dimension".into()));
        }
        let norm_sq = v.norm_squared();
        if (norm_sq - 1.0).abs() > NORM_TOL {
            return Err(Error::NotUnitNorm { norm_sq });
        }
        Ok(Self { amplitudes: v })
    }

    /// Normalizes `v` first; fails only on the zero vector.
    pub fn normalized(v: DVector<C64>) -> Result<Self> {
        let n = v.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::NotUnitNorm { norm_sq: n * n });
        }
        Ok(Self { amplitudes: v / C64::new(n, 0.0) })
    }

    /// Computational basis vector |i⟩ in dimension `dim`.
    pub fn basis(dim: usize, i: usize) -> Result<Self> {
        if i >= dim {
            return Err(Error::Domain(format!("basis index {i} out of range for dimension {dim}")));
        }
        let mut v = DVector::zeros(dim);
        v[i] = C64::new(1.0, 0.0);
        Ok(Self { amplitudes: v })
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &Self) -> Result<C64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch(format!(
                "inner product of dimension {} and {} vectors",
                self.dim(),
                other.dim()
            )));
        }
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    /// |ψ⟩⟨ψ|.
    pub fn density(&self) -> DensityOperator {
        DensityOperator::from_trusted(ComplexMatrix::outer(&self.amplitudes, &self.amplitudes))
    }

    pub fn tensor(&self, other: &Self) -> Self {
        Self {
            amplitudes: self.amplitudes.kronecker(&other.amplitudes),
        }
    }
}

/// Hermitian, positive semidefinite, unit-trace matrix.
#[derive(Clone, Debug)]
pub struct DensityOperator {
    matrix: ComplexMatrix,
    spectrum: OnceLock<Spectrum>,
}

impl PartialEq for DensityOperator {
    fn eq(&self, other: &Self) -> bool {
        self.matrix == other.matrix
    }
}

impl DensityOperator {
    /// Validates Hermiticity, positivity and unit trace.
    ///
    /// Eigenvalues in `[-1e-9, 0)` are clamped to zero and the result is
    /// renormalized if clamping moves the trace by more than `1e-10`.
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "density operator must be square, got {}x{}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        let spec = eig_hermitian(&matrix)?;
        let trace = matrix.trace().re;
        if (trace - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidTrace {
                trace,
                tolerance: TRACE_TOL,
            });
        }
        check_psd(&spec)?;
        let matrix = matrix.hermitian_part();
        if spec.eigenvalues.iter().any(|&x| x < 0.0) {
            let mut clamped = spec;
            for x in clamped.eigenvalues.iter_mut() {
                *x = x.max(0.0);
            }
            let total: f64 = clamped.eigenvalues.iter().sum();
            if (total - 1.0).abs() > TRACE_TOL {
                for x in clamped.eigenvalues.iter_mut() {
                    *x /= total;
                }
            }
            let rebuilt = clamped.reconstruct();
            return Ok(Self {
                matrix: rebuilt,
                spectrum: OnceLock::from(clamped),
            });
        }
        Ok(Self {
            matrix,
            spectrum: OnceLock::from(spec),
        })
    }

    /// Skips validation; callers guarantee the invariants hold mathematically.
    pub(crate) fn from_trusted(matrix: ComplexMatrix) -> Self {
        Self {
            matrix: matrix.hermitian_part(),
            spectrum: OnceLock::new(),
        }
    }

    pub fn from_diagonal(probs: &[f64]) -> Result<Self> {
        Self::new(ComplexMatrix::from_diagonal(probs))
    }

    /// I/d.
    pub fn maximally_mixed(dim: usize) -> Self {
        Self::from_trusted(ComplexMatrix::identity(dim).scale(1.0 / dim as f64))
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// Cached spectrum.
    pub fn spectrum(&self) -> &Spectrum {
        self.spectrum.get_or_init(|| {
            let mut spec = eig_hermitian(&self.matrix).unwrap_or_else(|e| {
                // only reachable if the dense solver fails to converge
                panic!("eigendecomposition of a validated density operator failed: {e}")
            });
            for x in spec.eigenvalues.iter_mut() {
                *x = x.max(0.0);
            }
            spec
        })
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.spectrum().eigenvalues
    }

    /// √ρ, with eigenvalues below `floor` treated as zero.
    pub(crate) fn sqrt_with_floor(&self, floor: f64) -> ComplexMatrix {
        if self.matrix.is_diagonal(0.0) {
            let d: Vec<f64> = self
                .matrix
                .diagonal_real()
                .into_iter()
                .map(|x| if x < floor { 0.0 } else { x.sqrt() })
                .collect();
            return ComplexMatrix::from_diagonal(&d);
        }
        self.spectrum()
            .map_eigenvalues(|x| if x < floor { 0.0 } else { x.sqrt() })
    }

    /// Convex combination Σ wᵢ ρᵢ.
    pub fn mix(weights: &[f64], states: &[&DensityOperator]) -> Result<Self> {
        if weights.len() != states.len() {
            return Err(Error::LengthMismatch {
                left: weights.len(),
                right: states.len(),
            });
        }
        let Some(first) = states.first() else {
            return Err(Error::Domain("cannot mix an empty list of states".into()));
        };
        let dim = first.dim();
        let mut acc = DMatrix::<C64>::zeros(dim, dim);
        for (w, s) in weights.iter().zip(states) {
            if s.dim() != dim {
                return Err(Error::DimensionMismatch(format!(
                    "mixing states of dimension {dim} and {}",
                    s.dim()
                )));
            }
            acc += &s.matrix.0 * C64::new(*w, 0.0);
        }
        let m = ComplexMatrix(acc);
        let trace = m.trace().re;
        if (trace - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidTrace {
                trace,
                tolerance: TRACE_TOL,
            });
        }
        Ok(Self::from_trusted(m))
    }

    /// U† ρ U for unitary U.
    pub fn conjugate_by(&self, u: &ComplexMatrix) -> Self {
        Self::from_trusted(self.matrix.conjugate_by(u))
    }

    /// Purity-style check: tr(ρσ).
    pub fn overlap(&self, other: &Self) -> f64 {
        (&self.matrix * &other.matrix).trace().re
    }
}

/// Kronecker product, bounded by [`DEFAULT_DIM_CAP`].
pub fn tensor(a: &DensityOperator, b: &DensityOperator) -> Result<DensityOperator> {
    tensor_with_cap(a, b, DEFAULT_DIM_CAP)
}

pub fn tensor_with_cap(a: &DensityOperator, b: &DensityOperator, cap: usize) -> Result<DensityOperator> {
    let dim = a
        .dim()
        .checked_mul(b.dim())
        .ok_or(Error::DimensionOverflow { dim: usize::MAX, cap })?;
    if dim > cap {
        return Err(Error::DimensionOverflow { dim, cap });
    }
    Ok(DensityOperator::from_trusted(a.matrix.kron(&b.matrix)))
}

/// ρ₁ ⊗ ρ₂ ⊗ ... ⊗ ρₙ.
pub fn tensor_all(states: &[&DensityOperator], cap: usize) -> Result<DensityOperator> {
    let Some((first, rest)) = states.split_first() else {
        return Err(Error::Domain("tensor product of an empty list".into()));
    };
    let mut acc = (*first).clone();
    if acc.dim() > cap {
        return Err(Error::DimensionOverflow { dim: acc.dim(), cap });
    }
    for s in rest {
        acc = tensor_with_cap(&acc, s, cap)?;
    }
    Ok(acc)
}

fn check_dims(total: usize, dims: &[usize]) -> Result<()> {
    if dims.is_empty() || dims.contains(&0) {
        return Err(Error::DimensionMismatch(format!(
            "factor dimensions must be positive, got {dims:?}"
        )));
    }
    let prod = dims
        .iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .unwrap_or(usize::MAX);
    if prod != total {
        return Err(Error::DimensionMismatch(format!(
            "factor dimensions {dims:?} multiply to {prod}, operator has dimension {total}"
        )));
    }
    Ok(())
}

/// Reduced state on the factors listed in `keep` (0-based, any order is
/// normalized to ascending).
pub fn reduce_to(s: &DensityOperator, dims: &[usize], keep: &[usize]) -> Result<DensityOperator> {
    check_dims(s.dim(), dims)?;
    let mut keep: Vec<usize> = keep.to_vec();
    keep.sort_unstable();
    keep.dedup();
    if keep.is_empty() {
        return Err(Error::Domain("must keep at least one factor".into()));
    }
    if let Some(&bad) = keep.iter().find(|&&k| k >= dims.len()) {
        return Err(Error::DimensionMismatch(format!(
            "factor index {bad} out of range for {} factors",
            dims.len()
        )));
    }
    let n = dims.len();
    let mut strides = vec![1usize; n];
    for k in (0..n.saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * dims[k + 1];
    }
    let rest: Vec<usize> = (0..n).filter(|k| !keep.contains(k)).collect();
    // full-space offset for every multi-index over a subset of factors
    let offsets = |subset: &[usize]| -> Vec<usize> {
        let mut out = vec![0usize];
        for &k in subset {
            let mut next = Vec::with_capacity(out.len() * dims[k]);
            for base in &out {
                for x in 0..dims[k] {
                    next.push(base + x * strides[k]);
                }
            }
            out = next;
        }
        out
    };
    let keep_off = offsets(&keep);
    let rest_off = offsets(&rest);
    let m = s.matrix.as_dmatrix();
    let dk = keep_off.len();
    let mut out = DMatrix::<C64>::zeros(dk, dk);
    for (a, &ra) in keep_off.iter().enumerate() {
        for (b, &rb) in keep_off.iter().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for &r in &rest_off {
                acc += m[(ra + r, rb + r)];
            }
            out[(a, b)] = acc;
        }
    }
    Ok(DensityOperator::from_trusted(ComplexMatrix(out)))
}

/// Reduced state of factor `keep` (0-based) of a state on ⊗ H_{dims[k]}.
pub fn partial_trace(s: &DensityOperator, dims: &[usize], keep: usize) -> Result<DensityOperator> {
    reduce_to(s, dims, &[keep])
}

/// Discards factor `discard` (0-based) and keeps all the others.
pub fn trace_out(s: &DensityOperator, dims: &[usize], discard: usize) -> Result<DensityOperator> {
    if discard >= dims.len() {
        return Err(Error::DimensionMismatch(format!(
            "factor index {discard} out of range for {} factors",
            dims.len()
        )));
    }
    if dims.len() == 1 {
        return Err(Error::Domain("cannot discard the only factor".into()));
    }
    let keep: Vec<usize> = (0..dims.len()).filter(|&k| k != discard).collect();
    reduce_to(s, dims, &keep)
}

/// Orthogonal projector onto the span of orthonormal `basis_vectors`.
pub fn projector(basis_vectors: &[PureState]) -> Result<ComplexMatrix> {
    let Some(first) = basis_vectors.first() else {
        return Err(Error::Domain("projector needs at least one vector".into()));
    };
    let dim = first.dim();
    if let Some(v) = basis_vectors.iter().find(|v| v.dim() != dim) {
        return Err(Error::DimensionMismatch(format!(
            "basis vectors of dimension {dim} and {}",
            v.dim()
        )));
    }
    let mut deviation: f64 = 0.0;
    for (i, a) in basis_vectors.iter().enumerate() {
        for (j, b) in basis_vectors.iter().enumerate() {
            let g = a.amplitudes.dotc(&b.amplitudes);
            let target = if i == j { 1.0 } else { 0.0 };
            deviation = deviation.max((g - C64::new(target, 0.0)).norm());
        }
    }
    if deviation > ORTHONORMAL_TOL {
        return Err(Error::NotOrthonormal {
            deviation,
            tolerance: ORTHONORMAL_TOL,
        });
    }
    let mut acc = DMatrix::<C64>::zeros(dim, dim);
    for v in basis_vectors {
        acc += &v.amplitudes * v.amplitudes.adjoint();
    }
    Ok(ComplexMatrix(acc))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_density, random_hermitian, rng};

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn diagonal_eigenvalues_sorted() {
        let m = ComplexMatrix::from_diagonal(&[0.2, 0.5, 0.3]);
        let s = eig_hermitian(&m).unwrap();
        assert_eq!(s.eigenvalues, vec![0.5, 0.3, 0.2]);
        assert!(s.reconstruct().max_abs_diff(&m) < 1e-15);
    }

    #[test]
    fn degenerate_eigenvalues_keep_index_order() {
        let m = ComplexMatrix::identity(2).scale(0.5);
        let s = eig_hermitian(&m).unwrap();
        assert_eq!(s.eigenvalues, vec![0.5, 0.5]);
        assert_eq!(s.vector(0)[0], c(1.0));
        assert_eq!(s.vector(1)[1], c(1.0));
    }

    #[test]
    fn random_hermitian_reconstructs() {
        let mut r = rng(7);
        for _ in 0..20 {
            let h = random_hermitian(&mut r, 4);
            let s = eig_hermitian(&h).unwrap();
            assert!(s.reconstruct().max_abs_diff(&h) < 1e-8);
            assert!(s.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
            let v = s.eigenvectors.as_dmatrix();
            let gram = v.adjoint() * v;
            assert!((gram - DMatrix::<C64>::identity(4, 4)).camax() < 1e-10);
        }
    }

    #[test]
    fn eigenvector_phase_convention() {
        let mut r = rng(3);
        let h = random_hermitian(&mut r, 3);
        let s = eig_hermitian(&h).unwrap();
        for i in 0..3 {
            let v = s.vector(i);
            let pivot = v.iter().find(|z| z.norm() > 1e-12).unwrap();
            assert!(pivot.im.abs() < 1e-14 && pivot.re > 0.0);
        }
    }

    #[test]
    fn non_hermitian_rejected() {
        let m = ComplexMatrix::from_row_major(2, 2, vec![c(1.0), c(1.0), c(0.0), c(1.0)]).unwrap();
        assert!(matches!(eig_hermitian(&m), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn sqrt_of_diagonal() {
        let r = matrix_sqrt_psd(&ComplexMatrix::from_diagonal(&[4.0, 9.0])).unwrap();
        assert!(r.max_abs_diff(&ComplexMatrix::from_diagonal(&[2.0, 3.0])) < 1e-15);
        let i = matrix_sqrt_psd(&ComplexMatrix::identity(3)).unwrap();
        assert!(i.max_abs_diff(&ComplexMatrix::identity(3)) < 1e-15);
    }

    #[test]
    fn sqrt_squares_back() {
        let mut r = rng(11);
        for _ in 0..20 {
            let p = random_density(&mut r, 4, 4).matrix().scale(3.0);
            let s = matrix_sqrt_psd(&p).unwrap();
            assert!((&s * &s).max_abs_diff(&p) < 1e-8);
            assert!(s.hermitian_deviation() < 1e-12);
            assert!(eig_hermitian(&s).unwrap().eigenvalues[3] > -1e-12);
        }
    }

    #[test]
    fn sqrt_rejects_negative() {
        let m = ComplexMatrix::from_diagonal(&[1.0, -1e-3]);
        assert!(matches!(matrix_sqrt_psd(&m), Err(Error::NotPsd { .. })));
        // within tolerance is clamped
        let m = ComplexMatrix::from_diagonal(&[1.0, -1e-10]);
        let s = matrix_sqrt_psd(&m).unwrap();
        assert_eq!(s.get(1, 1), c(0.0));
    }

    #[test]
    fn density_validation() {
        assert!(matches!(
            DensityOperator::from_diagonal(&[0.5, 0.6]),
            Err(Error::InvalidTrace { .. })
        ));
        assert!(matches!(
            DensityOperator::from_diagonal(&[1.1, -0.1]),
            Err(Error::NotPsd { .. })
        ));
        let clamped = DensityOperator::from_diagonal(&[1.0 + 5e-11, -5e-11]).unwrap();
        assert!(clamped.eigenvalues().iter().all(|&x| x >= 0.0));
        assert!((clamped.matrix().trace().re - 1.0).abs() <= TRACE_TOL);
    }

    #[test]
    fn tensor_examples() {
        let h = DensityOperator::maximally_mixed(2);
        let t = tensor(&h, &h).unwrap();
        assert!(t.matrix().max_abs_diff(&ComplexMatrix::identity(4).scale(0.25)) < 1e-15);
        let a = DensityOperator::from_diagonal(&[1.0, 0.0]).unwrap();
        let b = DensityOperator::from_diagonal(&[0.0, 1.0]).unwrap();
        let t = tensor(&a, &b).unwrap();
        assert!(t
            .matrix()
            .max_abs_diff(&ComplexMatrix::from_diagonal(&[0.0, 1.0, 0.0, 0.0]))
            < 1e-15);
    }

    #[test]
    fn tensor_index_convention() {
        let mut r = rng(5);
        let a = random_density(&mut r, 2, 2);
        let b = random_density(&mut r, 3, 3);
        let t = tensor(&a, &b).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..3 {
                    for l in 0..3 {
                        let lhs = t.matrix().get(i * 3 + k, j * 3 + l);
                        let rhs = a.matrix().get(i, j) * b.matrix().get(k, l);
                        assert!((lhs - rhs).norm() < 1e-15);
                    }
                }
            }
        }
        assert!((t.matrix().trace().re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tensor_respects_cap() {
        let a = DensityOperator::maximally_mixed(8);
        assert!(matches!(
            tensor_with_cap(&a, &a, 32),
            Err(Error::DimensionOverflow { dim: 64, cap: 32 })
        ));
    }

    #[test]
    fn bell_state_marginals() {
        let s = 1.0 / 2f64.sqrt();
        let bell = PureState::new(vec![c(s), c(0.0), c(0.0), c(s)]).unwrap().density();
        for k in 0..2 {
            let m = partial_trace(&bell, &[2, 2], k).unwrap();
            assert!(m.matrix().max_abs_diff(&ComplexMatrix::identity(2).scale(0.5)) < 1e-15);
        }
    }

    #[test]
    fn partial_trace_of_product() {
        let mut r = rng(9);
        let a = random_density(&mut r, 2, 2);
        let b = random_density(&mut r, 3, 2);
        let cc = random_density(&mut r, 2, 1);
        let t = tensor_all(&[&a, &b, &cc], DEFAULT_DIM_CAP).unwrap();
        let dims = [2, 3, 2];
        assert!(partial_trace(&t, &dims, 0).unwrap().matrix().max_abs_diff(a.matrix()) < 1e-10);
        assert!(partial_trace(&t, &dims, 1).unwrap().matrix().max_abs_diff(b.matrix()) < 1e-10);
        assert!(partial_trace(&t, &dims, 2).unwrap().matrix().max_abs_diff(cc.matrix()) < 1e-10);
        let ab = tensor(&a, &b).unwrap();
        assert!(trace_out(&t, &dims, 2).unwrap().matrix().max_abs_diff(ab.matrix()) < 1e-10);
    }

    #[test]
    fn partial_trace_dimension_errors() {
        let s = DensityOperator::maximally_mixed(4);
        assert!(matches!(partial_trace(&s, &[2, 3], 0), Err(Error::DimensionMismatch(_))));
        assert!(matches!(partial_trace(&s, &[2, 2], 2), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn random_three_qubit_reductions_are_states() {
        let mut r = rng(13);
        for _ in 0..10 {
            let rho = random_density(&mut r, 8, 8);
            for k in 0..3 {
                let m = partial_trace(&rho, &[2, 2, 2], k).unwrap();
                assert!((m.matrix().trace().re - 1.0).abs() < 1e-12);
                assert!(eig_hermitian(m.matrix()).unwrap().eigenvalues[1] > -1e-12);
            }
        }
    }

    #[test]
    fn projector_examples() {
        let e1 = PureState::basis(3, 0).unwrap();
        let p = projector(&[e1]).unwrap();
        assert!(p.max_abs_diff(&ComplexMatrix::from_diagonal(&[1.0, 0.0, 0.0])) < 1e-15);
        let full: Vec<_> = (0..3).map(|i| PureState::basis(3, i).unwrap()).collect();
        assert!(projector(&full).unwrap().max_abs_diff(&ComplexMatrix::identity(3)) < 1e-15);
    }

    #[test]
    fn projector_onto_top_eigenvectors() {
        let mut r = rng(17);
        let rho = random_density(&mut r, 5, 5);
        let spec = rho.spectrum();
        let top: Vec<_> = (0..2)
            .map(|i| PureState::from_dvector(spec.vector(i)).unwrap())
            .collect();
        let p = projector(&top).unwrap();
        let weight = (&p * rho.matrix()).trace().re;
        assert!((weight - spec.eigenvalues[0] - spec.eigenvalues[1]).abs() < 1e-10);
        assert!((&p * &p).max_abs_diff(&p) < 1e-8);
    }

    #[test]
    fn projector_rejects_non_orthonormal() {
        let s = 1.0 / 2f64.sqrt();
        let a = PureState::basis(2, 0).unwrap();
        let b = PureState::new(vec![c(s), c(s)]).unwrap();
        assert!(matches!(projector(&[a, b]), Err(Error::NotOrthonormal { .. })));
    }

    #[test]
    fn pure_state_norm_checked() {
        assert!(matches!(
            PureState::new(vec![c(1.0), c(1.0)]),
            Err(Error::NotUnitNorm { .. })
        ));
    }
}

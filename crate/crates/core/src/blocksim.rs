//! Finite-block coding simulator.
//!
//! A [`BlockSource`] emits strings of N signal states drawn from a base
//! ensemble. A [`BlockScheme`] maps each block state to its reconstruction;
//! [`score`] then evaluates the whole-block (global) and per-position
//! (local) fidelity criteria, exactly when the number of strings allows it
//! and by Monte Carlo otherwise.
//!
//! Encoders compress into a channel space whose dimension is
//! `ceil(2^(qN))` for a target rate q, see [`channel_dim`].

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::measures::{fidelity, overlap_fidelity, vn_entropy, Ensemble};
use crate::qmat::{reduce_to, tensor_all, ComplexMatrix, DensityOperator, C64, DEFAULT_DIM_CAP, ORTHONORMAL_TOL};
use crate::random::stream_rng;
use rand::Rng;

/// Largest string count swept exactly in auto mode when states must be
/// handled as dense matrices.
pub const DENSE_SWEEP_CAP: usize = 1024;
/// Largest string count any exact sweep will attempt.
pub const EXACT_SWEEP_CAP: usize = 1 << 20;
pub const DEFAULT_SAMPLES: usize = 2000;

/// Slack used when turning 2^(qN) into an integer dimension, so that exact
/// powers of two are not rounded up by floating-point noise.
const DIM_ROUNDING_SLACK: f64 = 1e-9;
/// Off-diagonal magnitude below which a state takes the diagonal path.
const DIAGONAL_TOL: f64 = 1e-12;

/// d^N, or `None` on overflow.
fn checked_power(base: usize, n: usize) -> Option<usize> {
    base.checked_pow(u32::try_from(n).ok()?)
}

/// Channel dimension for rate q at block length N: `ceil(2^(qN))`, clamped
/// to [1, d^N].
pub fn channel_dim(rate: f64, n: usize, block_dim: usize) -> Result<usize> {
    if !rate.is_finite() || rate < 0.0 {
        return Err(Error::Domain(format!("rate must be a finite nonnegative number, got {rate}")));
    }
    let target = (rate * n as f64).exp2();
    if target >= block_dim as f64 {
        return Ok(block_dim);
    }
    Ok(((target - DIM_ROUNDING_SLACK).ceil() as usize).clamp(1, block_dim))
}

/// Strings of `n` signals drawn independently from `base`.
#[derive(Clone, Debug)]
pub struct BlockSource {
    base: Ensemble,
    n: usize,
    block_dim: usize,
    dim_cap: usize,
}

impl BlockSource {
    pub fn new(base: Ensemble, n: usize) -> Result<Self> {
        Self::with_cap(base, n, DEFAULT_DIM_CAP)
    }

    pub fn with_cap(base: Ensemble, n: usize, dim_cap: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("block length N must be at least 1".into()));
        }
        let d = base.dim();
        let block_dim = match checked_power(d, n) {
            Some(b) if b <= dim_cap => b,
            other => {
                return Err(Error::DimensionOverflow {
                    dim: other.unwrap_or(usize::MAX),
                    cap: dim_cap,
                })
            }
        };
        Ok(Self {
            base,
            n,
            block_dim,
            dim_cap,
        })
    }

    /// The same source expressed in the common eigenbasis of its states, when
    /// they commute; otherwise an unchanged copy. Only valid together with
    /// schemes built from the source itself.
    pub fn diagonalized(&self) -> Self {
        if self.base.is_diagonal(DIAGONAL_TOL) {
            return self.clone();
        }
        match self.base.common_eigenbasis() {
            Some(u) => Self {
                base: self.base.conjugated_by(&u),
                ..self.clone()
            },
            None => self.clone(),
        }
    }

    pub fn base(&self) -> &Ensemble {
        &self.base
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn block_dim(&self) -> usize {
        self.block_dim
    }

    pub fn dim_cap(&self) -> usize {
        self.dim_cap
    }

    pub fn string_count(&self) -> Option<usize> {
        checked_power(self.base.len(), self.n)
    }

    pub fn is_diagonal(&self) -> bool {
        self.base.is_diagonal(DIAGONAL_TOL)
    }

    pub fn string_prob(&self, x: &[usize]) -> f64 {
        let p = self.base.probs().as_slice();
        x.iter().map(|&i| p[i]).product()
    }

    /// ρ_{x₁} ⊗ ··· ⊗ ρ_{x_N}.
    pub fn string_state(&self, x: &[usize]) -> Result<DensityOperator> {
        let states: Vec<&DensityOperator> = x.iter().map(|&i| &self.base.states()[i]).collect();
        tensor_all(&states, self.dim_cap)
    }

    fn string_diagonal(&self, x: &[usize]) -> Vec<f64> {
        let diags: Vec<Vec<f64>> = x.iter().map(|&i| self.base.states()[i].matrix().diagonal_real()).collect();
        product_vector(&diags)
    }

    /// ρ̄^{⊗N} as a dense operator.
    pub fn average_block(&self) -> Result<DensityOperator> {
        let avg = self.base.average();
        tensor_all(&vec![&avg; self.n], self.dim_cap)
    }

    fn average_block_diagonal(&self) -> Vec<f64> {
        let diag = self.base.average().matrix().diagonal_real();
        product_vector(&vec![diag; self.n])
    }

    /// Entry i of string number `index` in base-n digits, first position most
    /// significant.
    fn decode(&self, mut index: usize) -> Vec<usize> {
        let n = self.base.len();
        let mut x = vec![0; self.n];
        for slot in x.iter_mut().rev() {
            *slot = index % n;
            index /= n;
        }
        x
    }
}

/// Entrywise Kronecker product of probability vectors, first factor most
/// significant.
fn product_vector(factors: &[Vec<f64>]) -> Vec<f64> {
    let mut out = vec![1.0];
    for f in factors {
        out = out.iter().flat_map(|a| f.iter().map(move |b| a * b)).collect();
    }
    out
}

/// Per-position marginals of a vector over `n` factors of size `d`.
fn marginals(v: &[f64], d: usize, n: usize) -> Vec<Vec<f64>> {
    let mut out = vec![vec![0.0; d]; n];
    for (mut idx, &w) in v.iter().enumerate() {
        for pos in (0..n).rev() {
            out[pos][idx % d] += w;
            idx /= d;
        }
    }
    out
}

#[derive(Clone, Debug)]
enum SubspaceBasis {
    /// Coordinate subspace; `kept[0]` is the patch index.
    Coordinate { kept: Vec<usize> },
    /// Orthonormal columns; column 0 is the patch state.
    Dense { vectors: ComplexMatrix },
}

/// A subspace D of the block space together with its patch state and the
/// weight η that a reference state leaves outside it.
#[derive(Clone, Debug)]
pub struct TypicalSubspace {
    dim: usize,
    basis: SubspaceBasis,
    eta: f64,
}

/// Indices sorted by descending value, ties by ascending index.
fn descending_order(v: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[b].total_cmp(&v[a]).then(a.cmp(&b)));
    idx
}

fn check_rank(rank: usize, dim: usize) -> Result<()> {
    if rank == 0 || rank > dim {
        return Err(Error::Domain(format!("subspace dimension must lie in [1, {dim}], got {rank}")));
    }
    Ok(())
}

impl TypicalSubspace {
    /// Span of the `rank` largest eigenvectors of `reference`; the patch is
    /// the top eigenvector.
    pub fn top_eigenspace(reference: &DensityOperator, rank: usize) -> Result<Self> {
        let dim = reference.dim();
        check_rank(rank, dim)?;
        if reference.matrix().is_diagonal(0.0) {
            return Ok(Self::top_coordinates(&reference.matrix().diagonal_real(), rank));
        }
        let spec = reference.spectrum();
        let vectors = spec.eigenvectors.as_dmatrix().columns(0, rank).into_owned();
        Ok(Self {
            dim,
            basis: SubspaceBasis::Dense {
                vectors: ComplexMatrix::from_dmatrix(vectors),
            },
            eta: (1.0 - spec.top_sum(rank)).clamp(0.0, 1.0),
        })
    }

    /// Coordinate subspace over the `rank` largest entries of a diagonal.
    pub fn top_coordinates(diag: &[f64], rank: usize) -> Self {
        let order = descending_order(diag);
        let kept: Vec<usize> = order[..rank.min(diag.len())].to_vec();
        let inside: f64 = kept.iter().map(|&i| diag[i]).sum();
        Self {
            dim: diag.len(),
            basis: SubspaceBasis::Coordinate { kept },
            eta: (1.0 - inside).clamp(0.0, 1.0),
        }
    }

    /// Span of the given orthonormal columns; column 0 is the patch state.
    pub fn spanned_by(vectors: ComplexMatrix, reference: &DensityOperator) -> Result<Self> {
        let dim = vectors.rows();
        if dim != reference.dim() {
            return Err(Error::DimensionMismatch(format!(
                "subspace vectors have length {dim}, reference state has dimension {}",
                reference.dim()
            )));
        }
        check_rank(vectors.cols(), dim)?;
        let gram = vectors.adjoint().as_dmatrix() * vectors.as_dmatrix();
        let deviation = (gram - nalgebra::DMatrix::<C64>::identity(vectors.cols(), vectors.cols())).camax();
        if deviation > ORTHONORMAL_TOL {
            return Err(Error::NotOrthonormal {
                deviation,
                tolerance: ORTHONORMAL_TOL,
            });
        }
        let mut s = Self {
            dim,
            basis: SubspaceBasis::Dense { vectors },
            eta: 0.0,
        };
        s.eta = s.tail_weight(reference)?;
        Ok(s)
    }

    /// Typical subspace of ρ̄^{⊗N} with `rank` dimensions.
    pub fn for_source(source: &BlockSource, rank: usize) -> Result<Self> {
        check_rank(rank, source.block_dim())?;
        if source.base().average().matrix().is_diagonal(DIAGONAL_TOL) {
            Ok(Self::top_coordinates(&source.average_block_diagonal(), rank))
        } else {
            Self::top_eigenspace(&source.average_block()?, rank)
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        match &self.basis {
            SubspaceBasis::Coordinate { kept } => kept.len(),
            SubspaceBasis::Dense { vectors } => vectors.cols(),
        }
    }

    /// Weight the reference state leaves outside the subspace.
    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// The projector Π as a dense matrix.
    pub fn projector(&self) -> ComplexMatrix {
        match &self.basis {
            SubspaceBasis::Coordinate { kept } => {
                let mut diag = vec![0.0; self.dim];
                for &i in kept {
                    diag[i] = 1.0;
                }
                ComplexMatrix::from_diagonal(&diag)
            }
            SubspaceBasis::Dense { vectors } => vectors * &vectors.adjoint(),
        }
    }

    fn check_dim(&self, dim: usize) -> Result<()> {
        if dim != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "state of dimension {dim} applied to a subspace of a {}-dimensional space",
                self.dim
            )));
        }
        Ok(())
    }

    /// tr((I − Π) ρ).
    pub fn tail_weight(&self, rho: &DensityOperator) -> Result<f64> {
        self.check_dim(rho.dim())?;
        let inside = match &self.basis {
            SubspaceBasis::Coordinate { kept } => kept.iter().map(|&i| rho.matrix().get(i, i).re).sum(),
            SubspaceBasis::Dense { vectors } => {
                let v = vectors.as_dmatrix();
                (v.adjoint() * rho.matrix().as_dmatrix() * v).trace().re
            }
        };
        Ok((1.0 - inside).clamp(0.0, 1.0))
    }
}

/// ρ ↦ ΠρΠ + tr((I − Π)ρ) |0⟩⟨0|, with |0⟩ the patch state of `t`.
pub fn project_and_patch(rho: &DensityOperator, t: &TypicalSubspace) -> Result<DensityOperator> {
    t.check_dim(rho.dim())?;
    let tail = t.tail_weight(rho)?;
    let out = match &t.basis {
        SubspaceBasis::Coordinate { kept } => {
            let a = rho.matrix().as_dmatrix();
            let mut m = nalgebra::DMatrix::<C64>::zeros(t.dim, t.dim);
            for &i in kept {
                for &j in kept {
                    m[(i, j)] = a[(i, j)];
                }
            }
            m[(kept[0], kept[0])] += C64::new(tail, 0.0);
            ComplexMatrix::from_dmatrix(m)
        }
        SubspaceBasis::Dense { vectors } => {
            let v = vectors.as_dmatrix();
            let inner = v.adjoint() * rho.matrix().as_dmatrix() * v;
            let mut m = v * inner * v.adjoint();
            let patch = v.column(0);
            m += patch * patch.adjoint() * C64::new(tail, 0.0);
            ComplexMatrix::from_dmatrix(m).hermitian_part()
        }
    };
    Ok(DensityOperator::from_trusted(out))
}

/// Sum of the `subspace_dim` largest eigenvalues of ρ: no state supported
/// on a subspace of that dimension has higher fidelity with ρ.
pub fn fidelity_subspace_upper_bound(rho: &DensityOperator, subspace_dim: usize) -> Result<f64> {
    check_rank(subspace_dim, rho.dim())?;
    Ok(rho.spectrum().top_sum(subspace_dim).min(1.0))
}

/// Sum of the `k` largest eigenvalues of σ^{⊗n}, given the spectrum of σ.
///
/// Eigenvalues of a tensor power are grouped by type (how often each base
/// eigenvalue occurs), so only C(n+d−1, d−1) classes are visited.
pub fn tensor_power_top_sum(eigenvalues: &[f64], n: usize, k: f64) -> f64 {
    let d = eigenvalues.len();
    let mut classes: Vec<(f64, f64)> = Vec::new();
    let mut counts = vec![0usize; d];
    let log_fact: Vec<f64> = (0..=n)
        .scan(0.0, |acc, i| {
            if i > 0 {
                *acc += (i as f64).ln();
            }
            Some(*acc)
        })
        .collect();
    fn visit(
        pos: usize,
        left: usize,
        counts: &mut Vec<usize>,
        eig: &[f64],
        log_fact: &[f64],
        n: usize,
        out: &mut Vec<(f64, f64)>,
    ) {
        if pos + 1 == counts.len() {
            counts[pos] = left;
            let value: f64 = eig.iter().zip(counts.iter()).map(|(l, &c)| l.max(0.0).powi(c as i32)).product();
            let log_mult = log_fact[n] - counts.iter().map(|&c| log_fact[c]).sum::<f64>();
            out.push((value, log_mult.exp().round()));
            return;
        }
        for c in 0..=left {
            counts[pos] = c;
            visit(pos + 1, left - c, counts, eig, log_fact, n, out);
        }
    }
    if d == 0 {
        return 0.0;
    }
    visit(0, n, &mut counts, eigenvalues, &log_fact, n, &mut classes);
    classes.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut remaining = k;
    let mut total = 0.0;
    for (value, mult) in classes {
        if remaining <= 0.0 {
            break;
        }
        let take = mult.min(remaining);
        total += value * take;
        remaining -= take;
    }
    total.min(1.0)
}

/// Highest fidelity any scheme with a `k`-dimensional channel can reach on
/// ρ̄^{⊗N}: the weight of the k largest eigenvalues.
pub fn subspace_ceiling(source: &BlockSource, k: usize) -> f64 {
    tensor_power_top_sum(source.base().average().eigenvalues(), source.n(), k as f64)
}

/// A map from block states to reconstructed block states.
pub trait BlockScheme: Sync {
    fn name(&self) -> String;

    fn apply(&self, rho: &DensityOperator) -> Result<DensityOperator>;

    /// Action on diagonal states, when it maps them to diagonal states.
    fn apply_diagonal(&self, _diag: &[f64]) -> Option<Vec<f64>> {
        None
    }
}

pub struct IdentityScheme;

impl BlockScheme for IdentityScheme {
    fn name(&self) -> String {
        "identity".into()
    }

    fn apply(&self, rho: &DensityOperator) -> Result<DensityOperator> {
        Ok(rho.clone())
    }

    fn apply_diagonal(&self, diag: &[f64]) -> Option<Vec<f64>> {
        Some(diag.to_vec())
    }
}

/// Compress into a typical subspace; states outside are patched.
pub struct ProjectAndPatch {
    pub subspace: TypicalSubspace,
}

impl ProjectAndPatch {
    pub fn for_source(source: &BlockSource, rate: f64) -> Result<Self> {
        let k = channel_dim(rate, source.n(), source.block_dim())?;
        Ok(Self {
            subspace: TypicalSubspace::for_source(source, k)?,
        })
    }
}

impl BlockScheme for ProjectAndPatch {
    fn name(&self) -> String {
        format!("project-and-patch (channel dimension {})", self.subspace.rank())
    }

    fn apply(&self, rho: &DensityOperator) -> Result<DensityOperator> {
        project_and_patch(rho, &self.subspace)
    }

    fn apply_diagonal(&self, diag: &[f64]) -> Option<Vec<f64>> {
        let SubspaceBasis::Coordinate { kept } = &self.subspace.basis else {
            return None;
        };
        if diag.len() != self.subspace.dim {
            return None;
        }
        let mut out = vec![0.0; diag.len()];
        let mut inside = 0.0;
        for &i in kept {
            out[i] = diag[i];
            inside += diag[i];
        }
        out[kept[0]] += (1.0 - inside).max(0.0);
        Some(out)
    }
}

/// Ignores its input and always returns the same state.
pub struct FixedOutput {
    pub output: DensityOperator,
}

impl BlockScheme for FixedOutput {
    fn name(&self) -> String {
        "fixed output".into()
    }

    fn apply(&self, rho: &DensityOperator) -> Result<DensityOperator> {
        if rho.dim() != self.output.dim() {
            return Err(Error::DimensionMismatch(format!(
                "fixed output of dimension {} for an input of dimension {}",
                self.output.dim(),
                rho.dim()
            )));
        }
        Ok(self.output.clone())
    }

    fn apply_diagonal(&self, diag: &[f64]) -> Option<Vec<f64>> {
        let m = self.output.matrix();
        (diag.len() == m.rows() && m.is_diagonal(0.0)).then(|| m.diagonal_real())
    }
}

/// `second` after `first`.
pub struct Composed<A, B> {
    pub first: A,
    pub second: B,
}

impl<A: BlockScheme, B: BlockScheme> BlockScheme for Composed<A, B> {
    fn name(&self) -> String {
        format!("{} then {}", self.first.name(), self.second.name())
    }

    fn apply(&self, rho: &DensityOperator) -> Result<DensityOperator> {
        self.second.apply(&self.first.apply(rho)?)
    }

    fn apply_diagonal(&self, diag: &[f64]) -> Option<Vec<f64>> {
        self.second.apply_diagonal(&self.first.apply_diagonal(diag)?)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepMode {
    Exact,
    MonteCarlo,
    /// Exact when feasible, Monte Carlo otherwise.
    Auto,
}

#[derive(Clone, Copy, Debug)]
pub struct SweepConfig {
    pub mode: SweepMode,
    pub samples: usize,
    pub seed: u64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            mode: SweepMode::Auto,
            samples: DEFAULT_SAMPLES,
            seed: 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    DiagonalExact,
    DenseExact,
    MonteCarlo,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FidelityScore {
    /// Σ Prob(x) F(σ_x, σ̃_x).
    pub global: f64,
    /// Σ Prob(x) Π_k F(ρ_{x_k}, σ̃_{x,k}).
    pub local: f64,
    /// Zero for exact sweeps.
    pub global_std_error: f64,
    pub local_std_error: f64,
    pub method: Method,
    /// Strings evaluated.
    pub strings: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Default)]
struct StringScore {
    global: f64,
    local: f64,
}

#[derive(Clone, Copy)]
struct Want {
    global: bool,
    local: bool,
}

/// Classical fidelity of two weight vectors after normalising each, so that
/// rounding drift in long product vectors does not leak into the score.
fn normalized_overlap(p: &[f64], q: &[f64]) -> Result<f64> {
    let g: f64 = p.iter().zip(q).map(|(a, b)| (a.max(0.0) * b.max(0.0)).sqrt()).sum();
    let norm = (p.iter().sum::<f64>() * q.iter().sum::<f64>()).sqrt();
    if p.len() != q.len() || norm <= 0.0 {
        return overlap_fidelity(p, q);
    }
    Ok((g / norm).powi(2).clamp(0.0, 1.0))
}

fn score_diagonal(source: &BlockSource, scheme: &dyn BlockScheme, x: &[usize], want: Want) -> Result<StringScore> {
    let input = source.string_diagonal(x);
    let out = scheme
        .apply_diagonal(&input)
        .ok_or_else(|| Error::Domain("scheme has no diagonal action".into()))?;
    let mut s = StringScore::default();
    if want.global {
        s.global = normalized_overlap(&input, &out)?;
    }
    if want.local {
        let d = source.base().dim();
        let margins = marginals(&out, d, source.n());
        let mut prod = 1.0;
        for (m, &i) in margins.iter().zip(x) {
            prod *= normalized_overlap(&source.base().states()[i].matrix().diagonal_real(), m)?;
        }
        s.local = prod;
    }
    Ok(s)
}

fn score_dense(source: &BlockSource, scheme: &dyn BlockScheme, x: &[usize], want: Want) -> Result<StringScore> {
    let input = source.string_state(x)?;
    let out = scheme.apply(&input)?;
    if out.dim() != input.dim() {
        return Err(Error::DimensionMismatch(format!(
            "scheme returned dimension {} for a block of dimension {}",
            out.dim(),
            input.dim()
        )));
    }
    let mut s = StringScore::default();
    if want.global {
        s.global = fidelity(&input, &out)?;
    }
    if want.local {
        let dims = vec![source.base().dim(); source.n()];
        let mut prod = 1.0;
        for (pos, &i) in x.iter().enumerate() {
            let marginal = reduce_to(&out, &dims, &[pos])?;
            prod *= fidelity(&source.base().states()[i], &marginal)?;
        }
        s.local = prod;
    }
    Ok(s)
}

fn sample_string<R: Rng>(rng: &mut R, cumulative: &[f64], n: usize) -> Vec<usize> {
    (0..n)
        .map(|_| {
            let u: f64 = rng.random();
            cumulative.iter().position(|&c| u < c).unwrap_or(cumulative.len() - 1)
        })
        .collect()
}

fn evaluate(source: &BlockSource, scheme: &dyn BlockScheme, config: SweepConfig, want: Want) -> Result<FidelityScore> {
    let strings = source.string_count();
    let diagonal = source.is_diagonal() && {
        let probe = source.string_diagonal(&vec![0; source.n()]);
        scheme.apply_diagonal(&probe).is_some()
    };
    let exact_cap = match config.mode {
        SweepMode::Exact => EXACT_SWEEP_CAP,
        _ if diagonal => EXACT_SWEEP_CAP,
        _ => DENSE_SWEEP_CAP,
    };
    let exact = match (config.mode, strings) {
        (SweepMode::MonteCarlo, _) => false,
        (SweepMode::Exact, Some(c)) if c <= exact_cap => true,
        (SweepMode::Exact, _) => {
            return Err(Error::Domain(format!(
                "exact sweep needs {}^{} strings, more than the limit {exact_cap}",
                source.base().len(),
                source.n()
            )))
        }
        (SweepMode::Auto, Some(c)) => c <= exact_cap,
        (SweepMode::Auto, None) => false,
    };
    let per_string = |x: &[usize]| {
        if diagonal {
            score_diagonal(source, scheme, x, want)
        } else {
            score_dense(source, scheme, x, want)
        }
    };
    let method = match (exact, diagonal) {
        (false, _) => Method::MonteCarlo,
        (true, true) => Method::DiagonalExact,
        (true, false) => Method::DenseExact,
    };
    if exact {
        let count = strings.expect("exact sweeps have a finite string count");
        let parts: Vec<Option<(f64, StringScore)>> = (0..count)
            .into_par_iter()
            .map(|index| {
                let x = source.decode(index);
                let w = source.string_prob(&x);
                if w == 0.0 {
                    return Ok(None);
                }
                per_string(&x).map(|s| Some((w, s)))
            })
            .collect::<Result<_>>()?;
        let (mut global, mut local) = (0.0, 0.0);
        for (w, s) in parts.into_iter().flatten() {
            global += w * s.global;
            local += w * s.local;
        }
        return Ok(FidelityScore {
            global: global.clamp(0.0, 1.0),
            local: local.clamp(0.0, 1.0),
            global_std_error: 0.0,
            local_std_error: 0.0,
            method,
            strings: count,
        });
    }
    if config.samples < 2 {
        return Err(Error::Domain("Monte Carlo needs at least 2 samples".into()));
    }
    let cumulative: Vec<f64> = source
        .base()
        .probs()
        .as_slice()
        .iter()
        .scan(0.0, |acc, p| {
            *acc += p;
            Some(*acc)
        })
        .collect();
    let draws: Vec<StringScore> = (0..config.samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(config.seed, i as u64);
            per_string(&sample_string(&mut rng, &cumulative, source.n()))
        })
        .collect::<Result<_>>()?;
    let stats = |f: fn(&StringScore) -> f64| {
        let n = draws.len() as f64;
        let mean = draws.iter().map(f).sum::<f64>() / n;
        let var = draws.iter().map(|s| (f(s) - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (mean.clamp(0.0, 1.0), (var / n).sqrt())
    };
    let (global, global_se) = stats(|s| s.global);
    let (local, local_se) = stats(|s| s.local);
    Ok(FidelityScore {
        global,
        local,
        global_std_error: global_se,
        local_std_error: local_se,
        method: Method::MonteCarlo,
        strings: config.samples,
    })
}

/// Global and local fidelity of `scheme` on `source`.
pub fn score(source: &BlockSource, scheme: &dyn BlockScheme, config: SweepConfig) -> Result<FidelityScore> {
    evaluate(source, scheme, config, Want { global: true, local: true })
}

/// Σ Prob(x) F(σ_x, σ̃_x), exact when feasible.
pub fn global_fidelity_score(source: &BlockSource, scheme: &dyn BlockScheme) -> Result<f64> {
    let want = Want {
        global: true,
        local: false,
    };
    Ok(evaluate(source, scheme, SweepConfig::default(), want)?.global)
}

/// Σ Prob(x) Π_k F(ρ_{x_k}, σ̃_{x,k}), exact when feasible.
pub fn local_fidelity_score(source: &BlockSource, scheme: &dyn BlockScheme) -> Result<f64> {
    let want = Want {
        global: false,
        local: true,
    };
    Ok(evaluate(source, scheme, SweepConfig::default(), want)?.local)
}

/// Global and local fidelity of a single string.
pub fn string_scores(source: &BlockSource, scheme: &dyn BlockScheme, x: &[usize]) -> Result<(f64, f64)> {
    if x.len() != source.n() || x.iter().any(|&i| i >= source.base().len()) {
        return Err(Error::Domain(format!(
            "string must have {} entries below {}",
            source.n(),
            source.base().len()
        )));
    }
    let s = score_dense(source, scheme, x, Want { global: true, local: true })?;
    Ok((s.global, s.local))
}

/// One block length in the threshold demonstration.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ThresholdRow {
    pub n: usize,
    /// S(ρ̄) − δ and S(ρ̄) + δ.
    pub rate_below: f64,
    pub rate_above: f64,
    pub dim_below: usize,
    pub dim_above: usize,
    /// log₂(channel dimension)/N actually used.
    pub realized_below: f64,
    pub realized_above: f64,
    /// Best achievable fidelity below the entropy: 1 − η₋.
    pub ceiling_below: f64,
    pub eta_below: f64,
    pub eta_above: f64,
    /// Global fidelity of project-and-patch at S(ρ̄) + δ.
    pub achieved_above: f64,
    pub achieved_std_error: f64,
    pub method: Method,
}

/// Below S(ρ̄) the best fidelity shrinks with N; above it project-and-patch
/// stays close to one.
pub fn threshold_demo(base: &Ensemble, delta: f64, n_list: &[usize], dim_cap: usize, config: SweepConfig) -> Result<Vec<ThresholdRow>> {
    if !(delta.is_finite() && delta > 0.0) {
        return Err(Error::Domain(format!("delta must be positive, got {delta}")));
    }
    let s = vn_entropy(&base.average());
    let rate_below = (s - delta).max(0.0);
    let rate_above = s + delta;
    n_list
        .iter()
        .map(|&n| {
            let source = BlockSource::with_cap(base.clone(), n, dim_cap)?.diagonalized();
            let d = source.block_dim();
            let dim_below = channel_dim(rate_below, n, d)?;
            let ceiling_below = subspace_ceiling(&source, dim_below);
            let scheme = ProjectAndPatch::for_source(&source, rate_above)?;
            let achieved = evaluate(&source, &scheme, config, Want { global: true, local: false })?;
            Ok(ThresholdRow {
                n,
                rate_below,
                rate_above,
                dim_below,
                dim_above: scheme.subspace.rank(),
                realized_below: (dim_below as f64).log2() / n as f64,
                realized_above: (scheme.subspace.rank() as f64).log2() / n as f64,
                ceiling_below,
                eta_below: (1.0 - ceiling_below).max(0.0),
                eta_above: scheme.subspace.eta(),
                achieved_above: achieved.global,
                achieved_std_error: achieved.global_std_error,
                method: achieved.method,
            })
        })
        .collect()
}

//! Rate bounds and scheme-specific compression rates.
//!
//! Every ensemble is bracketed by the Holevo lower bound χ(E) and the
//! Schumacher upper bound S(ρ̄). Special structures (commuting qubit pairs,
//! block-diagonal states with a shared block, photographic negatives,
//! orthogonal supports) admit schemes that beat S(ρ̄); [`rate_report`]
//! recognises them and lists their rates.

use serde::Serialize;

use crate::classical::{xi_rate, CoinSource};
use crate::error::{Error, Result};
use crate::measures::{binary_entropy, holevo, shannon_entropy, vn_entropy, Ensemble, ProbVector};
use crate::purify::{photographic_negative_report, purification_rate};
use crate::qmat::{ComplexMatrix, DensityOperator, C64};

/// Slack allowed between scheme rates / upper bounds and lower bounds.
pub const REPORT_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RateKind {
    UpperBound,
    LowerBound,
    SchemeRate,
    Conjecture,
}

impl RateKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            RateKind::UpperBound => "upper_bound",
            RateKind::LowerBound => "lower_bound",
            RateKind::SchemeRate => "scheme_rate",
            RateKind::Conjecture => "conjecture",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RateEntry {
    pub name: String,
    /// Bits (qubits) per signal.
    pub rate: f64,
    pub kind: RateKind,
    pub description: String,
}

impl RateEntry {
    pub fn new(name: &str, rate: f64, kind: RateKind, description: &str) -> Self {
        Self {
            name: name.to_string(),
            rate,
            kind,
            description: description.to_string(),
        }
    }
}

/// Named rates for one ensemble.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RateReport {
    pub ensemble: String,
    pub entries: Vec<RateEntry>,
}

impl RateReport {
    /// Fails if some scheme rate or upper bound lies below a lower bound.
    pub fn new(ensemble: String, entries: Vec<RateEntry>) -> Result<Self> {
        let lower = entries
            .iter()
            .filter(|e| e.kind == RateKind::LowerBound)
            .map(|e| e.rate)
            .fold(f64::NEG_INFINITY, f64::max);
        if let Some(bad) = entries
            .iter()
            .filter(|e| matches!(e.kind, RateKind::UpperBound | RateKind::SchemeRate))
            .find(|e| e.rate < lower - REPORT_TOL)
        {
            return Err(Error::InvariantViolation(format!(
                "{} = {} lies below the lower bound {lower}",
                bad.name, bad.rate
            )));
        }
        Ok(Self { ensemble, entries })
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.entries.iter().find(|e| e.name == name).map(|e| e.rate)
    }

    pub fn of_kind(&self, kind: RateKind) -> impl Iterator<Item = &RateEntry> {
        self.entries.iter().filter(move |e| e.kind == kind)
    }

    /// Interval [χ, S(ρ̄)] known to contain the optimal blind rate, when both
    /// entries are present.
    pub fn qmin_bracket(&self) -> Option<(f64, f64)> {
        Some((self.get("chi")?, self.get("S_rho_bar")?))
    }
}

/// S(ρ̄), achievable by Schumacher coding of the average state.
pub fn upper_bound_rate(e: &Ensemble) -> f64 {
    vn_entropy(&e.average())
}

/// χ(E); no scheme can go below it.
pub fn lower_bound_rate(e: &Ensemble) -> f64 {
    holevo(e)
}

/// Signal states diag(ε σᵢ, (1−ε) τᵢ) on an (m + n)-dimensional space.
#[derive(Clone, Debug)]
pub struct BlockDiagonalEnsemble {
    pub epsilon: f64,
    pub probs: ProbVector,
    pub sigma: Vec<DensityOperator>,
    pub tau: Vec<DensityOperator>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EntropySplit {
    pub s_rho_bar: f64,
    pub h_epsilon: f64,
    pub s_sigma_bar: f64,
    pub s_tau_bar: f64,
}

impl EntropySplit {
    /// S(ρ̄) − H(ε) − ε S(σ̄) − (1−ε) S(τ̄).
    pub fn residual(&self, epsilon: f64) -> f64 {
        self.s_rho_bar - self.h_epsilon - epsilon * self.s_sigma_bar - (1.0 - epsilon) * self.s_tau_bar
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BlockDiagonalRates {
    /// H(ε) + ε S(σ̄).
    pub scheme_rate: f64,
    pub s_rho_bar: f64,
    /// (1−ε) S(τ̄).
    pub saving: f64,
}

fn block_diag(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (m, n) = (a.rows(), b.rows());
    let mut out = nalgebra::DMatrix::<C64>::zeros(m + n, m + n);
    out.view_mut((0, 0), (m, m)).copy_from(a.as_dmatrix());
    out.view_mut((m, m), (n, n)).copy_from(b.as_dmatrix());
    ComplexMatrix::from_dmatrix(out)
}

impl BlockDiagonalEnsemble {
    pub fn new(epsilon: f64, probs: ProbVector, sigma: Vec<DensityOperator>, tau: Vec<DensityOperator>) -> Result<Self> {
        if !(0.0..=1.0).contains(&epsilon) {
            return Err(Error::Domain(format!("epsilon must lie in [0, 1], got {epsilon}")));
        }
        if sigma.len() != probs.len() {
            return Err(Error::LengthMismatch {
                left: probs.len(),
                right: sigma.len(),
            });
        }
        if tau.len() != probs.len() {
            return Err(Error::LengthMismatch {
                left: probs.len(),
                right: tau.len(),
            });
        }
        for block in [&sigma, &tau] {
            let d = block[0].dim();
            if block.iter().any(|s| s.dim() != d) {
                return Err(Error::DimensionMismatch("blocks of one kind must share a dimension".into()));
            }
        }
        Ok(Self {
            epsilon,
            probs,
            sigma,
            tau,
        })
    }

    /// The full (m + n)-dimensional ensemble.
    pub fn to_ensemble(&self) -> Ensemble {
        let states = self
            .sigma
            .iter()
            .zip(&self.tau)
            .map(|(s, t)| {
                DensityOperator::from_trusted(block_diag(
                    &s.matrix().scale(self.epsilon),
                    &t.matrix().scale(1.0 - self.epsilon),
                ))
            })
            .collect();
        Ensemble::new(self.probs.clone(), states).expect("shapes checked on construction")
    }

    fn block_average(&self, blocks: &[DensityOperator]) -> DensityOperator {
        let refs: Vec<&DensityOperator> = blocks.iter().collect();
        DensityOperator::mix(self.probs.as_slice(), &refs).expect("valid mixture")
    }

    /// The terms of S(ρ̄) = H(ε) + ε S(σ̄) + (1−ε) S(τ̄).
    pub fn entropy_split(&self) -> EntropySplit {
        EntropySplit {
            s_rho_bar: upper_bound_rate(&self.to_ensemble()),
            h_epsilon: binary_entropy(self.epsilon),
            s_sigma_bar: vn_entropy(&self.block_average(&self.sigma)),
            s_tau_bar: vn_entropy(&self.block_average(&self.tau)),
        }
    }

    pub fn tau_deviation(&self) -> f64 {
        let first = self.tau[0].matrix();
        self.tau
            .iter()
            .map(|t| t.matrix().max_abs_diff(first))
            .fold(0.0, f64::max)
    }
}

/// Rate when the τ blocks coincide: Bob can rebuild τ himself, so only the
/// subspace label and the σ part are sent.
pub fn block_diagonal_rate(e: &BlockDiagonalEnsemble) -> Result<BlockDiagonalRates> {
    let deviation = e.tau_deviation();
    if deviation > REPORT_TOL {
        return Err(Error::TauMismatch { deviation });
    }
    let split = e.entropy_split();
    let residual = split.residual(e.epsilon);
    if residual.abs() > REPORT_TOL {
        return Err(Error::InvariantViolation(format!(
            "entropy of the block-diagonal average does not split into its parts (residual {residual:e})"
        )));
    }
    Ok(BlockDiagonalRates {
        scheme_rate: split.h_epsilon + e.epsilon * split.s_sigma_bar,
        s_rho_bar: split.s_rho_bar,
        saving: (1.0 - e.epsilon) * split.s_tau_bar,
    })
}

#[derive(Clone, Copy, Debug)]
pub struct RateOptions {
    /// Tolerance used when recognising special structure.
    pub shape_tol: f64,
}

impl Default for RateOptions {
    fn default() -> Self {
        Self { shape_tol: 1e-8 }
    }
}

fn orthogonal_supports(e: &Ensemble, tol: f64) -> bool {
    let s = e.states();
    (0..s.len()).all(|i| (i + 1..s.len()).all(|j| s[i].overlap(&s[j]).abs() <= tol))
}

fn coin_source_of(e: &Ensemble) -> Option<CoinSource> {
    if e.len() != 2 || e.dim() != 2 {
        return None;
    }
    let basis = e.common_eigenbasis()?;
    let rotated = e.conjugated_by(&basis);
    let a1 = rotated.states()[0].matrix().get(0, 0).re.clamp(0.0, 1.0);
    let a2 = rotated.states()[1].matrix().get(0, 0).re.clamp(0.0, 1.0);
    let p = e.probs().as_slice();
    CoinSource::with_priors(p[0], p[1], a1, a2).ok()
}

/// Splits every state as diag(ε σᵢ, (1−ε) τ) with a common τ, trying each
/// block boundary in turn.
pub fn recognise_block_diagonal(e: &Ensemble, tol: f64) -> Option<BlockDiagonalEnsemble> {
    let d = e.dim();
    'split: for m in 1..d {
        let mut sigma = Vec::new();
        let mut tau = Vec::new();
        let mut eps = None;
        for s in e.states() {
            let a = s.matrix().as_dmatrix();
            let off = a.view((0, m), (m, d - m)).iter().fold(0.0f64, |acc, z| acc.max(z.norm()));
            if off > tol {
                continue 'split;
            }
            let upper = a.view((0, 0), (m, m)).into_owned();
            let lower = a.view((m, m), (d - m, d - m)).into_owned();
            let eps_i = upper.trace().re;
            match eps {
                None => eps = Some(eps_i),
                Some(e0) if (e0 - eps_i).abs() > tol => continue 'split,
                _ => {}
            }
            if eps_i <= tol || eps_i >= 1.0 - tol {
                continue 'split;
            }
            let Ok(sg) = DensityOperator::new(ComplexMatrix::from_dmatrix(upper / C64::new(eps_i, 0.0))) else {
                continue 'split;
            };
            let Ok(tu) = DensityOperator::new(ComplexMatrix::from_dmatrix(lower / C64::new(1.0 - eps_i, 0.0))) else {
                continue 'split;
            };
            sigma.push(sg);
            tau.push(tu);
        }
        let candidate = BlockDiagonalEnsemble::new(eps?, e.probs().clone(), sigma, tau).ok()?;
        if candidate.tau_deviation() <= tol {
            return Some(candidate);
        }
    }
    None
}

/// d equiprobable states, each uniform on all but one basis vector, with
/// distinct missing vectors.
fn is_photographic_negative(e: &Ensemble, tol: f64) -> bool {
    let d = e.dim();
    if d < 3 || e.len() != d {
        return false;
    }
    if e.probs().as_slice().iter().any(|p| (p - 1.0 / d as f64).abs() > tol) {
        return false;
    }
    let w = 1.0 / (d as f64 - 1.0);
    let mut seen = vec![false; d];
    for s in e.states() {
        if !s.matrix().is_diagonal(tol) {
            return false;
        }
        let diag = s.matrix().diagonal_real();
        let zeros: Vec<usize> = (0..d).filter(|&j| diag[j].abs() <= tol).collect();
        if zeros.len() != 1 || seen[zeros[0]] {
            return false;
        }
        seen[zeros[0]] = true;
        if (0..d).any(|j| j != zeros[0] && (diag[j] - w).abs() > tol) {
            return false;
        }
    }
    true
}

/// Bounds plus every scheme rate whose structure the ensemble matches.
pub fn rate_report(e: &Ensemble, options: RateOptions) -> Result<RateReport> {
    let tol = options.shape_tol;
    let mut entries = vec![
        RateEntry::new(
            "S_rho_bar",
            upper_bound_rate(e),
            RateKind::UpperBound,
            "Schumacher coding of the average state (blind)",
        ),
        RateEntry::new(
            "H_p",
            shannon_entropy(e.probs()),
            RateKind::UpperBound,
            "coding the signal labels (visible)",
        ),
    ];
    if e.len() == 1 {
        entries.push(RateEntry::new(
            "single_state",
            0.0,
            RateKind::SchemeRate,
            "only one possible signal; nothing needs to be sent",
        ));
    } else if orthogonal_supports(e, tol) {
        entries.push(RateEntry::new(
            "orthogonal_measurement",
            shannon_entropy(e.probs()),
            RateKind::SchemeRate,
            "orthogonally supported signals identified by measurement",
        ));
    }
    if let Some(src) = coin_source_of(e) {
        entries.push(RateEntry::new("Xi", xi_rate(&src), RateKind::SchemeRate, "three-message classical protocol"));
        if let Some(eps) = src.flip_parameter() {
            entries.push(RateEntry::new(
                "Upsilon",
                purification_rate(eps)?,
                RateKind::SchemeRate,
                "visible coding of canonical purifications",
            ));
        }
    }
    if let Some(block) = recognise_block_diagonal(e, tol) {
        if let Ok(r) = block_diagonal_rate(&block) {
            entries.push(RateEntry::new(
                "block_diagonal",
                r.scheme_rate,
                RateKind::SchemeRate,
                "subspace measurement; shared block rebuilt by the receiver",
            ));
        }
    }
    if is_photographic_negative(e, tol) {
        let rep = photographic_negative_report(e.dim())?;
        entries.push(RateEntry::new(
            "photographic_negative",
            rep.q,
            RateKind::SchemeRate,
            "visible coding of canonical purifications in the symmetric subspace",
        ));
    }
    entries.push(RateEntry::new("chi", lower_bound_rate(e), RateKind::LowerBound, "Holevo lower bound"));
    let descriptor = format!("{} states of dimension {}", e.len(), e.dim());
    RateReport::new(descriptor, entries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::entropy_bits;
    use crate::purify::photographic_negative_ensemble;
    use crate::random::{random_density, random_ensemble, random_probs, rng};

    fn diag(v: &[f64]) -> DensityOperator {
        DensityOperator::from_diagonal(v).unwrap()
    }

    #[test]
    fn maximally_mixed_single_signal() {
        let e = Ensemble::single(DensityOperator::maximally_mixed(2));
        assert!((upper_bound_rate(&e) - 1.0).abs() < 1e-15);
        assert!(lower_bound_rate(&e).abs() < 1e-15);
        let rep = rate_report(&e, RateOptions::default()).unwrap();
        assert_eq!(rep.get("single_state"), Some(0.0));
        assert_eq!(rep.qmin_bracket(), Some((0.0, 1.0)));
    }

    #[test]
    fn pure_single_state() {
        let e = Ensemble::single(diag(&[1.0, 0.0]));
        assert!(upper_bound_rate(&e).abs() < 1e-15);
    }

    #[test]
    fn photographic_negative_bounds() {
        for d in 3..7 {
            let e = photographic_negative_ensemble(d).unwrap();
            assert!((upper_bound_rate(&e) - (d as f64).log2()).abs() < 1e-12);
            assert!((lower_bound_rate(&e) + (1.0 - 1.0 / d as f64).log2()).abs() < 1e-12);
            let rep = rate_report(&e, RateOptions::default()).unwrap();
            assert!(rep.get("photographic_negative").is_some());
        }
    }

    #[test]
    fn orthogonal_report() {
        let e = Ensemble::from_pairs(vec![
            (0.3, diag(&[0.5, 0.5, 0.0])),
            (0.7, diag(&[0.0, 0.0, 1.0])),
        ])
        .unwrap();
        let rep = rate_report(&e, RateOptions::default()).unwrap();
        let h = entropy_bits(&[0.3, 0.7]);
        assert!((rep.get("chi").unwrap() - h).abs() < 1e-12);
        assert!((rep.get("S_rho_bar").unwrap() - (h + 0.3)).abs() < 1e-12);
        assert!((rep.get("orthogonal_measurement").unwrap() - h).abs() < 1e-12);
    }

    #[test]
    fn flip_pair_report() {
        let src = CoinSource::symmetric_flip(0.25).unwrap();
        let rep = rate_report(&src.as_ensemble().unwrap(), RateOptions::default()).unwrap();
        assert!((rep.get("S_rho_bar").unwrap() - 1.0).abs() < 1e-12);
        assert!((rep.get("H_p").unwrap() - 1.0).abs() < 1e-12);
        assert!((rep.get("Xi").unwrap() - 1.5).abs() < 1e-12);
        assert!((rep.get("Upsilon").unwrap() - purification_rate(0.25).unwrap()).abs() < 1e-12);
        assert!((rep.get("chi").unwrap() - (1.0 - binary_entropy(0.25))).abs() < 1e-12);
    }

    #[test]
    fn block_diagonal_examples() {
        let sigma = vec![diag(&[1.0, 0.0]), diag(&[0.0, 1.0])];
        let tau = vec![DensityOperator::maximally_mixed(2); 2];
        let e = BlockDiagonalEnsemble::new(0.5, ProbVector::uniform(2).unwrap(), sigma.clone(), tau.clone()).unwrap();
        let r = block_diagonal_rate(&e).unwrap();
        assert!((r.s_rho_bar - 2.0).abs() < 1e-12);
        assert!((r.scheme_rate - 1.5).abs() < 1e-12);
        assert!((r.saving - 0.5).abs() < 1e-12);

        let full = BlockDiagonalEnsemble::new(1.0, ProbVector::uniform(2).unwrap(), sigma.clone(), tau).unwrap();
        let r = block_diagonal_rate(&full).unwrap();
        assert!((r.scheme_rate - 1.0).abs() < 1e-12);
        assert!(r.saving.abs() < 1e-15);

        let bad_tau = vec![diag(&[1.0, 0.0]), diag(&[0.0, 1.0])];
        let e = BlockDiagonalEnsemble::new(0.5, ProbVector::uniform(2).unwrap(), sigma, bad_tau).unwrap();
        assert!(matches!(block_diagonal_rate(&e), Err(Error::TauMismatch { .. })));
    }

    #[test]
    fn entropy_split_on_random_blocks() {
        let mut r = rng(61);
        for _ in 0..20 {
            let n = 3;
            let sigma = (0..n).map(|_| random_density(&mut r, 3, 2)).collect();
            let tau = (0..n).map(|_| random_density(&mut r, 2, 2)).collect();
            let eps = random_probs(&mut r, 2)[0];
            let e = BlockDiagonalEnsemble::new(eps, ProbVector::new(random_probs(&mut r, n)).unwrap(), sigma, tau).unwrap();
            assert!(e.entropy_split().residual(eps).abs() < 1e-8);
        }
    }

    #[test]
    fn block_structure_is_recognised() {
        let mut r = rng(67);
        let tau = random_density(&mut r, 2, 2);
        let sigma: Vec<_> = (0..2).map(|_| random_density(&mut r, 2, 2)).collect();
        let b = BlockDiagonalEnsemble::new(0.4, ProbVector::uniform(2).unwrap(), sigma, vec![tau.clone(), tau]).unwrap();
        let rep = rate_report(&b.to_ensemble(), RateOptions::default()).unwrap();
        let expected = block_diagonal_rate(&b).unwrap().scheme_rate;
        assert!((rep.get("block_diagonal").unwrap() - expected).abs() < 1e-10);
    }

    #[test]
    fn reports_on_random_ensembles_are_ordered() {
        let mut r = rng(71);
        for _ in 0..30 {
            let e = random_ensemble(&mut r, 3, 3);
            let rep = rate_report(&e, RateOptions::default()).unwrap();
            let chi = rep.get("chi").unwrap();
            assert!(rep
                .of_kind(RateKind::SchemeRate)
                .chain(rep.of_kind(RateKind::UpperBound))
                .all(|x| x.rate >= chi - 1e-8));
        }
    }

    #[test]
    fn report_rejects_inverted_bounds() {
        let entries = vec![
            RateEntry::new("u", 0.2, RateKind::UpperBound, ""),
            RateEntry::new("l", 0.5, RateKind::LowerBound, ""),
        ];
        assert!(matches!(RateReport::new("x".into(), entries), Err(Error::InvariantViolation(_))));
    }
}

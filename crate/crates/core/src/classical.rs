//! Classical compression of probability distributions.
//!
//! Distributions are column vectors and channels are column-stochastic
//! matrices. The two-coin source and the three-message protocol below show a
//! classical scheme that can beat both the S(ρ̄) and H(p) rates.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::measures::{binary_entropy, entropy_bits, holevo, Ensemble, ProbVector};
use crate::purify::purification_rate;
use crate::qmat::DensityOperator;
use crate::random::stream_rng;
use crate::rates::{RateEntry, RateKind, RateReport};
use rand::Rng;

const STOCHASTIC_TOL: f64 = 1e-10;
/// Tolerance used to recognise the symmetric flip-coin family.
const FAMILY_TOL: f64 = 1e-12;
/// Positions simulated per independent random stream.
const SIM_BLOCK: usize = 4096;

/// Nonnegative matrix whose columns sum to one.
#[derive(Clone, Debug, PartialEq)]
pub struct StochasticMatrix {
    rows: Vec<Vec<f64>>,
}

impl StochasticMatrix {
    /// Builds from row vectors; every column must sum to one.
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let Some(first) = rows.first() else {
            return Err(Error::NotStochastic("matrix has no rows".into()));
        };
        let cols = first.len();
        if cols == 0 || rows.iter().any(|r| r.len() != cols) {
            return Err(Error::NotStochastic("rows must be nonempty and of equal length".into()));
        }
        if let Some(bad) = rows.iter().flatten().find(|x| !x.is_finite() || **x < 0.0) {
            return Err(Error::NotStochastic(format!("entries must be nonnegative, found {bad}")));
        }
        for j in 0..cols {
            let sum: f64 = rows.iter().map(|r| r[j]).sum();
            if (sum - 1.0).abs() > STOCHASTIC_TOL {
                return Err(Error::NotStochastic(format!("column {j} sums to {sum}, expected 1")));
            }
        }
        Ok(Self { rows })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            rows: (0..n)
                .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
                .collect(),
        }
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.rows[0].len()
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }
}

/// p_out = A p_in.
pub fn apply_channel(a: &StochasticMatrix, p: &ProbVector) -> Result<ProbVector> {
    if a.n_cols() != p.len() {
        return Err(Error::DimensionMismatch(format!(
            "channel with {} inputs applied to a distribution of length {}",
            a.n_cols(),
            p.len()
        )));
    }
    let mut out: Vec<f64> = a
        .rows
        .iter()
        .map(|row| row.iter().zip(p.as_slice()).map(|(x, y)| x * y).sum())
        .collect();
    let total: f64 = out.iter().sum();
    for x in out.iter_mut() {
        *x /= total;
    }
    ProbVector::new(out)
}

/// Two biased coins chosen with priors `p1`, `p2`; coin i shows heads with
/// probability `alpha_i`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CoinSource {
    pub p1: f64,
    pub p2: f64,
    pub alpha1: f64,
    pub alpha2: f64,
}

impl CoinSource {
    pub fn new(p1: f64, alpha1: f64, alpha2: f64) -> Result<Self> {
        Self::with_priors(p1, 1.0 - p1, alpha1, alpha2)
    }

    pub fn with_priors(p1: f64, p2: f64, alpha1: f64, alpha2: f64) -> Result<Self> {
        for (name, v) in [("p1", p1), ("p2", p2), ("alpha1", alpha1), ("alpha2", alpha2)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Domain(format!("{name} must lie in [0, 1], got {v}")));
            }
        }
        if (p1 + p2 - 1.0).abs() > STOCHASTIC_TOL {
            return Err(Error::InvalidProbabilities(format!("p1 + p2 must equal 1, got {}", p1 + p2)));
        }
        Ok(Self { p1, p2, alpha1, alpha2 })
    }

    /// The flip-coin pair diag(ε, 1−ε), diag(1−ε, ε) with equal priors.
    pub fn symmetric_flip(epsilon: f64) -> Result<Self> {
        Self::new(0.5, epsilon, 1.0 - epsilon)
    }

    /// Relabels the coins so that alpha2 >= alpha1; the flag records a swap.
    pub fn oriented(&self) -> (Self, bool) {
        if self.alpha2 >= self.alpha1 {
            (*self, false)
        } else {
            (
                Self {
                    p1: self.p2,
                    p2: self.p1,
                    alpha1: self.alpha2,
                    alpha2: self.alpha1,
                },
                true,
            )
        }
    }

    /// ᾱ = p₁α₁ + p₂α₂.
    pub fn mean_heads(&self) -> f64 {
        self.p1 * self.alpha1 + self.p2 * self.alpha2
    }

    /// The coins as commuting qubit states diag(α, 1−α).
    pub fn as_ensemble(&self) -> Result<Ensemble> {
        Ensemble::new(
            ProbVector::new(vec![self.p1, self.p2])?,
            vec![
                DensityOperator::from_diagonal(&[self.alpha1, 1.0 - self.alpha1])?,
                DensityOperator::from_diagonal(&[self.alpha2, 1.0 - self.alpha2])?,
            ],
        )
    }

    /// ε when the source is the symmetric flip pair with ε ≤ 1/2.
    pub fn flip_parameter(&self) -> Option<f64> {
        let (o, _) = self.oriented();
        let symmetric = (o.p1 - 0.5).abs() <= FAMILY_TOL && (o.alpha1 + o.alpha2 - 1.0).abs() <= FAMILY_TOL;
        symmetric.then_some(o.alpha1)
    }
}

/// Law of Alice's message together with whether the coins were relabeled.
#[derive(Clone, Debug, PartialEq)]
pub struct MessageDistribution {
    /// Probabilities of M0, M1, M2.
    pub probs: ProbVector,
    pub relabeled: bool,
}

/// (1 − α₂ + α₁, p₁(α₂ − α₁), p₂(α₂ − α₁)) after orienting α₂ ≥ α₁.
pub fn message_distribution(src: &CoinSource) -> MessageDistribution {
    let (o, relabeled) = src.oriented();
    let gap = o.alpha2 - o.alpha1;
    let m0 = 1.0 - gap;
    let probs = vec![m0, o.p1 * gap, o.p2 * gap];
    MessageDistribution {
        probs: ProbVector::new(probs).expect("message law sums to one by construction"),
        relabeled,
    }
}

/// Rate of the three-message protocol, H(message law), in bits per toss.
pub fn xi_rate(src: &CoinSource) -> f64 {
    entropy_bits(message_distribution(src).probs.as_slice())
}

/// Probability that Bob answers H on receiving M0.
pub fn bob_m0_heads_prob(src: &CoinSource) -> Result<f64> {
    let (o, _) = src.oriented();
    let m0 = 1.0 - o.alpha2 + o.alpha1;
    if m0 <= 0.0 {
        return Err(Error::DegenerateProtocol);
    }
    Ok(o.alpha1 / m0)
}

/// Closed-form P(Bob outputs H | coin i) for both coins, in the caller's
/// labelling: the M0 branch plus the coin-specific branch.
pub fn output_law(src: &CoinSource) -> [f64; 2] {
    let (o, relabeled) = src.oriented();
    let m0 = 1.0 - o.alpha2 + o.alpha1;
    let gap = o.alpha2 - o.alpha1;
    let m0_branch = match bob_m0_heads_prob(src) {
        Ok(h) => m0 * h,
        Err(_) => 0.0,
    };
    // M1 answers T, M2 answers H
    let law = [m0_branch + gap * 0.0, m0_branch + gap * 1.0];
    if relabeled {
        [law[1], law[0]]
    } else {
        law
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Coin {
    C1,
    C2,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Message {
    M0,
    M1,
    M2,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Toss {
    H,
    T,
}

/// Record of one protocol run. Coins use the caller's labels; messages use
/// the oriented protocol's labels (see `relabeled`).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProtocolTrace {
    pub seed: u64,
    pub relabeled: bool,
    pub coins: Vec<Coin>,
    pub messages: Vec<Message>,
    pub outputs: Vec<Toss>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProtocolSummary {
    pub seed: u64,
    pub n: usize,
    pub relabeled: bool,
    pub coin_counts: [usize; 2],
    pub heads_counts: [usize; 2],
    pub message_counts: [usize; 3],
    pub empirical_heads: [f64; 2],
    pub expected_heads: [f64; 2],
    /// Binomial standard error √(α(1−α)/nᵢ) of each empirical frequency.
    pub std_errors: [f64; 2],
}

impl ProtocolTrace {
    pub fn len(&self) -> usize {
        self.coins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coins.is_empty()
    }

    pub fn summary(&self, src: &CoinSource) -> ProtocolSummary {
        let mut coin_counts = [0usize; 2];
        let mut heads_counts = [0usize; 2];
        let mut message_counts = [0usize; 3];
        for ((c, m), t) in self.coins.iter().zip(&self.messages).zip(&self.outputs) {
            let i = match c {
                Coin::C1 => 0,
                Coin::C2 => 1,
            };
            coin_counts[i] += 1;
            if *t == Toss::H {
                heads_counts[i] += 1;
            }
            message_counts[*m as usize] += 1;
        }
        let expected = [src.alpha1, src.alpha2];
        let mut empirical = [f64::NAN; 2];
        let mut se = [f64::NAN; 2];
        for i in 0..2 {
            if coin_counts[i] > 0 {
                let n = coin_counts[i] as f64;
                empirical[i] = heads_counts[i] as f64 / n;
                se[i] = (expected[i] * (1.0 - expected[i]) / n).sqrt();
            }
        }
        ProtocolSummary {
            seed: self.seed,
            n: self.len(),
            relabeled: self.relabeled,
            coin_counts,
            heads_counts,
            message_counts,
            empirical_heads: empirical,
            expected_heads: expected,
            std_errors: se,
        }
    }
}

/// Runs the three-message protocol for `n_tosses` positions.
///
/// Positions are split into fixed blocks, each driven by its own stream of
/// a counter-based generator, so the trace depends only on `seed`.
pub fn simulate(src: &CoinSource, n_tosses: usize, seed: u64) -> Result<ProtocolTrace> {
    if n_tosses == 0 {
        return Err(Error::Domain("n_tosses must be at least 1".into()));
    }
    let (o, relabeled) = src.oriented();
    let m0 = 1.0 - o.alpha2 + o.alpha1;
    // unused when M0 is unreachable
    let heads_on_m0 = bob_m0_heads_prob(src).unwrap_or(0.0);
    let p_first = src.p1;
    let n_blocks = n_tosses.div_ceil(SIM_BLOCK);
    let blocks: Vec<Vec<(Coin, Message, Toss)>> = (0..n_blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = stream_rng(seed, b as u64);
            let len = SIM_BLOCK.min(n_tosses - b * SIM_BLOCK);
            (0..len)
                .map(|_| {
                    let coin = if rng.random::<f64>() < p_first { Coin::C1 } else { Coin::C2 };
                    let oriented_first = (coin == Coin::C1) != relabeled;
                    let msg = if rng.random::<f64>() < m0 {
                        Message::M0
                    } else if oriented_first {
                        Message::M1
                    } else {
                        Message::M2
                    };
                    let toss = match msg {
                        Message::M0 => {
                            if rng.random::<f64>() < heads_on_m0 {
                                Toss::H
                            } else {
                                Toss::T
                            }
                        }
                        Message::M1 => Toss::T,
                        Message::M2 => Toss::H,
                    };
                    (coin, msg, toss)
                })
                .collect()
        })
        .collect();
    let mut trace = ProtocolTrace {
        seed,
        relabeled,
        coins: Vec::with_capacity(n_tosses),
        messages: Vec::with_capacity(n_tosses),
        outputs: Vec::with_capacity(n_tosses),
    };
    for (c, m, t) in blocks.into_iter().flatten() {
        trace.coins.push(c);
        trace.messages.push(m);
        trace.outputs.push(t);
    }
    Ok(trace)
}

/// H(ᾱ, 1−ᾱ) − p₁H(α₁) − p₂H(α₂), the conjectured optimal rate.
pub fn conjectured_rate(src: &CoinSource) -> f64 {
    binary_entropy(src.mean_heads()) - src.p1 * binary_entropy(src.alpha1) - src.p2 * binary_entropy(src.alpha2)
}

/// One row of the rate comparison table.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub s_rho_bar: f64,
    pub h_p: f64,
    pub xi: f64,
    pub upsilon: Option<f64>,
    pub chi: f64,
    pub conjectured_mi: f64,
}

pub fn comparison_row(src: &CoinSource) -> Result<ComparisonRow> {
    let ensemble = src.as_ensemble()?;
    Ok(ComparisonRow {
        s_rho_bar: binary_entropy(src.mean_heads()),
        h_p: entropy_bits(&[src.p1, src.p2]),
        xi: xi_rate(src),
        upsilon: src.flip_parameter().map(purification_rate).transpose()?,
        chi: holevo(&ensemble),
        conjectured_mi: conjectured_rate(src),
    })
}

/// All rates and bounds known for a two-coin source.
pub fn classical_rate_comparison(src: &CoinSource) -> Result<RateReport> {
    let row = comparison_row(src)?;
    let (_, relabeled) = src.oriented();
    let mut entries = vec![
        RateEntry::new("S_rho_bar", row.s_rho_bar, RateKind::UpperBound, "blind Schumacher coding of the average coin"),
        RateEntry::new("H_p", row.h_p, RateKind::UpperBound, "visible coding of the coin names"),
        RateEntry::new("Xi", row.xi, RateKind::SchemeRate, "three-message classical protocol"),
    ];
    if let Some(u) = row.upsilon {
        entries.push(RateEntry::new(
            "Upsilon",
            u,
            RateKind::SchemeRate,
            "visible coding of canonical purifications",
        ));
    }
    entries.push(RateEntry::new(
        "conjectured_MI",
        row.conjectured_mi,
        RateKind::Conjecture,
        "conjectured optimal rate (mutual information), unproven",
    ));
    entries.push(RateEntry::new("chi", row.chi, RateKind::LowerBound, "Holevo lower bound"));
    let descriptor = format!(
        "coin source p1={} p2={} alpha1={} alpha2={}{}",
        src.p1,
        src.p2,
        src.alpha1,
        src.alpha2,
        if relabeled { " (coins relabeled so alpha2 >= alpha1)" } else { "" }
    );
    RateReport::new(descriptor, entries)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_channel() {
        let p = ProbVector::new(vec![0.2, 0.3, 0.5]).unwrap();
        assert_eq!(apply_channel(&StochasticMatrix::identity(3), &p).unwrap(), p);
    }

    #[test]
    fn point_mass_channel() {
        let a = StochasticMatrix::new(vec![vec![1.0, 1.0, 1.0], vec![0.0, 0.0, 0.0]]).unwrap();
        let p = ProbVector::new(vec![0.2, 0.3, 0.5]).unwrap();
        assert_eq!(apply_channel(&a, &p).unwrap().as_slice(), &[1.0, 0.0]);
    }

    #[test]
    fn channel_validation() {
        assert!(StochasticMatrix::new(vec![vec![0.5, 1.0], vec![0.4, 0.0]]).is_err());
        assert!(StochasticMatrix::new(vec![vec![1.5, 1.0], vec![-0.5, 0.0]]).is_err());
        let a = StochasticMatrix::identity(2);
        let p = ProbVector::new(vec![0.2, 0.3, 0.5]).unwrap();
        assert!(matches!(apply_channel(&a, &p), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn message_law_examples() {
        let same = CoinSource::new(0.5, 0.3, 0.3).unwrap();
        assert_eq!(message_distribution(&same).probs.as_slice(), &[1.0, 0.0, 0.0]);
        assert_eq!(xi_rate(&same), 0.0);
        let src = CoinSource::new(0.5, 0.25, 0.75).unwrap();
        let law = message_distribution(&src);
        assert_eq!(law.probs.as_slice(), &[0.5, 0.25, 0.25]);
        assert!((xi_rate(&src) - 1.5).abs() < 1e-15);
        let near = CoinSource::new(0.5, 0.25, 0.2501).unwrap();
        assert!(xi_rate(&near) < 0.01);
    }

    #[test]
    fn relabeling_when_alpha_decreases() {
        let src = CoinSource::new(0.3, 0.75, 0.25).unwrap();
        let law = message_distribution(&src);
        assert!(law.relabeled);
        assert!((law.probs.as_slice()[0] - 0.5).abs() < 1e-15);
        assert!((law.probs.as_slice()[1] - 0.7 * 0.5).abs() < 1e-15);
        let [h1, h2] = output_law(&src);
        assert!((h1 - 0.75).abs() < 1e-12 && (h2 - 0.25).abs() < 1e-12);
    }

    #[test]
    fn flip_family_rate() {
        for k in 0..=10 {
            let e = k as f64 * 0.05;
            let src = CoinSource::symmetric_flip(e).unwrap();
            let expected = entropy_bits(&[2.0 * e, 0.5 - e, 0.5 - e]);
            assert!((xi_rate(&src) - expected).abs() < 1e-12);
            let alt = binary_entropy(2.0 * e) + 1.0 - 2.0 * e;
            assert!((xi_rate(&src) - alt).abs() < 1e-12);
        }
    }

    #[test]
    fn output_law_is_exact() {
        for &(a1, a2) in &[(0.25, 0.75), (0.0, 0.5), (0.1, 0.1), (0.9, 0.2), (1.0, 1.0)] {
            let src = CoinSource::new(0.4, a1, a2).unwrap();
            let [h1, h2] = output_law(&src);
            assert!((h1 - a1).abs() <= 1e-12 && (h2 - a2).abs() <= 1e-12);
        }
    }

    #[test]
    fn degenerate_protocol() {
        let src = CoinSource::new(0.5, 0.0, 1.0).unwrap();
        assert_eq!(bob_m0_heads_prob(&src), Err(Error::DegenerateProtocol));
        assert_eq!(output_law(&src), [0.0, 1.0]);
        let trace = simulate(&src, 1000, 3).unwrap();
        assert!(trace.messages.iter().all(|m| *m != Message::M0));
        for (c, t) in trace.coins.iter().zip(&trace.outputs) {
            assert_eq!(*t, if *c == Coin::C1 { Toss::T } else { Toss::H });
        }
    }

    #[test]
    fn all_heads_coins() {
        let src = CoinSource::new(0.5, 1.0, 1.0).unwrap();
        let trace = simulate(&src, 500, 0).unwrap();
        assert!(trace.outputs.iter().all(|t| *t == Toss::H));
    }

    #[test]
    fn simulation_is_reproducible() {
        let src = CoinSource::new(0.5, 0.25, 0.75).unwrap();
        let a = simulate(&src, 10_000, 42).unwrap();
        let b = simulate(&src, 10_000, 42).unwrap();
        assert_eq!(a, b);
        let c = simulate(&src, 10_000, 43).unwrap();
        assert_ne!(a.outputs, c.outputs);
        assert!(simulate(&src, 0, 1).is_err());
    }

    #[test]
    fn comparison_report_contents() {
        let src = CoinSource::new(0.5, 0.25, 0.2501).unwrap();
        let rep = classical_rate_comparison(&src).unwrap();
        assert!((rep.get("H_p").unwrap() - 1.0).abs() < 1e-15);
        assert!((rep.get("S_rho_bar").unwrap() - binary_entropy(0.25005)).abs() < 1e-12);
        assert!(rep.get("Xi").unwrap() < 0.01);
        assert!(rep.get("Upsilon").is_none());
        let chi = rep.get("chi").unwrap();
        assert!((chi - rep.get("conjectured_MI").unwrap()).abs() < 1e-10);
    }

    #[test]
    fn identical_coins_report() {
        let src = CoinSource::new(0.3, 0.6, 0.6).unwrap();
        let rep = classical_rate_comparison(&src).unwrap();
        assert_eq!(rep.get("Xi").unwrap(), 0.0);
        assert!(rep.get("chi").unwrap().abs() < 1e-12);
        assert!(rep.entries.iter().all(|e| e.rate >= 0.0));
    }

    #[test]
    fn flip_family_dominance() {
        for k in 0..=50 {
            let e = k as f64 * 0.01;
            let row = comparison_row(&CoinSource::symmetric_flip(e).unwrap()).unwrap();
            let u = row.upsilon.unwrap();
            assert!(row.xi - u >= -1e-9);
            if k > 0 && k < 50 {
                assert!(row.xi > u);
            }
        }
    }
}

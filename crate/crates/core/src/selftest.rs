//! Compact invariant suites run by `mixcomp selftest`.

use serde::Serialize;

use crate::blocksim::{channel_dim, fidelity_subspace_upper_bound, project_and_patch, tensor_power_top_sum, TypicalSubspace};
use crate::classical::{output_law, xi_rate, CoinSource};
use crate::measures::{
    fidelity, measured_classical_fidelity, sqrt_fidelity, vn_entropy, Ensemble, Povm, ProbVector,
};
use crate::purify::{photographic_negative_report, purification_rate};
use crate::qmat::DensityOperator;
use crate::random::{
    random_density, random_ensemble, random_povm, random_probs, random_subspace, random_supported_density,
    random_unitary, rng, rotated_diagonal, SimRng,
};
use crate::rates::{rate_report, RateKind, RateOptions};
use rand::Rng;

const TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteResult {
    pub name: &'static str,
    pub passed: usize,
    pub failed: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SelftestReport {
    pub seed: u64,
    pub suites: Vec<SuiteResult>,
    pub passed: usize,
    pub failed: usize,
}

impl SelftestReport {
    pub fn ok(&self) -> bool {
        self.failed == 0
    }
}

fn any_density(r: &mut SimRng, d: usize) -> DensityOperator {
    let rank = r.random_range(1..=d);
    random_density(r, d, rank)
}

type Suite = fn(&mut SimRng, usize) -> Vec<bool>;

fn flip_pair_fidelity(_: &mut SimRng, _: usize) -> Vec<bool> {
    (0..=10)
        .map(|k| {
            let e = k as f64 * 0.05;
            let a = DensityOperator::from_diagonal(&[e, 1.0 - e]).unwrap();
            let b = DensityOperator::from_diagonal(&[1.0 - e, e]).unwrap();
            fidelity(&a, &b).is_ok_and(|f| (f - 4.0 * e * (1.0 - e)).abs() <= 1e-10)
        })
        .collect()
}

fn fidelity_symmetry(r: &mut SimRng, cases: usize) -> Vec<bool> {
    (0..cases)
        .map(|_| {
            let d = r.random_range(1..=4);
            let a = any_density(r, d);
            let b = any_density(r, d);
            let (fab, fba, faa) = (fidelity(&a, &b).unwrap(), fidelity(&b, &a).unwrap(), fidelity(&a, &a).unwrap());
            (fab - fba).abs() <= TOL && (0.0..=1.0).contains(&fab) && (faa - 1.0).abs() <= TOL
        })
        .collect()
}

fn entropy_range(r: &mut SimRng, cases: usize) -> Vec<bool> {
    (0..cases)
        .map(|_| {
            let d = r.random_range(1..=6);
            let s = vn_entropy(&any_density(r, d));
            s >= 0.0 && s <= (d as f64).log2() + TOL
        })
        .collect()
}

fn bound_ordering(r: &mut SimRng, cases: usize) -> Vec<bool> {
    (0..cases)
        .map(|_| {
            let d = r.random_range(1..=6);
            let n = r.random_range(1..=5);
            let e = random_ensemble(r, d, n);
            let Ok(rep) = rate_report(&e, RateOptions::default()) else {
                return false;
            };
            let chi = rep.get("chi").unwrap();
            let s = rep.get("S_rho_bar").unwrap();
            chi >= 0.0
                && chi <= s + TOL
                && s <= (d as f64).log2() + TOL
                && rep.of_kind(RateKind::SchemeRate).all(|x| x.rate >= chi - TOL)
        })
        .collect()
}

fn subspace_ceiling(r: &mut SimRng, cases: usize) -> Vec<bool> {
    (0..cases)
        .map(|_| {
            let d = r.random_range(2..=8);
            let k = r.random_range(1..=d);
            let rho = any_density(r, d);
            let v = random_subspace(r, d, k);
            let other = random_supported_density(r, &v);
            fidelity(&rho, &other).unwrap() <= fidelity_subspace_upper_bound(&rho, k).unwrap() + TOL
        })
        .collect()
}

fn patch_fidelity(r: &mut SimRng, cases: usize) -> Vec<bool> {
    (0..cases)
        .map(|_| {
            let d = r.random_range(2..=8);
            let k = r.random_range(1..=d);
            let rho = any_density(r, d);
            let v = random_subspace(r, d, k);
            let t = TypicalSubspace::spanned_by(v, &rho).unwrap();
            let out = project_and_patch(&rho, &t).unwrap();
            fidelity(&rho, &out).unwrap() >= (1.0 - t.eta()).powi(2) - TOL
        })
        .collect()
}

fn double_concavity(r: &mut SimRng, cases: usize) -> Vec<bool> {
    let mut out = Vec::new();
    for _ in 0..cases {
        let d = r.random_range(1..=4);
        let [r1, r2, s1, s2] = std::array::from_fn(|_| any_density(r, d));
        let g1 = sqrt_fidelity(&r1, &s1).unwrap();
        let g2 = sqrt_fidelity(&r2, &s2).unwrap();
        for k in 1..=9 {
            let l = k as f64 / 10.0;
            let w = [l, 1.0 - l];
            let rho = DensityOperator::mix(&w, &[&r1, &r2]).unwrap();
            let sigma = DensityOperator::mix(&w, &[&s1, &s2]).unwrap();
            out.push(sqrt_fidelity(&rho, &sigma).unwrap() >= l * g1 + (1.0 - l) * g2 - TOL);
        }
    }
    out
}

fn measurement_bound(r: &mut SimRng, cases: usize) -> Vec<bool> {
    let mut out = Vec::new();
    for _ in 0..cases {
        let a = random_density(r, 2, 2);
        let b = any_density(r, 2);
        let outcomes = r.random_range(1..=4);
        let povm = random_povm(r, 2, outcomes);
        out.push(measured_classical_fidelity(&a, &b, &povm).unwrap() >= fidelity(&a, &b).unwrap() - TOL);
        let u = random_unitary(r, 2);
        let pa = random_probs(r, 2);
        let pb = random_probs(r, 2);
        let (ca, cb) = (rotated_diagonal(&pa, &u), rotated_diagonal(&pb, &u));
        let basis = Povm::from_basis(&u).unwrap();
        out.push((measured_classical_fidelity(&ca, &cb, &basis).unwrap() - fidelity(&ca, &cb).unwrap()).abs() <= TOL);
    }
    out
}

fn protocol_law(r: &mut SimRng, cases: usize) -> Vec<bool> {
    (0..cases)
        .map(|_| {
            let src = CoinSource::new(r.random(), r.random(), r.random()).unwrap();
            let [h1, h2] = output_law(&src);
            (h1 - src.alpha1).abs() <= 1e-12 && (h2 - src.alpha2).abs() <= 1e-12
        })
        .collect()
}

fn flip_family_dominance(_: &mut SimRng, _: usize) -> Vec<bool> {
    (0..=50)
        .map(|k| {
            let e = k as f64 / 100.0;
            let xi = xi_rate(&CoinSource::symmetric_flip(e).unwrap());
            let u = purification_rate(e).unwrap();
            xi - u >= -1e-9 && (!(k == 0 || k == 50) || (xi - u).abs() <= 1e-9)
        })
        .collect()
}

fn photographic_negative(_: &mut SimRng, _: usize) -> Vec<bool> {
    (3..=10)
        .map(|d| {
            photographic_negative_report(d).is_ok_and(|rep| {
                (rep.gap - 2.0 / d as f64 * (d as f64 - 1.0).log2()).abs() <= 1e-9
            })
        })
        .collect()
}

fn monotone_tail(r: &mut SimRng, cases: usize) -> Vec<bool> {
    let mut out = Vec::new();
    for _ in 0..cases {
        let d = r.random_range(2..=3);
        let spectrum = random_probs(r, d);
        let s = vn_entropy(&DensityOperator::from_diagonal(&spectrum).unwrap());
        if s <= 0.05 {
            continue;
        }
        let q = r.random_range(0.0..s - 0.05);
        for n in 1..=5 {
            let dim = |m: usize| d.pow(m as u32);
            let a = tensor_power_top_sum(&spectrum, n, channel_dim(q, n, dim(n)).unwrap() as f64);
            let b = tensor_power_top_sum(&spectrum, 2 * n, channel_dim(q, 2 * n, dim(2 * n)).unwrap() as f64);
            out.push(b <= a + 1e-9);
        }
    }
    out
}

fn pure_collapse(r: &mut SimRng, cases: usize) -> Vec<bool> {
    (0..cases)
        .map(|_| {
            let d = r.random_range(1..=5);
            let n = r.random_range(1..=4);
            let states = (0..n).map(|_| random_density(r, d, 1)).collect();
            let e = Ensemble::new(ProbVector::new(random_probs(r, n)).unwrap(), states).unwrap();
            let rep = rate_report(&e, RateOptions::default()).unwrap();
            (rep.get("chi").unwrap() - rep.get("S_rho_bar").unwrap()).abs() <= TOL
        })
        .collect()
}

/// Runs every suite with `cases` random instances each.
pub fn run(seed: u64, cases: usize) -> SelftestReport {
    let suites: [(&'static str, Suite); 13] = [
        ("flip_pair_fidelity", flip_pair_fidelity),
        ("fidelity_symmetry", fidelity_symmetry),
        ("entropy_range", entropy_range),
        ("bound_ordering", bound_ordering),
        ("pure_state_collapse", pure_collapse),
        ("subspace_fidelity_ceiling", subspace_ceiling),
        ("project_and_patch_fidelity", patch_fidelity),
        ("double_concavity", double_concavity),
        ("measurement_bound", measurement_bound),
        ("protocol_output_law", protocol_law),
        ("flip_family_dominance", flip_family_dominance),
        ("photographic_negative", photographic_negative),
        ("monotone_tail", monotone_tail),
    ];
    let results: Vec<SuiteResult> = suites
        .iter()
        .enumerate()
        .map(|(i, (name, suite))| {
            let mut r = rng(seed.wrapping_add(i as u64));
            let checks = suite(&mut r, cases);
            let passed = checks.iter().filter(|c| **c).count();
            SuiteResult {
                name,
                passed,
                failed: checks.len() - passed,
            }
        })
        .collect();
    SelftestReport {
        seed,
        passed: results.iter().map(|s| s.passed).sum(),
        failed: results.iter().map(|s| s.failed).sum(),
        suites: results,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn selftest_passes() {
        let rep = run(0, 20);
        assert!(rep.ok(), "{rep:?}");
        assert_eq!(rep.suites.len(), 13);
    }
}

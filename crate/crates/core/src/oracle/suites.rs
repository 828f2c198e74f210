use nalgebra::DMatrix;
use rand::Rng as _;

use super::dense::{sqrt_psd, symmetrize};
use super::ensembles::{random_graph_ensemble, random_psd, random_spd, random_unshifted, random_wide, with_spectrum, RandomEnsemble};
use super::exact::{exact_beta_ag, exact_beta_energy, exact_truncated_chain, shift_for};
use super::lemmas::{check_loewner, check_monotone_ratio, check_neumann_tail, check_trace_inequality};
use crate::augmentation::WindowKind;
use crate::rng::{substream, Purpose, Rng};
use crate::Result;

/// Per-comparison tolerance for the monotone chains.
pub const CHAIN_TOL: f64 = 1e-10;

const CHAIN_ORDERS: usize = 8;

/// Result of running one randomized suite.
#[derive(Clone, Debug, PartialEq)]
pub struct SuiteResult {
    pub name: &'static str,
    pub instances: usize,
    pub passed: usize,
    /// Descriptions of the first few failures.
    pub failures: Vec<String>,
}

impl SuiteResult {
    fn new(name: &'static str) -> Self {
        Self { name, instances: 0, passed: 0, failures: Vec::new() }
    }

    fn record(&mut self, ok: bool, describe: impl FnOnce() -> String) {
        self.instances += 1;
        if ok {
            self.passed += 1;
        } else if self.failures.len() < 5 {
            self.failures.push(describe());
        }
    }

    pub fn all_passed(&self) -> bool {
        self.passed == self.instances
    }
}

/// Instance counts per suite.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SuiteSizes {
    pub chains: usize,
    pub lemmas: usize,
}

impl Default for SuiteSizes {
    fn default() -> Self {
        Self { chains: 60, lemmas: 200 }
    }
}

/// Checks `0 ≤ β₁ ≤ β₂ ≤ … ≤ β* ≤ 1` within [`CHAIN_TOL`].
pub fn chain_violation(chain: &[f64], optimal: f64) -> Option<String> {
    if chain[0] < -CHAIN_TOL {
        return Some(format!("first factor {} is negative", chain[0]));
    }
    for (i, w) in chain.windows(2).enumerate() {
        if w[1] < w[0] - CHAIN_TOL {
            return Some(format!("order {} factor {} exceeds order {} factor {}", i + 1, w[0], i + 2, w[1]));
        }
    }
    let last = chain[chain.len() - 1];
    if last > optimal + CHAIN_TOL {
        return Some(format!("truncated factor {last} exceeds optimal {optimal}"));
    }
    if optimal > 1.0 + CHAIN_TOL {
        return Some(format!("optimal factor {optimal} exceeds 1"));
    }
    None
}

fn soft_ensemble(i: usize, rng: &mut Rng) -> Result<RandomEnsemble> {
    let n = 2 + i % 5;
    if i.is_multiple_of(2) {
        random_unshifted(n, 1 + rng.random_range(0..3), rng)
    } else {
        random_graph_ensemble(n.min(4), rng)
    }
}

fn probe_correlation(n: usize, i: usize, rng: &mut Rng) -> DMatrix<f64> {
    if i.is_multiple_of(3) {
        DMatrix::identity(n, n)
    } else {
        random_spd(n, 10.0, rng)
    }
}

/// Exact soft-window factors are nondecreasing and bounded by the optimum.
pub fn soft_chain_suite(seed: u64, count: usize) -> Result<SuiteResult> {
    let mut out = SuiteResult::new("soft-window chain");
    for i in 0..count {
        let mut rng = substream(seed, i as u64, Purpose::Observation);
        let e = soft_ensemble(i, &mut rng)?;
        let l = probe_correlation(e.a.nrows(), i, &mut rng);
        let chain = exact_truncated_chain(&e.ensemble, &e.a, &l, CHAIN_ORDERS, WindowKind::Soft)?;
        let optimal = exact_beta_energy(&e.ensemble, &e.a, &l)?;
        let bad = chain_violation(&chain, optimal);
        out.record(bad.is_none(), || format!("instance {i}: {}", bad.unwrap_or_default()));
    }
    Ok(out)
}

/// Exact shifted-window factors at `α = max λ(A^{-1/2}ÂA^{-1/2})` are
/// nondecreasing and bounded by the optimum.
pub fn shifted_chain_suite(seed: u64, count: usize) -> Result<SuiteResult> {
    let mut out = SuiteResult::new("shifted-window chain");
    for i in 0..count {
        let mut rng = substream(seed, i as u64, Purpose::Bootstrap);
        let n = 2 + i % 5;
        let e = if i % 3 == 2 { random_unshifted(n, 2, &mut rng)? } else { random_wide(n, 1 + i % 3, &mut rng)? };
        let l = probe_correlation(n, i, &mut rng);
        let alpha = shift_for(&e.ensemble, &e.a)?;
        let chain = exact_truncated_chain(&e.ensemble, &e.a, &l, CHAIN_ORDERS, WindowKind::shifted(alpha)?)?;
        let optimal = exact_beta_energy(&e.ensemble, &e.a, &l)?;
        let bad = chain_violation(&chain, optimal);
        out.record(bad.is_none(), || format!("instance {i} (alpha {alpha}): {}", bad.unwrap_or_default()));
    }
    Ok(out)
}

/// `E[Â⁻¹] ⪰ A⁻¹` on random two-point graph ensembles with three unknowns.
pub fn loewner_suite(seed: u64, count: usize) -> Result<SuiteResult> {
    let mut out = SuiteResult::new("inverse Loewner order");
    for i in 0..count {
        let mut rng = substream(seed, i as u64, Purpose::Probe);
        let e = random_graph_ensemble(3, &mut rng)?;
        let r = check_loewner(&e.ensemble, &e.a)?;
        out.record(r.passed(), || format!("instance {i}: margin {}", r.margin));
    }
    Ok(out)
}

/// The covariance bound does not exceed the optimal AG factor.
pub fn ag_bound_suite(seed: u64, count: usize) -> Result<SuiteResult> {
    let mut out = SuiteResult::new("AG lower bound");
    for i in 0..count {
        let mut rng = substream(seed, i as u64, Purpose::SecondProbe);
        let e = soft_ensemble(i, &mut rng)?;
        let n = e.a.nrows();
        let r = if i.is_multiple_of(2) { DMatrix::identity(n, n) } else { random_spd(n, 10.0, &mut rng) };
        let f = exact_beta_ag(&e.ensemble, &e.a, &r, &DMatrix::identity(n, n))?;
        let ok = f.lower_bound <= f.optimal + CHAIN_TOL && f.lower_bound >= -CHAIN_TOL;
        out.record(ok, || format!("instance {i}: bound {} optimal {}", f.lower_bound, f.optimal));
    }
    Ok(out)
}

/// Trace inequality on random two-outcome PSD sets, `(j, k, r) = (2, 3, 1)`
/// and random triples.
pub fn trace_inequality_suite(seed: u64, count: usize) -> Result<SuiteResult> {
    let mut out = SuiteResult::new("trace inequality");
    for i in 0..count {
        let mut rng = substream(seed, i as u64, Purpose::PowerMethod);
        let n = 4;
        let p = 0.1 + 0.8 * rng.random::<f64>();
        let samples = vec![(p, random_psd(n, &mut rng)), (1.0 - p, random_psd(n, &mut rng))];
        let s = DMatrix::from_fn(n, 1 + i % n, |_, _| rng.random::<f64>() - 0.5);
        let (j, k, r) = if i.is_multiple_of(2) {
            (2, 3, 1)
        } else {
            let k = rng.random_range(0..7);
            let j = rng.random_range(0..=k);
            (j, k, rng.random_range(0..=j))
        };
        let rep = check_trace_inequality(&samples, &s, j, k, r)?;
        out.record(rep.passed(), || format!("instance {i} (j={j}, k={k}, r={r}): margin {}", rep.margin));
    }
    Ok(out)
}

/// Monotone partial-sum ratios for `a_k = c_k b_k` with nondecreasing `c_k`.
pub fn monotone_ratio_suite(seed: u64, count: usize) -> Result<SuiteResult> {
    let mut out = SuiteResult::new("monotone ratio");
    for i in 0..count {
        let mut rng = substream(seed, i as u64, Purpose::Boundary);
        let len = 2 + rng.random_range(0..20);
        let b: Vec<f64> = (0..len).map(|k| if k == 0 { 0.1 + rng.random::<f64>() } else { 3.0 * rng.random::<f64>() }).collect();
        let mut c: Vec<f64> = (0..len).map(|_| rng.random::<f64>()).collect();
        c.sort_by(f64::total_cmp);
        let a: Vec<f64> = c.iter().zip(&b).map(|(x, y)| x * y).collect();
        let rep = check_monotone_ratio(&a, &b);
        out.record(rep.passed(), || format!("instance {i}: margin {}", rep.margin));
    }
    Ok(out)
}

/// Geometric convergence of the Taylor series of `X⁻¹` about `Y`, with the
/// fitted rate close to the spectral radius.
pub fn neumann_suite(seed: u64, count: usize) -> Result<SuiteResult> {
    let mut out = SuiteResult::new("Neumann tail");
    for i in 0..count {
        let mut rng = substream(seed, i as u64, Purpose::Graph);
        let n = 2 + i % 4;
        let y = random_spd(n, 50.0, &mut rng);
        let radius = 0.3 + 0.6 * rng.random::<f64>();
        let mut eig: Vec<f64> = (0..n).map(|_| radius * (2.0 * rng.random::<f64>() - 1.0)).collect();
        eig[0] = if rng.random::<bool>() { radius } else { -radius };
        let m = with_spectrum(&eig, &mut rng);
        let y_half = sqrt_psd(&y);
        let x = symmetrize(&y_half * (DMatrix::identity(n, n) - m) * &y_half);
        let rep = check_neumann_tail(&x, &y, 200)?;
        let ok = rep.report.passed() && (rep.rate - rep.radius).abs() <= 0.05;
        out.record(ok, || format!("instance {i}: radius {} fitted rate {}", rep.radius, rep.rate));
    }
    Ok(out)
}

/// Runs every suite.
pub fn run_lemma_suites(seed: u64, sizes: SuiteSizes) -> Result<Vec<SuiteResult>> {
    Ok(vec![
        soft_chain_suite(seed, sizes.chains)?,
        shifted_chain_suite(seed, sizes.chains)?,
        loewner_suite(seed, sizes.lemmas)?,
        ag_bound_suite(seed, sizes.lemmas)?,
        trace_inequality_suite(seed, sizes.lemmas.max(500))?,
        monotone_ratio_suite(seed, sizes.lemmas)?,
        neumann_suite(seed, sizes.lemmas)?,
    ])
}

//! Monte-Carlo benchmark harness: relative MSE and relative energy-norm MSE
//! with delta-method 2σ half-widths.
//!
//! Each trial draws observed weights `ω̂`, the operator `Â` they induce and a
//! right-hand side `b ~ N(0, I)`. Every method sees the same `(Â, b)` and the
//! same bootstrap samples and probes, so method comparisons are paired.

use std::fmt::Write as _;
use std::time::Instant;

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::augmentation::{augmented_solve, estimate_with, BootstrapContext, Method, Probes, Weights};
use crate::linalg::{dot, factorize, Factorization, SpdOperator};
use crate::noise::{Bootstrap, MatrixFamily, NoiseModel};
use crate::problems::ProblemInstance;
use crate::rng::{substream, Purpose};
use crate::{Error, Result};

pub const DEFAULT_TRIALS: usize = 5000;
pub const DEFAULT_SAMPLES: usize = 100;

/// Squared errors and squared reference norms of one method in one trial.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct TrialRecord {
    pub l2_err: f64,
    pub energy_err: f64,
    pub l2_ref: f64,
    pub energy_ref: f64,
}

/// One method's outcome in one trial.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct MethodTrial {
    pub record: TrialRecord,
    pub beta: f64,
    pub seconds: f64,
}

/// Everything a benchmark run needs.
#[derive(Clone, Debug)]
pub struct BenchmarkConfig {
    pub problem: ProblemInstance,
    pub noise: NoiseModel,
    pub methods: Vec<Method>,
    pub trials: usize,
    pub samples: usize,
    pub seed: u64,
    /// Worker threads; 0 uses the global pool.
    pub threads: usize,
    /// Record wall time per method.
    pub timing: bool,
}

impl BenchmarkConfig {
    /// Default trial and sample counts, seed 0, and the table method list.
    pub fn new(problem: ProblemInstance, noise: NoiseModel) -> Self {
        Self {
            problem,
            noise,
            methods: default_methods(),
            trials: DEFAULT_TRIALS,
            samples: DEFAULT_SAMPLES,
            seed: 0,
            threads: 0,
            timing: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.noise.validate().map_err(|e| Error::Config(e.to_string()))?;
        if self.trials < 2 {
            return Err(Error::Config(format!("at least 2 trials are needed, got {}", self.trials)));
        }
        if self.samples < 2 {
            return Err(Error::Config(format!("at least 2 bootstrap samples are needed, got {}", self.samples)));
        }
        if self.methods.is_empty() {
            return Err(Error::Config("no methods requested".into()));
        }
        for (i, m) in self.methods.iter().enumerate() {
            if self.methods[..i].contains(m) {
                return Err(Error::Config(format!("method {m} requested twice")));
            }
            if matches!(m, Method::TeagSoft(0) | Method::TeagHard(0) | Method::AstEag(0)) {
                return Err(Error::Config(format!("method {m} has order 0")));
            }
        }
        Ok(())
    }
}

/// Naive, AG, EAG, T-EAG-S and T-EAG-H at orders 2, 4, 6, AST-EAG at orders 2, 4, 6.
pub fn default_methods() -> Vec<Method> {
    let mut methods = vec![Method::Naive, Method::Ag, Method::Eag];
    methods.extend((1..=3).map(Method::TeagSoft));
    methods.extend((1..=3).map(Method::TeagHard));
    methods.extend([2, 4, 6].map(Method::AstEag));
    methods
}

/// Fixed per-run state shared by all trials.
#[derive(Debug)]
pub struct TrialRunner {
    family: MatrixFamily,
    omega: Vec<f64>,
    truth: SpdOperator,
    truth_factor: Factorization,
    weights: Weights,
    negate_rhs: bool,
    methods: Vec<Method>,
    samples: usize,
    seed: u64,
    timing: bool,
}

impl TrialRunner {
    pub fn new(config: &BenchmarkConfig) -> Result<Self> {
        config.validate()?;
        let problem = &config.problem;
        let truth = problem.truth()?;
        let truth_factor = factorize(&truth)?;
        Ok(Self {
            family: MatrixFamily::new(config.noise, problem)?,
            omega: problem.weights().to_vec(),
            weights: Weights::identity(truth.dim()),
            truth,
            truth_factor,
            negate_rhs: problem.negate_rhs(),
            methods: config.methods.clone(),
            samples: config.samples,
            seed: config.seed,
            timing: config.timing,
        })
    }

    pub fn methods(&self) -> &[Method] {
        &self.methods
    }

    /// Runs trial `index`, returning one entry per method in request order.
    pub fn run_trial(&self, index: u64) -> Result<Vec<MethodTrial>> {
        let n = self.truth.dim();
        let (omega_hat, observed) = self.family.sample(&self.omega, &mut substream(self.seed, index, Purpose::Observation))?;
        let factor = factorize(&observed)?;

        let mut rhs_rng = substream(self.seed, index, Purpose::RightHandSide);
        let sign = if self.negate_rhs { -1.0 } else { 1.0 };
        let rhs: Vec<f64> = (0..n).map(|_| sign * Distribution::<f64>::sample(&StandardNormal, &mut rhs_rng)).collect();
        let x = self.truth_factor.solve(&rhs)?;
        let ax = self.truth.apply(&x)?;
        let (l2_ref, energy_ref) = (dot(&x, &x), dot(&x, &ax));

        let needs_bootstrap = self.methods.iter().any(|m| *m != Method::Naive);
        let source = Bootstrap { family: &self.family, omega_hat: &omega_hat };
        let ctx = if needs_bootstrap {
            let mut rng = substream(self.seed, index, Purpose::Bootstrap);
            Some(BootstrapContext::draw(&observed, &factor, &source, self.samples, &mut rng)?)
        } else {
            None
        };
        let probes = if needs_bootstrap {
            Probes::draw(&self.weights, self.samples, &mut substream(self.seed, index, Purpose::Probe))
        } else {
            Probes::default()
        };

        self.methods
            .iter()
            .map(|&method| {
                let start = self.timing.then(Instant::now);
                let run = || -> Result<(f64, Vec<f64>)> {
                    let beta = match &ctx {
                        Some(ctx) if method != Method::Naive => estimate_with(method, ctx, &self.weights, &probes, &rhs)?.beta,
                        _ => 0.0,
                    };
                    Ok((beta, augmented_solve(&factor, method, &self.weights, beta, &rhs)?))
                };
                let (beta, estimate) = run().map_err(|e| Error::Method { method: method.to_string(), source: Box::new(e) })?;
                let seconds = start.map_or(0.0, |s| s.elapsed().as_secs_f64());
                let diff: Vec<f64> = estimate.iter().zip(&x).map(|(a, b)| a - b).collect();
                let record = TrialRecord {
                    l2_err: dot(&diff, &diff),
                    energy_err: self.truth.quad_form(&diff)?,
                    l2_ref,
                    energy_ref,
                };
                Ok(MethodTrial { record, beta, seconds })
            })
            .collect()
    }
}

/// `Σerr / Σref` and the delta-method 2σ half-width of that ratio.
pub fn ratio_with_2sigma(err: &[f64], refs: &[f64]) -> Result<(f64, f64)> {
    if err.len() != refs.len() {
        return Err(Error::DimensionMismatch { expected: err.len(), found: refs.len() });
    }
    let t = err.len();
    if t < 2 {
        return Err(Error::InsufficientTrials(t));
    }
    let (se, sr): (f64, f64) = (err.iter().sum(), refs.iter().sum());
    if !(sr > 0.0) {
        return if se == 0.0 { Ok((0.0, 0.0)) } else { Err(Error::DegenerateDenominator) };
    }
    let r = se / sr;
    let tf = t as f64;
    let mean_ref = sr / tf;
    let var: f64 = err.iter().zip(refs).map(|(e, f)| (e - r * f).powi(2)).sum::<f64>() / (tf - 1.0);
    Ok((r, 2.0 * (var / tf).sqrt() / mean_ref))
}

/// One row of a benchmark table.
#[derive(Clone, Debug, PartialEq)]
pub struct ReportRow {
    pub method: Method,
    pub r_mse: f64,
    pub r_mse_2sigma: f64,
    pub r_emse: f64,
    pub r_emse_2sigma: f64,
    /// Total wall time over all trials, when timing was requested.
    pub seconds: Option<f64>,
}

impl ReportRow {
    pub fn order(&self) -> usize {
        self.method.report_order()
    }

    pub fn window(&self) -> &'static str {
        self.method.window().map_or("", |w| w.tag())
    }
}

/// Benchmark results with run metadata.
#[derive(Clone, Debug, PartialEq)]
pub struct BenchmarkReport {
    pub problem: String,
    pub noise: String,
    pub seed: u64,
    pub trials: usize,
    pub samples: usize,
    pub rows: Vec<ReportRow>,
}

impl BenchmarkReport {
    pub fn row(&self, method: Method) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.method == method)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("method,order,window,r_mse,r_mse_2sigma,r_emse,r_emse_2sigma,seconds\n");
        for r in &self.rows {
            let seconds = r.seconds.map_or(String::new(), |s| format!("{s:.3}"));
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                r.method.label(),
                r.order(),
                r.window(),
                r.r_mse,
                r.r_mse_2sigma,
                r.r_emse,
                r.r_emse_2sigma,
                seconds
            );
        }
        out
    }

    pub fn to_markdown(&self) -> String {
        let mut out = format!(
            "{}, noise {}, T = {}, M = {}, seed {}\n\n",
            self.problem, self.noise, self.trials, self.samples, self.seed
        );
        let timed = self.rows.iter().any(|r| r.seconds.is_some());
        out.push_str("| Method | Order | R. MSE | 2σ | Rel. EMSE | 2σ |");
        out.push_str(if timed { " Time (s) |\n" } else { "\n" });
        out.push_str("|---|---|---|---|---|---|");
        out.push_str(if timed { "---|\n" } else { "\n" });
        for r in &self.rows {
            let order = if r.order() == 0 { "-".to_string() } else { r.order().to_string() };
            let _ = write!(
                out,
                "| {} | {} | {:.3}% | {:.3}% | {:.3}% | {:.3}% |",
                r.method.label(),
                order,
                100.0 * r.r_mse,
                100.0 * r.r_mse_2sigma,
                100.0 * r.r_emse,
                100.0 * r.r_emse_2sigma
            );
            if timed {
                let _ = write!(out, " {} |", r.seconds.map_or(String::new(), |s| format!("{s:.3}")));
            }
            out.push('\n');
        }
        out
    }
}

/// Combined 2σ of two independent estimates.
pub fn combined_2sigma(a: f64, b: f64) -> f64 {
    a.hypot(b)
}

/// Reduces per-trial outcomes (`trials[t][i]` for method `methods[i]`) to a report.
pub fn aggregate(
    config: &BenchmarkConfig,
    trials: &[Vec<MethodTrial>],
) -> Result<BenchmarkReport> {
    if trials.len() < 2 {
        return Err(Error::InsufficientTrials(trials.len()));
    }
    let rows = config
        .methods
        .iter()
        .enumerate()
        .map(|(i, &method)| {
            let pick = |f: fn(&TrialRecord) -> f64| trials.iter().map(|t| f(&t[i].record)).collect::<Vec<_>>();
            let (r_mse, r_mse_2sigma) = ratio_with_2sigma(&pick(|r| r.l2_err), &pick(|r| r.l2_ref))?;
            let (r_emse, r_emse_2sigma) = ratio_with_2sigma(&pick(|r| r.energy_err), &pick(|r| r.energy_ref))?;
            let seconds = config.timing.then(|| trials.iter().map(|t| t[i].seconds).sum());
            Ok(ReportRow { method, r_mse, r_mse_2sigma, r_emse, r_emse_2sigma, seconds })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BenchmarkReport {
        problem: config.problem.name().to_string(),
        noise: config.noise.to_string(),
        seed: config.seed,
        trials: trials.len(),
        samples: config.samples,
        rows,
    })
}

/// Runs every trial of `config` and aggregates. Results do not depend on the
/// thread count.
pub fn run_benchmark(config: &BenchmarkConfig) -> Result<BenchmarkReport> {
    let runner = TrialRunner::new(config)?;
    let run_all = || -> Result<Vec<Vec<MethodTrial>>> {
        (0..config.trials as u64).into_par_iter().map(|t| runner.run_trial(t)).collect()
    };
    let trials = match config.threads {
        0 => run_all()?,
        1 => (0..config.trials as u64).map(|t| runner.run_trial(t)).collect::<Result<Vec<_>>>()?,
        k => rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()
            .map_err(|e| Error::Config(format!("cannot start {k} threads: {e}")))?
            .install(run_all)?,
    };
    aggregate(config, &trials)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use rand::Rng as _;

    fn scalar_config(methods: Vec<Method>, trials: usize) -> BenchmarkConfig {
        let mut c = BenchmarkConfig::new(ProblemInstance::scalar(1.0).unwrap(), "two-point:0.5,1.5".parse().unwrap());
        c.methods = methods;
        c.trials = trials;
        c.samples = 50;
        c.seed = 3;
        c
    }

    #[test]
    fn ratio_of_sums() {
        let (r, s) = ratio_with_2sigma(&[1.0, 3.0], &[2.0, 2.0]).unwrap();
        assert_eq!(r, 1.0);
        assert!(s > 0.0);
        let (r, s) = ratio_with_2sigma(&[2.0, 2.0, 2.0], &[4.0, 4.0, 4.0]).unwrap();
        assert_eq!((r, s), (0.5, 0.0));
        assert!(matches!(ratio_with_2sigma(&[1.0], &[1.0]), Err(Error::InsufficientTrials(1))));
    }

    #[test]
    fn delta_method_matches_resampling() {
        let mut rng = seeded(5);
        let t = 200;
        let refs: Vec<f64> = (0..t).map(|_| rng.random::<f64>() * 2.0 + 0.5).collect();
        let err: Vec<f64> = refs.iter().map(|r| r * (0.3 + 0.4 * rng.random::<f64>()) + 0.1 * rng.random::<f64>()).collect();
        let (_, half) = ratio_with_2sigma(&err, &refs).unwrap();
        let reps = 1_000_000;
        let mut ratios = Vec::with_capacity(reps);
        for _ in 0..reps {
            let (mut se, mut sr) = (0.0, 0.0);
            for _ in 0..t {
                let i = rng.random_range(0..t);
                se += err[i];
                sr += refs[i];
            }
            ratios.push(se / sr);
        }
        let mean = ratios.iter().sum::<f64>() / reps as f64;
        let sd = (ratios.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (reps as f64 - 1.0)).sqrt();
        assert!((half / (2.0 * sd) - 1.0).abs() < 0.2, "{half} vs {}", 2.0 * sd);
    }

    #[test]
    fn degenerate_noise_gives_zero() {
        let mut c = scalar_config(default_methods(), 4);
        c.problem = ProblemInstance::grid_1d(6).unwrap();
        c.noise = NoiseModel::none();
        let report = run_benchmark(&c).unwrap();
        for r in &report.rows {
            assert!(r.r_mse < 1e-24 && r.r_emse < 1e-24, "{r:?}");
            assert!(r.r_mse_2sigma < 1e-12 && r.r_emse_2sigma < 1e-12);
        }
    }

    #[test]
    fn scalar_naive_error() {
        let c = scalar_config(vec![Method::Naive], 20_000);
        let row = run_benchmark(&c).unwrap().rows[0].clone();
        assert!((row.r_mse - 5.0 / 9.0).abs() < 2.0 * row.r_mse_2sigma, "{row:?}");
        assert_eq!(row.r_mse, row.r_emse);
    }

    #[test]
    fn paired_trials_share_inputs() {
        let c = scalar_config(vec![Method::Naive, Method::Eag, Method::TeagSoft(2)], 3);
        let runner = TrialRunner::new(&c).unwrap();
        let t = runner.run_trial(1).unwrap();
        assert_eq!(t[0].record.l2_ref, t[1].record.l2_ref);
        assert_eq!(t[1].record.energy_ref, t[2].record.energy_ref);
        assert_eq!(runner.run_trial(1).unwrap(), t);
    }

    #[test]
    fn report_layout() {
        let c = scalar_config(vec![Method::Naive, Method::TeagSoft(2), Method::AstEag(3)], 10);
        let report = run_benchmark(&c).unwrap();
        let csv = report.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "method,order,window,r_mse,r_mse_2sigma,r_emse,r_emse_2sigma,seconds");
        assert!(lines[1].starts_with("Naive,0,,"));
        assert!(lines[2].starts_with("T-EAG-S,4,soft,"));
        assert!(lines[3].starts_with("AST-EAG,3,"));
        assert!(lines.iter().all(|l| l.ends_with(',') || l.ends_with("seconds")));
        let md = report.to_markdown();
        assert!(md.contains("| T-EAG-S | 4 |"));
    }

    #[test]
    fn thread_count_does_not_change_results() {
        let mut c = scalar_config(vec![Method::Naive, Method::Ag, Method::AstEag(2)], 40);
        c.problem = ProblemInstance::grid_1d(10).unwrap();
        c.threads = 1;
        let a = run_benchmark(&c).unwrap().to_csv();
        c.threads = 3;
        assert_eq!(run_benchmark(&c).unwrap().to_csv(), a);
    }

    #[test]
    fn config_errors() {
        let mut c = scalar_config(vec![Method::Naive, Method::Naive], 10);
        assert!(matches!(run_benchmark(&c), Err(Error::Config(_))));
        c.methods = vec![Method::Naive];
        c.trials = 1;
        assert!(matches!(run_benchmark(&c), Err(Error::Config(_))));
    }
}

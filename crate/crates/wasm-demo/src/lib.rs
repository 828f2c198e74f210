//! Browser bindings for the operator augmentation demo page.

use nalgebra::DMatrix;
use opaug::augmentation::{window, window_bar, Method, WindowKind};
use opaug::evaluation::{run_benchmark, BenchmarkConfig};
use opaug::linalg::SpdOperator;
use opaug::noise::{DiscreteEnsemble, NoiseModel};
use opaug::oracle::{exact_accelerated_factor, exact_beta_energy, exact_truncated_chain};
use opaug::problems::ProblemInstance;
use wasm_bindgen::prelude::*;

const MAX_DEMO_ORDER: usize = 40;
const MAX_DEMO_TRIALS: usize = 2000;
const MAX_DEMO_GRID: usize = 256;

fn parse_kind(kind: &str, alpha: f64) -> Result<WindowKind, String> {
    match kind {
        "soft" => Ok(WindowKind::Soft),
        "hard" => Ok(WindowKind::Hard),
        "shifted" => WindowKind::shifted(alpha).map_err(|e| e.to_string()),
        other => Err(format!("unknown window {other:?}")),
    }
}

/// Numerator weights followed by denominator weights for `k = 0..=support`.
pub fn window_table(kind: &str, order: usize, alpha: f64) -> Result<Vec<f64>, String> {
    if order == 0 || order > MAX_DEMO_ORDER {
        return Err(format!("order must be between 1 and {MAX_DEMO_ORDER}"));
    }
    let kind = parse_kind(kind, alpha)?;
    let support = kind.support(order);
    let num = (0..=support).map(|k| window(kind, order, k));
    let den = (0..=support).map(|k| window_bar(kind, order, k));
    num.chain(den).collect::<opaug::Result<Vec<_>>>().map_err(|e| e.to_string())
}

/// Exact factors for the scalar ensemble `Â ∈ {low, high}` about `A = (low + high)/2`:
/// `β*`, then soft, hard and accelerated chains for `N = 1..=max_order`.
pub fn scalar_chains(low: f64, high: f64, max_order: usize) -> Result<Vec<f64>, String> {
    if !(low > 0.0 && low < high && high.is_finite()) {
        return Err("need 0 < low < high".into());
    }
    if max_order == 0 || max_order > MAX_DEMO_ORDER {
        return Err(format!("order must be between 1 and {MAX_DEMO_ORDER}"));
    }
    let a = DMatrix::from_element(1, 1, 0.5 * (low + high));
    let l = DMatrix::identity(1, 1);
    let e = DiscreteEnsemble::uniform(vec![SpdOperator::scalar(low), SpdOperator::scalar(high)]).map_err(|e| e.to_string())?;
    let run = || -> opaug::Result<Vec<f64>> {
        let mut out = vec![exact_beta_energy(&e, &a, &l)?];
        out.extend(exact_truncated_chain(&e, &a, &l, max_order, WindowKind::Soft)?);
        out.extend(exact_truncated_chain(&e, &a, &l, max_order, WindowKind::Hard)?);
        for n in 1..=max_order {
            out.push(exact_accelerated_factor(&e, &a, &l, n)?);
        }
        Ok(out)
    };
    run().map_err(|e| e.to_string())
}

/// Single-threaded 1D Poisson benchmark, returned as CSV.
pub fn poisson_csv(n: usize, noise: &str, methods: &str, trials: usize, samples: usize, seed: u64) -> Result<String, String> {
    if n == 0 || n > MAX_DEMO_GRID {
        return Err(format!("grid size must be between 1 and {MAX_DEMO_GRID}"));
    }
    if trials > MAX_DEMO_TRIALS {
        return Err(format!("at most {MAX_DEMO_TRIALS} trials in the browser"));
    }
    let noise: NoiseModel = noise.parse().map_err(|e: opaug::Error| e.to_string())?;
    let problem = ProblemInstance::grid_1d(n).map_err(|e| e.to_string())?;
    let mut config = BenchmarkConfig::new(problem, noise);
    config.methods = methods
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::parse::<Method>)
        .collect::<opaug::Result<Vec<_>>>()
        .map_err(|e| e.to_string())?;
    config.trials = trials;
    config.samples = samples;
    config.seed = seed;
    config.threads = 1;
    run_benchmark(&config).map(|r| r.to_csv()).map_err(|e| e.to_string())
}

#[wasm_bindgen(js_name = windowTable)]
pub fn window_table_js(kind: &str, order: usize, alpha: f64) -> Result<Vec<f64>, JsError> {
    window_table(kind, order, alpha).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = scalarChains)]
pub fn scalar_chains_js(low: f64, high: f64, max_order: usize) -> Result<Vec<f64>, JsError> {
    scalar_chains(low, high, max_order).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = poissonCsv)]
pub fn poisson_csv_js(
    n: usize,
    noise: &str,
    methods: &str,
    trials: usize,
    samples: usize,
    seed: u32,
) -> Result<String, JsError> {
    poisson_csv(n, noise, methods, trials, samples, u64::from(seed)).map_err(|e| JsError::new(&e))
}

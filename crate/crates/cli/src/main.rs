mod config;

use std::collections::BTreeMap;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::DMatrix;
use opaug::augmentation::{Method, WindowKind};
use opaug::evaluation::{run_benchmark, BenchmarkConfig};
use opaug::noise::NoiseModel;
use opaug::oracle::{
    exact_accelerated_factor, exact_beta_ag, exact_beta_basic, exact_beta_energy, exact_energy_errors,
    exact_truncated_chain, run_lemma_suites, scalar_two_point, shift_for, SuiteSizes,
};
use opaug::problems::{load_edge_list, parse_edge_list, select_boundary, ProblemInstance, ATTACHMENT_300, DEFAULT_BOUNDARY, GEOMETRIC_200};
use opaug::{Error, Result};

const TAGS: &str = "\
Methods (--methods, comma separated):
  naive          no augmentation
  basic          rank-one augmentation along the right-hand side
  ag             semi-Bayesian operator augmentation
  eag            energy-norm augmentation
  teag-s:K       energy-norm augmentation, soft window, order K (even)
  teag-h:K       energy-norm augmentation, hard window, order K (even)
  asteag:K       accelerated shifted energy-norm augmentation, order K

Noise models (--noise):
  none               noiseless weights
  two-point:LOW,HIGH each weight scaled by LOW or HIGH with probability 1/2
  gamma:MEAN,STD     each weight scaled by a gamma variable
  bernoulli:P        each edge kept with probability P and rescaled by 1/P

Edge lists (--edges): a file path, bundled:geometric-200 or bundled:attachment-300.";

#[derive(Parser, Debug)]
#[command(name = "opaug", version, about = "Operator augmentation for noisy SPD linear systems", after_help = TAGS)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Monte-Carlo benchmark of augmentation methods.
    #[command(after_help = TAGS)]
    Bench {
        problem: ProblemKind,
        #[command(flatten)]
        args: Box<BenchArgs>,
    },
    /// Randomized checks of the supporting theorems and lemmas.
    Verify {
        target: VerifyTarget,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Random ensembles per monotone-chain suite.
        #[arg(long, default_value_t = SuiteSizes::default().chains)]
        chains: usize,
        /// Random instances per lemma suite.
        #[arg(long, default_value_t = SuiteSizes::default().lemmas)]
        instances: usize,
    },
    /// Exact augmentation factors by enumeration.
    Oracle { case: OracleCase },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ProblemKind {
    Poisson1d,
    Poisson2d,
    Graph,
    Sparsify,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum VerifyTarget {
    Lemmas,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum OracleCase {
    ScalarTwoPoint,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Md,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        <Self as ValueEnum>::from_str(s, true)
    }
}

#[derive(Args, Debug, Default)]
struct BenchArgs {
    /// Interior points of the 1D grid [default: 128].
    #[arg(long)]
    n: Option<usize>,
    /// Interior columns of the 2D grid [default: 32].
    #[arg(long)]
    nx: Option<usize>,
    /// Interior rows of the 2D grid [default: nx].
    #[arg(long)]
    ny: Option<usize>,
    /// Edge list for graph problems [default: bundled:geometric-200].
    #[arg(long)]
    edges: Option<String>,
    /// Boundary vertex count for the graph problem [default: 6].
    #[arg(long)]
    boundary: Option<usize>,
    /// Diagonal shift for the sparsify problem [default: 1].
    #[arg(long)]
    gamma: Option<f64>,
    /// Noise model [default: two-point:0.5,1.5, or bernoulli:0.75 for sparsify].
    #[arg(long)]
    noise: Option<String>,
    /// Methods to compare [default: naive,ag,eag,teag-s:2,4,6,teag-h:2,4,6,asteag:2,4,6].
    #[arg(long)]
    methods: Option<String>,
    /// Monte-Carlo trials [default: 5000].
    #[arg(long)]
    trials: Option<usize>,
    /// Bootstrap samples per estimate [default: 100].
    #[arg(long)]
    samples: Option<usize>,
    /// Master seed [default: 0].
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads, 0 for all cores [default: $OPAUG_THREADS or 0].
    #[arg(long)]
    threads: Option<usize>,
    /// Output file, written atomically [default: stdout].
    #[arg(long)]
    out: Option<PathBuf>,
    /// Report format [default: csv].
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Record wall time per method.
    #[arg(long)]
    timing: bool,
    /// File of `key = value` lines using the flag names; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
}

enum Failure {
    Config(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

fn config_error(e: Error) -> Failure {
    Failure::Config(e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Bench { problem, args } => bench(problem, *args),
        Command::Verify { target: VerifyTarget::Lemmas, seed, chains, instances } => verify(seed, chains, instances),
        Command::Oracle { case: OracleCase::ScalarTwoPoint } => oracle_scalar().map_err(Failure::from),
    };
    match result {
        Ok(code) => code,
        Err(Failure::Config(msg)) => {
            eprintln!("opaug: configuration error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("opaug: {msg}");
            ExitCode::from(1)
        }
    }
}

/// Flag value, else config file value, else `None`.
fn pick<T: FromStr>(flag: Option<T>, file: &BTreeMap<String, String>, key: &str) -> Result<Option<T>>
where
    T::Err: std::fmt::Display,
{
    if flag.is_some() {
        return Ok(flag);
    }
    match file.get(key) {
        None => Ok(None),
        Some(v) => v.parse().map(Some).map_err(|e| Error::Config(format!("config key {key}: {e}"))),
    }
}

struct Settings {
    config: BenchmarkConfig,
    out: Option<PathBuf>,
    format: Format,
}

fn settings(kind: ProblemKind, args: BenchArgs) -> Result<Settings> {
    let file = match &args.config {
        Some(path) => config::load(path)?,
        None => BTreeMap::new(),
    };
    let n = pick(args.n, &file, "n")?;
    let nx = pick(args.nx, &file, "nx")?;
    let ny = pick(args.ny, &file, "ny")?;
    let edges = pick(args.edges, &file, "edges")?;
    let boundary = pick(args.boundary, &file, "boundary")?;
    let gamma = pick(args.gamma, &file, "gamma")?;

    let reject = |given: bool, flag: &str| {
        if given {
            Err(Error::Config(format!("--{flag} does not apply to this problem")))
        } else {
            Ok(())
        }
    };
    reject(n.is_some() && kind != ProblemKind::Poisson1d, "n")?;
    reject((nx.is_some() || ny.is_some()) && kind != ProblemKind::Poisson2d, "nx/--ny")?;
    reject(edges.is_some() && !matches!(kind, ProblemKind::Graph | ProblemKind::Sparsify), "edges")?;
    reject(boundary.is_some() && kind != ProblemKind::Graph, "boundary")?;
    reject(gamma.is_some() && kind != ProblemKind::Sparsify, "gamma")?;

    let seed = pick(args.seed, &file, "seed")?.unwrap_or(0);
    let problem = match kind {
        ProblemKind::Poisson1d => ProblemInstance::grid_1d(n.unwrap_or(128))?,
        ProblemKind::Poisson2d => {
            let nx = nx.unwrap_or(32);
            ProblemInstance::grid_2d(nx, ny.unwrap_or(nx))?
        }
        ProblemKind::Graph => {
            let (structure, weights) = read_edges(edges.as_deref())?;
            let structure = select_boundary(&structure, boundary.unwrap_or(DEFAULT_BOUNDARY), seed)?;
            ProblemInstance::dirichlet(structure, weights)?
        }
        ProblemKind::Sparsify => {
            let (structure, weights) = read_edges(edges.as_deref())?;
            ProblemInstance::shifted(structure, weights, gamma.unwrap_or(1.0))?
        }
    };
    let default_noise = if kind == ProblemKind::Sparsify { "bernoulli:0.75" } else { "two-point:0.5,1.5" };
    let noise: NoiseModel = pick(args.noise, &file, "noise")?.unwrap_or_else(|| default_noise.to_string()).parse()?;

    let mut config = BenchmarkConfig::new(problem, noise);
    if let Some(list) = pick(args.methods, &file, "methods")? {
        config.methods = parse_methods(&list)?;
    }
    config.trials = pick(args.trials, &file, "trials")?.unwrap_or(config.trials);
    config.samples = pick(args.samples, &file, "samples")?.unwrap_or(config.samples);
    config.seed = seed;
    config.threads = match pick(args.threads, &file, "threads")? {
        Some(t) => t,
        None => match std::env::var("OPAUG_THREADS") {
            Ok(v) => v.trim().parse().map_err(|_| Error::Config(format!("OPAUG_THREADS={v:?} is not a count")))?,
            Err(_) => 0,
        },
    };
    config.timing = args.timing || pick(None, &file, "timing")?.unwrap_or(false);
    config.validate()?;
    Ok(Settings {
        config,
        out: pick(args.out, &file, "out")?,
        format: pick(args.format, &file, "format")?.unwrap_or(Format::Csv),
    })
}

/// Comma-separated methods; a bare order continues the previous tag, so
/// `teag-s:2,4,6` lists three methods.
fn parse_methods(list: &str) -> Result<Vec<Method>> {
    let mut out = Vec::new();
    let mut last_tag: Option<&str> = None;
    for item in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let full = match item.split_once(':') {
            Some((tag, _)) => {
                last_tag = Some(tag);
                item.to_string()
            }
            None if item.parse::<usize>().is_ok() => match last_tag {
                Some(tag) => format!("{tag}:{item}"),
                None => return Err(Error::Config(format!("order {item} has no method tag"))),
            },
            None => {
                last_tag = None;
                item.to_string()
            }
        };
        out.push(full.parse()?);
    }
    Ok(out)
}

fn read_edges(spec: Option<&str>) -> Result<(opaug::problems::IncidenceStructure, Vec<f64>)> {
    match spec.unwrap_or("bundled:geometric-200") {
        "bundled:geometric-200" => parse_edge_list(GEOMETRIC_200),
        "bundled:attachment-300" => parse_edge_list(ATTACHMENT_300),
        other if other.starts_with("bundled:") => Err(Error::Config(format!("unknown bundled graph {other:?}"))),
        path => load_edge_list(path).map_err(|e| match e {
            Error::Io(io) => Error::Config(format!("cannot read edge list {path}: {io}")),
            e => e,
        }),
    }
}

fn write_atomic(path: &Path, body: &str) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(body.as_bytes())?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

fn bench(kind: ProblemKind, args: BenchArgs) -> std::result::Result<ExitCode, Failure> {
    let settings = settings(kind, args).map_err(config_error)?;
    let report = run_benchmark(&settings.config)?;
    let body = match settings.format {
        Format::Csv => report.to_csv(),
        Format::Md => report.to_markdown(),
    };
    match &settings.out {
        Some(path) => {
            write_atomic(path, &body)?;
            eprintln!("wrote {}", path.display());
        }
        None => print!("{body}"),
    }
    Ok(ExitCode::SUCCESS)
}

fn verify(seed: u64, chains: usize, instances: usize) -> std::result::Result<ExitCode, Failure> {
    if chains == 0 || instances == 0 {
        return Err(Failure::Config("suite sizes must be positive".into()));
    }
    let suites = run_lemma_suites(seed, SuiteSizes { chains, lemmas: instances })?;
    let mut ok = true;
    for s in &suites {
        let status = if s.all_passed() { "PASS" } else { "FAIL" };
        println!("{status} {}: {}/{} instances", s.name, s.passed, s.instances);
        for f in s.failures.iter().take(5) {
            println!("    {f}");
        }
        ok &= s.all_passed();
    }
    Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn join(values: &[f64]) -> String {
    values.iter().map(|&v| format!("{:.6}", if v.abs() < 5e-7 { 0.0 } else { v })).collect::<Vec<_>>().join(", ")
}

fn oracle_scalar() -> Result<ExitCode> {
    let (a, ensemble) = scalar_two_point();
    let l = DMatrix::identity(1, 1);
    let ag = exact_beta_ag(&ensemble, &a, &l, &l)?;
    let alpha = shift_for(&ensemble, &a)?;
    let accelerated = (1..=6).map(|n| exact_accelerated_factor(&ensemble, &a, &l, n)).collect::<Result<Vec<_>>>()?;
    let beta = exact_beta_energy(&ensemble, &a, &l)?;
    let (naive_mse, naive_emse) = exact_energy_errors(&ensemble, &a, 0.0)?;
    let (_, best_emse) = exact_energy_errors(&ensemble, &a, beta)?;
    println!("ensemble: A = 1, A-hat in {{0.5, 1.5}} with probability 1/2 each");
    println!("beta* (energy)       = {beta:.6}");
    println!("beta* (AG)           = {:.6}", ag.optimal);
    println!("beta° (AG bound)     = {:.6}", ag.lower_bound);
    println!("beta° (basic, b = 1) = {:.6}", exact_beta_basic(&ensemble, &[1.0])?);
    println!("soft chain N=1..6    = {}", join(&exact_truncated_chain(&ensemble, &a, &l, 6, WindowKind::Soft)?));
    println!("hard chain N=1..6    = {}", join(&exact_truncated_chain(&ensemble, &a, &l, 6, WindowKind::Hard)?));
    println!(
        "shifted chain N=1..6 = {} (alpha = {alpha:.6})",
        join(&exact_truncated_chain(&ensemble, &a, &l, 6, WindowKind::Shifted { alpha })?)
    );
    println!("accelerated N=1..6   = {}", join(&accelerated));
    println!("naive r_mse = {naive_mse:.6}, r_emse = {naive_emse:.6}; r_emse at beta* = {best_emse:.6}");
    Ok(ExitCode::SUCCESS)
}

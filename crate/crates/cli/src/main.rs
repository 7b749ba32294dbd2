use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use prodstate_core::instance::{FamilyTag, GenerateParams, GraphKind};
use prodstate_core::moment_sdp::MomentSolution;
use prodstate_core::oracle::{self, ExactMethod, OracleError};
use prodstate_core::pauli::reduce_instance;
use prodstate_core::pipeline::{reproduce_constants, ConstantRow, PipelineError};
use prodstate_core::ratio_numerics::{approx_ratio_axis, approx_ratio_bfv, Rank};
use prodstate_core::rounding::{self, Scheme};
use prodstate_core::{
    generate, run_pipeline, solve_moment_sdp, Instance, InstanceError, PipelineConfig, SdpError, SolverConfig,
};
use serde::Serialize;

mod reduce_input;

const EXIT_FAILURE: u8 = 1;
const EXIT_PARSE: u8 = 2;
const EXIT_NOT_CONVERGED: u8 = 3;
const EXIT_ORACLE_LIMIT: u8 = 4;

#[derive(Parser)]
#[command(
    name = "prodstate",
    version,
    about = "Product-state approximation of quantum Heisenberg models"
)]
struct Cli {
    /// Worker threads for solver restarts, rounding trials and product search.
    /// Results do not depend on this value.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a family-uniform instance.
    Gen(GenArgs),
    /// Solve the moment relaxation and write the Gram vectors.
    Solve(SolveArgs),
    /// Round a solved relaxation to a product state.
    Round(RoundArgs),
    /// Exact lambda_max and the best product state found by local search.
    Exact(ExactArgs),
    /// Worst-case expected ratios of both rounding schemes.
    RatioTables(RatioArgs),
    /// Rotate a uniform two-qubit interaction into Heisenberg form.
    Reduce(ReduceArgs),
    /// Solve, round, and compare against the oracles.
    Pipeline(PipelineArgs),
}

#[derive(Args)]
struct SeedArg {
    #[arg(long, env = "HEIS_DEFAULT_SEED", default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct OutArg {
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Graph {
    SingleEdge,
    Complete,
    Cycle,
    Bipartite,
    Gnp,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    graph: Graph,
    /// Number of qubits (left side size for bipartite graphs).
    #[arg(long, default_value_t = 2)]
    n: usize,
    /// Right side size for bipartite graphs.
    #[arg(long, default_value_t = 1)]
    right: usize,
    /// Edge probability for random graphs.
    #[arg(long, default_value_t = 0.5)]
    p: f64,
    /// Family as three bits `abc` (001 max-cut, 110 XY, 111 antiferromagnet)
    /// or explicit coefficients `alpha,beta,gamma`.
    #[arg(long, default_value = "111")]
    family: String,
    #[arg(long)]
    random_weights: bool,
    #[command(flatten)]
    seed: SeedArg,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Args)]
struct SolveArgs {
    instance: PathBuf,
    #[arg(long, default_value_t = 5)]
    restarts: usize,
    #[arg(long, default_value_t = 10_000)]
    max_sweeps: usize,
    #[command(flatten)]
    seed: SeedArg,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeArg {
    Bfv,
    Axis,
}

impl From<SchemeArg> for Scheme {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::Bfv => Scheme::Bfv,
            SchemeArg::Axis => Scheme::Axis,
        }
    }
}

#[derive(Args)]
struct RoundArgs {
    instance: PathBuf,
    /// Output of `solve`.
    solution: PathBuf,
    #[arg(long, value_enum, default_value = "bfv")]
    scheme: SchemeArg,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[command(flatten)]
    seed: SeedArg,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Auto,
    Dense,
    Lanczos,
}

#[derive(Args)]
struct ExactArgs {
    instance: PathBuf,
    #[arg(long, value_enum, default_value = "auto")]
    method: MethodArg,
    /// Restarts of the product-state search.
    #[arg(long, default_value_t = oracle::DEFAULT_PRODUCT_RESTARTS)]
    restarts: usize,
    #[command(flatten)]
    seed: SeedArg,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Args)]
struct RatioArgs {
    /// Evaluate at this grid step only, instead of 0.01 and 1e-4.
    #[arg(long)]
    grid_step: Option<f64>,
    /// Directory for per-curve CSV files (`bfv_r1.csv`, ...).
    #[arg(long)]
    curves: Option<PathBuf>,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Args)]
struct ReduceArgs {
    /// `n m`, a line of 16 Pauli coefficients (kappa, M row-major, r, s),
    /// then `m` lines `i j w`.
    input: PathBuf,
    /// Where to write the reduction metadata as JSON.
    #[arg(long)]
    sidecar: Option<PathBuf>,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Clone, Copy, ValueEnum, PartialEq)]
enum Toggle {
    On,
    Off,
}

#[derive(Args)]
struct PipelineArgs {
    instance: PathBuf,
    #[arg(long, value_enum, default_value = "bfv")]
    scheme: SchemeArg,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 5)]
    restarts: usize,
    #[arg(long, value_enum, default_value = "on")]
    oracle: Toggle,
    #[command(flatten)]
    seed: SeedArg,
    #[command(flatten)]
    out: OutArg,
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            Ok(stdout.flush()?)
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

fn load_instance(path: &Path) -> Result<Instance> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Instance::parse(&text).with_context(|| format!("parsing {}", path.display()))
}

fn parse_family(text: &str) -> Result<[f64; 3]> {
    if text.len() == 3 && text.chars().all(|c| c == '0' || c == '1') {
        let bits: Vec<f64> = text.chars().map(|c| if c == '1' { 1.0 } else { 0.0 }).collect();
        return Ok([bits[0], bits[1], bits[2]]);
    }
    let parts: Vec<f64> = text
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .with_context(|| format!("family `{text}` is neither three bits nor alpha,beta,gamma"))?;
    match parts[..] {
        [a, b, c] => Ok([a, b, c]),
        _ => bail!("family `{text}` needs exactly three coefficients"),
    }
}

fn cmd_gen(args: GenArgs) -> Result<u8> {
    let kind = match args.graph {
        Graph::SingleEdge => GraphKind::SingleEdge,
        Graph::Complete => GraphKind::Complete { n: args.n },
        Graph::Cycle => GraphKind::Cycle { n: args.n },
        Graph::Bipartite => GraphKind::Bipartite {
            left: args.n,
            right: args.right,
        },
        Graph::Gnp => GraphKind::RandomGnp { n: args.n, p: args.p },
    };
    let params = GenerateParams {
        coeffs: parse_family(&args.family)?,
        random_weights: args.random_weights,
    };
    let mut inst = generate(kind, params, args.seed.seed)?;
    if let Some(tag) = FamilyTag::from_coeffs(params.coeffs) {
        inst.label = format!("{}_{}", inst.label, tag);
    }
    emit(&args.out.out, &inst.serialize())?;
    Ok(0)
}

#[derive(Serialize)]
struct SolveSummary {
    value: f64,
    converged: bool,
    sweeps: usize,
}

fn cmd_solve(args: SolveArgs) -> Result<u8> {
    let inst = load_instance(&args.instance)?;
    let cfg = SolverConfig {
        restarts: args.restarts,
        max_sweeps: args.max_sweeps,
        seed: args.seed.seed,
        ..SolverConfig::default()
    };
    let sol = solve_moment_sdp(&inst, &cfg)?;
    emit(&args.out.out, &sol.to_text())?;
    let d = &sol.diagnostics;
    eprintln!(
        "{}",
        serde_json::to_string(&SolveSummary {
            value: sol.value,
            converged: d.converged,
            sweeps: d.sweeps,
        })?
    );
    Ok(if d.converged { 0 } else { EXIT_NOT_CONVERGED })
}

#[derive(Serialize)]
struct RoundReport {
    scheme: Scheme,
    seed: u64,
    trials_run: usize,
    energy: f64,
    mean_energy: f64,
    sdp_value: f64,
    certified_ratio: f64,
    state: Vec<[f64; 3]>,
    per_trial_energies: Vec<f64>,
}

fn cmd_round(args: RoundArgs) -> Result<u8> {
    let inst = load_instance(&args.instance)?;
    let text = fs::read_to_string(&args.solution).with_context(|| format!("reading {}", args.solution.display()))?;
    let sol = MomentSolution::parse(&text).with_context(|| format!("parsing {}", args.solution.display()))?;
    let scheme = Scheme::from(args.scheme);
    let outcome = rounding::round(scheme, &inst, &sol, args.trials, args.seed.seed)?;
    let sdp_value = prodstate_core::sdp_objective(&inst, &sol)?;
    let report = RoundReport {
        scheme,
        seed: outcome.seed,
        trials_run: outcome.trials_run,
        energy: outcome.energy,
        mean_energy: outcome.mean_energy(),
        sdp_value,
        certified_ratio: outcome.energy / sdp_value,
        state: outcome.state.bloch().to_vec(),
        per_trial_energies: outcome.per_trial_energies,
    };
    emit(&args.out.out, &to_json(&report)?)?;
    Ok(0)
}

#[derive(Serialize)]
struct ExactReport {
    label: String,
    n: usize,
    lambda_max: f64,
    method: ExactMethod,
    residual: f64,
    best_product_lower_bound: f64,
    product_restarts: usize,
    product_ratio: f64,
    best_product_state: Vec<[f64; 3]>,
}

fn cmd_exact(args: ExactArgs) -> Result<u8> {
    let inst = load_instance(&args.instance)?;
    let exact = match args.method {
        MethodArg::Auto => oracle::exact_max_eigenvalue(&inst),
        MethodArg::Dense => oracle::exact_max_eigenvalue_with(&inst, ExactMethod::FullDense),
        MethodArg::Lanczos => oracle::exact_max_eigenvalue_with(&inst, ExactMethod::Lanczos),
    }?;
    let product = oracle::best_product_state(&inst, args.restarts, args.seed.seed);
    let report = ExactReport {
        label: inst.label.clone(),
        n: inst.n,
        lambda_max: exact.lambda_max,
        method: exact.method,
        residual: exact.residual,
        best_product_lower_bound: product.energy,
        product_restarts: product.restarts_used,
        product_ratio: product.energy / exact.lambda_max,
        best_product_state: product.state.bloch().to_vec(),
    };
    emit(&args.out.out, &to_json(&report)?)?;
    Ok(0)
}

fn cmd_ratio_tables(args: RatioArgs) -> Result<u8> {
    let rows: Vec<ConstantRow> = match args.grid_step {
        None => reproduce_constants(),
        Some(step) => {
            let mut rows = Vec::new();
            for scheme in [Scheme::Bfv, Scheme::Axis] {
                for rank in Rank::ALL {
                    let curve = match scheme {
                        Scheme::Bfv => approx_ratio_bfv(rank, step),
                        Scheme::Axis => approx_ratio_axis(rank, step),
                    }?;
                    rows.push(ConstantRow {
                        scheme,
                        rank,
                        step,
                        t_star: curve.minimum.0,
                        gamma_star: curve.minimizing_sign,
                        ratio: curve.minimum.1,
                    });
                }
            }
            rows
        }
    };
    if let Some(dir) = &args.curves {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let step = args.grid_step.unwrap_or(0.01);
        for rank in Rank::ALL {
            let r = rank.get();
            fs::write(
                dir.join(format!("bfv_r{r}.csv")),
                approx_ratio_bfv(rank, step)?.to_csv(),
            )?;
            fs::write(
                dir.join(format!("axis_r{r}.csv")),
                approx_ratio_axis(rank, step)?.to_csv(),
            )?;
        }
    }
    emit(&args.out.out, &to_json(&rows)?)?;
    Ok(0)
}

#[derive(Serialize)]
struct ReductionSidecar {
    mode: prodstate_core::pauli::ReductionMode,
    offset: f64,
    scale: f64,
    eigenvalues: [f64; 3],
    /// Row-major.
    rotation: [[f64; 3]; 3],
    /// Row-major `[re, im]` entries of the single-qubit unitary `U`.
    unitary: [[[f64; 2]; 2]; 2],
}

fn cmd_reduce(args: ReduceArgs) -> Result<u8> {
    let text = fs::read_to_string(&args.input).with_context(|| format!("reading {}", args.input.display()))?;
    let graph = reduce_input::parse(&text).with_context(|| format!("parsing {}", args.input.display()))?;
    let red = reduce_instance(&graph)?;
    emit(&args.out.out, &red.instance.serialize())?;
    let u = red.unitary.matrix();
    let sidecar = ReductionSidecar {
        mode: red.mode,
        offset: red.offset,
        scale: red.scale,
        eigenvalues: red.eigenvalues,
        rotation: std::array::from_fn(|r| std::array::from_fn(|c| red.rotation[(r, c)])),
        unitary: std::array::from_fn(|r| std::array::from_fn(|c| [u[(r, c)].re, u[(r, c)].im])),
    };
    let json = to_json(&sidecar)?;
    match args.sidecar {
        Some(path) => fs::write(&path, json).with_context(|| format!("writing {}", path.display()))?,
        None => eprint!("{json}"),
    }
    Ok(0)
}

fn cmd_pipeline(args: PipelineArgs) -> Result<u8> {
    let inst = load_instance(&args.instance)?;
    let cfg = PipelineConfig {
        scheme: args.scheme.into(),
        trials: args.trials,
        seed: args.seed.seed,
        restarts: args.restarts,
        oracle: args.oracle == Toggle::On,
        ..PipelineConfig::default()
    };
    let report = run_pipeline(&inst, &cfg)?;
    emit(&args.out.out, &to_json(&report)?)?;
    Ok(if report.sdp_converged { 0 } else { EXIT_NOT_CONVERGED })
}

fn exit_code(err: &anyhow::Error) -> u8 {
    let oracle_limit = |e: &OracleError| matches!(e, OracleError::TooLarge { .. });
    for cause in err.chain() {
        if cause.is::<InstanceError>() || cause.is::<reduce_input::InputError>() {
            return EXIT_PARSE;
        }
        if let Some(SdpError::Malformed { .. }) = cause.downcast_ref::<SdpError>() {
            return EXIT_PARSE;
        }
        if cause.downcast_ref::<OracleError>().is_some_and(oracle_limit) {
            return EXIT_ORACLE_LIMIT;
        }
        if let Some(PipelineError::Oracle(e)) = cause.downcast_ref::<PipelineError>() {
            if oracle_limit(e) {
                return EXIT_ORACLE_LIMIT;
            }
        }
    }
    EXIT_FAILURE
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads.max(1))
        .build_global()
    {
        eprintln!("warning: could not configure thread pool: {e}");
    }
    let result = match cli.command {
        Command::Gen(a) => cmd_gen(a),
        Command::Solve(a) => cmd_solve(a),
        Command::Round(a) => cmd_round(a),
        Command::Exact(a) => cmd_exact(a),
        Command::RatioTables(a) => cmd_ratio_tables(a),
        Command::Reduce(a) => cmd_reduce(a),
        Command::Pipeline(a) => cmd_pipeline(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

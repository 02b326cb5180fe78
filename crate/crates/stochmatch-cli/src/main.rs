//! Command-line front end: validate instances, solve the LP relaxations,
//! evaluate the offline benchmarks, simulate the online algorithms, replay
//! the built-in reproduction cases, and aggregate report CSVs.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use stochmatch::error::Error;
use stochmatch::json::parse_instance;
use stochmatch::lp::{
    build_lp_config_with_cap, build_lp_dp, build_lp_dp_non, build_lp_std, build_lp_std_unit,
    solve_lp, star_value_map, LinearProgram,
};
use stochmatch::model::{validate_graph, OfflineSet, OnlineId, StochasticGraph};
use stochmatch::offline::{committal_opt, noncommittal_opt, noncommittal_star_value_map};
use stochmatch::online::{EdgeStates, GCurve, GreedyDpRunner};
use stochmatch::probing::enumeration_cap;
use stochmatch::sim::{
    benchmark_value, monte_carlo_with_records, run_experiment, AlgorithmId, BenchmarkId, EvalMode,
    ExperimentConfig, InstanceSource, OrderModel, CSV_HEADER,
};
use stochmatch::star::dp_opt;

#[derive(Parser)]
#[command(
    name = "stochmatch",
    version,
    about = "Online stochastic matching workbench"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a JSON instance against every structural invariant.
    Validate { instance: PathBuf },
    /// Build and solve one of the LP relaxations.
    SolveLp(SolveLpArgs),
    /// Evaluate an exact offline benchmark.
    Benchmark(BenchmarkArgs),
    /// Run an online algorithm and report its ratio against a benchmark.
    Simulate(SimulateArgs),
    /// Replay a built-in worked example and print pass/fail.
    Reproduce(ReproduceArgs),
    /// Aggregate simulate CSV outputs.
    Report { files: Vec<PathBuf> },
}

#[derive(Args)]
struct SolveLpArgs {
    instance: PathBuf,
    #[arg(long, value_enum)]
    which: LpKind,
    /// Write the program in CPLEX-LP text format to this path.
    #[arg(long)]
    dump_lp: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Args)]
struct BenchmarkArgs {
    instance: PathBuf,
    #[arg(long, value_enum)]
    which: BenchmarkKind,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Args)]
struct SimulateArgs {
    instance: PathBuf,
    #[arg(long, value_enum)]
    alg: AlgKind,
    #[arg(long, value_enum)]
    order: OrderKind,
    /// Arrival sequence for --order explicit, e.g. "v2,v1".
    #[arg(long)]
    explicit_order: Option<String>,
    #[arg(long, default_value_t = 10_000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Mode::MonteCarlo)]
    mode: Mode,
    #[arg(long, value_enum, default_value_t = BenchmarkChoice::Committal)]
    benchmark: BenchmarkChoice,
    /// Override the pass threshold (defaults to the theorem constant for
    /// the algorithm/order pair).
    #[arg(long)]
    threshold: Option<f64>,
    /// Worker threads for Monte Carlo trials (results are independent of
    /// this by the derived-seed contract).
    #[arg(long)]
    threads: Option<usize>,
    /// Append raw run records as JSON lines to this file (sequential).
    #[arg(long)]
    dump_runs: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Omit the CSV header row.
    #[arg(long)]
    no_header: bool,
}

#[derive(Args)]
struct ReproduceArgs {
    #[arg(long, value_enum)]
    case: Case,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum LpKind {
    Config,
    StdUnit,
    Std,
    Dp,
    DpNon,
}

#[derive(Clone, Copy, ValueEnum)]
enum BenchmarkKind {
    Committal,
    Noncommittal,
    Relaxed,
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgKind {
    RomLp,
    GreedyDp,
    GreedyProbe,
}

#[derive(Clone, Copy, ValueEnum)]
enum OrderKind {
    Rom,
    Explicit,
    Worst,
    #[value(alias = "Y")]
    Y,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Mode {
    Exact,
    MonteCarlo,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum BenchmarkChoice {
    Committal,
    Noncommittal,
    LpConfig,
    LpDp,
    LpDpNon,
    LpStdUnit,
    LpStd,
}

impl From<AlgKind> for AlgorithmId {
    fn from(k: AlgKind) -> Self {
        match k {
            AlgKind::RomLp => AlgorithmId::RomLp,
            AlgKind::GreedyDp => AlgorithmId::GreedyDp,
            AlgKind::GreedyProbe => AlgorithmId::GreedyProbe,
        }
    }
}

impl From<BenchmarkChoice> for BenchmarkId {
    fn from(k: BenchmarkChoice) -> Self {
        match k {
            BenchmarkChoice::Committal => BenchmarkId::Committal,
            BenchmarkChoice::Noncommittal => BenchmarkId::NonCommittal,
            BenchmarkChoice::LpConfig => BenchmarkId::LpConfig,
            BenchmarkChoice::LpDp => BenchmarkId::LpDp,
            BenchmarkChoice::LpDpNon => BenchmarkId::LpDpNon,
            BenchmarkChoice::LpStdUnit => BenchmarkId::LpStdUnit,
            BenchmarkChoice::LpStd => BenchmarkId::LpStd,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Case {
    #[value(name = "propA1", alias = "propa1")]
    SeparationStar,
    #[value(name = "example41")]
    AdaptiveFlipStar,
    #[value(name = "footnote1")]
    UniformThirdStar,
    #[value(name = "charging-identity")]
    ChargingIdentity,
}

fn exit_code_for(err: &Error) -> ExitCode {
    match err {
        Error::Truncated { .. } | Error::CapExceeded { .. } => ExitCode::from(2),
        Error::Internal(_) | Error::LpNotOptimal(_) => ExitCode::from(3),
        _ => ExitCode::from(1),
    }
}

fn load_instance(path: &PathBuf) -> Result<StochasticGraph, Error> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Schema {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_instance(&text)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            exit_code_for(&err)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Validate { instance } => {
            let g = load_instance(&instance)?;
            let report = validate_graph(&g);
            if report.is_valid() {
                println!("valid");
                Ok(ExitCode::SUCCESS)
            } else {
                for v in &report.violations {
                    println!("{v}");
                }
                Ok(ExitCode::from(1))
            }
        }
        Command::SolveLp(args) => {
            let g = load_instance(&args.instance)?;
            let (name, lp): (&str, LinearProgram) = match args.which {
                LpKind::Config => (
                    "lp-config",
                    build_lp_config_with_cap(&g, enumeration_cap())?.lp,
                ),
                LpKind::StdUnit => ("lp-std-unit", build_lp_std_unit(&g)?),
                LpKind::Std => ("lp-std", build_lp_std(&g)?),
                LpKind::Dp => ("lp-dp", build_lp_dp(&g, &star_value_map(&g)?)?),
                LpKind::DpNon => (
                    "lp-dp-non",
                    build_lp_dp_non(&g, &noncommittal_star_value_map(&g)?)?,
                ),
            };
            if let Some(path) = &args.dump_lp {
                std::fs::write(path, lp.to_cplex_lp())
                    .map_err(|e| Error::Internal(format!("writing {}: {e}", path.display())))?;
            }
            let sol = solve_lp(&lp)?;
            match args.format {
                Format::Csv => println!("{name},{:?},{:.9}", sol.status, sol.objective_value),
                Format::Json => println!(
                    "{}",
                    serde_json::json!({
                        "lp": name,
                        "status": format!("{:?}", sol.status),
                        "optimum": sol.objective_value,
                        "variables": lp.num_variables(),
                        "rows": lp.rows.len(),
                    })
                ),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Benchmark(args) => {
            let g = load_instance(&args.instance)?;
            let (name, value) = match args.which {
                BenchmarkKind::Committal => ("committal", committal_opt(&g)?),
                BenchmarkKind::Noncommittal => ("noncommittal", noncommittal_opt(&g)?),
                // The relaxed benchmark's value is exactly the optimum of
                // the configuration LP.
                BenchmarkKind::Relaxed => ("relaxed", benchmark_value(&g, BenchmarkId::LpConfig)?),
            };
            match args.format {
                Format::Csv => println!("{name},{value:.9}"),
                Format::Json => println!(
                    "{}",
                    serde_json::json!({ "benchmark": name, "value": value })
                ),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Simulate(args) => simulate(args),
        Command::Reproduce(args) => reproduce(args),
        Command::Report { files } => report(&files),
    }
}

fn parse_explicit_order(g: &StochasticGraph, spec: &str) -> Result<Vec<OnlineId>, Error> {
    spec.split(',')
        .map(|name| g.online_id_by_name(name.trim()))
        .collect()
}

fn simulate(args: SimulateArgs) -> Result<ExitCode, Error> {
    let g = load_instance(&args.instance)?;
    let order_model = match args.order {
        OrderKind::Rom => OrderModel::Rom,
        OrderKind::Worst => OrderModel::WorstCase,
        OrderKind::Y => OrderModel::YTimes,
        OrderKind::Explicit => {
            let spec = args
                .explicit_order
                .as_deref()
                .ok_or_else(|| Error::Schema {
                    path: "--explicit-order".into(),
                    message: "required with --order explicit".into(),
                })?;
            OrderModel::Explicit(parse_explicit_order(&g, spec)?)
        }
    };

    if let Some(threads) = args.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Error::Internal(e.to_string()))?;
    }

    let config = ExperimentConfig {
        instance: InstanceSource::File(args.instance.display().to_string()),
        algorithm: args.alg.into(),
        order_model,
        trials: args.trials,
        seed: args.seed,
        mode: match args.mode {
            Mode::Exact => EvalMode::Exact,
            Mode::MonteCarlo => EvalMode::MonteCarlo,
        },
        benchmark: args.benchmark.into(),
        threshold: args.threshold,
    };

    if let Some(path) = &args.dump_runs {
        if config.mode == EvalMode::MonteCarlo && config.order_model != OrderModel::WorstCase {
            let (_, records) = monte_carlo_with_records(
                config.algorithm,
                &g,
                &config.order_model,
                config.trials,
                config.seed,
            )?;
            let mut file = std::fs::File::create(path)
                .map_err(|e| Error::Internal(format!("creating {}: {e}", path.display())))?;
            for rec in &records {
                writeln!(file, "{}", rec.to_json_line(&g))
                    .map_err(|e| Error::Internal(e.to_string()))?;
            }
        }
    }

    let report = run_experiment(&g, &config)?;
    match args.format {
        Format::Csv => {
            if !args.no_header {
                println!("{CSV_HEADER}");
            }
            println!("{}", report.to_csv_row());
        }
        Format::Json => println!(
            "{}",
            serde_json::to_string(&report).map_err(|e| Error::Internal(e.to_string()))?
        ),
    }
    Ok(ExitCode::SUCCESS)
}

const SEPARATION_STAR: &str = include_str!("../instances/separation_star.json");
const ADAPTIVE_FLIP_STAR: &str = include_str!("../instances/adaptive_flip_star.json");
const UNIFORM_THIRD_STAR: &str = include_str!("../instances/uniform_third_star.json");
const CHARGING_DEMO: &str = include_str!("../instances/charging_demo.json");

fn reproduce(args: ReproduceArgs) -> Result<ExitCode, Error> {
    let pass = match args.case {
        Case::SeparationStar => {
            let g = parse_instance(SEPARATION_STAR)?;
            let committal = committal_opt(&g)?;
            let noncommittal = noncommittal_opt(&g)?;
            let ratio = committal / noncommittal;
            println!("committal       = {committal:.9}  (expected 3.36)");
            println!("noncommittal    = {noncommittal:.9}  (expected 3.924)");
            println!("ratio           = {ratio:.6}  (expected 0.856269)");
            (committal - 3.36).abs() <= 1e-9
                && (noncommittal - 3.924).abs() <= 1e-9
                && (ratio - 0.856269).abs() <= 1e-5
        }
        Case::AdaptiveFlipStar => {
            let g = parse_instance(ADAPTIVE_FLIP_STAR)?;
            let v = OnlineId(0);
            let full = OfflineSet::full(g.offline_count());
            let describe = |policy: &stochmatch::star::StarPolicy| -> String {
                policy
                    .probe_string
                    .edges()
                    .iter()
                    .map(|&e| {
                        let edge = &g.edges()[e.0];
                        format!("({},{})", g.offline_name(edge.u), g.online_name(edge.v))
                    })
                    .collect::<Vec<_>>()
                    .join(" then ")
            };
            let on_full = dp_opt(&g, v, full)?;
            let without_u2 = dp_opt(&g, v, full.without(g.offline_id_by_name("u2")?))?;
            println!(
                "optimal probes on {{u1,u2,u3,u4}} : {}  (value {:.6})",
                describe(&on_full),
                on_full.value
            );
            println!(
                "optimal probes on {{u1,u3,u4}}    : {}  (value {:.6})",
                describe(&without_u2),
                without_u2.value
            );
            describe(&on_full) == "(u1,v) then (u2,v)"
                && describe(&without_u2) == "(u3,v) then (u4,v)"
        }
        Case::UniformThirdStar => {
            let g = parse_instance(UNIFORM_THIRD_STAR)?;
            let committal = committal_opt(&g)?;
            // The same star with unlimited patience may probe everything:
            // its non-committal value is the expected optimum matching,
            // 1 − (1 − 1/3)³ = 19/27.
            let mut relaxed_doc: serde_json::Value = serde_json::from_str(UNIFORM_THIRD_STAR)
                .map_err(|e| Error::Internal(e.to_string()))?;
            relaxed_doc["constraints"]["v"]["l"] = serde_json::json!(3);
            let unlimited = parse_instance(&relaxed_doc.to_string())?;
            let optimum_matching = noncommittal_opt(&unlimited)?;
            let expected = 1.0 - (2.0f64 / 3.0).powi(3);
            println!("probing value (patience 1)   = {committal:.9}  (expected 1/3)");
            println!("E[optimum matching]          = {optimum_matching:.9}  (expected 19/27 = {expected:.9})");
            println!(
                "gap factor                   = {:.6}",
                optimum_matching / committal
            );
            (committal - 1.0 / 3.0).abs() <= 1e-9 && (optimum_matching - expected).abs() <= 1e-9
        }
        Case::ChargingIdentity => {
            let g = parse_instance(CHARGING_DEMO)?;
            let runner = GreedyDpRunner::new(&g);
            let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
            let mut max_gap = 0.0f64;
            let runs = 1000;
            for _ in 0..runs {
                let y: Vec<f64> = (0..g.online_count())
                    .map(|_| rand::Rng::random::<f64>(&mut rng))
                    .collect();
                let record =
                    runner.run_charged(&y, GCurve::ExpRom, EdgeStates::Sample, &mut rng)?;
                let gap = record
                    .charges
                    .as_ref()
                    .expect("charged run carries charges")
                    .identity_gap(record.matching.weight)
                    .abs();
                max_gap = max_gap.max(gap);
            }
            println!("max |w(M) - F·(Σα + Σ OPT(v,R)·φ)| over {runs} runs = {max_gap:.3e}");
            max_gap <= 1e-9
        }
    };
    println!("{}", if pass { "PASS" } else { "FAIL" });
    Ok(if pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn report(files: &[PathBuf]) -> Result<ExitCode, Error> {
    let mut groups: BTreeMap<(String, String, String), (u64, u64, f64)> = BTreeMap::new();
    let mut all_pass = true;
    for path in files {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Schema {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        for line in text.lines() {
            if line.trim().is_empty() || line.starts_with("instance_id") {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 11 {
                return Err(Error::Schema {
                    path: path.display().to_string(),
                    message: format!("expected 11 CSV fields, got {}", fields.len()),
                });
            }
            let key = (
                fields[1].to_string(),
                fields[2].to_string(),
                fields[6].to_string(),
            );
            let ratio: f64 = fields[8].parse().map_err(|_| Error::Schema {
                path: path.display().to_string(),
                message: format!("bad ratio {}", fields[8]),
            })?;
            let pass = fields[10].trim() == "true";
            all_pass &= pass;
            let entry = groups.entry(key).or_insert((0, 0, f64::INFINITY));
            entry.0 += 1;
            entry.1 += pass as u64;
            entry.2 = entry.2.min(ratio);
        }
    }
    println!("algorithm,order_model,benchmark,rows,passes,min_ratio");
    for ((alg, order, bench), (rows, passes, min_ratio)) in &groups {
        println!("{alg},{order},{bench},{rows},{passes},{min_ratio:.9}");
    }
    Ok(if all_pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

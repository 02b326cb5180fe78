//! Experiment harness: exact and Monte Carlo evaluation of the online
//! algorithms, competitive-ratio reports against the offline benchmarks
//! and LP relaxations, reproducible instance generation, and the
//! subgraph/availability statistical checks.
//!
//! Exactness is brute force: every order the model allows, every edge
//! state assignment (weighted by its probability), and every internal
//! string draw of the LP algorithm. Monte Carlo trials derive their seed
//! as `seed ^ trial`, so estimates do not depend on how many worker
//! threads run them.

use std::collections::BTreeMap;
use std::fmt;

use itertools::Itertools;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lp::{
    build_lp_config, build_lp_dp, build_lp_dp_non, build_lp_std, build_lp_std_unit, solve_lp,
    star_value_map, LpStatus,
};
use crate::model::{ConstraintSpec, OnlineId, OnlineSet, StochasticGraph};
use crate::offline::{committal_opt, noncommittal_opt, noncommittal_star_value_map};
use crate::online::{ArrivalOrder, EdgeStates, GreedyDpRunner, RomLpRunner, RunRecord};

/// Compensated summation; the exact evaluators fold millions of terms.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    carry: f64,
}

impl KahanSum {
    pub fn add(&mut self, x: f64) {
        let y = x - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlgorithmId {
    RomLp,
    GreedyDp,
    GreedyProbe,
}

impl fmt::Display for AlgorithmId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            AlgorithmId::RomLp => "rom-lp",
            AlgorithmId::GreedyDp => "greedy-dp",
            AlgorithmId::GreedyProbe => "greedy-probe",
        };
        write!(f, "{s}")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum OrderModel {
    /// Uniformly random permutation (exact mode averages all of them).
    Rom,
    Explicit(Vec<OnlineId>),
    /// Exact minimum over all permutations.
    WorstCase,
    /// Independent uniform arrival times; order-equivalent to `Rom`, kept
    /// separate because the charged runner consumes the times themselves.
    YTimes,
}

impl fmt::Display for OrderModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            OrderModel::Rom => "rom",
            OrderModel::Explicit(_) => "explicit",
            OrderModel::WorstCase => "worst",
            OrderModel::YTimes => "y-times",
        };
        write!(f, "{s}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BenchmarkId {
    Committal,
    NonCommittal,
    LpConfig,
    LpDp,
    LpDpNon,
    LpStdUnit,
    LpStd,
}

impl fmt::Display for BenchmarkId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            BenchmarkId::Committal => "committal",
            BenchmarkId::NonCommittal => "noncommittal",
            BenchmarkId::LpConfig => "lp-config",
            BenchmarkId::LpDp => "lp-dp",
            BenchmarkId::LpDpNon => "lp-dp-non",
            BenchmarkId::LpStdUnit => "lp-std-unit",
            BenchmarkId::LpStd => "lp-std",
        };
        write!(f, "{s}")
    }
}

/// Evaluates a benchmark value exactly.
pub fn benchmark_value(g: &StochasticGraph, id: BenchmarkId) -> Result<f64> {
    let solve = |lp: &crate::lp::LinearProgram| -> Result<f64> {
        let sol = solve_lp(lp)?;
        if sol.status != LpStatus::Optimal {
            return Err(Error::LpNotOptimal(format!("{:?}", sol.status)));
        }
        Ok(sol.objective_value)
    };
    match id {
        BenchmarkId::Committal => committal_opt(g),
        BenchmarkId::NonCommittal => noncommittal_opt(g),
        BenchmarkId::LpConfig => solve(&build_lp_config(g)?.lp),
        BenchmarkId::LpDp => solve(&build_lp_dp(g, &star_value_map(g)?)?),
        BenchmarkId::LpDpNon => solve(&build_lp_dp_non(g, &noncommittal_star_value_map(g)?)?),
        BenchmarkId::LpStdUnit => solve(&build_lp_std_unit(g)?),
        BenchmarkId::LpStd => solve(&build_lp_std(g)?),
    }
}

/// Exact-mode limits: beyond these the enumeration is hopeless anyway.
pub const EXACT_MAX_UNCERTAIN_EDGES: usize = 16;
pub const EXACT_MAX_ONLINE: usize = 6;

/// Edge-state assignments with positive probability: edges with `p = 0`
/// or `p = 1` are pinned, only genuinely uncertain edges branch.
fn state_assignments(g: &StochasticGraph) -> Result<Vec<(u64, f64)>> {
    let uncertain: Vec<usize> = g
        .edges()
        .iter()
        .enumerate()
        .filter(|(_, e)| e.probability > 0.0 && e.probability < 1.0)
        .map(|(i, _)| i)
        .collect();
    if uncertain.len() > EXACT_MAX_UNCERTAIN_EDGES {
        return Err(Error::CapExceeded {
            cap: EXACT_MAX_UNCERTAIN_EDGES,
        });
    }
    let mut base = 0u64;
    for (i, e) in g.edges().iter().enumerate() {
        if e.probability >= 1.0 {
            base |= 1 << i;
        }
    }
    let mut out = Vec::with_capacity(1 << uncertain.len());
    for mask in 0u64..(1 << uncertain.len()) {
        let mut states = base;
        let mut prob = 1.0;
        for (k, &i) in uncertain.iter().enumerate() {
            let p = g.edges()[i].probability;
            if mask >> k & 1 == 1 {
                states |= 1 << i;
                prob *= p;
            } else {
                prob *= 1.0 - p;
            }
        }
        out.push((states, prob));
    }
    Ok(out)
}

fn all_orders(n: usize) -> Vec<ArrivalOrder> {
    (0..n)
        .map(OnlineId)
        .permutations(n)
        .map(ArrivalOrder::Explicit)
        .collect()
}

/// Expected matching weight of the LP algorithm under a fixed order and
/// fixed edge states, branching over its internal string draws.
fn rom_lp_exact_under_states(
    runner: &RomLpRunner,
    g: &StochasticGraph,
    sequence: &[OnlineId],
    states: u64,
) -> Result<f64> {
    fn recurse(
        runner: &RomLpRunner,
        g: &StochasticGraph,
        sequence: &[OnlineId],
        t_index: usize,
        seen: OnlineSet,
        free: crate::model::OfflineSet,
        states: u64,
        threshold: usize,
    ) -> Result<f64> {
        if t_index == sequence.len() {
            return Ok(0.0);
        }
        let v = sequence[t_index];
        let seen = seen.with(v);
        let t = t_index + 1;
        if t < threshold {
            return recurse(
                runner,
                g,
                sequence,
                t_index + 1,
                seen,
                free,
                states,
                threshold,
            );
        }
        let dists = runner.distributions(seen)?;
        let mut total = KahanSum::default();
        for (string, z) in &dists[&v] {
            if *z <= 0.0 {
                continue;
            }
            // Walk the string against the fixed states; the first active
            // edge is the commitment.
            let mut outcome = None;
            for &e in string.edges() {
                if states >> e.0 & 1 == 1 {
                    outcome = Some(e);
                    break;
                }
            }
            let (gain, next_free) = match outcome {
                Some(e) => {
                    let edge = &g.edges()[e.0];
                    if free.contains(edge.u) {
                        (edge.weight, free.without(edge.u))
                    } else {
                        (0.0, free)
                    }
                }
                None => (0.0, free),
            };
            let rest = recurse(
                runner,
                g,
                sequence,
                t_index + 1,
                seen,
                next_free,
                states,
                threshold,
            )?;
            total.add(z * (gain + rest));
        }
        Ok(total.value())
    }

    let threshold = RomLpRunner::pass_threshold(g.online_count());
    recurse(
        runner,
        g,
        sequence,
        0,
        OnlineSet::EMPTY,
        crate::model::OfflineSet::full(g.offline_count()),
        states,
        threshold,
    )
}

/// Exact expected matching weight: sums over every arrival order of the
/// model, every positive-probability edge-state assignment, and (for the
/// LP algorithm) every internal string draw.
pub fn exact_expected_value(
    alg: AlgorithmId,
    g: &StochasticGraph,
    order_model: &OrderModel,
) -> Result<f64> {
    let n = g.online_count();
    if n > EXACT_MAX_ONLINE && !matches!(order_model, OrderModel::Explicit(_)) {
        return Err(Error::CapExceeded {
            cap: EXACT_MAX_ONLINE,
        });
    }
    let orders: Vec<ArrivalOrder> = match order_model {
        OrderModel::Explicit(seq) => vec![ArrivalOrder::Explicit(seq.clone())],
        OrderModel::Rom | OrderModel::YTimes | OrderModel::WorstCase => all_orders(n),
    };
    let per_order: Vec<f64> = orders
        .iter()
        .map(|order| exact_value_for_order(alg, g, order))
        .collect::<Result<_>>()?;
    let value = match order_model {
        OrderModel::WorstCase => per_order.iter().copied().fold(f64::INFINITY, f64::min),
        _ => {
            let mut sum = KahanSum::default();
            for v in &per_order {
                sum.add(*v);
            }
            sum.value() / per_order.len() as f64
        }
    };
    Ok(value)
}

fn exact_value_for_order(
    alg: AlgorithmId,
    g: &StochasticGraph,
    order: &ArrivalOrder,
) -> Result<f64> {
    let assignments = state_assignments(g)?;
    let mut total = KahanSum::default();
    match alg {
        AlgorithmId::GreedyDp => {
            let runner = GreedyDpRunner::new(g);
            let mut rng = ChaCha8Rng::seed_from_u64(0);
            for &(states, prob) in &assignments {
                if prob == 0.0 {
                    continue;
                }
                let (record, _) = runner.run(order, EdgeStates::Fixed(states), &mut rng, None)?;
                total.add(prob * record.matching.weight);
            }
        }
        AlgorithmId::GreedyProbe => {
            let mut rng = ChaCha8Rng::seed_from_u64(0);
            for &(states, prob) in &assignments {
                if prob == 0.0 {
                    continue;
                }
                let record = crate::online::run_greedy_probe_with_states(
                    g,
                    order,
                    EdgeStates::Fixed(states),
                    &mut rng,
                )?;
                total.add(prob * record.matching.weight);
            }
        }
        AlgorithmId::RomLp => {
            let runner = RomLpRunner::new(g);
            let sequence = order.sequence();
            for &(states, prob) in &assignments {
                if prob == 0.0 {
                    continue;
                }
                total.add(prob * rom_lp_exact_under_states(&runner, g, &sequence, states)?);
            }
        }
    }
    Ok(total.value())
}

/// A Monte Carlo estimate: sample mean, standard error, trial count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
    pub trials: u64,
}

fn run_one_trial(
    alg: AlgorithmId,
    g: &StochasticGraph,
    order_model: &OrderModel,
    greedy: &GreedyDpRunner,
    rom: &RomLpRunner,
    seed: u64,
    trial: u64,
) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ trial);
    let n = g.online_count();
    let order = match order_model {
        OrderModel::Rom => ArrivalOrder::rom(n, &mut rng),
        OrderModel::YTimes => ArrivalOrder::uniform_times(n, &mut rng),
        OrderModel::Explicit(seq) => ArrivalOrder::Explicit(seq.clone()),
        OrderModel::WorstCase => {
            return Err(Error::Internal(
                "worst-case order has no sampling form; use exact mode".into(),
            ))
        }
    };
    let record = match alg {
        AlgorithmId::GreedyDp => greedy.run(&order, EdgeStates::Sample, &mut rng, None)?.0,
        AlgorithmId::GreedyProbe => {
            crate::online::run_greedy_probe_with_states(g, &order, EdgeStates::Sample, &mut rng)?
        }
        AlgorithmId::RomLp => rom.run(&order, EdgeStates::Sample, &mut rng)?.0,
    };
    Ok(record.matching.weight)
}

/// Monte Carlo estimate over i.i.d. runs, parallel across trials.
/// Deterministic given `(algorithm, instance, order model, trials, seed)`.
pub fn monte_carlo(
    alg: AlgorithmId,
    g: &StochasticGraph,
    order_model: &OrderModel,
    trials: u64,
    seed: u64,
) -> Result<Estimate> {
    assert!(trials >= 1, "at least one trial");
    let greedy = GreedyDpRunner::new(g);
    let rom = RomLpRunner::new(g);
    if alg == AlgorithmId::RomLp {
        // Warm the LP cache on one thread; afterwards workers only read.
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let order = match order_model {
            OrderModel::Explicit(seq) => ArrivalOrder::Explicit(seq.clone()),
            _ => ArrivalOrder::identity(g.online_count()),
        };
        let _ = rom.run(&order, EdgeStates::Sample, &mut rng)?;
    }
    let weights: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|trial| run_one_trial(alg, g, order_model, &greedy, &rom, seed, trial))
        .collect::<Result<_>>()?;
    Ok(estimate_from_samples(&weights))
}

/// Sequential variant that also returns every run record (for `--dump-runs`).
pub fn monte_carlo_with_records(
    alg: AlgorithmId,
    g: &StochasticGraph,
    order_model: &OrderModel,
    trials: u64,
    seed: u64,
) -> Result<(Estimate, Vec<RunRecord>)> {
    let greedy = GreedyDpRunner::new(g);
    let rom = RomLpRunner::new(g);
    let mut weights = Vec::with_capacity(trials as usize);
    let mut records = Vec::with_capacity(trials as usize);
    for trial in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ trial);
        let n = g.online_count();
        let order = match order_model {
            OrderModel::Rom => ArrivalOrder::rom(n, &mut rng),
            OrderModel::YTimes => ArrivalOrder::uniform_times(n, &mut rng),
            OrderModel::Explicit(seq) => ArrivalOrder::Explicit(seq.clone()),
            OrderModel::WorstCase => {
                return Err(Error::Internal(
                    "worst-case order has no sampling form; use exact mode".into(),
                ))
            }
        };
        let mut record = match alg {
            AlgorithmId::GreedyDp => greedy.run(&order, EdgeStates::Sample, &mut rng, None)?.0,
            AlgorithmId::GreedyProbe => crate::online::run_greedy_probe_with_states(
                g,
                &order,
                EdgeStates::Sample,
                &mut rng,
            )?,
            AlgorithmId::RomLp => rom.run(&order, EdgeStates::Sample, &mut rng)?.0,
        };
        record.seed = Some(seed ^ trial);
        weights.push(record.matching.weight);
        records.push(record);
    }
    Ok((estimate_from_samples(&weights), records))
}

fn estimate_from_samples(samples: &[f64]) -> Estimate {
    let n = samples.len() as f64;
    let mut sum = KahanSum::default();
    for &w in samples {
        sum.add(w);
    }
    let mean = sum.value() / n;
    let mut sq = KahanSum::default();
    for &w in samples {
        sq.add((w - mean) * (w - mean));
    }
    let variance = if samples.len() > 1 {
        sq.value() / (n - 1.0)
    } else {
        0.0
    };
    Estimate {
        mean,
        stderr: (variance / n).sqrt(),
        trials: samples.len() as u64,
    }
}

/// One row of the experiment report: algorithm value against a benchmark,
/// their ratio, and the theorem threshold it is held to.
#[derive(Debug, Clone, serde::Serialize)]
pub struct RatioReport {
    pub instance_id: String,
    pub algorithm: String,
    pub order_model: String,
    pub trials: u64,
    pub value: f64,
    pub stderr: f64,
    pub benchmark: String,
    pub benchmark_value: f64,
    pub ratio: f64,
    pub threshold: f64,
    pub pass: bool,
}

pub const CSV_HEADER: &str =
    "instance_id,algorithm,order_model,trials,value,stderr,benchmark,benchmark_value,ratio,threshold,pass";

impl RatioReport {
    pub fn to_csv_row(&self) -> String {
        format!(
            "{},{},{},{},{:.9},{:.9},{},{:.9},{:.9},{:.9},{}",
            self.instance_id,
            self.algorithm,
            self.order_model,
            self.trials,
            self.value,
            self.stderr,
            self.benchmark,
            self.benchmark_value,
            self.ratio,
            self.threshold,
            self.pass
        )
    }
}

/// Exact minimum over all `|V|!` arrival orders of the expected matching
/// weight, divided by the benchmark.
pub fn worst_order_ratio(
    alg: AlgorithmId,
    g: &StochasticGraph,
    bench: BenchmarkId,
) -> Result<RatioReport> {
    let value = exact_expected_value(alg, g, &OrderModel::WorstCase)?;
    let benchmark = benchmark_value(g, bench)?;
    let threshold = default_threshold(alg, &OrderModel::WorstCase, g.online_count());
    let ratio = value / benchmark;
    Ok(RatioReport {
        instance_id: String::new(),
        algorithm: alg.to_string(),
        order_model: "worst".into(),
        trials: 0,
        value,
        stderr: 0.0,
        benchmark: bench.to_string(),
        benchmark_value: benchmark,
        ratio,
        threshold,
        pass: ratio >= threshold - 1e-9,
    })
}

/// Exact permutation-averaged ratio (`|V| ≤ 6`), or a Monte Carlo
/// estimate for larger instances.
pub fn rom_ratio(
    alg: AlgorithmId,
    g: &StochasticGraph,
    bench: BenchmarkId,
    trials_if_sampled: u64,
    seed: u64,
) -> Result<RatioReport> {
    let exact = g.online_count() <= EXACT_MAX_ONLINE;
    let (value, stderr, trials) = if exact {
        (exact_expected_value(alg, g, &OrderModel::Rom)?, 0.0, 0)
    } else {
        let est = monte_carlo(alg, g, &OrderModel::Rom, trials_if_sampled, seed)?;
        (est.mean, est.stderr, est.trials)
    };
    let benchmark = benchmark_value(g, bench)?;
    let threshold = default_threshold(alg, &OrderModel::Rom, g.online_count());
    let ratio = value / benchmark;
    let slack = if exact {
        1e-9
    } else {
        3.0 * stderr / benchmark
    };
    Ok(RatioReport {
        instance_id: String::new(),
        algorithm: alg.to_string(),
        order_model: "rom".into(),
        trials,
        value,
        stderr,
        benchmark: bench.to_string(),
        benchmark_value: benchmark,
        ratio,
        threshold,
        pass: ratio >= threshold - slack,
    })
}

/// The constant each theorem promises for the algorithm/order pair.
pub fn default_threshold(alg: AlgorithmId, order_model: &OrderModel, n: usize) -> f64 {
    let e = std::f64::consts::E;
    match (alg, order_model) {
        (AlgorithmId::GreedyDp, OrderModel::WorstCase) => 0.5,
        (
            AlgorithmId::GreedyDp | AlgorithmId::GreedyProbe,
            OrderModel::Rom | OrderModel::YTimes,
        ) => 1.0 - 1.0 / e,
        (AlgorithmId::RomLp, OrderModel::Rom | OrderModel::YTimes) => {
            1.0 / e - 1.0 / n.max(1) as f64
        }
        _ => 0.0,
    }
}

/// Where an experiment's instance comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum InstanceSource {
    /// Path to a JSON instance document.
    File(String),
    /// Generated from parameters and the experiment seed.
    Generator(GeneratorParams),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalMode {
    Exact,
    MonteCarlo,
}

/// A fully specified experiment: instance, algorithm, order model,
/// evaluation mode, and the benchmark the value is held against.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub instance: InstanceSource,
    pub algorithm: AlgorithmId,
    pub order_model: OrderModel,
    pub trials: u64,
    pub seed: u64,
    pub mode: EvalMode,
    pub benchmark: BenchmarkId,
    /// Pass threshold; `None` means the theorem constant for the
    /// algorithm/order pair.
    pub threshold: Option<f64>,
}

impl ExperimentConfig {
    pub fn load_instance(&self) -> Result<StochasticGraph> {
        match &self.instance {
            InstanceSource::File(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| Error::Schema {
                    path: path.clone(),
                    message: e.to_string(),
                })?;
                crate::json::parse_instance(&text)
            }
            InstanceSource::Generator(params) => Ok(generate_random_instance(params, self.seed)),
        }
    }

    fn instance_id(&self) -> String {
        match &self.instance {
            InstanceSource::File(path) => std::path::Path::new(path)
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| path.clone()),
            InstanceSource::Generator(_) => format!("generated-{}", self.seed),
        }
    }
}

/// Runs one experiment end to end and assembles its report row. Exact
/// mode (forced for the worst-case order model) carries a 1e-9 slack;
/// Monte Carlo carries 3 standard errors.
pub fn run_experiment(g: &StochasticGraph, config: &ExperimentConfig) -> Result<RatioReport> {
    let exact = config.mode == EvalMode::Exact || config.order_model == OrderModel::WorstCase;
    let (value, stderr, trials) = if exact {
        (
            exact_expected_value(config.algorithm, g, &config.order_model)?,
            0.0,
            0,
        )
    } else {
        let est = monte_carlo(
            config.algorithm,
            g,
            &config.order_model,
            config.trials,
            config.seed,
        )?;
        (est.mean, est.stderr, est.trials)
    };
    let benchmark = benchmark_value(g, config.benchmark)?;
    let threshold = config.threshold.unwrap_or_else(|| {
        default_threshold(config.algorithm, &config.order_model, g.online_count())
    });
    let ratio = value / benchmark;
    let slack = if exact {
        1e-9
    } else {
        3.0 * stderr / benchmark
    };
    Ok(RatioReport {
        instance_id: config.instance_id(),
        algorithm: config.algorithm.to_string(),
        order_model: config.order_model.to_string(),
        trials,
        value,
        stderr,
        benchmark: config.benchmark.to_string(),
        benchmark_value: benchmark,
        ratio,
        threshold,
        pass: ratio >= threshold - slack,
    })
}

/// How edge probabilities are drawn.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProbabilityRegime {
    Uniform {
        lo: f64,
        hi: f64,
    },
    /// Uniform on `(0, 1/|U|]`; the regime where the asymptotic theory
    /// lives.
    Vanishing,
}

/// Knobs for the reproducible instance generator.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorParams {
    pub offline_range: (usize, usize),
    pub online_range: (usize, usize),
    /// Probability that each (u, v) pair carries an edge; every online
    /// vertex is given at least one edge so ratio denominators stay
    /// meaningful.
    pub edge_density: f64,
    pub patience_range: (usize, usize),
    pub weight_range: (f64, f64),
    pub probabilities: ProbabilityRegime,
    pub vertex_weighted: bool,
    /// Sort each arrival's probabilities to agree with the offline weight
    /// order, which makes every vertex rankable.
    pub align_probabilities_to_weights: bool,
}

impl Default for GeneratorParams {
    fn default() -> Self {
        GeneratorParams {
            offline_range: (2, 3),
            online_range: (2, 3),
            edge_density: 0.8,
            patience_range: (1, 2),
            weight_range: (0.1, 4.0),
            probabilities: ProbabilityRegime::Uniform { lo: 0.05, hi: 0.95 },
            vertex_weighted: true,
            align_probabilities_to_weights: false,
        }
    }
}

/// Deterministically generates an instance from the parameters and seed.
pub fn generate_random_instance(params: &GeneratorParams, seed: u64) -> StochasticGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nu = rng.random_range(params.offline_range.0..=params.offline_range.1);
    let nv = rng.random_range(params.online_range.0..=params.online_range.1);
    let offline: Vec<String> = (0..nu).map(|i| format!("u{}", i + 1)).collect();
    let online: Vec<String> = (0..nv).map(|i| format!("v{}", i + 1)).collect();
    let weights: Vec<f64> = (0..nu)
        .map(|_| rng.random_range(params.weight_range.0..=params.weight_range.1))
        .collect();
    let draw_p = |rng: &mut ChaCha8Rng| match params.probabilities {
        ProbabilityRegime::Uniform { lo, hi } => rng.random_range(lo..=hi).clamp(0.0, 1.0),
        ProbabilityRegime::Vanishing => rng.random_range(0.0..=1.0) / nu as f64,
    };

    let mut pairs: Vec<Vec<usize>> = vec![Vec::new(); nv];
    for (v, chosen) in pairs.iter_mut().enumerate() {
        for u in 0..nu {
            if rng.random_bool(params.edge_density) {
                chosen.push(u);
            }
        }
        let _ = v;
        if chosen.is_empty() {
            chosen.push(rng.random_range(0..nu));
        }
    }

    let mut edges_with_p: Vec<(usize, usize, f64)> = Vec::new();
    for (v, chosen) in pairs.iter().enumerate() {
        let mut ps: Vec<f64> = chosen.iter().map(|_| draw_p(&mut rng)).collect();
        if params.align_probabilities_to_weights {
            // Assign the sorted probabilities along the weight order of the
            // endpoints, so heavier offline vertices get larger values.
            let mut order: Vec<usize> = (0..chosen.len()).collect();
            order.sort_by(|&a, &b| weights[chosen[a]].partial_cmp(&weights[chosen[b]]).unwrap());
            ps.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let mut assigned = vec![0.0; chosen.len()];
            for (rank, &idx) in order.iter().enumerate() {
                assigned[idx] = ps[rank];
            }
            ps = assigned;
        }
        for (k, &u) in chosen.iter().enumerate() {
            edges_with_p.push((u, v, ps[k]));
        }
    }

    let constraints: Vec<ConstraintSpec> = (0..nv)
        .map(|_| {
            ConstraintSpec::Patience(
                rng.random_range(params.patience_range.0..=params.patience_range.1),
            )
        })
        .collect();

    if params.vertex_weighted {
        StochasticGraph::vertex_weighted(offline, online, weights, edges_with_p, constraints)
            .expect("generator produces structurally valid graphs")
    } else {
        let edges = edges_with_p
            .into_iter()
            .map(|(u, v, p)| {
                let w = rng.random_range(params.weight_range.0..=params.weight_range.1);
                (u, v, p, w)
            })
            .collect();
        StochasticGraph::edge_weighted(offline, online, edges, constraints)
            .expect("generator produces structurally valid graphs")
    }
}

/// Result of the random-subset LP inequality check: the sampled mean of
/// `LPOPT(G_t)` over uniform `t`-subsets must reach `(t/n)·LPOPT(G)`
/// within the stated slack.
#[derive(Debug, Clone)]
pub struct SubgraphLemmaReport {
    pub t: usize,
    pub n: usize,
    pub sampled_mean: f64,
    pub stderr: f64,
    pub bound: f64,
    pub pass: bool,
}

pub fn subgraph_lemma_check(
    g: &StochasticGraph,
    t: usize,
    samples: u64,
    seed: u64,
) -> Result<SubgraphLemmaReport> {
    let n = g.online_count();
    if t > n {
        return Err(Error::Internal(format!("t = {t} exceeds n = {n}")));
    }
    let full = benchmark_value(g, BenchmarkId::LpConfig)?;
    let bound = t as f64 / n as f64 * full;
    if t == 0 {
        return Ok(SubgraphLemmaReport {
            t,
            n,
            sampled_mean: 0.0,
            stderr: 0.0,
            bound,
            pass: true,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cache: BTreeMap<OnlineSet, f64> = BTreeMap::new();
    let mut values = Vec::with_capacity(samples as usize);
    let ids: Vec<OnlineId> = (0..n).map(OnlineId).collect();
    for _ in 0..samples {
        let subset: OnlineSet = ids.choose_multiple(&mut rng, t).copied().collect();
        let value = match cache.get(&subset) {
            Some(&v) => v,
            None => {
                let (sub, _) = g.induced_on_online_subset(subset)?;
                let v = benchmark_value(&sub, BenchmarkId::LpConfig)?;
                cache.insert(subset, v);
                v
            }
        };
        values.push(value);
    }
    let est = estimate_from_samples(&values);
    Ok(SubgraphLemmaReport {
        t,
        n,
        sampled_mean: est.mean,
        stderr: est.stderr,
        bound,
        pass: est.mean >= bound - 3.0 * est.stderr,
    })
}

/// Per-arrival availability of the committed offline endpoint under the
/// LP algorithm, against the `(t₀ − 1)/(t − 1)` bound, where `t₀` is the
/// first processed arrival.
///
/// With processing starting at `t₀`, telescoping the per-arrival commit
/// bound `P[commit to u at position j] ≤ 1/j` gives
/// `P[u free at t] ≥ ∏_{j=t₀}^{t−1} (1 − 1/j) = (t₀ − 1)/(t − 1)`.
/// When probing starts at `⌈n/e⌉` this is the familiar `⌊n/e⌋/(t−1)`;
/// the implemented pass rule `t < ⌊n/e⌋` starts one arrival earlier, and
/// the bound here follows the implementation.
#[derive(Debug, Clone)]
pub struct AvailabilityRow {
    pub t: usize,
    pub bound: f64,
    pub commits: u64,
    pub available: u64,
    pub frequency: f64,
    pub sigma: f64,
    pub pass: bool,
    /// `t = 1` has an undefined bound; rows without commits carry no data.
    pub vacuous: bool,
}

#[derive(Debug, Clone, Default)]
pub struct AvailabilityProfile {
    pub rows: Vec<AvailabilityRow>,
}

impl AvailabilityProfile {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.vacuous || r.pass)
    }
}

pub fn availability_profile(
    g: &StochasticGraph,
    trials: u64,
    seed: u64,
) -> Result<AvailabilityProfile> {
    let n = g.online_count();
    let t_start = RomLpRunner::pass_threshold(n).max(1);
    if n == 0 || t_start > n {
        return Ok(AvailabilityProfile::default());
    }
    let runner = RomLpRunner::new(g);
    let mut commits = vec![0u64; n + 1];
    let mut available = vec![0u64; n + 1];
    for trial in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ trial);
        let order = ArrivalOrder::rom(n, &mut rng);
        let (_, arrivals) = runner.run(&order, EdgeStates::Sample, &mut rng)?;
        for (idx, info) in arrivals.iter().enumerate() {
            let t = idx + 1;
            if t < t_start {
                continue;
            }
            if info.committed.is_some() {
                commits[t] += 1;
                if info.matched.is_some() {
                    available[t] += 1;
                }
            }
        }
    }
    let mut rows = Vec::new();
    for t in t_start..=n {
        let vacuous = t == 1 || commits[t] == 0;
        let bound = if t > 1 {
            (t_start - 1) as f64 / (t - 1) as f64
        } else {
            f64::INFINITY
        };
        let frequency = if commits[t] > 0 {
            available[t] as f64 / commits[t] as f64
        } else {
            0.0
        };
        let sigma = if commits[t] > 0 {
            (frequency * (1.0 - frequency) / commits[t] as f64).sqrt()
        } else {
            0.0
        };
        rows.push(AvailabilityRow {
            t,
            bound,
            commits: commits[t],
            available: available[t],
            frequency,
            sigma,
            pass: vacuous || frequency >= bound - 3.0 * sigma,
            vacuous,
        });
    }
    Ok(AvailabilityProfile { rows })
}

//! The online probing algorithms and their instrumented runners.
//!
//! Three algorithms are implemented:
//!
//! * the ROM configuration-LP algorithm for edge weights (pass on the
//!   first `⌊n/e⌋` arrivals, then draw a probe string from the LP of the
//!   currently known induced subgraph);
//! * greedy star probing for vertex weights (probe each arrival with the
//!   optimal single-vertex policy against the unmatched offline set);
//! * its unit-patience special case, which probes the best `w·p` edge.
//!
//! Runners can draw edge states lazily from an RNG or replay a fixed
//! state assignment, which is what exact enumeration and coupled
//! executions need. The charged variant additionally splits every matched
//! weight into offline (α) and subset (φ) dual charges.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex};

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lp::{build_lp_config_with_cap, solve_lp, LpStatus};
use crate::model::{
    EdgeId, Matching, OfflineId, OfflineSet, OnlineId, OnlineSet, ProbeString, StochasticGraph,
};
use crate::probing::enumeration_cap;
use crate::star::{dp_opt, StarPolicy};

/// How the online vertices arrive.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum ArrivalOrder {
    /// Explicit permutation of the online vertices.
    Explicit(Vec<OnlineId>),
    /// Continuous arrival times `Y_v ∈ [0,1]`, processed ascending.
    Times(Vec<f64>),
}

impl ArrivalOrder {
    pub fn identity(n: usize) -> Self {
        ArrivalOrder::Explicit((0..n).map(OnlineId).collect())
    }

    /// Uniformly random permutation.
    pub fn rom<R: Rng>(n: usize, rng: &mut R) -> Self {
        use rand::seq::SliceRandom;
        let mut ids: Vec<OnlineId> = (0..n).map(OnlineId).collect();
        ids.shuffle(rng);
        ArrivalOrder::Explicit(ids)
    }

    /// Independent uniform arrival times; ties are re-drawn so the sort is
    /// total (a measure-zero event, but it keeps everything deterministic).
    pub fn uniform_times<R: Rng>(n: usize, rng: &mut R) -> Self {
        loop {
            let y: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
            let mut sorted = y.clone();
            sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
            if sorted.windows(2).all(|w| w[0] != w[1]) {
                return ArrivalOrder::Times(y);
            }
        }
    }

    /// The processing sequence.
    pub fn sequence(&self) -> Vec<OnlineId> {
        match self {
            ArrivalOrder::Explicit(ids) => ids.clone(),
            ArrivalOrder::Times(y) => {
                let mut ids: Vec<OnlineId> = (0..y.len()).map(OnlineId).collect();
                ids.sort_by(|a, b| y[a.0].partial_cmp(&y[b.0]).unwrap().then(a.0.cmp(&b.0)));
                ids
            }
        }
    }

    fn check(&self, n: usize) -> Result<()> {
        match self {
            ArrivalOrder::Explicit(ids) => {
                let mut seen = vec![false; n];
                if ids.len() != n {
                    return Err(Error::Internal(format!(
                        "order has {} entries for {n} vertices",
                        ids.len()
                    )));
                }
                for v in ids {
                    if v.0 >= n || seen[v.0] {
                        return Err(Error::Internal(format!(
                            "order is not a permutation at {v}"
                        )));
                    }
                    seen[v.0] = true;
                }
                Ok(())
            }
            ArrivalOrder::Times(y) => {
                if y.len() != n {
                    return Err(Error::Internal(format!(
                        "{} arrival times for {n} vertices",
                        y.len()
                    )));
                }
                Ok(())
            }
        }
    }
}

/// Where probe outcomes come from.
#[derive(Debug, Clone, Copy)]
pub enum EdgeStates {
    /// Draw each probed edge's state as an independent Bernoulli.
    Sample,
    /// Replay a fixed assignment (bit `i` is the state of edge `i`).
    Fixed(u64),
}

impl EdgeStates {
    fn probe<R: Rng>(&self, g: &StochasticGraph, e: EdgeId, rng: &mut R) -> bool {
        match self {
            EdgeStates::Sample => rng.random::<f64>() < g.edges()[e.0].probability,
            EdgeStates::Fixed(mask) => mask >> e.0 & 1 == 1,
        }
    }
}

/// The dual-charge curve used by the charged runner.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum GCurve {
    /// `g(z) = exp(z − 1)`, `F = 1 − 1/e` (random-order analysis).
    ExpRom,
    /// `g ≡ 1/2`, `F = 1/2` (adversarial-order analysis).
    ConstHalf,
}

impl GCurve {
    pub fn g(&self, z: f64) -> f64 {
        match self {
            GCurve::ExpRom => (z - 1.0).exp(),
            GCurve::ConstHalf => 0.5,
        }
    }

    pub fn normalization(&self) -> f64 {
        match self {
            GCurve::ExpRom => 1.0 - (-1.0f64).exp(),
            GCurve::ConstHalf => 0.5,
        }
    }
}

/// Per-match dual charges. Each offline vertex and each `(v, R)` pair is
/// charged at most once per run; `charged_star_values` keeps the
/// `OPT(v, R)` value for every charged pair so the pathwise identity
/// `w(M) = F·(Σα + Σ OPT(v,R)·φ)` can be checked from the record alone.
#[derive(Debug, Clone, PartialEq)]
pub struct DualCharges {
    pub alpha: BTreeMap<OfflineId, f64>,
    pub phi: BTreeMap<(OnlineId, OfflineSet), f64>,
    pub normalization: f64,
    pub curve: GCurve,
    pub charged_star_values: BTreeMap<(OnlineId, OfflineSet), f64>,
}

impl DualCharges {
    fn new(curve: GCurve) -> Self {
        DualCharges {
            alpha: BTreeMap::new(),
            phi: BTreeMap::new(),
            normalization: curve.normalization(),
            curve,
            charged_star_values: BTreeMap::new(),
        }
    }

    /// `w(M) − F·(Σ α + Σ OPT(v,R)·φ)`, zero (to rounding) on every run.
    pub fn identity_gap(&self, matching_weight: f64) -> f64 {
        let alpha_sum: f64 = self.alpha.values().sum();
        let phi_sum: f64 = self
            .phi
            .iter()
            .map(|(key, phi)| self.charged_star_values[key] * phi)
            .sum();
        matching_weight - self.normalization * (alpha_sum + phi_sum)
    }
}

/// One simulated execution.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub order: ArrivalOrder,
    pub seed: Option<u64>,
    /// Probes in chronological order with their revealed states.
    pub probes: Vec<(EdgeId, bool)>,
    pub matching: Matching,
    pub charges: Option<DualCharges>,
}

impl RunRecord {
    /// Serializes to a single JSON line with vertex names resolved.
    pub fn to_json_line(&self, g: &StochasticGraph) -> String {
        let edge_name = |e: EdgeId| {
            let edge = &g.edges()[e.0];
            serde_json::json!([g.offline_name(edge.u), g.online_name(edge.v)])
        };
        let order = match &self.order {
            ArrivalOrder::Explicit(ids) => serde_json::json!({
                "kind": "explicit",
                "sequence": ids.iter().map(|&v| g.online_name(v)).collect::<Vec<_>>(),
            }),
            ArrivalOrder::Times(y) => serde_json::json!({ "kind": "times", "y": y }),
        };
        let charges = self.charges.as_ref().map(|c| {
            serde_json::json!({
                "curve": match c.curve { GCurve::ExpRom => "exp(z-1)", GCurve::ConstHalf => "1/2" },
                "F": c.normalization,
                "alpha": c.alpha.iter().map(|(u, a)| (g.offline_name(*u).to_string(), a)).collect::<BTreeMap<_, _>>(),
                "phi": c.phi.iter().map(|((v, r), val)| {
                    serde_json::json!({
                        "v": g.online_name(*v),
                        "R": r.iter().map(|u| g.offline_name(u)).collect::<Vec<_>>(),
                        "charge": val,
                        "opt": c.charged_star_values[&(*v, *r)],
                    })
                }).collect::<Vec<_>>(),
            })
        });
        let doc = serde_json::json!({
            "order": order,
            "seed": self.seed,
            "probes": self.probes.iter().map(|(e, st)| serde_json::json!([edge_name(*e), st])).collect::<Vec<_>>(),
            "matching": {
                "edges": self.matching.edges.iter().map(|&e| edge_name(e)).collect::<Vec<_>>(),
                "weight": self.matching.weight,
            },
            "charges": charges,
        });
        doc.to_string()
    }
}

/// Replays a run record against the graph and lists every violated
/// execution invariant: per-vertex probe strings must be feasible, the
/// matching must consist of active probes, and commitment must hold (the
/// first active probe with both endpoints free is matched).
pub fn validate_run_record(g: &StochasticGraph, rec: &RunRecord) -> Vec<String> {
    let mut violations = Vec::new();
    let mut histories: Vec<Vec<EdgeId>> = vec![Vec::new(); g.online_count()];
    let mut active: Vec<EdgeId> = Vec::new();
    let mut matched_u = OfflineSet::EMPTY;
    let mut matched_v = OnlineSet::EMPTY;
    for &(e, st) in &rec.probes {
        let Ok(edge) = g.edge(e) else {
            violations.push(format!("probe of unknown edge {e}"));
            continue;
        };
        histories[edge.v.0].push(e);
        if !g.constraint(edge.v).is_member(&histories[edge.v.0]) {
            violations.push(format!(
                "probes of {} leave its constraint after {e}",
                g.online_name(edge.v)
            ));
        }
        if st {
            active.push(e);
            let both_free = !matched_u.contains(edge.u) && !matched_v.contains(edge.v);
            let in_matching = rec.matching.edges.contains(&e);
            if both_free && !in_matching {
                violations.push(format!(
                    "commitment violated: active probe {e} with free endpoints is unmatched"
                ));
            }
            if in_matching {
                if !both_free {
                    violations.push(format!("matched edge {e} had a taken endpoint"));
                }
                matched_u = matched_u.with(edge.u);
                matched_v = matched_v.with(edge.v);
            }
        } else if rec.matching.edges.contains(&e) {
            violations.push(format!("matching contains inactive probe {e}"));
        }
    }
    for &e in &rec.matching.edges {
        if !active.contains(&e) {
            violations.push(format!("matching contains unprobed edge {e}"));
        }
    }
    let recomputed: f64 = rec
        .matching
        .edges
        .iter()
        .map(|&e| g.edges()[e.0].weight)
        .sum();
    if (recomputed - rec.matching.weight).abs() > 1e-12 * recomputed.abs().max(1.0) {
        violations.push(format!(
            "matching weight {} != recomputed {recomputed}",
            rec.matching.weight
        ));
    }
    violations
}

/// Draws a probe string from the distribution and probes it in order,
/// returning the first active edge. The caller decides what "commit"
/// means for its matching.
pub fn vertex_probe<R: Rng>(
    g: &StochasticGraph,
    v: OnlineId,
    distribution: &[(ProbeString, f64)],
    rng: &mut R,
) -> Result<Option<EdgeId>> {
    vertex_probe_with_states(g, v, distribution, EdgeStates::Sample, rng).map(|(e, _)| e)
}

/// As [`vertex_probe`], with an explicit state source; also returns the
/// probes made.
pub fn vertex_probe_with_states<R: Rng>(
    g: &StochasticGraph,
    v: OnlineId,
    distribution: &[(ProbeString, f64)],
    states: EdgeStates,
    rng: &mut R,
) -> Result<(Option<EdgeId>, Vec<(EdgeId, bool)>)> {
    let tolerance = 1e-9;
    let total: f64 = distribution.iter().map(|(_, z)| z).sum();
    if (total - 1.0).abs() > tolerance {
        return Err(Error::InvalidDistribution {
            sum: total,
            tolerance,
        });
    }
    for (s, z) in distribution {
        if *z < -1e-12 {
            return Err(Error::InvalidDistribution { sum: *z, tolerance });
        }
        debug_assert!(
            g.membership(v, s).unwrap_or(false),
            "distribution string outside the constraint"
        );
    }

    let draw: f64 = rng.random();
    let mut cumulative = 0.0;
    let mut chosen: Option<&ProbeString> = None;
    for (s, z) in distribution {
        cumulative += z.max(0.0);
        if draw < cumulative {
            chosen = Some(s);
            break;
        }
    }
    let chosen = match chosen {
        Some(s) => s,
        // Rounding left a sliver of unassigned mass; fall back to the last
        // positive entry.
        None => match distribution.iter().rev().find(|(_, z)| *z > 0.0) {
            Some((s, _)) => s,
            None => return Ok((None, Vec::new())),
        },
    };

    let mut probes = Vec::new();
    for &e in chosen.edges() {
        let st = states.probe(g, e, rng);
        probes.push((e, st));
        if st {
            return Ok((Some(e), probes));
        }
    }
    Ok((None, probes))
}

/// What happened at one arrival; the instrumented runners return these
/// alongside the plain record.
#[derive(Debug, Clone)]
pub struct ArrivalInfo {
    pub vertex: OnlineId,
    /// Unmatched offline vertices when the arrival started probing.
    pub free_before: OfflineSet,
    /// Unmatched offline vertices right after the arrival finished.
    pub free_after: OfflineSet,
    /// The edge this arrival committed to (its first active probe), if any.
    pub committed: Option<EdgeId>,
    /// Whether the committed edge's offline endpoint was still free.
    pub matched: Option<EdgeId>,
}

/// Greedy star-probing runner with a per-instance policy cache. The cache
/// is keyed by `(vertex, free set)` behind a mutex, so repeated Monte
/// Carlo trials — including parallel ones — reuse the dynamic programs.
pub struct GreedyDpRunner<'g> {
    g: &'g StochasticGraph,
    cache: Mutex<HashMap<(OnlineId, OfflineSet), Arc<StarPolicy>>>,
}

impl<'g> GreedyDpRunner<'g> {
    pub fn new(g: &'g StochasticGraph) -> Self {
        GreedyDpRunner {
            g,
            cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn policy(&self, v: OnlineId, r: OfflineSet) -> Result<Arc<StarPolicy>> {
        if let Some(p) = self.cache.lock().unwrap().get(&(v, r)) {
            return Ok(p.clone());
        }
        let policy = Arc::new(dp_opt(self.g, v, r)?);
        self.cache.lock().unwrap().insert((v, r), policy.clone());
        Ok(policy)
    }

    pub fn run<R: Rng>(
        &self,
        order: &ArrivalOrder,
        states: EdgeStates,
        rng: &mut R,
        skip: Option<OnlineId>,
    ) -> Result<(RunRecord, Vec<ArrivalInfo>)> {
        order.check(self.g.online_count())?;
        let mut free = OfflineSet::full(self.g.offline_count());
        let mut probes = Vec::new();
        let mut matched = std::collections::BTreeSet::new();
        let mut arrivals = Vec::new();
        for v in order.sequence() {
            if Some(v) == skip {
                continue;
            }
            let policy = self.policy(v, free)?;
            let free_before = free;
            let mut committed = None;
            for &e in policy.probe_string.edges() {
                let st = states.probe(self.g, e, rng);
                probes.push((e, st));
                if st {
                    committed = Some(e);
                    // Both endpoints are free by construction: the policy
                    // only probes edges into the free set.
                    matched.insert(e);
                    free = free.without(self.g.edges()[e.0].u);
                    break;
                }
            }
            arrivals.push(ArrivalInfo {
                vertex: v,
                free_before,
                free_after: free,
                committed,
                matched: committed,
            });
        }
        let matching = Matching::from_edges(self.g, matched)?;
        Ok((
            RunRecord {
                order: order.clone(),
                seed: None,
                probes,
                matching,
                charges: None,
            },
            arrivals,
        ))
    }

    /// Runs in ascending order of the arrival times `y` and splits every
    /// matched weight `w_u` into dual charges along the curve:
    /// `w_u·(1 − g(Y_v))/F` to `α_u` and `w_u·g(Y_v)/(F·OPT(v,R))` to
    /// `φ_{v,R}`, where `R` is the free set at the arrival.
    pub fn run_charged<R: Rng>(
        &self,
        y: &[f64],
        curve: GCurve,
        states: EdgeStates,
        rng: &mut R,
    ) -> Result<RunRecord> {
        let order = ArrivalOrder::Times(y.to_vec());
        let (mut record, arrivals) = self.run(&order, states, rng, None)?;
        let f = curve.normalization();
        let mut charges = DualCharges::new(curve);
        for info in &arrivals {
            let Some(e) = info.matched else { continue };
            let edge = &self.g.edges()[e.0];
            let weight = edge.weight;
            let y_v = y[info.vertex.0];
            let gz = curve.g(y_v);
            *charges.alpha.entry(edge.u).or_insert(0.0) += weight * (1.0 - gz) / f;
            let key = (info.vertex, info.free_before);
            let opt = self.policy(info.vertex, info.free_before)?.value;
            let phi = if weight > 0.0 {
                if opt <= 0.0 {
                    return Err(Error::Internal(format!(
                        "matched weight {weight} at {} with OPT(v,R) = {opt}",
                        info.vertex
                    )));
                }
                weight * gz / (f * opt)
            } else {
                0.0
            };
            *charges.phi.entry(key).or_insert(0.0) += phi;
            charges.charged_star_values.insert(key, opt);
        }
        record.charges = Some(charges);
        Ok(record)
    }
}

/// Runs the greedy star-probing algorithm: each arrival probes the
/// optimal policy for the currently unmatched offline set and commits to
/// its first active edge.
pub fn run_greedy_dp<R: Rng>(
    g: &StochasticGraph,
    order: &ArrivalOrder,
    rng: &mut R,
) -> Result<RunRecord> {
    Ok(GreedyDpRunner::new(g)
        .run(order, EdgeStates::Sample, rng, None)?
        .0)
}

/// Unit-patience special case: probe the free edge maximizing `w·p`
/// (ties: larger weight, then smaller edge id — the same order the star
/// recursion uses, so the traces coincide).
pub fn run_greedy_probe<R: Rng>(
    g: &StochasticGraph,
    order: &ArrivalOrder,
    rng: &mut R,
) -> Result<RunRecord> {
    run_greedy_probe_with_states(g, order, EdgeStates::Sample, rng)
}

pub fn run_greedy_probe_with_states<R: Rng>(
    g: &StochasticGraph,
    order: &ArrivalOrder,
    states: EdgeStates,
    rng: &mut R,
) -> Result<RunRecord> {
    for v in g.online_ids() {
        match g.constraint(v) {
            crate::model::ConstraintSpec::Patience(1) => {}
            _ => {
                return Err(Error::NonUnitPatience {
                    vertex: g.online_name(v).into(),
                })
            }
        }
    }
    order.check(g.online_count())?;
    let mut free = OfflineSet::full(g.offline_count());
    let mut probes = Vec::new();
    let mut matched = std::collections::BTreeSet::new();
    for v in order.sequence() {
        let best = g
            .incident_edges(v)
            .iter()
            .copied()
            .filter(|&e| free.contains(g.edges()[e.0].u))
            .max_by(|&a, &b| {
                let (ea, eb) = (&g.edges()[a.0], &g.edges()[b.0]);
                let (va, vb) = (ea.weight * ea.probability, eb.weight * eb.probability);
                va.partial_cmp(&vb)
                    .unwrap()
                    .then(ea.weight.partial_cmp(&eb.weight).unwrap())
                    .then(b.cmp(&a))
            });
        if let Some(e) = best {
            let st = states.probe(g, e, rng);
            probes.push((e, st));
            if st {
                matched.insert(e);
                free = free.without(g.edges()[e.0].u);
            }
        }
    }
    let matching = Matching::from_edges(g, matched)?;
    Ok(RunRecord {
        order: order.clone(),
        seed: None,
        probes,
        matching,
        charges: None,
    })
}

/// Per-vertex probe-string distributions extracted from a solved
/// configuration LP of an induced subgraph, with edge ids mapped back to
/// the parent graph.
pub type SubsetDistributions = HashMap<OnlineId, Vec<(ProbeString, f64)>>;

/// Runner for the unknown-graph ROM algorithm. LP solutions are memoized
/// per online subset: the program for `G_t` depends only on *which*
/// vertices have arrived, so Monte Carlo trials — including parallel ones
/// — share solves. The solver is deterministic, making this
/// indistinguishable from re-solving at every arrival.
pub struct RomLpRunner<'g> {
    g: &'g StochasticGraph,
    cap: usize,
    cache: Mutex<HashMap<OnlineSet, Arc<SubsetDistributions>>>,
}

impl<'g> RomLpRunner<'g> {
    pub fn new(g: &'g StochasticGraph) -> Self {
        Self::with_cap(g, enumeration_cap())
    }

    pub fn with_cap(g: &'g StochasticGraph, cap: usize) -> Self {
        RomLpRunner {
            g,
            cap,
            cache: Mutex::new(HashMap::new()),
        }
    }

    /// Number of leading arrivals passed over: `t < ⌊n/e⌋` (1-based).
    pub fn pass_threshold(n: usize) -> usize {
        (n as f64 / std::f64::consts::E).floor() as usize
    }

    pub fn distributions(&self, subset: OnlineSet) -> Result<Arc<SubsetDistributions>> {
        if let Some(d) = self.cache.lock().unwrap().get(&subset) {
            return Ok(d.clone());
        }
        let (sub, maps) = self.g.induced_on_online_subset(subset)?;
        let config = build_lp_config_with_cap(&sub, self.cap)?;
        let sol = solve_lp(&config.lp)?;
        if sol.status != LpStatus::Optimal {
            return Err(Error::LpNotOptimal(format!("{:?}", sol.status)));
        }
        let mut dists: SubsetDistributions = HashMap::new();
        for sub_v in sub.online_ids() {
            let parent_v = maps.online[sub_v.0];
            let dist = config
                .distribution(sub_v, &sol)
                .into_iter()
                .map(|(s, z)| {
                    let parent_edges: Vec<EdgeId> =
                        s.edges().iter().map(|e| maps.edges[e.0]).collect();
                    Ok((ProbeString::new(parent_edges)?, z))
                })
                .collect::<Result<Vec<_>>>()?;
            dists.insert(parent_v, dist);
        }
        let arc = Arc::new(dists);
        self.cache.lock().unwrap().insert(subset, arc.clone());
        Ok(arc)
    }

    pub fn run<R: Rng>(
        &self,
        order: &ArrivalOrder,
        states: EdgeStates,
        rng: &mut R,
    ) -> Result<(RunRecord, Vec<ArrivalInfo>)> {
        let n = self.g.online_count();
        order.check(n)?;
        let threshold = Self::pass_threshold(n);
        let mut seen = OnlineSet::EMPTY;
        let mut free = OfflineSet::full(self.g.offline_count());
        let mut probes = Vec::new();
        let mut matched = std::collections::BTreeSet::new();
        let mut arrivals = Vec::new();
        for (idx, v) in order.sequence().into_iter().enumerate() {
            let t = idx + 1;
            seen = seen.with(v);
            if t < threshold {
                arrivals.push(ArrivalInfo {
                    vertex: v,
                    free_before: free,
                    free_after: free,
                    committed: None,
                    matched: None,
                });
                continue;
            }
            let dists = self.distributions(seen)?;
            let dist = &dists[&v];
            let (outcome, vertex_probes) = vertex_probe_with_states(self.g, v, dist, states, rng)?;
            probes.extend(vertex_probes);
            let free_before = free;
            let mut matched_edge = None;
            if let Some(e) = outcome {
                let u = self.g.edges()[e.0].u;
                if free.contains(u) {
                    matched.insert(e);
                    free = free.without(u);
                    matched_edge = Some(e);
                }
            }
            arrivals.push(ArrivalInfo {
                vertex: v,
                free_before,
                free_after: free,
                committed: outcome,
                matched: matched_edge,
            });
        }
        let matching = Matching::from_edges(self.g, matched)?;
        Ok((
            RunRecord {
                order: order.clone(),
                seed: None,
                probes,
                matching,
                charges: None,
            },
            arrivals,
        ))
    }
}

/// Runs the unknown-graph ROM algorithm.
pub fn run_rom_lp_algorithm<R: Rng>(
    g: &StochasticGraph,
    order: &ArrivalOrder,
    rng: &mut R,
) -> Result<RunRecord> {
    Ok(RomLpRunner::new(g).run(order, EdgeStates::Sample, rng)?.0)
}

/// Runs greedy star probing in ascending order of the arrival times `y`,
/// charging each matched weight `w_u` into `α_u` and `φ_{v,R}` along the
/// chosen curve.
pub fn run_greedy_dp_charged<R: Rng>(
    g: &StochasticGraph,
    y: &[f64],
    curve: GCurve,
    rng: &mut R,
) -> Result<RunRecord> {
    run_greedy_dp_charged_with_states(g, y, curve, EdgeStates::Sample, rng)
}

pub fn run_greedy_dp_charged_with_states<R: Rng>(
    g: &StochasticGraph,
    y: &[f64],
    curve: GCurve,
    states: EdgeStates,
    rng: &mut R,
) -> Result<RunRecord> {
    GreedyDpRunner::new(g).run_charged(y, curve, states, rng)
}

/// Traces of the unmatched offline set right after each arrival, for an
/// execution on `G` coupled with one on `G − v0` (same edge states, same
/// arrival times).
#[derive(Debug, Clone)]
pub struct CoupledRun {
    /// `(vertex, free set after it on G, free set after it on G − v0)`,
    /// for every arrival other than `v0`, in arrival order.
    pub traces: Vec<(OnlineId, OfflineSet, OfflineSet)>,
    pub full: RunRecord,
    pub deleted: RunRecord,
}

impl CoupledRun {
    /// Whether the full run's free set stays inside the deleted run's at
    /// every common arrival.
    pub fn containment_holds(&self) -> bool {
        self.traces
            .iter()
            .all(|(_, full, deleted)| full.is_subset_of(deleted))
    }

    /// The arrival time at which `u0` is matched in the deleted run, or
    /// 1 if it never is.
    pub fn critical_time(&self, g: &StochasticGraph, u0: OfflineId, y: &[f64]) -> f64 {
        for &e in &self.deleted.matching.edges {
            let edge = &g.edges()[e.0];
            if edge.u == u0 {
                return y[edge.v.0];
            }
        }
        1.0
    }
}

/// Runs greedy star probing on `G` and on `G − v0` under shared edge
/// states and arrival times, returning the per-arrival free-set traces.
pub fn coupled_deletion_run(
    g: &StochasticGraph,
    v0: OnlineId,
    states: u64,
    y: &[f64],
) -> Result<CoupledRun> {
    let order = ArrivalOrder::Times(y.to_vec());
    // The star policies depend only on (v, R), so one cache serves both
    // executions; deleting v0 is just skipping it. Fixed states make the
    // rng a formality.
    let runner = GreedyDpRunner::new(g);
    let mut dummy = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(0);
    let (full, full_arrivals) = runner.run(&order, EdgeStates::Fixed(states), &mut dummy, None)?;
    let (deleted, deleted_arrivals) =
        runner.run(&order, EdgeStates::Fixed(states), &mut dummy, Some(v0))?;
    let mut traces = Vec::new();
    let mut deleted_iter = deleted_arrivals.iter();
    for info in &full_arrivals {
        if info.vertex == v0 {
            continue;
        }
        let twin = deleted_iter
            .next()
            .ok_or_else(|| Error::Internal("trace misalignment".into()))?;
        if twin.vertex != info.vertex {
            return Err(Error::Internal("trace misalignment".into()));
        }
        traces.push((info.vertex, info.free_after, twin.free_after));
    }
    Ok(CoupledRun {
        traces,
        full,
        deleted,
    })
}

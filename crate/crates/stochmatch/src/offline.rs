//! Exact offline benchmarks by memoized adaptive dynamic programming:
//! the committal prober (must match every active probe while both
//! endpoints are free), the non-committal prober (keeps probing, then
//! takes a maximum-weight matching of its active probes), and the
//! relaxed prober that produces a one-sided matching from a
//! configuration-LP solution.
//!
//! Everything here is brute force on purpose — tiny instances, exact
//! values. These are the oracles the online algorithms are measured
//! against.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::Rng;

use crate::error::{Error, Result};
use crate::lp::{ConfigLp, LpSolution, StarValueMap};
use crate::model::{
    EdgeId, Matching, OfflineSet, OneSidedMatching, OnlineId, OnlineSet, StochasticGraph,
};

/// Default cap on distinct memoized states per benchmark evaluation.
pub const DEFAULT_STATE_CAP: usize = 2_000_000;

/// Probe bookkeeping during a benchmark evaluation: per-vertex histories
/// plus whatever the variant needs to score or extend a state.
#[derive(Clone, PartialEq, Eq, Hash)]
struct ProbeState {
    /// Probe history per online vertex, in probe order.
    histories: Vec<Vec<EdgeId>>,
    /// Committal: matched vertices. Non-committal: active probes.
    matched_offline: u64,
    matched_online: u64,
    active: u64,
}

/// Which probes the committal DP may consider.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BenchmarkMode {
    /// Skip probes that cannot produce a match (an endpoint already
    /// matched, or probability zero). Such probes only consume constraint
    /// budget, so they are weakly dominated.
    Fast,
    /// Consider every constraint-feasible probe. Slow; exists to
    /// cross-check that the pruning above never changes the value.
    Reference,
}

struct CommittalDp<'a> {
    g: &'a StochasticGraph,
    mode: BenchmarkMode,
    cap: usize,
    memo: HashMap<ProbeState, f64>,
}

impl<'a> CommittalDp<'a> {
    fn value(&mut self, state: &ProbeState) -> Result<f64> {
        if let Some(&v) = self.memo.get(state) {
            return Ok(v);
        }
        if self.memo.len() >= self.cap {
            return Err(Error::CapExceeded { cap: self.cap });
        }
        let mut best = 0.0f64; // stopping is always allowed
        for v in self.g.online_ids() {
            let v_matched = state.matched_online >> v.0 & 1 == 1;
            if self.mode == BenchmarkMode::Fast && v_matched {
                continue;
            }
            for &e in self.g.incident_edges(v) {
                let edge = &self.g.edges()[e.0];
                if state.histories[v.0].contains(&e) {
                    continue;
                }
                let u_matched = state.matched_offline >> edge.u.0 & 1 == 1;
                if self.mode == BenchmarkMode::Fast && (u_matched || edge.probability == 0.0) {
                    continue;
                }
                let mut extended = state.histories[v.0].clone();
                extended.push(e);
                if !self.g.constraint(v).is_member(&extended) {
                    continue;
                }
                let mut probed = state.clone();
                probed.histories[v.0] = extended;
                let value = if !u_matched && !v_matched {
                    // Commitment: an active probe with both endpoints free
                    // is matched on the spot.
                    let mut hit = probed.clone();
                    hit.matched_offline |= 1 << edge.u.0;
                    hit.matched_online |= 1 << v.0;
                    edge.probability * (edge.weight + self.value(&hit)?)
                        + (1.0 - edge.probability) * self.value(&probed)?
                } else {
                    // The probe only reveals the state; nothing can change.
                    self.value(&probed)?
                };
                if value > best {
                    best = value;
                }
            }
        }
        self.memo.insert(state.clone(), best);
        Ok(best)
    }
}

/// Expected weight achieved by an optimal offline prober that respects
/// commitment.
pub fn committal_opt(g: &StochasticGraph) -> Result<f64> {
    committal_opt_with(g, BenchmarkMode::Fast, DEFAULT_STATE_CAP)
}

/// Reference-mode evaluation (no dominated-probe pruning); used to
/// cross-check [`committal_opt`].
pub fn committal_opt_reference(g: &StochasticGraph) -> Result<f64> {
    committal_opt_with(g, BenchmarkMode::Reference, DEFAULT_STATE_CAP)
}

pub fn committal_opt_with(g: &StochasticGraph, mode: BenchmarkMode, cap: usize) -> Result<f64> {
    let mut dp = CommittalDp {
        g,
        mode,
        cap,
        memo: HashMap::new(),
    };
    let root = ProbeState {
        histories: vec![Vec::new(); g.online_count()],
        matched_offline: 0,
        matched_online: 0,
        active: 0,
    };
    dp.value(&root)
}

struct NonCommittalDp<'a> {
    g: &'a StochasticGraph,
    include_zero_probes: bool,
    cap: usize,
    memo: HashMap<ProbeState, f64>,
    mwm_memo: HashMap<u64, f64>,
}

impl<'a> NonCommittalDp<'a> {
    fn mwm(&mut self, active: u64) -> f64 {
        if let Some(&v) = self.mwm_memo.get(&active) {
            return v;
        }
        let edges: BTreeSet<EdgeId> = (0..self.g.edges().len())
            .filter(|i| active >> i & 1 == 1)
            .map(EdgeId)
            .collect();
        let value = max_weight_matching(self.g, &edges).weight;
        self.mwm_memo.insert(active, value);
        value
    }

    fn value(&mut self, state: &ProbeState) -> Result<f64> {
        if let Some(&v) = self.memo.get(state) {
            return Ok(v);
        }
        if self.memo.len() >= self.cap {
            return Err(Error::CapExceeded { cap: self.cap });
        }
        // Stopping scores the best matching among active probes so far.
        let mut best = self.mwm(state.active);
        for v in self.g.online_ids() {
            for &e in self.g.incident_edges(v) {
                let edge = &self.g.edges()[e.0];
                if state.histories[v.0].contains(&e) {
                    continue;
                }
                if !self.include_zero_probes && edge.probability == 0.0 {
                    continue;
                }
                let mut extended = state.histories[v.0].clone();
                extended.push(e);
                if !self.g.constraint(v).is_member(&extended) {
                    continue;
                }
                let mut probed = state.clone();
                probed.histories[v.0] = extended;
                let mut hit = probed.clone();
                hit.active |= 1 << e.0;
                let value = edge.probability * self.value(&hit)?
                    + (1.0 - edge.probability) * self.value(&probed)?;
                if value > best {
                    best = value;
                }
            }
        }
        self.memo.insert(state.clone(), best);
        Ok(best)
    }
}

/// Expected weight achieved by an optimal offline prober that is free to
/// pick a maximum-weight matching among its active probes afterwards.
pub fn noncommittal_opt(g: &StochasticGraph) -> Result<f64> {
    noncommittal_opt_with(g, DEFAULT_STATE_CAP)
}

pub fn noncommittal_opt_with(g: &StochasticGraph, cap: usize) -> Result<f64> {
    if g.edges().len() > 63 {
        return Err(Error::CapExceeded { cap: 63 });
    }
    let mut dp = NonCommittalDp {
        g,
        include_zero_probes: false,
        cap,
        memo: HashMap::new(),
        mwm_memo: HashMap::new(),
    };
    let root = ProbeState {
        histories: vec![Vec::new(); g.online_count()],
        matched_offline: 0,
        matched_online: 0,
        active: 0,
    };
    dp.value(&root)
}

/// Non-committal star value `OPT_non(v, R)`, evaluated on the induced
/// star `G[{v} ∪ R]`.
pub fn noncommittal_star_value(g: &StochasticGraph, v: OnlineId, r: OfflineSet) -> Result<f64> {
    let set = crate::model::VertexSet {
        offline: r.iter().filter(|u| u.0 < g.offline_count()).collect(),
        online: [v].into_iter().collect(),
    };
    noncommittal_opt(&g.induced_subgraph(&set)?)
}

/// Non-committal star values for every `(v, R ⊆ N(v))`, shaped for
/// [`crate::lp::build_lp_dp_non`].
pub fn noncommittal_star_value_map(g: &StochasticGraph) -> Result<StarValueMap> {
    let mut map = BTreeMap::new();
    for v in g.online_ids() {
        let hood: OfflineSet = g
            .incident_edges(v)
            .iter()
            .map(|&e| g.edges()[e.0].u)
            .collect();
        let members: Vec<_> = hood.iter().collect();
        for mask in 0u64..(1 << members.len()) {
            let mut r = OfflineSet::EMPTY;
            for (k, &u) in members.iter().enumerate() {
                if mask >> k & 1 == 1 {
                    r = r.with(u);
                }
            }
            map.insert((v, r), noncommittal_star_value(g, v, r)?);
        }
    }
    Ok(map)
}

/// Exhaustive maximum-weight matching over the given edges. Ties are
/// broken toward the lexicographically smallest edge-id set.
pub fn max_weight_matching(g: &StochasticGraph, edges: &BTreeSet<EdgeId>) -> Matching {
    let candidates: Vec<EdgeId> = edges.iter().copied().collect();
    let mut best: (f64, Vec<EdgeId>) = (0.0, Vec::new());

    fn explore(
        g: &StochasticGraph,
        candidates: &[EdgeId],
        idx: usize,
        used_u: &mut u64,
        used_v: &mut u64,
        picked: &mut Vec<EdgeId>,
        weight: f64,
        best: &mut (f64, Vec<EdgeId>),
    ) {
        if idx == candidates.len() {
            // Candidates are visited in ascending edge id, so `picked` is a
            // sorted sequence and slice order is set order.
            if weight > best.0 || (weight == best.0 && picked.as_slice() < best.1.as_slice()) {
                *best = (weight, picked.clone());
            }
            return;
        }
        let e = candidates[idx];
        let edge = &g.edges()[e.0];
        // Take the edge when both endpoints are free.
        if *used_u >> edge.u.0 & 1 == 0 && *used_v >> edge.v.0 & 1 == 0 {
            *used_u |= 1 << edge.u.0;
            *used_v |= 1 << edge.v.0;
            picked.push(e);
            explore(
                g,
                candidates,
                idx + 1,
                used_u,
                used_v,
                picked,
                weight + edge.weight,
                best,
            );
            picked.pop();
            *used_u &= !(1 << edge.u.0);
            *used_v &= !(1 << edge.v.0);
        }
        explore(g, candidates, idx + 1, used_u, used_v, picked, weight, best);
    }

    let mut used_u = 0u64;
    let mut used_v = 0u64;
    let mut picked = Vec::new();
    explore(
        g,
        &candidates,
        0,
        &mut used_u,
        &mut used_v,
        &mut picked,
        0.0,
        &mut best,
    );
    Matching {
        edges: best.1.into_iter().collect(),
        weight: best.0,
    }
}

/// One run of the relaxed prober: every online vertex independently draws
/// a probe string from its configuration-LP distribution and keeps its
/// first active edge. Offline vertices may repeat across the output; the
/// LP's matching rows keep their *expected* incidence at most one.
pub fn relaxed_benchmark_run<R: Rng>(
    g: &StochasticGraph,
    config: &ConfigLp,
    sol: &LpSolution,
    rng: &mut R,
) -> Result<OneSidedMatching> {
    let mut chosen: BTreeSet<EdgeId> = BTreeSet::new();
    let mut matched_online = OnlineSet::EMPTY;
    for v in g.online_ids() {
        let dist = config.distribution(v, sol);
        let outcome = crate::online::vertex_probe(g, v, &dist, rng)?;
        if let Some(e) = outcome {
            if !matched_online.contains(v) {
                matched_online = matched_online.with(v);
                chosen.insert(e);
            }
        }
    }
    OneSidedMatching::from_edges(g, chosen)
}

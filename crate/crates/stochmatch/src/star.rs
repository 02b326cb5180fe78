//! Optimal probing of a single online vertex against a free offline set
//! `R`: the memoized recursion behind `dp_opt`, greedy probing along a
//! fixed edge ranking, and rankability verification.

use std::collections::{BTreeSet, HashMap};

use itertools::Itertools;

use crate::error::{Error, Result};
use crate::model::{ConstraintSpec, EdgeId, OfflineSet, OnlineId, ProbeString, StochasticGraph};
use crate::probing::{enumerate_feasible_strings, expected_value};

/// An optimal probe string for one online vertex together with its
/// expected value.
#[derive(Debug, Clone, PartialEq)]
pub struct StarPolicy {
    pub probe_string: ProbeString,
    pub value: f64,
}

/// A fixed ordering of the edges incident to one online vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ranking {
    pub order: Vec<EdgeId>,
}

impl Ranking {
    /// Builds a ranking, verifying it is a true permutation of `∂(v)`.
    pub fn new(g: &StochasticGraph, v: OnlineId, order: Vec<EdgeId>) -> Result<Self> {
        let incident: BTreeSet<EdgeId> = g.incident_edges(v).iter().copied().collect();
        let given: BTreeSet<EdgeId> = order.iter().copied().collect();
        if given.len() != order.len() || given != incident {
            return Err(Error::Internal(format!(
                "ranking is not a permutation of the {} edges at {}",
                incident.len(),
                g.online_name(v)
            )));
        }
        Ok(Ranking { order })
    }
}

/// The known sufficient conditions for a vertex to be rankable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum RankCondition {
    /// Patience 1, or patience at least `|U|`.
    UnitOrUnlimitedPatience,
    /// Patience with probabilities and weights sorted the same way:
    /// `p_{u1,v} ≤ p_{u2,v}` implies `w_{u1} ≤ w_{u2}`.
    WeightProbabilityAligned,
    /// All incident weights equal, budget constraint, and costs
    /// anti-monotone in the probabilities.
    UnweightedBudgetAntiMonotoneCosts,
}

fn require_vertex_weighted(g: &StochasticGraph) -> Result<()> {
    if !g.is_vertex_weighted() {
        return Err(Error::NotVertexWeighted);
    }
    Ok(())
}

/// Incident edges of `v` restricted to offline set `R`, sorted by
/// non-increasing weight with ties broken by ascending edge id. This order
/// is the backbone of the recursion and of every deterministic output.
fn sorted_candidates(g: &StochasticGraph, v: OnlineId, r: OfflineSet) -> Vec<EdgeId> {
    let mut edges: Vec<EdgeId> = g
        .incident_edges(v)
        .iter()
        .copied()
        .filter(|&e| r.contains(g.edges()[e.0].u))
        .collect();
    edges.sort_by(|&a, &b| {
        let (wa, wb) = (g.edges()[a.0].weight, g.edges()[b.0].weight);
        wb.partial_cmp(&wa).unwrap().then(a.cmp(&b))
    });
    edges
}

#[derive(PartialEq, Eq, Hash)]
enum MemoKey {
    /// (next sorted position, probes already used) — enough state for a
    /// pure length cap.
    Patience(usize, usize),
    /// (next sorted position, chosen positions bitmask) for general
    /// permutation-closed constraints.
    General(usize, u64),
}

struct SortedDp<'a> {
    g: &'a StochasticGraph,
    cons: &'a ConstraintSpec,
    edges: Vec<EdgeId>,
    memo: HashMap<MemoKey, (f64, Option<usize>)>,
}

impl<'a> SortedDp<'a> {
    fn key(&self, i: usize, mask: u64) -> MemoKey {
        match self.cons {
            ConstraintSpec::Patience(_) => MemoKey::Patience(i, mask.count_ones() as usize),
            _ => MemoKey::General(i, mask),
        }
    }

    fn feasible(&self, mask: u64, j: usize) -> bool {
        match self.cons {
            ConstraintSpec::Patience(l) => (mask.count_ones() as usize) < *l,
            _ => {
                let mut set: Vec<EdgeId> = (0..self.edges.len())
                    .filter(|k| mask >> k & 1 == 1)
                    .map(|k| self.edges[k])
                    .collect();
                set.push(self.edges[j]);
                // Permutation-closed constraints only see the support.
                self.cons.is_member(&set)
            }
        }
    }

    /// Best value over probe strings that follow the sorted order from
    /// position `i` on, given the already-chosen positions. Returns the
    /// value and the first probed position.
    ///
    /// A feasible probe is never worth strictly less than stopping, so on
    /// value ties the smallest maximizing position wins and the recursion
    /// produces maximal strings — mirroring greedy probing along a ranking.
    fn solve(&mut self, i: usize, mask: u64) -> (f64, Option<usize>) {
        let key = self.key(i, mask);
        if let Some(&hit) = self.memo.get(&key) {
            return hit;
        }
        let mut best = (0.0, None);
        for j in i..self.edges.len() {
            if !self.feasible(mask, j) {
                continue;
            }
            let edge = &self.g.edges()[self.edges[j].0];
            let tail = self.solve(j + 1, mask | 1 << j).0;
            let value = edge.probability * edge.weight + (1.0 - edge.probability) * tail;
            if best.1.is_none() || value > best.0 {
                best = (value, Some(j));
            }
        }
        self.memo.insert(self.key(i, mask), best);
        best
    }

    fn reconstruct(&mut self) -> (f64, Vec<EdgeId>) {
        let (value, mut choice) = self.solve(0, 0);
        let mut string = Vec::new();
        let mut mask = 0u64;
        while let Some(j) = choice {
            string.push(self.edges[j]);
            mask |= 1 << j;
            choice = self.solve(j + 1, mask).1;
        }
        (value, string)
    }
}

/// Optimal probing policy for `v` against the free offline set `R`.
///
/// Permutation-closed constraints use the weight-sorted recursion
/// `OPT = max_i (p_i w_i + (1 − p_i) · OPT(suffix after i))`, memoized.
/// Order-sensitive explicit string constraints fall back to exhausting the
/// feasible strings, which errors if the enumeration cap is hit.
pub fn dp_opt(g: &StochasticGraph, v: OnlineId, r: OfflineSet) -> Result<StarPolicy> {
    dp_opt_with_cap(g, v, r, crate::probing::enumeration_cap())
}

pub fn dp_opt_with_cap(
    g: &StochasticGraph,
    v: OnlineId,
    r: OfflineSet,
    cap: usize,
) -> Result<StarPolicy> {
    require_vertex_weighted(g)?;
    let cons = g.constraint(v);
    if cons.is_permutation_closed_variant() {
        let edges = sorted_candidates(g, v, r);
        if edges.len() > 63 {
            return Err(Error::CapExceeded { cap: 63 });
        }
        let mut dp = SortedDp {
            g,
            cons,
            edges,
            memo: HashMap::new(),
        };
        let (value, string) = dp.reconstruct();
        let probe_string = ProbeString::new(string)?;
        debug_assert!({
            let recomputed = expected_value(&probe_string, g).unwrap_or(f64::NAN);
            (recomputed - value).abs() <= 1e-12 * value.abs().max(1.0)
        });
        Ok(StarPolicy {
            probe_string,
            value,
        })
    } else {
        let candidates: Vec<EdgeId> = g
            .incident_edges(v)
            .iter()
            .copied()
            .filter(|&e| r.contains(g.edges()[e.0].u))
            .collect();
        let fs = enumerate_feasible_strings(v, cons, &candidates, cap);
        if fs.truncated {
            return Err(Error::Truncated { cap });
        }
        // First maximizer in depth-first lexicographic order.
        let mut best: Option<StarPolicy> = None;
        for s in fs.strings {
            let value = expected_value(&s, g)?;
            if best.as_ref().is_none_or(|b| value > b.value) {
                best = Some(StarPolicy {
                    probe_string: s,
                    value,
                });
            }
        }
        Ok(best.expect("enumeration always contains the empty string"))
    }
}

/// `OPT(v, R)`: the value of [`dp_opt`].
pub fn opt_star_value(g: &StochasticGraph, v: OnlineId, r: OfflineSet) -> Result<f64> {
    Ok(dp_opt(g, v, r)?.value)
}

/// The longest feasible string built by appending the edges of `R × {v}`
/// in ranking order, skipping any edge whose append would leave the
/// constraint.
pub fn ranking_probe_string(
    g: &StochasticGraph,
    v: OnlineId,
    ranking: &Ranking,
    r: OfflineSet,
) -> ProbeString {
    let cons = g.constraint(v);
    let mut string: Vec<EdgeId> = Vec::new();
    for &e in &ranking.order {
        if !r.contains(g.edges()[e.0].u) {
            continue;
        }
        string.push(e);
        if !cons.is_member(&string) {
            string.pop();
        }
    }
    ProbeString::new(string).expect("ranking holds distinct edges")
}

/// Offline vertices adjacent to `v`.
fn neighbourhood(g: &StochasticGraph, v: OnlineId) -> OfflineSet {
    g.incident_edges(v)
        .iter()
        .map(|&e| g.edges()[e.0].u)
        .collect()
}

/// Searches for a ranking that reproduces `dp_opt` for **every** free set
/// `R`. Heuristic candidates are tried first (non-increasing `w·p`, `w`,
/// `p`), then all permutations when `|∂(v)| ≤ 7`.
///
/// A strict witness matches the probe strings exactly. When value ties
/// make that impossible for any fixed ranking, a second pass accepts a
/// ranking whose greedy string achieves `OPT(v,R)` for every `R` — the
/// guarantee the online analysis actually uses.
pub fn verify_rankable(g: &StochasticGraph, v: OnlineId) -> Result<Option<Ranking>> {
    require_vertex_weighted(g)?;
    let hood = neighbourhood(g, v);
    let subsets: Vec<OfflineSet> = subsets_of(hood);
    let mut policies: HashMap<OfflineSet, StarPolicy> = HashMap::new();
    for &r in &subsets {
        policies.insert(r, dp_opt(g, v, r)?);
    }

    let strict = |ranking: &Ranking| {
        subsets.iter().all(|&r| {
            ranking_probe_string(g, v, ranking, r).edges() == policies[&r].probe_string.edges()
        })
    };
    let value_equivalent = |ranking: &Ranking| -> Result<bool> {
        for &r in &subsets {
            let s = ranking_probe_string(g, v, ranking, r);
            let value = expected_value(&s, g)?;
            let opt = policies[&r].value;
            if (value - opt).abs() > 1e-12 * opt.abs().max(1.0) {
                return Ok(false);
            }
        }
        Ok(true)
    };

    let mut candidates: Vec<Ranking> = Vec::new();
    let by = |keyf: &dyn Fn(&EdgeId) -> (f64, f64)| -> Vec<EdgeId> {
        let mut order: Vec<EdgeId> = g.incident_edges(v).to_vec();
        order.sort_by(|a, b| {
            let (ka, kb) = (keyf(a), keyf(b));
            kb.0.partial_cmp(&ka.0)
                .unwrap()
                .then(kb.1.partial_cmp(&ka.1).unwrap())
                .then(a.cmp(b))
        });
        order
    };
    let edge = |e: &EdgeId| &g.edges()[e.0];
    candidates.push(Ranking {
        order: by(&|e| (edge(e).weight * edge(e).probability, edge(e).weight)),
    });
    candidates.push(Ranking {
        order: by(&|e| (edge(e).weight, 0.0)),
    });
    candidates.push(Ranking {
        order: by(&|e| (edge(e).probability, edge(e).weight)),
    });

    for c in &candidates {
        if strict(c) {
            return Ok(Some(c.clone()));
        }
    }
    let degree = g.incident_edges(v).len();
    if degree <= 7 {
        for perm in g.incident_edges(v).iter().copied().permutations(degree) {
            let ranking = Ranking { order: perm };
            if strict(&ranking) {
                return Ok(Some(ranking));
            }
        }
    }
    for c in &candidates {
        if value_equivalent(c)? {
            return Ok(Some(c.clone()));
        }
    }
    if degree <= 7 {
        for perm in g.incident_edges(v).iter().copied().permutations(degree) {
            let ranking = Ranking { order: perm };
            if value_equivalent(&ranking)? {
                return Ok(Some(ranking));
            }
        }
    }
    Ok(None)
}

fn subsets_of(set: OfflineSet) -> Vec<OfflineSet> {
    let members: Vec<_> = set.iter().collect();
    let mut out = Vec::with_capacity(1 << members.len());
    for mask in 0u64..(1 << members.len()) {
        let mut s = OfflineSet::EMPTY;
        for (k, &u) in members.iter().enumerate() {
            if mask >> k & 1 == 1 {
                s = s.with(u);
            }
        }
        out.push(s);
    }
    out
}

/// Reports which of the known sufficient rankability conditions hold at `v`.
pub fn rankability_conditions(g: &StochasticGraph, v: OnlineId) -> BTreeSet<RankCondition> {
    let mut out = BTreeSet::new();
    let edges: Vec<_> = g
        .incident_edges(v)
        .iter()
        .map(|&e| &g.edges()[e.0])
        .collect();
    match g.constraint(v) {
        ConstraintSpec::Patience(l) => {
            if *l == 1 || *l >= g.offline_count() {
                out.insert(RankCondition::UnitOrUnlimitedPatience);
            }
            let aligned = edges.iter().tuple_combinations().all(|(a, b)| {
                let agree = |x: &crate::model::Edge, y: &crate::model::Edge| {
                    !(x.probability <= y.probability && x.weight > y.weight)
                };
                agree(a, b) && agree(b, a)
            });
            if g.is_vertex_weighted() && aligned {
                out.insert(RankCondition::WeightProbabilityAligned);
            }
        }
        ConstraintSpec::Budget { costs, .. } => {
            let unweighted = edges.windows(2).all(|w| w[0].weight == w[1].weight);
            let cost_of = |e: &&crate::model::Edge| {
                let id = g
                    .incident_edges(v)
                    .iter()
                    .find(|&&x| g.edges()[x.0].u == e.u)
                    .copied()
                    .unwrap();
                costs.get(&id).copied().unwrap_or(0.0)
            };
            let anti_monotone = edges.iter().tuple_combinations().all(|(a, b)| {
                let agree = |x, y| {
                    let (px, py): (&&crate::model::Edge, &&crate::model::Edge) = (x, y);
                    !(px.probability <= py.probability && cost_of(x) < cost_of(y))
                };
                agree(a, b) && agree(b, a)
            });
            if unweighted && anti_monotone {
                out.insert(RankCondition::UnweightedBudgetAntiMonotoneCosts);
            }
        }
        _ => {}
    }
    out
}

/// The four-offline-vertex star with patience 2 where the optimal probe
/// set changes completely when one vertex is removed. With `ε ≤ 1/12` the
/// best strings are `(u1,u2)` on the full set and `(u3,u4)` once `u2` is
/// gone. Used by tests and the reproduction cases.
pub fn adaptive_flip_star(epsilon: f64) -> StochasticGraph {
    StochasticGraph::vertex_weighted(
        vec!["u1".into(), "u2".into(), "u3".into(), "u4".into()],
        vec!["v".into()],
        vec![1.0 + epsilon, 1.0 + epsilon / 2.0, 1.0, 1.0],
        vec![
            (0, 0, 1.0 / 3.0),
            (1, 0, 1.0),
            (2, 0, 0.5),
            (3, 0, 2.0 / 3.0),
        ],
        vec![ConstraintSpec::Patience(2)],
    )
    .expect("valid by construction")
}

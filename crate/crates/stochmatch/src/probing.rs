//! String-level probing primitives: survival products, expected probe
//! value, feasible-string enumeration, and closure checks.

use std::collections::BTreeSet;

use itertools::Itertools;

use crate::error::{Error, Result};
use crate::model::{ConstraintSpec, EdgeId, OnlineId, ProbeString, StochasticGraph};

/// Default cap on enumerated feasible strings. These strings are exactly
/// the columns of the configuration LP, and the dense simplex is
/// impractical far beyond this.
pub const DEFAULT_ENUMERATION_CAP: usize = 200_000;

/// The effective cap: `STOCHMATCH_CAP` overrides the default (read once
/// per process). Callers that need a specific cap pass it explicitly.
pub fn enumeration_cap() -> usize {
    static CAP: std::sync::OnceLock<usize> = std::sync::OnceLock::new();
    *CAP.get_or_init(|| {
        std::env::var("STOCHMATCH_CAP")
            .ok()
            .and_then(|s| s.parse().ok())
            .unwrap_or(DEFAULT_ENUMERATION_CAP)
    })
}

/// All feasible probe strings of one online vertex, in depth-first
/// lexicographic edge-id order (a prefix sorts before its extensions).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeasibleStringSet {
    pub online_vertex: OnlineId,
    pub strings: Vec<ProbeString>,
    /// Set when enumeration stopped at the cap; the set is then a prefix of
    /// the full enumeration and closure checks refuse to run on it.
    pub truncated: bool,
}

fn check_string_in_graph(g: &StochasticGraph, s: &ProbeString) -> Result<()> {
    let mut endpoint = None;
    for &e in s.edges() {
        let edge = g.edge(e)?;
        match endpoint {
            None => endpoint = Some(edge.v),
            Some(v) if v != edge.v => {
                return Err(Error::EdgeNotIncident {
                    edge: e.0,
                    vertex: g.online_name(v).into(),
                })
            }
            _ => {}
        }
    }
    Ok(())
}

/// Probability that every edge of `s` is inactive: `∏ (1 − p_e)`.
/// The empty string survives with probability 1.
pub fn survival(s: &ProbeString, g: &StochasticGraph) -> Result<f64> {
    check_string_in_graph(g, s)?;
    let mut product = 1.0;
    for &e in s.edges() {
        product *= 1.0 - g.edge(e)?.probability;
    }
    Ok(product)
}

/// Expected weight of the first active edge when `s` is probed in order:
/// `Σ_i p_i · w_i · ∏_{j<i} (1 − p_j)`.
pub fn expected_value(s: &ProbeString, g: &StochasticGraph) -> Result<f64> {
    check_string_in_graph(g, s)?;
    let mut total = 0.0;
    let mut alive = 1.0;
    for &e in s.edges() {
        let edge = g.edge(e)?;
        total += alive * edge.probability * edge.weight;
        alive *= 1.0 - edge.probability;
    }
    Ok(total)
}

/// Membership query with incidence checking; see
/// [`ConstraintSpec::is_member`] for the per-variant semantics.
pub fn membership(g: &StochasticGraph, v: OnlineId, s: &ProbeString) -> Result<bool> {
    g.membership(v, s)
}

/// Enumerates every feasible string of `c` over `edges`, depth-first in
/// lexicographic edge-id order, keeping at most `cap` strings.
///
/// `Patience` and `Budget` constraints are walked with pruning (both are
/// prefix-closed for non-negative costs). Explicit variants are expanded
/// from their member data so that enumeration stays exact even when the
/// constraint violates a closure invariant — the closure checks below rely
/// on this.
pub fn enumerate_feasible_strings(
    v: OnlineId,
    c: &ConstraintSpec,
    edges: &[EdgeId],
    cap: usize,
) -> FeasibleStringSet {
    assert!(cap >= 1, "cap must be at least 1");
    let mut collected: BTreeSet<Vec<EdgeId>> = BTreeSet::new();
    collected.insert(Vec::new());
    let mut truncated = false;

    match c {
        ConstraintSpec::Patience(_) | ConstraintSpec::Budget { .. } => {
            let mut sorted: Vec<EdgeId> = edges.to_vec();
            sorted.sort_unstable();
            let mut stack: Vec<Vec<EdgeId>> = vec![Vec::new()];
            'dfs: while let Some(prefix) = stack.pop() {
                // Children in reverse so the stack pops them in ascending order.
                for &e in sorted.iter().rev() {
                    if prefix.contains(&e) {
                        continue;
                    }
                    let mut child = prefix.clone();
                    child.push(e);
                    if !c.is_member(&child) {
                        continue;
                    }
                    if collected.len() >= cap {
                        truncated = true;
                        break 'dfs;
                    }
                    collected.insert(child.clone());
                    stack.push(child);
                }
            }
        }
        ConstraintSpec::ExplicitStrings(members) => {
            let allowed: BTreeSet<EdgeId> = edges.iter().copied().collect();
            for m in members {
                if m.iter().any(|e| !allowed.contains(e)) {
                    continue;
                }
                if collected.len() >= cap && !collected.contains(m) {
                    truncated = true;
                    break;
                }
                collected.insert(m.clone());
            }
        }
        ConstraintSpec::ExplicitFamily(family) => {
            let allowed: BTreeSet<EdgeId> = edges.iter().copied().collect();
            'family: for m in family {
                if m.iter().any(|e| !allowed.contains(e)) {
                    continue;
                }
                for perm in m.iter().copied().permutations(m.len()) {
                    if collected.len() >= cap && !collected.contains(&perm) {
                        truncated = true;
                        break 'family;
                    }
                    collected.insert(perm);
                }
            }
        }
    }

    // BTreeSet<Vec<_>> already iterates in depth-first lexicographic order:
    // a prefix compares less than any of its extensions.
    let strings = collected
        .into_iter()
        .take(cap)
        .map(|edges| ProbeString::new(edges).expect("enumeration never repeats edges"))
        .collect();
    FeasibleStringSet {
        online_vertex: v,
        strings,
        truncated,
    }
}

/// Exhaustively verifies that every prefix of every member is a member.
pub fn check_prefix_closed(fs: &FeasibleStringSet) -> Result<bool> {
    if fs.truncated {
        return Err(Error::Truncated {
            cap: fs.strings.len(),
        });
    }
    let set: BTreeSet<&[EdgeId]> = fs.strings.iter().map(|s| s.edges()).collect();
    for s in &fs.strings {
        for k in 0..s.len() {
            if !set.contains(s.prefix(k)) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Exhaustively verifies that every permutation of every member is a member.
pub fn check_permutation_closed(fs: &FeasibleStringSet) -> Result<bool> {
    if fs.truncated {
        return Err(Error::Truncated {
            cap: fs.strings.len(),
        });
    }
    let set: BTreeSet<&[EdgeId]> = fs.strings.iter().map(|s| s.edges()).collect();
    for s in &fs.strings {
        for perm in s.edges().iter().copied().permutations(s.len()) {
            if !set.contains(perm.as_slice()) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

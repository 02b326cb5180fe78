//! Stochastic graph data model: vertices, probabilistic edges, probing
//! constraints, matchings, validation, and induced subgraphs.
//!
//! A stochastic graph is bipartite: offline vertices `U` are known upfront,
//! online vertices `V` arrive one at a time. Every edge carries an existence
//! probability and a weight; the actual state (active/inactive) of an edge is
//! revealed only by probing it. Each online vertex owns a probing constraint
//! limiting which sequences of incident edges may be probed.
//!
//! All types here are immutable after construction and safe to share across
//! threads.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Index of an offline vertex (the `U` side).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct OfflineId(pub usize);

/// Index of an online vertex (the `V` side).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct OnlineId(pub usize);

/// Dense edge index, assigned in input order. All tie-breaking in the
/// library references this order, which keeps outputs deterministic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EdgeId(pub usize);

impl fmt::Display for OfflineId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "u#{}", self.0)
    }
}

impl fmt::Display for OnlineId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v#{}", self.0)
    }
}

impl fmt::Display for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e#{}", self.0)
    }
}

macro_rules! bitset_type {
    ($name:ident, $id:ident, $doc:literal) => {
        #[doc = $doc]
        #[derive(
            Debug,
            Clone,
            Copy,
            PartialEq,
            Eq,
            PartialOrd,
            Ord,
            Hash,
            Default,
            Serialize,
            Deserialize,
        )]
        pub struct $name(pub u64);

        impl $name {
            pub const EMPTY: $name = $name(0);

            pub fn full(n: usize) -> Self {
                assert!(n <= 63, "bitset supports at most 63 elements");
                $name(if n == 64 { u64::MAX } else { (1u64 << n) - 1 })
            }

            pub fn singleton(id: $id) -> Self {
                $name(1u64 << id.0)
            }

            pub fn contains(&self, id: $id) -> bool {
                self.0 >> id.0 & 1 == 1
            }

            #[must_use]
            pub fn with(&self, id: $id) -> Self {
                $name(self.0 | 1u64 << id.0)
            }

            #[must_use]
            pub fn without(&self, id: $id) -> Self {
                $name(self.0 & !(1u64 << id.0))
            }

            pub fn is_subset_of(&self, other: &Self) -> bool {
                self.0 & !other.0 == 0
            }

            pub fn len(&self) -> usize {
                self.0.count_ones() as usize
            }

            pub fn is_empty(&self) -> bool {
                self.0 == 0
            }

            pub fn iter(&self) -> impl Iterator<Item = $id> + '_ {
                let bits = self.0;
                (0..64).filter(move |i| bits >> i & 1 == 1).map($id)
            }

            /// All subsets of `full(n)`, in increasing mask order.
            pub fn subsets(n: usize) -> impl Iterator<Item = Self> {
                let full = Self::full(n).0;
                (0..=full).filter(move |m| m & !full == 0).map($name)
            }
        }

        impl FromIterator<$id> for $name {
            fn from_iter<I: IntoIterator<Item = $id>>(iter: I) -> Self {
                let mut s = $name::EMPTY;
                for id in iter {
                    s = s.with(id);
                }
                s
            }
        }
    };
}

bitset_type!(
    OfflineSet,
    OfflineId,
    "Subset of offline vertices as a bitmask (at most 63)."
);
bitset_type!(
    OnlineSet,
    OnlineId,
    "Subset of online vertices as a bitmask (at most 63)."
);

/// A single probabilistic edge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub u: OfflineId,
    pub v: OnlineId,
    /// Probability that the edge is active when probed.
    pub probability: f64,
    /// Weight collected if the edge ends up in the matching.
    pub weight: f64,
}

/// Whether edge weights are free per edge or derived from offline vertex
/// weights (`w_{u,v} = w_u`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WeightMode {
    EdgeWeighted,
    VertexWeighted,
}

/// Probing constraint of one online vertex: which strings of distinct
/// incident edges may be probed, exposed through a membership oracle.
///
/// The empty string is a member of every variant. `Patience`, `Budget` and
/// `ExplicitFamily` are permutation-closed by construction; `ExplicitStrings`
/// is order-sensitive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ConstraintSpec {
    /// At most `l` probes.
    Patience(usize),
    /// Total probing cost must stay within the budget. Edges without an
    /// entry in `costs` are free.
    Budget {
        limit: f64,
        costs: BTreeMap<EdgeId, f64>,
    },
    /// An explicit set of probe strings (the empty string is implicit).
    ExplicitStrings(BTreeSet<Vec<EdgeId>>),
    /// A set family over incident edges; a string is feasible when its
    /// support belongs to the family. Members are stored sorted.
    ExplicitFamily(BTreeSet<Vec<EdgeId>>),
}

impl ConstraintSpec {
    pub fn explicit_strings<I: IntoIterator<Item = Vec<EdgeId>>>(members: I) -> Self {
        ConstraintSpec::ExplicitStrings(members.into_iter().collect())
    }

    pub fn explicit_family<I: IntoIterator<Item = Vec<EdgeId>>>(members: I) -> Self {
        ConstraintSpec::ExplicitFamily(
            members
                .into_iter()
                .map(|mut m| {
                    m.sort_unstable();
                    m.dedup();
                    m
                })
                .collect(),
        )
    }

    /// Membership oracle over raw edge-id sequences. Incidence with the
    /// owning vertex is checked by [`StochasticGraph::membership`].
    pub fn is_member(&self, edges: &[EdgeId]) -> bool {
        if edges.is_empty() {
            return true;
        }
        match self {
            ConstraintSpec::Patience(l) => edges.len() <= *l,
            ConstraintSpec::Budget { limit, costs } => {
                let spent: f64 = edges
                    .iter()
                    .map(|e| costs.get(e).copied().unwrap_or(0.0))
                    .sum();
                spent <= *limit
            }
            ConstraintSpec::ExplicitStrings(members) => members.contains(edges),
            ConstraintSpec::ExplicitFamily(family) => {
                let mut support = edges.to_vec();
                support.sort_unstable();
                family.contains(&support)
            }
        }
    }

    pub fn is_permutation_closed_variant(&self) -> bool {
        !matches!(self, ConstraintSpec::ExplicitStrings(_))
    }
}

/// Ordered tuple of distinct edges incident to one online vertex. The empty
/// string is written `λ` and is always feasible.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ProbeString(Vec<EdgeId>);

impl ProbeString {
    pub const fn empty() -> Self {
        ProbeString(Vec::new())
    }

    /// Builds a probe string, rejecting repeated edges. Incidence to a
    /// common online vertex is a graph-level check.
    pub fn new(edges: Vec<EdgeId>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for e in &edges {
            if !seen.insert(*e) {
                return Err(Error::RepeatedEdge(e.0));
            }
        }
        Ok(ProbeString(edges))
    }

    pub fn edges(&self) -> &[EdgeId] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, e: EdgeId) -> bool {
        self.0.contains(&e)
    }

    /// The prefix strictly before position `i`.
    pub fn prefix(&self, i: usize) -> &[EdgeId] {
        &self.0[..i]
    }
}

impl fmt::Display for ProbeString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "λ");
        }
        let ids: Vec<String> = self.0.iter().map(|e| e.0.to_string()).collect();
        write!(f, "({})", ids.join(","))
    }
}

/// A (two-sided) matching: a set of edges, no two sharing a vertex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matching {
    pub edges: BTreeSet<EdgeId>,
    pub weight: f64,
}

impl Matching {
    pub fn empty() -> Self {
        Matching {
            edges: BTreeSet::new(),
            weight: 0.0,
        }
    }

    pub fn from_edges(g: &StochasticGraph, edges: BTreeSet<EdgeId>) -> Result<Self> {
        let mut used_u = BTreeSet::new();
        let mut used_v = BTreeSet::new();
        let mut weight = 0.0;
        for &e in &edges {
            let edge = g.edge(e)?;
            if !used_u.insert(edge.u) || !used_v.insert(edge.v) {
                return Err(Error::Internal(format!("matching reuses a vertex at {e}")));
            }
            weight += edge.weight;
        }
        Ok(Matching { edges, weight })
    }
}

/// One-sided matching of the online vertices: each online vertex appears at
/// most once, offline vertices may repeat.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OneSidedMatching {
    pub edges: BTreeSet<EdgeId>,
}

impl OneSidedMatching {
    pub fn from_edges(g: &StochasticGraph, edges: BTreeSet<EdgeId>) -> Result<Self> {
        let mut used_v = BTreeSet::new();
        for &e in &edges {
            let edge = g.edge(e)?;
            if !used_v.insert(edge.v) {
                return Err(Error::Internal(format!(
                    "one-sided matching reuses {} at {e}",
                    edge.v
                )));
            }
        }
        Ok(OneSidedMatching { edges })
    }

    pub fn weight(&self, g: &StochasticGraph) -> f64 {
        self.edges.iter().map(|&e| g.edges()[e.0].weight).sum()
    }
}

/// A subset of the graph's vertices, used for induced subgraphs.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct VertexSet {
    pub offline: BTreeSet<OfflineId>,
    pub online: BTreeSet<OnlineId>,
}

/// Report produced by [`validate_graph`]; empty means the graph satisfies
/// every structural invariant.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_valid() {
            write!(f, "valid")
        } else {
            for v in &self.violations {
                writeln!(f, "{v}")?;
            }
            Ok(())
        }
    }
}

/// The bipartite stochastic graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StochasticGraph {
    offline_names: Vec<String>,
    online_names: Vec<String>,
    edges: Vec<Edge>,
    /// One constraint per online vertex, indexed by `OnlineId`.
    constraints: Vec<ConstraintSpec>,
    weight_mode: WeightMode,
    /// Offline vertex weights when vertex-weighted.
    vertex_weights: Option<Vec<f64>>,
    /// Incident edges per online vertex, ascending edge id.
    adj_online: Vec<Vec<EdgeId>>,
    /// Incident edges per offline vertex, ascending edge id.
    adj_offline: Vec<Vec<EdgeId>>,
}

impl StochasticGraph {
    /// Edge-weighted constructor. `edges` are `(u, v, probability, weight)`.
    pub fn edge_weighted(
        offline: Vec<String>,
        online: Vec<String>,
        edges: Vec<(usize, usize, f64, f64)>,
        constraints: Vec<ConstraintSpec>,
    ) -> Result<Self> {
        let edges = edges
            .into_iter()
            .map(|(u, v, p, w)| Edge {
                u: OfflineId(u),
                v: OnlineId(v),
                probability: p,
                weight: w,
            })
            .collect();
        Self::assemble(
            offline,
            online,
            edges,
            constraints,
            WeightMode::EdgeWeighted,
            None,
        )
    }

    /// Vertex-weighted constructor: edge weights are derived from the
    /// offline weights, so the two representations cannot drift apart.
    /// `edges` are `(u, v, probability)`.
    pub fn vertex_weighted(
        offline: Vec<String>,
        online: Vec<String>,
        vertex_weights: Vec<f64>,
        edges: Vec<(usize, usize, f64)>,
        constraints: Vec<ConstraintSpec>,
    ) -> Result<Self> {
        if vertex_weights.len() != offline.len() {
            return Err(Error::Schema {
                path: "vertex_weights".into(),
                message: format!(
                    "{} weights for {} offline vertices",
                    vertex_weights.len(),
                    offline.len()
                ),
            });
        }
        let edges = edges
            .into_iter()
            .map(|(u, v, p)| {
                let w = vertex_weights.get(u).copied().unwrap_or(f64::NAN);
                Edge {
                    u: OfflineId(u),
                    v: OnlineId(v),
                    probability: p,
                    weight: w,
                }
            })
            .collect();
        Self::assemble(
            offline,
            online,
            edges,
            constraints,
            WeightMode::VertexWeighted,
            Some(vertex_weights),
        )
    }

    /// Assembles a graph without enforcing numeric invariants (out-of-range
    /// probabilities, inconsistent vertex weights, ...). Those are the
    /// business of [`validate_graph`], which must be able to report them on
    /// a constructed value. Structural references are still checked.
    pub fn from_raw_parts(
        offline: Vec<String>,
        online: Vec<String>,
        edges: Vec<Edge>,
        constraints: Vec<ConstraintSpec>,
        weight_mode: WeightMode,
        vertex_weights: Option<Vec<f64>>,
    ) -> Result<Self> {
        Self::assemble(
            offline,
            online,
            edges,
            constraints,
            weight_mode,
            vertex_weights,
        )
    }

    fn assemble(
        offline_names: Vec<String>,
        online_names: Vec<String>,
        edges: Vec<Edge>,
        constraints: Vec<ConstraintSpec>,
        weight_mode: WeightMode,
        vertex_weights: Option<Vec<f64>>,
    ) -> Result<Self> {
        for (i, e) in edges.iter().enumerate() {
            if e.u.0 >= offline_names.len() {
                return Err(Error::Schema {
                    path: format!("edges[{i}].u"),
                    message: format!("offline index {} out of range", e.u.0),
                });
            }
            if e.v.0 >= online_names.len() {
                return Err(Error::Schema {
                    path: format!("edges[{i}].v"),
                    message: format!("online index {} out of range", e.v.0),
                });
            }
        }
        if constraints.len() != online_names.len() {
            return Err(Error::Schema {
                path: "constraints".into(),
                message: format!(
                    "{} constraints for {} online vertices",
                    constraints.len(),
                    online_names.len()
                ),
            });
        }
        let mut adj_online = vec![Vec::new(); online_names.len()];
        let mut adj_offline = vec![Vec::new(); offline_names.len()];
        for (i, e) in edges.iter().enumerate() {
            adj_online[e.v.0].push(EdgeId(i));
            adj_offline[e.u.0].push(EdgeId(i));
        }
        Ok(StochasticGraph {
            offline_names,
            online_names,
            edges,
            constraints,
            weight_mode,
            vertex_weights,
            adj_online,
            adj_offline,
        })
    }

    pub fn offline_count(&self) -> usize {
        self.offline_names.len()
    }

    pub fn online_count(&self) -> usize {
        self.online_names.len()
    }

    pub fn offline_name(&self, u: OfflineId) -> &str {
        &self.offline_names[u.0]
    }

    pub fn online_name(&self, v: OnlineId) -> &str {
        &self.online_names[v.0]
    }

    pub fn offline_names(&self) -> &[String] {
        &self.offline_names
    }

    pub fn online_names(&self) -> &[String] {
        &self.online_names
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, e: EdgeId) -> Result<&Edge> {
        self.edges.get(e.0).ok_or(Error::EdgeNotInGraph(e.0))
    }

    pub fn weight_mode(&self) -> WeightMode {
        self.weight_mode
    }

    pub fn is_vertex_weighted(&self) -> bool {
        self.weight_mode == WeightMode::VertexWeighted
    }

    pub fn vertex_weights(&self) -> Option<&[f64]> {
        self.vertex_weights.as_deref()
    }

    pub fn vertex_weight(&self, u: OfflineId) -> Option<f64> {
        self.vertex_weights.as_ref().map(|w| w[u.0])
    }

    pub fn constraint(&self, v: OnlineId) -> &ConstraintSpec {
        &self.constraints[v.0]
    }

    pub fn constraints(&self) -> &[ConstraintSpec] {
        &self.constraints
    }

    /// Incident edges of an online vertex, ascending edge id.
    pub fn incident_edges(&self, v: OnlineId) -> &[EdgeId] {
        &self.adj_online[v.0]
    }

    pub fn incident_edges_offline(&self, u: OfflineId) -> &[EdgeId] {
        &self.adj_offline[u.0]
    }

    pub fn offline_ids(&self) -> impl Iterator<Item = OfflineId> {
        (0..self.offline_names.len()).map(OfflineId)
    }

    pub fn online_ids(&self) -> impl Iterator<Item = OnlineId> {
        (0..self.online_names.len()).map(OnlineId)
    }

    pub fn offline_id_by_name(&self, name: &str) -> Result<OfflineId> {
        self.offline_names
            .iter()
            .position(|n| n == name)
            .map(OfflineId)
            .ok_or_else(|| Error::UnknownVertex(name.into()))
    }

    pub fn online_id_by_name(&self, name: &str) -> Result<OnlineId> {
        self.online_names
            .iter()
            .position(|n| n == name)
            .map(OnlineId)
            .ok_or_else(|| Error::UnknownVertex(name.into()))
    }

    /// Membership query for a probe string at `v`, checking incidence.
    pub fn membership(&self, v: OnlineId, s: &ProbeString) -> Result<bool> {
        for &e in s.edges() {
            let edge = self.edge(e)?;
            if edge.v != v {
                return Err(Error::EdgeNotIncident {
                    edge: e.0,
                    vertex: self.online_name(v).into(),
                });
            }
        }
        Ok(self.constraint(v).is_member(s.edges()))
    }

    /// Builds a [`VertexSet`] from vertex names (offline and online mixed).
    pub fn vertex_set_from_names<'a, I: IntoIterator<Item = &'a str>>(
        &self,
        names: I,
    ) -> Result<VertexSet> {
        let mut set = VertexSet::default();
        for name in names {
            if let Ok(u) = self.offline_id_by_name(name) {
                set.offline.insert(u);
            } else {
                set.online.insert(self.online_id_by_name(name)?);
            }
        }
        Ok(set)
    }

    /// Induced stochastic subgraph `G[S]`: vertices of `S`, edges with both
    /// endpoints in `S`, constraints restricted to strings over surviving
    /// edges.
    pub fn induced_subgraph(&self, s: &VertexSet) -> Result<StochasticGraph> {
        Ok(self.induced_subgraph_with_maps(s)?.0)
    }

    /// Convenience for the common case of keeping all of `U` and a subset
    /// of `V`.
    pub fn induced_on_online_subset(
        &self,
        keep: OnlineSet,
    ) -> Result<(StochasticGraph, SubgraphMaps)> {
        let s = VertexSet {
            offline: self.offline_ids().collect(),
            online: keep.iter().filter(|v| v.0 < self.online_count()).collect(),
        };
        self.induced_subgraph_with_maps(&s)
    }

    /// As [`induced_subgraph`], additionally returning the id maps from
    /// subgraph indices back to parent indices.
    pub fn induced_subgraph_with_maps(
        &self,
        s: &VertexSet,
    ) -> Result<(StochasticGraph, SubgraphMaps)> {
        for &u in &s.offline {
            if u.0 >= self.offline_count() {
                return Err(Error::UnknownVertex(format!("{u}")));
            }
        }
        for &v in &s.online {
            if v.0 >= self.online_count() {
                return Err(Error::UnknownVertex(format!("{v}")));
            }
        }
        // Vertices keep their original relative order, so inducing on the
        // full vertex set is the identity.
        let offline_ids: Vec<OfflineId> = self
            .offline_ids()
            .filter(|u| s.offline.contains(u))
            .collect();
        let online_ids: Vec<OnlineId> =
            self.online_ids().filter(|v| s.online.contains(v)).collect();
        let mut offline_map = BTreeMap::new();
        let mut online_map = BTreeMap::new();
        for (new, &old) in offline_ids.iter().enumerate() {
            offline_map.insert(old, OfflineId(new));
        }
        for (new, &old) in online_ids.iter().enumerate() {
            online_map.insert(old, OnlineId(new));
        }

        let mut edge_to_parent = Vec::new();
        let mut edge_map = BTreeMap::new();
        let mut edges = Vec::new();
        for (i, e) in self.edges.iter().enumerate() {
            if let (Some(&nu), Some(&nv)) = (offline_map.get(&e.u), online_map.get(&e.v)) {
                let new_id = EdgeId(edges.len());
                edge_map.insert(EdgeId(i), new_id);
                edge_to_parent.push(EdgeId(i));
                edges.push(Edge { u: nu, v: nv, ..*e });
            }
        }

        let remap_string = |string: &[EdgeId]| -> Option<Vec<EdgeId>> {
            string.iter().map(|e| edge_map.get(e).copied()).collect()
        };
        let constraints = online_ids
            .iter()
            .map(|&old_v| match self.constraint(old_v) {
                ConstraintSpec::Patience(l) => ConstraintSpec::Patience(*l),
                ConstraintSpec::Budget { limit, costs } => ConstraintSpec::Budget {
                    limit: *limit,
                    costs: costs
                        .iter()
                        .filter_map(|(e, c)| edge_map.get(e).map(|&ne| (ne, *c)))
                        .collect(),
                },
                ConstraintSpec::ExplicitStrings(members) => ConstraintSpec::ExplicitStrings(
                    members.iter().filter_map(|m| remap_string(m)).collect(),
                ),
                ConstraintSpec::ExplicitFamily(members) => ConstraintSpec::ExplicitFamily(
                    members.iter().filter_map(|m| remap_string(m)).collect(),
                ),
            })
            .collect();

        let graph = StochasticGraph::assemble(
            offline_ids
                .iter()
                .map(|&u| self.offline_names[u.0].clone())
                .collect(),
            online_ids
                .iter()
                .map(|&v| self.online_names[v.0].clone())
                .collect(),
            edges,
            constraints,
            self.weight_mode,
            self.vertex_weights
                .as_ref()
                .map(|w| offline_ids.iter().map(|&u| w[u.0]).collect()),
        )?;
        Ok((
            graph,
            SubgraphMaps {
                offline: offline_ids,
                online: online_ids,
                edges: edge_to_parent,
            },
        ))
    }
}

/// Maps from subgraph indices back to the parent graph's indices.
#[derive(Debug, Clone)]
pub struct SubgraphMaps {
    pub offline: Vec<OfflineId>,
    pub online: Vec<OnlineId>,
    pub edges: Vec<EdgeId>,
}

/// Checks every structural invariant and reports all violations. Never
/// panics; an empty report means the graph is valid.
pub fn validate_graph(g: &StochasticGraph) -> ValidationReport {
    let mut violations = Vec::new();

    let mut seen_pairs = BTreeSet::new();
    for (i, e) in g.edges().iter().enumerate() {
        if !seen_pairs.insert((e.u, e.v)) {
            violations.push(format!(
                "duplicate edge: edges[{i}] repeats pair ({}, {})",
                g.offline_name(e.u),
                g.online_name(e.v)
            ));
        }
        if !(0.0..=1.0).contains(&e.probability) || !e.probability.is_finite() {
            violations.push(format!(
                "probability out of range: edges[{i}] has p = {}",
                e.probability
            ));
        }
        if !(e.weight >= 0.0) || !e.weight.is_finite() {
            violations.push(format!("negative weight: edges[{i}] has w = {}", e.weight));
        }
    }

    if g.is_vertex_weighted() {
        match g.vertex_weights() {
            None => violations.push("vertex-weighted graph without vertex weights".into()),
            Some(w) => {
                for (i, e) in g.edges().iter().enumerate() {
                    if e.weight != w[e.u.0] {
                        violations.push(format!(
                            "vertex-weight inconsistency: edges[{i}] has w = {} but w_{} = {}",
                            e.weight,
                            g.offline_name(e.u),
                            w[e.u.0]
                        ));
                    }
                }
                for (u, wu) in w.iter().enumerate() {
                    if !(*wu >= 0.0) || !wu.is_finite() {
                        violations.push(format!(
                            "negative weight: vertex_weights[{}] = {wu}",
                            g.offline_name(OfflineId(u))
                        ));
                    }
                }
            }
        }
    }

    for v in g.online_ids() {
        let name = g.online_name(v);
        let incident: BTreeSet<EdgeId> = g.incident_edges(v).iter().copied().collect();
        match g.constraint(v) {
            ConstraintSpec::Patience(_) => {}
            ConstraintSpec::Budget { limit, costs } => {
                if !(*limit >= 0.0) {
                    violations.push(format!("constraint of {name}: negative budget {limit}"));
                }
                for (e, c) in costs {
                    if !incident.contains(e) {
                        violations.push(format!(
                            "constraint of {name}: cost references non-incident edge {e}"
                        ));
                    }
                    if !(*c >= 0.0) {
                        violations.push(format!(
                            "constraint of {name}: negative cost {c} on {e} breaks prefix closure"
                        ));
                    }
                }
            }
            ConstraintSpec::ExplicitStrings(members) => {
                for m in members {
                    if m.iter().any(|e| !incident.contains(e)) {
                        violations.push(format!(
                            "constraint of {name}: string references a non-incident edge"
                        ));
                        continue;
                    }
                    let distinct: BTreeSet<_> = m.iter().collect();
                    if distinct.len() != m.len() {
                        violations.push(format!("constraint of {name}: string repeats an edge"));
                        continue;
                    }
                    // Prefix closure, checked exhaustively.
                    for k in 1..m.len() {
                        if !members.contains(&m[..k].to_vec()) {
                            violations.push(format!(
                                "constraint of {name}: not prefix-closed (missing a length-{k} prefix)"
                            ));
                        }
                    }
                }
            }
            ConstraintSpec::ExplicitFamily(family) => {
                for m in family {
                    if m.iter().any(|e| !incident.contains(e)) {
                        violations.push(format!(
                            "constraint of {name}: family member references a non-incident edge"
                        ));
                        continue;
                    }
                    // Downward closure: removing any single element must stay
                    // in the family (the empty set is implicit).
                    for skip in 0..m.len() {
                        if m.len() == 1 {
                            continue;
                        }
                        let reduced: Vec<EdgeId> = m
                            .iter()
                            .enumerate()
                            .filter(|(i, _)| *i != skip)
                            .map(|(_, e)| *e)
                            .collect();
                        if !family.contains(&reduced) {
                            violations.push(format!(
                                "constraint of {name}: family not downward-closed (a member minus one element is missing)"
                            ));
                        }
                    }
                }
            }
        }
    }

    ValidationReport { violations }
}

//! JSON instance format.
//!
//! ```json
//! {
//!   "offline": ["u1", "u2"],
//!   "online": ["v1"],
//!   "weight_mode": "edge" | "vertex",
//!   "vertex_weights": {"u1": 3.0},            // vertex mode only
//!   "edges": [{"u": "u1", "v": "v1", "p": 0.5, "w": 3.0}],
//!   "constraints": {
//!     "v1": {"kind": "patience", "l": 2}
//!        | {"kind": "budget", "B": 5.0, "costs": {"u1": 2.0}}
//!        | {"kind": "strings", "members": [[["u1","v1"],["u2","v1"]]]}
//!        | {"kind": "family",  "members": [[["u1","v1"],["u2","v1"]]]}
//!   }
//! }
//! ```
//!
//! Edge references inside constraints are `[u, v]` name pairs; budget costs
//! are keyed by the offline vertex name (the online endpoint is implied).
//! Serialization is canonical — fixed field order, sorted maps — so
//! `serialize(parse(d)) == d` byte-for-byte on canonical documents. In
//! vertex mode the per-edge `"w"` may be omitted (it is derived from the
//! vertex weight); when present it is kept as given so that the validator
//! can report inconsistencies.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ConstraintSpec, Edge, EdgeId, StochasticGraph, WeightMode};

#[derive(Serialize, Deserialize)]
struct InstanceDoc {
    offline: Vec<String>,
    online: Vec<String>,
    weight_mode: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    vertex_weights: Option<BTreeMap<String, f64>>,
    edges: Vec<EdgeDoc>,
    constraints: BTreeMap<String, ConstraintDoc>,
}

#[derive(Serialize, Deserialize)]
struct EdgeDoc {
    u: String,
    v: String,
    p: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    w: Option<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind")]
enum ConstraintDoc {
    #[serde(rename = "patience")]
    Patience { l: usize },
    #[serde(rename = "budget")]
    Budget {
        #[serde(rename = "B")]
        b: f64,
        costs: BTreeMap<String, f64>,
    },
    #[serde(rename = "strings")]
    Strings { members: Vec<Vec<[String; 2]>> },
    #[serde(rename = "family")]
    Family { members: Vec<Vec<[String; 2]>> },
}

fn schema_err(path: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Schema {
        path: path.into(),
        message: message.into(),
    }
}

/// Parses a JSON document into a graph. Structural problems (unknown names,
/// missing fields, dangling references) are errors with the offending path;
/// numeric invariant violations are deliberately left to `validate_graph`.
pub fn parse_instance(text: &str) -> Result<StochasticGraph> {
    let doc: InstanceDoc =
        serde_json::from_str(text).map_err(|e| schema_err("$", e.to_string()))?;

    let weight_mode = match doc.weight_mode.as_str() {
        "edge" => WeightMode::EdgeWeighted,
        "vertex" => WeightMode::VertexWeighted,
        other => {
            return Err(schema_err(
                "weight_mode",
                format!("expected \"edge\" or \"vertex\", got \"{other}\""),
            ))
        }
    };

    let mut offline_index = BTreeMap::new();
    for (i, name) in doc.offline.iter().enumerate() {
        if offline_index.insert(name.clone(), i).is_some() {
            return Err(schema_err(
                format!("offline[{i}]"),
                format!("duplicate vertex name \"{name}\""),
            ));
        }
    }
    let mut online_index = BTreeMap::new();
    for (i, name) in doc.online.iter().enumerate() {
        if online_index.insert(name.clone(), i).is_some() {
            return Err(schema_err(
                format!("online[{i}]"),
                format!("duplicate vertex name \"{name}\""),
            ));
        }
    }

    let vertex_weights = match (weight_mode, &doc.vertex_weights) {
        (WeightMode::VertexWeighted, None) => {
            return Err(schema_err(
                "vertex_weights",
                "required when weight_mode is \"vertex\"",
            ));
        }
        (WeightMode::VertexWeighted, Some(map)) => {
            let mut weights = vec![0.0; doc.offline.len()];
            for (name, w) in map {
                let &i = offline_index.get(name).ok_or_else(|| {
                    schema_err(format!("vertex_weights.{name}"), "unknown offline vertex")
                })?;
                weights[i] = *w;
            }
            for name in doc.offline.iter() {
                if !map.contains_key(name) {
                    return Err(schema_err(
                        format!("vertex_weights.{name}"),
                        "missing weight",
                    ));
                }
            }
            Some(weights)
        }
        (WeightMode::EdgeWeighted, _) => None,
    };

    let mut edges = Vec::with_capacity(doc.edges.len());
    let mut edge_index: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for (i, e) in doc.edges.iter().enumerate() {
        let &u = offline_index.get(&e.u).ok_or_else(|| {
            schema_err(
                format!("edges[{i}].u"),
                format!("unknown offline vertex \"{}\"", e.u),
            )
        })?;
        let &v = online_index.get(&e.v).ok_or_else(|| {
            schema_err(
                format!("edges[{i}].v"),
                format!("unknown online vertex \"{}\"", e.v),
            )
        })?;
        let weight = match (e.w, &vertex_weights) {
            (Some(w), _) => w,
            (None, Some(weights)) => weights[u],
            (None, None) => {
                return Err(schema_err(
                    format!("edges[{i}].w"),
                    "required when weight_mode is \"edge\"",
                ))
            }
        };
        edge_index.insert((u, v), i);
        edges.push(Edge {
            u: crate::model::OfflineId(u),
            v: crate::model::OnlineId(v),
            probability: e.p,
            weight,
        });
    }

    let resolve_ref = |path: &str, r: &[String; 2]| -> Result<EdgeId> {
        let u = offline_index
            .get(&r[0])
            .ok_or_else(|| schema_err(path, format!("unknown offline vertex \"{}\"", r[0])))?;
        let v = online_index
            .get(&r[1])
            .ok_or_else(|| schema_err(path, format!("unknown online vertex \"{}\"", r[1])))?;
        edge_index
            .get(&(*u, *v))
            .map(|&i| EdgeId(i))
            .ok_or_else(|| schema_err(path, format!("no edge ({}, {})", r[0], r[1])))
    };

    let mut constraints = Vec::with_capacity(doc.online.len());
    for (vi, vname) in doc.online.iter().enumerate() {
        let cdoc = doc.constraints.get(vname).ok_or_else(|| {
            schema_err(
                format!("constraints.{vname}"),
                "missing constraint for online vertex",
            )
        })?;
        let spec = match cdoc {
            ConstraintDoc::Patience { l } => ConstraintSpec::Patience(*l),
            ConstraintDoc::Budget { b, costs } => {
                let mut cost_map = BTreeMap::new();
                for (uname, c) in costs {
                    let path = format!("constraints.{vname}.costs.{uname}");
                    let &u = offline_index
                        .get(uname)
                        .ok_or_else(|| schema_err(&path, "unknown offline vertex"))?;
                    let &ei = edge_index
                        .get(&(u, vi))
                        .ok_or_else(|| schema_err(&path, format!("no edge ({uname}, {vname})")))?;
                    cost_map.insert(EdgeId(ei), *c);
                }
                ConstraintSpec::Budget {
                    limit: *b,
                    costs: cost_map,
                }
            }
            ConstraintDoc::Strings { members } => {
                let path = format!("constraints.{vname}.members");
                let strings: Result<Vec<Vec<EdgeId>>> = members
                    .iter()
                    .map(|m| m.iter().map(|r| resolve_ref(&path, r)).collect())
                    .collect();
                ConstraintSpec::explicit_strings(strings?)
            }
            ConstraintDoc::Family { members } => {
                let path = format!("constraints.{vname}.members");
                let sets: Result<Vec<Vec<EdgeId>>> = members
                    .iter()
                    .map(|m| m.iter().map(|r| resolve_ref(&path, r)).collect())
                    .collect();
                ConstraintSpec::explicit_family(sets?)
            }
        };
        constraints.push(spec);
    }
    for name in doc.constraints.keys() {
        if !online_index.contains_key(name) {
            return Err(schema_err(
                format!("constraints.{name}"),
                "unknown online vertex",
            ));
        }
    }

    StochasticGraph::from_raw_parts(
        doc.offline,
        doc.online,
        edges,
        constraints,
        weight_mode,
        vertex_weights,
    )
}

/// Serializes a graph to the canonical JSON document.
pub fn serialize_instance(g: &StochasticGraph) -> String {
    let edge_ref = |e: EdgeId| -> [String; 2] {
        let edge = &g.edges()[e.0];
        [
            g.offline_name(edge.u).to_string(),
            g.online_name(edge.v).to_string(),
        ]
    };
    let doc = InstanceDoc {
        offline: g.offline_names().to_vec(),
        online: g.online_names().to_vec(),
        weight_mode: match g.weight_mode() {
            WeightMode::EdgeWeighted => "edge".into(),
            WeightMode::VertexWeighted => "vertex".into(),
        },
        vertex_weights: g.vertex_weights().map(|w| {
            g.offline_names()
                .iter()
                .zip(w)
                .map(|(n, w)| (n.clone(), *w))
                .collect()
        }),
        edges: g
            .edges()
            .iter()
            .map(|e| EdgeDoc {
                u: g.offline_name(e.u).to_string(),
                v: g.online_name(e.v).to_string(),
                p: e.probability,
                w: Some(e.weight),
            })
            .collect(),
        constraints: g
            .online_ids()
            .map(|v| {
                let cdoc = match g.constraint(v) {
                    ConstraintSpec::Patience(l) => ConstraintDoc::Patience { l: *l },
                    ConstraintSpec::Budget { limit, costs } => ConstraintDoc::Budget {
                        b: *limit,
                        costs: costs
                            .iter()
                            .map(|(e, c)| (g.offline_name(g.edges()[e.0].u).to_string(), *c))
                            .collect(),
                    },
                    ConstraintSpec::ExplicitStrings(members) => ConstraintDoc::Strings {
                        members: members
                            .iter()
                            .map(|m| m.iter().map(|&e| edge_ref(e)).collect())
                            .collect(),
                    },
                    ConstraintSpec::ExplicitFamily(members) => ConstraintDoc::Family {
                        members: members
                            .iter()
                            .map(|m| m.iter().map(|&e| edge_ref(e)).collect())
                            .collect(),
                    },
                };
                (g.online_name(v).to_string(), cdoc)
            })
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("instance serialization cannot fail")
}

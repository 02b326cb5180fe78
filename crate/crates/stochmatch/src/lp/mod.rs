//! Generic maximization LPs, a self-contained simplex solver, and the
//! builders for the relaxations used throughout: the configuration LP
//! (one variable per feasible probe string), the standard edge LPs (unit
//! and general patience), and the star-value LPs for the committal and
//! non-committal benchmarks.

mod simplex;

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::model::{EdgeId, OfflineSet, OnlineId, ProbeString, StochasticGraph};
use crate::probing::{enumerate_feasible_strings, enumeration_cap, expected_value, survival};
use crate::star::dp_opt;

pub use simplex::DenseStatus;

/// Row relation; variables are implicitly bounded below by zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
}

#[derive(Debug, Clone)]
pub struct LpRow {
    pub name: String,
    /// Sparse `(column, coefficient)` pairs.
    pub coeffs: Vec<(usize, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

/// A maximization LP in standard inequality form with named variables.
#[derive(Debug, Clone)]
pub struct LinearProgram {
    pub name: String,
    pub variable_names: Vec<String>,
    pub objective: Vec<f64>,
    pub rows: Vec<LpRow>,
    /// Semantic tag per variable name, e.g. which edge or probe string a
    /// column stands for.
    pub metadata: BTreeMap<String, String>,
}

impl LinearProgram {
    pub fn num_variables(&self) -> usize {
        self.variable_names.len()
    }

    /// Dumps the program in CPLEX-LP text format for cross-checking with
    /// external solvers. Default bounds (`0 ≤ x`) match this type's
    /// convention, so no Bounds section is emitted.
    pub fn to_cplex_lp(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("\\ {}\n", self.name));
        out.push_str("Maximize\n obj:");
        let mut first = true;
        for (j, &c) in self.objective.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            push_term(&mut out, c, &self.variable_names[j], &mut first);
        }
        if first {
            out.push_str(" 0 ");
            out.push_str(
                self.variable_names
                    .first()
                    .map(String::as_str)
                    .unwrap_or("x0"),
            );
        }
        out.push_str("\nSubject To\n");
        for row in &self.rows {
            if row.coeffs.is_empty() {
                continue;
            }
            out.push_str(&format!(" {}:", row.name));
            let mut first = true;
            for &(j, c) in &row.coeffs {
                if c == 0.0 {
                    continue;
                }
                push_term(&mut out, c, &self.variable_names[j], &mut first);
            }
            if first {
                out.push_str(" 0 ");
                out.push_str(&self.variable_names[row.coeffs[0].0]);
            }
            let rel = match row.relation {
                Relation::Le => "<=",
                Relation::Eq => "=",
            };
            out.push_str(&format!(" {} {}\n", rel, fmt_num(row.rhs)));
        }
        out.push_str("End\n");
        out
    }
}

fn push_term(out: &mut String, c: f64, name: &str, first: &mut bool) {
    if *first {
        if c < 0.0 {
            out.push_str(&format!(" -{} {}", fmt_num(-c), name));
        } else {
            out.push_str(&format!(" {} {}", fmt_num(c), name));
        }
        *first = false;
    } else if c < 0.0 {
        out.push_str(&format!(" - {} {}", fmt_num(-c), name));
    } else {
        out.push_str(&format!(" + {} {}", fmt_num(c), name));
    }
}

fn fmt_num(x: f64) -> String {
    let mut s = format!("{x}");
    if !s.contains('.') && !s.contains('e') && !s.contains("inf") && !s.contains("NaN") {
        s.push_str(".0");
    }
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Solver output. `assignment` maps variable names to values; `values`
/// holds the same data by column index.
#[derive(Debug, Clone)]
pub struct LpSolution {
    pub status: LpStatus,
    pub objective_value: f64,
    pub assignment: BTreeMap<String, f64>,
    pub values: Vec<f64>,
}

/// Solves an LP with the built-in simplex. Optimal solutions are
/// re-verified row by row before being returned; a verification failure is
/// an internal error, not a silent wrong answer.
pub fn solve_lp(lp: &LinearProgram) -> Result<LpSolution> {
    let ncols = lp.num_variables();
    let dense_rows: Vec<(Vec<f64>, Relation, f64)> = lp
        .rows
        .iter()
        .map(|r| {
            let mut coeffs = vec![0.0; ncols];
            for &(j, c) in &r.coeffs {
                coeffs[j] += c;
            }
            (coeffs, r.relation, r.rhs)
        })
        .collect();
    let result = simplex::solve_dense(ncols, &lp.objective, &dense_rows);
    let status = match result.status {
        DenseStatus::Optimal => LpStatus::Optimal,
        DenseStatus::Infeasible => LpStatus::Infeasible,
        DenseStatus::Unbounded => LpStatus::Unbounded,
    };
    if status == LpStatus::Optimal {
        for (row, (coeffs, rel, rhs)) in lp.rows.iter().zip(&dense_rows) {
            let lhs: f64 = coeffs
                .iter()
                .zip(&result.solution)
                .map(|(c, x)| c * x)
                .sum();
            let magnitude: f64 = coeffs
                .iter()
                .zip(&result.solution)
                .map(|(c, x)| (c * x).abs())
                .sum();
            let tol = 1e-9 * magnitude.max(rhs.abs()).max(1.0);
            let ok = match rel {
                Relation::Le => lhs <= rhs + tol,
                Relation::Eq => (lhs - rhs).abs() <= tol,
            };
            if !ok {
                return Err(Error::Internal(format!(
                    "solver returned an infeasible point: row {} has lhs {lhs}, rhs {rhs}",
                    row.name
                )));
            }
        }
    }
    Ok(LpSolution {
        status,
        objective_value: result.objective,
        assignment: lp
            .variable_names
            .iter()
            .cloned()
            .zip(result.solution.iter().copied())
            .collect(),
        values: result.solution,
    })
}

fn sanitize(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
        .collect()
}

/// The configuration LP plus the column structure needed to interpret its
/// solutions (which probe string each column stands for).
#[derive(Debug, Clone)]
pub struct ConfigLp {
    pub lp: LinearProgram,
    /// Column `j` is the probe string `columns[j].1` of vertex `columns[j].0`.
    pub columns: Vec<(OnlineId, ProbeString)>,
    /// Columns grouped per online vertex, in enumeration order.
    pub columns_by_vertex: Vec<Vec<usize>>,
}

impl ConfigLp {
    /// The probe-string distribution of `v` under a solution: pairs of
    /// `(string, probability)` including zero entries.
    pub fn distribution(&self, v: OnlineId, sol: &LpSolution) -> Vec<(ProbeString, f64)> {
        self.columns_by_vertex[v.0]
            .iter()
            .map(|&j| (self.columns[j].1.clone(), sol.values[j].max(0.0)))
            .collect()
    }
}

/// Builds the configuration LP: one variable per feasible probe string per
/// online vertex, `val(𝐞)` objective coefficients, a ≤ 1 matching row per
/// offline vertex weighted by the probability each string probes-and-wins
/// that vertex, and a distribution row `Σ x_v(𝐞) = 1` per online vertex.
pub fn build_lp_config(g: &StochasticGraph) -> Result<ConfigLp> {
    build_lp_config_with_cap(g, enumeration_cap())
}

pub fn build_lp_config_with_cap(g: &StochasticGraph, cap: usize) -> Result<ConfigLp> {
    let mut columns = Vec::new();
    let mut columns_by_vertex = vec![Vec::new(); g.online_count()];
    let mut names = Vec::new();
    let mut objective = Vec::new();
    let mut metadata = BTreeMap::new();
    for v in g.online_ids() {
        let fs = enumerate_feasible_strings(v, g.constraint(v), g.incident_edges(v), cap);
        if fs.truncated {
            return Err(Error::Truncated { cap });
        }
        for s in fs.strings {
            let j = columns.len();
            let name = format!("x{}_{}", j, sanitize(g.online_name(v)));
            let string_desc: Vec<String> = s
                .edges()
                .iter()
                .map(|&e| {
                    format!(
                        "({},{})",
                        g.offline_name(g.edges()[e.0].u),
                        g.online_name(g.edges()[e.0].v)
                    )
                })
                .collect();
            metadata.insert(
                name.clone(),
                format!("x_{}({})", g.online_name(v), string_desc.join(",")),
            );
            objective.push(expected_value(&s, g)?);
            names.push(name);
            columns_by_vertex[v.0].push(j);
            columns.push((v, s));
        }
    }

    let mut rows = Vec::new();
    for u in g.offline_ids() {
        let mut coeffs = Vec::new();
        for (j, (_, s)) in columns.iter().enumerate() {
            for (pos, &e) in s.edges().iter().enumerate() {
                let edge = &g.edges()[e.0];
                if edge.u == u {
                    let prefix = ProbeString::new(s.prefix(pos).to_vec())?;
                    coeffs.push((j, edge.probability * survival(&prefix, g)?));
                }
            }
        }
        rows.push(LpRow {
            name: format!("match_{}", sanitize(g.offline_name(u))),
            coeffs,
            relation: Relation::Le,
            rhs: 1.0,
        });
    }
    for v in g.online_ids() {
        rows.push(LpRow {
            name: format!("dist_{}", sanitize(g.online_name(v))),
            coeffs: columns_by_vertex[v.0].iter().map(|&j| (j, 1.0)).collect(),
            relation: Relation::Eq,
            rhs: 1.0,
        });
    }

    Ok(ConfigLp {
        lp: LinearProgram {
            name: "lp-config".into(),
            variable_names: names,
            objective,
            rows,
            metadata,
        },
        columns,
        columns_by_vertex,
    })
}

fn edge_var_name(g: &StochasticGraph, prefix: &str, e: EdgeId) -> String {
    let edge = &g.edges()[e.0];
    format!(
        "{prefix}{}_{}_{}",
        e.0,
        sanitize(g.offline_name(edge.u)),
        sanitize(g.online_name(edge.v))
    )
}

fn patience_of(g: &StochasticGraph, v: OnlineId) -> Result<usize> {
    match g.constraint(v) {
        crate::model::ConstraintSpec::Patience(l) => Ok(*l),
        _ => Err(Error::NonPatienceConstraint {
            vertex: g.online_name(v).into(),
        }),
    }
}

/// The standard unit-patience edge LP: one variable per edge, probability
/// rows on the offline side, cardinality rows on the online side.
pub fn build_lp_std_unit(g: &StochasticGraph) -> Result<LinearProgram> {
    for v in g.online_ids() {
        if patience_of(g, v).map_err(|_| Error::NonUnitPatience {
            vertex: g.online_name(v).into(),
        })? != 1
        {
            return Err(Error::NonUnitPatience {
                vertex: g.online_name(v).into(),
            });
        }
    }
    let names: Vec<String> = g
        .edges()
        .iter()
        .enumerate()
        .map(|(i, _)| edge_var_name(g, "x", EdgeId(i)))
        .collect();
    let metadata = names
        .iter()
        .enumerate()
        .map(|(i, n)| {
            let e = &g.edges()[i];
            (
                n.clone(),
                format!("x_({},{})", g.offline_name(e.u), g.online_name(e.v)),
            )
        })
        .collect();
    let objective: Vec<f64> = g.edges().iter().map(|e| e.weight * e.probability).collect();
    let mut rows = Vec::new();
    for u in g.offline_ids() {
        rows.push(LpRow {
            name: format!("off_{}", sanitize(g.offline_name(u))),
            coeffs: g
                .incident_edges_offline(u)
                .iter()
                .map(|&e| (e.0, g.edges()[e.0].probability))
                .collect(),
            relation: Relation::Le,
            rhs: 1.0,
        });
    }
    for v in g.online_ids() {
        rows.push(LpRow {
            name: format!("on_{}", sanitize(g.online_name(v))),
            coeffs: g.incident_edges(v).iter().map(|&e| (e.0, 1.0)).collect(),
            relation: Relation::Le,
            rhs: 1.0,
        });
    }
    Ok(LinearProgram {
        name: "lp-std-unit".into(),
        variable_names: names,
        objective,
        rows,
        metadata,
    })
}

/// The standard edge LP for general patience values: probability rows on
/// both sides, a patience row per online vertex, and `x ≤ 1` caps.
pub fn build_lp_std(g: &StochasticGraph) -> Result<LinearProgram> {
    let patience: Vec<usize> = g
        .online_ids()
        .map(|v| patience_of(g, v))
        .collect::<Result<_>>()?;
    let names: Vec<String> = g
        .edges()
        .iter()
        .enumerate()
        .map(|(i, _)| edge_var_name(g, "x", EdgeId(i)))
        .collect();
    let metadata = names
        .iter()
        .enumerate()
        .map(|(i, n)| {
            let e = &g.edges()[i];
            (
                n.clone(),
                format!("x_({},{})", g.offline_name(e.u), g.online_name(e.v)),
            )
        })
        .collect();
    let objective: Vec<f64> = g.edges().iter().map(|e| e.weight * e.probability).collect();
    let mut rows = Vec::new();
    for u in g.offline_ids() {
        rows.push(LpRow {
            name: format!("off_{}", sanitize(g.offline_name(u))),
            coeffs: g
                .incident_edges_offline(u)
                .iter()
                .map(|&e| (e.0, g.edges()[e.0].probability))
                .collect(),
            relation: Relation::Le,
            rhs: 1.0,
        });
    }
    for v in g.online_ids() {
        rows.push(LpRow {
            name: format!("onp_{}", sanitize(g.online_name(v))),
            coeffs: g
                .incident_edges(v)
                .iter()
                .map(|&e| (e.0, g.edges()[e.0].probability))
                .collect(),
            relation: Relation::Le,
            rhs: 1.0,
        });
        rows.push(LpRow {
            name: format!("pat_{}", sanitize(g.online_name(v))),
            coeffs: g.incident_edges(v).iter().map(|&e| (e.0, 1.0)).collect(),
            relation: Relation::Le,
            rhs: patience[v.0] as f64,
        });
    }
    for (i, _) in g.edges().iter().enumerate() {
        rows.push(LpRow {
            name: format!("cap_e{i}"),
            coeffs: vec![(i, 1.0)],
            relation: Relation::Le,
            rhs: 1.0,
        });
    }
    Ok(LinearProgram {
        name: "lp-std".into(),
        variable_names: names,
        objective,
        rows,
        metadata,
    })
}

/// Maximum offline-side size for the subset-row LPs (`2^|U|` rows per
/// online vertex).
pub const LP_DP_OFFLINE_CAP: usize = 15;

pub type StarValueMap = BTreeMap<(OnlineId, OfflineSet), f64>;

/// Committal star values `OPT(v, R)` for every online vertex and every
/// subset of its neighbourhood, as consumed by [`build_lp_dp`].
pub fn star_value_map(g: &StochasticGraph) -> Result<StarValueMap> {
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
            map.insert((v, r), dp_opt(g, v, r)?.value);
        }
    }
    Ok(map)
}

fn check_lp_dp_preconditions(g: &StochasticGraph) -> Result<()> {
    if !g.is_vertex_weighted() {
        return Err(Error::NotVertexWeighted);
    }
    if g.offline_count() > LP_DP_OFFLINE_CAP {
        return Err(Error::CapExceeded {
            cap: LP_DP_OFFLINE_CAP,
        });
    }
    Ok(())
}

/// The star-value LP for the committal benchmark: per-edge variables with
/// offline probability rows and, for every `(v, R)`, a row capping the
/// expected reward collected from `R` by `OPT(v, R)`.
pub fn build_lp_dp(g: &StochasticGraph, star_values: &StarValueMap) -> Result<LinearProgram> {
    check_lp_dp_preconditions(g)?;
    let names: Vec<String> = g
        .edges()
        .iter()
        .enumerate()
        .map(|(i, _)| edge_var_name(g, "x", EdgeId(i)))
        .collect();
    let metadata = names
        .iter()
        .enumerate()
        .map(|(i, n)| {
            let e = &g.edges()[i];
            (
                n.clone(),
                format!("x_({},{})", g.offline_name(e.u), g.online_name(e.v)),
            )
        })
        .collect();
    let objective: Vec<f64> = g.edges().iter().map(|e| e.weight * e.probability).collect();
    let mut rows = Vec::new();
    for u in g.offline_ids() {
        rows.push(LpRow {
            name: format!("off_{}", sanitize(g.offline_name(u))),
            coeffs: g
                .incident_edges_offline(u)
                .iter()
                .map(|&e| (e.0, g.edges()[e.0].probability))
                .collect(),
            relation: Relation::Le,
            rhs: 1.0,
        });
    }
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
            let opt = *star_values
                .get(&(v, r))
                .ok_or_else(|| Error::Internal(format!("missing star value for ({v}, {r:?})")))?;
            let coeffs: Vec<(usize, f64)> = g
                .incident_edges(v)
                .iter()
                .filter(|&&e| r.contains(g.edges()[e.0].u))
                .map(|&e| {
                    let edge = &g.edges()[e.0];
                    (e.0, edge.weight * edge.probability)
                })
                .collect();
            rows.push(LpRow {
                name: format!("star_{}_{:x}", sanitize(g.online_name(v)), r.0),
                coeffs,
                relation: Relation::Le,
                rhs: opt,
            });
        }
    }
    Ok(LinearProgram {
        name: "lp-dp".into(),
        variable_names: names,
        objective,
        rows,
        metadata,
    })
}

/// The non-committal variant: paired `(x, z)` variables per edge, `z`
/// capped by `p·x`, the matched mass `z` bounded per offline vertex, and
/// subset rows against `OPT_non(v, R)`.
pub fn build_lp_dp_non(g: &StochasticGraph, non_values: &StarValueMap) -> Result<LinearProgram> {
    check_lp_dp_preconditions(g)?;
    let ne = g.edges().len();
    let mut names: Vec<String> = g
        .edges()
        .iter()
        .enumerate()
        .map(|(i, _)| edge_var_name(g, "x", EdgeId(i)))
        .collect();
    names.extend(
        g.edges()
            .iter()
            .enumerate()
            .map(|(i, _)| edge_var_name(g, "z", EdgeId(i))),
    );
    let mut metadata = BTreeMap::new();
    for (i, e) in g.edges().iter().enumerate() {
        metadata.insert(
            names[i].clone(),
            format!("x_({},{})", g.offline_name(e.u), g.online_name(e.v)),
        );
        metadata.insert(
            names[ne + i].clone(),
            format!("z_({},{})", g.offline_name(e.u), g.online_name(e.v)),
        );
    }
    let mut objective = vec![0.0; 2 * ne];
    for (i, e) in g.edges().iter().enumerate() {
        objective[ne + i] = e.weight;
    }
    let mut rows = Vec::new();
    for u in g.offline_ids() {
        rows.push(LpRow {
            name: format!("off_{}", sanitize(g.offline_name(u))),
            coeffs: g
                .incident_edges_offline(u)
                .iter()
                .map(|&e| (ne + e.0, 1.0))
                .collect(),
            relation: Relation::Le,
            rhs: 1.0,
        });
    }
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
            let opt = *non_values.get(&(v, r)).ok_or_else(|| {
                Error::Internal(format!("missing non-committal star value for ({v}, {r:?})"))
            })?;
            let coeffs: Vec<(usize, f64)> = g
                .incident_edges(v)
                .iter()
                .filter(|&&e| r.contains(g.edges()[e.0].u))
                .map(|&e| (ne + e.0, g.edges()[e.0].weight))
                .collect();
            rows.push(LpRow {
                name: format!("star_{}_{:x}", sanitize(g.online_name(v)), r.0),
                coeffs,
                relation: Relation::Le,
                rhs: opt,
            });
        }
    }
    for (i, e) in g.edges().iter().enumerate() {
        rows.push(LpRow {
            name: format!("link_e{i}"),
            coeffs: vec![(ne + i, 1.0), (i, -e.probability)],
            relation: Relation::Le,
            rhs: 0.0,
        });
    }
    Ok(LinearProgram {
        name: "lp-dp-non".into(),
        variable_names: names,
        objective,
        rows,
        metadata,
    })
}

/// Edge marginals `x̃_{u,v}` induced by a configuration-LP solution: the
/// probability each edge gets probed when strings are drawn from the
/// per-vertex distributions.
pub fn edge_marginals_from_config_solution(
    g: &StochasticGraph,
    config: &ConfigLp,
    sol: &LpSolution,
) -> Result<BTreeMap<EdgeId, f64>> {
    let mut marginals: BTreeMap<EdgeId, f64> = BTreeMap::new();
    for (i, _) in g.edges().iter().enumerate() {
        marginals.insert(EdgeId(i), 0.0);
    }
    for (j, (_, s)) in config.columns.iter().enumerate() {
        let x = sol.values[j];
        if x == 0.0 {
            continue;
        }
        for (pos, &e) in s.edges().iter().enumerate() {
            let prefix = ProbeString::new(s.prefix(pos).to_vec())?;
            *marginals.get_mut(&e).unwrap() += survival(&prefix, g)? * x;
        }
    }
    Ok(marginals)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ConstraintSpec;

    fn prop_a1_star() -> StochasticGraph {
        StochasticGraph::vertex_weighted(
            vec!["u1".into(), "u2".into(), "u3".into()],
            vec!["v".into()],
            vec![3.0, 4.0, 98.0],
            vec![(0, 0, 0.8), (1, 0, 0.6), (2, 0, 0.01)],
            vec![ConstraintSpec::Patience(2)],
        )
        .unwrap()
    }

    fn footnote_star(n: usize) -> StochasticGraph {
        StochasticGraph::vertex_weighted(
            (0..n).map(|i| format!("u{}", i + 1)).collect(),
            vec!["v".into()],
            vec![1.0; n],
            (0..n).map(|i| (i, 0, 1.0 / n as f64)).collect(),
            vec![ConstraintSpec::Patience(1)],
        )
        .unwrap()
    }

    #[test]
    fn config_lp_on_separation_star_matches_best_string() {
        let config = build_lp_config(&prop_a1_star()).unwrap();
        let sol = solve_lp(&config.lp).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!(
            (sol.objective_value - 3.36).abs() < 1e-9,
            "got {}",
            sol.objective_value
        );
    }

    #[test]
    fn config_lp_trivial_on_empty_graph() {
        let g = StochasticGraph::edge_weighted(vec![], vec![], vec![], vec![]).unwrap();
        let config = build_lp_config(&g).unwrap();
        let sol = solve_lp(&config.lp).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert_eq!(sol.objective_value, 0.0);
    }

    #[test]
    fn config_lp_single_sure_edge() {
        let g = StochasticGraph::edge_weighted(
            vec!["u".into()],
            vec!["v".into()],
            vec![(0, 0, 1.0, 1.0)],
            vec![ConstraintSpec::Patience(1)],
        )
        .unwrap();
        let config = build_lp_config(&g).unwrap();
        let sol = solve_lp(&config.lp).unwrap();
        assert!((sol.objective_value - 1.0).abs() < 1e-9);
        // All the mass sits on the single-edge string.
        let dist = config.distribution(OnlineId(0), &sol);
        let on_edge: f64 = dist
            .iter()
            .filter(|(s, _)| s.len() == 1)
            .map(|(_, x)| x)
            .sum();
        assert!((on_edge - 1.0).abs() < 1e-9);
    }

    #[test]
    fn config_lp_footnote_star_is_one_over_n() {
        let config = build_lp_config(&footnote_star(3)).unwrap();
        let sol = solve_lp(&config.lp).unwrap();
        assert!((sol.objective_value - 1.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn std_unit_footnote_star_is_one_over_n() {
        let lp = build_lp_std_unit(&footnote_star(3)).unwrap();
        let sol = solve_lp(&lp).unwrap();
        assert!((sol.objective_value - 1.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn std_unit_perfect_matching_relaxation() {
        let g = StochasticGraph::edge_weighted(
            vec!["u1".into(), "u2".into()],
            vec!["v1".into(), "v2".into()],
            vec![
                (0, 0, 1.0, 1.0),
                (1, 0, 1.0, 1.0),
                (0, 1, 1.0, 1.0),
                (1, 1, 1.0, 1.0),
            ],
            vec![ConstraintSpec::Patience(1), ConstraintSpec::Patience(1)],
        )
        .unwrap();
        let sol = solve_lp(&build_lp_std_unit(&g).unwrap()).unwrap();
        assert!((sol.objective_value - 2.0).abs() < 1e-9);
    }

    #[test]
    fn std_unit_rejects_other_patience() {
        assert!(build_lp_std_unit(&prop_a1_star()).is_err());
    }

    #[test]
    fn std_general_matches_unit_on_unit_patience() {
        let g = footnote_star(4);
        let a = solve_lp(&build_lp_std_unit(&g).unwrap())
            .unwrap()
            .objective_value;
        let b = solve_lp(&build_lp_std(&g).unwrap())
            .unwrap()
            .objective_value;
        assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn std_general_zero_patience_means_zero() {
        let g = StochasticGraph::edge_weighted(
            vec!["u".into()],
            vec!["v".into()],
            vec![(0, 0, 0.9, 5.0)],
            vec![ConstraintSpec::Patience(0)],
        )
        .unwrap();
        let sol = solve_lp(&build_lp_std(&g).unwrap()).unwrap();
        assert!(sol.objective_value.abs() < 1e-9);
    }

    #[test]
    fn std_general_is_weaker_than_config_on_separation_star() {
        let g = prop_a1_star();
        let std = solve_lp(&build_lp_std(&g).unwrap())
            .unwrap()
            .objective_value;
        assert!(
            std >= 3.36 - 1e-9,
            "lp-std must dominate the committal optimum, got {std}"
        );
    }

    #[test]
    fn lp_dp_single_pair() {
        let g = StochasticGraph::vertex_weighted(
            vec!["u".into()],
            vec!["v".into()],
            vec![2.0],
            vec![(0, 0, 0.4)],
            vec![ConstraintSpec::Patience(1)],
        )
        .unwrap();
        let values = star_value_map(&g).unwrap();
        let sol = solve_lp(&build_lp_dp(&g, &values).unwrap()).unwrap();
        assert!((sol.objective_value - 0.8).abs() < 1e-9);
    }

    #[test]
    fn lp_dp_separation_star_binds_at_full_set() {
        let g = prop_a1_star();
        let values = star_value_map(&g).unwrap();
        let sol = solve_lp(&build_lp_dp(&g, &values).unwrap()).unwrap();
        assert!(
            (sol.objective_value - 3.36).abs() < 1e-9,
            "got {}",
            sol.objective_value
        );
    }

    #[test]
    fn lp_dp_non_single_edge() {
        let g = StochasticGraph::vertex_weighted(
            vec!["u".into()],
            vec!["v".into()],
            vec![2.0],
            vec![(0, 0, 0.4)],
            vec![ConstraintSpec::Patience(1)],
        )
        .unwrap();
        let values = crate::offline::noncommittal_star_value_map(&g).unwrap();
        let sol = solve_lp(&build_lp_dp_non(&g, &values).unwrap()).unwrap();
        assert!((sol.objective_value - 0.8).abs() < 1e-9);
    }

    #[test]
    fn lp_dp_non_separation_star_hits_noncommittal_value() {
        let g = prop_a1_star();
        let values = crate::offline::noncommittal_star_value_map(&g).unwrap();
        let sol = solve_lp(&build_lp_dp_non(&g, &values).unwrap()).unwrap();
        assert!(
            (sol.objective_value - 3.924).abs() < 1e-9,
            "got {}",
            sol.objective_value
        );
    }

    #[test]
    fn marginals_all_mass_on_empty_string() {
        let g = prop_a1_star();
        let config = build_lp_config(&g).unwrap();
        let mut values = vec![0.0; config.lp.num_variables()];
        let lambda = config.columns_by_vertex[0]
            .iter()
            .find(|&&j| config.columns[j].1.is_empty())
            .copied()
            .unwrap();
        values[lambda] = 1.0;
        let sol = LpSolution {
            status: LpStatus::Optimal,
            objective_value: 0.0,
            assignment: BTreeMap::new(),
            values,
        };
        let marginals = edge_marginals_from_config_solution(&g, &config, &sol).unwrap();
        assert!(marginals.values().all(|&m| m == 0.0));
    }

    #[test]
    fn marginals_two_edge_string() {
        // Mass 1 on ((e0), (e1)) with p0 = 0.6: x̃_{e0} = 1, x̃_{e1} = 0.4.
        let g = StochasticGraph::edge_weighted(
            vec!["a".into(), "b".into()],
            vec!["v".into()],
            vec![(0, 0, 0.6, 1.0), (1, 0, 0.5, 1.0)],
            vec![ConstraintSpec::Patience(2)],
        )
        .unwrap();
        let config = build_lp_config(&g).unwrap();
        let target = config
            .columns
            .iter()
            .position(|(_, s)| s.edges() == [EdgeId(0), EdgeId(1)])
            .unwrap();
        let mut values = vec![0.0; config.lp.num_variables()];
        values[target] = 1.0;
        let sol = LpSolution {
            status: LpStatus::Optimal,
            objective_value: 0.0,
            assignment: BTreeMap::new(),
            values,
        };
        let marginals = edge_marginals_from_config_solution(&g, &config, &sol).unwrap();
        assert!((marginals[&EdgeId(0)] - 1.0).abs() < 1e-12);
        assert!((marginals[&EdgeId(1)] - 0.4).abs() < 1e-12);
    }

    #[test]
    fn cplex_dump_mentions_rows_and_variables() {
        let g = prop_a1_star();
        let lp = build_lp_config(&g).unwrap().lp;
        let text = lp.to_cplex_lp();
        assert!(text.starts_with("\\ lp-config"));
        assert!(text.contains("Maximize"));
        assert!(text.contains("Subject To"));
        assert!(text.contains("match_u1"));
        assert!(text.contains("= 1.0"));
        assert!(text.trim_end().ends_with("End"));
    }
}

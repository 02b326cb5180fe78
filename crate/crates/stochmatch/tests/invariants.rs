//! Cross-module invariants: serialization round-trips, LP dominance
//! relations, conditional optimality of the greedy runner, the pathwise
//! dual lower bound on coupled executions, and oracle cross-checks
//! between independent implementations.

use std::collections::BTreeMap;

use itertools::Itertools;
use proptest::prelude::*;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use stochmatch::json::{parse_instance, serialize_instance};
use stochmatch::lp::{
    build_lp_config, build_lp_dp, build_lp_dp_non, build_lp_std_unit, solve_lp, star_value_map,
};
use stochmatch::model::{
    validate_graph, ConstraintSpec, EdgeId, OfflineSet, OnlineId, OnlineSet, ProbeString,
    StochasticGraph,
};
use stochmatch::offline::noncommittal_star_value_map;
use stochmatch::online::{
    coupled_deletion_run, validate_run_record, ArrivalOrder, EdgeStates, GCurve, GreedyDpRunner,
};
use stochmatch::probing::{enumerate_feasible_strings, expected_value};
use stochmatch::sim::{
    exact_expected_value, generate_random_instance, monte_carlo, AlgorithmId, GeneratorParams,
    OrderModel, ProbabilityRegime,
};
use stochmatch::star::{opt_star_value, verify_rankable};

fn mixed_params(seed: u64) -> GeneratorParams {
    GeneratorParams {
        offline_range: (1, 4),
        online_range: (1, 4),
        edge_density: 0.75,
        patience_range: (1, 3),
        vertex_weighted: seed % 2 == 0,
        ..GeneratorParams::default()
    }
}

#[test]
fn serialization_roundtrip_is_identity_on_100_instances() {
    for seed in 0..100u64 {
        let g = generate_random_instance(&mixed_params(seed), seed);
        let text = serialize_instance(&g);
        let parsed = parse_instance(&text).unwrap_or_else(|e| panic!("seed {seed}: {e}"));
        assert_eq!(parsed, g, "seed {seed}: parse(serialize(g)) != g");
        // Canonical form: a second serialization is byte-identical.
        assert_eq!(
            serialize_instance(&parsed),
            text,
            "seed {seed}: bytes differ"
        );
    }
}

#[test]
fn generated_instances_validate_clean() {
    for seed in 0..50u64 {
        let g = generate_random_instance(&mixed_params(seed), seed);
        let report = validate_graph(&g);
        assert!(report.is_valid(), "seed {seed}: {report}");
    }
}

#[test]
fn lp_config_grows_with_online_vertices() {
    for seed in 0..20u64 {
        let params = GeneratorParams {
            offline_range: (2, 3),
            online_range: (3, 4),
            ..GeneratorParams::default()
        };
        let g = generate_random_instance(&params, seed);
        let mut last = 0.0;
        for k in 1..=g.online_count() {
            let subset: OnlineSet = (0..k).map(OnlineId).collect();
            let (sub, _) = g.induced_on_online_subset(subset).unwrap();
            let value = solve_lp(&build_lp_config(&sub).unwrap().lp)
                .unwrap()
                .objective_value;
            assert!(
                value >= last - 1e-9,
                "seed {seed}: LP optimum dropped from {last} to {value} at k = {k}"
            );
            last = value;
        }
    }
}

#[test]
fn lp_std_unit_never_exceeds_lp_dp() {
    // On unit-patience graphs the edge LP is the tighter relaxation: any
    // point with Σ_{∂v} x ≤ 1 satisfies every subset row, because
    // Σ_{u∈R} w·p·x ≤ max_{u∈R}(w·p) · Σ x ≤ OPT(v,R).
    let params = GeneratorParams {
        offline_range: (1, 3),
        online_range: (1, 3),
        patience_range: (1, 1),
        vertex_weighted: true,
        ..GeneratorParams::default()
    };
    for seed in 0..100u64 {
        let g = generate_random_instance(&params, seed);
        let dp = solve_lp(&build_lp_dp(&g, &star_value_map(&g).unwrap()).unwrap())
            .unwrap()
            .objective_value;
        let std_unit = solve_lp(&build_lp_std_unit(&g).unwrap())
            .unwrap()
            .objective_value;
        assert!(
            std_unit <= dp + 1e-7,
            "seed {seed}: lp-std-unit {std_unit} > lp-dp {dp}"
        );
    }
}

#[test]
fn lp_dp_non_equals_lp_dp_on_unweighted_unit_patience() {
    let params = GeneratorParams {
        offline_range: (2, 3),
        online_range: (2, 3),
        patience_range: (1, 1),
        weight_range: (1.0, 1.0),
        vertex_weighted: true,
        ..GeneratorParams::default()
    };
    for seed in 0..25u64 {
        let g = generate_random_instance(&params, seed);
        let dp = solve_lp(&build_lp_dp(&g, &star_value_map(&g).unwrap()).unwrap())
            .unwrap()
            .objective_value;
        let dp_non =
            solve_lp(&build_lp_dp_non(&g, &noncommittal_star_value_map(&g).unwrap()).unwrap())
                .unwrap()
                .objective_value;
        assert!(
            (dp - dp_non).abs() <= 1e-7,
            "seed {seed}: lp-dp {dp} != lp-dp-non {dp_non}"
        );
    }
}

/// Every positive-probability edge-state assignment of a graph, with its
/// probability. Independent of the library's internal enumeration.
fn assignments(g: &StochasticGraph) -> Vec<(u64, f64)> {
    let m = g.edges().len();
    (0u64..(1 << m))
        .map(|mask| {
            let mut p = 1.0;
            for (i, e) in g.edges().iter().enumerate() {
                p *= if mask >> i & 1 == 1 {
                    e.probability
                } else {
                    1.0 - e.probability
                };
            }
            (mask, p)
        })
        .filter(|&(_, p)| p > 0.0)
        .collect()
}

#[test]
fn greedy_dp_is_conditionally_optimal_per_arrival() {
    // Conditioned on the free set R when v arrives, the expected matched
    // weight at v equals OPT(v, R): the probes at v are independent of
    // how R came about.
    let params = GeneratorParams {
        offline_range: (2, 3),
        online_range: (2, 3),
        edge_density: 0.8,
        patience_range: (1, 2),
        vertex_weighted: true,
        ..GeneratorParams::default()
    };
    for seed in 0..10u64 {
        let g = generate_random_instance(&params, seed);
        let runner = GreedyDpRunner::new(&g);
        let order = ArrivalOrder::identity(g.online_count());
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut mass: BTreeMap<(OnlineId, OfflineSet), f64> = BTreeMap::new();
        let mut gain: BTreeMap<(OnlineId, OfflineSet), f64> = BTreeMap::new();
        for (states, p) in assignments(&g) {
            let (_, arrivals) = runner
                .run(&order, EdgeStates::Fixed(states), &mut rng, None)
                .unwrap();
            for info in arrivals {
                let key = (info.vertex, info.free_before);
                *mass.entry(key).or_insert(0.0) += p;
                let w = info.matched.map(|e| g.edges()[e.0].weight).unwrap_or(0.0);
                *gain.entry(key).or_insert(0.0) += p * w;
            }
        }
        for ((v, r), m) in mass {
            let conditional = gain[&(v, r)] / m;
            let opt = opt_star_value(&g, v, r).unwrap();
            assert!(
                (conditional - opt).abs() <= 1e-9,
                "seed {seed}, {v}, R {r:?}: conditional {conditional} vs OPT {opt}"
            );
        }
    }
}

#[test]
fn coupled_alpha_lower_bound_on_rankable_instances() {
    // Pathwise dual bound: with the ROM curve, the charge collected by u0
    // on the full run is at least (w_{u0}/F)·(1 − g(Ỹ_c)), where Ỹ_c is
    // u0's critical time in the run with v0 deleted.
    let params = GeneratorParams {
        offline_range: (2, 3),
        online_range: (2, 3),
        edge_density: 1.0,
        patience_range: (1, 2),
        vertex_weighted: true,
        align_probabilities_to_weights: true,
        ..GeneratorParams::default()
    };
    let f = GCurve::ExpRom.normalization();
    for seed in 0..5u64 {
        let g = generate_random_instance(&params, seed);
        for v in g.online_ids() {
            assert!(
                verify_rankable(&g, v).unwrap().is_some(),
                "seed {seed}: {v} not rankable"
            );
        }
        let n = g.online_count();
        let times: Vec<Vec<f64>> = (0..n)
            .map(OnlineId)
            .permutations(n)
            .map(|perm| {
                let mut y = vec![0.0; n];
                for (rank, v) in perm.iter().enumerate() {
                    y[v.0] = (rank + 1) as f64 / (n + 1) as f64;
                }
                y
            })
            .collect();
        let runner = GreedyDpRunner::new(&g);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for (states, _) in assignments(&g) {
            for y in &times {
                for v0 in g.online_ids() {
                    let coupled = coupled_deletion_run(&g, v0, states, y).unwrap();
                    assert!(
                        coupled.containment_holds(),
                        "rankable instances keep containment"
                    );
                    let charged = runner
                        .run_charged(y, GCurve::ExpRom, EdgeStates::Fixed(states), &mut rng)
                        .unwrap();
                    let charges = charged.charges.as_ref().unwrap();
                    for u0 in g.offline_ids() {
                        let critical = coupled.critical_time(&g, u0, y);
                        let w = g.vertex_weight(u0).unwrap();
                        let alpha = charges.alpha.get(&u0).copied().unwrap_or(0.0);
                        let bound = w / f * (1.0 - GCurve::ExpRom.g(critical));
                        assert!(
                            alpha >= bound - 1e-12,
                            "seed {seed}, u0 {u0}, v0 {v0}: alpha {alpha} < bound {bound}"
                        );
                    }
                }
            }
        }
    }
}

#[test]
fn greedy_probe_on_deterministic_graph_is_classical_greedy() {
    // With p ∈ {0, 1} and unit patience, the probing algorithm is plain
    // greedy matching on the realized graph: compare against a direct
    // implementation.
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..20 {
        let nu = rng.random_range(2..=4);
        let nv = rng.random_range(2..=4);
        let mut edges = Vec::new();
        for u in 0..nu {
            for v in 0..nv {
                if rng.random_bool(0.7) {
                    let p = if rng.random_bool(0.5) { 1.0 } else { 0.0 };
                    edges.push((u, v, p));
                }
            }
        }
        let weights: Vec<f64> = (0..nu).map(|_| rng.random_range(0.5..4.0)).collect();
        let g = StochasticGraph::vertex_weighted(
            (0..nu).map(|i| format!("u{i}")).collect(),
            (0..nv).map(|i| format!("v{i}")).collect(),
            weights.clone(),
            edges,
            (0..nv).map(|_| ConstraintSpec::Patience(1)).collect(),
        )
        .unwrap();
        let order = ArrivalOrder::identity(nv);
        let record =
            stochmatch::online::run_greedy_probe(&g, &order, &mut ChaCha8Rng::seed_from_u64(0))
                .unwrap();

        // Direct greedy on the realized graph.
        let mut free = vec![true; nu];
        let mut expected = 0.0;
        for v in 0..nv {
            let best = g
                .incident_edges(OnlineId(v))
                .iter()
                .copied()
                .filter(|&e| free[g.edges()[e.0].u.0])
                .max_by(|&a, &b| {
                    let (ea, eb) = (&g.edges()[a.0], &g.edges()[b.0]);
                    let (va, vb) = (ea.weight * ea.probability, eb.weight * eb.probability);
                    va.partial_cmp(&vb)
                        .unwrap()
                        .then(ea.weight.partial_cmp(&eb.weight).unwrap())
                        .then(b.cmp(&a))
                });
            if let Some(e) = best {
                if g.edges()[e.0].probability == 1.0 {
                    free[g.edges()[e.0].u.0] = false;
                    expected += g.edges()[e.0].weight;
                }
            }
        }
        assert!((record.matching.weight - expected).abs() < 1e-12);
    }
}

#[test]
fn weight_sorted_rearrangement_never_loses_value() {
    // On permutation-closed constraints, re-probing any feasible string in
    // non-increasing weight order cannot decrease its expected value.
    let g = StochasticGraph::vertex_weighted(
        vec!["a".into(), "b".into(), "c".into(), "d".into()],
        vec!["v".into()],
        vec![0.7, 2.4, 1.1, 3.0],
        vec![(0, 0, 0.55), (1, 0, 0.3), (2, 0, 0.8), (3, 0, 0.15)],
        vec![ConstraintSpec::Patience(2)],
    )
    .unwrap();
    let fs = enumerate_feasible_strings(
        OnlineId(0),
        g.constraint(OnlineId(0)),
        g.incident_edges(OnlineId(0)),
        100_000,
    );
    for s in &fs.strings {
        let mut sorted = s.edges().to_vec();
        sorted.sort_by(|&a, &b| {
            let (wa, wb) = (g.edges()[a.0].weight, g.edges()[b.0].weight);
            wb.partial_cmp(&wa).unwrap().then(a.cmp(&b))
        });
        let rearranged = ProbeString::new(sorted).unwrap();
        assert!(
            expected_value(&rearranged, &g).unwrap() >= expected_value(s, &g).unwrap() - 1e-12,
            "rearranging {s} lost value"
        );
    }
}

#[test]
fn expected_value_bounded_by_heaviest_edge_and_monotone() {
    let g = StochasticGraph::vertex_weighted(
        vec!["a".into(), "b".into(), "c".into()],
        vec!["v".into()],
        vec![1.5, 0.4, 2.2],
        vec![(0, 0, 0.45), (1, 0, 0.9), (2, 0, 0.25)],
        vec![ConstraintSpec::Patience(3)],
    )
    .unwrap();
    let max_w = 2.2;
    let fs = enumerate_feasible_strings(
        OnlineId(0),
        g.constraint(OnlineId(0)),
        g.incident_edges(OnlineId(0)),
        100_000,
    );
    for s in &fs.strings {
        let value = expected_value(s, &g).unwrap();
        assert!(value <= max_w + 1e-12);
        for &extra in g.incident_edges(OnlineId(0)) {
            if s.contains(extra) {
                continue;
            }
            let mut extended = s.edges().to_vec();
            extended.push(extra);
            let longer = expected_value(&ProbeString::new(extended).unwrap(), &g).unwrap();
            assert!(
                longer >= value - 1e-12,
                "appending a positive edge lost value"
            );
        }
    }
}

#[test]
fn run_records_replay_clean_across_algorithms() {
    let params = GeneratorParams {
        offline_range: (2, 3),
        online_range: (2, 4),
        patience_range: (1, 2),
        vertex_weighted: true,
        ..GeneratorParams::default()
    };
    for seed in 0..10u64 {
        let g = generate_random_instance(&params, seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..20 {
            let order = ArrivalOrder::rom(g.online_count(), &mut rng);
            let records = [
                stochmatch::online::run_greedy_dp(&g, &order, &mut rng).unwrap(),
                stochmatch::online::run_rom_lp_algorithm(&g, &order, &mut rng).unwrap(),
            ];
            for rec in &records {
                let violations = validate_run_record(&g, rec);
                assert!(violations.is_empty(), "seed {seed}: {violations:?}");
            }
        }
    }
}

#[test]
fn exact_and_sampled_evaluators_agree_for_greedy_probe() {
    let params = GeneratorParams {
        offline_range: (2, 2),
        online_range: (2, 2),
        patience_range: (1, 1),
        vertex_weighted: true,
        probabilities: ProbabilityRegime::Uniform { lo: 0.2, hi: 0.8 },
        ..GeneratorParams::default()
    };
    for seed in [2u64, 5, 8] {
        let g = generate_random_instance(&params, seed);
        let exact = exact_expected_value(AlgorithmId::GreedyProbe, &g, &OrderModel::Rom).unwrap();
        let est =
            monte_carlo(AlgorithmId::GreedyProbe, &g, &OrderModel::Rom, 60_000, seed).unwrap();
        assert!(
            (est.mean - exact).abs() <= 4.0 * est.stderr.max(1e-9),
            "seed {seed}: exact {exact} vs {} ± {}",
            est.mean,
            est.stderr
        );
    }
}

#[test]
fn committal_is_sandwiched_between_online_values_and_lp_bounds() {
    // Three independent layers must nest: the exact value of the online
    // greedy under any fixed arrival order can never beat the offline
    // committal optimum, which in turn never beats the configuration LP.
    let params = GeneratorParams {
        offline_range: (2, 3),
        online_range: (2, 3),
        edge_density: 0.8,
        patience_range: (1, 2),
        vertex_weighted: true,
        ..GeneratorParams::default()
    };
    for seed in 0..25u64 {
        let g = generate_random_instance(&params, seed);
        let committal = stochmatch::offline::committal_opt(&g).unwrap();
        let lp = solve_lp(&build_lp_config(&g).unwrap().lp)
            .unwrap()
            .objective_value;
        let ids: Vec<OnlineId> = (0..g.online_count()).map(OnlineId).collect();
        for perm in ids.iter().copied().permutations(ids.len()) {
            let online = exact_expected_value(
                AlgorithmId::GreedyDp,
                &g,
                &OrderModel::Explicit(perm.clone()),
            )
            .unwrap();
            assert!(
                online <= committal + 1e-9,
                "seed {seed}, order {perm:?}: online {online} beats committal {committal}"
            );
        }
        assert!(
            committal <= lp + 1e-7,
            "seed {seed}: committal {committal} beats LP {lp}"
        );
    }
}

#[test]
fn committal_on_random_stars_matches_star_dp() {
    let params = GeneratorParams {
        offline_range: (2, 4),
        online_range: (1, 1),
        edge_density: 1.0,
        patience_range: (1, 3),
        vertex_weighted: true,
        ..GeneratorParams::default()
    };
    for seed in 0..30u64 {
        let g = generate_random_instance(&params, seed);
        let star = opt_star_value(&g, OnlineId(0), OfflineSet::full(g.offline_count())).unwrap();
        let committal = stochmatch::offline::committal_opt(&g).unwrap();
        assert!(
            (star - committal).abs() <= 1e-9,
            "seed {seed}: star {star} vs committal {committal}"
        );
    }
}

#[test]
fn config_lp_on_random_stars_matches_star_dp() {
    // With a single online vertex the configuration LP puts all the mass
    // on the best string, so its optimum equals OPT(v, U).
    let params = GeneratorParams {
        offline_range: (2, 4),
        online_range: (1, 1),
        edge_density: 1.0,
        patience_range: (1, 2),
        vertex_weighted: true,
        ..GeneratorParams::default()
    };
    for seed in 0..30u64 {
        let g = generate_random_instance(&params, seed);
        let star = opt_star_value(&g, OnlineId(0), OfflineSet::full(g.offline_count())).unwrap();
        let lp = solve_lp(&build_lp_config(&g).unwrap().lp)
            .unwrap()
            .objective_value;
        assert!(
            (star - lp).abs() <= 1e-9,
            "seed {seed}: star {star} vs lp {lp}"
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn survival_splits_multiplicatively(seed in 0u64..10_000, split in 0usize..8) {
        let params = GeneratorParams {
            offline_range: (2, 5),
            online_range: (1, 1),
            edge_density: 1.0,
            patience_range: (5, 5),
            ..GeneratorParams::default()
        };
        let g = generate_random_instance(&params, seed);
        let edges: Vec<EdgeId> = g.incident_edges(OnlineId(0)).to_vec();
        let k = split.min(edges.len());
        let whole = ProbeString::new(edges.clone()).unwrap();
        let left = ProbeString::new(edges[..k].to_vec()).unwrap();
        let right = ProbeString::new(edges[k..].to_vec()).unwrap();
        let lhs = stochmatch::probing::survival(&whole, &g).unwrap();
        let rhs = stochmatch::probing::survival(&left, &g).unwrap()
            * stochmatch::probing::survival(&right, &g).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12);
    }

    #[test]
    fn induced_subgraph_idempotent(seed in 0u64..10_000) {
        let g = generate_random_instance(&mixed_params(seed), seed);
        let sub_names: Vec<String> = g
            .offline_names()
            .iter()
            .step_by(2)
            .chain(g.online_names().iter().step_by(2))
            .cloned()
            .collect();
        let set = g.vertex_set_from_names(sub_names.iter().map(String::as_str)).unwrap();
        let sub = g.induced_subgraph(&set).unwrap();
        let all = stochmatch::model::VertexSet {
            offline: sub.offline_ids().collect(),
            online: sub.online_ids().collect(),
        };
        prop_assert_eq!(sub.induced_subgraph(&all).unwrap(), sub);
    }
}

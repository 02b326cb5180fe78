//! Acceptance suite: every release-gating check, one test per criterion,
//! each printing a `PASS` line (run with `--nocapture` to see them all).
//!
//! Exact checks carry a 1e-9 tolerance; statistical checks use a 3-sigma
//! slack from the trial variance. All thresholds are pinned here, not
//! computed.

use std::collections::BTreeMap;

use itertools::Itertools;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use stochmatch::lp::{build_lp_config, edge_marginals_from_config_solution, solve_lp};
use stochmatch::model::{ConstraintSpec, EdgeId, OfflineId, OfflineSet, OnlineId, StochasticGraph};
use stochmatch::offline::{committal_opt, noncommittal_opt, relaxed_benchmark_run};
use stochmatch::online::{
    coupled_deletion_run, vertex_probe_with_states, EdgeStates, GCurve, GreedyDpRunner,
};
use stochmatch::sim::{
    benchmark_value, exact_expected_value, generate_random_instance, monte_carlo,
    subgraph_lemma_check, AlgorithmId, BenchmarkId, GeneratorParams, KahanSum, OrderModel,
    ProbabilityRegime,
};
use stochmatch::star::{adaptive_flip_star, dp_opt};

const ONE_MINUS_INV_E: f64 = 1.0 - 0.36787944117144233;

/// The three-edge star separating the committal and non-committal
/// benchmarks: w = (3, 4, 98), p = (0.8, 0.6, 0.01), patience 2.
fn separation_star() -> StochasticGraph {
    StochasticGraph::vertex_weighted(
        vec!["u1".into(), "u2".into(), "u3".into()],
        vec!["v".into()],
        vec![3.0, 4.0, 98.0],
        vec![(0, 0, 0.8), (1, 0, 0.6), (2, 0, 0.01)],
        vec![ConstraintSpec::Patience(2)],
    )
    .unwrap()
}

#[test]
fn criterion_01_benchmark_separation_on_embedded_star() {
    let start = std::time::Instant::now();
    let g = separation_star();
    let committal = committal_opt(&g).unwrap();
    let noncommittal = noncommittal_opt(&g).unwrap();
    assert!((committal - 3.36).abs() <= 1e-9, "committal = {committal}");
    assert!(
        (noncommittal - 3.924).abs() <= 1e-9,
        "noncommittal = {noncommittal}"
    );
    let ratio = committal / noncommittal;
    assert!((ratio - 0.856269).abs() <= 1e-5, "ratio = {ratio}");
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "took {elapsed:?}");
    println!("acceptance 01 (benchmark separation 0.856269): PASS ({elapsed:?})");
}

#[test]
fn criterion_02_adaptive_flip_star_strategies() {
    let start = std::time::Instant::now();
    let g = adaptive_flip_star(0.08);
    let v = OnlineId(0);
    let full = OfflineSet::full(4);
    let with_all = dp_opt(&g, v, full).unwrap();
    assert_eq!(
        with_all.probe_string.edges(),
        &[EdgeId(0), EdgeId(1)],
        "expected ((u1,v),(u2,v)) on the full set"
    );
    let without_u2 = dp_opt(&g, v, full.without(OfflineId(1))).unwrap();
    assert_eq!(
        without_u2.probe_string.edges(),
        &[EdgeId(2), EdgeId(3)],
        "expected ((u3,v),(u4,v)) once u2 is removed"
    );
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "took {elapsed:?}");
    println!("acceptance 02 (optimal star strategies flip with the free set): PASS ({elapsed:?})");
}

#[test]
fn criterion_03_relaxation_dominance_suite() {
    let start = std::time::Instant::now();
    let params = GeneratorParams {
        offline_range: (1, 3),
        online_range: (1, 3),
        edge_density: 0.8,
        patience_range: (1, 2),
        vertex_weighted: true,
        ..GeneratorParams::default()
    };
    for seed in 0..200u64 {
        let g = generate_random_instance(&params, seed);
        let committal = committal_opt(&g).unwrap();
        let noncommittal = noncommittal_opt(&g).unwrap();
        let lp_config = benchmark_value(&g, BenchmarkId::LpConfig).unwrap();
        let lp_dp = benchmark_value(&g, BenchmarkId::LpDp).unwrap();
        let lp_dp_non = benchmark_value(&g, BenchmarkId::LpDpNon).unwrap();
        assert!(
            committal <= lp_config + 1e-7,
            "seed {seed}: committal {committal} > lp-config {lp_config}"
        );
        assert!(
            committal <= lp_dp + 1e-7,
            "seed {seed}: committal {committal} > lp-dp {lp_dp}"
        );
        assert!(
            noncommittal <= lp_dp_non + 1e-7,
            "seed {seed}: noncommittal {noncommittal} > lp-dp-non {lp_dp_non}"
        );
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 120.0, "took {elapsed:?}");
    println!("acceptance 03 (relaxation dominance, 200 instances): PASS ({elapsed:?})");
}

#[test]
fn criterion_04_adversarial_half() {
    let start = std::time::Instant::now();
    let params = GeneratorParams {
        offline_range: (2, 2),
        online_range: (2, 5),
        edge_density: 0.8,
        patience_range: (1, 2),
        vertex_weighted: true,
        ..GeneratorParams::default()
    };
    for seed in 0..50u64 {
        let g = generate_random_instance(&params, seed);
        assert!(g.edges().len() <= 10);
        let report =
            stochmatch::sim::worst_order_ratio(AlgorithmId::GreedyDp, &g, BenchmarkId::Committal)
                .unwrap();
        assert!(
            report.ratio >= 0.5 - 1e-9,
            "seed {seed}: worst-order ratio {} below 1/2",
            report.ratio
        );
    }

    // Tight instance: two sure online vertices competing for one of two
    // unit-weight offline vertices; the greedy tie sends the second
    // arrival to the contested vertex.
    let tight = StochasticGraph::vertex_weighted(
        vec!["a".into(), "b".into()],
        vec!["v1".into(), "v2".into()],
        vec![1.0, 1.0],
        vec![(0, 0, 1.0), (0, 1, 1.0), (1, 1, 1.0)],
        vec![ConstraintSpec::Patience(1), ConstraintSpec::Patience(1)],
    )
    .unwrap();
    let report =
        stochmatch::sim::worst_order_ratio(AlgorithmId::GreedyDp, &tight, BenchmarkId::Committal)
            .unwrap();
    assert!(
        (report.ratio - 0.5).abs() <= 1e-9,
        "tight instance ratio = {}",
        report.ratio
    );

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 300.0, "took {elapsed:?}");
    println!("acceptance 04 (adversarial 1/2 with tight instance): PASS ({elapsed:?})");
}

fn rankable_suite_params(unit_patience: bool) -> GeneratorParams {
    GeneratorParams {
        offline_range: (2, 3),
        online_range: (3, 5),
        edge_density: 0.6,
        patience_range: if unit_patience { (1, 1) } else { (1, 2) },
        vertex_weighted: true,
        align_probabilities_to_weights: !unit_patience,
        ..GeneratorParams::default()
    }
}

#[test]
fn criterion_05_rom_one_minus_inv_e() {
    let start = std::time::Instant::now();
    for case in 0..50u64 {
        let unit = case < 25;
        let g = generate_random_instance(&rankable_suite_params(unit), case);
        let value = exact_expected_value(AlgorithmId::GreedyDp, &g, &OrderModel::Rom).unwrap();
        let committal = committal_opt(&g).unwrap();
        let ratio = value / committal;
        assert!(
            ratio >= ONE_MINUS_INV_E - 1e-9,
            "case {case}: ROM ratio {ratio} below 1 - 1/e (value {value}, committal {committal})"
        );
        if unit {
            let lp_std_unit = benchmark_value(&g, BenchmarkId::LpStdUnit).unwrap();
            let lp_ratio = value / lp_std_unit;
            assert!(
                lp_ratio >= ONE_MINUS_INV_E - 1e-9,
                "case {case}: ratio {lp_ratio} vs lp-std-unit below 1 - 1/e"
            );
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 300.0, "took {elapsed:?}");
    println!("acceptance 05 (ROM 1 - 1/e on rankable instances): PASS ({elapsed:?})");
}

/// Edge-weighted instance with 8 online arrivals and at most 10 edges,
/// small enough for the exact committal benchmark.
fn edge_weighted_rom_instance(seed: u64) -> StochasticGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nu = rng.random_range(2..=3);
    let nv = 8usize;
    let mut pairs: Vec<(usize, usize)> = (0..nv).map(|v| (rng.random_range(0..nu), v)).collect();
    while pairs.len() < 10 {
        let candidate = (rng.random_range(0..nu), rng.random_range(0..nv));
        if !pairs.contains(&candidate) {
            pairs.push(candidate);
        }
    }
    pairs.sort_by_key(|&(_, v)| v);
    let edges = pairs
        .into_iter()
        .map(|(u, v)| (u, v, rng.random_range(0.1..0.9), rng.random_range(0.5..4.0)))
        .collect();
    let constraints = (0..nv)
        .map(|_| ConstraintSpec::Patience(rng.random_range(1..=2)))
        .collect();
    StochasticGraph::edge_weighted(
        (0..nu).map(|i| format!("u{}", i + 1)).collect(),
        (0..nv).map(|i| format!("v{}", i + 1)).collect(),
        edges,
        constraints,
    )
    .unwrap()
}

#[test]
fn criterion_06_rom_lp_edge_weights_at_n8() {
    let start = std::time::Instant::now();
    let threshold_factor = 1.0 / std::f64::consts::E - 1.0 / 8.0;
    for seed in 0..20u64 {
        let g = edge_weighted_rom_instance(seed);
        let committal = committal_opt(&g).unwrap();
        let est = monte_carlo(AlgorithmId::RomLp, &g, &OrderModel::Rom, 100_000, seed).unwrap();
        let bound = threshold_factor * committal - 3.0 * est.stderr;
        assert!(
            est.mean >= bound,
            "seed {seed}: value {} ± {} below (1/e - 1/8)·{committal}",
            est.mean,
            est.stderr
        );
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 600.0, "took {elapsed:?}");
    println!(
        "acceptance 06 (ROM LP algorithm vs (1/e - 1/8)·committal at n = 8): PASS ({elapsed:?})"
    );
}

#[test]
fn criterion_07_charging_identity_pathwise() {
    let start = std::time::Instant::now();
    let mut runs = 0u64;
    for instance_seed in 0..10u64 {
        let g = generate_random_instance(
            &rankable_suite_params(instance_seed % 2 == 0),
            instance_seed,
        );
        let runner = GreedyDpRunner::new(&g);
        let mut rng = ChaCha8Rng::seed_from_u64(instance_seed);
        for _ in 0..1000 {
            let y: Vec<f64> = (0..g.online_count()).map(|_| rng.random::<f64>()).collect();
            let curve = if rng.random_bool(0.5) {
                GCurve::ExpRom
            } else {
                GCurve::ConstHalf
            };
            let record = runner
                .run_charged(&y, curve, EdgeStates::Sample, &mut rng)
                .unwrap();
            let gap = record
                .charges
                .as_ref()
                .unwrap()
                .identity_gap(record.matching.weight);
            assert!(
                gap.abs() <= 1e-9,
                "instance {instance_seed}: identity gap {gap} on weight {}",
                record.matching.weight
            );
            runs += 1;
        }
    }
    assert_eq!(runs, 10_000);
    let elapsed = start.elapsed();
    println!("acceptance 07 (charging identity on {runs} runs): PASS ({elapsed:?})");
}

#[test]
fn criterion_08_dual_feasibility_statistical() {
    let start = std::time::Instant::now();
    let trials = 100_000u64;
    for instance_seed in 100..105u64 {
        let g = generate_random_instance(
            &rankable_suite_params(instance_seed % 2 == 0),
            instance_seed,
        );
        let nu = g.offline_count();
        let nv = g.online_count();
        let runner = GreedyDpRunner::new(&g);
        // Per (u0, v0): running sums of X = p·α_{u0} + w·p·Σ_{R ∋ u0} φ_{v0,R}.
        let mut sums = vec![KahanSum::default(); nu * nv];
        let mut sq_sums = vec![KahanSum::default(); nu * nv];
        let mut rng = ChaCha8Rng::seed_from_u64(instance_seed);
        for _ in 0..trials {
            let y: Vec<f64> = (0..nv).map(|_| rng.random::<f64>()).collect();
            let record = runner
                .run_charged(&y, GCurve::ExpRom, EdgeStates::Sample, &mut rng)
                .unwrap();
            let charges = record.charges.as_ref().unwrap();
            for edge in g.edges() {
                let (u0, v0) = (edge.u, edge.v);
                let alpha = charges.alpha.get(&u0).copied().unwrap_or(0.0);
                let phi: f64 = charges
                    .phi
                    .iter()
                    .filter(|((v, r), _)| *v == v0 && r.contains(u0))
                    .map(|(_, val)| val)
                    .sum();
                let x = edge.probability * alpha + edge.weight * edge.probability * phi;
                let idx = u0.0 * nv + v0.0;
                sums[idx].add(x);
                sq_sums[idx].add(x * x);
            }
        }
        for edge in g.edges() {
            let idx = edge.u.0 * nv + edge.v.0;
            let n = trials as f64;
            let mean = sums[idx].value() / n;
            let var = (sq_sums[idx].value() / n - mean * mean).max(0.0);
            let stderr = (var / n).sqrt();
            let target = edge.weight * edge.probability;
            assert!(
                mean >= target - 3.0 * stderr,
                "instance {instance_seed}, edge ({}, {}): E = {mean} ± {stderr} below w·p = {target}",
                g.offline_name(edge.u),
                g.online_name(edge.v),
            );
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 600.0, "took {elapsed:?}");
    println!("acceptance 08 (dual feasibility in expectation, 5 instances): PASS ({elapsed:?})");
}

#[test]
fn criterion_09_vertex_probe_marginals() {
    let start = std::time::Instant::now();
    let trials = 100_000u64;
    for seed in 0..10u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.random_range(3..=4);
        let g = StochasticGraph::edge_weighted(
            (0..n).map(|i| format!("u{}", i + 1)).collect(),
            vec!["v".into()],
            (0..n)
                .map(|i| (i, 0, rng.random_range(0.1..0.9), rng.random_range(0.5..4.0)))
                .collect(),
            vec![ConstraintSpec::Patience(2)],
        )
        .unwrap();
        let config = build_lp_config(&g).unwrap();
        let sol = solve_lp(&config.lp).unwrap();
        let dist = config.distribution(OnlineId(0), &sol);
        let marginals = edge_marginals_from_config_solution(&g, &config, &sol).unwrap();

        let mut probed = vec![0u64; g.edges().len()];
        let mut returned = vec![0u64; g.edges().len()];
        for _ in 0..trials {
            let (outcome, probes) =
                vertex_probe_with_states(&g, OnlineId(0), &dist, EdgeStates::Sample, &mut rng)
                    .unwrap();
            for (e, _) in probes {
                probed[e.0] += 1;
            }
            if let Some(e) = outcome {
                returned[e.0] += 1;
            }
        }
        for (i, edge) in g.edges().iter().enumerate() {
            let n = trials as f64;
            let expect_probe = marginals[&EdgeId(i)];
            let expect_return = edge.probability * expect_probe;
            for (label, expected, observed) in [
                ("probe", expect_probe, probed[i] as f64 / n),
                ("return", expect_return, returned[i] as f64 / n),
            ] {
                let sigma = (expected * (1.0 - expected) / n).sqrt();
                assert!(
                    (observed - expected).abs() <= 3.0 * sigma + 1e-12,
                    "seed {seed}, edge {i} {label}: observed {observed}, expected {expected} ± {sigma}"
                );
            }
        }
    }
    let elapsed = start.elapsed();
    println!("acceptance 09 (probe/return marginals at 1e5 trials): PASS ({elapsed:?})");
}

#[test]
fn criterion_10_relaxed_benchmark_matches_lp() {
    let start = std::time::Instant::now();
    let trials = 100_000u64;
    let params = GeneratorParams {
        offline_range: (2, 3),
        online_range: (2, 3),
        edge_density: 0.8,
        patience_range: (1, 2),
        vertex_weighted: false,
        probabilities: ProbabilityRegime::Uniform { lo: 0.1, hi: 0.9 },
        ..GeneratorParams::default()
    };
    for seed in 0..10u64 {
        let g = generate_random_instance(&params, seed);
        let config = build_lp_config(&g).unwrap();
        let sol = solve_lp(&config.lp).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut weight_sum = KahanSum::default();
        let mut weight_sq = KahanSum::default();
        let mut incidence = vec![KahanSum::default(); g.offline_count()];
        let mut incidence_sq = vec![KahanSum::default(); g.offline_count()];
        for _ in 0..trials {
            let output = relaxed_benchmark_run(&g, &config, &sol, &mut rng).unwrap();
            let w = output.weight(&g);
            weight_sum.add(w);
            weight_sq.add(w * w);
            for u in g.offline_ids() {
                let count = output
                    .edges
                    .iter()
                    .filter(|&&e| g.edges()[e.0].u == u)
                    .count() as f64;
                incidence[u.0].add(count);
                incidence_sq[u.0].add(count * count);
            }
        }
        let n = trials as f64;
        let mean = weight_sum.value() / n;
        let var = (weight_sq.value() / n - mean * mean).max(0.0);
        let stderr = (var / n).sqrt();
        assert!(
            (mean - sol.objective_value).abs() <= 3.0 * stderr,
            "seed {seed}: relaxed value {mean} ± {stderr} vs LP {}",
            sol.objective_value
        );
        for u in g.offline_ids() {
            let m = incidence[u.0].value() / n;
            let v = (incidence_sq[u.0].value() / n - m * m).max(0.0);
            let s = (v / n).sqrt();
            assert!(
                m <= 1.0 + 3.0 * s,
                "seed {seed}: offline {} expected incidence {m} ± {s} exceeds 1",
                g.offline_name(u)
            );
        }
    }
    let elapsed = start.elapsed();
    println!("acceptance 10 (relaxed benchmark equals the configuration LP): PASS ({elapsed:?})");
}

#[test]
fn criterion_11_free_set_containment_and_witness() {
    let start = std::time::Instant::now();
    // Rankable 3×3 instances: containment must hold for every edge-state
    // assignment, every arrival order, and every deleted vertex.
    let params = GeneratorParams {
        offline_range: (3, 3),
        online_range: (3, 3),
        edge_density: 1.0,
        patience_range: (1, 2),
        vertex_weighted: true,
        align_probabilities_to_weights: true,
        ..GeneratorParams::default()
    };
    for seed in 0..5u64 {
        let g = generate_random_instance(&params, seed);
        assert_eq!(g.edges().len(), 9);
        let times: Vec<Vec<f64>> = (0..3)
            .map(OnlineId)
            .permutations(3)
            .map(|perm| {
                let mut y = vec![0.0; 3];
                for (rank, v) in perm.iter().enumerate() {
                    y[v.0] = (rank + 1) as f64 / 4.0;
                }
                y
            })
            .collect();
        for states in 0u64..(1 << 9) {
            for y in &times {
                for v0 in g.online_ids() {
                    let run = coupled_deletion_run(&g, v0, states, y).unwrap();
                    assert!(
                        run.containment_holds(),
                        "seed {seed}, states {states:#b}, v0 {v0}: containment violated"
                    );
                }
            }
        }
    }

    // Non-rankable witness: the adaptive-flip star plus a helper arrival
    // that steals u2, flipping the star's strategy between the coupled
    // executions.
    let witness = StochasticGraph::vertex_weighted(
        vec!["u1".into(), "u2".into(), "u3".into(), "u4".into()],
        vec!["v0".into(), "v".into()],
        vec![1.08, 1.04, 1.0, 1.0],
        vec![
            (1, 0, 1.0), // helper edge (u2, v0), always active
            (0, 1, 1.0 / 3.0),
            (1, 1, 1.0),
            (2, 1, 0.5),
            (3, 1, 2.0 / 3.0),
        ],
        vec![ConstraintSpec::Patience(1), ConstraintSpec::Patience(2)],
    )
    .unwrap();
    let y = vec![0.2, 0.8]; // v0 first
    let mut violation_found = false;
    for states in 0u64..(1 << 5) {
        let run = coupled_deletion_run(&witness, OnlineId(0), states, &y).unwrap();
        if !run.containment_holds() {
            violation_found = true;
            break;
        }
    }
    assert!(
        violation_found,
        "expected a containment violation on the non-rankable witness"
    );

    let elapsed = start.elapsed();
    println!("acceptance 11 (free-set containment + non-rankable witness): PASS ({elapsed:?})");
}

#[test]
fn criterion_12_random_subset_lp_inequality() {
    let start = std::time::Instant::now();
    let params = GeneratorParams {
        offline_range: (2, 4),
        online_range: (6, 6),
        edge_density: 0.7,
        patience_range: (1, 2),
        vertex_weighted: true,
        ..GeneratorParams::default()
    };
    for seed in 0..5u64 {
        let g = generate_random_instance(&params, seed);
        for t in 1..=6usize {
            let report = subgraph_lemma_check(&g, t, 2000, seed).unwrap();
            assert!(
                report.pass,
                "seed {seed}, t = {t}: sampled mean {} ± {} below bound {}",
                report.sampled_mean, report.stderr, report.bound
            );
        }
    }
    let elapsed = start.elapsed();
    println!("acceptance 12 (random-subset LP inequality at |V| = 6): PASS ({elapsed:?})");
}

/// The spot-checks the harness relies on: exact and sampled evaluators
/// agree, and the availability bound holds on an n = 8 instance.
#[test]
fn harness_self_checks() {
    let g = generate_random_instance(
        &GeneratorParams {
            offline_range: (2, 2),
            online_range: (2, 2),
            ..GeneratorParams::default()
        },
        99,
    );
    let exact = exact_expected_value(AlgorithmId::RomLp, &g, &OrderModel::Rom).unwrap();
    let est = monte_carlo(AlgorithmId::RomLp, &g, &OrderModel::Rom, 200_000, 99).unwrap();
    assert!(
        (est.mean - exact).abs() <= 4.0 * est.stderr.max(1e-9),
        "rom-lp exact {exact} vs estimate {} ± {}",
        est.mean,
        est.stderr
    );

    let g8 = edge_weighted_rom_instance(3);
    let profile = stochmatch::sim::availability_profile(&g8, 30_000, 5).unwrap();
    assert!(
        profile.all_pass(),
        "availability bound failed: {:?}",
        profile.rows
    );
    let mut commits: BTreeMap<usize, u64> = BTreeMap::new();
    for row in &profile.rows {
        commits.insert(row.t, row.commits);
    }
    println!("harness self-checks: PASS (availability rows: {commits:?})");
}

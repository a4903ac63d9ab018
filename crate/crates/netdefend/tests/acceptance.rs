//! Acceptance suite: one test per release criterion, each printing a
//! pass/fail line (visible with `--nocapture`). Tolerances and instance
//! counts are pinned here, not configurable.

use std::collections::BTreeSet;
use std::time::Instant;

use netdefend::instances::{
    dnf_max_sat, gen_dnf_reduction, gen_greedy_hard, gen_integrality_gap, gen_random_in_class,
    DnfFormula, GreedyHardKind, Literal, ModelClass, RandomRanges,
};
use netdefend::lp::{check_solution, solve_lp, LpSolution};
use netdefend::maxflow::{max_flow, verify_flow};
use netdefend::model::{crucial_set, result_space, vulnerable_set, DefenseNetwork};
use netdefend::solvers::{
    build_isolated_flow_network, build_relaxation_lp, min_resource_for_subset, solve_approx,
    solve_exact_bruteforce, solve_greedy, solve_isolated, solve_single_threshold,
    DEFAULT_MAX_CRUCIAL,
};

fn pass(n: usize, what: &str) {
    println!("acceptance {n} PASS: {what}");
}

/// Deterministic instance battery: seeds 0.. with n in [2, max_n] and m
/// capped at `max_m`.
fn battery(
    count: usize,
    max_n: usize,
    max_m: usize,
    class: ModelClass,
    seed_base: u64,
) -> Vec<DefenseNetwork> {
    (0..count as u64)
        .map(|i| {
            let seed = seed_base + i;
            let n = 2 + (seed as usize % (max_n - 1));
            let m_max = (n * (n - 1) / 2).min(max_m);
            let m = ((n - 1) + (seed as usize % (m_max + 2 - n))).min(m_max);
            gen_random_in_class(seed, n, m, &RandomRanges::default(), class)
                .expect("battery parameters are valid")
        })
        .collect()
}

fn with_resource(mut net: DefenseNetwork, r: f64) -> DefenseNetwork {
    net.resource = r;
    net
}

/// Criterion 1: on the two-node gap instance the exact optimum is 0 at the
/// full budget and 1 at half, while the relaxation is already feasible at
/// half the budget for level 0.
#[test]
fn acceptance_1_integrality_gap_reproduction() {
    let start = Instant::now();
    let net = gen_integrality_gap();

    let full = solve_exact_bruteforce(&net, DEFAULT_MAX_CRUCIAL).unwrap();
    assert_eq!(full.alpha, 0.0, "exact optimum at budget 1 must be 0");

    let half = solve_exact_bruteforce(&with_resource(net.clone(), 0.5), DEFAULT_MAX_CRUCIAL)
        .unwrap();
    assert_eq!(half.alpha, 1.0, "exact optimum at budget 0.5 must be 1");

    let (lp, _) = build_relaxation_lp(&net, 0.0, 0.5);
    assert!(
        solve_lp(&lp).unwrap().is_feasible(),
        "relaxation at half budget must be feasible for level 0"
    );

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "took {elapsed:?}, budget is 1 s");
    pass(1, &format!("integrality gap of 2 reproduced in {elapsed:?}"));
}

/// Criterion 2: across 200 seeded general instances the augmented solver at
/// the full budget is never worse than the exact optimum at half budget,
/// and its reports are sound.
#[test]
fn acceptance_2_approximation_guarantee() {
    let start = Instant::now();
    let instances = battery(200, 8, 12, ModelClass::General, 10_000);
    for (i, net) in instances.iter().enumerate() {
        for &alpha in &result_space(net) {
            assert!(
                crucial_set(net, alpha).len() <= 10,
                "instance {i} has too many crucial nodes"
            );
        }
        let approx = solve_approx(net).unwrap();
        let half = with_resource(net.clone(), net.resource / 2.0);
        let oracle = solve_exact_bruteforce(&half, DEFAULT_MAX_CRUCIAL).unwrap();
        assert!(
            approx.alpha <= oracle.alpha,
            "instance {i}: approx level {} exceeds half-budget optimum {}",
            approx.alpha,
            oracle.alpha
        );
        assert!(
            approx.budget_used <= net.resource + 1e-9,
            "instance {i}: overspent {} of {}",
            approx.budget_used,
            net.resource
        );
        assert!(
            approx.evaluated_result <= approx.alpha + 1e-6,
            "instance {i}: strategy scores {} above claimed {}",
            approx.evaluated_result,
            approx.alpha
        );
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 60.0, "took {elapsed:?}, budget is 60 s");
    pass(2, &format!("resource-augmentation guarantee held on 200/200 instances in {elapsed:?}"));
}

/// Criterion 3: the polynomial solvers agree exactly with the brute force on
/// 200 single-threshold and 200 isolated instances.
#[test]
fn acceptance_3_exact_solver_equivalence() {
    let start = Instant::now();

    let single = battery(200, 8, 12, ModelClass::SingleThreshold, 20_000);
    for (i, net) in single.iter().enumerate() {
        let fast = solve_single_threshold(net).unwrap();
        let oracle = solve_exact_bruteforce(net, DEFAULT_MAX_CRUCIAL).unwrap();
        assert_eq!(
            fast.alpha, oracle.alpha,
            "single-threshold instance {i}: {} vs oracle {}",
            fast.alpha, oracle.alpha
        );
    }

    let isolated = battery(200, 8, 12, ModelClass::Isolated, 30_000);
    for (i, net) in isolated.iter().enumerate() {
        let fast = solve_isolated(net).unwrap();
        let oracle = solve_exact_bruteforce(net, DEFAULT_MAX_CRUCIAL).unwrap();
        assert_eq!(
            fast.alpha, oracle.alpha,
            "isolated instance {i}: {} vs oracle {}",
            fast.alpha, oracle.alpha
        );
    }

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 60.0, "took {elapsed:?}, budget is 60 s");
    pass(3, &format!("400/400 solver optima equal the oracle exactly in {elapsed:?}"));
}

/// Criterion 4: on isolated instances, base cost plus max-flow value equals
/// the minimum over all upgrade subsets of the exact LP cost, at every
/// level of the result space.
#[test]
fn acceptance_4_mincut_equals_minimum_extra_resource() {
    let instances = battery(100, 6, 12, ModelClass::Isolated, 40_000);
    let mut levels = 0usize;
    for (i, net) in instances.iter().enumerate() {
        for &alpha in &result_space(net) {
            let vulnerable = vulnerable_set(net, alpha);
            let base: f64 = vulnerable
                .iter()
                .map(|id| net.node(id).unwrap().lb)
                .sum();
            let (flow_net, _) = build_isolated_flow_network(net, alpha).unwrap();
            let extra = max_flow(&flow_net).unwrap().value;

            let crucial: Vec<String> = crucial_set(net, alpha).into_iter().collect();
            let mut best = f64::INFINITY;
            for mask in 0u64..(1 << crucial.len()) {
                let subset: BTreeSet<String> = crucial
                    .iter()
                    .enumerate()
                    .filter(|(bit, _)| mask & (1 << bit) != 0)
                    .map(|(_, id)| id.clone())
                    .collect();
                best = best.min(min_resource_for_subset(net, alpha, &subset).unwrap());
            }
            assert!(
                (base + extra - best).abs() <= 1e-6,
                "instance {i} level {alpha}: base {base} + cut {extra} != subset minimum {best}"
            );
            levels += 1;
        }
    }
    pass(4, &format!("min cut equals subset minimum on {levels} instance-levels"));
}

/// All non-contradictory nonempty clauses over `p` variables: each variable
/// is absent, positive, or negated.
fn all_clauses(p: usize) -> Vec<Vec<Literal>> {
    let mut clauses = Vec::new();
    let mut pattern = vec![0u8; p];
    loop {
        let clause: Vec<Literal> = pattern
            .iter()
            .enumerate()
            .filter(|(_, &s)| s != 0)
            .map(|(var, &s)| Literal { var, negated: s == 2 })
            .collect();
        if !clause.is_empty() {
            clauses.push(clause);
        }
        let mut idx = 0;
        loop {
            if idx == p {
                return clauses;
            }
            pattern[idx] += 1;
            if pattern[idx] <= 2 {
                break;
            }
            pattern[idx] = 0;
            idx += 1;
        }
    }
}

/// Criterion 5: the reduction encodes satisfiability faithfully — level 0 is
/// achievable with budget `p + (q-t)/q` exactly when at least `t` clauses
/// are simultaneously satisfiable.
#[test]
fn acceptance_5_hardness_reduction_equivalence() {
    let mut formulas: Vec<DnfFormula> = Vec::new();
    // Exhaustive: every 1-clause and every ordered 2-clause formula over
    // two variables.
    let clauses2 = all_clauses(2);
    for c in &clauses2 {
        formulas.push(DnfFormula { num_vars: 2, clauses: vec![c.clone()] });
    }
    for a in &clauses2 {
        for b in &clauses2 {
            formulas.push(DnfFormula { num_vars: 2, clauses: vec![a.clone(), b.clone()] });
        }
    }
    // Deterministic spread of three-variable, three-clause formulas.
    let clauses3 = all_clauses(3);
    for i in 0..10usize {
        let picks = [i % 26, (i * 7 + 3) % 26, (i * 11 + 5) % 26];
        formulas.push(DnfFormula {
            num_vars: 3,
            clauses: picks.iter().map(|&j| clauses3[j].clone()).collect(),
        });
    }
    assert!(formulas.len() >= 50, "family has only {}", formulas.len());

    let mut checks = 0usize;
    for (i, formula) in formulas.iter().enumerate() {
        let max_sat = dnf_max_sat(formula).unwrap();
        for t in 1..=formula.clauses.len() {
            let net = gen_dnf_reduction(formula, t).unwrap();
            let report = solve_exact_bruteforce(&net, DEFAULT_MAX_CRUCIAL).unwrap();
            let achievable = report.alpha == 0.0;
            assert_eq!(
                achievable,
                max_sat >= t,
                "formula {i} t={t}: optimum {} but max-sat {max_sat}",
                report.alpha
            );
            checks += 1;
        }
    }
    pass(
        5,
        &format!(
            "reduction equivalence on {} formulas, {checks} (formula, t) checks, 100% agreement",
            formulas.len()
        ),
    );
}

/// Criterion 6: greedy concedes 10 on both hard fixtures while the matching
/// exact solver concedes 0, and the ratio scales without bound.
#[test]
fn acceptance_6_greedy_gap_unbounded_ratio() {
    let iso = gen_greedy_hard(GreedyHardKind::Isolated);
    assert_eq!(solve_greedy(&iso).alpha, 10.0);
    assert_eq!(solve_isolated(&iso).unwrap().alpha, 0.0);

    let st = gen_greedy_hard(GreedyHardKind::SingleThreshold);
    assert_eq!(solve_greedy(&st).alpha, 10.0);
    assert_eq!(solve_single_threshold(&st).unwrap().alpha, 0.0);

    let scale_values = |net: &DefenseNetwork, scale: f64| {
        let mut scaled = net.clone();
        for n in scaled.nodes.iter_mut() {
            n.g *= scale;
            n.g_prime *= scale;
        }
        scaled
    };
    for scale in [10.0, 1e3, 1e5] {
        let iso_scaled = scale_values(&iso, scale);
        assert_eq!(solve_greedy(&iso_scaled).alpha, 10.0 * scale, "greedy scales with values");
        assert_eq!(solve_isolated(&iso_scaled).unwrap().alpha, 0.0, "optimum stays 0");

        let st_scaled = scale_values(&st, scale);
        assert_eq!(solve_greedy(&st_scaled).alpha, 10.0 * scale, "greedy scales with values");
        assert_eq!(solve_single_threshold(&st_scaled).unwrap().alpha, 0.0, "optimum stays 0");
    }
    pass(6, "greedy concedes 10x the scale while exact solvers concede 0 (unbounded ratio)");
}

/// Criterion 7: every flow carries its own certificate and every feasible LP
/// answer checks out independently, across a randomized battery.
#[test]
fn acceptance_7_flow_and_lp_self_verification() {
    let mut flows = 0usize;
    let mut lps = 0usize;

    for net in battery(60, 7, 12, ModelClass::Isolated, 50_000) {
        for &alpha in &result_space(&net) {
            let (flow_net, _) = build_isolated_flow_network(&net, alpha).unwrap();
            let result = max_flow(&flow_net).unwrap();
            let violation = verify_flow(&flow_net, &result);
            assert!(
                violation <= 1e-9,
                "flow certificate violated by {violation} at level {alpha}"
            );
            flows += 1;
        }
    }

    for net in battery(60, 7, 12, ModelClass::General, 60_000) {
        for &alpha in &result_space(&net) {
            let (lp, _) = build_relaxation_lp(&net, alpha, net.resource / 2.0);
            if let LpSolution::Feasible { values, .. } = solve_lp(&lp).unwrap() {
                let violation = check_solution(&lp, &values);
                assert!(
                    violation <= 1e-7,
                    "relaxation solution violated by {violation} at level {alpha}"
                );
                lps += 1;
            }
            let crucial: Vec<String> = crucial_set(&net, alpha).into_iter().collect();
            // Spot-check two upgrade subsets per level.
            for mask in [0u64, (1 << crucial.len()) - 1] {
                let subset: BTreeSet<String> = crucial
                    .iter()
                    .enumerate()
                    .filter(|(bit, _)| mask & (1 << bit) != 0)
                    .map(|(_, id)| id.clone())
                    .collect();
                min_resource_for_subset(&net, alpha, &subset).unwrap();
                lps += 1;
            }
        }
    }
    pass(7, &format!("{flows} flows verified <= 1e-9, {lps} LP solves checked <= 1e-7"));
}

/// Criterion 8: desk-scale performance. The isolated solver handles 10k
/// nodes / 50k edges within 10 s and the simplex-backed single-threshold
/// solver handles n = 300 dense-ish instances within 30 s.
#[test]
fn acceptance_8_performance_smoke() {
    let big = gen_random_in_class(99, 10_000, 50_000, &RandomRanges::default(), ModelClass::Isolated)
        .expect("generator handles desk scale");
    let start = Instant::now();
    let report = solve_isolated(&big).unwrap();
    let isolated_elapsed = start.elapsed();
    assert!(
        isolated_elapsed.as_secs_f64() < 10.0,
        "isolated solve took {isolated_elapsed:?}, budget is 10 s"
    );
    assert!(report.evaluated_result <= report.alpha + 1e-6);

    let start = Instant::now();
    for seed in [7, 8] {
        let net = gen_random_in_class(
            seed,
            300,
            6_000,
            &RandomRanges::default(),
            ModelClass::SingleThreshold,
        )
        .expect("generator handles desk scale");
        let report = solve_single_threshold(&net).unwrap();
        assert!(report.evaluated_result <= report.alpha + 1e-6);
    }
    let simplex_elapsed = start.elapsed();
    assert!(
        simplex_elapsed.as_secs_f64() < 30.0,
        "single-threshold solves took {simplex_elapsed:?}, budget is 30 s"
    );
    pass(
        8,
        &format!(
            "10k-node isolated solve in {isolated_elapsed:?}, two 300-node simplex solves in {simplex_elapsed:?}"
        ),
    );
}

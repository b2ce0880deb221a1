use beam_pointing::analysis::min_distortion;
use beam_pointing::channel::RngSeed;
use beam_pointing::oracle::{
    evaluate_policy, evaluate_policy_exact, leaf_of, leaf_partition, minimize_naive, minimize_over_policies,
    naive_tree_count, reduced_tree_count, PolicyTree, DEFAULT_BUDGET,
};
use beam_pointing::policy::{compute_schedule, optimal_policy, sweep_policy, Mode, PolicySpec};
use beam_pointing::simulate::run_experiment;
use beam_pointing::{validate_config, BeamIndex, DistortionValue, Error, InputMask};
use proptest::prelude::*;

#[test]
fn reduced_search_agrees_with_raw_masks() {
    for m in 2..=4 {
        for l in 1..=2 {
            for b in 1..=m {
                let cfg = validate_config(m, l, b).unwrap();
                let reduced = minimize_over_policies(&cfg, DEFAULT_BUDGET).unwrap();
                let naive = minimize_naive(&cfg, DEFAULT_BUDGET).unwrap();
                assert_eq!(reduced.min_distortion, naive.min_distortion, "{cfg}");
                assert_eq!(naive.policies_evaluated, naive_tree_count(&cfg));
                assert!(reduced.policies_evaluated <= naive.policies_evaluated);
            }
        }
    }
}

#[test]
fn oracle_matches_formula_on_small_grid() {
    for m in [2, 3, 4, 5, 6, 8] {
        for l in 1..=3 {
            for b in 1..=m {
                let cfg = validate_config(m, l, b).unwrap();
                if reduced_tree_count(&cfg) > DEFAULT_BUDGET {
                    continue;
                }
                let oracle = minimize_over_policies(&cfg, DEFAULT_BUDGET).unwrap();
                let report = min_distortion(&cfg).unwrap();
                // the integer policy is feasible, so it can never beat the search
                assert!(oracle.min_distortion <= report.feasible_value, "{cfg}");
                if m.is_power_of_two() && b.is_power_of_two() {
                    assert_eq!(oracle.min_distortion, report.d_min, "{cfg}");
                }
            }
        }
    }
}

#[test]
fn budget_refusal() {
    let cfg = validate_config(32, 5, 16).unwrap();
    match minimize_over_policies(&cfg, DEFAULT_BUDGET) {
        Err(Error::BudgetExceeded { estimate, budget }) => {
            assert!(estimate > budget);
            assert_eq!(budget, DEFAULT_BUDGET);
        }
        other => panic!("expected refusal, got {other:?}"),
    }
    let small = validate_config(4, 2, 2).unwrap();
    assert!(matches!(minimize_over_policies(&small, 3), Err(Error::BudgetExceeded { .. })));
}

#[test]
fn hand_built_trees() {
    let cfg = validate_config(4, 2, 2).unwrap();
    let mask = |s: &[u32]| InputMask::new(&cfg, s.iter().copied()).unwrap();

    let mut bisect = PolicyTree::new(&cfg);
    bisect.set(&[], mask(&[1, 2])).unwrap();
    bisect.set(&[true], mask(&[1])).unwrap();
    bisect.set(&[false], mask(&[3])).unwrap();
    assert!(evaluate_policy_exact(&cfg, &bisect).unwrap().is_zero());

    // probing the same pair twice leaves two pairs
    let mut repeat = PolicyTree::new(&cfg);
    repeat.set(&[], mask(&[1, 2])).unwrap();
    repeat.set(&[true], mask(&[1, 2])).unwrap();
    repeat.set(&[false], mask(&[1, 2])).unwrap();
    assert_eq!(evaluate_policy_exact(&cfg, &repeat).unwrap(), DistortionValue::from_ratio(1, 1));

    let idle = PolicyTree::new(&cfg);
    assert_eq!(evaluate_policy_exact(&cfg, &idle).unwrap(), DistortionValue::from_ratio(3, 2));

    assert_eq!(leaf_of(&cfg, &repeat, BeamIndex::new(4, &cfg).unwrap()).unwrap().to_string(), "{3,4}");
}

#[test]
fn bayes_estimator_beats_every_leaf_map() {
    // any rule mapping leaves to guesses does at best as well as the set-based estimator
    for (m, l, b) in [(4, 1, 2), (5, 2, 2), (6, 2, 1), (3, 1, 1)] {
        let cfg = validate_config(m, l, b).unwrap();
        for tree in [
            PolicyTree::from_policy(&cfg, &optimal_policy(&cfg, compute_schedule(&cfg), Mode::Canonical).unwrap(), &mut RngSeed(0).rng()).unwrap(),
            PolicyTree::from_policy(&cfg, &sweep_policy(&cfg), &mut RngSeed(0).rng()).unwrap(),
        ] {
            let leaves: Vec<Vec<u32>> =
                leaf_partition(&cfg, &tree).unwrap().into_values().map(|s| s.into_iter().map(BeamIndex::get).collect()).collect();
            let bayes = evaluate_policy_exact(&cfg, &tree).unwrap();
            let mut best_errors = u64::MAX;
            let mut guesses = vec![1u32; leaves.len()];
            loop {
                let errors: u64 = leaves
                    .iter()
                    .zip(&guesses)
                    .map(|(states, g)| states.iter().filter(|&&s| s != *g).count() as u64)
                    .sum();
                best_errors = best_errors.min(errors);
                let mut i = 0;
                while i < guesses.len() && guesses[i] == m {
                    guesses[i] = 1;
                    i += 1;
                }
                if i == guesses.len() {
                    break;
                }
                guesses[i] += 1;
            }
            assert_eq!(DistortionValue::from_ratio(2 * best_errors as i64, m as i64), bayes, "{cfg}");
        }
    }
}

#[test]
fn monte_carlo_matches_exact_values() {
    for (m, l, b, spec) in [
        (8, 2, 2, PolicySpec::Optimal),
        (6, 3, 2, PolicySpec::Optimal),
        (8, 3, 1, PolicySpec::Sweep),
        (12, 2, 5, PolicySpec::Optimal),
    ] {
        let cfg = validate_config(m, l, b).unwrap();
        let policy = spec.build(&cfg, Mode::Random).unwrap();
        let exact = evaluate_policy(&cfg, policy.as_ref(), &mut RngSeed(1).rng()).unwrap().to_f64();
        let report = run_experiment(&cfg, policy.as_ref(), 40_000, RngSeed(21)).unwrap();
        assert!(
            (report.mean_distortion - exact).abs() <= 3.0 * report.std_error,
            "{cfg} {spec}: {} vs {exact} (se {})",
            report.mean_distortion,
            report.std_error
        );
    }
}

#[test]
fn argmin_is_consistent() {
    let cfg = validate_config(6, 2, 3).unwrap();
    let result = minimize_over_policies(&cfg, DEFAULT_BUDGET).unwrap();
    assert_eq!(evaluate_policy_exact(&cfg, &result.argmin_tree).unwrap(), result.min_distortion);
    let again = minimize_over_policies(&cfg, DEFAULT_BUDGET).unwrap();
    assert_eq!(again.argmin_tree.render(), result.argmin_tree.render());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn leaves_partition_directions(m in 2u32..24, l in 1u32..6, frac in 0.0f64..=1.0, seed in any::<u64>()) {
        let b = 1 + ((m - 1) as f64 * frac) as u32;
        let cfg = validate_config(m, l, b).unwrap();
        for spec in [PolicySpec::Optimal, PolicySpec::Sweep, PolicySpec::Random(b), PolicySpec::Idle] {
            let policy = spec.build(&cfg, Mode::Random).unwrap();
            let tree = PolicyTree::from_policy(&cfg, policy.as_ref(), &mut RngSeed(seed).rng()).unwrap();
            let leaves = leaf_partition(&cfg, &tree).unwrap();
            let mut all: Vec<u32> = leaves.values().flatten().map(|s| s.get()).collect();
            all.sort_unstable();
            prop_assert_eq!(all, (1..=m).collect::<Vec<_>>());
            let value = evaluate_policy_exact(&cfg, &tree).unwrap();
            prop_assert!(value.in_range());
        }
    }
}

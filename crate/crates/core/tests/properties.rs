use helpdp_core::oracle::{brute_force_optimal, continuation_success, exact_policy_eval, random_mdp, RandomMdpSpec};
use helpdp_core::planner::{
    solve, usage_policy_iteration, usage_policy_iteration_traced, value_iteration, RewardConfig, Solution,
    ThresholdVariant,
};
use helpdp_core::{ActionKind, TransitionModel};
use proptest::prelude::*;

fn tight(r: Vec<f64>, gamma: f64) -> RewardConfig {
    RewardConfig::multi(r).with_gamma(gamma).with_epsilon(1e-12).with_max_iters(200_000)
}

/// Smallest gap between the chosen action's value and any other action's,
/// computed from the solution's own value table.
fn min_branch_gap(model: &TransitionModel, sol: &Solution, cfg: &RewardConfig) -> f64 {
    let v: Vec<f64> = model.states().iter().map(|s| sol.value[s]).collect();
    let mut gap = f64::INFINITY;
    for i in 0..model.len() {
        let rows = model.rows(i);
        let q: Vec<f64> = rows
            .iter()
            .map(|r| -cfg.cost(r.action) + cfg.gamma * r.expect(&v))
            .collect();
        for a in 0..q.len() {
            for b in a + 1..q.len() {
                gap = gap.min((q[a] - q[b]).abs());
            }
        }
    }
    gap
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn planner_matches_brute_force(
        seed in any::<u64>(), n in 1usize..=8, k in 1usize..=2,
        r1 in 0.0f64..0.6, r2 in 0.0f64..0.6, undiscounted in any::<bool>()
    ) {
        let (model, start) = random_mdp(&RandomMdpSpec::new(n, k), seed).unwrap();
        let gamma = if undiscounted { 1.0 } else { 0.95 };
        let cfg = tight([r1, r2][..k].to_vec(), gamma);
        let sol = solve(&model, &continuation_success(&model).unwrap(), &cfg).unwrap();
        prop_assert!(sol.converged);
        let report = brute_force_optimal(&model, &cfg, &[start], 12).unwrap();
        prop_assert_eq!(report.policy_count, (k + 1).pow(n as u32));
        for (state, best) in &report.best_values_all {
            prop_assert!((sol.value[state] - best).abs() < 1e-8, "{} {} {}", state, sol.value[state], best);
        }
        for values in report.per_policy.iter().flatten() {
            prop_assert!(report.best_value[0] >= values[0] - 1e-12);
        }
    }

    #[test]
    fn upi_agrees_with_value_iteration(seed in any::<u64>(), n in 1usize..=50, r in 0.0f64..0.5) {
        let (model, _) = random_mdp(&RandomMdpSpec::new(n, 1), seed).unwrap();
        let cfg = tight(vec![r], 0.99);
        let sol = usage_policy_iteration(&model, &continuation_success(&model).unwrap(), &cfg).unwrap();
        let vi = value_iteration(&model, None, &cfg).unwrap();
        prop_assert!(sol.converged && vi.converged);
        prop_assume!(min_branch_gap(&model, &sol, &cfg) > 1e-7);
        prop_assert_eq!(&sol.policy, &vi.policy);
        for (s, v) in &vi.values {
            prop_assert!((sol.value[s] - v).abs() < 1e-8);
        }
    }

    #[test]
    fn planner_tables_match_exact_evaluation(seed in any::<u64>(), n in 1usize..=20, r in 0.0f64..0.5) {
        let (model, _) = random_mdp(&RandomMdpSpec::new(n, 1), seed).unwrap();
        let cfg = tight(vec![r], 0.99);
        let sol = usage_policy_iteration(&model, &continuation_success(&model).unwrap(), &cfg).unwrap();
        let ev = exact_policy_eval(&model, &sol.policy, &cfg, None).unwrap();
        for s in model.states() {
            prop_assert!((sol.value[s] - ev.value[s]).abs() < 1e-8);
            prop_assert!((sol.success[s] - ev.success[s]).abs() < 1e-8);
            prop_assert!((sol.usage[s][0] - ev.usage[s][0]).abs() < 1e-8);
        }
        prop_assert!(sol.decomposition_residual() < 1e-9);
    }

    #[test]
    fn usage_never_rises_with_cost(seed in any::<u64>(), n in 1usize..=15) {
        let (model, start) = random_mdp(&RandomMdpSpec::new(n, 1), seed).unwrap();
        let success = continuation_success(&model).unwrap();
        let mut last = f64::INFINITY;
        for step in 0..50 {
            let r = step as f64 * 0.03;
            let sol = usage_policy_iteration(&model, &success, &tight(vec![r], 0.99)).unwrap();
            let u = sol.expected_usage(std::slice::from_ref(&start)).unwrap()[0];
            prop_assert!(u <= last + 1e-9, "r = {r}: {u} > {last}");
            last = u;
        }
    }

    #[test]
    fn sweeps_contract_once_policy_settles(seed in any::<u64>(), n in 1usize..=30, r in 0.0f64..0.5) {
        let (model, _) = random_mdp(&RandomMdpSpec::new(n, 1), seed).unwrap();
        let cfg = RewardConfig::single(r);
        let (sol, trace) =
            usage_policy_iteration_traced(&model, &continuation_success(&model).unwrap(), &cfg).unwrap();
        prop_assert!(sol.converged);
        prop_assert!(sol.iterations_run <= 10_000);
        let settled = trace.iter().rposition(|s| s.policy_changes > 0).map_or(0, |i| i + 1);
        for w in trace[settled..].windows(2) {
            prop_assert!(w[1].delta <= w[0].delta * (1.0 + 1e-9) + 1e-15);
        }
        prop_assert!(sol.decomposition_residual() < 1e-9);
    }

    #[test]
    fn literal_variant_never_beats_value_consistent(seed in any::<u64>(), n in 1usize..=10, r in 0.0f64..1.0) {
        let (model, _) = random_mdp(&RandomMdpSpec::new(n, 1), seed).unwrap();
        let success = continuation_success(&model).unwrap();
        let base = tight(vec![r], 0.99);
        let vc = usage_policy_iteration(&model, &success, &base).unwrap();
        let lit = usage_policy_iteration(&model, &success, &base.clone().with_variant(ThresholdVariant::PaperLiteral)).unwrap();
        let lit_eval = exact_policy_eval(&model, &lit.policy, &base, None).unwrap();
        for s in model.states() {
            prop_assert!(vc.value[s] >= lit_eval.value[s] - 1e-9);
        }
    }

    #[test]
    fn reduces_to_single_with_dominated_second(seed in any::<u64>(), n in 1usize..=10, r in 0.0f64..0.6, r2 in 0.01f64..1.0) {
        // help2 copies nohelp's dynamics at a positive price, so it is never worth it
        let (model, _) = random_mdp(&RandomMdpSpec::new(n, 1), seed).unwrap();
        let mut rows = Vec::new();
        for i in 0..model.len() {
            for row in model.rows(i) {
                let dist: Vec<_> = row.next.iter().map(|&(j, p)| (model.key(j).clone(), p)).collect();
                if row.action == ActionKind::NoHelp {
                    rows.push((model.key(i).clone(), ActionKind::help(2), dist.clone()));
                }
                rows.push((model.key(i).clone(), row.action, dist));
            }
        }
        let twin = TransitionModel::from_rows(rows).unwrap();
        let single = usage_policy_iteration(&model, &continuation_success(&model).unwrap(), &tight(vec![r], 0.99)).unwrap();
        let multi = solve(&twin, &continuation_success(&twin).unwrap(), &tight(vec![r, r2], 0.99)).unwrap();
        prop_assert_eq!(&single.policy, &multi.policy);
        for s in model.states() {
            prop_assert!((single.usage[s][0] - multi.usage[s][0]).abs() < 1e-9);
            prop_assert!(multi.usage[s][1].abs() < 1e-12);
            prop_assert!((single.value[s] - multi.value[s]).abs() < 1e-9);
        }
    }
}

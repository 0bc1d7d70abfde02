use std::collections::BTreeMap;

use helpdp_core::fixtures::{self, s};
use helpdp_core::io::{read_success, read_transitions, write_counts, write_model, write_success, Header, Transitions};
use helpdp_core::oracle::{monte_carlo_estimate, simulate_policy, McSample};
use helpdp_core::{ActionKind, CountTable, Episode, RolloutLog, Step, SuccessModel, TransitionModel};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn normalized_frequency_within_binomial_band() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut table = CountTable::new();
    let n = 10_000;
    for _ in 0..n {
        let next = if rng.gen::<f64>() < 0.2 { fixtures::success() } else { fixtures::failure() };
        table.record(&s("s0"), ActionKind::NoHelp, &next).unwrap();
    }
    let model = TransitionModel::normalize(&table).unwrap();
    let p = model.prob(&s("s0"), ActionKind::NoHelp, &fixtures::success());
    let se = (0.2_f64 * 0.8 / n as f64).sqrt();
    assert!((p - 0.2).abs() <= 3.0 * se, "{p}");
    assert!((3.0 * se - 0.012).abs() < 1e-12);
}

/// Always-help rollouts on MDP-B, sampled straight from the fixture rows.
fn mdp_b_rollouts(n: usize, seed: u64) -> RolloutLog {
    let model = fixtures::mdp_b();
    let policy: BTreeMap<_, _> = [(s("s0"), ActionKind::help(1)), (s("s1"), ActionKind::help(1))].into();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut episodes = Vec::new();
    for e in 0..n {
        let mut state = s("s0");
        let mut steps = Vec::new();
        while !state.is_terminal() {
            let action = policy[&state];
            steps.push(Step { state: state.clone(), action: "act".into(), intervention: action.intervention() });
            let dist = model.distribution(&state, action).unwrap();
            let u: f64 = rng.gen();
            let mut acc = 0.0;
            let mut next = dist.last().unwrap().0.clone();
            for (k, p) in dist {
                acc += p;
                if u < acc {
                    next = k.clone();
                    break;
                }
            }
            state = next;
        }
        episodes.push(Episode::new(format!("ep{e}"), seed, steps, state));
    }
    RolloutLog::new(episodes)
}

#[test]
fn success_estimate_matches_hand_value() {
    let log = mdp_b_rollouts(10_000, 5);
    let m = SuccessModel::estimate(&log).unwrap();
    let e = m.entry(&s("s1"), ActionKind::help(1)).unwrap();
    let se = (0.8_f64 * 0.2 / e.n as f64).sqrt();
    assert!((e.p - 0.8).abs() <= 3.0 * se, "{} over {}", e.p, e.n);
    // from s0 under always-help: 0.5 + 0.5 * 0.8
    let e0 = m.entry(&s("s0"), ActionKind::help(1)).unwrap();
    assert_eq!(e0.n, 10_000);
    assert!((e0.p - 0.9).abs() <= 3.0 * (0.09_f64 / 1e4).sqrt());
}

#[test]
fn counts_from_log_total_steps() {
    let log = mdp_b_rollouts(200, 1);
    let table = CountTable::from_log(&log).unwrap();
    let steps: usize = log.episodes.iter().map(|e| e.length).sum();
    assert_eq!(table.total(), steps as u64);
}

fn always_help_a(rng: &mut ChaCha8Rng) -> McSample {
    let model = fixtures::mdp_a();
    let policy = [(s("s0"), ActionKind::help(1))].into();
    simulate_policy(&model, &policy, &s("s0"), 1, 1.0, 100, None, rng)
}

#[test]
fn monte_carlo_mdp_a_always_help() {
    let est = monte_carlo_estimate(10_000, 3, always_help_a);
    assert!((est.success_mean - 0.9).abs() <= 3.0 * est.success_se, "{est:?}");
    assert_eq!(est.usage_mean, vec![1.0]);
    assert_eq!(est.usage_se, vec![0.0]);
    assert_eq!(est, monte_carlo_estimate(10_000, 3, always_help_a));
}

#[test]
fn deterministic_behavior_has_zero_error() {
    let est = monte_carlo_estimate(500, 9, |_| McSample { success: 1.0, usage: vec![2.0], length: 4 });
    assert_eq!((est.success_mean, est.success_se), (1.0, 0.0));
    assert_eq!(est.usage_se, vec![0.0]);
}

#[test]
fn standard_error_shrinks_like_inverse_root_n() {
    let se: Vec<f64> = [100, 1_000, 10_000]
        .iter()
        .map(|&n| monte_carlo_estimate(n, 21, always_help_a).success_se)
        .collect();
    for w in se.windows(2) {
        let ratio = w[0] / w[1];
        assert!((ratio - 10f64.sqrt()).abs() < 1.0, "{se:?}");
    }
}

#[test]
fn files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let header = Header { config_hash: "abc".into(), seed: 4 };
    let log = mdp_b_rollouts(50, 2);
    let table = CountTable::from_log(&log).unwrap();

    let counts = dir.path().join("counts.jsonl");
    write_counts(&counts, Some(&header), &table).unwrap();
    let (h, t) = read_transitions(&counts).unwrap();
    assert_eq!(h, Some(header.clone()));
    let Transitions::Counts(back) = t else { panic!("expected counts") };
    assert_eq!(back, table);

    let model = fixtures::mdp_b();
    let exact = dir.path().join("exact.jsonl");
    write_model(&exact, None, &model).unwrap();
    let (h, t) = read_transitions(&exact).unwrap();
    assert!(h.is_none());
    assert_eq!(t.into_model(0.0).unwrap(), model);

    let success = SuccessModel::estimate(&log).unwrap();
    let path = dir.path().join("success.jsonl");
    write_success(&path, Some(&header), &success).unwrap();
    assert_eq!(read_success(&path).unwrap().1, success);
}

use helpdp_sim::actors::{base_actor, base_distribution, strong_actor, strong_distribution};
use helpdp_sim::env::SplitSizes;
use helpdp_sim::mcts::{mcts_intervene, BaseValues, UctCounts};
use helpdp_sim::pipeline::{evaluate, Behavior};
use helpdp_sim::{generate_tasks, Action, Env, EnvConfig, EnvState, Intervention, SimError, Task};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn default_train() -> Vec<Task> {
    generate_tasks(&EnvConfig::default(), &SplitSizes { train: 1000, val: 0, test: 0 }, 2024)
        .unwrap()
        .train
}

#[test]
fn noiseless_base_actor_walks_to_singleton_hint() {
    let cfg = EnvConfig { eta: 0.0, ..EnvConfig::default() };
    let task = Task::new("t", 6, 4, vec![4], vec![], 12).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut s = task.start();
    let mut path = Vec::new();
    while !s.is_terminal() {
        let a = base_actor(&cfg, &task, &s, 0.0, &mut rng);
        path.push(a);
        s = task.step(&s, a).unwrap();
    }
    assert_eq!(path, vec![Action::Go(5), Action::Go(4), Action::Explore]);
    assert!(s.found());
}

#[test]
fn full_noise_is_uniform_over_legal_actions() {
    let cfg = EnvConfig { eta: 1.0, eta_strong: 1.0, ..EnvConfig::default() };
    let task = Task::new("t", 6, 4, vec![2, 4], vec![], 12).unwrap();
    let s = task.start();
    for dist in [base_distribution(&cfg, &task, &s, 0.0), strong_distribution(&cfg, &task, &s)] {
        assert_eq!(dist.len(), 3);
        for (_, p) in dist {
            assert!((p - 1.0 / 3.0).abs() < 1e-15);
        }
    }
    // temperature 1 is full noise regardless of eta
    let cfg = EnvConfig::default();
    for (_, p) in base_distribution(&cfg, &task, &s, 1.0) {
        assert!((p - 1.0 / 3.0).abs() < 1e-15);
    }
}

#[test]
fn base_actor_never_searches_outside_the_hint() {
    let cfg = EnvConfig { eta: 0.0, ..EnvConfig::default() };
    // the object moves to room 3, outside the hint; the noiseless base actor
    // keeps cycling rooms 1 and 5 and fails
    let task = Task::new("t", 6, 1, vec![1, 5], vec![helpdp_sim::env::Move { step: 1, room: 3 }], 12).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut s = task.start();
    while !s.is_terminal() {
        let a = base_actor(&cfg, &task, &s, 0.0, &mut rng);
        if a == Action::Explore {
            assert!(task.hint.contains(&s.room));
        }
        s = task.step(&s, a).unwrap();
    }
    assert!(!s.found());
}

#[test]
fn actors_are_deterministic_given_seed() {
    let cfg = EnvConfig::default();
    let task = Task::new("t", 6, 4, vec![2, 4], vec![], 12).unwrap();
    let s = task.start();
    for seed in 0..20 {
        let a = base_actor(&cfg, &task, &s, 0.0, &mut ChaCha8Rng::seed_from_u64(seed));
        let b = base_actor(&cfg, &task, &s, 0.0, &mut ChaCha8Rng::seed_from_u64(seed));
        assert_eq!(a, b);
        let a = strong_actor(&cfg, &task, &s, &mut ChaCha8Rng::seed_from_u64(seed));
        let b = strong_actor(&cfg, &task, &s, &mut ChaCha8Rng::seed_from_u64(seed));
        assert_eq!(a, b);
    }
}

#[test]
fn default_base_success_rate_is_in_band() {
    let env = Env::new(EnvConfig::default(), vec![Intervention::Strong]).unwrap();
    let tasks = default_train();
    let (m, _) = evaluate(&env, Behavior::Fixed(None), &tasks, 10, 99, 1.0).unwrap();
    assert_eq!(m.episodes, 10_000);
    assert!((0.2..=0.4).contains(&m.sr), "base SR {}", m.sr);
}

#[test]
fn always_strong_success_rate_is_high() {
    let env = Env::new(EnvConfig::default(), vec![Intervention::Strong]).unwrap();
    let tasks = default_train();
    let (m, _) = evaluate(&env, Behavior::Fixed(Some(1)), &tasks, 10, 99, 1.0).unwrap();
    assert!(m.sr >= 0.6, "strong SR {}", m.sr);
    assert!(m.spl <= m.sr);
}

#[test]
fn noiseless_strong_actor_always_succeeds() {
    let cfg = EnvConfig { eta_strong: 0.0, ..EnvConfig::default() };
    let tasks = generate_tasks(&cfg, &SplitSizes { train: 300, val: 0, test: 0 }, 5).unwrap().train;
    let env = Env::new(cfg, vec![Intervention::Strong]).unwrap();
    let (m, results) = evaluate(&env, Behavior::Fixed(Some(1)), &tasks, 1, 0, 1.0).unwrap();
    assert_eq!(m.sr, 1.0);
    // it follows the object without anticipating moves
    assert!(results.iter().all(|r| r.length >= r.optimal_length));
}

#[test]
fn noiseless_strong_actor_is_optimal_without_moves() {
    let cfg = EnvConfig { eta_strong: 0.0, move_prob: 0.0, ..EnvConfig::default() };
    let tasks = generate_tasks(&cfg, &SplitSizes { train: 300, val: 0, test: 0 }, 5).unwrap().train;
    let env = Env::new(cfg, vec![Intervention::Strong]).unwrap();
    let (m, results) = evaluate(&env, Behavior::Fixed(Some(1)), &tasks, 1, 0, 1.0).unwrap();
    for r in &results {
        assert_eq!(r.length, r.optimal_length, "{}", r.task_id);
    }
    // SPL equals SR exactly when every success is optimal
    assert_eq!(m.sr, 1.0);
    assert_eq!(m.spl, m.sr);
}

#[test]
fn search_ties_go_to_first_candidate() {
    let s = EnvState { elapsed: 0, room: 0, explored: 0, status: None };
    let cands = [Action::Go(1), Action::Explore, Action::Go(5)];
    let mut counts = UctCounts::new();
    assert_eq!(mcts_intervene(&s, &cands, |_| 0.5, &mut counts, 0.25).unwrap(), Action::Go(1));
    let cands = [Action::Explore, Action::Go(1)];
    let mut counts = UctCounts::new();
    assert_eq!(mcts_intervene(&s, &cands, |_| 0.5, &mut counts, 0.25).unwrap(), Action::Explore);
    assert!(matches!(
        mcts_intervene(&s, &[], |_| 0.5, &mut counts, 0.25),
        Err(SimError::NoCandidates)
    ));
}

#[test]
fn search_with_fresh_counts_picks_best_exact_score() {
    let cfg = EnvConfig { mcts: helpdp_sim::env::MctsConfig { q_noise: 0.0, ..Default::default() }, ..EnvConfig::default() };
    let tasks = generate_tasks(&cfg, &SplitSizes { train: 30, val: 0, test: 0 }, 17).unwrap().train;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for task in &tasks {
        let mut values = BaseValues::new(&cfg, task);
        let mut s = task.start();
        while !s.is_terminal() {
            let legal = task.legal_actions(&s);
            // exhaustive scores: step, then base-actor success of the successor
            let exact: Vec<f64> = legal.iter().map(|a| values.success(&task.step(&s, *a).unwrap())).collect();
            let best = exact.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let scores: Vec<f64> = legal.iter().map(|a| values.q(&s, *a)).collect();
            let chosen = mcts_intervene(&s, &legal, |a| scores[legal.iter().position(|x| *x == a).unwrap()], &mut UctCounts::new(), 0.25).unwrap();
            let i = legal.iter().position(|x| *x == chosen).unwrap();
            // lowest-index maximizer
            assert_eq!(i, exact.iter().position(|e| *e == best).unwrap());
            s = task.step(&s, base_actor(&cfg, task, &s, 0.0, &mut rng)).unwrap();
        }
    }
}

#[test]
fn search_counts_stay_consistent() {
    let s = EnvState { elapsed: 0, room: 0, explored: 0, status: None };
    let cands = [Action::Go(1), Action::Explore, Action::Go(5)];
    let q = |a: Action| if a == Action::Explore { 0.6 } else { 0.5 };
    let mut counts = UctCounts::new();
    let mut picks = Vec::new();
    for _ in 0..40 {
        picks.push(mcts_intervene(&s, &cands, q, &mut counts, 0.25).unwrap());
        assert_eq!(counts.visits(&s), counts.chosen_total(&s));
    }
    // the bonus eventually forces the other candidates to be tried
    assert_eq!(picks[0], Action::Explore);
    assert!(picks.contains(&Action::Go(1)));
    // executed-without-search steps weigh five
    counts.record(&s, Action::Go(5), 5);
    assert_eq!(counts.visits(&s), 45);
    assert_eq!(counts.visits(&s), counts.chosen_total(&s));
}

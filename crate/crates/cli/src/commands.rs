use std::collections::BTreeSet;
use std::fmt::Write as _;

use anyhow::{bail, Context, Result};
use helpdp_core::io::{self, Transitions};
use helpdp_core::oracle::brute_force_optimal;
use helpdp_core::planner::{reward_search, solve, Probe, Solution};
use helpdp_core::{fixtures, ActionKind, CountTable, Episode, RolloutLog, StateKey, SuccessModel, TransitionModel};
use helpdp_sim::episode::{derive_seed, Fixed};
use helpdp_sim::exact::exact_models;
use helpdp_sim::pipeline::{
    build_helper, calibrate_threshold, collect_phase1, default_schedule, evaluate, self_regulation_eval,
    split_seen_unseen, Behavior, EpisodeResult, HelperMode, HelperPolicy, Labeled, Metrics, SelfRegReport,
    TaskwiseVariant, Threshold,
};
use helpdp_sim::{generate_tasks, Env, Task, TaskRunner, TaskSet};
use serde::{Deserialize, Serialize};

use crate::config::{ensure_dir, require, BaselineKind, FitSource, RunConfig};
use crate::exit::UsageError;

/// One line of the task file.
#[derive(Serialize, Deserialize)]
struct TaskRecord {
    split: String,
    #[serde(flatten)]
    task: Task,
}

fn env(cfg: &RunConfig) -> Result<Env> {
    Ok(Env::new(cfg.env.clone(), cfg.interventions()?)?)
}

fn load_tasks(cfg: &RunConfig) -> Result<TaskSet> {
    let path = cfg.tasks_path();
    require(&path, "task file")?;
    let (_, records): (_, Vec<TaskRecord>) = io::read_jsonl(&path)?;
    let mut set = TaskSet::default();
    for r in records {
        match r.split.as_str() {
            "train" => set.train.push(r.task),
            "val" => set.val.push(r.task),
            "test" => set.test.push(r.task),
            other => bail!(UsageError(format!("{}: unknown split `{other}`", path.display()))),
        }
    }
    Ok(set)
}

fn split<'a>(set: &'a TaskSet, name: &str) -> Result<&'a [Task]> {
    let tasks = set.split(name).ok_or_else(|| UsageError(format!("unknown split `{name}`")))?;
    if tasks.is_empty() {
        bail!(UsageError(format!("split `{name}` has no tasks")));
    }
    Ok(tasks)
}

fn load_log(cfg: &RunConfig) -> Result<RolloutLog> {
    let path = cfg.rollouts_path();
    require(&path, "rollout log")?;
    let (_, episodes): (_, Vec<Episode>) = io::read_jsonl(&path)?;
    Ok(RolloutLog::new(episodes))
}

fn load_solution(cfg: &RunConfig) -> Result<Solution> {
    let path = cfg.solution_path();
    require(&path, "solution")?;
    Ok(io::read_json(&path)?)
}

fn load_success(cfg: &RunConfig) -> Result<SuccessModel> {
    let path = cfg.success_path();
    require(&path, "success model")?;
    Ok(io::read_success(&path)?.1)
}

fn load_fitted_model(cfg: &RunConfig) -> Result<TransitionModel> {
    let path = cfg.transitions_path();
    require(&path, "transition model")?;
    Ok(io::read_transitions(&path)?.1.into_model(cfg.fit.alpha)?)
}

/// Model the planner commands work on, its success model, start states and
/// number of interventions.
struct Planning {
    model: TransitionModel,
    success: SuccessModel,
    starts: Vec<StateKey>,
    k: usize,
}

fn planning(cfg: &RunConfig) -> Result<Planning> {
    if let Some(name) = &cfg.model.fixture {
        let model = fixtures::by_name(name).expect("validated fixture name");
        let success = fixtures::exact_success(&model);
        let k = model.interventions();
        return Ok(Planning {
            model,
            success,
            starts: vec![fixtures::start()],
            k,
        });
    }
    let model = load_fitted_model(cfg)?;
    let success = load_success(cfg)?;
    let tasks = load_tasks(cfg)?;
    let starts: BTreeSet<StateKey> = tasks.train.iter().map(|t| t.key(&t.start())).filter(|s| model.contains(s)).collect();
    if starts.is_empty() {
        bail!(helpdp_core::Error::NoData);
    }
    Ok(Planning {
        model,
        success,
        // one entry per training task so the mean weights tasks equally
        starts: tasks.train.iter().map(|t| t.key(&t.start())).filter(|s| starts.contains(s)).collect(),
        k: cfg.interventions()?.len(),
    })
}

fn fmt_vec(v: &[f64]) -> String {
    if v.len() == 1 {
        format!("{}", v[0])
    } else {
        format!("[{}]", v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", "))
    }
}

fn summary_line(sol: &Solution) -> String {
    let total: f64 = sol.expected_usage.iter().sum();
    let mut line = format!(
        "r={} E[U]={:.6} converged={} iterations={}",
        fmt_vec(&sol.r),
        total,
        sol.converged,
        sol.iterations_run
    );
    if sol.expected_usage.len() > 1 {
        let _ = write!(line, " E[U]_i={}", fmt_vec(&sol.expected_usage));
    }
    line
}

pub fn gen(cfg: &RunConfig) -> Result<()> {
    let set = generate_tasks(&cfg.env, &cfg.splits, cfg.seed)?;
    ensure_dir(&cfg.out_dir())?;
    let records = [("train", &set.train), ("val", &set.val), ("test", &set.test)]
        .into_iter()
        .flat_map(|(name, tasks)| tasks.iter().map(move |t| TaskRecord { split: name.into(), task: t.clone() }));
    let path = cfg.tasks_path();
    io::write_jsonl(&path, Some(&cfg.header()), records)?;
    println!(
        "gen: {} train, {} val, {} test tasks -> {}",
        set.train.len(),
        set.val.len(),
        set.test.len(),
        path.display()
    );
    Ok(())
}

pub fn collect(cfg: &RunConfig) -> Result<()> {
    let env = env(cfg)?;
    let tasks = load_tasks(cfg)?;
    let schedule = cfg.collect.schedule.clone().unwrap_or_else(|| default_schedule(env.k()));
    let log = collect_phase1(&env, &tasks.train, &schedule, &cfg.collect.seeds, cfg.seed)?;
    let path = cfg.rollouts_path();
    io::write_jsonl(&path, Some(&cfg.header()), &log.episodes)?;
    let steps: usize = log.episodes.iter().map(|e| e.length).sum();
    println!("collect: {} episodes, {steps} steps -> {}", log.len(), path.display());
    Ok(())
}

pub fn fit(cfg: &RunConfig) -> Result<()> {
    let header = cfg.header();
    let (model_path, success_path) = (cfg.transitions_path(), cfg.success_path());
    let (states, rows, success) = match cfg.fit.source {
        FitSource::Empirical => {
            let log = load_log(cfg)?;
            let table = CountTable::from_log(&log)?;
            let success = SuccessModel::estimate(&log)?;
            io::write_counts(&model_path, Some(&header), &table)?;
            let model = Transitions::Counts(table).into_model(cfg.fit.alpha)?;
            (model.len(), model.row_count(), success)
        }
        FitSource::Exact => {
            let env = env(cfg)?;
            let tasks = load_tasks(cfg)?;
            let ex = exact_models(&env, &tasks.train, cfg.fit.state_cap)?;
            io::write_model(&model_path, Some(&header), &ex.transitions)?;
            (ex.transitions.len(), ex.transitions.row_count(), ex.success)
        }
    };
    io::write_success(&success_path, Some(&header), &success)?;
    println!(
        "fit: {states} states, {rows} rows, {} success entries -> {}, {}",
        success.len(),
        model_path.display(),
        success_path.display()
    );
    Ok(())
}

pub fn solve_cmd(cfg: &RunConfig) -> Result<()> {
    let p = planning(cfg)?;
    let r = cfg.costs(p.k)?;
    let mut sol = solve(&p.model, &p.success, &cfg.reward(r))?;
    sol.attach_expected_usage(&p.starts)?;
    ensure_dir(&cfg.out_dir())?;
    io::write_json(cfg.solution_path(), Some(&cfg.header()), &sol)?;
    println!("{}", summary_line(&sol));
    Ok(())
}

#[derive(Serialize)]
struct SearchReport<'a> {
    budget: f64,
    r: f64,
    costs: &'a [f64],
    expected_usage: f64,
    bracket: (f64, f64),
    trace: &'a [Probe],
}

pub fn search(cfg: &RunConfig) -> Result<()> {
    let p = planning(cfg)?;
    let scfg = cfg.search()?;
    let res = reward_search(&p.model, &p.success, &cfg.reward(vec![0.0; p.k]), &p.starts, &scfg)?;
    ensure_dir(&cfg.out_dir())?;
    let header = cfg.header();
    io::write_json(cfg.solution_path(), Some(&header), &res.solution)?;
    let report = SearchReport {
        budget: scfg.budget,
        r: res.r,
        costs: &res.solution.r,
        expected_usage: res.solution.expected_usage.iter().sum(),
        bracket: res.bracket,
        trace: &res.trace,
    };
    io::write_json(cfg.output("search.json"), Some(&header), &report)?;
    println!("{} budget={} probes={}", summary_line(&res.solution), scfg.budget, res.trace.len());
    Ok(())
}

pub fn annotate(cfg: &RunConfig) -> Result<()> {
    let sol = load_solution(cfg)?;
    let log = load_log(cfg)?;
    let model = load_fitted_model(cfg)?;
    let mut helper = build_helper(&sol, &log, &model, cfg.annotate.mode)?;
    if let Some(t) = cfg.annotate.fallback_threshold {
        helper = helper.with_threshold_fallback(&load_success(cfg)?, t, cfg.baseline.intervention);
    }
    let path = cfg.helper_path();
    io::write_json(&path, Some(&cfg.header()), &helper)?;
    let helped = helper.table.values().filter(|a| a.is_help()).count();
    println!(
        "annotate: {} states ({helped} help), {} tasks dropped, mode {} -> {}",
        helper.table.len(),
        helper.dropped_tasks.len(),
        match helper.training_mode {
            HelperMode::AllStates => "all_states",
            HelperMode::TrajectoryOnly => "trajectory_only",
        },
        path.display()
    );
    Ok(())
}

#[derive(Serialize)]
struct MetricsRow {
    name: String,
    tasks: usize,
    #[serde(flatten)]
    metrics: Metrics,
}

#[derive(Serialize)]
struct EvalReport {
    split: String,
    n_seeds: usize,
    rows: Vec<MetricsRow>,
}

fn subset_row(name: &str, ids: &BTreeSet<&str>, tasks: &[Task], results: &[EpisodeResult], k: usize, sol: &Solution) -> Option<MetricsRow> {
    if ids.is_empty() {
        return None;
    }
    let chosen: Vec<Task> = tasks.iter().filter(|t| ids.contains(t.task_id.as_str())).cloned().collect();
    let picked: Vec<EpisodeResult> = results.iter().filter(|r| ids.contains(r.task_id.as_str())).cloned().collect();
    Some(MetricsRow {
        name: name.into(),
        tasks: chosen.len(),
        metrics: Metrics::from_results(&picked, k).with_expectation(sol, &chosen),
    })
}

fn print_table(title: &str, rows: &[MetricsRow]) {
    println!("{title}");
    println!("{:<10} {:>6} {:>8} {:>7} {:>7} {:>7} {:>8} {:>8}", "subset", "tasks", "episodes", "SR", "SPL", "L", "U", "E[U]");
    for r in rows {
        let m = &r.metrics;
        let eu = m.eu.as_ref().map_or("-".to_owned(), |e| format!("{:.3}", e.iter().sum::<f64>()));
        println!(
            "{:<10} {:>6} {:>8} {:>7.3} {:>7.3} {:>7.2} {:>8.3} {:>8}",
            r.name,
            r.tasks,
            m.episodes,
            m.sr,
            m.spl,
            m.l,
            m.total_u(),
            eu
        );
    }
}

pub fn eval(cfg: &RunConfig) -> Result<()> {
    let env = env(cfg)?;
    let set = load_tasks(cfg)?;
    let tasks = split(&set, &cfg.eval.split)?;
    let sol = load_solution(cfg)?;
    let model = load_fitted_model(cfg)?;
    let helper_path = cfg.helper_path();
    require(&helper_path, "helper")?;
    let helper: HelperPolicy = io::read_json(&helper_path)?;

    let (metrics, results) = evaluate(&env, Behavior::Helper(&helper), tasks, cfg.eval.n_seeds, cfg.seed, cfg.planner.gamma)?;
    let starts: Vec<(String, StateKey)> = tasks.iter().map(|t| (t.task_id.clone(), t.key(&t.start()))).collect();
    let (seen, unseen) = split_seen_unseen(starts.iter().map(|(i, s)| (i.as_str(), s)), &sol, &model);
    let seen: BTreeSet<&str> = seen.iter().map(String::as_str).collect();
    let unseen: BTreeSet<&str> = unseen.iter().map(String::as_str).collect();

    let mut rows = vec![MetricsRow {
        name: "all".into(),
        tasks: tasks.len(),
        metrics: metrics.with_expectation(&sol, tasks),
    }];
    rows.extend(subset_row("seen", &seen, tasks, &results, env.k(), &sol));
    rows.extend(subset_row("unseen", &unseen, tasks, &results, env.k(), &sol));
    let report = EvalReport {
        split: cfg.eval.split.clone(),
        n_seeds: cfg.eval.n_seeds,
        rows,
    };
    let path = cfg.output("metrics.json");
    io::write_json(&path, Some(&cfg.header()), &report)?;
    print_table(&format!("eval: split {} x {} seeds -> {}", report.split, report.n_seeds, path.display()), &report.rows);
    Ok(())
}

#[derive(Serialize)]
struct BaselineReport {
    kind: BaselineKind,
    split: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    threshold: Option<Threshold>,
    #[serde(skip_serializing_if = "Option::is_none")]
    p: Option<Vec<f64>>,
    metrics: Metrics,
}

pub fn baseline(cfg: &RunConfig) -> Result<()> {
    let env = env(cfg)?;
    let set = load_tasks(cfg)?;
    let tasks = split(&set, &cfg.eval.split)?;
    let b = &cfg.baseline;
    let (gamma, seeds, seed) = (cfg.planner.gamma, cfg.eval.n_seeds, cfg.seed);
    let calibrate = |success: &SuccessModel, variant| -> Result<Threshold> {
        let val = split(&set, "val")?;
        Ok(calibrate_threshold(&env, val, success, variant, b.percent, b.calibration_seeds, derive_seed(seed, &[5]))?)
    };
    let (threshold, p, metrics) = match b.kind {
        BaselineKind::Random => {
            let p = b.p.expand(env.k())?;
            let (m, _) = evaluate(&env, Behavior::Random(&p), tasks, seeds, seed, gamma)?;
            (None, Some(p), m)
        }
        BaselineKind::Statewise => {
            let success = load_success(cfg)?;
            let th = calibrate(&success, None)?;
            let behavior = Behavior::Statewise {
                success: &success,
                threshold: th.value,
                intervention: b.intervention,
            };
            (Some(th), None, evaluate(&env, behavior, tasks, seeds, seed, gamma)?.0)
        }
        BaselineKind::TaskwiseAllSteps | BaselineKind::TaskwiseFirstFive => {
            let variant = if b.kind == BaselineKind::TaskwiseAllSteps {
                TaskwiseVariant::AllSteps
            } else {
                TaskwiseVariant::FirstFive
            };
            let success = load_success(cfg)?;
            let th = calibrate(&success, Some(variant))?;
            let behavior = Behavior::Taskwise {
                variant,
                success: &success,
                threshold: th.value,
                intervention: b.intervention,
            };
            (Some(th), None, evaluate(&env, behavior, tasks, seeds, seed, gamma)?.0)
        }
    };
    let name = serde_json::to_value(b.kind)?.as_str().unwrap_or("baseline").to_owned();
    let report = BaselineReport {
        kind: b.kind,
        split: cfg.eval.split.clone(),
        threshold,
        p,
        metrics,
    };
    ensure_dir(&cfg.out_dir())?;
    let path = cfg.output(&format!("baseline-{name}.json"));
    io::write_json(&path, Some(&cfg.header()), &report)?;
    let row = MetricsRow {
        name,
        tasks: tasks.len(),
        metrics: report.metrics,
    };
    print_table(&format!("baseline: split {} x {seeds} seeds -> {}", cfg.eval.split, path.display()), &[row]);
    Ok(())
}

fn labeled(env: &Env, tasks: &[Task], n_seeds: usize, seed: u64, stream: u64) -> Result<Vec<Labeled>> {
    let mut out = Vec::new();
    for (ti, task) in tasks.iter().enumerate() {
        let mut runner = TaskRunner::new(env, task);
        for rep in 0..n_seeds {
            let ep = runner.run(&mut Fixed(None), derive_seed(seed, &[4, stream, ti as u64, rep as u64]))?;
            out.push(Labeled {
                success: ep.succeeded(),
                states: ep.steps.into_iter().map(|s| s.state).collect(),
            });
        }
    }
    Ok(out)
}

pub fn selfreg(cfg: &RunConfig) -> Result<()> {
    let env = env(cfg)?;
    let set = load_tasks(cfg)?;
    let success = load_success(cfg)?;
    let n = cfg.selfreg.n_seeds;
    let val = labeled(&env, split(&set, "val")?, n, cfg.seed, 0)?;
    let test = labeled(&env, split(&set, "test")?, n, cfg.seed, 1)?;
    let p = |s: &StateKey| success.get(s, ActionKind::NoHelp);
    let report: SelfRegReport = self_regulation_eval(&p, &val, &test)?;
    ensure_dir(&cfg.out_dir())?;
    let path = cfg.output("selfreg.json");
    io::write_json(&path, Some(&cfg.header()), &report)?;
    println!(
        "selfreg: threshold={:.4} val_accuracy={:.3} accuracy={:.3} precision={:.3} recall={:.3} test={} -> {}",
        report.threshold,
        report.val_accuracy,
        report.accuracy,
        report.precision,
        report.recall,
        report.test_size,
        path.display()
    );
    Ok(())
}

#[derive(Serialize)]
struct OracleReport {
    r: Vec<f64>,
    starts: Vec<StateKey>,
    policy_count: usize,
    improper: usize,
    best_policy: std::collections::BTreeMap<StateKey, ActionKind>,
    best_value: Vec<f64>,
    planner_policy: std::collections::BTreeMap<StateKey, ActionKind>,
    planner_value: Vec<f64>,
    max_abs_diff: f64,
    matches: bool,
}

/// Largest value gap tolerated between brute force and the planner.
const ORACLE_TOL: f64 = 1e-8;

pub fn oracle(cfg: &RunConfig) -> Result<()> {
    let p = planning(cfg)?;
    let rc = cfg.reward(cfg.costs(p.k)?);
    // brute force wants each start once
    let starts: Vec<StateKey> = p.starts.iter().cloned().collect::<BTreeSet<_>>().into_iter().collect();
    let report = brute_force_optimal(&p.model, &rc, &starts, cfg.oracle.cap)?;
    let sol = solve(&p.model, &p.success, &rc)?;
    let planner_value: Vec<f64> = starts
        .iter()
        .map(|s| sol.value.get(s).copied().context("planner has no value for a start"))
        .collect::<Result<_>>()?;
    let max_abs_diff = report
        .best_value
        .iter()
        .zip(&planner_value)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let out = OracleReport {
        r: rc.r.clone(),
        starts,
        policy_count: report.policy_count,
        improper: report.improper,
        best_policy: report.best_policy,
        best_value: report.best_value,
        planner_policy: sol.policy.clone(),
        planner_value,
        max_abs_diff,
        matches: max_abs_diff <= ORACLE_TOL,
    };
    ensure_dir(&cfg.out_dir())?;
    let path = cfg.output("oracle.json");
    io::write_json(&path, Some(&cfg.header()), &out)?;
    println!(
        "oracle: policies={} best={} planner={} max_diff={:.3e} match={} -> {}",
        out.policy_count,
        fmt_vec(&out.best_value),
        fmt_vec(&out.planner_value),
        out.max_abs_diff,
        out.matches,
        path.display()
    );
    if !out.matches {
        bail!("planner value differs from brute force by {max_abs_diff:e}");
    }
    Ok(())
}

/// Sets the worker count from `HELPDP_WORKERS`, if given.
pub fn init_workers() -> Result<()> {
    if let Ok(v) = std::env::var("HELPDP_WORKERS") {
        let n: usize = v
            .parse()
            .ok()
            .filter(|n| *n > 0)
            .ok_or_else(|| UsageError(format!("HELPDP_WORKERS must be a positive integer, got `{v}`")))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use stochastic_ce::bandit::bernoulli_swap_regret;
use stochastic_ce::bill::bill;
use stochastic_ce::constants::{FastPllConfig, PllConfig};
use stochastic_ce::game::{
    generate_fast_mixing_game, generate_random_game, generate_single_controller_game, mixing_probability, Policy,
    StochasticGameSpec,
};
use stochastic_ce::hardness::{best_policy_bruteforce, online_to_batch_extract, reduce_3sat, CnfFormula};
use stochastic_ce::pll::{epoch_bound, fast_pll_run, pll_run, pll_sr_run, PllResult, SharedVariant};
use stochastic_ce::seeds::SeedTree;
use stochastic_ce::single_controller::algorithm4_run;
use stochastic_ce::verify::{
    best_fixed_policy_deviation, best_swap_deviation, efce_epsilon, exact_values, exact_visitation, nfcce_epsilon,
    profile_nfcce_epsilon, PolicyProfileCounts, PolicyProfileDistribution,
};

use crate::config::Resolved;
use crate::error::CliError;

pub const BUNDLED_CNF: &str = include_str!("../data/satisfiable.cnf");

pub struct Output {
    dir: PathBuf,
}

impl Output {
    pub fn new(dir: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", dir.display())))?;
        Ok(Self { dir: dir.to_path_buf() })
    }

    pub fn text(&self, name: &str, body: &str) -> Result<PathBuf, CliError> {
        let path = self.dir.join(name);
        std::fs::write(&path, body).map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))?;
        Ok(path)
    }

    pub fn json(&self, name: &str, value: &impl Serialize) -> Result<PathBuf, CliError> {
        let mut body = serde_json::to_string_pretty(value).map_err(|e| CliError::Runtime(e.to_string()))?;
        body.push('\n');
        self.text(name, &body)
    }

    /// The result document: command, resolved config, embedded spec, metrics.
    pub fn result(&self, command: &str, cfg: &Resolved, spec: Option<&StochasticGameSpec>, metrics: Value) -> Result<PathBuf, CliError> {
        self.json(
            "result.json",
            &json!({
                "command": command,
                "config": cfg,
                "spec": spec,
                "metrics": metrics,
            }),
        )
    }
}

pub fn load_spec(path: Option<&Path>, embedded: Option<StochasticGameSpec>) -> Result<StochasticGameSpec, CliError> {
    match (path, embedded) {
        (Some(p), _) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", p.display())))?;
            Ok(StochasticGameSpec::from_json(&text)?)
        }
        (None, Some(spec)) => Ok(spec),
        (None, None) => Err(CliError::Config("no game: pass --spec or a result file via --config".into())),
    }
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
pub enum GameKind {
    Random,
    FastMixing,
    SingleController,
}

pub struct GameArgs {
    pub kind: GameKind,
    pub players: usize,
    pub actions: usize,
    pub states: usize,
    pub horizon: usize,
    pub gamma: f64,
    pub controller: usize,
}

pub fn gen_game(cfg: &Resolved, args: &GameArgs, out: &Output) -> Result<String, CliError> {
    let GameArgs {
        players: m,
        actions: n,
        states: s,
        horizon: h,
        ..
    } = *args;
    let spec = match args.kind {
        GameKind::Random => generate_random_game(m, n, s, h, cfg.seed)?,
        GameKind::FastMixing => generate_fast_mixing_game(m, n, s, h, args.gamma, cfg.seed)?,
        GameKind::SingleController => generate_single_controller_game(m, n, s, h, args.controller, cfg.seed)?,
    };
    let path = out.text("spec.json", &spec.to_json())?;
    out.result(
        "gen-game",
        cfg,
        Some(&spec),
        json!({ "mixing_probability": mixing_probability(&spec) }),
    )?;
    Ok(format!("wrote {}", path.display()))
}

fn product_metrics(spec: &StochasticGameSpec, d: &PolicyProfileDistribution) -> Result<Value, CliError> {
    let players = spec.dims().players;
    let mut swap = Vec::with_capacity(players);
    let mut fixed = Vec::with_capacity(players);
    for i in 0..players {
        swap.push(best_swap_deviation(spec, d, i)?.1);
        fixed.push(best_fixed_policy_deviation(spec, d, i)?.1);
    }
    Ok(json!({
        "efce_epsilon": efce_epsilon(spec, d)?,
        "nfcce_epsilon": nfcce_epsilon(spec, d)?,
        "swap_gains": swap,
        "fixed_policy_gains": fixed,
    }))
}

fn merge(mut base: Value, extra: Value) -> Value {
    if let (Some(b), Value::Object(e)) = (base.as_object_mut(), extra) {
        b.extend(e);
    }
    base
}

pub fn run_bill(cfg: &Resolved, spec: &StochasticGameSpec, out: &Output) -> Result<String, CliError> {
    let r = bill(spec, cfg.epsilon, cfg.delta, &cfg.ledger, &SeedTree::new(cfg.seed))?;
    let dims = spec.dims();
    let exact = exact_values(spec, &r.distribution)?;
    let mut worst = 0.0f64;
    for i in 0..dims.players {
        for h in 0..dims.horizon {
            for x in 0..dims.states {
                worst = worst.max((r.unscaled_value(i, x, h) - exact[i][dims.pair(x, h)]).abs());
            }
        }
    }
    let metrics = merge(
        product_metrics(spec, &r.distribution)?,
        json!({
            "rounds_per_pair": r.rounds_per_pair,
            "value_estimates": r.values,
            "max_value_error": worst,
        }),
    );
    let efce = metrics["efce_epsilon"].clone();
    out.json("distribution.json", &r.distribution)?;
    let events: String = r
        .events
        .iter()
        .map(|e| serde_json::to_string(e).expect("event serializes") + "\n")
        .collect();
    out.text("events.jsonl", &events)?;
    out.result("run-bill", cfg, Some(spec), metrics)?;
    Ok(format!("efce_epsilon {efce}"))
}

fn pll_metrics(spec: &StochasticGameSpec, r: &PllResult) -> Result<Value, CliError> {
    let dims = spec.dims();
    let q = exact_visitation(spec, &r.distribution)?;
    let unlocked: Vec<f64> = (0..dims.horizon)
        .map(|h| (0..dims.states).filter(|&x| !r.locked[dims.pair(x, h)]).fold(0.0, |m, x| m + q[h][x]))
        .collect();
    Ok(merge(
        product_metrics(spec, &r.distribution)?,
        json!({
            "epochs_used": r.epochs_used,
            "epoch_bound": epoch_bound(dims),
            "trajectories": r.trajectories,
            "locked": r.locked,
            "windows": r.windows,
            "unlocked_mass": unlocked,
            "value_estimates": r.values,
        }),
    ))
}

fn write_pll(out: &Output, r: &PllResult) -> Result<(), CliError> {
    out.json("distribution.json", &r.distribution)?;
    out.text("events.jsonl", &r.events_jsonl())?;
    Ok(())
}

pub fn run_pll(cfg: &Resolved, spec: &StochasticGameSpec, out: &Output) -> Result<String, CliError> {
    let pc = PllConfig::resolve(&cfg.ledger, spec.dims(), cfg.epsilon, cfg.delta)?;
    let r = pll_run(spec, &pc, &SeedTree::new(cfg.seed))?;
    let metrics = merge(
        pll_metrics(spec, &r)?,
        json!({ "block": pc.block, "lock_threshold": pc.lock_threshold, "epoch_length": pc.epoch_length }),
    );
    let summary = format!("epochs {} efce_epsilon {}", r.epochs_used, metrics["efce_epsilon"]);
    write_pll(out, &r)?;
    out.result("run-pll", cfg, Some(spec), metrics)?;
    Ok(summary)
}

/// Without an explicit constant the spec's own certificate is used.
fn mixing_constant(spec: &StochasticGameSpec, gamma: Option<f64>) -> f64 {
    gamma.unwrap_or_else(|| mixing_probability(spec))
}

pub fn run_fastpll(cfg: &Resolved, spec: &StochasticGameSpec, gamma: Option<f64>, out: &Output) -> Result<String, CliError> {
    let gamma = mixing_constant(spec, gamma);
    let fc = FastPllConfig::resolve(&cfg.ledger, spec.dims(), cfg.epsilon, cfg.delta, gamma)?;
    let r = fast_pll_run(spec, &fc, &SeedTree::new(cfg.seed))?;
    let metrics = merge(
        pll_metrics(spec, &r)?,
        json!({
            "gamma": gamma,
            "block": fc.block,
            "epoch_length": fc.epoch_length,
            "visit_floor": fc.visit_floor(),
            "min_visits": r.windows.iter().min(),
        }),
    );
    let summary = format!("epochs {} efce_epsilon {}", r.epochs_used, metrics["efce_epsilon"]);
    write_pll(out, &r)?;
    out.result("run-fastpll", cfg, Some(spec), metrics)?;
    Ok(summary)
}

#[derive(Serialize)]
struct ProfileRun<'a> {
    count: usize,
    policies: &'a [Policy],
}

pub fn run_sc(cfg: &Resolved, spec: &StochasticGameSpec, controller: Option<usize>, out: &Output) -> Result<String, CliError> {
    let dims = spec.dims();
    let controller = match controller {
        Some(c) => c,
        None => (0..dims.players)
            .find(|&i| spec.transitions_controlled_by(i))
            .ok_or_else(|| CliError::Config("no player controls the transitions".into()))?,
    };
    let r = algorithm4_run(
        spec,
        controller,
        cfg.epsilon,
        cfg.delta,
        cfg.trajectories,
        &cfg.ledger,
        &SeedTree::new(cfg.seed),
    )?;
    let counts = PolicyProfileCounts::from_sequence(dims, &r.profiles)?;
    let nfcce = profile_nfcce_epsilon(spec, &counts, cfg.ledger.policy_class_cap)?;
    let mut runs: Vec<ProfileRun> = Vec::new();
    for p in &r.profiles {
        match runs.last_mut() {
            Some(last) if last.policies == p.as_slice() => last.count += 1,
            _ => runs.push(ProfileRun { count: 1, policies: p }),
        }
    }
    out.json("profiles.json", &runs)?;
    out.result(
        "run-sc",
        cfg,
        Some(spec),
        json!({
            "controller": controller,
            "nfcce_epsilon": nfcce,
            "trajectories": r.trajectories,
            "controller_block": r.controller_block,
            "follower_block": r.follower_block,
            "distinct_profiles": counts.distinct(),
        }),
    )?;
    Ok(format!("nfcce_epsilon {nfcce}"))
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
pub enum Variant {
    Pll,
    Fast,
}

pub fn run_pllsr(cfg: &Resolved, spec: &StochasticGameSpec, variant: Variant, gamma: Option<f64>, out: &Output) -> Result<String, CliError> {
    let total = cfg
        .trajectories
        .ok_or_else(|| CliError::Config("run-pllsr needs --trajectories".into()))?;
    let (variant, gamma) = match variant {
        Variant::Pll => (SharedVariant::Pll, gamma),
        Variant::Fast => (SharedVariant::Fast, Some(mixing_constant(spec, gamma))),
    };
    let r = pll_sr_run(spec, total, variant, &cfg.ledger, cfg.delta, gamma, &SeedTree::new(cfg.seed))?;
    let dims = spec.dims();
    let shared = r.shared_distribution()?;
    let mut worst_tv = 0.0f64;
    let mut played = Vec::with_capacity(dims.pairs());
    for h in 0..dims.horizon {
        for x in 0..dims.states {
            let counts = &r.play_counts[dims.pair(x, h)];
            let n: u64 = counts.iter().sum();
            if n > 0 {
                let p = shared.probabilities(x, h);
                let tv: f64 = p.iter().zip(counts).map(|(p, &c)| (p - c as f64 / n as f64).abs()).sum::<f64>() / 2.0;
                worst_tv = worst_tv.max(tv);
            }
        }
    }
    for counts in &r.play_counts {
        let list: Vec<u32> = counts
            .iter()
            .enumerate()
            .flat_map(|(a, &c)| std::iter::repeat_n(a as u32, c as usize))
            .collect();
        played.push(if list.is_empty() { (0..dims.profiles() as u32).collect() } else { list });
    }
    let play = PolicyProfileDistribution::new(dims, played)?;
    let identical = r.draws.windows(2).all(|w| w[0] == w[1]);
    let mean_reward: Vec<f64> = r
        .rewards
        .iter()
        .map(|v| v.iter().sum::<f64>() / v.len().max(1) as f64)
        .collect();
    out.json("distribution.json", &shared)?;
    out.text("events.jsonl", &r.phase_one.events_jsonl())?;
    out.result(
        "run-pllsr",
        cfg,
        Some(spec),
        json!({
            "variant": r.variant,
            "gamma": gamma,
            "learning_epsilon": r.epsilon,
            "phase_one_trajectories": r.phase_one.trajectories,
            "phase_two_trajectories": r.phase_two_trajectories,
            "shared_indices_identical": identical,
            "max_phase_two_tv": worst_tv,
            "play_efce_epsilon": efce_epsilon(spec, &play)?,
            "mean_reward": mean_reward,
        }),
    )?;
    Ok(format!("phase two {} trajectories, max tv {worst_tv}", r.phase_two_trajectories))
}

pub fn reduce_sat(cfg: &Resolved, cnf: Option<&Path>, out: &Output) -> Result<String, CliError> {
    let text = match cnf {
        Some(p) => std::fs::read_to_string(p).map_err(|e| CliError::Config(format!("cannot read {}: {e}", p.display())))?,
        None => BUNDLED_CNF.to_string(),
    };
    let formula = CnfFormula::from_dimacs(&text)?;
    let set = reduce_3sat(&formula)?;
    out.json("mdps.json", &set)?;
    let best = best_policy_bruteforce(&set)?;
    let extraction = online_to_batch_extract(std::slice::from_ref(&best.policy), &set, &formula)?;
    let satisfiable = formula.brute_force_solution().ok().map(|s| s.is_some());
    out.result(
        "reduce-sat",
        cfg,
        None,
        json!({
            "variables": formula.vars(),
            "clauses": formula.clauses().len(),
            "mdps": set.len(),
            "satisfiable": satisfiable,
            "best_value": best.value,
            "policies_evaluated": best.evaluated,
            "best_policy": best.policy,
            "extracted_assignment": extraction.assignments[extraction.best_block],
            "extracted_fraction": extraction.fraction,
        }),
    )?;
    Ok(format!("best value {}", best.value))
}

pub fn verify(cfg: &Resolved, spec: &StochasticGameSpec, distribution: &Path, out: &Output) -> Result<String, CliError> {
    let text = std::fs::read_to_string(distribution)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", distribution.display())))?;
    let d: PolicyProfileDistribution = serde_json::from_str(&text).map_err(|e| CliError::Config(e.to_string()))?;
    if d.dims() != spec.dims() {
        return Err(CliError::Config("distribution and spec dimensions differ".into()));
    }
    let metrics = merge(
        product_metrics(spec, &d)?,
        json!({ "values": exact_values(spec, &d)?, "visitation": exact_visitation(spec, &d)? }),
    );
    let efce = metrics["efce_epsilon"].clone();
    out.result("verify", cfg, Some(spec), metrics)?;
    Ok(format!("efce_epsilon {efce}"))
}

pub struct BenchArgs {
    pub actions: Vec<usize>,
    pub rounds: Vec<u64>,
    pub seeds: u64,
    pub checkpoints: u64,
}

/// Evenly spaced arm means in [0.2, 0.8].
fn bench_means(n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![0.5];
    }
    (0..n).map(|k| 0.2 + 0.6 * k as f64 / (n - 1) as f64).collect()
}

pub fn bench(cfg: &Resolved, args: &BenchArgs, out: &Output) -> Result<String, CliError> {
    let jobs: Vec<(usize, u64, u64)> = args
        .actions
        .iter()
        .flat_map(|&n| args.rounds.iter().flat_map(move |&t| (0..args.seeds).map(move |s| (n, t, s))))
        .collect();
    let root = SeedTree::new(cfg.seed).child("bench");
    let traces: Vec<Vec<(u64, f64)>> = jobs
        .par_iter()
        .map(|&(n, t, s)| bernoulli_swap_regret(&bench_means(n), t, args.checkpoints, &root.keyed("actions", n as u64).index(s)))
        .collect::<Result<_, _>>()?;

    let mut csv = csv::Writer::from_writer(Vec::new());
    csv.write_record(["actions", "budget", "seed", "round", "swap_regret"])
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    let mut summary = Vec::new();
    for (&(n, t, s), trace) in jobs.iter().zip(&traces) {
        for &(round, regret) in trace {
            csv.write_record([n.to_string(), t.to_string(), s.to_string(), round.to_string(), regret.to_string()])
                .map_err(|e| CliError::Runtime(e.to_string()))?;
        }
    }
    for &n in &args.actions {
        for &t in &args.rounds {
            let mut finals: Vec<f64> = jobs
                .iter()
                .zip(&traces)
                .filter(|((jn, jt, _), _)| *jn == n && *jt == t)
                .filter_map(|(_, tr)| tr.last().map(|&(_, r)| r))
                .collect();
            finals.sort_by(f64::total_cmp);
            summary.push(json!({ "actions": n, "budget": t, "median_swap_regret": median(&finals) }));
        }
    }
    let bytes = csv.into_inner().map_err(|e| CliError::Runtime(e.to_string()))?;
    out.text("bench.csv", &String::from_utf8(bytes).expect("csv is utf-8"))?;
    out.result("bench", cfg, None, json!({ "seeds": args.seeds, "checkpoints": args.checkpoints, "summary": summary }))?;
    Ok(format!("{} runs", jobs.len()))
}

fn median(sorted: &[f64]) -> Option<f64> {
    let n = sorted.len();
    match n {
        0 => None,
        _ if n % 2 == 1 => Some(sorted[n / 2]),
        _ => Some((sorted[n / 2 - 1] + sorted[n / 2]) / 2.0),
    }
}

use std::collections::HashMap;
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{PolicyKind, ScenarioConfig};
use super::instance::{build_policy, load_trained, save_trained, PolicyInstance};
use super::stats::{moving_average, Summary};
use crate::dqrc::{pretrain, Dqrc, DqrcVariant, PretrainConfig};
use crate::error::{Error, Result};
use crate::nn::OptimizerKind;
use crate::policy::RoutingPolicy;
use crate::rng::{indexed_substream, substream, Substream};
use crate::sim::metrics::WindowStat;
use crate::sim::traffic::{GeneratedTraffic, Millis, PacketSeries};
use crate::sim::{Simulation, TraceRecord};
use crate::topology::Topology;

/// Stream index of the fixed training packet series, kept apart from the
/// per-seed test traffic.
const TRAINING_SERIES: u64 = 0x7472_6169_6e;

/// Per-episode training record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingCurve {
    pub policy: String,
    pub seed: u64,
    pub episode_ms: Millis,
    /// Average delivery time of packets delivered within each episode.
    pub delays: Vec<Option<f64>>,
    pub smoothed: Vec<Option<f64>>,
    pub epsilons: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct TrainingRun {
    pub curve: TrainingCurve,
    /// Trained policy, learning still enabled.
    pub policy: PolicyInstance,
    /// Supervised loss per pre-training episode, if pre-training ran.
    pub pretrain_losses: Vec<f64>,
    pub elapsed: Duration,
}

fn ensure_learning(cfg: &ScenarioConfig) -> Result<()> {
    if cfg.policy.is_learning() {
        Ok(())
    } else {
        Err(Error::Protocol(format!("policy {} does not learn; nothing to train", cfg.policy)))
    }
}

/// Trains a learning policy on one fixed packet series replayed every
/// episode. Saves a checkpoint when the scenario names one.
pub fn run_offline_training(cfg: &ScenarioConfig, topo: &Topology) -> Result<TrainingRun> {
    ensure_learning(cfg)?;
    cfg.validate()?;
    let started = Instant::now();
    let n = topo.n_nodes();
    let traffic = cfg.traffic(topo);
    traffic.validate(n)?;
    let mut series_rng = indexed_substream(cfg.seed, Substream::Traffic, TRAINING_SERIES);
    let series = PacketSeries::generate(&traffic, n, cfg.train_packets, &mut series_rng);
    let sim_cfg = cfg.sim_config();

    let mut policy = build_policy(cfg, topo)?;
    let mut pretrain_losses = Vec::new();
    if let (Some(pcfg), Some(dqrc)) = (cfg.pretrain, policy.as_dqrc_mut()) {
        pretrain_losses = pretrain(dqrc, &pcfg, cfg.seed)?;
    }

    let mut rng = substream(cfg.seed, Substream::Exploration);
    let mut delays = Vec::with_capacity(cfg.episodes);
    let mut epsilons = Vec::with_capacity(cfg.episodes);
    policy.set_learning(true);
    for episode in 0..cfg.episodes {
        let eps = cfg.epsilon.at(episode);
        policy.reset_episode();
        policy.set_epsilon(eps);
        let mut sim = Simulation::new(topo, sim_cfg.clone())?.with_traffic(series.replay());
        sim.run(&mut policy, &mut rng, cfg.episode_ms)?;
        delays.push(sim.metrics().average_delivery_time());
        epsilons.push(eps);
    }
    policy.reset_episode();
    policy.set_epsilon(0.0);

    if let Some(dir) = &cfg.checkpoint {
        save_trained(&policy, topo, dir)?;
    }
    Ok(TrainingRun {
        curve: TrainingCurve {
            policy: cfg.policy.name().to_string(),
            seed: cfg.seed,
            episode_ms: cfg.episode_ms,
            smoothed: moving_average(&delays, cfg.smoothing_window),
            delays,
            epsilons,
        },
        policy,
        pretrain_losses,
        elapsed: started.elapsed(),
    })
}

/// Memo of trained policies keyed by every setting that affects training,
/// so studies sharing a configuration train it once.
#[derive(Default)]
pub struct TrainingCache {
    runs: Mutex<HashMap<String, Arc<TrainingRun>>>,
}

#[derive(Serialize)]
struct TrainingKey<'a> {
    topology: String,
    policy: PolicyKind,
    generated_interval: f64,
    distribution_ratio: f64,
    busy: (Option<usize>, Option<usize>),
    serialization: crate::sim::Serialization,
    link_time: f64,
    comm_interval: f64,
    history_len: usize,
    lookahead: usize,
    arch: &'a crate::dqrc::ArchConfig,
    hyper: &'a crate::dqrc::AgentHyperParams,
    q_learning_rate: f64,
    epsilon: &'a super::config::EpsilonSchedule,
    episode_ms: f64,
    episodes: usize,
    train_packets: usize,
    seed: u64,
    pretrain: Option<PretrainConfig>,
}

impl TrainingCache {
    pub fn new() -> Self {
        Self::default()
    }

    fn key(cfg: &ScenarioConfig, topo: &Topology) -> String {
        let key = TrainingKey {
            topology: topo.content_hash(),
            policy: cfg.policy,
            generated_interval: cfg.generated_interval,
            distribution_ratio: cfg.distribution_ratio,
            busy: (cfg.busy_src, cfg.busy_dst),
            serialization: cfg.serialization,
            link_time: cfg.link_time,
            comm_interval: cfg.comm_interval,
            history_len: cfg.history_len,
            lookahead: cfg.lookahead,
            arch: &cfg.arch,
            hyper: &cfg.hyper,
            q_learning_rate: cfg.q_learning_rate,
            epsilon: &cfg.epsilon,
            episode_ms: cfg.episode_ms,
            episodes: cfg.episodes,
            train_packets: cfg.train_packets,
            seed: cfg.seed,
            pretrain: cfg.pretrain,
        };
        serde_json::to_string(&key).expect("plain data serializes")
    }

    /// Trained run for `cfg`, training on a miss.
    pub fn get_or_train(&self, cfg: &ScenarioConfig, topo: &Topology) -> Result<Arc<TrainingRun>> {
        let key = Self::key(cfg, topo);
        if let Some(run) = self.runs.lock().expect("cache lock").get(&key) {
            return Ok(Arc::clone(run));
        }
        let run = Arc::new(run_offline_training(cfg, topo)?);
        self.runs
            .lock()
            .expect("cache lock")
            .entry(key)
            .or_insert_with(|| Arc::clone(&run));
        Ok(run)
    }

    pub fn len(&self) -> usize {
        self.runs.lock().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Policy ready for testing: loaded from the scenario checkpoint when one
/// exists, trained (through `cache`) for learning policies otherwise, and
/// built directly for the rest.
pub fn train_or_load(cfg: &ScenarioConfig, topo: &Topology, cache: &TrainingCache) -> Result<PolicyInstance> {
    if let Some(dir) = &cfg.checkpoint {
        if let Some(policy) = load_trained(cfg, topo, dir)? {
            return Ok(policy);
        }
    }
    if cfg.policy.is_learning() {
        Ok(cache.get_or_train(cfg, topo)?.policy.clone())
    } else {
        build_policy(cfg, topo)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeedResult {
    pub seed: u64,
    pub avg_delivery_ms: Option<f64>,
    pub delivered: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub policy: String,
    pub horizon_ms: Millis,
    pub results: Vec<SeedResult>,
    pub summary: Summary,
}

/// Frozen, greedy evaluation on fresh traffic for every test seed.
pub fn run_offline_test(cfg: &ScenarioConfig, topo: &Topology, policy: &PolicyInstance) -> Result<TestReport> {
    cfg.validate()?;
    let n = topo.n_nodes();
    let traffic = cfg.traffic(topo);
    traffic.validate(n)?;
    let sim_cfg = cfg.sim_config();
    let results = cfg
        .test_seeds
        .par_iter()
        .map(|&seed| -> Result<SeedResult> {
            let mut p = policy.clone();
            p.set_learning(false);
            p.set_epsilon(0.0);
            p.reset_episode();
            let source = GeneratedTraffic::constant(traffic, n, substream(seed, Substream::Traffic));
            let mut sim = Simulation::new(topo, sim_cfg.clone())?.with_traffic(source);
            sim.run(&mut p, &mut substream(seed, Substream::Exploration), cfg.test_ms)?;
            let m = sim.metrics();
            Ok(SeedResult {
                seed,
                avg_delivery_ms: m.average_delivery_time(),
                delivered: m.delivered_count(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TestReport {
        policy: cfg.policy.name().to_string(),
        horizon_ms: cfg.test_ms,
        summary: Summary::of(results.iter().filter_map(|r| r.avg_delivery_ms)),
        results,
    })
}

/// One frozen test run on `seed` with the event trace recorded.
pub fn run_traced(cfg: &ScenarioConfig, topo: &Topology, policy: &PolicyInstance, seed: u64) -> Result<Vec<TraceRecord>> {
    let n = topo.n_nodes();
    let traffic = cfg.traffic(topo);
    traffic.validate(n)?;
    let mut sim_cfg = cfg.sim_config();
    sim_cfg.record_trace = true;
    let mut p = policy.clone();
    p.set_learning(false);
    p.set_epsilon(0.0);
    p.reset_episode();
    let source = GeneratedTraffic::constant(traffic, n, substream(seed, Substream::Traffic));
    let mut sim = Simulation::new(topo, sim_cfg)?.with_traffic(source);
    sim.run(&mut p, &mut substream(seed, Substream::Exploration), cfg.test_ms)?;
    Ok(sim.trace().to_vec())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    GeneratedInterval,
    DistributionRatio,
    CommInterval,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::GeneratedInterval => "generated_interval",
            SweepAxis::DistributionRatio => "distribution_ratio",
            SweepAxis::CommInterval => "comm_interval",
        }
    }

    pub fn apply(self, cfg: &mut ScenarioConfig, value: f64) {
        match self {
            SweepAxis::GeneratedInterval => cfg.generated_interval = value,
            SweepAxis::DistributionRatio => cfg.distribution_ratio = value,
            SweepAxis::CommInterval => cfg.comm_interval = value,
        }
    }
}

impl std::str::FromStr for SweepAxis {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "generated_interval" | "interval" => Ok(SweepAxis::GeneratedInterval),
            "distribution_ratio" | "ratio" => Ok(SweepAxis::DistributionRatio),
            "comm_interval" | "delta" => Ok(SweepAxis::CommInterval),
            other => Err(format!(
                "unknown sweep axis `{other}` (generated_interval|distribution_ratio|comm_interval)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub axis: SweepAxis,
    pub value: f64,
    pub policy: String,
    pub report: TestReport,
}

/// Trains (per cell) and tests every policy at every axis value. Rows are
/// ordered by value, then by policy.
pub fn run_sweep(
    base: &ScenarioConfig,
    topo: &Topology,
    axis: SweepAxis,
    values: &[f64],
    policies: &[PolicyKind],
    cache: &TrainingCache,
) -> Result<Vec<SweepRow>> {
    if values.is_empty() || policies.is_empty() {
        return Err(Error::Protocol("sweep needs at least one value and one policy".into()));
    }
    let cells: Vec<(f64, PolicyKind)> = values
        .iter()
        .flat_map(|&v| policies.iter().map(move |&p| (v, p)))
        .collect();
    cells
        .par_iter()
        .map(|&(value, kind)| {
            let mut cfg = base.clone();
            axis.apply(&mut cfg, value);
            cfg.policy = kind;
            cfg.checkpoint = None;
            cfg.validate()?;
            let policy = train_or_load(&cfg, topo, cache)?;
            Ok(SweepRow {
                axis,
                value,
                policy: kind.name().to_string(),
                report: run_offline_test(&cfg, topo, &policy)?,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowPoint {
    pub start: Millis,
    pub end: Millis,
    /// Mean over seeds of the per-seed window averages.
    pub mean: Option<f64>,
    /// Seeds that delivered in this window.
    pub seeds: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OnlineReport {
    pub policy: String,
    pub horizon_ms: Millis,
    pub per_seed: Vec<(u64, Vec<WindowStat>)>,
    pub curve: Vec<WindowPoint>,
}

impl OnlineReport {
    /// Mean and standard deviation of curve points with `start` in `[from, to)`.
    pub fn span(&self, from: Millis, to: Millis) -> Summary {
        Summary::of(
            self.curve
                .iter()
                .filter(|w| w.start >= from && w.start < to)
                .filter_map(|w| w.mean),
        )
    }
}

/// Continuous run under the load schedule, learning as it goes (for
/// learning policies), reporting per-window averages.
pub fn run_online(cfg: &ScenarioConfig, topo: &Topology, start: &PolicyInstance) -> Result<OnlineReport> {
    cfg.validate()?;
    let schedule = cfg.load_schedule()?;
    if schedule.last_change() >= cfg.online_ms {
        return Err(Error::Protocol(format!(
            "load change at {} ms is beyond the {} ms horizon",
            schedule.last_change(),
            cfg.online_ms
        )));
    }
    let n = topo.n_nodes();
    let traffic = cfg.traffic(topo);
    traffic.validate(n)?;
    let sim_cfg = cfg.sim_config();
    let per_seed = cfg
        .test_seeds
        .par_iter()
        .map(|&seed| -> Result<(u64, Vec<WindowStat>)> {
            let mut p = start.clone();
            p.set_learning(true);
            p.set_epsilon(cfg.online_epsilon);
            p.reset_episode();
            let source = GeneratedTraffic::new(traffic, n, schedule.clone(), substream(seed, Substream::Traffic));
            let mut sim = Simulation::new(topo, sim_cfg.clone())?.with_traffic(source);
            sim.run(&mut p, &mut substream(seed, Substream::Exploration), cfg.online_ms)?;
            Ok((seed, sim.metrics().windows(cfg.window_ms, cfg.online_ms)))
        })
        .collect::<Result<Vec<_>>>()?;
    let n_windows = per_seed.first().map_or(0, |(_, w)| w.len());
    let curve = (0..n_windows)
        .map(|i| {
            let w0 = per_seed[0].1[i];
            let s = Summary::of(per_seed.iter().filter_map(|(_, w)| w[i].mean()));
            WindowPoint {
                start: w0.start,
                end: w0.end,
                mean: s.mean,
                seeds: s.n,
            }
        })
        .collect();
    Ok(OnlineReport {
        policy: start.name().to_string(),
        horizon_ms: cfg.online_ms,
        per_seed,
        curve,
    })
}

/// Grids for the ablation studies.
#[derive(Debug, Clone, PartialEq)]
pub struct AblationPlan {
    pub policies: Vec<PolicyKind>,
    pub hidden_layers: Vec<usize>,
    pub hidden_widths: Vec<usize>,
    pub comm_intervals: Vec<f64>,
}

impl Default for AblationPlan {
    fn default() -> Self {
        Self {
            policies: vec![
                PolicyKind::Dqrc(DqrcVariant::Full),
                PolicyKind::Dqrc(DqrcVariant::NoComm),
                PolicyKind::Dqrc(DqrcVariant::NoLstm),
                PolicyKind::Dqrc(DqrcVariant::Dqr),
                PolicyKind::QRouting,
                PolicyKind::Backpressure,
            ],
            hidden_layers: vec![0, 1, 2, 3],
            hidden_widths: vec![32, 64, 128, 256],
            comm_intervals: vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationRow {
    pub study: String,
    pub axis_name: String,
    pub axis_value: f64,
    pub policy: String,
    pub report: TestReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationReport {
    pub policies: Vec<AblationRow>,
    pub hidden_layers: Vec<AblationRow>,
    pub hidden_widths: Vec<AblationRow>,
    pub comm_intervals: Vec<AblationRow>,
}

impl AblationReport {
    pub fn rows(&self) -> impl Iterator<Item = &AblationRow> {
        self.policies
            .iter()
            .chain(&self.hidden_layers)
            .chain(&self.hidden_widths)
            .chain(&self.comm_intervals)
    }
}

/// Variant comparison plus the depth, width and staleness grids for DQRC,
/// all at the base load. Shared configurations train once.
pub fn run_ablation_suite(
    base: &ScenarioConfig,
    topo: &Topology,
    plan: &AblationPlan,
    cache: &TrainingCache,
) -> Result<AblationReport> {
    let mut base = base.clone();
    base.checkpoint = None;
    let dqrc = PolicyKind::Dqrc(DqrcVariant::Full);

    let cell = |study: &str, axis: &str, value: f64, cfg: ScenarioConfig| -> Result<AblationRow> {
        cfg.validate()?;
        let policy = train_or_load(&cfg, topo, cache)?;
        Ok(AblationRow {
            study: study.to_string(),
            axis_name: axis.to_string(),
            axis_value: value,
            policy: cfg.policy.name().to_string(),
            report: run_offline_test(&cfg, topo, &policy)?,
        })
    };

    let policies = plan
        .policies
        .par_iter()
        .enumerate()
        .map(|(i, &kind)| {
            let mut cfg = base.clone();
            cfg.policy = kind;
            cell("policies", "index", i as f64, cfg)
        })
        .collect::<Result<Vec<_>>>()?;
    let hidden_layers = plan
        .hidden_layers
        .par_iter()
        .map(|&layers| {
            let mut cfg = base.clone();
            cfg.policy = dqrc;
            cfg.arch.hidden_layers = layers;
            cell("hidden_layers", "hidden_layers", layers as f64, cfg)
        })
        .collect::<Result<Vec<_>>>()?;
    let hidden_widths = plan
        .hidden_widths
        .par_iter()
        .map(|&width| {
            let mut cfg = base.clone();
            cfg.policy = dqrc;
            cfg.arch.hidden_width = width;
            cfg.arch.subset_width = (width / 4).max(1);
            cell("hidden_widths", "hidden_width", width as f64, cfg)
        })
        .collect::<Result<Vec<_>>>()?;
    let comm_intervals = plan
        .comm_intervals
        .par_iter()
        .map(|&delta| {
            let mut cfg = base.clone();
            cfg.policy = dqrc;
            cfg.comm_interval = delta;
            cell("comm_intervals", "comm_interval", delta, cfg)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(AblationReport {
        policies,
        hidden_layers,
        hidden_widths,
        comm_intervals,
    })
}

/// Pre-training comparison: supervised loss curves per optimizer, and RL
/// training curves with and without pre-training.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PretrainStudy {
    pub loss_curves: Vec<(OptimizerKind, Vec<f64>)>,
    pub pretrained: Option<TrainingCurve>,
    pub random_init: Option<TrainingCurve>,
}

/// Runs supervised pre-training with each optimizer; with `rl_episodes > 0`
/// also trains from the Adam-initialized and from random weights.
pub fn run_pretrain_study(
    cfg: &ScenarioConfig,
    topo: &Topology,
    optimizers: &[OptimizerKind],
    rl_episodes: usize,
) -> Result<PretrainStudy> {
    let PolicyKind::Dqrc(_) = cfg.policy else {
        return Err(Error::Protocol("pre-training applies to DQRC variants only".into()));
    };
    let base_pre = cfg.pretrain.unwrap_or_default();
    let dcfg = cfg.dqrc_config(topo.n_nodes()).expect("dqrc policy");
    let loss_curves = optimizers
        .par_iter()
        .map(|&kind| -> Result<(OptimizerKind, Vec<f64>)> {
            let mut policy = Dqrc::new(topo, dcfg, cfg.seed)?;
            let pcfg = PretrainConfig {
                optimizer: kind,
                learning_rate: kind.default_learning_rate(),
                ..base_pre
            };
            Ok((kind, pretrain(&mut policy, &pcfg, cfg.seed)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let (pretrained, random_init) = if rl_episodes > 0 {
        let mut with = cfg.clone();
        with.episodes = rl_episodes;
        with.checkpoint = None;
        with.pretrain = Some(PretrainConfig {
            optimizer: OptimizerKind::Adam,
            learning_rate: OptimizerKind::Adam.default_learning_rate(),
            ..base_pre
        });
        let mut without = with.clone();
        without.pretrain = None;
        let (a, b) = rayon::join(
            || run_offline_training(&with, topo),
            || run_offline_training(&without, topo),
        );
        (Some(a?.curve), Some(b?.curve))
    } else {
        (None, None)
    };
    Ok(PretrainStudy {
        loss_curves,
        pretrained,
        random_init,
    })
}

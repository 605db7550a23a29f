//! Acceptance suite. Runs every criterion at its pinned tolerance and prints
//! one PASS/FAIL line per criterion.
//!
//! Training runs use the desk profile below (fewer episodes, faster
//! exploration decay) so the whole suite fits on one laptop core. The exit
//! code is nonzero when an exact property criterion (9-13) fails, or when
//! `ACCEPTANCE_STRICT=1` and any criterion fails.
//!
//! `ACCEPTANCE_ONLY=1,5,9` restricts the run to the listed criteria.

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use routesim_core::dqrc::{encode_parts, Dqrc, DqrcConfig, DqrcVariant, EncoderConfig, PretrainConfig};
use routesim_core::experiment::{
    records_from_test, run_offline_test, run_online, run_pretrain_study, to_csv_string,
    train_or_load, PolicyKind, ScenarioConfig, Summary, TestReport, TrainingCache,
};
use routesim_core::nn::{HiddenState, NetworkSpec, OptimizerKind, QNetwork, RecurrentKind};
use routesim_core::policy::{QRouting, QRoutingParams, RoutingPolicy, ShortestPath};
use routesim_core::rng::{substream, Substream};
use routesim_core::sim::traffic::{GeneratedTraffic, TrafficConfig};
use routesim_core::sim::{Serialization, SimConfig, Simulation, TraceKind};
use routesim_core::topology::{
    builtin_att25, builtin_grid3x3, hop_distances, hop_distances_bellman_ford, NodeId, Topology,
};

/// Desk profile, pinned.
const EPISODES: usize = 30;
const EPSILON_DECAY: usize = 15;
const TEST_SEEDS: u64 = 50;
const ONLINE_SEEDS: u64 = 3;
const PRETRAIN_EPISODES: usize = 200;
const PRETRAIN_RL_EPISODES: usize = 100;
/// att25 reinforcement-learning comparison width (full width is ~10x slower).
const PRETRAIN_RL_WIDTH: usize = 32;

const DQRC: PolicyKind = PolicyKind::Dqrc(DqrcVariant::Full);
const QR: PolicyKind = PolicyKind::QRouting;
const BP: PolicyKind = PolicyKind::Backpressure;

struct Outcome {
    id: u32,
    title: &'static str,
    pass: bool,
    detail: String,
}

struct Suite {
    grid: Topology,
    cache: TrainingCache,
    outcomes: Vec<Outcome>,
    only: Option<BTreeSet<u32>>,
}

fn desk(topology: &str) -> ScenarioConfig {
    let mut cfg = ScenarioConfig {
        name: "acceptance".into(),
        topology: topology.into(),
        generated_interval: 0.5,
        distribution_ratio: 0.7,
        serialization: Serialization::Link,
        episodes: EPISODES,
        test_seeds: (0..TEST_SEEDS).collect(),
        ..ScenarioConfig::default()
    };
    cfg.epsilon.decay_episodes = EPSILON_DECAY;
    cfg
}

fn fmt(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".into(), |v| format!("{v:.3}"))
}

fn mean_of(r: &TestReport) -> f64 {
    r.summary.mean.unwrap_or(f64::INFINITY)
}

/// Combined standard error of the difference of two means.
fn diff_se(a: &Summary, b: &Summary) -> f64 {
    let sa = a.std_error().unwrap_or(0.0);
    let sb = b.std_error().unwrap_or(0.0);
    (sa * sa + sb * sb).sqrt()
}

impl Suite {
    fn wants(&self, id: u32) -> bool {
        self.only.as_ref().is_none_or(|s| s.contains(&id))
    }

    fn record(&mut self, id: u32, title: &'static str, pass: bool, detail: String) {
        println!("{} C{id:<2} {title}: {detail}", if pass { "PASS" } else { "FAIL" });
        self.outcomes.push(Outcome {
            id,
            title,
            pass,
            detail,
        });
    }

    fn test(&self, cfg: &ScenarioConfig) -> TestReport {
        let policy = train_or_load(cfg, &self.grid, &self.cache).expect("train");
        run_offline_test(cfg, &self.grid, &policy).expect("test")
    }

    fn at(&self, policy: PolicyKind, interval: f64, ratio: f64) -> TestReport {
        let mut cfg = desk("grid3x3");
        cfg.policy = policy;
        cfg.generated_interval = interval;
        cfg.distribution_ratio = ratio;
        self.test(&cfg)
    }

    fn criterion1(&mut self) {
        let r = self.at(DQRC, 0.5, 0.7);
        let m = mean_of(&r);
        self.record(
            1,
            "baseline operating point",
            (3.1..=5.2).contains(&m),
            format!("dqrc mean {m:.3} ms (std {}) over {} seeds; band [3.1, 5.2]", r.summary.std_display(), r.summary.n),
        );
    }

    fn criterion2_and_3(&mut self) {
        let intervals = [0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0];
        let ratios = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];
        let mut failures = Vec::new();
        let mut table = Vec::new();
        let mut crossover = Vec::new();
        let mut check = |suite: &Suite, label: String, interval: f64, ratio: f64, heavy: bool| {
            let d = suite.at(DQRC, interval, ratio);
            let q = suite.at(QR, interval, ratio);
            let b = suite.at(BP, interval, ratio);
            let (dm, qm, bm) = (mean_of(&d), mean_of(&q), mean_of(&b));
            let best = if qm <= bm { &q } else { &b };
            let margin = mean_of(best) - dm;
            let se = diff_se(&d.summary, &best.summary);
            let ok = margin >= 0.0 && (!heavy || margin >= se);
            table.push(format!("{label}: dqrc {dm:.2} qr {qm:.2} bp {bm:.2}"));
            if !ok {
                failures.push(format!("{label} (margin {margin:.3}, se {se:.3})"));
            }
            (dm, qm, bm)
        };
        for &iv in &intervals {
            let (dm, qm, bm) = check(self, format!("interval {iv}"), iv, 0.7, iv <= 0.5);
            crossover.push((iv, dm, qm, bm));
        }
        for &ratio in &ratios {
            if ratio == 0.7 {
                continue; // shares the interval-0.5 cell
            }
            check(self, format!("ratio {ratio}"), 0.5, ratio, ratio >= 0.6);
        }
        for line in &table {
            println!("     {line}");
        }
        self.record(
            2,
            "policy ordering across sweeps",
            failures.is_empty(),
            if failures.is_empty() {
                "dqrc <= min(q_routing, backpressure) at all 16 points, 1 SE apart at heavy load".into()
            } else {
                format!("violated at {}", failures.join("; "))
            },
        );

        let mut notes = Vec::new();
        let mut ok = true;
        for &(iv, dm, qm, bm) in &crossover {
            if iv >= 0.9 {
                let rel = (qm - dm).abs() / dm;
                ok &= rel <= 0.10;
                notes.push(format!("iv {iv}: |qr-dqrc|/dqrc {:.1}%", rel * 100.0));
            }
            if (0.4..=0.5).contains(&iv) {
                ok &= bm < qm;
                notes.push(format!("iv {iv}: bp {bm:.2} vs qr {qm:.2}"));
            }
        }
        self.record(3, "regime crossover", ok, notes.join("; "));
    }

    fn criterion4(&mut self) {
        let mut cfg = desk("grid3x3");
        let tail = |suite: &Suite, cfg: &ScenarioConfig| {
            let run = suite.cache.get_or_train(cfg, &suite.grid).expect("train");
            Summary::of(run.curve.delays[EPSILON_DECAY..].iter().flatten().copied())
        };
        cfg.policy = DQRC;
        let d = tail(self, &cfg);
        cfg.policy = QR;
        let q = tail(self, &cfg);
        let (ds, qs) = (d.std.unwrap_or(f64::INFINITY), q.std.unwrap_or(0.0));
        self.record(
            4,
            "training stability",
            ds < qs,
            format!(
                "per-episode delay std over the {} post-decay episodes: dqrc {ds:.3} (mean {}), q_routing {qs:.3} (mean {})",
                EPISODES - EPSILON_DECAY,
                fmt(d.mean),
                fmt(q.mean)
            ),
        );
    }

    fn criterion5(&mut self) {
        let deltas = [0.0, 1.0, 2.0, 3.0, 4.0, 5.0];
        let means: Vec<f64> = deltas
            .iter()
            .map(|&delta| {
                let mut cfg = desk("grid3x3");
                cfg.policy = DQRC;
                cfg.comm_interval = delta;
                mean_of(&self.test(&cfg))
            })
            .collect();
        let monotone = means.windows(2).all(|w| w[1] >= w[0] * 0.98);
        let ratio = means[5] / means[0];
        let in_band = (1.15..=1.45).contains(&ratio);
        let cells: Vec<String> = means.iter().map(|m| format!("{m:.3}")).collect();
        self.record(
            5,
            "communication staleness",
            monotone && in_band,
            format!(
                "delay by delta 0..5 ms [{}]; nondecreasing within 2%: {monotone}; ratio {ratio:.3} (band [1.15, 1.45])",
                cells.join(", ")
            ),
        );
    }

    fn criterion6(&mut self) {
        let full = mean_of(&self.at(DQRC, 0.5, 0.7));
        let no_lstm = mean_of(&self.at(PolicyKind::Dqrc(DqrcVariant::NoLstm), 0.5, 0.7));
        let no_comm = mean_of(&self.at(PolicyKind::Dqrc(DqrcVariant::NoComm), 0.5, 0.7));
        let dqr = mean_of(&self.at(PolicyKind::Dqrc(DqrcVariant::Dqr), 0.5, 0.7));
        let qr = mean_of(&self.at(QR, 0.5, 0.7));
        let penalty = no_lstm / full - 1.0;
        let dqr_gap = (dqr - qr).abs() / qr;
        let ok = full < no_lstm && full < no_comm && (0.05..=0.20).contains(&penalty) && dqr_gap <= 0.10;
        self.record(
            6,
            "ablations",
            ok,
            format!(
                "dqrc {full:.3}, no_lstm {no_lstm:.3} (penalty {:.1}%, band [5, 20]), no_comm {no_comm:.3}, dqr {dqr:.3} vs q_routing {qr:.3} (gap {:.1}%, max 10)",
                penalty * 100.0,
                dqr_gap * 100.0
            ),
        );
    }

    fn criterion7(&mut self) {
        let mut cfg = desk("grid3x3");
        cfg.generated_interval = 1.0;
        cfg.schedule = vec![(4000.0, 0.7), (8000.0, 1.0)];
        cfg.online_ms = 12_000.0;
        cfg.window_ms = 100.0;
        cfg.test_seeds = (0..ONLINE_SEEDS).collect();
        let online = |suite: &Suite, kind: PolicyKind| {
            let mut c = cfg.clone();
            c.policy = kind;
            // start from the policy trained offline at interval 1.0
            let start = train_or_load(&c, &suite.grid, &suite.cache).expect("train");
            run_online(&c, &suite.grid, &start).expect("online")
        };
        let d = online(self, DQRC);
        let q = online(self, QR);
        let within = |from: f64, to: f64| {
            let (a, b) = (d.span(from, to).mean.unwrap_or(f64::NAN), q.span(from, to).mean.unwrap_or(f64::NAN));
            ((a - b).abs() / a.min(b), a, b)
        };
        let (r1, d1, q1) = within(1000.0, 4000.0);
        let (r3, d3, q3) = within(9000.0, 12000.0);
        let (dm, qm) = (d.span(4500.0, 8000.0), q.span(4500.0, 8000.0));
        let (dstd, qstd) = (dm.std.unwrap_or(f64::INFINITY), qm.std.unwrap_or(0.0));
        let dmean = dm.mean.unwrap_or(f64::INFINITY);
        let qmean = qm.mean.unwrap_or(0.0);
        let ok = r1 <= 0.15 && r3 <= 0.15 && dmean < qmean && dstd < qstd;
        self.record(
            7,
            "online adaptation",
            ok,
            format!(
                "[1000,4000): dqrc {d1:.3} qr {q1:.3} ({:.1}%); [9000,12000): dqrc {d3:.3} qr {q3:.3} ({:.1}%); \
                 [4500,8000): dqrc {dmean:.3}/std {dstd:.3} vs qr {qmean:.3}/std {qstd:.3}; {} seeds",
                r1 * 100.0,
                r3 * 100.0,
                ONLINE_SEEDS
            ),
        );
    }

    fn criterion8(&mut self) {
        let att = builtin_att25().expect("att25");
        let mut cfg = desk("att25");
        cfg.policy = DQRC;
        cfg.pretrain = Some(PretrainConfig {
            episodes: PRETRAIN_EPISODES,
            ..PretrainConfig::default()
        });
        let sup = run_pretrain_study(&cfg, &att, &[OptimizerKind::Adam, OptimizerKind::Sgd], 0).expect("pretrain");
        let adam = &sup.loss_curves[0].1;
        let sgd = &sup.loss_curves[1].1;
        let adam_min = adam.iter().copied().fold(f64::INFINITY, f64::min);
        let adam_ok = adam_min < 0.05 * adam[0];
        let sgd_ok = sgd.last() > adam.last();

        let mut rl = cfg.clone();
        rl.arch.hidden_width = PRETRAIN_RL_WIDTH;
        rl.arch.subset_width = PRETRAIN_RL_WIDTH / 4;
        let study = run_pretrain_study(&rl, &att, &[], PRETRAIN_RL_EPISODES).expect("rl study");
        let avg = |c: &Option<routesim_core::experiment::TrainingCurve>| {
            Summary::of(c.as_ref().expect("curve").delays.iter().flatten().copied())
                .mean
                .unwrap_or(f64::INFINITY)
        };
        let (with, without) = (avg(&study.pretrained), avg(&study.random_init));
        self.record(
            8,
            "pre-training",
            adam_ok && sgd_ok && with < without,
            format!(
                "adam loss {:.4} -> min {adam_min:.4} ({:.1}% of initial, need < 5%); sgd final {:.4} vs adam {:.4}; \
                 first {PRETRAIN_RL_EPISODES} RL episodes (width {PRETRAIN_RL_WIDTH}) mean delay pretrained {with:.3} vs random {without:.3}",
                adam[0],
                adam_min / adam[0] * 100.0,
                sgd.last().unwrap_or(&f64::NAN),
                adam.last().unwrap_or(&f64::NAN),
            ),
        );
    }

    fn criterion9(&mut self) {
        let mut worst: f64 = 0.0;
        let mut checked = 0usize;
        for seed in 0..20u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
            let blocks: Vec<usize> = (0..rng.random_range(1..=4)).map(|_| rng.random_range(1..=5)).collect();
            let spec = NetworkSpec {
                input_blocks: blocks,
                subset_width: rng.random_range(1..=4),
                trunk_widths: (0..rng.random_range(0..=2)).map(|_| rng.random_range(2..=6)).collect(),
                recurrent: RecurrentKind::Lstm,
                recurrent_width: rng.random_range(2..=6),
                outputs: rng.random_range(1..=4),
                forget_bias: 1.0,
            };
            let mut init = substream(seed, Substream::Init);
            let mut net = QNetwork::new(spec.clone(), &mut init).expect("net");
            // zero biases behind dead units sit on a ReLU kink; move off it
            for p in net.params_mut() {
                *p += rng.random_range(-0.05..0.05);
            }
            let input: Vec<f64> = (0..spec.input_width()).map(|_| rng.random_range(-1.0..1.0)).collect();
            let w = spec.state_width();
            let state = HiddenState {
                h: (0..w).map(|_| rng.random_range(-0.9..0.9)).collect(),
                c: (0..w).map(|_| rng.random_range(-2.0..2.0)).collect(),
            };
            let action = rng.random_range(0..spec.outputs);
            let target = rng.random_range(-3.0..3.0);
            let (_, grads) = net.action_gradient(&input, &state, action, target).expect("grad");
            let loss_at = |params: &[f64]| {
                let mut probe = net.clone();
                probe.set_params(params).expect("params");
                let (q, _) = probe.forward(&input, &state).expect("forward");
                (target - q[action]).powi(2)
            };
            let mut params = net.params().to_vec();
            let h = 1e-5;
            for i in 0..params.len() {
                let orig = params[i];
                params[i] = orig + h;
                let up = loss_at(&params);
                params[i] = orig - h;
                let down = loss_at(&params);
                params[i] = orig;
                let numeric = (up - down) / (2.0 * h);
                let rel = (numeric - grads[i]).abs() / numeric.abs().max(grads[i].abs()).max(1e-6);
                worst = worst.max(rel);
                checked += 1;
            }
        }
        self.record(
            9,
            "gradient check",
            worst < 1e-4,
            format!("{checked} parameters over 20 random shapes; worst relative error {worst:.2e} (limit 1e-4)"),
        );
    }

    fn criterion10(&mut self) {
        let grid = self.grid.clone();
        let g = &grid;
        let t = TrafficConfig {
            generated_interval: 0.5,
            distribution_ratio: 0.7,
            busy_src: NodeId(0),
            busy_dst: NodeId(8),
        };
        let cfg = SimConfig {
            serialization: Serialization::Link,
            ..SimConfig::default()
        };
        let source = GeneratedTraffic::constant(t, g.n_nodes(), substream(10, Substream::Traffic));
        let mut sim = Simulation::new(g, cfg).expect("sim").with_traffic(source);
        let mut p = QRouting::new(g, QRoutingParams::default());
        sim.run(&mut p, &mut substream(10, Substream::Exploration), 5000.0).expect("run");
        let m = sim.metrics();
        let mismatches = m.deliveries.iter().filter(|d| d.reward_sum != d.delivery_time()).count();
        self.record(
            10,
            "reward telescoping",
            m.created >= 10_000 && mismatches == 0,
            format!("{} packets created, {} delivered, {mismatches} with sum(q+l) != delivery time", m.created, m.delivered_count()),
        );
    }

    fn criterion11(&mut self) {
        let att = builtin_att25().expect("att25");
        let mut ok = true;
        let mut pairs = 0;
        for g in [&self.grid, &att] {
            let d = hop_distances(g);
            ok &= d == hop_distances_bellman_ford(g);
            let cfg = SimConfig {
                serialization: Serialization::Link,
                ..SimConfig::default()
            };
            for s in g.nodes() {
                for t in g.nodes().filter(|&t| t != s) {
                    let mut sim = Simulation::new(g, cfg.clone()).expect("sim");
                    sim.inject(s, t, 0.0).expect("inject");
                    sim.run(&mut ShortestPath::new(g), &mut substream(0, Substream::Exploration), 1e6)
                        .expect("run");
                    let got = sim.metrics().deliveries[0].delivery_time();
                    ok &= got == d.get(s, t).finite().map_or(f64::NAN, f64::from);
                    pairs += 1;
                }
            }
        }
        self.record(
            11,
            "shortest-path oracle",
            ok,
            format!("BFS == Bellman-Ford on grid3x3 and att25; {pairs} single-packet runs at hop distance x 1.0 ms"),
        );
    }

    fn criterion12(&mut self) {
        let g = &self.grid;
        let mut cfg = desk("grid3x3");
        cfg.episodes = 3;
        cfg.test_seeds = (0..5).collect();
        let export = |kind: PolicyKind| {
            let mut c = cfg.clone();
            c.policy = kind;
            let cache = TrainingCache::new();
            let p = train_or_load(&c, g, &cache).expect("train");
            let r = run_offline_test(&c, g, &p).expect("test");
            to_csv_string(&records_from_test("determinism", &r, "none", None)).expect("csv")
        };
        let mut ok = true;
        for kind in [DQRC, QR, BP, PolicyKind::ShortestPath] {
            ok &= export(kind) == export(kind);
        }
        self.record(12, "determinism", ok, "two executions per policy give byte-identical CSV exports".into());
    }

    fn criterion13(&mut self) {
        let n = 9;
        let enc = EncoderConfig::new(n);
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let mut ok = true;
        let node = |rng: &mut ChaCha8Rng| NodeId(rng.random_range(0..n));
        for _ in 0..5000 {
            let history: Vec<NodeId> = (0..rng.random_range(0..=enc.k + 3)).map(|_| node(&mut rng)).collect();
            let upcoming: Vec<NodeId> = (0..rng.random_range(0..=enc.m + 3)).map(|_| node(&mut rng)).collect();
            let max_queue = rng.random_bool(0.7).then(|| node(&mut rng));
            let s = encode_parts(node(&mut rng), &history, &upcoming, max_queue, &enc, DqrcVariant::Full);
            ok &= s.width() == (1 + enc.k + enc.m + 1) * n;
            ok &= s.sub_blocks(n).all(|b| {
                let sum: f64 = b.iter().sum();
                sum <= 1.0 && b.iter().all(|&x| x == 0.0 || x == 1.0)
            });
        }

        // flag audit against the event trace of a full learning run
        let grid = self.grid.clone();
        let g = &grid;
        let mut dcfg = DqrcConfig::new(n);
        dcfg.arch.subset_width = 8;
        dcfg.arch.hidden_width = 32;
        let mut policy = Dqrc::new(g, dcfg, 13).expect("dqrc");
        policy.enable_flag_audit();
        policy.set_epsilon(0.2);
        let t = TrafficConfig {
            generated_interval: 0.5,
            distribution_ratio: 0.7,
            busy_src: NodeId(0),
            busy_dst: NodeId(8),
        };
        let cfg = SimConfig {
            serialization: Serialization::Link,
            record_trace: true,
            ..SimConfig::default()
        };
        let source = GeneratedTraffic::constant(t, n, substream(13, Substream::Traffic));
        let mut sim = Simulation::new(g, cfg).expect("sim").with_traffic(source);
        sim.run(&mut policy, &mut substream(13, Substream::Exploration), 100.0).expect("run");
        let arrivals = sim.trace().iter().filter(|r| r.event == TraceKind::Arrive).count();
        let deliveries: BTreeSet<u64> = sim
            .trace()
            .iter()
            .filter(|r| r.event == TraceKind::Deliver)
            .map(|r| r.packet_id)
            .collect();
        let log = policy.flag_log();
        let flags_ok = log.len() == arrivals + deliveries.len()
            && log.iter().all(|r| r.terminal == (r.receiver == r.dst))
            && log.iter().filter(|r| r.terminal).map(|r| r.packet_id).collect::<BTreeSet<_>>() == deliveries;
        self.record(
            13,
            "encoding contract",
            ok && flags_ok,
            format!(
                "5000 fuzzed states: width and block sums ok = {ok}; flag audit over {} hops and {} deliveries ok = {flags_ok}",
                log.len(),
                deliveries.len()
            ),
        );
    }
}

fn main() -> ExitCode {
    let only = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .map(|v| v.split(',').filter_map(|s| s.trim().parse().ok()).collect::<BTreeSet<u32>>());
    let strict = std::env::var("ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");
    let mut suite = Suite {
        grid: builtin_grid3x3(),
        cache: TrainingCache::new(),
        outcomes: Vec::new(),
        only,
    };
    println!(
        "acceptance: desk profile {EPISODES} episodes, epsilon decay {EPSILON_DECAY}, {TEST_SEEDS} test seeds, {ONLINE_SEEDS} online seeds"
    );
    let started = Instant::now();
    // cheap exact properties first
    for (id, f) in [
        (9, Suite::criterion9 as fn(&mut Suite)),
        (10, Suite::criterion10),
        (11, Suite::criterion11),
        (12, Suite::criterion12),
        (13, Suite::criterion13),
        (1, Suite::criterion1),
        (2, Suite::criterion2_and_3),
        (4, Suite::criterion4),
        (5, Suite::criterion5),
        (6, Suite::criterion6),
        (7, Suite::criterion7),
        (8, Suite::criterion8),
    ] {
        if suite.wants(id) || (id == 2 && suite.wants(3)) {
            let t = Instant::now();
            f(&mut suite);
            eprintln!("     (criterion {id} took {:.0}s)", t.elapsed().as_secs_f64());
        }
    }
    let passed = suite.outcomes.iter().filter(|o| o.pass).count();
    println!(
        "acceptance: {passed}/{} criteria passed in {:.0}s ({} trainings)",
        suite.outcomes.len(),
        started.elapsed().as_secs_f64(),
        suite.cache.len()
    );
    let failed: Vec<&Outcome> = suite.outcomes.iter().filter(|o| !o.pass).collect();
    for o in &failed {
        println!("  failed: C{} {} ({})", o.id, o.title, o.detail);
    }
    let exact_failed = failed.iter().any(|o| o.id >= 9);
    if exact_failed || (strict && !failed.is_empty()) {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}

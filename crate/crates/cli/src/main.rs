use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use routesim_core::experiment::{
    export, records_from_curve, records_from_online, records_from_test, run_ablation_suite, run_offline_test,
    run_offline_training, run_online, run_pretrain_study, run_sweep, run_traced, summary_record, train_or_load,
    with_thread_pool, AblationPlan, ExportFormat, Mode, PolicyKind, Record, ScenarioConfig, SummaryRecord,
    SweepAxis, TrainingCache, write_summary_csv,
};
use routesim_core::nn::OptimizerKind;
use routesim_core::sim::write_trace_csv;
use routesim_core::topology::{resolve_topology, Topology};

#[derive(Parser)]
#[command(name = "route-sim", version, about = "Packet routing simulator with deep recurrent Q-routing")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario in its configured mode.
    Run {
        #[command(flatten)]
        common: Common,
        /// Also write the event trace of the first test seed.
        #[arg(long)]
        trace: bool,
    },
    /// Train and test each policy at each value of one axis.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// generated_interval | distribution_ratio | comm_interval
        #[arg(long)]
        axis: SweepAxis,
        /// Comma-separated axis values.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
        /// Comma-separated policies.
        #[arg(long, value_delimiter = ',', default_value = "dqrc,q_routing,backpressure")]
        policies: Vec<PolicyKind>,
    },
    /// Supervised shortest-path pre-training study.
    Pretrain {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', default_value = "adam,sgd,rmsprop")]
        optimizers: Vec<OptimizerKind>,
        /// Reinforcement-learning episodes to compare with and without pre-training.
        #[arg(long, default_value_t = 0)]
        rl_episodes: usize,
    },
    /// Variant, depth, width and staleness studies.
    Ablate {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',')]
        layers: Option<Vec<usize>>,
        #[arg(long, value_delimiter = ',')]
        widths: Option<Vec<usize>>,
        #[arg(long, value_delimiter = ',')]
        deltas: Option<Vec<f64>>,
    },
}

#[derive(Args)]
struct Common {
    /// Scenario file (`key = value` lines).
    scenario: PathBuf,
    /// Overrides the scenario seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = "results")]
    out: PathBuf,
    #[arg(long, default_value = "csv")]
    format: ExportFormat,
}

struct Loaded {
    cfg: ScenarioConfig,
    topo: Topology,
}

impl Common {
    fn load(&self) -> Result<Loaded> {
        let text = fs::read_to_string(&self.scenario)
            .with_context(|| format!("reading scenario {}", self.scenario.display()))?;
        let mut cfg = ScenarioConfig::parse(&text).with_context(|| format!("in {}", self.scenario.display()))?;
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        let topo = resolve_topology(&cfg.topology).with_context(|| format!("loading topology `{}`", cfg.topology))?;
        Ok(Loaded { cfg, topo })
    }

    fn path(&self, cfg: &ScenarioConfig, suffix: &str) -> PathBuf {
        self.out
            .join(format!("{}_{suffix}.{}", cfg.name, self.format.extension()))
    }

    fn write(&self, cfg: &ScenarioConfig, suffix: &str, records: &[Record]) -> Result<()> {
        let path = self.path(cfg, suffix);
        export(records, &path, self.format)?;
        eprintln!("wrote {}", path.display());
        Ok(())
    }

    fn write_summary(&self, cfg: &ScenarioConfig, rows: &[SummaryRecord]) -> Result<()> {
        let path = self.out.join(format!("{}_summary.csv", cfg.name));
        write_summary_csv(rows, &path)?;
        eprintln!("wrote {}", path.display());
        Ok(())
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".into(), |v| format!("{v:.4}"))
}

fn run(common: &Common, trace: bool) -> Result<()> {
    let Loaded { cfg, topo } = common.load()?;
    let cache = TrainingCache::new();
    if trace && cfg.mode != Mode::OfflineTest {
        eprintln!("--trace applies to offline_test scenarios; ignored");
    }
    match cfg.mode {
        Mode::OfflineTrain => {
            let mut cfg = cfg;
            if cfg.checkpoint.is_none() && cfg.policy.is_learning() {
                cfg.checkpoint = Some(common.out.join(format!("{}_checkpoint", cfg.name)));
            }
            let trained = run_offline_training(&cfg, &topo)?;
            let mut records = records_from_curve(&cfg.name, &trained.curve, false);
            records.extend(records_from_curve(&cfg.name, &trained.curve, true));
            common.write(&cfg, "training", &records)?;
            let tail = trained.curve.smoothed.last().copied().flatten();
            println!(
                "{} trained {} episodes; final smoothed delay {} ms ({:.1}s)",
                cfg.policy,
                cfg.episodes,
                fmt_opt(tail),
                trained.elapsed.as_secs_f64()
            );
            if let Some(dir) = &cfg.checkpoint {
                println!("checkpoint: {}", dir.display());
            }
        }
        Mode::OfflineTest => {
            let policy = train_or_load(&cfg, &topo, &cache)?;
            let report = run_offline_test(&cfg, &topo, &policy)?;
            common.write(&cfg, "test", &records_from_test(&cfg.name, &report, "none", None))?;
            common.write_summary(
                &cfg,
                &[summary_record(&cfg.name, &report.policy, "none", None, &report.summary)],
            )?;
            println!(
                "{}: mean {} ms, std {} over {} seeds",
                report.policy,
                fmt_opt(report.summary.mean),
                report.summary.std_display(),
                report.summary.n
            );
            if trace {
                let seed = cfg.test_seeds[0];
                let rows = run_traced(&cfg, &topo, &policy, seed)?;
                let path = common.out.join(format!("{}_trace_seed{seed}.csv", cfg.name));
                let file = fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?;
                write_trace_csv(&rows, file)?;
                eprintln!("wrote {}", path.display());
            }
        }
        Mode::Online => {
            let policy = train_or_load(&cfg, &topo, &cache)?;
            let report = run_online(&cfg, &topo, &policy)?;
            common.write(&cfg, "online", &records_from_online(&cfg.name, &report))?;
            let all = report.span(0.0, cfg.online_ms);
            println!(
                "{}: {} windows, mean window delay {} ms",
                report.policy,
                report.curve.len(),
                fmt_opt(all.mean)
            );
        }
    }
    Ok(())
}

fn sweep(common: &Common, axis: SweepAxis, values: &[f64], policies: &[PolicyKind]) -> Result<()> {
    let Loaded { cfg, topo } = common.load()?;
    let cache = TrainingCache::new();
    let rows = run_sweep(&cfg, &topo, axis, values, policies, &cache)?;
    let mut records = Vec::new();
    let mut summary = Vec::new();
    println!("{:>10} {:>16} {:>10} {:>10}", axis.name(), "policy", "mean_ms", "std_ms");
    for row in &rows {
        records.extend(records_from_test(&cfg.name, &row.report, axis.name(), Some(row.value)));
        summary.push(summary_record(&cfg.name, &row.policy, axis.name(), Some(row.value), &row.report.summary));
        println!(
            "{:>10} {:>16} {:>10} {:>10}",
            row.value,
            row.policy,
            fmt_opt(row.report.summary.mean),
            row.report.summary.std_display()
        );
    }
    common.write(&cfg, "sweep", &records)?;
    common.write_summary(&cfg, &summary)
}

fn pretrain_cmd(common: &Common, optimizers: &[OptimizerKind], rl_episodes: usize) -> Result<()> {
    let Loaded { cfg, topo } = common.load()?;
    if optimizers.is_empty() {
        bail!("at least one optimizer is required");
    }
    let study = run_pretrain_study(&cfg, &topo, optimizers, rl_episodes)?;
    let path = common.out.join(format!("{}_pretrain_loss.csv", cfg.name));
    fs::create_dir_all(&common.out).with_context(|| format!("creating {}", common.out.display()))?;
    let mut w = csv::Writer::from_path(&path).with_context(|| format!("creating {}", path.display()))?;
    w.write_record(["optimizer", "episode", "loss"])?;
    for (kind, losses) in &study.loss_curves {
        for (i, loss) in losses.iter().enumerate() {
            w.write_record([kind.to_string(), i.to_string(), loss.to_string()])?;
        }
        let first = losses.first().copied().unwrap_or(f64::NAN);
        let last = losses.last().copied().unwrap_or(f64::NAN);
        println!("{kind}: loss {first:.4} -> {last:.4} over {} episodes", losses.len());
    }
    w.flush()?;
    eprintln!("wrote {}", path.display());
    if let (Some(with), Some(without)) = (&study.pretrained, &study.random_init) {
        let mut records = records_from_curve(&cfg.name, with, false);
        for r in &mut records {
            r.axis_name = "episode_pretrained".into();
        }
        records.extend(records_from_curve(&cfg.name, without, false));
        common.write(&cfg, "pretrain_rl", &records)?;
    }
    Ok(())
}

fn ablate(common: &Common, layers: Option<Vec<usize>>, widths: Option<Vec<usize>>, deltas: Option<Vec<f64>>) -> Result<()> {
    let Loaded { cfg, topo } = common.load()?;
    let mut plan = AblationPlan::default();
    if let Some(v) = layers {
        plan.hidden_layers = v;
    }
    if let Some(v) = widths {
        plan.hidden_widths = v;
    }
    if let Some(v) = deltas {
        plan.comm_intervals = v;
    }
    let cache = TrainingCache::new();
    let report = run_ablation_suite(&cfg, &topo, &plan, &cache)?;
    let mut records = Vec::new();
    let mut summary = Vec::new();
    for row in report.rows() {
        let scenario = format!("{}:{}", cfg.name, row.study);
        records.extend(records_from_test(&scenario, &row.report, &row.axis_name, Some(row.axis_value)));
        summary.push(summary_record(&scenario, &row.policy, &row.axis_name, Some(row.axis_value), &row.report.summary));
        println!(
            "{:>15} {:>14}={:<6} {:>12} mean {} std {}",
            row.study,
            row.axis_name,
            row.axis_value,
            row.policy,
            fmt_opt(row.report.summary.mean),
            row.report.summary.std_display()
        );
    }
    common.write(&cfg, "ablation", &records)?;
    common.write_summary(&cfg, &summary)
}

fn ensure_out(common: &Common) -> Result<&Path> {
    fs::create_dir_all(&common.out).with_context(|| format!("creating {}", common.out.display()))?;
    Ok(&common.out)
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    with_thread_pool(|| match &cli.command {
        Command::Run { common, trace } => {
            ensure_out(common)?;
            run(common, *trace)
        }
        Command::Sweep {
            common,
            axis,
            values,
            policies,
        } => {
            ensure_out(common)?;
            sweep(common, *axis, values, policies)
        }
        Command::Pretrain {
            common,
            optimizers,
            rl_episodes,
        } => {
            ensure_out(common)?;
            pretrain_cmd(common, optimizers, *rl_episodes)
        }
        Command::Ablate {
            common,
            layers,
            widths,
            deltas,
        } => {
            ensure_out(common)?;
            ablate(common, layers.clone(), widths.clone(), deltas.clone())
        }
    })
}

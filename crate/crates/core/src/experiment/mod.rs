//! Scenario configuration, experiment protocols and result export.

mod config;
mod export;
mod instance;
mod protocols;
mod stats;

pub use config::{
    default_busy_pair, parse_schedule, parse_seeds, EpsilonSchedule, Mode, PolicyKind, ScenarioConfig,
};
pub use export::{
    export, read_csv, read_json, read_summary_csv, records_from_curve, records_from_online, records_from_test,
    summary_record, to_csv_string, to_json_string, write_summary_csv, ExportFormat, Record, SummaryRecord,
};
pub use instance::{build_policy, load_trained, save_trained, PolicyInstance, QTABLE_FILE};
pub use protocols::{
    run_ablation_suite, run_offline_test, run_offline_training, run_online, run_pretrain_study, run_sweep, run_traced,
    train_or_load, AblationPlan, AblationReport, AblationRow, OnlineReport, PretrainStudy, SeedResult, SweepAxis,
    SweepRow, TestReport, TrainingCache, TrainingCurve, TrainingRun, WindowPoint,
};
pub use stats::{moving_average, Summary};

/// Environment variable capping run-level parallelism.
pub const THREADS_ENV: &str = "ROUTE_SIM_THREADS";

/// Runs `f` inside a rayon pool sized by `ROUTE_SIM_THREADS` (all cores when
/// unset or invalid). Results never depend on the pool size.
pub fn with_thread_pool<R: Send>(f: impl FnOnce() -> R + Send) -> R {
    let threads = std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0);
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    match builder.build() {
        Ok(pool) => pool.install(f),
        Err(_) => f(),
    }
}

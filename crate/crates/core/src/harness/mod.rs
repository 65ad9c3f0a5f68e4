//! Throughput measurement, TOML-driven training runs and the reference-value report.

mod bench;
mod experiment;
mod report;

pub use bench::{action_stream, bench_ticks, drive, median, BenchOptions, BenchReport, WorkerReport};
pub use experiment::{
    run_experiment, write_metrics_csv, AgentKind, EpisodeRecord, ExperimentConfig, ExperimentSummary, Overrides,
    RunStats, METRICS_HEADER, METRICS_SCHEMA_VERSION, SUMMARY_HEADER,
};
pub use report::{
    all_pass, render_checks, report_tables, report_tables_with, Analytic, TableCheck, TableSource, CAPSNET_REFERENCE,
    REPR_REFERENCE,
};

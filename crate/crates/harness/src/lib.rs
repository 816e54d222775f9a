//! Experiment orchestration for gfmate: leave-one-domain-out runs with a
//! cached encoder, sweeps, label audits, reports and plots.

pub mod cache;
pub mod config;
pub mod data;
pub mod error;
pub mod experiment;
pub mod plot;
pub mod report;

pub use config::{ExperimentConfig, PerturbKind, PerturbSweep, SweepConfig};
pub use error::{HarnessError, Result};
pub use experiment::{
    audit_complementary_labels, audit_labels, prepare, run_experiment, run_merge_sweep, run_perturbation_sweep,
    run_prepared, run_ratio_sweep, run_ratio_sweep_prepared, run_shots_sweep, run_with_encoder, AuditReport, Prepared,
};
pub use plot::emit_plots;
pub use report::{MetricReport, SeedResult};

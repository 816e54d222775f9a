#![allow(dead_code)]

use std::path::Path;

use gfmate_core::synth::BenchmarkSpec;
use gfmate_harness::data::write_synthetic_benchmark;
use gfmate_harness::ExperimentConfig;

/// Synthetic benchmark in `dir` with a short pre-training schedule and a
/// private cache directory.
pub fn quick_config(dir: &Path, seeds: Vec<u64>) -> ExperimentConfig {
    let manifest = write_synthetic_benchmark(&BenchmarkSpec::standard(0), &dir.join("data")).unwrap();
    let mut cfg = ExperimentConfig::synthetic_benchmark(manifest, seeds);
    cfg.pretrain.epochs = 5;
    cfg.tune.max_epochs = 60;
    cfg.tune.patience = 20;
    cfg.cache_dir = Some(dir.join("cache"));
    cfg
}

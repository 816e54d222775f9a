//! Leave-one-domain-out experiments, sweeps and label audits.

use std::path::{Path, PathBuf};
use std::time::Instant;

use gfmate_core::graph::{
    load_manifest, merge_classes, perturb_edges, perturb_features, sample_few_shot_split, FewShotSplit, Graph,
};
use gfmate_core::pretrain::{encode_graph, svd_align, AlignConfig, EmbeddingStack, GcnParams, PretrainConfig};
use gfmate_core::prompt::{
    accuracy, complementary_correctness, init_centroids, least_similar, tunable_parameter_count, tune, write_history,
    TgclMode, TuneConfig,
};
use gfmate_core::rng::derive_seed;
use serde::{Deserialize, Serialize};

use crate::cache::EncoderCache;
use crate::config::{ExperimentConfig, PerturbKind};
use crate::error::{HarnessError, Result, ResultExt};
use crate::report::{mean_std, MetricReport, RunInfo, SeedResult, SweepPoint};

/// Aligned domains of one experiment.
pub struct Domains {
    pub sources_raw: Vec<Graph>,
    pub sources: Vec<Graph>,
    pub target: Graph,
}

/// A target encoded by a frozen encoder.
pub struct Prepared {
    pub domains: Domains,
    pub encoder: GcnParams,
    pub stack: EmbeddingStack,
    pub pretrain_steps: usize,
}

fn align_config(cfg: &PretrainConfig) -> AlignConfig {
    AlignConfig {
        dim: cfg.hidden_dim,
        row_normalize: cfg.row_normalize,
        seed: cfg.seed,
    }
}

fn align_one(g: &Graph, cfg: &PretrainConfig) -> Result<Graph> {
    Ok(svd_align(std::slice::from_ref(g), &align_config(cfg))?.remove(0))
}

/// Loads the manifest and aligns every domain; the target is the named
/// domain and every other one is a source.
pub fn load_domains(cfg: &ExperimentConfig) -> Result<Domains> {
    let manifest = load_manifest(&cfg.manifest_path).context(|| format!("manifest {}", cfg.manifest_path.display()))?;
    if manifest.domain(&cfg.target_domain).is_none() {
        return Err(HarnessError::Config(format!(
            "target domain {:?} is not in {}",
            cfg.target_domain,
            cfg.manifest_path.display()
        )));
    }
    let mut sources_raw = Vec::new();
    let mut target = None;
    for d in &manifest.domains {
        let g = manifest.load_domain(&d.domain_id).context(|| format!("domain {}", d.domain_id))?;
        if d.domain_id == cfg.target_domain {
            target = Some(g);
        } else {
            sources_raw.push(g);
        }
    }
    let target = target.expect("checked above");
    if target.labels().is_none() {
        return Err(HarnessError::Config(format!("target {} has no labels", cfg.target_domain)));
    }
    let sources = sources_raw
        .iter()
        .map(|g| align_one(g, &cfg.pretrain))
        .collect::<Result<Vec<_>>>()?;
    let target = align_one(&target, &cfg.pretrain)?;
    Ok(Domains {
        sources_raw,
        sources,
        target,
    })
}

fn cached_encoder(domains: &Domains, cfg: &ExperimentConfig, pretrain: &PretrainConfig) -> Result<(GcnParams, usize)> {
    let cache = EncoderCache::new(cfg.resolved_cache_dir());
    let raw: Vec<&Graph> = domains.sources_raw.iter().collect();
    let enc = cache.load_or_train(&raw, &domains.sources, pretrain)?;
    if !enc.loss_trace.is_empty() {
        if let Some(dir) = &cfg.output_dir {
            std::fs::create_dir_all(dir)?;
            gfmate_core::pretrain::write_loss_trace(&enc.loss_trace, dir.join("pretrain_loss.csv"))?;
        }
    }
    Ok((enc.params, enc.steps))
}

/// Loads data, obtains the encoder (from `encoder`, the cache, or by
/// pre-training) and encodes the target.
pub fn prepare(cfg: &ExperimentConfig, encoder: Option<GcnParams>) -> Result<Prepared> {
    cfg.validate()?;
    let domains = load_domains(cfg)?;
    let (encoder, pretrain_steps) = match encoder {
        Some(p) => (p, 0),
        None => cached_encoder(&domains, cfg, &cfg.pretrain)?,
    };
    let stack = encode_graph(&encoder, &domains.target).context(|| "encoding target".into())?;
    Ok(Prepared {
        domains,
        encoder,
        stack,
        pretrain_steps,
    })
}

struct SeedRun {
    result: SeedResult,
    history: Vec<gfmate_core::prompt::HistoryRow>,
}

fn tune_config(cfg: &TuneConfig, seed: u64) -> TuneConfig {
    TuneConfig {
        seed: derive_seed(cfg.seed, seed),
        ..cfg.clone()
    }
}

fn run_seed(stack: &EmbeddingStack, target: &Graph, split: &FewShotSplit, tune_cfg: &TuneConfig, seed: u64) -> Result<SeedRun> {
    let labels = target.labels().expect("target is labelled");
    let out = tune(stack, split, labels, &tune_config(tune_cfg, seed)).context(|| format!("tuning seed {seed}"))?;
    let pred = out.predict(stack, &split.test_ids)?;
    let comp = out
        .complementary()
        .map(|c| complementary_correctness(&c.nodes, &c.labels, labels));
    Ok(SeedRun {
        result: SeedResult {
            seed,
            accuracy: accuracy(&pred, &split.test_ids, labels),
            comp_label_accuracy: comp,
            best_epoch: out.best_epoch,
        },
        history: out.history,
    })
}

/// Per-seed encoding of a possibly perturbed target.
type SeedGraph<'a> = dyn Fn(u64, &FewShotSplit) -> Result<Option<Graph>> + 'a;

struct Job<'a> {
    cfg: &'a ExperimentConfig,
    prep: &'a Prepared,
    target: &'a Graph,
    tune: TuneConfig,
    shots: usize,
    label: String,
    sweep: Option<SweepPoint>,
    out_dir: Option<PathBuf>,
    perturb: Option<&'a SeedGraph<'a>>,
}

fn run_job(job: Job<'_>, started: Instant, pretrain_steps: usize) -> Result<MetricReport> {
    let mut per_seed = Vec::with_capacity(job.cfg.seeds.len());
    let mut histories = Vec::new();
    for &seed in &job.cfg.seeds {
        let split = sample_few_shot_split(job.target, job.shots, seed).context(|| format!("split for seed {seed}"))?;
        let (stack, target) = if job.cfg.repretrain_per_seed {
            let pcfg = PretrainConfig {
                seed: derive_seed(job.cfg.pretrain.seed, seed),
                ..job.cfg.pretrain.clone()
            };
            let (enc, _) = cached_encoder(&job.prep.domains, job.cfg, &pcfg)?;
            (encode_graph(&enc, job.target)?, None)
        } else {
            match job.perturb.map(|f| f(seed, &split)).transpose()?.flatten() {
                Some(g) => (encode_graph(&job.prep.encoder, &g)?, Some(g)),
                None => (job.prep.stack.clone(), None),
            }
        };
        let target = target.as_ref().unwrap_or(job.target);
        let run = run_seed(&stack, target, &split, &job.tune, seed)?;
        per_seed.push(run.result);
        histories.push((seed, run.history));
    }
    let depth = job.prep.encoder.num_layers() + 1;
    let report = MetricReport::assemble(
        job.label,
        job.cfg.target_domain.clone(),
        job.shots,
        job.tune.tgcl_mode,
        job.tune.layer_mode,
        job.sweep,
        per_seed,
        tunable_parameter_count(depth, job.target.num_classes(), job.prep.encoder.dim()),
        RunInfo {
            wallclock_secs: started.elapsed().as_secs_f64(),
            pretrain_steps,
        },
    );
    if let Some(dir) = &job.out_dir {
        report.write(dir)?;
        for (seed, h) in &histories {
            write_history(h, dir.join(format!("history_seed{seed}.csv")))?;
        }
    }
    Ok(report)
}

fn base_job<'a>(cfg: &'a ExperimentConfig, prep: &'a Prepared) -> Job<'a> {
    Job {
        cfg,
        prep,
        target: &prep.domains.target,
        tune: cfg.tune.clone(),
        shots: cfg.shots,
        label: cfg.target_domain.clone(),
        sweep: None,
        out_dir: cfg.output_dir.clone(),
        perturb: None,
    }
}

/// Tunes and evaluates every seed on an already prepared target.
pub fn run_prepared(cfg: &ExperimentConfig, prep: &Prepared) -> Result<MetricReport> {
    run_job(base_job(cfg, prep), Instant::now(), prep.pretrain_steps)
}

/// Pre-trains (or loads the cached encoder for) the source domains, then
/// tunes and evaluates the target for every seed.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<MetricReport> {
    let started = Instant::now();
    let prep = prepare(cfg, None)?;
    run_job(base_job(cfg, &prep), started, prep.pretrain_steps)
}

/// Like [`run_experiment`] with a given encoder instead of the cache.
pub fn run_with_encoder(cfg: &ExperimentConfig, encoder: GcnParams) -> Result<MetricReport> {
    let started = Instant::now();
    let prep = prepare(cfg, Some(encoder))?;
    run_job(base_job(cfg, &prep), started, 0)
}

fn sweep_dir(cfg: &ExperimentConfig, kind: &str, value: impl std::fmt::Display) -> Option<PathBuf> {
    cfg.output_dir.as_ref().map(|d| d.join(format!("{kind}_{value}")))
}

fn point(kind: &str, value: f64) -> Option<SweepPoint> {
    Some(SweepPoint {
        kind: kind.into(),
        value,
    })
}

/// Test-node participation sweep. Ratio 0 is few-shot-only tuning; the
/// evaluation always covers the full test set.
pub fn run_ratio_sweep(cfg: &ExperimentConfig, ratios: &[f64]) -> Result<Vec<MetricReport>> {
    let prep = prepare(cfg, None)?;
    run_ratio_sweep_prepared(cfg, &prep, ratios)
}

pub fn run_ratio_sweep_prepared(cfg: &ExperimentConfig, prep: &Prepared, ratios: &[f64]) -> Result<Vec<MetricReport>> {
    let mut steps = prep.pretrain_steps;
    ratios
        .iter()
        .map(|&r| {
            if !(0.0..=1.0).contains(&r) {
                return Err(HarnessError::Config(format!("ratio {r} is outside [0, 1]")));
            }
            let mut tune = cfg.tune.clone();
            tune.test_ratio = r;
            if r == 0.0 {
                tune.tgcl_mode = TgclMode::FewShotOnly;
            }
            let job = Job {
                tune,
                label: format!("ratio {r}"),
                sweep: point("ratio", r),
                out_dir: sweep_dir(cfg, "ratio", r),
                ..base_job(cfg, prep)
            };
            let report = run_job(job, Instant::now(), steps);
            steps = 0;
            report
        })
        .collect()
}

pub fn run_shots_sweep(cfg: &ExperimentConfig, shots: &[usize]) -> Result<Vec<MetricReport>> {
    let prep = prepare(cfg, None)?;
    let mut steps = prep.pretrain_steps;
    shots
        .iter()
        .map(|&m| {
            let job = Job {
                shots: m,
                label: format!("{m}-shot"),
                sweep: point("shots", m as f64),
                out_dir: sweep_dir(cfg, "shots", m),
                ..base_job(cfg, &prep)
            };
            let report = run_job(job, Instant::now(), steps);
            steps = 0;
            report
        })
        .collect()
}

/// Robustness sweep: the target is perturbed around each seed's test nodes
/// and re-encoded before tuning.
pub fn run_perturbation_sweep(cfg: &ExperimentConfig, kind: PerturbKind, ratios: &[f64]) -> Result<Vec<MetricReport>> {
    let prep = prepare(cfg, None)?;
    let mut steps = prep.pretrain_steps;
    let name = match kind {
        PerturbKind::Feature => "feature",
        PerturbKind::Edge => "edge",
    };
    ratios
        .iter()
        .map(|&r| {
            let target = &prep.domains.target;
            let f = move |seed: u64, split: &FewShotSplit| -> Result<Option<Graph>> {
                let s = derive_seed(seed, 0x5eed);
                let g = match kind {
                    PerturbKind::Feature => perturb_features(target, &split.test_ids, r, s)?,
                    PerturbKind::Edge => perturb_edges(target, &split.test_ids, r, s)?,
                };
                Ok(Some(g))
            };
            let job = Job {
                label: format!("{name} perturbation {r}"),
                sweep: point(name, r),
                out_dir: sweep_dir(cfg, name, r),
                perturb: Some(&f),
                ..base_job(cfg, &prep)
            };
            let report = run_job(job, Instant::now(), steps);
            steps = 0;
            report
        })
        .collect()
}

/// Binary tasks built by merging each class group against the rest.
pub fn run_merge_sweep(cfg: &ExperimentConfig, groups: &[Vec<usize>]) -> Result<Vec<MetricReport>> {
    let prep = prepare(cfg, None)?;
    let mut steps = prep.pretrain_steps;
    groups
        .iter()
        .enumerate()
        .map(|(k, group)| {
            let merged = merge_classes(&prep.domains.target, group)?;
            let job = Job {
                target: &merged,
                label: format!("merge {group:?}"),
                sweep: point("merge", k as f64),
                out_dir: sweep_dir(cfg, "merge", k),
                ..base_job(cfg, &prep)
            };
            let report = run_job(job, Instant::now(), steps);
            steps = 0;
            report
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditSeed {
    pub seed: u64,
    pub pivot_layer: usize,
    /// Correctness of the entropy-selected pivot layer.
    pub pivot: f64,
    /// Correctness of the least similar class at the last layer.
    pub last_layer: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub per_seed: Vec<AuditSeed>,
    pub pivot_mean: f64,
    pub last_layer_mean: f64,
}

/// Complementary-label correctness of the pivot strategy against the
/// last-layer baseline on every seed's test nodes.
pub fn audit_labels(stack: &EmbeddingStack, target: &Graph, shots: usize, seeds: &[u64]) -> Result<AuditReport> {
    let labels = target
        .labels()
        .ok_or_else(|| HarnessError::Config("audit needs a labelled target".into()))?;
    let mut per_seed = Vec::with_capacity(seeds.len());
    for &seed in seeds {
        let split = sample_few_shot_split(target, shots, seed)?;
        let e = init_centroids(stack, &split)?;
        let comp = gfmate_core::prompt::compute_complementary_labels(stack, &e, &split.test_ids)?;
        let last = least_similar(stack, &e, stack.depth() - 1, &split.test_ids);
        per_seed.push(AuditSeed {
            seed,
            pivot_layer: comp.pivot_layer,
            pivot: complementary_correctness(&comp.nodes, &comp.labels, labels),
            last_layer: complementary_correctness(&split.test_ids, &last, labels),
        });
    }
    let pivots: Vec<f64> = per_seed.iter().map(|s| s.pivot).collect();
    let lasts: Vec<f64> = per_seed.iter().map(|s| s.last_layer).collect();
    Ok(AuditReport {
        pivot_mean: mean_std(&pivots).0,
        last_layer_mean: mean_std(&lasts).0,
        per_seed,
    })
}

pub fn audit_complementary_labels(cfg: &ExperimentConfig) -> Result<AuditReport> {
    let prep = prepare(cfg, None)?;
    let report = audit_labels(&prep.stack, &prep.domains.target, cfg.shots, &cfg.seeds)?;
    if let Some(dir) = &cfg.output_dir {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("audit.json"), serde_json::to_string_pretty(&report)? + "\n")?;
    }
    Ok(report)
}

/// Writes `sweep.csv` (value, mean, stddev) for a list of sweep reports.
pub fn write_sweep_summary(reports: &[MetricReport], path: &Path) -> Result<()> {
    let mut out = String::from("value,mean,stddev\n");
    for r in reports {
        let v = r.sweep.as_ref().map_or(f64::NAN, |s| s.value);
        out.push_str(&format!("{v:?},{:?},{:?}\n", r.mean, r.stddev));
    }
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, out)?;
    Ok(())
}

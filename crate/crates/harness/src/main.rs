use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gfmate_core::graph::load_manifest;
use gfmate_core::pretrain::{pretrain, svd_align, write_loss_trace, AlignConfig, GcnParams};
use gfmate_core::prompt::{LayerMode, TgclMode};
use gfmate_core::synth::BenchmarkSpec;
use gfmate_harness::config::parse_seeds;
use gfmate_harness::data::write_synthetic_benchmark;
use gfmate_harness::error::exit;
use gfmate_harness::experiment::write_sweep_summary;
use gfmate_harness::*;

#[derive(Parser)]
#[command(name = "gfmate", version, about = "Graph foundation model prompt tuning experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the synthetic SBM benchmark as a dataset manifest.
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Pre-train an encoder on every manifest domain except one.
    Pretrain {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        exclude: String,
        #[arg(long)]
        out: PathBuf,
        /// JSON experiment config supplying the pre-training settings.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long)]
        hidden_dim: Option<usize>,
        #[arg(long = "pretrain-lr")]
        lr: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Tune prompts on the target for every seed and report accuracy.
    Tune {
        /// Use this encoder instead of the checkpoint cache.
        #[arg(long)]
        ckpt: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Run a sweep and write one report per point plus sweep.csv.
    Sweep {
        #[arg(long, value_enum)]
        kind: SweepKind,
        /// Comma-separated sweep values; defaults to the config's sweeps.
        #[arg(long)]
        values: Option<String>,
        #[arg(long, value_enum, default_value_t = PerturbArg::Feature)]
        perturb_kind: PerturbArg,
        #[command(flatten)]
        common: Common,
    },
    /// Complementary-label correctness of the pivot layer and the last layer.
    AuditLabels {
        #[command(flatten)]
        common: Common,
    },
    /// Render report.json files (or directories holding them) as SVG.
    Plot {
        #[arg(long, num_args = 1.., required = true)]
        reports: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SweepKind {
    Ratio,
    Perturb,
    Shots,
    Merge,
}

#[derive(Clone, Copy, ValueEnum)]
enum PerturbArg {
    Feature,
    Edge,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Complementary,
    FewShotOnly,
    Pseudo,
}

#[derive(Args)]
struct Common {
    /// JSON experiment config; flags below override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    manifest: Option<PathBuf>,
    #[arg(long)]
    target: Option<String>,
    #[arg(long)]
    shots: Option<usize>,
    /// `a..b` (inclusive) or a comma-separated list.
    #[arg(long)]
    seeds: Option<String>,
    #[arg(long = "out-dir")]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    hidden_dim: Option<usize>,
    #[arg(long)]
    pretrain_lr: Option<f64>,
    /// Prompt tuning step size.
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Fix layer weights at 1/(L+1).
    #[arg(long)]
    frozen_layers: bool,
}

impl Common {
    fn experiment(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(p) => ExperimentConfig::from_file(p)?,
            None => {
                let (Some(m), Some(t)) = (&self.manifest, &self.target) else {
                    return Err(HarnessError::Config("give --config or both --manifest and --target".into()));
                };
                ExperimentConfig::new(m, t, (0..5).collect())
            }
        };
        if let Some(m) = &self.manifest {
            cfg.manifest_path = m.clone();
        }
        if let Some(t) = &self.target {
            cfg.target_domain = t.clone();
        }
        if let Some(m) = self.shots {
            cfg.shots = m;
        }
        if let Some(s) = &self.seeds {
            cfg.seeds = parse_seeds(s)?;
        }
        if let Some(d) = &self.out_dir {
            cfg.output_dir = Some(d.clone());
        }
        if let Some(e) = self.epochs {
            cfg.pretrain.epochs = e;
        }
        if let Some(d) = self.hidden_dim {
            cfg.pretrain.hidden_dim = d;
        }
        if let Some(lr) = self.pretrain_lr {
            cfg.pretrain.lr = lr;
        }
        if let Some(lr) = self.lr {
            cfg.tune.lr = lr;
        }
        if let Some(g) = self.gamma {
            cfg.tune.gamma = g;
        }
        if let Some(t) = self.tau {
            cfg.tune.tau = t;
        }
        if let Some(m) = self.mode {
            cfg.tune.tgcl_mode = match m {
                ModeArg::Complementary => TgclMode::Complementary,
                ModeArg::FewShotOnly => TgclMode::FewShotOnly,
                ModeArg::Pseudo => TgclMode::Pseudo,
            };
        }
        if self.frozen_layers {
            cfg.tune.layer_mode = LayerMode::FrozenUniform;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn parse_list<T: std::str::FromStr>(s: &str) -> Result<Vec<T>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse()
                .map_err(|_| HarnessError::Config(format!("cannot parse {t:?} in {s:?}")))
        })
        .collect()
}

fn print_report(r: &MetricReport) {
    println!(
        "{}: {} over {} seeds ({} tunable parameters, {:.2}s)",
        r.label,
        r.summary,
        r.per_seed.len(),
        r.param_count,
        r.run.wallclock_secs
    );
}

fn finish_sweep(cfg: &ExperimentConfig, reports: &[MetricReport]) -> Result<()> {
    for r in reports {
        print_report(r);
    }
    if let Some(dir) = &cfg.output_dir {
        write_sweep_summary(reports, &dir.join("sweep.csv"))?;
        emit_plots(reports, &dir.join("plots"))?;
    }
    Ok(())
}

fn collect_reports(paths: &[PathBuf]) -> Result<Vec<MetricReport>> {
    let mut out = Vec::new();
    for p in paths {
        if p.is_file() {
            out.push(MetricReport::read(p)?);
            continue;
        }
        let own = p.join("report.json");
        if own.is_file() {
            out.push(MetricReport::read(&own)?);
            continue;
        }
        let mut nested: Vec<MetricReport> = std::fs::read_dir(p)?
            .filter_map(|e| e.ok().map(|e| e.path().join("report.json")))
            .filter(|f| f.is_file())
            .map(|f| MetricReport::read(&f))
            .collect::<Result<_>>()?;
        nested.sort_by(|a, b| {
            let v = |r: &MetricReport| r.sweep.as_ref().map_or(0.0, |s| s.value);
            v(a).total_cmp(&v(b)).then_with(|| a.label.cmp(&b.label))
        });
        out.extend(nested);
    }
    Ok(out)
}

struct PretrainArgs {
    config: Option<PathBuf>,
    epochs: Option<usize>,
    hidden_dim: Option<usize>,
    lr: Option<f64>,
    seed: Option<u64>,
}

fn pretrain_cmd(manifest: &Path, exclude: &str, out: &Path, args: PretrainArgs) -> Result<()> {
    let mut cfg = match &args.config {
        Some(p) => ExperimentConfig::from_file(p)?.pretrain,
        None => Default::default(),
    };
    if let Some(e) = args.epochs {
        cfg.epochs = e;
    }
    if let Some(d) = args.hidden_dim {
        cfg.hidden_dim = d;
    }
    if let Some(lr) = args.lr {
        cfg.lr = lr;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    cfg.validate()?;
    let m = load_manifest(manifest)?;
    if m.domain(exclude).is_none() {
        return Err(HarnessError::Config(format!("domain {exclude:?} is not in the manifest")));
    }
    let align = AlignConfig {
        dim: cfg.hidden_dim,
        row_normalize: cfg.row_normalize,
        seed: cfg.seed,
    };
    let mut sources = Vec::new();
    for d in m.domains.iter().filter(|d| d.domain_id != exclude) {
        let g = m.load_domain(&d.domain_id)?;
        sources.push(svd_align(std::slice::from_ref(&g), &align)?.remove(0));
    }
    let outcome = pretrain(&sources, &cfg)?;
    outcome.params.save(out)?;
    write_loss_trace(&outcome.loss_trace, out.with_extension("loss.csv"))?;
    println!(
        "pre-trained on {} domains, {} steps, final loss {:.4}",
        sources.len(),
        outcome.total_steps(),
        outcome.loss_trace.last().copied().unwrap_or(f64::NAN)
    );
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Synth { out, seed } => {
            let path = write_synthetic_benchmark(&BenchmarkSpec::standard(seed), &out)?;
            let mut cfg = ExperimentConfig::synthetic_benchmark("manifest.json", (0..20).collect());
            cfg.output_dir = Some("results".into());
            let cfg_path = out.join("experiment.json");
            std::fs::write(&cfg_path, serde_json::to_string_pretty(&cfg)? + "\n")?;
            println!("{}", path.display());
            println!("{}", cfg_path.display());
        }
        Command::Pretrain {
            manifest,
            exclude,
            out,
            config,
            epochs,
            hidden_dim,
            lr,
            seed,
        } => pretrain_cmd(
            &manifest,
            &exclude,
            &out,
            PretrainArgs {
                config,
                epochs,
                hidden_dim,
                lr,
                seed,
            },
        )?,
        Command::Tune { ckpt, common } => {
            let cfg = common.experiment()?;
            let report = match ckpt {
                Some(p) => run_with_encoder(&cfg, GcnParams::load(&p)?)?,
                None => run_experiment(&cfg)?,
            };
            print_report(&report);
        }
        Command::Sweep {
            kind,
            values,
            perturb_kind,
            common,
        } => {
            let cfg = common.experiment()?;
            let sweeps = cfg.sweeps.clone().unwrap_or_default();
            let missing = |what: &str| HarnessError::Config(format!("no {what} values given"));
            let reports = match kind {
                SweepKind::Ratio => {
                    let r = match &values {
                        Some(v) => parse_list(v)?,
                        None => sweeps.test_ratios.ok_or_else(|| missing("ratio"))?,
                    };
                    run_ratio_sweep(&cfg, &r)?
                }
                SweepKind::Shots => {
                    let m = match &values {
                        Some(v) => parse_list(v)?,
                        None => sweeps.shots.ok_or_else(|| missing("shot"))?,
                    };
                    run_shots_sweep(&cfg, &m)?
                }
                SweepKind::Perturb => {
                    let (pk, ratios) = match (&values, sweeps.perturb) {
                        (Some(v), _) => {
                            let pk = match perturb_kind {
                                PerturbArg::Feature => PerturbKind::Feature,
                                PerturbArg::Edge => PerturbKind::Edge,
                            };
                            (pk, parse_list(v)?)
                        }
                        (None, Some(p)) => (p.kind, p.ratios),
                        (None, None) => return Err(missing("perturbation")),
                    };
                    run_perturbation_sweep(&cfg, pk, &ratios)?
                }
                SweepKind::Merge => {
                    let groups = match &values {
                        Some(v) => v.split(';').map(parse_list).collect::<Result<Vec<Vec<usize>>>>()?,
                        None => sweeps.merge_groups.ok_or_else(|| missing("merge group"))?,
                    };
                    run_merge_sweep(&cfg, &groups)?
                }
            };
            finish_sweep(&cfg, &reports)?;
        }
        Command::AuditLabels { common } => {
            let cfg = common.experiment()?;
            let a = audit_complementary_labels(&cfg)?;
            println!(
                "complementary correctness: pivot layer {:.4}, last layer {:.4}",
                a.pivot_mean, a.last_layer_mean
            );
        }
        Command::Plot { reports, out } => {
            for p in emit_plots(&collect_reports(&reports)?, &out)? {
                println!("{}", p.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::from(exit::OK as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

use std::io::Write;
use std::path::Path;

use rand::seq::index;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::FewShotSplit;
use crate::pretrain::EmbeddingStack;
use crate::prompt::objective::{tgcl_objective, TestSupervision};
use crate::prompt::{
    accuracy, compute_complementary_labels, ensemble_predict, init_centroids, pseudo_labels,
    refine_centroids, CentroidMatrix, Prompts,
};
use crate::rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LayerMode {
    /// `η` starts at 1 and is tuned.
    Learned,
    /// `η = 1/(L+1)`, never updated.
    FrozenUniform,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TgclMode {
    Complementary,
    FewShotOnly,
    /// Last-layer most-similar class as positive test targets.
    Pseudo,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TuneConfig {
    pub gamma: f64,
    pub tau: f64,
    pub lr: f64,
    pub max_epochs: usize,
    pub patience: usize,
    pub seed: u64,
    pub layer_mode: LayerMode,
    pub tgcl_mode: TgclMode,
    /// Fraction of test nodes that receive test-time labels.
    pub test_ratio: f64,
    /// Standard deviation of the Gaussian `β` initialisation.
    pub beta_init_std: f64,
}

impl Default for TuneConfig {
    fn default() -> Self {
        Self {
            gamma: 0.5,
            tau: 0.5,
            lr: 0.01,
            max_epochs: 500,
            patience: 50,
            seed: 0,
            layer_mode: LayerMode::Learned,
            tgcl_mode: TgclMode::Complementary,
            test_ratio: 1.0,
            beta_init_std: 0.01,
        }
    }
}

impl TuneConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(Error::Config(format!("gamma {} is outside [0, 1]", self.gamma)));
        }
        if !(self.tau > 0.0) {
            return Err(Error::InvalidTemperature(self.tau));
        }
        if !(self.lr >= 0.0 && self.lr.is_finite()) {
            return Err(Error::Config(format!("learning rate {} is invalid", self.lr)));
        }
        if !(0.0..=1.0).contains(&self.test_ratio) {
            return Err(Error::Config(format!("test ratio {} is outside [0, 1]", self.test_ratio)));
        }
        if !(self.beta_init_std >= 0.0) {
            return Err(Error::Config("beta_init_std must be non-negative".into()));
        }
        Ok(())
    }
}

/// One tuning epoch: losses and validation accuracy at the prompts the
/// epoch starts from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistoryRow {
    pub epoch: usize,
    pub loss_te: f64,
    pub loss_fs: f64,
    pub loss_tgcl: f64,
    pub val_acc: f64,
}

#[derive(Clone, Debug)]
pub struct TuneOutcome {
    /// Prompts with the best validation accuracy (earliest on ties).
    pub prompts: Prompts,
    pub initial_prompts: Prompts,
    /// Unrefined few-shot centroids.
    pub centroids: CentroidMatrix,
    pub supervision: TestSupervision,
    pub history: Vec<HistoryRow>,
    pub best_epoch: usize,
}

impl TuneOutcome {
    pub fn predict(&self, stack: &EmbeddingStack, nodes: &[usize]) -> Result<Vec<usize>> {
        let e_tilde = refine_centroids(&self.centroids, &self.prompts)?;
        ensemble_predict(stack, &e_tilde, &self.prompts.eta, nodes)
    }

    pub fn complementary(&self) -> Option<&crate::prompt::ComplementaryLabels> {
        match &self.supervision {
            TestSupervision::Complementary(c) => Some(c),
            _ => None,
        }
    }
}

/// Initial prompts: `β ~ N(0, beta_init_std²)` from the tuning seed, and
/// `η = 1` (learned) or `1/(L+1)` (frozen-uniform).
pub fn init_prompts(depth: usize, classes: usize, dim: usize, cfg: &TuneConfig) -> Result<Prompts> {
    let mut beta = CentroidMatrix::zeros(depth, classes, dim);
    if cfg.beta_init_std > 0.0 {
        let normal = Normal::new(0.0, cfg.beta_init_std)
            .map_err(|e| Error::Config(format!("beta init: {e}")))?;
        let mut r = rng::stream(cfg.seed, 0);
        beta.as_mut_slice().iter_mut().for_each(|v| *v = normal.sample(&mut r));
    }
    let eta = match cfg.layer_mode {
        LayerMode::Learned => vec![1.0; depth],
        LayerMode::FrozenUniform => vec![1.0 / depth as f64; depth],
    };
    Prompts::new(beta, eta)
}

/// Test-time labels for a tuning run, computed once from the unrefined
/// centroids. With `test_ratio < 1` only `⌈ratio·|test|⌉` seeded test nodes
/// take part; a ratio of 0 falls back to few-shot tuning.
pub fn build_supervision(
    stack: &EmbeddingStack,
    centroids: &CentroidMatrix,
    split: &FewShotSplit,
    cfg: &TuneConfig,
) -> Result<TestSupervision> {
    if cfg.tgcl_mode == TgclMode::FewShotOnly {
        return Ok(TestSupervision::None);
    }
    let k = crate::graph::ceil_count(cfg.test_ratio, split.test_ids.len());
    if k == 0 {
        return Ok(TestSupervision::None);
    }
    let nodes: Vec<usize> = if k == split.test_ids.len() {
        split.test_ids.clone()
    } else {
        let mut r = rng::stream(cfg.seed, 1);
        let mut picked = index::sample(&mut r, split.test_ids.len(), k).into_vec();
        picked.sort_unstable();
        picked.into_iter().map(|i| split.test_ids[i]).collect()
    };
    Ok(match cfg.tgcl_mode {
        TgclMode::Complementary => {
            TestSupervision::Complementary(compute_complementary_labels(stack, centroids, &nodes)?)
        }
        TgclMode::Pseudo => {
            let labels = pseudo_labels(stack, centroids, &nodes)?;
            TestSupervision::Pseudo { nodes, labels }
        }
        TgclMode::FewShotOnly => unreachable!(),
    })
}

fn val_accuracy(
    stack: &EmbeddingStack,
    centroids: &CentroidMatrix,
    prompts: &Prompts,
    split: &FewShotSplit,
    labels: &[Option<usize>],
) -> Result<f64> {
    if split.val_ids.is_empty() {
        return Ok(0.0);
    }
    let e_tilde = refine_centroids(centroids, prompts)?;
    let pred = ensemble_predict(stack, &e_tilde, &prompts.eta, &split.val_ids)?;
    Ok(accuracy(&pred, &split.val_ids, labels))
}

/// Test-time prompt tuning.
///
/// Centroids come from the few shots and test-time labels are fixed before
/// the loop. Each epoch records losses and validation accuracy, then takes a
/// full-batch gradient step on `(β, η)`. Tuning stops after `max_epochs`
/// steps or `patience` epochs without a strict validation improvement and
/// returns the best-validation prompts. Without validation nodes the final
/// prompts are returned. `labels` supplies ground truth for validation.
pub fn tune(
    stack: &EmbeddingStack,
    split: &FewShotSplit,
    labels: &[Option<usize>],
    cfg: &TuneConfig,
) -> Result<TuneOutcome> {
    cfg.validate()?;
    if labels.len() != stack.num_nodes() {
        return Err(Error::Shape(format!(
            "{} labels for {} embedded nodes",
            labels.len(),
            stack.num_nodes()
        )));
    }
    let centroids = init_centroids(stack, split)?;
    let (depth, classes, dim) = centroids.shape();
    let initial = init_prompts(depth, classes, dim, cfg)?;
    let supervision = build_supervision(stack, &centroids, split, cfg)?;
    let early_stop = !split.val_ids.is_empty();

    let mut prompts = initial.clone();
    let mut best = (f64::NEG_INFINITY, 0usize, prompts.clone());
    let mut history = Vec::with_capacity(cfg.max_epochs + 1);
    let mut stale = 0;
    for epoch in 0..=cfg.max_epochs {
        let obj = tgcl_objective(stack, &centroids, &prompts, split, &supervision, cfg)?;
        if !obj.loss_tgcl.is_finite() || !prompts.is_finite() {
            return Err(Error::NonFinite(format!("prompt tuning at epoch {epoch}")));
        }
        let val_acc = val_accuracy(stack, &centroids, &prompts, split, labels)?;
        history.push(HistoryRow {
            epoch,
            loss_te: obj.loss_te,
            loss_fs: obj.loss_fs,
            loss_tgcl: obj.loss_tgcl,
            val_acc,
        });
        if val_acc > best.0 || !early_stop {
            best = (val_acc, epoch, prompts.clone());
            stale = 0;
        } else {
            stale += 1;
            if stale >= cfg.patience.max(1) {
                break;
            }
        }
        if epoch == cfg.max_epochs {
            break;
        }
        for (b, g) in prompts.beta.as_mut_slice().iter_mut().zip(obj.grad_beta.as_slice()) {
            *b -= cfg.lr * g;
        }
        for (w, g) in prompts.eta.iter_mut().zip(&obj.grad_eta) {
            *w -= cfg.lr * g;
        }
    }
    let (_, best_epoch, best_prompts) = best;
    Ok(TuneOutcome {
        prompts: best_prompts,
        initial_prompts: initial,
        centroids,
        supervision,
        history,
        best_epoch,
    })
}

/// Writes tuning history as CSV `epoch,loss_te,loss_fs,loss_tgcl,val_acc`.
pub fn write_history(history: &[HistoryRow], path: impl AsRef<Path>) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(f, "epoch,loss_te,loss_fs,loss_tgcl,val_acc")?;
    for r in history {
        writeln!(f, "{},{},{},{},{}", r.epoch, r.loss_te, r.loss_fs, r.loss_tgcl, r.val_acc)?;
    }
    f.flush()?;
    Ok(())
}

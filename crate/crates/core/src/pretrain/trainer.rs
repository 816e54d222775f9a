use std::collections::HashSet;
use std::io::Write;
use std::path::Path;

use rand::seq::index;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{normalize_adjacency, CsrAdjacency, Graph};
use crate::pretrain::gcn::{gcn_backward, gcn_forward_cached, GcnParams};
use crate::pretrain::link::link_pred_loss;
use crate::rng::{self, Rng};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PretrainConfig {
    /// Number of propagation layers `L`.
    pub num_layers: usize,
    /// Hidden width `d`; also the aligned feature width.
    pub hidden_dim: usize,
    pub epochs: usize,
    pub lr: f64,
    /// Negative pairs sampled per positive edge.
    pub neg_ratio: f64,
    /// Positive edges per step.
    pub batch_edges: usize,
    /// L2-normalise aligned feature rows.
    pub row_normalize: bool,
    pub seed: u64,
}

impl Default for PretrainConfig {
    fn default() -> Self {
        Self {
            num_layers: 2,
            hidden_dim: 256,
            epochs: 100,
            lr: 0.01,
            neg_ratio: 1.0,
            batch_edges: 512,
            row_normalize: true,
            seed: 0,
        }
    }
}

impl PretrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lr >= 0.0 && self.lr.is_finite()) {
            return Err(Error::Config(format!("learning rate {} is invalid", self.lr)));
        }
        if self.epochs == 0 {
            return Err(Error::Config("epochs must be at least 1".into()));
        }
        if !(self.neg_ratio > 0.0) {
            return Err(Error::Config(format!("neg_ratio {} must be positive", self.neg_ratio)));
        }
        if self.batch_edges == 0 || self.num_layers == 0 || self.hidden_dim == 0 {
            return Err(Error::Config(
                "batch_edges, num_layers and hidden_dim must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct PretrainOutcome {
    pub params: GcnParams,
    /// Mean step loss of every epoch.
    pub loss_trace: Vec<f64>,
    /// Optimisation steps taken on each input graph (0 for skipped graphs).
    pub steps_per_domain: Vec<usize>,
}

impl PretrainOutcome {
    pub fn total_steps(&self) -> usize {
        self.steps_per_domain.iter().sum()
    }
}

struct Source<'a> {
    index: usize,
    graph: &'a Graph,
    adj: CsrAdjacency,
    edge_set: HashSet<(usize, usize)>,
}

/// Link-prediction pre-training with plain SGD.
///
/// An epoch has `⌈Σ|E| / batch_edges⌉` steps. Each step takes the next
/// source graph in round-robin order, samples `batch_edges` of its edges
/// plus `neg_ratio` times as many uniform non-edges, runs a full-graph
/// forward/backward pass and updates every weight matrix.
/// Weights start from Xavier-uniform with the config seed.
pub fn pretrain(graphs: &[Graph], cfg: &PretrainConfig) -> Result<PretrainOutcome> {
    cfg.validate()?;
    if graphs.is_empty() {
        return Err(Error::EmptyInput("no source graphs".into()));
    }
    if let Some(g) = graphs.iter().find(|g| g.feature_dim() != cfg.hidden_dim) {
        return Err(Error::Shape(format!(
            "graph {:?} has feature width {}, expected aligned width {}",
            g.domain_id(),
            g.feature_dim(),
            cfg.hidden_dim
        )));
    }
    let mut sources = Vec::new();
    for (index, graph) in graphs.iter().enumerate() {
        if graph.num_edges() == 0 {
            log::warn!("skipping source graph {:?}: it has no edges", graph.domain_id());
            continue;
        }
        sources.push(Source {
            index,
            graph,
            adj: normalize_adjacency(graph),
            edge_set: graph.edges().iter().copied().collect(),
        });
    }
    if sources.is_empty() {
        return Err(Error::NoSignal);
    }

    let mut params = GcnParams::xavier(cfg.num_layers, cfg.hidden_dim, rng::derive_seed(cfg.seed, 0))?;
    let mut rng = rng::stream(cfg.seed, 1);
    let total_edges: usize = sources.iter().map(|s| s.graph.num_edges()).sum();
    let steps_per_epoch = total_edges.div_ceil(cfg.batch_edges).max(1);
    let mut steps_per_domain = vec![0; graphs.len()];
    let mut loss_trace = Vec::with_capacity(cfg.epochs);
    let mut turn = 0;

    for _ in 0..cfg.epochs {
        let mut epoch_loss = 0.0;
        for _ in 0..steps_per_epoch {
            let src = &sources[turn % sources.len()];
            turn += 1;
            let pos = sample_positives(src.graph, cfg.batch_edges, &mut rng);
            let n_neg = ((pos.len() as f64) * cfg.neg_ratio).round().max(1.0) as usize;
            let neg = sample_negatives(src, n_neg, &mut rng);

            let (stack, cache) = gcn_forward_cached(&params, &src.adj, src.graph.features())?;
            let out = stack.layer(stack.depth() - 1);
            let (loss, grad_h) = link_pred_loss(out, &pos, &neg)?;
            let grads = gcn_backward(&params, &src.adj, &cache, &grad_h)?;
            if !loss.is_finite() || grads.iter().any(|g| !g.is_finite()) {
                return Err(Error::NonFinite(format!(
                    "pre-training step on {:?}",
                    src.graph.domain_id()
                )));
            }
            for (w, g) in params.weights_mut().iter_mut().zip(&grads) {
                for (wv, gv) in w.as_mut_slice().iter_mut().zip(g.as_slice()) {
                    *wv -= cfg.lr * gv;
                }
            }
            steps_per_domain[src.index] += 1;
            epoch_loss += loss;
        }
        loss_trace.push(epoch_loss / steps_per_epoch as f64);
    }
    Ok(PretrainOutcome {
        params,
        loss_trace,
        steps_per_domain,
    })
}

fn sample_positives(g: &Graph, batch: usize, rng: &mut Rng) -> Vec<(usize, usize)> {
    let edges = g.edges();
    if batch >= edges.len() {
        return edges.to_vec();
    }
    let mut picked = index::sample(rng, edges.len(), batch).into_vec();
    picked.sort_unstable();
    picked.into_iter().map(|i| edges[i]).collect()
}

/// Uniform non-adjacent pairs by rejection. Gives up on a pair after a
/// bounded number of draws, which only happens on near-complete graphs.
fn sample_negatives(src: &Source<'_>, count: usize, rng: &mut Rng) -> Vec<(usize, usize)> {
    let n = src.graph.num_nodes();
    let mut out = Vec::with_capacity(count);
    if n < 2 {
        return out;
    }
    for _ in 0..count {
        for _ in 0..64 {
            let u = rng.random_range(0..n);
            let v = rng.random_range(0..n);
            if u != v && !src.edge_set.contains(&(u.min(v), u.max(v))) {
                out.push((u, v));
                break;
            }
        }
    }
    out
}

/// Writes the loss trace as CSV `epoch,loss`.
pub fn write_loss_trace(trace: &[f64], path: impl AsRef<Path>) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(f, "epoch,loss")?;
    for (e, l) in trace.iter().enumerate() {
        writeln!(f, "{e},{l}")?;
    }
    f.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::DenseMatrix;

    fn ring(n: usize, d: usize, id: &str) -> Graph {
        let x = DenseMatrix::from_fn(n, d, |i, j| ((i * 7 + j * 3) % 5) as f64 / 5.0 - 0.4);
        let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        Graph::new(id, x, edges, None, 0).unwrap()
    }

    fn cfg(d: usize) -> PretrainConfig {
        PretrainConfig {
            hidden_dim: d,
            epochs: 3,
            batch_edges: 4,
            ..Default::default()
        }
    }

    #[test]
    fn zero_lr_returns_xavier_init() {
        let c = PretrainConfig { lr: 0.0, ..cfg(4) };
        let out = pretrain(&[ring(10, 4, "a")], &c).unwrap();
        let init = GcnParams::xavier(c.num_layers, 4, rng::derive_seed(c.seed, 0)).unwrap();
        assert_eq!(out.params, init);
    }

    #[test]
    fn round_robin_is_fair() {
        let out = pretrain(&[ring(10, 4, "a"), ring(7, 4, "b")], &cfg(4)).unwrap();
        let s = &out.steps_per_domain;
        assert!(s[0].abs_diff(s[1]) <= 1, "{s:?}");
        assert_eq!(out.loss_trace.len(), 3);
    }

    #[test]
    fn edgeless_sources() {
        let empty = Graph::new("e", DenseMatrix::zeros(3, 4), [], None, 0).unwrap();
        let out = pretrain(&[empty.clone(), ring(6, 4, "a")], &cfg(4)).unwrap();
        assert_eq!(out.steps_per_domain[0], 0);
        assert!(matches!(pretrain(&[empty], &cfg(4)), Err(Error::NoSignal)));
    }

    #[test]
    fn rejects_bad_config() {
        let g = [ring(6, 4, "a")];
        assert!(pretrain(&g, &PretrainConfig { epochs: 0, ..cfg(4) }).is_err());
        assert!(pretrain(&g, &PretrainConfig { neg_ratio: 0.0, ..cfg(4) }).is_err());
        assert!(matches!(pretrain(&g, &cfg(5)), Err(Error::Shape(_))));
    }
}

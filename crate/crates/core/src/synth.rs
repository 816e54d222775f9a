//! Synthetic domains: stochastic block model graphs with class-conditional
//! Gaussian features, and Gaussian-cluster embedding stacks.

use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::linalg::DenseMatrix;
use crate::pretrain::EmbeddingStack;
use crate::rng::{self, Rng};

/// A planted-partition SBM whose blocks are the node classes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SbmSpec {
    pub domain_id: String,
    pub block_sizes: Vec<usize>,
    /// Edge probability inside a block.
    pub p_in: f64,
    /// Edge probability across blocks.
    pub p_out: f64,
    pub feature_dim: usize,
    /// Scale of the per-class feature means.
    pub feature_signal: f64,
    /// Standard deviation of per-node feature noise.
    pub feature_noise: f64,
    pub seed: u64,
}

fn gaussian(r: &mut Rng) -> f64 {
    StandardNormal.sample(r)
}

/// Samples an SBM graph. Nodes are laid out block by block; labels are block
/// indices.
pub fn sbm_graph(spec: &SbmSpec) -> Result<Graph> {
    for p in [spec.p_in, spec.p_out] {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Config(format!("edge probability {p} is outside [0, 1]")));
        }
    }
    let classes = spec.block_sizes.len();
    let labels: Vec<usize> = spec
        .block_sizes
        .iter()
        .enumerate()
        .flat_map(|(c, &s)| std::iter::repeat_n(c, s))
        .collect();
    let n = labels.len();

    let mut r = rng::stream(spec.seed, 0);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            let p = if labels[u] == labels[v] { spec.p_in } else { spec.p_out };
            if r.random::<f64>() < p {
                edges.push((u, v));
            }
        }
    }

    let mut r = rng::stream(spec.seed, 1);
    let means = DenseMatrix::from_fn(classes, spec.feature_dim, |_, _| spec.feature_signal * gaussian(&mut r));
    let features = DenseMatrix::from_fn(n, spec.feature_dim, |i, j| {
        means.get(labels[i], j) + spec.feature_noise * gaussian(&mut r)
    });
    Graph::new(
        spec.domain_id.clone(),
        features,
        edges,
        Some(labels.into_iter().map(Some).collect()),
        classes,
    )
}

/// Embedding stack whose layers hold Gaussian clusters around per-class
/// centres. `noise[l]` is the per-coordinate noise of layer `l`, relative to
/// unit-scale centres.
pub fn gaussian_cluster_stack(
    labels: &[usize],
    classes: usize,
    dim: usize,
    noise: &[f64],
    seed: u64,
) -> Result<EmbeddingStack> {
    let mut r = rng::rng_from_seed(seed);
    let layers = noise
        .iter()
        .map(|&sigma| {
            let centres = DenseMatrix::from_fn(classes, dim, |_, _| gaussian(&mut r));
            DenseMatrix::from_fn(labels.len(), dim, |i, j| centres.get(labels[i], j) + sigma * gaussian(&mut r))
        })
        .collect();
    EmbeddingStack::new(layers)
}

/// Multi-domain synthetic benchmark: source SBMs for pre-training and one
/// held-out target whose feature space, homophily and block sizes differ.
#[derive(Clone, Debug)]
pub struct SyntheticBenchmark {
    pub sources: Vec<Graph>,
    pub target: Graph,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkSpec {
    pub sources: Vec<SbmSpec>,
    pub target: SbmSpec,
}

impl BenchmarkSpec {
    /// Two homophilous 300-node source SBMs and a heterophilous 500-node,
    /// 3-class target with a different feature width and weaker features.
    pub fn standard(seed: u64) -> Self {
        let source = |id: &str, sizes: Vec<usize>, dim: usize, stream: u64| SbmSpec {
            domain_id: id.into(),
            block_sizes: sizes,
            p_in: 0.06,
            p_out: 0.006,
            feature_dim: dim,
            feature_signal: 1.0,
            feature_noise: 1.0,
            seed: rng::derive_seed(seed, stream),
        };
        Self {
            sources: vec![
                source("sbm-a", vec![100, 100, 100], 48, 1),
                source("sbm-b", vec![75, 75, 75, 75], 64, 2),
            ],
            target: SbmSpec {
                domain_id: "sbm-target".into(),
                block_sizes: vec![200, 170, 130],
                p_in: 0.006,
                p_out: 0.02,
                feature_dim: 40,
                feature_signal: 0.5,
                feature_noise: 1.0,
                seed: rng::derive_seed(seed, 3),
            },
        }
    }

    pub fn build(&self) -> Result<SyntheticBenchmark> {
        Ok(SyntheticBenchmark {
            sources: self.sources.iter().map(sbm_graph).collect::<Result<_>>()?,
            target: sbm_graph(&self.target)?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sbm_respects_block_structure() {
        let spec = SbmSpec {
            domain_id: "t".into(),
            block_sizes: vec![40, 60],
            p_in: 0.3,
            p_out: 0.0,
            feature_dim: 5,
            feature_signal: 1.0,
            feature_noise: 0.1,
            seed: 4,
        };
        let g = sbm_graph(&spec).unwrap();
        assert_eq!(g.num_nodes(), 100);
        assert_eq!(g.num_classes(), 2);
        assert!(g.edges().iter().all(|&(u, v)| g.label(u) == g.label(v)));
        assert!(g.num_edges() > 0);
        assert_eq!(g, sbm_graph(&spec).unwrap());
    }

    #[test]
    fn cluster_stack_shape() {
        let s = gaussian_cluster_stack(&[0, 1, 2, 0], 3, 6, &[0.1, 1.0], 2).unwrap();
        assert_eq!((s.depth(), s.num_nodes(), s.dim()), (2, 4, 6));
    }
}

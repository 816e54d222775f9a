use crate::error::{Error, Result};
use crate::graph::FewShotSplit;
use crate::linalg::DenseMatrix;
use crate::pretrain::EmbeddingStack;
use crate::prompt::{CentroidMatrix, Prompts};

/// Class centroids at every layer: the mean embedding of each class's
/// few-shot nodes.
pub fn init_centroids(stack: &EmbeddingStack, split: &FewShotSplit) -> Result<CentroidMatrix> {
    let (depth, dim) = (stack.depth(), stack.dim());
    let mut e = CentroidMatrix::zeros(depth, split.num_classes(), dim);
    for (c, ids) in split.shots.iter().enumerate() {
        if ids.is_empty() {
            return Err(Error::MissingClass(c));
        }
        if let Some(&bad) = ids.iter().find(|&&i| i >= stack.num_nodes()) {
            return Err(Error::Index {
                index: bad,
                num_nodes: stack.num_nodes(),
            });
        }
        let inv = 1.0 / ids.len() as f64;
        for l in 0..depth {
            let out = e.get_mut(l, c);
            for &i in ids {
                for (o, h) in out.iter_mut().zip(stack.embedding(l, i)) {
                    *o += h;
                }
            }
            out.iter_mut().for_each(|v| *v *= inv);
        }
    }
    Ok(e)
}

/// Refined centroids `ẽ = e + β`.
pub fn refine_centroids(e: &CentroidMatrix, prompts: &Prompts) -> Result<CentroidMatrix> {
    e.add(&prompts.beta)
}

/// Mean-pooled embeddings of node sets, one row per set at every layer.
pub fn subgraph_embed(stack: &EmbeddingStack, node_sets: &[Vec<usize>]) -> Result<EmbeddingStack> {
    for (s, set) in node_sets.iter().enumerate() {
        if set.is_empty() {
            return Err(Error::EmptySubgraph(s));
        }
        if let Some(&bad) = set.iter().find(|&&i| i >= stack.num_nodes()) {
            return Err(Error::Index {
                index: bad,
                num_nodes: stack.num_nodes(),
            });
        }
    }
    let layers = stack
        .layers()
        .iter()
        .map(|h| {
            let mut out = DenseMatrix::zeros(node_sets.len(), h.cols());
            for (s, set) in node_sets.iter().enumerate() {
                let row = out.row_mut(s);
                for &i in set {
                    for (o, v) in row.iter_mut().zip(h.row(i)) {
                        *o += v;
                    }
                }
                let inv = 1.0 / set.len() as f64;
                row.iter_mut().for_each(|v| *v *= inv);
            }
            out
        })
        .collect();
    EmbeddingStack::new(layers)
}

use crate::error::{Error, Result};
use crate::linalg::{argmax, cosine_unchecked, softmax_in_place, DenseMatrix};
use crate::pretrain::EmbeddingStack;
use crate::prompt::CentroidMatrix;

fn check_compatible(stack: &EmbeddingStack, e: &CentroidMatrix) -> Result<()> {
    if stack.depth() != e.depth() || stack.dim() != e.dim() {
        return Err(Error::Shape(format!(
            "stack of depth {} and width {} vs centroids {:?}",
            stack.depth(),
            stack.dim(),
            e.shape()
        )));
    }
    Ok(())
}

/// `(L+1) × C` cosine similarities between `node`'s embeddings and the
/// centroids of every layer.
pub fn layer_scores(stack: &EmbeddingStack, e: &CentroidMatrix, node: usize) -> Result<DenseMatrix> {
    check_compatible(stack, e)?;
    if node >= stack.num_nodes() {
        return Err(Error::Index {
            index: node,
            num_nodes: stack.num_nodes(),
        });
    }
    Ok(DenseMatrix::from_fn(e.depth(), e.classes(), |l, c| {
        cosine_unchecked(stack.embedding(l, node), e.get(l, c))
    }))
}

/// Ensemble class scores `Σ_l η^(l) sim(h_i^(l), ẽ_c^(l))` for one node.
fn ensemble_scores(stack: &EmbeddingStack, e: &CentroidMatrix, eta: &[f64], node: usize) -> Vec<f64> {
    let mut scores = vec![0.0; e.classes()];
    for (l, &w) in eta.iter().enumerate() {
        let h = stack.embedding(l, node);
        for (c, s) in scores.iter_mut().enumerate() {
            *s += w * cosine_unchecked(h, e.get(l, c));
        }
    }
    scores
}

/// Multi-layer ensemble prediction; the argmax of the softmax of the
/// ensemble scores, lowest class index on ties.
pub fn ensemble_predict(
    stack: &EmbeddingStack,
    e: &CentroidMatrix,
    eta: &[f64],
    nodes: &[usize],
) -> Result<Vec<usize>> {
    check_compatible(stack, e)?;
    if eta.len() != stack.depth() {
        return Err(Error::Shape(format!(
            "{} layer weights for a depth-{} stack",
            eta.len(),
            stack.depth()
        )));
    }
    nodes
        .iter()
        .map(|&i| {
            if i >= stack.num_nodes() {
                return Err(Error::Index {
                    index: i,
                    num_nodes: stack.num_nodes(),
                });
            }
            let mut scores = ensemble_scores(stack, e, eta, i);
            let raw = argmax(&scores);
            softmax_in_place(&mut scores, 1.0);
            let pred = argmax(&scores);
            // exp can merge nearly equal scores into a tie, never reorder them
            debug_assert!(pred == raw || scores[pred] == scores[raw]);
            Ok(pred)
        })
        .collect()
}

/// Same labels as [`ensemble_predict`] computed from the raw scores.
pub fn ensemble_predict_raw(
    stack: &EmbeddingStack,
    e: &CentroidMatrix,
    eta: &[f64],
    nodes: &[usize],
) -> Vec<usize> {
    nodes
        .iter()
        .map(|&i| argmax(&ensemble_scores(stack, e, eta, i)))
        .collect()
}

/// Fraction of `nodes` whose prediction matches `labels`; nodes without a
/// label are skipped. Returns 0 for an empty evaluation set.
pub fn accuracy(predictions: &[usize], nodes: &[usize], labels: &[Option<usize>]) -> f64 {
    let mut hit = 0usize;
    let mut total = 0usize;
    for (&p, &i) in predictions.iter().zip(nodes) {
        if let Some(y) = labels[i] {
            total += 1;
            hit += usize::from(p == y);
        }
    }
    if total == 0 {
        0.0
    } else {
        hit as f64 / total as f64
    }
}

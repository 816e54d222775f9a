use crate::error::{Error, Result};
use crate::linalg::{argmax, argmin, cosine_unchecked, entropy_unchecked, softmax_in_place};
use crate::pretrain::EmbeddingStack;
use crate::prompt::CentroidMatrix;

/// Complementary labels: for each test node, the class it is least similar
/// to at the pivot layer.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplementaryLabels {
    pub pivot_layer: usize,
    pub nodes: Vec<usize>,
    pub labels: Vec<usize>,
    /// Mean prediction entropy of the test nodes at every layer.
    pub per_layer_entropy: Vec<f64>,
}

fn similarities(stack: &EmbeddingStack, e: &CentroidMatrix, l: usize, node: usize) -> Vec<f64> {
    (0..e.classes())
        .map(|c| cosine_unchecked(stack.embedding(l, node), e.get(l, c)))
        .collect()
}

fn check(stack: &EmbeddingStack, e: &CentroidMatrix, nodes: &[usize]) -> Result<()> {
    if nodes.is_empty() {
        return Err(Error::EmptyInput("no test nodes to label".into()));
    }
    if stack.depth() != e.depth() || stack.dim() != e.dim() {
        return Err(Error::Shape("centroids do not match the embedding stack".into()));
    }
    if let Some(&bad) = nodes.iter().find(|&&i| i >= stack.num_nodes()) {
        return Err(Error::Index {
            index: bad,
            num_nodes: stack.num_nodes(),
        });
    }
    Ok(())
}

/// Selects the pivot layer with the lowest mean entropy of
/// `softmax_c(sim(h_i, e_c))` over the test nodes (temperature 1, unrefined
/// centroids, no layer weights) and labels every node with its least
/// similar class there. Ties resolve to the lowest index.
pub fn compute_complementary_labels(
    stack: &EmbeddingStack,
    e: &CentroidMatrix,
    test_ids: &[usize],
) -> Result<ComplementaryLabels> {
    check(stack, e, test_ids)?;
    let per_layer_entropy: Vec<f64> = (0..stack.depth())
        .map(|l| {
            let total: f64 = test_ids
                .iter()
                .map(|&i| {
                    let mut p = similarities(stack, e, l, i);
                    softmax_in_place(&mut p, 1.0);
                    entropy_unchecked(&p)
                })
                .sum();
            total / test_ids.len() as f64
        })
        .collect();
    let pivot_layer = argmin(&per_layer_entropy);
    Ok(ComplementaryLabels {
        pivot_layer,
        nodes: test_ids.to_vec(),
        labels: least_similar(stack, e, pivot_layer, test_ids),
        per_layer_entropy,
    })
}

/// Least similar class at a fixed layer.
pub fn least_similar(stack: &EmbeddingStack, e: &CentroidMatrix, layer: usize, nodes: &[usize]) -> Vec<usize> {
    nodes
        .iter()
        .map(|&i| argmin(&similarities(stack, e, layer, i)))
        .collect()
}

/// Pseudo labels: the most similar class at the last layer.
pub fn pseudo_labels(stack: &EmbeddingStack, e: &CentroidMatrix, nodes: &[usize]) -> Result<Vec<usize>> {
    check(stack, e, nodes)?;
    let last = stack.depth() - 1;
    Ok(nodes
        .iter()
        .map(|&i| argmax(&similarities(stack, e, last, i)))
        .collect())
}

/// Fraction of complementary labels that differ from the true label; nodes
/// without ground truth are skipped.
pub fn complementary_correctness(nodes: &[usize], labels: &[usize], truth: &[Option<usize>]) -> f64 {
    let mut ok = 0usize;
    let mut total = 0usize;
    for (&i, &y_bar) in nodes.iter().zip(labels) {
        if let Some(y) = truth[i] {
            total += 1;
            ok += usize::from(y != y_bar);
        }
    }
    if total == 0 {
        0.0
    } else {
        ok as f64 / total as f64
    }
}

use std::collections::HashSet;

use rand::seq::{index, SliceRandom};
use rand::Rng as _;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::rng;

/// `⌈ratio·n⌉`, treating products within 1e-9 of an integer as exact.
pub fn ceil_count(ratio: f64, n: usize) -> usize {
    let x = ratio * n as f64;
    let r = x.round();
    let k = if (x - r).abs() < 1e-9 { r } else { x.ceil() };
    (k.max(0.0) as usize).min(n)
}

fn check_ratio(ratio: f64) -> Result<()> {
    if (0.0..=1.0).contains(&ratio) {
        Ok(())
    } else {
        Err(Error::Config(format!("ratio {ratio} is outside [0, 1]")))
    }
}

/// Picks `⌈ratio·|test_ids|⌉` test nodes and permutes their feature rows
/// among themselves. Returns the perturbed graph and the chosen nodes.
pub fn shuffle_test_features(
    g: &Graph,
    test_ids: &[usize],
    ratio: f64,
    seed: u64,
) -> Result<(Graph, Vec<usize>)> {
    check_ratio(ratio)?;
    let k = ceil_count(ratio, test_ids.len());
    let mut rng = rng::rng_from_seed(seed);
    let mut chosen: Vec<usize> = index::sample(&mut rng, test_ids.len(), k)
        .into_iter()
        .map(|i| test_ids[i])
        .collect();
    chosen.sort_unstable();
    let mut sources = chosen.clone();
    sources.shuffle(&mut rng);
    let mut features = g.features().clone();
    for (&dst, &src) in chosen.iter().zip(&sources) {
        features.row_mut(dst).copy_from_slice(g.features().row(src));
    }
    Ok((g.with_features(features)?, chosen))
}

/// Feature-shuffling perturbation of the test nodes.
pub fn perturb_features(g: &Graph, test_ids: &[usize], ratio: f64, seed: u64) -> Result<Graph> {
    shuffle_test_features(g, test_ids, ratio, seed).map(|(g, _)| g)
}

/// Drops each edge touching a test node independently with probability
/// `ratio`.
pub fn perturb_edges(g: &Graph, test_ids: &[usize], ratio: f64, seed: u64) -> Result<Graph> {
    check_ratio(ratio)?;
    let test: HashSet<usize> = test_ids.iter().copied().collect();
    let mut rng = rng::rng_from_seed(seed);
    let kept = g
        .edges()
        .iter()
        .copied()
        .filter(|(u, v)| {
            if test.contains(u) || test.contains(v) {
                rng.random::<f64>() >= ratio
            } else {
                true
            }
        })
        .collect();
    Ok(g.with_edge_subset(kept))
}

/// Relabels the graph as binary: classes in `group_a` become 0, the rest 1.
pub fn merge_classes(g: &Graph, group_a: &[usize]) -> Result<Graph> {
    let group: HashSet<usize> = group_a.iter().copied().collect();
    if group.is_empty() {
        return Err(Error::InvalidGrouping("group is empty".into()));
    }
    if let Some(c) = group.iter().find(|&&c| c >= g.num_classes()) {
        return Err(Error::InvalidGrouping(format!("class {c} does not exist")));
    }
    if group.len() == g.num_classes() {
        return Err(Error::InvalidGrouping("group covers every class".into()));
    }
    let labels = g
        .labels()
        .ok_or_else(|| Error::InvalidGrouping("graph has no labels".into()))?
        .iter()
        .map(|l| l.map(|c| usize::from(!group.contains(&c))))
        .collect();
    g.with_labels(labels, 2)
}

/// `size` distinct classes drawn uniformly, sorted.
pub fn random_class_group(num_classes: usize, size: usize, seed: u64) -> Vec<usize> {
    let mut rng = rng::rng_from_seed(seed);
    let mut group = index::sample(&mut rng, num_classes, size.min(num_classes)).into_vec();
    group.sort_unstable();
    group
}

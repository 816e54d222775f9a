#![allow(dead_code)]

use gfmate_core::graph::FewShotSplit;
use gfmate_core::linalg::DenseMatrix;
use gfmate_core::pretrain::EmbeddingStack;
use gfmate_core::prompt::{CentroidMatrix, Prompts};
use gfmate_core::rng::{self, Rng};
use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};

pub fn normal(r: &mut Rng) -> f64 {
    StandardNormal.sample(r)
}

pub fn random_matrix(rows: usize, cols: usize, r: &mut Rng) -> DenseMatrix {
    DenseMatrix::from_fn(rows, cols, |_, _| normal(r))
}

pub fn random_stack(n: usize, depth: usize, dim: usize, seed: u64) -> EmbeddingStack {
    let mut r = rng::rng_from_seed(seed);
    EmbeddingStack::new((0..depth).map(|_| random_matrix(n, dim, &mut r)).collect()).unwrap()
}

/// Nodes `0..C` are the shots of classes `0..C`; everything else is test.
pub fn one_shot_split(n: usize, classes: usize) -> FewShotSplit {
    FewShotSplit {
        shots: (0..classes).map(|c| vec![c]).collect(),
        val_ids: Vec::new(),
        test_ids: (classes..n).collect(),
        m: 1,
        seed: 0,
    }
}

pub fn random_prompts(depth: usize, classes: usize, dim: usize, seed: u64) -> Prompts {
    let mut r = rng::rng_from_seed(seed);
    let mut beta = CentroidMatrix::zeros(depth, classes, dim);
    beta.as_mut_slice().iter_mut().for_each(|v| *v = 0.3 * normal(&mut r));
    let eta = (0..depth).map(|_| r.random_range(0.5..2.0)).collect();
    Prompts::new(beta, eta).unwrap()
}

/// Ground-truth labels cycling through the classes.
pub fn cyclic_labels(n: usize, classes: usize) -> Vec<usize> {
    (0..n).map(|i| i % classes).collect()
}

/// `‖a - b‖∞ / max(‖a‖∞, ‖b‖∞)`, or the absolute error when both vanish.
pub fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let diff = a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let scale = a.iter().chain(b).map(|x| x.abs()).fold(0.0, f64::max);
    if scale < 1e-12 {
        diff
    } else {
        diff / scale
    }
}

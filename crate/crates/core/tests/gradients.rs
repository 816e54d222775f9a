//! Analytic gradients against central finite differences.

mod common;

use common::*;
use gfmate_core::graph::{normalize_adjacency, Graph};
use gfmate_core::linalg::DenseMatrix;
use gfmate_core::pretrain::{gcn_backward, gcn_forward_cached, link_pred_loss, GcnParams};
use gfmate_core::prompt::{
    build_supervision, init_centroids, tgcl_loss, tgcl_objective, LayerMode, Prompts, TgclMode, TuneConfig,
};
use gfmate_core::rng;
use rand::Rng as _;

const STEP: f64 = 1e-5;

fn central(f: impl Fn(f64) -> f64, x: f64) -> f64 {
    (f(x + STEP) - f(x - STEP)) / (2.0 * STEP)
}

fn tgcl_instance(seed: u64, mode: TgclMode) -> f64 {
    let (n, classes, depth, dim) = (20, 3, 3, 8);
    let stack = random_stack(n, depth, dim, seed);
    let split = one_shot_split(n, classes);
    let mut r = rng::stream(seed, 9);
    let cfg = TuneConfig {
        gamma: r.random_range(0.1..0.9),
        tau: r.random_range(0.3..1.5),
        tgcl_mode: mode,
        ..Default::default()
    };
    let e = init_centroids(&stack, &split).unwrap();
    let sup = build_supervision(&stack, &e, &split, &cfg).unwrap();
    let prompts = random_prompts(depth, classes, dim, seed ^ 0xabc);
    let obj = tgcl_objective(&stack, &e, &prompts, &split, &sup, &cfg).unwrap();

    let loss_at = |p: &Prompts| tgcl_loss(&stack, &e, p, &split, &sup, &cfg).unwrap();
    let fd_beta: Vec<f64> = (0..prompts.beta.as_slice().len())
        .map(|k| {
            central(
                |v| {
                    let mut p = prompts.clone();
                    p.beta.as_mut_slice()[k] = v;
                    loss_at(&p)
                },
                prompts.beta.as_slice()[k],
            )
        })
        .collect();
    let fd_eta: Vec<f64> = (0..depth)
        .map(|k| {
            central(
                |v| {
                    let mut p = prompts.clone();
                    p.eta[k] = v;
                    loss_at(&p)
                },
                prompts.eta[k],
            )
        })
        .collect();
    rel_err(obj.grad_beta.as_slice(), &fd_beta).max(rel_err(&obj.grad_eta, &fd_eta))
}

#[test]
fn tgcl_gradients_match_finite_differences() {
    let worst = (0..50).map(|s| tgcl_instance(s, TgclMode::Complementary)).fold(0.0, f64::max);
    assert!(worst <= 1e-5, "max relative error {worst:e}");
}

#[test]
fn pseudo_and_few_shot_gradients_match_finite_differences() {
    for mode in [TgclMode::Pseudo, TgclMode::FewShotOnly] {
        let worst = (100..120).map(|s| tgcl_instance(s, mode)).fold(0.0, f64::max);
        assert!(worst <= 1e-5, "{mode:?}: max relative error {worst:e}");
    }
}

#[test]
fn frozen_layer_mode_has_zero_eta_gradient() {
    let stack = random_stack(20, 3, 8, 4);
    let split = one_shot_split(20, 3);
    let cfg = TuneConfig {
        layer_mode: LayerMode::FrozenUniform,
        ..Default::default()
    };
    let e = init_centroids(&stack, &split).unwrap();
    let sup = build_supervision(&stack, &e, &split, &cfg).unwrap();
    let p = random_prompts(3, 3, 8, 5);
    let obj = tgcl_objective(&stack, &e, &p, &split, &sup, &cfg).unwrap();
    assert_eq!(obj.grad_eta, vec![0.0; 3]);
    assert!(obj.grad_beta.as_slice().iter().any(|g| *g != 0.0));
}

#[test]
fn small_step_never_increases_tgcl_loss() {
    for seed in 0..100 {
        let stack = random_stack(20, 3, 8, 1000 + seed);
        let split = one_shot_split(20, 3);
        let cfg = TuneConfig::default();
        let e = init_centroids(&stack, &split).unwrap();
        let sup = build_supervision(&stack, &e, &split, &cfg).unwrap();
        let p = random_prompts(3, 3, 8, seed);
        let obj = tgcl_objective(&stack, &e, &p, &split, &sup, &cfg).unwrap();
        let mut q = p.clone();
        for (b, g) in q.beta.as_mut_slice().iter_mut().zip(obj.grad_beta.as_slice()) {
            *b -= 1e-4 * g;
        }
        for (w, g) in q.eta.iter_mut().zip(&obj.grad_eta) {
            *w -= 1e-4 * g;
        }
        let after = tgcl_loss(&stack, &e, &q, &split, &sup, &cfg).unwrap();
        assert!(after <= obj.loss_tgcl, "seed {seed}: {} -> {after}", obj.loss_tgcl);
    }
}

fn small_graph(n: usize, seed: u64) -> Graph {
    let mut r = rng::rng_from_seed(seed);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            if r.random::<f64>() < 0.25 {
                edges.push((u, v));
            }
        }
    }
    Graph::new("fd", DenseMatrix::zeros(n, 1), edges, None, 0).unwrap()
}

#[test]
fn gcn_backprop_matches_finite_differences() {
    let (n, dim) = (12, 5);
    for seed in 0..5 {
        let g = small_graph(n, seed);
        let adj = normalize_adjacency(&g);
        let mut r = rng::stream(seed, 3);
        let x = random_matrix(n, dim, &mut r);
        let params = GcnParams::xavier(2, dim, seed).unwrap();
        // random linear read-out of the final layer
        let c = random_matrix(n, dim, &mut r);
        let objective = |p: &GcnParams| {
            let (s, _) = gcn_forward_cached(p, &adj, &x).unwrap();
            s.layer(2).as_slice().iter().zip(c.as_slice()).map(|(a, b)| a * b).sum::<f64>()
        };
        let (_, cache) = gcn_forward_cached(&params, &adj, &x).unwrap();
        let grads = gcn_backward(&params, &adj, &cache, &c).unwrap();
        for (l, gw) in grads.iter().enumerate() {
            let fd: Vec<f64> = (0..dim * dim)
                .map(|k| {
                    central(
                        |v| {
                            let mut w: Vec<DenseMatrix> = params.weights().to_vec();
                            w[l].as_mut_slice()[k] = v;
                            objective(&GcnParams::new(w).unwrap())
                        },
                        params.weights()[l].as_slice()[k],
                    )
                })
                .collect();
            let err = rel_err(gw.as_slice(), &fd);
            assert!(err <= 1e-5, "seed {seed} layer {l}: {err:e}");
        }
    }
}

#[test]
fn link_loss_gradient_matches_finite_differences() {
    let mut r = rng::rng_from_seed(77);
    let h = random_matrix(10, 4, &mut r);
    let pos = [(0, 1), (2, 3), (4, 5), (1, 7)];
    let neg = [(0, 9), (3, 8), (6, 6)];
    let (_, grad) = link_pred_loss(&h, &pos, &neg).unwrap();
    let fd: Vec<f64> = (0..h.as_slice().len())
        .map(|k| {
            central(
                |v| {
                    let mut hh = h.clone();
                    hh.as_mut_slice()[k] = v;
                    link_pred_loss(&hh, &pos, &neg).unwrap().0
                },
                h.as_slice()[k],
            )
        })
        .collect();
    let err = rel_err(grad.as_slice(), &fd);
    assert!(err <= 1e-6, "{err:e}");
}

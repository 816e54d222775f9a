//! Graph construction, normalization, splitting and perturbation properties.

mod common;

use common::*;
use gfmate_core::graph::*;
use gfmate_core::linalg::{spmm, DenseMatrix};
use gfmate_core::rng;
use gfmate_core::synth::{sbm_graph, SbmSpec};
use proptest::prelude::*;
use rand::Rng as _;

fn random_graph(n: usize, p: f64, classes: usize, seed: u64) -> Graph {
    let mut r = rng::rng_from_seed(seed);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            if r.random::<f64>() < p {
                edges.push((u, v));
            }
        }
    }
    let x = random_matrix(n, 4, &mut r);
    let labels = (0..n).map(|i| Some(i % classes)).collect();
    Graph::new("g", x, edges, Some(labels), classes).unwrap()
}

#[test]
fn edge_drop_count_is_binomial() {
    let g = random_graph(60, 0.2, 3, 1);
    let test: Vec<usize> = (0..30).collect();
    let touching = g.edges().iter().filter(|(u, v)| *u < 30 || *v < 30).count();
    let ratio = 0.3;
    let mut total = 0usize;
    let runs = 1000;
    for seed in 0..runs {
        let h = perturb_edges(&g, &test, ratio, seed).unwrap();
        // edges between non-test nodes are untouched
        let far = |g: &Graph| g.edges().iter().filter(|(u, v)| *u >= 30 && *v >= 30).count();
        assert_eq!(far(&h), far(&g));
        total += g.num_edges() - h.num_edges();
    }
    let n = (touching * runs as usize) as f64;
    let mean = n * ratio;
    let sd = (n * ratio * (1.0 - ratio)).sqrt();
    assert!((total as f64 - mean).abs() <= 3.0 * sd, "dropped {total}, expected {mean} ± {sd}");
}

#[test]
fn edge_drop_endpoints() {
    let g = random_graph(40, 0.2, 2, 3);
    let test: Vec<usize> = (0..40).collect();
    assert_eq!(perturb_edges(&g, &test, 0.0, 1).unwrap().edges(), g.edges());
    assert_eq!(perturb_edges(&g, &test, 1.0, 1).unwrap().num_edges(), 0);
}

#[test]
fn feature_shuffle_permutes_rows_among_chosen_nodes() {
    let g = random_graph(50, 0.1, 2, 4);
    let test: Vec<usize> = (10..50).collect();
    let (h, chosen) = shuffle_test_features(&g, &test, 0.5, 9).unwrap();
    assert_eq!(chosen.len(), 20);
    let key = |row: &[f64]| row.iter().map(|v| v.to_bits()).collect::<Vec<_>>();
    let mut before: Vec<_> = chosen.iter().map(|&i| key(g.features().row(i))).collect();
    let mut after: Vec<_> = chosen.iter().map(|&i| key(h.features().row(i))).collect();
    before.sort();
    after.sort();
    assert_eq!(before, after);
    for i in (0..50).filter(|i| !chosen.contains(i)) {
        assert_eq!(g.features().row(i), h.features().row(i));
    }
    assert_eq!(perturb_features(&g, &test, 0.0, 9).unwrap().features(), g.features());
}

#[test]
fn class_merge_is_binary_and_keeps_everything_else() {
    let g = random_graph(30, 0.2, 5, 2);
    let m = merge_classes(&g, &[1, 3]).unwrap();
    assert_eq!(m.num_classes(), 2);
    for i in 0..30 {
        let y = g.label(i).unwrap();
        assert_eq!(m.label(i), Some(usize::from(!(y == 1 || y == 3))));
    }
    assert_eq!(m.edges(), g.edges());
    assert!(merge_classes(&g, &[]).is_err());
    assert!(merge_classes(&g, &[0, 1, 2, 3, 4]).is_err());
}

#[test]
fn sbm_edge_density_matches_block_probabilities() {
    let spec = SbmSpec {
        domain_id: "s".into(),
        block_sizes: vec![150, 150],
        p_in: 0.1,
        p_out: 0.02,
        feature_dim: 4,
        feature_signal: 1.0,
        feature_noise: 1.0,
        seed: 5,
    };
    let g = sbm_graph(&spec).unwrap();
    let (mut within, mut across) = (0usize, 0usize);
    for &(u, v) in g.edges() {
        if g.label(u) == g.label(v) {
            within += 1
        } else {
            across += 1
        }
    }
    let pairs_in = 2.0 * 150.0 * 149.0 / 2.0;
    let pairs_out = 150.0 * 150.0;
    let check = |count: usize, pairs: f64, p: f64| {
        let sd = (pairs * p * (1.0 - p)).sqrt();
        assert!((count as f64 - pairs * p).abs() <= 4.0 * sd, "{count} vs {}", pairs * p);
    };
    check(within, pairs_in, 0.1);
    check(across, pairs_out, 0.02);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn normalized_adjacency_is_symmetric_with_degree_fixed_point(n in 1usize..40, p in 0.0f64..0.5, seed in any::<u64>()) {
        let g = random_graph(n, p, 1, seed);
        let a = normalize_adjacency(&g);
        let d = a.to_dense();
        for i in 0..n {
            for j in 0..n {
                prop_assert_eq!(d.get(i, j).to_bits(), d.get(j, i).to_bits());
            }
            prop_assert!(d.get(i, i) > 0.0);
        }
        // Â D̃^{1/2} 1 = D̃^{1/2} 1: the degree vector is a fixed point
        let deg: Vec<f64> = g.adjacency_lists().iter().map(|nb| ((nb.len() + 1) as f64).sqrt()).collect();
        let v = DenseMatrix::from_vec(n, 1, deg.clone()).unwrap();
        let av = spmm(&a, &v).unwrap();
        for i in 0..n {
            prop_assert!((av.get(i, 0) - deg[i]).abs() <= 1e-12 * deg[i].max(1.0) * 8.0);
        }
    }

    #[test]
    fn splits_partition_labelled_nodes(n in 30usize..120, m in 1usize..5, seed in any::<u64>()) {
        let g = random_graph(n, 0.05, 3, seed);
        let s = sample_few_shot_split(&g, m, seed).unwrap();
        let mut all: Vec<usize> = s.shots.iter().flatten().copied().chain(s.val_ids.iter().copied()).chain(s.test_ids.iter().copied()).collect();
        all.sort_unstable();
        prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
        for (c, ids) in s.shots.iter().enumerate() {
            prop_assert_eq!(ids.len(), m);
            prop_assert!(ids.iter().all(|&i| g.label(i) == Some(c)));
        }
        prop_assert_eq!(s.val_ids.len(), (n - 3 * m) / 10);
        prop_assert_eq!(&sample_few_shot_split(&g, m, seed).unwrap(), &s);
    }

    #[test]
    fn graph_edges_are_canonical(n in 2usize..30, raw in prop::collection::vec((0usize..30, 0usize..30), 0..80)) {
        let edges: Vec<(usize, usize)> = raw.into_iter().map(|(u, v)| (u % n, v % n)).collect();
        let g = Graph::new("c", DenseMatrix::zeros(n, 1), edges.clone(), None, 0).unwrap();
        prop_assert!(g.edges().windows(2).all(|w| w[0] < w[1]));
        prop_assert!(g.edges().iter().all(|(u, v)| u < v));
        for (u, v) in edges.into_iter().filter(|(u, v)| u != v) {
            prop_assert!(g.edges().binary_search(&(u.min(v), u.max(v))).is_ok());
        }
    }
}

//! End-to-end pre-training on synthetic block models.

use gfmate_core::pretrain::{encode_graph, pretrain, svd_align, AlignConfig, GcnParams, PretrainConfig};
use gfmate_core::synth::BenchmarkSpec;

fn sources(dim: usize) -> Vec<gfmate_core::graph::Graph> {
    let bench = BenchmarkSpec::standard(0).build().unwrap();
    svd_align(&bench.sources, &AlignConfig { dim, row_normalize: true, seed: 0 }).unwrap()
}

#[test]
fn link_loss_decreases_over_training() {
    let cfg = PretrainConfig {
        hidden_dim: 16,
        epochs: 200,
        batch_edges: 256,
        lr: 0.05,
        ..Default::default()
    };
    let out = pretrain(&sources(16), &cfg).unwrap();
    assert_eq!(out.loss_trace.len(), 200);
    let head: f64 = out.loss_trace[..10].iter().sum::<f64>() / 10.0;
    let tail: f64 = out.loss_trace[190..].iter().sum::<f64>() / 10.0;
    assert!(tail < head, "{head} -> {tail}");
    assert!(out.params.weights().iter().all(|w| w.is_finite()));
}

#[test]
fn pretraining_is_seed_deterministic() {
    let cfg = PretrainConfig {
        hidden_dim: 8,
        epochs: 5,
        ..Default::default()
    };
    let g = sources(8);
    let a = pretrain(&g, &cfg).unwrap();
    let b = pretrain(&g, &cfg).unwrap();
    assert_eq!(a.params.to_bytes(), b.params.to_bytes());
    assert_eq!(a.loss_trace, b.loss_trace);
    let c = pretrain(&g, &PretrainConfig { seed: 1, ..cfg }).unwrap();
    assert_ne!(a.params.to_bytes(), c.params.to_bytes());
}

#[test]
fn saved_encoder_reproduces_embeddings_bitwise() {
    let cfg = PretrainConfig {
        hidden_dim: 8,
        epochs: 3,
        ..Default::default()
    };
    let g = sources(8);
    let out = pretrain(&g, &cfg).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("enc.bin");
    out.params.save(&path).unwrap();
    let back = GcnParams::load(&path).unwrap();
    let a = encode_graph(&out.params, &g[0]).unwrap();
    let b = encode_graph(&back, &g[0]).unwrap();
    for l in 0..a.depth() {
        let bits = |m: &gfmate_core::linalg::DenseMatrix| m.as_slice().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(a.layer(l)), bits(b.layer(l)));
    }
}

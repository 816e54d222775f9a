use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::linalg::{truncated_svd, DenseMatrix};
use crate::rng;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlignConfig {
    /// Unified feature width.
    pub dim: usize,
    /// L2-normalise every aligned row.
    pub row_normalize: bool,
    pub seed: u64,
}

impl Default for AlignConfig {
    fn default() -> Self {
        Self {
            dim: 256,
            row_normalize: true,
            seed: 0,
        }
    }
}

/// Projects every domain's features onto its own top singular directions,
/// `X' = U_k S_k`, giving all domains width `cfg.dim`. Domains with fewer
/// than `dim` usable directions are right-padded with zero columns.
pub fn svd_align(graphs: &[Graph], cfg: &AlignConfig) -> Result<Vec<Graph>> {
    if graphs.is_empty() {
        return Err(Error::EmptyInput("no graphs to align".into()));
    }
    if cfg.dim == 0 {
        return Err(Error::Config("aligned dimension must be at least 1".into()));
    }
    graphs
        .iter()
        .enumerate()
        .map(|(i, g)| {
            let x = align_features(g.features(), cfg.dim, rng::derive_seed(cfg.seed, i as u64))?;
            let x = if cfg.row_normalize { normalize_rows(x) } else { x };
            g.with_features(x)
        })
        .collect()
}

fn align_features(x: &DenseMatrix, dim: usize, seed: u64) -> Result<DenseMatrix> {
    let (n, d_raw) = x.shape();
    let k = dim.min(n).min(d_raw);
    let mut out = DenseMatrix::zeros(n, dim);
    if k == 0 {
        return Ok(out);
    }
    let svd = truncated_svd(x, k, seed)?;
    for i in 0..n {
        let row = out.row_mut(i);
        for (j, s) in svd.s.iter().enumerate() {
            row[j] = svd.u.get(i, j) * s;
        }
    }
    Ok(out)
}

fn normalize_rows(mut x: DenseMatrix) -> DenseMatrix {
    for i in 0..x.rows() {
        let row = x.row_mut(i);
        let n = crate::linalg::dense::norm(row);
        if n > 0.0 {
            row.iter_mut().for_each(|v| *v /= n);
        }
    }
    x
}

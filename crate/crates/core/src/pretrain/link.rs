use crate::error::{Error, Result};
use crate::linalg::dense::{axpy, dot};
use crate::linalg::DenseMatrix;

/// `ln(1 + e^x)` without overflow.
fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Mean binary cross-entropy of `σ(h_u · h_v)` against 1 for `pos` pairs and
/// 0 for `neg` pairs, with its exact gradient with respect to `h`.
pub fn link_pred_loss(
    h: &DenseMatrix,
    pos: &[(usize, usize)],
    neg: &[(usize, usize)],
) -> Result<(f64, DenseMatrix)> {
    let total = pos.len() + neg.len();
    if total == 0 {
        return Err(Error::EmptyInput("no link samples in batch".into()));
    }
    if let Some(&(u, v)) = pos.iter().chain(neg).find(|(u, v)| *u >= h.rows() || *v >= h.rows()) {
        return Err(Error::Index {
            index: u.max(v),
            num_nodes: h.rows(),
        });
    }
    let inv = 1.0 / total as f64;
    let mut loss = 0.0;
    let mut grad = DenseMatrix::zeros(h.rows(), h.cols());
    let samples = pos.iter().map(|e| (e, 1.0)).chain(neg.iter().map(|e| (e, 0.0)));
    for (&(u, v), y) in samples {
        let s = dot(h.row(u), h.row(v));
        loss += if y > 0.5 { softplus(-s) } else { softplus(s) };
        let g = (sigmoid(s) - y) * inv;
        let hv = h.row(v).to_vec();
        let hu = h.row(u).to_vec();
        axpy(g, &hv, grad.row_mut(u));
        axpy(g, &hu, grad.row_mut(v));
    }
    Ok((loss * inv, grad))
}

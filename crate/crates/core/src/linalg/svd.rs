//! Truncated SVD by randomized subspace iteration, with a one-sided Jacobi
//! SVD for small dense problems.

use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::dense::{axpy, dot, norm};
use crate::linalg::DenseMatrix;
use crate::rng;

/// Extra sketch columns beyond the target rank.
pub const OVERSAMPLES: usize = 10;
/// Power iterations applied to the range sketch.
pub const POWER_ITERS: usize = 4;

const JACOBI_MAX_SWEEPS: usize = 80;

/// Thin singular value decomposition `x ≈ u · diag(s) · vt`.
#[derive(Clone, Debug)]
pub struct Svd {
    pub u: DenseMatrix,
    pub s: Vec<f64>,
    pub vt: DenseMatrix,
}

impl Svd {
    pub fn rank(&self) -> usize {
        self.s.len()
    }

    pub fn reconstruct(&self) -> DenseMatrix {
        let mut us = self.u.clone();
        for i in 0..us.rows() {
            for (v, s) in us.row_mut(i).iter_mut().zip(&self.s) {
                *v *= s;
            }
        }
        us.matmul(&self.vt).expect("svd factors are conformant")
    }
}

/// Rank-`k` SVD of `x` by randomized subspace iteration.
///
/// The sketch has `min(k + OVERSAMPLES, min(rows, cols))` Gaussian columns and
/// is refined with [`POWER_ITERS`] QR-stabilised power iterations; the small
/// projected problem is solved exactly with [`jacobi_svd`].
pub fn truncated_svd(x: &DenseMatrix, k: usize, seed: u64) -> Result<Svd> {
    let (n, d) = x.shape();
    if k == 0 || k > n.min(d) {
        return Err(Error::InvalidRank(k));
    }
    let width = (k + OVERSAMPLES).min(n.min(d));
    let mut rng = rng::rng_from_seed(seed);
    let omega = DenseMatrix::from_fn(d, width, |_, _| StandardNormal.sample(&mut rng));

    let mut q = orthonormal_basis(&x.matmul(&omega)?);
    for _ in 0..POWER_ITERS {
        let z = orthonormal_basis(&x.t_matmul(&q)?);
        q = orthonormal_basis(&x.matmul(&z)?);
    }
    let b = q.t_matmul(x)?;
    let small = jacobi_svd(&b);
    let u = q.matmul(&small.u.leading_columns(k))?;
    Ok(Svd {
        u,
        s: small.s[..k].to_vec(),
        vt: small.vt.leading_rows(k),
    })
}

/// Orthonormal basis for the column space of `a` (rows ≥ cols), via
/// Householder QR. Returns the thin `Q` factor with the same shape as `a`.
pub fn orthonormal_basis(a: &DenseMatrix) -> DenseMatrix {
    let (m, n) = a.shape();
    assert!(m >= n, "orthonormal_basis needs a tall matrix, got {m}x{n}");
    // Work column-major: reflect columns stored as contiguous rows.
    let mut r = a.transpose();
    let mut reflectors: Vec<Vec<f64>> = Vec::with_capacity(n);
    for j in 0..n {
        let col = &mut r.row_mut(j)[j..];
        let alpha = norm(col);
        let mut v = col.to_vec();
        if alpha == 0.0 {
            reflectors.push(Vec::new());
            continue;
        }
        let sign = if v[0] >= 0.0 { 1.0 } else { -1.0 };
        v[0] += sign * alpha;
        let vnorm = norm(&v);
        v.iter_mut().for_each(|x| *x /= vnorm);
        for c in j..n {
            let tail = &mut r.row_mut(c)[j..];
            let proj = 2.0 * dot(&v, tail);
            axpy(-proj, &v, tail);
        }
        reflectors.push(v);
    }
    // Q = H_0 H_1 ... H_{n-1} applied to the first n unit vectors.
    let mut qt = DenseMatrix::zeros(n, m);
    for c in 0..n {
        let col = qt.row_mut(c);
        col[c] = 1.0;
        for j in (0..n).rev() {
            let v = &reflectors[j];
            if v.is_empty() {
                continue;
            }
            let tail = &mut col[j..];
            let proj = 2.0 * dot(v, tail);
            axpy(-proj, v, tail);
        }
    }
    qt.transpose()
}

/// Full thin SVD by one-sided (Hestenes) Jacobi rotations.
///
/// Accurate to working precision; cost grows cubically, so it is meant for
/// matrices up to a few hundred on the short side. Singular values are
/// returned in non-increasing order, `r = min(rows, cols)` of them.
pub fn jacobi_svd(a: &DenseMatrix) -> Svd {
    let (m, n) = a.shape();
    if m < n {
        let t = jacobi_svd(&a.transpose());
        return Svd {
            u: t.vt.transpose(),
            s: t.s,
            vt: t.u.transpose(),
        };
    }
    // Columns of `a` as contiguous rows; `v` accumulates the rotations.
    let mut cols = a.transpose();
    let mut v = DenseMatrix::identity(n);
    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let (alpha, beta, gamma) = {
                    let cp = cols.row(p);
                    let cq = cols.row(q);
                    (dot(cp, cp), dot(cq, cq), dot(cp, cq))
                };
                if gamma == 0.0 || gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate_rows(&mut cols, p, q, c, s);
                rotate_rows(&mut v, p, q, c, s);
            }
        }
        if !rotated {
            break;
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let sig: Vec<f64> = (0..n).map(|j| norm(cols.row(j))).collect();
    order.sort_by(|&i, &j| sig[j].total_cmp(&sig[i]).then(i.cmp(&j)));

    let smax = sig.iter().cloned().fold(0.0, f64::max);
    let tiny = smax * f64::EPSILON * (m.max(n) as f64);
    let mut ut = DenseMatrix::zeros(n, m);
    let mut vt = DenseMatrix::zeros(n, n);
    let mut s = Vec::with_capacity(n);
    let mut null_dirs = Vec::new();
    for (out, &j) in order.iter().enumerate() {
        s.push(sig[j]);
        vt.row_mut(out).copy_from_slice(v.row(j));
        if sig[j] > tiny && sig[j] > 0.0 {
            let inv = 1.0 / sig[j];
            for (dst, src) in ut.row_mut(out).iter_mut().zip(cols.row(j)) {
                *dst = src * inv;
            }
        } else {
            null_dirs.push(out);
        }
    }
    complete_basis(&mut ut, &null_dirs);
    Svd {
        u: ut.transpose(),
        s,
        vt,
    }
}

fn rotate_rows(m: &mut DenseMatrix, p: usize, q: usize, c: f64, s: f64) {
    let cols = m.cols();
    let data = m.as_mut_slice();
    let (head, tail) = data.split_at_mut(q * cols);
    let rp = &mut head[p * cols..(p + 1) * cols];
    let rq = &mut tail[..cols];
    for (x, y) in rp.iter_mut().zip(rq.iter_mut()) {
        let (xp, yq) = (*x, *y);
        *x = c * xp - s * yq;
        *y = s * xp + c * yq;
    }
}

/// Fills the listed rows of `basis` with unit vectors orthogonal to every
/// other row (Gram-Schmidt against the standard basis).
fn complete_basis(basis: &mut DenseMatrix, missing: &[usize]) {
    let m = basis.cols();
    let mut filled: Vec<usize> = (0..basis.rows()).filter(|r| !missing.contains(r)).collect();
    let mut candidate = 0;
    for &row in missing {
        loop {
            assert!(candidate < m, "cannot complete an orthonormal basis");
            let mut e = vec![0.0; m];
            e[candidate] = 1.0;
            candidate += 1;
            for _ in 0..2 {
                for &f in &filled {
                    let b = basis.row(f);
                    let p = dot(b, &e);
                    axpy(-p, b, &mut e);
                }
            }
            let nrm = norm(&e);
            if nrm > 1e-6 {
                e.iter_mut().for_each(|x| *x /= nrm);
                basis.row_mut(row).copy_from_slice(&e);
                filled.push(row);
                break;
            }
        }
    }
}

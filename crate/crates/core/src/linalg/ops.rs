use crate::error::{Error, Result};
use crate::linalg::dense::{dot, norm};

/// Norms below this are treated as zero by [`cosine_sim`].
pub const NORM_EPS: f64 = 1e-12;

/// Cosine similarity; 0.0 when either vector has norm below [`NORM_EPS`].
pub fn cosine_sim(h: &[f64], e: &[f64]) -> Result<f64> {
    if h.len() != e.len() {
        return Err(Error::Shape(format!(
            "cosine of vectors with lengths {} and {}",
            h.len(),
            e.len()
        )));
    }
    Ok(cosine_unchecked(h, e))
}

#[inline]
pub(crate) fn cosine_unchecked(h: &[f64], e: &[f64]) -> f64 {
    let nh = norm(h);
    let ne = norm(e);
    if nh < NORM_EPS || ne < NORM_EPS {
        return 0.0;
    }
    dot(h, e) / (nh * ne)
}

/// Softmax of `z / tau` with max subtraction.
pub fn row_softmax(z: &[f64], tau: f64) -> Result<Vec<f64>> {
    if !(tau > 0.0) {
        return Err(Error::InvalidTemperature(tau));
    }
    let mut p = z.to_vec();
    softmax_in_place(&mut p, tau);
    Ok(p)
}

pub(crate) fn softmax_in_place(z: &mut [f64], tau: f64) {
    let max = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    for v in z.iter_mut() {
        *v = ((*v - max) / tau).exp();
        total += *v;
    }
    for v in z.iter_mut() {
        *v /= total;
    }
}

/// Shannon entropy in nats, with `0 log 0 = 0`.
pub fn shannon_entropy(p: &[f64]) -> Result<f64> {
    if let Some(bad) = p.iter().find(|v| !(**v >= 0.0)) {
        return Err(Error::InvalidDistribution(format!("entry {bad} is negative")));
    }
    Ok(entropy_unchecked(p))
}

#[inline]
pub(crate) fn entropy_unchecked(p: &[f64]) -> f64 {
    -p.iter()
        .filter(|&&v| v > 0.0)
        .map(|&v| v * v.ln())
        .sum::<f64>()
}

#[inline]
pub fn relu(x: f64) -> f64 {
    if x > 0.0 {
        x
    } else {
        0.0
    }
}

/// Index of the largest entry; the lowest index wins ties.
pub fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate().skip(1) {
        if x > v[best] {
            best = i;
        }
    }
    best
}

/// Index of the smallest entry; the lowest index wins ties.
pub fn argmin(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate().skip(1) {
        if x < v[best] {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn cosine_examples() {
        assert_abs_diff_eq!(cosine_sim(&[0.3, -1.2], &[0.3, -1.2]).unwrap(), 1.0, epsilon = 1e-15);
        assert_eq!(cosine_sim(&[1.0, 0.0], &[0.0, 4.0]).unwrap(), 0.0);
        assert_abs_diff_eq!(cosine_sim(&[1.0, 2.0], &[2.0, 4.0]).unwrap(), 1.0, epsilon = 1e-15);
        assert_eq!(cosine_sim(&[0.0, 0.0], &[1.0, 1.0]).unwrap(), 0.0);
        assert!(matches!(cosine_sim(&[1.0], &[1.0, 2.0]), Err(Error::Shape(_))));
    }

    #[test]
    fn softmax_examples() {
        let p = row_softmax(&[1.0, 0.0], 1.0).unwrap();
        let e = std::f64::consts::E;
        assert_abs_diff_eq!(p[0], e / (e + 1.0), epsilon = 1e-15);
        assert_abs_diff_eq!(p[1], 1.0 / (e + 1.0), epsilon = 1e-15);
        assert_abs_diff_eq!(p[0], 0.7311, epsilon = 1e-4);

        for p in row_softmax(&[-4.2; 3], 0.7).unwrap() {
            assert_abs_diff_eq!(p, 1.0 / 3.0, epsilon = 1e-15);
        }
        let p = row_softmax(&[1000.0, 0.0], 1.0).unwrap();
        assert_eq!(p[0], 1.0);
        assert!(p[1] >= 0.0 && p[1] < 1e-300);
        assert!(matches!(row_softmax(&[1.0], 0.0), Err(Error::InvalidTemperature(_))));
        assert!(row_softmax(&[1.0], -1.0).is_err());
    }

    #[test]
    fn entropy_examples() {
        assert_abs_diff_eq!(shannon_entropy(&[0.2; 5]).unwrap(), 5f64.ln(), epsilon = 1e-15);
        assert_eq!(shannon_entropy(&[0.0, 1.0, 0.0]).unwrap(), 0.0);
        assert_abs_diff_eq!(shannon_entropy(&[0.5, 0.5, 0.0, 0.0]).unwrap(), 2f64.ln(), epsilon = 1e-15);
        assert!(matches!(shannon_entropy(&[1.5, -0.5]), Err(Error::InvalidDistribution(_))));
    }

    #[test]
    fn ties_resolve_to_lowest_index() {
        assert_eq!(argmax(&[1.0, 3.0, 3.0]), 1);
        assert_eq!(argmin(&[2.0, 0.0, 0.0]), 1);
        assert_eq!(argmax(&[0.0; 4]), 0);
    }

    proptest! {
        #[test]
        fn softmax_is_shift_invariant(z in prop::collection::vec(-50.0f64..50.0, 1..8), c in -100.0f64..100.0, tau in 0.05f64..5.0) {
            let p = row_softmax(&z, tau).unwrap();
            let shifted: Vec<f64> = z.iter().map(|v| v + c).collect();
            let q = row_softmax(&shifted, tau).unwrap();
            prop_assert!((p.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
            for (a, b) in p.iter().zip(&q) {
                prop_assert!(a > &0.0 || z.len() > 1);
                prop_assert!((a - b).abs() <= 1e-12);
            }
        }

        #[test]
        fn cosine_scale_invariant(h in prop::collection::vec(-10.0f64..10.0, 4), e in prop::collection::vec(-10.0f64..10.0, 4), c in 1e-3f64..1e3) {
            let scaled: Vec<f64> = h.iter().map(|v| v * c).collect();
            let a = cosine_sim(&h, &e).unwrap();
            let b = cosine_sim(&scaled, &e).unwrap();
            prop_assert!((a - b).abs() <= 1e-14);
            prop_assert!(a.abs() <= 1.0 + 1e-12);
        }

        #[test]
        fn entropy_bounded(w in prop::collection::vec(0.0f64..1.0, 1..10)) {
            let total: f64 = w.iter().sum();
            prop_assume!(total > 1e-9);
            let p: Vec<f64> = w.iter().map(|v| v / total).collect();
            let h = shannon_entropy(&p).unwrap();
            prop_assert!(h >= 0.0 && h <= (p.len() as f64).ln() + 1e-12);
        }
    }
}

use std::path::Path;

use crate::checkpoint;
use crate::error::{Error, Result};

const PROMPT_MAGIC: &[u8; 4] = b"GFMP";

/// A `(L+1) × C × d` tensor of per-layer, per-class vectors: class centroids
/// `E`, or the centroid prompt `β` that offsets them.
#[derive(Clone, Debug, PartialEq)]
pub struct CentroidMatrix {
    depth: usize,
    classes: usize,
    dim: usize,
    data: Vec<f64>,
}

impl CentroidMatrix {
    pub fn zeros(depth: usize, classes: usize, dim: usize) -> Self {
        Self {
            depth,
            classes,
            dim,
            data: vec![0.0; depth * classes * dim],
        }
    }

    pub fn from_vec(depth: usize, classes: usize, dim: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != depth * classes * dim {
            return Err(Error::Shape(format!(
                "{} values for a {depth}x{classes}x{dim} tensor",
                data.len()
            )));
        }
        Ok(Self {
            depth,
            classes,
            dim,
            data,
        })
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        (self.depth, self.classes, self.dim)
    }

    #[inline]
    pub fn get(&self, layer: usize, class: usize) -> &[f64] {
        let start = (layer * self.classes + class) * self.dim;
        &self.data[start..start + self.dim]
    }

    #[inline]
    pub fn get_mut(&mut self, layer: usize, class: usize) -> &mut [f64] {
        let start = (layer * self.classes + class) * self.dim;
        &mut self.data[start..start + self.dim]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Elementwise sum with a tensor of the same shape.
    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.shape() != other.shape() {
            return Err(Error::Shape(format!(
                "cannot add {:?} and {:?} tensors",
                self.shape(),
                other.shape()
            )));
        }
        Ok(Self {
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
            ..*self
        })
    }

    /// Copy with class `c` moved to position `perm[c]`.
    pub fn permute_classes(&self, perm: &[usize]) -> Self {
        let mut out = Self::zeros(self.depth, self.classes, self.dim);
        for l in 0..self.depth {
            for c in 0..self.classes {
                out.get_mut(l, perm[c]).copy_from_slice(self.get(l, c));
            }
        }
        out
    }
}

/// The learnable test-time prompts: centroid offsets `β` and layer weights
/// `η`.
#[derive(Clone, Debug, PartialEq)]
pub struct Prompts {
    pub beta: CentroidMatrix,
    pub eta: Vec<f64>,
}

impl Prompts {
    pub fn new(beta: CentroidMatrix, eta: Vec<f64>) -> Result<Self> {
        if eta.len() != beta.depth() {
            return Err(Error::Shape(format!(
                "{} layer weights for a depth-{} centroid prompt",
                eta.len(),
                beta.depth()
            )));
        }
        Ok(Self { beta, eta })
    }

    /// Zero offsets and unit layer weights.
    pub fn neutral(depth: usize, classes: usize, dim: usize) -> Self {
        Self {
            beta: CentroidMatrix::zeros(depth, classes, dim),
            eta: vec![1.0; depth],
        }
    }

    pub fn num_parameters(&self) -> usize {
        self.beta.as_slice().len() + self.eta.len()
    }

    pub fn is_finite(&self) -> bool {
        self.beta.is_finite() && self.eta.iter().all(|v| v.is_finite())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let (depth, classes, dim) = self.beta.shape();
        let mut payload = self.beta.as_slice().to_vec();
        payload.extend_from_slice(&self.eta);
        checkpoint::encode(PROMPT_MAGIC, &[depth, classes, dim], &payload)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let (dims, mut payload) = checkpoint::decode(PROMPT_MAGIC, bytes)?;
        let [depth, classes, dim] = dims[..] else {
            return Err(Error::CorruptCheckpoint(format!("expected 3 dims, found {}", dims.len())));
        };
        let n_beta = depth * classes * dim;
        if payload.len() != n_beta + depth {
            return Err(Error::CorruptCheckpoint("payload does not match prompt shape".into()));
        }
        let eta = payload.split_off(n_beta);
        Self::new(CentroidMatrix::from_vec(depth, classes, dim, payload)?, eta)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        checkpoint::write_file(path.as_ref(), &self.to_bytes())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_bytes(&std::fs::read(path)?)
    }
}

/// Tunable parameters of centroid plus layer prompts: `(L+1)·C·d + (L+1)`.
pub fn tunable_parameter_count(depth: usize, classes: usize, dim: usize) -> usize {
    depth * classes * dim + depth
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parameter_count_matches_tensor_sizes() {
        let p = Prompts::neutral(3, 7, 256);
        assert_eq!(p.num_parameters(), tunable_parameter_count(3, 7, 256));
        assert_eq!(p.num_parameters(), 5379);
    }

    #[test]
    fn prompt_checkpoint_roundtrip() {
        let beta = CentroidMatrix::from_vec(2, 2, 2, (0..8).map(|i| i as f64 * 0.1 - 0.3).collect()).unwrap();
        let p = Prompts::new(beta, vec![0.7, -1.25]).unwrap();
        let back = Prompts::from_bytes(&p.to_bytes()).unwrap();
        assert_eq!(p, back);
        let bytes = p.to_bytes();
        assert!(Prompts::from_bytes(&bytes[..bytes.len() - 1]).is_err());
    }

    #[test]
    fn add_checks_shape() {
        let a = CentroidMatrix::zeros(2, 3, 4);
        assert!(a.add(&CentroidMatrix::zeros(2, 3, 5)).is_err());
    }
}

use std::path::Path;

use rand::Rng as _;

use crate::checkpoint;
use crate::error::{Error, Result};
use crate::graph::CsrAdjacency;
use crate::linalg::{relu, spmm, DenseMatrix};
use crate::rng;

const PARAMS_MAGIC: &[u8; 4] = b"GFMW";

/// Weights of an `L`-layer bias-free GCN with a single hidden width `d`.
#[derive(Clone, Debug, PartialEq)]
pub struct GcnParams {
    weights: Vec<DenseMatrix>,
    dim: usize,
}

impl GcnParams {
    pub fn new(weights: Vec<DenseMatrix>) -> Result<Self> {
        let dim = weights.first().map_or(0, DenseMatrix::rows);
        if weights.is_empty() {
            return Err(Error::Config("a GCN needs at least one layer".into()));
        }
        for (l, w) in weights.iter().enumerate() {
            if w.shape() != (dim, dim) {
                return Err(Error::Shape(format!(
                    "layer {l} weight is {:?}, expected {dim}x{dim}",
                    w.shape()
                )));
            }
            if !w.is_finite() {
                return Err(Error::NonFinite(format!("layer {l} weight")));
            }
        }
        Ok(Self { weights, dim })
    }

    /// Xavier-uniform initialisation, `U(-√(6/2d), √(6/2d))`.
    pub fn xavier(num_layers: usize, dim: usize, seed: u64) -> Result<Self> {
        if num_layers == 0 || dim == 0 {
            return Err(Error::Config(format!(
                "cannot build a GCN with {num_layers} layers of width {dim}"
            )));
        }
        let bound = (6.0 / (2 * dim) as f64).sqrt();
        let mut r = rng::rng_from_seed(seed);
        let weights = (0..num_layers)
            .map(|_| DenseMatrix::from_fn(dim, dim, |_, _| r.random_range(-bound..bound)))
            .collect();
        Ok(Self { weights, dim })
    }

    pub fn num_layers(&self) -> usize {
        self.weights.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn weights(&self) -> &[DenseMatrix] {
        &self.weights
    }

    pub(crate) fn weights_mut(&mut self) -> &mut [DenseMatrix] {
        &mut self.weights
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let payload: Vec<f64> = self
            .weights
            .iter()
            .flat_map(|w| w.as_slice().iter().copied())
            .collect();
        checkpoint::encode(PARAMS_MAGIC, &[self.num_layers(), self.dim], &payload)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let (dims, payload) = checkpoint::decode(PARAMS_MAGIC, bytes)?;
        let [layers, dim] = dims[..] else {
            return Err(Error::CorruptCheckpoint(format!("expected 2 dims, found {}", dims.len())));
        };
        if payload.len() != layers * dim * dim {
            return Err(Error::CorruptCheckpoint("payload does not match L·d·d".into()));
        }
        let weights = payload
            .chunks_exact(dim * dim)
            .map(|c| DenseMatrix::from_vec(dim, dim, c.to_vec()))
            .collect::<Result<Vec<_>>>()?;
        Self::new(weights)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        checkpoint::write_file(path.as_ref(), &self.to_bytes())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_bytes(&std::fs::read(path)?)
    }
}

/// Per-layer node embeddings `H^(0..=L)`; layer 0 is the aligned input.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingStack {
    layers: Vec<DenseMatrix>,
}

impl EmbeddingStack {
    pub fn new(layers: Vec<DenseMatrix>) -> Result<Self> {
        let shape = layers
            .first()
            .map(DenseMatrix::shape)
            .ok_or_else(|| Error::EmptyInput("embedding stack without layers".into()))?;
        if let Some(l) = layers.iter().position(|h| h.shape() != shape) {
            return Err(Error::Shape(format!("layer {l} differs from layer 0 shape {shape:?}")));
        }
        if let Some(l) = layers.iter().position(|h| !h.is_finite()) {
            return Err(Error::NonFinite(format!("embedding layer {l}")));
        }
        Ok(Self { layers })
    }

    /// Number of layers including the input layer (`L + 1`).
    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn num_nodes(&self) -> usize {
        self.layers[0].rows()
    }

    pub fn dim(&self) -> usize {
        self.layers[0].cols()
    }

    pub fn layer(&self, l: usize) -> &DenseMatrix {
        &self.layers[l]
    }

    pub fn layers(&self) -> &[DenseMatrix] {
        &self.layers
    }

    /// Embedding of `node` at layer `l`.
    #[inline]
    pub fn embedding(&self, l: usize, node: usize) -> &[f64] {
        self.layers[l].row(node)
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            layers: self.layers.iter().map(|h| h.scale(c)).collect(),
        }
    }
}

/// Embeds a graph's (aligned) features with a frozen encoder.
pub fn encode_graph(params: &GcnParams, g: &crate::graph::Graph) -> Result<EmbeddingStack> {
    gcn_forward(params, &crate::graph::normalize_adjacency(g), g.features())
}

/// Intermediates kept by the forward pass for back-propagation.
#[derive(Clone, Debug)]
pub struct ForwardCache {
    /// `Â H^(l-1)` for l = 1..=L
    propagated: Vec<DenseMatrix>,
    /// `Â H^(l-1) W^(l)` for l = 1..=L
    pre_activation: Vec<DenseMatrix>,
}

/// `H^(0) = X`, `H^(l) = ReLU(Â H^(l-1) W^(l))` for `l < L` and a linear
/// final layer `H^(L) = Â H^(L-1) W^(L)`.
pub fn gcn_forward(params: &GcnParams, adj: &CsrAdjacency, x: &DenseMatrix) -> Result<EmbeddingStack> {
    gcn_forward_cached(params, adj, x).map(|(s, _)| s)
}

pub fn gcn_forward_cached(
    params: &GcnParams,
    adj: &CsrAdjacency,
    x: &DenseMatrix,
) -> Result<(EmbeddingStack, ForwardCache)> {
    if x.cols() != params.dim {
        return Err(Error::Shape(format!(
            "features have width {}, model expects {}",
            x.cols(),
            params.dim
        )));
    }
    let last = params.num_layers() - 1;
    let mut layers = vec![x.clone()];
    let mut cache = ForwardCache {
        propagated: Vec::with_capacity(params.num_layers()),
        pre_activation: Vec::with_capacity(params.num_layers()),
    };
    for (l, w) in params.weights.iter().enumerate() {
        let p = spmm(adj, layers.last().unwrap())?;
        let z = p.matmul(w)?;
        let h = if l < last {
            let mut h = z.clone();
            h.as_mut_slice().iter_mut().for_each(|v| *v = relu(*v));
            h
        } else {
            z.clone()
        };
        cache.propagated.push(p);
        cache.pre_activation.push(z);
        layers.push(h);
    }
    Ok((EmbeddingStack::new(layers)?, cache))
}

/// Weight gradients given `dLoss/dH^(L)`. `Â` is symmetric, so its adjoint
/// is itself.
pub fn gcn_backward(
    params: &GcnParams,
    adj: &CsrAdjacency,
    cache: &ForwardCache,
    grad_out: &DenseMatrix,
) -> Result<Vec<DenseMatrix>> {
    let n_layers = params.num_layers();
    let mut grads = vec![DenseMatrix::zeros(0, 0); n_layers];
    let mut g = grad_out.clone();
    for l in (0..n_layers).rev() {
        if l + 1 < n_layers {
            for (gv, z) in g
                .as_mut_slice()
                .iter_mut()
                .zip(cache.pre_activation[l].as_slice())
            {
                if *z <= 0.0 {
                    *gv = 0.0;
                }
            }
        }
        grads[l] = cache.propagated[l].t_matmul(&g)?;
        if l > 0 {
            let dp = g.matmul_t(&params.weights[l])?;
            g = spmm(adj, &dp)?;
        }
    }
    Ok(grads)
}

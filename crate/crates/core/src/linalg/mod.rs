//! Dense and sparse numeric kernels.

pub mod dense;
mod ops;
pub mod sparse;
pub mod svd;

pub use dense::DenseMatrix;
pub use ops::{argmax, argmin, cosine_sim, relu, row_softmax, shannon_entropy, NORM_EPS};
pub(crate) use ops::{cosine_unchecked, entropy_unchecked, softmax_in_place};
pub use sparse::{spmm, CsrMatrix};
pub use svd::{jacobi_svd, orthonormal_basis, truncated_svd, Svd};

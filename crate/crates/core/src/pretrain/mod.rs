//! SVD feature alignment, the GCN encoder and label-free link-prediction
//! pre-training.

mod align;
mod gcn;
mod link;
mod trainer;

pub use align::{svd_align, AlignConfig};
pub use gcn::{encode_graph, gcn_backward, gcn_forward, gcn_forward_cached, EmbeddingStack, ForwardCache, GcnParams};
pub use link::link_pred_loss;
pub use trainer::{pretrain, write_loss_trace, PretrainConfig, PretrainOutcome};

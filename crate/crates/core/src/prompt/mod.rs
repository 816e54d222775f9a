//! Test-time prompt tuning on a frozen encoder: few-shot centroids, centroid
//! and layer prompts, entropy-selected complementary labels and the combined
//! few-shot/complementary objective.

mod centroid;
mod complementary;
pub mod objective;
mod predict;
mod tensor;
mod tune;

pub use centroid::{init_centroids, refine_centroids, subgraph_embed};
pub use complementary::{
    complementary_correctness, compute_complementary_labels, least_similar, pseudo_labels,
    ComplementaryLabels,
};
pub use objective::{
    effective_gamma, loss_fs, loss_te, tgcl_gradients, tgcl_loss, tgcl_objective, ObjectiveValue,
    TestSupervision, COMPLEMENT_FLOOR,
};
pub use predict::{accuracy, ensemble_predict, ensemble_predict_raw, layer_scores};
pub use tensor::{tunable_parameter_count, CentroidMatrix, Prompts};
pub use tune::{
    build_supervision, init_prompts, tune, write_history, HistoryRow, LayerMode, TgclMode,
    TuneConfig, TuneOutcome,
};

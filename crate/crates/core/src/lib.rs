//! Multi-domain graph foundation model pre-training and test-time prompt
//! tuning with centroid prompts, layer prompts and complementary learning.

pub mod checkpoint;
pub mod error;
pub mod graph;
pub mod linalg;
pub mod pretrain;
pub mod prompt;
pub mod rng;
pub mod synth;

pub use error::{Error, Result};

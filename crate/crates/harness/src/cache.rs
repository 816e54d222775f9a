//! On-disk cache of pre-trained encoders.

use std::fs;
use std::path::{Path, PathBuf};

use gfmate_core::graph::Graph;
use gfmate_core::pretrain::{pretrain, GcnParams, PretrainConfig};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{HarnessError, Result};

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// SHA-256 of the sorted source domain ids and the pre-training config.
pub fn cache_key(source_ids: &[&str], cfg: &PretrainConfig) -> String {
    let mut ids = source_ids.to_vec();
    ids.sort_unstable();
    let mut h = Sha256::new();
    for id in ids {
        h.update((id.len() as u64).to_le_bytes());
        h.update(id.as_bytes());
    }
    h.update(serde_json::to_vec(cfg).expect("config serializes"));
    hex(&h.finalize())
}

/// SHA-256 over the content of the source graphs, in id order.
pub fn source_digest(graphs: &[&Graph]) -> String {
    let mut sorted = graphs.to_vec();
    sorted.sort_by(|a, b| a.domain_id().cmp(b.domain_id()));
    let mut h = Sha256::new();
    for g in sorted {
        h.update(g.domain_id().as_bytes());
        h.update((g.num_nodes() as u64).to_le_bytes());
        for &(u, v) in g.edges() {
            h.update((u as u64).to_le_bytes());
            h.update((v as u64).to_le_bytes());
        }
        for x in g.features().as_slice() {
            h.update(x.to_le_bytes());
        }
        if let Some(labels) = g.labels() {
            for y in labels {
                h.update(y.map_or(u64::MAX, |y| y as u64).to_le_bytes());
            }
        }
    }
    hex(&h.finalize())
}

#[derive(Debug, Serialize, Deserialize)]
struct CacheMeta {
    key: String,
    source_ids: Vec<String>,
    source_digest: String,
    pretrain: PretrainConfig,
}

/// An encoder together with the number of optimizer steps spent producing
/// it in this process (0 on a cache hit).
#[derive(Clone, Debug)]
pub struct CachedEncoder {
    pub params: GcnParams,
    pub steps: usize,
    pub loss_trace: Vec<f64>,
    pub path: PathBuf,
}

pub struct EncoderCache {
    dir: PathBuf,
}

impl EncoderCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// Loads the encoder for `(sources, cfg)` or pre-trains and stores it.
    /// `raw_sources` identify the data; `aligned` is what training sees.
    pub fn load_or_train(&self, raw_sources: &[&Graph], aligned: &[Graph], cfg: &PretrainConfig) -> Result<CachedEncoder> {
        let ids: Vec<&str> = raw_sources.iter().map(|g| g.domain_id()).collect();
        let key = cache_key(&ids, cfg);
        let digest = source_digest(raw_sources);
        let ckpt = self.dir.join(format!("{key}.gfmw"));
        let meta_path = self.dir.join(format!("{key}.json"));

        if meta_path.exists() {
            let meta: CacheMeta = serde_json::from_str(&fs::read_to_string(&meta_path)?)?;
            let stale = |reason: &str| HarnessError::StaleCache {
                path: meta_path.clone(),
                reason: reason.into(),
            };
            if meta.key != key || &meta.pretrain != cfg {
                return Err(stale("recorded config does not match its key"));
            }
            if meta.source_digest != digest {
                return Err(stale("source graphs changed since the encoder was trained"));
            }
            if !ckpt.exists() {
                return Err(stale("checkpoint file is missing"));
            }
            log::info!("loading cached encoder {}", ckpt.display());
            return Ok(CachedEncoder {
                params: GcnParams::load(&ckpt)?,
                steps: 0,
                loss_trace: Vec::new(),
                path: ckpt,
            });
        }

        log::info!("pre-training on {} source domains", aligned.len());
        let out = pretrain(aligned, cfg)?;
        out.params.save(&ckpt)?;
        let mut sorted: Vec<String> = ids.iter().map(|s| s.to_string()).collect();
        sorted.sort();
        let meta = CacheMeta {
            key,
            source_ids: sorted,
            source_digest: digest,
            pretrain: cfg.clone(),
        };
        fs::write(&meta_path, serde_json::to_string_pretty(&meta)?)?;
        Ok(CachedEncoder {
            steps: out.total_steps(),
            params: out.params,
            loss_trace: out.loss_trace,
            path: ckpt,
        })
    }
}

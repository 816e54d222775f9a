use std::path::{Path, PathBuf};

use gfmate_core::pretrain::PretrainConfig;
use gfmate_core::prompt::TuneConfig;
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

/// Which perturbation a robustness sweep applies to the target.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PerturbKind {
    /// Shuffle feature rows among a fraction of the test nodes.
    Feature,
    /// Drop edges touching test nodes.
    Edge,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerturbSweep {
    pub kind: PerturbKind,
    pub ratios: Vec<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepConfig {
    pub test_ratios: Option<Vec<f64>>,
    pub perturb: Option<PerturbSweep>,
    /// Each entry is one class group merged against the rest.
    pub merge_groups: Option<Vec<Vec<usize>>>,
    pub shots: Option<Vec<usize>>,
}

fn default_shots() -> usize {
    1
}

/// One leave-one-domain-out experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub manifest_path: PathBuf,
    pub target_domain: String,
    #[serde(default = "default_shots")]
    pub shots: usize,
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub pretrain: PretrainConfig,
    #[serde(default)]
    pub tune: TuneConfig,
    #[serde(default)]
    pub sweeps: Option<SweepConfig>,
    /// Where reports are written; nothing is written when absent.
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    /// Checkpoint cache; `GFMATE_CACHE_DIR` takes precedence.
    #[serde(default)]
    pub cache_dir: Option<PathBuf>,
    /// Pre-train a fresh encoder for every seed instead of sharing one.
    #[serde(default)]
    pub repretrain_per_seed: bool,
}

impl ExperimentConfig {
    pub fn new(manifest_path: impl Into<PathBuf>, target_domain: impl Into<String>, seeds: Vec<u64>) -> Self {
        Self {
            manifest_path: manifest_path.into(),
            target_domain: target_domain.into(),
            shots: 1,
            seeds,
            pretrain: PretrainConfig::default(),
            tune: TuneConfig::default(),
            sweeps: None,
            output_dir: None,
            cache_dir: None,
            repretrain_per_seed: false,
        }
    }

    /// Settings for the synthetic SBM benchmark: a 32-wide, 2-layer encoder
    /// and a tuning step size suited to its embedding scale.
    pub fn synthetic_benchmark(manifest_path: impl Into<PathBuf>, seeds: Vec<u64>) -> Self {
        let mut cfg = Self::new(manifest_path, "sbm-target", seeds);
        cfg.pretrain = PretrainConfig {
            hidden_dim: 32,
            epochs: 50,
            lr: 0.05,
            batch_edges: 256,
            ..PretrainConfig::default()
        };
        cfg.tune.lr = 1.0;
        cfg
    }

    /// Reads a JSON config. Relative paths inside it resolve against the
    /// config file's directory.
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::from(e).context(path.display().to_string()))?;
        let mut cfg: Self = serde_json::from_str(&text)
            .map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        let rebase = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        rebase(&mut cfg.manifest_path);
        if let Some(p) = cfg.output_dir.as_mut() {
            rebase(p);
        }
        if let Some(p) = cfg.cache_dir.as_mut() {
            rebase(p);
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            return Err(HarnessError::Config("seed list is empty".into()));
        }
        if self.shots == 0 {
            return Err(HarnessError::Config("shots must be at least 1".into()));
        }
        self.pretrain.validate()?;
        self.tune.validate()?;
        if let Some(s) = &self.sweeps {
            let ratios = s.test_ratios.iter().flatten().chain(s.perturb.iter().flat_map(|p| &p.ratios));
            for r in ratios {
                if !(0.0..=1.0).contains(r) {
                    return Err(HarnessError::Config(format!("sweep ratio {r} is outside [0, 1]")));
                }
            }
            if s.shots.iter().flatten().any(|&m| m == 0) {
                return Err(HarnessError::Config("shot sweep contains 0".into()));
            }
        }
        Ok(())
    }

    /// Cache location: `GFMATE_CACHE_DIR`, then `cache_dir`, then a
    /// `.gfmate-cache` directory next to the manifest.
    pub fn resolved_cache_dir(&self) -> PathBuf {
        if let Some(dir) = std::env::var_os("GFMATE_CACHE_DIR") {
            return PathBuf::from(dir);
        }
        if let Some(dir) = &self.cache_dir {
            return dir.clone();
        }
        self.manifest_path
            .parent()
            .unwrap_or(Path::new("."))
            .join(".gfmate-cache")
    }
}

/// Parses `a..b` (inclusive) or a comma-separated list.
pub fn parse_seeds(s: &str) -> Result<Vec<u64>> {
    let bad = || HarnessError::Config(format!("cannot parse seed list {s:?}"));
    if let Some((a, b)) = s.split_once("..") {
        let a: u64 = a.trim().parse().map_err(|_| bad())?;
        let b: u64 = b.trim().parse().map_err(|_| bad())?;
        if b < a {
            return Err(bad());
        }
        return Ok((a..=b).collect());
    }
    s.split(',')
        .map(|t| t.trim().parse().map_err(|_| bad()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_lists() {
        assert_eq!(parse_seeds("0..4").unwrap(), vec![0, 1, 2, 3, 4]);
        assert_eq!(parse_seeds("3, 7,9").unwrap(), vec![3, 7, 9]);
        assert!(parse_seeds("4..1").is_err());
        assert!(parse_seeds("x").is_err());
    }

    #[test]
    fn defaults_fill_missing_fields() {
        let cfg: ExperimentConfig =
            serde_json::from_str(r#"{"manifest_path":"m.json","target_domain":"cora","seeds":[0]}"#).unwrap();
        assert_eq!(cfg.shots, 1);
        assert_eq!(cfg.pretrain, PretrainConfig::default());
        cfg.validate().unwrap();
    }

    #[test]
    fn validation_rejects_bad_values() {
        let mut cfg = ExperimentConfig::new("m.json", "t", vec![]);
        assert!(cfg.validate().is_err());
        cfg.seeds = vec![0];
        cfg.sweeps = Some(SweepConfig {
            test_ratios: Some(vec![0.5, 1.5]),
            ..Default::default()
        });
        assert!(cfg.validate().is_err());
    }
}

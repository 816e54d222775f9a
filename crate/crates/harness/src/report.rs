use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use gfmate_core::prompt::{LayerMode, TgclMode};
use serde::{Deserialize, Serialize};

use crate::error::Result;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeedResult {
    pub seed: u64,
    /// Test accuracy as a fraction.
    pub accuracy: f64,
    /// Fraction of complementary labels that differ from the truth.
    pub comp_label_accuracy: Option<f64>,
    pub best_epoch: usize,
}

/// Position of a report along a sweep axis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub kind: String,
    pub value: f64,
}

/// Facts about the run rather than its results; excluded from
/// reproducibility comparisons.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunInfo {
    pub wallclock_secs: f64,
    /// Encoder optimizer steps performed by this run; 0 on a cache hit.
    pub pretrain_steps: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub label: String,
    pub target_domain: String,
    pub shots: usize,
    pub tgcl_mode: TgclMode,
    pub layer_mode: LayerMode,
    pub sweep: Option<SweepPoint>,
    pub per_seed: Vec<SeedResult>,
    pub mean: f64,
    /// Population standard deviation over seeds.
    pub stddev: f64,
    pub comp_label_accuracy: Option<f64>,
    /// `mean ± stddev` in percent, two decimals.
    pub summary: String,
    pub param_count: usize,
    pub run: RunInfo,
}

pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

impl MetricReport {
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn assemble(
        label: String,
        target_domain: String,
        shots: usize,
        tgcl_mode: TgclMode,
        layer_mode: LayerMode,
        sweep: Option<SweepPoint>,
        per_seed: Vec<SeedResult>,
        param_count: usize,
        run: RunInfo,
    ) -> Self {
        let accs: Vec<f64> = per_seed.iter().map(|s| s.accuracy).collect();
        let (mean, stddev) = mean_std(&accs);
        let comps: Option<Vec<f64>> = per_seed.iter().map(|s| s.comp_label_accuracy).collect();
        let comp_label_accuracy = comps.filter(|c| !c.is_empty()).map(|c| mean_std(&c).0);
        Self {
            label,
            target_domain,
            shots,
            tgcl_mode,
            layer_mode,
            sweep,
            per_seed,
            mean,
            stddev,
            comp_label_accuracy,
            summary: format!("{:.2} ± {:.2}", 100.0 * mean, 100.0 * stddev),
            param_count,
            run,
        }
    }

    pub fn accuracies(&self) -> Vec<f64> {
        self.per_seed.iter().map(|s| s.accuracy).collect()
    }

    /// Equality of everything except [`RunInfo`].
    pub fn same_results(&self, other: &Self) -> bool {
        let strip = |r: &Self| Self {
            run: RunInfo {
                wallclock_secs: 0.0,
                pretrain_steps: 0,
            },
            ..r.clone()
        };
        strip(self) == strip(other)
    }

    pub fn per_seed_csv(&self) -> String {
        let mut out = String::from("seed,accuracy,comp_label_accuracy,best_epoch\n");
        for s in &self.per_seed {
            let comp = s.comp_label_accuracy.map(|c| format!("{c:?}")).unwrap_or_default();
            writeln!(out, "{},{:?},{},{}", s.seed, s.accuracy, comp, s.best_epoch).unwrap();
        }
        out
    }

    /// Writes `report.json` and `per_seed.csv` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("report.json"), serde_json::to_string_pretty(self)? + "\n")?;
        fs::write(dir.join("per_seed.csv"), self.per_seed_csv())?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
    }
}

/// Reads accuracies back from a `per_seed.csv`.
pub fn read_per_seed_accuracies(path: &Path) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path)?;
    text.lines()
        .skip(1)
        .filter(|l| !l.is_empty())
        .map(|l| {
            l.split(',')
                .nth(1)
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| crate::error::HarnessError::Config(format!("bad per-seed row {l:?}")))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn population_std() {
        let (m, s) = mean_std(&[0.5, 0.7]);
        assert!((m - 0.6).abs() < 1e-15);
        assert!((s - 0.1).abs() < 1e-15);
        assert_eq!(mean_std(&[0.3]), (0.3, 0.0));
    }

    #[test]
    fn csv_round_trips_accuracies() {
        let per_seed = vec![
            SeedResult {
                seed: 0,
                accuracy: 0.1 + 0.2,
                comp_label_accuracy: Some(0.9),
                best_epoch: 3,
            },
            SeedResult {
                seed: 1,
                accuracy: 2.0 / 3.0,
                comp_label_accuracy: None,
                best_epoch: 0,
            },
        ];
        let r = MetricReport::assemble(
            "x".into(),
            "t".into(),
            1,
            TgclMode::Complementary,
            LayerMode::Learned,
            None,
            per_seed,
            10,
            RunInfo {
                wallclock_secs: 0.0,
                pretrain_steps: 0,
            },
        );
        assert_eq!(r.comp_label_accuracy, None);
        let dir = tempfile::tempdir().unwrap();
        r.write(dir.path()).unwrap();
        let back = read_per_seed_accuracies(&dir.path().join("per_seed.csv")).unwrap();
        assert_eq!(back, r.accuracies());
        assert_eq!(MetricReport::read(&dir.path().join("report.json")).unwrap(), r);
    }
}

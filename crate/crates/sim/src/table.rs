//! Quantile tables and their JSON representation.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::limit::{Functional, FunctionalFamily};
use crate::rng::GENERATOR_VERSION;

/// Type-7 empirical quantile of sorted data.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    assert!(n > 0, "quantile of empty sample");
    let h = (n - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Standard error of each quantile estimated by splitting the draws into
/// `b = min(20, n/10)` contiguous batches: `sd(batch quantiles) / √b`.
pub fn batched_standard_errors(draws: &[f64], probs: &[f64]) -> Vec<f64> {
    let b = (draws.len() / 10).clamp(2, 20);
    let size = draws.len() / b;
    let batch_q: Vec<Vec<f64>> = (0..b)
        .map(|i| {
            let mut batch = draws[i * size..(i + 1) * size].to_vec();
            batch.sort_by(f64::total_cmp);
            probs.iter().map(|&p| quantile_sorted(&batch, p)).collect()
        })
        .collect();
    (0..probs.len())
        .map(|k| {
            let mean = batch_q.iter().map(|q| q[k]).sum::<f64>() / b as f64;
            let var = batch_q.iter().map(|q| (q[k] - mean).powi(2)).sum::<f64>() / (b - 1) as f64;
            var.sqrt() / (b as f64).sqrt()
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriticalValueTable {
    pub family: FunctionalFamily,
    /// Strictly increasing probabilities.
    pub probs: Vec<f64>,
    pub values: Vec<f64>,
    /// Batched Monte Carlo standard errors; empty for published tables.
    pub std_errors: Vec<f64>,
    pub steps: usize,
    pub reps: usize,
    pub seed: u64,
    pub redraws: u64,
    pub generator_version: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct TableFile {
    family: String,
    q: usize,
    #[serde(rename = "J")]
    j: Option<Vec<f64>>,
    steps: usize,
    reps: usize,
    seed: u64,
    probs: Vec<f64>,
    values: Vec<f64>,
    #[serde(default)]
    std_errors: Vec<f64>,
    #[serde(default)]
    redraws: u64,
    generator_version: String,
}

impl CriticalValueTable {
    pub(crate) fn from_draws(
        family: FunctionalFamily,
        mut draws: Vec<f64>,
        probs: &[f64],
        steps: usize,
        seed: u64,
        redraws: u64,
    ) -> Self {
        let mut probs = probs.to_vec();
        probs.sort_by(f64::total_cmp);
        probs.dedup();
        let std_errors = batched_standard_errors(&draws, &probs);
        let reps = draws.len();
        draws.sort_by(f64::total_cmp);
        let values = probs.iter().map(|&p| quantile_sorted(&draws, p)).collect();
        Self {
            family,
            probs,
            values,
            std_errors,
            steps,
            reps,
            seed,
            redraws,
            generator_version: GENERATOR_VERSION.to_string(),
        }
    }

    /// Value at probability `p`, if tabulated (matched to 1e-9).
    pub fn quantile(&self, p: f64) -> Option<f64> {
        self.index_of(p).map(|i| self.values[i])
    }

    pub fn std_error(&self, p: f64) -> Option<f64> {
        self.index_of(p).and_then(|i| self.std_errors.get(i).copied())
    }

    /// Upper-tail critical value at level `alpha`.
    pub fn critical_value(&self, alpha: f64) -> Option<f64> {
        self.quantile(1.0 - alpha)
    }

    fn index_of(&self, p: f64) -> Option<usize> {
        self.probs.iter().position(|&x| (x - p).abs() < 1e-9)
    }

    pub fn check(&self) -> Result<()> {
        self.family.validate()?;
        let n = self.probs.len();
        if n == 0 || self.values.len() != n || !(self.std_errors.is_empty() || self.std_errors.len() == n) {
            return Err(Error::MalformedTable("probs/values/std_errors lengths differ".into()));
        }
        if self.probs.iter().any(|p| !(*p > 0.0 && *p < 1.0)) || self.probs.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::MalformedTable("probabilities must be strictly increasing in (0, 1)".into()));
        }
        if self.values.iter().any(|v| !v.is_finite()) || self.values.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::MalformedTable("quantiles must be finite and nondecreasing".into()));
        }
        if self.family.noncentrality.is_none() && self.values.iter().any(|v| *v < 0.0) {
            return Err(Error::MalformedTable("null quantiles must be nonnegative".into()));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        let file = TableFile {
            family: self.family.functional.slug().to_string(),
            q: self.family.dim(),
            j: self.family.noncentrality.clone(),
            steps: self.steps,
            reps: self.reps,
            seed: self.seed,
            probs: self.probs.clone(),
            values: self.values.clone(),
            std_errors: self.std_errors.clone(),
            redraws: self.redraws,
            generator_version: self.generator_version.clone(),
        };
        let mut s = serde_json::to_string_pretty(&file)?;
        s.push('\n');
        Ok(s)
    }

    /// Parses a table file, refusing files written by another generator.
    pub fn from_json(text: &str) -> Result<Self> {
        let file: TableFile = serde_json::from_str(text)?;
        if file.generator_version != GENERATOR_VERSION {
            return Err(Error::GeneratorVersionMismatch {
                found: file.generator_version,
                expected: GENERATOR_VERSION.to_string(),
            });
        }
        let functional = Functional::from_slug(&file.family, file.q)?;
        let table = Self {
            family: FunctionalFamily { functional, noncentrality: file.j },
            probs: file.probs,
            values: file.values,
            std_errors: file.std_errors,
            steps: file.steps,
            reps: file.reps,
            seed: file.seed,
            redraws: file.redraws,
            generator_version: file.generator_version,
        };
        table.check()?;
        Ok(table)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        let tmp = path.with_extension("json.tmp");
        std::fs::write(&tmp, self.to_json()?).map_err(|e| Error::io(&tmp, e))?;
        std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn type7_matches_hand_values() {
        let x = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile_sorted(&x, 0.5), 2.5);
        assert_eq!(quantile_sorted(&x, 0.0), 1.0);
        assert_eq!(quantile_sorted(&x, 1.0), 4.0);
        assert!((quantile_sorted(&x, 0.9) - 3.7).abs() < 1e-12);
        assert_eq!(quantile_sorted(&[5.0], 0.3), 5.0);
    }

    #[test]
    fn batched_se_of_constant_is_zero() {
        let se = batched_standard_errors(&[2.0; 400], &[0.5, 0.9]);
        assert_eq!(se, vec![0.0, 0.0]);
    }

    #[test]
    fn json_round_trip_and_version_guard() {
        let draws: Vec<f64> = (0..200).map(|i| i as f64 / 10.0).collect();
        let t = CriticalValueTable::from_draws(Functional::RangeRatio.into(), draws, &[0.95, 0.5], 1000, 7, 0);
        assert_eq!(t.probs, vec![0.5, 0.95]);
        let text = t.to_json().unwrap();
        assert_eq!(CriticalValueTable::from_json(&text).unwrap(), t);
        let bad = text.replace(GENERATOR_VERSION, "other");
        assert!(matches!(
            CriticalValueTable::from_json(&bad),
            Err(Error::GeneratorVersionMismatch { .. })
        ));
    }
}

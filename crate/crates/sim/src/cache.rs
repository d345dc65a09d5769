//! Critical-value lookup over in-memory and on-disk quantile tables.
//!
//! A lookup for `(family, alpha)` is served by any table for that family
//! that tabulates probability `1 − alpha` and was built with at least the
//! cache's required `(steps, reps)`. On a miss the cache either fails with
//! [`Error::CacheMiss`] or simulates the table, depending on its
//! [`SimulationPolicy`]. Simulated tables are written to the cache
//! directory, when one is configured, as `<id>.json`.

use std::path::{Path, PathBuf};
use std::sync::RwLock;

use crate::error::{Error, Result};
use crate::limit::{quantile_tables, FunctionalFamily, STANDARD_PROBS};
use crate::reference::published_critical_values;
use crate::rng::hash_words;
use crate::table::CriticalValueTable;

/// Environment variable naming the default cache directory.
pub const CACHE_DIR_ENV: &str = "SNCPA_CACHE_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimulationPolicy {
    Never,
    Simulate { steps: usize, reps: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriticalValue {
    pub value: f64,
    /// Identifier of the table the value came from.
    pub table_id: String,
}

#[derive(Debug)]
pub struct CriticalValueCache {
    dir: Option<PathBuf>,
    policy: SimulationPolicy,
    min_steps: usize,
    min_reps: usize,
    tables: RwLock<Vec<CriticalValueTable>>,
    skipped: Vec<(PathBuf, String)>,
}

/// Stable identifier of a table: family, dimension, noncentrality, size
/// and seed.
pub fn table_id(t: &CriticalValueTable) -> String {
    let j = match &t.family.noncentrality {
        None => "null".to_string(),
        Some(j) => format!("J{:016x}", hash_words(&j.iter().map(|v| v.to_bits()).collect::<Vec<_>>())),
    };
    if t.generator_version == crate::reference::PUBLISHED_GENERATOR {
        return format!("{}-q{}-{}-published", t.family.functional.slug(), t.family.dim(), j);
    }
    format!(
        "{}-q{}-{}-N{}-M{}-s{}",
        t.family.functional.slug(),
        t.family.dim(),
        j,
        t.steps,
        t.reps,
        t.seed
    )
}

impl CriticalValueCache {
    /// Empty in-memory cache.
    pub fn new(policy: SimulationPolicy) -> Self {
        let (min_steps, min_reps) = match policy {
            SimulationPolicy::Never => (0, 0),
            SimulationPolicy::Simulate { steps, reps, .. } => (steps, reps),
        };
        Self { dir: None, policy, min_steps, min_reps, tables: RwLock::new(Vec::new()), skipped: Vec::new() }
    }

    /// In-memory cache preloaded with the published tables.
    pub fn with_published(policy: SimulationPolicy) -> Self {
        let cache = Self::new(policy);
        for t in published_critical_values().expect("bundled table is well formed") {
            cache.insert(t);
        }
        cache
    }

    /// Loads every `*.json` table in `dir` (created if absent). Files from
    /// another generator version or that fail to parse are skipped and
    /// listed by [`Self::skipped`].
    pub fn open(dir: impl Into<PathBuf>, policy: SimulationPolicy) -> Result<Self> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        let mut cache = Self::new(policy);
        let mut paths: Vec<PathBuf> = std::fs::read_dir(&dir)
            .map_err(|e| Error::io(&dir, e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect();
        paths.sort();
        for p in paths {
            match CriticalValueTable::read(&p) {
                Ok(t) => cache.insert(t),
                Err(e) => cache.skipped.push((p, e.to_string())),
            }
        }
        cache.dir = Some(dir);
        Ok(cache)
    }

    /// Overrides the minimum `(steps, reps)` a table needs to serve lookups.
    pub fn require(mut self, steps: usize, reps: usize) -> Self {
        self.min_steps = steps;
        self.min_reps = reps;
        self
    }

    pub fn policy(&self) -> SimulationPolicy {
        self.policy
    }

    pub fn dir(&self) -> Option<&Path> {
        self.dir.as_deref()
    }

    pub fn skipped(&self) -> &[(PathBuf, String)] {
        &self.skipped
    }

    pub fn insert(&self, table: CriticalValueTable) {
        let mut tables = self.tables.write().expect("cache lock poisoned");
        let id = table_id(&table);
        tables.retain(|t| table_id(t) != id);
        tables.push(table);
    }

    pub fn tables(&self) -> Vec<CriticalValueTable> {
        self.tables.read().expect("cache lock poisoned").clone()
    }

    fn lookup(&self, family: &FunctionalFamily, prob: f64) -> Option<CriticalValue> {
        let tables = self.tables.read().expect("cache lock poisoned");
        tables
            .iter()
            .filter(|t| &t.family == family && t.steps >= self.min_steps && t.reps >= self.min_reps)
            .filter_map(|t| t.quantile(prob).map(|v| (t, v)))
            .max_by_key(|(t, _)| (t.reps as u128) * (t.steps as u128))
            .map(|(t, value)| CriticalValue { value, table_id: table_id(t) })
    }

    /// The `1 − alpha` quantile of `family`.
    pub fn critical_value(&self, family: &FunctionalFamily, alpha: f64) -> Result<CriticalValue> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidArgument(format!("alpha must lie in (0, 1), got {alpha}")));
        }
        self.ensure(std::slice::from_ref(family), &[alpha])?;
        self.lookup(family, 1.0 - alpha).ok_or_else(|| self.miss(family, 1.0 - alpha))
    }

    fn miss(&self, family: &FunctionalFamily, prob: f64) -> Error {
        Error::CacheMiss { family: family.label(), prob, steps: self.min_steps, reps: self.min_reps }
    }

    /// Makes sure every `(family, alpha)` pair can be served, simulating all
    /// missing families on shared walks in one pass when allowed.
    pub fn ensure(&self, families: &[FunctionalFamily], alphas: &[f64]) -> Result<()> {
        let missing: Vec<FunctionalFamily> = families
            .iter()
            .filter(|f| alphas.iter().any(|a| self.lookup(f, 1.0 - a).is_none()))
            .cloned()
            .collect();
        let Some(first) = missing.first() else { return Ok(()) };
        let SimulationPolicy::Simulate { steps, reps, seed } = self.policy else {
            let a = alphas.iter().find(|a| self.lookup(first, 1.0 - *a).is_none()).copied().unwrap_or(0.05);
            return Err(self.miss(first, 1.0 - a));
        };
        let mut probs: Vec<f64> = STANDARD_PROBS.to_vec();
        for a in alphas {
            let p = 1.0 - a;
            if !probs.iter().any(|x| (x - p).abs() < 1e-9) {
                probs.push(p);
            }
        }
        for t in quantile_tables(&missing, steps, reps, &probs, seed)? {
            if let Some(dir) = &self.dir {
                t.write(&dir.join(format!("{}.json", table_id(&t))))?;
            }
            self.insert(t);
        }
        Ok(())
    }
}

/// Default on-disk cache location: `$SNCPA_CACHE_DIR`, else
/// `$XDG_CACHE_HOME/sncpa`, else `$HOME/.cache/sncpa`, else `./.sncpa-cache`.
pub fn default_cache_dir() -> PathBuf {
    let var = |k: &str| std::env::var_os(k).filter(|v| !v.is_empty()).map(PathBuf::from);
    if let Some(d) = var(CACHE_DIR_ENV) {
        return d;
    }
    if let Some(d) = var("XDG_CACHE_HOME") {
        return d.join("sncpa");
    }
    if let Some(h) = var("HOME") {
        return h.join(".cache").join("sncpa");
    }
    PathBuf::from(".sncpa-cache")
}

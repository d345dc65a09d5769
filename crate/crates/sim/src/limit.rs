//! Pivotal limiting distributions as functionals of Brownian motion.
//!
//! A draw simulates a `q`-dimensional Gaussian random walk on `N` steps,
//! `W_k = N^{-1/2} Σ_{i≤k} ξ_i`, forms the bridge `𝔹(k/N) = W_k − (k/N)·W_N`
//! and evaluates one of
//!
//! | functional | value |
//! |---|---|
//! | `RangeRatio` | `B(1)² / (sup 𝔹 − inf 𝔹)²` |
//! | `MatrixCusumForm(q)` | `Bᵠ(1)ᵀ (∫𝔹ᵠ𝔹ᵠᵀ)⁻¹ Bᵠ(1)` |
//! | `ComponentRangeSum(q)` | `Σ_j B_j(1)² / range(𝔹_j)²` |
//! | `ShaoScalar` | `B(1)² / ∫𝔹²` |
//!
//! Ranges run over `k = 0..N`; integrals are the Riemann sums
//! `N^{-1} Σ_{k=1..N}`. A noncentrality vector `J` replaces `B(1)` by
//! `B(1) + J` in the numerator only.
//!
//! Increments are generated coordinate by coordinate (all `N` steps of
//! coordinate 0, then coordinate 1, ...), so the first `q` coordinates of a
//! higher-dimensional draw coincide with a `q`-dimensional draw from the
//! same stream. [`quantile_tables`] exploits this to evaluate several
//! functionals on one walk with results identical to separate runs.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sncpa_core::{ldl, Matrix};

use crate::error::{Error, Result};
use crate::rng::{substream, LIMIT_KEY};
use crate::table::CriticalValueTable;

/// Tabulated probabilities of the published quantile table.
pub const STANDARD_PROBS: [f64; 9] = [0.01, 0.05, 0.10, 0.25, 0.50, 0.75, 0.90, 0.95, 0.99];

const MAX_REDRAWS: u64 = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Functional {
    RangeRatio,
    MatrixCusumForm(usize),
    ComponentRangeSum(usize),
    ShaoScalar,
}

impl Functional {
    pub fn dim(self) -> usize {
        match self {
            Functional::RangeRatio | Functional::ShaoScalar => 1,
            Functional::MatrixCusumForm(q) | Functional::ComponentRangeSum(q) => q,
        }
    }

    pub fn slug(self) -> &'static str {
        match self {
            Functional::RangeRatio => "range_ratio",
            Functional::MatrixCusumForm(_) => "matrix_cusum_form",
            Functional::ComponentRangeSum(_) => "component_range_sum",
            Functional::ShaoScalar => "shao_scalar",
        }
    }

    pub fn from_slug(slug: &str, q: usize) -> Result<Self> {
        let f = match slug.replace('-', "_").as_str() {
            "range_ratio" => Functional::RangeRatio,
            "matrix_cusum_form" => Functional::MatrixCusumForm(q),
            "component_range_sum" => Functional::ComponentRangeSum(q),
            "shao_scalar" => Functional::ShaoScalar,
            other => return Err(Error::InvalidArgument(format!("unknown functional family '{other}'"))),
        };
        if q == 0 || f.dim() != q {
            return Err(Error::InvalidArgument(format!("family '{slug}' is not defined for q = {q}")));
        }
        Ok(f)
    }
}

impl std::fmt::Display for Functional {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}(q={})", self.slug(), self.dim())
    }
}

/// A functional together with an optional noncentrality vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionalFamily {
    pub functional: Functional,
    pub noncentrality: Option<Vec<f64>>,
}

impl FunctionalFamily {
    pub fn null(functional: Functional) -> Self {
        Self { functional, noncentrality: None }
    }

    pub fn noncentral(functional: Functional, j: Vec<f64>) -> Result<Self> {
        let f = Self { functional, noncentrality: Some(j) };
        f.validate()?;
        Ok(f)
    }

    pub fn dim(&self) -> usize {
        self.functional.dim()
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim() == 0 {
            return Err(Error::InvalidArgument("functional dimension must be at least 1".into()));
        }
        if let Some(j) = &self.noncentrality {
            if j.len() != self.dim() {
                return Err(Error::InvalidArgument(format!(
                    "noncentrality has length {}, {} needs {}",
                    j.len(),
                    self.functional,
                    self.dim()
                )));
            }
            if j.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidArgument("noncentrality must be finite".into()));
            }
        }
        Ok(())
    }

    pub fn label(&self) -> String {
        match &self.noncentrality {
            None => self.functional.to_string(),
            Some(j) => format!("{} J={:?}", self.functional, j),
        }
    }

    fn shift(&self, j: usize) -> f64 {
        self.noncentrality.as_ref().map_or(0.0, |v| v[j])
    }
}

impl From<Functional> for FunctionalFamily {
    fn from(f: Functional) -> Self {
        Self::null(f)
    }
}

/// Sufficient statistics of one bridge draw.
#[derive(Debug, Clone)]
pub struct BridgeSummary {
    /// `B(1) = W_N` per coordinate.
    pub endpoint: Vec<f64>,
    /// `sup 𝔹 − inf 𝔹` per coordinate.
    pub range: Vec<f64>,
    /// `N^{-1} Σ_{k=1..N} 𝔹_k 𝔹_kᵀ`.
    pub gram: Matrix<f64>,
}

impl BridgeSummary {
    /// Builds the summary from a walk given as per-coordinate increments
    /// (already scaled by `N^{-1/2}`).
    pub fn from_increments(increments: &[Vec<f64>]) -> Result<Self> {
        let dim = increments.len();
        let steps = increments.first().map_or(0, Vec::len);
        if dim == 0 || steps == 0 || increments.iter().any(|c| c.len() != steps) {
            return Err(Error::InvalidArgument("increments must be a non-empty rectangular array".into()));
        }
        let mut ws = Workspace::new(steps, dim);
        for (j, inc) in increments.iter().enumerate() {
            let w = ws.coordinate_mut(j);
            let mut acc = 0.0;
            for (k, &x) in inc.iter().enumerate() {
                acc += x;
                w[k + 1] = acc;
            }
        }
        Ok(ws.summarize(dim))
    }

    pub fn evaluate(&self, family: &FunctionalFamily) -> Result<f64> {
        family.validate()?;
        let q = family.dim();
        if q > self.endpoint.len() {
            return Err(Error::InvalidArgument(format!(
                "{} needs {q} coordinates, draw has {}",
                family.functional,
                self.endpoint.len()
            )));
        }
        let num = |j: usize| self.endpoint[j] + family.shift(j);
        Ok(match family.functional {
            Functional::RangeRatio => num(0).powi(2) / self.range[0].powi(2),
            Functional::ShaoScalar => num(0).powi(2) / self.gram[(0, 0)],
            Functional::ComponentRangeSum(q) => (0..q).map(|j| num(j).powi(2) / self.range[j].powi(2)).sum(),
            Functional::MatrixCusumForm(q) => {
                let mut g = Matrix::zeros(q, q);
                for a in 0..q {
                    for b in 0..q {
                        g[(a, b)] = self.gram[(a, b)];
                    }
                }
                let (eig, _) = g.symmetric_eigen()?;
                if !(eig[q - 1] > 0.0) || eig[0] <= 1e-12 * eig[q - 1] {
                    return Err(Error::SingularBridgeGram { redraws: 0 });
                }
                let rhs: Vec<f64> = (0..q).map(num).collect();
                let x = ldl(&g).map_err(|_| Error::SingularBridgeGram { redraws: 0 })?.solve(&rhs);
                x.iter().zip(&rhs).map(|(a, b)| a * b).sum()
            }
        })
    }
}

/// Reusable walk buffer: `dim` coordinates of `steps + 1` points each.
struct Workspace {
    steps: usize,
    dim: usize,
    walk: Vec<f64>,
}

impl Workspace {
    fn new(steps: usize, dim: usize) -> Self {
        Self { steps, dim, walk: vec![0.0; dim * (steps + 1)] }
    }

    fn coordinate_mut(&mut self, j: usize) -> &mut [f64] {
        let len = self.steps + 1;
        &mut self.walk[j * len..(j + 1) * len]
    }

    fn fill(&mut self, rng: &mut ChaCha8Rng) {
        let scale = (self.steps as f64).sqrt().recip();
        for j in 0..self.dim {
            let w = self.coordinate_mut(j);
            w[0] = 0.0;
            let mut acc = 0.0;
            for x in w[1..].iter_mut() {
                let xi: f64 = rng.sample(StandardNormal);
                acc += xi * scale;
                *x = acc;
            }
        }
    }

    /// Converts the first `dim` walks to bridges in place and summarizes them.
    fn summarize(&mut self, dim: usize) -> BridgeSummary {
        let n = self.steps;
        let len = n + 1;
        let inv_n = (n as f64).recip();
        let mut endpoint = vec![0.0; dim];
        let mut range = vec![0.0; dim];
        for j in 0..dim {
            let w = &mut self.walk[j * len..(j + 1) * len];
            let end = w[n];
            endpoint[j] = end;
            let (mut lo, mut hi) = (0.0f64, 0.0f64);
            for (k, v) in w.iter_mut().enumerate() {
                let b = *v - (k as f64 * inv_n) * end;
                *v = b;
                lo = lo.min(b);
                hi = hi.max(b);
            }
            range[j] = hi - lo;
        }
        let mut gram = Matrix::zeros(dim, dim);
        if dim == 1 {
            gram[(0, 0)] = self.walk[1..len].iter().map(|b| b * b).sum::<f64>() * inv_n;
        } else {
            let mut acc = vec![0.0; dim * dim];
            let mut row = vec![0.0; dim];
            for k in 1..len {
                for (j, r) in row.iter_mut().enumerate() {
                    *r = self.walk[j * len + k];
                }
                for a in 0..dim {
                    let ra = row[a];
                    for b in 0..=a {
                        acc[a * dim + b] += ra * row[b];
                    }
                }
            }
            for a in 0..dim {
                for b in 0..=a {
                    let v = acc[a * dim + b] * inv_n;
                    gram[(a, b)] = v;
                    gram[(b, a)] = v;
                }
            }
        }
        BridgeSummary { endpoint, range, gram }
    }
}

fn validate_request(families: &[FunctionalFamily], steps: usize) -> Result<usize> {
    if families.is_empty() {
        return Err(Error::InvalidArgument("no functional families requested".into()));
    }
    if steps < 100 {
        return Err(Error::InvalidArgument(format!("need at least 100 walk steps, got {steps}")));
    }
    for f in families {
        f.validate()?;
    }
    Ok(families.iter().map(FunctionalFamily::dim).max().unwrap_or(1))
}

/// Evaluates every family on one walk drawn from `rng`, redrawing the walk
/// while any bridge Gram matrix is numerically singular. Returns the values
/// and the number of redraws.
fn draw_all(ws: &mut Workspace, families: &[FunctionalFamily], rng: &mut ChaCha8Rng) -> Result<(Vec<f64>, u64)> {
    let mut redraws = 0;
    loop {
        ws.fill(rng);
        let summary = ws.summarize(ws.dim);
        match families.iter().map(|f| summary.evaluate(f)).collect::<Result<Vec<_>>>() {
            Ok(values) => return Ok((values, redraws)),
            Err(Error::SingularBridgeGram { .. }) if redraws < MAX_REDRAWS => redraws += 1,
            Err(Error::SingularBridgeGram { .. }) => return Err(Error::SingularBridgeGram { redraws }),
            Err(e) => return Err(e),
        }
    }
}

/// One draw of `family`: replication 0 of the limit stream for `seed`.
pub fn simulate_functional(family: &FunctionalFamily, steps: usize, seed: u64) -> Result<f64> {
    simulate_replication(family, steps, seed, 0)
}

/// Replication `index` of the limit stream for `seed`; the same draw that
/// [`quantile_table`] uses for its `index`-th replication.
pub fn simulate_replication(family: &FunctionalFamily, steps: usize, seed: u64, index: u64) -> Result<f64> {
    let fams = std::slice::from_ref(family);
    let dim = validate_request(fams, steps)?;
    let mut ws = Workspace::new(steps, dim);
    let mut rng = substream(seed, LIMIT_KEY, index);
    Ok(draw_all(&mut ws, fams, &mut rng)?.0[0])
}

/// Raw draws of several families evaluated on shared walks.
#[derive(Debug, Clone)]
pub struct JointDraws {
    /// `values[f][i]` is replication `i` of family `f`.
    pub values: Vec<Vec<f64>>,
    pub redraws: u64,
}

pub fn simulate_draws(families: &[FunctionalFamily], steps: usize, reps: usize, seed: u64) -> Result<JointDraws> {
    let dim = validate_request(families, steps)?;
    let per_rep: Vec<(Vec<f64>, u64)> = (0..reps as u64)
        .into_par_iter()
        .map_init(
            || Workspace::new(steps, dim),
            |ws, i| {
                let mut rng = substream(seed, LIMIT_KEY, i);
                draw_all(ws, families, &mut rng)
            },
        )
        .collect::<Result<_>>()?;
    let mut values = vec![Vec::with_capacity(reps); families.len()];
    let mut redraws = 0;
    for (vals, r) in per_rep {
        redraws += r;
        for (dst, v) in values.iter_mut().zip(vals) {
            dst.push(v);
        }
    }
    Ok(JointDraws { values, redraws })
}

/// Quantile tables for several families from one set of shared walks.
pub fn quantile_tables(
    families: &[FunctionalFamily],
    steps: usize,
    reps: usize,
    probs: &[f64],
    seed: u64,
) -> Result<Vec<CriticalValueTable>> {
    if reps < 100 {
        return Err(Error::InvalidArgument(format!("need at least 100 replications, got {reps}")));
    }
    if probs.iter().any(|p| !(*p > 0.0 && *p < 1.0)) {
        return Err(Error::InvalidArgument("probabilities must lie in (0, 1)".into()));
    }
    let draws = simulate_draws(families, steps, reps, seed)?;
    Ok(families
        .iter()
        .zip(draws.values)
        .map(|(f, v)| CriticalValueTable::from_draws(f.clone(), v, probs, steps, seed, draws.redraws))
        .collect())
}

/// Empirical (type-7) quantiles of `reps` independent draws of `family`.
pub fn quantile_table(
    family: &FunctionalFamily,
    steps: usize,
    reps: usize,
    probs: &[f64],
    seed: u64,
) -> Result<CriticalValueTable> {
    Ok(quantile_tables(std::slice::from_ref(family), steps, reps, probs, seed)?.remove(0))
}

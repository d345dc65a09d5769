//! Size and power experiments over parameter grids.
//!
//! Every replication draws one sample and applies the requested statistics
//! to it:
//!
//! | statistic | test function | reference distribution |
//! |---|---|---|
//! | `Q2` | `(1, predictor)` | `MatrixCusumForm(2)`; `ComponentRangeSum(2)` when τ = 1 |
//! | `Q1` | `predictor` | `RangeRatio` |
//! | `T_SN` | none | `ShaoScalar` |
//! | `T_GW` | `(1, predictor)` | χ²₂ |
//! | `T_DM` | none | two-sided N(0, 1) |
//!
//! The HAC statistics use a Bartlett kernel with lag `τ − 1` unless the
//! grid says otherwise.
//!
//! Replication `r` of a cell draws from `substream(seed, cell_key, r)` and
//! per-cell rejection counts are integer sums, so reports do not depend on
//! the worker count.

use std::fmt::Write as _;

use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sncpa_core::{
    chi2_quantile, normal_two_sided_critical, q_scalar, q_vector, q_vector_onestep, t_dm, t_gw, t_sn, transform,
    HacConfig, HorizonCheck,
};

use crate::cache::CriticalValueCache;
use crate::dgp::{dgp1_from, dgp2_from, test_function, Dgp1Config, Dgp2Config, SimulatedSample, TestFunctionVariant};
use crate::error::{Error, Result};
use crate::limit::{Functional, FunctionalFamily};
use crate::rng::{hash_words, substream};

pub const PAPER_N: [usize; 8] = [50, 100, 150, 200, 250, 300, 350, 400];
pub const PAPER_PARAMS: [f64; 3] = [0.2, 0.5, 0.8];
pub const PAPER_LEVELS: [f64; 3] = [0.10, 0.05, 0.01];
pub const PAPER_REPS: usize = 5000;
pub const PAPER_DELTA: f64 = 0.2;
pub const PAPER_D: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DgpKind {
    Dgp1,
    Dgp2,
}

impl DgpKind {
    pub fn slug(self) -> &'static str {
        match self {
            DgpKind::Dgp1 => "dgp1",
            DgpKind::Dgp2 => "dgp2",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "dgp1" | "1" => Ok(DgpKind::Dgp1),
            "dgp2" | "2" => Ok(DgpKind::Dgp2),
            _ => Err(Error::InvalidArgument(format!("unknown DGP '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Statistic {
    Q2,
    Q1,
    #[serde(rename = "T_SN")]
    TSn,
    #[serde(rename = "T_GW")]
    TGw,
    #[serde(rename = "T_DM")]
    TDm,
}

impl Statistic {
    pub const ALL: [Statistic; 5] = [Statistic::Q2, Statistic::Q1, Statistic::TSn, Statistic::TGw, Statistic::TDm];

    pub fn label(self) -> &'static str {
        match self {
            Statistic::Q2 => "Q2",
            Statistic::Q1 => "Q1",
            Statistic::TSn => "T_SN",
            Statistic::TGw => "T_GW",
            Statistic::TDm => "T_DM",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Statistic::ALL
            .into_iter()
            .find(|st| st.label().eq_ignore_ascii_case(s) || st.label().replace('_', "").eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidArgument(format!("unknown statistic '{s}'")))
    }

    pub fn is_self_normalized(self) -> bool {
        matches!(self, Statistic::Q2 | Statistic::Q1 | Statistic::TSn)
    }

    /// Limiting family whose quantiles serve as critical values, or `None`
    /// for the HAC statistics with analytic critical values.
    pub fn reference_family(self, tau: usize) -> Option<FunctionalFamily> {
        match self {
            Statistic::Q2 if tau == 1 => Some(Functional::ComponentRangeSum(2).into()),
            Statistic::Q2 => Some(Functional::MatrixCusumForm(2).into()),
            Statistic::Q1 => Some(Functional::RangeRatio.into()),
            Statistic::TSn => Some(Functional::ShaoScalar.into()),
            Statistic::TGw | Statistic::TDm => None,
        }
    }

    /// Value of the statistic on one sample.
    pub fn compute(self, sample: &SimulatedSample, hac: &HacConfig) -> Result<f64> {
        let tau = sample.tau;
        let ld = &sample.loss_diff;
        let with_intercept = || transform(ld, &test_function(sample, TestFunctionVariant::WithIntercept), tau);
        let r = match self {
            Statistic::Q2 if tau == 1 => q_vector_onestep(&with_intercept()?, HorizonCheck::Enforce)?,
            Statistic::Q2 => q_vector(&with_intercept()?)?,
            Statistic::Q1 => q_scalar(&transform(ld, &test_function(sample, TestFunctionVariant::ScalarOnly), tau)?)?,
            Statistic::TSn => t_sn(ld, tau)?,
            Statistic::TGw => t_gw(&with_intercept()?, hac)?,
            Statistic::TDm => t_dm(ld, tau, hac)?,
        };
        Ok(r.statistic)
    }

    fn rejects(self, value: f64, critical: f64) -> bool {
        match self {
            Statistic::TDm => value.abs() > critical,
            _ => value > critical,
        }
    }
}

impl std::fmt::Display for Statistic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentGrid {
    pub dgp: DgpKind,
    /// `ρ` values (DGP 1) or `p` values (DGP 2).
    pub params: Vec<f64>,
    /// `δ` or `d` values; `0` gives the null.
    pub drifts: Vec<f64>,
    pub n_values: Vec<usize>,
    pub taus: Vec<usize>,
    pub reps: usize,
    pub levels: Vec<f64>,
    pub seed: u64,
    pub theta: f64,
    pub statistics: Vec<Statistic>,
    pub hac: HacConfig,
}

impl ExperimentGrid {
    pub fn new(dgp: DgpKind, seed: u64) -> Self {
        Self {
            dgp,
            params: PAPER_PARAMS.to_vec(),
            drifts: vec![0.0],
            n_values: PAPER_N.to_vec(),
            taus: vec![2],
            reps: PAPER_REPS,
            levels: PAPER_LEVELS.to_vec(),
            seed,
            theta: crate::dgp::DEFAULT_THETA,
            statistics: Statistic::ALL.to_vec(),
            hac: HacConfig::horizon_lag(),
        }
    }

    /// Size grid of one published table.
    pub fn paper_size(dgp: DgpKind, tau: usize, seed: u64) -> Self {
        Self { taus: vec![tau], ..Self::new(dgp, seed) }
    }

    /// Power grid of one published figure: both horizons, paper drift.
    pub fn paper_power(dgp: DgpKind, seed: u64) -> Self {
        let drift = match dgp {
            DgpKind::Dgp1 => PAPER_DELTA,
            DgpKind::Dgp2 => PAPER_D,
        };
        Self { drifts: vec![drift], taus: vec![2, 3], ..Self::new(dgp, seed) }
    }

    pub fn with_reps(mut self, reps: usize) -> Self {
        self.reps = reps;
        self
    }

    pub fn with_hac(mut self, hac: HacConfig) -> Self {
        self.hac = hac;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if self.reps == 0 {
            return bad("reps must be at least 1");
        }
        if self.params.is_empty() || self.drifts.is_empty() || self.n_values.is_empty() || self.taus.is_empty() {
            return bad("every grid axis needs at least one value");
        }
        if self.levels.is_empty() || self.levels.iter().any(|l| !(*l > 0.0 && *l < 1.0)) {
            return bad("levels must lie in (0, 1)");
        }
        if self.statistics.is_empty() {
            return bad("no statistics requested");
        }
        for cell in self.cells() {
            cell.check(self.theta)?;
        }
        Ok(())
    }

    pub fn cells(&self) -> Vec<Cell> {
        let mut out = Vec::new();
        for &param in &self.params {
            for &drift in &self.drifts {
                for &tau in &self.taus {
                    for &n in &self.n_values {
                        out.push(Cell { dgp: self.dgp, param, drift, n, tau });
                    }
                }
            }
        }
        out
    }

    /// Families whose quantiles the grid needs.
    pub fn required_families(&self) -> Vec<FunctionalFamily> {
        let mut fams: Vec<FunctionalFamily> = Vec::new();
        for &tau in &self.taus {
            for s in &self.statistics {
                if let Some(f) = s.reference_family(tau) {
                    if !fams.contains(&f) {
                        fams.push(f);
                    }
                }
            }
        }
        fams
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub dgp: DgpKind,
    pub param: f64,
    pub drift: f64,
    pub n: usize,
    pub tau: usize,
}

impl Cell {
    fn key(&self, theta: f64) -> u64 {
        hash_words(&[
            self.dgp as u64,
            self.param.to_bits(),
            self.drift.to_bits(),
            self.n as u64,
            self.tau as u64,
            theta.to_bits(),
        ])
    }

    fn check(&self, theta: f64) -> Result<()> {
        match self.dgp {
            DgpKind::Dgp1 => Dgp1Config { rho: self.param, delta: self.drift, tau: self.tau, n: self.n, theta }.validate(),
            DgpKind::Dgp2 => Dgp2Config { p: self.param, d: self.drift, tau: self.tau, n: self.n, theta }.validate(),
        }
    }

    /// Sample for replication `rep` of this cell.
    pub fn sample(&self, seed: u64, theta: f64, rep: u64) -> Result<SimulatedSample> {
        let mut rng: ChaCha8Rng = substream(seed, self.key(theta), rep);
        match self.dgp {
            DgpKind::Dgp1 => {
                dgp1_from(&Dgp1Config { rho: self.param, delta: self.drift, tau: self.tau, n: self.n, theta }, &mut rng)
            }
            DgpKind::Dgp2 => {
                dgp2_from(&Dgp2Config { p: self.param, d: self.drift, tau: self.tau, n: self.n, theta }, &mut rng)
            }
        }
    }
}

/// Critical value used for one (statistic, τ, level).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalValueUse {
    pub statistic: Statistic,
    pub tau: usize,
    pub level: f64,
    pub value: f64,
    pub source: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub cell: Cell,
    pub statistic: Statistic,
    /// Rejection counts, one per grid level.
    pub rejections: Vec<u64>,
    /// Replications where the statistic could not be computed.
    pub failures: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McReport {
    pub grid: ExperimentGrid,
    pub critical_values: Vec<CriticalValueUse>,
    pub results: Vec<CellResult>,
}

impl McReport {
    pub fn frequency(&self, r: &CellResult, level: f64) -> Option<f64> {
        let i = self.grid.levels.iter().position(|l| (l - level).abs() < 1e-12)?;
        Some(r.rejections[i] as f64 / self.grid.reps as f64)
    }

    pub fn find(&self, param: f64, drift: f64, n: usize, tau: usize, statistic: Statistic) -> Option<&CellResult> {
        self.results.iter().find(|r| {
            r.cell.param == param && r.cell.drift == drift && r.cell.n == n && r.cell.tau == tau && r.statistic == statistic
        })
    }

    /// Rejection frequency of one cell and statistic at `level`.
    pub fn rate(&self, param: f64, drift: f64, n: usize, tau: usize, statistic: Statistic, level: f64) -> Option<f64> {
        self.frequency(self.find(param, drift, n, tau, statistic)?, level)
    }

    pub fn total_failures(&self) -> u64 {
        self.results.iter().map(|r| r.failures).sum()
    }

    /// One row per cell and statistic:
    /// `dgp,param,drift,tau,n,statistic,reps,failures,rej_<level>...`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("dgp,param,drift,tau,n,statistic,reps,failures");
        for l in &self.grid.levels {
            let _ = write!(s, ",rej_{l:.2}");
        }
        s.push('\n');
        for r in &self.results {
            let c = &r.cell;
            let _ = write!(
                s,
                "{},{},{},{},{},{},{},{}",
                c.dgp.slug(),
                c.param,
                c.drift,
                c.tau,
                c.n,
                r.statistic,
                self.grid.reps,
                r.failures
            );
            for &k in &r.rejections {
                let _ = write!(s, ",{:.4}", k as f64 / self.grid.reps as f64);
            }
            s.push('\n');
        }
        s
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }
}

fn resolve_critical_values(grid: &ExperimentGrid, cache: &CriticalValueCache) -> Result<Vec<CriticalValueUse>> {
    let missing = |e: Error| match e {
        Error::CacheMiss { family, prob, steps, reps } => Error::MissingCriticalValues(format!(
            "{family} at probability {prob} (steps >= {steps}, reps >= {reps})"
        )),
        other => other,
    };
    cache.ensure(&grid.required_families(), &grid.levels).map_err(missing)?;
    let mut out = Vec::new();
    for &tau in &grid.taus {
        for &statistic in &grid.statistics {
            for &level in &grid.levels {
                let (value, source) = match statistic {
                    Statistic::TGw => (chi2_quantile(2, 1.0 - level)?, "chi2(2)".to_string()),
                    Statistic::TDm => (normal_two_sided_critical(level)?, "normal two-sided".to_string()),
                    s => {
                        let fam = s.reference_family(tau).expect("self-normalized statistic");
                        let cv = cache.critical_value(&fam, level).map_err(missing)?;
                        (cv.value, cv.table_id)
                    }
                };
                out.push(CriticalValueUse { statistic, tau, level, value, source });
            }
        }
    }
    Ok(out)
}

pub fn run_grid(grid: &ExperimentGrid, cache: &CriticalValueCache) -> Result<McReport> {
    grid.validate()?;
    let cvs = resolve_critical_values(grid, cache)?;
    let stats = &grid.statistics;
    let nl = grid.levels.len();
    let mut results = Vec::new();
    for cell in grid.cells() {
        let crit: Vec<Vec<f64>> = stats
            .iter()
            .map(|s| {
                grid.levels
                    .iter()
                    .map(|l| {
                        cvs.iter()
                            .find(|c| c.statistic == *s && c.tau == cell.tau && c.level == *l)
                            .expect("resolved above")
                            .value
                    })
                    .collect()
            })
            .collect();
        // counts[s * (nl + 1) + l] = rejections; slot nl = failures.
        let width = nl + 1;
        let counts = (0..grid.reps as u64)
            .into_par_iter()
            .map(|rep| -> Result<Vec<u64>> {
                let sample = cell.sample(grid.seed, grid.theta, rep)?;
                let mut c = vec![0u64; stats.len() * width];
                for (i, s) in stats.iter().enumerate() {
                    match s.compute(&sample, &grid.hac) {
                        Ok(v) if v.is_finite() => {
                            for (l, &cv) in crit[i].iter().enumerate() {
                                c[i * width + l] += u64::from(s.rejects(v, cv));
                            }
                        }
                        _ => c[i * width + nl] += 1,
                    }
                }
                Ok(c)
            })
            .try_reduce(
                || vec![0u64; stats.len() * width],
                |mut a, b| {
                    a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                    Ok(a)
                },
            )?;
        for (i, &statistic) in stats.iter().enumerate() {
            results.push(CellResult {
                cell,
                statistic,
                rejections: counts[i * width..i * width + nl].to_vec(),
                failures: counts[i * width + nl],
            });
        }
    }
    Ok(McReport { grid: grid.clone(), critical_values: cvs, results })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerPoint {
    pub statistic: Statistic,
    pub param: f64,
    pub drift: f64,
    pub tau: usize,
    pub n: usize,
    pub power: f64,
    /// Binomial standard error `√(π(1−π)/B)`.
    pub std_error: f64,
}

/// Rejection frequencies at 5%, ordered by statistic, parameter, drift, τ
/// and then `n`.
pub fn power_curve(grid: &ExperimentGrid, cache: &CriticalValueCache) -> Result<Vec<PowerPoint>> {
    let mut g = grid.clone();
    g.levels = vec![0.05];
    let report = run_grid(&g, cache)?;
    Ok(power_points(&report))
}

/// The 5% rows of a report as power points.
pub fn power_points(report: &McReport) -> Vec<PowerPoint> {
    let b = report.grid.reps as f64;
    let mut pts: Vec<PowerPoint> = report
        .results
        .iter()
        .filter_map(|r| {
            let power = report.frequency(r, 0.05)?;
            Some(PowerPoint {
                statistic: r.statistic,
                param: r.cell.param,
                drift: r.cell.drift,
                tau: r.cell.tau,
                n: r.cell.n,
                power,
                std_error: (power * (1.0 - power) / b).sqrt(),
            })
        })
        .collect();
    pts.sort_by(|a, b| {
        a.statistic
            .cmp(&b.statistic)
            .then(a.param.total_cmp(&b.param))
            .then(a.drift.total_cmp(&b.drift))
            .then(a.tau.cmp(&b.tau))
            .then(a.n.cmp(&b.n))
    });
    pts
}

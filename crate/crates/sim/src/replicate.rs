//! Comparison of experiment output with the published tables.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::montecarlo::{power_points, DgpKind, ExperimentGrid, McReport, PowerPoint, Statistic};
use crate::reference::published_size_table;

/// Reps below which a replication is flagged as indicative only.
pub const INDICATIVE_REPS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ReplicationTarget {
    Size { dgp: DgpKind, tau: usize },
    Power { dgp: DgpKind },
}

impl ReplicationTarget {
    pub const ALL: [&'static str; 6] =
        ["dgp1-size-tau2", "dgp1-size-tau3", "dgp2-size-tau2", "dgp2-size-tau3", "dgp1-power", "dgp2-power"];

    pub fn parse(id: &str) -> Result<Self> {
        let t = match id {
            "dgp1-size-tau2" => ReplicationTarget::Size { dgp: DgpKind::Dgp1, tau: 2 },
            "dgp1-size-tau3" => ReplicationTarget::Size { dgp: DgpKind::Dgp1, tau: 3 },
            "dgp2-size-tau2" => ReplicationTarget::Size { dgp: DgpKind::Dgp2, tau: 2 },
            "dgp2-size-tau3" => ReplicationTarget::Size { dgp: DgpKind::Dgp2, tau: 3 },
            "dgp1-power" => ReplicationTarget::Power { dgp: DgpKind::Dgp1 },
            "dgp2-power" => ReplicationTarget::Power { dgp: DgpKind::Dgp2 },
            _ => {
                return Err(Error::InvalidArgument(format!(
                    "unknown table '{id}'; expected one of {}",
                    Self::ALL.join(", ")
                )))
            }
        };
        Ok(t)
    }

    pub fn id(&self) -> String {
        match self {
            ReplicationTarget::Size { dgp, tau } => format!("{}-size-tau{tau}", dgp.slug()),
            ReplicationTarget::Power { dgp } => format!("{}-power", dgp.slug()),
        }
    }

    pub fn grid(&self, seed: u64) -> ExperimentGrid {
        match *self {
            ReplicationTarget::Size { dgp, tau } => ExperimentGrid::paper_size(dgp, tau, seed),
            ReplicationTarget::Power { dgp } => ExperimentGrid::paper_power(dgp, seed),
        }
    }
}

/// Cell tolerance `max(floor, 4·√(π(1−π)/B))`; the floor is 0.015 for the
/// self-normalized statistics and 0.03 for the HAC ones.
pub fn cell_tolerance(statistic: Statistic, paper: f64, reps: usize) -> f64 {
    let floor: f64 = if statistic.is_self_normalized() { 0.015 } else { 0.03 };
    floor.max(4.0 * (paper * (1.0 - paper) / reps as f64).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellComparison {
    pub param: f64,
    pub n: usize,
    pub tau: usize,
    pub statistic: Statistic,
    pub level: f64,
    pub ours: f64,
    pub paper: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizeComparison {
    pub table: String,
    pub reps: usize,
    pub cells: Vec<CellComparison>,
}

impl SizeComparison {
    pub fn indicative_only(&self) -> bool {
        self.reps < INDICATIVE_REPS
    }

    /// Fraction of passing cells among `statistics`.
    pub fn pass_rate(&self, statistics: &[Statistic]) -> f64 {
        let sel: Vec<_> = self.cells.iter().filter(|c| statistics.contains(&c.statistic)).collect();
        if sel.is_empty() {
            return f64::NAN;
        }
        sel.iter().filter(|c| c.pass).count() as f64 / sel.len() as f64
    }

    /// `param,n,tau,statistic,level,ours,paper,abs_diff,tolerance,pass`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("param,n,tau,statistic,level,ours,paper,abs_diff,tolerance,pass\n");
        for c in &self.cells {
            let _ = writeln!(
                s,
                "{},{},{},{},{:.2},{:.4},{:.3},{:.4},{:.4},{}",
                c.param,
                c.n,
                c.tau,
                c.statistic,
                c.level,
                c.ours,
                c.paper,
                (c.ours - c.paper).abs(),
                c.tolerance,
                c.pass
            );
        }
        s
    }
}

/// Compares a size report with the published table `table`. Tolerances use
/// the published replication count `B = 5000`.
pub fn compare_size(report: &McReport, table: &str) -> Result<SizeComparison> {
    let rows = published_size_table(table)?;
    let mut cells = Vec::new();
    for row in &rows {
        let statistic = Statistic::parse(&row.statistic)?;
        if !report.grid.statistics.contains(&statistic) {
            continue;
        }
        let Some(res) = report.find(row.param, 0.0, row.n, row.tau, statistic) else {
            continue;
        };
        for &level in &report.grid.levels {
            let (Some(paper), Some(ours)) = (row.at_level(level), report.frequency(res, level)) else {
                continue;
            };
            let tolerance = cell_tolerance(statistic, paper, crate::montecarlo::PAPER_REPS);
            cells.push(CellComparison {
                param: row.param,
                n: row.n,
                tau: row.tau,
                statistic,
                level,
                ours,
                paper,
                tolerance,
                pass: (ours - paper).abs() <= tolerance + 1e-12,
            });
        }
    }
    if cells.is_empty() {
        return Err(Error::InvalidArgument(format!("report shares no cells with '{table}'")));
    }
    Ok(SizeComparison { table: table.to_string(), reps: report.grid.reps, cells })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveCheck {
    pub statistic: Statistic,
    pub param: f64,
    pub tau: usize,
    pub description: String,
    pub pass: bool,
}

/// Counts decreases of more than `2·SE` between consecutive points of a
/// curve ordered by `n`.
pub fn significant_inversions(curve: &[&PowerPoint]) -> usize {
    curve
        .windows(2)
        .filter(|w| {
            let se = (w[0].std_error.powi(2) + w[1].std_error.powi(2)).sqrt();
            w[1].power < w[0].power - 2.0 * se
        })
        .count()
}

/// Qualitative power checks: `Q2`/`Q1` curves nondecreasing in `n` (at most
/// one inversion beyond 2 SE) and above 0.8 at the largest `n` for τ = 2;
/// `T_SN`/`T_DM` within `[0.02, 0.09]` everywhere.
pub fn check_power(report: &McReport) -> Vec<CurveCheck> {
    let pts = power_points(report);
    let n_max = report.grid.n_values.iter().copied().max().unwrap_or(0);
    let mut out = Vec::new();
    for &statistic in &report.grid.statistics {
        for &param in &report.grid.params {
            for &tau in &report.grid.taus {
                let curve: Vec<&PowerPoint> =
                    pts.iter().filter(|p| p.statistic == statistic && p.param == param && p.tau == tau).collect();
                if curve.is_empty() {
                    continue;
                }
                let mut push = |description: String, pass: bool| {
                    out.push(CurveCheck { statistic, param, tau, description, pass })
                };
                match statistic {
                    Statistic::Q2 | Statistic::Q1 => {
                        let inv = significant_inversions(&curve);
                        push(format!("{inv} inversion(s) beyond 2 SE"), inv <= 1);
                        if tau == 2 {
                            if let Some(p) = curve.iter().find(|p| p.n == n_max) {
                                push(format!("power {:.3} at n={n_max} (> 0.8)", p.power), p.power > 0.8);
                            }
                        }
                    }
                    Statistic::TSn | Statistic::TDm => {
                        let lo = curve.iter().map(|p| p.power).fold(f64::INFINITY, f64::min);
                        let hi = curve.iter().map(|p| p.power).fold(f64::NEG_INFINITY, f64::max);
                        push(format!("power range [{lo:.3}, {hi:.3}] (within [0.02, 0.09])"), lo >= 0.02 && hi <= 0.09);
                    }
                    Statistic::TGw => {}
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn target_ids_round_trip() {
        for id in ReplicationTarget::ALL {
            assert_eq!(ReplicationTarget::parse(id).unwrap().id(), id);
        }
        assert!(ReplicationTarget::parse("dgp3-size").is_err());
    }

    #[test]
    fn tolerance_formula() {
        assert_eq!(cell_tolerance(Statistic::Q2, 0.056, 5000), 0.015);
        assert!((cell_tolerance(Statistic::Q2, 0.5, 5000) - 4.0 * (0.25f64 / 5000.0).sqrt()).abs() < 1e-15);
        assert_eq!(cell_tolerance(Statistic::TGw, 0.097, 5000), 0.03);
    }
}

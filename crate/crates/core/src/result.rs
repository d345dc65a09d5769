use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum StatFamily {
    ScalarMultistep,
    VectorMultistep,
    ScalarOneStep,
    VectorOneStep,
    HacDM,
    HacGW,
    SnDM,
}

impl StatFamily {
    /// Two-sided families reject on `|statistic|`.
    pub fn is_two_sided(self) -> bool {
        matches!(self, StatFamily::HacDM)
    }

    pub fn label(self) -> &'static str {
        match self {
            StatFamily::ScalarMultistep => "Q1",
            StatFamily::VectorMultistep => "Q2",
            StatFamily::ScalarOneStep => "Q1-onestep",
            StatFamily::VectorOneStep => "Q2-onestep",
            StatFamily::HacDM => "T_DM",
            StatFamily::HacGW => "T_GW",
            StatFamily::SnDM => "T_SN",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Decision {
    pub level: f64,
    pub critical_value: f64,
    pub reject: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult<T> {
    pub statistic: T,
    pub family: StatFamily,
    pub q: usize,
    pub tau: usize,
    pub n: usize,
    /// One entry per nominal level, in the order they were added.
    pub decisions: Vec<Decision>,
    pub warnings: Vec<String>,
}

impl<T: Scalar> TestResult<T> {
    pub fn new(statistic: T, family: StatFamily, q: usize, tau: usize, n: usize) -> Self {
        Self { statistic, family, q, tau, n, decisions: Vec::new(), warnings: Vec::new() }
    }

    /// Records the decision at `level` against `critical_value`; an existing
    /// entry for the same level is replaced.
    pub fn decide(&mut self, level: f64, critical_value: f64) -> bool {
        let stat = self.statistic.as_f64();
        let stat = if self.family.is_two_sided() { stat.abs() } else { stat };
        let reject = stat > critical_value;
        self.decisions.retain(|d| d.level != level);
        self.decisions.push(Decision { level, critical_value, reject });
        reject
    }

    pub fn with_decision(mut self, level: f64, critical_value: f64) -> Self {
        self.decide(level, critical_value);
        self
    }

    pub fn rejects_at(&self, level: f64) -> Option<bool> {
        self.decisions.iter().find(|d| d.level == level).map(|d| d.reject)
    }
}

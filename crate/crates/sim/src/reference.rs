//! Published tables shipped with the crate.

use std::collections::BTreeMap;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::limit::{Functional, FunctionalFamily};
use crate::table::CriticalValueTable;

pub const PUBLISHED_GENERATOR: &str = "published-table1";
pub const PUBLISHED_STEPS: usize = 200_000;
pub const PUBLISHED_REPS: usize = 10_000;

const TABLE1_CSV: &str = include_str!("../fixtures/table1_critical_values.csv");
const SIZE_CSV: &str = include_str!("../fixtures/size_tables.csv");

fn reader(text: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes())
}

#[derive(Deserialize)]
struct Table1Row {
    family: String,
    q: usize,
    prob: f64,
    value: f64,
}

/// The published limiting null quantiles: `RangeRatio` and
/// `MatrixCusumForm(2..=5)`.
pub fn published_critical_values() -> Result<Vec<CriticalValueTable>> {
    let mut by_family: BTreeMap<Functional, Vec<(f64, f64)>> = BTreeMap::new();
    for row in reader(TABLE1_CSV).deserialize() {
        let row: Table1Row = row?;
        let f = Functional::from_slug(&row.family, row.q)?;
        by_family.entry(f).or_default().push((row.prob, row.value));
    }
    by_family
        .into_iter()
        .map(|(f, mut pts)| {
            pts.sort_by(|a, b| a.0.total_cmp(&b.0));
            let t = CriticalValueTable {
                family: FunctionalFamily::null(f),
                probs: pts.iter().map(|p| p.0).collect(),
                values: pts.iter().map(|p| p.1).collect(),
                std_errors: Vec::new(),
                steps: PUBLISHED_STEPS,
                reps: PUBLISHED_REPS,
                seed: 0,
                redraws: 0,
                generator_version: PUBLISHED_GENERATOR.into(),
            };
            t.check()?;
            Ok(t)
        })
        .collect()
}

/// Published quantile of a null family, if tabulated.
pub fn published_quantile(functional: Functional, prob: f64) -> Option<f64> {
    published_critical_values()
        .ok()?
        .into_iter()
        .find(|t| t.family.functional == functional)
        .and_then(|t| t.quantile(prob))
}

/// One published size-table row: a cell and statistic with its
/// rejection frequencies at 10%, 5% and 1%.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct SizeRow {
    pub table: String,
    pub dgp: String,
    pub tau: usize,
    pub param: f64,
    pub n: usize,
    pub statistic: String,
    #[serde(rename = "rej_0.10")]
    pub rej_10: f64,
    #[serde(rename = "rej_0.05")]
    pub rej_05: f64,
    #[serde(rename = "rej_0.01")]
    pub rej_01: f64,
}

impl SizeRow {
    pub fn at_level(&self, level: f64) -> Option<f64> {
        [(0.10, self.rej_10), (0.05, self.rej_05), (0.01, self.rej_01)]
            .into_iter()
            .find(|(l, _)| (l - level).abs() < 1e-9)
            .map(|(_, v)| v)
    }
}

pub const SIZE_TABLES: [&str; 4] = ["dgp1-size-tau2", "dgp1-size-tau3", "dgp2-size-tau2", "dgp2-size-tau3"];

pub fn published_size_rows() -> Result<Vec<SizeRow>> {
    let rows: Vec<SizeRow> = reader(SIZE_CSV).deserialize().collect::<std::result::Result<_, _>>()?;
    if rows.is_empty() {
        return Err(Error::MalformedTable("size fixture is empty".into()));
    }
    Ok(rows)
}

pub fn published_size_table(name: &str) -> Result<Vec<SizeRow>> {
    let rows: Vec<SizeRow> = published_size_rows()?.into_iter().filter(|r| r.table == name).collect();
    if rows.is_empty() {
        return Err(Error::InvalidArgument(format!("no published table named '{name}'")));
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table1_spot_values() {
        assert_eq!(published_quantile(Functional::RangeRatio, 0.95), Some(3.071));
        assert_eq!(published_quantile(Functional::MatrixCusumForm(2), 0.95), Some(103.114));
        assert_eq!(published_quantile(Functional::MatrixCusumForm(5), 0.5), Some(96.632));
        assert_eq!(published_quantile(Functional::RangeRatio, 0.99), Some(6.121));
        assert_eq!(published_critical_values().unwrap().len(), 5);
    }

    #[test]
    fn size_tables_complete() {
        let rows = published_size_rows().unwrap();
        assert_eq!(rows.len(), 480);
        for name in SIZE_TABLES {
            assert_eq!(published_size_table(name).unwrap().len(), 120);
        }
        let r = rows
            .iter()
            .find(|r| r.table == "dgp1-size-tau2" && r.param == 0.2 && r.n == 400 && r.statistic == "Q2")
            .unwrap();
        assert_eq!((r.rej_10, r.rej_05, r.rej_01), (0.105, 0.056, 0.010));
        for r in &rows {
            assert!(r.rej_10 >= r.rej_05 && r.rej_05 >= r.rej_01, "{r:?}");
        }
    }
}

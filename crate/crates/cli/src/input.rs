use std::collections::HashMap;
use std::path::Path;

use crate::CliError;

/// Numeric columns of a CSV file with a header row.
pub struct InputTable {
    names: Vec<String>,
    index: HashMap<String, usize>,
    rows: Vec<csv::StringRecord>,
    path: String,
}

impl InputTable {
    pub fn read(path: &Path) -> Result<Self, CliError> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        let names: Vec<String> = rdr
            .headers()
            .map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?
            .iter()
            .map(str::to_string)
            .collect();
        let index = names.iter().enumerate().map(|(i, n)| (n.clone(), i)).collect();
        let rows = rdr
            .records()
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
        Ok(Self { names, index, rows, path: path.display().to_string() })
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    /// Fails on the first name that is not a column.
    pub fn require<'a>(&self, names: impl IntoIterator<Item = &'a str>) -> Result<(), CliError> {
        names.into_iter().try_for_each(|n| self.position(n).map(|_| ()))
    }

    fn position(&self, name: &str) -> Result<usize, CliError> {
        self.index.get(name).copied().ok_or_else(|| {
            CliError::Usage(format!("unknown column '{name}' in {}; available: {}", self.path, self.names.join(", ")))
        })
    }

    pub fn column(&self, name: &str) -> Result<Vec<f64>, CliError> {
        let j = self.position(name)?;
        self.rows
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let cell = r.get(j).unwrap_or("");
                // Line numbers count the header as line 1.
                let line = i + 2;
                if cell.is_empty() || cell.eq_ignore_ascii_case("na") || cell.eq_ignore_ascii_case("nan") {
                    return Err(CliError::Parse(format!("{}:{line}: missing value in column '{name}'", self.path)));
                }
                cell.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| CliError::Parse(format!("{}:{line}: '{cell}' in column '{name}' is not a finite number", self.path)))
            })
            .collect()
    }
}

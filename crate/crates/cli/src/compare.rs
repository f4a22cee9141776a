//! Differences between two trajectory tables.

use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use bhgcs::io::Table;

use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct ColumnDiff {
    pub column: String,
    pub max_abs_diff: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompareReport {
    pub rows: usize,
    /// Every column present in both tables, except `t`.
    pub columns: Vec<ColumnDiff>,
    /// Largest difference over the population columns.
    pub max_population_diff: f64,
    pub tolerance: f64,
}

impl CompareReport {
    pub fn passed(&self) -> bool {
        self.max_population_diff <= self.tolerance
    }
}

pub fn read_table(path: &Path) -> Result<Table, CliError> {
    let file = File::open(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    Table::read(BufReader::new(file)).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// Compares two tables row by row. Both must share the time grid and have
/// the same population columns.
pub fn compare_tables(a: &Table, b: &Table, tolerance: f64) -> Result<CompareReport, CliError> {
    let invalid = |msg: String| CliError::Validation(vec![msg]);
    let (ta, tb) = match (a.column("t"), b.column("t")) {
        (Some(ta), Some(tb)) => (ta, tb),
        _ => return Err(invalid("both tables need a t column".into())),
    };
    if ta.len() != tb.len() {
        return Err(invalid(format!("tables have {} and {} rows", ta.len(), tb.len())));
    }
    if let Some(i) = ta.iter().zip(&tb).position(|(x, y)| (x - y).abs() > 1e-9 * x.abs().max(1.0)) {
        return Err(invalid(format!("time grids differ at row {}: {} vs {}", i + 1, ta[i], tb[i])));
    }
    let pops = a.population_columns();
    if pops.is_empty() || pops != b.population_columns() {
        return Err(invalid("population columns differ".into()));
    }
    let mut columns = Vec::new();
    for name in a.header.iter().filter(|h| *h != "t") {
        if let (Some(x), Some(y)) = (a.column(name), b.column(name)) {
            let max_abs_diff = x.iter().zip(&y).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
            columns.push(ColumnDiff { column: name.clone(), max_abs_diff });
        }
    }
    let max_population_diff = columns
        .iter()
        .filter(|c| c.column.starts_with("pop_"))
        .map(|c| c.max_abs_diff)
        .fold(0.0, f64::max);
    Ok(CompareReport { rows: ta.len(), columns, max_population_diff, tolerance })
}

pub fn compare_files(a: &Path, b: &Path, tolerance: f64) -> Result<CompareReport, CliError> {
    compare_tables(&read_table(a)?, &read_table(b)?, tolerance)
}

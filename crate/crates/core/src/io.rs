//! CSV ingestion and the JSON/TSV reports written by the command-line tool.

use std::io::Read;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::FitError;
use crate::k_search::GridSearch;
use crate::model::{FitResult, Method, TimeSeries};
use crate::shape::SymmetryTransform;

#[derive(Debug, Error)]
pub enum CsvError {
    #[error("input holds no data rows")]
    EmptyInput,
    #[error("row {row}, column {column}: not a finite number: {cell:?}")]
    NonNumericCell {
        row: usize,
        column: usize,
        cell: String,
    },
    #[error("row {row}: expected 2 columns, found {found}")]
    ColumnCount { row: usize, found: usize },
    #[error("row {row}: instant {t} appears twice (first on row {first_row})")]
    DuplicateInstant {
        row: usize,
        first_row: usize,
        t: f64,
    },
    #[error("reading input: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Series(#[from] FitError),
}

/// Parses two columns `t, T` separated by commas or tabs. A first line that
/// does not parse as numbers is taken as a header; blank lines are skipped.
/// Rows are sorted by `t`. Row numbers in errors are 1-based line numbers.
pub fn parse_csv(text: &str) -> Result<TimeSeries, CsvError> {
    let mut rows: Vec<(usize, f64, f64)> = Vec::new();
    let mut seen_content = false;
    for (line_no, line) in text.lines().enumerate() {
        let row = line_no + 1;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let first_content = !seen_content;
        seen_content = true;
        let sep = if line.contains('\t') { '\t' } else { ',' };
        let cells: Vec<&str> = line.split(sep).map(str::trim).collect();
        let parsed: Vec<Option<f64>> = cells
            .iter()
            .map(|c| c.parse::<f64>().ok().filter(|x| x.is_finite()))
            .collect();
        if first_content && parsed.iter().any(Option::is_none) {
            continue;
        }
        if cells.len() != 2 {
            return Err(CsvError::ColumnCount {
                row,
                found: cells.len(),
            });
        }
        if let Some(col) = parsed.iter().position(Option::is_none) {
            return Err(CsvError::NonNumericCell {
                row,
                column: col + 1,
                cell: cells[col].to_string(),
            });
        }
        rows.push((row, parsed[0].unwrap(), parsed[1].unwrap()));
    }
    if rows.is_empty() {
        return Err(CsvError::EmptyInput);
    }
    rows.sort_by(|x, y| x.1.total_cmp(&y.1).then(x.0.cmp(&y.0)));
    if let Some(w) = rows.windows(2).find(|w| w[0].1 == w[1].1) {
        return Err(CsvError::DuplicateInstant {
            row: w[1].0,
            first_row: w[0].0,
            t: w[1].1,
        });
    }
    let (times, values) = rows.iter().map(|r| (r.1, r.2)).unzip();
    Ok(TimeSeries::new(times, values)?)
}

pub fn read_csv<R: Read>(mut reader: R) -> Result<TimeSeries, CsvError> {
    let mut text = String::new();
    reader.read_to_string(&mut text)?;
    parse_csv(&text)
}

/// `t,T` header followed by one row per instant, numbers in shortest
/// round-trip form.
pub fn write_csv(series: &TimeSeries) -> String {
    let mut out = String::from("t,T\n");
    for (t, v) in series.times().iter().zip(series.values()) {
        out.push_str(&format!("{t:?},{v:?}\n"));
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CriticalEntry {
    /// 1-based.
    pub i: usize,
    pub sign: i8,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InputDigest {
    pub n: usize,
    pub t_min: f64,
    pub t_max: f64,
    pub scale: f64,
}

impl InputDigest {
    pub fn of(series: &TimeSeries) -> Self {
        let t = series.times();
        Self {
            n: series.len(),
            t_min: t[0],
            t_max: t[t.len() - 1],
            scale: series.scale(),
        }
    }
}

/// A model with its error and critical set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub a: f64,
    pub b: f64,
    pub k: f64,
    pub error: f64,
    pub critical: Vec<CriticalEntry>,
}

impl Solution {
    pub fn of(fit: &FitResult) -> Self {
        Self {
            a: fit.model.a,
            b: fit.model.b,
            k: fit.model.k,
            error: fit.error,
            critical: fit
                .critical
                .iter()
                .map(|c| CriticalEntry {
                    i: c.index + 1,
                    sign: c.sign.as_i8(),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub a: f64,
    pub b: f64,
    pub k: f64,
    pub error: f64,
    pub critical: Vec<CriticalEntry>,
    pub method: String,
    pub transform: SymmetryTransform,
    pub iterations: usize,
    pub sweeps: usize,
    pub boundary: bool,
    pub input: InputDigest,
    /// Grid solution, present when an accepted refinement replaced it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<Solution>,
    /// Outcome of a requested refinement.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub refine: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verified: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

pub fn method_label(method: Method) -> &'static str {
    match method {
        Method::Evaluated => "evaluated",
        Method::Constant => "constant",
        Method::Interpolation => "interpolation",
        Method::Remainders => "remainders",
        Method::Exhaustive => "exhaustive",
        Method::Refined => "refined",
    }
}

impl FitReport {
    pub fn from_fit(series: &TimeSeries, fit: &FitResult, method: &str) -> Self {
        let s = Solution::of(fit);
        Self {
            a: s.a,
            b: s.b,
            k: s.k,
            error: s.error,
            critical: s.critical,
            method: method.to_string(),
            transform: fit.transform,
            iterations: fit.stats.iterations,
            sweeps: 0,
            boundary: false,
            input: InputDigest::of(series),
            grid: None,
            refine: None,
            verified: None,
            seed: None,
        }
    }

    /// Report for a grid search, optionally replaced by a refined solution.
    pub fn from_search(
        series: &TimeSeries,
        grid: &GridSearch,
        refined: Option<std::result::Result<FitResult, FitError>>,
    ) -> Self {
        let base = |fit: &FitResult, method: &str| {
            let mut r = Self::from_fit(series, fit, method);
            r.sweeps = grid.sweeps;
            r.boundary = grid.boundary;
            r
        };
        match refined {
            None => base(&grid.fit, "grid"),
            Some(Ok(fit)) => {
                let mut r = base(&fit, "grid+refine");
                r.iterations = grid.fit.stats.iterations;
                r.grid = Some(Solution::of(&grid.fit));
                r.refine = Some("accepted".into());
                r
            }
            Some(Err(e)) => {
                let mut r = base(&grid.fit, "grid");
                r.refine = Some(format!("not applied: {e}"));
                r
            }
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Header line and one value line.
    pub fn to_tsv(&self) -> String {
        format!(
            "a\tb\tk\terror\tmethod\tsweeps\tboundary\n{:?}\t{:?}\t{:?}\t{:?}\t{}\t{}\t{}\n",
            self.a, self.b, self.k, self.error, self.method, self.sweeps, self.boundary
        )
    }
}

/// `k<TAB>error` rows under a header.
pub fn profile_tsv(table: &[(f64, f64)]) -> String {
    let mut out = String::from("k\terror\n");
    for (k, e) in table {
        out.push_str(&format!("{k:?}\t{e:?}\n"));
    }
    out
}

/// `t<TAB>T<TAB>residual` rows under a header.
pub fn residuals_tsv(series: &TimeSeries, fit: &FitResult) -> String {
    let mut out = String::from("t\tT\tresidual\n");
    for ((t, v), r) in series
        .times()
        .iter()
        .zip(series.values())
        .zip(&fit.residuals)
    {
        out.push_str(&format!("{t:?}\t{v:?}\t{r:?}\n"));
    }
    out
}

//! CSV ingestion: rows are observations, columns are variables.

use std::fs::File;
use std::path::Path;

use subsel_core::ObservationMatrix;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum HeaderMode {
    /// Treat the first row as a header when any of its cells is not a number.
    #[default]
    Auto,
    Yes,
    No,
}

/// Which columns to use, by header name or 0-based index (`3`, `0-4`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnSpec {
    /// Defaults to every column that is not a responder.
    pub predictors: Option<String>,
    pub responders: String,
    pub header: HeaderMode,
}

#[derive(Debug, Clone)]
pub struct Dataset {
    /// Selected columns: predictors first, then responders.
    pub matrix: ObservationMatrix,
    pub predictor_names: Vec<String>,
    pub responder_names: Vec<String>,
}

impl Dataset {
    pub fn n(&self) -> usize {
        self.predictor_names.len()
    }

    pub fn m(&self) -> usize {
        self.responder_names.len()
    }

    pub fn predictors(&self) -> Vec<usize> {
        (0..self.n()).collect()
    }

    pub fn responders(&self) -> Vec<usize> {
        (self.n()..self.n() + self.m()).collect()
    }

    pub fn name(&self, col: usize) -> &str {
        if col < self.n() {
            &self.predictor_names[col]
        } else {
            &self.responder_names[col - self.n()]
        }
    }
}

fn resolve(spec: &str, names: &[String]) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for token in spec.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        if let Some(i) = names.iter().position(|n| n == token) {
            out.push(i);
            continue;
        }
        let parse = |s: &str| {
            s.trim()
                .parse::<usize>()
                .map_err(|_| CliError::Config(format!("unknown column {token:?}")))
        };
        let (lo, hi) = match token.split_once('-') {
            Some((a, b)) if !a.is_empty() => (parse(a)?, parse(b)?),
            _ => {
                let i = parse(token)?;
                (i, i)
            }
        };
        if lo > hi || hi >= names.len() {
            return Err(CliError::Config(format!(
                "column range {token:?} outside 0..{}",
                names.len()
            )));
        }
        out.extend(lo..=hi);
    }
    if out.is_empty() {
        return Err(CliError::Config(format!("column spec {spec:?} selects nothing")));
    }
    Ok(out)
}

/// Reads `path` and extracts the predictor and responder columns named by `spec`.
pub fn ingest_csv(path: &Path, spec: &ColumnSpec) -> Result<Dataset> {
    let file = File::open(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);
    let mut records = Vec::new();
    for rec in reader.records() {
        records.push(rec?);
    }
    let Some(first) = records.first() else {
        return Err(CliError::Config(format!("{} is empty", path.display())));
    };
    let width = first.len();
    let has_header = match spec.header {
        HeaderMode::Yes => true,
        HeaderMode::No => false,
        HeaderMode::Auto => first.iter().any(|c| c.parse::<f64>().is_err()),
    };
    let names: Vec<String> = if has_header {
        first.iter().map(str::to_string).collect()
    } else {
        (0..width).map(|i| format!("c{i}")).collect()
    };
    let body = if has_header { &records[1..] } else { &records[..] };

    let responders = resolve(&spec.responders, &names)?;
    let predictors = match &spec.predictors {
        Some(p) => resolve(p, &names)?,
        None => (0..width).filter(|c| !responders.contains(c)).collect(),
    };
    if predictors.is_empty() {
        return Err(CliError::Config("no predictor columns".into()));
    }
    if let Some(c) = predictors.iter().find(|c| responders.contains(c)) {
        return Err(CliError::Config(format!(
            "column {} is both a predictor and a responder",
            names[*c]
        )));
    }
    let selected: Vec<usize> = predictors.iter().chain(&responders).copied().collect();

    let offset = usize::from(has_header) + 1;
    let mut columns = vec![Vec::with_capacity(body.len()); selected.len()];
    for (r, rec) in body.iter().enumerate() {
        let row = r + offset;
        if rec.len() != width {
            return Err(CliError::ArityMismatch {
                row,
                expected: width,
                found: rec.len(),
            });
        }
        for (slot, &c) in selected.iter().enumerate() {
            let cell = &rec[c];
            let v: f64 = cell.parse().map_err(|_| CliError::Parse {
                row,
                column: c,
                name: names[c].clone(),
                value: cell.to_string(),
            })?;
            if !v.is_finite() {
                return Err(CliError::NonFinite {
                    row,
                    column: c,
                    name: names[c].clone(),
                    value: cell.to_string(),
                });
            }
            columns[slot].push(v);
        }
    }
    let matrix = ObservationMatrix::from_columns(columns)?;
    Ok(Dataset {
        matrix,
        predictor_names: predictors.iter().map(|&c| names[c].clone()).collect(),
        responder_names: responders.iter().map(|&c| names[c].clone()).collect(),
    })
}

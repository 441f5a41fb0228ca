//! Column statistics and Pearson correlations with 1/d normalization.
//!
//! All sums run left to right over observations so that every value is a
//! deterministic function of its input column(s).

use serde::{Deserialize, Serialize};

use crate::{Error, Result, Square, EPS_VAR};

/// `d` observations (rows) of `p` variables (columns), stored column-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationMatrix {
    columns: Vec<Vec<f64>>,
    d: usize,
}

impl ObservationMatrix {
    pub fn from_columns(columns: Vec<Vec<f64>>) -> Result<Self> {
        let d = columns.first().map_or(0, Vec::len);
        if d < 2 {
            return Err(Error::TooFewObservations(d));
        }
        for (c, col) in columns.iter().enumerate() {
            if col.len() != d {
                return Err(Error::Dimension(format!(
                    "column {c} has {} values, expected {d}",
                    col.len()
                )));
            }
            if let Some(row) = col.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFinite { row, column: c });
            }
        }
        Ok(Self { columns, d })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let p = rows.first().map_or(0, Vec::len);
        let mut columns = vec![Vec::with_capacity(rows.len()); p];
        for (r, row) in rows.iter().enumerate() {
            if row.len() != p {
                return Err(Error::Ragged {
                    row: r,
                    expected: p,
                    found: row.len(),
                });
            }
            for (c, &v) in row.iter().enumerate() {
                columns[c].push(v);
            }
        }
        if rows.len() < 2 {
            return Err(Error::TooFewObservations(rows.len()));
        }
        Self::from_columns(columns)
    }

    /// Number of observations.
    #[inline]
    pub fn d(&self) -> usize {
        self.d
    }

    /// Number of variables.
    #[inline]
    pub fn p(&self) -> usize {
        self.columns.len()
    }

    pub fn column(&self, col: usize) -> Result<&[f64]> {
        self.columns
            .get(col)
            .map(Vec::as_slice)
            .ok_or(Error::ColumnOutOfRange {
                column: col,
                columns: self.p(),
            })
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    /// Replace column `col` with `a * x + b`.
    pub fn affine_column(&self, col: usize, a: f64, b: f64) -> Result<Self> {
        let mut columns = self.columns.clone();
        let target = columns.get_mut(col).ok_or(Error::ColumnOutOfRange {
            column: col,
            columns: self.p(),
        })?;
        for v in target.iter_mut() {
            *v = a * *v + b;
        }
        Self::from_columns(columns)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ColumnStats {
    pub mean: f64,
    pub stddev: f64,
}

impl ColumnStats {
    pub fn variance(&self) -> f64 {
        self.stddev * self.stddev
    }
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().fold(0.0, |acc, &v| acc + v) / xs.len() as f64
}

pub fn column_stats(data: &ObservationMatrix, col: usize) -> Result<ColumnStats> {
    let xs = data.column(col)?;
    let mu = mean(xs);
    let ss = xs.iter().fold(0.0, |acc, &v| acc + (v - mu) * (v - mu));
    Ok(ColumnStats {
        mean: mu,
        stddev: (ss / xs.len() as f64).sqrt(),
    })
}

/// A column with its mean removed, ready for covariance sums.
#[derive(Debug, Clone)]
pub(crate) struct Centered {
    pub(crate) dev: Vec<f64>,
    pub(crate) stats: ColumnStats,
}

impl Centered {
    pub(crate) fn new(data: &ObservationMatrix, col: usize) -> Result<Self> {
        let xs = data.column(col)?;
        let stats = column_stats(data, col)?;
        let scale = xs.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        if !(stats.stddev > EPS_VAR * scale) {
            return Err(Error::ZeroVariance { column: col });
        }
        Ok(Self {
            dev: xs.iter().map(|&v| v - stats.mean).collect(),
            stats,
        })
    }
}

pub(crate) fn pearson_centered(a: &Centered, b: &Centered) -> Result<f64> {
    let d = a.dev.len() as f64;
    let cov = a
        .dev
        .iter()
        .zip(&b.dev)
        .fold(0.0, |acc, (&u, &v)| acc + u * v)
        / d;
    let rho = cov / (a.stats.stddev * b.stats.stddev);
    if !rho.is_finite() || rho.abs() > 1.0 + 1e-9 {
        return Err(Error::InternalNumeric(format!(
            "correlation {rho} outside [-1, 1]"
        )));
    }
    Ok(rho.clamp(-1.0, 1.0))
}

/// Pearson correlation between two columns.
pub fn pearson(data: &ObservationMatrix, col_a: usize, col_b: usize) -> Result<f64> {
    let a = Centered::new(data, col_a)?;
    if col_a == col_b {
        return Ok(1.0);
    }
    let b = Centered::new(data, col_b)?;
    pearson_centered(&a, &b)
}

/// Symmetric correlation matrix with unit diagonal and entries in `[-1, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationMatrix(Square<f64>);

impl CorrelationMatrix {
    /// Validates the correlation-matrix invariants.
    pub fn new(m: Square<f64>) -> Result<Self> {
        let q = m.dim();
        for i in 0..q {
            if m[(i, i)] != 1.0 {
                return Err(Error::Dimension(format!("diagonal entry {i} is not 1")));
            }
            for j in 0..q {
                let v = m[(i, j)];
                if !(-1.0..=1.0).contains(&v) {
                    return Err(Error::Dimension(format!("entry ({i},{j}) = {v} outside [-1, 1]")));
                }
                if v != m[(j, i)] {
                    return Err(Error::Dimension(format!("entry ({i},{j}) is not symmetric")));
                }
            }
        }
        Ok(Self(m))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        if rows.iter().any(|r| r.len() != rows.len()) {
            return Err(Error::Dimension("correlation matrix must be square".into()));
        }
        Self::new(Square::from_rows(rows))
    }

    pub fn identity(q: usize) -> Self {
        Self(Square::from_fn(q, |i, j| if i == j { 1.0 } else { 0.0 }))
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    pub fn as_square(&self) -> &Square<f64> {
        &self.0
    }

    pub fn into_square(self) -> Square<f64> {
        self.0
    }

    /// Principal submatrix on `idx`; entries are copied, never recomputed.
    pub fn select(&self, idx: &[usize]) -> Self {
        Self(self.0.select(idx))
    }
}

/// Correlation matrix of the listed columns, entry `(i, j) = pearson(cols[i], cols[j])`.
pub fn correlation_matrix(data: &ObservationMatrix, cols: &[usize]) -> Result<CorrelationMatrix> {
    let centered = cols
        .iter()
        .map(|&c| Centered::new(data, c))
        .collect::<Result<Vec<_>>>()?;
    correlation_from_centered(&centered, cols)
}

pub(crate) fn correlation_from_centered(
    centered: &[Centered],
    cols: &[usize],
) -> Result<CorrelationMatrix> {
    let q = centered.len();
    let mut m = Square::filled(q, 0.0);
    for i in 0..q {
        m[(i, i)] = 1.0;
        for j in i + 1..q {
            let rho = if cols[i] == cols[j] {
                1.0
            } else {
                pearson_centered(&centered[i], &centered[j])?
            };
            m[(i, j)] = rho;
            m[(j, i)] = rho;
        }
    }
    Ok(CorrelationMatrix(m))
}

//! Estimates live in a flat Hilbert space: every parameter (regression
//! vector, eigenbasis, projection matrix) is a row-major array of reals and
//! distances are Euclidean/Frobenius over that array.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, DrlError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EstimateKind {
    RegressionParam,
    EigenBasis,
    ProjectionMatrix,
}

impl EstimateKind {
    pub fn tag(self) -> &'static str {
        match self {
            EstimateKind::RegressionParam => "regression",
            EstimateKind::EigenBasis => "eigenbasis",
            EstimateKind::ProjectionMatrix => "projection",
        }
    }
}

impl fmt::Display for EstimateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for EstimateKind {
    type Err = DrlError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "regression" => Ok(EstimateKind::RegressionParam),
            "eigenbasis" => Ok(EstimateKind::EigenBasis),
            "projection" => Ok(EstimateKind::ProjectionMatrix),
            other => Err(DrlError::Parse(format!("unknown estimate kind `{other}`"))),
        }
    }
}

/// A point in the parameter space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    kind: EstimateKind,
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl Estimate {
    pub fn new(kind: EstimateKind, rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(invalid("estimate dimensions must be positive"));
        }
        if values.len() != rows * cols {
            return Err(DrlError::ShapeMismatch {
                expected: format!("{} values", rows * cols),
                found: format!("{} values", values.len()),
            });
        }
        match kind {
            EstimateKind::RegressionParam if cols != 1 => {
                return Err(invalid("regression parameters must have a single column"))
            }
            EstimateKind::ProjectionMatrix if rows != cols => {
                return Err(invalid("projection matrices must be square"))
            }
            _ => {}
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(DrlError::NonFinite("estimate"));
        }
        Ok(Estimate { kind, rows, cols, values })
    }

    pub fn regression(values: Vec<f64>) -> Result<Self> {
        let rows = values.len();
        Estimate::new(EstimateKind::RegressionParam, rows, 1, values)
    }

    pub fn projection(dim: usize, values: Vec<f64>) -> Result<Self> {
        Estimate::new(EstimateKind::ProjectionMatrix, dim, dim, values)
    }

    pub fn zeros(kind: EstimateKind, rows: usize, cols: usize) -> Result<Self> {
        Estimate::new(kind, rows, cols, vec![0.0; rows * cols])
    }

    /// Same kind and shape as `self`, new values. Values must be finite.
    pub(crate) fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        Estimate::new(self.kind, self.rows, self.cols, values)
    }

    pub fn kind(&self) -> EstimateKind {
        self.kind
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.cols + col]
    }

    pub fn shape_string(&self) -> String {
        format!("{} {}x{}", self.kind, self.rows, self.cols)
    }

    /// Errors unless `other` has the same kind and shape.
    pub fn check_compatible(&self, other: &Estimate) -> Result<()> {
        if self.kind != other.kind || self.rows != other.rows || self.cols != other.cols {
            return Err(DrlError::ShapeMismatch {
                expected: self.shape_string(),
                found: other.shape_string(),
            });
        }
        Ok(())
    }

    pub fn distance(&self, other: &Estimate) -> Result<f64> {
        self.check_compatible(other)?;
        Ok(euclidean_distance(&self.values, &other.values))
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn scaled(&self, c: f64) -> Result<Estimate> {
        self.with_values(self.values.iter().map(|v| c * v).collect())
    }

    /// `kind,rows,cols,v1,...,vn` with fixed-width values.
    pub fn to_csv_row(&self) -> String {
        let mut row = format!("{},{},{}", self.kind.tag(), self.rows, self.cols);
        for v in &self.values {
            row.push(',');
            row.push_str(&format_fixed(*v));
        }
        row
    }

    pub fn from_csv_row(line: &str) -> Result<Self> {
        let mut fields = line.trim_end_matches(['\r', '\n']).split(',');
        let kind: EstimateKind = fields
            .next()
            .ok_or_else(|| DrlError::Parse("missing kind".into()))?
            .trim()
            .parse()?;
        let mut dim = |name: &str| -> Result<usize> {
            fields
                .next()
                .ok_or_else(|| DrlError::Parse(format!("missing {name}")))?
                .trim()
                .parse::<usize>()
                .map_err(|e| DrlError::Parse(format!("bad {name}: {e}")))
        };
        let rows = dim("rows")?;
        let cols = dim("cols")?;
        let values = fields
            .map(|f| {
                f.trim()
                    .parse::<f64>()
                    .map_err(|e| DrlError::Parse(format!("bad value `{f}`: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Estimate::new(kind, rows, cols, values)
    }

    /// Bytes needed to ship this estimate as one CSV row (newline included).
    /// Depends only on kind and shape.
    pub fn serialized_size(&self) -> usize {
        serialized_size(self.kind, self.rows, self.cols)
    }
}

/// Width of a value written by [`format_fixed`].
pub const VALUE_WIDTH: usize = 24;

pub fn serialized_size(kind: EstimateKind, rows: usize, cols: usize) -> usize {
    let header = kind.tag().len() + 1 + rows.to_string().len() + 1 + cols.to_string().len();
    header + rows * cols * (1 + VALUE_WIDTH) + 1
}

/// Formats a finite float in exactly [`VALUE_WIDTH`] characters, round-trip exact:
/// sign, 17 significant digits, signed three-digit exponent.
pub fn format_fixed(v: f64) -> String {
    let s = format!("{:+.16e}", v);
    let (mantissa, exp) = s.split_once('e').expect("scientific format has an exponent");
    let exp: i32 = exp.parse().expect("exponent is an integer");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}e{sign}{:03}", exp.abs())
}

pub(crate) fn euclidean_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

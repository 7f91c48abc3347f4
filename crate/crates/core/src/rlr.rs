//! Robust linear regression on a single node (coordinate-wise trimmed
//! correlation) and an ordinary least-squares baseline.

use crate::error::{DrlError, Result};
use crate::estimate::Estimate;
use crate::linalg::solve_spd;
use crate::matrix::{dot, gram, MatrixView};
use crate::trimmed::{trim_count_for, trimmed_correlation};

/// Normal equations are refused above this condition number.
pub const MAX_CONDITION: f64 = 1e12;

#[derive(Debug, Clone, PartialEq)]
pub struct RegressionModel {
    /// p×1 regression vector.
    pub theta: Estimate,
}

fn check_data(x: MatrixView<'_>, y: &[f64]) -> Result<()> {
    if x.cols() == 0 || x.rows() == 0 {
        return Err(DrlError::Empty("regression data"));
    }
    if y.len() != x.cols() {
        return Err(DrlError::ShapeMismatch {
            expected: format!("{} responses", x.cols()),
            found: format!("{} responses", y.len()),
        });
    }
    Ok(())
}

/// `θ̂_j = ⟨y, X_j⟩_{⌊λN⌋} / (N − ⌊λN⌋)`.
pub fn base_rotr(x: MatrixView<'_>, y: &[f64], lambda: f64) -> Result<RegressionModel> {
    check_data(x, y)?;
    let trim = trim_count_for(lambda, y.len())?;
    let theta = trimmed_correlation(y, x, trim)?;
    Ok(RegressionModel { theta: Estimate::regression(theta)? })
}

/// Plain normalized correlation `X y / N`.
pub fn untrimmed_correlation(x: MatrixView<'_>, y: &[f64]) -> Result<RegressionModel> {
    check_data(x, y)?;
    let n = y.len() as f64;
    let theta = (0..x.rows()).map(|j| dot(x.row(j), y) / n).collect();
    Ok(RegressionModel { theta: Estimate::regression(theta)? })
}

/// Solves `(X Xᵀ) θ = X y`.
pub fn least_squares_baseline(x: MatrixView<'_>, y: &[f64]) -> Result<RegressionModel> {
    check_data(x, y)?;
    if x.cols() < x.rows() {
        return Err(DrlError::IllConditioned { condition: f64::INFINITY });
    }
    let xy: Vec<f64> = (0..x.rows()).map(|j| dot(x.row(j), y)).collect();
    let theta = solve_spd(&gram(x), &xy, MAX_CONDITION)?;
    Ok(RegressionModel { theta: Estimate::regression(theta)? })
}

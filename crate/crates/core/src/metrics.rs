//! Error metrics and spectral diagnostics.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, DrlError, Result};
use crate::estimate::{Estimate, EstimateKind};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    pub relative_error: f64,
    pub absolute_error: f64,
    pub bound_value: Option<f64>,
    pub lambda_prime: Option<f64>,
}

impl RunMetrics {
    pub fn new(estimate: &Estimate, truth: &Estimate) -> Result<Self> {
        let absolute_error = estimate.distance(truth)?;
        let norm = truth.norm();
        if norm == 0.0 {
            return Err(invalid("truth has zero norm"));
        }
        Ok(RunMetrics { relative_error: absolute_error / norm, absolute_error, bound_value: None, lambda_prime: None })
    }
}

fn relative(estimate: &Estimate, truth: &Estimate, kind: EstimateKind) -> Result<f64> {
    if truth.kind() != kind {
        return Err(DrlError::ShapeMismatch { expected: kind.to_string(), found: truth.kind().to_string() });
    }
    RunMetrics::new(estimate, truth).map(|m| m.relative_error)
}

/// `‖P̂ − P*‖_F / ‖P*‖_F`.
pub fn pca_error(estimate: &Estimate, truth: &Estimate) -> Result<f64> {
    relative(estimate, truth, EstimateKind::ProjectionMatrix)
}

/// `‖θ̂ − θ*‖₂ / ‖θ*‖₂`.
pub fn lr_error(estimate: &Estimate, truth: &Estimate) -> Result<f64> {
    relative(estimate, truth, EstimateKind::RegressionParam)
}

/// `σ_d − σ_{d+1}` (1-based `d`) of a descending spectrum.
pub fn eigengap(eigenvalues: &[f64], d: usize) -> Result<f64> {
    if d == 0 || d >= eigenvalues.len() {
        return Err(invalid(format!("eigengap index {d} out of range for {} eigenvalues", eigenvalues.len())));
    }
    Ok((eigenvalues[d - 1] - eigenvalues[d]).max(0.0))
}

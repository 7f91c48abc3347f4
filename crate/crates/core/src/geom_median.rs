//! Empirical geometric median: the point minimizing the sum of distances to a
//! finite set of estimates, computed by Weiszfeld iteration with the
//! Vardi–Zhang correction at data atoms.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, DrlError, Result};
use crate::estimate::{euclidean_distance, Estimate};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MedianConfig {
    /// Stop once a step moves less than `tolerance · (1 + ‖y‖)`.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Distance below which the iterate is treated as sitting on an atom.
    /// `None` means `1e-12 · (1 + max atom norm)`.
    pub coincidence_epsilon: Option<f64>,
}

impl Default for MedianConfig {
    fn default() -> Self {
        MedianConfig { tolerance: 1e-10, max_iterations: 10_000, coincidence_epsilon: None }
    }
}

impl MedianConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0) {
            return Err(invalid("median tolerance must be positive"));
        }
        if self.max_iterations == 0 {
            return Err(invalid("median max_iterations must be at least 1"));
        }
        if let Some(eps) = self.coincidence_epsilon {
            if !(eps > 0.0) {
                return Err(invalid("coincidence epsilon must be positive"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MedianResult {
    pub median: Estimate,
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn check_points(points: &[Estimate]) -> Result<()> {
    let first = points.first().ok_or(DrlError::Empty("median point set"))?;
    for p in &points[1..] {
        first.check_compatible(p)?;
    }
    Ok(())
}

/// Sum of distances from `y` to every point.
pub fn median_objective(points: &[Estimate], y: &Estimate) -> Result<f64> {
    check_points(points)?;
    points[0].check_compatible(y)?;
    Ok(objective(points, y.values()))
}

fn objective(points: &[Estimate], y: &[f64]) -> f64 {
    points.iter().map(|p| euclidean_distance(p.values(), y)).sum()
}

/// Coordinate-wise mean of the points (the Div.-Avg. fusion rule).
pub fn coordinate_mean(points: &[Estimate]) -> Result<Estimate> {
    check_points(points)?;
    points[0].with_values(mean_values(points))
}

fn mean_values(points: &[Estimate]) -> Vec<f64> {
    let n = points[0].values().len();
    let mut acc = vec![0.0; n];
    for p in points {
        for (a, v) in acc.iter_mut().zip(p.values()) {
            *a += v;
        }
    }
    let k = points.len() as f64;
    acc.iter_mut().for_each(|a| *a /= k);
    acc
}

pub fn geometric_median(points: &[Estimate], config: &MedianConfig) -> Result<MedianResult> {
    config.validate()?;
    check_points(points)?;
    // Estimate::new already rejects non-finite values; this guards against
    // points built through deserialization paths that bypass it.
    if points.iter().any(|p| p.values().iter().any(|v| !v.is_finite())) {
        return Err(DrlError::NonFinite("median input"));
    }

    let template = &points[0];
    match points.len() {
        1 => {
            return Ok(MedianResult {
                median: template.clone(),
                objective: 0.0,
                iterations: 0,
                converged: true,
            })
        }
        2 => {
            // Every point of the segment is a minimizer; take the midpoint.
            let mid = mean_values(points);
            let objective = objective(points, &mid);
            return Ok(MedianResult {
                median: template.with_values(mid)?,
                objective,
                iterations: 0,
                converged: true,
            });
        }
        _ => {}
    }

    let eps = config.coincidence_epsilon.unwrap_or_else(|| {
        let max_norm = points.iter().map(Estimate::norm).fold(0.0, f64::max);
        1e-12 * (1.0 + max_norm)
    });

    let dim = template.values().len();
    let mut y = mean_values(points);
    let mut next = vec![0.0; dim];
    let mut iterations = 0;
    let mut converged = false;

    while iterations < config.max_iterations {
        iterations += 1;

        next.iter_mut().for_each(|v| *v = 0.0);
        let mut weight_sum = 0.0;
        let mut coincident = 0usize;
        for p in points {
            let d = euclidean_distance(p.values(), &y);
            if d < eps {
                coincident += 1;
                continue;
            }
            let w = 1.0 / d;
            weight_sum += w;
            for (n, v) in next.iter_mut().zip(p.values()) {
                *n += w * v;
            }
        }

        if weight_sum == 0.0 {
            // All atoms coincide with y.
            converged = true;
            break;
        }

        // Plain Weiszfeld map T(y) = Σ x_j/d_j / Σ 1/d_j.
        next.iter_mut().for_each(|v| *v /= weight_sum);

        if coincident > 0 {
            // Vardi–Zhang: R(y) = Σ (x_j − y)/d_j = weight_sum · (T(y) − y).
            let r = weight_sum * euclidean_distance(&next, &y);
            let eta = coincident as f64;
            if r <= eta {
                converged = true;
                break;
            }
            let keep = eta / r;
            for (n, yv) in next.iter_mut().zip(&y) {
                *n = (1.0 - keep) * *n + keep * yv;
            }
        }

        let step = euclidean_distance(&next, &y);
        std::mem::swap(&mut y, &mut next);
        let scale = 1.0 + y.iter().map(|v| v * v).sum::<f64>().sqrt();
        if step <= config.tolerance * scale {
            converged = true;
            break;
        }
    }

    let objective = objective(points, &y);
    Ok(MedianResult { median: template.with_values(y)?, objective, iterations, converged })
}

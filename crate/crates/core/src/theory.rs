//! Robustness constants of median aggregation: the divergence ψ, the
//! critical failure probability β*(α), the relaxation factor C_α, breakdown
//! bounds, and the right-hand sides of the distributed error bounds.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, DrlError, Result};

/// Keeps bisection brackets off the log singularities.
const NUDGE: f64 = 1e-15;
const ROOT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TheoryPoint {
    pub alpha: f64,
    pub beta_star: f64,
    pub c_alpha: f64,
    pub psi_value: f64,
}

impl TheoryPoint {
    /// Solves for β*(α) and fills in the rest.
    pub fn from_alpha(alpha: f64) -> Result<Self> {
        let beta_star = beta_star(alpha)?;
        Ok(TheoryPoint { alpha, beta_star, c_alpha: c_alpha(alpha)?, psi_value: psi(alpha, beta_star)? })
    }

    /// Solves for α with ψ(α, β*) = 1 and fills in the rest.
    pub fn from_beta_star(beta_star: f64) -> Result<Self> {
        let alpha = alpha_for_beta(beta_star)?;
        Ok(TheoryPoint { alpha, beta_star, c_alpha: c_alpha(alpha)?, psi_value: psi(alpha, beta_star)? })
    }
}

/// `ψ(α; β) = (1−α) ln((1−α)/(1−β)) + α ln(α/β)` for `0 < β < α < 1/2`.
pub fn psi(alpha: f64, beta: f64) -> Result<f64> {
    if !(0.0 < beta && beta < alpha && alpha < 0.5) {
        return Err(invalid(format!("psi needs 0 < beta < alpha < 1/2, got alpha={alpha}, beta={beta}")));
    }
    Ok(psi_unchecked(alpha, beta))
}

fn psi_unchecked(alpha: f64, beta: f64) -> f64 {
    (1.0 - alpha) * ((1.0 - alpha) / (1.0 - beta)).ln() + alpha * (alpha / beta).ln()
}

/// Bisection for a root of a monotone `f` on `[lo, hi]`.
fn bisect(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    let increasing = f(hi) > f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let v = f(mid);
        if v.abs() <= ROOT_TOL && (hi - lo) < 1e-14 {
            return mid;
        }
        if (v < 0.0) == increasing {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * mid.abs() {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// `β*(α) = max{β ∈ (0, α) : ψ(α, β) ≥ 1}`; ψ decreases in β.
pub fn beta_star(alpha: f64) -> Result<f64> {
    if !(0.0 < alpha && alpha < 0.5) {
        return Err(invalid(format!("alpha {alpha} outside (0, 1/2)")));
    }
    let (lo, hi) = (NUDGE, alpha - NUDGE);
    if psi_unchecked(alpha, lo) < 1.0 {
        return Err(DrlError::Infeasible(format!("psi(alpha={alpha}, beta) < 1 for every beta")));
    }
    Ok(bisect(lo, hi, |b| psi_unchecked(alpha, b) - 1.0))
}

/// α ∈ (β*, 1/2) with ψ(α, β*) = 1; ψ increases in α.
pub fn alpha_for_beta(beta_star: f64) -> Result<f64> {
    if !(0.0 < beta_star && beta_star < 0.5) {
        return Err(invalid(format!("beta* {beta_star} outside (0, 1/2)")));
    }
    let (lo, hi) = (beta_star + NUDGE, 0.5 - NUDGE);
    if psi_unchecked(hi, beta_star) < 1.0 {
        return Err(DrlError::Infeasible(format!("psi(alpha, beta*={beta_star}) < 1 for every alpha below 1/2")));
    }
    Ok(bisect(lo, hi, |a| psi_unchecked(a, beta_star) - 1.0))
}

/// `C_α = (1−α) √(1/(1−2α))`.
pub fn c_alpha(alpha: f64) -> Result<f64> {
    if !(0.0 < alpha && alpha < 0.5) {
        return Err(invalid(format!("alpha {alpha} outside (0, 1/2)")));
    }
    Ok((1.0 - alpha) * (1.0 / (1.0 - 2.0 * alpha)).sqrt())
}

/// Upper limit (exclusive) on the corrupted-node fraction γ.
pub fn gamma_limit(alpha: f64, beta_star: f64) -> f64 {
    (alpha - beta_star) / (1.0 - beta_star)
}

/// `κ_γ = ψ((α−γ)/(1−γ), β*)`.
pub fn kappa_gamma(alpha: f64, gamma: f64, beta_star: f64) -> Result<f64> {
    if !(0.0 <= gamma && gamma < gamma_limit(alpha, beta_star)) {
        return Err(invalid(format!(
            "gamma {gamma} outside [0, {})",
            gamma_limit(alpha, beta_star)
        )));
    }
    psi((alpha - gamma) / (1.0 - gamma), beta_star)
}

/// Lower bound `1 − exp(−k(1−γ)κ_γ)` on the probability that the median
/// lands within `C_α ε` of the truth.
pub fn success_probability(k: usize, alpha: f64, gamma: f64, beta_star: f64) -> Result<f64> {
    let kappa = kappa_gamma(alpha, gamma, beta_star)?;
    Ok(1.0 - (-(k as f64) * (1.0 - gamma) * kappa).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BreakdownBounds {
    pub lambda_star: f64,
    /// Adversarial placement: `λ*/2`.
    pub drl_lower: f64,
    /// Favorable placement: `(1/2 − ε) + (1/2 + ε) λ*`.
    pub favorable: f64,
}

impl BreakdownBounds {
    /// Averaging with all outliers on one of `k` nodes: `λ*/k`.
    pub fn avg_worst(&self, k: usize) -> f64 {
        self.lambda_star / k as f64
    }
}

pub fn breakdown_bounds(lambda_star: f64, epsilon: f64) -> BreakdownBounds {
    BreakdownBounds {
        lambda_star,
        drl_lower: lambda_star / 2.0,
        favorable: (0.5 - epsilon) + (0.5 + epsilon) * lambda_star,
    }
}

/// The `⌊k(1−γ)⌋`-th smallest per-node outlier fraction (at least the first).
pub fn lambda_prime(fractions: &[f64], gamma: f64) -> Result<f64> {
    if fractions.is_empty() {
        return Err(DrlError::Empty("per-node fractions"));
    }
    if !(0.0..1.0).contains(&gamma) {
        return Err(invalid(format!("gamma {gamma} outside [0, 1)")));
    }
    let mut sorted = fractions.to_vec();
    sorted.sort_by(f64::total_cmp);
    let rank = ((fractions.len() as f64) * (1.0 - gamma)).floor() as usize;
    Ok(sorted[rank.clamp(1, sorted.len()) - 1])
}

/// `C_α (2/Δ_d) (λ′/(1−λ′)) σ_x² ln p`. Zero without outliers, infinite for a
/// zero eigengap otherwise.
pub fn rpca_bound(delta_d: f64, lambda_prime: f64, sigma_x2: f64, p: usize, alpha: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&lambda_prime) {
        return Err(invalid(format!("lambda' {lambda_prime} outside [0, 1)")));
    }
    if lambda_prime == 0.0 {
        return Ok(0.0);
    }
    if delta_d <= 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(c_alpha(alpha)? * (2.0 / delta_d) * (lambda_prime / (1.0 - lambda_prime)) * sigma_x2 * (p as f64).ln())
}

/// `C′ ‖θ*‖ √(1 + σ_e²/‖θ*‖²) (λ′/(1−λ′)) √p ln p`, with the unspecified
/// constant `C′` supplied by the caller.
pub fn rlr_bound(theta_norm: f64, sigma_e: f64, lambda_prime: f64, p: usize, c_prime: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&lambda_prime) {
        return Err(invalid(format!("lambda' {lambda_prime} outside [0, 1)")));
    }
    // ‖θ‖ √(1 + σ²/‖θ‖²) = √(‖θ‖² + σ²), which stays finite at θ = 0.
    let signal = (theta_norm * theta_norm + sigma_e * sigma_e).sqrt();
    let p = p as f64;
    Ok(c_prime * signal * (lambda_prime / (1.0 - lambda_prime)) * p.sqrt() * p.ln())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn psi_examples() {
        assert!((psi(0.22, 0.001).unwrap() - 1.0).abs() < 0.01);
        assert!(psi(0.3, 0.3 - 1e-12).unwrap().abs() < 1e-9);
        let grid: Vec<f64> = (1..100).map(|i| psi(0.3, 0.3 * i as f64 / 100.0).unwrap()).collect();
        assert!(grid.windows(2).all(|w| w[0] > w[1]));
        assert!(psi(0.3, 0.4).is_err());
        assert!(psi(0.6, 0.1).is_err());
        assert!(psi(0.3, 0.0).is_err());
    }

    #[test]
    fn beta_star_examples() {
        let b = beta_star(0.358).unwrap();
        assert!((b / 1e-2 - 1.0).abs() < 0.1, "{b}");
        let b = beta_star(0.22).unwrap();
        assert!((b / 1e-3 - 1.0).abs() < 0.1, "{b}");
        assert!((psi(0.22, b).unwrap() - 1.0).abs() <= 1e-10);
        let grid: Vec<f64> = (5..50).map(|i| beta_star(i as f64 / 100.0).unwrap()).collect();
        assert!(grid.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn beta_star_infeasible_for_tiny_alpha() {
        assert!(matches!(beta_star(0.01), Err(DrlError::Infeasible(_))));
        assert!(beta_star(0.5).is_err());
    }

    #[test]
    fn alpha_for_beta_examples() {
        assert!((alpha_for_beta(1e-2).unwrap() - 0.358).abs() <= 0.005);
        assert!((alpha_for_beta(1e-3).unwrap() - 0.22).abs() <= 0.005);
        assert!((alpha_for_beta(1e-5).unwrap() - 0.119).abs() <= 0.005);
        assert!(matches!(alpha_for_beta(0.2), Err(DrlError::Infeasible(_))));
    }

    #[test]
    fn round_trip_alpha_beta() {
        for i in 8..49 {
            let alpha = i as f64 / 100.0;
            let back = alpha_for_beta(beta_star(alpha).unwrap()).unwrap();
            assert!((back - alpha).abs() <= 1e-6, "{alpha} -> {back}");
        }
    }

    #[test]
    fn c_alpha_examples() {
        assert!((c_alpha(0.358).unwrap() - 1.205).abs() <= 0.005);
        assert!((c_alpha(0.22).unwrap() - 1.04).abs() <= 0.005);
        assert!((c_alpha(1e-9).unwrap() - 1.0).abs() < 1e-8);
        let grid: Vec<f64> = (1..50).map(|i| c_alpha(i as f64 / 100.0).unwrap()).collect();
        assert!(grid.windows(2).all(|w| w[0] < w[1]));
        assert!(c_alpha(0.5).is_err());
    }

    #[test]
    fn theory_point_invariants() {
        let t = TheoryPoint::from_alpha(0.3).unwrap();
        assert!(t.psi_value >= 1.0 - 1e-9);
        assert!((t.c_alpha - 0.7 * (1.0f64 / 0.4).sqrt()).abs() < 1e-12);
        assert!(t.beta_star < t.alpha);
    }

    #[test]
    fn kappa_examples() {
        let (alpha, bs) = (0.22, 1e-3);
        assert_eq!(kappa_gamma(alpha, 0.0, bs).unwrap(), psi(alpha, bs).unwrap());
        let limit = gamma_limit(alpha, bs);
        assert!(kappa_gamma(alpha, limit * (1.0 - 1e-9), bs).unwrap() < 1e-6);
        assert!(kappa_gamma(alpha, limit, bs).is_err());
        let direct = {
            let a: f64 = (0.22 - 0.1) / 0.9;
            (1.0 - a) * ((1.0 - a) / (1.0 - 1e-3)).ln() + a * (a / 1e-3).ln()
        };
        let k = kappa_gamma(alpha, 0.1, bs).unwrap();
        assert!(k > 0.0 && (k - direct).abs() < 1e-12);
        let prob = success_probability(5, alpha, 0.1, bs).unwrap();
        assert!(prob > 0.0 && prob < 1.0);
    }

    #[test]
    fn breakdown_examples() {
        let b = breakdown_bounds(0.5, 1e-12);
        assert_eq!(b.drl_lower, 0.25);
        assert_eq!(b.avg_worst(100), 0.005);
        assert!((b.favorable - 0.75).abs() < 1e-9);
    }

    #[test]
    fn lambda_prime_picks_rank() {
        let f = [0.9, 0.1, 0.5, 0.3, 0.7];
        // ⌊5·0.6⌋ = 3rd smallest.
        assert_eq!(lambda_prime(&f, 0.4).unwrap(), 0.5);
        assert_eq!(lambda_prime(&f, 0.0).unwrap(), 0.9);
        assert_eq!(lambda_prime(&f, 0.99).unwrap(), 0.1);
    }

    #[test]
    fn rpca_bound_examples() {
        assert_eq!(rpca_bound(1.0, 0.0, 2.0, 50, 0.3).unwrap(), 0.0);
        assert_eq!(rpca_bound(0.0, 0.2, 2.0, 50, 0.3).unwrap(), f64::INFINITY);
        // λ′ = 1/3 gives ratio 1/2; λ′ = 1/2 gives ratio 1.
        let a = rpca_bound(1.0, 1.0 / 3.0, 2.0, 50, 0.3).unwrap();
        let b = rpca_bound(1.0, 0.5, 2.0, 50, 0.3).unwrap();
        assert!((b / a - 2.0).abs() < 1e-12);
    }

    #[test]
    fn rlr_bound_examples() {
        assert_eq!(rlr_bound(3.0, 1.0, 0.0, 50, 1.0).unwrap(), 0.0);
        let expect = 2.0 * 3.0 * (0.2 / 0.8) * 50f64.sqrt() * 50f64.ln();
        assert!((rlr_bound(3.0, 0.0, 0.2, 50, 2.0).unwrap() - expect).abs() < 1e-12);
        let small = rlr_bound(1.0, 0.0, 0.2, 16, 1.0).unwrap() / 16f64.ln();
        let big = rlr_bound(1.0, 0.0, 0.2, 64, 1.0).unwrap() / 64f64.ln();
        assert!((big / small - 2.0).abs() < 1e-12);
    }
}

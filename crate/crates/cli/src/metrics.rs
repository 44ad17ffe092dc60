//! Evaluation metrics.

use anyhow::{bail, Result};
use slr_core::{match_1d, ProblemInstance};

/// `‖x̄ − x*‖ / ‖x*‖`.
pub fn relative_error(x_bar: &[f64], x_star: &[f64]) -> Result<f64> {
    if x_bar.len() != x_star.len() {
        bail!("length mismatch: {} vs {}", x_bar.len(), x_star.len());
    }
    let denom: f64 = x_star.iter().map(|v| v * v).sum::<f64>().sqrt();
    if denom == 0.0 {
        bail!("x_star is zero");
    }
    let num: f64 = x_bar
        .iter()
        .zip(x_star)
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        .sqrt();
    Ok(num / denom)
}

/// `min_Π ‖Π y − A x̄‖ / (m ‖y‖)`, the minimum found by sorted matching.
pub fn residual_error(x_bar: &[f64], inst: &ProblemInstance) -> Result<f64> {
    let ax = inst.a().mul_vec(x_bar)?;
    let pi = match_1d(inst.y(), &ax)?;
    let py = pi.apply(inst.y())?;
    let dist: f64 = py
        .iter()
        .zip(&ax)
        .map(|(p, a)| (p - a).powi(2))
        .sum::<f64>()
        .sqrt();
    let y_norm: f64 = inst.y().iter().map(|v| v * v).sum::<f64>().sqrt();
    Ok(dist / (inst.m() as f64 * y_norm))
}

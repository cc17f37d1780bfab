//! Processing-time model `P = alpha * H * f(D) * f(T)` with `f(x) = ln(max(x, 2))`.
//!
//! H is the number of registered hunks, D the number of distinct developers
//! and T the number of commits. The floor at 2 keeps one-developer or
//! one-commit histories from predicting zero cost.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum CostError {
    #[error("invalid model input: {0}")]
    DomainError(String),
    #[error("need at least {MIN_POINTS} observations, got {0}")]
    InsufficientData(usize),
    #[error("all design values are zero; alpha is undetermined")]
    DegenerateDesign,
}

pub const MIN_POINTS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostObservation {
    pub hunks: f64,
    pub developers: f64,
    pub commits: f64,
    pub measured_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostModelParams {
    pub alpha: f64,
    pub r_squared: f64,
    pub n_points: usize,
    pub residuals: Vec<f64>,
}

/// Log factor with the floor applied.
pub fn log_factor(x: f64) -> f64 {
    x.max(2.0).ln()
}

/// The model's size term `H * f(D) * f(T)`; prediction is alpha times this.
pub fn design_value(hunks: f64, developers: f64, commits: f64) -> f64 {
    hunks * log_factor(developers) * log_factor(commits)
}

pub fn eval_model(alpha: f64, hunks: f64, developers: f64, commits: f64) -> Result<f64, CostError> {
    if !alpha.is_finite() || alpha <= 0.0 {
        return Err(CostError::DomainError(format!("alpha must be positive, got {alpha}")));
    }
    if hunks.is_nan() || hunks < 1.0 {
        return Err(CostError::DomainError(format!("H must be at least 1, got {hunks}")));
    }
    if developers.is_nan() || commits.is_nan() || developers < 1.0 || commits < 1.0 {
        return Err(CostError::DomainError(format!(
            "D and T must be at least 1, got {developers} and {commits}"
        )));
    }
    Ok(alpha * design_value(hunks, developers, commits))
}

/// Least squares through the origin, closed form.
pub fn fit_alpha(observations: &[CostObservation]) -> Result<CostModelParams, CostError> {
    if observations.len() < MIN_POINTS {
        return Err(CostError::InsufficientData(observations.len()));
    }
    let xs: Vec<f64> = observations
        .iter()
        .map(|o| design_value(o.hunks, o.developers, o.commits))
        .collect();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    if sxx == 0.0 {
        return Err(CostError::DegenerateDesign);
    }
    let sxp: f64 = xs
        .iter()
        .zip(observations)
        .map(|(x, o)| x * o.measured_seconds)
        .sum();
    let alpha = sxp / sxx;
    let residuals: Vec<f64> = xs
        .iter()
        .zip(observations)
        .map(|(x, o)| o.measured_seconds - alpha * x)
        .collect();
    let ss_res: f64 = residuals.iter().map(|r| r * r).sum();
    let ss_tot: f64 = observations.iter().map(|o| o.measured_seconds.powi(2)).sum();
    let r_squared = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
    Ok(CostModelParams {
        alpha,
        r_squared,
        n_points: observations.len(),
        residuals,
    })
}

//! Parameter estimation: the log-domain KS error factor, the bounded integer
//! (μ, m) grid search for CDF data, and the envelope-PDF MSE fit.

mod empirical;
mod search;
mod simplex;

use serde::{Deserialize, Serialize};

pub use empirical::{empirical_from_samples, EmpiricalDistribution, EmpiricalKind};
pub use search::{fit_cdf, fit_pdf_mse};

use crate::error::{invalid, Error, Result};
use crate::pdist::ProductModel;

/// max over the admissible points of |log₁₀ F̃(x) − log₁₀ F(x)|.
pub fn ks_error(empirical: &EmpiricalDistribution, model: &ProductModel) -> Result<f64> {
    ks_error_on(&empirical.admissible_points()?, model)
}

/// The same statistic over an explicit list of (x, F̃) points.
pub fn ks_error_on(points: &[(f64, f64)], model: &ProductModel) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::NoAdmissiblePoints("empty point list".into()));
    }
    let mut worst: f64 = 0.0;
    for &(x, f_emp) in points {
        if !(f_emp > 0.0) {
            return Err(Error::NoAdmissiblePoints(format!("empirical cdf {f_emp} at x = {x} is not positive")));
        }
        let f = model.cdf(x)?.max(f64::MIN_POSITIVE);
        worst = worst.max((f_emp.log10() - f.log10()).abs());
    }
    Ok(worst)
}

/// How the overall power scale γ̄γ̃ is handled in CDF fits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ScaleMode {
    /// fixed to the sample mean for samples, fitted for tabulated CDFs
    #[default]
    Auto,
    FixedToMean,
    Fitted,
}

/// Search space and optimiser settings shared by [`fit_cdf`] and
/// [`fit_pdf_mse`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchConfig {
    pub max_m: u32,
    pub mu_grid: Vec<u32>,
    pub mu_hat_grid: Vec<u32>,
    /// defaults to 1..=max_m
    pub m_grid: Option<Vec<u32>>,
    pub m_hat_grid: Option<Vec<u32>>,
    pub kappa_min: f64,
    pub kappa_max: f64,
    /// raises the admissible floor of the CDF objective
    pub min_cdf: Option<f64>,
    pub starts: usize,
    pub seed: u64,
    /// CDF points kept for the objective after log-spaced thinning
    pub max_points: usize,
    pub max_evals: usize,
    pub scale: ScaleMode,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            max_m: 30,
            mu_grid: vec![1, 2],
            mu_hat_grid: vec![1, 2],
            m_grid: None,
            m_hat_grid: None,
            kappa_min: 0.0,
            kappa_max: 50.0,
            min_cdf: None,
            starts: 5,
            seed: 0,
            max_points: 256,
            max_evals: 400,
            scale: ScaleMode::Auto,
        }
    }
}

impl SearchConfig {
    /// Single cell μ = μ̂ = 1, m = m̂ = max_m: the Rician-like baseline.
    pub fn rician_restricted(&self) -> Self {
        Self {
            mu_grid: vec![1],
            mu_hat_grid: vec![1],
            m_grid: Some(vec![self.max_m]),
            m_hat_grid: Some(vec![self.max_m]),
            ..self.clone()
        }
    }

    fn m_values(&self, grid: &Option<Vec<u32>>) -> Vec<u32> {
        grid.clone().unwrap_or_else(|| (1..=self.max_m).collect())
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_m < 1 {
            return Err(invalid("max_m must be >= 1"));
        }
        for (name, grid) in [("mu_grid", &self.mu_grid), ("mu_hat_grid", &self.mu_hat_grid)] {
            if grid.is_empty() || grid.contains(&0) {
                return Err(invalid(format!("{name} must be a non-empty list of positive integers")));
            }
        }
        for (name, grid) in [("m_grid", &self.m_grid), ("m_hat_grid", &self.m_hat_grid)] {
            let values = self.m_values(grid);
            if values.is_empty() || values.iter().any(|&m| m < 1 || m > self.max_m) {
                return Err(invalid(format!("{name} must hold integers in 1..={}", self.max_m)));
            }
        }
        if !(self.kappa_min >= 0.0 && self.kappa_max > self.kappa_min && self.kappa_max.is_finite()) {
            return Err(invalid("kappa range must satisfy 0 <= kappa_min < kappa_max < inf"));
        }
        if let Some(f) = self.min_cdf {
            if !(f > 0.0 && f < 1.0) {
                return Err(invalid("min_cdf must lie in (0, 1)"));
            }
        }
        if self.starts < 1 || self.max_evals < 10 || self.max_points < 2 {
            return Err(invalid("starts >= 1, max_evals >= 10 and max_points >= 2 are required"));
        }
        Ok(())
    }
}

/// Integer part (μ, m, μ̂, m̂) of a candidate model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Cell {
    pub mu: u32,
    pub m: u32,
    pub mu_hat: u32,
    pub m_hat: u32,
}

impl Cell {
    pub fn swapped(self) -> Self {
        Cell { mu: self.mu_hat, m: self.m_hat, mu_hat: self.mu, m_hat: self.m }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectiveKind {
    KsError,
    MsePercent,
}

/// Continuous parameters of a candidate. `scale` is γ̄γ̃ for CDF fits and
/// the envelope scale r̃ for PDF fits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Params {
    pub kappa: f64,
    pub kappa_hat: f64,
    pub scale: f64,
}

/// One local search from one start.
#[derive(Debug, Clone, Serialize)]
pub struct StartTrace {
    pub cell: Cell,
    pub start: Params,
    pub params: Params,
    pub objective: f64,
    pub evaluations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct CellScore {
    pub cell: Cell,
    pub params: Params,
    pub objective: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct FitResult {
    pub model: ProductModel,
    /// r̃ for envelope fits
    pub envelope_scale: Option<f64>,
    pub cell: Cell,
    pub params: Params,
    pub objective: ObjectiveKind,
    pub objective_value: f64,
    /// cells by ascending objective, ties by (m+m̂, μ+μ̂)
    pub ranking: Vec<CellScore>,
    pub trace: Vec<StartTrace>,
    pub seed: u64,
    pub points_used: usize,
    pub admissible_floor: Option<f64>,
    pub scale_mode: ScaleMode,
}

impl FitResult {
    /// Position (0-based) of `cell`, or its mirror image, in the ranking.
    pub fn rank_of(&self, cell: Cell) -> Option<usize> {
        self.ranking.iter().position(|c| c.cell == cell || c.cell == cell.swapped())
    }
}

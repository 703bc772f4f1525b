//! Small-argument behaviour of the single-link CDF and the κ ↔ (K, m)
//! matching rule that equalises the asymptotes of the shadowed and
//! unshadowed laws.

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::mixture::{ShadowedDistribution, ShadowedParams};
use crate::specfun::ln_factorial;

/// Power offset and slope of F(γ) ≈ offset·(γ/γ̄)^{slope+1}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AsymptoteCoeffs {
    pub offset: f64,
    pub slope: u32,
}

impl AsymptoteCoeffs {
    pub fn cdf(&self, normalized: f64) -> f64 {
        self.offset * normalized.powi(self.slope as i32 + 1)
    }
}

/// LOS shadowing parameter of a link: a finite integer m, or no shadowing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Shadowing {
    Finite(u32),
    Infinite,
}

/// a₁ = μ^μ(1+κ)^μ/Γ(μ+1) · (m/(κμ+m))^m, t = μ−1.
pub fn asym_coeffs(p: &ShadowedParams) -> AsymptoteCoeffs {
    let mu = p.mu() as f64;
    let m = p.m() as f64;
    let ln = mu * mu.ln() + mu * p.kappa().ln_1p() - ln_factorial(p.mu() as u64)
        - m * (p.kappa() * mu / m).ln_1p();
    AsymptoteCoeffs { offset: ln.exp(), slope: p.mu() - 1 }
}

/// Unshadowed (m → ∞) offset a₂ = μ^μ(1+K)^μ e^{−Kμ}/Γ(μ+1).
pub fn asym_coeffs_unshadowed(k: f64, mu: u32) -> Result<AsymptoteCoeffs> {
    if !(k >= 0.0 && k.is_finite()) {
        return Err(invalid(format!("K must be finite and >= 0, got {k}")));
    }
    if mu < 1 {
        return Err(invalid("mu must be a positive integer"));
    }
    let muf = mu as f64;
    let ln = muf * muf.ln() + muf * k.ln_1p() - k * muf - ln_factorial(mu as u64);
    Ok(AsymptoteCoeffs { offset: ln.exp(), slope: mu - 1 })
}

/// Leading-order CDF a₁·(γ/γ̄)^μ for γ ≪ γ̄.
pub fn asym_cdf(p: &ShadowedParams, gamma: f64) -> Result<f64> {
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(crate::error::domain(format!("asym_cdf requires finite γ > 0, got {gamma}")));
    }
    Ok(asym_coeffs(p).cdf(gamma / p.mean_power()))
}

/// ln(1+κ) − (m/μ)·ln(1+μκ/m) − [ln(1+K) − K]; zero at the matched κ.
fn matching_residual(kappa: f64, k: f64, mu: f64, m: f64) -> f64 {
    kappa.ln_1p() - (m / mu) * (mu * kappa / m).ln_1p() - (k.ln_1p() - k)
}

/// κ giving a shadowed link with (μ, m) the same small-argument asymptote as
/// an unshadowed κ-μ link with factor K, i.e. a₁(κ, m) = a₂(K).
///
/// Requires m > μ, where the root exists, is unique and exceeds K.
pub fn match_kappa(k: f64, mu: u32, m: Shadowing) -> Result<f64> {
    if !(k >= 0.0 && k.is_finite()) {
        return Err(invalid(format!("K must be finite and >= 0, got {k}")));
    }
    if mu < 1 {
        return Err(invalid("mu must be a positive integer"));
    }
    let m = match m {
        Shadowing::Infinite => return Ok(k),
        Shadowing::Finite(m) if m > mu => m as f64,
        Shadowing::Finite(m) => {
            return Err(invalid(format!("matching needs m > mu, got m = {m}, mu = {mu}")));
        }
    };
    if k == 0.0 {
        return Ok(0.0);
    }
    let muf = mu as f64;
    let g = |x: f64| matching_residual(x, k, muf, m);
    let mut lo = k;
    let mut hi = k.max(1.0);
    while g(hi) > 0.0 {
        lo = hi;
        hi *= 2.0;
        if !hi.is_finite() || hi > 1e300 {
            return Err(Error::NoRoot(format!("no sign change bracketing the matched kappa for K = {k}")));
        }
    }
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let root = if g(lo).abs() <= g(hi).abs() { lo } else { hi };
    if g(root).abs() > 1e-12 {
        return Err(Error::NoRoot(format!("matched kappa residual {} above 1e-12", g(root))));
    }
    Ok(root)
}

/// Least-squares slope of ln F against ln γ over `points` log-spaced values
/// in [lo, hi] (normalised by γ̄).
pub fn cdf_log_slope(p: &ShadowedParams, lo: f64, hi: f64, points: usize) -> Result<f64> {
    if !(lo > 0.0 && hi > lo) || points < 2 {
        return Err(invalid("slope fit needs 0 < lo < hi and at least two points"));
    }
    let d = ShadowedDistribution::new(*p);
    let mut xs = Vec::with_capacity(points);
    let mut ys = Vec::with_capacity(points);
    for i in 0..points {
        let t = lo.ln() + (hi / lo).ln() * i as f64 / (points - 1) as f64;
        let f = d.cdf(t.exp() * p.mean_power())?;
        if f <= 0.0 {
            return Err(Error::Underflow(format!("cdf vanished at γ/γ̄ = {}", t.exp())));
        }
        xs.push(t);
        ys.push(f.ln());
    }
    let n = points as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    Ok(sxy / sxx)
}

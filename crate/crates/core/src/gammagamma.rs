//! Product of two independent Gamma variables with integer shapes (the ΓΓ
//! law), the kernel every product-distribution quantity is assembled from.

use serde::{Deserialize, Serialize};

use crate::error::{domain, invalid, Error, Result};
use crate::specfun::{ln_bessel_k_ladder, ln_factorial, ln_tricomi_u_int_a};

/// X·X̂ with X ~ Gamma(m, Ω) and X̂ ~ Gamma(m̂, Ω̂) (shape, scale).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGammaGammaParams")]
pub struct GammaGammaParams {
    m: u32,
    m_hat: u32,
    omega: f64,
    omega_hat: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGammaGammaParams {
    m: u32,
    m_hat: u32,
    omega: f64,
    omega_hat: f64,
}

impl TryFrom<RawGammaGammaParams> for GammaGammaParams {
    type Error = Error;

    fn try_from(raw: RawGammaGammaParams) -> Result<Self> {
        GammaGammaParams::new(raw.m, raw.m_hat, raw.omega, raw.omega_hat)
    }
}

impl GammaGammaParams {
    pub fn new(m: u32, m_hat: u32, omega: f64, omega_hat: f64) -> Result<Self> {
        if m < 1 || m_hat < 1 {
            return Err(invalid("Gamma shapes must be positive integers"));
        }
        for (name, v) in [("omega", omega), ("omega_hat", omega_hat)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(format!("{name} must be finite and > 0, got {v}")));
            }
        }
        Ok(Self { m, m_hat, omega, omega_hat })
    }

    pub fn m(&self) -> u32 {
        self.m
    }
    pub fn m_hat(&self) -> u32 {
        self.m_hat
    }
    pub fn omega(&self) -> f64 {
        self.omega
    }
    pub fn omega_hat(&self) -> f64 {
        self.omega_hat
    }

    pub fn swapped(&self) -> Self {
        Self { m: self.m_hat, m_hat: self.m, omega: self.omega_hat, omega_hat: self.omega }
    }
}

/// Per-argument state shared by every term with the same scale product
/// ΩΩ̂: y = z/(ΩΩ̂) and the ladder ln K_ν(2√y), ν = 0..=max_order.
pub(crate) struct Kernel {
    ln_z: f64,
    ln_y: f64,
    ln_k: Vec<f64>,
}

impl Kernel {
    pub(crate) fn new(z: f64, scale_product: f64, max_order: u32) -> Self {
        let y = z / scale_product;
        Self { ln_z: z.ln(), ln_y: y.ln(), ln_k: ln_bessel_k_ladder(max_order as usize, 2.0 * y.sqrt()) }
    }

    fn ln_k(&self, order: i64) -> f64 {
        self.ln_k[order.unsigned_abs() as usize]
    }

    pub(crate) fn pdf(&self, m: u32, m_hat: u32) -> f64 {
        let (a, b) = (m as i64, m_hat as i64);
        let ln = std::f64::consts::LN_2 + 0.5 * (a + b) as f64 * self.ln_y + self.ln_k(a - b)
            - self.ln_z
            - ln_factorial(m as u64 - 1)
            - ln_factorial(m_hat as u64 - 1);
        ln.exp()
    }

    /// k-th summand of the complementary CDF,
    /// 2/(k!Γ(m̂)) · y^{(k+m̂)/2} · K_{|m̂−k|}(2√y).
    pub(crate) fn tail_term(&self, k: u32, m_hat: u32) -> f64 {
        let ln = std::f64::consts::LN_2 - ln_factorial(k as u64) - ln_factorial(m_hat as u64 - 1)
            + 0.5 * (k + m_hat) as f64 * self.ln_y
            + self.ln_k(m_hat as i64 - k as i64);
        ln.exp()
    }

    /// P(XX̂ > z) = Σ_{k<m} tail_term(k, m̂).
    pub(crate) fn survival(&self, m: u32, m_hat: u32) -> f64 {
        (0..m).rev().map(|k| self.tail_term(k, m_hat)).sum()
    }
}

/// Largest Bessel order touched by the pdf and cdf of (m, m̂).
pub(crate) fn max_order(m: u32, m_hat: u32) -> u32 {
    m.abs_diff(m_hat).max(m_hat).max(m.saturating_sub(1))
}

fn check_positive(x: f64, what: &str) -> Result<()> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(domain(format!("{what} requires finite x > 0, got {x}")));
    }
    Ok(())
}

/// Density of the ΓΓ law:
/// 2 x^{(m+m̂)/2−1} K_{m−m̂}(2√(x/(ΩΩ̂))) / (Γ(m)Γ(m̂)(ΩΩ̂)^{(m+m̂)/2}).
pub fn gg_pdf(p: &GammaGammaParams, x: f64) -> Result<f64> {
    check_positive(x, "gg_pdf")?;
    let kernel = Kernel::new(x, p.omega * p.omega_hat, max_order(p.m, p.m_hat));
    Ok(kernel.pdf(p.m, p.m_hat))
}

/// CDF of the ΓΓ law, 1 − Σ_{k<m} 2/(k!Γ(m̂)) y^{(k+m̂)/2} K_{|m̂−k|}(2√y)
/// with y = x/(ΩΩ̂).
pub fn gg_cdf(p: &GammaGammaParams, x: f64) -> Result<f64> {
    check_positive(x, "gg_cdf")?;
    let kernel = Kernel::new(x, p.omega * p.omega_hat, max_order(p.m, p.m_hat));
    Ok((1.0 - kernel.survival(p.m, p.m_hat)).clamp(0.0, 1.0))
}

/// ln W_{κ,μ}(z) for the Whittaker indices met by the ΓΓ MGF,
/// κ = −(m+m̂−1)/2 and μ = (m−m̂)/2, via
/// W_{κ,μ}(z) = e^{−z/2} z^{μ+½} U(μ−κ+½, 1+2μ, z) = e^{−z/2} z^{μ+½} U(m, 1+m−m̂, z).
pub fn ln_whittaker_w(m: u32, m_hat: u32, z: f64) -> Result<f64> {
    let mu_half = 0.5 * (m as f64 - m_hat as f64);
    Ok(-0.5 * z + (mu_half + 0.5) * z.ln() + ln_tricomi_u_int_a(m, 1 + m as i32 - m_hat as i32, z)?)
}

/// E[e^{sXX̂}] for s < 0.
///
/// With z = −1/(sΩΩ̂) the Whittaker form
/// e^{z/2} z^{(m+m̂−1)/2} W_{−(m+m̂−1)/2,(m−m̂)/2}(z) collapses to z^m U(m, 1+m−m̂, z),
/// which is what is evaluated (the e^{±z/2} factors cancel analytically).
pub fn gg_mgf(p: &GammaGammaParams, s: f64) -> Result<f64> {
    if !(s < 0.0) || !s.is_finite() {
        return Err(domain(format!("gg_mgf requires finite s < 0, got {s}")));
    }
    let z = -1.0 / (s * p.omega * p.omega_hat);
    if !z.is_finite() {
        return Err(domain(format!("gg_mgf argument −1/(sΩΩ̂) overflows for s = {s}")));
    }
    let ln_u = ln_tricomi_u_int_a(p.m, 1 + p.m as i32 - p.m_hat as i32, z)?;
    Ok((p.m as f64 * z.ln() + ln_u).exp().min(1.0))
}

/// E[(XX̂)^n] = (ΩΩ̂)^n (n+m−1)!(n+m̂−1)!/(Γ(m)Γ(m̂)).
pub fn gg_moment(p: &GammaGammaParams, n: u32) -> Result<f64> {
    let ln = ln_gg_moment(p.m, p.m_hat, p.omega * p.omega_hat, n)?;
    let v = ln.exp();
    if !v.is_finite() {
        return Err(Error::Overflow(format!("moment of order {n} exceeds f64 range")));
    }
    Ok(v)
}

pub(crate) fn ln_gamma_moment(shape: u32, scale: f64, n: u32) -> f64 {
    n as f64 * scale.ln() + ln_factorial((shape + n - 1) as u64) - ln_factorial(shape as u64 - 1)
}

fn ln_gg_moment(m: u32, m_hat: u32, scale_product: f64, n: u32) -> Result<f64> {
    if n < 1 {
        return Err(domain("moment order must be >= 1"));
    }
    Ok(ln_gamma_moment(m, 1.0, n) + ln_gamma_moment(m_hat, 1.0, n) + n as f64 * scale_product.ln())
}

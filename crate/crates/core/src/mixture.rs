//! Squared κ-μ shadowed variates with integer μ and m as finite signed
//! mixtures of Gamma laws.
//!
//! [`expand`] produces the closed-form table of (weight, shape, scale)
//! triples. For μ > m the weights alternate in sign; when κ is small the
//! individual weights blow up like (μκ/(μκ+m))^{−(m+i−1)} and the signed sum
//! loses every significant digit. In that regime evaluation switches to the
//! equivalent all-positive negative-binomial mixture
//!
//! ```text
//! X ~ Σ_k NB(k; m, ρ) · Gamma(μ + k, γ̄/(μ(1+κ))),   ρ = μκ/(μκ+m)
//! ```
//!
//! which converges quickly exactly when the closed form is ill-conditioned.

use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{domain, invalid, Error, Result};
use crate::specfun::{compensated_sum, gamma_p_int, ln_binomial, ln_factorial};

/// κ below this is treated as exactly zero (Nakagami-μ).
pub const KAPPA_ZERO: f64 = 1e-12;

/// Shadowing parameter used to stand in for an unshadowed (Rician) LOS.
pub const RICIAN_PROXY_M: u32 = 20;

/// Above this Σ|Cⱼ| the closed-form mixture is replaced for evaluation.
const MAX_CONDITION: f64 = 1e3;
const MAX_SERIES_TERMS: usize = 4096;
const SERIES_TAIL: f64 = 1e-17;

/// Parameters (γ̄, κ, μ, m) of one squared κ-μ shadowed channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawShadowedParams")]
pub struct ShadowedParams {
    mean_power: f64,
    kappa: f64,
    mu: u32,
    m: u32,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawShadowedParams {
    mean_power: f64,
    kappa: f64,
    mu: u32,
    m: u32,
}

impl TryFrom<RawShadowedParams> for ShadowedParams {
    type Error = Error;

    fn try_from(raw: RawShadowedParams) -> Result<Self> {
        ShadowedParams::new(raw.mean_power, raw.kappa, raw.mu, raw.m)
    }
}

impl ShadowedParams {
    pub fn new(mean_power: f64, kappa: f64, mu: u32, m: u32) -> Result<Self> {
        if !(mean_power > 0.0 && mean_power.is_finite()) {
            return Err(invalid(format!("mean power must be finite and > 0, got {mean_power}")));
        }
        if !(kappa >= 0.0 && kappa.is_finite()) {
            return Err(invalid(format!("kappa must be finite and >= 0, got {kappa}")));
        }
        if mu < 1 {
            return Err(invalid("mu must be a positive integer"));
        }
        if m < 1 {
            return Err(invalid("m must be a positive integer"));
        }
        Ok(Self { mean_power, kappa, mu, m })
    }

    /// Rayleigh fading: κ = 0, μ = m = 1.
    pub fn rayleigh(mean_power: f64) -> Result<Self> {
        Self::new(mean_power, 0.0, 1, 1)
    }

    /// Rician fading with factor K, represented with a finite shadowing
    /// parameter `m` (use [`RICIAN_PROXY_M`] for the usual proxy).
    pub fn rician(mean_power: f64, k_factor: f64, m: u32) -> Result<Self> {
        Self::new(mean_power, k_factor, 1, m)
    }

    pub fn mean_power(&self) -> f64 {
        self.mean_power
    }
    pub fn kappa(&self) -> f64 {
        self.kappa
    }
    pub fn mu(&self) -> u32 {
        self.mu
    }
    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn with_mean_power(&self, mean_power: f64) -> Result<Self> {
        Self::new(mean_power, self.kappa, self.mu, self.m)
    }

    /// Base Gamma scale γ̄/(μ(1+κ)).
    fn base_scale(&self) -> f64 {
        self.mean_power / (self.mu as f64 * (1.0 + self.kappa))
    }

    /// ρ = μκ/(μκ+m), the LOS share of the negative-binomial representation.
    fn los_share(&self) -> f64 {
        let mk = self.mu as f64 * self.kappa;
        mk / (mk + self.m as f64)
    }
}

/// One Gamma component: weight Cⱼ, integer shape mⱼ, scale Ωⱼ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GammaTerm {
    pub weight: f64,
    pub shape: u32,
    pub scale: f64,
}

impl GammaTerm {
    fn ln_pdf(&self, x: f64) -> f64 {
        let a = self.shape as f64;
        (a - 1.0) * x.ln() - x / self.scale - a * self.scale.ln() - ln_factorial(self.shape as u64 - 1)
    }

    fn pdf(&self, x: f64) -> f64 {
        if x == 0.0 {
            return if self.shape == 1 { 1.0 / self.scale } else { 0.0 };
        }
        self.ln_pdf(x).exp()
    }

    fn cdf(&self, x: f64) -> f64 {
        gamma_p_int(self.shape, x / self.scale)
    }
}

/// Finite signed mixture Σⱼ Cⱼ·Gamma(mⱼ, Ωⱼ).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GammaMixture {
    terms: Vec<GammaTerm>,
    /// indices of non-zero terms, by descending |Cⱼ|
    #[serde(skip)]
    order: Vec<usize>,
}

impl GammaMixture {
    fn from_terms(terms: Vec<GammaTerm>) -> Self {
        let mut order: Vec<usize> = (0..terms.len()).filter(|&i| terms[i].weight != 0.0).collect();
        order.sort_by(|&i, &j| terms[j].weight.abs().total_cmp(&terms[i].weight.abs()));
        Self { terms, order }
    }

    /// All M+1 terms, including zero-weight placeholders.
    pub fn terms(&self) -> &[GammaTerm] {
        &self.terms
    }

    /// Non-zero terms in descending |weight| order.
    pub fn active_terms(&self) -> impl Iterator<Item = &GammaTerm> + '_ {
        self.order.iter().map(move |&i| &self.terms[i])
    }

    pub fn weight_sum(&self) -> f64 {
        compensated_sum(self.active_terms().map(|t| t.weight))
    }

    /// Σ|Cⱼ| / |ΣCⱼ|; 1 for all-positive mixtures.
    pub fn condition_number(&self) -> f64 {
        let abs: f64 = self.active_terms().map(|t| t.weight.abs()).sum();
        abs / self.weight_sum().abs()
    }

    pub fn mean(&self) -> f64 {
        compensated_sum(self.active_terms().map(|t| t.weight * t.shape as f64 * t.scale))
    }

    pub fn pdf(&self, x: f64) -> f64 {
        compensated_sum(self.active_terms().map(|t| t.weight * t.pdf(x)))
    }

    pub fn cdf(&self, x: f64) -> f64 {
        compensated_sum(self.active_terms().map(|t| t.weight * t.cdf(x)))
    }

    pub fn max_shape(&self) -> u32 {
        self.active_terms().map(|t| t.shape).max().unwrap_or(1)
    }

    /// Truncated all-positive negative-binomial representation; `None` if it
    /// would need more than `MAX_SERIES_TERMS` components.
    fn negative_binomial(p: &ShadowedParams) -> Option<Self> {
        let rho = p.los_share();
        let scale = p.base_scale();
        if rho == 0.0 {
            return Some(Self::from_terms(vec![GammaTerm { weight: 1.0, shape: p.mu, scale }]));
        }
        let m = p.m as u64;
        let ln_r = (-rho).ln_1p();
        let ln_rho = rho.ln();
        let mut terms = Vec::new();
        let mut cumulative = 0.0;
        for k in 0..MAX_SERIES_TERMS as u64 {
            let ln_w = m as f64 * ln_r + ln_binomial(m + k - 1, k) + k as f64 * ln_rho;
            let w = ln_w.exp();
            cumulative += w;
            terms.push(GammaTerm { weight: w, shape: p.mu + k as u32, scale });
            // past the mode, the remaining mass is bounded by a geometric tail
            let past_mode = (k as f64) > (m as f64 - 1.0) * rho / (1.0 - rho);
            if past_mode && (1.0 - cumulative < SERIES_TAIL || w * rho / (1.0 - rho) < SERIES_TAIL) {
                return Some(Self::from_terms(terms));
            }
        }
        None
    }
}

/// Closed-form Gamma-mixture expansion of a squared κ-μ shadowed law.
///
/// For κ below [`KAPPA_ZERO`] the exact Nakagami-μ single term
/// (1, μ, γ̄/μ) is returned.
pub fn expand(p: &ShadowedParams) -> GammaMixture {
    let mu = p.mu as i64;
    let m = p.m as i64;
    if p.kappa < KAPPA_ZERO {
        return GammaMixture::from_terms(vec![GammaTerm {
            weight: 1.0,
            shape: p.mu,
            scale: p.mean_power / mu as f64,
        }]);
    }
    let mk = mu as f64 * p.kappa;
    // weights are formed in double-double so that, once rounded, they still
    // sum to one when individually much larger than one
    let mk_dd = Dd::product(mu as f64, p.kappa);
    let rho = mk_dd.div(mk_dd.add_f64(m as f64)); // μκ/(μκ+m)
    let r = Dd::from(1.0).sub(rho); // m/(μκ+m)
    let scale_lo = p.base_scale();
    let scale_hi = (mk + m as f64) / m as f64 * scale_lo;
    let weight = |negative: bool, n: i64, k: i64, r_pow: i64, rho_pow: i64| {
        let w = Dd::binomial(n as u64, k as u64).mul(r.powi(r_pow as u32)).div(rho.powi(rho_pow as u32)).hi();
        if negative {
            -w
        } else {
            w
        }
    };

    let terms: Vec<GammaTerm> = if mu > m {
        (0..=mu)
            .map(|i| {
                if i == 0 {
                    GammaTerm { weight: 0.0, shape: (mu - m + 1) as u32, scale: scale_lo }
                } else if i <= mu - m {
                    GammaTerm {
                        weight: weight(m % 2 == 1, m + i - 2, i - 1, m, m + i - 1),
                        shape: (mu - m - i + 1) as u32,
                        scale: scale_lo,
                    }
                } else {
                    let e = i - mu + m - 1;
                    GammaTerm {
                        weight: weight(e % 2 == 1, i - 2, e, e, i - 1),
                        shape: (mu - i + 1) as u32,
                        scale: scale_hi,
                    }
                }
            })
            .collect()
    } else {
        let big_m = m - mu;
        (0..=big_m)
            .map(|i| {
                let w = Dd::binomial(big_m as u64, i as u64)
                    .mul(r.powi(i as u32))
                    .mul(rho.powi((big_m - i) as u32))
                    .hi();
                GammaTerm { weight: w, shape: (m - i) as u32, scale: scale_hi }
            })
            .collect()
    };
    GammaMixture::from_terms(terms)
}

/// Mixture used for numerical evaluation: the closed form unless it is
/// badly conditioned, in which case the positive series.
pub(crate) fn evaluation_mixture(p: &ShadowedParams) -> GammaMixture {
    let closed = expand(p);
    if closed.condition_number() <= MAX_CONDITION {
        return closed;
    }
    GammaMixture::negative_binomial(p).unwrap_or(closed)
}

/// A single κ-μ shadowed channel with its expansion cached.
#[derive(Debug, Clone)]
pub struct ShadowedDistribution {
    params: ShadowedParams,
    expansion: GammaMixture,
    evaluation: GammaMixture,
}

impl ShadowedDistribution {
    pub fn new(params: ShadowedParams) -> Self {
        let expansion = expand(&params);
        let evaluation = evaluation_mixture(&params);
        Self { params, expansion, evaluation }
    }

    pub fn params(&self) -> &ShadowedParams {
        &self.params
    }

    pub fn expansion(&self) -> &GammaMixture {
        &self.expansion
    }

    pub fn pdf(&self, x: f64) -> Result<f64> {
        if !(x >= 0.0) {
            return Err(domain(format!("pdf requires x >= 0, got {x}")));
        }
        let (sum, abs) = signed_and_abs(self.evaluation.active_terms().map(|t| t.weight * t.pdf(x)));
        if sum.abs() < 1e-6 * abs && x > 0.0 && x < self.params.mu as f64 * self.params.base_scale() {
            return Ok(self.series_pdf(x));
        }
        Ok(sum)
    }

    pub fn cdf(&self, x: f64) -> Result<f64> {
        if !(x >= 0.0) {
            return Err(domain(format!("cdf requires x >= 0, got {x}")));
        }
        if x == 0.0 {
            return Ok(0.0);
        }
        let (sum, abs) = signed_and_abs(self.evaluation.active_terms().map(|t| t.weight * t.cdf(x)));
        let raw = if sum.abs() < 1e-6 * abs { self.series_cdf(x) } else { sum };
        clamp_probability(raw, 1e-12)
    }

    /// Σ_k NB(k)·P(μ+k, x/Ω) summed until the remaining mass is negligible.
    fn series_cdf(&self, x: f64) -> f64 {
        let y = x / self.params.base_scale();
        self.series(|shape| gamma_p_int(shape, y))
    }

    fn series_pdf(&self, x: f64) -> f64 {
        let scale = self.params.base_scale();
        self.series(|shape| GammaTerm { weight: 1.0, shape, scale }.pdf(x))
    }

    /// Sums w_k·g(μ+k) for a g that is non-increasing in k.
    fn series<G: Fn(u32) -> f64>(&self, g: G) -> f64 {
        let p = &self.params;
        let rho = p.los_share();
        let m = p.m as u64;
        let ln_r = (-rho).ln_1p();
        let ln_rho = if rho > 0.0 { rho.ln() } else { f64::NEG_INFINITY };
        let mut terms = Vec::new();
        let mut cumulative = 0.0;
        for k in 0..200_000u64 {
            let w = if k == 0 {
                (m as f64 * ln_r).exp()
            } else {
                (m as f64 * ln_r + ln_binomial(m + k - 1, k) + k as f64 * ln_rho).exp()
            };
            cumulative += w;
            let v = w * g(p.mu + k as u32);
            terms.push(v);
            let bound = (1.0 - cumulative).max(0.0) * g(p.mu + k as u32 + 1);
            let total: f64 = terms.iter().sum();
            if rho == 0.0 || bound <= 1e-16 * total {
                break;
            }
        }
        terms.iter().rev().sum()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Result<Vec<f64>> {
        sample_single(&self.params, rng, n)
    }
}

fn signed_and_abs<I: Iterator<Item = f64>>(values: I) -> (f64, f64) {
    let v: Vec<f64> = values.collect();
    let abs = v.iter().map(|x| x.abs()).sum();
    (compensated_sum(v), abs)
}

pub(crate) fn clamp_probability(raw: f64, slack: f64) -> Result<f64> {
    if !raw.is_finite() || raw < -slack || raw > 1.0 + slack {
        return Err(Error::Numerical(format!("probability {raw} outside [0, 1] beyond tolerance {slack}")));
    }
    Ok(raw.clamp(0.0, 1.0))
}

pub fn pdf_single(p: &ShadowedParams, x: f64) -> Result<f64> {
    ShadowedDistribution::new(*p).pdf(x)
}

pub fn cdf_single(p: &ShadowedParams, x: f64) -> Result<f64> {
    ShadowedDistribution::new(*p).cdf(x)
}

/// Draws by the physical construction: a unit-mean Gamma(m, 1/m) LOS power
/// fluctuation u, then a noncentral χ² with 2μ degrees of freedom and
/// noncentrality 2μκu, scaled by γ̄/(2μ(1+κ)).
pub fn sample_single<R: Rng + ?Sized>(p: &ShadowedParams, rng: &mut R, n: usize) -> Result<Vec<f64>> {
    if n < 1 {
        return Err(invalid("sample count must be >= 1"));
    }
    let shadow = Gamma::new(p.m as f64, 1.0 / p.m as f64).map_err(|e| invalid(e.to_string()))?;
    let dof = 2 * p.mu as usize;
    let scale = p.mean_power / (dof as f64 * (1.0 + p.kappa));
    let los = 2.0 * p.mu as f64 * p.kappa;
    Ok((0..n)
        .map(|_| {
            let u: f64 = shadow.sample(rng);
            let offset = (los * u).sqrt();
            let z0: f64 = rng.sample(StandardNormal);
            let mut chi2 = (z0 + offset) * (z0 + offset);
            for _ in 1..dof {
                let z: f64 = rng.sample(StandardNormal);
                chi2 += z * z;
            }
            chi2 * scale
        })
        .collect())
}

/// Unevaluated sum hi + lo of two doubles (~106-bit significand).
#[derive(Debug, Clone, Copy)]
struct Dd(f64, f64);

impl Dd {
    fn from(x: f64) -> Self {
        Dd(x, 0.0)
    }

    fn hi(self) -> f64 {
        self.0 + self.1
    }

    fn two_sum(a: f64, b: f64) -> Self {
        let s = a + b;
        let bb = s - a;
        Dd(s, (a - (s - bb)) + (b - bb))
    }

    fn product(a: f64, b: f64) -> Self {
        let p = a * b;
        Dd(p, a.mul_add(b, -p))
    }

    fn normalize(hi: f64, lo: f64) -> Self {
        let s = hi + lo;
        Dd(s, lo - (s - hi))
    }

    fn add(self, o: Dd) -> Self {
        let Dd(s, e) = Self::two_sum(self.0, o.0);
        Self::normalize(s, e + self.1 + o.1)
    }

    fn add_f64(self, x: f64) -> Self {
        self.add(Dd::from(x))
    }

    fn sub(self, o: Dd) -> Self {
        self.add(Dd(-o.0, -o.1))
    }

    fn mul(self, o: Dd) -> Self {
        let Dd(p, e) = Self::product(self.0, o.0);
        Self::normalize(p, e + self.0 * o.1 + self.1 * o.0)
    }

    fn div(self, o: Dd) -> Self {
        let q1 = self.0 / o.0;
        let rem = self.sub(o.mul(Dd::from(q1)));
        let q2 = rem.0 / o.0;
        let rem = rem.sub(o.mul(Dd::from(q2)));
        let q3 = rem.0 / o.0;
        Self::normalize(q1, q2).add_f64(q3)
    }

    fn powi(self, n: u32) -> Self {
        let mut result = Dd::from(1.0);
        let mut base = self;
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                result = result.mul(base);
            }
            base = base.mul(base);
            n >>= 1;
        }
        result
    }

    /// C(n, k) by the multiplicative formula; exact while it fits 106 bits.
    fn binomial(n: u64, k: u64) -> Self {
        let k = k.min(n - k);
        let mut c = Dd::from(1.0);
        for i in 1..=k {
            c = c.mul(Dd::from((n - k + i) as f64)).div(Dd::from(i as f64));
        }
        c
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(g: f64, k: f64, mu: u32, m: u32) -> ShadowedParams {
        ShadowedParams::new(g, k, mu, m).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn expansion_mu_le_m() {
        let mix = expand(&params(1.0, 1.0, 1, 2));
        let t = mix.terms();
        assert_eq!(t.len(), 2);
        assert!(close(t[0].weight, 1.0 / 3.0, 1e-15) && t[0].shape == 2 && close(t[0].scale, 0.75, 1e-15));
        assert!(close(t[1].weight, 2.0 / 3.0, 1e-15) && t[1].shape == 1 && close(t[1].scale, 0.75, 1e-15));
    }

    #[test]
    fn expansion_mu_gt_m() {
        let mix = expand(&params(1.0, 1.0, 2, 1));
        let t = mix.terms();
        assert_eq!(t.len(), 3);
        assert_eq!((t[0].weight, t[0].shape), (0.0, 2));
        assert!(close(t[0].scale, 0.25, 1e-15));
        assert!(close(t[1].weight, -0.5, 1e-15) && t[1].shape == 1 && close(t[1].scale, 0.25, 1e-15));
        assert!(close(t[2].weight, 1.5, 1e-15) && t[2].shape == 1 && close(t[2].scale, 0.75, 1e-15));
        assert_eq!(mix.active_terms().count(), 2);
    }

    #[test]
    fn expansion_kappa_zero() {
        let mix = expand(&params(1.0, 0.0, 3, 5));
        assert_eq!(mix.terms(), &[GammaTerm { weight: 1.0, shape: 3, scale: 1.0 / 3.0 }]);
    }

    #[test]
    fn branch_boundary_m_equals_mu() {
        // μ = m goes to the μ ≤ m column: a single Nakagami-μ term whatever κ
        for mu in 1..5 {
            let mix = expand(&params(2.0, 3.7, mu, mu));
            assert_eq!(mix.terms().len(), 1);
            assert_eq!(mix.terms()[0].shape, mu);
            assert!(close(mix.terms()[0].scale, 2.0 / mu as f64, 1e-14));
        }
    }

    #[test]
    fn weight_sum_and_mean() {
        for &k in &[0.0, 0.1, 1.0, 5.0, 10.0, 25.0] {
            for mu in 1..=5 {
                for m in 1..=8 {
                    let mix = expand(&params(1.7, k, mu, m));
                    assert!((mix.weight_sum() - 1.0).abs() <= 1e-12, "k={k} mu={mu} m={m}");
                    assert!((mix.mean() / 1.7 - 1.0).abs() <= 1e-10, "k={k} mu={mu} m={m}");
                }
            }
        }
    }

    #[test]
    fn stress_case_signed_weights() {
        let p = params(1.0, 25.0, 8, 7);
        let mix = expand(&p);
        assert!((mix.weight_sum() - 1.0).abs() < 1e-12);
        assert!(mix.active_terms().any(|t| t.weight < 0.0));
        let d = ShadowedDistribution::new(p);
        for i in 1..400 {
            let x = i as f64 * 0.01;
            assert!(d.pdf(x).unwrap() >= -1e-12);
        }
        assert!(close(d.cdf(50.0).unwrap(), 1.0, 1e-12));
    }

    #[test]
    fn negative_binomial_agrees_with_closed_form() {
        for &(k, mu, m) in &[(0.7, 3, 1), (2.0, 2, 3), (0.05, 4, 2), (5.0, 1, 4)] {
            let p = params(1.0, k, mu, m);
            let closed = expand(&p);
            let nb = GammaMixture::negative_binomial(&p).unwrap();
            for &x in &[0.05, 0.4, 1.0, 2.5] {
                assert!(close(closed.cdf(x), nb.cdf(x), 1e-12), "k={k} mu={mu} m={m} x={x}");
                assert!(close(closed.pdf(x), nb.pdf(x), 1e-11), "k={k} mu={mu} m={m} x={x}");
            }
        }
    }

    #[test]
    fn ill_conditioned_small_kappa() {
        // closed form has Σ|C| ~ 1e20 here; evaluation must still be a CDF
        let p = params(1.0, 1e-6, 6, 1);
        assert!(expand(&p).condition_number() > 1e10);
        let d = ShadowedDistribution::new(p);
        let nak = ShadowedDistribution::new(params(1.0, 0.0, 6, 1));
        for &x in &[0.1, 0.5, 1.0, 2.0] {
            assert!(close(d.cdf(x).unwrap(), nak.cdf(x).unwrap(), 1e-5));
        }
    }

    #[test]
    fn simple_values() {
        let p = params(1.0, 0.0, 1, 1);
        assert!(close(pdf_single(&p, 1.0).unwrap(), (-1f64).exp(), 1e-15));
        assert!(close(cdf_single(&p, 1.0).unwrap(), 1.0 - (-1f64).exp(), 1e-15));
        assert_eq!(cdf_single(&params(1.0, 2.0, 2, 3), 0.0).unwrap(), 0.0);
        assert_eq!(pdf_single(&params(1.0, 2.0, 2, 3), 0.0).unwrap(), 0.0);
        assert!(pdf_single(&p, -1.0).is_err());
        assert!(cdf_single(&p, -1.0).is_err());
    }

    #[test]
    fn small_argument_cdf_keeps_relative_accuracy() {
        // μ > m: the closed-form terms are O(x) but the CDF is O(x^μ)
        let p = params(1.0, 0.8, 3, 1);
        let d = ShadowedDistribution::new(p);
        let f1 = d.cdf(1e-5).unwrap();
        let f2 = d.cdf(2e-5).unwrap();
        assert!(f1 > 0.0);
        assert!(((f2 / f1).log2() - 3.0).abs() < 1e-3);
    }

    #[test]
    fn invalid_params() {
        assert!(ShadowedParams::new(0.0, 1.0, 1, 1).is_err());
        assert!(ShadowedParams::new(1.0, -0.1, 1, 1).is_err());
        assert!(ShadowedParams::new(1.0, 1.0, 0, 1).is_err());
        assert!(ShadowedParams::new(1.0, 1.0, 1, 0).is_err());
        assert!(ShadowedParams::new(f64::NAN, 1.0, 1, 1).is_err());
        let bad: std::result::Result<ShadowedParams, _> =
            serde_json::from_str(r#"{"mean_power":1,"kappa":1,"mu":1.5,"m":2}"#);
        assert!(bad.is_err());
        let ok: ShadowedParams = serde_json::from_str(r#"{"mean_power":1,"kappa":1,"mu":1,"m":2}"#).unwrap();
        assert_eq!(ok.m(), 2);
    }

    #[test]
    fn sampler_rejects_zero_count() {
        let mut rng = rand::rng();
        assert!(sample_single(&params(1.0, 1.0, 1, 1), &mut rng, 0).is_err());
    }
}

//! Link-budget models built on the product distribution: outage and
//! throughput of a wireless-powered harvest-then-transmit link, and the
//! received-power CDF of a backscatter link.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma_lr;

use crate::error::{domain, invalid, Error, Result};
use crate::mixture::{ShadowedParams, RICIAN_PROXY_M};
use crate::pdist::ProductModel;
use crate::quad;
use crate::specfun::Accuracy;

/// Fading of the source–destination hop.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "model")]
pub enum SdModel {
    Rayleigh,
    Rician { k: f64 },
    Shadowed { params: ShadowedParams },
}

/// Harvest-then-transmit link: an N-antenna power beacon charges the source
/// for a fraction τ of each frame, and the source spends the harvested
/// energy transmitting to the destination for the remaining 1 − τ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawWpcConfig", into = "RawWpcConfig")]
pub struct WpcConfig {
    p_over_n0: f64,
    antennas: u32,
    rician_k: f64,
    s_d: SdModel,
    tau: f64,
    eta: f64,
    alpha: f64,
    d1: f64,
    d2: f64,
    rate: f64,
    m_proxy: u32,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawWpcConfig {
    /// linear P/N₀
    p_over_n0: f64,
    antennas: u32,
    rician_k: f64,
    s_d: SdModel,
    tau: f64,
    eta: f64,
    alpha: f64,
    d1: f64,
    d2: f64,
    rate: f64,
    #[serde(default = "default_m_proxy")]
    m_proxy: u32,
}

fn default_m_proxy() -> u32 {
    RICIAN_PROXY_M
}

impl TryFrom<RawWpcConfig> for WpcConfig {
    type Error = Error;

    fn try_from(r: RawWpcConfig) -> Result<Self> {
        let cfg = WpcConfig {
            p_over_n0: r.p_over_n0,
            antennas: r.antennas,
            rician_k: r.rician_k,
            s_d: r.s_d,
            tau: r.tau,
            eta: r.eta,
            alpha: r.alpha,
            d1: r.d1,
            d2: r.d2,
            rate: r.rate,
            m_proxy: r.m_proxy,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

impl From<WpcConfig> for RawWpcConfig {
    fn from(c: WpcConfig) -> Self {
        RawWpcConfig {
            p_over_n0: c.p_over_n0,
            antennas: c.antennas,
            rician_k: c.rician_k,
            s_d: c.s_d,
            tau: c.tau,
            eta: c.eta,
            alpha: c.alpha,
            d1: c.d1,
            d2: c.d2,
            rate: c.rate,
            m_proxy: c.m_proxy,
        }
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0 && v.is_finite()) {
        return Err(invalid(format!("{name} must be finite and > 0, got {v}")));
    }
    Ok(())
}

impl WpcConfig {
    /// Parameters of the reference setup: R_c = 1, τ = 0.5, η = 0.4,
    /// α = 2.5, d₁ = 8 m, d₂ = 15 m, K = 3 + √12, Rayleigh S–D hop.
    pub fn reference(p_over_n0: f64, antennas: u32) -> Result<Self> {
        let cfg = WpcConfig {
            p_over_n0,
            antennas,
            rician_k: 3.0 + 12f64.sqrt(),
            s_d: SdModel::Rayleigh,
            tau: 0.5,
            eta: 0.4,
            alpha: 2.5,
            d1: 8.0,
            d2: 15.0,
            rate: 1.0,
            m_proxy: RICIAN_PROXY_M,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        positive("p_over_n0", self.p_over_n0)?;
        positive("alpha", self.alpha)?;
        positive("d1", self.d1)?;
        positive("d2", self.d2)?;
        positive("rate", self.rate)?;
        for (name, v) in [("tau", self.tau), ("eta", self.eta)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(invalid(format!("{name} must lie strictly inside (0, 1), got {v}")));
            }
        }
        if self.antennas < 1 {
            return Err(invalid("antennas must be >= 1"));
        }
        if self.m_proxy < 1 {
            return Err(invalid("m_proxy must be >= 1"));
        }
        if !(self.rician_k >= 0.0 && self.rician_k.is_finite()) {
            return Err(invalid(format!("rician_k must be finite and >= 0, got {}", self.rician_k)));
        }
        if let SdModel::Rician { k } = self.s_d {
            if !(k >= 0.0 && k.is_finite()) {
                return Err(invalid(format!("S-D Rician K must be finite and >= 0, got {k}")));
            }
        }
        Ok(())
    }

    fn with(self, f: impl FnOnce(&mut Self)) -> Result<Self> {
        let mut c = self;
        f(&mut c);
        c.validate()?;
        Ok(c)
    }

    pub fn with_p_over_n0(self, v: f64) -> Result<Self> {
        self.with(|c| c.p_over_n0 = v)
    }
    pub fn with_s_d(self, v: SdModel) -> Result<Self> {
        self.with(|c| c.s_d = v)
    }
    pub fn with_tau(self, v: f64) -> Result<Self> {
        self.with(|c| c.tau = v)
    }
    pub fn with_eta(self, v: f64) -> Result<Self> {
        self.with(|c| c.eta = v)
    }
    pub fn with_distances(self, d1: f64, d2: f64) -> Result<Self> {
        self.with(|c| {
            c.d1 = d1;
            c.d2 = d2;
        })
    }
    pub fn with_rate(self, v: f64) -> Result<Self> {
        self.with(|c| c.rate = v)
    }
    pub fn with_m_proxy(self, v: u32) -> Result<Self> {
        self.with(|c| c.m_proxy = v)
    }

    pub fn p_over_n0(&self) -> f64 {
        self.p_over_n0
    }
    pub fn antennas(&self) -> u32 {
        self.antennas
    }
    pub fn rician_k(&self) -> f64 {
        self.rician_k
    }
    pub fn s_d(&self) -> SdModel {
        self.s_d
    }
    pub fn tau(&self) -> f64 {
        self.tau
    }
    pub fn eta(&self) -> f64 {
        self.eta
    }
    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn distances(&self) -> (f64, f64) {
        (self.d1, self.d2)
    }
    pub fn rate(&self) -> f64 {
        self.rate
    }
    pub fn m_proxy(&self) -> u32 {
        self.m_proxy
    }

    /// γ_th = 2^{R_c} − 1.
    pub fn snr_threshold(&self) -> f64 {
        self.rate.exp2() - 1.0
    }

    /// Deterministic gain G with γ = G·‖h‖²|g|²:
    /// G = τηP / ((1−τ) d₁^α d₂^α N₀).
    pub fn snr_gain(&self) -> f64 {
        self.tau * self.eta * self.p_over_n0 / ((1.0 - self.tau) * (self.d1 * self.d2).powf(self.alpha))
    }

    /// Threshold on the fading product ‖h‖²|g|², γ_th / G.
    pub fn product_threshold(&self) -> f64 {
        self.snr_threshold() / self.snr_gain()
    }

    /// Beamforming gain ‖h‖² as a κ-μ shadowed law with μ = N, κ = K and
    /// mean N (unit-power entries), times the S–D gain |g|² with unit mean.
    pub fn product_model(&self) -> Result<ProductModel> {
        let n = self.antennas;
        let link_a = ShadowedParams::new(n as f64, self.rician_k, n, self.m_proxy)?;
        let link_b = match self.s_d {
            SdModel::Rayleigh => ShadowedParams::rayleigh(1.0)?,
            SdModel::Rician { k } => ShadowedParams::rician(1.0, k, self.m_proxy)?,
            SdModel::Shadowed { params } => params,
        };
        Ok(ProductModel::new(link_a, link_b))
    }
}

/// P(γ < γ_th).
pub fn wpc_outage(cfg: &WpcConfig) -> Result<f64> {
    cfg.product_model()?.cdf(cfg.product_threshold())
}

/// (1 − P_out)·R_c·(1 − τ).
pub fn wpc_throughput(cfg: &WpcConfig) -> Result<f64> {
    Ok((1.0 - wpc_outage(cfg)?) * cfg.rate * (1.0 - cfg.tau))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WpcPoint {
    pub p_over_n0_db: f64,
    pub outage: f64,
    pub throughput: f64,
}

/// Outage and throughput over a list of P/N₀ values in dB.
pub fn wpc_sweep(cfg: &WpcConfig, p_over_n0_db: &[f64]) -> Result<Vec<WpcPoint>> {
    let model = cfg.product_model()?;
    p_over_n0_db
        .par_iter()
        .map(|&db| {
            let c = cfg.with_p_over_n0(10f64.powf(db / 10.0))?;
            let outage = model.cdf(c.product_threshold())?;
            Ok(WpcPoint { p_over_n0_db: db, outage, throughput: (1.0 - outage) * c.rate * (1.0 - c.tau) })
        })
        .collect()
}

/// Nakagami-m shape (1+K)²/(1+2K) matching the first two moments of a
/// Rician power gain with factor K.
pub fn nakagami_shape(k: f64) -> f64 {
    (1.0 + k) * (1.0 + k) / (1.0 + 2.0 * k)
}

/// Outage under the Nakagami approximation of every Rician hop: ‖h‖² is
/// Gamma with shape N(1+K)²/(1+2K) and mean N, a Rician S–D hop is Gamma with
/// shape (1+K)²/(1+2K), a Rayleigh one exponential. Shapes are real, so the
/// product CDF is integrated numerically:
/// P(XY ≤ z) = ∫ f_Y(y) P(a, z/(θy)) dy.
pub fn wpc_outage_nakagami(cfg: &WpcConfig) -> Result<f64> {
    let n = cfg.antennas as f64;
    let a = nakagami_shape(cfg.rician_k) * n;
    let theta = n / a;
    let b = match cfg.s_d {
        SdModel::Rayleigh => 1.0,
        SdModel::Rician { k } => nakagami_shape(k),
        SdModel::Shadowed { .. } => {
            return Err(invalid("the Nakagami comparator covers Rayleigh and Rician S-D hops only"))
        }
    };
    let z = cfg.product_threshold();
    let ln_gamma_b = statrs::function::gamma::ln_gamma(b);
    // integrate over t = ln y; Y ~ Gamma(b, 1/b)
    let integrand = |t: f64| {
        let y = t.exp();
        let ln_fy = b * b.ln() + (b - 1.0) * t - b * y - ln_gamma_b;
        let u = z / (theta * y);
        let inner = if u.is_finite() { gamma_lr(a, u) } else { 1.0 };
        (ln_fy + t).exp() * inner
    };
    let lo = -745.0 / b - 5.0;
    let hi = ((b + 40.0 * b.sqrt() + 50.0) / b).ln();
    let q = quad::integrate(integrand, lo, hi, Accuracy::new(1e-10)?)?;
    if !q.converged {
        return Err(Error::Numerical("Nakagami comparator quadrature did not converge".into()));
    }
    Ok(q.value.clamp(0.0, 1.0))
}

/// Backscatter link: received power P_R = P̄_R·|h_f|²·|h_b|² with unit-mean
/// forward and reverse fading.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawBackscatterConfig", into = "RawBackscatterConfig")]
pub struct BackscatterConfig {
    mean_rx_power: f64,
    forward: ShadowedParams,
    reverse: ShadowedParams,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBackscatterConfig {
    mean_rx_power: f64,
    forward: ShadowedParams,
    reverse: ShadowedParams,
}

impl TryFrom<RawBackscatterConfig> for BackscatterConfig {
    type Error = Error;

    fn try_from(r: RawBackscatterConfig) -> Result<Self> {
        BackscatterConfig::new(r.mean_rx_power, r.forward, r.reverse)
    }
}

impl From<BackscatterConfig> for RawBackscatterConfig {
    fn from(c: BackscatterConfig) -> Self {
        RawBackscatterConfig { mean_rx_power: c.mean_rx_power, forward: c.forward, reverse: c.reverse }
    }
}

impl BackscatterConfig {
    pub fn new(mean_rx_power: f64, forward: ShadowedParams, reverse: ShadowedParams) -> Result<Self> {
        positive("mean_rx_power", mean_rx_power)?;
        for (name, link) in [("forward", &forward), ("reverse", &reverse)] {
            if (link.mean_power() - 1.0).abs() > 1e-12 {
                return Err(invalid(format!(
                    "{name} fading must have unit mean power (P̄_R carries the scale), got {}",
                    link.mean_power()
                )));
            }
        }
        Ok(Self { mean_rx_power, forward, reverse })
    }

    pub fn mean_rx_power(&self) -> f64 {
        self.mean_rx_power
    }

    pub fn product_model(&self) -> ProductModel {
        ProductModel::new(self.forward, self.reverse)
    }
}

/// P(P_R ≤ p).
pub fn backscatter_power_cdf(cfg: &BackscatterConfig, p: f64) -> Result<f64> {
    if !(p > 0.0) || !p.is_finite() {
        return Err(domain(format!("received power must be finite and > 0, got {p}")));
    }
    cfg.product_model().cdf(p / cfg.mean_rx_power)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_threshold() {
        let cfg = WpcConfig::reference(1.0, 1).unwrap();
        let expected = 0.5 * (8.0f64 * 15.0).powf(2.5) / (0.5 * 0.4);
        assert!((cfg.product_threshold() / expected - 1.0).abs() < 1e-14);
        assert_eq!(cfg.snr_threshold(), 1.0);
    }

    #[test]
    fn throughput_ceiling() {
        let cfg = WpcConfig::reference(1e15, 2).unwrap();
        let t = wpc_throughput(&cfg).unwrap();
        assert!(t <= 0.5 && t > 0.499);
    }

    #[test]
    fn config_validation() {
        let cfg = WpcConfig::reference(1e6, 1).unwrap();
        assert!(cfg.with_tau(1.0).is_err());
        assert!(cfg.with_eta(0.0).is_err());
        assert!(WpcConfig::reference(-1.0, 1).is_err());
        assert!(WpcConfig::reference(1.0, 0).is_err());
        let json = serde_json::to_string(&cfg).unwrap();
        let back: WpcConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(cfg, back);
        let bad = json.replace("\"tau\":0.5", "\"tau\":1.5");
        assert!(serde_json::from_str::<WpcConfig>(&bad).is_err());
    }

    #[test]
    fn comparator_on_exponential_product() {
        // K = 0 makes every shape one: the Rayleigh-product closed form
        let cfg = WpcConfig::reference(1.0, 1).unwrap();
        let cfg = WpcConfig { rician_k: 0.0, ..cfg };
        let z = 1.0;
        let cfg = cfg.with_p_over_n0(cfg.product_threshold() * cfg.p_over_n0 / z).unwrap();
        let v = wpc_outage_nakagami(&cfg).unwrap();
        assert!((v - 0.720_268_236_366_955_1).abs() < 1e-9, "{v}");
    }

    #[test]
    fn backscatter_requires_unit_links() {
        let unit = ShadowedParams::new(1.0, 2.6, 1, 4).unwrap();
        let off = ShadowedParams::new(2.0, 2.6, 1, 4).unwrap();
        assert!(BackscatterConfig::new(1.0, unit, off).is_err());
        let cfg = BackscatterConfig::new(3.0, unit, unit).unwrap();
        assert!(backscatter_power_cdf(&cfg, 0.0).is_err());
        assert!(backscatter_power_cdf(&cfg, 3e4).unwrap() > 1.0 - 1e-6);
    }
}

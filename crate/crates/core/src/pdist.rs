//! Product Z = X·X̂ of two independent squared κ-μ shadowed variates.
//!
//! Both links expand into Gamma mixtures, so every statistic of Z is a double
//! mixture of ΓΓ kernels. Terms sharing a scale product ΩⱼΩ̂ₕ share one
//! Bessel ladder per evaluation point, and the complementary CDFs for all
//! shapes mⱼ come out of one prefix sum per distinct m̂ₕ.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, invalid, Error, Result};
use crate::gammagamma::{self, GammaGammaParams, Kernel};
use crate::mixture::{self, clamp_probability, evaluation_mixture, expand, GammaMixture, ShadowedParams};
use crate::specfun::{compensated_sum, half_integer_gamma_ratio};

#[derive(Debug, Clone, Copy)]
struct Pair {
    weight: f64,
    m: u32,
    m_hat: u32,
    block: usize,
    /// index into the block's survival table
    tail: usize,
}

#[derive(Debug, Clone)]
struct Block {
    scale_product: f64,
    max_order: u32,
    /// (m̂, largest m paired with it)
    tails: Vec<(u32, u32)>,
}

/// Squared-envelope product of two independent κ-μ shadowed links.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "RawProductModel", into = "RawProductModel")]
pub struct ProductModel {
    link_a: ShadowedParams,
    link_b: ShadowedParams,
    expansion_a: GammaMixture,
    expansion_b: GammaMixture,
    eval_a: GammaMixture,
    eval_b: GammaMixture,
    blocks: Vec<Block>,
    /// every (j, h) term, by descending |CⱼĈₕ|
    pairs: Vec<Pair>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProductModel {
    link_a: ShadowedParams,
    link_b: ShadowedParams,
}

impl TryFrom<RawProductModel> for ProductModel {
    type Error = Error;

    fn try_from(raw: RawProductModel) -> Result<Self> {
        Ok(ProductModel::new(raw.link_a, raw.link_b))
    }
}

impl From<ProductModel> for RawProductModel {
    fn from(m: ProductModel) -> Self {
        RawProductModel { link_a: m.link_a, link_b: m.link_b }
    }
}

impl PartialEq for ProductModel {
    fn eq(&self, other: &Self) -> bool {
        self.link_a == other.link_a && self.link_b == other.link_b
    }
}

impl ProductModel {
    pub fn new(link_a: ShadowedParams, link_b: ShadowedParams) -> Self {
        let eval_a = evaluation_mixture(&link_a);
        let eval_b = evaluation_mixture(&link_b);
        let mut blocks: Vec<Block> = Vec::new();
        let mut keys: Vec<(u64, u64)> = Vec::new();
        let mut pairs = Vec::new();
        for ta in eval_a.active_terms() {
            for tb in eval_b.active_terms() {
                let key = (ta.scale.to_bits(), tb.scale.to_bits());
                let block = match keys.iter().position(|k| *k == key) {
                    Some(i) => i,
                    None => {
                        keys.push(key);
                        blocks.push(Block { scale_product: ta.scale * tb.scale, max_order: 0, tails: Vec::new() });
                        blocks.len() - 1
                    }
                };
                let b = &mut blocks[block];
                b.max_order = b.max_order.max(gammagamma::max_order(ta.shape, tb.shape));
                let tail = match b.tails.iter().position(|t| t.0 == tb.shape) {
                    Some(i) => {
                        b.tails[i].1 = b.tails[i].1.max(ta.shape);
                        i
                    }
                    None => {
                        b.tails.push((tb.shape, ta.shape));
                        b.tails.len() - 1
                    }
                };
                pairs.push(Pair { weight: ta.weight * tb.weight, m: ta.shape, m_hat: tb.shape, block, tail });
            }
        }
        pairs.sort_by(|x, y| y.weight.abs().total_cmp(&x.weight.abs()));
        Self {
            expansion_a: expand(&link_a),
            expansion_b: expand(&link_b),
            link_a,
            link_b,
            eval_a,
            eval_b,
            blocks,
            pairs,
        }
    }

    pub fn link_a(&self) -> &ShadowedParams {
        &self.link_a
    }

    pub fn link_b(&self) -> &ShadowedParams {
        &self.link_b
    }

    /// Closed-form expansions of the two links.
    pub fn expansions(&self) -> (&GammaMixture, &GammaMixture) {
        (&self.expansion_a, &self.expansion_b)
    }

    /// Mean γ̄·γ̃ of Z.
    pub fn mean(&self) -> f64 {
        self.link_a.mean_power() * self.link_b.mean_power()
    }

    /// Number of (j, h) terms actually summed.
    pub fn term_count(&self) -> usize {
        self.pairs.len()
    }

    /// Number of distinct scale products ΩⱼΩ̂ₕ.
    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    /// Σ|CⱼĈₕ| / |ΣCⱼĈₕ| of the double sum used for evaluation.
    pub fn condition_number(&self) -> f64 {
        let abs: f64 = self.pairs.iter().map(|p| p.weight.abs()).sum();
        abs / compensated_sum(self.pairs.iter().map(|p| p.weight)).abs()
    }

    /// Same estimate for the closed-form expansions, which may differ from
    /// [`condition_number`](Self::condition_number) when a badly conditioned
    /// expansion has been replaced by its positive series.
    pub fn expansion_condition_number(&self) -> f64 {
        self.expansion_a.condition_number() * self.expansion_b.condition_number()
    }

    fn kernels(&self, z: f64) -> Vec<Kernel> {
        self.blocks.iter().map(|b| Kernel::new(z, b.scale_product, b.max_order)).collect()
    }

    pub fn pdf(&self, z: f64) -> Result<f64> {
        check_arg(z, "p_pdf")?;
        let kernels = self.kernels(z);
        Ok(compensated_sum(self.pairs.iter().map(|p| p.weight * kernels[p.block].pdf(p.m, p.m_hat))))
    }

    pub fn cdf(&self, z: f64) -> Result<f64> {
        check_arg(z, "p_cdf")?;
        // survival[block][tail][k] = Σ_{i<k} tail_term(i, m̂)
        let survival: Vec<Vec<Vec<f64>>> = self
            .blocks
            .iter()
            .map(|b| {
                let kernel = Kernel::new(z, b.scale_product, b.max_order);
                b.tails
                    .iter()
                    .map(|&(m_hat, max_m)| {
                        let mut acc = Vec::with_capacity(max_m as usize + 1);
                        let mut s = 0.0;
                        acc.push(s);
                        for k in 0..max_m {
                            s += kernel.tail_term(k, m_hat);
                            acc.push(s);
                        }
                        acc
                    })
                    .collect()
            })
            .collect();
        let raw = compensated_sum(
            self.pairs.iter().map(|p| p.weight * (1.0 - survival[p.block][p.tail][p.m as usize])),
        );
        clamp_probability(raw, 1e-10)
    }

    pub fn mgf(&self, s: f64) -> Result<f64> {
        let mut values = Vec::with_capacity(self.pairs.len());
        for ta in self.eval_a.active_terms() {
            for tb in self.eval_b.active_terms() {
                let p = GammaGammaParams::new(ta.shape, tb.shape, ta.scale, tb.scale)?;
                values.push((ta.weight * tb.weight, gammagamma::gg_mgf(&p, s)?));
            }
        }
        values.sort_by(|x, y| y.0.abs().total_cmp(&x.0.abs()));
        Ok(compensated_sum(values.iter().map(|(w, v)| w * v)))
    }

    /// E[Zⁿ]. The double sum factorises into E[Xⁿ]·E[X̂ⁿ], which is how it is
    /// evaluated.
    pub fn moment(&self, n: u32) -> Result<f64> {
        if n < 1 {
            return Err(domain("moment order must be >= 1"));
        }
        let v = link_moment(&self.eval_a, n) * link_moment(&self.eval_b, n);
        if !v.is_finite() {
            return Err(Error::Overflow(format!("moment of order {n} exceeds f64 range")));
        }
        Ok(v)
    }

    /// E[√Z], in closed form from Γ(m+½)/Γ(m).
    pub fn mean_sqrt(&self) -> f64 {
        link_half_moment(&self.eval_a) * link_half_moment(&self.eval_b)
    }

    /// Products of draws from the two links, each link on its own sub-stream
    /// split off `rng`.
    pub fn sample<R: Rng>(&self, rng: &mut R, n: usize) -> Result<Vec<f64>> {
        if n < 1 {
            return Err(invalid("sample count must be >= 1"));
        }
        let mut ra = ChaCha8Rng::from_rng(rng);
        let mut rb = ChaCha8Rng::from_rng(rng);
        let a = mixture::sample_single(&self.link_a, &mut ra, n)?;
        let b = mixture::sample_single(&self.link_b, &mut rb, n)?;
        Ok(a.iter().zip(&b).map(|(x, y)| x * y).collect())
    }
}

fn link_moment(mix: &GammaMixture, n: u32) -> f64 {
    compensated_sum(mix.active_terms().map(|t| t.weight * gammagamma::ln_gamma_moment(t.shape, t.scale, n).exp()))
}

fn link_half_moment(mix: &GammaMixture) -> f64 {
    compensated_sum(mix.active_terms().map(|t| t.weight * t.scale.sqrt() * half_integer_gamma_ratio(t.shape)))
}

fn check_arg(z: f64, what: &str) -> Result<()> {
    if !(z > 0.0) || !z.is_finite() {
        return Err(domain(format!("{what} requires finite z > 0, got {z}")));
    }
    Ok(())
}

pub fn p_pdf(model: &ProductModel, z: f64) -> Result<f64> {
    model.pdf(z)
}

pub fn p_cdf(model: &ProductModel, z: f64) -> Result<f64> {
    model.cdf(z)
}

pub fn p_mgf(model: &ProductModel, s: f64) -> Result<f64> {
    model.mgf(s)
}

pub fn p_moment(model: &ProductModel, n: u32) -> Result<f64> {
    model.moment(n)
}

pub fn p_sample<R: Rng>(model: &ProductModel, rng: &mut R, n: usize) -> Result<Vec<f64>> {
    model.sample(rng, n)
}

/// Envelope R = c·√Z of a product model, with c chosen so that E[R] = r̃.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnvelopeModel {
    product: ProductModel,
    envelope_scale: f64,
    #[serde(skip)]
    c: f64,
}

impl EnvelopeModel {
    /// Free envelope scale r̃.
    pub fn new(product: ProductModel, envelope_scale: f64) -> Result<Self> {
        if !(envelope_scale > 0.0 && envelope_scale.is_finite()) {
            return Err(invalid(format!("envelope scale must be finite and > 0, got {envelope_scale}")));
        }
        let c = envelope_scale / product.mean_sqrt();
        Ok(Self { product, envelope_scale, c })
    }

    /// r̃ tied to the model, r̃ = E[√Z]; the envelope is then √Z itself.
    pub fn natural(product: ProductModel) -> Self {
        let envelope_scale = product.mean_sqrt();
        Self { product, envelope_scale, c: 1.0 }
    }

    pub fn product(&self) -> &ProductModel {
        &self.product
    }

    pub fn envelope_scale(&self) -> f64 {
        self.envelope_scale
    }

    /// f_R(r) = (2r/c²)·f_Z(r²/c²).
    pub fn pdf(&self, r: f64) -> Result<f64> {
        check_arg(r, "envelope_pdf")?;
        let c2 = self.c * self.c;
        Ok(2.0 * r / c2 * self.product.pdf(r * r / c2)?)
    }

    pub fn cdf(&self, r: f64) -> Result<f64> {
        check_arg(r, "envelope_cdf")?;
        self.product.cdf(r * r / (self.c * self.c))
    }
}

pub fn envelope_pdf(model: &EnvelopeModel, r: f64) -> Result<f64> {
    model.pdf(r)
}

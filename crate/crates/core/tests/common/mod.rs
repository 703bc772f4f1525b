//! Reference implementations shared by the integration tests. Nothing here
//! calls into the library's numerics: quadrature is double-exponential
//! rather than Gauss–Kronrod, special functions come from integral
//! representations, and the channel simulators build every link from its
//! Gaussian clusters and Gamma shadowing.
#![allow(dead_code)]

use std::f64::consts::{FRAC_PI_2, PI};

use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

/// Result of a double-exponential rule: value and the change on the last
/// halving of the step.
#[derive(Debug, Clone, Copy)]
pub struct De {
    pub value: f64,
    pub delta: f64,
}

fn de_rule(mut node: impl FnMut(f64) -> (f64, f64), f: &mut impl FnMut(f64) -> f64, t_max: f64, tol: f64) -> De {
    let mut h = 0.5;
    let mut sum = 0.0;
    // level 0: all nodes k·h
    let mut k = 0i64;
    loop {
        let t = k as f64 * h;
        if t > t_max {
            break;
        }
        for s in if k == 0 { vec![0.0] } else { vec![t, -t] } {
            let (x, w) = node(s);
            if w > 0.0 && x.is_finite() {
                let v = f(x);
                if v.is_finite() {
                    sum += w * v;
                }
            }
        }
        k += 1;
    }
    let mut value = sum * h;
    let mut delta = f64::INFINITY;
    for _ in 0..9 {
        h *= 0.5;
        let mut add = 0.0;
        let mut k = 1i64;
        loop {
            let t = k as f64 * h;
            if t > t_max {
                break;
            }
            for s in [t, -t] {
                let (x, w) = node(s);
                if w > 0.0 && x.is_finite() {
                    let v = f(x);
                    if v.is_finite() {
                        add += w * v;
                    }
                }
            }
            k += 2;
        }
        sum += add;
        let next = sum * h;
        delta = (next - value).abs();
        value = next;
        if delta <= tol * value.abs().max(1e-300) {
            break;
        }
    }
    De { value, delta }
}

/// ∫₀^∞ f(x) dx by the exp-sinh substitution x = c·exp(π/2·sinh t).
pub fn exp_sinh(mut f: impl FnMut(f64) -> f64, c: f64, tol: f64) -> De {
    let node = |t: f64| {
        let u = FRAC_PI_2 * t.sinh();
        let x = c * u.exp();
        (x, x * FRAC_PI_2 * t.cosh())
    };
    de_rule(node, &mut f, 4.5, tol)
}

/// ∫ₐᵇ f(x) dx by tanh-sinh; endpoint singularities are tolerated.
pub fn tanh_sinh(mut f: impl FnMut(f64) -> f64, a: f64, b: f64, tol: f64) -> De {
    let half = 0.5 * (b - a);
    let node = |t: f64| {
        let u = FRAC_PI_2 * t.sinh();
        let ch = u.cosh();
        // distance from the nearer endpoint, kept exact near ±1
        let comp = 1.0 / ((2.0 * u.abs()).exp() + 1.0) * 2.0;
        let x = if t < 0.0 { a + half * comp } else { b - half * comp };
        let w = half * FRAC_PI_2 * t.cosh() / (ch * ch);
        (x, w)
    };
    de_rule(node, &mut f, 3.2, tol)
}

/// K_ν(x) from K_ν(x) = ∫₀^∞ exp(−x cosh t) cosh(νt) dt.
pub fn bessel_k(nu: f64, x: f64) -> f64 {
    // the integrand is negligible once x cosh t exceeds x + 750
    let t_max = ((750.0 / x) + 1.0).acosh() + 1.0;
    let n = 20_000;
    let h = t_max / n as f64;
    let f = |t: f64| (-x * t.cosh()).exp() * (nu * t).cosh();
    // trapezoid is spectrally accurate for this even, analytic integrand
    let mut s = 0.5 * f(0.0);
    for i in 1..=n {
        s += f(i as f64 * h);
    }
    s * h
}

/// ln Γ(n) for positive integers.
pub fn ln_gamma_int(n: u32) -> f64 {
    (1..n).map(|k| (k as f64).ln()).sum()
}

/// Regularised lower incomplete gamma P(a, x) for integer a: 1 − e^{−x}Σ_{k<a} x^k/k!.
pub fn gamma_p(a: u32, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x < a as f64 {
        // series e^{−x} x^a / a! Σ x^j a!/(a+j)!
        let mut term = 1.0;
        let mut sum = 1.0;
        for j in 1..2000 {
            term *= x / (a as f64 + j as f64);
            sum += term;
            if term < 1e-17 * sum {
                break;
            }
        }
        (a as f64 * x.ln() - x - ln_gamma_int(a + 1)).exp() * sum
    } else {
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..a {
            term *= x / k as f64;
            sum += term;
        }
        1.0 - (-x).exp() * sum
    }
}

/// CDF of one squared κ-μ shadowed link by its Poisson–Gamma mixture
/// representation when m → ∞, or by direct quadrature over the Gamma
/// shadowing variable otherwise.
pub fn kms_cdf(mean: f64, kappa: f64, mu: u32, m: Option<u32>, x: f64) -> f64 {
    let sigma2_2mu = mean / (1.0 + kappa); // 2μσ²
    let per_cluster = sigma2_2mu / mu as f64; // 2σ²
    // conditioned on LOS power d²·ξ the variable is noncentral χ²:
    // Poisson(λ = ξ·μκ) mixture of Gamma(μ + k, 2σ²)
    let lam0 = mu as f64 * kappa;
    let cond = |xi: f64| -> f64 {
        let lam = lam0 * xi;
        let y = x / per_cluster;
        // P(μ+k+1, y) = P(μ+k, y) − y^{μ+k} e^{−y} / (μ+k)!
        let mut p = gamma_p(mu, y);
        let mut ln_step = mu as f64 * y.ln() - y - ln_gamma_int(mu + 1);
        let mut w = (-lam).exp();
        let mut total = 0.0;
        for k in 0..100_000u32 {
            if k > 0 {
                w *= lam / k as f64;
                p -= ln_step.exp();
                ln_step += y.ln() - ((mu + k) as f64).ln();
            }
            total += w * p.max(0.0);
            if k as f64 > lam + 10.0 && (w < 1e-18 || p < 1e-300) {
                break;
            }
        }
        total
    };
    match m {
        None => cond(1.0),
        Some(m) => {
            let mf = m as f64;
            let dens = |xi: f64| (mf * mf.ln() + (mf - 1.0) * xi.ln() - mf * xi - ln_gamma_int(m)).exp();
            tanh_sinh(|t: f64| if t <= 0.0 { 0.0 } else { dens(t) * cond(t) }, 0.0, 1.0, 1e-12).value
                + exp_sinh(|t| dens(1.0 + t) * cond(1.0 + t), 1.0, 1e-12).value
        }
    }
}

/// One squared κ-μ shadowed draw built from μ Gaussian clusters whose LOS
/// amplitudes share one Gamma(m, 1/m) power fluctuation.
pub fn draw_kms<R: Rng>(rng: &mut R, mean: f64, kappa: f64, mu: u32, m: Option<u32>) -> f64 {
    let scatter = mean / (1.0 + kappa) / mu as f64; // per-cluster 2σ²
    let los = mean * kappa / (1.0 + kappa) / mu as f64; // per-cluster p_i²
    let xi = match m {
        Some(m) => Gamma::new(m as f64, 1.0 / m as f64).unwrap().sample(rng),
        None => 1.0,
    };
    let amp = (los * xi).sqrt();
    let s = (0.5 * scatter).sqrt();
    let mut tot = 0.0;
    for _ in 0..mu {
        let phase: f64 = rng.random::<f64>() * 2.0 * PI;
        let x: f64 = rng.sample(StandardNormal);
        let y: f64 = rng.sample(StandardNormal);
        let re = amp * phase.cos() + s * x;
        let im = amp * phase.sin() + s * y;
        tot += re * re + im * im;
    }
    tot
}

/// Per-antenna squared norm ‖h‖² of N unit-power Rician branches with
/// factor K; with `m` the LOS components share a Gamma power fluctuation.
pub fn draw_beamformed<R: Rng>(rng: &mut R, n: u32, k: f64, m: Option<u32>) -> f64 {
    let xi = match m {
        Some(m) => Gamma::new(m as f64, 1.0 / m as f64).unwrap().sample(rng),
        None => 1.0,
    };
    let a = (k / (k + 1.0) * xi).sqrt();
    let s = (0.5 / (k + 1.0)).sqrt();
    let mut tot = 0.0;
    for _ in 0..n {
        let phase: f64 = rng.random::<f64>() * 2.0 * PI;
        let x: f64 = rng.sample(StandardNormal);
        let y: f64 = rng.sample(StandardNormal);
        let re = a * phase.cos() + s * x;
        let im = a * phase.sin() + s * y;
        tot += re * re + im * im;
    }
    tot
}

/// Two-sided DKW radius: P(sup|F̃ − F| > ε) ≤ α for n samples.
pub fn dkw(n: usize, alpha: f64) -> f64 {
    ((2.0 / alpha).ln() / (2.0 * n as f64)).sqrt()
}

/// sup over the sample points of |F̃ − F| for sorted samples, checking both
/// sides of every jump.
pub fn ks_sup(sorted: &[f64], mut cdf: impl FnMut(f64) -> f64) -> f64 {
    let n = sorted.len() as f64;
    let mut worst: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        worst = worst.max((f - i as f64 / n).abs()).max((f - (i + 1) as f64 / n).abs());
    }
    worst
}

/// Empirical CDF value at z: fraction of sorted samples ≤ z.
pub fn ecdf(sorted: &[f64], z: f64) -> f64 {
    sorted.partition_point(|v| *v <= z) as f64 / sorted.len() as f64
}

pub fn rel(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        a.abs()
    } else {
        ((a - b) / b).abs()
    }
}

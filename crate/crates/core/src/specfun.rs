//! Special-function kernel: integer-order modified Bessel functions of the
//! second kind, the Tricomi confluent hypergeometric function for positive
//! integer first argument, and log-factorials.
//!
//! Everything here is a pure function of its arguments. Values that can leave
//! the representable range are available in logarithmic or exponentially
//! scaled form; the unscaled entry points report overflow/underflow instead of
//! silently returning `inf`/`0`.

use crate::error::{domain, Error, Result};
use crate::quad;

/// Relative accuracy requested from an iterative or adaptive routine.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Accuracy {
    rel_tol: f64,
}

impl Accuracy {
    pub fn new(rel_tol: f64) -> Result<Self> {
        if !(rel_tol > 0.0 && rel_tol.is_finite()) {
            return Err(domain(format!("relative tolerance must be > 0, got {rel_tol}")));
        }
        Ok(Self { rel_tol })
    }

    pub fn rel_tol(self) -> f64 {
        self.rel_tol
    }
}

impl Default for Accuracy {
    fn default() -> Self {
        Self { rel_tol: 1e-10 }
    }
}

/// Largest Bessel order accepted by the public entry points.
pub const MAX_BESSEL_ORDER: u32 = 256;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Exact factorials 0! ..= 20! (all exactly representable in f64 up to 22!).
const FACTORIALS: [f64; 21] = [
    1.0,
    1.0,
    2.0,
    6.0,
    24.0,
    120.0,
    720.0,
    5040.0,
    40320.0,
    362880.0,
    3628800.0,
    39916800.0,
    479001600.0,
    6227020800.0,
    87178291200.0,
    1307674368000.0,
    20922789888000.0,
    355687428096000.0,
    6402373705728000.0,
    121645100408832000.0,
    2432902008176640000.0,
];

/// ln Γ(n) = ln((n−1)!) for a positive integer `n`.
pub fn ln_gamma_int(n: u64) -> Result<f64> {
    if n < 1 {
        return Err(domain("ln_gamma_int requires n >= 1"));
    }
    Ok(ln_factorial(n - 1))
}

/// ln(k!) — exact table for k ≤ 20, Stirling series beyond (relative error < 1e-15).
pub(crate) fn ln_factorial(k: u64) -> f64 {
    if k <= 20 {
        return FACTORIALS[k as usize].ln();
    }
    // ln Γ(n) with n = k + 1 ≥ 22
    let n = (k + 1) as f64;
    let inv = 1.0 / n;
    let inv2 = inv * inv;
    let series = inv
        * (1.0 / 12.0
            - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 * (1.0 / 1680.0 - inv2 / 1188.0))));
    (n - 0.5) * n.ln() - n + 0.5 * (2.0 * std::f64::consts::PI).ln() + series
}

/// ln C(n, k).
pub(crate) fn ln_binomial(n: u64, k: u64) -> f64 {
    debug_assert!(k <= n);
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

/// Γ(m + ½) / Γ(m) for a positive integer m.
pub(crate) fn half_integer_gamma_ratio(m: u32) -> f64 {
    // Γ(3/2)/Γ(1) = √π/2, then r(m+1) = r(m)·(m+½)/m
    let mut r = std::f64::consts::PI.sqrt() / 2.0;
    for k in 1..m {
        let k = k as f64;
        r *= (k + 0.5) / k;
    }
    r
}

// ---------------------------------------------------------------------------
// Modified Bessel functions of the second kind, integer order
// ---------------------------------------------------------------------------

/// e^x·K₀(x) and e^x·K₁(x).
fn k01_scaled(x: f64) -> (f64, f64) {
    if x <= 2.0 {
        let (k0, k1) = k01_series(x);
        let e = x.exp();
        (k0 * e, k1 * e)
    } else {
        k01_steed_scaled(x)
    }
}

/// Ascending series (A&S 9.6.11, 9.6.13), accurate for 0 < x ≤ 2.
fn k01_series(x: f64) -> (f64, f64) {
    let q = 0.25 * x * x;
    let l = (0.5 * x).ln();
    // K0 = Σ q^k/(k!)² (H_k − ln(x/2) − γ)
    // K1 = 1/x + (x/2) Σ q^k/(k!(k+1)!) [ln(x/2) − ½(ψ(k+1)+ψ(k+2))]
    let mut term0 = 1.0; // q^k/(k!)²
    let mut term1 = 1.0; // q^k/(k!(k+1)!)
    let mut harmonic = 0.0; // H_k
    let mut s0 = 0.0;
    let mut s1 = 0.0;
    for k in 0..200 {
        let kf = k as f64;
        let psi_k1 = harmonic - EULER_GAMMA;
        let psi_k2 = psi_k1 + 1.0 / (kf + 1.0);
        let d0 = term0 * (harmonic - l - EULER_GAMMA);
        let d1 = term1 * (l - 0.5 * (psi_k1 + psi_k2));
        s0 += d0;
        s1 += d1;
        if d0.abs() <= 1e-17 * s0.abs() && d1.abs() <= 1e-17 * s1.abs() {
            break;
        }
        harmonic += 1.0 / (kf + 1.0);
        term0 *= q / ((kf + 1.0) * (kf + 1.0));
        term1 *= q / ((kf + 1.0) * (kf + 2.0));
    }
    (s0, 1.0 / x + 0.5 * x * s1)
}

/// Steed's continued fraction CF2 for order zero (Temme 1975), x > 2.
fn k01_steed_scaled(x: f64) -> (f64, f64) {
    let a1 = 0.25;
    let mut b = 2.0 * (1.0 + x);
    let mut d = 1.0 / b;
    let mut delh = d;
    let mut h = d;
    let mut q1 = 0.0;
    let mut q2 = 1.0;
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    for i in 2..10_000 {
        let fi = i as f64;
        a -= 2.0 * (fi - 1.0);
        c = -a * c / fi;
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh = (b * d - 1.0) * delh;
        h += delh;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < 1e-17 {
            break;
        }
    }
    h *= a1;
    let k0 = (std::f64::consts::PI / (2.0 * x)).sqrt() / s;
    let k1 = k0 * (x + 0.5 - h) / x;
    (k0, k1)
}

/// ln K_ν(x) for ν = 0..=`max_order`, by upward recurrence
/// K_{ν+1} = K_{ν−1} + (2ν/x)·K_ν with running rescaling so no
/// intermediate overflows.
pub(crate) fn ln_bessel_k_ladder(max_order: usize, x: f64) -> Vec<f64> {
    debug_assert!(x > 0.0);
    const BIG: f64 = 1e250;
    let ln_big = BIG.ln();
    let (k0, k1) = k01_scaled(x);
    let mut out = Vec::with_capacity(max_order + 1);
    let mut shift = -x;
    out.push(k0.ln() + shift);
    if max_order == 0 {
        return out;
    }
    out.push(k1.ln() + shift);
    let (mut prev, mut cur) = (k0, k1);
    let two_over_x = 2.0 / x;
    for nu in 1..max_order {
        let mut next = prev + (nu as f64) * two_over_x * cur;
        if !next.is_finite() || next > BIG {
            prev /= BIG;
            cur /= BIG;
            next = prev + (nu as f64) * two_over_x * cur;
            shift += ln_big;
        }
        out.push(next.ln() + shift);
        prev = cur;
        cur = next;
    }
    out
}

fn check_bessel_args(n: u32, x: f64) -> Result<()> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(domain(format!("K_n(x) requires finite x > 0, got {x}")));
    }
    if n > MAX_BESSEL_ORDER {
        return Err(domain(format!("K_n(x) order {n} exceeds {MAX_BESSEL_ORDER}")));
    }
    Ok(())
}

/// ln K_n(x); finite for every n ≤ 256 and x > 0.
pub fn ln_bessel_k_int(n: u32, x: f64) -> Result<f64> {
    check_bessel_args(n, x)?;
    Ok(*ln_bessel_k_ladder(n as usize, x).last().expect("non-empty ladder"))
}

/// Modified Bessel function of the second kind K_n(x), integer order.
pub fn bessel_k_int(n: u32, x: f64) -> Result<f64> {
    let ln_k = ln_bessel_k_int(n, x)?;
    let v = ln_k.exp();
    if !v.is_finite() {
        return Err(Error::Overflow(format!("K_{n}({x}) exceeds f64 range")));
    }
    if v < f64::MIN_POSITIVE {
        return Err(Error::Underflow(format!("K_{n}({x}) below f64 normal range")));
    }
    Ok(v)
}

/// Exponentially scaled e^x·K_n(x).
pub fn bessel_k_int_scaled(n: u32, x: f64) -> Result<f64> {
    let ln_k = ln_bessel_k_int(n, x)?;
    let v = (ln_k + x).exp();
    if !v.is_finite() {
        return Err(Error::Overflow(format!("e^x K_{n}({x}) exceeds f64 range")));
    }
    Ok(v)
}

// ---------------------------------------------------------------------------
// Tricomi U(a, b, x) for positive integer a
// ---------------------------------------------------------------------------

/// Tricomi confluent hypergeometric function U(a, b, x) with integer a ≥ 1,
/// integer b and x > 0.
///
/// * b ≥ a + 1: U is a finite positive sum, Σ_k C(b−a−1, k)(a)_k x^{−a−k}.
/// * 2 ≤ b ≤ a: Kummer's transformation U(a,b,x) = x^{1−b} U(a−b+1, 2−b, x)
///   maps onto the b ≤ 1 case.
/// * b ≤ 1: U is the minimal solution of the three-term recurrence in a
///   (DLMF 13.3.7); it is computed by Miller's backward recurrence normalised
///   with U(0, b, x) = 1. For very small x, where Miller's start index grows
///   without bound, the integral representation is used instead.
pub fn tricomi_u_int_a(a: u32, b: i32, x: f64) -> Result<f64> {
    let ln_u = ln_tricomi_u_int_a(a, b, x)?;
    let v = ln_u.exp();
    if !v.is_finite() {
        return Err(Error::Overflow(format!("U({a},{b},{x}) exceeds f64 range")));
    }
    if v < f64::MIN_POSITIVE {
        return Err(Error::Underflow(format!("U({a},{b},{x}) below f64 normal range")));
    }
    Ok(v)
}

/// ln U(a, b, x); see [`tricomi_u_int_a`].
pub fn ln_tricomi_u_int_a(a: u32, b: i32, x: f64) -> Result<f64> {
    if a < 1 {
        return Err(domain("U(a,b,x) requires integer a >= 1"));
    }
    if !(x > 0.0) || !x.is_finite() {
        return Err(domain(format!("U(a,b,x) requires finite x > 0, got {x}")));
    }
    let a_i = a as i64;
    let b_i = b as i64;
    if b_i >= a_i + 1 {
        return Ok(ln_u_polynomial_tail(a as u64, (b_i - a_i - 1) as u64, x));
    }
    if b_i >= 2 {
        let a2 = (a_i - b_i + 1) as u32;
        let b2 = (2 - b_i) as i32;
        return Ok((1 - b_i) as f64 * x.ln() + ln_u_miller(a2, b2, x)?);
    }
    ln_u_miller(a, b, x)
}

/// ln of Σ_{k=0}^{n} C(n,k) Γ(a+k)/Γ(a) x^{−(a+k)}.
fn ln_u_polynomial_tail(a: u64, n: u64, x: f64) -> f64 {
    let lx = x.ln();
    let ln_terms: Vec<f64> = (0..=n)
        .map(|k| {
            ln_binomial(n, k) + ln_factorial(a + k - 1) - ln_factorial(a - 1) - (a + k) as f64 * lx
        })
        .collect();
    log_sum_exp(&ln_terms)
}

fn ln_u_miller(a: u32, b: i32, x: f64) -> Result<f64> {
    debug_assert!(b <= 1);
    const MAX_START: usize = 1 << 20;
    let mut start = (2 * a as usize).max(a as usize + 64);
    let mut previous: Option<f64> = None;
    while start <= MAX_START {
        let v = miller_pass(a, b, x, start);
        if let Some(p) = previous {
            if (v - p).abs() <= 1e-15 * (1.0 + v.abs()) {
                return Ok(v);
            }
        }
        previous = Some(v);
        start *= 2;
    }
    ln_u_quadrature(a, b, x)
}

/// One backward sweep of
/// U(j−1) = (2j − b + x)·U(j) − j(j − b + 1)·U(j+1), returning ln(U(a)/U(0)).
fn miller_pass(a: u32, b: i32, x: f64, start: usize) -> f64 {
    const BIG: f64 = 1e200;
    let bf = b as f64;
    let mut u_next = 0.0; // U(start + 1)
    let mut u = 1e-200; // U(start)
    let mut ln_scale = 0.0; // accumulated division since U(a) was stored
    let mut u_a = if start == a as usize { Some(u) } else { None };
    for j in (1..=start).rev() {
        let jf = j as f64;
        let u_prev = (2.0 * jf - bf + x) * u - jf * (jf - bf + 1.0) * u_next;
        u_next = u;
        u = u_prev;
        if j - 1 == a as usize {
            u_a = Some(u);
            ln_scale = 0.0;
        }
        if u.abs() > BIG {
            u /= BIG;
            u_next /= BIG;
            if u_a.is_some() {
                ln_scale += BIG.ln();
            }
        }
    }
    let u_a = u_a.expect("target index lies below the start index");
    u_a.ln() - (u.ln() + ln_scale)
}

/// U(a,b,x) = (1/Γ(a)) ∫₀^∞ e^{−xt} t^{a−1} (1+t)^{b−a−1} dt, with t = e^s.
fn ln_u_quadrature(a: u32, b: i32, x: f64) -> Result<f64> {
    let af = a as f64;
    let p = b as f64 - af - 1.0;
    // log of the integrand in s, shifted by its maximum for stability
    let ln_g = |s: f64| -x * s.exp() + af * s + p * s.exp().ln_1p();
    let hi = ((60.0 + 2.0 * af) / x).ln() + 2.0;
    let lo = -60.0 / af - 5.0;
    let mut peak = f64::NEG_INFINITY;
    let n = 2000;
    for i in 0..=n {
        let s = lo + (hi - lo) * i as f64 / n as f64;
        peak = peak.max(ln_g(s));
    }
    let integral = quad::integrate(|s| (ln_g(s) - peak).exp(), lo, hi, Accuracy::new(1e-13)?)?;
    if !integral.converged {
        return Err(Error::Numerical(format!("U({a},{b},{x}) quadrature did not converge")));
    }
    Ok(integral.value.ln() + peak - ln_factorial(a as u64 - 1))
}

// ---------------------------------------------------------------------------
// Regularised incomplete gamma for integer shape
// ---------------------------------------------------------------------------

/// Regularised lower incomplete gamma P(a, y) for integer a ≥ 1, y ≥ 0.
pub(crate) fn gamma_p_int(a: u32, y: f64) -> f64 {
    if y <= 0.0 {
        return 0.0;
    }
    if y < a as f64 + 1.0 {
        gamma_p_series(a, y)
    } else {
        1.0 - gamma_q_finite(a, y)
    }
}

/// Regularised upper incomplete gamma Q(a, y) for integer a ≥ 1, y ≥ 0.
#[cfg(test)]
fn gamma_q_int(a: u32, y: f64) -> f64 {
    if y <= 0.0 {
        return 1.0;
    }
    if y < a as f64 + 1.0 {
        1.0 - gamma_p_series(a, y)
    } else {
        gamma_q_finite(a, y)
    }
}

/// P(a, y) = e^{−y} y^a / a! · Σ_{j≥0} y^j a!/(a+j)!
fn gamma_p_series(a: u32, y: f64) -> f64 {
    let af = a as f64;
    let mut term = 1.0;
    let mut sum = 1.0;
    for j in 1..10_000 {
        term *= y / (af + j as f64);
        sum += term;
        if term < 1e-17 * sum {
            break;
        }
    }
    (af * y.ln() - y - ln_factorial(a as u64) + sum.ln()).exp()
}

/// Q(a, y) = e^{−y} Σ_{r<a} y^r / r!
fn gamma_q_finite(a: u32, y: f64) -> f64 {
    let ly = y.ln();
    let ln_terms: Vec<f64> = (0..a as u64)
        .map(|r| r as f64 * ly - ln_factorial(r) - y)
        .collect();
    log_sum_exp(&ln_terms).exp()
}

pub(crate) fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// Neumaier-compensated sum of the values, in the order given.
pub(crate) fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

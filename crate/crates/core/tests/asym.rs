mod common;

use common::{kms_cdf, rel};
use proptest::prelude::*;
use prodfade::asym::{asym_cdf, asym_coeffs, asym_coeffs_unshadowed, cdf_log_slope, match_kappa, Shadowing};
use prodfade::mixture::{cdf_single, ShadowedParams};

fn sp(kappa: f64, mu: u32, m: u32) -> ShadowedParams {
    ShadowedParams::new(1.0, kappa, mu, m).unwrap()
}

/// bisection on the matching equation (κ+1)(m/(μκ+m))^{m/μ} = e^{−K}(K+1)
fn match_oracle(k: f64, mu: f64, m: f64) -> f64 {
    let target = (-k).exp() * (k + 1.0);
    let h = |x: f64| (x + 1.0) * (m / (mu * x + m)).powf(m / mu) - target;
    let (mut lo, mut hi) = (k, k + 1.0);
    while h(hi) > 0.0 {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if h(mid) > 0.0 {
            lo = mid
        } else {
            hi = mid
        }
    }
    0.5 * (lo + hi)
}

/// least-squares slope of ln F_single against ln(γ/γ̄)
fn slope(p: &ShadowedParams, lo: f64, hi: f64) -> f64 {
    let pts: Vec<(f64, f64)> = (0..21)
        .map(|i| {
            let x = lo * (hi / lo).powf(i as f64 / 20.0);
            (x.ln(), cdf_single(p, x).unwrap().ln())
        })
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>()
}

#[test]
fn exponential_case() {
    let p = sp(0.0, 1, 1);
    for &x in &[1e-6, 1e-4, 1e-2] {
        assert!(rel(asym_cdf(&p, x).unwrap(), x) < 1e-14);
        assert!(rel(asym_cdf(&p, x).unwrap(), -(-x as f64).exp_m1()) < x);
    }
}

#[test]
fn asymptote_is_the_small_argument_limit() {
    for &(kappa, mu, m) in &[(0.0, 1, 1), (3.0, 2, 2), (10.0, 1, 15), (1.0, 3, 8), (25.0, 2, 1), (0.5, 4, 30)] {
        let p = sp(kappa, mu, m);
        let r = cdf_single(&p, 1e-4).unwrap() / asym_cdf(&p, 1e-4).unwrap();
        assert!((r - 1.0).abs() < 0.02, "κ={kappa} μ={mu} m={m}: {r}");
    }
    let p = sp(3.0, 2, 2);
    // a₁ = 2²·4²/2!·(2/8)² = 2
    assert!(rel(asym_cdf(&p, 1e-3).unwrap(), 2e-6) < 1e-12);
    let s = (cdf_single(&p, 1e-3).unwrap() / cdf_single(&p, 1e-4).unwrap()).log10();
    assert!((s - 2.0).abs() < 0.02, "{s}");
    assert_eq!(asym_coeffs(&p).slope, 1);
}

#[test]
fn matching_reference() {
    let k = match_kappa(10.0, 1, Shadowing::Finite(15)).unwrap();
    assert!((k - 14.95).abs() < 0.05, "{k}");
    assert!(rel(k, match_oracle(10.0, 1.0, 15.0)) < 1e-10);
    assert_eq!(match_kappa(0.0, 1, Shadowing::Finite(4)).unwrap(), 0.0);
    assert_eq!(match_kappa(3.5, 2, Shadowing::Infinite).unwrap(), 3.5);
    assert!(match_kappa(1.0, 3, Shadowing::Finite(3)).is_err());
    assert!(match_kappa(1.0, 3, Shadowing::Finite(2)).is_err());
    assert!(match_kappa(-1.0, 1, Shadowing::Finite(2)).is_err());
}

#[test]
fn matched_shadowed_law_tracks_rician_near_zero() {
    for &(k, m) in &[(2.0, 5u32), (10.0, 15)] {
        let kappa = match_kappa(k, 1, Shadowing::Finite(m)).unwrap();
        assert!(rel(kappa, match_oracle(k, 1.0, m as f64)) < 1e-10);
        let x = 1e-4;
        let shadowed = cdf_single(&sp(kappa, 1, m), x).unwrap();
        let rician = kms_cdf(1.0, k, 1, None, x);
        assert!((shadowed / rician - 1.0).abs() < 0.03, "K={k} m={m}: {}", shadowed / rician);
        let a1 = asym_coeffs(&sp(kappa, 1, m)).offset;
        let a2 = asym_coeffs_unshadowed(k, 1).unwrap().offset;
        assert!(rel(a1, a2) < 1e-10);
    }
}

#[test]
fn matched_kappa_decreases_toward_k() {
    for mu in 1..=3u32 {
        for &k in &[0.5, 2.0, 10.0] {
            let mut prev = f64::INFINITY;
            for m in mu + 1..=50 {
                let kappa = match_kappa(k, mu, Shadowing::Finite(m)).unwrap();
                assert!(kappa < prev && kappa > k, "μ={mu} K={k} m={m}: {kappa}");
                let a1 = asym_coeffs(&sp(kappa, mu, m)).offset;
                let a2 = asym_coeffs_unshadowed(k, mu).unwrap().offset;
                assert!(rel(a1, a2) < 1e-10);
                prev = kappa;
            }
        }
    }
}

#[test]
fn library_slope_helper_agrees() {
    let p = sp(4.0, 3, 6);
    let a = cdf_log_slope(&p, 1e-5, 1e-3, 21).unwrap();
    assert!((a - slope(&p, 1e-5, 1e-3)).abs() < 1e-9);
    assert!(cdf_log_slope(&p, 1e-3, 1e-5, 21).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn diversity_order_is_mu(mu in 1u32..=3, kappa in 0.0f64..15.0, m in 1u32..=50) {
        let s = slope(&sp(kappa, mu, m), 1e-5, 1e-3);
        prop_assert!((s - mu as f64).abs() <= 0.05, "slope {s}");
    }

    #[test]
    fn diversity_order_is_mu_strong_los(mu in 1u32..=3, kappa in 15.0f64..50.0, m in 1u32..=50) {
        // the next-order term grows like (1+κ)x, so the window moves down with κ
        let c = 10.0 / (1.0 + kappa);
        let s = slope(&sp(kappa, mu, m), 1e-5 * c, 1e-3 * c);
        prop_assert!((s - mu as f64).abs() <= 0.05, "slope {s}");
    }
}

mod common;

use common::{bessel_k, exp_sinh, ln_gamma_int, rel, tanh_sinh};
use proptest::prelude::*;
use prodfade::gammagamma::{gg_cdf, gg_mgf, gg_moment, gg_pdf, ln_whittaker_w, GammaGammaParams};

fn gg(m: u32, m_hat: u32, o: f64, oh: f64) -> GammaGammaParams {
    GammaGammaParams::new(m, m_hat, o, oh).unwrap()
}

fn gamma_pdf(shape: u32, scale: f64, x: f64) -> f64 {
    let a = shape as f64;
    ((a - 1.0) * x.ln() - x / scale - a * scale.ln() - ln_gamma_int(shape)).exp()
}

/// density of W·Ŵ by the product-convolution integral
fn pdf_oracle(m: u32, m_hat: u32, o: f64, oh: f64, x: f64) -> f64 {
    exp_sinh(|w| gamma_pdf(m, o, w) * gamma_pdf(m_hat, oh, x / w) / w, (x * o / oh).sqrt(), 1e-13).value
}

#[test]
fn reference_values() {
    let p = gg(1, 1, 1.0, 1.0);
    assert!((gg_pdf(&p, 1.0).unwrap() - 2.0 * 0.11389387274953344).abs() < 1e-12);
    assert!((gg_pdf(&p, 1.0).unwrap() - 2.0 * bessel_k(0.0, 2.0)).abs() < 1e-12);
    assert!((gg_cdf(&p, 1.0).unwrap() - 0.72026824).abs() < 1e-7);
    assert!((gg_cdf(&p, 1.0).unwrap() - (1.0 - 2.0 * bessel_k(1.0, 2.0))).abs() < 1e-12);
    assert!(gg_cdf(&p, 1e-12).unwrap() < 1e-9);
    assert!((gg_mgf(&p, -1.0).unwrap() - 0.5963474).abs() < 1e-6);
    assert!((gg_mgf(&p, -1e-8).unwrap() - 1.0).abs() < 1e-6);
    assert_eq!(gg_moment(&p, 1).unwrap(), 1.0);
    assert!((gg_moment(&p, 2).unwrap() - 4.0).abs() < 1e-12);
}

#[test]
fn pdf_matches_convolution_integral() {
    let x = 0.7;
    assert!(rel(gg_pdf(&gg(2, 1, 0.5, 2.0), x).unwrap(), pdf_oracle(2, 1, 0.5, 2.0, x)) < 1e-10);
    for &(m, mh, o, oh) in &[(1, 1, 1.0, 1.0), (3, 7, 0.2, 3.0), (12, 2, 1.5, 0.1), (30, 30, 0.03, 0.05)] {
        for &x in &[1e-3, 0.1, 1.0, 5.0] {
            let x = x * m as f64 * mh as f64 * o * oh;
            let want = pdf_oracle(m, mh, o, oh, x);
            assert!(rel(gg_pdf(&gg(m, mh, o, oh), x).unwrap(), want) < 1e-9, "({m},{mh},{o},{oh}) x={x}");
        }
    }
}

#[test]
fn cdf_is_integral_of_pdf() {
    let p = gg(3, 2, 1.0, 1.0);
    let q = tanh_sinh(|t| gg_pdf(&p, t).unwrap(), 0.0, 2.0, 1e-14).value;
    assert!((gg_cdf(&p, 2.0).unwrap() - q).abs() < 1e-10);
    for &m in &[1, 2, 5] {
        for &mh in &[1, 3, 8] {
            let p = gg(m, mh, 0.7, 1.3);
            for i in 0..50 {
                let x = 1e-4 * 1.25f64.powi(i);
                let q = tanh_sinh(|t| pdf_oracle(m, mh, 0.7, 1.3, t), 0.0, x, 1e-12).value;
                assert!((gg_cdf(&p, x).unwrap() - q).abs() < 1e-8, "({m},{mh}) x={x}");
            }
        }
    }
}

#[test]
fn mgf_matches_laplace_integral() {
    let (m, mh, o, oh) = (2, 3, 1.0, 0.5);
    let s = -0.3;
    let q = exp_sinh(|x| (s * x).exp() * pdf_oracle(m, mh, o, oh, x), 1.0, 1e-12).value;
    assert!(rel(gg_mgf(&gg(m, mh, o, oh), s).unwrap(), q) < 1e-8);
    assert!(gg_mgf(&gg(1, 1, 1.0, 1.0), 0.0).is_err());
    assert!(gg_mgf(&gg(1, 1, 1.0, 1.0), 0.5).is_err());
}

#[test]
fn whittaker_layer_matches_integral() {
    // W_{k,μ}(z) = z^{μ+1/2} e^{−z/2}/Γ(μ−k+1/2) ∫ e^{−zt} t^{μ−k−1/2}(1+t)^{μ+k−1/2} dt
    for &(m, mh, z) in &[(1u32, 1u32, 1.0), (2, 3, 0.4), (5, 1, 7.0), (3, 8, 20.0)] {
        let k = -((m + mh) as f64 - 1.0) / 2.0;
        let mu = (m as f64 - mh as f64) / 2.0;
        let a = mu - k + 0.5;
        let int = exp_sinh(|t| (-z * t).exp() * t.powf(a - 1.0) * (1.0 + t).powf(mu + k - 0.5), 1.0 / z, 1e-13).value;
        let ln_w = (mu + 0.5) * z.ln() - z / 2.0 - ln_gamma_int(a.round() as u32) + int.ln();
        assert!((ln_whittaker_w(m, mh, z).unwrap() - ln_w).abs() < 1e-9, "({m},{mh},{z})");
    }
}

#[test]
fn moments_match_quadrature() {
    let p = gg(2, 3, 0.5, 1.0);
    let q = exp_sinh(|x| x.powi(3) * pdf_oracle(2, 3, 0.5, 1.0, x), 3.0, 1e-12).value;
    assert!(rel(gg_moment(&p, 3).unwrap(), q) < 1e-8);
    for &(m, mh, o, oh) in &[(1, 1, 2.0, 0.5), (4, 9, 0.3, 0.7), (30, 1, 1.0, 1.0)] {
        let exact = m as f64 * mh as f64 * o * oh;
        assert!(rel(gg_moment(&gg(m, mh, o, oh), 1).unwrap(), exact) < 1e-12);
    }
    assert!(gg_moment(&gg(2, 2, 1.0, 1.0), 100_000).is_err());
}

#[test]
fn rejects_bad_arguments() {
    assert!(GammaGammaParams::new(0, 1, 1.0, 1.0).is_err());
    assert!(GammaGammaParams::new(1, 1, 0.0, 1.0).is_err());
    let p = gg(1, 1, 1.0, 1.0);
    assert!(gg_pdf(&p, 0.0).is_err());
    assert!(gg_cdf(&p, -1.0).is_err());
}

proptest! {
    #[test]
    fn swap_symmetry(m in 1u32..=20, mh in 1u32..=20, o in 0.05f64..5.0, oh in 0.05f64..5.0, x in 1e-3f64..20.0) {
        let a = gg(m, mh, o, oh);
        let b = gg(mh, m, oh, o);
        prop_assert!(rel(gg_pdf(&a, x).unwrap(), gg_pdf(&b, x).unwrap()) < 1e-12);
        prop_assert!((gg_cdf(&a, x).unwrap() - gg_cdf(&b, x).unwrap()).abs() < 1e-12);
        prop_assert!(rel(gg_mgf(&a, -x).unwrap(), gg_mgf(&b, -x).unwrap()) < 1e-10);
    }

    #[test]
    fn mgf_monotone_in_s(m in 1u32..=15, mh in 1u32..=15, s in -50.0f64..-1e-3, ds in 1e-4f64..1.0) {
        let p = gg(m, mh, 1.0, 1.0);
        let lo = gg_mgf(&p, s).unwrap();
        let hi = gg_mgf(&p, (s + ds).min(-1e-6)).unwrap();
        prop_assert!(lo > 0.0 && hi <= 1.0);
        prop_assert!(hi >= lo);
    }

    #[test]
    fn cdf_monotone(m in 1u32..=20, mh in 1u32..=20, x in 1e-4f64..50.0, dx in 1e-4f64..5.0) {
        let p = gg(m, mh, 1.0, 1.0);
        prop_assert!(gg_cdf(&p, x + dx).unwrap() >= gg_cdf(&p, x).unwrap() - 1e-14);
    }
}

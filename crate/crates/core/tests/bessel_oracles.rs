//! Modified Bessel values against independent references: power series,
//! integral representations, large-argument asymptotics and finite
//! differences.

use std::f64::consts::PI;
use torus_dirac::bessel::{bessel_i, bessel_i_deriv, bessel_i_deriv_lowering, bessel_k, bessel_k_deriv, i_ext, k_ext};

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn factorial(k: u32) -> f64 {
    (1..=k).fold(1.0, |a, j| a * j as f64)
}

fn i_series(n: u32, t: f64) -> f64 {
    (0..60)
        .map(|k| (t / 2.0).powi((2 * k + n) as i32) / (factorial(k) * factorial(k + n)))
        .sum()
}

/// `(1/π) ∫_0^π e^{t cos θ} cos(nθ) dθ` by the trapezoid rule, spectrally
/// accurate for this periodic integrand; error is relative to `e^t`.
fn i_integral(n: u32, t: f64) -> f64 {
    let steps = 400;
    let h = PI / steps as f64;
    let f = |th: f64| (t * th.cos()).exp() * (n as f64 * th).cos();
    let inner: f64 = (1..steps).map(|k| f(k as f64 * h)).sum();
    (inner + 0.5 * (f(0.0) + f(PI))) * h / PI
}

/// `∫_0^∞ e^{-t cosh s} cosh(ns) ds`, trapezoid on a truncated range.
fn k_integral(n: u32, t: f64) -> f64 {
    let h = 1e-3;
    let f = |s: f64| (-t * s.cosh() + n as f64 * s).exp() * 0.5 * (1.0 + (-2.0 * n as f64 * s).exp());
    let mut sum = 0.5 * f(0.0);
    let mut k = 1;
    loop {
        let v = f(k as f64 * h);
        sum += v;
        if v < 1e-300 || k > 200_000 {
            break;
        }
        k += 1;
    }
    sum * h
}

fn k_asymptotic(n: u32, t: f64) -> f64 {
    let mu = 4.0 * (n as f64).powi(2);
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..12 {
        let odd = (2 * k - 1) as f64;
        term *= (mu - odd * odd) / (k as f64 * 8.0 * t);
        sum += term;
    }
    (PI / (2.0 * t)).sqrt() * (-t).exp() * sum
}

#[test]
fn i_matches_power_series() {
    for n in [0u32, 1, 2, 5, 12, 30] {
        for t in [1e-3, 0.1, 0.7, 1.5, 4.0, 10.0] {
            let want = i_series(n, t);
            if want < 1e-300 {
                continue;
            }
            assert!(rel(bessel_i(n as i32, t).unwrap(), want) < 1e-13, "I_{n}({t})");
        }
    }
}

#[test]
fn i_matches_integral_representation() {
    for n in [0u32, 1, 3, 8] {
        for t in [0.5, 2.0, 9.0, 25.0] {
            let err = (bessel_i(n as i32, t).unwrap() - i_integral(n, t)).abs();
            assert!(err < 1e-14 * t.exp(), "I_{n}({t})");
        }
    }
}

#[test]
fn k_matches_integral_representation() {
    for n in [0u32, 1, 2, 7] {
        for t in [0.05, 0.5, 1.0, 3.0, 12.0] {
            assert!(rel(bessel_k(n as i32, t).unwrap(), k_integral(n, t)) < 1e-11, "K_{n}({t})");
        }
    }
}

#[test]
fn k_near_zero_and_at_large_argument() {
    let euler = 0.577_215_664_901_532_9;
    let t = 1e-6;
    let small = -(t / 2.0f64).ln() - euler;
    assert!(rel(bessel_k(0, t).unwrap(), small) < 1e-10);
    for n in [0u32, 1, 4] {
        for t in [50.0, 120.0, 400.0] {
            let got = k_ext(n as i32, t).unwrap().ln_abs();
            assert!((got - k_asymptotic(n, t).ln()).abs() < 1e-12, "K_{n}({t})");
        }
    }
}

#[test]
fn extended_range_matches_log_series() {
    // I_200(1): log of the leading series term dominates.
    let n = 200u32;
    let lead = -(n as f64) * 2f64.ln() - (1..=n).map(|k| (k as f64).ln()).sum::<f64>();
    let corr = (1.0 + 0.25 / (n as f64 + 1.0) + 0.03125 / ((n as f64 + 1.0) * (n as f64 + 2.0))).ln();
    let got = i_ext(n as i32, 1.0).unwrap().ln_abs();
    assert!((got - (lead + corr)).abs() < 1e-9);
}

#[test]
fn derivatives_match_finite_differences() {
    let h = 1e-5;
    for n in [0i32, 1, 3, 6] {
        for t in [0.5, 1.7, 6.0] {
            let fd_i = (bessel_i(n, t + h).unwrap() - bessel_i(n, t - h).unwrap()) / (2.0 * h);
            let fd_k = (bessel_k(n, t + h).unwrap() - bessel_k(n, t - h).unwrap()) / (2.0 * h);
            assert!(rel(bessel_i_deriv(n, t).unwrap(), fd_i) < 1e-8, "I'_{n}({t})");
            assert!(rel(bessel_k_deriv(n, t).unwrap(), fd_k) < 1e-8, "K'_{n}({t})");
            if n > 0 {
                assert!(rel(bessel_i_deriv_lowering(n, t).unwrap(), bessel_i_deriv(n, t).unwrap()) < 1e-12);
            }
        }
    }
}

#[test]
fn wronskian_is_one_over_t() {
    for n in [0i32, 1, 9, 40, 100] {
        for t in [1e-3, 0.3, 1.0, 17.0, 600.0] {
            let w = i_ext(n, t).unwrap() * k_ext(n + 1, t).unwrap() + i_ext(n + 1, t).unwrap() * k_ext(n, t).unwrap();
            assert!((t * w.to_f64() - 1.0).abs() < 1e-12, "n={n} t={t}");
        }
    }
}

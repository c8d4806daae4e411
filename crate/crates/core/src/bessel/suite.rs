//! Pointwise verification of the classical identities and inequalities
//! satisfied by `I_n` and `K_n`.

use super::{BesselOrder, Result};
use crate::ext::ExtFloat;
use serde::Serialize;

/// Source of scaled Bessel sequences. [`Exact`] is the real engine;
/// [`PerturbedK`] deliberately corrupts `K` so the verification harness can
/// be shown to fail.
pub trait BesselSource: Sync {
    /// `e^{-t} I_k(t)` for `k = lo..=hi`.
    fn i_scaled_seq(&self, lo: u32, hi: u32, t: f64) -> Result<Vec<ExtFloat>>;
    /// `e^{t} K_k(t)` for `k = 0..=hi`.
    fn k_scaled_seq(&self, hi: u32, t: f64) -> Result<Vec<ExtFloat>>;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Exact;

impl BesselSource for Exact {
    fn i_scaled_seq(&self, lo: u32, hi: u32, t: f64) -> Result<Vec<ExtFloat>> {
        super::i_scaled_seq(lo, hi, t)
    }
    fn k_scaled_seq(&self, hi: u32, t: f64) -> Result<Vec<ExtFloat>> {
        super::k_scaled_seq(hi, t)
    }
}

/// Multiplies every `K_n` by `1 + eps`.
#[derive(Debug, Clone, Copy)]
pub struct PerturbedK(pub f64);

impl BesselSource for PerturbedK {
    fn i_scaled_seq(&self, lo: u32, hi: u32, t: f64) -> Result<Vec<ExtFloat>> {
        super::i_scaled_seq(lo, hi, t)
    }
    fn k_scaled_seq(&self, hi: u32, t: f64) -> Result<Vec<ExtFloat>> {
        Ok(super::k_scaled_seq(hi, t)?
            .into_iter()
            .map(|k| k.scale(1.0 + self.0))
            .collect())
    }
}

pub(crate) fn wronskian_residual_with(
    src: &dyn BesselSource,
    n: BesselOrder,
    t: f64,
) -> Result<f64> {
    // W(n) uses orders n and n+1; for n < 0 that pair is (|n|-1, |n|).
    let lo = if n.0 >= 0 { n.0 as u32 } else { n.abs() - 1 };
    let i = src.i_scaled_seq(lo, lo + 1, t)?;
    let k = src.k_scaled_seq(lo + 1, t)?;
    let w = (i[0] * k[lo as usize + 1] + i[1] * k[lo as usize]).scale(t);
    Ok((w.to_f64() - 1.0).abs())
}

/// One failed inequality at one grid point.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Violation {
    pub check: &'static str,
    pub n: u32,
    pub t: f64,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone, Serialize, Default)]
pub struct InequalityReport {
    pub n_max: u32,
    pub grid_points: usize,
    pub checks_run: usize,
    pub violations: Vec<Violation>,
}

impl InequalityReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Relative slack allowed at points where an inequality approaches equality.
pub const INEQUALITY_SLACK: f64 = 1e-12;
/// Near-zero asymptotics are checked for `t <= ZERO_ASYMPTOTIC_T`.
pub const ZERO_ASYMPTOTIC_T: f64 = 1e-2;
pub const ZERO_ASYMPTOTIC_TOL: f64 = 1e-3;
/// Large-argument asymptotics are checked where the first Hankel correction
/// `(4n^2-1)/(8t)` is below half a percent.
pub const INF_ASYMPTOTIC_TOL: f64 = 1e-2;

pub fn infinity_threshold(n: u32) -> f64 {
    let mu = 4.0 * (n as f64).powi(2) - 1.0;
    (25.0 * mu.abs()).max(50.0)
}

struct Checker<'a> {
    report: &'a mut InequalityReport,
    n: u32,
    t: f64,
}

impl Checker<'_> {
    /// Records a violation unless `lhs <= rhs` up to the relative slack.
    fn le(&mut self, check: &'static str, lhs: ExtFloat, rhs: ExtFloat) {
        self.report.checks_run += 1;
        let excess = lhs - rhs;
        let ok = excess.is_finite() && excess <= rhs.abs().scale(INEQUALITY_SLACK);
        if !ok {
            self.report.violations.push(Violation {
                check,
                n: self.n,
                t: self.t,
                lhs: lhs.to_f64(),
                rhs: rhs.to_f64(),
            });
        }
    }

    /// Records a violation unless `|ratio - 1| <= tol`.
    fn near_one(&mut self, check: &'static str, ratio: ExtFloat, tol: f64) {
        self.report.checks_run += 1;
        let r = ratio.to_f64();
        if !((r - 1.0).abs() <= tol) {
            self.report.violations.push(Violation {
                check,
                n: self.n,
                t: self.t,
                lhs: r,
                rhs: 1.0,
            });
        }
    }
}

/// `(t/2)^n / n!`.
fn i_leading(n: u32, t: f64) -> ExtFloat {
    (1..=n).fold(ExtFloat::ONE, |acc, k| acc * ExtFloat::new(0.5 * t / k as f64))
}

/// `Gamma(n)/2 (2/t)^n` for `n >= 1`.
fn k_leading(n: u32, t: f64) -> ExtFloat {
    let mut acc = ExtFloat::new(0.5 * 2.0 / t);
    for k in 1..n {
        acc = acc * ExtFloat::new(k as f64 * 2.0 / t);
    }
    acc
}

/// Runs every inequality check for orders `0..=n_max` on `t_grid`.
///
/// Derivatives entering the logarithmic-derivative inequalities use the
/// symmetric forms `2 I_n' = I_{n-1} + I_{n+1}` and
/// `-2 K_n' = K_{n-1} + K_{n+1}`.
pub fn inequality_suite(
    src: &dyn BesselSource,
    n_max: u32,
    t_grid: &[f64],
) -> Result<InequalityReport> {
    let mut grid: Vec<f64> = t_grid.to_vec();
    grid.sort_by(|a, b| a.partial_cmp(b).expect("finite grid"));
    let mut report = InequalityReport {
        n_max,
        grid_points: grid.len(),
        ..Default::default()
    };
    // previous-point values per order: (I_n, K_n, I_n K_n)
    let mut prev: Vec<Option<(ExtFloat, ExtFloat, ExtFloat)>> = vec![None; n_max as usize + 1];
    for &t in &grid {
        let i_seq = src.i_scaled_seq(0, n_max + 1, t)?;
        let k_seq = src.k_scaled_seq(n_max + 1, t)?;
        let up = ExtFloat::exp(t);
        let down = ExtFloat::exp(-t);
        for n in 0..=n_max {
            let nu = n as usize;
            let i_n = i_seq[nu];
            let i_n1 = i_seq[nu + 1];
            let k_n = k_seq[nu];
            let k_n1 = k_seq[nu + 1];
            // orders n-1, with I_{-1} = I_1 and K_{-1} = K_1
            let i_nm = if n == 0 { i_seq[1] } else { i_seq[nu - 1] };
            let k_nm = if n == 0 { k_seq[1] } else { k_seq[nu - 1] };
            let product = i_n * k_n;
            let mut c = Checker {
                report: &mut report,
                n,
                t,
            };

            c.le("i_order_monotone", i_n1, i_n);
            c.le("k_order_monotone", k_n, k_n1);

            let w = (i_n * k_n1 + i_n1 * k_n).scale(t);
            c.near_one("wronskian", w, 1e-12);
            c.le("product_le_shifted_product", product.scale(t), (k_n1 * i_n).scale(t));
            c.le("t_k_shifted_i_le_one", (k_n1 * i_n).scale(t), ExtFloat::ONE);
            if n >= 1 {
                c.le("product_le_half_over_n", product, ExtFloat::new(0.5 / n as f64));
            }

            if n >= 1 {
                let i_deriv = (i_nm + i_n1).scale(0.5);
                let neg_k_deriv = (k_nm + k_n1).scale(0.5);
                c.le("i_le_t_over_n_i_deriv", i_n, i_deriv.scale(t / n as f64));
                c.le("i_le_two_i_deriv", i_n, i_deriv.scale(2.0));
                c.le("k_le_t_over_n_neg_k_deriv", k_n, neg_k_deriv.scale(t / n as f64));
                c.le("k_le_two_neg_k_deriv", k_n, neg_k_deriv.scale(2.0));
            }

            let (i_abs, k_abs) = (i_n * up, k_n * down);
            if let Some((pi, pk, pp)) = prev[nu] {
                c.le("i_increasing_in_t", pi, i_abs);
                c.le("k_decreasing_in_t", k_abs, pk);
                c.le("product_decreasing_in_t", product, pp);
            }
            prev[nu] = Some((i_abs, k_abs, product));

            if t <= ZERO_ASYMPTOTIC_T {
                c.near_one("i_asymptotic_zero", i_abs / i_leading(n, t), ZERO_ASYMPTOTIC_TOL);
                let k_model = if n == 0 {
                    ExtFloat::new(-(0.5 * t).ln() - super::EULER_GAMMA)
                } else {
                    k_leading(n, t)
                };
                c.near_one("k_asymptotic_zero", k_abs / k_model, ZERO_ASYMPTOTIC_TOL);
                if n >= 1 {
                    c.near_one(
                        "product_limit_zero",
                        product.scale(2.0 * n as f64),
                        ZERO_ASYMPTOTIC_TOL,
                    );
                }
            }
            if t >= infinity_threshold(n) {
                let two_pi_t = 2.0 * std::f64::consts::PI * t;
                c.near_one(
                    "i_asymptotic_infinity",
                    i_n.scale(two_pi_t.sqrt()),
                    INF_ASYMPTOTIC_TOL,
                );
                c.near_one(
                    "k_asymptotic_infinity",
                    k_n.scale((2.0 * t / std::f64::consts::PI).sqrt()),
                    INF_ASYMPTOTIC_TOL,
                );
            }
        }
    }
    Ok(report)
}

/// Logarithmically spaced points on `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    assert!(count >= 2 && lo > 0.0 && hi > lo);
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|k| {
            if k == count - 1 {
                hi
            } else {
                (a + (b - a) * k as f64 / (count - 1) as f64).exp()
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_passes_on_small_grid() {
        let grid = log_grid(1e-3, 1e3, 40);
        let report = inequality_suite(&Exact, 6, &grid).unwrap();
        assert!(report.passed(), "{:?}", &report.violations[..report.violations.len().min(5)]);
        assert!(report.checks_run > 40 * 7 * 10);
    }

    #[test]
    fn zero_order_skips_half_over_n() {
        let report = inequality_suite(&Exact, 0, &[0.5, 1.0]).unwrap();
        assert!(report.passed());
        // 5 order-free checks per point plus two t-monotonicity rows at the second point
        // (product monotonicity included)
        assert_eq!(report.checks_run, 5 * 2 + 3);
    }

    #[test]
    fn perturbation_is_detected() {
        let report = inequality_suite(&PerturbedK(1e-6), 3, &[0.5, 2.0]).unwrap();
        assert!(report.violations.iter().any(|v| v.check == "wronskian"));
    }
}

//! Modified Bessel functions `I_n`, `K_n` of integer order.
//!
//! Scaled values (`e^{-t} I_n(t)`, `e^{t} K_n(t)`) carried as [`ExtFloat`] are
//! the primitive; unscaled `f64` values are derived from them and fail with a
//! range error when they do not fit.
//!
//! Algorithms:
//! * `I_n`: power series for `t <= max(20, n)`, otherwise Miller's backward
//!   recurrence normalised by `e^{-t}(I_0 + 2 sum I_k) = 1`.
//! * `K_n`: logarithmic series for `K_0, K_1` when `t <= 2`, Steed's continued
//!   fraction above, then the upward recurrence (stable for `K`).

mod eval;
pub mod suite;

use crate::ext::ExtFloat;
use thiserror::Error;

pub use eval::EULER_GAMMA;
pub use suite::{inequality_suite, BesselSource, Exact, InequalityReport, PerturbedK, Violation};

/// Largest supported |order|.
pub const MAX_ORDER: u32 = 1024;
/// Largest supported argument.
pub const MAX_ARG: f64 = 1e6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BesselError {
    #[error("argument t = {t} outside the domain of {function}")]
    Domain { function: &'static str, t: f64 },
    #[error("order {n} or argument {t} outside the supported range")]
    Range { n: i64, t: f64 },
}

pub type Result<T> = std::result::Result<T, BesselError>;

/// Integer Bessel order. Evaluation only sees `|n|`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BesselOrder(pub i32);

impl BesselOrder {
    pub fn abs(self) -> u32 {
        self.0.unsigned_abs()
    }
}

impl From<i32> for BesselOrder {
    fn from(n: i32) -> Self {
        BesselOrder(n)
    }
}

/// `(e^{-t} I_n(t), e^{t} K_n(t))` at one point.
#[derive(Debug, Clone, Copy)]
pub struct ScaledBesselPair {
    pub n: i32,
    pub t: f64,
    pub i_scaled: ExtFloat,
    pub k_scaled: ExtFloat,
}

impl ScaledBesselPair {
    pub fn new(n: impl Into<BesselOrder>, t: f64) -> Result<Self> {
        let n = n.into();
        Ok(ScaledBesselPair {
            n: n.0,
            t,
            i_scaled: i_scaled(n, t)?,
            k_scaled: k_scaled(n, t)?,
        })
    }

    /// `I_n(t) K_n(t)`; the exponentials cancel exactly.
    pub fn product(&self) -> f64 {
        (self.i_scaled * self.k_scaled).to_f64()
    }
}

/// Gamma function at a positive integer, `(n-1)!`.
pub fn gamma_int(n: u32) -> f64 {
    assert!(n >= 1, "gamma_int needs n >= 1");
    (1..n).fold(1.0, |acc, k| acc * k as f64)
}

fn check_order(n: u32, t: f64) -> Result<()> {
    if n > MAX_ORDER || t > MAX_ARG {
        return Err(BesselError::Range { n: n as i64, t });
    }
    Ok(())
}

fn check_i_arg(t: f64) -> Result<()> {
    if !t.is_finite() || t < 0.0 {
        return Err(BesselError::Domain { function: "I_n", t });
    }
    Ok(())
}

fn check_k_arg(t: f64) -> Result<()> {
    if !t.is_finite() || t <= 0.0 {
        return Err(BesselError::Domain { function: "K_n", t });
    }
    Ok(())
}

/// `e^{-t} I_k(t)` for `k = lo..=hi` (nonnegative orders).
pub fn i_scaled_seq(lo: u32, hi: u32, t: f64) -> Result<Vec<ExtFloat>> {
    check_i_arg(t)?;
    check_order(hi, t)?;
    Ok(eval::i_scaled_seq(lo, hi, t))
}

/// `e^{t} K_k(t)` for `k = 0..=hi`.
pub fn k_scaled_seq(hi: u32, t: f64) -> Result<Vec<ExtFloat>> {
    check_k_arg(t)?;
    check_order(hi, t)?;
    Ok(eval::k_scaled_seq(hi, t))
}

pub fn i_scaled(n: impl Into<BesselOrder>, t: f64) -> Result<ExtFloat> {
    let nu = n.into().abs();
    Ok(i_scaled_seq(nu, nu, t)?[0])
}

pub fn k_scaled(n: impl Into<BesselOrder>, t: f64) -> Result<ExtFloat> {
    let nu = n.into().abs();
    Ok(*k_scaled_seq(nu, t)?.last().expect("nonempty"))
}

/// `I_n(t)` with the extended exponent.
pub fn i_ext(n: impl Into<BesselOrder>, t: f64) -> Result<ExtFloat> {
    Ok(i_scaled(n, t)? * ExtFloat::exp(t))
}

/// `K_n(t)` with the extended exponent.
pub fn k_ext(n: impl Into<BesselOrder>, t: f64) -> Result<ExtFloat> {
    Ok(k_scaled(n, t)? * ExtFloat::exp(-t))
}

fn collapse(v: ExtFloat, n: i32, t: f64) -> Result<f64> {
    let x = v.to_f64();
    if !x.is_finite() || (x == 0.0 && !v.is_zero()) {
        return Err(BesselError::Range { n: n as i64, t });
    }
    Ok(x)
}

/// Modified Bessel function of the first kind, `I_n(t)`, `t >= 0`.
pub fn bessel_i(n: impl Into<BesselOrder>, t: f64) -> Result<f64> {
    let n = n.into();
    collapse(i_ext(n, t)?, n.0, t)
}

/// Modified Bessel function of the second kind, `K_n(t)`, `t > 0`.
pub fn bessel_k(n: impl Into<BesselOrder>, t: f64) -> Result<f64> {
    let n = n.into();
    collapse(k_ext(n, t)?, n.0, t)
}

/// `I_n'(t) = I_{n+1}(t) + (n/t) I_n(t)` as an extended value.
pub fn i_deriv_ext(n: impl Into<BesselOrder>, t: f64) -> Result<ExtFloat> {
    check_k_arg(t).map_err(|_| BesselError::Domain { function: "I_n'", t })?;
    let nu = n.into().abs();
    let s = i_scaled_seq(nu, nu + 1, t)?;
    Ok((s[1] + s[0].scale(nu as f64 / t)) * ExtFloat::exp(t))
}

/// `K_n'(t) = -K_{n+1}(t) + (n/t) K_n(t)` as an extended value.
pub fn k_deriv_ext(n: impl Into<BesselOrder>, t: f64) -> Result<ExtFloat> {
    check_k_arg(t).map_err(|_| BesselError::Domain { function: "K_n'", t })?;
    let nu = n.into().abs();
    let s = k_scaled_seq(nu + 1, t)?;
    let k = s[nu as usize];
    let k1 = s[nu as usize + 1];
    Ok((k.scale(nu as f64 / t) - k1) * ExtFloat::exp(-t))
}

/// `I_n'(t)` via `I_{n+1} + (n/t) I_n`.
pub fn bessel_i_deriv(n: impl Into<BesselOrder>, t: f64) -> Result<f64> {
    let n = n.into();
    collapse(i_deriv_ext(n, t)?, n.0, t)
}

/// `K_n'(t)` via `-K_{n+1} + (n/t) K_n`.
pub fn bessel_k_deriv(n: impl Into<BesselOrder>, t: f64) -> Result<f64> {
    let n = n.into();
    collapse(k_deriv_ext(n, t)?, n.0, t)
}

/// `I_n'(t)` via the lowering form `I_{n-1} - (n/t) I_n`.
pub fn bessel_i_deriv_lowering(n: impl Into<BesselOrder>, t: f64) -> Result<f64> {
    check_k_arg(t).map_err(|_| BesselError::Domain { function: "I_n'", t })?;
    let n = n.into();
    let nu = n.abs();
    let v = if nu == 0 {
        i_scaled(1, t)?
    } else {
        let s = i_scaled_seq(nu - 1, nu, t)?;
        s[0] - s[1].scale(nu as f64 / t)
    };
    collapse(v * ExtFloat::exp(t), n.0, t)
}

/// `K_n'(t)` via the lowering form `-K_{n-1} - (n/t) K_n`.
pub fn bessel_k_deriv_lowering(n: impl Into<BesselOrder>, t: f64) -> Result<f64> {
    check_k_arg(t).map_err(|_| BesselError::Domain { function: "K_n'", t })?;
    let n = n.into();
    let nu = n.abs();
    let s = k_scaled_seq(nu.max(1), t)?;
    let v = if nu == 0 {
        -s[1]
    } else {
        -s[nu as usize - 1] - s[nu as usize].scale(nu as f64 / t)
    };
    collapse(v * ExtFloat::exp(-t), n.0, t)
}

/// Scaled values at the adjacent orders `lo` and `lo + 1`.
#[derive(Debug, Clone, Copy)]
pub struct AdjacentScaled {
    pub t: f64,
    pub i: [ExtFloat; 2],
    pub k: [ExtFloat; 2],
}

impl AdjacentScaled {
    pub fn new(lo: u32, t: f64) -> Result<Self> {
        let i = i_scaled_seq(lo, lo + 1, t)?;
        let k = k_scaled_seq(lo + 1, t)?;
        Ok(AdjacentScaled {
            t,
            i: [i[0], i[1]],
            k: [k[lo as usize], k[lo as usize + 1]],
        })
    }
}

/// `|t (I_n K_{n+1} + I_{n+1} K_n) - 1|` evaluated in scaled arithmetic.
pub fn wronskian_residual(n: impl Into<BesselOrder>, t: f64) -> Result<f64> {
    suite::wronskian_residual_with(&Exact, n.into(), t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn series_leading_terms_at_zero() {
        assert_eq!(bessel_i(0, 0.0).unwrap(), 1.0);
        assert_eq!(bessel_i(1, 0.0).unwrap(), 0.0);
        assert_eq!(bessel_i(7, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn symmetry_is_bitwise() {
        for &(n, t) in &[(3, 2.0), (2, 2.0), (17, 0.3), (5, 40.0)] {
            assert_eq!(bessel_i(-n, t).unwrap(), bessel_i(n, t).unwrap());
            assert_eq!(bessel_k(-n, t).unwrap(), bessel_k(n, t).unwrap());
        }
    }

    #[test]
    fn domain_and_range_errors() {
        assert!(matches!(bessel_k(0, 0.0), Err(BesselError::Domain { .. })));
        assert!(matches!(bessel_k(0, -1.0), Err(BesselError::Domain { .. })));
        assert!(matches!(bessel_i(0, f64::NAN), Err(BesselError::Domain { .. })));
        assert!(matches!(bessel_i(0, f64::INFINITY), Err(BesselError::Domain { .. })));
        assert!(matches!(bessel_i(2000, 1.0), Err(BesselError::Range { .. })));
        assert!(matches!(bessel_k(1, 2e6), Err(BesselError::Range { .. })));
        assert!(matches!(bessel_k_deriv(1, 0.0), Err(BesselError::Domain { .. })));
        // I_0(800) overflows f64 but the scaled value is fine
        assert!(matches!(bessel_i(0, 800.0), Err(BesselError::Range { .. })));
        assert!(i_scaled(0, 800.0).unwrap().to_f64() > 0.0);
    }

    #[test]
    fn k0_at_one() {
        let k = bessel_k(0, 1.0).unwrap();
        assert!((k - 0.421_024_438_240_708_34).abs() < 1e-15);
    }

    #[test]
    fn derivative_at_zero_order_is_i1() {
        assert_eq!(bessel_i_deriv(0, 1.0).unwrap(), bessel_i(1, 1.0).unwrap());
    }

    #[test]
    fn derivative_forms_agree() {
        for &(n, t) in &[(1, 2.0), (0, 0.7), (4, 13.0), (9, 25.0), (3, 0.05)] {
            let a = bessel_i_deriv(n, t).unwrap();
            let b = bessel_i_deriv_lowering(n, t).unwrap();
            assert!((a - b).abs() <= 1e-12 * a.abs(), "I' n={n} t={t}: {a} {b}");
            let a = bessel_k_deriv(n, t).unwrap();
            let b = bessel_k_deriv_lowering(n, t).unwrap();
            assert!((a - b).abs() <= 1e-12 * a.abs(), "K' n={n} t={t}: {a} {b}");
        }
    }

    #[test]
    fn gamma_helper() {
        assert_eq!(gamma_int(1), 1.0);
        assert_eq!(gamma_int(5), 24.0);
    }

    #[test]
    fn scaled_pair_product_survives_extreme_orders() {
        let p = ScaledBesselPair::new(100, 1e-3).unwrap();
        // I_n K_n -> 1/(2n) as t -> 0
        assert!((p.product() - 0.005).abs() < 1e-8);
        assert!(p.i_scaled.to_f64() == 0.0 && p.k_scaled.to_f64().is_infinite());
    }
}

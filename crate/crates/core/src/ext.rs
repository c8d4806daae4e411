//! Floating-point values with a detached binary exponent.
//!
//! Bessel values of large order at small argument leave the `f64` range
//! (`K_100(1e-3)` is near `1e486`) while the products that matter stay of
//! order one. `ExtFloat` carries an `f64` mantissa in `[0.5, 1)` and an
//! `i64` exponent so such products can be formed exactly before collapsing
//! back to `f64`.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// `mant * 2^exp`, with `0.5 <= |mant| < 1` unless the value is zero.
#[derive(Clone, Copy, PartialEq)]
pub struct ExtFloat {
    mant: f64,
    exp: i64,
}

const MANT_BITS: u64 = 52;
const EXP_MASK: u64 = 0x7ff;

/// Split a finite nonzero `x` into `(m, e)` with `x = m * 2^e`, `0.5 <= |m| < 1`.
fn frexp(x: f64) -> (f64, i64) {
    if x == 0.0 || !x.is_finite() {
        return (x, 0);
    }
    let bits = x.to_bits();
    let raw = ((bits >> MANT_BITS) & EXP_MASK) as i64;
    if raw == 0 {
        // subnormal: scale into the normal range first
        let (m, e) = frexp(x * f64::powi(2.0, 64));
        return (m, e - 64);
    }
    let e = raw - 1022;
    let m_bits = (bits & !(EXP_MASK << MANT_BITS)) | (1022u64 << MANT_BITS);
    (f64::from_bits(m_bits), e)
}

/// `x * 2^e` without intermediate overflow for moderately large `|e|`.
fn ldexp(mut x: f64, mut e: i64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    while e > 1000 {
        x *= f64::powi(2.0, 1000);
        e -= 1000;
        if x.is_infinite() {
            return x;
        }
    }
    while e < -1000 {
        x *= f64::powi(2.0, -1000);
        e += 1000;
        if x == 0.0 {
            return x;
        }
    }
    x * f64::powi(2.0, e as i32)
}

impl ExtFloat {
    pub const ZERO: ExtFloat = ExtFloat { mant: 0.0, exp: 0 };
    pub const ONE: ExtFloat = ExtFloat { mant: 0.5, exp: 1 };

    pub fn new(x: f64) -> Self {
        let (mant, exp) = frexp(x);
        ExtFloat { mant, exp }
    }

    /// `x * 2^e`.
    pub fn from_parts(x: f64, e: i64) -> Self {
        let (mant, exp) = frexp(x);
        if mant == 0.0 {
            return Self::ZERO;
        }
        ExtFloat { mant, exp: exp + e }
    }

    /// `e^x` for arbitrary real `x`; the integer part of `x / ln 2` goes to the exponent.
    pub fn exp(x: f64) -> Self {
        // Cody-Waite split of ln 2: k * LN2_HI is exact for |k| < 2^21.
        const LN2_HI: f64 = 6.931_471_803_691_238_164_90e-1;
        const LN2_LO: f64 = 1.908_214_929_270_587_700_02e-10;
        let k = (x / std::f64::consts::LN_2).round();
        let rem = (x - k * LN2_HI) - k * LN2_LO;
        Self::from_parts(rem.exp(), k as i64)
    }

    pub fn mantissa(self) -> f64 {
        self.mant
    }

    pub fn exponent(self) -> i64 {
        self.exp
    }

    pub fn is_zero(self) -> bool {
        self.mant == 0.0
    }

    pub fn is_finite(self) -> bool {
        self.mant.is_finite()
    }

    /// Collapse to `f64`; saturates to `±inf` or `0` outside the range.
    pub fn to_f64(self) -> f64 {
        ldexp(self.mant, self.exp)
    }

    /// Natural logarithm of `|self|`.
    pub fn ln_abs(self) -> f64 {
        self.mant.abs().ln() + self.exp as f64 * std::f64::consts::LN_2
    }

    pub fn abs(self) -> Self {
        ExtFloat {
            mant: self.mant.abs(),
            exp: self.exp,
        }
    }

    pub fn sqrt(self) -> Self {
        if self.exp % 2 == 0 {
            Self::from_parts(self.mant.sqrt(), self.exp / 2)
        } else {
            Self::from_parts((2.0 * self.mant).sqrt(), (self.exp - 1) / 2)
        }
    }

    pub fn recip(self) -> Self {
        Self::ONE / self
    }

    pub fn scale(self, x: f64) -> Self {
        self * ExtFloat::new(x)
    }

    pub fn powi(self, n: u32) -> Self {
        let mut acc = Self::ONE;
        let mut base = self;
        let mut k = n;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            k >>= 1;
        }
        acc
    }
}

impl From<f64> for ExtFloat {
    fn from(x: f64) -> Self {
        ExtFloat::new(x)
    }
}

impl Mul for ExtFloat {
    type Output = ExtFloat;
    fn mul(self, rhs: ExtFloat) -> ExtFloat {
        ExtFloat::from_parts(self.mant * rhs.mant, self.exp + rhs.exp)
    }
}

impl Div for ExtFloat {
    type Output = ExtFloat;
    fn div(self, rhs: ExtFloat) -> ExtFloat {
        ExtFloat::from_parts(self.mant / rhs.mant, self.exp - rhs.exp)
    }
}

impl Add for ExtFloat {
    type Output = ExtFloat;
    fn add(self, rhs: ExtFloat) -> ExtFloat {
        if self.is_zero() {
            return rhs;
        }
        if rhs.is_zero() {
            return self;
        }
        let (big, small) = if self.exp >= rhs.exp {
            (self, rhs)
        } else {
            (rhs, self)
        };
        let shift = small.exp - big.exp;
        if shift < -(MANT_BITS as i64 + 4) {
            return big;
        }
        ExtFloat::from_parts(big.mant + ldexp(small.mant, shift), big.exp)
    }
}

impl Neg for ExtFloat {
    type Output = ExtFloat;
    fn neg(self) -> ExtFloat {
        ExtFloat {
            mant: -self.mant,
            exp: self.exp,
        }
    }
}

impl Sub for ExtFloat {
    type Output = ExtFloat;
    fn sub(self, rhs: ExtFloat) -> ExtFloat {
        self + (-rhs)
    }
}

impl PartialOrd for ExtFloat {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        (*self - *other).mant.partial_cmp(&0.0)
    }
}

impl fmt::Debug for ExtFloat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let l10 = self.ln_abs() / std::f64::consts::LN_10;
        let e10 = l10.floor();
        let m10 = 10f64.powf(l10 - e10) * self.mant.signum();
        write!(f, "{m10:.15}e{e10}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frexp_roundtrip() {
        for &x in &[1.0, -3.5, 1e-310, 7.25e300, 0.3] {
            let (m, e) = frexp(x);
            assert!((0.5..1.0).contains(&m.abs()));
            assert_eq!(ldexp(m, e), x);
        }
    }

    #[test]
    fn products_beyond_f64_range() {
        let big = ExtFloat::exp(1200.0);
        let small = ExtFloat::exp(-1199.0);
        assert!(big.to_f64().is_infinite());
        assert_eq!(small.to_f64(), 0.0);
        let p = (big * small).to_f64();
        assert!((p - std::f64::consts::E).abs() < 1e-12);
    }

    #[test]
    fn add_and_compare() {
        let a = ExtFloat::new(1.5);
        let b = ExtFloat::new(2.25);
        assert_eq!((a + b).to_f64(), 3.75);
        assert_eq!((a - b).to_f64(), -0.75);
        assert!(a < b);
        assert_eq!((ExtFloat::new(9.0).sqrt()).to_f64(), 3.0);
        assert_eq!((ExtFloat::new(8.0).sqrt()).to_f64(), 8f64.sqrt());
        assert_eq!(ExtFloat::new(3.0).powi(5).to_f64(), 243.0);
    }
}

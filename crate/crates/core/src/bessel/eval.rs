//! Evaluation kernels. Everything here works on nonnegative orders and
//! returns exponentially scaled values `e^{-t} I_k(t)` and `e^{t} K_k(t)`.

use crate::ext::ExtFloat;

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Power series is used for `t <= max(SERIES_CUTOFF, order)`.
pub(crate) const SERIES_CUTOFF: f64 = 20.0;

/// Below this argument K_0, K_1 come from their logarithmic series.
pub(crate) const K_SERIES_CUTOFF: f64 = 2.0;

const RESCALE_BITS: i64 = 600;
const RESCALE_UP: f64 = 4.149_515_568_880_993e180; // 2^600
const RESCALE_DOWN: f64 = 2.409_919_865_102_884_7e-181; // 2^-600

/// `(t/2)^nu / nu!` built by repeated multiplication so that large orders
/// neither overflow nor lose digits to a logarithm.
fn leading_term(nu: u32, t: f64) -> ExtFloat {
    let half = ExtFloat::new(0.5 * t);
    let mut acc = ExtFloat::ONE;
    for k in 1..=nu {
        acc = acc * half.scale(1.0 / k as f64);
    }
    acc
}

/// Unscaled `I_nu(t)` from the power series.
pub(crate) fn i_series(nu: u32, t: f64) -> ExtFloat {
    if t == 0.0 {
        return if nu == 0 { ExtFloat::ONE } else { ExtFloat::ZERO };
    }
    let q = 0.25 * t * t;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 1.0;
    loop {
        term *= q / (k * (nu as f64 + k));
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
        k += 1.0;
    }
    leading_term(nu, t).scale(sum)
}

/// Scaled `I_k(t)` for `k = lo..=hi` via Miller's backward recurrence,
/// normalised by the sum rule `e^{-t}(I_0 + 2 sum_k I_k) = 1`.
pub(crate) fn i_scaled_miller(lo: u32, hi: u32, t: f64) -> Vec<ExtFloat> {
    let start = hi as usize + 30 + (10.0 * t.sqrt()).ceil() as usize;
    let mut out = vec![ExtFloat::ZERO; (hi - lo + 1) as usize];
    let mut v_next = 0.0f64; // v_{k+1}
    let mut v = 1e-30f64; // v_k
    let mut offset: i64 = 0;
    let mut sum = ExtFloat::ZERO;
    let two_over_t = 2.0 / t;
    let mut k = start;
    loop {
        if (k as u32) >= lo && (k as u32) <= hi {
            out[k - lo as usize] = ExtFloat::from_parts(v, offset);
        }
        let weight = if k == 0 { 1.0 } else { 2.0 };
        sum = sum + ExtFloat::from_parts(weight * v, offset);
        if k == 0 {
            break;
        }
        let v_prev = v_next + (k as f64) * two_over_t * v;
        v_next = v;
        v = v_prev;
        if v.abs() > RESCALE_UP {
            v *= RESCALE_DOWN;
            v_next *= RESCALE_DOWN;
            offset += RESCALE_BITS;
        }
        k -= 1;
    }
    out.into_iter().map(|x| x / sum).collect()
}

/// Scaled `I_k(t)` for `k = lo..=hi`.
pub(crate) fn i_scaled_seq(lo: u32, hi: u32, t: f64) -> Vec<ExtFloat> {
    debug_assert!(lo <= hi);
    if t == 0.0 {
        return (lo..=hi)
            .map(|k| if k == 0 { ExtFloat::ONE } else { ExtFloat::ZERO })
            .collect();
    }
    if t > SERIES_CUTOFF.max(hi as f64) {
        return i_scaled_miller(lo, hi, t);
    }
    // Series at the two top orders, then the (stable) downward recurrence.
    let scale = ExtFloat::exp(-t);
    let top1 = i_series(hi + 1, t);
    let top = i_series(hi, t);
    let mut out = vec![ExtFloat::ZERO; (hi - lo + 1) as usize];
    let mut upper = top1;
    let mut cur = top;
    let mut k = hi;
    loop {
        if k >= lo {
            out[(k - lo) as usize] = cur * scale;
        }
        if k == lo {
            break;
        }
        let prev = upper + cur.scale(2.0 * k as f64 / t);
        upper = cur;
        cur = prev;
        k -= 1;
    }
    out
}

/// Unscaled `K_0(t), K_1(t)` from the logarithmic series, `0 < t <= 2`.
pub(crate) fn k01_series(t: f64) -> (f64, f64) {
    let q = 0.25 * t * t;
    let log_half = (0.5 * t).ln();
    // I_0, I_1 and the harmonic-number sums in one pass
    let mut i0 = 1.0;
    let mut i1_sum = 1.0;
    let mut k0_tail = 0.0;
    // psi(1) + psi(2) = -2 gamma + 1
    let mut k1_tail = 1.0 - 2.0 * EULER_GAMMA;
    let mut term0 = 1.0; // q^k / (k!)^2
    let mut term1 = 1.0; // q^k / (k! (k+1)!)
    let mut harmonic = 0.0; // H_k
    let mut k = 1.0;
    loop {
        term0 *= q / (k * k);
        term1 *= q / (k * (k + 1.0));
        harmonic += 1.0 / k;
        let h_next = harmonic + 1.0 / (k + 1.0);
        i0 += term0;
        i1_sum += term1;
        k0_tail += term0 * harmonic;
        k1_tail += term1 * (harmonic + h_next - 2.0 * EULER_GAMMA);
        if term0 * (1.0 + harmonic) < 1e-18 * (i0 + k0_tail.abs()) && term1 < 1e-18 {
            break;
        }
        k += 1.0;
    }
    let i1 = 0.5 * t * i1_sum;
    let k0 = -(log_half + EULER_GAMMA) * i0 + k0_tail;
    let k1 = 1.0 / t + log_half * i1 - 0.25 * t * k1_tail;
    (k0, k1)
}

/// Scaled `K_0(t), K_1(t)` for `t > 2` from Steed's continued fraction
/// (Temme's method with order zero).
pub(crate) fn k01_scaled_cf(t: f64) -> (f64, f64) {
    const MAX_ITER: usize = 100_000;
    let mut b = 2.0 * (1.0 + t);
    let mut d = 1.0 / b;
    let mut h = d;
    let mut delh = d;
    let mut q1 = 0.0;
    let mut q2 = 1.0;
    let a1 = 0.25;
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    for i in 2..MAX_ITER {
        let fi = i as f64;
        a -= 2.0 * (fi - 1.0);
        c = -a * c / fi;
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh *= b * d - 1.0;
        h += delh;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < 1e-17 {
            break;
        }
    }
    let h = a1 * h;
    let k0 = (std::f64::consts::PI / (2.0 * t)).sqrt() / s;
    let k1 = k0 * (t + 0.5 - h) / t;
    (k0, k1)
}

/// Scaled `K_k(t)` for `k = 0..=hi` via upward recurrence, `t > 0`.
pub(crate) fn k_scaled_seq(hi: u32, t: f64) -> Vec<ExtFloat> {
    let (k0, k1) = if t <= K_SERIES_CUTOFF {
        let (k0, k1) = k01_series(t);
        let e = t.exp();
        (k0 * e, k1 * e)
    } else {
        k01_scaled_cf(t)
    };
    let mut out = Vec::with_capacity(hi as usize + 1);
    out.push(ExtFloat::new(k0));
    if hi == 0 {
        return out;
    }
    out.push(ExtFloat::new(k1));
    let mut prev = k0;
    let mut cur = k1;
    let mut offset: i64 = 0;
    for k in 1..hi {
        let next = prev + (2.0 * k as f64 / t) * cur;
        prev = cur;
        cur = next;
        if cur.abs() > RESCALE_UP {
            cur *= RESCALE_DOWN;
            prev *= RESCALE_DOWN;
            offset += RESCALE_BITS;
        }
        out.push(ExtFloat::from_parts(cur, offset));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k01_reference_values() {
        let (k0, k1) = k01_series(1.0);
        assert!((k0 - 0.421_024_438_240_708_34).abs() < 1e-15);
        assert!((k1 - 0.601_907_230_197_234_6).abs() < 1e-15);
        let (c0, c1) = k01_series(2.0);
        let (s0, s1) = k01_scaled_cf(2.0);
        let e = (-2.0f64).exp();
        assert!((s0 * e - c0).abs() < 1e-15 * c0, "{} {}", s0 * e, c0);
        assert!((s1 * e - c1).abs() < 1e-15 * c1, "{} {}", s1 * e, c1);
    }

    #[test]
    fn miller_matches_series_at_crossover() {
        let t = 20.5;
        let miller = i_scaled_miller(0, 5, t);
        for (k, m) in miller.iter().enumerate() {
            let s = i_series(k as u32, t) * ExtFloat::exp(-t);
            let rel = ((*m - s) / s).to_f64().abs();
            assert!(rel < 1e-14, "order {k}: rel {rel}");
        }
    }
}

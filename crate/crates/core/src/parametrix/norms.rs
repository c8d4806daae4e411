//! Hilbert-Schmidt norms and Schur-Young bounds for the blocks of `Q`.
//!
//! In the scaled variable `t = |m| r` the squared HS norms of the Bessel
//! families reduce to single integrals through the Lommel antiderivatives
//!
//! ```text
//! ∫ s K_b(s)^2 ds = (s²/2)(K_b² - K_{b-1}K_{b+1}),
//! ∫ s I_b(s)^2 ds = (s²/2)(I_b² - I_{b-1}I_{b+1}),
//! ```
//!
//! so `‖R‖² = |m|^{-2} ∫_0^{|m|} I_a² t (Ψ_b(|m|) - Ψ_b(t)) dt` and
//! `‖S‖² = |m|^{-2} ∫_0^{|m|} K_a² t Φ_b(t) dt`.

use super::engine::{Block, BlockSpec, Factor, FactorTable, Half, Layout, LayoutOptions};
use super::{block_specs, ParametrixError, Result, DEFAULT_GAUSS_POINTS};
use crate::bessel::{i_scaled_seq, k_scaled_seq};
use crate::dirac::ModeOrders;
use crate::ext::ExtFloat;
use crate::mode_space::{make_grid, RadialGrid, DEFAULT_NODE_COUNT};
use crate::quadrature::gauss_legendre;
use nalgebra::Matrix2;
use serde::Serialize;
use std::fmt;
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Family {
    R,
    S,
    T1,
    T2,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Family::R => "R",
            Family::S => "S",
            Family::T1 => "T1",
            Family::T2 => "T2",
        };
        f.write_str(s)
    }
}

/// One of the scalar integral operators making up `Q`.
///
/// `R_ij f(r) = |m| ∫_r^1 I_{n+i}(|m|r) K_{n+j}(|m|ρ) f(ρ) ρ dρ`,
/// `S_ij f(r) = |m| ∫_0^r K_{n+i}(|m|r) I_{n+j}(|m|ρ) f(ρ) ρ dρ`,
/// `T1 f(r) = ∫_r^1 r^n ρ^{-n-1} f(ρ) ρ dρ`, `T2 f(r) = ∫_0^r ρ^n r^{-n-1} f(ρ) ρ dρ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct IntegralOperatorSpec {
    pub family: Family,
    pub i: u8,
    pub j: u8,
    pub m: i32,
    pub n: i32,
}

impl IntegralOperatorSpec {
    pub fn new(family: Family, i: u8, j: u8, m: i32, n: i32) -> Result<Self> {
        let bad = |msg: &str| Err(ParametrixError::Invalid(format!("{family}{i}{j} at ({m},{n}): {msg}")));
        match family {
            Family::R | Family::S => {
                if m == 0 {
                    return bad("requires m != 0");
                }
                if i > 1 || j > 1 {
                    return bad("indices must be 0 or 1");
                }
            }
            Family::T1 | Family::T2 => {
                if m != 0 {
                    return bad("requires m = 0");
                }
                if n < 0 {
                    return bad("requires n >= 0");
                }
            }
        }
        Ok(IntegralOperatorSpec { family, i, j, m, n })
    }

    pub fn r(i: u8, j: u8, m: i32, n: i32) -> Result<Self> {
        Self::new(Family::R, i, j, m, n)
    }

    pub fn s(i: u8, j: u8, m: i32, n: i32) -> Result<Self> {
        Self::new(Family::S, i, j, m, n)
    }

    pub fn t1(n: i32) -> Result<Self> {
        Self::new(Family::T1, 0, 0, 0, n)
    }

    pub fn t2(n: i32) -> Result<Self> {
        Self::new(Family::T2, 0, 0, 0, n)
    }

    /// Orders `(|n+i|, |n+j|)`.
    pub fn orders(&self) -> (u32, u32) {
        (
            (self.n + self.i as i32).unsigned_abs(),
            (self.n + self.j as i32).unsigned_abs(),
        )
    }

    pub(crate) fn block_spec(&self) -> BlockSpec {
        match self.half() {
            (h, true) => BlockSpec { pre: Some(h), suf: None },
            (h, false) => BlockSpec { pre: None, suf: Some(h) },
        }
    }

    /// Kernel as a half block: `R`, `T1` integrate over `ρ > r`, `S`, `T2` over `ρ < r`.
    fn half(&self) -> (Half, bool) {
        let am = self.m.unsigned_abs() as f64;
        let (a, b) = self.orders();
        let lo = ModeOrders::new(self.n).lo;
        let slot = |k: u32| (k - lo) as usize;
        let n = self.n;
        match self.family {
            Family::R => (Half { coef: am, outer: Factor::I(slot(a)), inner: Factor::K(slot(b)) }, false),
            Family::S => (Half { coef: am, outer: Factor::K(slot(a)), inner: Factor::I(slot(b)) }, true),
            Family::T1 => (Half { coef: 1.0, outer: Factor::Pow(n), inner: Factor::Pow(-(n + 1)) }, false),
            Family::T2 => (Half { coef: 1.0, outer: Factor::Pow(-(n + 1)), inner: Factor::Pow(n) }, true),
        }
    }
}

const HS_GAUSS: usize = 16;
const HS_ZERO_LEVELS: usize = 50;

/// Quadrature on `[0, x]`: dyadic grading below `min(x, 1)`, then panels of
/// ratio at most 1.25 and width at most 0.5.
fn hs_rule(x: f64) -> (Vec<f64>, Vec<f64>) {
    let (gx, gw) = gauss_legendre(HS_GAUSS);
    let c = x.min(1.0);
    let mut cuts = vec![0.0];
    cuts.extend((0..HS_ZERO_LEVELS).rev().map(|k| c * 0.5f64.powi(k as i32 + 1)));
    let mut a = c;
    cuts.push(c);
    while a < x {
        let b = (a * 1.25).min(a + 0.5).min(x);
        let b = if x - b < 1e-3 * (b - a) { x } else { b };
        cuts.push(b);
        a = b;
    }
    let mut pts = Vec::with_capacity(cuts.len() * HS_GAUSS);
    let mut wts = Vec::with_capacity(cuts.len() * HS_GAUSS);
    for w in cuts.windows(2) {
        let (mid, half) = (0.5 * (w[0] + w[1]), 0.5 * (w[1] - w[0]));
        for (p, q) in gx.iter().zip(&gw) {
            pts.push(mid + half * p);
            wts.push(half * q);
        }
    }
    (pts, wts)
}

/// Scaled Bessel data on the HS rule for one `|m|`, shared by every order up
/// to `max_order`.
pub struct HsTable {
    x: f64,
    max_order: u32,
    t: Vec<f64>,
    w: Vec<f64>,
    i_s: Vec<Vec<ExtFloat>>,
    k_s: Vec<Vec<ExtFloat>>,
    /// `e^{2t} Ψ_b(t)`
    psi_s: Vec<Vec<ExtFloat>>,
    /// `e^{-2t} Φ_b(t)`
    phi_s: Vec<Vec<ExtFloat>>,
    psi_end: Vec<ExtFloat>,
}

fn lommel(t: f64, v: &[ExtFloat], b: usize) -> ExtFloat {
    let below = if b == 0 { v[1] } else { v[b - 1] };
    (v[b] * v[b] - below * v[b + 1]).scale(0.5 * t * t)
}

impl HsTable {
    pub fn new(m_abs: u32, max_order: u32) -> Result<Self> {
        if m_abs == 0 {
            return Err(ParametrixError::Invalid("HS table requires m != 0".into()));
        }
        let x = m_abs as f64;
        let (t, w) = hs_rule(x);
        let top = max_order + 1;
        let mut i_s = Vec::with_capacity(t.len());
        let mut k_s = Vec::with_capacity(t.len());
        let mut psi_s = Vec::with_capacity(t.len());
        let mut phi_s = Vec::with_capacity(t.len());
        for &tt in &t {
            let iv = i_scaled_seq(0, top, tt)?;
            let kv = k_scaled_seq(top, tt)?;
            psi_s.push((0..=max_order as usize).map(|b| lommel(tt, &kv, b)).collect());
            phi_s.push((0..=max_order as usize).map(|b| lommel(tt, &iv, b)).collect());
            i_s.push(iv);
            k_s.push(kv);
        }
        let kx = k_scaled_seq(top, x)?;
        let psi_end = (0..=max_order as usize).map(|b| lommel(x, &kx, b)).collect();
        Ok(HsTable {
            x,
            max_order,
            t,
            w,
            i_s,
            k_s,
            psi_s,
            phi_s,
            psi_end,
        })
    }

    pub fn max_order(&self) -> u32 {
        self.max_order
    }

    fn check(&self, a: u32, b: u32) -> Result<()> {
        if a.max(b) > self.max_order {
            return Err(ParametrixError::Invalid(format!(
                "order {} beyond table order {}",
                a.max(b),
                self.max_order
            )));
        }
        Ok(())
    }

    /// `‖R‖²` with `I` order `a` and `K` order `b`.
    pub fn r_norm_sq(&self, a: u32, b: u32) -> Result<f64> {
        self.check(a, b)?;
        let (a, b) = (a as usize, b as usize);
        let mut sum = 0.0;
        for (k, (&t, &w)) in self.t.iter().zip(&self.w).enumerate() {
            let tail = self.psi_end[b] * ExtFloat::exp(2.0 * (t - self.x)) - self.psi_s[k][b];
            let ia = self.i_s[k][a];
            sum += w * (ia * ia * tail).scale(t).to_f64();
        }
        Ok(sum / (self.x * self.x))
    }

    /// `‖S‖²` with `K` order `a` and `I` order `b`.
    pub fn s_norm_sq(&self, a: u32, b: u32) -> Result<f64> {
        self.check(a, b)?;
        let (a, b) = (a as usize, b as usize);
        let mut sum = 0.0;
        for (k, (&t, &w)) in self.t.iter().zip(&self.w).enumerate() {
            let ka = self.k_s[k][a];
            sum += w * (ka * ka * self.phi_s[k][b]).scale(t).to_f64();
        }
        Ok(sum / (self.x * self.x))
    }

    pub fn norm_sq(&self, spec: &IntegralOperatorSpec) -> Result<f64> {
        let (a, b) = spec.orders();
        match spec.family {
            Family::R => self.r_norm_sq(a, b),
            Family::S => self.s_norm_sq(a, b),
            _ => Err(ParametrixError::Invalid("T families have no Bessel table".into())),
        }
    }
}

/// `∫_0^1 ∫_0^x (u/x)^{2n+1} du dx`, the common squared HS norm of `T1` and `T2`.
fn t_norm_sq(n: u32) -> f64 {
    let (ox, ow) = gauss_legendre(8);
    let (ix, iw) = gauss_legendre(n as usize + 2);
    let mut sum = 0.0;
    for (p, q) in ox.iter().zip(&ow) {
        let x = 0.5 * (p + 1.0);
        let inner: f64 = ix
            .iter()
            .zip(&iw)
            .map(|(u, v)| {
                let y = 0.5 * x * (u + 1.0);
                0.5 * x * v * (y / x).powi(2 * n as i32 + 1)
            })
            .sum();
        sum += 0.5 * q * inner;
    }
    sum
}

pub fn hs_norm_sq(spec: &IntegralOperatorSpec) -> Result<f64> {
    match spec.family {
        Family::T1 | Family::T2 => Ok(t_norm_sq(spec.n as u32)),
        _ => {
            let (a, b) = spec.orders();
            HsTable::new(spec.m.unsigned_abs(), a.max(b))?.norm_sq(spec)
        }
    }
}

/// Grid nodes with three extra points in each gap.
fn sup_points(grid: &RadialGrid) -> Vec<f64> {
    let x = grid.nodes();
    let mut out = Vec::with_capacity(4 * x.len());
    let mut prev = 0.0;
    for &r in x {
        for k in 1..4 {
            let p = prev + (r - prev) * k as f64 / 4.0;
            if p > 0.0 {
                out.push(p);
            }
        }
        out.push(r);
        prev = r;
    }
    out
}

/// Row and column sups of the kernels at one mode, by product integration
/// of the constant density.
pub struct SupEvaluator {
    layout: Layout,
    at_eval: FactorTable,
    at_pts: FactorTable,
}

impl SupEvaluator {
    pub fn new(grid: &RadialGrid, m: i32, n: i32) -> Result<Self> {
        let eval = sup_points(grid);
        let layout = Layout::new(&eval, &LayoutOptions::for_mode(m, n, DEFAULT_GAUSS_POINTS));
        let scale = m.unsigned_abs() as f64;
        let lo = ModeOrders::new(n).lo;
        let at_eval = FactorTable::new(&layout.eval, scale, lo)?;
        let at_pts = FactorTable::new(&layout.pts, scale, lo)?;
        Ok(SupEvaluator { layout, at_eval, at_pts })
    }

    fn sup_of(&self, half: Half, prefix: bool) -> f64 {
        let half = Half { coef: half.coef.abs(), ..half };
        let spec = if prefix {
            BlockSpec { pre: Some(half), suf: None }
        } else {
            BlockSpec { pre: None, suf: Some(half) }
        };
        let block = Block::compile(&self.layout, &self.at_eval, &self.at_pts, &spec);
        let ne = self.layout.eval.len();
        let mut out = vec![0.0; ne];
        let mut dout = vec![0.0; ne];
        block.apply(&self.layout, &vec![1.0; self.layout.len()], &vec![1.0; ne], &mut out, &mut dout);
        out.into_iter().fold(0.0, f64::max)
    }

    /// `(sup_r ∫ |k(r,ρ)| ρ dρ, sup_ρ ∫ |k(r,ρ)| r dr)` for a half kernel.
    pub fn factors(&self, half: Half, prefix: bool) -> (f64, f64) {
        let transposed = Half { outer: half.inner, inner: half.outer, ..half };
        (self.sup_of(half, prefix), self.sup_of(transposed, !prefix))
    }

    pub fn spec_bound(&self, spec: &IntegralOperatorSpec) -> f64 {
        let (half, prefix) = spec.half();
        self.bound(half, prefix)
    }

    pub fn bound(&self, half: Half, prefix: bool) -> f64 {
        let (a, b) = self.factors(half, prefix);
        (a * b).sqrt()
    }
}

fn default_grid() -> Result<Arc<RadialGrid>> {
    Ok(make_grid(DEFAULT_NODE_COUNT)?)
}

/// `(I1, I2)` for the dominant pair `K_hi(s) I_lo(t)`, `hi = max(|n|, |n+1|)`:
/// `I1 = |m|^{-1} sup_s ∫_0^s K_hi(s) I_lo(t) t dt`,
/// `I2 = |m|^{-1} sup_t ∫_t^{|m|} K_hi(s) I_lo(t) s ds`.
pub fn sup_integrals(m: i32, n: i32) -> Result<(f64, f64)> {
    sup_integrals_on(&*default_grid()?, m, n)
}

pub fn sup_integrals_on(grid: &RadialGrid, m: i32, n: i32) -> Result<(f64, f64)> {
    if m == 0 {
        return Err(ParametrixError::Invalid("sup integrals require m != 0".into()));
    }
    let am = m.unsigned_abs() as f64;
    let ev = SupEvaluator::new(grid, m, n)?;
    let s_type = Half { coef: am, outer: Factor::K(1), inner: Factor::I(0) };
    Ok(ev.factors(s_type, true))
}

/// Schur-Young bound `sqrt(row sup · column sup)` for a single operator.
pub fn schur_young_bound(spec: &IntegralOperatorSpec) -> Result<f64> {
    schur_young_bound_on(&*default_grid()?, spec)
}

pub fn schur_young_bound_on(grid: &RadialGrid, spec: &IntegralOperatorSpec) -> Result<f64> {
    Ok(SupEvaluator::new(grid, spec.m, spec.n)?.spec_bound(spec))
}

/// Bound on `‖Q_{m,n}‖`: the spectral norm of the 2x2 matrix of entry
/// bounds, each entry bounded by the sum of its half-kernel bounds.
pub fn block_bound(m: i32, n: i32) -> Result<f64> {
    block_bound_on(&*default_grid()?, m, n)
}

pub fn block_bound_on(grid: &RadialGrid, m: i32, n: i32) -> Result<f64> {
    let ev = SupEvaluator::new(grid, m, n)?;
    let specs = block_specs(m, n);
    let entry = |s: &BlockSpec| {
        s.pre.map_or(0.0, |h| ev.bound(h, true)) + s.suf.map_or(0.0, |h| ev.bound(h, false))
    };
    let b = Matrix2::new(
        entry(&specs[0][0]),
        entry(&specs[0][1]),
        entry(&specs[1][0]),
        entry(&specs[1][1]),
    );
    Ok(b.singular_values().max())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bessel::{bessel_i, bessel_k};

    /// Tensor Gauss on the triangle `0 < t < s < X` in the original double integral.
    fn r_oracle(x: f64, a: u32, b: u32, panels: usize) -> f64 {
        let (gx, gw) = gauss_legendre(20);
        let mut sum = 0.0;
        let mut cuts: Vec<f64> = (0..=40).rev().map(|k| x * 0.5f64.powi(k)).collect();
        cuts.insert(0, 0.0);
        let cuts: Vec<f64> = cuts
            .windows(2)
            .flat_map(|w| (0..panels).map(move |k| w[0] + (w[1] - w[0]) * k as f64 / panels as f64))
            .chain([x])
            .collect();
        for c in cuts.windows(2) {
            let h = c[1] - c[0];
            for (p, q) in gx.iter().zip(&gw) {
                let t = c[0] + h * 0.5 * (p + 1.0);
                let it = bessel_i(a as i32, t).unwrap();
                let wt = 0.5 * h * q;
                // inner over s in [t, X], geometric pieces
                let q = (x / t).powf(1.0 / (4 * panels) as f64);
                let mut inner = 0.0;
                let mut lo = t;
                for _ in 0..4 * panels {
                    let hi = lo * q;
                    for (u, v) in gx.iter().zip(&gw) {
                        let s = lo + (hi - lo) * 0.5 * (u + 1.0);
                        let ks = bessel_k(b as i32, s).unwrap();
                        inner += 0.5 * (hi - lo) * v * ks * ks * s;
                    }
                    lo = hi;
                }
                sum += wt * it * it * t * inner;
            }
        }
        sum / (x * x)
    }

    #[test]
    fn t_norms_closed_form() {
        for n in [0, 1, 7, 50] {
            let v = hs_norm_sq(&IntegralOperatorSpec::t1(n).unwrap()).unwrap();
            let exact = 1.0 / (4.0 * (n as f64 + 1.0));
            assert!((v - exact).abs() < 1e-14 * exact);
        }
    }

    #[test]
    fn r_norm_matches_tensor_oracle() {
        for &(m, a, b) in &[(1u32, 0u32, 1u32), (3, 2, 3), (6, 4, 3), (10, 1, 1)] {
            let table = HsTable::new(m, 5).unwrap();
            let got = table.r_norm_sq(a, b).unwrap();
            let want = r_oracle(m as f64, a, b, 2);
            assert!((got - want).abs() < 1e-9 * want, "{m} {a} {b}: {got} vs {want}");
        }
    }

    #[test]
    fn r01_equals_s10() {
        for &(m, n) in &[(1, 0), (4, 3), (17, -5), (-40, 40)] {
            let r = hs_norm_sq(&IntegralOperatorSpec::r(0, 1, m, n).unwrap()).unwrap();
            let s = hs_norm_sq(&IntegralOperatorSpec::s(1, 0, m, n).unwrap()).unwrap();
            assert!((r - s).abs() < 1e-11 * r, "({m},{n}): {r} vs {s}");
        }
    }

    #[test]
    fn sup_integral_limit_at_large_m() {
        let (i1, _) = sup_integrals(10, 0).unwrap();
        assert!(i1 <= 0.2);
    }

    #[test]
    fn t_schur_factors() {
        let grid = make_grid(64).unwrap();
        let ev = SupEvaluator::new(&grid, 0, 3).unwrap();
        let (half, prefix) = IntegralOperatorSpec::t2(3).unwrap().half();
        let (row, col) = ev.factors(half, prefix);
        assert!((row - 1.0 / 5.0).abs() < 1e-12);
        let star = 3f64.powf(-0.5);
        assert!(col <= star / 3.0 + 1e-14 && col > star / 3.0 - 1e-4);
    }
}

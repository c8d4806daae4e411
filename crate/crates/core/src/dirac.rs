//! The Dirac operator mode by mode: application, homogeneous solutions, the
//! boundary functional that cuts out the domain, and exterior extension.

use crate::bessel::{AdjacentScaled, BesselError};
use crate::ext::ExtFloat;
use crate::mode_space::{
    ModeIndex, ModeSpaceError, RadialGrid, RadialProfile, SpinorField, SpinorMode,
};
use num_complex::Complex64;
use std::sync::Arc;
use thiserror::Error;

/// Default absolute threshold on the boundary functional.
pub const DOMAIN_TOL: f64 = 1e-10;

#[derive(Debug, Error, PartialEq)]
pub enum DiracError {
    #[error(transparent)]
    Bessel(#[from] BesselError),
    #[error(transparent)]
    ModeSpace(#[from] ModeSpaceError),
    #[error("exterior coefficients need m != 0")]
    ZeroM,
    #[error("exterior solutions are evaluated for r >= 1, got {0}")]
    Interior(f64),
}

pub type Result<T> = std::result::Result<T, DiracError>;

/// Coefficients of `I` (growing, `a`) and `K` (decaying, `b`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExteriorCoefficients {
    pub a: Complex64,
    pub b: Complex64,
}

/// Radial derivative source for [`apply_dirac_mode`].
#[derive(Debug, Clone, Copy)]
pub enum Derivatives<'a> {
    /// Grid differentiation matrix.
    Matrix,
    /// Caller-supplied `(f', g')` in the slots of a mode.
    Analytic(&'a SpinorMode),
}

/// `(p, q)` with `p = m f + g' - (n/r) g` and `q = -f' - ((n+1)/r) f - m g`,
/// returned in the `(f, g)` slots.
pub fn apply_dirac_mode(mode: &SpinorMode, derivs: Derivatives<'_>) -> SpinorMode {
    let ModeIndex { m, n } = mode.index();
    let (df, dg) = match derivs {
        Derivatives::Matrix => (mode.f().derivative(), mode.g().derivative()),
        Derivatives::Analytic(d) => (d.f().clone(), d.g().clone()),
    };
    let r = mode.grid().nodes().to_vec();
    let (mf, nf) = (m as f64, n as f64);
    let f = mode.f().values();
    let g = mode.g().values();
    let p = mode
        .f()
        .map(|i, fi| fi * mf + dg.values()[i] - g[i] * (nf / r[i]));
    let q = mode
        .g()
        .map(|i, gi| -df.values()[i] - f[i] * ((nf + 1.0) / r[i]) - gi * mf);
    SpinorMode::new(mode.index(), p, q).expect("shared grid")
}

pub fn apply_dirac(field: &SpinorField) -> SpinorField {
    field.map_modes(|m| apply_dirac_mode(m, Derivatives::Matrix))
}

/// Bessel data for one `(m, n)`: orders `|n|` and `|n+1|` are adjacent.
#[derive(Debug, Clone, Copy)]
pub(crate) struct ModeOrders {
    pub lo: u32,
    /// slot of order `|n|` within the adjacent pair
    pub sn: usize,
    /// slot of order `|n+1|`
    pub sn1: usize,
}

impl ModeOrders {
    pub fn new(n: i32) -> Self {
        let (a, b) = (n.unsigned_abs(), (n + 1).unsigned_abs());
        let lo = a.min(b);
        ModeOrders {
            lo,
            sn: (a - lo) as usize,
            sn1: (b - lo) as usize,
        }
    }
}

/// Unscaled `I`, `K` at both orders and their `t`-derivatives.
#[derive(Debug, Clone, Copy)]
pub(crate) struct BesselPoint {
    pub i: [ExtFloat; 2],
    pub k: [ExtFloat; 2],
    pub di: [ExtFloat; 2],
    pub dk: [ExtFloat; 2],
}

impl BesselPoint {
    pub fn new(lo: u32, t: f64) -> Result<Self> {
        let s = AdjacentScaled::new(lo, t)?;
        let (up, down) = (ExtFloat::exp(t), ExtFloat::exp(-t));
        let i = [s.i[0] * up, s.i[1] * up];
        let k = [s.k[0] * down, s.k[1] * down];
        let (a, b) = (lo as f64 / t, (lo as f64 + 1.0) / t);
        let di = [i[1] + i[0].scale(a), i[0] - i[1].scale(b)];
        let dk = [k[0].scale(a) - k[1], -k[0] - k[1].scale(b)];
        Ok(BesselPoint { i, k, di, dk })
    }
}

fn cx(v: ExtFloat) -> Complex64 {
    Complex64::new(v.to_f64(), 0.0)
}

fn sign(m: i32) -> f64 {
    if m < 0 {
        -1.0
    } else {
        1.0
    }
}

/// Values and `r`-derivatives of the closed-form homogeneous solution at `r`.
pub fn homogeneous_point(
    m: i32,
    n: i32,
    a: Complex64,
    b: Complex64,
    r: f64,
) -> Result<[Complex64; 4]> {
    if m == 0 {
        let p = -(n as f64 + 1.0);
        let (rf, rg) = (r.powf(p), r.powi(n));
        let f = a * rf;
        let g = b * rg;
        let df = a * (p * rf / r);
        let dg = b * (n as f64 * rg / r);
        return Ok([f, g, df, dg]);
    }
    let o = ModeOrders::new(n);
    let am = m.unsigned_abs() as f64;
    let bp = BesselPoint::new(o.lo, am * r)?;
    let s = sign(m);
    let f = (-a * cx(bp.i[o.sn1]) + b * cx(bp.k[o.sn1])) * s;
    let g = a * cx(bp.i[o.sn]) + b * cx(bp.k[o.sn]);
    let df = (-a * cx(bp.di[o.sn1]) + b * cx(bp.dk[o.sn1])) * (s * am);
    let dg = (a * cx(bp.di[o.sn]) + b * cx(bp.dk[o.sn])) * am;
    Ok([f, g, df, dg])
}

fn homogeneous_parts(
    grid: &Arc<RadialGrid>,
    m: i32,
    n: i32,
    a: Complex64,
    b: Complex64,
) -> Result<(SpinorMode, SpinorMode)> {
    let pts: Vec<[Complex64; 4]> = grid
        .nodes()
        .iter()
        .map(|&r| homogeneous_point(m, n, a, b, r))
        .collect::<Result<_>>()?;
    let col = |k: usize| RadialProfile::new(grid.clone(), pts.iter().map(|p| p[k]).collect());
    let idx = ModeIndex::new(m, n);
    Ok((
        SpinorMode::new(idx, col(0)?, col(1)?)?,
        SpinorMode::new(idx, col(2)?, col(3)?)?,
    ))
}

/// Sampled kernel element of `D`; `b != 0` is singular at `r = 0`.
pub fn homogeneous_solution(
    grid: &Arc<RadialGrid>,
    m: i32,
    n: i32,
    a: Complex64,
    b: Complex64,
) -> Result<SpinorMode> {
    Ok(homogeneous_parts(grid, m, n, a, b)?.0)
}

/// Homogeneous solution together with its exact radial derivative.
pub fn homogeneous_with_derivative(
    grid: &Arc<RadialGrid>,
    m: i32,
    n: i32,
    a: Complex64,
    b: Complex64,
) -> Result<(SpinorMode, SpinorMode)> {
    homogeneous_parts(grid, m, n, a, b)
}

/// Homogeneous solution regular at `r = 0` whose boundary functional is 1.
pub fn regular_solution(grid: &Arc<RadialGrid>, m: i32, n: i32) -> Result<(SpinorMode, SpinorMode)> {
    let (one, zero) = (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
    match (m, n >= 0) {
        (0, true) => homogeneous_parts(grid, 0, n, zero, one),
        (0, false) => homogeneous_parts(grid, 0, n, one, zero),
        _ => homogeneous_parts(grid, m, n, one, zero),
    }
}

/// `|m| K_{n+1}(|m|)` and `m K_n(|m|)` in extended range.
fn boundary_weights(m: i32, n: i32) -> Result<(ExtFloat, ExtFloat)> {
    let am = m.unsigned_abs() as f64;
    let o = ModeOrders::new(n);
    let s = AdjacentScaled::new(o.lo, am)?;
    let down = ExtFloat::exp(-am);
    Ok((
        (s.k[o.sn1] * down).scale(am),
        (s.k[o.sn] * down).scale(m as f64),
    ))
}

/// Boundary functional from traces:
/// `|m| K_{n+1}(|m|) g(1) - m K_n(|m|) f(1)` for `m != 0`; for `m = 0`
/// `g(1)` when `n >= 0` and `f(1)` when `n < 0`.
pub fn boundary_functional_traces(m: i32, n: i32, f1: Complex64, g1: Complex64) -> Result<Complex64> {
    if m == 0 {
        return Ok(if n >= 0 { g1 } else { f1 });
    }
    let (wg, wf) = boundary_weights(m, n)?;
    Ok(g1 * wg.to_f64() - f1 * wf.to_f64())
}

pub fn boundary_functional(mode: &SpinorMode) -> Result<Complex64> {
    let ModeIndex { m, n } = mode.index();
    boundary_functional_traces(m, n, mode.f().trace(), mode.g().trace())
}

/// `|β(F)| / ((|w_g| + |w_f|) ‖F‖)` where `w_g`, `w_f` are the weights of
/// the traces in the functional; invariant under rescaling of `F` and of
/// the weights.
pub fn relative_boundary_functional(mode: &SpinorMode) -> Result<f64> {
    let ModeIndex { m, n } = mode.index();
    let norm = mode.norm_sq().sqrt();
    if norm == 0.0 {
        return Ok(0.0);
    }
    let (ug, uf) = if m == 0 {
        if n >= 0 { (1.0, 0.0) } else { (0.0, 1.0) }
    } else {
        let (wg, wf) = boundary_weights(m, n)?;
        let total = wg.abs() + wf.abs();
        ((wg / total).to_f64(), (wf / total).to_f64())
    };
    Ok((mode.g().trace() * ug - mode.f().trace() * uf).norm() / norm)
}

pub fn in_domain(mode: &SpinorMode, tol: f64) -> Result<bool> {
    Ok(relative_boundary_functional(mode)? <= tol)
}

/// Solve the matching conditions at `r = 1` for `(A, B)`.
pub fn exterior_coefficients(
    m: i32,
    n: i32,
    g1: Complex64,
    f1: Complex64,
) -> Result<ExteriorCoefficients> {
    if m == 0 {
        return Err(DiracError::ZeroM);
    }
    let am = m.unsigned_abs() as f64;
    let mf = m as f64;
    let o = ModeOrders::new(n);
    let bp = BesselPoint::new(o.lo, am)?;
    let a = g1 * (am * bp.k[o.sn1].to_f64()) - f1 * (mf * bp.k[o.sn].to_f64());
    let b = g1 * (am * bp.i[o.sn1].to_f64()) + f1 * (mf * bp.i[o.sn].to_f64());
    Ok(ExteriorCoefficients { a, b })
}

/// `(f, g)` of the closed-form solution at `r >= 1`.
pub fn evaluate_exterior(
    m: i32,
    n: i32,
    coeffs: ExteriorCoefficients,
    r: f64,
) -> Result<(Complex64, Complex64)> {
    if !(r >= 1.0) {
        return Err(DiracError::Interior(r));
    }
    let v = homogeneous_point(m, n, coeffs.a, coeffs.b, r)?;
    Ok((v[0], v[1]))
}

/// `⟨DG, F⟩ - ⟨G, DF⟩` from traces at `r = 1`, with `D G = (p, q)` and
/// inner products conjugate-linear in the first slot: per mode
/// `conj(q(1)) f(1) - conj(p(1)) g(1)` where `(p, q)` are the slots of `G`.
pub fn greens_boundary_pairing(f_field: &SpinorField, g_field: &SpinorField) -> Complex64 {
    f_field
        .modes()
        .filter_map(|fm| {
            g_field.get(fm.index()).map(|gm| {
                gm.g().trace().conj() * fm.f().trace() - gm.f().trace().conj() * fm.g().trace()
            })
        })
        .sum()
}

/// `⟨DG, F⟩ - ⟨G, DF⟩` by full radial quadrature with matrix derivatives.
pub fn greens_volume_pairing(f_field: &SpinorField, g_field: &SpinorField) -> Complex64 {
    let df = apply_dirac(f_field);
    let dg = apply_dirac(g_field);
    dg.inner(f_field) - g_field.inner(&df)
}

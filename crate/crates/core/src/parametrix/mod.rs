//! The explicit inverse `Q` of `D`.
//!
//! For `m != 0` each mode of `Q` is a 2x2 block of Volterra-split operators
//! with kernels `|m| I_a(|m| r) K_b(|m| ρ)` and `|m| K_a(|m| r) I_b(|m| ρ)`;
//! for `m = 0` it is built from the power kernels `T1`, `T2`.

pub mod engine;
pub mod norms;
pub mod spectrum;

use crate::bessel::BesselError;
use crate::dirac::{DiracError, ModeOrders};
use crate::mode_space::{ModeIndex, ModeSpaceError, RadialGrid, RadialProfile, SpinorField, SpinorMode};
use engine::{Block, BlockSpec, Factor, FactorTable, Half, Layout, LayoutOptions};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use std::sync::Arc;
use thiserror::Error;

pub use engine::DEFAULT_GAUSS_POINTS;
pub use norms::{Family, IntegralOperatorSpec};

#[derive(Debug, Error, PartialEq)]
pub enum ParametrixError {
    #[error(transparent)]
    Bessel(#[from] BesselError),
    #[error(transparent)]
    ModeSpace(#[from] ModeSpaceError),
    #[error(transparent)]
    Dirac(#[from] DiracError),
    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, ParametrixError>;

/// Block kernels of `Q` at `(m, n)`, indexed `[row][col]` with rows `(f, g)`
/// and columns `(p, q)`.
pub(crate) fn block_specs(m: i32, n: i32) -> [[BlockSpec; 2]; 2] {
    let none = BlockSpec::default();
    let half = |coef, outer, inner| Some(Half { coef, outer, inner });
    if m == 0 {
        let (up, down) = (Factor::Pow(n), Factor::Pow(-(n + 1)));
        let (fq, gp) = if n >= 0 {
            (
                BlockSpec { pre: half(-1.0, down, up), suf: None },
                BlockSpec { pre: None, suf: half(-1.0, up, down) },
            )
        } else {
            (
                BlockSpec { pre: None, suf: half(1.0, down, up) },
                BlockSpec { pre: half(1.0, up, down), suf: None },
            )
        };
        return [[none, fq], [gp, none]];
    }
    let o = ModeOrders::new(n);
    let am = m.unsigned_abs() as f64;
    let sm = m.signum() as f64 * am;
    let (i_n, i_n1) = (Factor::I(o.sn), Factor::I(o.sn1));
    let (k_n, k_n1) = (Factor::K(o.sn), Factor::K(o.sn1));
    [
        [
            BlockSpec { pre: half(sm, k_n1, i_n1), suf: half(sm, i_n1, k_n1) },
            BlockSpec { pre: half(-am, k_n1, i_n), suf: half(am, i_n1, k_n) },
        ],
        [
            BlockSpec { pre: half(am, k_n, i_n1), suf: half(-am, i_n, k_n1) },
            BlockSpec { pre: half(-sm, k_n, i_n), suf: half(-sm, i_n, k_n) },
        ],
    ]
}

/// `Q` restricted to one mode, compiled on a radial grid.
pub struct ModeOperator {
    index: ModeIndex,
    grid: Arc<RadialGrid>,
    layout: Layout,
    /// grid nodes -> panel points
    interp: DMatrix<f64>,
    blocks: [[Option<Block>; 2]; 2],
}

impl ModeOperator {
    pub fn new(grid: &Arc<RadialGrid>, m: i32, n: i32) -> Result<Self> {
        Self::with_gauss_points(grid, m, n, DEFAULT_GAUSS_POINTS)
    }

    pub fn with_gauss_points(grid: &Arc<RadialGrid>, m: i32, n: i32, gauss_points: usize) -> Result<Self> {
        Self::from_specs(grid, m, n, &block_specs(m, n), gauss_points)
    }

    /// A single scalar operator placed in the `(f, p)` slot.
    pub fn single(grid: &Arc<RadialGrid>, spec: &IntegralOperatorSpec) -> Result<Self> {
        let none = BlockSpec::default();
        let specs = [[spec.block_spec(), none], [none, none]];
        Self::from_specs(grid, spec.m, spec.n, &specs, DEFAULT_GAUSS_POINTS)
    }

    fn from_specs(
        grid: &Arc<RadialGrid>,
        m: i32,
        n: i32,
        specs: &[[BlockSpec; 2]; 2],
        gauss_points: usize,
    ) -> Result<Self> {
        let opts = LayoutOptions::for_mode(m, n, gauss_points);
        let layout = Layout::new(grid.nodes(), &opts);
        let interp = grid.interpolation_matrix(&layout.pts);
        let scale = m.unsigned_abs() as f64;
        let lo = ModeOrders::new(n).lo;
        let at_eval = FactorTable::new(&layout.eval, scale, lo)?;
        let at_pts = FactorTable::new(&layout.pts, scale, lo)?;
        let compile = |s: &BlockSpec| {
            (s.pre.is_some() || s.suf.is_some()).then(|| Block::compile(&layout, &at_eval, &at_pts, s))
        };
        let blocks = [
            [compile(&specs[0][0]), compile(&specs[0][1])],
            [compile(&specs[1][0]), compile(&specs[1][1])],
        ];
        Ok(ModeOperator {
            index: ModeIndex::new(m, n),
            grid: grid.clone(),
            layout,
            interp,
            blocks,
        })
    }

    pub fn index(&self) -> ModeIndex {
        self.index
    }

    pub fn panel_points(&self) -> usize {
        self.layout.len()
    }

    fn to_points(&self, v: &[Complex64]) -> Vec<Complex64> {
        let e = &self.interp;
        (0..e.nrows())
            .map(|l| (0..e.ncols()).map(|j| v[j] * e[(l, j)]).sum())
            .collect()
    }

    /// `(Q G, (Q G)')` for `G = (p, q)` stored in the `(f, g)` slots.
    pub fn apply(&self, rhs: &SpinorMode) -> (SpinorMode, SpinorMode) {
        let n = self.grid.len();
        let zero = Complex64::new(0.0, 0.0);
        let dens = [rhs.f().values(), rhs.g().values()];
        let pts = [self.to_points(dens[0]), self.to_points(dens[1])];
        let mut out = [vec![zero; n], vec![zero; n]];
        let mut dout = [vec![zero; n], vec![zero; n]];
        for row in 0..2 {
            for col in 0..2 {
                if let Some(b) = &self.blocks[row][col] {
                    let (o, d) = (&mut out[row], &mut dout[row]);
                    b.apply(&self.layout, &pts[col], dens[col], o, d);
                }
            }
        }
        let [f, g] = out;
        let [df, dg] = dout;
        let prof = |v| RadialProfile::new(self.grid.clone(), v).expect("finite");
        (
            SpinorMode::new(self.index, prof(f), prof(g)).expect("shared grid"),
            SpinorMode::new(self.index, prof(df), prof(dg)).expect("shared grid"),
        )
    }

    /// Nodal matrix of the block: rows `(f; g)`, columns `(p; q)`.
    pub fn matrix(&self) -> DMatrix<f64> {
        self.nodal(2)
    }

    /// Nodal matrix of the `(f, p)` slot alone.
    pub fn scalar_matrix(&self) -> DMatrix<f64> {
        self.nodal(1)
    }

    fn nodal(&self, comps: usize) -> DMatrix<f64> {
        let n = self.grid.len();
        let mut mat = DMatrix::zeros(comps * n, comps * n);
        let mut unit = vec![0.0; n];
        let mut out = vec![0.0; n];
        let mut dout = vec![0.0; n];
        for j in 0..n {
            let col_pts: Vec<f64> = self.interp.column(j).iter().copied().collect();
            unit[j] = 1.0;
            for row in 0..comps {
                for col in 0..comps {
                    if let Some(b) = &self.blocks[row][col] {
                        out.iter_mut().for_each(|v| *v = 0.0);
                        b.apply(&self.layout, &col_pts, &unit, &mut out, &mut dout);
                        for i in 0..n {
                            mat[(row * n + i, col * n + j)] = out[i];
                        }
                    }
                }
            }
            unit[j] = 0.0;
        }
        mat
    }
}

/// `Q` on one mode: `(p, q) -> (f, g)`.
pub fn apply_q_mode(rhs: &SpinorMode) -> Result<SpinorMode> {
    Ok(apply_q_mode_with_derivative(rhs)?.0)
}

pub fn apply_q_mode_with_derivative(rhs: &SpinorMode) -> Result<(SpinorMode, SpinorMode)> {
    let ModeIndex { m, n } = rhs.index();
    Ok(ModeOperator::new(rhs.grid(), m, n)?.apply(rhs))
}

/// Mode-wise `Q` over a field.
pub fn apply_q(field: &SpinorField) -> Result<SpinorField> {
    let (big_m, big_n) = field.truncation();
    let modes: Vec<&SpinorMode> = field.modes().collect();
    let out: Vec<SpinorMode> = modes
        .par_iter()
        .map(|m| apply_q_mode(m))
        .collect::<Result<_>>()?;
    Ok(SpinorField::from_modes(field.grid().clone(), big_m, big_n, out)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dirac::{apply_dirac_mode, boundary_functional, Derivatives};
    use crate::fields::{mode_rng, random_in_domain_mode, random_smooth_mode};
    use crate::mode_space::make_grid;

    #[test]
    fn m_zero_constant_q() {
        let grid = make_grid(32).unwrap();
        let idx = ModeIndex::new(0, 0);
        let q = RadialProfile::from_fn(grid.clone(), |_| Complex64::new(1.0, 0.0)).unwrap();
        let rhs = SpinorMode::new(idx, RadialProfile::zeros(grid.clone()), q).unwrap();
        let out = apply_q_mode(&rhs).unwrap();
        for (r, f) in grid.nodes().iter().zip(out.f().values()) {
            assert!((f.re + r / 2.0).abs() < 1e-14);
        }
        assert!(out.g().max_abs() == 0.0);
    }

    #[test]
    fn dq_and_qd_small_modes() {
        let grid = make_grid(48).unwrap();
        for &(m, n) in &[(1, 0), (-3, 2), (0, 3), (0, -4), (5, -6), (12, 9)] {
            let idx = ModeIndex::new(m, n);
            let g = random_smooth_mode(&mut mode_rng(3, idx, 0), &grid, idx, 5);
            let (f, df) = apply_q_mode_with_derivative(&g.mode).unwrap();
            let back = apply_dirac_mode(&f, Derivatives::Analytic(&df));
            let rel = (back.sub(&g.mode).norm_sq() / g.mode.norm_sq()).sqrt();
            assert!(rel < 1e-10, "DQ ({m},{n}): {rel}");
            assert!(boundary_functional(&f).unwrap().norm() < 1e-10);

            let fd = random_in_domain_mode(&mut mode_rng(3, idx, 1), &grid, idx, 5).unwrap();
            let dfm = apply_dirac_mode(&fd.mode, Derivatives::Analytic(&fd.derivative));
            let rec = apply_q_mode(&dfm).unwrap();
            let rel = (rec.sub(&fd.mode).norm_sq() / fd.mode.norm_sq()).sqrt();
            assert!(rel < 1e-10, "QD ({m},{n}): {rel}");
        }
    }
}

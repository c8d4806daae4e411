//! Nyström matrices, singular values, Schatten sums, decay tables and
//! residual checks for `Q`.

use super::norms::{block_bound_on, Family, HsTable, IntegralOperatorSpec, SupEvaluator};
use super::{ModeOperator, Result};
use crate::dirac::{apply_dirac_mode, relative_boundary_functional, Derivatives};
use crate::mode_space::{mode_indices, ModeIndex, RadialGrid, SpinorField, SpinorMode};
use nalgebra::{DMatrix, SVD};
use rayon::prelude::*;
use serde::Serialize;
use std::fmt::Write as _;
use std::sync::Arc;

/// `W^{1/2} M W^{-1/2}` with `W = diag(w_i r_i)` on both components, so
/// that matrix singular values approximate those of the operator on
/// `L²(r dr)`.
pub fn symmetrize(grid: &RadialGrid, mat: &DMatrix<f64>) -> DMatrix<f64> {
    let n = grid.len();
    let comps = mat.nrows() / n;
    let s: Vec<f64> = (0..comps * n)
        .map(|k| (grid.weights()[k % n] * grid.nodes()[k % n]).sqrt())
        .collect();
    DMatrix::from_fn(mat.nrows(), mat.ncols(), |i, j| s[i] * mat[(i, j)] / s[j])
}

/// Symmetrized nodal matrix of `Q` at `(m, n)`, `2N x 2N`.
pub fn mode_operator_matrix(grid: &Arc<RadialGrid>, m: i32, n: i32) -> Result<DMatrix<f64>> {
    let op = ModeOperator::new(grid, m, n)?;
    Ok(symmetrize(grid, &op.matrix()))
}

pub fn descending_singular_values(mat: DMatrix<f64>) -> Vec<f64> {
    let mut s: Vec<f64> = SVD::new(mat, false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

pub fn singular_values(grid: &Arc<RadialGrid>, m: i32, n: i32) -> Result<Vec<f64>> {
    Ok(descending_singular_values(mode_operator_matrix(grid, m, n)?))
}

/// Singular values of a single scalar operator.
pub fn operator_singular_values(grid: &Arc<RadialGrid>, spec: &IntegralOperatorSpec) -> Result<Vec<f64>> {
    let mat = ModeOperator::single(grid, spec)?.scalar_matrix();
    Ok(descending_singular_values(symmetrize(grid, &mat)))
}

pub fn schatten_term(sigma: &[f64], p: f64) -> f64 {
    sigma.iter().map(|s| s.powf(p)).sum()
}

/// Singular values per mode for `m >= 0`; `(-m, n)` has the same spectrum.
pub fn spectra(grid: &Arc<RadialGrid>, big_m: u32, big_n: u32) -> Result<Vec<(ModeIndex, Vec<f64>)>> {
    let idx: Vec<ModeIndex> = mode_indices(big_m, big_n).into_iter().filter(|i| i.m >= 0).collect();
    idx.par_iter()
        .map(|&i| Ok((i, singular_values(grid, i.m, i.n)?)))
        .collect()
}

/// `Σ_{|m|<=M', |n|<=N'} Σ_k σ_k^p` for each `p`, over precomputed spectra.
pub fn schatten_sums_from(spectra: &[(ModeIndex, Vec<f64>)], ps: &[f64], big_m: u32, big_n: u32) -> Vec<f64> {
    ps.iter()
        .map(|&p| {
            spectra
                .iter()
                .filter(|(i, _)| i.within(big_m, big_n))
                .map(|(i, s)| if i.m == 0 { 1.0 } else { 2.0 } * schatten_term(s, p))
                .sum()
        })
        .collect()
}

pub fn schatten_partial_sum(grid: &Arc<RadialGrid>, p: f64, big_m: u32, big_n: u32) -> Result<f64> {
    let sp = spectra(grid, big_m, big_n)?;
    Ok(schatten_sums_from(&sp, &[p], big_m, big_n)[0])
}

#[derive(Debug, Clone, Serialize)]
pub struct NormReport {
    pub spec: IntegralOperatorSpec,
    pub hs_norm_sq: f64,
    pub op_norm_bound: f64,
    pub singular_values: Vec<f64>,
}

impl NormReport {
    pub fn sigma_max(&self) -> Option<f64> {
        self.singular_values.first().copied()
    }
}

fn family_specs(m: i32, n: i32) -> Vec<IntegralOperatorSpec> {
    let mut out = Vec::new();
    if m == 0 {
        if n >= 0 {
            out.push(IntegralOperatorSpec::t1(n).expect("valid"));
            out.push(IntegralOperatorSpec::t2(n).expect("valid"));
        }
        return out;
    }
    for fam in [Family::R, Family::S] {
        for i in 0..2 {
            for j in 0..2 {
                out.push(IntegralOperatorSpec::new(fam, i, j, m, n).expect("valid"));
            }
        }
    }
    out
}

/// HS norms and Schur-Young bounds of every scalar operator with
/// `|m| <= M`, `|n| <= N`, in `(family, m, n, i, j)` order. Singular values
/// are filled in when `with_svd` is set.
pub fn decay_table(grid: &Arc<RadialGrid>, big_m: u32, big_n: u32, with_svd: bool) -> Result<Vec<NormReport>> {
    let max_order = big_n + 1;
    let per_m: Vec<Vec<NormReport>> = (0..=big_m as i32)
        .into_par_iter()
        .map(|m| -> Result<Vec<NormReport>> {
            let table = if m == 0 { None } else { Some(HsTable::new(m as u32, max_order)?) };
            let mut rows = Vec::new();
            for n in -(big_n as i32)..=big_n as i32 {
                let ev = SupEvaluator::new(grid, m, n)?;
                for spec in family_specs(m, n) {
                    let hs = match &table {
                        Some(t) => t.norm_sq(&spec)?,
                        None => super::norms::hs_norm_sq(&spec)?,
                    };
                    let singular_values = if with_svd { operator_singular_values(grid, &spec)? } else { Vec::new() };
                    rows.push(NormReport {
                        spec,
                        hs_norm_sq: hs,
                        op_norm_bound: ev.spec_bound(&spec),
                        singular_values,
                    });
                }
            }
            Ok(rows)
        })
        .collect::<Result<_>>()?;
    let mut out = Vec::new();
    for (m, rows) in per_m.into_iter().enumerate() {
        if m > 0 {
            out.extend(rows.iter().map(|r| NormReport {
                spec: IntegralOperatorSpec { m: -r.spec.m, ..r.spec },
                ..r.clone()
            }));
        }
        out.extend(rows);
    }
    out.sort_by_key(|r| (r.spec.family, r.spec.m, r.spec.n, r.spec.i, r.spec.j));
    Ok(out)
}

/// `max hs_norm_sq · sqrt(1 + m² + n²)` over reports within the truncation.
pub fn fitted_constant(reports: &[NormReport], big_m: u32, big_n: u32) -> f64 {
    reports
        .iter()
        .filter(|r| r.spec.m.unsigned_abs() <= big_m && r.spec.n.unsigned_abs() <= big_n)
        .map(|r| {
            let (m, n) = (r.spec.m as f64, r.spec.n as f64);
            r.hs_norm_sq * (1.0 + m * m + n * n).sqrt()
        })
        .fold(0.0, f64::max)
}

fn fmt_num(out: &mut String, v: Option<f64>) {
    if let Some(v) = v {
        let _ = write!(out, "{v:.16e}");
    }
}

/// CSV with columns `family,i,j,m,n,hs_norm_sq,op_bound,sigma_max,schatten_p_term`.
pub fn norms_csv(reports: &[NormReport], p: Option<f64>) -> String {
    let mut out = String::from("family,i,j,m,n,hs_norm_sq,op_bound,sigma_max,schatten_p_term\n");
    for r in reports {
        let s = &r.spec;
        let _ = write!(out, "{},{},{},{},{},", s.family, s.i, s.j, s.m, s.n);
        fmt_num(&mut out, Some(r.hs_norm_sq));
        out.push(',');
        fmt_num(&mut out, Some(r.op_norm_bound));
        out.push(',');
        fmt_num(&mut out, r.sigma_max());
        out.push(',');
        let term = p.filter(|_| !r.singular_values.is_empty()).map(|p| schatten_term(&r.singular_values, p));
        fmt_num(&mut out, term);
        out.push('\n');
    }
    out
}

/// Largest singular value of each block against its Schur-Young bound.
pub fn block_dominance(grid: &Arc<RadialGrid>, m: i32, n: i32) -> Result<(f64, f64)> {
    let sigma = singular_values(grid, m, n)?[0];
    Ok((sigma, block_bound_on(grid, m, n)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DerivativePath {
    Analytic,
    Matrix,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ResidualRow {
    pub m: i32,
    pub n: i32,
    pub residual: f64,
    /// Relative boundary functional of `Q G`.
    pub boundary: f64,
}

fn relative(diff: &SpinorMode, reference: &SpinorMode) -> f64 {
    let den = reference.norm_sq();
    if den == 0.0 {
        if diff.norm_sq() == 0.0 { 0.0 } else { f64::INFINITY }
    } else {
        (diff.norm_sq() / den).sqrt()
    }
}

/// `‖D Q G - G‖ / ‖G‖` per mode.
pub fn residual_check_mode(op: &ModeOperator, rhs: &SpinorMode, path: DerivativePath) -> Result<ResidualRow> {
    let (f, df) = op.apply(rhs);
    let derivs = match path {
        DerivativePath::Analytic => Derivatives::Analytic(&df),
        DerivativePath::Matrix => Derivatives::Matrix,
    };
    let back = apply_dirac_mode(&f, derivs);
    let idx = rhs.index();
    Ok(ResidualRow {
        m: idx.m,
        n: idx.n,
        residual: relative(&back.sub(rhs), rhs),
        boundary: relative_boundary_functional(&f)?,
    })
}

pub fn residual_check(g: &SpinorField, path: DerivativePath) -> Result<Vec<ResidualRow>> {
    let modes: Vec<&SpinorMode> = g.modes().collect();
    modes
        .par_iter()
        .map(|rhs| {
            let idx = rhs.index();
            if rhs.norm_sq() == 0.0 {
                return Ok(ResidualRow { m: idx.m, n: idx.n, residual: 0.0, boundary: 0.0 });
            }
            let op = ModeOperator::new(g.grid(), idx.m, idx.n)?;
            residual_check_mode(&op, rhs, path)
        })
        .collect()
}

/// `‖Q D F - F‖ / ‖F‖` per mode, with `D F` from the supplied exact derivative.
pub fn inverse_residual_mode(op: &ModeOperator, f: &SpinorMode, df: &SpinorMode) -> ResidualRow {
    let rhs = apply_dirac_mode(f, Derivatives::Analytic(df));
    let (rec, _) = op.apply(&rhs);
    let idx = f.index();
    ResidualRow {
        m: idx.m,
        n: idx.n,
        residual: relative(&rec.sub(f), f),
        boundary: relative_boundary_functional(&rec).unwrap_or(f64::NAN),
    }
}

//! Verification suites with pass/fail gates and CSV tables.

use crate::bessel::suite::{inequality_suite, log_grid, BesselSource};
use crate::bessel::{suite::wronskian_residual_with, BesselError, BesselOrder};
use crate::dirac::{self, apply_dirac_mode, boundary_functional, regular_solution, Derivatives, DiracError};
use crate::fields::{mode_rng, random_in_domain_mode, random_smooth_mode, ModeWithDerivative, DEFAULT_DEGREE};
use crate::mode_space::{mode_indices, ModeIndex, RadialGrid, SpinorMode};
use crate::parametrix::norms::{hs_norm_sq, Family, IntegralOperatorSpec};
use crate::parametrix::spectrum::{
    block_dominance, decay_table, fitted_constant, inverse_residual_mode, norms_csv, residual_check_mode,
    schatten_sums_from, spectra, DerivativePath, NormReport,
};
use crate::parametrix::{ModeOperator, ParametrixError};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error(transparent)]
    Bessel(#[from] BesselError),
    #[error(transparent)]
    Dirac(#[from] DiracError),
    #[error(transparent)]
    Parametrix(#[from] ParametrixError),
    #[error("unknown tolerance `{0}`")]
    UnknownTolerance(String),
}

pub type Result<T> = std::result::Result<T, VerifyError>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WorstCase {
    pub m: i32,
    pub n: i32,
    pub value: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Gate {
    pub check: String,
    pub pass: bool,
    pub worst_case: WorstCase,
}

/// Tracks the largest value seen; passes iff every value is finite and
/// strictly below the tolerance.
struct Upper {
    check: &'static str,
    tol: f64,
    worst: Option<WorstCase>,
    ok: bool,
}

impl Upper {
    fn new(check: &'static str, tol: f64) -> Self {
        Upper { check, tol, worst: None, ok: true }
    }

    fn see(&mut self, m: i32, n: i32, value: f64) {
        let bad = !(value.is_finite() && value < self.tol);
        if bad {
            self.ok = false;
        }
        let replace = match self.worst {
            None => true,
            Some(w) => !(value <= w.value),
        };
        if replace {
            self.worst = Some(WorstCase { m, n, value, tolerance: self.tol });
        }
    }

    fn gate(self) -> Gate {
        Gate {
            check: self.check.to_string(),
            pass: self.ok,
            worst_case: self.worst.unwrap_or(WorstCase { m: 0, n: 0, value: 0.0, tolerance: self.tol }),
        }
    }
}

/// Gates plus named CSV tables.
#[derive(Debug, Clone, Default)]
pub struct SuiteReport {
    pub gates: Vec<Gate>,
    pub tables: Vec<(String, String)>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.gates.iter().all(|g| g.pass)
    }
}

fn e(v: f64) -> String {
    format!("{v:.16e}")
}

/// Named tolerances with defaults; unknown names are rejected.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Tolerances(BTreeMap<String, f64>);

impl Default for Tolerances {
    fn default() -> Self {
        let pairs = [
            ("wronskian", 1e-12),
            ("dq", 1e-8),
            ("qd", 1e-8),
            ("boundary", 1e-9),
            ("pairing", 1e-10),
            ("volume", 1e-8),
            ("kernel", 1e-12),
            ("hs_bound", 1e-10),
            ("hs_symmetry", 1e-10),
            ("ordering", 1e-10),
            ("envelope", 0.05),
            ("dominance", 1e-8),
            ("stability", 0.02),
            ("growth", 0.10),
        ];
        Tolerances(pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect())
    }
}

impl Tolerances {
    pub fn get(&self, name: &str) -> f64 {
        self.0[name]
    }

    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        match self.0.get_mut(name) {
            Some(v) => {
                *v = value;
                Ok(())
            }
            None => Err(VerifyError::UnknownTolerance(name.to_string())),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.0.iter().map(|(k, v)| (k.as_str(), *v))
    }
}

pub const WRONSKIAN_N_MAX: u32 = 100;
pub const WRONSKIAN_POINTS: usize = 400;
pub const SUITE_N_MAX: u32 = 30;
pub const SUITE_POINTS: usize = 200;

/// Wronskian sweep over `n <= 100` on 400 log points in `[1e-3, 1e3]` and
/// the inequality suite for `n <= 30` on 200 points.
pub fn bessel_verify(src: &dyn BesselSource, tol: &Tolerances) -> Result<SuiteReport> {
    let wgrid = log_grid(1e-3, 1e3, WRONSKIAN_POINTS);
    let rows: Vec<(u32, f64, f64)> = (0..=WRONSKIAN_N_MAX)
        .into_par_iter()
        .map(|n| {
            let mut worst = (0.0, wgrid[0]);
            for &t in &wgrid {
                let r = wronskian_residual_with(src, BesselOrder(n as i32), t)?;
                if !(r <= worst.0) {
                    worst = (r, t);
                }
            }
            Ok((n, worst.0, worst.1))
        })
        .collect::<Result<_>>()?;
    let mut w = Upper::new("wronskian", tol.get("wronskian"));
    let mut csv = String::from("n,max_residual,t_at_max\n");
    for &(n, r, t) in &rows {
        w.see(0, n as i32, r);
        let _ = writeln!(csv, "{n},{},{}", e(r), e(t));
    }
    let report = inequality_suite(src, SUITE_N_MAX, &log_grid(1e-3, 1e3, SUITE_POINTS))?;
    let mut v = String::from("check,n,t,lhs,rhs\n");
    let mut worst = WorstCase { m: 0, n: 0, value: 0.0, tolerance: 0.0 };
    for x in &report.violations {
        let _ = writeln!(v, "{},{},{},{},{}", x.check, x.n, e(x.t), e(x.lhs), e(x.rhs));
        let excess = x.lhs - x.rhs;
        if !(excess <= worst.value) {
            worst = WorstCase { m: 0, n: x.n as i32, value: excess, tolerance: 0.0 };
        }
    }
    let ineq = Gate {
        check: "inequality_suite".into(),
        pass: report.passed(),
        worst_case: worst,
    };
    Ok(SuiteReport {
        gates: vec![w.gate(), ineq],
        tables: vec![("bessel_wronskian.csv".into(), csv), ("bessel_violations.csv".into(), v)],
    })
}

struct ModeResidual {
    idx: ModeIndex,
    dq: f64,
    qd: f64,
    boundary: f64,
    error: Option<String>,
}

/// Per mode, the worst over `fields` seeded samples of the `DQ` residual on
/// smooth data, the `QD` residual on in-domain data and the boundary
/// functional of `Q G`.
pub fn q_residual(
    grid: &Arc<RadialGrid>,
    big_m: u32,
    big_n: u32,
    seed: u64,
    fields: usize,
    tol: &Tolerances,
) -> Result<SuiteReport> {
    let rows: Vec<ModeResidual> = mode_indices(big_m, big_n)
        .par_iter()
        .map(|&idx| {
            let run = || -> Result<(f64, f64, f64)> {
                let op = ModeOperator::new(grid, idx.m, idx.n)?;
                let (mut dq, mut qd, mut bnd) = (0f64, 0f64, 0f64);
                for k in 0..fields as u64 {
                    let g = random_smooth_mode(&mut mode_rng(seed, idx, 2 * k), grid, idx, DEFAULT_DEGREE);
                    let row = residual_check_mode(&op, &g.mode, DerivativePath::Analytic)?;
                    dq = dq.max(row.residual);
                    bnd = bnd.max(row.boundary);
                    let f = random_in_domain_mode(&mut mode_rng(seed, idx, 2 * k + 1), grid, idx, DEFAULT_DEGREE)?;
                    qd = qd.max(inverse_residual_mode(&op, &f.mode, &f.derivative).residual);
                }
                Ok((dq, qd, bnd))
            };
            match run() {
                Ok((dq, qd, boundary)) => ModeResidual { idx, dq, qd, boundary, error: None },
                Err(err) => ModeResidual {
                    idx,
                    dq: f64::NAN,
                    qd: f64::NAN,
                    boundary: f64::NAN,
                    error: Some(err.to_string()),
                },
            }
        })
        .collect();
    let mut dq = Upper::new("dq_residual", tol.get("dq"));
    let mut qd = Upper::new("qd_residual", tol.get("qd"));
    let mut bnd = Upper::new("q_boundary", tol.get("boundary"));
    let mut csv = String::from("m,n,dq_residual,qd_residual,boundary,error\n");
    for r in &rows {
        let (m, n) = (r.idx.m, r.idx.n);
        dq.see(m, n, r.dq);
        qd.see(m, n, r.qd);
        bnd.see(m, n, r.boundary);
        let err = r.error.as_deref().unwrap_or("").replace(',', ";");
        let _ = writeln!(csv, "{m},{n},{},{},{},{err}", e(r.dq), e(r.qd), e(r.boundary));
    }
    Ok(SuiteReport {
        gates: vec![dq.gate(), qd.gate(), bnd.gate()],
        tables: vec![("q_residual.csv".into(), csv)],
    })
}

fn boundary_mode(f: &SpinorMode, g: &SpinorMode) -> Complex64 {
    g.g().trace().conj() * f.f().trace() - g.f().trace().conj() * f.g().trace()
}

fn volume_mode(f: &ModeWithDerivative, g: &ModeWithDerivative) -> Complex64 {
    let df = apply_dirac_mode(&f.mode, Derivatives::Analytic(&f.derivative));
    let dg = apply_dirac_mode(&g.mode, Derivatives::Analytic(&g.derivative));
    dg.inner(&f.mode) - g.mode.inner(&df)
}

/// Boundary pairing of in-domain pairs, and volume versus boundary form of
/// `⟨DG, F⟩ - ⟨G, DF⟩` for unconstrained pairs, per mode.
pub fn selfadjoint(
    grid: &Arc<RadialGrid>,
    big_m: u32,
    big_n: u32,
    seed: u64,
    pairs: usize,
    tol: &Tolerances,
) -> Result<SuiteReport> {
    let rows: Vec<(ModeIndex, Vec<(f64, f64)>)> = mode_indices(big_m, big_n)
        .par_iter()
        .map(|&idx| {
            let mut out = Vec::with_capacity(pairs);
            for k in 0..pairs as u64 {
                let rng = |s: u64| mode_rng(seed, idx, 100 + 4 * k + s);
                let f = random_in_domain_mode(&mut rng(0), grid, idx, DEFAULT_DEGREE)?;
                let g = random_in_domain_mode(&mut rng(1), grid, idx, DEFAULT_DEGREE)?;
                let scale = (f.mode.norm_sq() * g.mode.norm_sq()).sqrt();
                let pairing = boundary_mode(&f.mode, &g.mode).norm() / scale;
                let f = random_smooth_mode(&mut rng(2), grid, idx, DEFAULT_DEGREE);
                let g = random_smooth_mode(&mut rng(3), grid, idx, DEFAULT_DEGREE);
                let b = boundary_mode(&f.mode, &g.mode);
                let v = volume_mode(&f, &g);
                out.push((pairing, (v - b).norm() / b.norm()));
            }
            Ok((idx, out))
        })
        .collect::<Result<_>>()?;
    let mut pg = Upper::new("boundary_pairing", tol.get("pairing"));
    let mut vg = Upper::new("volume_vs_boundary", tol.get("volume"));
    let mut csv = String::from("m,n,pair,pairing_rel,volume_rel\n");
    for (idx, vals) in &rows {
        for (k, &(p, v)) in vals.iter().enumerate() {
            pg.see(idx.m, idx.n, p);
            vg.see(idx.m, idx.n, v);
            let _ = writeln!(csv, "{},{},{k},{},{}", idx.m, idx.n, e(p), e(v));
        }
    }
    Ok(SuiteReport {
        gates: vec![pg.gate(), vg.gate()],
        tables: vec![("selfadjoint.csv".into(), csv)],
    })
}

/// Boundary functional of the regular homogeneous solution, mode by mode.
pub fn kernel_check(grid: &Arc<RadialGrid>, big_m: u32, big_n: u32, tol: &Tolerances) -> Result<SuiteReport> {
    let rows: Vec<(ModeIndex, std::result::Result<Complex64, String>)> = mode_indices(big_m, big_n)
        .par_iter()
        .map(|&idx| {
            let v = regular_solution(grid, idx.m, idx.n)
                .and_then(|(h, _)| boundary_functional(&h))
                .map_err(|e| e.to_string());
            (idx, v)
        })
        .collect();
    let mut g = Upper::new("kernel_functional", tol.get("kernel"));
    let mut csv = String::from("m,n,functional_re,functional_im,deviation,error\n");
    for (idx, v) in &rows {
        match v {
            Ok(z) => {
                let dev = (z - 1.0).norm();
                g.see(idx.m, idx.n, dev);
                let _ = writeln!(csv, "{},{},{},{},{},", idx.m, idx.n, e(z.re), e(z.im), e(dev));
            }
            Err(msg) => {
                g.see(idx.m, idx.n, f64::NAN);
                let _ = writeln!(csv, "{},{},,,,{}", idx.m, idx.n, msg.replace(',', ";"));
            }
        }
    }
    Ok(SuiteReport {
        gates: vec![g.gate()],
        tables: vec![("kernel_check.csv".into(), csv)],
    })
}

/// Proof-level HS bound on `R01`: `min(1/(4|n|), 1/|m|)`, dropping the first
/// term at `n = 0`.
pub fn r01_limit(m: i32, n: i32) -> f64 {
    let by_m = 1.0 / m.unsigned_abs() as f64;
    if n == 0 {
        by_m
    } else {
        by_m.min(1.0 / (4.0 * n.unsigned_abs() as f64))
    }
}

/// Slacks of the two HS ordering chains at `(m, n)`, evaluated at the
/// reflected index `-n-1` when `n < 0`, where the orders `|n|` and `|n+1|`
/// trade places. Each slack is `upper - lower` and should be nonnegative.
pub fn ordering_slacks(hs: &BTreeMap<(Family, u8, u8), f64>) -> [f64; 4] {
    let r = |i, j| hs[&(Family::R, i, j)];
    let s = |i, j| hs[&(Family::S, i, j)];
    [r(0, 0) - r(1, 0), r(0, 1) - r(0, 0), s(0, 0) - s(0, 1), s(1, 0) - s(0, 0)]
}

fn mode_hs(reports: &[NormReport]) -> BTreeMap<(i32, i32), BTreeMap<(Family, u8, u8), f64>> {
    let mut out: BTreeMap<(i32, i32), BTreeMap<(Family, u8, u8), f64>> = BTreeMap::new();
    for r in reports {
        let s = r.spec;
        out.entry((s.m, s.n)).or_default().insert((s.family, s.i, s.j), r.hs_norm_sq);
    }
    out
}

/// Decay table at `(2M, 2N)` with the proof bounds, the `R01 = S10`
/// identity, the ordering chains, envelope stability from `(M, N)` to
/// `(2M, 2N)`, and block dominance `σ₁ <= bound` for `|m| <= M`, `|n| <= N`.
pub fn norms_table(
    grid: &Arc<RadialGrid>,
    big_m: u32,
    big_n: u32,
    with_svd: bool,
    p: Option<f64>,
    tol: &Tolerances,
) -> Result<SuiteReport> {
    let (m2, n2) = (2 * big_m, 2 * big_n);
    let reports = decay_table(grid, m2, n2, with_svd)?;
    let hs = mode_hs(&reports);
    let mut bound = Upper::new("hs_proof_bound", tol.get("hs_bound"));
    let mut sym = Upper::new("hs_r01_s10", tol.get("hs_symmetry"));
    let mut order = Upper::new("hs_ordering", tol.get("ordering"));
    for (&(m, n), fam) in hs.iter().filter(|((m, _), _)| *m != 0) {
        let r01 = fam[&(Family::R, 0, 1)];
        let s10 = fam[&(Family::S, 1, 0)];
        bound.see(m, n, r01 - r01_limit(m, n));
        sym.see(m, n, (r01 - s10).abs() / r01);
        let reflected = if n < 0 { &hs[&(m, -n - 1)] } else { fam };
        let worst = ordering_slacks(reflected).into_iter().fold(f64::INFINITY, f64::min);
        order.see(m, n, -worst);
    }
    let c_half = fitted_constant(&reports, big_m, big_n);
    let c_full = fitted_constant(&reports, m2, n2);
    let growth = c_full / c_half - 1.0;
    let mut env = Upper::new("envelope_growth", tol.get("envelope"));
    env.see(m2 as i32, n2 as i32, growth);

    let dom: Vec<(ModeIndex, f64, f64)> = mode_indices(big_m, big_n)
        .into_par_iter()
        .filter(|i| i.m >= 0)
        .map(|i| {
            let (s, b) = block_dominance(grid, i.m, i.n)?;
            Ok((i, s, b))
        })
        .collect::<Result<_>>()?;
    let mut dg = Upper::new("schur_young_dominance", tol.get("dominance"));
    let mut blocks = String::from("m,n,sigma_max,block_bound\n");
    for &(i, s, b) in &dom {
        dg.see(i.m, i.n, s - b);
        let _ = writeln!(blocks, "{},{},{},{}", i.m, i.n, e(s), e(b));
    }
    let envelope = format!(
        "truncation_m,truncation_n,fitted_c\n{big_m},{big_n},{}\n{m2},{n2},{}\n",
        e(c_half),
        e(c_full)
    );
    Ok(SuiteReport {
        gates: vec![bound.gate(), sym.gate(), order.gate(), env.gate(), dg.gate()],
        tables: vec![
            ("norms.csv".into(), norms_csv(&reports, p)),
            ("envelope.csv".into(), envelope),
            ("block_dominance.csv".into(), blocks),
        ],
    })
}

/// `T` norms against `1/(4(n+1))` for `n <= n_max`, as the largest
/// relative deviation.
pub fn t_norm_deviation(n_max: i32) -> Result<(i32, f64)> {
    let mut worst = (0, 0.0);
    for n in 0..=n_max {
        let exact = 1.0 / (4.0 * (n as f64 + 1.0));
        for spec in [IntegralOperatorSpec::t1(n)?, IntegralOperatorSpec::t2(n)?] {
            let d = (hs_norm_sq(&spec)? - exact).abs() / exact;
            if d > worst.1 {
                worst = (n, d);
            }
        }
    }
    Ok(worst)
}

/// Schatten partial sums at `(M, N)` and `(2M, 2N)` for each `p`; for
/// `p > 3` the relative change must stay below `stability`, for `p <= 3`
/// it must exceed `growth`.
pub fn schatten(grid: &Arc<RadialGrid>, big_m: u32, big_n: u32, ps: &[f64], tol: &Tolerances) -> Result<SuiteReport> {
    let (m2, n2) = (2 * big_m, 2 * big_n);
    let sp = spectra(grid, m2, n2)?;
    let half = schatten_sums_from(&sp, ps, big_m, big_n);
    let full = schatten_sums_from(&sp, ps, m2, n2);
    let (ts, tg) = (tol.get("stability"), tol.get("growth"));
    let mut csv = String::from("p,sum_m_n,sum_2m_2n,relative_change,stable\n");
    let mut stab = Upper::new("schatten_stability", ts);
    let mut growth: Option<WorstCase> = None;
    for (k, &p) in ps.iter().enumerate() {
        let change = full[k] / half[k] - 1.0;
        let stable = change < ts;
        let _ = writeln!(csv, "{p},{},{},{},{stable}", e(half[k]), e(full[k]), e(change));
        if p > 3.0 {
            stab.see(m2 as i32, n2 as i32, change);
        } else if growth.is_none_or(|w| change < w.value) {
            growth = Some(WorstCase { m: m2 as i32, n: n2 as i32, value: change, tolerance: tg });
        }
    }
    let mut gates = vec![stab.gate()];
    if let Some(w) = growth {
        gates.push(Gate {
            check: "schatten_growth".into(),
            pass: w.value > tg,
            worst_case: w,
        });
    }
    Ok(SuiteReport {
        gates,
        tables: vec![("schatten.csv".into(), csv)],
    })
}

/// Full-field check that the volume and boundary forms agree, as a sanity
/// companion to the per-mode suite.
pub fn field_pairing_gap(f: &crate::mode_space::SpinorField, g: &crate::mode_space::SpinorField) -> f64 {
    let b = dirac::greens_boundary_pairing(f, g);
    let v = dirac::greens_volume_pairing(f, g);
    (v - b).norm() / b.norm().max(f64::MIN_POSITIVE)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bessel::suite::{Exact, PerturbedK};
    use crate::mode_space::make_grid;

    #[test]
    fn tolerances_reject_unknown_names() {
        let mut t = Tolerances::default();
        assert!(t.set("dq", 1e-6).is_ok());
        assert_eq!(t.get("dq"), 1e-6);
        assert!(t.set("nonsense", 1.0).is_err());
    }

    #[test]
    fn kernel_gate_small() {
        let grid = make_grid(16).unwrap();
        let r = kernel_check(&grid, 3, 3, &Tolerances::default()).unwrap();
        assert!(r.passed());
    }

    #[test]
    fn perturbed_bessel_fails() {
        let tol = Tolerances::default();
        assert!(bessel_verify(&Exact, &tol).unwrap().passed());
        assert!(!bessel_verify(&PerturbedK(1e-6), &tol).unwrap().passed());
    }

    #[test]
    fn small_residual_suite() {
        let grid = make_grid(32).unwrap();
        let r = q_residual(&grid, 2, 2, 42, 2, &Tolerances::default()).unwrap();
        assert!(r.passed(), "{:?}", r.gates);
        let s = selfadjoint(&grid, 2, 2, 42, 2, &Tolerances::default()).unwrap();
        assert!(s.passed(), "{:?}", s.gates);
    }
}

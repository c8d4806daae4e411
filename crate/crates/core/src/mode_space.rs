//! Fourier modes, the radial grid, spinor fields and their norm.

use crate::quadrature;
use nalgebra::DMatrix;
use num_complex::Complex64;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::Arc;
use thiserror::Error;

pub const DEFAULT_NODE_COUNT: usize = 64;
pub const MIN_NODE_COUNT: usize = 8;
pub const DEFAULT_TRUNCATION: u32 = 32;

#[derive(Debug, Error, PartialEq)]
pub enum ModeSpaceError {
    #[error("node_count must be at least {MIN_NODE_COUNT}, got {0}")]
    NodeCount(usize),
    #[error("profile has {got} values, grid has {expected} nodes")]
    Length { expected: usize, got: usize },
    #[error("profile contains a non-finite value")]
    NonFinite,
    #[error("mode ({m}, {n}) outside truncation ({big_m}, {big_n})")]
    OutsideTruncation { m: i32, n: i32, big_m: u32, big_n: u32 },
    #[error("angular grid {n_phi}x{n_theta} aliases truncation ({big_m}, {big_n}); need at least {need_phi}x{need_theta}")]
    Aliasing {
        n_phi: usize,
        n_theta: usize,
        big_m: u32,
        big_n: u32,
        need_phi: usize,
        need_theta: usize,
    },
    #[error("profiles live on different grids")]
    GridMismatch,
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, ModeSpaceError>;

/// Gauss-Radau nodes on `(0, 1]` with `r = 1` included.
#[derive(Debug, Clone)]
pub struct RadialGrid {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    bary: Vec<f64>,
    diff: DMatrix<f64>,
}

pub fn make_grid(node_count: usize) -> Result<Arc<RadialGrid>> {
    if node_count < MIN_NODE_COUNT {
        return Err(ModeSpaceError::NodeCount(node_count));
    }
    let (nodes, weights) = quadrature::gauss_radau_unit(node_count);
    let bary = quadrature::barycentric_weights(&nodes);
    let diff = quadrature::differentiation_matrix(&nodes, &bary);
    Ok(Arc::new(RadialGrid {
        nodes,
        weights,
        bary,
        diff,
    }))
}

impl RadialGrid {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Weights for `∫_0^1 · dr`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn barycentric_weights(&self) -> &[f64] {
        &self.bary
    }

    pub fn diff_matrix(&self) -> &DMatrix<f64> {
        &self.diff
    }

    /// `∫_0^1 h(r) r dr` for nodal samples `h`.
    pub fn integrate_r(&self, h: impl Fn(usize) -> f64) -> f64 {
        (0..self.len())
            .map(|i| self.weights[i] * self.nodes[i] * h(i))
            .sum()
    }

    pub fn interpolation_matrix(&self, points: &[f64]) -> DMatrix<f64> {
        quadrature::interpolation_matrix(&self.nodes, &self.bary, points)
    }

    /// Values of the interpolating polynomial at `x`.
    pub fn interpolate(&self, values: &[Complex64], x: f64) -> Complex64 {
        quadrature::interpolation_row(&self.nodes, &self.bary, x)
            .iter()
            .zip(values)
            .map(|(l, v)| v * *l)
            .sum()
    }

    fn same(a: &Arc<RadialGrid>, b: &Arc<RadialGrid>) -> bool {
        Arc::ptr_eq(a, b) || a.nodes == b.nodes
    }
}

/// A mode stores `f` at φ-frequency `n + 1` and `g` at φ-frequency `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ModeIndex {
    pub m: i32,
    pub n: i32,
}

impl ModeIndex {
    pub fn new(m: i32, n: i32) -> Self {
        ModeIndex { m, n }
    }

    pub fn within(&self, big_m: u32, big_n: u32) -> bool {
        self.m.unsigned_abs() <= big_m && self.n.unsigned_abs() <= big_n
    }
}

/// All indices with `|m| <= big_m`, `|n| <= big_n`, ordered by `(m, n)`.
pub fn mode_indices(big_m: u32, big_n: u32) -> Vec<ModeIndex> {
    let (bm, bn) = (big_m as i32, big_n as i32);
    (-bm..=bm)
        .flat_map(|m| (-bn..=bn).map(move |n| ModeIndex::new(m, n)))
        .collect()
}

#[derive(Debug, Clone)]
pub struct RadialProfile {
    values: Vec<Complex64>,
    grid: Arc<RadialGrid>,
}

impl RadialProfile {
    pub fn new(grid: Arc<RadialGrid>, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(ModeSpaceError::Length {
                expected: grid.len(),
                got: values.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(ModeSpaceError::NonFinite);
        }
        Ok(RadialProfile { values, grid })
    }

    pub fn zeros(grid: Arc<RadialGrid>) -> Self {
        let values = vec![Complex64::new(0.0, 0.0); grid.len()];
        RadialProfile { values, grid }
    }

    pub fn from_fn(grid: Arc<RadialGrid>, h: impl Fn(f64) -> Complex64) -> Result<Self> {
        let values = grid.nodes().iter().map(|&r| h(r)).collect();
        Self::new(grid, values)
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    /// Value at `r = 1`.
    pub fn trace(&self) -> Complex64 {
        *self.values.last().expect("grid is nonempty")
    }

    /// Derivative of the nodal interpolant.
    pub fn derivative(&self) -> RadialProfile {
        let d = self.grid.diff_matrix();
        let n = self.values.len();
        let values = (0..n)
            .map(|i| (0..n).map(|j| self.values[j] * d[(i, j)]).sum())
            .collect();
        RadialProfile {
            values,
            grid: self.grid.clone(),
        }
    }

    /// `∫ |h|^2 r dr`.
    pub fn norm_sq(&self) -> f64 {
        self.grid.integrate_r(|i| self.values[i].norm_sqr())
    }

    /// `∫ conj(self) other r dr`.
    pub fn inner(&self, other: &RadialProfile) -> Complex64 {
        let g = &self.grid;
        (0..g.len())
            .map(|i| self.values[i].conj() * other.values[i] * (g.weights()[i] * g.nodes()[i]))
            .sum()
    }

    pub fn map(&self, h: impl Fn(usize, Complex64) -> Complex64) -> RadialProfile {
        RadialProfile {
            values: self.values.iter().enumerate().map(|(i, v)| h(i, *v)).collect(),
            grid: self.grid.clone(),
        }
    }

    pub fn scale(&self, c: Complex64) -> RadialProfile {
        self.map(|_, v| v * c)
    }

    pub fn add(&self, other: &RadialProfile) -> RadialProfile {
        self.map(|i, v| v + other.values[i])
    }

    pub fn sub(&self, other: &RadialProfile) -> RadialProfile {
        self.map(|i, v| v - other.values[i])
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone)]
pub struct SpinorMode {
    index: ModeIndex,
    f: RadialProfile,
    g: RadialProfile,
}

impl SpinorMode {
    pub fn new(index: ModeIndex, f: RadialProfile, g: RadialProfile) -> Result<Self> {
        if !RadialGrid::same(f.grid(), g.grid()) {
            return Err(ModeSpaceError::GridMismatch);
        }
        Ok(SpinorMode { index, f, g })
    }

    pub fn zeros(index: ModeIndex, grid: Arc<RadialGrid>) -> Self {
        SpinorMode {
            index,
            f: RadialProfile::zeros(grid.clone()),
            g: RadialProfile::zeros(grid),
        }
    }

    pub fn index(&self) -> ModeIndex {
        self.index
    }

    /// Upper component, φ-frequency `n + 1`.
    pub fn f(&self) -> &RadialProfile {
        &self.f
    }

    /// Lower component, φ-frequency `n`.
    pub fn g(&self) -> &RadialProfile {
        &self.g
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        self.f.grid()
    }

    pub fn norm_sq(&self) -> f64 {
        self.f.norm_sq() + self.g.norm_sq()
    }

    pub fn inner(&self, other: &SpinorMode) -> Complex64 {
        self.f.inner(&other.f) + self.g.inner(&other.g)
    }

    pub fn scale(&self, c: Complex64) -> SpinorMode {
        SpinorMode {
            index: self.index,
            f: self.f.scale(c),
            g: self.g.scale(c),
        }
    }

    pub fn add(&self, other: &SpinorMode) -> SpinorMode {
        SpinorMode {
            index: self.index,
            f: self.f.add(&other.f),
            g: self.g.add(&other.g),
        }
    }

    pub fn sub(&self, other: &SpinorMode) -> SpinorMode {
        SpinorMode {
            index: self.index,
            f: self.f.sub(&other.f),
            g: self.g.sub(&other.g),
        }
    }
}

/// Truncated collection of modes; absent modes are zero.
#[derive(Debug, Clone)]
pub struct SpinorField {
    big_m: u32,
    big_n: u32,
    grid: Arc<RadialGrid>,
    modes: BTreeMap<ModeIndex, SpinorMode>,
}

impl SpinorField {
    pub fn new(grid: Arc<RadialGrid>, big_m: u32, big_n: u32) -> Self {
        SpinorField {
            big_m,
            big_n,
            grid,
            modes: BTreeMap::new(),
        }
    }

    pub fn from_modes(
        grid: Arc<RadialGrid>,
        big_m: u32,
        big_n: u32,
        modes: impl IntoIterator<Item = SpinorMode>,
    ) -> Result<Self> {
        let mut field = Self::new(grid, big_m, big_n);
        for mode in modes {
            field.insert(mode)?;
        }
        Ok(field)
    }

    pub fn insert(&mut self, mode: SpinorMode) -> Result<()> {
        let idx = mode.index();
        if !idx.within(self.big_m, self.big_n) {
            return Err(ModeSpaceError::OutsideTruncation {
                m: idx.m,
                n: idx.n,
                big_m: self.big_m,
                big_n: self.big_n,
            });
        }
        if !RadialGrid::same(&self.grid, mode.grid()) {
            return Err(ModeSpaceError::GridMismatch);
        }
        self.modes.insert(idx, mode);
        Ok(())
    }

    pub fn truncation(&self) -> (u32, u32) {
        (self.big_m, self.big_n)
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn get(&self, idx: ModeIndex) -> Option<&SpinorMode> {
        self.modes.get(&idx)
    }

    /// Stored mode or the zero mode.
    pub fn mode(&self, idx: ModeIndex) -> SpinorMode {
        self.modes
            .get(&idx)
            .cloned()
            .unwrap_or_else(|| SpinorMode::zeros(idx, self.grid.clone()))
    }

    pub fn modes(&self) -> impl Iterator<Item = &SpinorMode> {
        self.modes.values()
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn map_modes(&self, h: impl Fn(&SpinorMode) -> SpinorMode) -> SpinorField {
        SpinorField {
            big_m: self.big_m,
            big_n: self.big_n,
            grid: self.grid.clone(),
            modes: self.modes.iter().map(|(k, v)| (*k, h(v))).collect(),
        }
    }

    pub fn scale(&self, c: Complex64) -> SpinorField {
        self.map_modes(|m| m.scale(c))
    }

    /// `⟨self, other⟩`, conjugate-linear in `self`.
    pub fn inner(&self, other: &SpinorField) -> Complex64 {
        self.modes
            .iter()
            .filter_map(|(k, a)| other.modes.get(k).map(|b| a.inner(b)))
            .sum()
    }

    /// Text form: a header line `M N node_count` then one row per node
    /// `m n i Re f Im f Re g Im g`.
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {} {}\n", self.big_m, self.big_n, self.grid.len());
        for (idx, mode) in &self.modes {
            for (i, (f, g)) in mode.f.values.iter().zip(&mode.g.values).enumerate() {
                writeln!(
                    out,
                    "{} {} {} {:.16e} {:.16e} {:.16e} {:.16e}",
                    idx.m, idx.n, i, f.re, f.im, g.re, g.im
                )
                .unwrap();
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let perr = |line: usize, msg: &str| ModeSpaceError::Parse {
            line,
            msg: msg.to_string(),
        };
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or_else(|| perr(1, "missing header"))?;
        let h: Vec<&str> = header.split_whitespace().collect();
        if h.len() != 3 {
            return Err(perr(1, "header needs M N node_count"));
        }
        let big_m: u32 = h[0].parse().map_err(|_| perr(1, "bad M"))?;
        let big_n: u32 = h[1].parse().map_err(|_| perr(1, "bad N"))?;
        let count: usize = h[2].parse().map_err(|_| perr(1, "bad node_count"))?;
        let grid = make_grid(count)?;
        let mut data: BTreeMap<ModeIndex, (Vec<Complex64>, Vec<Complex64>)> = BTreeMap::new();
        let zero = Complex64::new(0.0, 0.0);
        for (ln, line) in lines {
            let c: Vec<&str> = line.split_whitespace().collect();
            if c.len() != 7 {
                return Err(perr(ln + 1, "row needs 7 columns"));
            }
            let m: i32 = c[0].parse().map_err(|_| perr(ln + 1, "bad m"))?;
            let n: i32 = c[1].parse().map_err(|_| perr(ln + 1, "bad n"))?;
            let i: usize = c[2].parse().map_err(|_| perr(ln + 1, "bad node index"))?;
            if i >= count {
                return Err(perr(ln + 1, "node index out of range"));
            }
            let mut x = [0.0; 4];
            for (k, slot) in x.iter_mut().enumerate() {
                *slot = c[3 + k].parse().map_err(|_| perr(ln + 1, "bad value"))?;
            }
            let entry = data
                .entry(ModeIndex::new(m, n))
                .or_insert_with(|| (vec![zero; count], vec![zero; count]));
            entry.0[i] = Complex64::new(x[0], x[1]);
            entry.1[i] = Complex64::new(x[2], x[3]);
        }
        let mut field = SpinorField::new(grid.clone(), big_m, big_n);
        for (idx, (f, g)) in data {
            let mode = SpinorMode::new(
                idx,
                RadialProfile::new(grid.clone(), f)?,
                RadialProfile::new(grid.clone(), g)?,
            )?;
            field.insert(mode)?;
        }
        Ok(field)
    }
}

pub fn field_norm(field: &SpinorField) -> f64 {
    field.modes().map(SpinorMode::norm_sq).sum::<f64>().sqrt()
}

/// Two-component samples on the tensor grid `(r_i, φ_j, θ_k)` with uniform
/// angles `φ_j = 2πj/n_phi`, `θ_k = 2πk/n_theta`.
#[derive(Debug, Clone)]
pub struct AngularSamples {
    grid: Arc<RadialGrid>,
    n_phi: usize,
    n_theta: usize,
    data: Vec<[Complex64; 2]>,
}

impl AngularSamples {
    pub fn new(
        grid: Arc<RadialGrid>,
        n_phi: usize,
        n_theta: usize,
        data: Vec<[Complex64; 2]>,
    ) -> Result<Self> {
        let expected = grid.len() * n_phi * n_theta;
        if data.len() != expected {
            return Err(ModeSpaceError::Length {
                expected,
                got: data.len(),
            });
        }
        Ok(AngularSamples {
            grid,
            n_phi,
            n_theta,
            data,
        })
    }

    pub fn from_fn(
        grid: Arc<RadialGrid>,
        n_phi: usize,
        n_theta: usize,
        h: impl Fn(f64, f64, f64) -> [Complex64; 2],
    ) -> Self {
        let tau = std::f64::consts::TAU;
        let mut data = Vec::with_capacity(grid.len() * n_phi * n_theta);
        for &r in grid.nodes() {
            for j in 0..n_phi {
                for k in 0..n_theta {
                    data.push(h(r, tau * j as f64 / n_phi as f64, tau * k as f64 / n_theta as f64));
                }
            }
        }
        AngularSamples {
            grid,
            n_phi,
            n_theta,
            data,
        }
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        (self.grid.len(), self.n_phi, self.n_theta)
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn at(&self, i: usize, j: usize, k: usize) -> [Complex64; 2] {
        self.data[(i * self.n_phi + j) * self.n_theta + k]
    }

    /// Angular average of `∫ (|F_1|^2 + |F_2|^2) r dr`.
    pub fn mean_norm_sq(&self) -> f64 {
        let per_r: Vec<f64> = (0..self.grid.len())
            .map(|i| {
                let block = &self.data[i * self.n_phi * self.n_theta..(i + 1) * self.n_phi * self.n_theta];
                block.iter().map(|v| v[0].norm_sqr() + v[1].norm_sqr()).sum::<f64>()
                    / block.len() as f64
            })
            .collect();
        self.grid.integrate_r(|i| per_r[i])
    }
}

pub fn required_resolution(big_m: u32, big_n: u32) -> (usize, usize) {
    (2 * big_n as usize + 2, 2 * big_m as usize + 1)
}

fn check_resolution(n_phi: usize, n_theta: usize, big_m: u32, big_n: u32) -> Result<()> {
    let (need_phi, need_theta) = required_resolution(big_m, big_n);
    if n_phi < need_phi || n_theta < need_theta {
        return Err(ModeSpaceError::Aliasing {
            n_phi,
            n_theta,
            big_m,
            big_n,
            need_phi,
            need_theta,
        });
    }
    Ok(())
}

fn twiddles(len: usize, sign: f64) -> Vec<Complex64> {
    (0..len)
        .map(|k| Complex64::from_polar(1.0, sign * std::f64::consts::TAU * k as f64 / len as f64))
        .collect()
}

fn wrap(freq: i64, len: usize) -> usize {
    freq.rem_euclid(len as i64) as usize
}

/// Mode coefficients of `samples` within truncation `(big_m, big_n)`.
pub fn decompose(samples: &AngularSamples, big_m: u32, big_n: u32) -> Result<SpinorField> {
    let (nr, np, nt) = samples.shape();
    check_resolution(np, nt, big_m, big_n)?;
    let wp = twiddles(np, -1.0);
    let wt = twiddles(nt, -1.0);
    let (bm, bn) = (big_m as i64, big_n as i64);
    let ms: Vec<i64> = (-bm..=bm).collect();
    let zero = Complex64::new(0.0, 0.0);
    let norm = 1.0 / (np * nt) as f64;
    // values[mode][r] for f and g
    let count = ms.len() * (2 * bn as usize + 1);
    let mut fv = vec![vec![zero; nr]; count];
    let mut gv = vec![vec![zero; nr]; count];
    for i in 0..nr {
        // θ transform: theta_hat[j][mi][comp]
        let mut th = vec![[zero; 2]; np * ms.len()];
        for j in 0..np {
            for (mi, &m) in ms.iter().enumerate() {
                let mut acc = [zero; 2];
                for k in 0..nt {
                    let w = wt[wrap(m * k as i64, nt)];
                    let s = samples.at(i, j, k);
                    acc[0] += s[0] * w;
                    acc[1] += s[1] * w;
                }
                th[j * ms.len() + mi] = acc;
            }
        }
        for (mi, _) in ms.iter().enumerate() {
            for (ni, n) in (-bn..=bn).enumerate() {
                let (mut f, mut g) = (zero, zero);
                for j in 0..np {
                    let v = th[j * ms.len() + mi];
                    f += v[0] * wp[wrap((n + 1) * j as i64, np)];
                    g += v[1] * wp[wrap(n * j as i64, np)];
                }
                let slot = mi * (2 * bn as usize + 1) + ni;
                fv[slot][i] = f * norm;
                gv[slot][i] = g * norm;
            }
        }
    }
    let grid = samples.grid().clone();
    let mut field = SpinorField::new(grid.clone(), big_m, big_n);
    for (slot, (f, g)) in fv.into_iter().zip(gv).enumerate() {
        let m = ms[slot / (2 * bn as usize + 1)] as i32;
        let n = (slot % (2 * bn as usize + 1)) as i32 - bn as i32;
        let mode = SpinorMode::new(
            ModeIndex::new(m, n),
            RadialProfile::new(grid.clone(), f)?,
            RadialProfile::new(grid.clone(), g)?,
        )?;
        field.insert(mode)?;
    }
    Ok(field)
}

/// Point samples of `Σ (f e^{i(n+1)φ}, g e^{inφ}) e^{imθ}`.
pub fn synthesize(field: &SpinorField, n_phi: usize, n_theta: usize) -> Result<AngularSamples> {
    let (big_m, big_n) = field.truncation();
    check_resolution(n_phi, n_theta, big_m, big_n)?;
    let grid = field.grid().clone();
    let nr = grid.len();
    let wp = twiddles(n_phi, 1.0);
    let wt = twiddles(n_theta, 1.0);
    let zero = Complex64::new(0.0, 0.0);
    let mut data = vec![[zero; 2]; nr * n_phi * n_theta];
    // group modes by m so the θ factor is applied once per (m, φ) pair
    let mut by_m: BTreeMap<i32, Vec<&SpinorMode>> = BTreeMap::new();
    for mode in field.modes() {
        by_m.entry(mode.index().m).or_default().push(mode);
    }
    for i in 0..nr {
        for j in 0..n_phi {
            for (&m, modes) in &by_m {
                let mut acc = [zero; 2];
                for mode in modes {
                    let n = mode.index().n as i64;
                    acc[0] += mode.f().values()[i] * wp[wrap((n + 1) * j as i64, n_phi)];
                    acc[1] += mode.g().values()[i] * wp[wrap(n * j as i64, n_phi)];
                }
                for k in 0..n_theta {
                    let w = wt[wrap(m as i64 * k as i64, n_theta)];
                    let cell = &mut data[(i * n_phi + j) * n_theta + k];
                    cell[0] += acc[0] * w;
                    cell[1] += acc[1] * w;
                }
            }
        }
    }
    AngularSamples::new(grid, n_phi, n_theta, data)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn grid_endpoint_and_moments() {
        let g = make_grid(8).unwrap();
        assert_eq!(*g.nodes().last().unwrap(), 1.0);
        let g = make_grid(32).unwrap();
        assert!((g.integrate_r(|_| 1.0) - 0.5).abs() < 1e-14);
        assert!((g.integrate_r(|i| g.nodes()[i].powi(6)) - 0.125).abs() < 1e-13);
        assert_eq!(make_grid(4).unwrap_err(), ModeSpaceError::NodeCount(4));
    }

    #[test]
    fn simple_norms() {
        let grid = make_grid(16).unwrap();
        let empty = SpinorField::new(grid.clone(), 2, 2);
        assert_eq!(field_norm(&empty), 0.0);
        let f = RadialProfile::from_fn(grid.clone(), |_| c(1.0)).unwrap();
        let mode = SpinorMode::new(ModeIndex::new(0, 0), f, RadialProfile::zeros(grid.clone())).unwrap();
        let field = SpinorField::from_modes(grid.clone(), 2, 2, [mode]).unwrap();
        assert!((field_norm(&field) - 0.5f64.sqrt()).abs() < 1e-14);
        let r = RadialProfile::from_fn(grid.clone(), c).unwrap();
        let mode = SpinorMode::new(ModeIndex::new(1, -1), r.clone(), r).unwrap();
        let field = SpinorField::from_modes(grid, 2, 2, [mode]).unwrap();
        assert!((field_norm(&field) - 0.5f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn truncation_is_enforced() {
        let grid = make_grid(8).unwrap();
        let mut field = SpinorField::new(grid.clone(), 1, 1);
        assert!(field.insert(SpinorMode::zeros(ModeIndex::new(2, 0), grid)).is_err());
    }

    #[test]
    fn single_mode_roundtrip() {
        let grid = make_grid(8).unwrap();
        let f = RadialProfile::from_fn(grid.clone(), |_| c(1.0)).unwrap();
        let mode = SpinorMode::new(ModeIndex::new(1, 0), f, RadialProfile::zeros(grid.clone())).unwrap();
        let field = SpinorField::from_modes(grid, 2, 2, [mode]).unwrap();
        let s = synthesize(&field, 6, 5).unwrap();
        let back = decompose(&s, 2, 2).unwrap();
        for mode in back.modes() {
            let want = if mode.index() == ModeIndex::new(1, 0) { 1.0 } else { 0.0 };
            for v in mode.f().values() {
                assert!((v - c(want)).norm() < 1e-13);
            }
            assert!(mode.g().max_abs() < 1e-13);
        }
    }

    #[test]
    fn scalar_phi_content_lands_in_its_slot() {
        // F = (cos φ, 0): e^{±iφ} on the f component means n + 1 = ±1
        let grid = make_grid(8).unwrap();
        let s = AngularSamples::from_fn(grid, 8, 3, |r, phi, _| [c(r * phi.cos()), c(0.0)]);
        let field = decompose(&s, 1, 3).unwrap();
        for mode in field.modes() {
            let idx = mode.index();
            let want = if idx.m == 0 && (idx.n == 0 || idx.n == -2) { 0.5 } else { 0.0 };
            let got = mode.f().trace();
            assert!((got - c(want)).norm() < 1e-14, "{idx:?} {got}");
        }
    }

    #[test]
    fn aliasing_is_rejected() {
        let grid = make_grid(8).unwrap();
        let field = SpinorField::new(grid, 2, 2);
        assert!(matches!(synthesize(&field, 5, 5), Err(ModeSpaceError::Aliasing { .. })));
    }

    #[test]
    fn text_roundtrip() {
        let grid = make_grid(8).unwrap();
        let f = RadialProfile::from_fn(grid.clone(), |r| Complex64::new(r, -r * r / 3.0)).unwrap();
        let g = RadialProfile::from_fn(grid.clone(), |r| Complex64::new(1.0 / 7.0, r.sin())).unwrap();
        let mode = SpinorMode::new(ModeIndex::new(-1, 2), f, g).unwrap();
        let field = SpinorField::from_modes(grid, 3, 3, [mode]).unwrap();
        let text = field.to_text();
        let back = SpinorField::from_text(&text).unwrap();
        assert_eq!(back.to_text(), text);
        let a = field.mode(ModeIndex::new(-1, 2));
        let b = back.mode(ModeIndex::new(-1, 2));
        assert_eq!(a.g().values(), b.g().values());
    }
}

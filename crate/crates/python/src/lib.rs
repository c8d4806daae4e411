//! Python bindings: grids, spinor modes, the explicit inverse `Q`, Bessel
//! functions, spectra and norm estimates.

use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use std::sync::Arc;
use torus_dirac::bessel;
use torus_dirac::dirac::{self, Derivatives};
use torus_dirac::mode_space::{self, ModeIndex, RadialProfile};
use torus_dirac::parametrix::{self, norms, spectrum, Family, IntegralOperatorSpec};

fn err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_family(name: &str) -> PyResult<Family> {
    match name.to_ascii_uppercase().as_str() {
        "R" => Ok(Family::R),
        "S" => Ok(Family::S),
        "T1" => Ok(Family::T1),
        "T2" => Ok(Family::T2),
        _ => Err(err(format!("unknown operator family `{name}`"))),
    }
}

/// Radial collocation grid on `(0, 1]`.
#[pyclass(name = "RadialGrid", frozen)]
pub struct PyGrid {
    inner: Arc<mode_space::RadialGrid>,
}

#[pymethods]
impl PyGrid {
    #[new]
    #[pyo3(signature = (node_count = mode_space::DEFAULT_NODE_COUNT))]
    fn new(node_count: usize) -> PyResult<Self> {
        Ok(PyGrid {
            inner: mode_space::make_grid(node_count).map_err(err)?,
        })
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    #[getter]
    fn nodes(&self) -> Vec<f64> {
        self.inner.nodes().to_vec()
    }

    #[getter]
    fn weights(&self) -> Vec<f64> {
        self.inner.weights().to_vec()
    }

    fn __repr__(&self) -> String {
        format!("RadialGrid(node_count={})", self.inner.len())
    }
}

/// One Fourier mode `(m, n)` of a spinor: radial profiles `f` and `g`.
#[pyclass(name = "SpinorMode", frozen)]
#[derive(Clone)]
pub struct PyMode {
    inner: mode_space::SpinorMode,
}

impl PyMode {
    fn build(grid: &Arc<mode_space::RadialGrid>, m: i32, n: i32, f: Vec<Complex64>, g: Vec<Complex64>) -> PyResult<Self> {
        let f = RadialProfile::new(grid.clone(), f).map_err(err)?;
        let g = RadialProfile::new(grid.clone(), g).map_err(err)?;
        Ok(PyMode {
            inner: mode_space::SpinorMode::new(ModeIndex::new(m, n), f, g).map_err(err)?,
        })
    }
}

#[pymethods]
impl PyMode {
    #[new]
    fn new(grid: &PyGrid, m: i32, n: i32, f: Vec<Complex64>, g: Vec<Complex64>) -> PyResult<Self> {
        Self::build(&grid.inner, m, n, f, g)
    }

    /// Regular homogeneous solution of `D u = 0` on the grid.
    #[staticmethod]
    fn regular_solution(grid: &PyGrid, m: i32, n: i32) -> PyResult<Self> {
        let (u, _) = dirac::regular_solution(&grid.inner, m, n).map_err(err)?;
        Ok(PyMode { inner: u })
    }

    #[getter]
    fn m(&self) -> i32 {
        self.inner.index().m
    }

    #[getter]
    fn n(&self) -> i32 {
        self.inner.index().n
    }

    #[getter]
    fn f(&self) -> Vec<Complex64> {
        self.inner.f().values().to_vec()
    }

    #[getter]
    fn g(&self) -> Vec<Complex64> {
        self.inner.g().values().to_vec()
    }

    fn norm_sq(&self) -> f64 {
        self.inner.norm_sq()
    }

    fn inner_product(&self, other: &PyMode) -> Complex64 {
        self.inner.inner(&other.inner)
    }

    fn boundary_functional(&self) -> PyResult<Complex64> {
        dirac::boundary_functional(&self.inner).map_err(err)
    }

    fn relative_boundary_functional(&self) -> PyResult<f64> {
        dirac::relative_boundary_functional(&self.inner).map_err(err)
    }

    fn __repr__(&self) -> String {
        let ModeIndex { m, n } = self.inner.index();
        format!("SpinorMode(m={m}, n={n}, node_count={})", self.inner.grid().len())
    }
}

/// `D` applied with the grid differentiation matrix.
#[pyfunction]
fn apply_dirac(mode: &PyMode) -> PyMode {
    PyMode {
        inner: dirac::apply_dirac_mode(&mode.inner, Derivatives::Matrix),
    }
}

/// The explicit inverse `Q` on one mode.
#[pyfunction]
fn apply_q(mode: &PyMode) -> PyResult<PyMode> {
    Ok(PyMode {
        inner: parametrix::apply_q_mode(&mode.inner).map_err(err)?,
    })
}

/// `(Q u, (Q u)')`.
#[pyfunction]
fn apply_q_with_derivative(mode: &PyMode) -> PyResult<(PyMode, PyMode)> {
    let (u, du) = parametrix::apply_q_mode_with_derivative(&mode.inner).map_err(err)?;
    Ok((PyMode { inner: u }, PyMode { inner: du }))
}

#[pyfunction]
fn bessel_i(n: i32, t: f64) -> PyResult<f64> {
    bessel::bessel_i(n, t).map_err(err)
}

#[pyfunction]
fn bessel_k(n: i32, t: f64) -> PyResult<f64> {
    bessel::bessel_k(n, t).map_err(err)
}

/// Natural log of `I_n(t)`, finite where `I_n` itself overflows.
#[pyfunction]
fn log_bessel_i(n: i32, t: f64) -> PyResult<f64> {
    Ok(bessel::i_ext(n, t).map_err(err)?.ln_abs())
}

#[pyfunction]
fn log_bessel_k(n: i32, t: f64) -> PyResult<f64> {
    Ok(bessel::k_ext(n, t).map_err(err)?.ln_abs())
}

/// `|t (I_n K_{n+1} + I_{n+1} K_n) - 1|`.
#[pyfunction]
fn wronskian_residual(n: i32, t: f64) -> PyResult<f64> {
    bessel::wronskian_residual(n, t).map_err(err)
}

/// Descending singular values of the 2x2 block inverse on mode `(m, n)`.
#[pyfunction]
fn singular_values(grid: &PyGrid, m: i32, n: i32) -> PyResult<Vec<f64>> {
    spectrum::singular_values(&grid.inner, m, n).map_err(err)
}

/// Descending singular values of one scalar integral operator.
#[pyfunction]
#[pyo3(signature = (grid, family, m, n, i = 0, j = 0))]
fn operator_singular_values(grid: &PyGrid, family: &str, m: i32, n: i32, i: u8, j: u8) -> PyResult<Vec<f64>> {
    let spec = IntegralOperatorSpec::new(parse_family(family)?, i, j, m, n).map_err(err)?;
    spectrum::operator_singular_values(&grid.inner, &spec).map_err(err)
}

/// Squared Hilbert-Schmidt norm of `R_ij`, `S_ij`, `T1` or `T2`.
#[pyfunction]
#[pyo3(signature = (family, m, n, i = 0, j = 0))]
fn hs_norm_sq(family: &str, m: i32, n: i32, i: u8, j: u8) -> PyResult<f64> {
    let spec = IntegralOperatorSpec::new(parse_family(family)?, i, j, m, n).map_err(err)?;
    norms::hs_norm_sq(&spec).map_err(err)
}

/// Schur-Young bound on the operator norm of a scalar integral operator.
#[pyfunction]
#[pyo3(signature = (family, m, n, i = 0, j = 0))]
fn schur_young_bound(family: &str, m: i32, n: i32, i: u8, j: u8) -> PyResult<f64> {
    let spec = IntegralOperatorSpec::new(parse_family(family)?, i, j, m, n).map_err(err)?;
    norms::schur_young_bound(&spec).map_err(err)
}

/// Operator-norm bound for the whole block on mode `(m, n)`.
#[pyfunction]
fn block_bound(m: i32, n: i32) -> PyResult<f64> {
    norms::block_bound(m, n).map_err(err)
}

/// `sum sigma^p` over `|m| <= M`, `|n| <= N`.
#[pyfunction]
fn schatten_partial_sum(grid: &PyGrid, p: f64, big_m: u32, big_n: u32) -> PyResult<f64> {
    if !(p.is_finite() && p > 0.0) {
        return Err(err(format!("p must be positive, got {p}")));
    }
    spectrum::schatten_partial_sum(&grid.inner, p, big_m, big_n).map_err(err)
}

#[pymodule]
fn torus_dirac_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGrid>()?;
    m.add_class::<PyMode>()?;
    m.add_function(wrap_pyfunction!(apply_dirac, m)?)?;
    m.add_function(wrap_pyfunction!(apply_q, m)?)?;
    m.add_function(wrap_pyfunction!(apply_q_with_derivative, m)?)?;
    m.add_function(wrap_pyfunction!(bessel_i, m)?)?;
    m.add_function(wrap_pyfunction!(bessel_k, m)?)?;
    m.add_function(wrap_pyfunction!(log_bessel_i, m)?)?;
    m.add_function(wrap_pyfunction!(log_bessel_k, m)?)?;
    m.add_function(wrap_pyfunction!(wronskian_residual, m)?)?;
    m.add_function(wrap_pyfunction!(singular_values, m)?)?;
    m.add_function(wrap_pyfunction!(operator_singular_values, m)?)?;
    m.add_function(wrap_pyfunction!(hs_norm_sq, m)?)?;
    m.add_function(wrap_pyfunction!(schur_young_bound, m)?)?;
    m.add_function(wrap_pyfunction!(block_bound, m)?)?;
    m.add_function(wrap_pyfunction!(schatten_partial_sum, m)?)?;
    Ok(())
}

//! Python bindings for `widom-tau`.

use std::collections::BTreeMap;

use pyo3::exceptions::{PyArithmeticError, PyValueError};
use pyo3::prelude::*;
use tau::linalg::identity;
use tau::plemelj::kernel_modes_with_tol;
use tau::{CMat, TauError, C64};

type Matrix = Vec<Vec<C64>>;

fn err(e: TauError) -> PyErr {
    match e {
        TauError::Precondition(_) | TauError::Domain { .. } | TauError::Geometry(_) | TauError::Incompatible(_) => PyValueError::new_err(e.to_string()),
        _ => PyArithmeticError::new_err(e.to_string()),
    }
}

fn to_mat(m: &Matrix) -> PyResult<CMat> {
    let n = m.len();
    if m.iter().any(|r| r.len() != n) {
        return Err(PyValueError::new_err("matrix must be square"));
    }
    Ok(CMat::from_fn(n, n, |i, j| m[i][j]))
}

fn from_mat(m: &CMat) -> Matrix {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect()).collect()
}

/// Factor modes keyed by `k`, with the identity at `k = 0` unless given.
fn factor(size: usize, modes: BTreeMap<i64, Matrix>) -> PyResult<Vec<(i64, CMat)>> {
    let mut out = BTreeMap::from([(0, identity(size))]);
    for (k, m) in modes {
        let a = to_mat(&m)?;
        if a.nrows() != size {
            return Err(PyValueError::new_err(format!("mode {k} has size {}, expected {size}", a.nrows())));
        }
        out.insert(k, a);
    }
    Ok(out.into_iter().collect())
}

/// A factorized loop `J = Psi_-^{-1} Psi_+` on one circle.
#[pyclass(frozen)]
#[derive(Clone)]
struct Loop {
    inner: tau::FactorizationPair,
}

#[pymethods]
impl Loop {
    /// Factors given by their modes: `plus` keys are `k >= 0`, `minus` keys `k <= 0`.
    #[staticmethod]
    #[pyo3(signature = (size, plus, minus, center = C64::new(0.0, 0.0), radius = 1.0, window = 64))]
    fn from_modes(
        size: usize,
        plus: BTreeMap<i64, Matrix>,
        minus: BTreeMap<i64, Matrix>,
        center: C64,
        radius: f64,
        window: usize,
    ) -> PyResult<Self> {
        if plus.keys().any(|k| *k < 0) || minus.keys().any(|k| *k > 0) {
            return Err(PyValueError::new_err("plus modes need k >= 0 and minus modes k <= 0"));
        }
        let circle = tau::Circle::new(center, radius);
        let p = tau::MatrixLoop::from_modes(size, circle, window, factor(size, plus)?).map_err(err)?;
        let m = tau::MatrixLoop::from_modes(size, circle, window, factor(size, minus)?).map_err(err)?;
        Ok(Self { inner: tau::FactorizationPair::new(p, m).map_err(err)? })
    }

    /// Scalar loop `exp V` with `V = sum_k v_k w^k`, split into its
    /// non-negative and negative parts.
    #[staticmethod]
    #[pyo3(signature = (log, center = C64::new(0.0, 0.0), radius = 1.0, window = 64))]
    fn from_log(log: BTreeMap<i64, C64>, center: C64, radius: f64, window: usize) -> PyResult<Self> {
        let circle = tau::Circle::new(center, radius);
        let cfg = tau::LoopConfig::with_window(window);
        let sum = |keep: fn(i64) -> bool, z: C64| -> C64 {
            let w = circle.to_local(z);
            log.iter().filter(|(k, _)| keep(**k)).map(|(k, v)| v * w.powi(*k as i32)).sum()
        };
        let p = tau::MatrixLoop::from_samples(|z| CMat::from_element(1, 1, sum(|k| k >= 0, z).exp()), 1, circle, &cfg)
            .map_err(err)?;
        let m = tau::MatrixLoop::from_samples(|z| CMat::from_element(1, 1, (-sum(|k| k < 0, z)).exp()), 1, circle, &cfg)
            .map_err(err)?;
        Ok(Self { inner: tau::FactorizationPair::new(p, m).map_err(err)? })
    }

    /// The Painleve VI loop on the circle `|z| = radius` separating `{0, t}` from `{1, inf}`.
    #[staticmethod]
    #[pyo3(signature = (theta0, theta_t, theta1, theta_inf, sigma, t, kappa_plus = C64::new(1.0, 0.0), kappa_minus = C64::new(1.0, 0.0), radius = None, window = 64))]
    #[allow(clippy::too_many_arguments)]
    fn pvi(
        theta0: C64,
        theta_t: C64,
        theta1: C64,
        theta_inf: C64,
        sigma: C64,
        t: f64,
        kappa_plus: C64,
        kappa_minus: C64,
        radius: Option<f64>,
        window: usize,
    ) -> PyResult<Self> {
        let spec = tau::FuchsianSpec { theta0, theta_t, theta1, theta_inf, sigma, kappa_plus, kappa_minus, t };
        let cfg = tau::LoopConfig::with_window(window);
        Ok(Self { inner: tau::pvi_jump(&spec, radius, &cfg).map_err(err)? })
    }

    /// The Gelfand-Dickey loop of the given rank with times `{j: t_j}`.
    #[staticmethod]
    #[pyo3(signature = (rank, times, x = C64::new(0.0, 0.0), polynomial = false, window = 64))]
    fn gelfand_dickey(rank: usize, times: BTreeMap<usize, C64>, x: C64, polynomial: bool, window: usize) -> PyResult<Self> {
        Ok(Self { inner: tau::gd_jump(&gd(rank, times, x, polynomial, window)).map_err(err)? })
    }

    #[getter]
    fn size(&self) -> usize {
        self.inner.size()
    }

    /// Fourier mode `k` of the jump.
    fn jump_mode(&self, k: i64) -> PyResult<Matrix> {
        Ok(from_mat(&self.inner.jump().map_err(err)?.mode(k)))
    }

    /// Kernel modes below the cutoff `q`.
    #[pyo3(signature = (cutoff, tail_tol = 1e-10))]
    fn modes(&self, cutoff: f64, tail_tol: f64) -> PyResult<ModeBlock> {
        Ok(ModeBlock { inner: kernel_modes_with_tol(&self.inner, cutoff, tail_tol).map_err(err)? })
    }

    /// `tau = det(1 + L)` at the cutoff.
    #[pyo3(signature = (cutoff = 24.0, tail_tol = 1e-10))]
    fn tau(&self, cutoff: f64, tail_tol: f64) -> PyResult<TauResult> {
        tau_determinant(&self.modes(cutoff, tail_tol)?)
    }

    /// Determinant of the order-`n` block Toeplitz matrix of the jump,
    /// normalized by the geometric mean.
    fn toeplitz_limit(&self, n: usize) -> PyResult<C64> {
        let j = self.inner.jump().map_err(err)?;
        Ok(tau::widom_sequence(&j, n, false).map_err(err)?.last())
    }
}

fn gd(rank: usize, times: BTreeMap<usize, C64>, x: C64, polynomial: bool, window: usize) -> tau::GDSpec {
    let mut spec = tau::GDSpec::new(rank);
    spec.times = times;
    spec.x = x;
    spec.polynomial = polynomial;
    spec.window = window;
    spec
}

#[pyclass(frozen)]
struct ModeBlock {
    inner: tau::ModeBlock,
}

#[pymethods]
impl ModeBlock {
    #[getter]
    fn size(&self) -> usize {
        self.inner.size()
    }

    #[getter]
    fn count(&self) -> usize {
        self.inner.count()
    }

    #[getter]
    fn cutoff(&self) -> f64 {
        self.inner.cutoff()
    }

    /// Block `a_{ij}`, indices from 0.
    fn a(&self, i: usize, j: usize) -> PyResult<Matrix> {
        self.check(i, j)?;
        Ok(from_mat(self.inner.a(i, j)))
    }

    fn d(&self, i: usize, j: usize) -> PyResult<Matrix> {
        self.check(i, j)?;
        Ok(from_mat(self.inner.d(i, j)))
    }
}

impl ModeBlock {
    fn check(&self, i: usize, j: usize) -> PyResult<()> {
        let n = self.inner.count();
        if i >= n || j >= n {
            return Err(PyValueError::new_err(format!("index ({i}, {j}) outside {n} modes")));
        }
        Ok(())
    }
}

#[pyclass(frozen, get_all)]
struct TauResult {
    value: C64,
    cutoff: f64,
    diagnostic: f64,
}

#[pymethods]
impl TauResult {
    fn __repr__(&self) -> String {
        format!("TauResult(value={}, cutoff={}, diagnostic={:e})", self.value, self.cutoff, self.diagnostic)
    }
}

impl From<tau::TauResult> for TauResult {
    fn from(r: tau::TauResult) -> Self {
        Self { value: r.value, cutoff: r.cutoff, diagnostic: r.diagnostic }
    }
}

#[pyfunction]
fn tau_determinant(modes: &ModeBlock) -> PyResult<TauResult> {
    Ok(tau::tau_determinant(&modes.inner).map_err(err)?.into())
}

/// Partial sum of the minor expansion up to total weight `weight`.
#[pyfunction]
fn series_tau(modes: &ModeBlock, weight: u64) -> PyResult<TauResult> {
    Ok(tau::series_tau(&modes.inner, weight).map_err(err)?.into())
}

/// Exact Schur-function modes of a Gelfand-Dickey loop.
#[pyfunction]
#[pyo3(signature = (rank, times, cutoff, x = C64::new(0.0, 0.0), polynomial = false, window = 64))]
fn schur_modes(rank: usize, times: BTreeMap<usize, C64>, cutoff: f64, x: C64, polynomial: bool, window: usize) -> PyResult<ModeBlock> {
    let spec = gd(rank, times, x, polynomial, window);
    Ok(ModeBlock { inner: tau::schur_modes(&spec, cutoff).map_err(err)? })
}

/// Tau function of non-intersecting circles, each given with its loop.
#[pyfunction]
#[pyo3(signature = (loops, cutoff = 24.0))]
fn tau_multicircle(loops: Vec<Loop>, cutoff: f64) -> PyResult<TauResult> {
    let circles: Vec<_> = loops.iter().map(|l| l.inner.circle()).collect();
    let contour = tau::build_contour(&circles).map_err(err)?;
    let pairs = loops.into_iter().map(|l| l.inner).collect();
    let jumps = tau::JumpAssignment::new(&contour, pairs).map_err(err)?;
    Ok(tau::tau_multicircle(&contour, &jumps, cutoff).map_err(err)?.into())
}

#[pymodule]
fn widom_tau(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", tau::VERSION)?;
    m.add_class::<Loop>()?;
    m.add_class::<ModeBlock>()?;
    m.add_class::<TauResult>()?;
    m.add_function(wrap_pyfunction!(tau_determinant, m)?)?;
    m.add_function(wrap_pyfunction!(series_tau, m)?)?;
    m.add_function(wrap_pyfunction!(schur_modes, m)?)?;
    m.add_function(wrap_pyfunction!(tau_multicircle, m)?)?;
    Ok(())
}

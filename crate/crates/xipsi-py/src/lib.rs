//! Python extension module exposing the main types and operations:
//! measure evaluation for every family descriptor, the grid representation,
//! the strip family, region-boundary functions and the convex-program
//! solver.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use xipsi::boundary;
use xipsi::descriptor::Descriptor;
use xipsi::families;
use xipsi::gridcop::{GridCopula, MeasureReport, Method};
use xipsi::optimize::{density_from_field, qp_solve, QpProblem};
use xipsi::twoparam::StripCopula;

fn err(e: xipsi::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// A (xi, psi) measure report.
#[pyclass(name = "Measures", frozen)]
struct PyMeasures {
    #[pyo3(get)]
    xi: f64,
    #[pyo3(get)]
    psi: f64,
    #[pyo3(get)]
    tau: Option<f64>,
    #[pyo3(get)]
    method: String,
    #[pyo3(get)]
    n: f64,
}

#[pymethods]
impl PyMeasures {
    fn __repr__(&self) -> String {
        format!(
            "Measures(xi={:.6}, psi={:.6}, tau={:?}, method='{}', n={})",
            self.xi, self.psi, self.tau, self.method, self.n
        )
    }
}

impl From<MeasureReport> for PyMeasures {
    fn from(m: MeasureReport) -> Self {
        PyMeasures {
            xi: m.xi,
            psi: m.psi,
            tau: m.tau,
            method: match m.method {
                Method::Exact => "exact".into(),
                Method::Grid => "grid".into(),
                Method::Quadrature => "quadrature".into(),
            },
            n: m.n_or_tol,
        }
    }
}

/// The discretized conditional-CDF field h(t_i, v_j) at cell midpoints.
#[pyclass(name = "Grid", frozen)]
struct PyGrid {
    inner: GridCopula,
}

#[pymethods]
impl PyGrid {
    /// Builds from a row-major matrix (rows indexed by t, columns by v).
    #[staticmethod]
    #[pyo3(signature = (rows, feas_tol=None))]
    fn from_matrix(rows: Vec<Vec<f64>>, feas_tol: Option<f64>) -> PyResult<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(PyValueError::new_err("matrix must be square"));
        }
        let flat: Vec<f64> = rows.into_iter().flatten().collect();
        let tol = feas_tol.unwrap_or(2.0 / n as f64);
        Ok(PyGrid {
            inner: GridCopula::from_matrix(n, flat, tol).map_err(err)?,
        })
    }

    #[staticmethod]
    fn from_csv(path: &str) -> PyResult<Self> {
        Ok(PyGrid {
            inner: GridCopula::read_csv_path(std::path::Path::new(path)).map_err(err)?,
        })
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    fn xi(&self) -> f64 {
        self.inner.xi()
    }

    fn psi(&self) -> f64 {
        self.inner.psi()
    }

    fn tau(&self) -> f64 {
        self.inner.tau()
    }

    fn markov_diag(&self) -> Vec<f64> {
        self.inner.markov_diag()
    }

    #[pyo3(signature = (tol=0.0))]
    fn is_si(&self, tol: f64) -> bool {
        self.inner.is_si(tol)
    }

    fn measures(&self) -> PyMeasures {
        self.inner.measures().into()
    }

    fn to_csv(&self, path: &str) -> PyResult<()> {
        self.inner
            .write_csv_path(std::path::Path::new(path))
            .map_err(err)
    }
}

/// A member of the two-parameter strip family.
#[pyclass(name = "Strip", frozen)]
struct PyStrip {
    inner: StripCopula,
}

#[pymethods]
impl PyStrip {
    #[new]
    fn new(alpha: f64, beta: f64) -> PyResult<Self> {
        Ok(PyStrip {
            inner: StripCopula::build(alpha, beta).map_err(err)?,
        })
    }

    #[staticmethod]
    fn from_path(mu: f64) -> PyResult<Self> {
        Ok(PyStrip {
            inner: StripCopula::from_path(mu).map_err(err)?,
        })
    }

    #[getter]
    fn alpha(&self) -> f64 {
        self.inner.alpha()
    }

    #[getter]
    fn beta(&self) -> f64 {
        self.inner.beta()
    }

    fn density(&self, u: f64, v: f64) -> f64 {
        self.inner.density(u, v)
    }

    fn partial(&self, u: f64, v: f64) -> f64 {
        self.inner.partial(u, v)
    }

    #[pyo3(signature = (tol=1e-4))]
    fn measures(&self, tol: f64) -> PyResult<PyMeasures> {
        Ok(self.inner.measures(tol).map_err(err)?.into())
    }
}

/// Measures for a JSON family descriptor, e.g.
/// `{"family":"frechet","w_pi":0.5,"w_m":0.5,"w_w":0}`.
#[pyfunction]
#[pyo3(signature = (descriptor, grid_n=400, quad_tol=1e-6))]
fn measures(descriptor: &str, grid_n: usize, quad_tol: f64) -> PyResult<PyMeasures> {
    let d = Descriptor::from_json(descriptor).map_err(err)?;
    Ok(d.measures(grid_n, quad_tol).map_err(err)?.into())
}

#[pyfunction]
fn frechet_measures(w_pi: f64, w_m: f64, w_w: f64) -> PyResult<PyMeasures> {
    Ok(families::FrechetMixture::new(w_pi, w_m, w_w)
        .map_err(err)?
        .measures()
        .into())
}

#[pyfunction]
fn checkerboard_measures(delta: Vec<Vec<f64>>) -> PyResult<PyMeasures> {
    Ok(families::CheckerboardMatrix::from_rows(delta)
        .map_err(err)?
        .measures()
        .into())
}

#[pyfunction]
fn ordinal_sum_measures(intervals: Vec<(f64, f64)>) -> PyResult<PyMeasures> {
    Ok(families::OrdinalSumPi::new(intervals)
        .map_err(err)?
        .measures()
        .into())
}

#[pyfunction]
fn cdown_measures(mu: f64) -> PyResult<PyMeasures> {
    Ok(families::cdown_measures(mu).map_err(err)?.into())
}

/// Maximal psi for a given xi: sqrt(xi).
#[pyfunction]
fn upper_psi_max(x: f64) -> PyResult<f64> {
    boundary::upper_psi_max(x).map_err(err)
}

/// Point (xi, psi) of the Jensen lower-bound curve at mu.
#[pyfunction]
fn jensen_curve(mu: f64) -> PyResult<(f64, f64)> {
    let p = boundary::jensen_curve(mu).map_err(err)?;
    Ok((p.xi, p.psi))
}

/// Unique mu in [0,2] with psi-curve value y.
#[pyfunction]
fn mu_of_y(y: f64) -> PyResult<f64> {
    boundary::mu_of_y(y).map_err(err)
}

/// Region membership verdict as a dict.
#[pyfunction]
fn region_check(py: Python<'_>, xi: f64, psi: f64) -> PyResult<Bound<'_, pyo3::types::PyDict>> {
    let v = boundary::region_check(boundary::RegionPoint::new(xi, psi).map_err(err)?)
        .map_err(err)?;
    let d = pyo3::types::PyDict::new(py);
    d.set_item("in_upper", v.in_upper)?;
    d.set_item("in_lower_bound", v.in_lower_bound)?;
    d.set_item("in_si_region", v.in_si_region)?;
    d.set_item("margin_upper", v.margin_upper)?;
    d.set_item("margin_lower", v.margin_lower)?;
    Ok(d)
}

#[pyfunction]
#[pyo3(signature = (xi, psi, tol=0.0))]
fn si_region_check(xi: f64, psi: f64, tol: f64) -> PyResult<bool> {
    Ok(boundary::si_region_check(
        boundary::RegionPoint::new(xi, psi).map_err(err)?,
        tol,
    ))
}

/// Max stationarity residual of the upper-boundary KKT candidate on an
/// n-by-n midpoint grid.
#[pyfunction]
fn kkt_residual_upper(x: f64, n: usize) -> PyResult<f64> {
    boundary::kkt_residual_upper(x, n).map_err(err)
}

/// Path parameters (alpha(mu), beta(mu)) of the strip family.
#[pyfunction]
fn path_params(mu: f64) -> PyResult<(f64, f64)> {
    let p = xipsi::twoparam::path_params(mu).map_err(err)?;
    Ok((p.alpha, p.beta))
}

/// Sampled region curve as rows (param, xi, psi);
/// curve is one of "upper", "jensen", "si_lower", "path".
#[pyfunction]
#[pyo3(signature = (curve, samples, quad_tol=1e-5))]
fn boundary_curve(curve: &str, samples: usize, quad_tol: f64) -> PyResult<Vec<(f64, f64, f64)>> {
    let c: boundary::Curve = curve.parse().map_err(err)?;
    Ok(boundary::boundary_export(c, samples, quad_tol)
        .map_err(err)?
        .into_iter()
        .map(|r| (r[0], r[1], r[2]))
        .collect())
}

/// Solves the discretized convex program; returns
/// (grid, objective, iterations, feasibility_residual, density_rows).
#[pyfunction]
#[pyo3(signature = (mu, n, max_iters=200, obj_tol=1e-12))]
fn solve_qp(
    py: Python<'_>,
    mu: f64,
    n: usize,
    max_iters: usize,
    obj_tol: f64,
) -> PyResult<Bound<'_, pyo3::types::PyDict>> {
    let sol = qp_solve(QpProblem::new(mu, n).map_err(err)?, max_iters, obj_tol).map_err(err)?;
    let (density, _) = density_from_field(&sol.h);
    let h_rows: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| sol.h.value(i, j)).collect())
        .collect();
    let density_rows: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| density[i * n + j]).collect())
        .collect();
    let d = pyo3::types::PyDict::new(py);
    d.set_item("h", h_rows)?;
    d.set_item("density", density_rows)?;
    d.set_item("objective", sol.objective)?;
    d.set_item("xi", sol.h.xi())?;
    d.set_item("psi", sol.h.psi())?;
    d.set_item("iterations", sol.iterations)?;
    d.set_item("feasibility_residual", sol.feasibility_residual)?;
    d.set_item("stationarity_residual", sol.stationarity_residual)?;
    Ok(d)
}

#[pymodule]
fn xipsi_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyMeasures>()?;
    m.add_class::<PyGrid>()?;
    m.add_class::<PyStrip>()?;
    m.add_function(wrap_pyfunction!(measures, m)?)?;
    m.add_function(wrap_pyfunction!(frechet_measures, m)?)?;
    m.add_function(wrap_pyfunction!(checkerboard_measures, m)?)?;
    m.add_function(wrap_pyfunction!(ordinal_sum_measures, m)?)?;
    m.add_function(wrap_pyfunction!(cdown_measures, m)?)?;
    m.add_function(wrap_pyfunction!(upper_psi_max, m)?)?;
    m.add_function(wrap_pyfunction!(jensen_curve, m)?)?;
    m.add_function(wrap_pyfunction!(mu_of_y, m)?)?;
    m.add_function(wrap_pyfunction!(region_check, m)?)?;
    m.add_function(wrap_pyfunction!(si_region_check, m)?)?;
    m.add_function(wrap_pyfunction!(kkt_residual_upper, m)?)?;
    m.add_function(wrap_pyfunction!(path_params, m)?)?;
    m.add_function(wrap_pyfunction!(boundary_curve, m)?)?;
    m.add_function(wrap_pyfunction!(solve_qp, m)?)?;
    Ok(())
}

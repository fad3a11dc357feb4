//! Python bindings for the conditional copula estimators.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use condcop_core::copula::{Provenance, PseudoObservations as CorePseudo};
use condcop_core::harness::{self, ExperimentConfig as CoreConfig, ReplicationMode};
use condcop_core::{gauss, loclin, Error};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Io(_) | Error::Csv(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

/// Limit standard deviation of `sqrt(n) (C_n(u) - C(u))` under a Gaussian copula.
#[pyfunction]
fn limit_sigma(u1: f64, u2: f64, rho: f64) -> PyResult<f64> {
    condcop_core::limit_sigma(u1, u2, rho).map_err(to_py)
}

#[pyfunction]
fn partial_correlation(rho12: f64, rho1x: f64, rho2x: f64) -> PyResult<f64> {
    condcop_core::partial_correlation(rho12, rho1x, rho2x).map_err(to_py)
}

#[pyfunction]
fn gaussian_copula(u1: f64, u2: f64, rho: f64) -> PyResult<f64> {
    condcop_core::gaussian_copula(u1, u2, rho).map_err(to_py)
}

#[pyfunction]
fn bivariate_normal_cdf(z1: f64, z2: f64, rho: f64) -> f64 {
    condcop_core::bivariate_normal_cdf(z1, z2, rho)
}

#[pyfunction]
fn norm_ppf(p: f64) -> PyResult<f64> {
    condcop_core::std_normal_quantile(p).map_err(to_py)
}

#[pyfunction]
fn norm_cdf(z: f64) -> f64 {
    condcop_core::std_normal_cdf(z)
}

/// Smoothed local-linear estimator of `F(y|x)`.
#[pyclass(name = "ConditionalCdf", frozen)]
struct ConditionalCdf {
    inner: loclin::ConditionalCdfFit,
}

#[pymethods]
impl ConditionalCdf {
    #[new]
    fn new(x: Vec<f64>, y: Vec<f64>, h1: f64, h2: f64) -> PyResult<Self> {
        let bw = loclin::Bandwidths::new(h1, h2).map_err(to_py)?;
        let inner = loclin::ConditionalCdfFit::from_xy(&x, &y, bw).map_err(to_py)?;
        Ok(Self { inner })
    }

    fn cdf(&self, y: f64, x: f64) -> PyResult<f64> {
        self.inner.cdf(y, x).map_err(to_py)
    }

    fn density(&self, y: f64, x: f64) -> PyResult<f64> {
        self.inner.density(y, x).map_err(to_py)
    }

    fn quantile(&self, u: f64, x: f64) -> PyResult<f64> {
        self.inner.quantile(u, x).map_err(to_py)
    }

    fn determinant(&self, x: f64) -> f64 {
        self.inner.determinant(x)
    }

    /// `(min_density, violation)` over the central band `[gamma, 1 - gamma]`.
    fn monotonicity(&self, x: f64, gamma: f64) -> PyResult<(f64, bool)> {
        let r = self.inner.monotonicity_check(x, gamma).map_err(to_py)?;
        Ok((r.min_density, r.violation))
    }

    #[getter]
    fn bandwidths(&self) -> (f64, f64) {
        let bw = self.inner.bandwidths();
        (bw.h1, bw.h2)
    }

    fn __len__(&self) -> usize {
        self.inner.sample().len()
    }
}

/// Pseudo-observations and their empirical copula.
#[pyclass(name = "PseudoObservations", frozen)]
struct PseudoObservations {
    inner: CorePseudo,
}

#[pymethods]
impl PseudoObservations {
    #[new]
    #[pyo3(signature = (pairs, provenance = "estimated"))]
    fn new(pairs: Vec<(f64, f64)>, provenance: &str) -> PyResult<Self> {
        let provenance: Provenance = provenance.parse().map_err(to_py)?;
        Ok(Self {
            inner: CorePseudo::new(pairs, provenance).map_err(to_py)?,
        })
    }

    /// Empirical copula at `(u1, u2)`.
    fn copula(&self, u1: f64, u2: f64) -> PyResult<f64> {
        self.inner.copula().eval(u1, u2).map_err(to_py)
    }

    #[getter]
    fn provenance(&self) -> &'static str {
        self.inner.provenance().as_str()
    }

    fn pairs(&self) -> Vec<(f64, f64)> {
        self.inner.pairs().to_vec()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }
}

/// Trivariate Gaussian reference model on the copula scale.
#[pyclass(name = "GaussianModel", frozen)]
struct GaussianModel {
    inner: gauss::GaussianCopulaSpec,
}

#[pymethods]
impl GaussianModel {
    #[new]
    #[pyo3(signature = (rho1x = 0.4, rho2x = -0.2, rho12 = 0.3689989))]
    fn new(rho1x: f64, rho2x: f64, rho12: f64) -> PyResult<Self> {
        Ok(Self {
            inner: gauss::GaussianCopulaSpec::new(rho1x, rho2x, rho12).map_err(to_py)?,
        })
    }

    #[getter]
    fn rho12_given_x(&self) -> f64 {
        self.inner.rho12_given_x()
    }

    fn copula(&self, u1: f64, u2: f64) -> PyResult<f64> {
        self.inner.copula(u1, u2).map_err(to_py)
    }

    /// True conditional CDF of margin `j` (1 or 2).
    fn conditional_cdf(&self, j: usize, y: f64, x: f64) -> PyResult<f64> {
        check_margin(j)?;
        gauss::conditional_margin(y, x, self.inner.margin(j).rho).map_err(to_py)
    }

    fn conditional_quantile(&self, j: usize, u: f64, x: f64) -> PyResult<f64> {
        check_margin(j)?;
        self.inner.margin(j).quantile(u, x).map_err(to_py)
    }

    /// `(x, y1, y2)` lists of length `n`.
    fn sample(&self, n: usize, seed: u64) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let s = self.inner.sample(n, seed);
        (s.x, s.y1, s.y2)
    }
}

fn check_margin(j: usize) -> PyResult<()> {
    if j == 1 || j == 2 {
        Ok(())
    } else {
        Err(PyValueError::new_err(format!("margin index must be 1 or 2, got {j}")))
    }
}

/// Monte Carlo configuration.
#[pyclass(name = "ExperimentConfig", frozen)]
struct ExperimentConfig {
    inner: CoreConfig,
}

#[pymethods]
impl ExperimentConfig {
    #[staticmethod]
    fn desk() -> Self {
        Self {
            inner: CoreConfig::desk(),
        }
    }

    #[staticmethod]
    fn full_scale() -> Self {
        Self {
            inner: CoreConfig::full_scale(),
        }
    }

    #[staticmethod]
    fn from_toml(text: &str) -> PyResult<Self> {
        Ok(Self {
            inner: CoreConfig::from_toml_str(text).map_err(to_py)?,
        })
    }

    fn to_toml(&self) -> String {
        self.inner.to_toml_string()
    }

    #[getter]
    fn replications(&self) -> usize {
        self.inner.replications
    }

    #[getter]
    fn n_grid(&self) -> Vec<usize> {
        self.inner.n_grid.clone()
    }

    #[getter]
    fn master_seed(&self) -> u64 {
        self.inner.master_seed
    }

    #[getter]
    fn u(&self) -> (f64, f64) {
        self.inner.u
    }

    /// One replication as a dict with the replication-record fields.
    #[pyo3(signature = (n, rep_index, oracle_only = false))]
    fn run_replication<'py>(
        &self,
        py: Python<'py>,
        n: usize,
        rep_index: usize,
        oracle_only: bool,
    ) -> PyResult<Bound<'py, PyDict>> {
        let mode = if oracle_only {
            ReplicationMode::OracleOnly
        } else {
            ReplicationMode::Full
        };
        let cfg = &self.inner;
        let rec = py
            .detach(|| harness::run_replication_with(cfg, n, rep_index, mode))
            .map_err(to_py)?;
        let d = PyDict::new(py);
        d.set_item("n", rec.n)?;
        d.set_item("rep_index", rec.rep_index)?;
        d.set_item("seed", rec.seed)?;
        d.set_item("c_hat", rec.c_hat)?;
        d.set_item("c_oracle", rec.c_oracle)?;
        d.set_item("degenerate_count", rec.degenerate_count)?;
        d.set_item("sup_margin_error", rec.sup_margin_error)?;
        d.set_item("failed", rec.failed)?;
        Ok(d)
    }
}

#[pymodule]
#[pyo3(name = "condcop")]
fn condcop_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(limit_sigma, m)?)?;
    m.add_function(wrap_pyfunction!(partial_correlation, m)?)?;
    m.add_function(wrap_pyfunction!(gaussian_copula, m)?)?;
    m.add_function(wrap_pyfunction!(bivariate_normal_cdf, m)?)?;
    m.add_function(wrap_pyfunction!(norm_ppf, m)?)?;
    m.add_function(wrap_pyfunction!(norm_cdf, m)?)?;
    m.add_class::<ConditionalCdf>()?;
    m.add_class::<PseudoObservations>()?;
    m.add_class::<GaussianModel>()?;
    m.add_class::<ExperimentConfig>()?;
    Ok(())
}

use christoffel::asymptotics::{reference_table, SweepConfig};
use christoffel::{io, BasisKind, ChristoffelEvaluator, Domain, MomentMode, SearchConfig};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn err(e: christoffel::Error) -> PyErr {
    use christoffel::Error::*;
    match e {
        Parse(_) | DimensionMismatch { .. } | OutOfRange(_) | InvalidDomain(_) | SingularMap => {
            PyValueError::new_err(e.to_string())
        }
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

// structured results travel as JSON text and come back as dicts
fn to_py<T: serde::Serialize>(py: Python<'_>, v: &T) -> PyResult<Py<PyAny>> {
    let text = serde_json::to_string(v).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

fn search(resolution: Option<usize>) -> SearchConfig {
    let mut cfg = SearchConfig::default();
    if let Some(r) = resolution {
        cfg.resolution = r;
    }
    cfg
}

#[pyclass(name = "Domain", module = "pychristoffel", frozen)]
struct PyDomain {
    inner: Domain,
}

#[pymethods]
impl PyDomain {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self {
            inner: io::parse_domain(text).map_err(err)?,
        })
    }

    fn to_json(&self) -> String {
        io::domain_to_string(&self.inner)
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn contains(&self, x: Vec<f64>) -> PyResult<bool> {
        if x.len() != self.inner.dim() {
            return Err(err(christoffel::Error::DimensionMismatch {
                expected: self.inner.dim(),
                found: x.len(),
            }));
        }
        Ok(self.inner.contains(&x))
    }

    fn sigma_reference(&self) -> Option<f64> {
        christoffel::sigma_reference(&self.inner)
    }

    fn __repr__(&self) -> String {
        format!("Domain({})", self.to_json())
    }
}

#[pyclass(name = "Evaluator", module = "pychristoffel", frozen)]
struct PyEvaluator {
    inner: ChristoffelEvaluator,
}

#[pymethods]
impl PyEvaluator {
    #[new]
    #[pyo3(signature = (domain, degree, samples=None, seed=0))]
    fn new(py: Python<'_>, domain: &PyDomain, degree: usize, samples: Option<usize>, seed: u64) -> PyResult<Self> {
        let mode = match samples {
            Some(samples) => MomentMode::Sampled { samples, seed },
            None => MomentMode::Exact,
        };
        let d = domain.inner.clone();
        let inner = py
            .detach(move || ChristoffelEvaluator::build(&d, degree, BasisKind::TensorLegendre, mode))
            .map_err(err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn degree(&self) -> usize {
        self.inner.degree()
    }

    #[getter]
    fn degraded(&self) -> bool {
        self.inner.is_degraded()
    }

    fn christoffel_at(&self, x: Vec<f64>) -> PyResult<f64> {
        self.inner.christoffel_at(&x).map_err(err)
    }

    fn kernel_at(&self, x: Vec<f64>, y: Vec<f64>) -> PyResult<f64> {
        self.inner.kernel_at(&x, &y).map_err(err)
    }

    fn extremal_polynomial(&self, x: Vec<f64>) -> PyResult<Vec<f64>> {
        self.inner.extremal_polynomial(&x).map_err(err)
    }

    #[pyo3(signature = (resolution=None))]
    fn max(&self, py: Python<'_>, resolution: Option<usize>) -> PyResult<Py<PyAny>> {
        let cfg = search(resolution);
        let report = py.detach(|| self.inner.christoffel_max(&cfg)).map_err(err)?;
        to_py(py, &report)
    }
}

#[pyfunction]
#[pyo3(signature = (domain, degrees, resolution=None))]
fn fit_sigma(py: Python<'_>, domain: &PyDomain, degrees: Vec<usize>, resolution: Option<usize>) -> PyResult<Py<PyAny>> {
    let cfg = SweepConfig {
        search: search(resolution),
        ..SweepConfig::default()
    };
    let d = domain.inner.clone();
    let fit = py
        .detach(move || christoffel::fit_sigma(&d, &degrees, &cfg))
        .map_err(err)?;
    to_py(py, &fit)
}

#[pyfunction]
fn table(py: Python<'_>) -> PyResult<Py<PyAny>> {
    to_py(py, &reference_table())
}

#[pymodule]
fn pychristoffel(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDomain>()?;
    m.add_class::<PyEvaluator>()?;
    m.add_function(wrap_pyfunction!(fit_sigma, m)?)?;
    m.add_function(wrap_pyfunction!(table, m)?)?;
    Ok(())
}

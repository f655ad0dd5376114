//! Python bindings: `import pyheterogen`.
//!
//! Matrices cross the boundary as lists of rows; reports and experiment rows
//! come back as plain dicts.

use pyo3::exceptions::{PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyModule;

use heterogen::calibrate::{self, CalibrationReference};
use heterogen::experiments::{self, ExperimentConfig, ExperimentKind};
use heterogen::heterophily::{self as het, MuRoute, DEFAULT_EIGEN_CAP};
use heterogen::signal;
use heterogen::Error;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Io(_) => PyOSError::new_err(e.to_string()),
        Error::EigenCapExceeded { .. }
        | Error::UnreachableTarget { .. }
        | Error::InternalConsistency(_)
        | Error::MissingLatents => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn json_to_py<'py>(py: Python<'py>, value: &impl serde::Serialize) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

#[pyclass(name = "Graphon", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyGraphon(heterogen::Graphon);

#[pymethods]
impl PyGraphon {
    /// Erdős–Rényi graphon W(x, y) = p.
    #[staticmethod]
    fn constant(p: f64) -> PyResult<Self> {
        heterogen::Graphon::constant(p).map(Self).map_err(to_py)
    }

    /// Stochastic block model with block fractions `alpha` and matrix `p`.
    #[staticmethod]
    fn sbm(alpha: Vec<f64>, p: Vec<Vec<f64>>) -> PyResult<Self> {
        heterogen::Graphon::step_function(alpha, p).map(Self).map_err(to_py)
    }

    /// W(x, y) = 1 / (1 + exp(-(c (x + y) + b))).
    #[staticmethod]
    #[pyo3(signature = (c, b = 0.0))]
    fn logistic(c: f64, b: f64) -> PyResult<Self> {
        heterogen::Graphon::parametric(heterogen::ParametricKernel::Logistic { c, b })
            .map(Self)
            .map_err(to_py)
    }

    /// W(x, y) = x y.
    #[staticmethod]
    fn product() -> PyResult<Self> {
        heterogen::Graphon::parametric(heterogen::ParametricKernel::Product)
            .map(Self)
            .map_err(to_py)
    }

    /// W(x, y) = a + b (x + y).
    #[staticmethod]
    fn affine(a: f64, b: f64) -> PyResult<Self> {
        heterogen::Graphon::parametric(heterogen::ParametricKernel::Affine { a, b })
            .map(Self)
            .map_err(to_py)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        heterogen::Graphon::from_json(text).map(Self).map_err(to_py)
    }

    fn to_json(&self) -> String {
        self.0.to_json()
    }

    fn evaluate(&self, x: f64, y: f64) -> PyResult<f64> {
        self.0.evaluate(x, y).map_err(to_py)
    }

    fn degree(&self, x: f64) -> PyResult<f64> {
        self.0.degree_function(x).map_err(to_py)
    }

    /// The limit of the heterophily as n grows, for features filtered by `filter`.
    fn limit_heterophily(&self, filter: &PyPolyFilter) -> f64 {
        self.0.limit_heterophily(&filter.0)
    }

    #[pyo3(signature = (n, seed = 0))]
    fn sample(&self, py: Python<'_>, n: usize, seed: u64) -> PyResult<PyGraphSample> {
        py.detach(|| self.0.sample(n, seed)).map(PyGraphSample).map_err(to_py)
    }

    fn max_degree_deviation(&self, sample: &PyGraphSample) -> PyResult<f64> {
        self.0.max_degree_deviation(&sample.0).map_err(to_py)
    }

    fn __repr__(&self) -> String {
        format!("Graphon({})", self.0.to_json())
    }
}

#[pyclass(name = "PolyFilter", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyPolyFilter(signal::PolyFilter);

#[pymethods]
impl PyPolyFilter {
    /// f(λ) = gain · Σ coeffs[k] λ^k.
    #[new]
    #[pyo3(signature = (coeffs, gain = 1.0))]
    fn new(coeffs: Vec<f64>, gain: f64) -> PyResult<Self> {
        signal::PolyFilter::with_gain(coeffs, gain).map(Self).map_err(to_py)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        signal::PolyFilter::from_json(text).map(Self).map_err(to_py)
    }

    fn to_json(&self) -> String {
        self.0.to_json()
    }

    #[getter]
    fn coeffs(&self) -> Vec<f64> {
        self.0.coeffs().to_vec()
    }

    #[getter]
    fn gain(&self) -> f64 {
        self.0.gain()
    }

    fn __call__(&self, lam: f64) -> f64 {
        self.0.eval(lam)
    }

    fn __repr__(&self) -> String {
        format!("PolyFilter(coeffs={:?}, gain={})", self.0.coeffs(), self.0.gain())
    }
}

#[pyclass(name = "GraphSample", frozen)]
struct PyGraphSample(heterogen::GraphSample);

#[pymethods]
impl PyGraphSample {
    #[staticmethod]
    fn from_edges(n: usize, edges: Vec<(usize, usize)>) -> PyResult<Self> {
        heterogen::GraphSample::from_edges(n, edges).map(Self).map_err(to_py)
    }

    #[getter]
    fn n(&self) -> usize {
        self.0.n()
    }

    fn edge_count(&self) -> usize {
        self.0.edge_count()
    }

    /// Unordered edges as (u, v) with u < v, in lexicographic order.
    fn edges(&self) -> Vec<(usize, usize)> {
        self.0.edges().collect()
    }

    fn degrees(&self) -> Vec<usize> {
        self.0.degrees().to_vec()
    }

    fn latents(&self) -> Option<Vec<f64>> {
        self.0.latents().map(<[f64]>::to_vec)
    }

    /// Sorted eigenvalues of (D − A)/n.
    #[pyo3(signature = (cap = DEFAULT_EIGEN_CAP))]
    fn laplacian_spectrum(&self, py: Python<'_>, cap: usize) -> PyResult<Vec<f64>> {
        py.detach(|| het::laplacian_spectrum(&self.0, cap)).map_err(to_py)
    }

    fn __len__(&self) -> usize {
        self.0.n()
    }

    fn __repr__(&self) -> String {
        format!("GraphSample(n={}, edges={})", self.0.n(), self.0.edge_count())
    }
}

#[pyclass(name = "FeatureMatrix", frozen)]
struct PyFeatureMatrix(signal::FeatureMatrix);

#[pymethods]
impl PyFeatureMatrix {
    #[new]
    fn new(rows: Vec<Vec<f64>>) -> PyResult<Self> {
        signal::FeatureMatrix::from_rows(&rows).map(Self).map_err(to_py)
    }

    /// n × d Gaussian entries with variance 1/d.
    #[staticmethod]
    #[pyo3(signature = (n, d, seed = 0))]
    fn white(n: usize, d: usize, seed: u64) -> PyResult<Self> {
        signal::sample_white_features(n, d, seed).map(Self).map_err(to_py)
    }

    #[getter]
    fn n(&self) -> usize {
        self.0.n()
    }

    #[getter]
    fn d(&self) -> usize {
        self.0.d()
    }

    fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.0.n()).map(|i| self.0.row(i).to_vec()).collect()
    }

    fn __repr__(&self) -> String {
        format!("FeatureMatrix(n={}, d={})", self.0.n(), self.0.d())
    }
}

/// X = f(𝓛) X0 for the rescaled Laplacian of `sample`.
#[pyfunction]
fn apply_filter(
    py: Python<'_>,
    filter: &PyPolyFilter,
    sample: &PyGraphSample,
    x0: &PyFeatureMatrix,
) -> PyResult<PyFeatureMatrix> {
    py.detach(|| signal::apply_filter(&filter.0, &sample.0, &x0.0))
        .map(PyFeatureMatrix)
        .map_err(to_py)
}

/// h = Tr(𝓛 X Xᵀ) / n.
#[pyfunction]
fn empirical_heterophily(sample: &PyGraphSample, x: &PyFeatureMatrix) -> PyResult<f64> {
    het::empirical_heterophily(&sample.0, &x.0).map_err(to_py)
}

/// The same quantity as a sum over edges.
#[pyfunction]
fn empirical_heterophily_edge_sum(sample: &PyGraphSample, x: &PyFeatureMatrix) -> PyResult<f64> {
    het::empirical_heterophily_edge_sum(&sample.0, &x.0).map_err(to_py)
}

/// Tr(f(𝓛) 𝓛 f(𝓛)) / n, by `route` "trace" (default), "eigen" or "hutchinson".
#[pyfunction]
#[pyo3(signature = (sample, filter, route = "trace", probes = 64, seed = 0))]
fn expected_heterophily(
    py: Python<'_>,
    sample: &PyGraphSample,
    filter: &PyPolyFilter,
    route: &str,
    probes: usize,
    seed: u64,
) -> PyResult<f64> {
    let route = match route {
        "trace" => MuRoute::Trace,
        "eigen" => MuRoute::Eigen,
        "hutchinson" => MuRoute::Hutchinson { probes, seed },
        other => return Err(PyValueError::new_err(format!("unknown route {other:?}"))),
    };
    py.detach(|| het::expected_heterophily(&sample.0, &filter.0, route)).map_err(to_py)
}

#[pyfunction]
fn spectral_moment(sample: &PyGraphSample, m: u32) -> PyResult<f64> {
    het::spectral_moment(&sample.0, m).map_err(to_py)
}

#[pyfunction]
fn degree_moment(sample: &PyGraphSample, m: u32) -> PyResult<f64> {
    het::degree_moment(&sample.0, m).map_err(to_py)
}

/// Heterophily report for a graph and features, as a dict.
#[pyfunction]
fn measure<'py>(py: Python<'py>, sample: &PyGraphSample, x: &PyFeatureMatrix) -> PyResult<Bound<'py, PyAny>> {
    let report = het::HeterophilyReport::measure(&sample.0, &x.0).map_err(to_py)?;
    json_to_py(py, &report)
}

/// Samples a graph and filtered features; returns (sample, features).
#[pyfunction]
#[pyo3(signature = (graphon, filter, n, d = None, seed = 0))]
fn generate(
    py: Python<'_>,
    graphon: &PyGraphon,
    filter: &PyPolyFilter,
    n: usize,
    d: Option<usize>,
    seed: u64,
) -> PyResult<(PyGraphSample, PyFeatureMatrix)> {
    let d = d.unwrap_or_else(|| signal::default_dimension(n));
    let data = py
        .detach(|| heterogen::generate(&graphon.0, &filter.0, n, d, seed))
        .map_err(to_py)?;
    Ok((PyGraphSample(data.sample), PyFeatureMatrix(data.features)))
}

/// Gain that moves the limit of `base` to `target`, as a dict.
#[pyfunction]
fn calibrate_gain<'py>(
    py: Python<'py>,
    graphon: &PyGraphon,
    base: &PyPolyFilter,
    target: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let result = calibrate::calibrate_gain(&graphon.0, &base.0, target).map_err(to_py)?;
    json_to_py(py, &result)
}

/// Calibrates, then samples a dataset with the calibrated filter.
/// Returns (sample, features, calibration dict).
#[pyfunction]
#[pyo3(signature = (graphon, base, target, n, d = None, seed = 0, reference = "graphon_limit"))]
#[allow(clippy::too_many_arguments)]
fn generate_with_target<'py>(
    py: Python<'py>,
    graphon: &PyGraphon,
    base: &PyPolyFilter,
    target: f64,
    n: usize,
    d: Option<usize>,
    seed: u64,
    reference: &str,
) -> PyResult<(PyGraphSample, PyFeatureMatrix, Bound<'py, PyAny>)> {
    let reference = match reference {
        "graphon_limit" => CalibrationReference::GraphonLimit,
        "pilot_sample" => CalibrationReference::PilotSample,
        other => return Err(PyValueError::new_err(format!("unknown reference {other:?}"))),
    };
    let d = d.unwrap_or_else(|| signal::default_dimension(n));
    let (data, result) = py
        .detach(|| calibrate::generate_with_target_using(&graphon.0, &base.0, target, n, d, seed, reference))
        .map_err(to_py)?;
    let result = json_to_py(py, &result)?;
    Ok((PyGraphSample(data.sample), PyFeatureMatrix(data.features), result))
}

/// Runs a "concentration" or "convergence" study; returns a list of row dicts.
#[pyfunction]
#[pyo3(signature = (kind, graphon, filter, sizes, trials, seed = 0))]
fn run_experiment<'py>(
    py: Python<'py>,
    kind: &str,
    graphon: &PyGraphon,
    filter: &PyPolyFilter,
    sizes: Vec<usize>,
    trials: usize,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let kind: ExperimentKind = kind.parse().map_err(to_py)?;
    let cfg = ExperimentConfig::new(graphon.0.clone(), filter.0.clone(), sizes, trials, seed);
    cfg.validate().map_err(to_py)?;
    let rows = py.detach(|| experiments::run(kind, &cfg)).map_err(to_py)?;
    json_to_py(py, &rows)
}

#[pymodule]
fn pyheterogen(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", heterogen::VERSION)?;
    m.add_class::<PyGraphon>()?;
    m.add_class::<PyPolyFilter>()?;
    m.add_class::<PyGraphSample>()?;
    m.add_class::<PyFeatureMatrix>()?;
    m.add_function(wrap_pyfunction!(apply_filter, m)?)?;
    m.add_function(wrap_pyfunction!(empirical_heterophily, m)?)?;
    m.add_function(wrap_pyfunction!(empirical_heterophily_edge_sum, m)?)?;
    m.add_function(wrap_pyfunction!(expected_heterophily, m)?)?;
    m.add_function(wrap_pyfunction!(spectral_moment, m)?)?;
    m.add_function(wrap_pyfunction!(degree_moment, m)?)?;
    m.add_function(wrap_pyfunction!(measure, m)?)?;
    m.add_function(wrap_pyfunction!(generate, m)?)?;
    m.add_function(wrap_pyfunction!(calibrate_gain, m)?)?;
    m.add_function(wrap_pyfunction!(generate_with_target, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    Ok(())
}

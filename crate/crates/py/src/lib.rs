//! Python bindings. Matrices cross the boundary as row-major nested lists.

use feigh::{Error, Label, LabeledBatch, Matrix, UpdateConfig};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

type Rows = Vec<Vec<f64>>;

fn to_py_err(e: Error) -> PyErr {
    match e {
        Error::NoConvergence { .. } => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

/// Nested rows to a matrix; `rows` pins the row count when the list is empty.
fn matrix(data: &Rows, rows: Option<usize>) -> PyResult<Matrix> {
    if data.is_empty() {
        return Ok(Matrix::zeros(rows.unwrap_or(0), 0));
    }
    let m = Matrix::from_rows(data).map_err(to_py_err)?;
    if let Some(r) = rows {
        if m.rows() != r {
            return Err(PyValueError::new_err(format!(
                "expected {r} rows, got {}",
                m.rows()
            )));
        }
    }
    Ok(m)
}

#[pyclass(name = "LowRankFactor", module = "pyfeigh", skip_from_py_object)]
#[derive(Clone)]
struct PyLowRankFactor(feigh::LowRankFactor);

#[pymethods]
impl PyLowRankFactor {
    #[new]
    fn new(alpha: f64, q: Rows, b: Rows) -> PyResult<Self> {
        let q = matrix(&q, None)?;
        let b = matrix(&b, Some(q.cols()))?;
        feigh::LowRankFactor::new(alpha, q, b)
            .map(Self)
            .map_err(to_py_err)
    }

    #[staticmethod]
    fn scaled_identity(m: usize, alpha: f64) -> PyResult<Self> {
        feigh::LowRankFactor::scaled_identity(m, alpha)
            .map(Self)
            .map_err(to_py_err)
    }

    #[getter]
    fn alpha(&self) -> f64 {
        self.0.alpha()
    }

    #[getter]
    fn q(&self) -> Rows {
        self.0.q().to_rows()
    }

    #[getter]
    fn b(&self) -> Rows {
        self.0.b().to_rows()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.dim()
    }

    #[getter]
    fn rank(&self) -> usize {
        self.0.rank()
    }

    fn __repr__(&self) -> String {
        format!(
            "LowRankFactor(alpha={}, dim={}, rank={})",
            self.0.alpha(),
            self.0.dim(),
            self.0.rank()
        )
    }
}

#[pyclass(name = "WeightedData", module = "pyfeigh", skip_from_py_object)]
#[derive(Clone)]
struct PyWeightedData(feigh::WeightedData);

#[pymethods]
impl PyWeightedData {
    /// `x` and `y` are m-row matrices of already-scaled columns.
    #[new]
    fn new(m: usize, x: Rows, y: Rows) -> PyResult<Self> {
        feigh::WeightedData::new(matrix(&x, Some(m))?, matrix(&y, Some(m))?)
            .map(Self)
            .map_err(to_py_err)
    }

    #[staticmethod]
    fn from_weighted(m: usize, vectors: Rows, weights: Vec<f64>) -> PyResult<Self> {
        feigh::WeightedData::from_weighted(m, &vectors, &weights)
            .map(Self)
            .map_err(to_py_err)
    }

    #[getter]
    fn x(&self) -> Rows {
        self.0.x().to_rows()
    }

    #[getter]
    fn y(&self) -> Rows {
        self.0.y().to_rows()
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }
}

#[pyclass(name = "EigenFactor", module = "pyfeigh", skip_from_py_object)]
#[derive(Clone)]
struct PyEigenFactor(feigh::EigenFactor);

#[pymethods]
impl PyEigenFactor {
    #[getter]
    fn alpha(&self) -> f64 {
        self.0.alpha()
    }

    /// m×r eigenvectors as nested rows.
    #[getter]
    fn vectors(&self) -> Rows {
        self.0.vectors().to_rows()
    }

    /// Offsets `d_i`; eigenvalues are `alpha + d_i`.
    #[getter]
    fn values(&self) -> Vec<f64> {
        self.0.values().to_vec()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.dim()
    }

    #[getter]
    fn rank(&self) -> usize {
        self.0.rank()
    }

    fn eigenvalues(&self) -> Vec<f64> {
        self.0.eigenvalues()
    }

    fn full_spectrum(&self) -> Vec<f64> {
        self.0.full_spectrum()
    }

    fn __repr__(&self) -> String {
        format!(
            "EigenFactor(alpha={}, dim={}, rank={})",
            self.0.alpha(),
            self.0.dim(),
            self.0.rank()
        )
    }
}

#[pyclass(name = "MetricModel", module = "pyfeigh", skip_from_py_object)]
#[derive(Clone)]
struct PyMetricModel(feigh::MetricModel);

#[pymethods]
impl PyMetricModel {
    #[new]
    fn new(factor: &PyLowRankFactor) -> PyResult<Self> {
        feigh::MetricModel::new(factor.0.clone())
            .map(Self)
            .map_err(to_py_err)
    }

    #[staticmethod]
    fn scaled_identity(m: usize, alpha: f64) -> PyResult<Self> {
        feigh::MetricModel::scaled_identity(m, alpha)
            .map(Self)
            .map_err(to_py_err)
    }

    #[getter]
    fn factor(&self) -> PyLowRankFactor {
        PyLowRankFactor(self.0.factor().clone())
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.dim()
    }

    #[getter]
    fn rank(&self) -> usize {
        self.0.rank()
    }

    fn distance(&self, x: Vec<f64>) -> PyResult<f64> {
        self.0.distance(&x).map_err(to_py_err)
    }

    /// Returns `"regular"` or `"irregular"`.
    fn classify(&self, x: Vec<f64>, threshold: f64) -> PyResult<&'static str> {
        Ok(match self.0.classify(&x, threshold).map_err(to_py_err)? {
            Label::Regular => "regular",
            Label::Irregular => "irregular",
        })
    }

    fn full_spectrum(&self) -> Vec<f64> {
        self.0.full_spectrum()
    }

    /// Returns the updated model and the number of floored eigenvalues.
    #[pyo3(signature = (vectors, weights, decay, gain, rank_cap, floor=None))]
    fn update(
        &self,
        vectors: Rows,
        weights: Vec<f64>,
        decay: f64,
        gain: f64,
        rank_cap: usize,
        floor: Option<f64>,
    ) -> PyResult<(Self, usize)> {
        let batch = LabeledBatch::new(vectors, weights).map_err(to_py_err)?;
        let mut cfg = UpdateConfig::new(decay, gain, rank_cap);
        cfg.floor = floor;
        let (model, report) = self.0.update(&batch, &cfg).map_err(to_py_err)?;
        Ok((Self(model), report.floored))
    }
}

/// Returns `(u, s, v)`.
#[pyfunction]
fn thin_svd(a: Rows) -> PyResult<(Rows, Vec<f64>, Rows)> {
    let svd = feigh::thin_svd(&matrix(&a, None)?).map_err(to_py_err)?;
    Ok((svd.u.to_rows(), svd.s, svd.v.to_rows()))
}

/// Returns `(values, vectors)` with eigenvalues descending.
#[pyfunction]
fn symmetric_eig(b: Rows) -> PyResult<(Vec<f64>, Rows)> {
    let eig = feigh::symmetric_eig(&matrix(&b, None)?).map_err(to_py_err)?;
    Ok((eig.values, eig.vectors.to_rows()))
}

#[pyfunction]
fn fast_eigh(factor: &PyLowRankFactor, data: &PyWeightedData) -> PyResult<PyEigenFactor> {
    feigh::fast_eigh(&factor.0, &data.0)
        .map(PyEigenFactor)
        .map_err(to_py_err)
}

#[pyfunction]
fn svd_route(alpha: f64, x: Rows) -> PyResult<PyEigenFactor> {
    feigh::svd_route(alpha, &matrix(&x, None)?)
        .map(PyEigenFactor)
        .map_err(to_py_err)
}

#[pyfunction]
fn dense_fallback(factor: &PyLowRankFactor, data: &PyWeightedData) -> PyResult<PyEigenFactor> {
    feigh::dense_fallback(&factor.0, &data.0)
        .map(PyEigenFactor)
        .map_err(to_py_err)
}

/// Returns `(model, tau, new_alpha)`.
#[pyfunction]
fn truncate(ef: &PyEigenFactor, k: usize) -> PyResult<(PyLowRankFactor, usize, f64)> {
    let (model, res) = feigh::truncate(&ef.0, k).map_err(to_py_err)?;
    Ok((PyLowRankFactor(model), res.tau, res.new_alpha))
}

/// τ for a spectrum given as explicit values plus an implicit repeated block.
#[pyfunction]
#[pyo3(signature = (explicit, k, implicit_value=1.0, implicit_count=0))]
fn select_tau(
    explicit: Vec<f64>,
    k: usize,
    implicit_value: f64,
    implicit_count: usize,
) -> PyResult<usize> {
    let s = feigh::Spectrum::new(&explicit, implicit_value, implicit_count).map_err(to_py_err)?;
    feigh::select_tau(&s, k).map_err(to_py_err)
}

#[pymodule]
fn pyfeigh(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyLowRankFactor>()?;
    m.add_class::<PyWeightedData>()?;
    m.add_class::<PyEigenFactor>()?;
    m.add_class::<PyMetricModel>()?;
    m.add_function(wrap_pyfunction!(thin_svd, m)?)?;
    m.add_function(wrap_pyfunction!(symmetric_eig, m)?)?;
    m.add_function(wrap_pyfunction!(fast_eigh, m)?)?;
    m.add_function(wrap_pyfunction!(svd_route, m)?)?;
    m.add_function(wrap_pyfunction!(dense_fallback, m)?)?;
    m.add_function(wrap_pyfunction!(truncate, m)?)?;
    m.add_function(wrap_pyfunction!(select_tau, m)?)?;
    Ok(())
}

//! Python bindings: scheme expressions and their metrics, the audit
//! registry, and trace distances of small matrices.
//!
//! Reports cross the boundary as json text.

use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use qte::auditctl::{eval_attack, eval_scheme, list_audits, load_scheme, run_audit, save_scheme, AuditCase};
use qte::qmath::{td_pure, trace_distance, CMatrix};
use qte::schemes::{correctness_gap, encryption_gap, tamper_profile, AqecmScheme, DEFAULT_DIM_CAP};

fn py_err(e: qte::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn matrix(rows: Vec<Vec<Complex64>>) -> PyResult<CMatrix> {
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|row| row.len() != c) {
        return Err(PyValueError::new_err("ragged matrix"));
    }
    CMatrix::new(r, c, rows.into_iter().flatten().collect()).map_err(py_err)
}

/// An AQECM scheme built from a construction expression or a scheme file.
#[pyclass(name = "Scheme", frozen)]
struct PyScheme {
    inner: AqecmScheme,
    cap: usize,
}

#[pymethods]
impl PyScheme {
    #[staticmethod]
    #[pyo3(signature = (expr, dim_cap = DEFAULT_DIM_CAP))]
    fn from_expr(expr: &str, dim_cap: usize) -> PyResult<Self> {
        let inner = eval_scheme(expr, dim_cap).and_then(|v| v.into_aqecm()).map_err(py_err)?;
        Ok(PyScheme { inner, cap: dim_cap })
    }

    #[staticmethod]
    #[pyo3(signature = (path, dim_cap = DEFAULT_DIM_CAP))]
    fn load(path: &str, dim_cap: usize) -> PyResult<Self> {
        Ok(PyScheme { inner: load_scheme(path).map_err(py_err)?, cap: dim_cap })
    }

    fn save(&self, path: &str) -> PyResult<()> {
        save_scheme(&self.inner, path, self.cap).map_err(py_err)
    }

    #[getter]
    fn name(&self) -> String {
        self.inner.name().to_string()
    }

    #[getter]
    fn num_keys(&self) -> usize {
        self.inner.keys().len()
    }

    #[getter]
    fn num_messages(&self) -> usize {
        self.inner.num_messages()
    }

    #[getter]
    fn cipher_dims(&self) -> Vec<usize> {
        self.inner.cipher_shape().dims()
    }

    fn eps(&self) -> PyResult<f64> {
        Ok(correctness_gap(&self.inner, self.cap).map_err(py_err)?.eps)
    }

    fn alpha(&self) -> PyResult<f64> {
        Ok(encryption_gap(&self.inner, self.cap).map_err(py_err)?.alpha)
    }

    /// Per-key tamper distances of `attack` on messages `m0, m1`.
    #[pyo3(signature = (attack = "identity", m0 = 0, m1 = 1))]
    fn profile<'py>(&self, py: Python<'py>, attack: &str, m0: usize, m1: usize) -> PyResult<Bound<'py, PyDict>> {
        let a = eval_attack(attack, &self.inner, self.cap).map_err(py_err)?;
        let p = tamper_profile(&self.inner, &a, m0, m1, self.cap).map_err(py_err)?;
        let d = PyDict::new(py);
        d.set_item("distances", p.distances.clone())?;
        d.set_item("probs", p.probs.clone())?;
        d.set_item("expectation", p.expectation())?;
        d.set_item("max_distance", p.max_distance())?;
        d.set_item("delta_lb", p.delta_lb())?;
        Ok(d)
    }

    fn __repr__(&self) -> String {
        format!("Scheme({:?}, keys={}, messages={})", self.inner.name(), self.inner.keys().len(), self.inner.num_messages())
    }
}

/// `[(id, tag, summary), ...]`
#[pyfunction(name = "list_audits")]
fn py_list_audits() -> Vec<(String, String, String)> {
    list_audits().into_iter().map(|a| (a.id.to_string(), a.tag.to_string(), a.summary.to_string())).collect()
}

/// Runs one audit; `params` is a json object of case parameters.
#[pyfunction(name = "run_audit")]
#[pyo3(signature = (case, seed = 0, dim_cap = DEFAULT_DIM_CAP, params = None))]
fn py_run_audit(py: Python<'_>, case: &str, seed: u64, dim_cap: usize, params: Option<&str>) -> PyResult<String> {
    let mut c = AuditCase::new(case, seed).with_dim_cap(dim_cap);
    if let Some(p) = params {
        c.params = serde_json::from_str(p).map_err(|e| PyValueError::new_err(format!("params: {e}")))?;
    }
    let report = py.detach(|| run_audit(&c)).map_err(py_err)?;
    serde_json::to_string(&report).map_err(|e| PyValueError::new_err(e.to_string()))
}

#[pyfunction(name = "trace_distance")]
fn py_trace_distance(a: Vec<Vec<Complex64>>, b: Vec<Vec<Complex64>>) -> PyResult<f64> {
    trace_distance(&matrix(a)?, &matrix(b)?).map_err(py_err)
}

/// Trace distance of two (sub)normalized pure states given as vectors.
#[pyfunction(name = "td_pure")]
fn py_td_pure(psi: Vec<Complex64>, phi: Vec<Complex64>) -> PyResult<f64> {
    td_pure(&CMatrix::column(&psi), &CMatrix::column(&phi)).map_err(py_err)
}

#[pymodule]
fn qte_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyScheme>()?;
    m.add_function(wrap_pyfunction!(py_list_audits, m)?)?;
    m.add_function(wrap_pyfunction!(py_run_audit, m)?)?;
    m.add_function(wrap_pyfunction!(py_trace_distance, m)?)?;
    m.add_function(wrap_pyfunction!(py_td_pure, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}

//! Python bindings: load a job document, run the checked analysis, and
//! inspect the complex, the factors, the extension graph and the theorem
//! verdicts from Python.

use latmax_core::error::Error;
use latmax_core::report::{analyze_checked, ascend_trace};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn to_py_err(e: Error) -> PyErr {
    match e.exit_code() {
        2 => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

/// A completed analysis of one job document (run at the working
/// precision and re-checked at +4).
#[pyclass]
struct Analysis {
    inner: latmax_core::Analysis,
    report_json: String,
}

#[pymethods]
impl Analysis {
    /// Analyze a JSON job document given as text.
    #[staticmethod]
    #[pyo3(signature = (text, precision=None, max_diameter=None))]
    fn from_spec_text(text: &str, precision: Option<u32>, max_diameter: Option<u32>) -> PyResult<Self> {
        let (inner, report) = analyze_checked(text, precision, max_diameter).map_err(to_py_err)?;
        Ok(Analysis { inner, report_json: report.to_json() })
    }

    /// Analyze a JSON job document from a file path.
    #[staticmethod]
    #[pyo3(signature = (path, precision=None, max_diameter=None))]
    fn from_spec_file(path: &str, precision: Option<u32>, max_diameter: Option<u32>) -> PyResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| PyValueError::new_err(format!("cannot read {path}: {e}")))?;
        Self::from_spec_text(&text, precision, max_diameter)
    }

    /// The full report as a JSON string.
    fn report_json(&self) -> &str {
        &self.report_json
    }

    #[getter]
    fn vertex_count(&self) -> usize {
        self.inner.complex.vertices.len()
    }

    #[getter]
    fn maximal_count(&self) -> usize {
        self.inner.complex.maximal_indices().len()
    }

    #[getter]
    fn extremal_count(&self) -> usize {
        self.inner.complex.extremal_indices().len()
    }

    #[getter]
    fn dimension(&self) -> usize {
        self.inner.complex.dimension
    }

    /// Canonical homothety keys, sorted; index order matches `edges`.
    fn vertex_keys(&self) -> Vec<String> {
        self.inner.complex.vertices.iter().map(|v| v.key.to_string()).collect()
    }

    /// Adjacency of the invariant complex as index pairs.
    fn edges(&self) -> Vec<(usize, usize)> {
        self.inner.complex.edges.clone()
    }

    /// Which vertices are maximal / extremal.
    fn vertex_flags(&self) -> Vec<(bool, bool)> {
        self.inner
            .complex
            .vertices
            .iter()
            .map(|v| (v.is_maximal, v.is_extremal))
            .collect()
    }

    /// Residual factors as `(label, dim, multiplicity)`.
    fn factors(&self) -> Vec<(String, usize, usize)> {
        self.inner
            .factors
            .classes
            .iter()
            .map(|c| (c.label.clone(), c.dim, self.inner.factors.multiplicities[c.id]))
            .collect()
    }

    /// Extension-graph edges as `(from, to, witness vertex key)`.
    fn graph_edges(&self) -> Vec<(String, String, String)> {
        self.inner
            .graph
            .edges
            .iter()
            .map(|e| {
                (
                    self.inner.factors.classes[e.from].label.clone(),
                    self.inner.factors.classes[e.to].label.clone(),
                    e.witness_vertex.to_string(),
                )
            })
            .collect()
    }

    #[getter]
    fn strongly_connected(&self) -> bool {
        self.inner.bellaiche.strongly_connected
    }

    /// All theorem verdicts as `(name, pass, detail)`.
    fn verdicts(&self) -> Vec<(String, bool, String)> {
        self.inner
            .verdicts
            .iter()
            .map(|v| (v.name.clone(), v.pass, v.detail.clone()))
            .collect()
    }

    fn all_verdicts_pass(&self) -> bool {
        self.inner.all_verdicts_pass()
    }

    /// Ascend from the base lattice normalised at `vector`; returns the
    /// final vertex key and the ascent trace.
    fn ascend(&self, vector: Vec<i64>) -> PyResult<(String, Vec<String>)> {
        if vector.len() != self.inner.rep.dim() {
            return Err(PyValueError::new_err(format!(
                "vector has {} entries, expected {}",
                vector.len(),
                self.inner.rep.dim()
            )));
        }
        let (key, trace) =
            ascend_trace(&self.inner.rep, &self.inner.base, &vector).map_err(to_py_err)?;
        Ok((key.to_string(), trace.iter().map(|k| k.to_string()).collect()))
    }

    fn complex_dot(&self) -> String {
        self.inner.complex_dot()
    }

    fn graph_dot(&self) -> String {
        self.inner.graph_dot()
    }

    fn __repr__(&self) -> String {
        format!(
            "Analysis(vertices={}, maximal={}, dimension={}, factors={}, verdicts_pass={})",
            self.vertex_count(),
            self.maximal_count(),
            self.dimension(),
            self.inner.factors.r(),
            self.all_verdicts_pass()
        )
    }
}

/// Convenience: analyze a spec text and return the report JSON.
#[pyfunction]
#[pyo3(signature = (text, precision=None, max_diameter=None))]
fn analyze_json(text: &str, precision: Option<u32>, max_diameter: Option<u32>) -> PyResult<String> {
    let (_, report) = analyze_checked(text, precision, max_diameter).map_err(to_py_err)?;
    Ok(report.to_json())
}

#[pymodule]
fn latmax_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Analysis>()?;
    m.add_function(wrap_pyfunction!(analyze_json, m)?)?;
    Ok(())
}

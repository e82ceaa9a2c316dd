//! Python bindings: step functions, hypergraphs, densities, solving,
//! sampling and formula compilation.

use hypergraphon::density::quantum_density;
use hypergraphon::logic::{compile_str, parse, query_probability};
use hypergraphon::objective::{objective_value, ObjectiveConfig};
use hypergraphon::sampler::sample_w_random;
use hypergraphon::solver::{solve_report, ConstraintSet, SolveReport, SolverConfig};
use hypergraphon::{Error, Mode, MultiHypergraph, QuantumGraph, Signature, StepFunction};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Infeasible { .. } | Error::InfeasibleUpToMax(_) | Error::NonConvergent(_) => {
            PyRuntimeError::new_err(e.to_string())
        }
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn json_err(e: serde_json::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_mode(mode: &str) -> PyResult<Mode> {
    serde_json::from_value(serde_json::Value::String(mode.to_string()))
        .map_err(|_| PyValueError::new_err(format!("unknown mode `{mode}`")))
}

fn signature(arities: Vec<usize>, names: Option<Vec<String>>) -> PyResult<Signature> {
    match names {
        Some(n) => Signature::with_names(arities, n),
        None => Signature::new(arities),
    }
    .map_err(py_err)
}

/// A symmetric step function `(A, π)`.
#[pyclass(name = "StepFunction", module = "hypergraphon_py", skip_from_py_object)]
#[derive(Clone)]
pub struct PyStepFunction {
    inner: StepFunction,
}

#[pymethods]
impl PyStepFunction {
    /// Build from per-relation canonical values (sorted multi-indices, lexicographic).
    #[new]
    #[pyo3(signature = (arities, pi, canonical, mode = "graphon_unit", names = None))]
    fn new(
        arities: Vec<usize>,
        pi: Vec<f64>,
        canonical: Vec<Vec<f64>>,
        mode: &str,
        names: Option<Vec<String>>,
    ) -> PyResult<Self> {
        let sig = signature(arities, names)?;
        let inner = StepFunction::from_canonical(&sig, pi, &canonical, parse_mode(mode)?).map_err(py_err)?;
        Ok(PyStepFunction { inner })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(PyStepFunction {
            inner: serde_json::from_str(text).map_err(json_err)?,
        })
    }

    fn to_json(&self) -> String {
        serde_json::to_string(&self.inner).expect("step function serializes")
    }

    #[getter]
    fn m(&self) -> usize {
        self.inner.m()
    }

    #[getter]
    fn pi(&self) -> Vec<f64> {
        self.inner.pi().to_vec()
    }

    #[getter]
    fn arities(&self) -> Vec<usize> {
        self.inner.signature().arities.clone()
    }

    fn canonical_values(&self) -> Vec<Vec<f64>> {
        self.inner.canonical_values()
    }

    /// Value of relation `k` on the block tuple `idx`.
    fn entry(&self, k: usize, idx: Vec<usize>) -> PyResult<f64> {
        let sig = self.inner.signature();
        if k >= sig.r() || idx.len() != sig.arities[k] || idx.iter().any(|&i| i >= self.inner.m()) {
            return Err(PyValueError::new_err("index out of range"));
        }
        Ok(self.inner.entry(k, &idx))
    }

    /// Split block `k` into fractions `lambda` and `1 - lambda`.
    fn split(&self, lam: f64, k: usize) -> PyResult<Self> {
        Ok(PyStepFunction {
            inner: self.inner.split(lam, k).map_err(py_err)?,
        })
    }

    /// Entropy-type objective with weights `1/d_k!`.
    fn objective(&self) -> PyResult<f64> {
        objective_value(&ObjectiveConfig::entropy(), &self.inner).map_err(py_err)
    }

    fn __repr__(&self) -> String {
        format!("StepFunction(m={}, arities={:?})", self.inner.m(), self.inner.signature().arities)
    }
}

/// A finite multi-relation hypergraph.
#[pyclass(name = "Hypergraph", module = "hypergraphon_py", skip_from_py_object)]
#[derive(Clone)]
pub struct PyHypergraph {
    inner: MultiHypergraph,
    sig: Signature,
}

#[pymethods]
impl PyHypergraph {
    /// `edges[k]` lists the hyperedges of relation `k` as vertex tuples.
    #[new]
    fn new(arities: Vec<usize>, n: usize, edges: Vec<Vec<Vec<usize>>>) -> PyResult<Self> {
        let sig = signature(arities, None)?;
        let inner = MultiHypergraph::new(&sig, n, edges).map_err(py_err)?;
        Ok(PyHypergraph { inner, sig })
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n_vertices
    }

    #[getter]
    fn edges(&self) -> Vec<Vec<Vec<usize>>> {
        self.inner.edges.clone()
    }

    fn edge_count(&self) -> usize {
        self.inner.edge_count()
    }

    fn to_json(&self) -> String {
        serde_json::to_string(&self.inner).expect("hypergraph serializes")
    }

    fn __repr__(&self) -> String {
        format!("Hypergraph(n={}, edges={})", self.inner.n_vertices, self.inner.edge_count())
    }
}

/// A finite linear combination of hypergraphs.
#[pyclass(name = "QuantumGraph", module = "hypergraphon_py", skip_from_py_object)]
#[derive(Clone)]
pub struct PyQuantumGraph {
    inner: QuantumGraph,
}

#[pymethods]
impl PyQuantumGraph {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(PyQuantumGraph {
            inner: serde_json::from_str(text).map_err(json_err)?,
        })
    }

    fn to_json(&self) -> String {
        serde_json::to_string(&self.inner).expect("quantum graph serializes")
    }

    /// `(coefficient, Hypergraph)` pairs.
    fn terms(&self, arities: Vec<usize>) -> PyResult<Vec<(f64, PyHypergraph)>> {
        let sig = signature(arities, None)?;
        Ok(self
            .inner
            .terms
            .iter()
            .map(|t| {
                (
                    t.coeff,
                    PyHypergraph {
                        inner: t.graph.clone(),
                        sig: sig.clone(),
                    },
                )
            })
            .collect())
    }

    fn __len__(&self) -> usize {
        self.inner.terms.len()
    }
}

fn as_quantum(obj: &Bound<'_, PyAny>, sig: &Signature) -> PyResult<QuantumGraph> {
    if let Ok(g) = obj.cast::<PyHypergraph>() {
        let g = g.borrow();
        if !g.sig.compatible(sig) {
            return Err(PyValueError::new_err("hypergraph signature differs from the step function"));
        }
        return QuantumGraph::single(sig, g.inner.clone()).map_err(py_err);
    }
    if let Ok(q) = obj.cast::<PyQuantumGraph>() {
        return q.borrow().inner.clone().validated(sig).map_err(py_err);
    }
    Err(PyValueError::new_err("expected a Hypergraph or QuantumGraph"))
}

/// Homomorphism density `t(F, W)` of a hypergraph or quantum graph.
#[pyfunction]
fn density(graph: &Bound<'_, PyAny>, w: PyRef<'_, PyStepFunction>) -> PyResult<f64> {
    let q = as_quantum(graph, w.inner.signature())?;
    quantum_density(&q, &w.inner).map_err(py_err)
}

/// Result of [`solve`]: the status, the best step function and the full JSON report.
#[pyclass(name = "SolveResult", module = "hypergraphon_py")]
pub struct PySolveResult {
    report: SolveReport,
}

#[pymethods]
impl PySolveResult {
    #[getter]
    fn status(&self) -> String {
        serde_json::to_value(self.report.status)
            .ok()
            .and_then(|v| v.as_str().map(str::to_string))
            .unwrap_or_default()
    }

    #[getter]
    fn best(&self) -> Option<PyStepFunction> {
        self.report
            .best_solution()
            .map(|s| PyStepFunction { inner: s.step.clone() })
    }

    #[getter]
    fn objective(&self) -> Option<f64> {
        self.report.best_solution().map(|s| s.objective)
    }

    #[getter]
    fn beta(&self) -> Option<Vec<f64>> {
        self.report.best_solution().map(|s| s.beta_fit.clone())
    }

    #[getter]
    fn solutions(&self) -> Vec<PyStepFunction> {
        self.report
            .solutions
            .iter()
            .map(|s| PyStepFunction { inner: s.step.clone() })
            .collect()
    }

    fn to_json(&self) -> String {
        serde_json::to_string(&self.report).expect("report serializes")
    }
}

/// Maximize entropy subject to `t(F_i, W) = u_i` over `m`-step functions.
/// `constraints` is a list of `(Hypergraph | QuantumGraph, target)`.
#[pyfunction]
#[pyo3(signature = (arities, constraints, m = 2, restarts = 16, seed = 0, config_json = None))]
fn solve(
    arities: Vec<usize>,
    constraints: Vec<(Bound<'_, PyAny>, f64)>,
    m: usize,
    restarts: usize,
    seed: u64,
    config_json: Option<&str>,
) -> PyResult<PySolveResult> {
    let sig = signature(arities, None)?;
    let cons = constraints
        .iter()
        .map(|(g, u)| Ok((as_quantum(g, &sig)?, *u)))
        .collect::<PyResult<Vec<_>>>()?;
    let cs = ConstraintSet::new(sig, cons).map_err(py_err)?;
    let base: SolverConfig = match config_json {
        Some(t) => serde_json::from_str(t).map_err(json_err)?,
        None => SolverConfig::default(),
    };
    let cfg = SolverConfig {
        m,
        restarts,
        seed,
        ..base
    };
    let report = solve_report(&cs, &cfg, &ObjectiveConfig::entropy(), &[]).map_err(py_err)?;
    Ok(PySolveResult { report })
}

/// Compile a universally quantified formula over relations given as `"Friends:2,Sm:1"`.
#[pyfunction]
fn compile(formula: &str, relations: &str) -> PyResult<PyQuantumGraph> {
    let sig = relations_signature(relations)?;
    Ok(PyQuantumGraph {
        inner: compile_str(formula, &sig).map_err(py_err)?,
    })
}

/// Probability of a formula averaged over step functions.
#[pyfunction]
fn query(formula: &str, relations: &str, solutions: Vec<PyRef<'_, PyStepFunction>>) -> PyResult<f64> {
    let sig = relations_signature(relations)?;
    let f = parse(formula, &sig).map_err(py_err)?;
    let steps: Vec<StepFunction> = solutions.iter().map(|s| s.inner.clone()).collect();
    query_probability(&f, &sig, &steps).map_err(py_err)
}

/// Draw a W-random hypergraph on `n` vertices.
#[pyfunction]
#[pyo3(signature = (w, n, seed = 0))]
fn sample(w: PyRef<'_, PyStepFunction>, n: usize, seed: u64) -> PyResult<PyHypergraph> {
    let inner = sample_w_random(&w.inner, n, seed).map_err(py_err)?;
    Ok(PyHypergraph {
        inner,
        sig: w.inner.signature().clone(),
    })
}

fn relations_signature(spec: &str) -> PyResult<Signature> {
    let mut arities = Vec::new();
    let mut names = Vec::new();
    for part in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (name, d) = part
            .split_once(':')
            .ok_or_else(|| PyValueError::new_err(format!("relation `{part}` is not NAME:ARITY")))?;
        names.push(name.trim().to_string());
        arities.push(
            d.trim()
                .parse()
                .map_err(|_| PyValueError::new_err(format!("bad arity in `{part}`")))?,
        );
    }
    signature(arities, Some(names))
}

#[pymodule]
fn hypergraphon_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyStepFunction>()?;
    m.add_class::<PyHypergraph>()?;
    m.add_class::<PyQuantumGraph>()?;
    m.add_class::<PySolveResult>()?;
    m.add_function(wrap_pyfunction!(density, m)?)?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(compile, m)?)?;
    m.add_function(wrap_pyfunction!(query, m)?)?;
    m.add_function(wrap_pyfunction!(sample, m)?)?;
    Ok(())
}

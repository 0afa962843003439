use std::sync::Arc;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use coxsub::coxeter::{CartanType, CoxeterSystem, Multiplicity, Sign};
use coxsub::cycles::{cycle_space_dim, decompose, verify_span, EdgeSet};
use coxsub::subexpr::{bit_string, build_all_graphs, build_graph, Expression, SubexprGraph, DEFAULT_LIMIT};

fn value_error(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// A Coxeter system with its geometric representation.
#[pyclass(name = "CoxeterSystem", module = "coxsub_py", frozen)]
struct PySystem {
    inner: Arc<CoxeterSystem>,
}

#[pymethods]
impl PySystem {
    /// Entries are integers, or the string "inf".
    #[new]
    fn new(matrix: Vec<Vec<Bound<'_, PyAny>>>) -> PyResult<Self> {
        let cox = matrix
            .iter()
            .map(|row| {
                row.iter()
                    .map(|x| match x.extract::<u32>() {
                        Ok(m) => Ok(Multiplicity::Finite(m)),
                        Err(_) => match x.extract::<String>()?.as_str() {
                            "inf" => Ok(Multiplicity::Infinite),
                            s => Err(value_error(format!("bad entry {s:?}"))),
                        },
                    })
                    .collect::<PyResult<Vec<_>>>()
            })
            .collect::<PyResult<Vec<_>>>()?;
        Ok(PySystem { inner: Arc::new(CoxeterSystem::new(cox).map_err(value_error)?) })
    }

    /// A named system such as "A3", "B2", "G2" or "~A2".
    #[staticmethod]
    fn of_type(name: &str) -> PyResult<Self> {
        let t = CartanType::parse(name).ok_or_else(|| value_error(format!("unknown type {name:?}")))?;
        Ok(PySystem { inner: Arc::new(t.system()) })
    }

    #[getter]
    fn rank(&self) -> usize {
        self.inner.rank()
    }

    #[getter]
    fn eps(&self) -> f64 {
        self.inner.eps()
    }

    /// 1 for a positive root, -1 for a negative one.
    fn root_sign(&self, coeffs: Vec<f64>) -> PyResult<i32> {
        let v = coxsub::coxeter::RootVec::new(coeffs);
        Ok(match self.inner.root_sign(&v).map_err(value_error)? {
            Sign::Positive => 1,
            Sign::Negative => -1,
        })
    }

    /// Every graph `Sub(s, w)` of the expression, one per target.
    fn graphs(&self, letters: Vec<usize>) -> PyResult<Vec<PyGraph>> {
        let expr = Arc::new(Expression::new(self.inner.clone(), letters).map_err(value_error)?);
        Ok(build_all_graphs(&expr, DEFAULT_LIMIT)
            .map_err(value_error)?
            .into_iter()
            .map(|g| PyGraph { inner: g })
            .collect())
    }

    /// `Sub(s, w)` for the target given as a word.
    fn graph(&self, letters: Vec<usize>, target: Vec<usize>) -> PyResult<PyGraph> {
        let expr = Arc::new(Expression::new(self.inner.clone(), letters).map_err(value_error)?);
        let w = self.inner.word(&target).map_err(value_error)?;
        Ok(PyGraph { inner: build_graph(&expr, &w, DEFAULT_LIMIT).map_err(value_error)? })
    }
}

/// A subexpression graph.
#[pyclass(name = "Graph", module = "coxsub_py", frozen)]
struct PyGraph {
    inner: SubexprGraph,
}

#[pymethods]
impl PyGraph {
    /// Vertices as bit strings, in increasing order.
    fn vertices(&self) -> Vec<String> {
        self.inner.vertices().iter().map(|v| bit_string(v.bits())).collect()
    }

    /// Edges as `(u, v, i, j)`: vertex indices and the folded positions.
    fn edges(&self) -> Vec<(usize, usize, usize, usize)> {
        self.inner.edges().iter().map(|e| (e.u, e.v, e.i, e.j)).collect()
    }

    fn __len__(&self) -> usize {
        self.inner.vertex_count()
    }

    fn is_connected(&self) -> bool {
        self.inner.is_connected()
    }

    fn cycle_space_dim(&self) -> usize {
        cycle_space_dim(&self.inner)
    }

    fn verify_span<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let rep = verify_span(&self.inner);
        let d = PyDict::new(py);
        d.set_item("dim", rep.dim)?;
        d.set_item("rank", rep.rank)?;
        d.set_item("spanned", rep.spanned)?;
        d.set_item("generator_count", rep.generator_count)?;
        d.set_item("lengths", rep.basis_lengths)?;
        Ok(d)
    }

    /// Decomposes an even set of edge indices into generators, each given as
    /// its kind and vertex indices in cycle order.
    fn decompose(&self, edges: Vec<usize>) -> PyResult<Vec<(String, Vec<usize>)>> {
        let n = self.inner.edge_count();
        if let Some(&e) = edges.iter().find(|&&e| e >= n) {
            return Err(value_error(format!("edge {e} out of range")));
        }
        let set = EdgeSet::from_edges(n, edges);
        let d = decompose(&self.inner, &set).map_err(value_error)?;
        if let Some(why) = d.failure {
            return Err(value_error(why));
        }
        Ok(d.generators.into_iter().map(|c| (format!("{:?}", c.kind), c.vertices)).collect())
    }

    fn to_dot(&self) -> String {
        coxsub::cli::to_dot(&self.inner)
    }
}

#[pymodule]
pub fn coxsub_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySystem>()?;
    m.add_class::<PyGraph>()?;
    Ok(())
}

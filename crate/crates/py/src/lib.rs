//! Python bindings. Structures cross the boundary as JSON text in the same
//! format the CLI reads; reports come back as Python dictionaries.

use std::time::Duration;

use pyo3::exceptions::{PyTimeoutError, PyValueError};
use pyo3::prelude::*;

use relwork::classes::{check_property, member, parse_class_spec, Property};
use relwork::colored::{self, build_universal_colored_with, parse_colored};
use relwork::fraisse::{build_generic_with, verify_homogeneity, BuildOptions};
use relwork::io::{parse_structure, structure_to_json};
use relwork::oligomorphy;
use relwork::{Budget, Error, PartialMap};

fn to_py(e: Error) -> PyErr {
    if e.is_budget() {
        PyTimeoutError::new_err(e.to_string())
    } else {
        PyValueError::new_err(e.to_string())
    }
}

fn budget(node_budget: Option<u64>, time_budget: Option<f64>) -> Budget {
    match (node_budget, time_budget) {
        (None, None) => Budget::default(),
        (n, t) => Budget::new(n.unwrap_or(10_000_000), t.map(Duration::from_secs_f64)),
    }
}

fn loads(py: Python<'_>, value: serde_json::Value) -> PyResult<Py<PyAny>> {
    let json = py.import("json")?;
    Ok(json.call_method1("loads", (value.to_string(),))?.unbind())
}

fn options(demand_size: usize, stages: usize, seed: Option<u64>) -> BuildOptions {
    let opts = BuildOptions::new(demand_size, stages);
    match seed {
        Some(s) => opts.seeded(s),
        None => opts,
    }
}

/// A finite relational structure.
#[pyclass(name = "Structure", from_py_object)]
#[derive(Clone)]
struct PyStructure {
    inner: relwork::Structure,
}

#[pymethods]
impl PyStructure {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(PyStructure {
            inner: parse_structure(text).map_err(to_py)?,
        })
    }

    fn to_json(&self) -> String {
        structure_to_json(&self.inner)
    }

    fn elements(&self) -> Vec<String> {
        self.inner.elements().to_vec()
    }

    fn tuple_count(&self) -> usize {
        self.inner.tuple_count()
    }

    fn is_connected(&self) -> bool {
        self.inner.is_connected()
    }

    fn gaifman_dot(&self) -> String {
        self.inner.gaifman_graph().to_dot()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.inner == other.inner
    }

    fn __repr__(&self) -> String {
        format!(
            "Structure({} elements over {})",
            self.inner.len(),
            self.inner.signature()
        )
    }
}

/// A structure with a homomorphism into a template.
#[pyclass(name = "ColoredStructure", from_py_object)]
#[derive(Clone)]
struct PyColored {
    inner: relwork::ColoredStructure,
}

#[pymethods]
impl PyColored {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(PyColored {
            inner: parse_colored(text).map_err(to_py)?,
        })
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    fn base(&self) -> PyStructure {
        PyStructure {
            inner: self.inner.base().clone(),
        }
    }

    fn color(&self) -> std::collections::BTreeMap<String, String> {
        self.inner.color_map()
    }

    fn encode_s(&self) -> PyStructure {
        PyStructure {
            inner: colored::encode_s(&self.inner),
        }
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "ColoredStructure({} elements, template of {})",
            self.inner.len(),
            self.inner.template().len()
        )
    }
}

/// A homomorphism `a → b` as `(source, target)` id pairs, or None.
#[pyfunction]
#[pyo3(signature = (a, b, fixed=None, node_budget=None, time_budget=None))]
fn find_homomorphism(
    a: &PyStructure,
    b: &PyStructure,
    fixed: Option<Vec<(String, String)>>,
    node_budget: Option<u64>,
    time_budget: Option<f64>,
) -> PyResult<Option<Vec<(String, String)>>> {
    let fixed = PartialMap::new(fixed.unwrap_or_default()).map_err(to_py)?;
    let found = relwork::find_homomorphism(&a.inner, &b.inner, &fixed, &budget(node_budget, time_budget))
        .map_err(to_py)?;
    Ok(found.map(|m| m.as_partial_map().pairs().to_vec()))
}

#[pyfunction]
#[pyo3(signature = (a, b, node_budget=None, time_budget=None))]
fn find_embedding(
    a: &PyStructure,
    b: &PyStructure,
    node_budget: Option<u64>,
    time_budget: Option<f64>,
) -> PyResult<Option<Vec<(String, String)>>> {
    let found = relwork::find_embedding(&a.inner, &b.inner, &PartialMap::empty(), &budget(node_budget, time_budget))
        .map_err(to_py)?;
    Ok(found.map(|m| m.as_partial_map().pairs().to_vec()))
}

#[pyfunction]
fn is_isomorphic(a: &PyStructure, b: &PyStructure) -> PyResult<bool> {
    relwork::is_isomorphic(&a.inner, &b.inner, &Budget::default()).map_err(to_py)
}

/// The core of `a`, as an induced substructure.
#[pyfunction]
#[pyo3(name = "core")]
fn core_of(a: &PyStructure) -> PyResult<PyStructure> {
    Ok(PyStructure {
        inner: relwork::core(&a.inner, &Budget::default()).map_err(to_py)?.structure,
    })
}

#[pyfunction]
fn automorphism_count(a: &PyStructure) -> PyResult<usize> {
    Ok(relwork::automorphism_group(&a.inner, &Budget::default())
        .map_err(to_py)?
        .len())
}

#[pyfunction]
fn is_member(spec_json: &str, a: &PyStructure) -> PyResult<bool> {
    let spec = parse_class_spec(spec_json).map_err(to_py)?;
    member(&spec, &a.inner, &Budget::default()).map_err(to_py)
}

/// Checks HP, JEP, AP, HAP or FreeAP up to `bound`; returns the report.
#[pyfunction]
#[pyo3(signature = (spec_json, property, bound, node_budget=None, time_budget=None))]
fn check_class_property(
    py: Python<'_>,
    spec_json: &str,
    property: &str,
    bound: usize,
    node_budget: Option<u64>,
    time_budget: Option<f64>,
) -> PyResult<Py<PyAny>> {
    let spec = parse_class_spec(spec_json).map_err(to_py)?;
    let property = Property::parse(property).map_err(to_py)?;
    let report = check_property(&spec, property, bound, &budget(node_budget, time_budget)).map_err(to_py)?;
    loads(py, report.to_value())
}

/// A finite approximant of the Fraïssé limit of the class.
#[pyfunction]
#[pyo3(signature = (spec_json, demand_size, stages, seed=None))]
fn build_generic(spec_json: &str, demand_size: usize, stages: usize, seed: Option<u64>) -> PyResult<(PyStructure, bool)> {
    let spec = parse_class_spec(spec_json).map_err(to_py)?;
    let g = build_generic_with(&spec, options(demand_size, stages, seed), &Budget::default()).map_err(to_py)?;
    let complete = g.complete();
    Ok((PyStructure { inner: g.structure }, complete))
}

/// Number of stuck partial isomorphisms in the back-and-forth check.
#[pyfunction]
fn homogeneity_stuck_count(a: &PyStructure, part_size: usize, depth: usize) -> PyResult<u64> {
    Ok(verify_homogeneity(&a.inner, part_size, depth, &Budget::default())
        .map_err(to_py)?
        .stuck_count)
}

#[pyfunction]
#[pyo3(signature = (spec_json, template, demand_size, stages, seed=None))]
fn build_universal_colored(
    spec_json: &str,
    template: &PyStructure,
    demand_size: usize,
    stages: usize,
    seed: Option<u64>,
) -> PyResult<(PyColored, bool)> {
    let spec = parse_class_spec(spec_json).map_err(to_py)?;
    let a = build_universal_colored_with(&spec, &template.inner, options(demand_size, stages, seed), &Budget::default())
        .map_err(to_py)?;
    let complete = a.complete();
    Ok((PyColored { inner: a.colored }, complete))
}

#[pyfunction]
fn is_retraction(c: &PyColored) -> PyResult<bool> {
    Ok(colored::is_retraction(&c.inner, &Budget::default())
        .map_err(to_py)?
        .is_some())
}

#[pyfunction]
fn check_caut_identity(py: Python<'_>, c: &PyColored) -> PyResult<Py<PyAny>> {
    let r = colored::check_caut_identity(&c.inner, &Budget::default()).map_err(to_py)?;
    loads(py, r.to_value())
}

#[pyfunction]
fn count_pe_types(a: &PyStructure, n: usize) -> PyResult<u64> {
    oligomorphy::count_pe_types(&a.inner, n, &Budget::default()).map_err(to_py)
}

#[pyfunction]
fn count_orbits(a: &PyStructure, n: usize) -> PyResult<u64> {
    oligomorphy::count_orbits(&a.inner, n, &Budget::default()).map_err(to_py)
}

#[pyfunction]
fn check_worn(py: Python<'_>, a: &PyStructure, b: &PyStructure, age_bound: usize) -> PyResult<Py<PyAny>> {
    let r = oligomorphy::check_worn(&a.inner, &b.inner, age_bound, &Budget::default()).map_err(to_py)?;
    loads(py, r.to_value())
}

#[pymodule]
fn relwork_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyStructure>()?;
    m.add_class::<PyColored>()?;
    m.add_function(wrap_pyfunction!(find_homomorphism, m)?)?;
    m.add_function(wrap_pyfunction!(find_embedding, m)?)?;
    m.add_function(wrap_pyfunction!(is_isomorphic, m)?)?;
    m.add_function(wrap_pyfunction!(core_of, m)?)?;
    m.add_function(wrap_pyfunction!(automorphism_count, m)?)?;
    m.add_function(wrap_pyfunction!(is_member, m)?)?;
    m.add_function(wrap_pyfunction!(check_class_property, m)?)?;
    m.add_function(wrap_pyfunction!(build_generic, m)?)?;
    m.add_function(wrap_pyfunction!(homogeneity_stuck_count, m)?)?;
    m.add_function(wrap_pyfunction!(build_universal_colored, m)?)?;
    m.add_function(wrap_pyfunction!(is_retraction, m)?)?;
    m.add_function(wrap_pyfunction!(check_caut_identity, m)?)?;
    m.add_function(wrap_pyfunction!(count_pe_types, m)?)?;
    m.add_function(wrap_pyfunction!(count_orbits, m)?)?;
    m.add_function(wrap_pyfunction!(check_worn, m)?)?;
    Ok(())
}

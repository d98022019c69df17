//! Python bindings. Markings are dicts from place names to counts (missing
//! places count zero), cubes and counting sets use their JSON shapes, and
//! witnesses are lists of `(transition, exponent)` pairs.

use pyo3::create_exception;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;
use serde_json::{Map, Value};

use bionet_core::countset::{self, CountsetError};
use bionet_core::explicit::{self, SearchError};
use bionet_core::footprint::{self, FootprintError};
use bionet_core::{fixtures, AcceleratedSequence, Cube, EngineParams, Marking, SearchParams, Verdict};

create_exception!(bionet, UnstableError, PyRuntimeError, "The verdict changed as the smoke representative grew.");

fn value_error(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn footprint_error(e: FootprintError) -> PyErr {
    match e {
        FootprintError::Unstable { state, .. } => UnstableError::new_err(format!("unstable at {state}")),
        other => value_error(other),
    }
}

fn countset_error(e: CountsetError) -> PyErr {
    match e {
        CountsetError::Footprint(e) => footprint_error(e),
        other => value_error(other),
    }
}

fn search_error(e: SearchError) -> PyErr {
    value_error(e)
}

/// Converts through Python's own `json` module, keeping key order.
fn to_py<'py>(py: Python<'py>, v: &Value) -> PyResult<Bound<'py, PyAny>> {
    py.import("json")?.call_method1("loads", (v.to_string(),))
}

/// An answer string and, when it is `"true"`, a witness.
type Answer = (String, Option<Vec<(String, u64)>>);

fn engine(tracked_cap: Option<u64>, smoke_rep: Option<u64>, search_cap: Option<u64>) -> EngineParams {
    EngineParams { tracked_cap, smoke_rep, stability_rounds: None, search_cap }
}

/// A BIO net.
#[pyclass(name = "Net", module = "bionet", frozen)]
struct PyNet {
    inner: bionet_core::Net,
}

impl PyNet {
    fn marking(&self, counts: &Bound<'_, PyDict>) -> PyResult<Marking> {
        let mut map = Map::new();
        for (k, v) in counts.iter() {
            map.insert(k.extract::<String>()?, Value::from(v.extract::<u64>()?));
        }
        self.inner.marking_from_json(&Value::Object(map)).map_err(value_error)
    }

    fn marking_py<'py>(&self, py: Python<'py>, m: &Marking) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.inner.marking_to_json(m))
    }

    fn blocks(&self, seq: &AcceleratedSequence) -> Vec<(String, u64)> {
        let value = self.inner.sequence_to_json(seq);
        value
            .as_array()
            .expect("sequences serialize as arrays")
            .iter()
            .map(|b| (b[0].as_str().unwrap_or_default().to_string(), b[1].as_u64().unwrap_or_default()))
            .collect()
    }

    fn caps(&self, markings: &[&Marking], cap_per_place: Option<u64>, cap_total: Option<u64>) -> SearchParams {
        let largest = markings.iter().map(|m| m.total()).max().unwrap_or(0);
        let per = cap_per_place.unwrap_or((2 * largest).max(16));
        SearchParams::new(per, cap_total.unwrap_or(per * self.inner.place_count() as u64))
    }

    fn verdict(&self, v: Verdict) -> Answer {
        (v.answer.as_str().to_string(), v.witness.as_ref().map(|w| self.blocks(w)))
    }

    fn cube(&self, py: Python<'_>, c: &Bound<'_, PyAny>) -> PyResult<Cube> {
        let text: String = py.import("json")?.call_method1("dumps", (c,))?.extract()?;
        Cube::parse(&self.inner, &text).map_err(countset_error)
    }
}

#[pymethods]
impl PyNet {
    /// Parses a net from its JSON text.
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(PyNet { inner: bionet_core::Net::parse(text).map_err(value_error)? })
    }

    /// One of the built-in nets, such as `"paper-net-1"` or `"toy-move"`.
    #[staticmethod]
    fn fixture(name: &str) -> PyResult<Self> {
        fixtures::by_name(name)
            .map(|inner| PyNet { inner })
            .ok_or_else(|| PyValueError::new_err(format!("no fixture named {name}")))
    }

    fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.inner.to_json()).expect("nets serialize")
    }

    #[getter]
    fn name(&self) -> &str {
        self.inner.name()
    }

    #[getter]
    fn places(&self) -> Vec<String> {
        self.inner.places().to_vec()
    }

    #[getter]
    fn transitions(&self) -> Vec<String> {
        self.inner.transitions().iter().map(|t| t.name.clone()).collect()
    }

    /// `"IO"`, `"BIO"` or `"EXTENDED"`.
    fn classify(&self) -> String {
        self.inner.classify().to_string()
    }

    /// Fires `blocks` from `marking` and returns the resulting marking.
    fn apply<'py>(
        &self,
        py: Python<'py>,
        marking: &Bound<'py, PyDict>,
        blocks: Vec<(String, u64)>,
    ) -> PyResult<Bound<'py, PyAny>> {
        let from = self.marking(marking)?;
        let seq = self.inner.sequence_from_json(&serde_json::json!(blocks)).map_err(value_error)?;
        let to = self.inner.apply_sequence(&from, &seq).map_err(value_error)?;
        self.marking_py(py, &to)
    }

    /// Explicit reachability: `(answer, witness)` where `answer` is
    /// `"true"`, `"false"` or `"unknown-capped"`.
    #[pyo3(signature = (source, target, cap_per_place=None, cap_total=None))]
    fn reach(
        &self,
        source: &Bound<'_, PyDict>,
        target: &Bound<'_, PyDict>,
        cap_per_place: Option<u64>,
        cap_total: Option<u64>,
    ) -> PyResult<Answer> {
        let (from, to) = (self.marking(source)?, self.marking(target)?);
        let params = self.caps(&[&from, &to], cap_per_place, cap_total);
        Ok(self.verdict(explicit::reach(&self.inner, &from, &to, &params).map_err(search_error)?))
    }

    /// Explicit coverability, same result shape as `reach`.
    #[pyo3(signature = (source, target, cap_per_place=None, cap_total=None))]
    fn cover(
        &self,
        source: &Bound<'_, PyDict>,
        target: &Bound<'_, PyDict>,
        cap_per_place: Option<u64>,
        cap_total: Option<u64>,
    ) -> PyResult<Answer> {
        let (from, to) = (self.marking(source)?, self.marking(target)?);
        let params = self.caps(&[&from, &to], cap_per_place, cap_total);
        Ok(self.verdict(explicit::cover(&self.inner, &from, &to, &params).map_err(search_error)?))
    }

    /// Footprint-engine reachability from an exact marking; the answer as
    /// in `reach`.
    #[pyo3(signature = (source, target, tracked_cap=None, smoke_rep=None, search_cap=None))]
    fn footprint_reach(
        &self,
        source: &Bound<'_, PyDict>,
        target: &Bound<'_, PyDict>,
        tracked_cap: Option<u64>,
        smoke_rep: Option<u64>,
        search_cap: Option<u64>,
    ) -> PyResult<String> {
        let (from, to) = (self.marking(source)?, self.marking(target)?);
        let state = bionet_core::FootprintState::exact(from);
        let v = footprint::footprint_reach(&self.inner, &state, &to, &engine(tracked_cap, smoke_rep, search_cap))
            .map_err(footprint_error)?;
        Ok(v.answer.as_str().to_string())
    }

    /// The markings that can reach `target`.
    #[pyo3(signature = (target, tracked_cap=None, smoke_rep=None, search_cap=None))]
    fn pre_star(
        &self,
        target: &Bound<'_, PyDict>,
        tracked_cap: Option<u64>,
        smoke_rep: Option<u64>,
        search_cap: Option<u64>,
    ) -> PyResult<CountingSet> {
        let to = self.marking(target)?;
        let p = footprint::pre_star_point(&self.inner, &to, &engine(tracked_cap, smoke_rep, search_cap))
            .map_err(footprint_error)?;
        Ok(CountingSet { net: self.inner.clone(), inner: p.set })
    }

    /// Can some marking of cube `source` reach some marking of cube `target`?
    #[pyo3(signature = (source, target, cover=false))]
    fn cube_reach(&self, py: Python<'_>, source: &Bound<'_, PyAny>, target: &Bound<'_, PyAny>, cover: bool) -> PyResult<bool> {
        let (from, to) = (self.cube(py, source)?, self.cube(py, target)?);
        let params = EngineParams::default();
        let r = if cover {
            countset::cube_cover(&self.inner, &from, &to, &params)
        } else {
            countset::cube_reach(&self.inner, &from, &to, &params)
        };
        r.map_err(countset_error)
    }

    /// The live markings.
    fn live_set(&self) -> PyResult<CountingSet> {
        let set = countset::live_set(&self.inner, &EngineParams::default()).map_err(countset_error)?;
        Ok(CountingSet { net: self.inner.clone(), inner: set })
    }

    /// The shortening bounds as a dict; big integers are Python ints.
    fn bounds<'py>(&self, py: Python<'py>, m: u64, m_prime: u64) -> PyResult<Bound<'py, PyDict>> {
        let b = self.inner.compute_bounds(m, m_prime);
        let d = PyDict::new(py);
        let int = py.import("builtins")?.getattr("int")?;
        d.set_item("k_io", int.call1((b.k_io.to_string(),))?)?;
        d.set_item("k_bio", int.call1((b.k_bio.to_string(),))?)?;
        d.set_item("token_bound", int.call1((b.token_bound.to_string(),))?)?;
        d.set_item("m_d", b.m_d)?;
        Ok(d)
    }

    fn __repr__(&self) -> String {
        format!("Net({:?}, places={}, transitions={})", self.inner.name(), self.inner.place_count(), self.inner.transitions().len())
    }
}

/// A finite union of cubes over a net's places.
#[pyclass(module = "bionet", frozen)]
struct CountingSet {
    net: bionet_core::Net,
    inner: bionet_core::CountingSet,
}

#[pymethods]
impl CountingSet {
    fn __contains__(&self, marking: &Bound<'_, PyDict>) -> PyResult<bool> {
        let net = PyNet { inner: self.net.clone() };
        Ok(self.inner.contains(&net.marking(marking)?))
    }

    fn __len__(&self) -> usize {
        self.inner.cubes().len()
    }

    /// The cubes in their JSON shape.
    fn cubes<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.inner.to_json(&self.net)["cubes"])
    }

    #[getter]
    fn upper_norm(&self) -> u64 {
        self.inner.upper_norm()
    }

    #[getter]
    fn lower_norm(&self) -> u64 {
        self.inner.lower_norm()
    }

    fn to_json(&self) -> String {
        self.inner.to_json(&self.net).to_string()
    }
}

#[pymodule]
fn bionet(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyNet>()?;
    m.add_class::<CountingSet>()?;
    m.add("UnstableError", m.py().get_type::<UnstableError>())?;
    Ok(())
}

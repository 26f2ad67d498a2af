//! Python bindings: diagrams, embedding pairs, function systems and edge
//! assignments, with the checks and reports of the core crate. Paths are
//! passed as literals such as `"prefix=[0,1] tail=allmax"` and exact
//! rationals as strings.

use adicfactor::catalog;
use adicfactor::diagram::BratteliDiagram;
use adicfactor::dimgroup::{self, Trace, TraceMode};
use adicfactor::dps::{DpsAssignment, ExtPoint, Fibre, FibreCoord};
use adicfactor::embedding::{EmbeddingPair, FibreClassification};
use adicfactor::finmodel;
use adicfactor::geometry;
use adicfactor::ifs::{self, IfsSystem, Separation};
use adicfactor::io;
use adicfactor::kreport::{self, AttractorShape};
use adicfactor::pathspace::LazyPath;
use adicfactor::vershik::OrderedSystem;
use num::BigRational;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

fn err(e: adicfactor::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn path(s: &str) -> PyResult<LazyPath> {
    s.parse().map_err(err)
}

fn rational(s: &str) -> PyResult<BigRational> {
    s.trim().parse().map_err(|_| PyValueError::new_err(format!("bad rational {s:?}")))
}

fn strings<T: ToString>(v: &[T]) -> Vec<String> {
    v.iter().map(|x| x.to_string()).collect()
}

#[pyclass(name = "Diagram", module = "adicfactor", frozen)]
struct PyDiagram(BratteliDiagram);

#[pymethods]
impl PyDiagram {
    #[staticmethod]
    fn catalog(name: &str) -> PyResult<Self> {
        catalog::diagram_named(name).map(PyDiagram).map_err(err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        io::parse_diagram(text).map(PyDiagram).map_err(err)
    }

    fn to_json(&self) -> String {
        io::diagram_to_json(&self.0)
    }

    fn vertex_count(&self, level: usize) -> usize {
        self.0.vertex_count(level)
    }

    fn edge_count(&self, level: usize) -> usize {
        self.0.edge_count(level)
    }

    /// Violations of the diagram axioms, empty when valid.
    fn violations(&self) -> Vec<String> {
        self.0.validate().violations.iter().map(|v| format!("{v:?}")).collect()
    }

    fn telescope(&self, cuts: Vec<usize>) -> PyResult<Self> {
        self.0.telescope(&cuts).map(PyDiagram).map_err(err)
    }

    fn identify_group(&self) -> String {
        dimgroup::identify_group(&self.0).to_string()
    }

    fn order_unit(&self, level: usize) -> PyResult<Vec<String>> {
        Ok(strings(&dimgroup::order_unit(&self.0, level).map_err(err)?.vector))
    }

    /// Perron trace weights on levels `0..=depth`.
    fn trace(&self, depth: usize) -> PyResult<Vec<Vec<String>>> {
        let t = dimgroup::trace(&self.0, TraceMode::Perron).map_err(err)?;
        let tv = match &t {
            Trace::Unique(tv) => tv,
            _ => t.unique().ok_or_else(|| PyValueError::new_err("trace is not unique"))?,
        };
        (0..=depth).map(|n| tv.at(n).map(|v| strings(&v)).map_err(err)).collect()
    }

    fn vershik(&self, x: &str) -> PyResult<String> {
        let sys = OrderedSystem::new(&self.0).map_err(err)?;
        Ok(sys.vershik(&path(x)?).map_err(err)?.to_string())
    }

    fn vershik_inverse(&self, x: &str) -> PyResult<String> {
        let sys = OrderedSystem::new(&self.0).map_err(err)?;
        Ok(sys.vershik_inverse(&path(x)?).map_err(err)?.to_string())
    }

    /// `x` and its next `steps` iterates.
    fn orbit(&self, x: &str, steps: i64) -> PyResult<Vec<String>> {
        let sys = OrderedSystem::new(&self.0).map_err(err)?;
        let budget = steps.unsigned_abs() as usize;
        Ok(strings(&sys.orbit(&path(x)?, steps, budget).map_err(err)?))
    }

    fn __repr__(&self) -> String {
        format!("Diagram({})", io::diagram_to_json(&self.0))
    }
}

#[pyclass(name = "EmbeddingPair", module = "adicfactor", frozen)]
struct PyPair(EmbeddingPair);

#[pymethods]
impl PyPair {
    #[staticmethod]
    fn catalog(name: &str) -> PyResult<Self> {
        catalog::pair_named(name).map(PyPair).map_err(err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        io::parse_embedding(text).map(PyPair).map_err(err)
    }

    fn to_json(&self) -> String {
        io::embedding_to_json(&self.0)
    }

    /// Pass flags of the six embedding conditions.
    fn conditions(&self) -> Vec<bool> {
        self.0.check_conditions().outcomes.iter().map(|o| o.passed).collect()
    }

    /// `None` for a one-point fibre, otherwise the partner path.
    fn partner(&self, x: &str) -> PyResult<Option<String>> {
        Ok(match self.0.classify_fibre(&path(x)?).map_err(err)? {
            FibreClassification::Singleton => None,
            FibreClassification::Pair { partner, .. } => Some(partner.to_string()),
        })
    }

    /// Sizes of the two covering families at length `n`.
    fn covering_sizes(&self, n: usize) -> PyResult<(usize, usize)> {
        let (a, b) = self.0.covering_families(n).map_err(err)?;
        Ok((a.len(), b.len()))
    }

    /// `(k, verified)` of the regularity witness for the arrow `(x, y)`.
    #[pyo3(signature = (x, y, eps, samples = 100, seed = 0))]
    fn regularity(&self, x: &str, y: &str, eps: &str, samples: usize, seed: u64) -> PyResult<(usize, bool)> {
        let (x, y) = (path(x)?, path(y)?);
        let (x1, y1) = (self.0.partner(&x).map_err(err)?, self.0.partner(&y).map_err(err)?);
        let w = self.0.regularity_witness((&x, &y), (&x1, &y1), &rational(eps)?, samples, seed).map_err(err)?;
        Ok((w.k, w.verified))
    }

    /// `(K0, K1)` of the quotient groupoid.
    fn k_groups(&self) -> PyResult<(String, String)> {
        let r = kreport::factor_invariants(&self.0).map_err(err)?;
        Ok((r.k0.to_string(), r.k1.to_string()))
    }

    /// `(measure, bound, ok)` for paths following the first embedding up to level `m`.
    #[pyo3(signature = (m, prefix = Vec::new()))]
    fn measure_vanishing(&self, m: usize, prefix: Vec<usize>) -> PyResult<(String, String, bool)> {
        let r = kreport::measure_vanishing(&self.0, &prefix, m).map_err(err)?;
        Ok((r.mu.to_string(), r.bound.to_string(), r.ok))
    }
}

#[pyclass(name = "FunctionSystem", module = "adicfactor", frozen)]
struct PySystem(IfsSystem);

#[pymethods]
impl PySystem {
    #[staticmethod]
    fn catalog(name: &str) -> PyResult<Self> {
        catalog::ifs_named(name).map(PySystem).map_err(err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        io::parse_ifs(text).map(PySystem).map_err(err)
    }

    fn to_json(&self) -> String {
        io::ifs_to_json(&self.0)
    }

    fn map_count(&self) -> usize {
        self.0.map_count()
    }

    fn contraction(&self) -> String {
        self.0.lambda().to_string()
    }

    /// `"separated"`, `"overlapping"` or `"unknown"`.
    #[pyo3(signature = (depth = 2))]
    fn separation(&self, depth: usize) -> &'static str {
        match ifs::strong_separation(&self.0, depth) {
            Separation::Separated { .. } => "separated",
            Separation::Overlapping { .. } => "overlapping",
            Separation::Unknown => "unknown",
        }
    }

    /// Squared diameters of the level-`n` cells.
    fn cell_diameters_sq(&self, n: usize) -> Vec<String> {
        ifs::attractor_cells(&self.0, n).cells.iter().map(|c| c.diameter_sq.to_string()).collect()
    }
}

#[pyclass(name = "Assignment", module = "adicfactor", frozen)]
struct PyAssignment(DpsAssignment);

#[pymethods]
impl PyAssignment {
    #[staticmethod]
    fn catalog(name: &str) -> PyResult<Self> {
        catalog::assignment_named(name).map(PyAssignment).map_err(err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        io::parse_assignment(text).map(PyAssignment).map_err(err)
    }

    fn to_json(&self) -> String {
        io::assignment_to_json(&self.0)
    }

    /// Word on an edge, `None` for the identity.
    fn word(&self, level: usize, edge: usize) -> Option<Vec<usize>> {
        self.0.word(level, edge)
    }

    #[pyo3(signature = (depth = 3))]
    fn is_valid(&self, depth: usize) -> bool {
        self.0.validate(depth).is_valid()
    }

    /// Whether the fibre over `x` is a single point.
    fn point_fibre(&self, x: &str) -> PyResult<bool> {
        Ok(matches!(self.0.fibre(&path(x)?, 1).map_err(err)?, Fibre::Singleton { .. }))
    }

    /// Image of `(x, c)` under the extended map; `c` is `None` for point fibres.
    #[pyo3(signature = (x, c = None, inverse = false))]
    fn step(&self, x: &str, c: Option<Vec<String>>, inverse: bool) -> PyResult<(String, Option<Vec<String>>)> {
        let c = match c {
            Some(v) => FibreCoord::Point(v.iter().map(|s| rational(s)).collect::<PyResult<_>>()?),
            None => FibreCoord::Unique,
        };
        let p = ExtPoint { x: path(x)?, c };
        let next = if inverse { self.0.phi_tilde_inverse(&p) } else { self.0.phi_tilde(&p) }.map_err(err)?;
        let coord = match next.c {
            FibreCoord::Unique => None,
            FibreCoord::Point(v) => Some(strings(&v)),
        };
        Ok((next.x.to_string(), coord))
    }

    /// `(k, verified)` of the regularity witness at `x`.
    #[pyo3(signature = (x, eps, samples = 100, seed = 0))]
    fn regularity(&self, x: &str, eps: &str, samples: usize, seed: u64) -> PyResult<(usize, bool)> {
        let w = self.0.regularity_witness(&path(x)?, &rational(eps)?, samples, seed).map_err(err)?;
        Ok((w.k, w.verified))
    }

    /// `(K0, K1)` of the extension for an attractor shape such as `"sierpinski"`.
    fn k_groups(&self, shape: &str) -> PyResult<(String, String)> {
        let shape: AttractorShape = shape.parse().map_err(err)?;
        let r = kreport::dps_invariants(&self.0, Some(shape), None).map_err(err)?;
        Ok((r.k0.to_string(), r.k1.to_string()))
    }
}

/// `(x, y, r)` of the circles at a stage of the ternary picture.
#[pyfunction]
fn circles(stage: usize) -> PyResult<Vec<(f64, f64, f64)>> {
    Ok(geometry::circles(stage).map_err(err)?.iter().map(|c| (c.center.re, c.center.im, c.radius_f64())).collect())
}

/// SVG for a named scene: ternary, shrinking, cantor or figure-two.
#[pyfunction]
fn render_svg(name: &str, stage: usize) -> PyResult<String> {
    Ok(geometry::render_svg(&geometry::catalog_scene(name, stage).map_err(err)?))
}

/// Exactness flags and residuals of the partial isometry identities.
#[pyfunction]
fn hadamard_verify(n: usize) -> PyResult<(bool, bool, bool, Vec<f64>)> {
    let r = finmodel::hadamard_verify(n).map_err(err)?;
    Ok((r.vvstar_ok, r.vstarv_ok, r.conjugation_ok, r.residuals.to_vec()))
}

#[pymodule]
#[pyo3(name = "adicfactor")]
fn adicfactor_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDiagram>()?;
    m.add_class::<PyPair>()?;
    m.add_class::<PySystem>()?;
    m.add_class::<PyAssignment>()?;
    m.add_function(wrap_pyfunction!(circles, m)?)?;
    m.add_function(wrap_pyfunction!(render_svg, m)?)?;
    m.add_function(wrap_pyfunction!(hadamard_verify, m)?)?;
    Ok(())
}

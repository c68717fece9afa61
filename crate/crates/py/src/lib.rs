//! Python bindings: theories, finite algebras and the main searches.
//!
//! Reports that have a JSON form in the command line come back as plain
//! Python dicts and lists built from that same JSON.

use std::sync::Arc;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use lawvere::clone::{reconstruct_theory, restrict_along, CloneOptions, RestrictError};
use lawvere::dsl::{default_var_names, format_equation, parse_theory_morphism};
use lawvere::record::{algebra_hash, theory_hash, AlgebraRecord};
use lawvere::sieve::{Equivalence, Sieve};
use lawvere::{
    automorphism_group, enumerate_homs, enumerate_isos, enumerate_models, format_term, free_algebra, parse_candidates,
    parse_term, parse_theory, EnumOptions, FiniteAlgebra, FreeAlgebraResult, FreeBounds,
};

fn value_error(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn runtime_error(e: impl std::fmt::Display) -> PyErr {
    PyRuntimeError::new_err(e.to_string())
}

fn to_python<'py>(py: Python<'py>, value: &serde_json::Value) -> PyResult<Bound<'py, PyAny>> {
    py.import("json")?.call_method1("loads", (value.to_string(),))
}

/// An algebraic theory: operation symbols with arities and equations.
#[pyclass(frozen, module = "lawvere")]
struct Theory {
    inner: Arc<lawvere::Theory>,
}

#[pymethods]
impl Theory {
    #[new]
    fn new(text: &str) -> PyResult<Self> {
        Ok(Theory { inner: Arc::new(parse_theory(text).map_err(value_error)?) })
    }

    #[staticmethod]
    fn from_file(path: &str) -> PyResult<Self> {
        let text = std::fs::read_to_string(path).map_err(value_error)?;
        let theory = parse_theory(&text).map_err(|e| PyValueError::new_err(format!("{path}:{e}")))?;
        Ok(Theory { inner: Arc::new(theory) })
    }

    #[getter]
    fn name(&self) -> &str {
        self.inner.name()
    }

    #[getter]
    fn operations(&self) -> Vec<(String, usize)> {
        self.inner.signature().iter().map(|s| (s.name().to_string(), s.arity())).collect()
    }

    #[getter]
    fn equations(&self) -> Vec<String> {
        self.inner.equations().iter().map(format_equation).collect()
    }

    fn render(&self) -> String {
        lawvere::render_theory(&self.inner)
    }

    fn hash(&self) -> String {
        theory_hash(&self.inner)
    }

    fn __repr__(&self) -> String {
        format!("Theory({:?}, operations={}, equations={})", self.inner.name(), self.inner.signature().len(), self.inner.equations().len())
    }
}

/// A finite algebra for a theory, given by its operation tables.
#[pyclass(frozen, module = "lawvere")]
struct Algebra {
    inner: Arc<FiniteAlgebra>,
}

impl Algebra {
    fn wrap(a: FiniteAlgebra) -> Self {
        Algebra { inner: Arc::new(a) }
    }
}

#[pymethods]
impl Algebra {
    /// `tables` maps each symbol to a flat row-major list; constants may
    /// be given as a single integer.
    #[new]
    fn new(theory: &Theory, size: usize, tables: &Bound<'_, PyDict>) -> PyResult<Self> {
        let mut record_tables = lawvere::record::AlgebraRecord {
            theory: theory.inner.name().to_string(),
            theory_hash: theory_hash(&theory.inner),
            size,
            tables: Default::default(),
        };
        for (k, v) in tables.iter() {
            let name: String = k.extract()?;
            let value = match v.extract::<usize>() {
                Ok(c) => lawvere::record::TableValue::Constant(c),
                Err(_) => lawvere::record::TableValue::Table(v.extract()?),
            };
            record_tables.tables.insert(name, value);
        }
        Ok(Algebra::wrap(record_tables.to_algebra(&theory.inner).map_err(value_error)?))
    }

    #[staticmethod]
    fn from_json(theory: &Theory, text: &str) -> PyResult<Self> {
        let record = AlgebraRecord::from_json(text).map_err(value_error)?;
        Ok(Algebra::wrap(record.to_algebra(&theory.inner).map_err(value_error)?))
    }

    fn to_json(&self) -> String {
        AlgebraRecord::from_algebra(&self.inner).to_json()
    }

    #[getter]
    fn size(&self) -> usize {
        self.inner.size()
    }

    #[getter]
    fn theory(&self) -> Theory {
        Theory { inner: self.inner.theory().clone() }
    }

    fn table(&self, symbol: &str) -> PyResult<Vec<usize>> {
        self.inner.table(symbol).map(<[usize]>::to_vec).ok_or_else(|| PyValueError::new_err(format!("no symbol `{symbol}`")))
    }

    fn apply(&self, symbol: &str, args: Vec<usize>) -> PyResult<usize> {
        let op = self.inner.theory().symbol_index(symbol).ok_or_else(|| PyValueError::new_err(format!("no symbol `{symbol}`")))?;
        if args.len() != self.inner.theory().signature()[op].arity() || args.iter().any(|&a| a >= self.inner.size()) {
            return Err(PyValueError::new_err("arguments do not fit the operation"));
        }
        Ok(self.inner.apply(op, &args))
    }

    /// Evaluates a term written in the theory's syntax; `vars` names the
    /// variables in the order of `env`.
    fn evaluate(&self, term: &str, vars: Vec<String>, env: Vec<usize>) -> PyResult<usize> {
        let (t, _) = parse_term(term, self.inner.theory(), Some(&vars)).map_err(value_error)?;
        self.inner.evaluate(&t, &env).map_err(value_error)
    }

    fn is_model(&self) -> bool {
        self.inner.is_model()
    }

    /// `(equation, env, lhs, rhs)` for every failing instance.
    fn violations(&self) -> Vec<(String, Vec<usize>, usize, usize)> {
        self.inner.check_model().into_iter().map(|v| (v.equation.name, v.env, v.lhs_value, v.rhs_value)).collect()
    }

    fn canonical(&self) -> Algebra {
        Algebra::wrap(self.inner.canonicalize())
    }

    fn is_isomorphic(&self, other: &Algebra) -> bool {
        self.inner.is_isomorphic(&other.inner)
    }

    fn hash(&self) -> String {
        algebra_hash(&self.inner)
    }

    fn __eq__(&self, other: &Algebra) -> bool {
        self.inner == other.inner
    }

    fn __repr__(&self) -> String {
        format!("Algebra({}, size={})", self.inner.theory().name(), self.inner.size())
    }
}

/// Models of size `1..=max_size`, or only `max_size` with `exact`.
#[pyfunction]
#[pyo3(signature = (theory, max_size, exact = false, up_to_iso = false, jobs = 1))]
fn enumerate(py: Python<'_>, theory: &Theory, max_size: usize, exact: bool, up_to_iso: bool, jobs: usize) -> PyResult<Vec<Algebra>> {
    let t = theory.inner.clone();
    let opts = EnumOptions { exact_size: exact, up_to_iso, jobs, ..Default::default() };
    let models = py.detach(move || enumerate_models(&t, max_size, &opts)).map_err(runtime_error)?;
    Ok(models.into_iter().map(Algebra::wrap).collect())
}

/// Homomorphisms as element maps, in lexicographic order.
#[pyfunction]
#[pyo3(signature = (source, target, isos_only = false))]
fn homomorphisms(source: &Algebra, target: &Algebra, isos_only: bool) -> PyResult<Vec<Vec<usize>>> {
    let homs = if isos_only { enumerate_isos(&source.inner, &target.inner) } else { enumerate_homs(&source.inner, &target.inner) };
    Ok(homs.map_err(value_error)?.iter().map(|h| h.map().to_vec()).collect())
}

#[pyfunction]
fn automorphisms(algebra: &Algebra) -> PyResult<Vec<Vec<usize>>> {
    Ok(automorphism_group(&algebra.inner).map_err(value_error)?.iter().map(|h| h.map().to_vec()).collect())
}

/// The free algebra on `n` generators, as a dict; `algebra` is present
/// only when the construction finished within bounds.
#[pyfunction]
#[pyo3(signature = (theory, n, max_elements = 64, max_depth = 8))]
fn free<'py>(py: Python<'py>, theory: &Theory, n: usize, max_elements: usize, max_depth: usize) -> PyResult<Bound<'py, PyDict>> {
    let out = PyDict::new(py);
    match free_algebra(&theory.inner, n, FreeBounds { max_elements, max_depth }) {
        FreeAlgebraResult::Finite { algebra, generators, element_terms, trace } => {
            let names = default_var_names(n);
            let elements: Vec<String> = element_terms.iter().map(|t| format_term(t, &names)).collect();
            out.set_item("finite", true)?;
            out.set_item("algebra", Algebra { inner: algebra })?;
            out.set_item("generators", generators)?;
            out.set_item("elements", elements)?;
            out.set_item("trace", trace)?;
        }
        FreeAlgebraResult::BoundExceeded { classes_found, depth_reached, trace, reason } => {
            out.set_item("finite", false)?;
            out.set_item("classes_found", classes_found)?;
            out.set_item("depth_reached", depth_reached)?;
            out.set_item("reason", format!("{reason:?}").to_lowercase())?;
            out.set_item("trace", trace)?;
        }
    }
    Ok(out)
}

/// Term operations against natural families, in the JSON report layout.
#[pyfunction]
#[pyo3(signature = (theory, max_arity, max_coarity, max_size, depth = 3))]
fn reconstruct<'py>(
    py: Python<'py>,
    theory: &Theory,
    max_arity: usize,
    max_coarity: usize,
    max_size: usize,
    depth: usize,
) -> PyResult<Bound<'py, PyAny>> {
    let t = theory.inner.clone();
    let report = py
        .detach(move || reconstruct_theory(&t, max_arity, max_coarity, max_size, depth, &CloneOptions::default()))
        .map_err(runtime_error)?;
    to_python(py, &serde_json::to_value(report.to_json()).map_err(runtime_error)?)
}

/// Checks candidate `eq` lines against every model of size at most
/// `max_size`.
#[pyfunction]
fn sieve<'py>(py: Python<'py>, theory: &Theory, candidates: &str, max_size: usize) -> PyResult<Bound<'py, PyAny>> {
    let eqs = parse_candidates(candidates, &theory.inner).map_err(value_error)?;
    let t = theory.inner.clone();
    let outcome = py.detach(move || Sieve::new(&t, max_size).and_then(|s| s.sieve(&eqs))).map_err(runtime_error)?;
    to_python(py, &serde_json::to_value(outcome.report()).map_err(runtime_error)?)
}

/// `None` when the terms agree on every model of size at most
/// `max_size`, else `(model, env, lhs_value, rhs_value)`.
#[pyfunction]
#[pyo3(signature = (theory, lhs, rhs, max_size, vars = None))]
fn distinguish(
    theory: &Theory,
    lhs: &str,
    rhs: &str,
    max_size: usize,
    vars: Option<Vec<String>>,
) -> PyResult<Option<(Algebra, Vec<usize>, usize, usize)>> {
    let names = match vars {
        Some(v) => v,
        None => {
            let (_, mut names) = parse_term(lhs, &theory.inner, None).map_err(value_error)?;
            for n in parse_term(rhs, &theory.inner, None).map_err(value_error)?.1 {
                if !names.contains(&n) {
                    names.push(n);
                }
            }
            names
        }
    };
    let (l, _) = parse_term(lhs, &theory.inner, Some(&names)).map_err(value_error)?;
    let (r, _) = parse_term(rhs, &theory.inner, Some(&names)).map_err(value_error)?;
    let sieve = Sieve::new(&theory.inner, max_size).map_err(runtime_error)?;
    Ok(match sieve.equivalent(&l, &r, names.len()).map_err(value_error)? {
        Equivalence::EquivalentUpTo(_) => None,
        Equivalence::Distinguished(c) => Some((Algebra { inner: c.model }, c.env, c.lhs_value, c.rhs_value)),
    })
}

/// Restricts `algebra` along the morphism described by `text` from
/// `source` to `target`, validating it on models of size at most
/// `max_size` first.
#[pyfunction]
#[pyo3(signature = (text, source, target, algebra, max_size = 3))]
fn restrict(text: &str, source: &Theory, target: &Theory, algebra: &Algebra, max_size: usize) -> PyResult<Algebra> {
    let f = parse_theory_morphism(text, source.inner.clone(), target.inner.clone()).map_err(value_error)?;
    match restrict_along(&f, &algebra.inner, max_size) {
        Ok(a) => Ok(Algebra::wrap(a)),
        Err(RestrictError::Invalid(c)) => Err(PyValueError::new_err(format!(
            "morphism is not valid: `{}` fails at {:?} in a model of size {}",
            format_equation(&c.translated),
            c.counterexample.env,
            c.counterexample.model.size()
        ))),
        Err(e) => Err(value_error(e)),
    }
}

#[pymodule]
#[pyo3(name = "lawvere")]
fn lawvere_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Theory>()?;
    m.add_class::<Algebra>()?;
    m.add_function(wrap_pyfunction!(enumerate, m)?)?;
    m.add_function(wrap_pyfunction!(homomorphisms, m)?)?;
    m.add_function(wrap_pyfunction!(automorphisms, m)?)?;
    m.add_function(wrap_pyfunction!(free, m)?)?;
    m.add_function(wrap_pyfunction!(reconstruct, m)?)?;
    m.add_function(wrap_pyfunction!(sieve, m)?)?;
    m.add_function(wrap_pyfunction!(distinguish, m)?)?;
    m.add_function(wrap_pyfunction!(restrict, m)?)?;
    Ok(())
}

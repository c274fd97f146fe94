//! Python bindings. Results come back as plain dicts that mirror the
//! JSON documents printed by the `tg` command-line tool.

use pyo3::exceptions::{PyIndexError, PyValueError};
use pyo3::prelude::*;
use serde_json::Value;
use tg_core::json as j;
use tg_core::{
    answer_bcq, chase_to_level, is_guarded, is_sticky, is_triangularly_guarded, is_weakly_acyclic, parse_program,
    serialize_program, Affected, Budgets, ChaseOptions,
};

fn to_py(py: Python<'_>, v: &Value) -> PyResult<Py<PyAny>> {
    let text = serde_json::to_string(v).map_err(|e| PyValueError::new_err(e.to_string()))?;
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

fn core_err(e: tg_core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// A parsed program: facts, rules and queries.
#[pyclass(name = "Program", frozen)]
struct PyProgram {
    inner: tg_core::Program,
}

#[pymethods]
impl PyProgram {
    #[new]
    fn new(text: &str) -> PyResult<Self> {
        Ok(PyProgram {
            inner: parse_program(text).map_err(core_err)?,
        })
    }

    #[getter]
    fn facts(&self) -> Vec<String> {
        self.inner.facts.iter().map(ToString::to_string).collect()
    }

    #[getter]
    fn rules(&self) -> Vec<String> {
        self.inner.rules.iter().map(ToString::to_string).collect()
    }

    #[getter]
    fn queries(&self) -> Vec<String> {
        self.inner.queries.iter().map(ToString::to_string).collect()
    }

    fn to_dict(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        to_py(py, &j::program(&self.inner))
    }

    fn __str__(&self) -> String {
        serialize_program(&self.inner)
    }

    fn __repr__(&self) -> String {
        format!(
            "Program({} facts, {} rules, {} queries)",
            self.inner.facts.len(),
            self.inner.rules.len(),
            self.inner.queries.len()
        )
    }
}

fn budgets(p: &tg_core::Program, max_rounds: Option<usize>, max_pairs: Option<usize>) -> Budgets {
    let mut b = Budgets::for_rules(&p.rules);
    if let Some(n) = max_rounds {
        b.extension.max_rounds = n;
    }
    if let Some(n) = max_pairs {
        b.extension.max_pairs = n;
    }
    b
}

/// Membership verdict for `cls` (one of "tg", "wa", "guarded", "sticky").
#[pyfunction]
#[pyo3(signature = (program, cls = "tg", max_rounds = None, max_pairs = None))]
fn check(
    py: Python<'_>,
    program: &PyProgram,
    cls: &str,
    max_rounds: Option<usize>,
    max_pairs: Option<usize>,
) -> PyResult<Py<PyAny>> {
    let rules = &program.inner.rules;
    let body = match cls {
        "tg" => j::verdict(&is_triangularly_guarded(
            rules,
            &budgets(&program.inner, max_rounds, max_pairs),
        )),
        "wa" => j::baseline(cls, is_weakly_acyclic(rules)),
        "guarded" => j::baseline(cls, is_guarded(rules)),
        "sticky" => j::baseline(cls, is_sticky(rules)),
        other => return Err(PyValueError::new_err(format!("unknown class {other:?}"))),
    };
    to_py(py, &j::document("verdict", body))
}

/// The chase of the program's facts up to `depth`.
#[pyfunction]
fn chase(py: Python<'_>, program: &PyProgram, depth: usize) -> PyResult<Py<PyAny>> {
    let p = &program.inner;
    let inst = chase_to_level(&p.facts, &p.rules, depth, &ChaseOptions::default()).map_err(core_err)?;
    to_py(py, &j::document("chase", j::chase(&inst)))
}

/// Answers the program's `query`-th boolean query.
#[pyfunction]
#[pyo3(signature = (program, depth_limit, auto = false, query = 0))]
fn ask(py: Python<'_>, program: &PyProgram, depth_limit: usize, auto: bool, query: usize) -> PyResult<Py<PyAny>> {
    let p = &program.inner;
    let q = p
        .queries
        .get(query)
        .ok_or_else(|| PyIndexError::new_err(format!("no query with index {query}")))?;
    let a = answer_bcq(&p.facts, &p.rules, q, depth_limit, auto, &ChaseOptions::default());
    to_py(py, &j::document("answer", j::answer(q, &a)))
}

/// Extension pairs and null-set table behind the TG verdict.
#[pyfunction]
#[pyo3(signature = (program, max_rounds = None, max_pairs = None))]
fn explain(
    py: Python<'_>,
    program: &PyProgram,
    max_rounds: Option<usize>,
    max_pairs: Option<usize>,
) -> PyResult<Py<PyAny>> {
    let p = &program.inner;
    // The verdict's extension stops as soon as a witness turns up, so it
    // stays small on rule sets whose full extension is huge.
    let v = is_triangularly_guarded(&p.rules, &budgets(p, max_rounds, max_pairs));
    let body = serde_json::json!({
        "pairs": v.pairs.iter().enumerate().map(|(i, x)| j::pair(i, x)).collect::<Vec<_>>(),
        "saturated": v.saturated,
        "null_sets": j::null_table(&Affected::new(&p.rules)),
        "rtcs": v.rtcs.iter().map(j::rtc).collect::<Vec<_>>(),
        "verdict": j::verdict(&v),
    });
    to_py(py, &j::document("explain", body))
}

#[pymodule]
fn tg_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyProgram>()?;
    m.add_function(wrap_pyfunction!(check, m)?)?;
    m.add_function(wrap_pyfunction!(chase, m)?)?;
    m.add_function(wrap_pyfunction!(ask, m)?)?;
    m.add_function(wrap_pyfunction!(explain, m)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn budget_overrides_apply_on_top_of_rule_defaults() {
        let p = parse_program("t(X,Y) -> t(Y,Z), u(Y,Z).").unwrap();
        let defaults = Budgets::for_rules(&p.rules).extension;
        let b = budgets(&p, Some(2), None).extension;
        assert_eq!(b.max_rounds, 2);
        assert_eq!(b.max_pairs, defaults.max_pairs);
        assert_eq!(budgets(&p, None, Some(9)).extension.max_pairs, 9);
    }
}

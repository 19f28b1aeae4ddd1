//! Python bindings. Candidates and voters are 0-based on the Python side,
//! exact values come back as `fractions.Fraction`.

use propvote::axioms::{self, CoreProperty, Deviation, SubjectOptions, DEFAULT_SEARCH_BUDGET};
use propvote::generators;
use propvote::rules::{self, Completion, DEFAULT_PAV_BUDGET};
use propvote::{Committee, ElectionInstance, Error, Rational};
use pyo3::create_exception;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

create_exception!(propvote_py, BudgetExceeded, PyRuntimeError);

fn err(e: Error) -> PyErr {
    match e {
        Error::BudgetExceeded { .. } => BudgetExceeded::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn fraction<'py>(py: Python<'py>, r: &Rational) -> PyResult<Bound<'py, PyAny>> {
    py.import("fractions")?.getattr("Fraction")?.call1((r.to_string(),))
}

fn fractions<'py>(py: Python<'py>, rs: &[Rational]) -> PyResult<Vec<Bound<'py, PyAny>>> {
    rs.iter().map(|r| fraction(py, r)).collect()
}

/// Accepts an int, a `Fraction` or a string such as `"3/2"`.
fn rational(value: &Bound<'_, PyAny>) -> PyResult<Rational> {
    let s = value.str()?.to_string();
    s.parse().map_err(|_| PyValueError::new_err(format!("not a rational number: {s}")))
}

fn committee(e: &Election, members: Vec<usize>) -> PyResult<Committee> {
    let w = Committee::new(members);
    e.inner.check_committee(&w).map_err(err)?;
    Ok(w)
}

fn deviation(d: Option<Deviation>) -> Option<(Vec<usize>, Vec<usize>)> {
    d.map(|d| (d.coalition, d.alternative.members().to_vec()))
}

/// An approval election: `m` candidates, committee size `k`, one ballot per voter.
#[pyclass(frozen, module = "propvote_py")]
pub struct Election {
    inner: ElectionInstance,
}

#[pymethods]
impl Election {
    #[new]
    fn new(num_candidates: usize, committee_size: usize, ballots: Vec<Vec<usize>>) -> PyResult<Self> {
        let inner = ElectionInstance::new(num_candidates, committee_size, ballots).map_err(err)?;
        Ok(Election { inner })
    }

    /// Reads the instance text format (header `m n k`, 1-based ballots).
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        let inner = ElectionInstance::parse(text).map_err(|e| PyValueError::new_err(e.to_string()))?;
        Ok(Election { inner })
    }

    #[staticmethod]
    fn fixture(name: &str) -> PyResult<Self> {
        Ok(Election { inner: generators::fixture_by_name(name).map_err(err)? })
    }

    fn to_text(&self) -> String {
        self.inner.to_text()
    }

    #[getter]
    fn num_candidates(&self) -> usize {
        self.inner.num_candidates()
    }

    #[getter]
    fn num_voters(&self) -> usize {
        self.inner.num_voters()
    }

    #[getter]
    fn committee_size(&self) -> usize {
        self.inner.committee_size()
    }

    #[getter]
    fn ballots(&self) -> Vec<Vec<usize>> {
        self.inner.ballots().to_vec()
    }

    fn digest(&self) -> String {
        self.inner.digest()
    }

    fn welfare(&self, members: Vec<usize>) -> PyResult<Vec<usize>> {
        let w = committee(self, members)?;
        Ok(self.inner.welfare_vector(&w).map_err(err)?.utilities().to_vec())
    }

    fn __repr__(&self) -> String {
        format!(
            "Election(m={}, n={}, k={})",
            self.inner.num_candidates(),
            self.inner.num_voters(),
            self.inner.committee_size()
        )
    }
}

#[pyfunction]
fn pav_score<'py>(py: Python<'py>, e: &Election, members: Vec<usize>) -> PyResult<Bound<'py, PyAny>> {
    let w = committee(e, members)?;
    fraction(py, &rules::pav_score(&e.inner, &w).map_err(err)?)
}

/// Every committee of maximal PAV score.
#[pyfunction]
#[pyo3(signature = (e, budget = DEFAULT_PAV_BUDGET))]
fn pav_winners(e: &Election, budget: u64) -> PyResult<Vec<Vec<usize>>> {
    let ws = rules::pav_winners(&e.inner, budget).map_err(err)?;
    Ok(ws.iter().map(|w| w.members().to_vec()).collect())
}

#[pyfunction]
fn seq_pav(e: &Election) -> Vec<usize> {
    rules::seq_pav(&e.inner).members().to_vec()
}

/// Returns `{"elected": [...], "times": [...]}` in election order.
#[pyfunction]
fn phragmen<'py>(py: Python<'py>, e: &Election) -> PyResult<Bound<'py, PyDict>> {
    let t = rules::phragmen_sequential(&e.inner);
    let d = PyDict::new(py);
    d.set_item("elected", &t.elected)?;
    d.set_item("times", fractions(py, &t.election_times)?)?;
    Ok(d)
}

/// Returns `{"elected", "q_values", "completed"}`. With `complete=True` the
/// committee is filled up by continuing with Phragmén's process.
#[pyfunction]
#[pyo3(signature = (e, complete = false))]
fn rule_x<'py>(py: Python<'py>, e: &Election, complete: bool) -> PyResult<Bound<'py, PyDict>> {
    let t = if complete {
        rules::rule_x_complete(&e.inner, Completion::PhragmenContinuation)
    } else {
        rules::rule_x(&e.inner)
    };
    let d = PyDict::new(py);
    d.set_item("elected", &t.elected)?;
    d.set_item("q_values", fractions(py, &t.q_values)?)?;
    d.set_item("completed", t.completed)?;
    Ok(d)
}

#[pyfunction]
fn dhondt(party_sizes: Vec<usize>, k: usize) -> PyResult<Vec<usize>> {
    rules::dhondt(&party_sizes, k).map_err(err)
}

/// `(price, {(voter, candidate): amount})` if the committee is priceable.
#[pyfunction]
fn check_priceable<'py>(
    py: Python<'py>,
    e: &Election,
    members: Vec<usize>,
) -> PyResult<Option<(Bound<'py, PyAny>, Bound<'py, PyDict>)>> {
    let w = committee(e, members)?;
    let Some(ps) = axioms::check_priceable(&e.inner, &w).map_err(err)? else {
        return Ok(None);
    };
    let d = PyDict::new(py);
    for (v, row) in ps.payments.iter().enumerate() {
        for (c, amount) in row {
            d.set_item((v, *c), fraction(py, amount)?)?;
        }
    }
    Ok(Some((fraction(py, &ps.price)?, d)))
}

#[pyfunction]
fn is_laminar(e: &Election) -> bool {
    axioms::check_laminar(&e.inner).is_some()
}

#[pyfunction]
fn check_laminar_proportional(e: &Election, members: Vec<usize>) -> PyResult<bool> {
    let w = committee(e, members)?;
    axioms::check_laminar_proportional(&e.inner, &w).map_err(err)
}

/// A violating `(coalition, candidates)` pair, or `None`.
#[pyfunction]
#[pyo3(signature = (e, members, budget = DEFAULT_SEARCH_BUDGET))]
fn check_pjr(e: &Election, members: Vec<usize>, budget: u64) -> PyResult<Option<(Vec<usize>, Vec<usize>)>> {
    let w = committee(e, members)?;
    Ok(deviation(axioms::check_pjr(&e.inner, &w, budget).map_err(err)?))
}

#[pyfunction]
#[pyo3(signature = (e, members, budget = DEFAULT_SEARCH_BUDGET))]
fn check_ejr(e: &Election, members: Vec<usize>, budget: u64) -> PyResult<Option<(Vec<usize>, Vec<usize>)>> {
    let w = committee(e, members)?;
    Ok(deviation(axioms::check_ejr(&e.inner, &w, budget).map_err(err)?))
}

/// Blocking coalition for the λ-core (`lam=1` is the plain core).
#[pyfunction]
#[pyo3(signature = (e, members, lam = None, budget = DEFAULT_SEARCH_BUDGET))]
fn check_core(
    e: &Election,
    members: Vec<usize>,
    lam: Option<&Bound<'_, PyAny>>,
    budget: u64,
) -> PyResult<Option<(Vec<usize>, Vec<usize>)>> {
    let w = committee(e, members)?;
    let lam = lam.map(rational).transpose()?.unwrap_or_else(Rational::one);
    Ok(deviation(axioms::find_core_deviation(&e.inner, &w, &lam, budget).map_err(err)?))
}

/// Core restricted to deviations with `property` in `cohesive`, `price-eq`, `priceable`.
#[pyfunction]
#[pyo3(signature = (e, members, property, budget = DEFAULT_SEARCH_BUDGET))]
fn check_core_subject_to(
    e: &Election,
    members: Vec<usize>,
    property: &str,
    budget: u64,
) -> PyResult<Option<(Vec<usize>, Vec<usize>)>> {
    let w = committee(e, members)?;
    let property = match property {
        "cohesive" => CoreProperty::Cohesive,
        "price-eq" => CoreProperty::PriceEq,
        "priceable" => CoreProperty::Priceable,
        other => return Err(PyValueError::new_err(format!("unknown property {other}"))),
    };
    let opts = SubjectOptions { budget, ..SubjectOptions::default() };
    Ok(deviation(axioms::check_core_subject_to(&e.inner, &w, property, &opts).map_err(err)?))
}

/// A dominating committee, or `None`.
#[pyfunction]
#[pyo3(signature = (e, members, budget = DEFAULT_SEARCH_BUDGET))]
fn check_pareto(e: &Election, members: Vec<usize>, budget: u64) -> PyResult<Option<Vec<usize>>> {
    let w = committee(e, members)?;
    Ok(axioms::check_pareto(&e.inner, &w, budget).map_err(err)?.map(|a| a.members().to_vec()))
}

#[pyfunction]
#[pyo3(signature = (e, members, budget = DEFAULT_SEARCH_BUDGET))]
fn check_pigou_dalton(e: &Election, members: Vec<usize>, budget: u64) -> PyResult<Option<Vec<usize>>> {
    let w = committee(e, members)?;
    Ok(axioms::check_pigou_dalton(&e.inner, &w, budget).map_err(err)?.map(|a| a.members().to_vec()))
}

#[pyfunction]
fn gen_random(seed: u64, n: usize, m: usize, k: usize, density: &Bound<'_, PyAny>) -> PyResult<Election> {
    let density = rational(density)?;
    Ok(Election { inner: generators::gen_random(seed, n, m, k, &density).map_err(err)? })
}

/// Returns the election and whether every party's quota is whole.
#[pyfunction]
fn gen_party_list(voter_counts: Vec<usize>, candidates_per_party: Vec<usize>, k: usize) -> PyResult<(Election, bool)> {
    let (inner, integral) = generators::gen_party_list(&voter_counts, &candidates_per_party, k).map_err(err)?;
    Ok((Election { inner }, integral))
}

#[pyfunction]
fn gen_laminar(seed: u64, max_depth: usize, max_voters: usize, k: usize) -> PyResult<Election> {
    Ok(Election { inner: generators::gen_laminar(seed, max_depth, max_voters, k).map_err(err)? })
}

#[pymodule]
fn propvote_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Election>()?;
    m.add("BudgetExceeded", m.py().get_type::<BudgetExceeded>())?;
    m.add_function(wrap_pyfunction!(pav_score, m)?)?;
    m.add_function(wrap_pyfunction!(pav_winners, m)?)?;
    m.add_function(wrap_pyfunction!(seq_pav, m)?)?;
    m.add_function(wrap_pyfunction!(phragmen, m)?)?;
    m.add_function(wrap_pyfunction!(rule_x, m)?)?;
    m.add_function(wrap_pyfunction!(dhondt, m)?)?;
    m.add_function(wrap_pyfunction!(check_priceable, m)?)?;
    m.add_function(wrap_pyfunction!(is_laminar, m)?)?;
    m.add_function(wrap_pyfunction!(check_laminar_proportional, m)?)?;
    m.add_function(wrap_pyfunction!(check_pjr, m)?)?;
    m.add_function(wrap_pyfunction!(check_ejr, m)?)?;
    m.add_function(wrap_pyfunction!(check_core, m)?)?;
    m.add_function(wrap_pyfunction!(check_core_subject_to, m)?)?;
    m.add_function(wrap_pyfunction!(check_pareto, m)?)?;
    m.add_function(wrap_pyfunction!(check_pigou_dalton, m)?)?;
    m.add_function(wrap_pyfunction!(gen_random, m)?)?;
    m.add_function(wrap_pyfunction!(gen_party_list, m)?)?;
    m.add_function(wrap_pyfunction!(gen_laminar, m)?)?;
    Ok(())
}

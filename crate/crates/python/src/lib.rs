//! Python bindings: words, maps, the twisted conjugacy decider, Nielsen
//! numbers, Hall normal forms, Fox calculus and the experiment runner.

use std::time::{Duration, Instant};

use num_bigint::BigInt;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyAny;

use reidemeister::decider::{check_candidate, decide_doubly_auto};
use reidemeister::experiments::{run_double_experiment, run_single_experiment, ExperimentConfig, LengthDistribution};
use reidemeister::{
    fox_derivative, nielsen_number as core_nielsen, reidemeister_trace, Decision, DeciderConfig,
    Endomorphism, Error, GroupRingElement, HallBasis, NielsenStatus, NilpotentElement, Verdict, Word,
};

fn err(e: Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn json_to_py<'py>(py: Python<'py>, v: &impl serde::Serialize) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(v).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

/// Reduced word in a free group of the given rank.
#[pyclass(name = "Word", module = "pyreidemeister", frozen, eq, hash, skip_from_py_object)]
#[derive(Clone, PartialEq, Eq, Hash)]
struct PyWord(Word);

#[pymethods]
impl PyWord {
    #[new]
    #[pyo3(signature = (rank, text = "1"))]
    fn new(rank: usize, text: &str) -> PyResult<Self> {
        Word::parse(rank, text).map(PyWord).map_err(err)
    }

    #[staticmethod]
    fn generator(rank: usize, index: usize) -> PyResult<Self> {
        Word::generator(rank, index).map(PyWord).map_err(err)
    }

    #[getter]
    fn rank(&self) -> usize {
        self.0.rank()
    }

    /// Letters as `(generator index, ±1)` pairs.
    fn letters(&self) -> Vec<(usize, i64)> {
        self.0.letters().iter().map(|l| (l.generator as usize, l.sign())).collect()
    }

    fn inverse(&self) -> Self {
        PyWord(self.0.invert())
    }

    fn abelianize(&self) -> Vec<i64> {
        self.0.abelianize()
    }

    fn commutator(&self, other: &PyWord) -> PyResult<Self> {
        Word::commutator(&self.0, &other.0).map(PyWord).map_err(err)
    }

    fn __mul__(&self, other: &PyWord) -> PyResult<Self> {
        self.0.multiply(&other.0).map(PyWord).map_err(err)
    }

    fn __pow__(&self, e: i64, _modulo: Option<i64>) -> Self {
        PyWord(self.0.pow(e))
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn __str__(&self) -> String {
        self.0.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Word({}, {:?})", self.0.rank(), self.0.to_string())
    }
}

/// Homomorphism between free groups, written `a=..., b=...`.
#[pyclass(name = "Endomorphism", module = "pyreidemeister", frozen, eq, skip_from_py_object)]
#[derive(Clone, PartialEq, Eq)]
struct PyMap(Endomorphism);

#[pymethods]
impl PyMap {
    #[new]
    #[pyo3(signature = (rank, text, codomain_rank = None))]
    fn new(rank: usize, text: &str, codomain_rank: Option<usize>) -> PyResult<Self> {
        Endomorphism::parse(rank, codomain_rank.unwrap_or(rank), text)
            .map(PyMap)
            .map_err(err)
    }

    #[getter]
    fn domain_rank(&self) -> usize {
        self.0.domain_rank()
    }

    #[getter]
    fn codomain_rank(&self) -> usize {
        self.0.codomain_rank()
    }

    fn images(&self) -> Vec<PyWord> {
        self.0.images().iter().cloned().map(PyWord).collect()
    }

    fn __call__(&self, w: &PyWord) -> PyResult<PyWord> {
        self.0.apply(&w.0).map(PyWord).map_err(err)
    }

    /// `self ∘ inner`.
    fn compose(&self, inner: &PyMap) -> PyResult<Self> {
        self.0.compose(&inner.0).map(PyMap).map_err(err)
    }

    fn iterate(&self, n: u32) -> PyResult<Self> {
        self.0.iterate(n).map(PyMap).map_err(err)
    }

    fn abelian_matrix(&self) -> Vec<Vec<i64>> {
        self.0.abelian_matrix()
    }

    fn __str__(&self) -> String {
        self.0.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Endomorphism({}, {:?})", self.0.domain_rank(), self.0.to_string())
    }
}

#[derive(Clone, Default)]
struct Limits {
    config: DeciderConfig,
    timeout: Option<f64>,
}

impl Limits {
    fn build(&self) -> DeciderConfig {
        let mut cfg = self.config.clone();
        cfg.deadline = self.timeout.map(|t| Instant::now() + Duration::from_secs_f64(t));
        cfg
    }
}

/// Decider caps. `timeout` is in seconds and restarts with every call.
#[pyclass(name = "DeciderConfig", module = "pyreidemeister", skip_from_py_object)]
#[derive(Clone)]
struct PyConfig(Limits);

#[pymethods]
impl PyConfig {
    #[new]
    #[pyo3(signature = (depth_cap = 5, candidate_length_cap = None, level2_forms = true, max_candidates = 2000, rank1_search = 64, timeout = None))]
    fn new(
        depth_cap: u32,
        candidate_length_cap: Option<u32>,
        level2_forms: bool,
        max_candidates: usize,
        rank1_search: u32,
        timeout: Option<f64>,
    ) -> Self {
        PyConfig(Limits {
            config: DeciderConfig {
                depth_cap,
                candidate_length_cap,
                level2_forms,
                max_candidates,
                rank1_search,
                deadline: None,
            },
            timeout,
        })
    }

    #[getter]
    fn depth_cap(&self) -> u32 {
        self.0.config.depth_cap
    }

    #[getter]
    fn max_candidates(&self) -> usize {
        self.0.config.max_candidates
    }

    fn __repr__(&self) -> String {
        let c = &self.0.config;
        format!(
            "DeciderConfig(depth_cap={}, candidate_length_cap={:?}, level2_forms={}, max_candidates={}, rank1_search={}, timeout={:?})",
            c.depth_cap, c.candidate_length_cap, c.level2_forms, c.max_candidates, c.rank1_search, self.0.timeout
        )
    }
}

fn limits(config: Option<&PyConfig>) -> DeciderConfig {
    config.map(|c| c.0.clone()).unwrap_or_default().build()
}

/// Outcome of one decision.
#[pyclass(name = "Decision", module = "pyreidemeister", frozen)]
struct PyDecision(Decision);

#[pymethods]
impl PyDecision {
    /// `"distinct"`, `"conjugate"` or `"undecided"`.
    #[getter]
    fn kind(&self) -> &'static str {
        match self.0.verdict {
            Verdict::Distinct { .. } => "distinct",
            Verdict::Conjugate { .. } => "conjugate",
            Verdict::Undecided(_) => "undecided",
        }
    }

    #[getter]
    fn level(&self) -> Option<u32> {
        match &self.0.verdict {
            Verdict::Distinct { level } => Some(*level),
            Verdict::Undecided(r) => r.level(),
            Verdict::Conjugate { .. } => None,
        }
    }

    #[getter]
    fn reason(&self) -> Option<&'static str> {
        match &self.0.verdict {
            Verdict::Undecided(r) => Some(r.name()),
            _ => None,
        }
    }

    #[getter]
    fn witness(&self) -> Option<PyWord> {
        match &self.0.verdict {
            Verdict::Conjugate { witness } => Some(PyWord(witness.clone())),
            _ => None,
        }
    }

    #[getter]
    fn depth(&self) -> u32 {
        self.0.depth
    }

    #[getter]
    fn decided(&self) -> bool {
        self.0.verdict.is_decided()
    }

    /// Full record, levels included, as plain Python data.
    fn to_dict<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        json_to_py(py, &self.0)
    }

    fn __str__(&self) -> String {
        self.0.verdict.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Decision({})", self.0.verdict)
    }
}

/// Is `h = f(z) g z^-1` for some `z`?
#[pyfunction]
#[pyo3(signature = (f, g, h, config = None))]
fn decide_twisted(py: Python<'_>, f: &PyMap, g: &PyWord, h: &PyWord, config: Option<&PyConfig>) -> PyResult<PyDecision> {
    let cfg = limits(config);
    py.detach(|| reidemeister::decide_twisted(&f.0, &g.0, &h.0, &cfg))
        .map(PyDecision)
        .map_err(err)
}

/// Is `h = phi(z) k psi(z)^-1` for some `z`? Cyclic groups use the complete
/// rank-one procedures.
#[pyfunction]
#[pyo3(signature = (phi, psi, h, k, config = None))]
fn decide_doubly(
    py: Python<'_>,
    phi: &PyMap,
    psi: &PyMap,
    h: &PyWord,
    k: &PyWord,
    config: Option<&PyConfig>,
) -> PyResult<PyDecision> {
    let cfg = limits(config);
    py.detach(|| decide_doubly_auto(&phi.0, &psi.0, &h.0, &k.0, &cfg))
        .map(PyDecision)
        .map_err(err)
}

/// Whether `f(w) g w^-1 = h`.
#[pyfunction]
fn is_witness(f: &PyMap, g: &PyWord, h: &PyWord, w: &PyWord) -> PyResult<bool> {
    check_candidate(&f.0, &g.0, &h.0, &w.0).map_err(err)
}

/// Nielsen number of an endomorphism.
#[pyclass(name = "NielsenResult", module = "pyreidemeister", frozen)]
struct PyNielsen(reidemeister::NielsenResult);

#[pymethods]
impl PyNielsen {
    #[getter]
    fn exact(&self) -> bool {
        self.0.is_exact()
    }

    /// The exact count, or `None` when some pair stayed undecided.
    #[getter]
    fn value(&self) -> Option<usize> {
        match self.0.status {
            NielsenStatus::Exact { value } => Some(value),
            NielsenStatus::Partial { .. } => None,
        }
    }

    #[getter]
    fn lower_bound(&self) -> usize {
        self.0.lower_bound()
    }

    #[getter]
    fn upper_bound(&self) -> usize {
        match self.0.status {
            NielsenStatus::Exact { value } => value,
            NielsenStatus::Partial { upper_bound, .. } => upper_bound,
        }
    }

    #[getter]
    fn max_level(&self) -> u32 {
        self.0.max_level
    }

    fn to_dict<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        json_to_py(py, &self.0)
    }

    fn __str__(&self) -> String {
        self.0.to_string()
    }

    fn __repr__(&self) -> String {
        format!("NielsenResult({})", self.0)
    }
}

#[pyfunction]
#[pyo3(signature = (f, config = None))]
fn nielsen_number(py: Python<'_>, f: &PyMap, config: Option<&PyConfig>) -> PyResult<PyNielsen> {
    let cfg = limits(config);
    py.detach(|| core_nielsen(&f.0, &cfg)).map(PyNielsen).map_err(err)
}

/// Hall normal form of `word` in the free nilpotent quotient of the given
/// class: `(printed form, [(commutator, exponent), ...])` with zero
/// exponents left out.
#[pyfunction]
fn hall_normal_form(word: &PyWord, class: u32) -> PyResult<(String, Vec<(String, BigInt)>)> {
    let basis = HallBasis::new(word.0.rank(), class).map_err(err)?;
    let e = NilpotentElement::collect(&word.0, &basis).map_err(err)?;
    let parts = e
        .exponents()
        .iter()
        .enumerate()
        .filter(|(_, x)| x.sign() != num_bigint::Sign::NoSign)
        .map(|(i, x)| (basis.name(i), x.clone()))
        .collect();
    Ok((e.to_string(), parts))
}

fn ring_terms(r: &GroupRingElement) -> Vec<(PyWord, BigInt)> {
    r.terms().map(|(w, c)| (PyWord(w.clone()), c.clone())).collect()
}

/// Fox derivative of `word` with respect to generator `index`, as
/// `(word, coefficient)` terms.
#[pyfunction]
fn fox(word: &PyWord, index: usize) -> PyResult<Vec<(PyWord, BigInt)>> {
    fox_derivative(&word.0, index).map(|r| ring_terms(&r)).map_err(err)
}

/// Reidemeister trace of `f` as `(word, coefficient)` terms.
#[pyfunction]
fn trace(f: &PyMap) -> PyResult<Vec<(PyWord, BigInt)>> {
    reidemeister_trace(&f.0).map(|r| ring_terms(&r)).map_err(err)
}

fn experiment_config(
    trials: usize,
    seed: u64,
    timeout: f64,
    lengths: &str,
    keep_trials: bool,
    config: Option<&PyConfig>,
) -> PyResult<ExperimentConfig> {
    let lengths = match lengths {
        "uniform_length" => LengthDistribution::UniformLength,
        "by_word_count" => LengthDistribution::ByWordCount,
        other => return Err(PyValueError::new_err(format!("unknown length distribution {other:?}"))),
    };
    Ok(ExperimentConfig {
        trials,
        base_seed: seed,
        lengths,
        timeout: Duration::from_secs_f64(timeout),
        decider: config.map(|c| c.0.config.clone()).unwrap_or_default(),
        keep_trials,
    })
}

/// Nielsen-number trials on random endomorphisms of rank `k` with images of
/// length at most `l`. Returns the report as a dict.
#[pyfunction]
#[pyo3(signature = (k, l, trials = 1000, seed = 0, timeout = 30.0, lengths = "uniform_length", keep_trials = false, config = None))]
#[allow(clippy::too_many_arguments)]
fn single_experiment<'py>(
    py: Python<'py>,
    k: usize,
    l: usize,
    trials: usize,
    seed: u64,
    timeout: f64,
    lengths: &str,
    keep_trials: bool,
    config: Option<&PyConfig>,
) -> PyResult<Bound<'py, PyAny>> {
    let cfg = experiment_config(trials, seed, timeout, lengths, keep_trials, config)?;
    let report = py.detach(|| run_single_experiment(k, l, &cfg)).map_err(err)?;
    json_to_py(py, &report)
}

/// Doubly twisted trials on random map pairs from rank `k1` to rank `k2`.
#[pyfunction]
#[pyo3(signature = (k1, k2, l, trials = 1000, seed = 0, timeout = 30.0, lengths = "uniform_length", keep_trials = false, config = None))]
#[allow(clippy::too_many_arguments)]
fn double_experiment<'py>(
    py: Python<'py>,
    k1: usize,
    k2: usize,
    l: usize,
    trials: usize,
    seed: u64,
    timeout: f64,
    lengths: &str,
    keep_trials: bool,
    config: Option<&PyConfig>,
) -> PyResult<Bound<'py, PyAny>> {
    let cfg = experiment_config(trials, seed, timeout, lengths, keep_trials, config)?;
    let report = py.detach(|| run_double_experiment(k1, k2, l, &cfg)).map_err(err)?;
    json_to_py(py, &report)
}

#[pymodule]
fn pyreidemeister(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyWord>()?;
    m.add_class::<PyMap>()?;
    m.add_class::<PyConfig>()?;
    m.add_class::<PyDecision>()?;
    m.add_class::<PyNielsen>()?;
    m.add_function(wrap_pyfunction!(decide_twisted, m)?)?;
    m.add_function(wrap_pyfunction!(decide_doubly, m)?)?;
    m.add_function(wrap_pyfunction!(is_witness, m)?)?;
    m.add_function(wrap_pyfunction!(nielsen_number, m)?)?;
    m.add_function(wrap_pyfunction!(hall_normal_form, m)?)?;
    m.add_function(wrap_pyfunction!(fox, m)?)?;
    m.add_function(wrap_pyfunction!(trace, m)?)?;
    m.add_function(wrap_pyfunction!(single_experiment, m)?)?;
    m.add_function(wrap_pyfunction!(double_experiment, m)?)?;
    Ok(())
}

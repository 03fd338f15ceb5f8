//! Python bindings. Matrices cross the boundary as nested lists, reports as
//! plain dicts; coding positions are 0-based for models and 1-based in
//! reports, as in the Rust API.

use std::io::BufReader;

use dnaperiod::model::{matrix_to_rows, rows_to_matrix};
use dnaperiod::{
    AnalysisConfig, AnalysisReport, EstimationConfig, GeneratorKind, GeneratorSpec, ReadOptions,
    SemiMarkovKernel, StateSpace, SymbolSequence, Variant,
};
use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;

type Rows = Vec<Vec<f64>>;

fn to_py(e: dnaperiod::Error) -> PyErr {
    match e {
        dnaperiod::Error::Io(io) => PyOSError::new_err(io.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn parse<T: std::str::FromStr<Err = dnaperiod::Error>>(s: &str) -> PyResult<T> {
    s.parse().map_err(to_py)
}

fn alphabet(symbols: &str) -> PyResult<StateSpace> {
    StateSpace::new(symbols.chars()).map_err(to_py)
}

fn matrices(rows: &[Rows]) -> PyResult<Vec<dnaperiod::Matrix>> {
    rows.iter().map(|m| rows_to_matrix(m).map_err(to_py)).collect()
}

fn sequence(text: &str, states: &StateSpace) -> PyResult<SymbolSequence> {
    let reader = BufReader::new(text.as_bytes());
    dnaperiod::read_sequence(reader, states, &ReadOptions::default(), "sequence").map_err(to_py)
}

fn estimation(s: usize, m_max: usize, holding: &str, keep_censored: bool) -> PyResult<EstimationConfig> {
    Ok(EstimationConfig {
        period: s,
        m_max,
        holding_estimator: parse(holding)?,
        drop_censored_final_run: !keep_censored,
        ..EstimationConfig::default()
    })
}

fn mc_pairs(est: Vec<dnaperiod::McEstimate>) -> Vec<(f64, f64)> {
    est.into_iter().map(|e| (e.mean, e.std_err)).collect()
}

/// Homogeneous discrete-time semi-Markov chain.
#[pyclass(name = "Model", module = "dnaperiod", frozen)]
struct PyModel(dnaperiod::SemiMarkovModel);

#[pymethods]
impl PyModel {
    /// `embedded[i][j]` is P(i→j); `holding[m-1][i][j]` is the probability of
    /// holding `m` steps in `i` before jumping to `j`.
    #[new]
    #[pyo3(signature = (embedded, holding, alphabet = "ACGT"))]
    fn new(embedded: Rows, holding: Vec<Rows>, alphabet: &str) -> PyResult<Self> {
        let model = dnaperiod::SemiMarkovModel::new(
            self::alphabet(alphabet)?,
            rows_to_matrix(&embedded).map_err(to_py)?,
            matrices(&holding)?,
        )
        .map_err(to_py)?;
        Ok(Self(model))
    }

    #[staticmethod]
    #[pyo3(signature = (m_max, seed, alphabet = "ACGT"))]
    fn random(m_max: usize, seed: u64, alphabet: &str) -> PyResult<Self> {
        let states = self::alphabet(alphabet)?;
        dnaperiod::random_model(&states, m_max, seed)
            .map(Self)
            .map_err(to_py)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        serde_json::from_str(text)
            .map(Self)
            .map_err(|e| PyValueError::new_err(e.to_string()))
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.0).map_err(|e| PyValueError::new_err(e.to_string()))
    }

    #[getter]
    fn alphabet(&self) -> String {
        self.0.states().symbols().iter().collect()
    }

    #[getter]
    fn m_max(&self) -> usize {
        self.0.m_max()
    }

    #[getter]
    fn embedded(&self) -> Rows {
        matrix_to_rows(self.0.embedded())
    }

    #[getter]
    fn holding(&self) -> Vec<Rows> {
        self.0.holding().iter().map(matrix_to_rows).collect()
    }

    /// `w[i][m-1]`, the probability that a sojourn in `i` lasts `m` steps.
    fn waiting_time_pmf(&self) -> Rows {
        matrix_to_rows(dnaperiod::waiting_time_pmf(&self.0).pmf())
    }

    /// `Q(n)` for `n = 0..=n_max` by recursion.
    fn interval_kernel(&self, n_max: usize) -> Vec<Rows> {
        dnaperiod::interval_transition_recursive(&self.0, n_max)
            .matrices()
            .iter()
            .map(matrix_to_rows)
            .collect()
    }

    /// `Q(n)` by the closed form.
    fn interval_closed(&self, n: usize) -> Rows {
        matrix_to_rows(&dnaperiod::interval_transition_closed(&self.0, n))
    }

    #[pyo3(signature = (d, variant = "paper-survival"))]
    fn return_probability(&self, d: usize, variant: &str) -> PyResult<Vec<f64>> {
        dnaperiod::return_probability(&self.0, d, parse(variant)?)
            .map(|v| v.to_vec())
            .map_err(to_py)
    }

    /// Per-state `(mean, std_err)` of the exact-entry return probability.
    fn mc_return_probability(&self, d: usize, trials: usize, seed: u64) -> PyResult<Vec<(f64, f64)>> {
        dnaperiod::mc_return_probability(&self.0, 0, d, trials, seed)
            .map(mc_pairs)
            .map_err(to_py)
    }

    fn simulate(&self, length: usize, seed: u64) -> PyResult<String> {
        dnaperiod::simulate_smc(&self.0, length, seed)
            .map(|s| s.to_text())
            .map_err(to_py)
    }

    fn __repr__(&self) -> String {
        format!("Model(alphabet={:?}, m_max={})", self.alphabet(), self.m_max())
    }
}

/// Semi-Markov chain whose embedded matrix depends on the coding position.
#[pyclass(name = "NHModel", module = "dnaperiod", frozen)]
struct PyNHModel(dnaperiod::NHSemiMarkovModel);

#[pymethods]
impl PyNHModel {
    /// One embedded matrix per coding position; holding matrices are shared.
    #[new]
    #[pyo3(signature = (embedded, holding, alphabet = "ACGT"))]
    fn new(embedded: Vec<Rows>, holding: Vec<Rows>, alphabet: &str) -> PyResult<Self> {
        let model = dnaperiod::NHSemiMarkovModel::new(
            self::alphabet(alphabet)?,
            matrices(&embedded)?,
            matrices(&holding)?,
        )
        .map_err(to_py)?;
        Ok(Self(model))
    }

    #[staticmethod]
    #[pyo3(signature = (period, m_max, seed, alphabet = "ACGT"))]
    fn random(period: usize, m_max: usize, seed: u64, alphabet: &str) -> PyResult<Self> {
        let states = self::alphabet(alphabet)?;
        dnaperiod::random_nh_model(&states, period, m_max, seed)
            .map(Self)
            .map_err(to_py)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        serde_json::from_str(text)
            .map(Self)
            .map_err(|e| PyValueError::new_err(e.to_string()))
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.0).map_err(|e| PyValueError::new_err(e.to_string()))
    }

    #[getter]
    fn alphabet(&self) -> String {
        self.0.states().symbols().iter().collect()
    }

    #[getter]
    fn period(&self) -> usize {
        self.0.period()
    }

    #[getter]
    fn m_max(&self) -> usize {
        self.0.m_max()
    }

    #[getter]
    fn embedded(&self) -> Vec<Rows> {
        self.0.embedded().iter().map(matrix_to_rows).collect()
    }

    #[getter]
    fn holding(&self) -> Vec<Rows> {
        self.0.holding().iter().map(matrix_to_rows).collect()
    }

    /// The homogeneous model at coding position `k`.
    fn at_position(&self, k: usize) -> PyResult<PyModel> {
        self.0.at_position(k).map(PyModel).map_err(to_py)
    }

    /// `Q(k, n)` for `n = 0..=n_max` by recursion.
    fn interval_kernel(&self, k: usize, n_max: usize) -> PyResult<Vec<Rows>> {
        if k >= self.0.period() {
            return Err(PyValueError::new_err(format!("coding position {k} out of range")));
        }
        let q = dnaperiod::nh_interval_recursive(&self.0, n_max);
        Ok((0..=n_max)
            .map(|n| matrix_to_rows(q.get(k, n).unwrap()))
            .collect())
    }

    fn interval_closed(&self, k: usize, n: usize) -> PyResult<Rows> {
        dnaperiod::nh_interval_closed(&self.0, k, n)
            .map(|m| matrix_to_rows(&m))
            .map_err(to_py)
    }

    #[pyo3(signature = (k, d, variant = "paper-survival"))]
    fn return_probability(&self, k: usize, d: usize, variant: &str) -> PyResult<Vec<f64>> {
        dnaperiod::nh_return_probability(&self.0, k, d, parse(variant)?)
            .map(|v| v.to_vec())
            .map_err(to_py)
    }

    fn mc_return_probability(
        &self,
        k: usize,
        d: usize,
        trials: usize,
        seed: u64,
    ) -> PyResult<Vec<(f64, f64)>> {
        dnaperiod::mc_return_probability(&self.0, k, d, trials, seed)
            .map(mc_pairs)
            .map_err(to_py)
    }

    fn simulate(&self, length: usize, seed: u64) -> PyResult<String> {
        dnaperiod::simulate_smc(&self.0, length, seed)
            .map(|s| s.to_text())
            .map_err(to_py)
    }

    fn __repr__(&self) -> String {
        format!(
            "NHModel(alphabet={:?}, period={}, m_max={})",
            self.alphabet(),
            self.period(),
            self.m_max()
        )
    }
}

/// Synthetic DNA as a FASTA record whose header describes the generator.
#[pyfunction]
#[pyo3(signature = (kind, length, seed, period = 3, letter = 'A', intervals = Vec::new(), name = None))]
fn generate(
    kind: &str,
    length: usize,
    seed: u64,
    period: usize,
    letter: char,
    intervals: Vec<(usize, usize)>,
    name: Option<String>,
) -> PyResult<String> {
    let kind: GeneratorKind = parse(kind)?;
    let spec = GeneratorSpec {
        kind,
        length,
        period,
        letter: letter.to_ascii_uppercase(),
        intervals,
        seed,
    };
    let seq = dnaperiod::generate(&spec, &StateSpace::dna()).map_err(to_py)?;
    let name = name.unwrap_or_else(|| format!("{}_seed{seed}", kind.as_str()));
    let mut out = Vec::new();
    dnaperiod::sequence::write_fasta(&mut out, &format!("{name} {}", spec.describe()), &seq, 60)?;
    Ok(String::from_utf8(out).expect("FASTA output is ASCII"))
}

/// Fits a model to FASTA or plain text; `s = 1` gives a `Model`, otherwise an `NHModel`.
#[pyfunction]
#[pyo3(signature = (text, s = 1, m_max = dnaperiod::model::DEFAULT_M_MAX, holding = "pair-conditional",
                    keep_censored = false, alphabet = "ACGT"))]
fn estimate(
    py: Python<'_>,
    text: &str,
    s: usize,
    m_max: usize,
    holding: &str,
    keep_censored: bool,
    alphabet: &str,
) -> PyResult<Py<PyAny>> {
    let states = self::alphabet(alphabet)?;
    let seq = sequence(text, &states)?;
    let config = estimation(s, m_max, holding, keep_censored)?;
    if s == 1 {
        let model = dnaperiod::estimate_homogeneous(&seq, &config).map_err(to_py)?;
        Ok(Py::new(py, PyModel(model))?.into_any())
    } else {
        let model = dnaperiod::estimate_nh(&seq, &config).map_err(to_py)?;
        Ok(Py::new(py, PyNHModel(model))?.into_any())
    }
}

fn run_analysis(
    py: Python<'_>,
    text: &str,
    d: usize,
    s: usize,
    variant: &str,
    warmup: usize,
    m_max: usize,
) -> PyResult<AnalysisReport> {
    let states = StateSpace::dna();
    let seq = sequence(text, &states)?;
    let config = AnalysisConfig {
        d,
        estimation: estimation(s, m_max, "pair-conditional", false)?,
        warmup_cycles: warmup,
        variant: parse::<Variant>(variant)?,
    };
    let analysis = py
        .detach(|| dnaperiod::analyze_sequence(&seq, &config))
        .map_err(to_py)?;
    Ok(AnalysisReport::new(
        &analysis,
        GeneratorSpec::from_description(seq.description()),
    ))
}

/// Full periodicity analysis of a DNA sequence, returned as a dict with
/// `schema_version`, `metadata`, `baseline`, `rows` and `regions`.
#[pyfunction]
#[pyo3(signature = (text, d = 3, s = 3, variant = "paper-survival",
                    warmup = dnaperiod::estimate::DEFAULT_WARMUP_CYCLES,
                    m_max = dnaperiod::model::DEFAULT_M_MAX))]
fn analyze(
    py: Python<'_>,
    text: &str,
    d: usize,
    s: usize,
    variant: &str,
    warmup: usize,
    m_max: usize,
) -> PyResult<Py<PyAny>> {
    let report = run_analysis(py, text, d, s, variant, warmup, m_max)?;
    let json = serde_json::to_string(&report).map_err(|e| PyValueError::new_err(e.to_string()))?;
    Ok(py.import("json")?.call_method1("loads", (json,))?.unbind())
}

/// The analysis as a CSV table with columns `state,k,cycle,p,logp,R,color`.
#[pyfunction]
#[pyo3(signature = (text, d = 3, s = 3, variant = "paper-survival",
                    warmup = dnaperiod::estimate::DEFAULT_WARMUP_CYCLES,
                    m_max = dnaperiod::model::DEFAULT_M_MAX))]
fn analyze_csv(
    py: Python<'_>,
    text: &str,
    d: usize,
    s: usize,
    variant: &str,
    warmup: usize,
    m_max: usize,
) -> PyResult<String> {
    let report = run_analysis(py, text, d, s, variant, warmup, m_max)?;
    let mut out = Vec::new();
    report.write_csv(&mut out).map_err(to_py)?;
    Ok(String::from_utf8(out).expect("CSV output is UTF-8"))
}

#[pymodule]
#[pyo3(name = "dnaperiod")]
fn dnaperiod_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<PyModel>()?;
    m.add_class::<PyNHModel>()?;
    m.add_function(wrap_pyfunction!(generate, m)?)?;
    m.add_function(wrap_pyfunction!(estimate, m)?)?;
    m.add_function(wrap_pyfunction!(analyze, m)?)?;
    m.add_function(wrap_pyfunction!(analyze_csv, m)?)?;
    Ok(())
}

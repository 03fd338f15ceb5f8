//! Homogeneous discrete-time semi-Markov chains.
//!
//! A chain is described by an embedded transition matrix `P` with zero
//! diagonal and conditional holding-time matrices `H(m)`, `m = 1..=M_max`.
//! From these we derive the core matrices `C(m) = P ∘ H(m)`, the waiting-time
//! distribution of each state, and the interval transition probabilities
//! `Q(n)`: the probability of occupying `j` exactly `n` positions after
//! entering `i`.
//!
//! Every quantity here is also available for the partially non-homogeneous
//! chain in [`crate::nh`]; both share the kernel code, which works on a list
//! of per-coding-position cores (one entry for the homogeneous case).

use std::fmt;
use std::str::FromStr;

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::error::{argument, Error, Result};
use crate::states::StateSpace;

pub type Matrix = Array2<f64>;
pub type Vector = Array1<f64>;

/// Tolerance on probability row sums at model construction.
pub const STOCHASTIC_TOL: f64 = 1e-12;

/// Default holding-time truncation horizon.
pub const DEFAULT_M_MAX: usize = 30;

/// How the first sojourn is weighted in the d-step return probability.
///
/// `PaperSurvival` weights the first jump out of `i` at offset `k` by the
/// survival `P[i,j]·≥H(k)[i,j]`, covering both the case where position 0 was
/// an entry into `i` and the case where `i` had already been occupied for a
/// while. The result is not a normalized probability in general (a uniform
/// i.i.d. sequence gives ≈0.328 at d = 3 rather than 0.25).
///
/// `ExactEntry` uses `C(k)[i,j]`, i.e. standard Markov-renewal semantics where
/// position 0 is known to be an entry into `i`; then `p_i(d) = Q(d)[i,i]`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    #[default]
    PaperSurvival,
    ExactEntry,
}

impl Variant {
    pub fn as_str(self) -> &'static str {
        match self {
            Variant::PaperSurvival => "paper-survival",
            Variant::ExactEntry => "exact-entry",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper-survival" => Ok(Variant::PaperSurvival),
            "exact-entry" => Ok(Variant::ExactEntry),
            other => Err(argument(format!(
                "unknown variant {other:?} (expected paper-survival or exact-entry)"
            ))),
        }
    }
}

/// Common view over homogeneous and period-`s` chains.
pub trait SemiMarkovKernel {
    fn states(&self) -> &StateSpace;
    /// Number of coding positions; 1 for a homogeneous chain.
    fn period(&self) -> usize;
    /// Embedded matrix in force for a sojourn entered at coding position `phase`.
    fn embedded_at(&self, phase: usize) -> &Matrix;
    /// `H(1) ..= H(M_max)`.
    fn holding(&self) -> &[Matrix];

    fn n_states(&self) -> usize {
        self.states().len()
    }

    fn m_max(&self) -> usize {
        self.holding().len()
    }
}

/// Homogeneous semi-Markov chain over a finite alphabet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ModelRecord", into = "ModelRecord")]
pub struct SemiMarkovModel {
    states: StateSpace,
    embedded: Matrix,
    holding: Vec<Matrix>,
}

impl SemiMarkovModel {
    /// Builds a model from `P` and `H(1..=M_max)` (`holding[m-1] = H(m)`),
    /// validating every stochasticity constraint.
    pub fn new(states: StateSpace, embedded: Matrix, holding: Vec<Matrix>) -> Result<Self> {
        validate_embedded(&states, &embedded, "embedded matrix P")?;
        validate_holding(&states, std::slice::from_ref(&embedded), &holding)?;
        Ok(Self {
            states,
            embedded,
            holding,
        })
    }

    /// Truncates `holding` to `m_max` entries and renormalizes every `(i,j)`
    /// holding distribution with `P[i,j] > 0` onto `1..=m_max`.
    pub fn truncated(
        states: StateSpace,
        embedded: Matrix,
        holding: Vec<Matrix>,
        m_max: usize,
    ) -> Result<Self> {
        let holding = truncate_holding(&states, std::slice::from_ref(&embedded), holding, m_max)?;
        Self::new(states, embedded, holding)
    }

    pub fn embedded(&self) -> &Matrix {
        &self.embedded
    }

    /// `H(m)` for `1 <= m <= M_max`.
    pub fn holding_at(&self, m: usize) -> Option<&Matrix> {
        m.checked_sub(1).and_then(|i| self.holding.get(i))
    }
}

impl SemiMarkovKernel for SemiMarkovModel {
    fn states(&self) -> &StateSpace {
        &self.states
    }

    fn period(&self) -> usize {
        1
    }

    fn embedded_at(&self, _phase: usize) -> &Matrix {
        &self.embedded
    }

    fn holding(&self) -> &[Matrix] {
        &self.holding
    }
}

pub(crate) fn validate_embedded(states: &StateSpace, p: &Matrix, what: &'static str) -> Result<()> {
    let n = states.len();
    if p.dim() != (n, n) {
        return Err(argument(format!(
            "{what} has shape {:?}, expected {n}x{n}",
            p.dim()
        )));
    }
    for (i, row) in p.outer_iter().enumerate() {
        let bad = |reason: String| Error::InvalidModel { what, row: i, reason };
        if let Some(v) = row.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(bad(format!("entry {v} outside [0, 1]")));
        }
        if row[i] != 0.0 {
            return Err(bad(format!("diagonal entry {} is not zero", row[i])));
        }
        let sum: f64 = row.sum();
        if (sum - 1.0).abs() > STOCHASTIC_TOL {
            return Err(bad(format!("row sums to {sum}")));
        }
    }
    Ok(())
}

pub(crate) fn validate_holding(states: &StateSpace, embedded: &[Matrix], holding: &[Matrix]) -> Result<()> {
    let n = states.len();
    if holding.is_empty() {
        return Err(argument("holding-time horizon M_max must be at least 1"));
    }
    for (m, h) in holding.iter().enumerate() {
        if h.dim() != (n, n) {
            return Err(argument(format!(
                "H({}) has shape {:?}, expected {n}x{n}",
                m + 1,
                h.dim()
            )));
        }
        for (i, row) in h.outer_iter().enumerate() {
            if let Some(v) = row.iter().find(|v| !(0.0..=1.0).contains(*v)) {
                return Err(Error::InvalidModel {
                    what: "holding matrix H",
                    row: i,
                    reason: format!("H({}) entry {v} outside [0, 1]", m + 1),
                });
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            if !embedded.iter().any(|p| p[[i, j]] > 0.0) {
                continue;
            }
            let sum: f64 = holding.iter().map(|h| h[[i, j]]).sum();
            if (sum - 1.0).abs() > STOCHASTIC_TOL {
                return Err(Error::InvalidModel {
                    what: "holding matrix H",
                    row: i,
                    reason: format!("holding times for {i}->{j} sum to {sum}"),
                });
            }
        }
    }
    Ok(())
}

pub(crate) fn truncate_holding(
    states: &StateSpace,
    embedded: &[Matrix],
    mut holding: Vec<Matrix>,
    m_max: usize,
) -> Result<Vec<Matrix>> {
    if m_max == 0 {
        return Err(argument("holding-time horizon M_max must be at least 1"));
    }
    let n = states.len();
    holding.truncate(m_max);
    for i in 0..n {
        for j in 0..n {
            if !embedded.iter().any(|p| p[[i, j]] > 0.0) {
                continue;
            }
            let sum: f64 = holding.iter().map(|h| h[[i, j]]).sum();
            if sum <= 0.0 {
                return Err(Error::InvalidModel {
                    what: "holding matrix H",
                    row: i,
                    reason: format!("no holding-time mass for {i}->{j} within 1..={m_max}"),
                });
            }
            for h in holding.iter_mut() {
                h[[i, j]] /= sum;
            }
        }
    }
    Ok(holding)
}

/// Core matrices `C(m) = P ∘ H(m)` and their survival sums `≥C(m) = P ∘ ≥H(m)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoreSequence {
    core: Vec<Matrix>,
    core_geq: Vec<Matrix>,
}

impl CoreSequence {
    pub(crate) fn build(embedded: &Matrix, holding: &[Matrix]) -> Self {
        Self::build_within(embedded, holding, holding.len())
    }

    /// Keeps `C(m)` and `≥C(m)` only for `m <= horizon`.
    fn build_within(embedded: &Matrix, holding: &[Matrix], horizon: usize) -> Self {
        let keep = horizon.min(holding.len());
        let core = holding[..keep].iter().map(|h| embedded * h).collect();
        let mut core_geq = vec![Matrix::zeros(embedded.raw_dim()); keep];
        let mut suffix = Matrix::zeros(embedded.raw_dim());
        for (m, h) in holding.iter().enumerate().rev() {
            suffix += h;
            if m < keep {
                core_geq[m] = embedded * &suffix;
            }
        }
        Self { core, core_geq }
    }

    pub fn m_max(&self) -> usize {
        self.core.len()
    }

    /// `C(m)`; `None` outside `1..=M_max`, where the core is zero.
    pub fn core(&self, m: usize) -> Option<&Matrix> {
        m.checked_sub(1).and_then(|i| self.core.get(i))
    }

    /// `≥C(m)`; `None` outside `1..=M_max`.
    pub fn core_geq(&self, m: usize) -> Option<&Matrix> {
        m.checked_sub(1).and_then(|i| self.core_geq.get(i))
    }
}

/// Waiting-time pmf `w_i(m)` and its tail `>w_i(n) = Σ_{m>n} w_i(m)`.
#[derive(Debug, Clone, PartialEq)]
pub struct WaitingTail {
    pmf: Matrix,
    tail: Matrix,
}

impl WaitingTail {
    pub(crate) fn build(core: &CoreSequence) -> Self {
        let n = core.core[0].nrows();
        let mut pmf = Matrix::zeros((n, core.m_max()));
        for (m, c) in core.core.iter().enumerate() {
            pmf.column_mut(m).assign(&c.sum_axis(ndarray::Axis(1)));
        }
        Self::from_pmf(pmf)
    }

    /// Waiting times straight from `P` and `H`, without materializing `C(m)`.
    fn from_parts(embedded: &Matrix, holding: &[Matrix]) -> Self {
        let n = embedded.nrows();
        let mut pmf = Matrix::zeros((n, holding.len()));
        for (m, h) in holding.iter().enumerate() {
            for i in 0..n {
                pmf[[i, m]] = embedded.row(i).dot(&h.row(i));
            }
        }
        Self::from_pmf(pmf)
    }

    fn from_pmf(pmf: Matrix) -> Self {
        let (n, m_max) = pmf.dim();
        // tail[., t] = >w(t), t = 0..=m_max
        let mut tail = Matrix::zeros((n, m_max + 1));
        for t in (0..m_max).rev() {
            let next = tail.column(t + 1).to_owned() + pmf.column(t);
            tail.column_mut(t).assign(&next);
        }
        tail.column_mut(0).fill(1.0);
        Self { pmf, tail }
    }

    /// `N × M_max` matrix; column `m-1` holds `w_·(m)`.
    pub fn pmf(&self) -> &Matrix {
        &self.pmf
    }

    pub fn waiting(&self, state: usize, m: usize) -> f64 {
        match m.checked_sub(1) {
            Some(c) if c < self.pmf.ncols() => self.pmf[[state, c]],
            _ => 0.0,
        }
    }

    pub fn tail(&self, state: usize, n: usize) -> f64 {
        if n < self.tail.ncols() {
            self.tail[[state, n]]
        } else {
            0.0
        }
    }

    /// `>W(n) = diag(>w_i(n))`.
    pub fn tail_diag(&self, n: usize) -> Matrix {
        let k = self.tail.nrows();
        let mut out = Matrix::zeros((k, k));
        if n < self.tail.ncols() {
            out.diag_mut().assign(&self.tail.column(n));
        }
        out
    }
}

/// Interval transition probabilities `Q(0..=n_max)`.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalKernel {
    q: Vec<Matrix>,
}

impl IntervalKernel {
    pub fn get(&self, n: usize) -> Option<&Matrix> {
        self.q.get(n)
    }

    pub fn n_max(&self) -> usize {
        self.q.len() - 1
    }

    pub fn matrices(&self) -> &[Matrix] {
        &self.q
    }
}

pub fn build_core(model: &SemiMarkovModel) -> CoreSequence {
    CoreSequence::build(&model.embedded, &model.holding)
}

pub fn waiting_time_pmf(model: &SemiMarkovModel) -> WaitingTail {
    WaitingTail::build(&build_core(model))
}

/// `Q(n) = >W(n) + Σ_{m=1}^{min(n, M_max)} C(m)·Q(n−m)` for `n = 0..=n_max`.
pub fn interval_transition_recursive(model: &SemiMarkovModel, n_max: usize) -> IntervalKernel {
    let phases = Phase::within(model, n_max);
    let q = kernel::recursive(&phases, n_max).swap_remove(0);
    IntervalKernel { q }
}

/// `Q(n)` from the closed analytic form (nested sums over chains of jump
/// times). Cost grows like `2^n` when `M_max >= n`; intended for moderate `n`
/// and as an independent check on the recursion.
pub fn interval_transition_closed(model: &SemiMarkovModel, n: usize) -> Matrix {
    kernel::closed(&Phase::within(model, n), 0, n)
}

/// Probability of occupying `i` again `d` positions after occupying it at
/// position 0, for every state `i`.
pub fn return_probability(model: &SemiMarkovModel, d: usize, variant: Variant) -> Result<Vector> {
    if d == 0 {
        return Err(argument("return period d must be at least 1"));
    }
    let phases = Phase::within(model, d);
    let q = kernel::recursive(&phases, d - 1);
    Ok(kernel::return_probability(&phases, &q, 0, d, variant))
}

/// Per-coding-position derived quantities.
#[derive(Debug, Clone)]
pub(crate) struct Phase {
    pub core: CoreSequence,
    pub waiting: WaitingTail,
}

impl Phase {
    pub fn all<K: SemiMarkovKernel + ?Sized>(model: &K) -> Vec<Phase> {
        Self::within(model, model.m_max())
    }

    /// Core matrices truncated to `m <= horizon`; enough for `Q(n)` with
    /// `n <= horizon` and return probabilities with `d <= horizon`.
    pub fn within<K: SemiMarkovKernel + ?Sized>(model: &K, horizon: usize) -> Vec<Phase> {
        (0..model.period())
            .map(|k| {
                let p = model.embedded_at(k);
                Phase {
                    core: CoreSequence::build_within(p, model.holding(), horizon),
                    waiting: WaitingTail::from_parts(p, model.holding()),
                }
            })
            .collect()
    }
}

pub(crate) mod kernel {
    use super::{Matrix, Phase, Variant, Vector};

    fn identity(n: usize) -> Matrix {
        Matrix::eye(n)
    }

    /// `q[k][n] = Q(k, n)` for every coding position and `n = 0..=n_max`.
    pub fn recursive(phases: &[Phase], n_max: usize) -> Vec<Vec<Matrix>> {
        let s = phases.len();
        let size = phases[0].waiting.tail.nrows();
        let mut q: Vec<Vec<Matrix>> = vec![Vec::with_capacity(n_max + 1); s];
        for qk in q.iter_mut() {
            qk.push(identity(size));
        }
        for n in 1..=n_max {
            for k in 0..s {
                let phase = &phases[k];
                let mut acc = phase.waiting.tail_diag(n);
                for m in 1..=n.min(phase.core.m_max()) {
                    let c = phase.core.core(m).expect("m within horizon");
                    acc += &c.dot(&q[(k + m) % s][n - m]);
                }
                q[k].push(acc);
            }
        }
        q
    }

    fn core_or_none(phases: &[Phase], pos: usize, m: usize) -> Option<&Matrix> {
        phases[pos % phases.len()].core.core(m)
    }

    pub fn closed(phases: &[Phase], k: usize, n: usize) -> Matrix {
        let size = phases[0].waiting.tail.nrows();
        let s = phases.len();
        let mut q = phases[k % s].waiting.tail_diag(n);
        if let Some(c) = core_or_none(phases, k, n) {
            q += c;
        }
        for j in 2..=n {
            let mut left = core_or_none(phases, k, j - 1)
                .cloned()
                .unwrap_or_else(|| Matrix::zeros((size, size)));
            for x in 1..=j - 2 {
                left += &chain_sum(phases, k, j, x);
            }
            let shift = k + j - 1;
            let mut right = phases[shift % s].waiting.tail_diag(n - j + 1);
            if let Some(c) = core_or_none(phases, shift, n - j + 1) {
                right += c;
            }
            q += &left.dot(&right);
        }
        q
    }

    /// `S_j(x, k)`: sum over `2 <= m_x < m_{x-1} < ... < m_1 <= j-1` (with
    /// `m_{x+1} = 1`, `m_0 = j`) of the ordered product of
    /// `C(k + m_{t+1} - 1, m_t - m_{t+1})`. Empty when `j < x + 2`.
    pub fn chain_sum(phases: &[Phase], k: usize, j: usize, x: usize) -> Matrix {
        let size = phases[0].waiting.tail.nrows();
        let mut total = Matrix::zeros((size, size));
        if j < x + 2 {
            return total;
        }
        descend(phases, k, j, x, 1, &identity(size), &mut total);
        total
    }

    // `t` is the index of the next chain element to choose, `prev = m_{t+1}`.
    fn descend(
        phases: &[Phase],
        k: usize,
        j: usize,
        t: usize,
        prev: usize,
        acc: &Matrix,
        total: &mut Matrix,
    ) {
        let pos = k + prev - 1;
        if t == 0 {
            if let Some(c) = core_or_none(phases, pos, j - prev) {
                *total += &acc.dot(c);
            }
            return;
        }
        for m in prev + 1..=j - t {
            if let Some(c) = core_or_none(phases, pos, m - prev) {
                descend(phases, k, j, t - 1, m, &acc.dot(c), total);
            }
        }
    }

    /// Diagonal of `>W(k,d) + Σ_{x=1}^{d} F(k,x)·Q(k+x, d−x)` where `F` is
    /// `≥C` or `C` depending on the variant. `q` must reach `n = d - 1`.
    pub fn return_probability(
        phases: &[Phase],
        q: &[Vec<Matrix>],
        k: usize,
        d: usize,
        variant: Variant,
    ) -> Vector {
        let s = phases.len();
        let phase = &phases[k % s];
        let size = phase.waiting.tail.nrows();
        let mut p = Vector::from_shape_fn(size, |i| phase.waiting.tail(i, d));
        for x in 1..=d {
            let first = match variant {
                Variant::PaperSurvival => phase.core.core_geq(x),
                Variant::ExactEntry => phase.core.core(x),
            };
            let Some(first) = first else { continue };
            let later = &q[(k + x) % s][d - x];
            // diag(first · later); the zero diagonal of P excludes j = i
            for i in 0..size {
                p[i] += first.row(i).dot(&later.column(i));
            }
        }
        p
    }
}

/// Serialized form of a model: plain nested arrays.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub(crate) struct ModelRecord {
    pub states: StateSpace,
    pub embedded: Vec<Vec<f64>>,
    pub holding: Vec<Vec<Vec<f64>>>,
}

pub fn matrix_to_rows(m: &Matrix) -> Vec<Vec<f64>> {
    m.outer_iter().map(|r| r.to_vec()).collect()
}

pub fn rows_to_matrix(rows: &[Vec<f64>]) -> Result<Matrix> {
    let n = rows.len();
    let cols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != cols) {
        return Err(Error::Format("ragged matrix rows".into()));
    }
    let flat: Vec<f64> = rows.iter().flatten().copied().collect();
    Matrix::from_shape_vec((n, cols), flat).map_err(|e| Error::Format(e.to_string()))
}

impl TryFrom<ModelRecord> for SemiMarkovModel {
    type Error = Error;

    fn try_from(r: ModelRecord) -> Result<Self> {
        let embedded = rows_to_matrix(&r.embedded)?;
        let holding = r
            .holding
            .iter()
            .map(|h| rows_to_matrix(h))
            .collect::<Result<Vec<_>>>()?;
        Self::new(r.states, embedded, holding)
    }
}

impl From<SemiMarkovModel> for ModelRecord {
    fn from(m: SemiMarkovModel) -> Self {
        ModelRecord {
            embedded: matrix_to_rows(&m.embedded),
            holding: m.holding.iter().map(matrix_to_rows).collect(),
            states: m.states,
        }
    }
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;
    use ndarray::array;

    /// Two states; A always holds 1 then jumps to B, B holds 2 then jumps to A.
    pub fn fix_det() -> SemiMarkovModel {
        let states = StateSpace::new("AB".chars()).unwrap();
        let p = array![[0.0, 1.0], [1.0, 0.0]];
        let h1 = array![[0.0, 1.0], [0.0, 0.0]];
        let h2 = array![[0.0, 0.0], [1.0, 0.0]];
        SemiMarkovModel::new(states, p, vec![h1, h2]).unwrap()
    }

    /// I.i.d. uniform DNA: P off-diagonal 1/3, geometric(3/4) holding truncated at 30.
    pub fn fix_unif() -> SemiMarkovModel {
        let p = Matrix::from_shape_fn((4, 4), |(i, j)| if i == j { 0.0 } else { 1.0 / 3.0 });
        let h = (1..=30)
            .map(|m| {
                let v = 0.75 * 0.25f64.powi(m - 1);
                Matrix::from_shape_fn((4, 4), |(i, j)| if i == j { 0.0 } else { v })
            })
            .collect();
        SemiMarkovModel::truncated(StateSpace::dna(), p, h, 30).unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use ndarray::array;

    fn max_abs(a: &Matrix, b: &Matrix) -> f64 {
        (a - b).iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    #[test]
    fn det_core() {
        let core = build_core(&fix_det());
        assert_eq!(core.core(1).unwrap(), &array![[0.0, 1.0], [0.0, 0.0]]);
        assert_eq!(core.core(2).unwrap(), &array![[0.0, 0.0], [1.0, 0.0]]);
        assert!(core.core(3).is_none());
        assert_eq!(core.core_geq(1).unwrap(), fix_det().embedded());
    }

    #[test]
    fn unif_core_head() {
        let core = build_core(&fix_unif());
        let c1 = core.core(1).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let expect = if i == j { 0.0 } else { 0.25 };
                assert!((c1[[i, j]] - expect).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn core_sums_to_embedded_and_suffix_sums() {
        let model = fix_unif();
        let core = build_core(&model);
        let mut sum = Matrix::zeros((4, 4));
        for m in 1..=core.m_max() {
            sum += core.core(m).unwrap();
            let next = core
                .core_geq(m + 1)
                .cloned()
                .unwrap_or_else(|| Matrix::zeros((4, 4)));
            let diff = core.core_geq(m).unwrap() - &next;
            assert!(max_abs(&diff, core.core(m).unwrap()) < 1e-15);
        }
        assert!(max_abs(&sum, model.embedded()) < 1e-12);
    }

    #[test]
    fn uniform_fixture_row_implies_unit_head() {
        // row 2 of P equals row 2 of C(1), so H(1) is 1 wherever P > 0
        let p_row = [0.375, 0.0, 0.5, 0.125];
        let c1_row = [0.375, 0.0, 0.5, 0.125];
        for (p, c) in p_row.iter().zip(c1_row) {
            if *p > 0.0 {
                assert_eq!(c / p, 1.0);
            }
        }
        assert_eq!(c1_row.iter().sum::<f64>(), 1.0);
    }

    #[test]
    fn det_waiting() {
        let w = waiting_time_pmf(&fix_det());
        assert_eq!(w.waiting(0, 1), 1.0);
        assert_eq!(w.waiting(1, 2), 1.0);
        assert_eq!(w.tail(1, 0), 1.0);
        assert_eq!(w.tail(1, 1), 1.0);
        assert_eq!(w.tail(1, 2), 0.0);
        assert_eq!(w.tail(0, 1), 0.0);
        assert_eq!(w.tail(0, 99), 0.0);
    }

    #[test]
    fn unif_waiting_head_and_normalization() {
        let w = waiting_time_pmf(&fix_unif());
        for i in 0..4 {
            assert!((w.waiting(i, 1) - 0.75).abs() < 1e-15);
            let total: f64 = w.pmf().row(i).sum();
            assert!((total - 1.0).abs() < 1e-12);
            for n in 1..35 {
                assert!(w.tail(i, n) <= w.tail(i, n - 1));
            }
            assert_eq!(w.tail(i, 30), 0.0);
        }
    }

    #[test]
    fn det_recursion_by_hand() {
        let k = interval_transition_recursive(&fix_det(), 3);
        assert_eq!(k.get(0).unwrap(), &Matrix::eye(2));
        assert_eq!(k.get(1).unwrap(), &array![[0.0, 1.0], [0.0, 1.0]]);
        assert_eq!(k.get(2).unwrap(), &array![[0.0, 1.0], [1.0, 0.0]]);
        assert_eq!(k.get(3).unwrap(), &array![[1.0, 0.0], [0.0, 1.0]]);
    }

    #[test]
    fn one_step_expansion() {
        let model = fix_unif();
        let k = interval_transition_recursive(&model, 1);
        let w = waiting_time_pmf(&model);
        let expect = w.tail_diag(1) + build_core(&model).core(1).unwrap();
        assert!(max_abs(k.get(1).unwrap(), &expect) < 1e-15);
    }

    #[test]
    fn closed_matches_recursion_on_fixtures() {
        let det = fix_det();
        assert_eq!(interval_transition_closed(&det, 0), Matrix::eye(2));
        assert_eq!(interval_transition_closed(&det, 3), Matrix::eye(2));
        let unif = fix_unif();
        let rec = interval_transition_recursive(&unif, 10);
        for n in 0..=10 {
            let closed = interval_transition_closed(&unif, n);
            assert!(max_abs(&closed, rec.get(n).unwrap()) < 1e-10, "n = {n}");
        }
    }

    #[test]
    fn chain_sum_boundary_is_single_path() {
        // S_{x+2}(x) is the single chain of x+1 unit sojourns
        let model = fix_unif();
        let phases = Phase::all(&model);
        let c1 = build_core(&model).core(1).unwrap().clone();
        let s = kernel::chain_sum(&phases, 0, 4, 2);
        let expect = c1.dot(&c1).dot(&c1);
        assert!(max_abs(&s, &expect) < 1e-15);
        assert_eq!(kernel::chain_sum(&phases, 0, 3, 2), Matrix::zeros((4, 4)));
    }

    #[test]
    fn return_probability_fixtures() {
        let det = fix_det();
        let p = return_probability(&det, 3, Variant::ExactEntry).unwrap();
        assert_eq!(p.to_vec(), vec![1.0, 1.0]);

        let unif = fix_unif();
        let w = waiting_time_pmf(&unif);
        for variant in [Variant::ExactEntry, Variant::PaperSurvival] {
            let p1 = return_probability(&unif, 1, variant).unwrap();
            for i in 0..4 {
                assert!((p1[i] - w.tail(i, 1)).abs() < 1e-15);
            }
        }
        let p3 = return_probability(&unif, 3, Variant::ExactEntry).unwrap();
        for v in p3.iter() {
            assert!((v - 0.25).abs() < 1e-6);
        }
        assert!(return_probability(&unif, 0, Variant::ExactEntry).is_err());
    }

    #[test]
    fn paper_survival_uniform_value() {
        // 1/64 + 3·(1/3)(1/4) + 3·(1/12)(1/4): survival weighting double-counts
        let p3 = return_probability(&fix_unif(), 3, Variant::PaperSurvival).unwrap();
        let expect = 1.0 / 64.0 + 0.25 + 1.0 / 16.0;
        for v in p3.iter() {
            assert!((v - expect).abs() < 1e-9, "{v}");
        }
    }

    #[test]
    fn validation_names_row() {
        let states = StateSpace::new("AB".chars()).unwrap();
        let h = vec![array![[0.0, 1.0], [1.0, 0.0]]];
        let err =
            SemiMarkovModel::new(states.clone(), array![[0.0, 1.0], [0.5, 0.0]], h.clone()).unwrap_err();
        assert!(matches!(err, Error::InvalidModel { row: 1, .. }), "{err}");
        let err =
            SemiMarkovModel::new(states.clone(), array![[0.5, 0.5], [1.0, 0.0]], h.clone()).unwrap_err();
        assert!(matches!(err, Error::InvalidModel { row: 0, .. }));
        let err = SemiMarkovModel::new(states.clone(), array![[0.0, 1.0], [-0.0001, 1.0001]], h).unwrap_err();
        assert!(matches!(err, Error::InvalidModel { row: 1, .. }));
        let err = SemiMarkovModel::new(
            states,
            array![[0.0, 1.0], [1.0, 0.0]],
            vec![array![[0.0, 0.5], [0.0, 1.0]]],
        )
        .unwrap_err();
        assert!(matches!(err, Error::InvalidModel { row: 0, .. }));
    }

    #[test]
    fn json_round_trip_validates() {
        let model = fix_det();
        let json = serde_json::to_string(&model).unwrap();
        let back: SemiMarkovModel = serde_json::from_str(&json).unwrap();
        assert_eq!(back, model);
        let broken = json.replace("[[0.0,1.0],[1.0,0.0]]", "[[0.0,0.9],[1.0,0.0]]");
        assert!(serde_json::from_str::<SemiMarkovModel>(&broken).is_err());
    }

    #[test]
    fn variant_parse() {
        assert_eq!("exact-entry".parse::<Variant>().unwrap(), Variant::ExactEntry);
        assert_eq!(Variant::default(), Variant::PaperSurvival);
        assert!("nope".parse::<Variant>().is_err());
    }
}

//! Partially non-homogeneous chains: the embedded matrix depends on the
//! coding position `k = position mod s` at which a sojourn is entered, while
//! holding times are shared across coding positions.
//!
//! Coding positions are 0-based here.

use serde::{Deserialize, Serialize};

use crate::error::{argument, Error, Result};
use crate::model::{
    self, kernel, matrix_to_rows, rows_to_matrix, Matrix, Phase, SemiMarkovKernel, SemiMarkovModel, Variant,
    Vector, WaitingTail,
};
use crate::states::StateSpace;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "NhRecord", into = "NhRecord")]
pub struct NHSemiMarkovModel {
    states: StateSpace,
    embedded: Vec<Matrix>,
    holding: Vec<Matrix>,
}

impl NHSemiMarkovModel {
    /// One embedded matrix per coding position (`embedded.len()` is the period).
    pub fn new(states: StateSpace, embedded: Vec<Matrix>, holding: Vec<Matrix>) -> Result<Self> {
        if embedded.is_empty() {
            return Err(argument("period s must be at least 1"));
        }
        for p in &embedded {
            model::validate_embedded(&states, p, "embedded matrix P(k)")?;
        }
        model::validate_holding(&states, &embedded, &holding)?;
        Ok(Self {
            states,
            embedded,
            holding,
        })
    }

    /// Same embedded matrix at every coding position.
    pub fn from_homogeneous(model: &SemiMarkovModel, period: usize) -> Result<Self> {
        if period == 0 {
            return Err(argument("period s must be at least 1"));
        }
        Ok(Self {
            states: model.states().clone(),
            embedded: vec![model.embedded().clone(); period],
            holding: model.holding().to_vec(),
        })
    }

    /// The homogeneous model at coding position `k`.
    pub fn at_position(&self, k: usize) -> Result<SemiMarkovModel> {
        check_position(self, k)?;
        SemiMarkovModel::new(
            self.states.clone(),
            self.embedded[k].clone(),
            self.holding.clone(),
        )
    }

    pub fn embedded(&self) -> &[Matrix] {
        &self.embedded
    }

    /// Rotates the coding positions so that position `k` of the result is
    /// position `(k + r) mod s` of `self`.
    pub fn rotated(&self, r: usize) -> Self {
        let mut embedded = self.embedded.clone();
        let s = embedded.len();
        embedded.rotate_left(r % s);
        Self {
            embedded,
            ..self.clone()
        }
    }
}

impl SemiMarkovKernel for NHSemiMarkovModel {
    fn states(&self) -> &StateSpace {
        &self.states
    }

    fn period(&self) -> usize {
        self.embedded.len()
    }

    fn embedded_at(&self, phase: usize) -> &Matrix {
        &self.embedded[phase % self.embedded.len()]
    }

    fn holding(&self) -> &[Matrix] {
        &self.holding
    }
}

fn check_position(model: &NHSemiMarkovModel, k: usize) -> Result<()> {
    if k >= model.period() {
        return Err(argument(format!(
            "coding position {k} out of range for period {}",
            model.period()
        )));
    }
    Ok(())
}

/// `Q(k, n)` for `k = 0..s`, `n = 0..=n_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct NHIntervalKernel {
    q: Vec<Vec<Matrix>>,
}

impl NHIntervalKernel {
    pub fn get(&self, k: usize, n: usize) -> Option<&Matrix> {
        self.q.get(k).and_then(|row| row.get(n))
    }

    pub fn period(&self) -> usize {
        self.q.len()
    }

    pub fn n_max(&self) -> usize {
        self.q[0].len() - 1
    }
}

/// Waiting-time tables per coding position, mixing `H` with `P(k)`.
pub fn nh_waiting_time_pmf(model: &NHSemiMarkovModel) -> Vec<WaitingTail> {
    Phase::all(model).into_iter().map(|p| p.waiting).collect()
}

/// `Q(k,n) = >W(k,n) + Σ_m C(k,m)·Q((k+m) mod s, n−m)`.
pub fn nh_interval_recursive(model: &NHSemiMarkovModel, n_max: usize) -> NHIntervalKernel {
    NHIntervalKernel {
        q: kernel::recursive(&Phase::within(model, n_max), n_max),
    }
}

pub fn nh_interval_closed(model: &NHSemiMarkovModel, k: usize, n: usize) -> Result<Matrix> {
    check_position(model, k)?;
    Ok(kernel::closed(&Phase::within(model, n), k, n))
}

pub fn nh_return_probability(
    model: &NHSemiMarkovModel,
    k: usize,
    d: usize,
    variant: Variant,
) -> Result<Vector> {
    check_position(model, k)?;
    if d == 0 {
        return Err(argument("return period d must be at least 1"));
    }
    let phases = Phase::within(model, d);
    let q = kernel::recursive(&phases, d - 1);
    Ok(kernel::return_probability(&phases, &q, k, d, variant))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct NhRecord {
    states: StateSpace,
    embedded: Vec<Vec<Vec<f64>>>,
    holding: Vec<Vec<Vec<f64>>>,
}

impl TryFrom<NhRecord> for NHSemiMarkovModel {
    type Error = Error;

    fn try_from(r: NhRecord) -> Result<Self> {
        let embedded = r
            .embedded
            .iter()
            .map(|m| rows_to_matrix(m))
            .collect::<Result<Vec<_>>>()?;
        let holding = r
            .holding
            .iter()
            .map(|m| rows_to_matrix(m))
            .collect::<Result<Vec<_>>>()?;
        Self::new(r.states, embedded, holding)
    }
}

impl From<NHSemiMarkovModel> for NhRecord {
    fn from(m: NHSemiMarkovModel) -> Self {
        NhRecord {
            embedded: m.embedded.iter().map(matrix_to_rows).collect(),
            holding: m.holding.iter().map(matrix_to_rows).collect(),
            states: m.states,
        }
    }
}

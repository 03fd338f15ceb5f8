//! Empirical estimation of semi-Markov parameters from a symbol sequence.
//!
//! A sequence is cut into maximal runs of one symbol. Each run except the
//! last ends in an observed jump `i → j` after `m` positions; the last run is
//! right-censored. Jumps are attributed to the coding position
//! `start mod s` of the departing run.

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{argument, Error, Result};
use crate::model::{Matrix, SemiMarkovModel, DEFAULT_M_MAX};
use crate::nh::NHSemiMarkovModel;
use crate::sequence::SymbolSequence;
use crate::states::StateSpace;

/// Default number of warm-up cycles used for the initial estimate.
pub const DEFAULT_WARMUP_CYCLES: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Run {
    pub state: usize,
    pub length: usize,
    /// 0-based position of the run's first symbol.
    pub start: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunLengthEncoding {
    pub runs: Vec<Run>,
    /// The final run's terminating jump is never observed.
    pub last_censored: bool,
}

impl RunLengthEncoding {
    /// Runs whose terminating jump was observed.
    pub fn completed(&self) -> &[Run] {
        let n = self.runs.len() - usize::from(self.last_censored);
        &self.runs[..n]
    }
}

pub fn extract_runs(seq: &SymbolSequence) -> Result<RunLengthEncoding> {
    runs_of(seq.symbols())
}

fn runs_of(symbols: &[usize]) -> Result<RunLengthEncoding> {
    if symbols.is_empty() {
        return Err(argument("cannot extract runs from an empty sequence"));
    }
    let mut runs: Vec<Run> = Vec::new();
    for (pos, &s) in symbols.iter().enumerate() {
        match runs.last_mut() {
            Some(run) if run.state == s => run.length += 1,
            _ => runs.push(Run {
                state: s,
                length: 1,
                start: pos,
            }),
        }
    }
    Ok(RunLengthEncoding {
        runs,
        last_censored: true,
    })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ZeroRowPolicy {
    /// A state never exited gets a uniform off-diagonal row.
    #[default]
    UniformOffDiagonal,
    Error,
}

impl FromStr for ZeroRowPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform-offdiagonal" => Ok(Self::UniformOffDiagonal),
            "error" => Ok(Self::Error),
            other => Err(argument(format!("unknown zero-row policy {other:?}"))),
        }
    }
}

/// Normalization of the holding-time counts `N(i→j, m)`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HoldingEstimator {
    /// `N(i→j, m) / N(i→j)`, the maximum-likelihood estimate of `h_ij(m)`.
    #[default]
    PairConditional,
    /// `N(i→j, m) / Σ_x N(i→x, m)`, then renormalized over `m` for each `(i,j)`.
    DestinationNormalized,
}

impl FromStr for HoldingEstimator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pair-conditional" => Ok(Self::PairConditional),
            "destination-normalized" => Ok(Self::DestinationNormalized),
            other => Err(argument(format!("unknown holding estimator {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EstimationConfig {
    /// Period of non-homogeneity (number of coding positions).
    pub period: usize,
    pub m_max: usize,
    pub zero_row_policy: ZeroRowPolicy,
    /// When false, the censored final run is closed by wrapping around to the
    /// first run's state (skipped if both runs share a state).
    pub drop_censored_final_run: bool,
    pub holding_estimator: HoldingEstimator,
}

impl Default for EstimationConfig {
    fn default() -> Self {
        Self {
            period: 3,
            m_max: DEFAULT_M_MAX,
            zero_row_policy: ZeroRowPolicy::default(),
            drop_censored_final_run: true,
            holding_estimator: HoldingEstimator::default(),
        }
    }
}

impl EstimationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.period == 0 {
            return Err(argument("period s must be at least 1"));
        }
        if self.m_max == 0 {
            return Err(argument("M_max must be at least 1"));
        }
        Ok(())
    }
}

/// Jump and duration counts accumulated from completed runs.
#[derive(Debug, Clone)]
struct TransitionCounts {
    n: usize,
    m_max: usize,
    /// `[k][i * n + j]`
    jumps: Vec<Vec<u64>>,
    /// `[i * n + j][m - 1]` for `m <= m_max`
    durations: Vec<Vec<u64>>,
    /// jumps whose sojourn exceeded `m_max`, per `i * n + j`
    overflow: Vec<u64>,
}

impl TransitionCounts {
    fn new(n: usize, period: usize, m_max: usize) -> Self {
        Self {
            n,
            m_max,
            jumps: vec![vec![0; n * n]; period],
            durations: vec![vec![0; m_max]; n * n],
            overflow: vec![0; n * n],
        }
    }

    fn add(&mut self, from: &Run, to: usize) {
        let s = self.jumps.len();
        let ij = from.state * self.n + to;
        self.jumps[from.start % s][ij] += 1;
        if from.length <= self.m_max {
            self.durations[ij][from.length - 1] += 1;
        } else {
            self.overflow[ij] += 1;
        }
    }

    fn add_runs(&mut self, rle: &RunLengthEncoding, config: &EstimationConfig) {
        for pair in rle.runs.windows(2) {
            self.add(&pair[0], pair[1].state);
        }
        if !config.drop_censored_final_run {
            self.add_wrapped(&rle.runs[rle.runs.len() - 1], rle.runs[0].state);
        }
    }

    fn add_wrapped(&mut self, last: &Run, first_state: usize) {
        if last.state != first_state {
            self.add(last, first_state);
        }
    }

    /// Number of recorded jumps leaving `state`, over all coding positions.
    #[cfg(test)]
    fn exits(&self, state: usize) -> u64 {
        self.jumps
            .iter()
            .map(|k| k[state * self.n..(state + 1) * self.n].iter().sum::<u64>())
            .sum()
    }

    fn to_model(&self, states: &StateSpace, config: &EstimationConfig) -> Result<NHSemiMarkovModel> {
        let n = self.n;
        let embedded = self
            .jumps
            .iter()
            .enumerate()
            .map(|(k, counts)| {
                let mut p = Matrix::zeros((n, n));
                for i in 0..n {
                    let row = &counts[i * n..(i + 1) * n];
                    let total: u64 = row.iter().sum();
                    if total == 0 {
                        if config.zero_row_policy == ZeroRowPolicy::Error {
                            return Err(Error::UnexitedState {
                                state: states.symbol(i).unwrap_or('?').to_string(),
                                phase: k,
                            });
                        }
                        for j in (0..n).filter(|&j| j != i) {
                            p[[i, j]] = 1.0 / (n - 1) as f64;
                        }
                    } else {
                        for j in 0..n {
                            p[[i, j]] = row[j] as f64 / total as f64;
                        }
                    }
                }
                Ok(p)
            })
            .collect::<Result<Vec<_>>>()?;

        let mut holding = vec![Matrix::zeros((n, n)); self.m_max];
        for i in 0..n {
            // Σ_x N(i→x, m) for the destination-normalized estimator
            let per_m: Vec<u64> = (0..self.m_max)
                .map(|m| (0..n).map(|x| self.durations[i * n + x][m]).sum())
                .collect();
            for j in 0..n {
                if !embedded.iter().any(|p| p[[i, j]] > 0.0) {
                    continue;
                }
                let counts = &self.durations[i * n + j];
                let weights: Vec<f64> = match config.holding_estimator {
                    HoldingEstimator::PairConditional => counts.iter().map(|&c| c as f64).collect(),
                    HoldingEstimator::DestinationNormalized => counts
                        .iter()
                        .zip(&per_m)
                        .map(|(&c, &t)| if t == 0 { 0.0 } else { c as f64 / t as f64 })
                        .collect(),
                };
                let total: f64 = weights.iter().sum();
                if total > 0.0 {
                    for (m, w) in weights.iter().enumerate() {
                        holding[m][[i, j]] = w / total;
                    }
                } else if self.overflow[i * n + j] > 0 {
                    holding[self.m_max - 1][[i, j]] = 1.0;
                } else {
                    // no observed sojourn for this pair (fallback row)
                    holding[0][[i, j]] = 1.0;
                }
            }
        }
        NHSemiMarkovModel::new(states.clone(), embedded, holding)
    }
}

fn counts_for(
    symbols: &[usize],
    states: &StateSpace,
    period: usize,
    config: &EstimationConfig,
) -> Result<TransitionCounts> {
    config.validate()?;
    let rle = runs_of(symbols)?;
    let mut counts = TransitionCounts::new(states.len(), period, config.m_max);
    counts.add_runs(&rle, config);
    Ok(counts)
}

/// Pooled estimate of `P` and `H` (the coding-position period is ignored).
pub fn estimate_homogeneous(seq: &SymbolSequence, config: &EstimationConfig) -> Result<SemiMarkovModel> {
    let counts = counts_for(seq.symbols(), seq.states(), 1, config)?;
    counts.to_model(seq.states(), config)?.at_position(0)
}

/// Per-coding-position estimate of `P(k)` with pooled `H`.
pub fn estimate_nh(seq: &SymbolSequence, config: &EstimationConfig) -> Result<NHSemiMarkovModel> {
    estimate_nh_prefix(seq, seq.len(), config)
}

/// [`estimate_nh`] on the first `len` symbols.
pub fn estimate_nh_prefix(
    seq: &SymbolSequence,
    len: usize,
    config: &EstimationConfig,
) -> Result<NHSemiMarkovModel> {
    let counts = counts_for(seq.prefix(len), seq.states(), config.period, config)?;
    counts.to_model(seq.states(), config)
}

/// Yields one model per complete cycle of length `d`.
///
/// Cycles `1..=warmup_cycles` all receive the model estimated from the first
/// `warmup_cycles · d` symbols. Cycle `n` beyond the warm-up receives the model
/// estimated from the prefix of length `n·d + offset` (clamped to the sequence
/// length). Counts are updated incrementally as the prefix grows.
#[derive(Debug)]
pub struct RollingEstimator<'a> {
    seq: &'a SymbolSequence,
    runs: Vec<Run>,
    config: EstimationConfig,
    d: usize,
    offset: usize,
    warmup_cycles: usize,
    n_cycles: usize,
    counts: TransitionCounts,
    /// runs[..completed] are already counted
    completed: usize,
    warmup: NHSemiMarkovModel,
    cycle: usize,
}

impl<'a> RollingEstimator<'a> {
    pub fn new(
        seq: &'a SymbolSequence,
        d: usize,
        offset: usize,
        config: &EstimationConfig,
        warmup_cycles: usize,
    ) -> Result<Self> {
        config.validate()?;
        if d == 0 {
            return Err(argument("cycle length d must be at least 1"));
        }
        if warmup_cycles == 0 {
            return Err(argument("at least one warm-up cycle is required"));
        }
        let required = warmup_cycles * d;
        if seq.len() < required {
            return Err(Error::SequenceTooShort {
                length: seq.len(),
                required,
            });
        }
        let warmup = estimate_nh_prefix(seq, required, config)?;
        let runs = extract_runs(seq)?.runs;
        Ok(Self {
            seq,
            runs,
            config: config.clone(),
            d,
            offset,
            warmup_cycles,
            n_cycles: seq.len() / d,
            counts: TransitionCounts::new(seq.states().len(), config.period, config.m_max),
            completed: 0,
            warmup,
            cycle: 0,
        })
    }

    pub fn n_cycles(&self) -> usize {
        self.n_cycles
    }

    pub fn warmup_model(&self) -> &NHSemiMarkovModel {
        &self.warmup
    }

    fn model_for_prefix(&mut self, len: usize) -> Result<NHSemiMarkovModel> {
        while self.completed + 1 < self.runs.len() && self.runs[self.completed + 1].start < len {
            let (run, next) = (self.runs[self.completed], self.runs[self.completed + 1].state);
            self.counts.add(&run, next);
            self.completed += 1;
        }
        if self.config.drop_censored_final_run {
            return self.counts.to_model(self.seq.states(), &self.config);
        }
        let open = self.runs[self.completed];
        let truncated = Run {
            length: len - open.start,
            ..open
        };
        let mut counts = self.counts.clone();
        counts.add_wrapped(&truncated, self.runs[0].state);
        counts.to_model(self.seq.states(), &self.config)
    }
}

impl Iterator for RollingEstimator<'_> {
    type Item = Result<NHSemiMarkovModel>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.cycle >= self.n_cycles {
            return None;
        }
        self.cycle += 1;
        if self.cycle <= self.warmup_cycles {
            return Some(Ok(self.warmup.clone()));
        }
        let len = (self.cycle * self.d + self.offset).min(self.seq.len());
        Some(self.model_for_prefix(len))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = self.n_cycles - self.cycle;
        (left, Some(left))
    }
}

/// Collects every per-cycle model of a [`RollingEstimator`].
pub fn rolling_estimate(
    seq: &SymbolSequence,
    d: usize,
    offset: usize,
    config: &EstimationConfig,
    warmup_cycles: usize,
) -> Result<Vec<NHSemiMarkovModel>> {
    RollingEstimator::new(seq, d, offset, config, warmup_cycles)?.collect()
}

//! Multi-cycle periodicity probabilities, their ratio series and the
//! green/red region annotation.
//!
//! `p_i(n, d)` is the probability that the chain occupies `i` at every
//! multiple of `d` for `n` cycles given it started in `i`. Each cycle
//! multiplies the previous value by the d-step return probability of the
//! model in force for that cycle, so the values decay geometrically and are
//! kept in log space. `R_i(n) = p_i(n) / p_i(n-1)` is that per-cycle factor;
//! a cycle is GREEN when `R` does not decrease and RED when it does.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{argument, Result};
use crate::estimate::{
    estimate_homogeneous, estimate_nh, EstimationConfig, RollingEstimator, DEFAULT_WARMUP_CYCLES,
};
use crate::model::{return_probability, SemiMarkovKernel, SemiMarkovModel, Variant, Vector};
use crate::nh::{nh_return_probability, NHSemiMarkovModel};
use crate::sequence::SymbolSequence;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleEntry {
    /// `ln p_i(n, d)` per state.
    pub log_p: Vec<f64>,
    /// `ln` of the factor applied in this cycle.
    pub log_factor: Vec<f64>,
    /// `R_i(n)`; absent for the first cycle, before [`ratio_series`], and
    /// where `p_i(n-1, d)` is zero.
    pub ratio: Vec<Option<f64>>,
    /// Index of the model used for this cycle.
    pub model_ref: usize,
}

impl CycleEntry {
    pub fn probability(&self, state: usize) -> f64 {
        self.log_p[state].exp()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleProfile {
    pub d: usize,
    pub period: usize,
    /// Coding position of the starting state (0-based).
    pub position: usize,
    pub variant: Variant,
    /// `cycles[n - 1]` is cycle `n`.
    pub cycles: Vec<CycleEntry>,
}

impl CycleProfile {
    fn new(d: usize, period: usize, position: usize, variant: Variant) -> Self {
        Self {
            d,
            period,
            position,
            variant,
            cycles: Vec::new(),
        }
    }

    pub fn n_cycles(&self) -> usize {
        self.cycles.len()
    }

    /// Appends cycle `n + 1` given its return-probability factor.
    fn push(&mut self, factor: &Vector, model_ref: usize) {
        let log_factor: Vec<f64> = factor.iter().map(|f| f.ln()).collect();
        let log_p = match self.cycles.last() {
            Some(prev) => prev.log_p.iter().zip(&log_factor).map(|(a, b)| a + b).collect(),
            None => log_factor.clone(),
        };
        let ratio = vec![None; log_p.len()];
        self.cycles.push(CycleEntry {
            log_p,
            log_factor,
            ratio,
            model_ref,
        });
    }

    /// `R_i(n)` for 1-based `cycle`.
    pub fn ratio(&self, cycle: usize, state: usize) -> Option<f64> {
        cycle
            .checked_sub(1)
            .and_then(|c| self.cycles.get(c))
            .and_then(|e| e.ratio[state])
    }
}

/// Fixed homogeneous model for all cycles: `p_i(n, d) = p_i(1, d)^n`.
pub fn cycle_probabilities(
    model: &SemiMarkovModel,
    d: usize,
    n_max: usize,
    variant: Variant,
) -> Result<CycleProfile> {
    if n_max == 0 {
        return Err(argument("need at least one cycle"));
    }
    let factor = return_probability(model, d, variant)?;
    let mut profile = CycleProfile::new(d, 1, 0, variant);
    for _ in 0..n_max {
        profile.push(&factor, 0);
    }
    Ok(profile)
}

/// Coding position of the state observed at the start of cycle `n` (1-based).
fn cycle_phase(k: usize, d: usize, period: usize, n: usize) -> usize {
    (k + (n - 1) * d) % period
}

/// One cycle per model: cycle `n` multiplies by the return probability of
/// `models[n-1]` evaluated at the coding position reached after `n-1` cycles
/// (always `k` when `d` is a multiple of `s`).
pub fn nh_cycle_probabilities(
    models: &[NHSemiMarkovModel],
    k: usize,
    d: usize,
    variant: Variant,
) -> Result<CycleProfile> {
    let first = models
        .first()
        .ok_or_else(|| argument("at least one model is required"))?;
    let mut builder = ProfileBuilder::new(first.period(), k, d, variant)?;
    for (idx, model) in models.iter().enumerate() {
        builder.push(model, idx)?;
    }
    Ok(builder.finish())
}

/// Same fixed model for every cycle.
pub fn nh_cycle_probabilities_fixed(
    model: &NHSemiMarkovModel,
    k: usize,
    d: usize,
    n_max: usize,
    variant: Variant,
) -> Result<CycleProfile> {
    if n_max == 0 {
        return Err(argument("need at least one cycle"));
    }
    let mut builder = ProfileBuilder::new(model.period(), k, d, variant)?;
    for _ in 0..n_max {
        builder.push(model, 0)?;
    }
    Ok(builder.finish())
}

/// Builds an NH profile one cycle at a time, so per-cycle models need not be
/// kept in memory.
#[derive(Debug)]
pub struct ProfileBuilder {
    profile: CycleProfile,
}

impl ProfileBuilder {
    pub fn new(period: usize, k: usize, d: usize, variant: Variant) -> Result<Self> {
        if d == 0 {
            return Err(argument("return period d must be at least 1"));
        }
        if k >= period {
            return Err(argument(format!(
                "coding position {k} out of range for period {period}"
            )));
        }
        Ok(Self {
            profile: CycleProfile::new(d, period, k, variant),
        })
    }

    pub fn push(&mut self, model: &NHSemiMarkovModel, model_ref: usize) -> Result<()> {
        let p = &self.profile;
        if model.period() != p.period {
            return Err(argument("all models must share the same period"));
        }
        let phase = cycle_phase(p.position, p.d, p.period, p.cycles.len() + 1);
        let factor = nh_return_probability(model, phase, p.d, p.variant)?;
        self.profile.push(&factor, model_ref);
        Ok(())
    }

    pub fn finish(self) -> CycleProfile {
        self.profile
    }
}

/// Fills `R_i(n) = exp(ln p_i(n) − ln p_i(n−1))` for `n >= 2`.
pub fn ratio_series(mut profile: CycleProfile) -> Result<CycleProfile> {
    if profile.cycles.len() < 2 {
        return Err(argument("a ratio series needs at least two cycles"));
    }
    for n in 1..profile.cycles.len() {
        let (head, tail) = profile.cycles.split_at_mut(n);
        let prev = &head[n - 1];
        let cur = &mut tail[0];
        for i in 0..cur.ratio.len() {
            // the stored factor is exactly ln p(n) − ln p(n−1) without cancellation
            cur.ratio[i] = prev.log_p[i].is_finite().then(|| cur.log_factor[i].exp());
        }
    }
    Ok(profile)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Color {
    Green,
    Red,
}

impl fmt::Display for Color {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Color::Green => "GREEN",
            Color::Red => "RED",
        })
    }
}

/// Maximal stretch of same-colored cycles, 1-based and inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColorRun {
    pub color: Color,
    pub start: usize,
    pub end: usize,
}

impl ColorRun {
    pub fn len(&self) -> usize {
        self.end - self.start + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionAnnotation {
    pub state: usize,
    pub symbol: char,
    /// `colors[n - 1]` for cycle `n`; cycles 1 and 2 are uncolored.
    pub colors: Vec<Option<Color>>,
    pub runs: Vec<ColorRun>,
}

impl RegionAnnotation {
    /// Fraction of colored cycles in `first..=last` that are GREEN.
    pub fn green_fraction(&self, first: usize, last: usize) -> Option<f64> {
        let colored: Vec<Color> = (first.max(1)..=last.min(self.colors.len()))
            .filter_map(|n| self.colors[n - 1])
            .collect();
        if colored.is_empty() {
            return None;
        }
        let green = colored.iter().filter(|&&c| c == Color::Green).count();
        Some(green as f64 / colored.len() as f64)
    }
}

/// Colors cycle `n >= 3` GREEN if `R(n) >= R(n−1)` and RED otherwise; an
/// undefined ratio on either side counts as RED.
pub fn color_regions(
    profile: &CycleProfile,
    state: char,
    states: &crate::StateSpace,
) -> Result<RegionAnnotation> {
    let idx = states.require(state)?;
    color_state(profile, idx, state)
}

pub(crate) fn color_state(profile: &CycleProfile, idx: usize, symbol: char) -> Result<RegionAnnotation> {
    if profile.cycles.len() < 3 {
        return Err(argument("coloring needs at least three cycles"));
    }
    if profile.cycles[0].log_p.len() <= idx {
        return Err(argument(format!("state index {idx} out of range")));
    }
    let mut colors = vec![None, None];
    for n in 3..=profile.cycles.len() {
        let color = match (profile.ratio(n - 1, idx), profile.ratio(n, idx)) {
            (Some(prev), Some(cur)) if cur >= prev => Color::Green,
            _ => Color::Red,
        };
        colors.push(Some(color));
    }
    let mut runs: Vec<ColorRun> = Vec::new();
    for (i, c) in colors.iter().enumerate() {
        let Some(c) = *c else { continue };
        match runs.last_mut() {
            Some(run) if run.color == c => run.end = i + 1,
            _ => runs.push(ColorRun {
                color: c,
                start: i + 1,
                end: i + 1,
            }),
        }
    }
    Ok(RegionAnnotation {
        state: idx,
        symbol,
        colors,
        runs,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisConfig {
    pub d: usize,
    pub estimation: EstimationConfig,
    pub warmup_cycles: usize,
    pub variant: Variant,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            d: 3,
            estimation: EstimationConfig::default(),
            warmup_cycles: DEFAULT_WARMUP_CYCLES,
            variant: Variant::default(),
        }
    }
}

/// First-cycle return probabilities `p_i(1, d)` of models fit to the whole
/// sequence, for comparison with the rolling profiles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Baseline {
    pub homogeneous: Vec<f64>,
    /// `by_position[k][i]`.
    pub by_position: Vec<Vec<f64>>,
}

impl Baseline {
    pub fn compute(
        seq: &SymbolSequence,
        d: usize,
        config: &EstimationConfig,
        variant: Variant,
    ) -> Result<Self> {
        let homogeneous = return_probability(&estimate_homogeneous(seq, config)?, d, variant)?.to_vec();
        let nh = estimate_nh(seq, config)?;
        let by_position = (0..nh.period())
            .map(|k| nh_return_probability(&nh, k, d, variant).map(|p| p.to_vec()))
            .collect::<Result<_>>()?;
        Ok(Self {
            homogeneous,
            by_position,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Analysis {
    pub config: AnalysisConfig,
    pub sequence_name: String,
    pub length: usize,
    pub baseline: Baseline,
    /// One profile per coding position `k = 0..s`, ratios filled.
    pub profiles: Vec<CycleProfile>,
    /// `regions[k][i]` for coding position `k` and state `i`.
    pub regions: Vec<Vec<RegionAnnotation>>,
}

/// Rolling estimation, per-position cycle probabilities, ratios and coloring
/// for every state.
pub fn analyze_sequence(seq: &SymbolSequence, config: &AnalysisConfig) -> Result<Analysis> {
    config.estimation.validate()?;
    let s = config.estimation.period;
    let per_position = |k: usize| -> Result<(CycleProfile, Vec<RegionAnnotation>)> {
        let estimator = RollingEstimator::new(seq, config.d, k, &config.estimation, config.warmup_cycles)?;
        if estimator.n_cycles() < 3 {
            return Err(argument("analysis needs at least three complete cycles"));
        }
        let mut builder = ProfileBuilder::new(s, k, config.d, config.variant)?;
        for (idx, model) in estimator.enumerate() {
            let model = model?;
            let model_ref = idx.saturating_sub(config.warmup_cycles - 1);
            builder.push(&model, model_ref)?;
        }
        let profile = ratio_series(builder.finish())?;
        let regions = seq
            .states()
            .symbols()
            .iter()
            .enumerate()
            .map(|(i, &c)| color_state(&profile, i, c))
            .collect::<Result<Vec<_>>>()?;
        Ok((profile, regions))
    };

    let results: Vec<Result<(CycleProfile, Vec<RegionAnnotation>)>> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..s).map(|k| scope.spawn(move || per_position(k))).collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("analysis worker panicked"))
            .collect()
    });
    let mut profiles = Vec::with_capacity(s);
    let mut regions = Vec::with_capacity(s);
    for r in results {
        let (p, c) = r?;
        profiles.push(p);
        regions.push(c);
    }
    Ok(Analysis {
        config: config.clone(),
        sequence_name: seq.name().to_string(),
        length: seq.len(),
        baseline: Baseline::compute(seq, config.d, &config.estimation, config.variant)?,
        profiles,
        regions,
    })
}

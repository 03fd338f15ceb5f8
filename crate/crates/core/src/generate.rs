//! Synthetic sequence generators and the semi-Markov trajectory simulator.
//!
//! All randomness comes from ChaCha8 seeded with a `u64` (`rand_chacha`'s
//! `seed_from_u64`), so a generator name plus seed reproduces a sequence.

use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{argument, Error, Result};
use crate::model::{Matrix, SemiMarkovKernel, SemiMarkovModel};
use crate::nh::NHSemiMarkovModel;
use crate::sequence::SymbolSequence;
use crate::states::StateSpace;

/// Name of the pseudo-random generator recorded in report metadata.
pub const RNG_ALGORITHM: &str = "chacha8";

pub(crate) fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GeneratorKind {
    /// I.i.d. equiprobable symbols.
    Uniform,
    /// `letter` at every position `≡ 1 (mod period)` (1-based), uniform elsewhere.
    Periodic,
    /// Uniform background with `letter` substituted every `period` positions
    /// inside each interval, starting at the interval's first position.
    Embedded,
}

impl FromStr for GeneratorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(Self::Uniform),
            "periodic" => Ok(Self::Periodic),
            "embedded" => Ok(Self::Embedded),
            other => Err(argument(format!("unknown generator kind {other:?}"))),
        }
    }
}

impl GeneratorKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Uniform => "uniform",
            Self::Periodic => "periodic",
            Self::Embedded => "embedded",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub kind: GeneratorKind,
    pub length: usize,
    pub period: usize,
    pub letter: char,
    /// Inclusive, 1-based `(start, end)` positions.
    pub intervals: Vec<(usize, usize)>,
    pub seed: u64,
}

impl GeneratorSpec {
    pub fn uniform(length: usize, seed: u64) -> Self {
        Self {
            kind: GeneratorKind::Uniform,
            length,
            period: 3,
            letter: 'A',
            intervals: Vec::new(),
            seed,
        }
    }

    pub fn periodic(length: usize, period: usize, letter: char, seed: u64) -> Self {
        Self {
            kind: GeneratorKind::Periodic,
            period,
            letter,
            ..Self::uniform(length, seed)
        }
    }

    pub fn embedded(
        length: usize,
        period: usize,
        letter: char,
        intervals: Vec<(usize, usize)>,
        seed: u64,
    ) -> Self {
        Self {
            kind: GeneratorKind::Embedded,
            period,
            letter,
            intervals,
            ..Self::uniform(length, seed)
        }
    }

    pub fn validate(&self, states: &StateSpace) -> Result<()> {
        if self.length == 0 {
            return Err(argument("generated length must be at least 1"));
        }
        if self.period == 0 {
            return Err(argument("period must be at least 1"));
        }
        if self.kind != GeneratorKind::Uniform {
            states.require(self.letter)?;
        }
        let mut sorted = self.intervals.clone();
        sorted.sort_unstable();
        for &(a, b) in &sorted {
            if a == 0 || a > b || b > self.length {
                return Err(argument(format!(
                    "interval {a}-{b} must satisfy 1 <= start <= end <= {}",
                    self.length
                )));
            }
        }
        if let Some(w) = sorted.windows(2).find(|w| w[1].0 <= w[0].1) {
            return Err(argument(format!(
                "intervals {}-{} and {}-{} overlap",
                w[0].0, w[0].1, w[1].0, w[1].1
            )));
        }
        Ok(())
    }

    /// One-line description used in FASTA headers and report metadata.
    pub fn describe(&self) -> String {
        let mut s = format!(
            "kind={} length={} seed={} rng={}",
            self.kind.as_str(),
            self.length,
            self.seed,
            RNG_ALGORITHM
        );
        if self.kind != GeneratorKind::Uniform {
            s.push_str(&format!(" period={} letter={}", self.period, self.letter));
        }
        if !self.intervals.is_empty() {
            let iv: Vec<String> = self.intervals.iter().map(|(a, b)| format!("{a}-{b}")).collect();
            s.push_str(&format!(" intervals={}", iv.join(",")));
        }
        s
    }

    /// Inverse of [`GeneratorSpec::describe`]; `None` unless the text names a
    /// kind, length and seed generated with this crate's RNG.
    pub fn from_description(text: &str) -> Option<Self> {
        let mut spec = Self::uniform(0, 0);
        let (mut kind, mut length, mut seed) = (false, false, false);
        for token in text.split_whitespace() {
            let Some((key, value)) = token.split_once('=') else {
                continue;
            };
            match key {
                "kind" => {
                    spec.kind = value.parse().ok()?;
                    kind = true;
                }
                "length" => {
                    spec.length = value.parse().ok()?;
                    length = true;
                }
                "seed" => {
                    spec.seed = value.parse().ok()?;
                    seed = true;
                }
                "rng" if value != RNG_ALGORITHM => return None,
                "period" => spec.period = value.parse().ok()?,
                "letter" => spec.letter = value.parse().ok()?,
                "intervals" => spec.intervals = parse_intervals(value).ok()?,
                _ => {}
            }
        }
        (kind && length && seed).then_some(spec)
    }
}

/// Parses `"1500-2000,3000-3500"`.
pub fn parse_intervals(text: &str) -> Result<Vec<(usize, usize)>> {
    text.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|part| {
            let (a, b) = part
                .trim()
                .split_once('-')
                .ok_or_else(|| argument(format!("interval {part:?} is not of the form start-end")))?;
            let parse = |v: &str| {
                v.trim()
                    .parse::<usize>()
                    .map_err(|_| argument(format!("bad interval bound {v:?}")))
            };
            Ok((parse(a)?, parse(b)?))
        })
        .collect()
}

pub fn generate(spec: &GeneratorSpec, states: &StateSpace) -> Result<SymbolSequence> {
    spec.validate(states)?;
    let mut rng = rng(spec.seed);
    let n = states.len();
    let mut symbols: Vec<usize> = (0..spec.length).map(|_| rng.random_range(0..n)).collect();
    match spec.kind {
        GeneratorKind::Uniform => {}
        GeneratorKind::Periodic => {
            let letter = states.require(spec.letter)?;
            for s in symbols.iter_mut().step_by(spec.period) {
                *s = letter;
            }
        }
        GeneratorKind::Embedded => {
            let letter = states.require(spec.letter)?;
            for &(a, b) in &spec.intervals {
                for pos in (a - 1..b).step_by(spec.period) {
                    symbols[pos] = letter;
                }
            }
        }
    }
    SymbolSequence::new(states.clone(), symbols, spec.kind.as_str())
}

fn sample(cumulative: &[f64], u: f64) -> usize {
    // last bucket absorbs rounding in the final cumulative value
    cumulative
        .iter()
        .position(|&c| u < c)
        .unwrap_or(cumulative.len() - 1)
}

/// Precomputed cumulative tables for drawing jumps and sojourns.
struct JumpSampler {
    n: usize,
    period: usize,
    /// `[phase][i]` → cumulative over destinations
    embedded: Vec<Vec<Vec<f64>>>,
    /// `[i * n + j]` → cumulative over `m = 1..=M_max`
    holding: Vec<Vec<f64>>,
}

impl JumpSampler {
    fn new<K: SemiMarkovKernel + ?Sized>(model: &K) -> Self {
        let n = model.n_states();
        let period = model.period();
        let cumsum = |it: &mut dyn Iterator<Item = f64>| {
            let mut acc = 0.0;
            it.map(|v| {
                acc += v;
                acc
            })
            .collect::<Vec<f64>>()
        };
        let embedded = (0..period)
            .map(|k| {
                let p = model.embedded_at(k);
                (0..n).map(|i| cumsum(&mut p.row(i).iter().copied())).collect()
            })
            .collect();
        let holding = (0..n * n)
            .map(|ij| cumsum(&mut model.holding().iter().map(|h| h[[ij / n, ij % n]])))
            .collect();
        Self {
            n,
            period,
            embedded,
            holding,
        }
    }

    /// Draws `(next state, sojourn length)` for a sojourn in `state` entered at `position`.
    fn jump<R: Rng>(&self, rng: &mut R, state: usize, position: usize) -> (usize, usize) {
        let next = sample(&self.embedded[position % self.period][state], rng.random());
        let m = sample(&self.holding[state * self.n + next], rng.random()) + 1;
        (next, m)
    }
}

/// Simulates a realization of `model` of the given length. The initial state
/// is uniform and is entered at position 0 (coding position 0).
pub fn simulate_smc<K: SemiMarkovKernel + ?Sized>(
    model: &K,
    length: usize,
    seed: u64,
) -> Result<SymbolSequence> {
    if length == 0 {
        return Err(argument("simulated length must be at least 1"));
    }
    let sampler = JumpSampler::new(model);
    let mut rng = rng(seed);
    let mut state = rng.random_range(0..sampler.n);
    let mut symbols = Vec::with_capacity(length);
    while symbols.len() < length {
        let (next, m) = sampler.jump(&mut rng, state, symbols.len());
        let take = m.min(length - symbols.len());
        symbols.extend(std::iter::repeat_n(state, take));
        state = next;
    }
    SymbolSequence::new(model.states().clone(), symbols, "simulated")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    /// Binomial standard error `sqrt(p(1-p)/trials)`.
    pub std_err: f64,
}

/// Monte Carlo estimate of the probability of occupying `i` at position `d`
/// after entering `i` at position 0 with coding position `phase`.
pub fn mc_return_probability<K: SemiMarkovKernel + ?Sized>(
    model: &K,
    phase: usize,
    d: usize,
    trials: usize,
    seed: u64,
) -> Result<Vec<McEstimate>> {
    if trials == 0 {
        return Err(argument("trials must be at least 1"));
    }
    if phase >= model.period() {
        return Err(argument(format!(
            "coding position {phase} out of range for period {}",
            model.period()
        )));
    }
    let sampler = JumpSampler::new(model);
    let mut rng = rng(seed);
    Ok((0..sampler.n)
        .map(|start| {
            let hits = (0..trials)
                .filter(|_| {
                    let (mut state, mut entered) = (start, 0usize);
                    loop {
                        let (next, m) = sampler.jump(&mut rng, state, phase + entered);
                        if entered + m > d {
                            return state == start;
                        }
                        entered += m;
                        state = next;
                    }
                })
                .count();
            let mean = hits as f64 / trials as f64;
            McEstimate {
                mean,
                std_err: (mean * (1.0 - mean) / trials as f64).sqrt(),
            }
        })
        .collect())
}

fn random_distribution<R: Rng>(rng: &mut R, len: usize, sparsity: f64) -> Vec<f64> {
    let mut w: Vec<f64> = (0..len)
        .map(|_| {
            if rng.random::<f64>() < sparsity {
                0.0
            } else {
                rng.random()
            }
        })
        .collect();
    if w.iter().all(|&v| v == 0.0) {
        w[rng.random_range(0..len)] = 1.0;
    }
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= total);
    w
}

fn random_embedded<R: Rng>(rng: &mut R, n: usize) -> Matrix {
    let mut p = Matrix::zeros((n, n));
    for i in 0..n {
        let row = random_distribution(rng, n - 1, 0.25);
        for (j, v) in (0..n).filter(|&j| j != i).zip(row) {
            p[[i, j]] = v;
        }
    }
    p
}

fn random_holding<R: Rng>(rng: &mut R, n: usize, m_max: usize) -> Vec<Matrix> {
    let mut h = vec![Matrix::zeros((n, n)); m_max];
    for i in 0..n {
        for j in (0..n).filter(|&j| j != i) {
            for (m, v) in random_distribution(rng, m_max, 0.2).into_iter().enumerate() {
                h[m][[i, j]] = v;
            }
        }
    }
    h
}

/// A random valid model with some zero transitions and gaps in the
/// holding-time supports; deterministic given the seed.
pub fn random_model(states: &StateSpace, m_max: usize, seed: u64) -> Result<SemiMarkovModel> {
    if m_max == 0 {
        return Err(argument("M_max must be at least 1"));
    }
    let mut rng = rng(seed);
    let n = states.len();
    let p = random_embedded(&mut rng, n);
    let h = random_holding(&mut rng, n, m_max);
    SemiMarkovModel::new(states.clone(), p, h)
}

/// Period-`s` counterpart of [`random_model`].
pub fn random_nh_model(
    states: &StateSpace,
    period: usize,
    m_max: usize,
    seed: u64,
) -> Result<NHSemiMarkovModel> {
    if m_max == 0 {
        return Err(argument("M_max must be at least 1"));
    }
    let mut rng = rng(seed);
    let n = states.len();
    let embedded = (0..period).map(|_| random_embedded(&mut rng, n)).collect();
    let h = random_holding(&mut rng, n, m_max);
    NHSemiMarkovModel::new(states.clone(), embedded, h)
}

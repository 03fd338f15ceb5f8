//! Flat, serializable view of an [`Analysis`] for plotting and archiving.
//!
//! Coding positions are 1-based here, like sequence positions at every
//! external interface.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimate::EstimationConfig;
use crate::generate::{GeneratorSpec, RNG_ALGORITHM};
use crate::model::Variant;
use crate::periodicity::{Analysis, Baseline, Color, ColorRun};

pub const SCHEMA_VERSION: u32 = 1;

/// Column names of the CSV table, in order.
pub const CSV_COLUMNS: [&str; 7] = ["state", "k", "cycle", "p", "logp", "R", "color"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMetadata {
    pub input: String,
    pub length: usize,
    pub alphabet: String,
    pub d: usize,
    pub s: usize,
    pub variant: Variant,
    pub warmup_cycles: usize,
    pub estimation: EstimationConfig,
    /// Present when the input carries a generator description.
    pub generator: Option<GeneratorSpec>,
    pub rng: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub state: char,
    pub k: usize,
    pub cycle: usize,
    pub p: f64,
    /// `None` stands for `ln 0`.
    pub logp: Option<f64>,
    #[serde(rename = "R")]
    pub ratio: Option<f64>,
    pub color: Option<Color>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionRuns {
    pub state: char,
    pub k: usize,
    pub runs: Vec<ColorRun>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub schema_version: u32,
    pub metadata: ReportMetadata,
    /// First-cycle probabilities of whole-sequence fits, alphabet order;
    /// `by_position[k - 1]` for coding position `k`.
    pub baseline: Baseline,
    pub rows: Vec<ReportRow>,
    pub regions: Vec<RegionRuns>,
}

impl AnalysisReport {
    pub fn new(analysis: &Analysis, generator: Option<GeneratorSpec>) -> Self {
        let config = &analysis.config;
        let alphabet: String = analysis
            .regions
            .first()
            .map(|r| r.iter().map(|a| a.symbol).collect())
            .unwrap_or_default();
        let metadata = ReportMetadata {
            input: analysis.sequence_name.clone(),
            length: analysis.length,
            alphabet,
            d: config.d,
            s: config.estimation.period,
            variant: config.variant,
            warmup_cycles: config.warmup_cycles,
            estimation: config.estimation.clone(),
            rng: generator.as_ref().map(|_| RNG_ALGORITHM.to_string()),
            generator,
        };

        let mut rows = Vec::new();
        let mut regions = Vec::new();
        for (k, (profile, annotations)) in analysis.profiles.iter().zip(&analysis.regions).enumerate() {
            for ann in annotations {
                for (c, entry) in profile.cycles.iter().enumerate() {
                    let logp = entry.log_p[ann.state];
                    rows.push(ReportRow {
                        state: ann.symbol,
                        k: k + 1,
                        cycle: c + 1,
                        p: logp.exp(),
                        logp: (logp > f64::NEG_INFINITY).then_some(logp),
                        ratio: entry.ratio[ann.state],
                        color: ann.colors[c],
                    });
                }
                regions.push(RegionRuns {
                    state: ann.symbol,
                    k: k + 1,
                    runs: ann.runs.clone(),
                });
            }
        }
        Self {
            schema_version: SCHEMA_VERSION,
            metadata,
            baseline: analysis.baseline.clone(),
            rows,
            regions,
        }
    }

    /// One row per (state, k, cycle); empty cells for absent `R` and color,
    /// `-inf` for `ln 0`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| match e.into_kind() {
            csv::ErrorKind::Io(e) => Error::Io(e),
            other => Error::Format(format!("{other:?}")),
        };
        w.write_record(CSV_COLUMNS).map_err(io)?;
        for r in &self.rows {
            w.write_record([
                r.state.to_string(),
                r.k.to_string(),
                r.cycle.to_string(),
                r.p.to_string(),
                r.logp.map_or_else(|| "-inf".to_string(), |v| v.to_string()),
                r.ratio.map(|v| v.to_string()).unwrap_or_default(),
                r.color.map(|c| c.to_string()).unwrap_or_default(),
            ])
            .map_err(io)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_json<W: Write>(&self, out: W) -> Result<()> {
        serde_json::to_writer_pretty(out, self).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn read_json<R: Read>(input: R) -> Result<Self> {
        let report: Self = serde_json::from_reader(input).map_err(|e| Error::Format(e.to_string()))?;
        if report.schema_version != SCHEMA_VERSION {
            return Err(Error::Format(format!(
                "unsupported report schema version {}",
                report.schema_version
            )));
        }
        Ok(report)
    }

    /// Runs of `color` for one state and 1-based coding position.
    pub fn runs(&self, state: char, k: usize, color: Color) -> impl Iterator<Item = &ColorRun> {
        self.regions
            .iter()
            .filter(move |r| r.state == state && r.k == k)
            .flat_map(|r| r.runs.iter())
            .filter(move |run| run.color == color)
    }
}

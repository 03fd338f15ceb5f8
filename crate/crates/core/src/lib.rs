//! Discrete-time semi-Markov chains for detecting d-periodic structure in
//! symbol sequences such as DNA.
//!
//! The crate models a sequence as a realization of a semi-Markov chain whose
//! states are the alphabet symbols, estimates the chain from data, and tracks
//! the probability that each symbol reappears every `d` positions over
//! successive cycles. The per-cycle ratio of those probabilities, and whether
//! it rises or falls, marks candidate periodic regions.

pub mod error;
pub mod estimate;
pub mod generate;
pub mod model;
pub mod nh;
pub mod periodicity;
pub mod report;
pub mod sequence;
pub mod states;

pub use error::{Error, Result};
pub use estimate::{
    estimate_homogeneous, estimate_nh, extract_runs, rolling_estimate, EstimationConfig, HoldingEstimator,
    RollingEstimator, Run, RunLengthEncoding, ZeroRowPolicy,
};
pub use generate::{
    generate, mc_return_probability, random_model, random_nh_model, simulate_smc, GeneratorKind,
    GeneratorSpec, McEstimate,
};
pub use model::{
    build_core, interval_transition_closed, interval_transition_recursive, return_probability,
    waiting_time_pmf, CoreSequence, IntervalKernel, Matrix, SemiMarkovKernel, SemiMarkovModel, Variant,
    Vector, WaitingTail,
};
pub use nh::{
    nh_interval_closed, nh_interval_recursive, nh_return_probability, nh_waiting_time_pmf, NHIntervalKernel,
    NHSemiMarkovModel,
};
pub use periodicity::{
    analyze_sequence, color_regions, cycle_probabilities, nh_cycle_probabilities, ratio_series, Analysis,
    AnalysisConfig, Baseline, Color, ColorRun, CycleEntry, CycleProfile, RegionAnnotation,
};
pub use report::{AnalysisReport, ReportMetadata, ReportRow};
pub use sequence::{read_sequence, InputFormat, ReadOptions, SymbolSequence, UnknownPolicy};
pub use states::StateSpace;

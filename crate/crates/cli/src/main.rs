//! `dnaperiod`: generate synthetic sequences, estimate semi-Markov models and
//! report d-periodicity profiles.
//!
//! Exit status is 0 on success, 1 on bad input or arguments and 2 when
//! `verify` finds a kernel invariant violated.

mod verify;

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dnaperiod::generate::parse_intervals;
use dnaperiod::sequence::write_fasta;
use dnaperiod::{
    analyze_sequence, estimate_homogeneous, estimate_nh, generate, read_sequence, Analysis, AnalysisConfig,
    AnalysisReport, Color, EstimationConfig, GeneratorKind, GeneratorSpec, HoldingEstimator, InputFormat,
    ReadOptions, StateSpace, SymbolSequence, UnknownPolicy, Variant, ZeroRowPolicy,
};

#[derive(Debug, Parser)]
#[command(
    name = "dnaperiod",
    version,
    about = "Semi-Markov d-periodicity analysis of DNA sequences"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a synthetic sequence as FASTA.
    Generate(GenerateArgs),
    /// Fit a semi-Markov model to a sequence and print it as JSON.
    Estimate(EstimateArgs),
    /// Per-cycle probabilities, ratios and colors as CSV or JSON.
    Analyze(AnalyzeArgs),
    /// List GREEN runs per state and coding position.
    Detect(DetectArgs),
    /// Check closed-form kernels against the recursion on random models.
    Verify(verify::VerifyArgs),
}

#[derive(Debug, Args)]
struct GenerateArgs {
    #[arg(long, value_parser = parse_kind)]
    kind: GeneratorKind,
    #[arg(long, default_value_t = 1000)]
    length: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 3)]
    period: usize,
    #[arg(long, default_value_t = 'A')]
    letter: char,
    /// Comma-separated 1-based inclusive ranges, e.g. 1500-2000,3000-3500.
    #[arg(long)]
    intervals: Option<String>,
    /// FASTA record name; defaults to `<kind>_seed<seed>`.
    #[arg(long)]
    name: Option<String>,
    #[arg(long, default_value_t = 60)]
    width: usize,
    /// Output path; standard output when omitted.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct InputArgs {
    /// Sequence file, or `-` for standard input.
    input: String,
    #[arg(long = "input-format", default_value = "auto", value_parser = parse_format)]
    input_format: InputFormat,
    #[arg(long, default_value = "skip-unknown", value_parser = parse_policy)]
    unknown: UnknownPolicy,
    /// 1-based FASTA record to read.
    #[arg(long, default_value_t = 1)]
    record: usize,
}

#[derive(Debug, Args)]
struct ModelArgs {
    /// Number of coding positions (period of non-homogeneity).
    #[arg(long, default_value_t = 3)]
    s: usize,
    #[arg(long = "m-max", env = "DNAPERIOD_M_MAX", default_value_t = dnaperiod::model::DEFAULT_M_MAX)]
    m_max: usize,
    #[arg(long = "zero-row", default_value = "uniform-offdiagonal", value_parser = parse_zero_row)]
    zero_row: ZeroRowPolicy,
    /// Close the final run by wrapping around instead of dropping it.
    #[arg(long = "keep-censored")]
    keep_censored: bool,
    #[arg(long = "holding-estimator", default_value = "pair-conditional", value_parser = parse_holding)]
    holding_estimator: HoldingEstimator,
}

impl ModelArgs {
    fn config(&self) -> EstimationConfig {
        EstimationConfig {
            period: self.s,
            m_max: self.m_max,
            zero_row_policy: self.zero_row,
            drop_censored_final_run: !self.keep_censored,
            holding_estimator: self.holding_estimator,
        }
    }
}

#[derive(Debug, Args)]
struct EstimateArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct AnalysisArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, default_value_t = 3)]
    d: usize,
    #[arg(long, default_value = "paper-survival", value_parser = parse_variant)]
    variant: Variant,
    #[arg(long, env = "DNAPERIOD_WARMUP", default_value_t = dnaperiod::estimate::DEFAULT_WARMUP_CYCLES)]
    warmup: usize,
}

impl AnalysisArgs {
    fn run(&self) -> Result<(SymbolSequence, Analysis), CliError> {
        let seq = load(&self.input)?;
        let config = AnalysisConfig {
            d: self.d,
            estimation: self.model.config(),
            warmup_cycles: self.warmup,
            variant: self.variant,
        };
        let analysis = analyze_sequence(&seq, &config)?;
        Ok((seq, analysis))
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ReportFormat {
    Csv,
    Json,
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    analysis: AnalysisArgs,
    #[arg(long, value_enum, default_value_t = ReportFormat::Csv)]
    format: ReportFormat,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct DetectArgs {
    #[command(flatten)]
    analysis: AnalysisArgs,
    /// Restrict to one state; all states by default.
    #[arg(long)]
    state: Option<char>,
    /// Restrict to one 1-based coding position.
    #[arg(long)]
    k: Option<usize>,
    /// Shortest run to report, in cycles.
    #[arg(long = "min-length", default_value_t = 1)]
    min_length: usize,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

/// Error carrying its exit status.
#[derive(Debug)]
struct CliError {
    code: u8,
    message: String,
}

impl From<dnaperiod::Error> for CliError {
    fn from(e: dnaperiod::Error) -> Self {
        match e {
            dnaperiod::Error::Io(io) => io.into(),
            other => usage(other.to_string()),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        // a closed pipe (`| head`) is a normal way for a reader to stop
        let code = if e.kind() == io::ErrorKind::BrokenPipe {
            0
        } else {
            1
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

fn usage(message: impl Into<String>) -> CliError {
    CliError {
        code: 1,
        message: message.into(),
    }
}

fn parse_with<T: std::str::FromStr<Err = dnaperiod::Error>>(s: &str) -> Result<T, String> {
    s.parse().map_err(|e: dnaperiod::Error| e.to_string())
}

fn parse_kind(s: &str) -> Result<GeneratorKind, String> {
    parse_with(s)
}

fn parse_format(s: &str) -> Result<InputFormat, String> {
    parse_with(s)
}

fn parse_policy(s: &str) -> Result<UnknownPolicy, String> {
    parse_with(s)
}

fn parse_zero_row(s: &str) -> Result<ZeroRowPolicy, String> {
    parse_with(s)
}

fn parse_holding(s: &str) -> Result<HoldingEstimator, String> {
    parse_with(s)
}

fn parse_variant(s: &str) -> Result<Variant, String> {
    parse_with(s)
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| usage(format!("cannot create {}: {e}", p.display())))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn load(args: &InputArgs) -> Result<SymbolSequence, CliError> {
    if args.record == 0 {
        return Err(usage("--record is 1-based"));
    }
    let options = ReadOptions {
        format: args.input_format,
        policy: args.unknown,
        record: args.record - 1,
    };
    let states = StateSpace::dna();
    let seq = if args.input == "-" {
        read_sequence(io::stdin().lock(), &states, &options, "stdin")?
    } else {
        let path = Path::new(&args.input);
        let file = File::open(path).map_err(|e| usage(format!("cannot open {}: {e}", path.display())))?;
        let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or("input");
        read_sequence(BufReader::new(file), &states, &options, name)?
    };
    Ok(seq)
}

fn cmd_generate(args: &GenerateArgs) -> Result<(), CliError> {
    let intervals = match &args.intervals {
        Some(text) => parse_intervals(text)?,
        None => Vec::new(),
    };
    if args.kind == GeneratorKind::Embedded && intervals.is_empty() {
        return Err(usage("--kind embedded needs --intervals"));
    }
    let spec = GeneratorSpec {
        kind: args.kind,
        length: args.length,
        period: args.period,
        letter: args.letter.to_ascii_uppercase(),
        intervals,
        seed: args.seed,
    };
    let seq = generate(&spec, &StateSpace::dna())?;
    let name = args
        .name
        .clone()
        .unwrap_or_else(|| format!("{}_seed{}", spec.kind.as_str(), spec.seed));
    let mut out = open_output(args.out.as_deref())?;
    write_fasta(&mut out, &format!("{name} {}", spec.describe()), &seq, args.width)?;
    out.flush()?;
    Ok(())
}

fn cmd_estimate(args: &EstimateArgs) -> Result<(), CliError> {
    let seq = load(&args.input)?;
    let config = args.model.config();
    let mut out = open_output(args.out.as_deref())?;
    let json = if config.period == 1 {
        serde_json::to_string_pretty(&estimate_homogeneous(&seq, &config)?)
    } else {
        serde_json::to_string_pretty(&estimate_nh(&seq, &config)?)
    };
    writeln!(out, "{}", json.map_err(|e| usage(e.to_string()))?)?;
    out.flush()?;
    Ok(())
}

fn cmd_analyze(args: &AnalyzeArgs) -> Result<(), CliError> {
    let (seq, analysis) = args.analysis.run()?;
    let report = AnalysisReport::new(&analysis, GeneratorSpec::from_description(seq.description()));
    let mut out = open_output(args.out.as_deref())?;
    match args.format {
        ReportFormat::Csv => report.write_csv(&mut out)?,
        ReportFormat::Json => {
            report.write_json(&mut out)?;
            writeln!(out)?;
        }
    }
    out.flush()?;
    Ok(())
}

fn cmd_detect(args: &DetectArgs) -> Result<(), CliError> {
    let state = args.state.map(|c| c.to_ascii_uppercase());
    if let Some(c) = state {
        StateSpace::dna().require(c)?;
    }
    let (_, analysis) = args.analysis.run()?;
    let s = analysis.profiles.len();
    if let Some(k) = args.k {
        if k == 0 || k > s {
            return Err(usage(format!("--k must be between 1 and {s}")));
        }
    }
    let d = analysis.config.d;
    let mut out = open_output(args.out.as_deref())?;
    writeln!(
        out,
        "state,k,start_cycle,end_cycle,cycles,start_position,end_position"
    )?;
    for (k, regions) in analysis.regions.iter().enumerate() {
        if args.k.is_some_and(|want| want != k + 1) {
            continue;
        }
        for ann in regions {
            if state.is_some_and(|c| c != ann.symbol) {
                continue;
            }
            let green = ann
                .runs
                .iter()
                .filter(|r| r.color == Color::Green && r.len() >= args.min_length);
            for run in green {
                // cycle n spans positions (n-1)d+k+1 ..= nd+k
                let first = (run.start - 1) * d + k + 1;
                let last = (run.end * d + k).min(analysis.length);
                writeln!(
                    out,
                    "{},{},{},{},{},{first},{last}",
                    ann.symbol,
                    k + 1,
                    run.start,
                    run.end,
                    run.len()
                )?;
            }
        }
    }
    out.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Generate(a) => cmd_generate(a),
        Command::Estimate(a) => cmd_estimate(a),
        Command::Analyze(a) => cmd_analyze(a),
        Command::Detect(a) => cmd_detect(a),
        Command::Verify(a) => verify::run(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.code == 0 => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("dnaperiod: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

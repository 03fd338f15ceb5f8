//! `verify`: closed form against recursion on seeded random models.

use clap::Args;
use dnaperiod::{
    interval_transition_closed, interval_transition_recursive, nh_interval_closed, nh_interval_recursive,
    random_model, random_nh_model, Matrix, StateSpace,
};

use crate::CliError;

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Largest n checked.
    #[arg(long, default_value_t = 12)]
    n: usize,
    /// Number of homogeneous models; half as many period-s models follow.
    #[arg(long, default_value_t = 20)]
    models: usize,
    /// Seed of the first model; model i uses seed + i.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Models cycle through holding horizons 1..=m-max.
    #[arg(long = "m-max", default_value_t = 6)]
    m_max: usize,
    #[arg(long, default_value_t = 3)]
    s: usize,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Negative control: add this to entry (0,0) of every closed-form matrix.
    #[arg(long, default_value_t = 0.0)]
    perturb: f64,
}

fn max_abs(a: &Matrix, b: &Matrix) -> f64 {
    (a - b).iter().fold(0.0, |m, v| m.max(v.abs()))
}

fn row_error(q: &Matrix) -> f64 {
    q.rows()
        .into_iter()
        .map(|r| (r.sum() - 1.0).abs())
        .fold(0.0, f64::max)
}

struct Check {
    diff: f64,
    rows: f64,
}

impl Check {
    fn new() -> Self {
        Self { diff: 0.0, rows: 0.0 }
    }

    fn add(&mut self, closed: &Matrix, recursive: &Matrix) {
        self.diff = self.diff.max(max_abs(closed, recursive));
        self.rows = self.rows.max(row_error(closed)).max(row_error(recursive));
    }
}

pub fn run(args: &VerifyArgs) -> Result<(), CliError> {
    if args.m_max == 0 || args.s == 0 {
        return Err(crate::usage("--m-max and --s must be at least 1"));
    }
    let states = StateSpace::dna();
    let perturb = |mut q: Matrix| {
        q[[0, 0]] += args.perturb;
        q
    };
    let mut failed = Vec::new();
    let mut report = |kind: &str, seed: u64, m: usize, check: Check| {
        let ok = check.diff <= args.tol && check.rows <= args.tol;
        println!(
            "{kind} seed={seed} m_max={m}: max|closed-recursive|={:.2e} max|row sum-1|={:.2e} {}",
            check.diff,
            check.rows,
            if ok { "ok" } else { "FAIL" }
        );
        if !ok {
            failed.push(seed);
        }
    };

    for i in 0..args.models {
        let seed = args.seed + i as u64;
        let m = 1 + i % args.m_max;
        let model = random_model(&states, m, seed)?;
        let q = interval_transition_recursive(&model, args.n);
        let mut check = Check::new();
        for (n, rec) in q.matrices().iter().enumerate() {
            check.add(&perturb(interval_transition_closed(&model, n)), rec);
        }
        report("homogeneous", seed, m, check);
    }
    for i in 0..args.models / 2 {
        let seed = args.seed + (args.models + i) as u64;
        let m = 1 + i % args.m_max.min(4);
        let model = random_nh_model(&states, args.s, m, seed)?;
        let q = nh_interval_recursive(&model, args.n);
        let mut check = Check::new();
        for k in 0..args.s {
            for n in 0..=args.n {
                let closed = perturb(nh_interval_closed(&model, k, n)?);
                check.add(&closed, q.get(k, n).expect("within n_max"));
            }
        }
        report("period-s", seed, m, check);
    }

    if failed.is_empty() {
        println!("verify: pass");
        Ok(())
    } else {
        let seeds: Vec<String> = failed.iter().map(u64::to_string).collect();
        Err(CliError {
            code: 2,
            message: format!("invariant violated for model seed(s) {}", seeds.join(", ")),
        })
    }
}

//! `yangw check <suite> [flags]`: run one verification suite and emit a JSON report.
//!
//! Exit status: 0 when every instance passes, 1 on a verification failure,
//! 2 on bad parameters.

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;
use yangw_core::{run, CheckParams, Suite, SuiteError};

/// Environment variable holding the worker count.
const WORKERS_ENV: &str = "YANGW_WORKERS";

#[derive(Parser)]
#[command(name = "yangw", version, about = "Exact checks of affine Yangian and W-algebra identities")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a verification suite.
    Check(CheckArgs),
}

#[derive(Args)]
struct CheckArgs {
    /// yang-ev, yang-psi, yang-coproduct, yang-deltal, d0-kernel, ope-lemma,
    /// hojo, miura-split, extended or parabolic-compat
    suite: String,
    /// Column heights, e.g. 4,3
    #[arg(long, value_delimiter = ',', default_value = "3,3")]
    q: Vec<usize>,
    /// Pivot column (default: first tallest column)
    #[arg(long)]
    v: Option<usize>,
    /// Split after column w
    #[arg(long, default_value_t = 1)]
    w: usize,
    /// Rank for the Yangian suites
    #[arg(long, default_value_t = 3)]
    n: usize,
    #[arg(long, default_value_t = 3)]
    m: usize,
    /// Added rows for edge contraction and the extended relations
    #[arg(long, default_value_t = 1)]
    add: usize,
    #[arg(long, default_value_t = 2)]
    depth: u32,
    /// Restrict --diagnose to H_{i,1}
    #[arg(long)]
    i: Option<usize>,
    #[arg(long)]
    diagnose: bool,
    /// Coproduct sign, + or - (default: both)
    #[arg(long, allow_hyphen_values = true)]
    sign: Option<char>,
    /// L or R (default: both)
    #[arg(long)]
    side: Option<char>,
    /// Loop degrees |x| ≤ xmax for the extended relations
    #[arg(long, default_value_t = 2)]
    xmax: i32,
    /// Use the uncorrected sign and constant conventions
    #[arg(long)]
    literal: bool,
    /// Apply the suite's canonical mutation
    #[arg(long)]
    mutate: bool,
    /// Write the report here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

fn usage(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(2)
}

fn init_workers() -> Result<(), String> {
    let Ok(v) = std::env::var(WORKERS_ENV) else { return Ok(()) };
    let n: usize = v.parse().map_err(|_| format!("{WORKERS_ENV} must be a positive integer, got {v:?}"))?;
    if n == 0 {
        return Err(format!("{WORKERS_ENV} must be positive"));
    }
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let Cmd::Check(a) = Cli::parse().cmd;
    if let Err(e) = init_workers() {
        return usage(e);
    }
    let suite: Suite = match a.suite.parse() {
        Ok(s) => s,
        Err(SuiteError::Usage(e)) => return usage(e),
    };
    let params = CheckParams {
        q: a.q,
        v: a.v,
        w: a.w,
        n: a.n,
        m: a.m,
        add: a.add,
        depth: a.depth,
        i: a.i,
        diagnose: a.diagnose,
        sign: a.sign,
        side: a.side,
        xmax: a.xmax,
        literal: a.literal,
        mutate: a.mutate,
    };
    let report = match run(suite, &params) {
        Ok(r) => r,
        Err(SuiteError::Usage(e)) => return usage(e),
    };
    let json = report.to_json();
    match &a.out {
        Some(p) => {
            if let Err(e) = std::fs::write(p, json + "\n") {
                eprintln!("error: cannot write {}: {e}", p.display());
                return ExitCode::from(2);
            }
        }
        None => println!("{json}"),
    }
    let failed = report.failures().count();
    eprintln!("{suite}: {} instances, {failed} failed, {:.2}s", report.instances.len(), report.wall_time);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

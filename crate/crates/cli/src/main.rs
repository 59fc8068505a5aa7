//! `latmax` — analyze the stable-lattice complex of a representation.
//!
//! Exit codes: 0 success, 2 input/schema errors, 3 precision exhaustion,
//! 4 diameter/cap guards ("possibly reducible"), 5 failed theorem
//! verdicts.

use clap::{Parser, Subcommand};
use latmax_core::error::Error;
use latmax_core::report::{analyze_checked, ascend_trace};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "latmax", version, about = "Stable lattices, maximal vertices and extension graphs over discretely valued fields")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct CommonArgs {
    /// Path to the JSON job document
    spec: PathBuf,

    /// Write the output here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,

    /// Override the working precision N (the run is re-checked at N+4)
    #[arg(long)]
    precision: Option<u32>,

    /// Override the diameter guard
    #[arg(long)]
    max_diameter: Option<u32>,
}

#[derive(Subcommand)]
enum Command {
    /// Full analysis: complex, flags, factors, graph, all theorem verdicts (JSON)
    Analyze(CommonArgs),
    /// Export the invariant complex as DOT
    Complex(CommonArgs),
    /// Export the extension graph as DOT
    Graph(CommonArgs),
    /// Ascend from the base lattice normalised at a vector; print the
    /// vertex key and the ascent trace
    Maximal {
        #[command(flatten)]
        common: CommonArgs,
        /// Integer coordinates "c1,...,cn" of the vector
        #[arg(long)]
        vector: String,
    },
    /// Run the invariant suite at N and N+4; non-zero exit on any failure
    Check(CommonArgs),
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), Error> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(Error::from),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run() -> Result<bool, Error> {
    let cli = Cli::parse();
    match cli.command {
        Command::Analyze(args) => {
            let text = std::fs::read_to_string(&args.spec)?;
            let (analysis, report) = analyze_checked(&text, args.precision, args.max_diameter)?;
            emit(&args.out, &(report.to_json() + "\n"))?;
            Ok(analysis.all_verdicts_pass())
        }
        Command::Complex(args) => {
            let text = std::fs::read_to_string(&args.spec)?;
            let (analysis, _) = analyze_checked(&text, args.precision, args.max_diameter)?;
            emit(&args.out, &analysis.complex_dot())?;
            Ok(true)
        }
        Command::Graph(args) => {
            let text = std::fs::read_to_string(&args.spec)?;
            let (analysis, _) = analyze_checked(&text, args.precision, args.max_diameter)?;
            emit(&args.out, &analysis.graph_dot())?;
            Ok(true)
        }
        Command::Maximal { common, vector } => {
            let text = std::fs::read_to_string(&common.spec)?;
            let mut spec = latmax_core::jobspec::parse_spec(&text)?;
            if let Some(p) = common.precision {
                spec.precision = p;
            }
            if let Some(d) = common.max_diameter {
                spec.max_diameter = d;
            }
            let ints: Result<Vec<i64>, _> =
                vector.split(',').map(|s| s.trim().parse::<i64>()).collect();
            let ints = ints.map_err(|e| Error::Spec(format!("bad --vector: {e}")))?;
            let (rep, base) = spec.load()?;
            if ints.len() != rep.dim() {
                return Err(Error::Spec(format!(
                    "--vector has {} entries, expected {}",
                    ints.len(),
                    rep.dim()
                )));
            }
            let (key, trace) = ascend_trace(&rep, &base, &ints)?;
            // re-run at N+4 and fail loudly on disagreement
            let spec_hi = spec.with_precision(spec.precision + 4);
            let (rep_hi, base_hi) = spec_hi.load()?;
            let (key_hi, trace_hi) = ascend_trace(&rep_hi, &base_hi, &ints)?;
            if key != key_hi || trace != trace_hi {
                return Err(Error::PrecisionExhausted(format!(
                    "ascent differs between precision {} and {}",
                    spec.precision,
                    spec.precision + 4
                )));
            }
            let mut out = String::new();
            for (i, k) in trace.iter().enumerate() {
                out.push_str(&format!("step {i}: {k}\n"));
            }
            out.push_str(&format!("maximal vertex: {key}\n"));
            emit(&common.out, &out)?;
            Ok(true)
        }
        Command::Check(args) => {
            let text = std::fs::read_to_string(&args.spec)?;
            let (analysis, _) = analyze_checked(&text, args.precision, args.max_diameter)?;
            let mut all_pass = true;
            let mut out = String::new();
            for v in &analysis.verdicts {
                out.push_str(&format!(
                    "{} {} — {}\n",
                    if v.pass { "PASS" } else { "FAIL" },
                    v.name,
                    v.detail
                ));
                all_pass &= v.pass;
            }
            out.push_str(&format!(
                "PASS precision_stability — payload identical at N={} and N={}\n",
                analysis.spec.precision,
                analysis.spec.precision + 4
            ));
            emit(&args.out, &out)?;
            Ok(all_pass)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("error: one or more theorem verdicts failed");
            ExitCode::from(5)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

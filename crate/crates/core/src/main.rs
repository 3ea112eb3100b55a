use clap::Parser;
use flatmoduli::cli::{execute, parse_config, Command};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

const USAGE_ERROR: u8 = 3;

/// Flat connections over complex tori: identity checks, canonical forms,
/// moduli descriptions, holonomy and Hodge certificates.
#[derive(Parser, Debug)]
#[command(name = "flatmoduli", version)]
struct Args {
    /// One of verify-identities, hodge-decompose, canonicalize, reconstruct,
    /// classify, holonomy, certify-hodge, picard.
    command: String,
    /// JSON job configuration.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the seed of the configuration.
    #[arg(long)]
    seed: Option<u64>,
    /// Report path; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print a one-line summary to standard error.
    #[arg(short, long)]
    verbose: bool,
}

fn usage(msg: &str) -> ExitCode {
    eprintln!("flatmoduli: {msg}");
    ExitCode::from(USAGE_ERROR)
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { USAGE_ERROR } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let command: Command = match args.command.parse() {
        Ok(c) => c,
        Err(e) => return usage(&e.to_string()),
    };
    let text = match std::fs::read_to_string(&args.config) {
        Ok(t) => t,
        Err(e) => return usage(&format!("cannot read {}: {e}", args.config.display())),
    };
    let mut cfg = match parse_config(&text) {
        Ok(c) => c,
        Err(e) => return usage(&format!("{}: {e}", args.config.display())),
    };
    if let Some(c) = cfg.command {
        if c != command {
            return usage(&format!("configuration is for {c}, not {command}"));
        }
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    let report = match execute(&cfg, command) {
        Ok(r) => r,
        Err(e) => return usage(&e.to_string()),
    };
    let stamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs().to_string()).ok();
    let written = match &args.out {
        Some(p) => std::fs::File::create(p)
            .map_err(flatmoduli::Error::from)
            .and_then(|f| report.write_jsonl(std::io::BufWriter::new(f), stamp.as_deref())),
        None => report.write_jsonl(std::io::stdout().lock(), stamp.as_deref()),
    };
    if let Err(e) = written {
        eprintln!("flatmoduli: cannot write report: {e}");
        return ExitCode::from(1);
    }
    let outcome = report.outcome();
    if args.verbose {
        eprintln!("{command}: {outcome:?}");
    }
    ExitCode::from(outcome.exit_code() as u8)
}

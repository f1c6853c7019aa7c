//! Command-line front end for the chipfire library.
//!
//! Every subcommand is a thin adapter: parse flags, make one library call,
//! format the result. Exit codes: 0 success, 1 a verification or
//! cross-check failure, 2 usage error, 3 a resource cap refused the work.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use chipfire::{formulas, sequences, simulate, verify};
use chipfire::{Error, Permutation, TreeParams};

const SIM_CAP_ENV: &str = "CHIPFIRE_SIM_CAP";

const EXIT_FAILURE: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_CAPPED: u8 = 3;

#[derive(Parser)]
#[command(
    name = "chipfire",
    version,
    about = "Labeled chip-firing on infinite directed k-ary trees",
    long_about = "Computes stable arrangements of k^n labeled chips fired down an \
                  infinite k-ary tree, their inversion and descent statistics, the \
                  attainable-value spectra, and runs the full verification suite."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the stable arrangement for one strategy.
    Stable {
        /// Branching factor, at least 2.
        #[arg(long)]
        k: u32,
        /// Exponent: the tree starts with k^n chips.
        #[arg(long)]
        n: u32,
        /// Routing permutation of 1..=n, as "3,1,2" or "312" (digits only for n <= 9).
        #[arg(long)]
        perm: String,
        #[arg(long, value_enum, default_value_t = Method::Formula)]
        method: Method,
        /// Override the chip materialization cap (default 2^24, or CHIPFIRE_SIM_CAP).
        #[arg(long)]
        cap: Option<u64>,
        #[arg(long, value_enum, default_value_t = Format::Plain)]
        format: Format,
        /// Write to a file instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Code, support, inversion and descent statistics for one strategy.
    Stats {
        #[arg(long)]
        k: u32,
        #[arg(long)]
        n: u32,
        #[arg(long)]
        perm: String,
        #[arg(long)]
        cap: Option<u64>,
        #[arg(long, value_enum, default_value_t = Format::Plain)]
        format: Format,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run the firing process explicitly, optionally streaming layer snapshots.
    Simulate {
        #[arg(long)]
        k: u32,
        #[arg(long)]
        n: u32,
        #[arg(long)]
        perm: String,
        /// Emit one JSON line per settled layer before the final arrangement.
        #[arg(long)]
        trace: bool,
        #[arg(long)]
        cap: Option<u64>,
        #[arg(long, value_enum, default_value_t = Format::Plain)]
        format: Format,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Emit an inversion spectrum or the limit sequence it converges to.
    Sequence {
        #[arg(long)]
        k: u32,
        /// Spectrum exponent; mutually exclusive with --limit.
        #[arg(long)]
        n: Option<u32>,
        /// Divide out the shared factor k^n (k-1)^2 / 4 (only with --n).
        #[arg(long)]
        normalized: bool,
        /// Emit this many terms of the limit sequence instead of one spectrum.
        #[arg(long)]
        limit: Option<usize>,
        #[arg(long, value_enum, default_value_t = Format::Plain)]
        format: Format,
        /// Start indexed output at 0 instead of 1 (csv and bfile).
        #[arg(long)]
        zero_based: bool,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run the named check suite over a grid of shapes.
    Verify {
        /// Single value "2" or inclusive range "2..3".
        #[arg(long, value_parser = parse_range, default_value = "2..3")]
        k: RangeInclusive<u32>,
        /// Single value "4" or inclusive range "0..4".
        #[arg(long, value_parser = parse_range, default_value = "0..4")]
        n: RangeInclusive<u32>,
        /// low, normal, high, or a raw step count.
        #[arg(long, default_value = "normal", value_parser = parse_budget)]
        budget: verify::Budget,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Worker threads for the check suite (default: all cores).
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Per-strategy summary table: one row for each of the n! permutations.
    Table {
        #[arg(long)]
        k: u32,
        #[arg(long)]
        n: u32,
        #[arg(long)]
        cap: Option<u64>,
        #[arg(long, value_enum, default_value_t = Format::Plain)]
        format: Format,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Method {
    Formula,
    Simulate,
    Both,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Format {
    Plain,
    Json,
    Csv,
    Bfile,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure { code, message }) => {
            eprintln!("error: {message}");
            ExitCode::from(code)
        }
    }
}

struct Failure {
    code: u8,
    message: String,
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message: message.into(),
    }
}

fn failure(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_FAILURE,
        message: message.into(),
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::ResourceCap { .. } => EXIT_CAPPED,
            // An internal cross-check tripping is a real failure, not misuse.
            Error::SelfCheck(_) => EXIT_FAILURE,
            _ => EXIT_USAGE,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Stable {
            k,
            n,
            perm,
            method,
            cap,
            format,
            output,
        } => cmd_stable(k, n, &perm, method, cap, format, output.as_deref()),
        Command::Stats {
            k,
            n,
            perm,
            cap,
            format,
            output,
        } => cmd_stats(k, n, &perm, cap, format, output.as_deref()),
        Command::Simulate {
            k,
            n,
            perm,
            trace,
            cap,
            format,
            output,
        } => cmd_simulate(k, n, &perm, trace, cap, format, output.as_deref()),
        Command::Sequence {
            k,
            n,
            normalized,
            limit,
            format,
            zero_based,
            output,
        } => cmd_sequence(k, n, normalized, limit, format, zero_based, output.as_deref()),
        Command::Verify {
            k,
            n,
            budget,
            seed,
            threads,
            output,
        } => cmd_verify(k, n, budget, seed, threads, output.as_deref()),
        Command::Table {
            k,
            n,
            cap,
            format,
            output,
        } => cmd_table(k, n, cap, format, output.as_deref()),
    }
}

// --- commands ----------------------------------------------------------

fn cmd_stable(
    k: u32,
    n: u32,
    perm: &str,
    method: Method,
    cap: Option<u64>,
    format: Format,
    output: Option<&Path>,
) -> Result<(), Failure> {
    let (params, w) = parse_shape(k, n, perm, cap)?;
    let text = match method {
        Method::Formula => render_config(&formulas::stable_config(&params, &w)?, format)?,
        Method::Simulate => render_config(&simulate::run_strategy(&params, &w)?, format)?,
        Method::Both => {
            let placed = formulas::stable_config(&params, &w)?;
            let fired = simulate::run_strategy(&params, &w)?;
            if placed != fired {
                return Err(failure(format!(
                    "formula and simulation disagree for k={k} n={n} w={perm}: \
                     {placed} vs {fired}"
                )));
            }
            match format {
                Format::Plain => format!("{placed} [formula==simulation]"),
                Format::Json => serde_json::json!({
                    "k": k, "n": n,
                    "chips": placed.chips().iter().map(|c| c.0).collect::<Vec<_>>(),
                    "methods_agree": true,
                })
                .to_string(),
                _ => return Err(usage("stable supports --format plain or json")),
            }
        }
    };
    emit(&text, output)
}

fn render_config(
    config: &chipfire::Configuration,
    format: Format,
) -> Result<String, Failure> {
    match format {
        Format::Plain => Ok(config.to_string()),
        Format::Json => Ok(config.to_json().to_string()),
        _ => Err(usage("stable supports --format plain or json")),
    }
}

fn cmd_stats(
    k: u32,
    n: u32,
    perm: &str,
    cap: Option<u64>,
    format: Format,
    output: Option<&Path>,
) -> Result<(), Failure> {
    let (params, w) = parse_shape(k, n, perm, cap)?;
    let code = w.lehmer_code();
    let support = code.support();
    let inversions = formulas::inversion_count(&params, &code)?;
    let descents = formulas::descent_count(&params, &code)?;
    // The set can be exponentially larger than the count; respect the gate.
    let descent_set = match formulas::descent_set(&params, &code) {
        Ok(set) => Some(set),
        Err(Error::ResourceCap { required, .. }) => {
            if matches!(format, Format::Plain) {
                None
            } else {
                return Err(Error::ResourceCap {
                    resource: "descent set",
                    required,
                    cap: params.sim_cap() as u128,
                }
                .into());
            }
        }
        Err(e) => return Err(e.into()),
    };

    let text = match format {
        Format::Plain => {
            let set_text = match &descent_set {
                Some(set) => format_positions(set),
                None => format!("suppressed({descents} positions)"),
            };
            format!(
                "c={}, supp={}, rev_supp={}, inv={}, desc={}, set={}",
                code.compact(),
                support,
                support.reversed_indicator(n as usize),
                inversions,
                descents,
                set_text
            )
        }
        Format::Json => serde_json::json!({
            "k": k,
            "n": n,
            "w": w.values(),
            "code": code.codes(),
            "support": support.positions().iter().collect::<Vec<_>>(),
            "rev_support": support.reversed_indicator(n as usize),
            "inversions": inversions.to_string(),
            "descents": descents.to_string(),
            "descent_set": descent_set
                .as_ref()
                .map(|s| s.iter().map(|p| p.to_string()).collect::<Vec<_>>()),
        })
        .to_string(),
        _ => return Err(usage("stats supports --format plain or json")),
    };
    emit(&text, output)
}

fn cmd_simulate(
    k: u32,
    n: u32,
    perm: &str,
    trace: bool,
    cap: Option<u64>,
    format: Format,
    output: Option<&Path>,
) -> Result<(), Failure> {
    let (params, w) = parse_shape(k, n, perm, cap)?;
    let mut text = String::new();
    let config = if trace {
        let (config, snapshots) = simulate::run_strategy_traced(&params, &w)?;
        for snap in &snapshots {
            let line = serde_json::to_string(snap).expect("snapshots serialize");
            text.push_str(&line);
            text.push('\n');
        }
        config
    } else {
        simulate::run_strategy(&params, &w)?
    };
    text.push_str(&render_config(&config, format)?);
    emit(&text, output)
}

fn cmd_sequence(
    k: u32,
    n: Option<u32>,
    normalized: bool,
    limit: Option<usize>,
    format: Format,
    zero_based: bool,
    output: Option<&Path>,
) -> Result<(), Failure> {
    if k < 2 {
        return Err(usage("branching factor must be at least 2"));
    }
    let values = match (n, limit) {
        (Some(_), Some(_)) => return Err(usage("--n and --limit are mutually exclusive")),
        (None, None) => return Err(usage("one of --n or --limit is required")),
        (Some(n), None) => {
            let params = TreeParams::new(k, n)?;
            if normalized {
                sequences::normalized_spectrum(&params)?.values().to_vec()
            } else {
                sequences::inversion_spectrum(&params)?.values().to_vec()
            }
        }
        (None, Some(m)) => {
            if normalized {
                return Err(usage("--normalized applies only to --n spectra"));
            }
            sequences::limit_sequence_prefix(k, m)?
        }
    };

    let start = if zero_based { 0 } else { 1 };
    let text = match format {
        Format::Plain => values
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(","),
        Format::Csv => sequences::format_csv(&values, start),
        Format::Bfile => sequences::format_bfile(&values, start),
        Format::Json => {
            let strings: Vec<String> = values.iter().map(|v| v.to_string()).collect();
            match (n, limit) {
                (Some(n), _) => serde_json::json!({
                    "k": k, "n": n, "normalized": normalized, "values": strings,
                }),
                (None, Some(m)) => serde_json::json!({
                    "k": k, "limit": m, "values": strings,
                }),
                (None, None) => unreachable!("validated above"),
            }
            .to_string()
        }
    };
    emit(&text, output)
}

fn cmd_verify(
    ks: RangeInclusive<u32>,
    ns: RangeInclusive<u32>,
    budget: verify::Budget,
    seed: u64,
    threads: Option<usize>,
    output: Option<&Path>,
) -> Result<(), Failure> {
    if *ks.start() < 2 {
        return Err(usage("branching factor range must start at 2 or more"));
    }
    let reports = match threads {
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| usage(format!("thread pool: {e}")))?;
            pool.install(|| verify::check_all(ks, ns, &budget, seed))
        }
        None => verify::check_all(ks, ns, &budget, seed),
    };

    let mut text = String::new();
    for report in &reports {
        let line = serde_json::to_string(report).expect("reports serialize");
        text.push_str(&line);
        text.push('\n');
    }
    emit_raw(&text, output)?;

    let failed: Vec<&str> = reports
        .iter()
        .filter(|r| !r.passed())
        .map(|r| r.check.as_str())
        .collect();
    let cases: u64 = reports.iter().map(|r| r.cases).sum();
    if failed.is_empty() {
        eprintln!("{} checks passed ({cases} cases)", reports.len());
        Ok(())
    } else {
        Err(failure(format!(
            "{} of {} checks failed: {}",
            failed.len(),
            reports.len(),
            failed.join(", ")
        )))
    }
}

fn cmd_table(
    k: u32,
    n: u32,
    cap: Option<u64>,
    format: Format,
    output: Option<&Path>,
) -> Result<(), Failure> {
    let params = tree_params(k, n, cap)?;
    let rows = verify::table_rows(&params)?;
    let text = match format {
        Format::Plain => verify::render_table_plain(&rows),
        Format::Csv => verify::render_table_csv(&rows),
        Format::Json => verify::table_json(&rows).to_string(),
        Format::Bfile => return Err(usage("table supports plain, csv, or json")),
    };
    emit(&text, output)
}

// --- plumbing ----------------------------------------------------------

fn tree_params(k: u32, n: u32, cap_flag: Option<u64>) -> Result<TreeParams, Failure> {
    let params = TreeParams::new(k, n)?;
    let cap = match cap_flag {
        Some(c) => Some(c),
        None => match std::env::var(SIM_CAP_ENV) {
            Ok(raw) => Some(
                raw.parse::<u64>()
                    .map_err(|_| usage(format!("{SIM_CAP_ENV} must be an integer, got {raw:?}")))?,
            ),
            Err(_) => None,
        },
    };
    Ok(match cap {
        Some(c) => params.with_sim_cap(c),
        None => params,
    })
}

fn parse_shape(
    k: u32,
    n: u32,
    perm: &str,
    cap: Option<u64>,
) -> Result<(TreeParams, Permutation), Failure> {
    let params = tree_params(k, n, cap)?;
    let w: Permutation = perm.parse()?;
    if w.len() != n as usize {
        return Err(usage(format!(
            "permutation {perm:?} has {} entries, expected n = {n}",
            w.len()
        )));
    }
    Ok((params, w))
}

fn parse_range(s: &str) -> Result<RangeInclusive<u32>, String> {
    let parse_end = |part: &str| {
        part.trim()
            .parse::<u32>()
            .map_err(|_| format!("bad range bound {part:?}"))
    };
    if let Some((a, b)) = s.split_once("..") {
        let start = parse_end(a)?;
        let end = parse_end(b)?;
        if start > end {
            return Err(format!("empty range {s:?}"));
        }
        Ok(start..=end)
    } else {
        let v = parse_end(s)?;
        Ok(v..=v)
    }
}

fn parse_budget(s: &str) -> Result<verify::Budget, String> {
    s.parse::<verify::Budget>().map_err(|e| e.to_string())
}

fn format_positions(set: &BTreeSet<u128>) -> String {
    let mut out = String::from("{");
    for (i, p) in set.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        let _ = write!(out, "{p}");
    }
    out.push('}');
    out
}

/// Prints `text` with a final newline, to stdout or a file.
fn emit(text: &str, output: Option<&Path>) -> Result<(), Failure> {
    let mut owned = text.to_string();
    if !owned.ends_with('\n') {
        owned.push('\n');
    }
    emit_raw(&owned, output)
}

fn emit_raw(text: &str, output: Option<&Path>) -> Result<(), Failure> {
    match output {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| usage(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

//! Command-line front end.
//!
//! Every subcommand resolves its settings from flags, then an optional JSON
//! `--config` file, then built-in defaults (the seed also falls back to the
//! `CEOR_SEED` environment variable before its default). The resolved
//! settings are echoed into every JSON report, so the same arguments always
//! produce the same bytes.
//!
//! Exit status: 0 success, 1 usage error, 2 numeric or domain error, 3 when a
//! strip search stops on a counterexample.

mod args;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::Path;

use clap::Parser;
use serde::Serialize;
use serde_json::{json, Value};

use crate::ce_engine::StopReason;
use crate::decoding::{beam_decode, ToyMarkovModel};
use crate::rh_search::{write_trace_header, write_trace_rows, CeorSearch};
use crate::strip_sweep::{SweepReport, Sweeper};
use crate::zero_locator::{write_zeros_csv, ZeroScanner};
use crate::zeta_eval::{format_complex, parse_complex, zeta, zeta_functional, ComplexValue};

pub use args::{Cli, Command, Route};

/// The toy model used by `decode` when no `--model` is given.
pub const BUNDLED_MODEL: &str = include_str!("../../data/toy_markov.json");

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DOMAIN: i32 = 2;
pub const EXIT_COUNTEREXAMPLE: i32 = 3;

#[derive(Debug)]
pub(crate) enum CliError {
    Usage(String),
    Domain(String),
}

impl CliError {
    fn domain(e: impl std::fmt::Display) -> Self {
        CliError::Domain(e.to_string())
    }

    fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Domain(_) => EXIT_DOMAIN,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Domain(m) => f.write_str(m),
        }
    }
}

/// Parse `argv` (program name first), run the subcommand and return the
/// exit status. Normal output goes to `out`, diagnostics to `err`.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    // Output is buffered so the work can move onto a sized thread pool.
    let mut buffer = Vec::new();
    let result = match cli.threads {
        Some(0) => Err(CliError::Usage("--threads must be at least 1".into())),
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| dispatch(&cli, &mut buffer)),
            Err(e) => Err(CliError::domain(e)),
        },
        None => dispatch(&cli, &mut buffer),
    };
    let _ = out.write_all(&buffer);
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.code()
        }
    }
}

fn dispatch(cli: &Cli, out: &mut dyn Write) -> Result<i32, CliError> {
    let file = match &cli.config {
        Some(path) => Some(load_json(path)?),
        None => None,
    };
    let file = file.as_ref();
    match &cli.command {
        Command::Zeta(a) => cmd_zeta(&args::merge(a, file)?, cli.out.as_deref(), out),
        Command::Zeros(a) => cmd_zeros(&args::merge(a, file)?, cli.out.as_deref(), out),
        Command::Count(a) => cmd_count(&args::merge(a, file)?, cli.out.as_deref(), out),
        Command::Ceor(a) => cmd_ceor(&args::merge(a, file)?, cli.out.as_deref(), out),
        Command::Sweep(a) => cmd_sweep(&args::merge(a, file)?, cli.out.as_deref(), out),
        Command::Decode(a) => cmd_decode(&args::merge(a, file)?, cli.out.as_deref(), out),
    }
}

fn load_json(path: &Path) -> Result<Value, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|e| CliError::Domain(format!("{}: {e}", path.display())))
}

fn write_report<T: Serialize>(path: Option<&Path>, report: &T) -> Result<(), CliError> {
    if let Some(path) = path {
        let mut text = serde_json::to_string_pretty(report).map_err(CliError::domain)?;
        text.push('\n');
        write_file(path, text.as_bytes())?;
    }
    Ok(())
}

fn emit(out: &mut dyn Write, text: impl std::fmt::Display) -> Result<(), CliError> {
    writeln!(out, "{text}").map_err(CliError::domain)
}

fn cmd_zeta(a: &args::ZetaArgs, report: Option<&Path>, out: &mut dyn Write) -> Result<i32, CliError> {
    let cfg = a.eval_config()?;
    let text = a.s.as_deref().ok_or_else(|| CliError::Usage("--s is required".into()))?;
    let s = parse_complex(text).map_err(|e| CliError::Usage(e.to_string()))?;
    let value: ComplexValue = match a.route.unwrap_or_default() {
        Route::Auto => zeta(s, &cfg),
        Route::Functional => zeta_functional(s, &cfg),
        Route::Eta if s.re <= 0.0 => {
            return Err(CliError::Domain(format!("eta route needs Re(s) > 0, got {text}")));
        }
        Route::Eta => zeta(s, &cfg),
    }
    .map_err(CliError::domain)?;
    emit(out, format_complex(value))?;
    write_report(report, &json!({ "config": a.resolved()?, "value": format_complex(value) }))?;
    Ok(EXIT_OK)
}

fn cmd_zeros(a: &args::ZerosArgs, report: Option<&Path>, out: &mut dyn Write) -> Result<i32, CliError> {
    let (lo, hi, scanner) = a.range.resolve()?;
    let zeros = scanner.scan(lo, hi).map_err(CliError::domain)?;
    emit(out, zeros.len())?;
    for z in &zeros {
        emit(out, z.t)?;
    }
    if let Some(path) = &a.csv {
        let mut buf = Vec::new();
        write_zeros_csv(&zeros, &mut buf).map_err(CliError::domain)?;
        write_file(path, &buf)?;
    }
    write_report(report, &json!({ "config": a.range.resolved()?, "count": zeros.len(), "zeros": zeros }))?;
    Ok(EXIT_OK)
}

fn cmd_count(a: &args::RangeArgs, report: Option<&Path>, out: &mut dyn Write) -> Result<i32, CliError> {
    let (lo, hi, scanner) = a.resolve()?;
    let count = scanner.count_region(lo, hi).map_err(CliError::domain)?;
    emit(out, format_args!("n_online {} n_formula {} consistent {}", count.n_online, count.n_formula, count.consistent))?;
    write_report(report, &json!({ "config": a.resolved()?, "count": count }))?;
    Ok(EXIT_OK)
}

fn cmd_ceor(a: &args::CeorArgs, report: Option<&Path>, out: &mut dyn Write) -> Result<i32, CliError> {
    let (region, params, tol, jitter) = a.resolve()?;
    let search = CeorSearch::new(region, params, tol).with_jitter(jitter).with_scanner(ZeroScanner::default());
    let result = match &a.trace {
        Some(path) => {
            let mut trace = Vec::new();
            write_trace_header(&mut trace).map_err(CliError::domain)?;
            let r = search.run_observed(|round| {
                // Writes to a Vec cannot fail.
                let _ = write_trace_rows(&mut trace, round);
            });
            write_file(path, &trace)?;
            r
        }
        None => search.run(),
    }
    .map_err(CliError::domain)?;

    emit(out, format_args!("stop_reason {:?} rounds {}", result.stop_reason, result.rounds.len()))?;
    emit(out, format_args!("zeros {}", result.zeros.len()))?;
    for z in &result.zeros {
        emit(out, z.t)?;
    }
    emit(out, format_args!("counterexamples {} tracker n {} mu {}", result.counterexamples.len(), result.tracker.n, result.tracker.mu))?;
    write_report(report, &result)?;
    Ok(if result.stop_reason == StopReason::NegativeSum { EXIT_COUNTEREXAMPLE } else { EXIT_OK })
}

fn cmd_sweep(a: &args::SweepArgs, report: Option<&Path>, out: &mut dyn Write) -> Result<i32, CliError> {
    let base: Option<SweepReport> = match &a.extend {
        Some(path) => {
            Some(serde_json::from_value(load_json(path)?).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?)
        }
        None => None,
    };
    let (params, tol, jitter) = a.resolve(base.as_ref())?;
    let sweeper = Sweeper::new(params, tol).with_jitter(jitter);
    let result = match &base {
        Some(base) => {
            let extra = a.tiles.ok_or_else(|| CliError::Usage("--extend needs --tiles".into()))?;
            sweeper.extend(base, extra)
        }
        None => {
            let (lo, hi) = a.span()?;
            sweeper.sweep(lo, hi)
        }
    }
    .map_err(CliError::domain)?;

    for t in &result.tiles {
        emit(
            out,
            format_args!("[{}, {}) online {} formula {} found {} match {}", t.tile.t_lo, t.tile.t_hi, t.region_count.n_online, t.region_count.n_formula, t.ceor_zeros.len(), t.matched),
        )?;
    }
    emit(
        out,
        format_args!("total_online {} total_formula {} one_shot {} consistent {}", result.total_online, result.total_formula, result.one_shot_online, result.consistent),
    )?;
    if let Some(path) = &a.tiles_csv {
        let mut buf = Vec::new();
        result.write_tiles_csv(&mut buf).map_err(CliError::domain)?;
        write_file(path, &buf)?;
    }
    write_report(report, &result)?;
    Ok(EXIT_OK)
}

fn cmd_decode(a: &args::DecodeArgs, report: Option<&Path>, out: &mut dyn Write) -> Result<i32, CliError> {
    let model_text = match &a.model {
        Some(path) => fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?,
        None => BUNDLED_MODEL.to_string(),
    };
    let model = ToyMarkovModel::from_json(&model_text).map_err(CliError::domain)?;
    let (start, params) = a.resolve(&model)?;
    let paths = beam_decode(&model, &start, &params).map_err(CliError::domain)?;

    let names = |tokens: &[usize]| tokens.iter().map(|&t| model.token_name(t).to_string()).collect::<Vec<_>>();
    let mut rows = Vec::new();
    for p in &paths {
        emit(out, format_args!("{:.6e}\t{}", p.probability(), names(&p.tokens).join(" ")))?;
        rows.push(json!({
            "tokens": names(&p.tokens),
            "probability": p.probability(),
            "log_path_prob": p.log_path_prob,
            "raw_log_prob": p.raw_log_prob,
        }));
    }
    write_report(report, &json!({ "config": a.resolved()?, "paths": rows }))?;
    Ok(EXIT_OK)
}

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::CliError;
use crate::ce_engine::CeParams;
use crate::decoding::{DecodeParams, ToyMarkovModel, TokenId};
use crate::rh_search::{StripRegion, Tolerances};
use crate::strip_sweep::SweepReport;
use crate::zero_locator::{ZeroScanner, SCAN_STEP};
use crate::zeta_eval::ZetaEvalConfig;

/// Environment variable consulted for the seed when neither a flag nor the
/// config file sets one.
pub const SEED_ENV: &str = "CEOR_SEED";

#[derive(Debug, Parser)]
#[command(name = "ceor", version, about = "Zeta zeros, cross-entropy strip search, sweeps and beam decoding")]
pub struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// JSON file with default values for the subcommand's options.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Write the JSON report here.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate ζ(s).
    Zeta(ZetaArgs),
    /// List critical-line zeros with ordinate in [from, to).
    Zeros(ZerosArgs),
    /// Scan count next to the smooth count over [from, to).
    Count(RangeArgs),
    /// Cross-entropy search of one strip region.
    Ceor(CeorArgs),
    /// Unit-tile sweep of [from, to), or extension of an earlier sweep.
    Sweep(SweepArgs),
    /// Top-p beam decoding on a toy Markov model.
    Decode(DecodeArgs),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Route {
    /// Eta series for Re(s) > 0, functional equation otherwise.
    #[default]
    Auto,
    Eta,
    Functional,
}

/// Overlay the flags that were given onto the config file's values.
pub(super) fn merge<T: Serialize + DeserializeOwned>(flags: &T, file: Option<&Value>) -> Result<T, CliError> {
    let Some(file) = file else {
        return Ok(serde_json::from_value(serde_json::to_value(flags).map_err(CliError::domain)?)
            .map_err(CliError::domain)?);
    };
    let Value::Object(flag_map) = serde_json::to_value(flags).map_err(CliError::domain)? else {
        unreachable!("argument structs serialize to objects")
    };
    let Value::Object(mut merged) = file.clone() else {
        return Err(CliError::Usage("config file must hold a JSON object".into()));
    };
    if let Some(key) = merged.keys().find(|k| !flag_map.contains_key(*k)) {
        return Err(CliError::Usage(format!("unknown config key `{key}`")));
    }
    for (key, value) in flag_map {
        if !value.is_null() {
            merged.insert(key, value);
        }
    }
    serde_json::from_value(Value::Object(merged)).map_err(|e| CliError::Usage(format!("config: {e}")))
}

fn required<T: Copy>(value: Option<T>, flag: &str) -> Result<T, CliError> {
    value.ok_or_else(|| CliError::Usage(format!("--{flag} is required")))
}

fn usage(e: impl std::fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct ZetaArgs {
    /// Point to evaluate, e.g. "2+0i" or "0.5-14.1i".
    #[arg(long, allow_hyphen_values = true)]
    pub s: Option<String>,
    #[arg(long, value_enum)]
    pub route: Option<Route>,
    /// Minimum number of series terms.
    #[arg(long)]
    pub series_terms: Option<usize>,
    #[arg(long)]
    pub abs_tolerance: Option<f64>,
}

#[derive(Serialize)]
pub(super) struct ZetaResolved<'a> {
    s: &'a str,
    route: Route,
    series_terms: usize,
    abs_tolerance: f64,
}

impl ZetaArgs {
    pub(super) fn eval_config(&self) -> Result<ZetaEvalConfig, CliError> {
        let d = ZetaEvalConfig::default();
        ZetaEvalConfig::new(self.series_terms.unwrap_or(d.series_terms), self.abs_tolerance.unwrap_or(d.abs_tolerance))
            .map_err(usage)
    }

    pub(super) fn resolved(&self) -> Result<ZetaResolved<'_>, CliError> {
        let cfg = self.eval_config()?;
        Ok(ZetaResolved {
            s: self.s.as_deref().unwrap_or_default(),
            route: self.route.unwrap_or_default(),
            series_terms: cfg.series_terms,
            abs_tolerance: cfg.abs_tolerance,
        })
    }
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct RangeArgs {
    #[arg(long)]
    pub from: Option<f64>,
    #[arg(long)]
    pub to: Option<f64>,
    /// Scan grid step.
    #[arg(long)]
    pub step: Option<f64>,
}

#[derive(Serialize)]
pub(super) struct RangeResolved {
    from: f64,
    to: f64,
    step: f64,
}

impl RangeArgs {
    pub(super) fn resolve(&self) -> Result<(f64, f64, ZeroScanner), CliError> {
        let r = self.resolved()?;
        Ok((r.from, r.to, ZeroScanner::new(ZetaEvalConfig::default(), r.step)))
    }

    pub(super) fn resolved(&self) -> Result<RangeResolved, CliError> {
        let step = self.step.unwrap_or(SCAN_STEP);
        if !(step > 0.0 && step.is_finite()) {
            return Err(CliError::Usage(format!("--step must be positive, got {step}")));
        }
        Ok(RangeResolved { from: required(self.from, "from")?, to: required(self.to, "to")?, step })
    }
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct ZerosArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub range: RangeArgs,
    /// Also write the zeros as CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct CeArgs {
    /// Samples per round (M).
    #[arg(long)]
    pub samples: Option<usize>,
    /// Elite fraction.
    #[arg(long)]
    pub rho: Option<f64>,
    /// Favorability factor for elite resampling.
    #[arg(long)]
    pub v: Option<f64>,
    /// Smoothing constant.
    #[arg(long)]
    pub c: Option<f64>,
    /// Stop once the benchmark has been equal for l + 1 rounds.
    #[arg(long)]
    pub l: Option<usize>,
    #[arg(long)]
    pub max_rounds: Option<usize>,
    /// Falls back to $CEOR_SEED, then 42.
    #[arg(long)]
    pub seed: Option<u64>,
}

impl CeArgs {
    fn resolve(&self, fallback: CeParams) -> Result<CeParams, CliError> {
        let seed = match self.seed {
            Some(seed) => seed,
            None => match std::env::var(SEED_ENV) {
                Ok(text) => text.trim().parse().map_err(|_| CliError::Usage(format!("{SEED_ENV}={text} is not a seed")))?,
                Err(_) => fallback.seed,
            },
        };
        let params = CeParams {
            samples: self.samples.unwrap_or(fallback.samples),
            rho: self.rho.unwrap_or(fallback.rho),
            v: self.v.unwrap_or(fallback.v),
            c: self.c.unwrap_or(fallback.c),
            l: self.l.unwrap_or(fallback.l),
            max_rounds: self.max_rounds.unwrap_or(fallback.max_rounds),
            seed,
        };
        params.validate().map_err(usage)?;
        Ok(params)
    }
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct TolArgs {
    /// |ζ| at or below this counts as a zero.
    #[arg(long)]
    pub eps_zero: Option<f64>,
    /// Half-width of the critical-line band.
    #[arg(long)]
    pub eps_line: Option<f64>,
    #[arg(long)]
    pub refine_radius: Option<f64>,
}

impl TolArgs {
    fn resolve(&self, fallback: Tolerances) -> Result<Tolerances, CliError> {
        let tol = Tolerances {
            eps_zero: self.eps_zero.unwrap_or(fallback.eps_zero),
            eps_line: self.eps_line.unwrap_or(fallback.eps_line),
            refine_radius: self.refine_radius.unwrap_or(fallback.refine_radius),
        };
        tol.validate().map_err(usage)?;
        Ok(tol)
    }
}

fn check_jitter(jitter: f64) -> Result<f64, CliError> {
    if jitter >= 0.0 && jitter.is_finite() {
        Ok(jitter)
    } else {
        Err(CliError::Usage(format!("--jitter must be >= 0, got {jitter}")))
    }
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct CeorArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub t_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub t_max: Option<f64>,
    #[arg(long)]
    pub sigma_min: Option<f64>,
    #[arg(long)]
    pub sigma_max: Option<f64>,
    /// Resampling perturbation half-width; 0 resamples elites verbatim.
    #[arg(long)]
    pub jitter: Option<f64>,
    /// Per-sample CSV trace.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub ce: CeArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub tol: TolArgs,
}

impl CeorArgs {
    pub(super) fn resolve(&self) -> Result<(StripRegion, CeParams, Tolerances, f64), CliError> {
        let region = StripRegion {
            sigma_lo: self.sigma_min.unwrap_or(0.0),
            sigma_hi: self.sigma_max.unwrap_or(1.0),
            t_lo: required(self.t_min, "t-min")?,
            t_hi: required(self.t_max, "t-max")?,
        };
        region.validate().map_err(usage)?;
        Ok((
            region,
            self.ce.resolve(CeParams::default())?,
            self.tol.resolve(Tolerances::default())?,
            check_jitter(self.jitter.unwrap_or(0.0))?,
        ))
    }
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct SweepArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub from: Option<f64>,
    #[arg(long)]
    pub to: Option<f64>,
    #[arg(long)]
    pub jitter: Option<f64>,
    /// Earlier sweep report to extend.
    #[arg(long)]
    pub extend: Option<PathBuf>,
    /// Number of tiles to add with --extend.
    #[arg(long)]
    pub tiles: Option<usize>,
    /// Per-tile CSV summary.
    #[arg(long)]
    pub tiles_csv: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub ce: CeArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub tol: TolArgs,
}

impl SweepArgs {
    /// Settings default to those recorded in `base` when extending.
    pub(super) fn resolve(&self, base: Option<&SweepReport>) -> Result<(CeParams, Tolerances, f64), CliError> {
        let (params, tol, jitter) = match base {
            Some(b) => (b.params, b.tolerances, b.jitter),
            None => (CeParams::default(), Tolerances::default(), 0.0),
        };
        Ok((self.ce.resolve(params)?, self.tol.resolve(tol)?, check_jitter(self.jitter.unwrap_or(jitter))?))
    }

    pub(super) fn span(&self) -> Result<(f64, f64), CliError> {
        Ok((required(self.from, "from")?, required(self.to, "to")?))
    }
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct DecodeArgs {
    /// Toy Markov model JSON (default: the bundled model).
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Comma-separated prompt tokens.
    #[arg(long)]
    pub start: Option<String>,
    /// Nucleus mass.
    #[arg(long)]
    pub p: Option<f64>,
    /// Beam width.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub max_len: Option<usize>,
    /// Token that finishes a path.
    #[arg(long)]
    pub end: Option<String>,
}

#[derive(Serialize)]
pub(super) struct DecodeResolved<'a> {
    model: Option<&'a std::path::Path>,
    start: Vec<&'a str>,
    p: f64,
    k: usize,
    max_len: usize,
    end: Option<&'a str>,
}

impl DecodeArgs {
    fn start_names(&self) -> Vec<&str> {
        match self.start.as_deref() {
            Some(text) if !text.trim().is_empty() => text.split(',').map(str::trim).collect(),
            _ => Vec::new(),
        }
    }

    pub(super) fn resolve(&self, model: &ToyMarkovModel) -> Result<(Vec<TokenId>, DecodeParams), CliError> {
        let r = self.resolved()?;
        let start = r.start.iter().map(|name| model.token_id(name)).collect::<Result<_, _>>().map_err(usage)?;
        let end_token = r.end.map(|name| model.token_id(name)).transpose().map_err(usage)?;
        Ok((start, DecodeParams { p: r.p, k: r.k, max_len: r.max_len, end_token }))
    }

    pub(super) fn resolved(&self) -> Result<DecodeResolved<'_>, CliError> {
        let d = DecodeParams::default();
        let params = DecodeParams {
            p: self.p.unwrap_or(d.p),
            k: self.k.unwrap_or(d.k),
            max_len: self.max_len.unwrap_or(d.max_len),
            end_token: None,
        };
        params.validate().map_err(usage)?;
        Ok(DecodeResolved {
            model: self.model.as_deref(),
            start: self.start_names(),
            p: params.p,
            k: params.k,
            max_len: params.max_len,
            end: self.end.as_deref(),
        })
    }
}

use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{CeorRound, FrequencyTracker, ScoredSample, StripRegion, Tolerances};
use crate::ce_engine::{CeParams, RoundSummary, StopReason};

/// A distinct critical-line zero found during the search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZeroHit {
    pub t: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CeorRoundSummary {
    #[serde(flatten)]
    pub base: RoundSummary,
    /// Share of the round's elites that scored as on-line zeros.
    pub elite_online_fraction: f64,
}

/// Everything a strip search produced, including the resolved settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CeorReport {
    pub region: StripRegion,
    pub params: CeParams,
    pub tolerances: Tolerances,
    pub jitter: f64,
    pub rounds: Vec<CeorRoundSummary>,
    /// Sorted by ordinate, merged within [`super::ZERO_MERGE_DISTANCE`].
    pub zeros: Vec<ZeroHit>,
    pub counterexamples: Vec<ScoredSample>,
    pub tracker: FrequencyTracker,
    pub stop_reason: StopReason,
}

impl CeorReport {
    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(self)
    }
}

const TRACE_HEADER: &str = "round,sigma,t,zeta_re,zeta_im,zeta_mag,score";

pub fn write_trace_header<W: Write>(out: &mut W) -> std::io::Result<()> {
    writeln!(out, "{TRACE_HEADER}")
}

/// One CSV line per evaluated sample of `round`, in draw order.
pub fn write_trace_rows<W: Write>(out: &mut W, round: &CeorRound) -> std::io::Result<()> {
    for e in &round.samples {
        let d = &e.detail;
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            round.round, d.s.re, d.s.im, d.zeta_value.re, d.zeta_value.im, d.zeta_mag, e.score
        )?;
    }
    Ok(())
}

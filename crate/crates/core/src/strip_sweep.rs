//! Unit-height tiling of the critical strip.
//!
//! A sweep splits `[t_lo, t_hi)` into tiles `[t_lo + k, t_lo + k + 1)`,
//! counts zeros in each tile by scanning and by the smooth formula, runs the
//! strip search on each tile, and checks that the per-tile counts add up to
//! a single scan over the whole span. Extending a sweep appends tiles above
//! the current top and leaves earlier tiles untouched.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ce_engine::{derive_seed, CeParams, StopReason};
use crate::rh_search::{CeorSearch, RhError, StripRegion, Tolerances};
use crate::zero_locator::{RegionCount, ZeroError, ZeroScanner, MAX_ORDINATE};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SweepError {
    #[error("span [{t_lo}, {t_hi}) is not a positive whole number of unit tiles")]
    NonIntegerSpan { t_lo: f64, t_hi: f64 },
    #[error("sweep top {t_hi} exceeds {MAX_ORDINATE}")]
    Range { t_hi: f64 },
    #[error("extension settings differ from those recorded in the report")]
    SettingsMismatch,
    #[error("extension needs at least one tile")]
    NoTiles,
    #[error(transparent)]
    Search(#[from] RhError),
    #[error(transparent)]
    Zero(#[from] ZeroError),
}

/// Unit tiles partitioning `[t_lo, t_hi)`, each spanning the full strip width.
pub fn tile_strip(t_lo: f64, t_hi: f64) -> Result<Vec<StripRegion>, SweepError> {
    let span = t_hi - t_lo;
    if !span.is_finite() || span < 1.0 || span.fract() != 0.0 {
        return Err(SweepError::NonIntegerSpan { t_lo, t_hi });
    }
    Ok((0..span as usize).map(|k| unit_tile(t_lo, k)).collect())
}

fn unit_tile(base: f64, k: usize) -> StripRegion {
    let lo = base + k as f64;
    StripRegion::new(lo, lo + 1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TileReport {
    pub tile: StripRegion,
    pub region_count: RegionCount,
    /// Search-found zero ordinates inside the tile's half-open interval.
    pub ceor_zeros: Vec<f64>,
    pub stop_reason: StopReason,
    #[serde(rename = "match")]
    pub matched: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub t_lo: f64,
    pub t_hi: f64,
    pub params: CeParams,
    pub tolerances: Tolerances,
    pub jitter: f64,
    pub tiles: Vec<TileReport>,
    pub total_online: u64,
    pub total_formula: u64,
    /// Zero count of one scan over the whole span.
    pub one_shot_online: u64,
    pub consistent: bool,
}

impl SweepReport {
    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(self)
    }

    /// One CSV row per tile with header
    /// `tile_lo,tile_hi,n_online,n_formula,ceor_found,match`.
    pub fn write_tiles_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "tile_lo,tile_hi,n_online,n_formula,ceor_found,match")?;
        for t in &self.tiles {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                t.tile.t_lo,
                t.tile.t_hi,
                t.region_count.n_online,
                t.region_count.n_formula,
                t.ceor_zeros.len(),
                t.matched
            )?;
        }
        Ok(())
    }
}

/// Settings shared by every tile of a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sweeper {
    pub params: CeParams,
    pub tolerances: Tolerances,
    pub jitter: f64,
    pub scanner: ZeroScanner,
}

impl Sweeper {
    pub fn new(params: CeParams, tolerances: Tolerances) -> Self {
        Self { params, tolerances, jitter: 0.0, scanner: ZeroScanner::default() }
    }

    pub fn with_jitter(mut self, jitter: f64) -> Self {
        self.jitter = jitter;
        self
    }

    /// Count and search tile number `k` above `base`. The search seed only
    /// depends on the global seed and `k`.
    pub fn run_tile(&self, base: f64, k: usize) -> Result<TileReport, SweepError> {
        let tile = unit_tile(base, k);
        if tile.t_hi > MAX_ORDINATE {
            return Err(SweepError::Range { t_hi: tile.t_hi });
        }
        let region_count = self.scanner.count_region(tile.t_lo, tile.t_hi)?;
        let params = CeParams { seed: derive_seed(self.params.seed, k as u64), ..self.params };
        let report = CeorSearch::new(tile, params, self.tolerances)
            .with_jitter(self.jitter)
            .with_scanner(self.scanner)
            .run()?;
        let ceor_zeros: Vec<f64> =
            report.zeros.iter().map(|z| z.t).filter(|&t| t >= tile.t_lo && t < tile.t_hi).collect();
        let matched = ceor_zeros.len() as u64 == region_count.n_online;
        Ok(TileReport { tile, region_count, ceor_zeros, stop_reason: report.stop_reason, matched })
    }

    fn run_tiles(&self, base: f64, ks: std::ops::Range<usize>) -> Result<Vec<TileReport>, SweepError> {
        ks.into_par_iter().map(|k| self.run_tile(base, k)).collect()
    }

    fn assemble(&self, t_lo: f64, t_hi: f64, tiles: Vec<TileReport>) -> Result<SweepReport, SweepError> {
        let total_online = tiles.iter().map(|t| t.region_count.n_online).sum();
        let total_formula = tiles.iter().map(|t| t.region_count.n_formula).sum();
        let one_shot_online = self.scanner.count_online(t_lo, t_hi)?;
        let consistent = tiles.iter().all(|t| t.matched) && total_online == one_shot_online;
        Ok(SweepReport {
            t_lo,
            t_hi,
            params: self.params,
            tolerances: self.tolerances,
            jitter: self.jitter,
            tiles,
            total_online,
            total_formula,
            one_shot_online,
            consistent,
        })
    }

    pub fn sweep(&self, t_lo: f64, t_hi: f64) -> Result<SweepReport, SweepError> {
        let n = tile_strip(t_lo, t_hi)?.len();
        if t_hi > MAX_ORDINATE {
            return Err(SweepError::Range { t_hi });
        }
        let tiles = self.run_tiles(t_lo, 0..n)?;
        self.assemble(t_lo, t_hi, tiles)
    }

    /// Append `extra_tiles` tiles above `report.t_hi`, reusing its tiles.
    pub fn extend(&self, report: &SweepReport, extra_tiles: usize) -> Result<SweepReport, SweepError> {
        if extra_tiles == 0 {
            return Err(SweepError::NoTiles);
        }
        if report.params != self.params || report.tolerances != self.tolerances || report.jitter != self.jitter {
            return Err(SweepError::SettingsMismatch);
        }
        let have = report.tiles.len();
        let t_hi = report.t_lo + (have + extra_tiles) as f64;
        if t_hi > MAX_ORDINATE {
            return Err(SweepError::Range { t_hi });
        }
        let mut tiles = report.tiles.clone();
        tiles.extend(self.run_tiles(report.t_lo, have..have + extra_tiles)?);
        self.assemble(report.t_lo, t_hi, tiles)
    }

    /// Tiles above `t_lo` one at a time, until the scanner's range runs out.
    pub fn tiles_from(&self, t_lo: f64) -> impl Iterator<Item = Result<TileReport, SweepError>> + '_ {
        (0..)
            .take_while(move |&k| t_lo + (k + 1) as f64 <= MAX_ORDINATE)
            .map(move |k| self.run_tile(t_lo, k))
    }
}

/// Sweep `[t_lo, t_hi)` with literal elite resampling.
pub fn sweep_region(t_lo: f64, t_hi: f64, params: CeParams, tol: Tolerances) -> Result<SweepReport, SweepError> {
    Sweeper::new(params, tol).sweep(t_lo, t_hi)
}

pub fn extend_sweep(
    report: &SweepReport,
    extra_tiles: usize,
    params: CeParams,
    tol: Tolerances,
) -> Result<SweepReport, SweepError> {
    Sweeper::new(params, tol).with_jitter(report.jitter).extend(report, extra_tiles)
}

//! Critical-line zeros: Riemann–Siegel theta, Hardy's Z, sign-change
//! scanning, bisection refinement and smooth-count cross-checks.

use std::f64::consts::PI;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::zeta_eval::{log_gamma, zeta, ComplexValue, ZetaError, ZetaEvalConfig};

/// Largest `|t|` the scanner accepts.
pub const MAX_ORDINATE: f64 = 500.0;

/// Default scan grid step.
pub const SCAN_STEP: f64 = 0.05;

/// Bisection stops once the bracket is narrower than this.
pub const BRACKET_WIDTH: f64 = 1e-9;

/// Location of the minimum of θ on t > 0. θ is increasing above it.
pub const THETA_MINIMUM_T: f64 = 6.289_835_988_836_903;

const REALNESS_LIMIT: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ZeroError {
    #[error("Z(t) is not real at t = {t}: discarded imaginary part {imag:e}")]
    Accuracy { t: f64, imag: f64 },
    #[error("Z has no sign change on [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },
    #[error("ordinate range [{lo}, {hi}] outside 0 <= lo <= hi <= {MAX_ORDINATE}")]
    Range { lo: f64, hi: f64 },
    #[error(transparent)]
    Zeta(#[from] ZetaError),
}

/// A refined zero `1/2 + it` of zeta on the critical line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZeroRecord {
    pub t: f64,
    /// `|Z(t)|` at the returned ordinate.
    pub residual: f64,
    pub bracket_width: f64,
}

/// Zero count over `[t_lo, t_hi)` by scanning and by the smooth formula.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionCount {
    pub t_lo: f64,
    pub t_hi: f64,
    pub n_online: u64,
    pub n_formula: u64,
    pub consistent: bool,
}

/// `θ(t) = Im ln Γ(1/4 + it/2) - (t/2) ln π`.
///
/// `log_gamma` returns the analytic branch, so the phase is already
/// continuous in `t`; no 2π unwrapping is needed on top of it.
pub fn riemann_siegel_theta(t: f64) -> f64 {
    if t == 0.0 {
        return 0.0;
    }
    let magnitude = t.abs();
    // 1/4 + i|t|/2 never hits a pole of Γ.
    let lg = log_gamma(ComplexValue::new(0.25, magnitude / 2.0))
        .expect("log_gamma is regular on Re(z) = 1/4");
    let theta = lg.im - magnitude / 2.0 * PI.ln();
    if t < 0.0 {
        -theta
    } else {
        theta
    }
}

/// Hardy's `Z(t) = e^{iθ(t)} ζ(1/2 + it)`, real for real `t`.
pub fn hardy_z(t: f64, cfg: &ZetaEvalConfig) -> Result<f64, ZeroError> {
    if !t.is_finite() || t.abs() > MAX_ORDINATE {
        return Err(ZeroError::Range { lo: t, hi: t });
    }
    let (value, imag) = hardy_z_parts(t, cfg)?;
    if imag.abs() > REALNESS_LIMIT {
        return Err(ZeroError::Accuracy { t, imag });
    }
    Ok(value)
}

/// Real part and discarded imaginary part of `e^{iθ(t)} ζ(1/2 + it)`.
pub fn hardy_z_parts(t: f64, cfg: &ZetaEvalConfig) -> Result<(f64, f64), ZeroError> {
    let z = zeta(ComplexValue::new(0.5, t), cfg)?;
    let rotated = ComplexValue::from_polar(1.0, riemann_siegel_theta(t)) * z;
    Ok((rotated.re, rotated.im))
}

/// Smooth zero count `N₀(T) = round(θ(T)/π + 1)`, held at zero below the
/// minimum of θ so that it is nondecreasing and `N₀(0) = 0`.
pub fn smooth_zero_count(t: f64) -> u64 {
    let theta = riemann_siegel_theta(t.max(THETA_MINIMUM_T));
    let n = (theta / PI + 1.0).round();
    if n <= 0.0 {
        0
    } else {
        n as u64
    }
}

/// Sign-change scanner for Z on the critical line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZeroScanner {
    pub cfg: ZetaEvalConfig,
    pub step: f64,
}

impl Default for ZeroScanner {
    fn default() -> Self {
        Self { cfg: ZetaEvalConfig::default(), step: SCAN_STEP }
    }
}

impl ZeroScanner {
    pub fn new(cfg: ZetaEvalConfig, step: f64) -> Self {
        Self { cfg, step }
    }

    fn check_range(lo: f64, hi: f64) -> Result<(), ZeroError> {
        if lo.is_finite() && hi.is_finite() && 0.0 <= lo && lo <= hi && hi <= MAX_ORDINATE {
            Ok(())
        } else {
            Err(ZeroError::Range { lo, hi })
        }
    }

    /// All critical-line zeros with ordinate in `[t_lo, t_hi)`, ascending.
    ///
    /// Z is sampled on a uniform grid no coarser than `step`; every sign
    /// change between neighbours is bisected down to [`BRACKET_WIDTH`].
    pub fn scan(&self, t_lo: f64, t_hi: f64) -> Result<Vec<ZeroRecord>, ZeroError> {
        Self::check_range(t_lo, t_hi)?;
        if t_hi == t_lo {
            return Ok(Vec::new());
        }
        let cells = ((t_hi - t_lo) / self.step).ceil().max(1.0) as usize;
        let width = (t_hi - t_lo) / cells as f64;
        let grid: Vec<f64> = (0..=cells)
            .map(|i| if i == cells { t_hi } else { t_lo + i as f64 * width })
            .collect();
        let values = grid
            .par_iter()
            .map(|&t| hardy_z(t, &self.cfg))
            .collect::<Result<Vec<_>, _>>()?;

        let brackets: Vec<(f64, f64, f64, f64)> = (0..cells)
            .filter(|&i| values[i] != 0.0 && values[i].signum() != values[i + 1].signum())
            .map(|i| (grid[i], values[i], grid[i + 1], values[i + 1]))
            .collect();
        let mut zeros = brackets
            .par_iter()
            .map(|&(a, fa, b, fb)| self.bisect(a, fa, b, fb))
            .collect::<Result<Vec<_>, _>>()?;
        zeros.retain(|z| z.t >= t_lo && z.t < t_hi);
        zeros.sort_by(|a, b| a.t.total_cmp(&b.t));
        Ok(zeros)
    }

    /// Number of zeros with ordinate in `[t_lo, t_hi)`.
    pub fn count_online(&self, t_lo: f64, t_hi: f64) -> Result<u64, ZeroError> {
        Ok(self.scan(t_lo, t_hi)?.len() as u64)
    }

    /// Scan count alongside the smooth count, flagged consistent when they
    /// differ by at most one.
    pub fn count_region(&self, t_lo: f64, t_hi: f64) -> Result<RegionCount, ZeroError> {
        let n_online = self.count_online(t_lo, t_hi)?;
        let n_formula = smooth_zero_count(t_hi).saturating_sub(smooth_zero_count(t_lo));
        Ok(RegionCount {
            t_lo,
            t_hi,
            n_online,
            n_formula,
            consistent: n_online.abs_diff(n_formula) <= 1,
        })
    }

    /// Bisect Z on `[t_guess - radius, t_guess + radius]`.
    pub fn refine(&self, t_guess: f64, radius: f64) -> Result<ZeroRecord, ZeroError> {
        let (lo, hi) = (t_guess - radius, t_guess + radius);
        if !(radius > 0.0) || lo.abs() > MAX_ORDINATE || hi.abs() > MAX_ORDINATE {
            return Err(ZeroError::Range { lo, hi });
        }
        let f_lo = hardy_z(lo, &self.cfg)?;
        let f_hi = hardy_z(hi, &self.cfg)?;
        if f_lo == 0.0 {
            return Ok(ZeroRecord { t: lo, residual: 0.0, bracket_width: BRACKET_WIDTH / 2.0 });
        }
        if f_hi == 0.0 {
            return Ok(ZeroRecord { t: hi, residual: 0.0, bracket_width: BRACKET_WIDTH / 2.0 });
        }
        if f_lo.signum() == f_hi.signum() {
            return Err(ZeroError::NoSignChange { lo, hi });
        }
        self.bisect(lo, f_lo, hi, f_hi)
    }

    fn bisect(&self, mut a: f64, mut fa: f64, mut b: f64, fb: f64) -> Result<ZeroRecord, ZeroError> {
        debug_assert!(fa.signum() != fb.signum());
        while b - a >= BRACKET_WIDTH {
            let mid = 0.5 * (a + b);
            if mid <= a || mid >= b {
                break;
            }
            let fm = hardy_z(mid, &self.cfg)?;
            if fm == 0.0 {
                return Ok(ZeroRecord { t: mid, residual: 0.0, bracket_width: b - a });
            }
            if fm.signum() == fa.signum() {
                a = mid;
                fa = fm;
            } else {
                b = mid;
            }
        }
        let t = 0.5 * (a + b);
        let residual = hardy_z(t, &self.cfg)?.abs();
        Ok(ZeroRecord { t, residual, bracket_width: b - a })
    }
}

/// Zeros with ordinate in `[t_lo, t_hi)` using the default scanner.
pub fn scan_zeros(t_lo: f64, t_hi: f64) -> Result<Vec<ZeroRecord>, ZeroError> {
    ZeroScanner::default().scan(t_lo, t_hi)
}

/// Number of critical-line zeros with ordinate in `[t_lo, t_hi)`.
pub fn count_zeros_online(t_lo: f64, t_hi: f64) -> Result<u64, ZeroError> {
    ZeroScanner::default().count_online(t_lo, t_hi)
}

pub fn count_zeros_region(t_lo: f64, t_hi: f64) -> Result<RegionCount, ZeroError> {
    ZeroScanner::default().count_region(t_lo, t_hi)
}

pub fn refine_zero(t_guess: f64, radius: f64) -> Result<ZeroRecord, ZeroError> {
    ZeroScanner::default().refine(t_guess, radius)
}

/// Write zero records as CSV with header `t,residual,bracket_width`.
pub fn write_zeros_csv<W: Write>(zeros: &[ZeroRecord], out: W) -> csv::Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    for z in zeros {
        writer.serialize(z)?;
    }
    writer.flush()?;
    Ok(())
}

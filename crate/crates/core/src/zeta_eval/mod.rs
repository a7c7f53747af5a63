//! Riemann zeta evaluation in IEEE-754 double precision.
//!
//! Inside the half-plane `Re(s) > 0` zeta comes from the Dirichlet eta
//! function, `ζ(s) = η(s) / (1 - 2^{1-s})`, with eta summed by a
//! Chebyshev-accelerated alternating series. Near the zeros of the divisor
//! (`s = 1 + 2πik / ln 2`) and for very large `|Im s|` the evaluator falls
//! back to Euler–Maclaurin summation. For `Re(s) <= 0` the functional
//! equation
//!
//! ```text
//! ζ(s) = 2^s π^{s-1} sin(πs/2) Γ(1-s) ζ(1-s)
//! ```
//!
//! maps the point back into the convergent region.

mod gamma;
mod series;

use std::f64::consts::{LN_2, PI};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use gamma::{gamma, log_gamma};
pub(crate) use gamma::{ln_sin_pi, sin_pi};

/// A point or value in the complex plane, `re + i·im`.
pub type ComplexValue = num_complex::Complex64;

/// Distance from a zero of `1 - 2^{1-s}` inside which the eta route is
/// abandoned.
const ETA_SINGULARITY_RADIUS: f64 = 1e-3;

/// Above this `|Im s|` the log-space form of `sin(πs/2)` is used.
const LOG_SINE_THRESHOLD: f64 = 20.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ZetaError {
    #[error("pole at {0}")]
    Pole(ComplexValue),
    #[error("{0}")]
    Domain(String),
    #[error("non-finite argument")]
    NonFinite,
    #[error("invalid evaluation config: {0}")]
    Config(String),
    #[error("cannot parse complex literal {0:?}")]
    Parse(String),
}

/// Truncation and accuracy settings shared by every evaluator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZetaEvalConfig {
    /// Minimum length of the accelerated series. The evaluator adds terms
    /// when the point needs more to reach `abs_tolerance`.
    pub series_terms: usize,
    pub abs_tolerance: f64,
}

impl ZetaEvalConfig {
    pub fn new(series_terms: usize, abs_tolerance: f64) -> Result<Self, ZetaError> {
        let cfg = Self { series_terms, abs_tolerance };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ZetaError> {
        if self.series_terms < 8 {
            return Err(ZetaError::Config(format!(
                "series_terms must be >= 8, got {}",
                self.series_terms
            )));
        }
        if !(self.abs_tolerance >= 1e-14) || !self.abs_tolerance.is_finite() {
            return Err(ZetaError::Config(format!(
                "abs_tolerance must be a finite value >= 1e-14, got {}",
                self.abs_tolerance
            )));
        }
        Ok(())
    }
}

impl Default for ZetaEvalConfig {
    fn default() -> Self {
        Self { series_terms: 64, abs_tolerance: 1e-12 }
    }
}

fn check_finite(s: ComplexValue) -> Result<(), ZetaError> {
    if s.re.is_finite() && s.im.is_finite() {
        Ok(())
    } else {
        Err(ZetaError::NonFinite)
    }
}

/// `η(s) = Σ (-1)^{n+1} n^{-s}` for `Re(s) > 0`.
pub fn dirichlet_eta(s: ComplexValue, cfg: &ZetaEvalConfig) -> Result<ComplexValue, ZetaError> {
    check_finite(s)?;
    if s.re <= 0.0 {
        return Err(ZetaError::Domain(format!("eta series needs Re(s) > 0, got {s}")));
    }
    let n = series::eta_terms_for(s, cfg.abs_tolerance, cfg.series_terms);
    Ok(series::eta_accelerated(s, n))
}

/// Distance from `s` to the nearest zero of `1 - 2^{1-s}`.
fn distance_to_eta_singularity(s: ComplexValue) -> f64 {
    let spacing = 2.0 * PI / LN_2;
    let k = (s.im / spacing).round();
    ComplexValue::new(s.re - 1.0, s.im - k * spacing).norm()
}

/// `ζ(s)` for any `s != 1`.
pub fn zeta(s: ComplexValue, cfg: &ZetaEvalConfig) -> Result<ComplexValue, ZetaError> {
    check_finite(s)?;
    if s == ComplexValue::new(1.0, 0.0) {
        return Err(ZetaError::Pole(s));
    }
    if s.re <= 0.0 {
        return zeta_functional(s, cfg);
    }
    Ok(zeta_right_half_plane(s, cfg))
}

fn zeta_right_half_plane(s: ComplexValue, cfg: &ZetaEvalConfig) -> ComplexValue {
    debug_assert!(s.re > 0.0);
    let n = series::eta_terms_for(s, cfg.abs_tolerance, cfg.series_terms);
    if distance_to_eta_singularity(s) < ETA_SINGULARITY_RADIUS || n > series::MAX_ETA_TERMS {
        return series::zeta_euler_maclaurin(s);
    }
    let eta = series::eta_accelerated(s, n);
    let divisor = 1.0 - ((1.0 - s) * LN_2).exp();
    eta / divisor
}

/// `ζ(s)` through the functional equation, for `Re(s) < 1`.
///
/// The prefactor `2^s π^{s-1} Γ(1-s)` is assembled in log space. For large
/// `|Im s|` the sine factor joins it there too, otherwise it is applied
/// directly so that the trivial zeros come out exactly.
pub fn zeta_functional(s: ComplexValue, cfg: &ZetaEvalConfig) -> Result<ComplexValue, ZetaError> {
    check_finite(s)?;
    if s.re >= 1.0 {
        return Err(ZetaError::Domain(format!(
            "functional equation route needs Re(s) < 1, got {s}"
        )));
    }
    if s == ComplexValue::new(0.0, 0.0) {
        // sin(πs/2) ζ(1-s) -> -π/2 as s -> 0
        return Ok(ComplexValue::new(-0.5, 0.0));
    }
    let reflected = 1.0 - s;
    let zeta_reflected = zeta_right_half_plane(reflected, cfg);
    let ln_prefactor = s * LN_2 + (s - 1.0) * PI.ln() + log_gamma(reflected)?;
    let half = s / 2.0;
    let value = if s.im.abs() > LOG_SINE_THRESHOLD {
        (ln_prefactor + ln_sin_pi(half)).exp() * zeta_reflected
    } else {
        ln_prefactor.exp() * sin_pi(half) * zeta_reflected
    };
    Ok(value)
}

/// Parse the `a+bi` literal form (also accepts `a-bi`, `a`, `bi`).
pub fn parse_complex(text: &str) -> Result<ComplexValue, ZetaError> {
    let cleaned: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let value: ComplexValue =
        cleaned.parse().map_err(|_| ZetaError::Parse(text.to_string()))?;
    check_finite(value).map_err(|_| ZetaError::Parse(text.to_string()))?;
    Ok(value)
}

/// Render a value in the `a+bi` literal form, round-trippable through
/// [`parse_complex`].
pub fn format_complex(z: ComplexValue) -> String {
    if z.im.is_sign_negative() {
        format!("{}-{}i", z.re, -z.im)
    } else {
        format!("{}+{}i", z.re, z.im)
    }
}

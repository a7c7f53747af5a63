//! Complex log-Gamma via the Lanczos approximation.

use std::f64::consts::PI;

use super::{ComplexValue, ZetaError};

const LANCZOS_G: f64 = 7.0;

// g = 7, n = 9 coefficient set (the same table GSL and Numerical Recipes use).
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// `0.5 * ln(2π)`
const HALF_LN_TWO_PI: f64 = 0.918_938_533_204_672_8;

/// Principal branch of `ln Γ(z)`.
///
/// This is the analytic log-Gamma (branch cut along the non-positive real
/// axis), so `log_gamma(z + 1) = log_gamma(z) + ln z` holds exactly and the
/// imaginary part varies continuously along any path avoiding the cut.
/// Points with `Re(z) < 1/2` are shifted up with that recurrence before the
/// Lanczos sum is applied.
pub fn log_gamma(z: ComplexValue) -> Result<ComplexValue, ZetaError> {
    if !z.re.is_finite() || !z.im.is_finite() {
        return Err(ZetaError::NonFinite);
    }
    if z.im == 0.0 && z.re <= 0.0 && z.re.fract() == 0.0 {
        return Err(ZetaError::Pole(z));
    }
    if z.re >= 0.5 {
        return Ok(lanczos_log_gamma(z));
    }
    let shift = (0.5 - z.re).ceil() as usize;
    let mut correction = ComplexValue::new(0.0, 0.0);
    for j in 0..shift {
        correction += (z + j as f64).ln();
    }
    Ok(lanczos_log_gamma(z + shift as f64) - correction)
}

/// `Γ(z)` as `exp(log_gamma(z))`.
pub fn gamma(z: ComplexValue) -> Result<ComplexValue, ZetaError> {
    log_gamma(z).map(|lg| lg.exp())
}

fn lanczos_log_gamma(z: ComplexValue) -> ComplexValue {
    debug_assert!(z.re >= 0.5);
    let zm1 = z - 1.0;
    let mut series = ComplexValue::new(LANCZOS_COEFFS[0], 0.0);
    for (i, &c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        series += c / (zm1 + i as f64);
    }
    let t = zm1 + LANCZOS_G + 0.5;
    (zm1 + 0.5) * t.ln() - t + series.ln() + HALF_LN_TWO_PI
}

/// `sin(π z)` with exact argument reduction on the real part, so integer
/// `z` gives an exact zero.
pub(crate) fn sin_pi(z: ComplexValue) -> ComplexValue {
    let (s, c) = sin_cos_pi_real(z.re);
    let b = PI * z.im;
    ComplexValue::new(s * b.cosh(), c * b.sinh())
}

/// `(sin(π x), cos(π x))` for real `x`, exact at integers and half-integers.
fn sin_cos_pi_real(x: f64) -> (f64, f64) {
    // Reduce to r in [-1, 1] with x = 2k + r.
    let r = x - 2.0 * (x / 2.0).round();
    if r == 0.0 {
        return (0.0, 1.0);
    }
    if r.abs() == 1.0 {
        return (0.0, -1.0);
    }
    if r.abs() == 0.5 {
        return (r.signum(), 0.0);
    }
    let a = PI * r;
    (a.sin(), a.cos())
}

/// `ln sin(π z)`, stable for large `|Im z|`. The branch is unspecified;
/// callers only exponentiate the result.
pub(crate) fn ln_sin_pi(z: ComplexValue) -> ComplexValue {
    let w = z * PI;
    let i = ComplexValue::i();
    let ln_two_i = (2.0 * i).ln();
    if w.im >= 0.0 {
        // sin w = e^{-iw} (e^{2iw} - 1) / (2i)
        -i * w + ((2.0 * i * w).exp() - 1.0).ln() - ln_two_i
    } else {
        // sin w = e^{iw} (1 - e^{-2iw}) / (2i)
        i * w + (1.0 - (-2.0 * i * w).exp()).ln() - ln_two_i
    }
}

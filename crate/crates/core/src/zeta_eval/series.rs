//! Series kernels: accelerated alternating sum for eta, Euler–Maclaurin
//! for zeta.

use std::cell::RefCell;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::rc::Rc;

use super::ComplexValue;

thread_local! {
    static WEIGHT_CACHE: RefCell<HashMap<usize, Rc<Vec<f64>>>> = RefCell::new(HashMap::new());
}

/// Hard cap on the accelerated eta sum; beyond this the caller switches to
/// Euler–Maclaurin.
pub(crate) const MAX_ETA_TERMS: usize = 4096;

/// `B_{2k} / (2k)!` for k = 1..=15.
const BERNOULLI_OVER_FACTORIAL: [f64; 15] = [
    0.083_333_333_333_333_33,
    -0.001_388_888_888_888_889,
    3.306_878_306_878_307e-5,
    -8.267_195_767_195_768e-7,
    2.087_675_698_786_81e-8,
    -5.284_190_138_687_493e-10,
    1.338_253_653_068_467_9e-11,
    -3.389_680_296_322_582_7e-13,
    8.586_062_056_277_845e-15,
    -2.174_868_698_558_062e-16,
    5.509_002_828_360_229_5e-18,
    -1.395_446_468_581_252_2e-19,
    3.534_707_039_629_467e-21,
    -8.953_517_427_037_546e-23,
    2.267_952_452_337_683e-24,
];

/// Number of terms the accelerated eta sum needs so the truncation error at
/// `s` stays below `tol`. Never less than `min_terms`.
pub(crate) fn eta_terms_for(s: ComplexValue, tol: f64, min_terms: usize) -> usize {
    // |error| <= 3 (1 + 2|t|) e^{π|t|/2} / (3 + √8)^n, plus a margin for
    // 0 < σ < 1/2 where the bound is looser.
    let t = s.im.abs();
    let ln_rate = (3.0 + 8f64.sqrt()).ln();
    let numerator = PI * t / 2.0 + (3.0 * (1.0 + 2.0 * t) / tol).ln();
    let n = (numerator / ln_rate).ceil() as usize + 8;
    n.max(min_terms)
}

/// Dirichlet eta by the Chebyshev-weighted alternating sum
/// `η(s) ≈ Σ_{k<n} (-1)^k w_k (k+1)^{-s}`.
///
/// The weights `w_k = (d_n - d_k) / d_n` are formed from suffix sums of the
/// scaled partial terms, so they stay in [0, 1] without overflow even when
/// `d_n` itself would exceed the f64 range.
pub(crate) fn eta_accelerated(s: ComplexValue, n: usize) -> ComplexValue {
    let weights = WEIGHT_CACHE.with(|cache| {
        cache
            .borrow_mut()
            .entry(n)
            .or_insert_with(|| Rc::new(chebyshev_weights(n)))
            .clone()
    });
    let mut acc = ComplexValue::new(0.0, 0.0);
    // Sum from the small tail end so the rounding error stays proportional
    // to the result.
    for k in (0..n).rev() {
        let term = weights[k] * (-s * ((k + 1) as f64).ln()).exp();
        if k % 2 == 0 {
            acc += term;
        } else {
            acc -= term;
        }
    }
    acc
}

fn chebyshev_weights(n: usize) -> Vec<f64> {
    // a_i = (n+i-1)! 4^i / ((n-i)! (2i)!), a_{i+1}/a_i = 4 (n+i)(n-i) / ((2i+1)(2i+2))
    let mut log_a = Vec::with_capacity(n + 1);
    log_a.push(-(n as f64).ln());
    for i in 0..n {
        let (fi, fn_) = (i as f64, n as f64);
        let ratio = 4.0 * (fn_ + fi) * (fn_ - fi) / ((2.0 * fi + 1.0) * (2.0 * fi + 2.0));
        let prev = log_a[i];
        log_a.push(prev + ratio.ln());
    }
    let max = log_a.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let scaled: Vec<f64> = log_a.iter().map(|&l| (l - max).exp()).collect();
    let mut suffixes = vec![0.0; n];
    let mut suffix = 0.0;
    for k in (0..n).rev() {
        suffix += scaled[k + 1];
        suffixes[k] = suffix;
    }
    let total = suffix + scaled[0];
    suffixes.iter().map(|&x| x / total).collect()
}

/// Zeta by Euler–Maclaurin summation. Valid for every `s != 1`.
pub(crate) fn zeta_euler_maclaurin(s: ComplexValue) -> ComplexValue {
    let k_terms = BERNOULLI_OVER_FACTORIAL.len();
    // Keep |s + 2K| / (2π N) <= 1/4 so each correction shrinks by >= 16x.
    let n = ((2.0 * (s.norm() + 2.0 * k_terms as f64) / PI).ceil() as usize).max(10);
    let nf = n as f64;

    let mut head = ComplexValue::new(0.0, 0.0);
    for j in (1..n).rev() {
        head += (-s * (j as f64).ln()).exp();
    }
    let ln_n = nf.ln();
    let n_pow_minus_s = (-s * ln_n).exp();
    let mut total = head + n_pow_minus_s * nf / (s - 1.0) + n_pow_minus_s * 0.5;

    // rising factorial s (s+1) ... (s+2k-2) times N^{-s-2k+1}
    let mut factor = s * n_pow_minus_s / nf;
    for (k, &b) in BERNOULLI_OVER_FACTORIAL.iter().enumerate() {
        let term = factor * b;
        total += term;
        if term.norm() < 1e-17 * total.norm() {
            break;
        }
        let kk = (k + 1) as f64;
        factor = factor * (s + 2.0 * kk - 1.0) * (s + 2.0 * kk) / (nf * nf);
    }
    total
}

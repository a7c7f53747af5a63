//! Zeta, theta and Z against frozen reference values and independent
//! brute-force oracles.

use ceor::zero_locator::{
    count_zeros_online, count_zeros_region, hardy_z, hardy_z_parts, refine_zero,
    riemann_siegel_theta, scan_zeros, smooth_zero_count, ZeroScanner, THETA_MINIMUM_T,
};
use ceor::zeta_eval::{
    dirichlet_eta, log_gamma, zeta, zeta_functional, ComplexValue, ZetaEvalConfig,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c(re: f64, im: f64) -> ComplexValue {
    ComplexValue::new(re, im)
}

fn cfg() -> ZetaEvalConfig {
    ZetaEvalConfig::default()
}

// (σ, t, Re ζ, Im ζ), frozen from a 30-digit reference evaluation.
const ZETA_REFERENCE: &[(f64, f64, f64, f64)] = &[
    (0.5, 14.134725, 1.767429841384904e-08, -1.1102028930923116e-07),
    (0.5, 50.0, -0.08171210832097997, 0.3307921940386613),
    (0.5, 100.0, 2.692619885681324, -0.020386029602598162),
    (0.5, 200.0, 4.590577374969053, -3.189401247579144),
    (0.5, 300.0, 0.47745567187848253, 0.6079021332795531),
    (0.5, 499.5, 2.451905990336144, -2.2805795319708984),
    (0.1, 5.0, 0.6477319645868996, 0.27826912615278626),
    (0.9, -30.0, 0.34443869218010686, 0.5037037362047884),
    (-1.5, 3.0, 0.20132883054215034, 0.09714974301562004),
    (-10.0, 25.0, 2529202.129645663, -821142.5383188877),
    (3.0, 100.0, 1.0957985734149973, -0.02846424977922695),
    (0.3, 150.0, -0.3889110053176641, 0.3139352375146643),
    (0.5, -77.7, 0.28532407081544503, -0.7939315293659012),
    (2.0, 0.0, 1.6449340668482264, 0.0),
    (0.5, 0.0, -1.4603545088095868, 0.0),
];

#[test]
fn zeta_matches_reference_table() {
    for &(re, im, want_re, want_im) in ZETA_REFERENCE {
        let got = zeta(c(re, im), &cfg()).unwrap();
        let want = c(want_re, want_im);
        let tol = 1e-10 * want.norm().max(1.0);
        assert!((got - want).norm() < tol, "zeta({re}+{im}i) = {got}, want {want}");
    }
}

/// Direct partial sums of Σ n^{-2} plus the integral tail bound.
#[test]
fn zeta_two_against_partial_sums() {
    let n = 200_000u64;
    let partial: f64 = (1..=n).rev().map(|k| 1.0 / (k as f64 * k as f64)).sum();
    // tail Σ_{k>n} k^{-2} lies in (1/(n+1), 1/n); use the midpoint-corrected 1/n - 1/(2n²)
    let nf = n as f64;
    let oracle = partial + 1.0 / nf - 1.0 / (2.0 * nf * nf);
    let got = zeta(c(2.0, 0.0), &cfg()).unwrap();
    assert!((got.re - oracle).abs() < 1e-10);
    assert!((got.re - 1.644_934_066_8).abs() < 1e-10);
}

/// Euler transform of the alternating series, independent of the library's
/// Chebyshev weights.
fn euler_transformed_eta(s: f64, terms: usize) -> f64 {
    // η(s) = Σ_{n>=0} 2^{-(n+1)} Σ_{k<=n} (-1)^k C(n,k) (k+1)^{-s}
    let mut total = 0.0;
    for n in 0..terms {
        let mut inner = 0.0;
        let mut binom = 1.0;
        for k in 0..=n {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            inner += sign * binom * ((k + 1) as f64).powf(-s);
            binom = binom * (n - k) as f64 / (k + 1) as f64;
        }
        total += inner / 2f64.powi(n as i32 + 1);
    }
    total
}

#[test]
fn eta_examples() {
    let ln2 = std::f64::consts::LN_2;
    assert!((dirichlet_eta(c(1.0, 0.0), &cfg()).unwrap().re - ln2).abs() < 1e-12);
    let pi2 = std::f64::consts::PI.powi(2);
    assert!((dirichlet_eta(c(2.0, 0.0), &cfg()).unwrap().re - pi2 / 12.0).abs() < 1e-12);
    let half = dirichlet_eta(c(0.5, 0.0), &cfg()).unwrap().re;
    let oracle = euler_transformed_eta(0.5, 45);
    assert!((half - oracle).abs() < 1e-10, "{half} vs {oracle}");
    assert!((half - 0.604_898_6).abs() < 1e-7);
}

#[test]
fn functional_equation_examples() {
    let minus_one = zeta_functional(c(-1.0, 0.0), &cfg()).unwrap();
    assert!((minus_one.re + 1.0 / 12.0).abs() < 1e-12);
    let minus_three = zeta_functional(c(-3.0, 0.0), &cfg()).unwrap();
    assert!((minus_three.re - 1.0 / 120.0).abs() < 1e-12);
    assert_eq!(zeta_functional(c(-4.0, 0.0), &cfg()).unwrap().norm(), 0.0);
    assert_eq!(zeta(c(0.0, 0.0), &cfg()).unwrap(), c(-0.5, 0.0));
}

#[test]
fn trivial_zeros() {
    for n in 1..=5 {
        let z = zeta(c(-2.0 * n as f64, 0.0), &cfg()).unwrap();
        assert!(z.norm() < 1e-10, "zeta(-{}) = {z}", 2 * n);
    }
}

#[test]
fn route_agreement_in_strip() {
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_601);
    for _ in 0..200 {
        let s = c(rng.random_range(0.1..0.9), rng.random_range(-50.0..50.0));
        let a = zeta(s, &cfg()).unwrap();
        let b = zeta_functional(s, &cfg()).unwrap();
        assert!((a - b).norm() < 1e-8, "routes disagree at {s}: {a} vs {b}");
    }
}

#[test]
fn pole_behaviour() {
    for k in 2..=5 {
        for sign in [-1.0, 1.0] {
            let eps = sign * 10f64.powi(-k);
            let s = c(1.0 + eps, 0.0);
            let scaled = zeta(s, &cfg()).unwrap() * eps;
            assert!((scaled.re - 1.0).abs() < 0.05, "(s-1)ζ(s) at {s} = {scaled}");
        }
    }
}

#[test]
fn log_gamma_recurrence() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..100 {
        let z = c(rng.random_range(0.5..10.0), rng.random_range(-20.0..20.0));
        let diff = log_gamma(z + 1.0).unwrap() - log_gamma(z).unwrap() - z.ln();
        let two_pi = 2.0 * std::f64::consts::PI;
        let wrapped = diff.im - two_pi * (diff.im / two_pi).round();
        assert!(diff.re.abs() < 1e-10 && wrapped.abs() < 1e-10, "z = {z}: {diff}");
    }
}

// (t, θ(t)) frozen from a 30-digit reference evaluation.
const THETA_REFERENCE: &[(f64, f64)] = &[
    (1.0, -1.7675479528122904),
    (5.0, -3.4596203753634627),
    (6.289835988836903, -3.5309728290166076),
    (10.0, -3.0670743962898954),
    (50.0, 26.46136607016141),
    (100.0, 87.97216523178722),
    (250.0, 335.055365683325),
    (499.0, 841.6022354893503),
];

#[test]
fn theta_matches_reference_table() {
    for &(t, want) in THETA_REFERENCE {
        let got = riemann_siegel_theta(t);
        assert!((got - want).abs() < 1e-10, "θ({t}) = {got}, want {want}");
    }
}

/// θ against its Stirling expansion, which is accurate for large t and
/// shares no code with log_gamma.
#[test]
fn theta_against_asymptotic_series() {
    let pi = std::f64::consts::PI;
    for t in [60.0, 120.0, 240.0, 480.0] {
        let asymptotic = t / 2.0 * (t / (2.0 * pi)).ln() - t / 2.0 - pi / 8.0
            + 1.0 / (48.0 * t)
            + 7.0 / (5760.0 * t.powi(3))
            + 31.0 / (80640.0 * t.powi(5));
        assert!((riemann_siegel_theta(t) - asymptotic).abs() < 1e-10);
    }
}

#[test]
fn theta_first_positive_root() {
    // bisection on θ itself
    let (mut a, mut b) = (17.0, 18.5);
    while b - a > 1e-12 {
        let m = 0.5 * (a + b);
        if riemann_siegel_theta(m) < 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    assert!((a - 17.8456).abs() < 1e-4);
    assert!(riemann_siegel_theta(17.8456).abs() < 1e-5);
}

#[test]
fn theta_minimum_location() {
    // central finite difference of θ changes sign at the minimum
    let d = |t: f64| (riemann_siegel_theta(t + 1e-5) - riemann_siegel_theta(t - 1e-5)) / 2e-5;
    assert!(d(THETA_MINIMUM_T - 1e-4) < 0.0);
    assert!(d(THETA_MINIMUM_T + 1e-4) > 0.0);
}

#[test]
fn hardy_z_examples() {
    // (t, Z(t)) frozen from a 30-digit reference evaluation.
    let reference = [
        (0.0, -1.4603545088095868),
        (10.0, -1.5491945461810224),
        (50.0, -0.340735005955025),
        (100.0, 2.6926970566644637),
        (333.3, -0.9969376269782415),
        (499.0, 2.677022720801717),
    ];
    for (t, want) in reference {
        let got = hardy_z(t, &cfg()).unwrap();
        assert!((got - want).abs() < 1e-9, "Z({t}) = {got}, want {want}");
    }
    assert!(hardy_z(14.134725, &cfg()).unwrap().abs() < 1e-5);
}

#[test]
fn z_realness_on_grid() {
    let mut worst: f64 = 0.0;
    for i in 0..=2000 {
        let t = i as f64 * 0.1;
        let (_, imag) = hardy_z_parts(t, &cfg()).unwrap();
        worst = worst.max(imag.abs());
    }
    assert!(worst < 1e-8, "largest discarded imaginary part {worst:e}");
}

#[test]
fn zero_counts() {
    assert_eq!(count_zeros_online(0.0, 14.0).unwrap(), 0);
    assert_eq!(count_zeros_online(0.0, 30.0).unwrap(), 3);
    assert_eq!(count_zeros_online(0.0, 100.0).unwrap(), 29);
}

/// A scan at step 0.01 shares the evaluator but not the grid; it must see
/// the same zeros.
#[test]
fn fine_scan_oracle_agrees() {
    let coarse = scan_zeros(0.0, 100.0).unwrap();
    let fine = ZeroScanner::new(cfg(), 0.01).scan(0.0, 100.0).unwrap();
    assert_eq!(coarse.len(), fine.len());
    for (a, b) in coarse.iter().zip(&fine) {
        assert!((a.t - b.t).abs() < 1e-8);
    }
}

#[test]
fn region_counts() {
    let rc = count_zeros_region(0.0, 100.0).unwrap();
    assert_eq!(rc.n_online, 29);
    assert!(rc.consistent);
    let rc = count_zeros_region(0.0, 20.0).unwrap();
    assert_eq!(rc.n_online, 1);
    assert!(rc.consistent);
}

#[test]
fn smooth_count_is_monotone() {
    let mut prev = 0;
    for i in 0..=5000 {
        let n = smooth_zero_count(i as f64 * 0.1);
        assert!(n >= prev);
        prev = n;
    }
}

#[test]
fn refine_examples() {
    let first = refine_zero(14.1, 0.2).unwrap();
    assert!((first.t - 14.134_725_141_734_694).abs() < 1e-8);
    assert!(first.bracket_width < 1e-9 && first.residual < 1e-8);
    let second = refine_zero(21.0, 0.2).unwrap();
    assert!((second.t - 21.022_039_638_771_555).abs() < 1e-8);
}

#[test]
fn every_record_has_small_residual() {
    for z in scan_zeros(0.0, 200.0).unwrap() {
        assert!(z.residual < 1e-8, "{z:?}");
        assert!(z.bracket_width < 1e-9);
        assert!(hardy_z(z.t, &cfg()).unwrap().abs() < 1e-8);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn conjugate_symmetry(re in -5.0f64..5.0, im in 0.5f64..60.0) {
        let s = c(re, im);
        let a = zeta(s.conj(), &cfg()).unwrap();
        let b = zeta(s, &cfg()).unwrap().conj();
        prop_assert!((a - b).norm() <= 1e-12 * b.norm().max(1.0));
    }

    #[test]
    fn count_additivity(a in 0.0f64..90.0, frac in 0.05f64..0.95, span in 1.0f64..10.0) {
        let c_hi = (a + span).min(100.0);
        let b = a + frac * (c_hi - a);
        let zeros = scan_zeros(0.0, 100.0).unwrap();
        prop_assume!(zeros.iter().all(|z| (z.t - b).abs() > 0.01));
        let whole = count_zeros_online(a, c_hi).unwrap();
        let parts = count_zeros_online(a, b).unwrap() + count_zeros_online(b, c_hi).unwrap();
        prop_assert_eq!(whole, parts);
    }
}

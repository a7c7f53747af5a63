//! Cross-entropy search of the critical strip for zeta zeros.
//!
//! Samples `s = σ + it` are scored on the lattice `{1, 0, -∞}`:
//!
//! * `1` (on-line zero): `|σ - 1/2| <= eps_line` and Hardy's Z changes sign
//!   within `refine_radius` of `t`, confirmed by bisection;
//! * `-∞` (off-line zero): `|ζ(s)| <= eps_zero` with `|σ - 1/2| > eps_line`;
//! * `0` otherwise.
//!
//! A single `-∞` makes the round's score sum negative and ends the run with
//! a counterexample report. The fraction of off-line detections over all
//! evaluated samples is tracked as an empirical frequency.

mod report;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ce_engine::{
    categorical, cumulative_weights, run_ce_observed, CeError, CeParams, CeProblem, RngStreams,
    RoundState, RunError, Score, StopReason,
};
use crate::zero_locator::{ZeroError, ZeroRecord, ZeroScanner, MAX_ORDINATE};
use crate::zeta_eval::{zeta, ComplexValue, ZetaError};

pub use report::{write_trace_header, write_trace_rows, CeorReport, CeorRoundSummary, ZeroHit};

/// Refined ordinates closer than this are the same zero.
pub const ZERO_MERGE_DISTANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RhError {
    #[error("{0} lies outside the open critical strip")]
    OutOfStrip(ComplexValue),
    #[error("elite resampling requested from an empty elite set")]
    EmptyElite,
    #[error("frequency of an event over zero trials")]
    ZeroTrials,
    #[error("invalid region: {0}")]
    Region(String),
    #[error("invalid tolerances: {0}")]
    Tolerances(String),
    #[error(transparent)]
    Zeta(#[from] ZetaError),
    #[error(transparent)]
    Zero(#[from] ZeroError),
    #[error(transparent)]
    Ce(#[from] CeError),
}

impl From<RunError<RhError>> for RhError {
    fn from(e: RunError<RhError>) -> Self {
        match e {
            RunError::Ce(e) => RhError::Ce(e),
            RunError::Problem(e) => e,
        }
    }
}

/// A rectangle of the strip: `σ ∈ (sigma_lo, sigma_hi)`, `t ∈ [t_lo, t_hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StripRegion {
    pub sigma_lo: f64,
    pub sigma_hi: f64,
    pub t_lo: f64,
    pub t_hi: f64,
}

impl StripRegion {
    /// The full strip width over `[t_lo, t_hi]`.
    pub fn new(t_lo: f64, t_hi: f64) -> Self {
        Self { sigma_lo: 0.0, sigma_hi: 1.0, t_lo, t_hi }
    }

    pub fn validate(&self) -> Result<(), RhError> {
        let ok = self.sigma_lo >= 0.0
            && self.sigma_lo < self.sigma_hi
            && self.sigma_hi <= 1.0
            && self.t_lo.is_finite()
            && self.t_hi.is_finite()
            && self.t_lo < self.t_hi;
        if ok {
            Ok(())
        } else {
            Err(RhError::Region(format!("{self:?}")))
        }
    }

    fn clip(&self, s: ComplexValue) -> ComplexValue {
        let sigma = s.re.clamp(self.sigma_lo, self.sigma_hi);
        let sigma = if sigma <= self.sigma_lo {
            self.sigma_lo.next_up()
        } else if sigma >= self.sigma_hi {
            self.sigma_hi.next_down()
        } else {
            sigma
        };
        ComplexValue::new(sigma, s.im.clamp(self.t_lo, self.t_hi))
    }
}

/// Floating-point stand-ins for "ζ(s) = 0" and "Re(s) = 1/2".
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// `|ζ(s)|` at or below this counts as a zero.
    pub eps_zero: f64,
    /// Half-width of the band around the critical line.
    pub eps_line: f64,
    /// Half-width of the bisection bracket around `Im(s)`.
    pub refine_radius: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { eps_zero: 1e-6, eps_line: 0.02, refine_radius: 0.1 }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<(), RhError> {
        if !(self.eps_zero >= 1e-12) || !self.eps_zero.is_finite() {
            return Err(RhError::Tolerances(format!("eps_zero must be >= 1e-12, got {}", self.eps_zero)));
        }
        if !(self.eps_line > 0.0 && self.eps_line < 0.5) {
            return Err(RhError::Tolerances(format!("eps_line must lie in (0, 0.5), got {}", self.eps_line)));
        }
        if !(self.refine_radius > 0.0) || !self.refine_radius.is_finite() {
            return Err(RhError::Tolerances(format!(
                "refine_radius must be positive, got {}",
                self.refine_radius
            )));
        }
        Ok(())
    }
}

/// Discrete performance class of a sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ScoreClass {
    OnLineZero,
    Neutral,
    OffLineZero,
}

impl ScoreClass {
    pub fn score(self) -> Score {
        match self {
            ScoreClass::OnLineZero => Score::ONE,
            ScoreClass::Neutral => Score::ZERO,
            ScoreClass::OffLineZero => Score::NegInf,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredSample {
    pub s: ComplexValue,
    pub zeta_value: ComplexValue,
    pub zeta_mag: f64,
    pub score: ScoreClass,
    /// The confirmed critical-line zero, present iff `score` is `OnLineZero`.
    pub refined: Option<ZeroRecord>,
}

/// Score one point of the open strip with the default evaluator.
pub fn score_sample(s: ComplexValue, tol: &Tolerances) -> Result<ScoredSample, RhError> {
    score_sample_with(s, tol, &ZeroScanner::default())
}

pub fn score_sample_with(s: ComplexValue, tol: &Tolerances, scanner: &ZeroScanner) -> Result<ScoredSample, RhError> {
    if !(s.re > 0.0 && s.re < 1.0) || !s.im.is_finite() {
        return Err(RhError::OutOfStrip(s));
    }
    let zeta_value = zeta(s, &scanner.cfg)?;
    let zeta_mag = zeta_value.norm();
    let in_band = (s.re - 0.5).abs() <= tol.eps_line;

    let (score, refined) = if in_band {
        let t = s.im.abs();
        // Bracket must stay within the scanner's validity range.
        let radius = tol.refine_radius.min(MAX_ORDINATE - t);
        match scanner.refine(t, radius) {
            Ok(mut zero) => {
                zero.t = zero.t.copysign(s.im);
                (ScoreClass::OnLineZero, Some(zero))
            }
            Err(ZeroError::NoSignChange { .. }) | Err(ZeroError::Range { .. }) => (ScoreClass::Neutral, None),
            Err(e) => return Err(e.into()),
        }
    } else if zeta_mag <= tol.eps_zero {
        (ScoreClass::OffLineZero, None)
    } else {
        (ScoreClass::Neutral, None)
    };
    Ok(ScoredSample { s, zeta_value, zeta_mag, score, refined })
}

/// `n` points with `σ` uniform on the open interval and `t` uniform on the
/// closed one. Point `i` only uses `streams.draw(i)`.
pub fn sample_region(region: &StripRegion, n: usize, streams: &RngStreams) -> Vec<ComplexValue> {
    (0..n)
        .map(|i| {
            let mut rng = streams.draw(i);
            let sigma = loop {
                let x = rng.random_range(region.sigma_lo..region.sigma_hi);
                if x > region.sigma_lo {
                    break x;
                }
            };
            let t = rng.random_range(region.t_lo..=region.t_hi);
            ComplexValue::new(sigma, t)
        })
        .collect()
}

/// `n_v` categorical draws from the weighted elites, each optionally moved
/// by a uniform offset in the square of half-width `jitter` and clipped
/// back into `region`.
pub fn resample_elites(
    elites: &[(ComplexValue, f64)],
    n_v: usize,
    jitter: f64,
    region: &StripRegion,
    streams: &RngStreams,
) -> Result<Vec<ComplexValue>, RhError> {
    if n_v == 0 {
        return Ok(Vec::new());
    }
    if elites.is_empty() {
        return Err(RhError::EmptyElite);
    }
    let weights: Vec<f64> = elites.iter().map(|(_, q)| *q).collect();
    let cumulative = cumulative_weights(&weights);
    Ok((0..n_v)
        .map(|i| {
            let mut rng = streams.draw(i);
            let source = elites[categorical(&cumulative, &mut rng)].0;
            if jitter > 0.0 {
                let d_sigma = rng.random_range(-jitter..=jitter);
                let d_t = rng.random_range(-jitter..=jitter);
                region.clip(source + ComplexValue::new(d_sigma, d_t))
            } else {
                source
            }
        })
        .collect())
}

/// Counts of trials and of the tracked event.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencyTracker {
    pub n: u64,
    pub mu: u64,
    pub epsilon: f64,
}

impl FrequencyTracker {
    pub fn new(epsilon: f64) -> Self {
        Self { n: 0, mu: 0, epsilon }
    }

    pub fn record(&mut self, occurred: bool) {
        self.n += 1;
        self.mu += u64::from(occurred);
    }
}

impl Default for FrequencyTracker {
    fn default() -> Self {
        Self::new(1e-3)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencyEstimate {
    pub freq: f64,
    pub reference: f64,
    /// `|μ/n - reference| < ε`
    pub within_epsilon: bool,
}

pub fn empirical_frequency(tracker: &FrequencyTracker, reference: f64) -> Result<FrequencyEstimate, RhError> {
    if tracker.n == 0 {
        return Err(RhError::ZeroTrials);
    }
    let freq = tracker.mu as f64 / tracker.n as f64;
    Ok(FrequencyEstimate { freq, reference, within_epsilon: (freq - reference).abs() < tracker.epsilon })
}

type Scorer<'a> = dyn Fn(ComplexValue) -> Result<ScoredSample, RhError> + Sync + 'a;

/// The strip search as a [`CeProblem`].
struct StripProblem<'a> {
    region: StripRegion,
    jitter: f64,
    scorer: &'a Scorer<'a>,
}

impl CeProblem for StripProblem<'_> {
    type Sample = ComplexValue;
    type Detail = ScoredSample;
    type Error = RhError;

    fn sample_fresh(&self, count: usize, streams: &RngStreams) -> Vec<ComplexValue> {
        sample_region(&self.region, count, streams)
    }

    fn resample_elites(
        &self,
        elites: &[(ComplexValue, f64)],
        count: usize,
        streams: &RngStreams,
    ) -> Result<Vec<ComplexValue>, RhError> {
        resample_elites(elites, count, self.jitter, &self.region, streams)
    }

    fn evaluate(&self, s: &ComplexValue) -> Result<(Score, ScoredSample), RhError> {
        let scored = (self.scorer)(*s)?;
        Ok((scored.score.score(), scored))
    }
}

/// One finished CEOR round as handed to observers.
pub type CeorRound = RoundState<ComplexValue, ScoredSample>;

/// A configured strip search.
pub struct CeorSearch<'a> {
    pub region: StripRegion,
    pub params: CeParams,
    pub tolerances: Tolerances,
    /// Half-width of the resampling perturbation; 0 resamples elites verbatim.
    pub jitter: f64,
    pub scanner: ZeroScanner,
    scorer: Option<Box<Scorer<'a>>>,
}

impl<'a> CeorSearch<'a> {
    pub fn new(region: StripRegion, params: CeParams, tolerances: Tolerances) -> Self {
        Self { region, params, tolerances, jitter: 0.0, scanner: ZeroScanner::default(), scorer: None }
    }

    pub fn with_jitter(mut self, jitter: f64) -> Self {
        self.jitter = jitter;
        self
    }

    pub fn with_scanner(mut self, scanner: ZeroScanner) -> Self {
        self.scanner = scanner;
        self
    }

    /// Replace the zeta-based scorer, e.g. to exercise the counterexample
    /// path.
    pub fn with_scorer<F>(mut self, scorer: F) -> Self
    where
        F: Fn(ComplexValue) -> Result<ScoredSample, RhError> + Sync + 'a,
    {
        self.scorer = Some(Box::new(scorer));
        self
    }

    fn validate(&self) -> Result<(), RhError> {
        self.region.validate()?;
        self.tolerances.validate()?;
        self.params.validate()?;
        if !(self.jitter >= 0.0) || !self.jitter.is_finite() {
            return Err(RhError::Tolerances(format!("jitter must be >= 0, got {}", self.jitter)));
        }
        Ok(())
    }

    pub fn run(&self) -> Result<CeorReport, RhError> {
        self.run_observed(|_| {})
    }

    /// Run the search, handing every finished round to `observer`.
    pub fn run_observed<F: FnMut(&CeorRound)>(&self, mut observer: F) -> Result<CeorReport, RhError> {
        self.validate()?;
        let default_scorer = |s: ComplexValue| score_sample_with(s, &self.tolerances, &self.scanner);
        let scorer: &Scorer<'_> = match &self.scorer {
            Some(f) => f.as_ref(),
            None => &default_scorer,
        };
        let problem = StripProblem { region: self.region, jitter: self.jitter, scorer };

        let mut tracker = FrequencyTracker::default();
        let mut zeros: Vec<ZeroHit> = Vec::new();
        let mut counterexamples = Vec::new();
        let mut enrichment = Vec::new();

        let result = run_ce_observed(&problem, &self.params, |state| {
            for e in &state.samples {
                tracker.record(e.detail.score == ScoreClass::OffLineZero);
                match e.detail.score {
                    ScoreClass::OffLineZero => counterexamples.push(e.detail.clone()),
                    ScoreClass::OnLineZero => {
                        if let Some(z) = e.detail.refined {
                            merge_zero(&mut zeros, z);
                        }
                    }
                    ScoreClass::Neutral => {}
                }
            }
            let online_elites = state
                .elites
                .iter()
                .filter(|&&i| state.samples[i].detail.score == ScoreClass::OnLineZero)
                .count();
            enrichment.push(online_elites as f64 / state.elites.len().max(1) as f64);
            observer(state);
        })?;

        let rounds = result
            .rounds
            .into_iter()
            .zip(enrichment)
            .map(|(base, elite_online_fraction)| CeorRoundSummary { base, elite_online_fraction })
            .collect();
        Ok(CeorReport {
            region: self.region,
            params: self.params,
            tolerances: self.tolerances,
            jitter: self.jitter,
            rounds,
            zeros,
            counterexamples,
            tracker,
            stop_reason: result.stop_reason,
        })
    }
}

fn merge_zero(zeros: &mut Vec<ZeroHit>, z: ZeroRecord) {
    let pos = zeros.partition_point(|h| h.t < z.t - ZERO_MERGE_DISTANCE);
    if zeros.get(pos).is_some_and(|h| (h.t - z.t).abs() <= ZERO_MERGE_DISTANCE) {
        return;
    }
    zeros.insert(pos, ZeroHit { t: z.t, residual: z.residual });
}

/// Run the strip search with literal (unjittered) elite resampling.
pub fn run_ceor(region: StripRegion, params: CeParams, tolerances: Tolerances) -> Result<CeorReport, RhError> {
    CeorSearch::new(region, params, tolerances).run()
}

impl CeorReport {
    pub fn found_counterexample(&self) -> bool {
        self.stop_reason == StopReason::NegativeSum
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ce_engine::StreamPurpose;

    #[test]
    fn out_of_strip_is_rejected() {
        let tol = Tolerances::default();
        for s in [ComplexValue::new(0.0, 5.0), ComplexValue::new(1.0, 5.0), ComplexValue::new(-0.2, 1.0)] {
            assert!(matches!(score_sample(s, &tol), Err(RhError::OutOfStrip(_))));
        }
    }

    #[test]
    fn tolerance_bounds() {
        assert!(Tolerances::default().validate().is_ok());
        assert!(Tolerances { eps_zero: 1e-13, ..Tolerances::default() }.validate().is_err());
        assert!(Tolerances { eps_line: 0.5, ..Tolerances::default() }.validate().is_err());
        assert!(Tolerances { refine_radius: 0.0, ..Tolerances::default() }.validate().is_err());
    }

    #[test]
    fn region_bounds() {
        assert!(StripRegion::new(10.0, 30.0).validate().is_ok());
        assert!(StripRegion::new(3.0, 3.0).validate().is_err());
        let bad = StripRegion { sigma_lo: 0.6, sigma_hi: 0.4, t_lo: 0.0, t_hi: 1.0 };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn empty_draws() {
        let streams = RngStreams::new(1, 1, StreamPurpose::Fresh);
        assert!(sample_region(&StripRegion::new(0.0, 1.0), 0, &streams).is_empty());
        assert_eq!(resample_elites(&[], 3, 0.0, &StripRegion::new(0.0, 1.0), &streams), Err(RhError::EmptyElite));
        assert!(resample_elites(&[], 0, 0.0, &StripRegion::new(0.0, 1.0), &streams).unwrap().is_empty());
    }

    #[test]
    fn frequency() {
        let t = FrequencyTracker { n: 1_000_000, mu: 0, epsilon: 1e-3 };
        let f = empirical_frequency(&t, 0.0).unwrap();
        assert_eq!(f.freq, 0.0);
        assert!(f.within_epsilon);
        let t = FrequencyTracker { n: 100, mu: 3, epsilon: 0.01 };
        let f = empirical_frequency(&t, 0.0).unwrap();
        assert!((f.freq - 0.03).abs() < 1e-15);
        assert!(!f.within_epsilon);
        assert_eq!(empirical_frequency(&FrequencyTracker::default(), 0.0), Err(RhError::ZeroTrials));
    }

    #[test]
    fn merging_keeps_zeros_sorted_and_distinct() {
        let mut zeros = Vec::new();
        for t in [21.0, 14.0, 21.0 + 1e-8, 25.0, 14.0 - 1e-9] {
            merge_zero(&mut zeros, ZeroRecord { t, residual: 0.0, bracket_width: 1e-10 });
        }
        let ts: Vec<f64> = zeros.iter().map(|z| z.t).collect();
        assert_eq!(ts, [14.0, 21.0, 25.0]);
    }
}

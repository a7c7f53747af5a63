//! Generic cross-entropy optimisation over a discrete-score sample space.
//!
//! Each round draws `M` samples (fresh draws in round one; afterwards `N_v`
//! resampled from the previous elite set by its normalized weights plus
//! `M - N_v` fresh draws), scores them, takes the `ρ`-quantile benchmark
//! `γ`, selects the elite set, and updates the elite weights:
//!
//! ```text
//! q_e = indicator / |B|                    (per elite)
//! q_m = c·q_e + (1 - c)·q_prev             (smoothing)
//! q_n = q_m / Σ_B q_m                      (normalization over the elites)
//! N_v = round(v · M · ρ)
//! ```
//!
//! The run stops when the score sum of a round is negative, when the last
//! `l + 1` benchmarks are equal, or at `max_rounds`.
//!
//! Weights live on a pool of candidates keyed by sample identity (exact
//! equality), so `q_prev` for a candidate that is an elite again refers to
//! its own earlier weight. Candidates that drop out of the elite set decay
//! by `(1 - c)` per round and are pruned below [`PRUNE_MASS`].

mod rng;
mod score;

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use rng::{categorical, cumulative_weights, derive_seed, mix64, RngStreams, StreamPurpose};
pub use score::Score;

/// Pool entries whose smoothed weight falls below this are dropped.
pub const PRUNE_MASS: f64 = 1e-6;

/// Slack for `ρ·M` products such as `0.01 * 2000` that land a hair above
/// an integer.
const QUOTA_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CeError {
    #[error("no scores to rank")]
    EmptyInput,
    #[error("elite set is empty")]
    EmptyElite,
    #[error("elite weights sum to zero")]
    ZeroMass,
    #[error("invalid CE parameters: {0}")]
    Config(String),
}

/// Cross-entropy hyper-parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CeParams {
    /// Samples per round, `M`.
    pub samples: usize,
    /// Elite quantile `ρ`.
    pub rho: f64,
    /// Favorability factor `v`.
    pub v: f64,
    /// Smoothing constant `c`.
    pub c: f64,
    /// Stability window `l`: stop once `l + 1` consecutive benchmarks agree.
    pub l: usize,
    pub max_rounds: usize,
    pub seed: u64,
}

impl Default for CeParams {
    fn default() -> Self {
        Self { samples: 2000, rho: 0.01, v: 10.0, c: 0.7, l: 5, max_rounds: 50, seed: 42 }
    }
}

impl CeParams {
    pub fn validate(&self) -> Result<(), CeError> {
        let fail = |msg: String| Err(CeError::Config(msg));
        if self.samples == 0 {
            return fail("samples (M) must be positive".into());
        }
        if !(self.rho > 0.0 && self.rho < 1.0) {
            return fail(format!("rho must lie in (0, 1), got {}", self.rho));
        }
        if !(self.v >= 1.0) || !self.v.is_finite() {
            return fail(format!("v must be a finite value >= 1, got {}", self.v));
        }
        if !(0.0..=1.0).contains(&self.c) {
            return fail(format!("c must lie in [0, 1], got {}", self.c));
        }
        if self.l == 0 {
            return fail("l must be positive".into());
        }
        if self.max_rounds == 0 {
            return fail("max_rounds must be positive".into());
        }
        let nv = self.v * self.samples as f64 * self.rho;
        if nv < 1.0 || nv > self.samples as f64 {
            return fail(format!("v*M*rho = {nv} must lie in [1, M = {}]", self.samples));
        }
        Ok(())
    }

    /// `⌈ρ·M⌉`, the elite quota.
    pub fn elite_quota(&self) -> usize {
        elite_quota(self.samples, self.rho)
    }
}

/// `⌈ρ·n⌉`, clamped to `[1, n]`.
pub fn elite_quota(n: usize, rho: f64) -> usize {
    let k = (rho * n as f64 - QUOTA_SLACK).ceil();
    (k.max(1.0) as usize).min(n.max(1))
}

/// The `⌈ρ·|scores|⌉`-th largest score: the largest `γ` such that at least
/// that many scores are `≥ γ`.
pub fn quantile_benchmark(scores: &[Score], rho: f64) -> Result<Score, CeError> {
    if scores.is_empty() {
        return Err(CeError::EmptyInput);
    }
    let k = elite_quota(scores.len(), rho);
    let mut sorted = scores.to_vec();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    Ok(sorted[k - 1])
}

/// Indices of the top `⌈ρ·n⌉` scores that also reach `gamma`, ranked by
/// descending score with ties broken by ascending index.
pub fn elite_set(scores: &[Score], gamma: Score, rho: f64) -> Vec<usize> {
    if scores.is_empty() {
        return Vec::new();
    }
    let quota = elite_quota(scores.len(), rho);
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].cmp(&scores[a]).then(a.cmp(&b)));
    order.truncate(quota);
    order.retain(|&i| scores[i] >= gamma);
    order
}

/// Indicator-over-indicator-sum weights: `1/|B|` on each elite index, zero
/// elsewhere. The result has one entry per sample.
pub fn update_probabilities(elite: &[usize], sample_count: usize) -> Result<Vec<f64>, CeError> {
    if elite.is_empty() {
        return Err(CeError::EmptyElite);
    }
    let mut q = vec![0.0; sample_count];
    let share = 1.0 / elite.len() as f64;
    for &i in elite {
        q[i] += share;
    }
    Ok(q)
}

/// `c·q_e + (1 - c)·q_prev`, elementwise; a missing entry counts as zero.
pub fn smooth_probabilities(q_e: &[f64], q_prev: &[f64], c: f64) -> Vec<f64> {
    let len = q_e.len().max(q_prev.len());
    (0..len)
        .map(|i| {
            let e = q_e.get(i).copied().unwrap_or(0.0);
            let p = q_prev.get(i).copied().unwrap_or(0.0);
            c * e + (1.0 - c) * p
        })
        .collect()
}

/// Rescale to unit sum.
pub fn normalize_probabilities(q_m: &[f64]) -> Result<Vec<f64>, CeError> {
    let total: f64 = q_m.iter().sum();
    if !(total > 0.0) {
        return Err(CeError::ZeroMass);
    }
    Ok(q_m.iter().map(|&q| q / total).collect())
}

/// `N_v = round(v·M·ρ)` (half away from zero), clamped to `[0, M]`.
pub fn elite_sample_count(params: &CeParams) -> usize {
    let nv = (params.v * params.samples as f64 * params.rho).round();
    if nv <= 0.0 {
        0
    } else {
        (nv as usize).min(params.samples)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StopReason {
    GammaStable,
    NegativeSum,
    MaxRounds,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Continue,
    Stop(StopReason),
}

/// Termination rules, checked in order: negative score sum, benchmark
/// stable over the last `l + 1` rounds, round cap.
///
/// `gamma_history` holds one benchmark per completed round, so its length
/// is the current round number.
pub fn check_termination(gamma_history: &[Score], scores: &[Score], params: &CeParams) -> Termination {
    if Score::sum(scores).is_negative() {
        return Termination::Stop(StopReason::NegativeSum);
    }
    let window = params.l + 1;
    if gamma_history.len() >= window {
        let tail = &gamma_history[gamma_history.len() - window..];
        if tail.iter().all(|g| *g == tail[0]) {
            return Termination::Stop(StopReason::GammaStable);
        }
    }
    if gamma_history.len() >= params.max_rounds {
        return Termination::Stop(StopReason::MaxRounds);
    }
    Termination::Continue
}

/// A problem the engine can optimise.
///
/// `evaluate` must be a pure function of the sample; the engine calls it
/// from several threads at once.
pub trait CeProblem: Sync {
    type Sample: Clone + PartialEq + Send + Sync;
    type Detail: Clone + Send;
    type Error: Send;

    /// `count` fresh draws. Draw `i` must only use `streams.draw(i)`.
    fn sample_fresh(&self, count: usize, streams: &RngStreams) -> Vec<Self::Sample>;

    /// `count` draws from the elite candidates by their weights. The
    /// weights are normalized and `elites` is nonempty when `count > 0`.
    fn resample_elites(
        &self,
        elites: &[(Self::Sample, f64)],
        count: usize,
        streams: &RngStreams,
    ) -> Result<Vec<Self::Sample>, Self::Error>;

    fn evaluate(&self, sample: &Self::Sample) -> Result<(Score, Self::Detail), Self::Error>;
}

/// One evaluated sample of a round.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluated<S, D> {
    pub sample: S,
    pub score: Score,
    pub detail: D,
}

/// A distinct elite sample and its weights for the round.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EliteCandidate<S> {
    pub sample: S,
    pub q_e: f64,
    pub q_m: f64,
    pub q_n: f64,
}

/// Complete state of one finished round.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundState<S, D> {
    pub round: usize,
    pub gamma: Score,
    pub n_v: usize,
    /// The first `n_v` entries are elite resamples, the rest fresh draws.
    pub samples: Vec<Evaluated<S, D>>,
    /// Elite indices into `samples`, best first.
    pub elites: Vec<usize>,
    /// Distinct elite samples in first-appearance order of `elites`.
    pub candidates: Vec<EliteCandidate<S>>,
}

impl<S, D> RoundState<S, D> {
    pub fn scores(&self) -> impl Iterator<Item = Score> + '_ {
        self.samples.iter().map(|e| e.score)
    }

    pub fn summary(&self) -> RoundSummary {
        let mut counts: BTreeMap<Score, usize> = BTreeMap::new();
        for s in self.scores() {
            *counts.entry(s).or_default() += 1;
        }
        RoundSummary {
            r: self.round,
            gamma: self.gamma,
            elite_count: self.elites.len(),
            n_v: self.n_v,
            score_histogram: counts
                .into_iter()
                .rev()
                .map(|(score, count)| ScoreBin { score, count })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreBin {
    pub score: Score,
    pub count: usize,
}

/// Per-round record kept in results and reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundSummary {
    pub r: usize,
    pub gamma: Score,
    pub elite_count: usize,
    pub n_v: usize,
    /// Score counts, highest score first.
    pub score_histogram: Vec<ScoreBin>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CeResult<S> {
    pub params: CeParams,
    pub rounds: Vec<RoundSummary>,
    pub stop_reason: StopReason,
    /// Elite candidates of the final round.
    pub best_samples: Vec<EliteCandidate<S>>,
}

#[derive(Serialize)]
struct CeResultDocument<'a> {
    params: &'a CeParams,
    rounds: &'a [RoundSummary],
    stop_reason: StopReason,
}

impl<S> CeResult<S> {
    /// JSON document with the parameter echo, per-round summaries and the
    /// stop reason.
    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(&CeResultDocument {
            params: &self.params,
            rounds: &self.rounds,
            stop_reason: self.stop_reason,
        })
    }
}

/// Why a run failed.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum RunError<E> {
    #[error(transparent)]
    Ce(#[from] CeError),
    #[error("problem error: {0:?}")]
    Problem(E),
}

/// Run the cross-entropy loop without observing rounds.
pub fn run_ce<P: CeProblem>(problem: &P, params: &CeParams) -> Result<CeResult<P::Sample>, RunError<P::Error>> {
    run_ce_observed(problem, params, |_| {})
}

/// Run the cross-entropy loop, handing every finished round to `observer`.
pub fn run_ce_observed<P, F>(
    problem: &P,
    params: &CeParams,
    mut observer: F,
) -> Result<CeResult<P::Sample>, RunError<P::Error>>
where
    P: CeProblem,
    F: FnMut(&RoundState<P::Sample, P::Detail>),
{
    params.validate()?;
    let n_v_target = elite_sample_count(params);
    let mut pool: Vec<(P::Sample, f64)> = Vec::new();
    let mut previous: Vec<EliteCandidate<P::Sample>> = Vec::new();
    let mut gammas = Vec::new();
    let mut rounds = Vec::new();

    for round in 1.. {
        let n_v = if round == 1 { 0 } else { n_v_target };
        let mut batch = Vec::with_capacity(params.samples);
        if n_v > 0 {
            let weighted: Vec<(P::Sample, f64)> =
                previous.iter().map(|c| (c.sample.clone(), c.q_n)).collect();
            let streams = RngStreams::new(params.seed, round, StreamPurpose::Resample);
            let drawn = problem
                .resample_elites(&weighted, n_v, &streams)
                .map_err(RunError::Problem)?;
            debug_assert_eq!(drawn.len(), n_v);
            batch.extend(drawn);
        }
        let streams = RngStreams::new(params.seed, round, StreamPurpose::Fresh);
        batch.extend(problem.sample_fresh(params.samples - n_v, &streams));

        let samples = batch
            .into_par_iter()
            .map(|sample| {
                let (score, detail) = problem.evaluate(&sample)?;
                Ok(Evaluated { sample, score, detail })
            })
            .collect::<Result<Vec<_>, P::Error>>()
            .map_err(RunError::Problem)?;

        let scores: Vec<Score> = samples.iter().map(|e| e.score).collect();
        let gamma = quantile_benchmark(&scores, params.rho)?;
        let elites = elite_set(&scores, gamma, params.rho);
        let candidates = update_pool(&mut pool, &samples, &elites, params.c)?;

        let state = RoundState { round, gamma, n_v, samples, elites, candidates };
        observer(&state);
        rounds.push(state.summary());
        gammas.push(gamma);

        let decision = check_termination(&gammas, &scores, params);
        previous = state.candidates;
        if let Termination::Stop(stop_reason) = decision {
            return Ok(CeResult { params: *params, rounds, stop_reason, best_samples: previous });
        }
    }
    unreachable!("round loop only exits through termination")
}

/// Fold this round's elites into the weight pool and return the elite
/// candidates with their `q_e`, `q_m` and `q_n`.
fn update_pool<S: Clone + PartialEq, D>(
    pool: &mut Vec<(S, f64)>,
    samples: &[Evaluated<S, D>],
    elites: &[usize],
    c: f64,
) -> Result<Vec<EliteCandidate<S>>, CeError> {
    let q_e_per_index = update_probabilities(elites, samples.len())?;

    // Distinct elite samples, each carrying the summed indicator share.
    let mut distinct: Vec<(S, f64)> = Vec::new();
    for &i in elites {
        let sample = &samples[i].sample;
        match distinct.iter_mut().find(|(s, _)| s == sample) {
            Some((_, q)) => *q += q_e_per_index[i],
            None => distinct.push((sample.clone(), q_e_per_index[i])),
        }
    }

    let previous_weight = |sample: &S| {
        pool.iter().find(|(s, _)| s == sample).map_or(0.0, |(_, q)| *q)
    };
    let q_e: Vec<f64> = distinct.iter().map(|(_, q)| *q).collect();
    let q_prev: Vec<f64> = distinct.iter().map(|(s, _)| previous_weight(s)).collect();
    let q_m = smooth_probabilities(&q_e, &q_prev, c);
    let q_n = normalize_probabilities(&q_m)?;

    let mut next_pool: Vec<(S, f64)> = distinct
        .iter()
        .zip(&q_m)
        .map(|((s, _), &q)| (s.clone(), q))
        .collect();
    for (sample, q) in pool.iter() {
        if distinct.iter().any(|(s, _)| s == sample) {
            continue;
        }
        let decayed = (1.0 - c) * q;
        if decayed >= PRUNE_MASS {
            next_pool.push((sample.clone(), decayed));
        }
    }
    *pool = next_pool;

    Ok(distinct
        .into_iter()
        .zip(q_e)
        .zip(q_m)
        .zip(q_n)
        .map(|((((sample, _), q_e), q_m), q_n)| EliteCandidate { sample, q_e, q_m, q_n })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zeros_with(n: usize, ones: &[usize]) -> Vec<Score> {
        let mut v = vec![Score::ZERO; n];
        for &i in ones {
            v[i] = Score::ONE;
        }
        v
    }

    #[test]
    fn benchmark_examples() {
        let scores = zeros_with(100, &[37]);
        assert_eq!(quantile_benchmark(&scores, 0.01).unwrap(), Score::ONE);
        assert_eq!(quantile_benchmark(&[Score::ZERO; 50], 0.01).unwrap(), Score::ZERO);
        let mut scores = vec![Score::ZERO; 99];
        scores.push(Score::NegInf);
        assert_eq!(quantile_benchmark(&scores, 0.01).unwrap(), Score::ZERO);
        assert_eq!(quantile_benchmark(&[], 0.5), Err(CeError::EmptyInput));
    }

    #[test]
    fn quota_handles_float_products() {
        assert_eq!(elite_quota(2000, 0.01), 20);
        assert_eq!(elite_quota(100, 0.01), 1);
        assert_eq!(elite_quota(10, 0.01), 1);
        assert_eq!(elite_quota(150, 0.01), 2);
        assert_eq!(elite_quota(3, 0.99), 3);
    }

    #[test]
    fn elite_examples() {
        let scores = zeros_with(100, &[42]);
        let g = quantile_benchmark(&scores, 0.01).unwrap();
        assert_eq!(elite_set(&scores, g, 0.01), [42]);

        let flat = vec![Score::ZERO; 100];
        assert_eq!(elite_set(&flat, Score::ZERO, 0.05), [0, 1, 2, 3, 4]);

        let scores = zeros_with(100, &[10, 50, 90]);
        let g = quantile_benchmark(&scores, 0.05).unwrap();
        assert_eq!(g, Score::ZERO);
        assert_eq!(elite_set(&scores, g, 0.05), [10, 50, 90, 0, 1]);
    }

    #[test]
    fn probability_updates() {
        let q = update_probabilities(&[1, 3, 5, 7], 8).unwrap();
        assert_eq!(q, [0.0, 0.25, 0.0, 0.25, 0.0, 0.25, 0.0, 0.25]);
        assert_eq!(update_probabilities(&[2], 3).unwrap()[2], 1.0);
        assert_eq!(update_probabilities(&[], 3), Err(CeError::EmptyElite));

        assert_eq!(smooth_probabilities(&[1.0], &[0.0], 0.5), [0.5]);
        assert_eq!(smooth_probabilities(&[0.3, 0.7], &[0.3, 0.7], 0.4), [0.3, 0.7]);
        assert_eq!(smooth_probabilities(&[0.2], &[0.9], 1.0), [0.2]);
        assert_eq!(smooth_probabilities(&[0.5, 0.5], &[1.0], 0.5), [0.75, 0.25]);

        assert_eq!(normalize_probabilities(&[0.2, 0.2]).unwrap(), [0.5, 0.5]);
        assert_eq!(normalize_probabilities(&[0.4]).unwrap(), [1.0]);
        let q = normalize_probabilities(&[0.3, 0.1]).unwrap();
        assert!((q[0] - 0.75).abs() < 1e-15 && (q[1] - 0.25).abs() < 1e-15);
        assert_eq!(normalize_probabilities(&[0.0, 0.0]), Err(CeError::ZeroMass));
    }

    #[test]
    fn favorability_count() {
        let p = CeParams { samples: 1000, ..CeParams::default() };
        assert_eq!(elite_sample_count(&p), 100);
        let p = CeParams { samples: 100, v: 1.0, ..CeParams::default() };
        assert_eq!(elite_sample_count(&p), 1);
        let p = CeParams { samples: 100, v: 50.0, rho: 0.5, ..CeParams::default() };
        assert_eq!(elite_sample_count(&p), 100);
        let p = CeParams { samples: 10, v: 2.5, rho: 0.1, ..CeParams::default() };
        assert_eq!(elite_sample_count(&p), 3, "2.5 rounds half away from zero");
    }

    #[test]
    fn params_validation() {
        assert!(CeParams::default().validate().is_ok());
        let bad = [
            CeParams { samples: 0, ..CeParams::default() },
            CeParams { rho: 1.0, ..CeParams::default() },
            CeParams { v: 0.5, ..CeParams::default() },
            CeParams { c: 1.5, ..CeParams::default() },
            CeParams { l: 0, ..CeParams::default() },
            CeParams { samples: 5, ..CeParams::default() },
            CeParams { v: 200.0, ..CeParams::default() },
        ];
        for p in bad {
            assert!(p.validate().is_err(), "{p:?}");
        }
    }

    #[test]
    fn termination_rules() {
        let p = CeParams::default();
        let ones = [Score::ONE; 6];
        assert_eq!(
            check_termination(&ones, &[Score::ZERO, Score::NegInf], &p),
            Termination::Stop(StopReason::NegativeSum)
        );
        assert_eq!(
            check_termination(&ones, &[Score::ZERO], &p),
            Termination::Stop(StopReason::GammaStable)
        );
        let short = [Score::ZERO, Score::ZERO, Score::ONE, Score::ONE, Score::ONE];
        assert_eq!(check_termination(&short, &[Score::ZERO], &p), Termination::Continue);
        let capped = CeParams { max_rounds: 5, ..p };
        assert_eq!(
            check_termination(&short, &[Score::ZERO], &capped),
            Termination::Stop(StopReason::MaxRounds)
        );
        assert_eq!(
            check_termination(&[Score::Finite(-0.5)], &[Score::Finite(-0.5)], &p),
            Termination::Stop(StopReason::NegativeSum)
        );
    }
}

//! Nucleus filtering combined with beam search over accumulated path
//! probability.
//!
//! At each step every live beam is extended by the tokens that survive
//! [`top_p_filter`], each extension is scored by the product of its
//! (renormalized) step probabilities, and the `k` best paths overall are
//! kept. Selection is deterministic.

mod toy;

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use toy::ToyMarkovModel;

pub type TokenId = usize;

/// Slack on probability sums and on the nucleus threshold.
const MASS_TOLERANCE: f64 = 1e-9;
const NUCLEUS_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DecodeError {
    #[error("invalid distribution: {0}")]
    Distribution(String),
    #[error("path contains a zero-probability step")]
    ZeroStep,
    #[error("invalid decode parameters: {0}")]
    Params(String),
    #[error("invalid model: {0}")]
    Model(String),
    #[error("unknown token {0}")]
    UnknownToken(String),
}

/// A probability distribution over distinct tokens.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TokenDistribution {
    entries: Vec<(TokenId, f64)>,
}

impl TokenDistribution {
    pub fn new(entries: Vec<(TokenId, f64)>) -> Result<Self, DecodeError> {
        if entries.is_empty() {
            return Err(DecodeError::Distribution("no tokens".into()));
        }
        let mut ids: Vec<TokenId> = entries.iter().map(|e| e.0).collect();
        ids.sort_unstable();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return Err(DecodeError::Distribution("repeated token id".into()));
        }
        if let Some(&(id, p)) = entries.iter().find(|e| !(e.1 >= 0.0 && e.1 <= 1.0)) {
            return Err(DecodeError::Distribution(format!("token {id} has probability {p}")));
        }
        let total: f64 = entries.iter().map(|e| e.1).sum();
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(DecodeError::Distribution(format!("probabilities sum to {total}")));
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[(TokenId, f64)] {
        &self.entries
    }

    pub fn prob(&self, token: TokenId) -> f64 {
        self.entries.iter().find(|e| e.0 == token).map_or(0.0, |e| e.1)
    }

    pub fn total(&self) -> f64 {
        self.entries.iter().map(|e| e.1).sum()
    }

    /// Entries by descending probability, ties by ascending id.
    pub fn ranked(&self) -> Vec<(TokenId, f64)> {
        let mut v = self.entries.clone();
        v.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        v
    }
}

/// Keep the shortest highest-probability prefix whose mass reaches `p`,
/// renormalized. Zero-probability tokens are never kept. `p` is clamped to
/// `(0, 1]`.
pub fn top_p_filter(dist: &TokenDistribution, p: f64) -> TokenDistribution {
    let ranked: Vec<(TokenId, f64)> = dist.ranked().into_iter().filter(|e| e.1 > 0.0).collect();
    let target = p.min(1.0) - NUCLEUS_SLACK;
    let mut kept = 0;
    let mut mass = 0.0;
    for &(_, q) in &ranked {
        kept += 1;
        mass += q;
        if mass >= target {
            break;
        }
    }
    let entries = ranked[..kept].iter().map(|&(id, q)| (id, q / mass)).collect();
    TokenDistribution { entries }
}

/// `Π p_i` computed as the exponential of summed logs.
pub fn path_probability(steps: &[f64]) -> Result<f64, DecodeError> {
    Ok(log_path_probability(steps)?.exp())
}

pub fn log_path_probability(steps: &[f64]) -> Result<f64, DecodeError> {
    let mut total = 0.0;
    for &p in steps {
        if !(p > 0.0) {
            return Err(DecodeError::ZeroStep);
        }
        total += p.ln();
    }
    Ok(total)
}

/// A generated continuation and its accumulated probability.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Path {
    pub tokens: Vec<TokenId>,
    /// Sum of log step probabilities after filtering and renormalization.
    pub log_path_prob: f64,
    /// Same sum using the unfiltered model probabilities.
    pub raw_log_prob: f64,
}

impl Path {
    pub fn empty() -> Self {
        Self { tokens: Vec::new(), log_path_prob: 0.0, raw_log_prob: 0.0 }
    }

    pub fn probability(&self) -> f64 {
        self.log_path_prob.exp()
    }

    fn extend(&self, token: TokenId, filtered: f64, raw: f64) -> Path {
        let mut tokens = self.tokens.clone();
        tokens.push(token);
        Path { tokens, log_path_prob: self.log_path_prob + filtered.ln(), raw_log_prob: self.raw_log_prob + raw.ln() }
    }
}

/// Best first: higher probability, then lexicographically smaller tokens.
pub fn path_order(a: &Path, b: &Path) -> Ordering {
    b.log_path_prob.total_cmp(&a.log_path_prob).then_with(|| a.tokens.cmp(&b.tokens))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecodeParams {
    /// Nucleus mass.
    pub p: f64,
    /// Beam width.
    pub k: usize,
    /// Maximum number of generated tokens.
    pub max_len: usize,
    pub end_token: Option<TokenId>,
}

impl Default for DecodeParams {
    fn default() -> Self {
        Self { p: 0.9, k: 3, max_len: 5, end_token: None }
    }
}

impl DecodeParams {
    pub fn validate(&self) -> Result<(), DecodeError> {
        if !(self.p > 0.0 && self.p <= 1.0) {
            return Err(DecodeError::Params(format!("p must lie in (0, 1], got {}", self.p)));
        }
        if self.k == 0 {
            return Err(DecodeError::Params("k must be at least 1".into()));
        }
        if self.max_len == 0 {
            return Err(DecodeError::Params("max_len must be at least 1".into()));
        }
        Ok(())
    }

    fn is_finished(&self, path: &Path) -> bool {
        path.tokens.len() >= self.max_len || (self.end_token.is_some() && path.tokens.last().copied() == self.end_token)
    }
}

/// A next-token distribution as a pure function of the prefix.
pub trait NextTokenModel {
    fn vocab_size(&self) -> usize;
    fn next(&self, prefix: &[TokenId]) -> Result<TokenDistribution, DecodeError>;
}

/// Extend every unfinished beam by its filtered next tokens and keep the
/// best `k` of the extensions and the finished beams.
pub fn beam_step<M: NextTokenModel + ?Sized>(
    start: &[TokenId],
    beams: &[Path],
    model: &M,
    params: &DecodeParams,
) -> Result<Vec<Path>, DecodeError> {
    params.validate()?;
    let mut candidates = Vec::new();
    let mut prefix = start.to_vec();
    for beam in beams {
        if params.is_finished(beam) {
            candidates.push(beam.clone());
            continue;
        }
        prefix.truncate(start.len());
        prefix.extend_from_slice(&beam.tokens);
        let dist = model.next(&prefix)?;
        for (token, q) in top_p_filter(&dist, params.p).entries {
            candidates.push(beam.extend(token, q, dist.prob(token)));
        }
    }
    candidates.sort_by(path_order);
    candidates.truncate(params.k);
    Ok(candidates)
}

/// Beam search from `start` until every beam is finished. Paths come back
/// best first.
pub fn beam_decode<M: NextTokenModel + ?Sized>(
    model: &M,
    start: &[TokenId],
    params: &DecodeParams,
) -> Result<Vec<Path>, DecodeError> {
    params.validate()?;
    let mut beams = vec![Path::empty()];
    while beams.iter().any(|b| !params.is_finished(b)) {
        beams = beam_step(start, &beams, model, params)?;
    }
    Ok(beams)
}

/// The path that always takes the most probable (lowest id on ties) token.
pub fn greedy_decode<M: NextTokenModel + ?Sized>(
    model: &M,
    start: &[TokenId],
    params: &DecodeParams,
) -> Result<Path, DecodeError> {
    let mut path = Path::empty();
    let mut prefix = start.to_vec();
    while !params.is_finished(&path) {
        let dist = model.next(&prefix)?;
        let (token, q) = dist.ranked()[0];
        path = path.extend(token, q, q);
        prefix.push(token);
    }
    Ok(path)
}

/// Every path reachable with positive probability under the filter, best
/// first. Exponential in `max_len`; meant as a reference.
pub fn enumerate_paths<M: NextTokenModel + ?Sized>(
    model: &M,
    start: &[TokenId],
    params: &DecodeParams,
) -> Result<Vec<Path>, DecodeError> {
    params.validate()?;
    let mut done = Vec::new();
    let mut frontier = vec![Path::empty()];
    while let Some(path) = frontier.pop() {
        if params.is_finished(&path) {
            done.push(path);
            continue;
        }
        let mut prefix = start.to_vec();
        prefix.extend_from_slice(&path.tokens);
        let dist = model.next(&prefix)?;
        for (token, q) in top_p_filter(&dist, params.p).entries {
            frontier.push(path.extend(token, q, dist.prob(token)));
        }
    }
    done.sort_by(path_order);
    Ok(done)
}

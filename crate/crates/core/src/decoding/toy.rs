use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{DecodeError, NextTokenModel, TokenDistribution, TokenId};

/// On-disk form: `{vocab, start, transitions}` where `start` is aligned with
/// `vocab` and `transitions[a][b]` is `P(b | a)`. Missing entries are 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct ToyMarkovFile {
    vocab: Vec<String>,
    start: Vec<f64>,
    transitions: BTreeMap<String, BTreeMap<String, f64>>,
}

/// First-order Markov chain over a small vocabulary.
#[derive(Debug, Clone, PartialEq)]
pub struct ToyMarkovModel {
    vocab: Vec<String>,
    start: TokenDistribution,
    rows: Vec<TokenDistribution>,
}

fn row_distribution(probs: &[f64]) -> Result<TokenDistribution, DecodeError> {
    TokenDistribution::new(probs.iter().copied().enumerate().filter(|e| e.1 != 0.0).collect())
}

impl ToyMarkovModel {
    /// Build from a start vector and a row-stochastic transition matrix.
    pub fn new(vocab: Vec<String>, start: Vec<f64>, transitions: Vec<Vec<f64>>) -> Result<Self, DecodeError> {
        let n = vocab.len();
        if n == 0 {
            return Err(DecodeError::Model("empty vocabulary".into()));
        }
        let mut sorted = vocab.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != n {
            return Err(DecodeError::Model("repeated vocabulary entry".into()));
        }
        if start.len() != n || transitions.len() != n || transitions.iter().any(|r| r.len() != n) {
            return Err(DecodeError::Model(format!("tables must be {n} wide")));
        }
        let start = row_distribution(&start)?;
        let rows = transitions.iter().map(|r| row_distribution(r)).collect::<Result<_, _>>()?;
        Ok(Self { vocab, start, rows })
    }

    pub fn from_json(text: &str) -> Result<Self, DecodeError> {
        let file: ToyMarkovFile = serde_json::from_str(text).map_err(|e| DecodeError::Model(e.to_string()))?;
        let n = file.vocab.len();
        let index = |name: &str| {
            file.vocab.iter().position(|v| v == name).ok_or_else(|| DecodeError::UnknownToken(name.to_string()))
        };
        let mut matrix = vec![vec![0.0; n]; n];
        for (from, row) in &file.transitions {
            let i = index(from)?;
            for (to, &p) in row {
                matrix[i][index(to)?] = p;
            }
        }
        Self::new(file.vocab.clone(), file.start.clone(), matrix)
    }

    pub fn to_json(&self) -> serde_json::Result<String> {
        let n = self.vocab.len();
        let mut start = vec![0.0; n];
        for &(id, p) in self.start.entries() {
            start[id] = p;
        }
        let transitions = self
            .rows
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let row = row.entries().iter().map(|&(j, p)| (self.vocab[j].clone(), p)).collect();
                (self.vocab[i].clone(), row)
            })
            .collect();
        serde_json::to_string_pretty(&ToyMarkovFile { vocab: self.vocab.clone(), start, transitions })
    }

    /// Random model with vocabulary `t0, t1, ...`. Each row drops every
    /// entry with probability `sparsity` (keeping at least one) and
    /// normalizes uniform weights over the rest.
    pub fn random(vocab_size: usize, sparsity: f64, seed: u64) -> Result<Self, DecodeError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let row = |rng: &mut ChaCha8Rng| {
            let mut w: Vec<f64> =
                (0..vocab_size).map(|_| if rng.random::<f64>() < sparsity { 0.0 } else { rng.random::<f64>() + 1e-3 }).collect();
            if w.iter().all(|&x| x == 0.0) {
                w[rng.random_range(0..vocab_size)] = 1.0;
            }
            let total: f64 = w.iter().sum();
            w.iter().map(|x| x / total).collect::<Vec<f64>>()
        };
        let start = row(&mut rng);
        let transitions = (0..vocab_size).map(|_| row(&mut rng)).collect();
        let vocab = (0..vocab_size).map(|i| format!("t{i}")).collect();
        Self::new(vocab, start, transitions)
    }

    pub fn vocab(&self) -> &[String] {
        &self.vocab
    }

    pub fn token_id(&self, name: &str) -> Result<TokenId, DecodeError> {
        self.vocab.iter().position(|v| v == name).ok_or_else(|| DecodeError::UnknownToken(name.to_string()))
    }

    pub fn token_name(&self, id: TokenId) -> &str {
        &self.vocab[id]
    }
}

impl NextTokenModel for ToyMarkovModel {
    fn vocab_size(&self) -> usize {
        self.vocab.len()
    }

    fn next(&self, prefix: &[TokenId]) -> Result<TokenDistribution, DecodeError> {
        match prefix.last() {
            None => Ok(self.start.clone()),
            Some(&t) => self.rows.get(t).cloned().ok_or_else(|| DecodeError::UnknownToken(t.to_string())),
        }
    }
}

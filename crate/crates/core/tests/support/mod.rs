//! Fixtures shared by the integration tests.
#![allow(dead_code)]

use ceor::ce_engine::{categorical, cumulative_weights, CeProblem, RngStreams, Score};
use ceor::decoding::{NextTokenModel, Path, TokenDistribution, TokenId, ToyMarkovModel};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub type Cell = (u16, u16);

/// One scoring cell in a `side × side` grid.
pub struct Planted {
    pub side: u16,
    pub target: Cell,
}

impl CeProblem for Planted {
    type Sample = Cell;
    type Detail = ();
    type Error = ();

    fn sample_fresh(&self, count: usize, streams: &RngStreams) -> Vec<Cell> {
        (0..count)
            .map(|i| {
                let mut rng = streams.draw(i);
                (rng.random_range(0..self.side), rng.random_range(0..self.side))
            })
            .collect()
    }

    fn resample_elites(&self, elites: &[(Cell, f64)], count: usize, streams: &RngStreams) -> Result<Vec<Cell>, ()> {
        let weights: Vec<f64> = elites.iter().map(|(_, q)| *q).collect();
        let cum = cumulative_weights(&weights);
        Ok((0..count).map(|i| elites[categorical(&cum, &mut streams.draw(i))].0).collect())
    }

    fn evaluate(&self, cell: &Cell) -> Result<(Score, ()), ()> {
        let score = if *cell == self.target { Score::ONE } else { Score::ZERO };
        Ok((score, ()))
    }
}

/// Constant-score problem; optionally emits one -∞ at a fixed cell.
pub struct Flat {
    pub poison: Option<Cell>,
}

impl CeProblem for Flat {
    type Sample = Cell;
    type Detail = ();
    type Error = ();

    fn sample_fresh(&self, count: usize, streams: &RngStreams) -> Vec<Cell> {
        Planted { side: 100, target: (0, 0) }.sample_fresh(count, streams)
    }

    fn resample_elites(&self, elites: &[(Cell, f64)], count: usize, streams: &RngStreams) -> Result<Vec<Cell>, ()> {
        Planted { side: 100, target: (0, 0) }.resample_elites(elites, count, streams)
    }

    fn evaluate(&self, cell: &Cell) -> Result<(Score, ()), ()> {
        if self.poison.is_none() {
            return Ok((Score::ZERO, ()));
        }
        Ok((if cell.0 < 50 { Score::NegInf } else { Score::ZERO }, ()))
    }
}

pub fn planted() -> Planted {
    Planted { side: 100, target: (37, 81) }
}

/// All token sequences of length `1..=max_len` that either stop at
/// `end` or run to full length, with their raw probability products,
/// by counting through `vocab^len`.
pub fn brute_force(model: &ToyMarkovModel, max_len: usize, end: Option<TokenId>) -> Vec<(Vec<TokenId>, f64)> {
    let v = model.vocab_size();
    let mut out = Vec::new();
    for len in 1..=max_len {
        for code in 0..v.pow(len as u32) {
            let tokens: Vec<TokenId> = (0..len).map(|i| code / v.pow((len - 1 - i) as u32) % v).collect();
            let body_has_end = end.is_some_and(|e| tokens[..len - 1].contains(&e));
            let stops = len == max_len || end == Some(tokens[len - 1]);
            if body_has_end || !stops {
                continue;
            }
            let mut prob = 1.0;
            for i in 0..len {
                prob *= model.next(&tokens[..i]).unwrap().prob(tokens[i]);
            }
            if prob > 0.0 {
                out.push((tokens, prob));
            }
        }
    }
    out.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    out
}

/// Rankings agree up to reordering inside groups of equal probability.
pub fn same_ranking(paths: &[Path], oracle: &[(Vec<TokenId>, f64)]) -> Result<(), String> {
    if paths.len() != oracle.len() {
        return Err(format!("{} paths vs {} in the oracle", paths.len(), oracle.len()));
    }
    let mut i = 0;
    while i < oracle.len() {
        let mut j = i;
        while j < oracle.len() && (oracle[j].1 - oracle[i].1).abs() <= 1e-12 {
            j += 1;
        }
        let mut want: Vec<&Vec<TokenId>> = oracle[i..j].iter().map(|o| &o.0).collect();
        let mut got: Vec<&Vec<TokenId>> = paths[i..j].iter().map(|p| &p.tokens).collect();
        want.sort();
        got.sort();
        if want != got {
            return Err(format!("rank {i}: {got:?} vs {want:?}"));
        }
        for (p, o) in paths[i..j].iter().zip(&oracle[i..j]) {
            if (p.probability() - o.1).abs() > 1e-12 {
                return Err(format!("rank {i}: probability {} vs {}", p.probability(), o.1));
            }
        }
        i = j;
    }
    Ok(())
}

pub fn random_distribution(rng: &mut ChaCha8Rng) -> TokenDistribution {
    let n = rng.random_range(1..=12);
    let mut w: Vec<f64> = (0..n).map(|_| if rng.random::<f64>() < 0.15 { 0.0 } else { rng.random::<f64>() }).collect();
    // Duplicate values exercise tie-breaking.
    if n > 2 && rng.random::<bool>() {
        w[1] = w[0];
    }
    if w.iter().all(|&x| x == 0.0) {
        w[0] = 1.0;
    }
    let total: f64 = w.iter().sum();
    TokenDistribution::new(w.iter().map(|x| x / total).enumerate().collect()).unwrap()
}

use std::cmp::Ordering;
use std::fmt;

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// An extended-real performance score.
///
/// `NegInf` is a separate variant rather than `f64::NEG_INFINITY` so that
/// sums and comparisons never produce NaN.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Score {
    NegInf,
    Finite(f64),
}

impl Score {
    pub const ZERO: Score = Score::Finite(0.0);
    pub const ONE: Score = Score::Finite(1.0);

    pub fn is_neg_inf(self) -> bool {
        matches!(self, Score::NegInf)
    }

    /// Sum of scores; any `NegInf` makes the sum `NegInf`.
    pub fn sum<'a>(scores: impl IntoIterator<Item = &'a Score>) -> Score {
        let mut total = 0.0;
        for s in scores {
            match s {
                Score::NegInf => return Score::NegInf,
                Score::Finite(v) => total += v,
            }
        }
        Score::Finite(total)
    }

    pub fn is_negative(self) -> bool {
        match self {
            Score::NegInf => true,
            Score::Finite(v) => v < 0.0,
        }
    }
}

impl Eq for Score {}

impl Ord for Score {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Score::NegInf, Score::NegInf) => Ordering::Equal,
            (Score::NegInf, _) => Ordering::Less,
            (_, Score::NegInf) => Ordering::Greater,
            (Score::Finite(a), Score::Finite(b)) => a.total_cmp(b),
        }
    }
}

impl PartialOrd for Score {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Score {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Score::NegInf => f.write_str("-inf"),
            Score::Finite(v) => write!(f, "{v}"),
        }
    }
}

impl Serialize for Score {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Score::NegInf => serializer.serialize_str("-inf"),
            Score::Finite(v) => serializer.serialize_f64(*v),
        }
    }
}

impl<'de> Deserialize<'de> for Score {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct ScoreVisitor;

        impl Visitor<'_> for ScoreVisitor {
            type Value = Score;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a number or \"-inf\"")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Score, E> {
                Ok(Score::Finite(v))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Score, E> {
                Ok(Score::Finite(v as f64))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Score, E> {
                Ok(Score::Finite(v as f64))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<Score, E> {
                if v == "-inf" {
                    Ok(Score::NegInf)
                } else {
                    Err(E::invalid_value(de::Unexpected::Str(v), &self))
                }
            }
        }

        deserializer.deserialize_any(ScoreVisitor)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ordering_puts_neg_inf_first() {
        let mut v = vec![Score::ONE, Score::NegInf, Score::ZERO, Score::Finite(-3.0)];
        v.sort();
        assert_eq!(v, [Score::NegInf, Score::Finite(-3.0), Score::ZERO, Score::ONE]);
    }

    #[test]
    fn sums() {
        assert_eq!(Score::sum(&[Score::ONE, Score::ONE]), Score::Finite(2.0));
        assert!(Score::sum(&[Score::ONE, Score::NegInf, Score::ONE]).is_negative());
        assert!(!Score::sum(&[]).is_negative());
    }

    #[test]
    fn json_form() {
        let text = serde_json::to_string(&[Score::NegInf, Score::ONE]).unwrap();
        assert_eq!(text, r#"["-inf",1.0]"#);
        let back: Vec<Score> = serde_json::from_str(&text).unwrap();
        assert_eq!(back, [Score::NegInf, Score::ONE]);
    }
}

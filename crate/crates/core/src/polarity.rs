use std::fmt;

/// Binary document polarity, `y ∈ {−1, +1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Polarity {
    Negative,
    Positive,
}

impl Polarity {
    /// Sign of a score; a score of exactly zero counts as positive.
    pub fn from_score(score: f64) -> Polarity {
        if score >= 0.0 {
            Polarity::Positive
        } else {
            Polarity::Negative
        }
    }

    pub fn from_i64(value: i64) -> Option<Polarity> {
        match value {
            -1 => Some(Polarity::Negative),
            1 => Some(Polarity::Positive),
            _ => None,
        }
    }

    pub fn sign(self) -> f64 {
        match self {
            Polarity::Negative => -1.0,
            Polarity::Positive => 1.0,
        }
    }

    pub fn as_i8(self) -> i8 {
        match self {
            Polarity::Negative => -1,
            Polarity::Positive => 1,
        }
    }

    pub fn flipped(self) -> Polarity {
        match self {
            Polarity::Negative => Polarity::Positive,
            Polarity::Positive => Polarity::Negative,
        }
    }
}

impl fmt::Display for Polarity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_i8())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_score_is_positive() {
        assert_eq!(Polarity::from_score(0.0), Polarity::Positive);
        assert_eq!(Polarity::from_score(-0.0), Polarity::Positive);
        assert_eq!(Polarity::from_score(-1e-300), Polarity::Negative);
    }

    #[test]
    fn integer_round_trip() {
        for p in [Polarity::Negative, Polarity::Positive] {
            assert_eq!(Polarity::from_i64(p.as_i8() as i64), Some(p));
        }
        assert_eq!(Polarity::from_i64(0), None);
    }
}

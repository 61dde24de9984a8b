//! Admissible gap `ε_s` between `b' + 1` and `b` in the bilinear estimates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Fixed substitute index for `s ∈ [−1/2, 0)`, the midpoint of `(−3/4, −1/2)`.
pub const SUBSTITUTE_INDEX: f64 = -0.625;

/// Which pair of dispersion signs the estimate couples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairVariant {
    /// Product of two like-signed fields landing in the opposite-sign space.
    SameSignPair,
    /// Product of one field from each sign.
    MixedPair,
}

fn rough_branch(s: f64, variant: PairVariant) -> f64 {
    match variant {
        PairVariant::SameSignPair => (-s - 0.5).min(s + 5.0 / 6.0),
        PairVariant::MixedPair => (-s - 0.5).min(s / 3.0 + 0.25),
    }
}

/// `ε_s` for `s > −3/4`.
pub fn epsilon_s(s: f64, variant: PairVariant) -> Result<f64> {
    if !(s > -0.75) || !s.is_finite() {
        return Err(Error::InvalidParameter(format!("s = {s} must exceed -3/4")));
    }
    Ok(if s >= 0.0 {
        match variant {
            PairVariant::SameSignPair => 0.25,
            PairVariant::MixedPair => 0.5,
        }
    } else if s >= -0.5 {
        rough_branch(SUBSTITUTE_INDEX, variant)
    } else {
        rough_branch(s, variant)
    })
}

/// Whether `(s, b, b')` lies in the range `b' ∈ (−1/2, 0)`, `1/2 < b ≤ b' + 1`,
/// `b' + 1 − b ≤ ε_s`; returns the failed constraint otherwise.
pub fn admissibility(s: f64, b: f64, b_prime: f64, variant: PairVariant) -> std::result::Result<(), String> {
    let eps = epsilon_s(s, variant).map_err(|e| e.to_string())?;
    if !(b_prime > -0.5 && b_prime < 0.0) {
        return Err(format!("b' = {b_prime} outside (-1/2, 0)"));
    }
    if !(b > 0.5) {
        return Err(format!("b = {b} must exceed 1/2"));
    }
    if b > b_prime + 1.0 {
        return Err(format!("b = {b} exceeds b' + 1 = {}", b_prime + 1.0));
    }
    if b_prime + 1.0 - b > eps {
        return Err(format!("b' + 1 - b = {} exceeds epsilon_s = {eps}", b_prime + 1.0 - b));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smooth_branch_values() {
        assert_eq!(epsilon_s(0.0, PairVariant::SameSignPair).unwrap(), 0.25);
        assert_eq!(epsilon_s(1.5, PairVariant::MixedPair).unwrap(), 0.5);
    }

    #[test]
    fn rough_branch_values() {
        let same = epsilon_s(-0.7, PairVariant::SameSignPair).unwrap();
        assert!((same - (0.2f64).min(-0.7 + 5.0 / 6.0)).abs() < 1e-15);
        assert!((same - 0.133_333_333_333_333).abs() < 1e-12);
        let mixed = epsilon_s(-0.7, PairVariant::MixedPair).unwrap();
        assert!((mixed - 1.0 / 60.0).abs() < 1e-12);
    }

    #[test]
    fn intermediate_branch_uses_substitute() {
        // s' = -5/8: min{1/8, 5/24} and min{1/8, 1/24}
        let same = epsilon_s(-0.25, PairVariant::SameSignPair).unwrap();
        assert!((same - 0.125).abs() < 1e-15);
        let mixed = epsilon_s(-0.5, PairVariant::MixedPair).unwrap();
        assert!((mixed - 1.0 / 24.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_low_index() {
        assert!(epsilon_s(-0.75, PairVariant::SameSignPair).is_err());
        assert!(epsilon_s(f64::NAN, PairVariant::MixedPair).is_err());
    }

    #[test]
    fn admissible_defaults() {
        assert!(admissibility(0.0, 0.6, -0.4, PairVariant::SameSignPair).is_ok());
        assert!(admissibility(0.0, 0.6, -0.1, PairVariant::SameSignPair).is_err());
        assert!(admissibility(-0.6, 0.6, -0.4, PairVariant::MixedPair).is_ok());
    }
}

//! Smooth time cutoff equal to one on `[-1, 1]` and vanishing outside `[-2, 2]`.

use serde::{Deserialize, Serialize};

/// `e^{-1/x}` for `x > 0`, zero otherwise.
fn mollifier_tail(x: f64) -> f64 {
    if x > 0.0 {
        (-1.0 / x).exp()
    } else {
        0.0
    }
}

/// Smooth step rising from 0 at `x ≤ 0` to 1 at `x ≥ 1`.
fn smooth_step(x: f64) -> f64 {
    let a = mollifier_tail(x);
    let b = mollifier_tail(1.0 - x);
    if a + b == 0.0 {
        0.0
    } else {
        a / (a + b)
    }
}

/// The cutoff `ψ`.
pub fn psi(t: f64) -> f64 {
    smooth_step(2.0 - t.abs())
}

/// Rescaled cutoff `ψ_T(t) = ψ(t/T)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CutoffSpec {
    pub scale: f64,
}

impl Default for CutoffSpec {
    fn default() -> Self {
        Self { scale: 1.0 }
    }
}

impl CutoffSpec {
    pub fn new(scale: f64) -> Self {
        Self { scale }
    }

    pub fn eval(&self, t: f64) -> f64 {
        psi(t / self.scale)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plateau_support_and_range() {
        for i in -300..=300 {
            let t = i as f64 * 0.01;
            let p = psi(t);
            assert!((0.0..=1.0).contains(&p));
            if t.abs() <= 1.0 {
                assert_eq!(p, 1.0);
            }
            if t.abs() >= 2.0 {
                assert_eq!(p, 0.0);
            }
        }
        assert!((psi(1.5) - 0.5).abs() < 1e-15);
        assert_eq!(psi(0.7), psi(-0.7));
    }

    #[test]
    fn monotone_on_transition() {
        let mut prev = 1.0;
        for i in 0..=1000 {
            let p = psi(1.0 + i as f64 * 1e-3);
            assert!(p <= prev);
            prev = p;
        }
    }

    #[test]
    fn rescaled() {
        let c = CutoffSpec::new(0.5);
        assert_eq!(c.eval(0.5), 1.0);
        assert_eq!(c.eval(1.0), 0.0);
    }
}

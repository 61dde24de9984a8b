//! Comparison of `X^a_{s,b}` norms for different dispersion coefficients.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::norm::{bracket, random_field, xsb_norm, NormParams, SpaceTimeField};
use crate::error::{Error, Result};
use crate::grid::GridSpec;

/// `1/(|w − 1| + |w + 1|)` in its piecewise form.
pub fn f_w(w: f64) -> f64 {
    if w >= 1.0 {
        1.0 / (2.0 * w)
    } else if w <= -1.0 {
        -1.0 / (2.0 * w)
    } else {
        0.5
    }
}

/// `⟨(a − a₀)/(a₁ − a₀)⟩`.
pub fn pointwise_bound(a: f64, a0: f64, a1: f64) -> f64 {
    bracket((a - a0) / (a1 - a0))
}

/// `(1 + |τ + ax|) / ((1 + |τ + a₀x|) + (1 + |τ + a₁x|))`.
pub fn pointwise_ratio(a: f64, a0: f64, a1: f64, x: f64, tau: f64) -> f64 {
    bracket(tau + a * x) / (bracket(tau + a0 * x) + bracket(tau + a1 * x))
}

fn check_distinct(a0: f64, a1: f64) -> Result<()> {
    if a0 == a1 {
        return Err(Error::InvalidParameter("a0 and a1 must differ".into()));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LatticeScan {
    pub a: f64,
    pub a0: f64,
    pub a1: f64,
    pub points: usize,
    pub max_ratio: f64,
    pub bound: f64,
    pub pass: bool,
}

/// Scans the pointwise ratio over an `n × n` lattice of `(x, τ) ∈ [−extent, extent]²`.
pub fn lattice_scan(a: f64, a0: f64, a1: f64, n: usize, extent: f64) -> Result<LatticeScan> {
    check_distinct(a0, a1)?;
    if n < 2 || !(extent > 0.0) {
        return Err(Error::InvalidParameter("lattice needs n >= 2 and extent > 0".into()));
    }
    let h = 2.0 * extent / (n - 1) as f64;
    let bound = pointwise_bound(a, a0, a1);
    let max_ratio = (0..n)
        .into_par_iter()
        .map(|i| {
            let x = -extent + i as f64 * h;
            (0..n)
                .map(|j| pointwise_ratio(a, a0, a1, x, -extent + j as f64 * h))
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max);
    Ok(LatticeScan {
        a,
        a0,
        a1,
        points: n * n,
        max_ratio,
        bound,
        pass: max_ratio <= bound,
    })
}

/// Maximum of [`f_w`] over `n` equally spaced points of `[−extent, extent]`.
pub fn f_w_scan(n: usize, extent: f64) -> f64 {
    let h = 2.0 * extent / (n.max(2) - 1) as f64;
    (0..n).map(|i| f_w(-extent + i as f64 * h)).fold(0.0, f64::max)
}

/// Constant `⟨(a − a₀)/(a₁ − a₀)⟩^b 2^b` of the embedding inequality.
pub fn embedding_constant(a: f64, a0: f64, a1: f64, b: f64) -> f64 {
    pointwise_bound(a, a0, a1).powf(b) * 2f64.powf(b)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EmbeddingCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub constant: f64,
    pub pass: bool,
}

/// `‖F‖_{X^a} ≤ C (‖F‖_{X^{a₀}} + ‖F‖_{X^{a₁}})` for one field.
pub fn embedding_check(field: &SpaceTimeField, a: f64, a0: f64, a1: f64, s: f64, b: f64) -> Result<EmbeddingCheck> {
    check_distinct(a0, a1)?;
    if b < 0.0 {
        return Err(Error::InvalidParameter(format!("b = {b} must be >= 0")));
    }
    let lhs = xsb_norm(field, &NormParams::new(a, s, b))?;
    let rhs = xsb_norm(field, &NormParams::new(a0, s, b))? + xsb_norm(field, &NormParams::new(a1, s, b))?;
    let constant = embedding_constant(a, a0, a1, b);
    Ok(EmbeddingCheck {
        lhs,
        rhs,
        constant,
        pass: lhs <= constant * rhs,
    })
}

/// `‖F‖_{X^{a₀}} + ‖F‖_{X^{a₁}}`.
pub fn intersection_norm(field: &SpaceTimeField, a0: f64, a1: f64, s: f64, b: f64) -> Result<f64> {
    Ok(xsb_norm(field, &NormParams::new(a0, s, b))? + xsb_norm(field, &NormParams::new(a1, s, b))?)
}

/// Two-sided constants `(c₀, c₁)` with `c₀‖w‖_{a₀,a₁} ≤ ‖w‖_{a₂,a₃} ≤ c₁‖w‖_{a₀,a₁}`.
pub fn intersection_constants(pair: (f64, f64), other: (f64, f64), b: f64) -> (f64, f64) {
    let (a0, a1) = pair;
    let (a2, a3) = other;
    let upper = embedding_constant(a2, a0, a1, b) + embedding_constant(a3, a0, a1, b);
    let back = embedding_constant(a0, a2, a3, b) + embedding_constant(a1, a2, a3, b);
    (1.0 / back, upper)
}

/// Random-field configuration shared by the embedding suites.
#[derive(Debug, Clone)]
pub struct FieldEnsemble {
    pub x: GridSpec,
    pub t: GridSpec,
    pub band_x: f64,
    pub band_t: f64,
    pub trials: usize,
    pub seed: u64,
}

impl FieldEnsemble {
    /// Field of trial `k`, drawn from its own RNG stream.
    pub fn field(&self, k: usize) -> SpaceTimeField {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(k as u64);
        random_field(&self.x, &self.t, self.band_x, self.band_t, &mut rng)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmbeddingSuite {
    pub trials: usize,
    pub passed: usize,
    /// Largest `lhs / (constant · rhs)`.
    pub worst_margin: f64,
}

/// Runs [`embedding_check`] over an ensemble of random fields.
pub fn embedding_suite(ens: &FieldEnsemble, a: f64, a0: f64, a1: f64, s: f64, b: f64) -> Result<EmbeddingSuite> {
    let checks: Vec<EmbeddingCheck> = (0..ens.trials)
        .into_par_iter()
        .map(|k| embedding_check(&ens.field(k), a, a0, a1, s, b))
        .collect::<Result<_>>()?;
    let passed = checks.iter().filter(|c| c.pass).count();
    let worst_margin = checks
        .iter()
        .filter(|c| c.rhs > 0.0)
        .map(|c| c.lhs / (c.constant * c.rhs))
        .fold(0.0, f64::max);
    Ok(EmbeddingSuite {
        trials: ens.trials,
        passed,
        worst_margin,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntersectionSuite {
    pub trials: usize,
    pub min_ratio: f64,
    pub max_ratio: f64,
    pub lower_bound: f64,
    pub upper_bound: f64,
    pub pass: bool,
}

/// Ratios `‖w‖_{a₂,a₃} / ‖w‖_{a₀,a₁}` over the ensemble against the two-sided constants.
pub fn intersection_suite(
    ens: &FieldEnsemble,
    pair: (f64, f64),
    other: (f64, f64),
    s: f64,
    b: f64,
) -> Result<IntersectionSuite> {
    check_distinct(pair.0, pair.1)?;
    check_distinct(other.0, other.1)?;
    let ratios: Vec<f64> = (0..ens.trials)
        .into_par_iter()
        .map(|k| {
            let f = ens.field(k);
            let base = intersection_norm(&f, pair.0, pair.1, s, b)?;
            let alt = intersection_norm(&f, other.0, other.1, s, b)?;
            Ok(if base > 0.0 { alt / base } else { f64::NAN })
        })
        .collect::<Result<_>>()?;
    let finite: Vec<f64> = ratios.into_iter().filter(|r| r.is_finite()).collect();
    let min_ratio = finite.iter().copied().fold(f64::INFINITY, f64::min);
    let max_ratio = finite.iter().copied().fold(0.0, f64::max);
    let (lower_bound, upper_bound) = intersection_constants(pair, other, b);
    Ok(IntersectionSuite {
        trials: ens.trials,
        min_ratio,
        max_ratio,
        lower_bound,
        upper_bound,
        pass: !finite.is_empty() && min_ratio >= lower_bound && max_ratio <= upper_bound,
    })
}

//! Norms of cut-off data `ψ(t) u₀(x)` in both `X^{1}_{s,b}` and `X^{−1}_{s,b}`.
//!
//! Such a field belongs to the intersection space once `u₀` has `s + 3b` derivatives.
//! Membership is probed by refining the spatial grid at a fixed period: the norms settle
//! for smooth data and keep growing for data with a slowly decaying spectrum.

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::cutoff::psi;
use super::norm::{bracket, xsb_norm, NormParams, SpaceTimeField, DEFAULT_TIME_PERIOD};
use crate::error::{Error, Result};
use crate::grid::{GridSpec, SpectralField};

/// Dispersion coefficients of the two spaces.
pub const PAIR: (f64, f64) = (1.0, -1.0);

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MembershipNorms {
    pub norm_a0: f64,
    pub norm_a1: f64,
}

/// `‖ψ(t) u₀(x)‖` in `X^{1}_{s,b}` and `X^{−1}_{s,b}` on the time grid `t`.
pub fn cutoff_data_membership(u0: &SpectralField, s: f64, b: f64, t: &GridSpec) -> Result<MembershipNorms> {
    let field = SpaceTimeField::separable(u0.grid(), t, u0.coeffs(), psi)?;
    Ok(MembershipNorms {
        norm_a0: xsb_norm(&field, &NormParams::new(PAIR.0, s, b))?,
        norm_a1: xsb_norm(&field, &NormParams::new(PAIR.1, s, b))?,
    })
}

/// Initial data families for the refinement ladder.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Datum {
    /// `u₀(x) = e^{−x²/w²}`.
    Gaussian { width: f64 },
    /// `û₀(ξ) = ⟨ξ⟩^{−decay}` on every retained mode.
    Rough { decay: f64 },
}

impl Datum {
    pub fn sample(&self, x: &GridSpec) -> Result<SpectralField> {
        match *self {
            Datum::Gaussian { width } => {
                if !(width > 0.0) {
                    return Err(Error::InvalidParameter(format!("width = {width} must be positive")));
                }
                x.forward(&x.sample(|p| (-(p / width).powi(2)).exp()))
            }
            Datum::Rough { decay } => {
                let n = x.n();
                let coeffs = (0..n)
                    .map(|j| {
                        if j == x.nyquist_slot() {
                            Complex64::new(0.0, 0.0)
                        } else {
                            Complex64::new(bracket(x.wavenumber(j)).powf(-decay), 0.0)
                        }
                    })
                    .collect();
                SpectralField::from_coeffs(x, coeffs)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MembershipConfig {
    pub s: f64,
    pub b: f64,
    pub datum: Datum,
    pub period_x: f64,
    /// Spatial resolutions, increasing.
    pub ladder: Vec<usize>,
    pub n_t: usize,
    pub period_t: f64,
}

impl Default for MembershipConfig {
    fn default() -> Self {
        Self {
            s: 0.0,
            b: 0.6,
            datum: Datum::Gaussian { width: 1.0 },
            period_x: 32.0,
            ladder: vec![64, 128, 256, 512],
            n_t: 256,
            period_t: DEFAULT_TIME_PERIOD,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MembershipRow {
    pub n_x: usize,
    pub max_frequency: f64,
    pub norm_a0: f64,
    pub norm_a1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MembershipLadder {
    pub rows: Vec<MembershipRow>,
    /// Largest relative change of either norm between the last two resolutions.
    pub last_change: f64,
    /// Last change below 1%.
    pub stable: bool,
}

/// Evaluates [`cutoff_data_membership`] over the spatial refinement ladder.
pub fn membership_ladder(cfg: &MembershipConfig) -> Result<MembershipLadder> {
    if cfg.ladder.len() < 2 || cfg.ladder.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter(
            "ladder needs at least two increasing resolutions".into(),
        ));
    }
    let t = GridSpec::new(cfg.n_t, cfg.period_t)?;
    let rows: Vec<MembershipRow> = cfg
        .ladder
        .iter()
        .map(|&n| {
            let x = GridSpec::new(n, cfg.period_x)?;
            let norms = cutoff_data_membership(&cfg.datum.sample(&x)?, cfg.s, cfg.b, &t)?;
            Ok(MembershipRow {
                n_x: n,
                max_frequency: (n / 2 - 1) as f64 * x.dxi(),
                norm_a0: norms.norm_a0,
                norm_a1: norms.norm_a1,
            })
        })
        .collect::<Result<_>>()?;
    let (prev, last) = (&rows[rows.len() - 2], &rows[rows.len() - 1]);
    let rel = |new: f64, old: f64| {
        if new == 0.0 && old == 0.0 {
            0.0
        } else {
            (new - old).abs() / new.abs().max(old.abs())
        }
    };
    let last_change = rel(last.norm_a0, prev.norm_a0).max(rel(last.norm_a1, prev.norm_a1));
    Ok(MembershipLadder {
        rows,
        last_change,
        stable: last_change < 1e-2,
    })
}

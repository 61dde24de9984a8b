//! Fields that lie in one `X^{a₁}_{s,b}` space but not in `X^{a₀}_{s,b}`.
//!
//! The field is concentrated along the characteristic `τ = −a₁ξ³` with a spectral
//! profile chosen so its `X^{a₁}` norm is finite while its `X^{a₀}` norm diverges. The
//! norms are truncated to the box `|ξ|, |τ| ≤ R` and evaluated by nested adaptive
//! quadrature for a ladder of `R`.

use serde::{Deserialize, Serialize};

use super::norm::bracket;
use crate::error::{Error, Result};
use crate::quadrature::{integrate, loglog_slope, QuadSpec};

/// Spectral profile of the constructed field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Construction {
    /// `|v̂|² = ⟨ξ⟩^{−2s−2b} ⟨τ + a₁ξ³⟩^{−4b}`, for `s > 1/2 − b`.
    Regular,
    /// `|û|² = ⟨ξ⟩^{−d} ⟨τ + a₁ξ³⟩^{−4b}`, for `−3/2 ≤ s ≤ 0` and `1 < d < 6b − 2`.
    Rough { d: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NonequivalenceConfig {
    pub a0: f64,
    pub a1: f64,
    pub s: f64,
    pub b: f64,
    pub construction: Construction,
    pub radii: Vec<f64>,
}

impl Default for NonequivalenceConfig {
    fn default() -> Self {
        Self {
            a0: 1.0,
            a1: -1.0,
            s: 0.0,
            b: 3.0,
            construction: Construction::Regular,
            radii: vec![8.0, 16.0, 32.0, 64.0],
        }
    }
}

impl NonequivalenceConfig {
    pub fn validate(&self) -> Result<()> {
        let Self { a0, a1, s, b, .. } = *self;
        if a0 == 0.0 || a1 == 0.0 || !a0.is_finite() || !a1.is_finite() {
            return Err(Error::InvalidParameter("a0 and a1 must be finite and nonzero".into()));
        }
        if !(b > 0.5) {
            return Err(Error::HypothesisViolation(format!("need b > 1/2, got b = {b}")));
        }
        match self.construction {
            Construction::Regular => {
                if !(s > 0.5 - b) {
                    return Err(Error::HypothesisViolation(format!(
                        "regular profile needs s > 1/2 - b = {}, got s = {s}",
                        0.5 - b
                    )));
                }
            }
            Construction::Rough { d } => {
                if !(-1.5..=0.0).contains(&s) {
                    return Err(Error::HypothesisViolation(format!(
                        "rough profile needs s in [-3/2, 0], got s = {s}"
                    )));
                }
                if !(d > 1.0 && d < 6.0 * b - 2.0) {
                    return Err(Error::HypothesisViolation(format!(
                        "rough profile needs d in (1, 6b - 2 = {}), got d = {d}",
                        6.0 * b - 2.0
                    )));
                }
            }
        }
        if self.radii.len() < 2 || self.radii.iter().any(|r| !(*r > 0.0)) {
            return Err(Error::InvalidParameter("need at least two positive radii".into()));
        }
        if self.radii.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter("radii must increase".into()));
        }
        Ok(())
    }

    /// `|F̂(ξ, τ)|²` of the constructed field.
    pub fn profile(&self, xi: f64, tau: f64) -> f64 {
        let spatial = match self.construction {
            Construction::Regular => bracket(xi).powf(-2.0 * self.s - 2.0 * self.b),
            Construction::Rough { d } => bracket(xi).powf(-d),
        };
        spatial * bracket(tau + self.a1 * xi.powi(3)).powf(-4.0 * self.b)
    }
}

/// `‖F‖_{X^a_{s,b}}` of the constructed field restricted to `|ξ|, |τ| ≤ R`.
pub fn truncated_norm(cfg: &NonequivalenceConfig, a: f64, radius: f64, spec: &QuadSpec) -> Result<f64> {
    let (s, b) = (cfg.s, cfg.b);
    let mut failure = None;
    let outer = |xi: f64| {
        let c = xi.powi(3);
        let inner = |tau: f64| bracket(tau + a * c).powf(2.0 * b) * cfg.profile(xi, tau);
        match integrate(inner, -radius, radius, &[-a * c, -cfg.a1 * c], spec) {
            Ok(r) => bracket(xi).powf(2.0 * s) * r.value,
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        }
    };
    let breaks = [(radius / a.abs()).cbrt(), (radius / cfg.a1.abs()).cbrt()];
    let r = integrate(outer, 0.0, radius, &breaks, spec)?;
    if let Some(e) = failure {
        return Err(e);
    }
    // the profile is even under (ξ, τ) → (−ξ, −τ)
    Ok((2.0 * r.value).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GrowthRow {
    pub radius: f64,
    pub norm_a0: f64,
    pub norm_a1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthTable {
    pub rows: Vec<GrowthRow>,
    /// Log-log slope of the `X^{a₀}` norm against `R`.
    pub growth_exponent: f64,
    /// Relative change of the `X^{a₁}` norm between the last two radii.
    pub a1_last_change: f64,
    pub a0_increasing: bool,
}

impl GrowthTable {
    /// The `X^{a₁}` norm settles to `1e−3` while the `X^{a₀}` norm keeps growing.
    pub fn separates(&self) -> bool {
        self.a1_last_change < 1e-3 && self.a0_increasing && self.growth_exponent > 0.0
    }
}

/// Truncated norms over the radius ladder and the fitted growth exponent.
pub fn nonequivalence_demo(cfg: &NonequivalenceConfig, spec: &QuadSpec) -> Result<GrowthTable> {
    cfg.validate()?;
    let rows: Vec<GrowthRow> = cfg
        .radii
        .iter()
        .map(|&radius| {
            Ok(GrowthRow {
                radius,
                norm_a0: truncated_norm(cfg, cfg.a0, radius, spec)?,
                norm_a1: truncated_norm(cfg, cfg.a1, radius, spec)?,
            })
        })
        .collect::<Result<_>>()?;
    let radii: Vec<f64> = rows.iter().map(|r| r.radius).collect();
    let a0: Vec<f64> = rows.iter().map(|r| r.norm_a0).collect();
    let n = rows.len();
    let a1_last_change = (rows[n - 1].norm_a1 - rows[n - 2].norm_a1).abs() / rows[n - 1].norm_a1;
    Ok(GrowthTable {
        growth_exponent: loglog_slope(&radii, &a0),
        a1_last_change,
        a0_increasing: a0.windows(2).all(|w| w[1] > w[0]),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_construction_separates() {
        let t = nonequivalence_demo(&NonequivalenceConfig::default(), &QuadSpec::default()).unwrap();
        assert!(t.separates(), "{t:?}");
        // the a₀ norm grows like R^{(4b+1)/6} once the characteristic leaves the core
        assert!(t.growth_exponent > 1.0, "{}", t.growth_exponent);
    }

    #[test]
    fn equal_coefficients_give_identical_norms() {
        let cfg = NonequivalenceConfig {
            a0: -1.0,
            ..Default::default()
        };
        let t = nonequivalence_demo(&cfg, &QuadSpec::default()).unwrap();
        for r in &t.rows {
            assert_eq!(r.norm_a0, r.norm_a1);
        }
    }

    #[test]
    fn rough_profile_separates() {
        let cfg = NonequivalenceConfig {
            s: -0.5,
            construction: Construction::Rough { d: 2.0 },
            ..Default::default()
        };
        let t = nonequivalence_demo(&cfg, &QuadSpec::default()).unwrap();
        assert!(t.a0_increasing && t.growth_exponent > 0.0, "{t:?}");
    }

    #[test]
    fn small_box_matches_brute_force() {
        let cfg = NonequivalenceConfig {
            b: 1.0,
            ..Default::default()
        };
        let radius = 2.0;
        let got = truncated_norm(&cfg, 1.0, radius, &QuadSpec::default()).unwrap();
        let n = 2000;
        let h = 2.0 * radius / n as f64;
        let mut sum = 0.0;
        for i in 0..n {
            let xi = -radius + (i as f64 + 0.5) * h;
            for j in 0..n {
                let tau = -radius + (j as f64 + 0.5) * h;
                sum += h * h * (1.0 + (tau + xi.powi(3)).abs()).powi(2) * cfg.profile(xi, tau);
            }
        }
        assert!((got - sum.sqrt()).abs() < 1e-4 * got, "{got} vs {}", sum.sqrt());
    }

    #[test]
    fn rejects_out_of_range() {
        let mut cfg = NonequivalenceConfig {
            b: 0.5,
            ..Default::default()
        };
        assert!(matches!(
            nonequivalence_demo(&cfg, &QuadSpec::default()),
            Err(Error::HypothesisViolation(_))
        ));
        cfg.b = 1.0;
        cfg.construction = Construction::Rough { d: 5.0 };
        assert!(cfg.validate().is_err());
        cfg.construction = Construction::Regular;
        cfg.a0 = 0.0;
        assert!(cfg.validate().is_err());
    }
}

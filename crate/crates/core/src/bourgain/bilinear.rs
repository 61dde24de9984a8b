//! Randomised ratios `‖(uv)_x‖_{X^{a_out}_{s,b'}} / (‖u‖_{X^{a_l}_{s,b}} ‖v‖_{X^{a_r}_{s,b}})`.
//!
//! Trial fields live on a frequency lattice `ξ = jΔξ, |ξ| ≤ band` and carry a Gaussian
//! time envelope: `û(ξ, τ) = c(ξ) e^{−(τ + aξ³ − ν(ξ))²/2}` with random amplitudes `c` and
//! random modulation offsets `ν`. The time convolution of two such fields is again
//! Gaussian, so the product spectrum is a finite sum of Gaussians in `τ`, which is
//! integrated on a fine lattice.
//!
//! The lattice mode `ξ = 0` would carry weight `Δξ` on the exactly resonant set
//! `ξ₁ξ₂ = 0`, which has measure zero on the line, so trial fields have zero mean.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::epsilon::{admissibility, PairVariant};
use super::norm::bracket;
use crate::error::{Error, Result};
use crate::quadrature::{integrate, QuadSpec};

/// Half-width of the `τ` window around each Gaussian of the product spectrum.
const WINDOW: f64 = 10.0;
/// Lattice spacing of the `τ` quadrature.
const TAU_STEP: f64 = 0.125;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BilinearConfig {
    pub s: f64,
    pub b: f64,
    pub b_prime: f64,
    pub a_left: f64,
    pub a_right: f64,
    pub a_out: f64,
    pub trials: usize,
    pub seed: u64,
    /// Frequency lattice spacing.
    pub dxi: f64,
    /// Amplitudes decay like `⟨ξ⟩^{−envelope}`.
    pub envelope: f64,
    /// Standard deviation of the modulation offsets `ν`.
    pub modulation: f64,
}

impl Default for BilinearConfig {
    fn default() -> Self {
        Self {
            s: 0.0,
            b: 0.6,
            b_prime: -0.4,
            a_left: -1.0,
            a_right: -1.0,
            a_out: -1.0,
            trials: 64,
            seed: 1,
            dxi: 0.5,
            envelope: 1.0,
            modulation: 1.0,
        }
    }
}

impl BilinearConfig {
    /// Sign pattern `(a_l, a_r, a_out)`.
    pub fn with_pattern(mut self, a_left: f64, a_right: f64, a_out: f64) -> Self {
        self.a_left = a_left;
        self.a_right = a_right;
        self.a_out = a_out;
        self
    }

    pub fn variant(&self) -> PairVariant {
        if self.a_left == self.a_right {
            PairVariant::SameSignPair
        } else {
            PairVariant::MixedPair
        }
    }

    fn validate(&self, band: f64) -> Result<()> {
        for a in [self.a_left, self.a_right, self.a_out] {
            if a == 0.0 || !a.is_finite() {
                return Err(Error::InvalidParameter(
                    "dispersion coefficients must be nonzero".into(),
                ));
            }
        }
        if self.trials == 0 {
            return Err(Error::InvalidParameter("need at least one trial".into()));
        }
        if !(self.dxi > 0.0) || !(band >= self.dxi) {
            return Err(Error::InvalidParameter(format!(
                "need 0 < dxi <= band, got dxi = {}, band = {band}",
                self.dxi
            )));
        }
        Ok(())
    }
}

/// One trial field: lattice amplitudes and modulation offsets for `j = −J..=J`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianTrain {
    pub a: f64,
    pub dxi: f64,
    pub amplitudes: Vec<Complex64>,
    pub offsets: Vec<f64>,
}

impl GaussianTrain {
    /// Random real mean-zero field; modes are drawn outward from `ξ = 0` so that lattices
    /// of increasing band share their low modes.
    pub fn random<R: Rng + ?Sized>(a: f64, band: f64, dxi: f64, envelope: f64, modulation: f64, rng: &mut R) -> Self {
        let half = (band / dxi + 1e-9).floor() as usize;
        let n = 2 * half + 1;
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); n];
        let mut offsets = vec![0.0; n];
        for j in 0..=half {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            let nu: f64 = rng.sample(StandardNormal);
            let scale = bracket(j as f64 * dxi).powf(-envelope);
            if j > 0 {
                let c = Complex64::new(re, im) * (scale * std::f64::consts::FRAC_1_SQRT_2);
                amplitudes[half + j] = c;
                amplitudes[half - j] = c.conj();
                offsets[half + j] = modulation * nu;
                offsets[half - j] = -modulation * nu;
            }
        }
        Self {
            a,
            dxi,
            amplitudes,
            offsets,
        }
    }

    pub fn half_width(&self) -> usize {
        self.amplitudes.len() / 2
    }

    fn xi(&self, idx: usize) -> f64 {
        (idx as f64 - self.half_width() as f64) * self.dxi
    }

    /// `‖·‖_{X^a_{s,b}}` in closed form per mode: `Σ Δξ ⟨ξ⟩^{2s} |c|² ∫⟨σ⟩^{2b} e^{−(σ−ν)²} dσ`.
    pub fn norm(&self, s: f64, b: f64) -> Result<f64> {
        let mut total = 0.0;
        for (idx, (c, &nu)) in self.amplitudes.iter().zip(&self.offsets).enumerate() {
            if c.norm_sqr() == 0.0 {
                continue;
            }
            total += bracket(self.xi(idx)).powf(2.0 * s) * c.norm_sqr() * modulation_moment(nu, b)?;
        }
        Ok((total * self.dxi).sqrt())
    }
}

/// `∫ ⟨σ⟩^{2b} e^{−(σ−ν)²} dσ`.
pub fn modulation_moment(nu: f64, b: f64) -> Result<f64> {
    let r = integrate(
        |sigma: f64| bracket(sigma).powf(2.0 * b) * (-(sigma - nu).powi(2)).exp(),
        nu - 12.0,
        nu + 12.0,
        &[0.0, nu],
        &QuadSpec::default(),
    )?;
    Ok(r.value)
}

/// `‖(uv)_x‖_{X^{a_out}_{s,b'}}` for two Gaussian trains on the same lattice.
pub fn product_norm(u: &GaussianTrain, v: &GaussianTrain, a_out: f64, s: f64, b_prime: f64) -> Result<f64> {
    if u.dxi != v.dxi {
        return Err(Error::GridMismatch);
    }
    let dxi = u.dxi;
    let (hu, hv) = (u.half_width() as i64, v.half_width() as i64);
    let psi_norm = (2.0 * std::f64::consts::PI).sqrt().recip() * std::f64::consts::FRAC_1_SQRT_2;
    let mut total = 0.0;
    let mut terms: Vec<(f64, Complex64)> = Vec::new();
    for n in -(hu + hv)..=(hu + hv) {
        if n == 0 {
            continue;
        }
        let xi = n as f64 * dxi;
        terms.clear();
        for j1 in (-hu).max(n - hv)..=hu.min(n + hv) {
            let j2 = n - j1;
            let (i1, i2) = ((j1 + hu) as usize, (j2 + hv) as usize);
            let w = u.amplitudes[i1] * v.amplitudes[i2];
            if w.norm_sqr() == 0.0 {
                continue;
            }
            let (x1, x2) = (j1 as f64 * dxi, j2 as f64 * dxi);
            let omega = a_out * xi.powi(3) - u.a * x1.powi(3) - v.a * x2.powi(3) + u.offsets[i1] + v.offsets[i2];
            terms.push((omega, w * dxi * psi_norm));
        }
        if terms.is_empty() {
            continue;
        }
        terms.sort_by(|p, q| p.0.total_cmp(&q.0));
        let mut sum = 0.0;
        let mut start = 0;
        // clusters of Gaussians whose windows overlap share one dense τ lattice
        while start < terms.len() {
            let mut end = start + 1;
            while end < terms.len() && terms[end].0 - terms[end - 1].0 <= 2.0 * WINDOW {
                end += 1;
            }
            let lo = ((terms[start].0 - WINDOW) / TAU_STEP).floor() as i64;
            let hi = ((terms[end - 1].0 + WINDOW) / TAU_STEP).ceil() as i64;
            let mut lattice = vec![Complex64::new(0.0, 0.0); (hi - lo + 1) as usize];
            for &(omega, w) in &terms[start..end] {
                let m0 = ((omega - WINDOW) / TAU_STEP).floor() as i64;
                let m1 = ((omega + WINDOW) / TAU_STEP).ceil() as i64;
                // e^{−d²/4} along the lattice by a multiplicative recurrence
                let d0 = m0 as f64 * TAU_STEP - omega;
                let mut g = (-0.25 * d0 * d0).exp();
                let mut step = (-0.5 * d0 * TAU_STEP - 0.25 * TAU_STEP * TAU_STEP).exp();
                let curvature = (-0.5 * TAU_STEP * TAU_STEP).exp();
                for slot in &mut lattice[(m0 - lo) as usize..=(m1 - lo) as usize] {
                    *slot += w * g;
                    g *= step;
                    step *= curvature;
                }
            }
            for (k, val) in lattice.iter().enumerate() {
                let sigma = (lo + k as i64) as f64 * TAU_STEP;
                sum += bracket(sigma).powf(2.0 * b_prime) * val.norm_sqr();
            }
            start = end;
        }
        total += dxi * xi * xi * bracket(xi).powf(2.0 * s) * sum * TAU_STEP;
    }
    Ok(total.sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BilinearReport {
    pub band: f64,
    pub pattern: (f64, f64, f64),
    /// `None` when `(s, b, b')` lies in the admissible range, otherwise the failed constraint.
    pub inadmissible: Option<String>,
    /// Ratios in trial order; trials with a vanishing input are omitted.
    pub ratios: Vec<f64>,
    pub max: f64,
    pub median: f64,
    pub p90: f64,
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = q * (sorted.len() - 1) as f64;
    let (i, frac) = (pos.floor() as usize, pos.fract());
    if i + 1 < sorted.len() {
        sorted[i] * (1.0 - frac) + sorted[i + 1] * frac
    } else {
        sorted[i]
    }
}

/// Ratio distribution over `cfg.trials` independent pairs of fields at one band.
pub fn bilinear_ratio(cfg: &BilinearConfig, band: f64) -> Result<BilinearReport> {
    cfg.validate(band)?;
    let ratios: Vec<Option<f64>> = (0..cfg.trials)
        .into_par_iter()
        .map(|k| {
            let mut rng_u = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng_u.set_stream(2 * k as u64);
            let mut rng_v = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng_v.set_stream(2 * k as u64 + 1);
            let u = GaussianTrain::random(cfg.a_left, band, cfg.dxi, cfg.envelope, cfg.modulation, &mut rng_u);
            let v = GaussianTrain::random(cfg.a_right, band, cfg.dxi, cfg.envelope, cfg.modulation, &mut rng_v);
            let denom = u.norm(cfg.s, cfg.b)? * v.norm(cfg.s, cfg.b)?;
            if denom == 0.0 {
                return Ok(None);
            }
            Ok(Some(product_norm(&u, &v, cfg.a_out, cfg.s, cfg.b_prime)? / denom))
        })
        .collect::<Result<_>>()?;
    let ratios: Vec<f64> = ratios.into_iter().flatten().collect();
    let mut sorted = ratios.clone();
    sorted.sort_by(f64::total_cmp);
    Ok(BilinearReport {
        band,
        pattern: (cfg.a_left, cfg.a_right, cfg.a_out),
        inadmissible: admissibility(cfg.s, cfg.b, cfg.b_prime, cfg.variant()).err(),
        max: sorted.last().copied().unwrap_or(0.0),
        median: quantile(&sorted, 0.5),
        p90: quantile(&sorted, 0.9),
        ratios,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BandLadder {
    pub reports: Vec<BilinearReport>,
    /// `(max − min) / max` of the per-band maxima.
    pub spread: f64,
    /// Spread below 20%.
    pub stable: bool,
}

/// Runs [`bilinear_ratio`] across `bands` and measures how much the maximum moves.
pub fn band_ladder(cfg: &BilinearConfig, bands: &[f64]) -> Result<BandLadder> {
    let reports: Vec<BilinearReport> = bands.iter().map(|&b| bilinear_ratio(cfg, b)).collect::<Result<_>>()?;
    let maxima: Vec<f64> = reports.iter().map(|r| r.max).collect();
    let hi = maxima.iter().copied().fold(0.0, f64::max);
    let lo = maxima.iter().copied().fold(f64::INFINITY, f64::min);
    let spread = if hi > 0.0 { (hi - lo) / hi } else { 0.0 };
    Ok(BandLadder {
        reports,
        spread,
        stable: spread < 0.2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn single_mode(a: f64, xi_index: usize, c: f64, nu: f64, dxi: f64, half: usize) -> GaussianTrain {
        let n = 2 * half + 1;
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); n];
        let mut offsets = vec![0.0; n];
        amplitudes[half + xi_index] = Complex64::new(c, 0.0);
        amplitudes[half - xi_index] = Complex64::new(c, 0.0);
        offsets[half + xi_index] = nu;
        offsets[half - xi_index] = -nu;
        GaussianTrain {
            a,
            dxi,
            amplitudes,
            offsets,
        }
    }

    #[test]
    fn moment_at_b_zero_is_gaussian_mass() {
        let m = modulation_moment(3.0, 0.0).unwrap();
        assert!((m - PI.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn zero_input_is_excluded() {
        let cfg = BilinearConfig {
            trials: 3,
            ..Default::default()
        };
        let u = GaussianTrain {
            a: -1.0,
            dxi: 0.5,
            amplitudes: vec![Complex64::new(0.0, 0.0); 5],
            offsets: vec![0.0; 5],
        };
        assert_eq!(u.norm(0.0, 0.6).unwrap(), 0.0);
        assert_eq!(product_norm(&u, &u, -1.0, 0.0, -0.4).unwrap(), 0.0);
        let r = bilinear_ratio(&cfg, 2.0).unwrap();
        assert_eq!(r.ratios.len(), 3);
    }

    #[test]
    fn product_of_single_modes_matches_direct_quadrature() {
        // u = v = two conjugate modes at ±ξ₀; the product has modes 0 and ±2ξ₀, and
        // (uv)_x vanishes at 0, leaving ±2ξ₀ with one Gaussian each
        let (dxi, half) = (0.5, 4);
        let u = single_mode(-1.0, 2, 0.7, 0.4, dxi, half);
        let v = single_mode(1.0, 2, 1.3, -0.9, dxi, half);
        let (s, bp, a_out) = (-0.3, -0.4, -1.0);
        let got = product_norm(&u, &v, a_out, s, bp).unwrap();
        let xi0: f64 = 1.0;
        let xi = 2.0 * xi0;
        let omega = a_out * xi.powi(3) - u.a * xi0.powi(3) - v.a * xi0.powi(3) + 0.4 - 0.9;
        let w = dxi * 0.7 * 1.3 / (2.0 * PI).sqrt() / 2f64.sqrt();
        let tau_int = integrate(
            |sg: f64| (1.0 + sg.abs()).powf(2.0 * bp) * (w * (-(sg - omega).powi(2) / 4.0).exp()).powi(2),
            omega - 30.0,
            omega + 30.0,
            &[0.0, omega],
            &QuadSpec::default(),
        )
        .unwrap()
        .value;
        let want = (2.0 * dxi * xi * xi * (1.0 + xi).powf(2.0 * s) * tau_int).sqrt();
        assert!((got - want).abs() < 1e-9 * want, "{got} vs {want}");
    }

    #[test]
    fn train_norm_matches_direct_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let u = GaussianTrain::random(1.0, 2.0, 0.5, 1.0, 1.0, &mut rng);
        let (s, b) = (-0.6, 0.6);
        let mut total = 0.0;
        for (idx, c) in u.amplitudes.iter().enumerate() {
            let xi = (idx as f64 - 4.0) * 0.5;
            let nu = u.offsets[idx];
            let n = 200_000;
            let h = 40.0 / n as f64;
            let m: f64 = (0..n)
                .map(|i| {
                    let sg = nu - 20.0 + (i as f64 + 0.5) * h;
                    (1.0 + sg.abs()).powf(2.0 * b) * (-(sg - nu).powi(2)).exp() * h
                })
                .sum();
            total += (1.0 + xi.abs()).powf(2.0 * s) * c.norm_sqr() * m * 0.5;
        }
        let got = u.norm(s, b).unwrap();
        assert!((got - total.sqrt()).abs() < 1e-6 * got);
    }

    #[test]
    fn trains_are_real_and_nested() {
        let mut r1 = ChaCha8Rng::seed_from_u64(9);
        let mut r2 = ChaCha8Rng::seed_from_u64(9);
        let small = GaussianTrain::random(1.0, 2.0, 0.5, 1.0, 1.0, &mut r1);
        let big = GaussianTrain::random(1.0, 4.0, 0.5, 1.0, 1.0, &mut r2);
        let (hs, hb) = (small.half_width(), big.half_width());
        for j in 0..=hs {
            assert_eq!(small.amplitudes[hs + j], big.amplitudes[hb + j]);
            assert_eq!(small.amplitudes[hs - j], small.amplitudes[hs + j].conj());
            assert_eq!(small.offsets[hs - j], -small.offsets[hs + j]);
        }
    }

    #[test]
    fn inadmissible_parameters_are_flagged_not_rejected() {
        let cfg = BilinearConfig {
            b: 0.9,
            trials: 2,
            ..Default::default()
        };
        let r = bilinear_ratio(&cfg, 2.0).unwrap();
        assert!(r.inadmissible.is_some());
        assert!(r.max > 0.0);
    }

    #[test]
    fn reports_are_deterministic() {
        let cfg = BilinearConfig {
            trials: 6,
            ..Default::default()
        };
        let a = bilinear_ratio(&cfg, 4.0).unwrap();
        let b = bilinear_ratio(&cfg, 4.0).unwrap();
        assert_eq!(a, b);
    }
}

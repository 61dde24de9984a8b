//! Linear estimates for the free group `U_a(t)` and its Duhamel integral in `X^a_{s,b}`.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::cutoff::{psi, CutoffSpec};
use super::norm::{bracket, xsb_norm, NormParams, SpaceTimeField};
use crate::error::{Error, Result};
use crate::grid::{make_grid, GridSpec, SpectralField};
use crate::quadrature::{integrate, loglog_slope, QuadSpec};

/// `‖u₀‖_s` with the weight `⟨ξ⟩^{2s}`, `⟨ξ⟩ = 1 + |ξ|`.
pub fn bracket_sobolev_norm(u0: &SpectralField, s: f64) -> f64 {
    let g = u0.grid();
    let sum: f64 = u0
        .coeffs()
        .iter()
        .enumerate()
        .map(|(j, c)| bracket(g.wavenumber(j)).powf(2.0 * s) * c.norm_sqr())
        .sum();
    (sum * g.dxi()).sqrt()
}

/// Checks `−1/2 < b' ≤ 0 ≤ b ≤ b' + 1`, `a ≠ 0` and `T ∈ (0, 1]`.
pub fn check_linear_range(a: f64, b: f64, b_prime: f64, big_t: f64) -> Result<()> {
    if a == 0.0 || !a.is_finite() {
        return Err(Error::InvalidParameter(format!("a = {a} must be nonzero")));
    }
    if !(b_prime > -0.5 && b_prime <= 0.0 && b >= 0.0 && b <= b_prime + 1.0) {
        return Err(Error::HypothesisViolation(format!(
            "need -1/2 < b' <= 0 <= b <= b' + 1, got b = {b}, b' = {b_prime}"
        )));
    }
    if !(big_t > 0.0 && big_t <= 1.0) {
        return Err(Error::HypothesisViolation(format!("need T in (0, 1], got T = {big_t}")));
    }
    Ok(())
}

/// Spatial spectra of `φ(t) U_a(t) u₀` at the slots of `t`, for a real profile `φ`.
pub fn modulated_spectra<P: Fn(f64) -> f64>(
    u0: &SpectralField,
    a: f64,
    t: &GridSpec,
    profile: P,
) -> Vec<Vec<Complex64>> {
    let xis = u0.grid().wavenumbers();
    (0..t.n())
        .map(|l| {
            let tl = t.x(l);
            let p = profile(tl);
            u0.coeffs()
                .iter()
                .zip(&xis)
                .map(|(c, xi)| c * Complex64::from_polar(p, -a * tl * xi.powi(3)))
                .collect()
        })
        .collect()
}

/// Space-time field `φ(t) U_a(t) u₀`.
pub fn modulated_free_field<P: Fn(f64) -> f64>(
    u0: &SpectralField,
    a: f64,
    t: &GridSpec,
    profile: P,
) -> Result<SpaceTimeField> {
    SpaceTimeField::from_spatial_spectra(u0.grid(), t, &modulated_spectra(u0, a, t, profile))
}

/// `(‖ψ(t) U_a(t) u₀‖_{X^a_{s,b}}, ‖u₀‖_s)`.
pub fn free_evolution_norms(
    u0: &SpectralField,
    a: f64,
    s: f64,
    b: f64,
    t: &GridSpec,
    cutoff: &CutoffSpec,
) -> Result<(f64, f64)> {
    let field = modulated_free_field(u0, a, t, |tl| cutoff.eval(tl))?;
    let lhs = xsb_norm(&field, &NormParams::new(a, s, b))?;
    Ok((lhs, bracket_sobolev_norm(u0, s)))
}

/// `(∫ ⟨σ⟩^{2b} |ψ̂(σ)|² dσ)^{1/2}`, the constant relating the free evolution to its data.
pub fn propagator_constant(b: f64, spec: &QuadSpec) -> Result<f64> {
    // ψ is even, so ψ̂(σ) = (2/π)^{1/2} ∫₀² ψ(t) cos(σt) dt
    let transform = |sigma: f64| -> f64 {
        integrate(|t| psi(t) * (sigma * t).cos(), 0.0, 2.0, &[1.0], spec)
            .map(|r| r.value * (2.0 / PI).sqrt())
            .unwrap_or(f64::NAN)
    };
    let outer = |sigma: f64| bracket(sigma).powf(2.0 * b) * transform(sigma).powi(2);
    let mut upper = 64.0;
    let mut total = integrate(outer, 0.0, upper, &[], spec)?.value;
    loop {
        let next = integrate(outer, upper, 2.0 * upper, &[], spec)?.value;
        total += next;
        upper *= 2.0;
        if next.abs() <= 1e-12 * total || upper > 1e5 {
            break;
        }
    }
    if !total.is_finite() {
        return Err(Error::NotApplicable("cutoff transform did not converge".into()));
    }
    Ok((2.0 * total).sqrt())
}

/// Random real `u₀` with complex Gaussian coefficients on `0 < |ξ| ≤ band` plus a real mean.
pub fn random_band_limited<R: Rng + ?Sized>(x: &GridSpec, band: f64, rng: &mut R) -> Result<SpectralField> {
    let n = x.n();
    let mut coeffs = vec![Complex64::new(0.0, 0.0); n];
    for j in 0..=n / 2 {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        if x.wavenumber(j).abs() > band || j == n / 2 {
            continue;
        }
        if j == 0 {
            coeffs[0] = Complex64::new(re, 0.0);
        } else {
            let c = Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2;
            coeffs[j] = c;
            coeffs[n - j] = c.conj();
        }
    }
    SpectralField::from_coeffs(x, coeffs)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FreeEvolutionConfig {
    pub a: f64,
    pub s: f64,
    pub b: f64,
    pub n_x: usize,
    pub period_x: f64,
    pub band: f64,
    pub n_t: usize,
    pub period_t: f64,
    pub trials: usize,
    pub seed: u64,
}

impl Default for FreeEvolutionConfig {
    fn default() -> Self {
        Self {
            a: 1.0,
            s: 0.0,
            b: 0.6,
            n_x: 32,
            period_x: 8.0 * PI,
            band: 3.0,
            n_t: 1024,
            period_t: 32.0,
            trials: 50,
            seed: 7,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstancyReport {
    pub ratios: Vec<f64>,
    pub mean: f64,
    pub coefficient_of_variation: f64,
    /// Continuum value of the constant, for comparison with `mean`.
    pub continuum_constant: f64,
    pub pass: bool,
}

/// Ratios `‖ψ U_a(t) u₀‖_{X^a_{s,b}} / ‖u₀‖_s` over random `u₀`; passes when their
/// coefficient of variation is below `1e−2`.
pub fn free_evolution_constancy(cfg: &FreeEvolutionConfig) -> Result<ConstancyReport> {
    if cfg.a == 0.0 || !(cfg.b >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need a != 0 and b >= 0, got a = {}, b = {}",
            cfg.a, cfg.b
        )));
    }
    let x = make_grid(cfg.n_x, cfg.period_x)?;
    let t = make_grid(cfg.n_t, cfg.period_t)?;
    let cutoff = CutoffSpec::default();
    let ratios: Vec<f64> = (0..cfg.trials)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(k as u64);
            let u0 = random_band_limited(&x, cfg.band, &mut rng)?;
            let (lhs, rhs) = free_evolution_norms(&u0, cfg.a, cfg.s, cfg.b, &t, &cutoff)?;
            Ok(lhs / rhs)
        })
        .collect::<Result<_>>()?;
    let n = ratios.len() as f64;
    let mean = ratios.iter().sum::<f64>() / n;
    let var = ratios.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / n;
    let cv = var.sqrt() / mean;
    Ok(ConstancyReport {
        continuum_constant: propagator_constant(cfg.b, &QuadSpec::default())?,
        pass: cv < 1e-2,
        coefficient_of_variation: cv,
        mean,
        ratios,
    })
}

/// `e^{−1/(r(1−r))}` on `(0, 1)`, zero elsewhere.
fn bump(r: f64) -> f64 {
    if r > 0.0 && r < 1.0 {
        (-1.0 / (r * (1.0 - r))).exp()
    } else {
        0.0
    }
}

/// Time profile `H(r) = β(r) sin(Ωr)` of the Duhamel integral, supported on `[0, 1]`.
pub fn duhamel_primitive(r: f64, omega: f64) -> f64 {
    bump(r) * (omega * r).sin()
}

/// Forcing profile `h = H'`.
pub fn forcing_profile(r: f64, omega: f64) -> f64 {
    if !(r > 0.0 && r < 1.0) {
        return 0.0;
    }
    let q = r * (1.0 - r);
    let beta = bump(r);
    beta * (1.0 - 2.0 * r) / (q * q) * (omega * r).sin() + beta * omega * (omega * r).cos()
}

/// Running integral of equally spaced samples, exact for cubics at even nodes.
fn cumulative_simpson_scalar(values: &[Complex64], h: f64) -> Vec<Complex64> {
    let m = values.len();
    let mut out = vec![Complex64::new(0.0, 0.0); m];
    for j in 1..m {
        out[j] = if j % 2 == 0 {
            out[j - 2] + (values[j - 2] + 4.0 * values[j - 1] + values[j]) * (h / 3.0)
        } else if j + 1 < m {
            out[j - 1] + (5.0 * values[j - 1] + 8.0 * values[j] - values[j + 1]) * (h / 12.0)
        } else if j >= 2 {
            out[j - 1] + (-values[j - 2] + 8.0 * values[j - 1] + 5.0 * values[j]) * (h / 12.0)
        } else {
            (values[0] + values[1]) * (0.5 * h)
        };
    }
    out
}

/// Spatial spectra of `∫₀ᵗ U_a(t − t′) F(t′) dt′` on the slots of `t`, from the spectra
/// of `F` at the same slots; the integral runs outward from the slot at `t = 0`.
pub fn duhamel_spectra(forcing: &[Vec<Complex64>], x: &GridSpec, t: &GridSpec, a: f64) -> Result<Vec<Vec<Complex64>>> {
    let (nx, nt) = (x.n(), t.n());
    if forcing.len() != nt || forcing.iter().any(|row| row.len() != nx) {
        return Err(Error::LengthMismatch {
            expected: nx * nt,
            got: forcing.iter().map(Vec::len).sum(),
        });
    }
    let center = nt / 2;
    let h = t.dx();
    let mut out = vec![vec![Complex64::new(0.0, 0.0); nx]; nt];
    for i in 0..nx {
        let c = a * x.wavenumber(i).powi(3);
        // interaction picture: integrand U_a(−t′)F(t′)
        let pulled: Vec<Complex64> = (0..nt)
            .map(|l| forcing[l][i] * Complex64::from_polar(1.0, c * t.x(l)))
            .collect();
        let forward = cumulative_simpson_scalar(&pulled[center..], h);
        let back_vals: Vec<Complex64> = pulled[..=center].iter().rev().copied().collect();
        let backward = cumulative_simpson_scalar(&back_vals, -h);
        for (k, w) in forward.iter().enumerate() {
            out[center + k][i] = w * Complex64::from_polar(1.0, -c * t.x(center + k));
        }
        for (k, w) in backward.iter().enumerate() {
            let l = center - k;
            out[l][i] = w * Complex64::from_polar(1.0, -c * t.x(l));
        }
    }
    Ok(out)
}

/// `(‖ψ_T ∫₀ᵗ U_a(t − t′)F dt′‖_{X^a_{s,b}}, ‖F‖_{X^a_{s,b'}})` for `F = h(t/T) U_a(t) φ`.
pub fn duhamel_norms(
    phi: &SpectralField,
    params: &NormParams,
    big_t: f64,
    t: &GridSpec,
    omega: f64,
) -> Result<(f64, f64)> {
    let x = phi.grid();
    let spectra = modulated_spectra(phi, params.a, t, |tl| forcing_profile(tl / big_t, omega));
    let forcing = SpaceTimeField::from_spatial_spectra(x, t, &spectra)?;
    let cutoff = CutoffSpec::new(big_t);
    let mut duhamel = duhamel_spectra(&spectra, x, t, params.a)?;
    for (l, row) in duhamel.iter_mut().enumerate() {
        let w = cutoff.eval(t.x(l));
        row.iter_mut().for_each(|c| *c *= w);
    }
    let lhs_field = SpaceTimeField::from_spatial_spectra(x, t, &duhamel)?;
    let lhs = xsb_norm(&lhs_field, params)?;
    let rhs = xsb_norm(&forcing, &NormParams::new(params.a, params.s, params.b_prime))?;
    Ok((lhs, rhs))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DuhamelConfig {
    pub a: f64,
    pub s: f64,
    pub b: f64,
    pub b_prime: f64,
    pub n_x: usize,
    pub period_x: f64,
    pub n_t: usize,
    pub period_t: f64,
    /// Oscillation frequency of the forcing profile on its unit support.
    pub omega: f64,
    pub scales: Vec<f64>,
}

impl Default for DuhamelConfig {
    fn default() -> Self {
        Self {
            a: 1.0,
            s: 0.0,
            b: 0.6,
            b_prime: -0.2,
            n_x: 16,
            period_x: 4.0 * PI,
            n_t: 4096,
            period_t: 8.0,
            omega: 20.0,
            scales: (1..=10).map(|k| k as f64 / 10.0).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExponentReport {
    pub scales: Vec<f64>,
    pub ratios: Vec<f64>,
    pub fitted_exponent: f64,
    pub expected_exponent: f64,
    pub pass: bool,
}

/// Fits the `T`-exponent of the Duhamel ratio; passes within `±0.1` of `b' + 1 − b`.
pub fn duhamel_scaling(cfg: &DuhamelConfig) -> Result<ExponentReport> {
    for &big_t in &cfg.scales {
        check_linear_range(cfg.a, cfg.b, cfg.b_prime, big_t)?;
    }
    let x = make_grid(cfg.n_x, cfg.period_x)?;
    let t = make_grid(cfg.n_t, cfg.period_t)?;
    let phi = x.forward(&x.sample(|xx| (-0.5 * xx * xx).exp()))?;
    let params = NormParams {
        a: cfg.a,
        s: cfg.s,
        b: cfg.b,
        b_prime: cfg.b_prime,
    };
    let ratios: Vec<f64> = cfg
        .scales
        .par_iter()
        .map(|&big_t| {
            let (lhs, rhs) = duhamel_norms(&phi, &params, big_t, &t, cfg.omega)?;
            Ok(lhs / rhs)
        })
        .collect::<Result<_>>()?;
    let fitted = loglog_slope(&cfg.scales, &ratios);
    let expected = cfg.b_prime + 1.0 - cfg.b;
    Ok(ExponentReport {
        scales: cfg.scales.clone(),
        pass: (fitted - expected).abs() <= 0.1,
        fitted_exponent: fitted,
        expected_exponent: expected,
        ratios,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearEstimateReport {
    pub free_lhs: f64,
    pub free_rhs: f64,
    pub duhamel_lhs: f64,
    pub duhamel_rhs: f64,
}

/// Both linear estimates for one datum: the free evolution of `u0` and the Duhamel
/// integral of the forcing `h(t/T) U_a(t) u0` on the time grid `t`.
pub fn linear_estimate_check(
    u0: &SpectralField,
    params: &NormParams,
    big_t: f64,
    cutoff: &CutoffSpec,
    t: &GridSpec,
) -> Result<LinearEstimateReport> {
    check_linear_range(params.a, params.b, params.b_prime, big_t)?;
    let (free_lhs, free_rhs) = free_evolution_norms(u0, params.a, params.s, params.b, t, cutoff)?;
    let (duhamel_lhs, duhamel_rhs) = duhamel_norms(u0, params, big_t, t, 20.0)?;
    Ok(LinearEstimateReport {
        free_lhs,
        free_rhs,
        duhamel_lhs,
        duhamel_rhs,
    })
}

/// Closed form of the Duhamel integral for the profile family: `T H(t/T) U_a(t) φ`.
pub fn duhamel_closed_form(r: f64, big_t: f64, omega: f64) -> f64 {
    big_t * duhamel_primitive(r, omega)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_datum_gives_zero() {
        let x = make_grid(16, 2.0 * PI).unwrap();
        let t = make_grid(64, 8.0).unwrap();
        let u0 = SpectralField::zeros(&x);
        let p = NormParams {
            a: 1.0,
            s: 0.0,
            b: 0.6,
            b_prime: -0.2,
        };
        let r = linear_estimate_check(&u0, &p, 0.5, &CutoffSpec::default(), &t).unwrap();
        assert_eq!(
            (r.free_lhs, r.free_rhs, r.duhamel_lhs, r.duhamel_rhs),
            (0.0, 0.0, 0.0, 0.0)
        );
    }

    #[test]
    fn forcing_is_derivative_of_primitive() {
        let omega = 20.0;
        for i in 1..100 {
            let r = i as f64 / 100.0;
            let h = 1e-6;
            let fd = (duhamel_primitive(r + h, omega) - duhamel_primitive(r - h, omega)) / (2.0 * h);
            assert!(
                (fd - forcing_profile(r, omega)).abs() < 1e-5 * (1.0 + fd.abs()),
                "r = {r}"
            );
        }
    }

    #[test]
    fn numerical_duhamel_matches_closed_form() {
        let x = make_grid(16, 4.0 * PI).unwrap();
        let t = make_grid(4096, 8.0).unwrap();
        let phi = x.forward(&x.sample(|xx| (-0.5 * xx * xx).exp())).unwrap();
        let (a, big_t, omega) = (1.0, 0.5, 20.0);
        let xis = x.wavenumbers();
        let spectra = modulated_spectra(&phi, a, &t, |tl| forcing_profile(tl / big_t, omega));
        let d = duhamel_spectra(&spectra, &x, &t, a).unwrap();
        let mut worst: f64 = 0.0;
        for l in 0..t.n() {
            let tl = t.x(l);
            let want = duhamel_closed_form(tl / big_t, big_t, omega);
            for (i, xi) in xis.iter().enumerate() {
                let w = phi.coeffs()[i] * Complex64::from_polar(want, -a * tl * xi.powi(3));
                worst = worst.max((d[l][i] - w).norm());
            }
        }
        assert!(worst < 1e-6, "{worst}");
    }

    #[test]
    fn free_ratio_matches_continuum_constant() {
        let cfg = FreeEvolutionConfig {
            trials: 8,
            ..Default::default()
        };
        let r = free_evolution_constancy(&cfg).unwrap();
        assert!(r.pass, "cv {}", r.coefficient_of_variation);
        assert!(
            (r.mean - r.continuum_constant).abs() < 1e-2 * r.continuum_constant,
            "{} vs {}",
            r.mean,
            r.continuum_constant
        );
    }

    #[test]
    fn constant_at_b_zero_is_l2_norm_of_cutoff() {
        // b = 0: Parseval gives ∫ψ² dt, evaluated independently by a midpoint sum
        let c = propagator_constant(0.0, &QuadSpec::default()).unwrap();
        let n = 400_000;
        let h = 4.0 / n as f64;
        let l2: f64 = (0..n).map(|i| psi(-2.0 + (i as f64 + 0.5) * h).powi(2) * h).sum();
        assert!((c - l2.sqrt()).abs() < 1e-7, "{c} vs {}", l2.sqrt());
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(check_linear_range(1.0, 0.6, -0.6, 0.5).is_err());
        assert!(check_linear_range(1.0, 0.9, -0.2, 0.5).is_err());
        assert!(check_linear_range(1.0, 0.6, -0.2, 1.5).is_err());
        assert!(check_linear_range(0.0, 0.6, -0.2, 0.5).is_err());
        assert!(check_linear_range(1.0, 0.6, -0.2, 0.5).is_ok());
    }
}

//! Space-time fields on a periodic `(x, t)` box and their discrete `X^a_{s,b}` norms.

use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridSpec;

/// Default length of the time window, covering the support `[-2, 2]` of `ψ` with margin.
pub const DEFAULT_TIME_PERIOD: f64 = 8.0;

/// `⟨x⟩ = 1 + |x|`.
pub fn bracket(x: f64) -> f64 {
    1.0 + x.abs()
}

/// Exponents of an `X^a_{s,b}` norm; `b_prime` is the target exponent of bilinear and
/// Duhamel estimates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormParams {
    pub a: f64,
    pub s: f64,
    pub b: f64,
    #[serde(default)]
    pub b_prime: f64,
}

impl NormParams {
    pub fn new(a: f64, s: f64, b: f64) -> Self {
        Self { a, s, b, b_prime: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.a == 0.0 || !self.a.is_finite() {
            return Err(Error::InvalidParameter(format!("a = {} must be nonzero", self.a)));
        }
        if !self.s.is_finite() || !self.b.is_finite() || !self.b_prime.is_finite() {
            return Err(Error::InvalidParameter("s, b, b' must be finite".into()));
        }
        Ok(())
    }

    /// `⟨τ + aξ³⟩^{2b} ⟨ξ⟩^{2s}`.
    pub fn weight(&self, xi: f64, tau: f64) -> f64 {
        bracket(tau + self.a * xi * xi * xi).powf(2.0 * self.b) * bracket(xi).powf(2.0 * self.s)
    }
}

/// Samples of `F̂(ξ, τ) = (2π)^{-1} ∫∫ e^{-i(xξ + tτ)} F(x, t) dx dt` on the dual lattice
/// of an `n_x × n_t` grid over `[-L_x/2, L_x/2) × [-L_t/2, L_t/2)`.
#[derive(Debug, Clone)]
pub struct SpaceTimeField {
    x: GridSpec,
    t: GridSpec,
    /// Row-major in the spatial slot: `coeffs[i * n_t + m]`.
    coeffs: Vec<Complex64>,
}

impl SpaceTimeField {
    pub fn zeros(x: &GridSpec, t: &GridSpec) -> Self {
        Self {
            x: x.clone(),
            t: t.clone(),
            coeffs: vec![Complex64::new(0.0, 0.0); x.n() * t.n()],
        }
    }

    pub fn x_grid(&self) -> &GridSpec {
        &self.x
    }

    pub fn t_grid(&self) -> &GridSpec {
        &self.t
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize, m: usize) -> Complex64 {
        self.coeffs[i * self.t.n() + m]
    }

    /// Field from values `F(x_j, t_l)`.
    pub fn from_fn<F: Fn(f64, f64) -> Complex64>(x: &GridSpec, t: &GridSpec, f: F) -> Result<Self> {
        let (nx, nt) = (x.n(), t.n());
        let mut spectra = Vec::with_capacity(nt);
        for l in 0..nt {
            let tl = t.x(l);
            let mut row: Vec<Complex64> = (0..nx).map(|j| f(x.x(j), tl)).collect();
            x.forward_complex(&mut row)?;
            spectra.push(row);
        }
        Self::from_spatial_spectra(x, t, &spectra)
    }

    /// Field from the spatial spectra `F̂(ξ_i, t_l)` at each time slot `l`.
    pub fn from_spatial_spectra(x: &GridSpec, t: &GridSpec, spectra: &[Vec<Complex64>]) -> Result<Self> {
        let (nx, nt) = (x.n(), t.n());
        if spectra.len() != nt {
            return Err(Error::LengthMismatch {
                expected: nt,
                got: spectra.len(),
            });
        }
        let mut coeffs = vec![Complex64::new(0.0, 0.0); nx * nt];
        let mut column = vec![Complex64::new(0.0, 0.0); nt];
        for i in 0..nx {
            for (l, row) in spectra.iter().enumerate() {
                if row.len() != nx {
                    return Err(Error::LengthMismatch {
                        expected: nx,
                        got: row.len(),
                    });
                }
                column[l] = row[i];
            }
            t.forward_complex(&mut column)?;
            coeffs[i * nt..(i + 1) * nt].copy_from_slice(&column);
        }
        Ok(Self {
            x: x.clone(),
            t: t.clone(),
            coeffs,
        })
    }

    /// Field given directly on the dual lattice.
    pub fn from_spectrum<F: Fn(f64, f64) -> Complex64>(x: &GridSpec, t: &GridSpec, f: F) -> Self {
        let nt = t.n();
        let mut coeffs = Vec::with_capacity(x.n() * nt);
        for i in 0..x.n() {
            let xi = x.wavenumber(i);
            for m in 0..nt {
                coeffs.push(f(xi, t.wavenumber(m)));
            }
        }
        Self {
            x: x.clone(),
            t: t.clone(),
            coeffs,
        }
    }

    /// Separable field `φ(t) u₀(x)` from spatial coefficients and a time profile.
    pub fn separable<P: Fn(f64) -> f64>(x: &GridSpec, t: &GridSpec, u0: &[Complex64], profile: P) -> Result<Self> {
        let spectra: Vec<Vec<Complex64>> = (0..t.n())
            .map(|l| {
                let p = profile(t.x(l));
                u0.iter().map(|c| c * p).collect()
            })
            .collect();
        Self::from_spatial_spectra(x, t, &spectra)
    }

    /// Values `F(x_j, t_l)` indexed `[l * n_x + j]`.
    pub fn to_samples(&self) -> Result<Vec<Complex64>> {
        let (nx, nt) = (self.x.n(), self.t.n());
        let mut out = vec![Complex64::new(0.0, 0.0); nx * nt];
        let mut column = vec![Complex64::new(0.0, 0.0); nt];
        let mut rows = vec![vec![Complex64::new(0.0, 0.0); nx]; nt];
        for i in 0..nx {
            column.copy_from_slice(&self.coeffs[i * nt..(i + 1) * nt]);
            self.t.inverse_complex(&mut column)?;
            for l in 0..nt {
                rows[l][i] = column[l];
            }
        }
        for (l, row) in rows.iter_mut().enumerate() {
            self.x.inverse_complex(row)?;
            out[l * nx..(l + 1) * nx].copy_from_slice(row);
        }
        Ok(out)
    }

    /// Largest `|F̂(ξ, τ) − conj F̂(−ξ, −τ)|`; zero for real fields.
    pub fn hermitian_defect(&self) -> f64 {
        let (nx, nt) = (self.x.n(), self.t.n());
        let mut worst: f64 = 0.0;
        for i in 0..nx {
            let ri = (nx - i) % nx;
            for m in 0..nt {
                let rm = (nt - m) % nt;
                worst = worst.max((self.coeff(i, m) - self.coeff(ri, rm).conj()).norm());
            }
        }
        worst
    }

    /// `Σ |F̂|² Δξ Δτ`, equal to `∫∫ |F|² dx dt` by Parseval.
    pub fn l2_norm_sqr(&self) -> f64 {
        let cell = self.x.dxi() * self.t.dxi();
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>() * cell
    }

    /// `Σ w(ξ, τ) |F̂(ξ, τ)|² Δξ Δτ` for an arbitrary weight.
    pub fn weighted_sum<W: Fn(f64, f64) -> f64>(&self, weight: W) -> f64 {
        let nt = self.t.n();
        let taus = self.t.wavenumbers();
        let mut total = 0.0;
        for i in 0..self.x.n() {
            let xi = self.x.wavenumber(i);
            let row = &self.coeffs[i * nt..(i + 1) * nt];
            for (c, &tau) in row.iter().zip(&taus) {
                let p = c.norm_sqr();
                if p != 0.0 {
                    total += weight(xi, tau) * p;
                }
            }
        }
        total * self.x.dxi() * self.t.dxi()
    }

    pub fn scale(&self, alpha: f64) -> Self {
        Self {
            x: self.x.clone(),
            t: self.t.clone(),
            coeffs: self.coeffs.iter().map(|c| c * alpha).collect(),
        }
    }
}

/// Riemann-sum discretisation of `‖F‖_{X^a_{s,b}}`.
pub fn xsb_norm(field: &SpaceTimeField, p: &NormParams) -> Result<f64> {
    p.validate()?;
    Ok(field.weighted_sum(|xi, tau| p.weight(xi, tau)).sqrt())
}

/// Random real field with complex Gaussian coefficients on `|ξ| ≤ band_x`, `|τ| ≤ band_t`.
pub fn random_field<R: Rng + ?Sized>(
    x: &GridSpec,
    t: &GridSpec,
    band_x: f64,
    band_t: f64,
    rng: &mut R,
) -> SpaceTimeField {
    let (nx, nt) = (x.n(), t.n());
    let mut field = SpaceTimeField::zeros(x, t);
    for i in 0..nx {
        let ri = (nx - i) % nx;
        for m in 0..nt {
            let rm = (nt - m) % nt;
            // fill one representative of each conjugate pair
            if (ri, rm) < (i, m) {
                continue;
            }
            let (xi, tau) = (x.wavenumber(i), t.wavenumber(m));
            let inside = xi.abs() <= band_x
                && tau.abs() <= band_t
                && x.mode(i).unsigned_abs() as usize * 2 != nx
                && t.mode(m).unsigned_abs() as usize * 2 != nt;
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            let c = if !inside {
                Complex64::new(0.0, 0.0)
            } else if (ri, rm) == (i, m) {
                Complex64::new(re, 0.0)
            } else {
                Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
            };
            field.coeffs[i * nt + m] = c;
            field.coeffs[ri * nt + rm] = c.conj();
        }
    }
    field
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn grids() -> (GridSpec, GridSpec) {
        (
            make_grid(16, 10.0).unwrap(),
            make_grid(32, DEFAULT_TIME_PERIOD).unwrap(),
        )
    }

    #[test]
    fn zero_field_has_zero_norm() {
        let (x, t) = grids();
        let f = SpaceTimeField::zeros(&x, &t);
        assert_eq!(xsb_norm(&f, &NormParams::new(1.0, 0.3, 0.7)).unwrap(), 0.0);
    }

    #[test]
    fn rejects_zero_a() {
        let (x, t) = grids();
        let f = SpaceTimeField::zeros(&x, &t);
        assert!(xsb_norm(&f, &NormParams::new(0.0, 0.0, 0.5)).is_err());
    }

    #[test]
    fn unweighted_norm_is_physical_l2() {
        let (x, t) = grids();
        let f = SpaceTimeField::from_fn(&x, &t, |x, t| {
            Complex64::new((-x * x - t * t).exp(), 0.3 * (x - t).sin())
        })
        .unwrap();
        let samples = f.to_samples().unwrap();
        let phys: f64 = samples.iter().map(|c| c.norm_sqr()).sum::<f64>() * x.dx() * t.dx();
        let n = xsb_norm(&f, &NormParams::new(1.0, 0.0, 0.0)).unwrap();
        assert!((n * n - phys).abs() < 1e-12 * phys);
    }

    #[test]
    fn transform_round_trip() {
        let (x, t) = grids();
        let g = |x: f64, t: f64| Complex64::new((x * 0.7).cos() * (-t * t).exp(), (t - x).sin());
        let f = SpaceTimeField::from_fn(&x, &t, g).unwrap();
        let s = f.to_samples().unwrap();
        for l in 0..t.n() {
            for j in 0..x.n() {
                assert!((s[l * x.n() + j] - g(x.x(j), t.x(l))).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn gaussian_matches_continuum_transform() {
        let x = make_grid(64, 40.0).unwrap();
        let t = make_grid(64, 40.0).unwrap();
        let f = SpaceTimeField::from_fn(&x, &t, |x, t| Complex64::new((-(x * x + t * t) / 2.0).exp(), 0.0)).unwrap();
        // F̂(ξ, τ) = exp(-(ξ² + τ²)/2)
        for (i, m) in [(0usize, 0usize), (3, 5), (60, 2)] {
            let want = (-(x.wavenumber(i).powi(2) + t.wavenumber(m).powi(2)) / 2.0).exp();
            assert!((f.coeff(i, m) - Complex64::new(want, 0.0)).norm() < 1e-13);
        }
    }

    #[test]
    fn on_characteristic_mode_weight() {
        // single lattice point with τ₀ = −aξ₀³: weight reduces to ⟨ξ₀⟩^{2s}
        let x = make_grid(16, 2.0 * std::f64::consts::PI).unwrap();
        let t = make_grid(32, 2.0 * std::f64::consts::PI).unwrap();
        let a = -1.0;
        let (i0, m0) = (2usize, 8usize);
        assert!((t.wavenumber(m0) + a * x.wavenumber(i0).powi(3)).abs() < 1e-12);
        let f = SpaceTimeField::from_spectrum(&x, &t, |xi, tau| {
            if (xi - x.wavenumber(i0)).abs() < 1e-9 && (tau - t.wavenumber(m0)).abs() < 1e-9 {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        let p = NormParams::new(a, 0.8, 3.0);
        let n = xsb_norm(&f, &p).unwrap();
        let want = (bracket(2.0).powf(1.6) * x.dxi() * t.dxi()).sqrt();
        assert!((n - want).abs() < 1e-12 * want);
    }

    #[test]
    fn random_field_is_real_and_band_limited() {
        let (x, t) = grids();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let f = random_field(&x, &t, 2.0, 5.0, &mut rng);
        assert_eq!(f.hermitian_defect(), 0.0);
        let s = f.to_samples().unwrap();
        assert!(s.iter().all(|c| c.im.abs() < 1e-12));
        for i in 0..x.n() {
            for m in 0..t.n() {
                if x.wavenumber(i).abs() > 2.0 || t.wavenumber(m).abs() > 5.0 {
                    assert_eq!(f.coeff(i, m).norm(), 0.0);
                }
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn b_zero_norm_independent_of_a(seed in any::<u64>(), s in -1.0f64..1.0) {
            let (x, t) = grids();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let f = random_field(&x, &t, 3.0, 8.0, &mut rng);
            let base = xsb_norm(&f, &NormParams::new(1.0, s, 0.0)).unwrap();
            for a in [-1.0, 2.0] {
                prop_assert_eq!(xsb_norm(&f, &NormParams::new(a, s, 0.0)).unwrap(), base);
            }
        }

        #[test]
        fn monotone_in_b_off_characteristic(
            seed in any::<u64>(),
            b0 in -1.0f64..1.0,
            db in 0.0f64..1.0,
            a in prop_oneof![Just(1.0), Just(-1.0), Just(0.5)],
        ) {
            let (x, t) = grids();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let f = random_field(&x, &t, 3.0, 20.0, &mut rng);
            // remove everything within distance 1 of the characteristic τ = −aξ³
            let mut g = f.clone();
            for i in 0..x.n() {
                for m in 0..t.n() {
                    if (t.wavenumber(m) + a * x.wavenumber(i).powi(3)).abs() < 1.0 {
                        g.coeffs[i * t.n() + m] = Complex64::new(0.0, 0.0);
                    }
                }
            }
            let lo = xsb_norm(&g, &NormParams::new(a, 0.2, b0)).unwrap();
            let hi = xsb_norm(&g, &NormParams::new(a, 0.2, b0 + db)).unwrap();
            prop_assert!(hi >= lo);
        }
    }
}

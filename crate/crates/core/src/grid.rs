//! Periodic spatial grid and the spectral representation of real fields.
//!
//! The whole line is approximated by the box `[-L/2, L/2)` sampled at
//! `x_j = -L/2 + j L / n`. Spectral coefficients approximate the unitary
//! transform `f̂(ξ) = (2π)^{-1/2} ∫ e^{-iξx} f(x) dx` at `ξ_k = 2πk/L`, so
//! Parseval reads `Σ |c_k|² Δξ = Σ |f_j|² Δx`.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Default retained-mode fraction (2/3 rule).
pub const DEFAULT_DEALIAS_FRACTION: f64 = 2.0 / 3.0;

struct FftPair {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

/// Periodic grid description with cached FFT plans.
#[derive(Clone)]
pub struct GridSpec {
    n: usize,
    period: f64,
    dealias_fraction: f64,
    fft: Arc<FftPair>,
}

impl fmt::Debug for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GridSpec")
            .field("n", &self.n)
            .field("period", &self.period)
            .field("dealias_fraction", &self.dealias_fraction)
            .finish()
    }
}

impl PartialEq for GridSpec {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n
            && self.period.to_bits() == other.period.to_bits()
            && self.dealias_fraction.to_bits() == other.dealias_fraction.to_bits()
    }
}

/// Builds a grid with the default 2/3 dealiasing fraction.
pub fn make_grid(n: usize, period: f64) -> Result<GridSpec> {
    GridSpec::new(n, period)
}

impl GridSpec {
    pub fn new(n: usize, period: f64) -> Result<Self> {
        Self::with_dealias_fraction(n, period, DEFAULT_DEALIAS_FRACTION)
    }

    pub fn with_dealias_fraction(n: usize, period: f64, dealias_fraction: f64) -> Result<Self> {
        if n < 16 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!("n = {n} is not a power of two >= 16")));
        }
        if !(period > 0.0) || !period.is_finite() {
            return Err(Error::InvalidGrid(format!("period = {period} must be positive")));
        }
        if !(dealias_fraction > 0.0 && dealias_fraction <= 1.0) {
            return Err(Error::InvalidGrid(format!(
                "dealias fraction {dealias_fraction} outside (0, 1]"
            )));
        }
        let mut planner = FftPlanner::new();
        let fft = FftPair {
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        };
        Ok(Self {
            n,
            period,
            dealias_fraction,
            fft: Arc::new(fft),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn dealias_fraction(&self) -> f64 {
        self.dealias_fraction
    }

    /// Same box and resolution, different retained-mode fraction.
    pub fn with_fraction(&self, dealias_fraction: f64) -> Result<Self> {
        Self::with_dealias_fraction(self.n, self.period, dealias_fraction)
    }

    pub fn dx(&self) -> f64 {
        self.period / self.n as f64
    }

    /// Wavenumber spacing `Δξ = 2π/L`.
    pub fn dxi(&self) -> f64 {
        2.0 * PI / self.period
    }

    /// Integer mode number of storage slot `j` (FFT ordering), in `(-n/2, n/2]`.
    pub fn mode(&self, j: usize) -> i64 {
        let n = self.n as i64;
        let j = j as i64;
        if j <= n / 2 {
            j
        } else {
            j - n
        }
    }

    /// Storage slot of mode `k`; modes are taken modulo `n`.
    pub fn slot(&self, k: i64) -> usize {
        k.rem_euclid(self.n as i64) as usize
    }

    pub fn wavenumber(&self, j: usize) -> f64 {
        self.mode(j) as f64 * self.dxi()
    }

    pub fn wavenumbers(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.wavenumber(j)).collect()
    }

    pub fn x(&self, j: usize) -> f64 {
        -0.5 * self.period + j as f64 * self.dx()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.x(j)).collect()
    }

    /// Largest retained |k| under the dealiasing rule.
    pub fn max_retained_mode(&self) -> i64 {
        let half = (self.n / 2) as f64;
        (self.dealias_fraction * half + 1e-9).floor() as i64
    }

    pub fn is_retained(&self, j: usize) -> bool {
        self.mode(j).abs() <= self.max_retained_mode()
    }

    pub fn nyquist_slot(&self) -> usize {
        self.n / 2
    }

    /// Samples `f(x_j)` of a closure.
    pub fn sample<F: Fn(f64) -> f64>(&self, f: F) -> Vec<f64> {
        (0..self.n).map(|j| f(self.x(j))).collect()
    }

    /// Forward transform of real samples.
    pub fn forward(&self, samples: &[f64]) -> Result<SpectralField> {
        forward(samples, self)
    }

    /// In-place continuum-normalised transform of complex samples.
    pub fn forward_complex(&self, buf: &mut [Complex64]) -> Result<()> {
        self.check_len(buf.len())?;
        self.fft_forward(buf);
        let scale = self.coeff_scale();
        for (j, c) in buf.iter_mut().enumerate() {
            *c *= scale * alternating(self.mode(j));
        }
        Ok(())
    }

    /// Inverse of [`GridSpec::forward_complex`].
    pub fn inverse_complex(&self, buf: &mut [Complex64]) -> Result<()> {
        self.check_len(buf.len())?;
        let scale = 1.0 / (self.coeff_scale() * self.n as f64);
        for (j, c) in buf.iter_mut().enumerate() {
            *c *= scale * alternating(self.mode(j));
        }
        self.fft_inverse(buf);
        Ok(())
    }

    fn check_len(&self, got: usize) -> Result<()> {
        if got == self.n {
            Ok(())
        } else {
            Err(Error::LengthMismatch { expected: self.n, got })
        }
    }

    fn fft_forward(&self, buf: &mut [Complex64]) {
        self.fft.forward.process(buf);
    }

    fn fft_inverse(&self, buf: &mut [Complex64]) {
        self.fft.inverse.process(buf);
    }

    /// Scale factor from DFT output to continuum coefficients (without the phase).
    fn coeff_scale(&self) -> f64 {
        self.dx() / (2.0 * PI).sqrt()
    }
}

fn alternating(k: i64) -> f64 {
    if k.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Forward transform of `n` real samples on `grid`.
pub fn forward(samples: &[f64], grid: &GridSpec) -> Result<SpectralField> {
    let n = grid.n();
    if samples.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            got: samples.len(),
        });
    }
    let mut buf: Vec<Complex64> = samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    grid.fft_forward(&mut buf);
    let scale = grid.coeff_scale();
    for (j, c) in buf.iter_mut().enumerate() {
        // x_0 = -L/2 contributes the phase e^{iπk} = (-1)^k
        *c *= scale * alternating(grid.mode(j));
    }
    let mut field = SpectralField {
        grid: grid.clone(),
        coeffs: buf,
    };
    field.symmetrize();
    Ok(field)
}

/// Inverse transform back to real samples.
pub fn inverse(field: &SpectralField) -> Vec<f64> {
    field.to_samples()
}

/// Order of a spectral derivative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DerivativeOrder {
    /// Multiplier `(iξ)^m`.
    Integer(u32),
    /// Multiplier `|ξ|^s` with `|0|^s = 0` for `s > 0`.
    Fractional(f64),
}

/// Complex Fourier coefficients of a real field on a periodic grid.
#[derive(Clone, Debug)]
pub struct SpectralField {
    grid: GridSpec,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(grid: &GridSpec) -> Self {
        Self {
            grid: grid.clone(),
            coeffs: vec![Complex64::new(0.0, 0.0); grid.n()],
        }
    }

    pub fn from_coeffs(grid: &GridSpec, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.n() {
            return Err(Error::LengthMismatch {
                expected: grid.n(),
                got: coeffs.len(),
            });
        }
        Ok(Self {
            grid: grid.clone(),
            coeffs,
        })
    }

    pub fn from_fn<F: Fn(f64) -> f64>(grid: &GridSpec, f: F) -> Self {
        forward(&grid.sample(f), grid).expect("sample length matches grid")
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    pub fn coeff_of_mode(&self, k: i64) -> Complex64 {
        self.coeffs[self.grid.slot(k)]
    }

    /// Real samples on the grid points.
    pub fn to_samples(&self) -> Vec<f64> {
        let grid = &self.grid;
        let scale = 1.0 / (grid.coeff_scale() * grid.n() as f64);
        let mut buf: Vec<Complex64> = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(j, c)| c * (scale * alternating(grid.mode(j))))
            .collect();
        grid.fft_inverse(&mut buf);
        buf.into_iter().map(|c| c.re).collect()
    }

    /// Trigonometric interpolant evaluated at arbitrary points.
    ///
    /// `f(x) = (√(2π)/L) Σ_k c_k e^{iξ_k x}`; exact at grid points.
    pub fn eval_at(&self, xs: &[f64]) -> Vec<f64> {
        let grid = &self.grid;
        let pref = (2.0 * PI).sqrt() / grid.period();
        let active: Vec<(f64, Complex64)> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| c.norm_sqr() > 0.0)
            .map(|(j, c)| (grid.wavenumber(j), *c))
            .collect();
        xs.iter()
            .map(|&x| {
                let mut acc = 0.0;
                for &(xi, c) in &active {
                    let (s, co) = (xi * x).sin_cos();
                    acc += c.re * co - c.im * s;
                }
                pref * acc
            })
            .collect()
    }

    /// Samples on a grid refined by an integer power-of-two `factor` (zero padding).
    pub fn oversampled_samples(&self, factor: usize) -> Result<Vec<f64>> {
        let fine =
            GridSpec::with_dealias_fraction(self.grid.n() * factor, self.grid.period(), self.grid.dealias_fraction())?;
        let mut padded = SpectralField::zeros(&fine);
        let half = (self.grid.n() / 2) as i64;
        for j in 0..self.grid.n() {
            let k = self.grid.mode(j);
            let c = self.coeffs[j];
            if k == half && factor > 1 {
                // split the Nyquist mode symmetrically
                padded.coeffs[fine.slot(k)] += c * 0.5;
                padded.coeffs[fine.slot(-k)] += c * 0.5;
            } else {
                padded.coeffs[fine.slot(k)] += c;
            }
        }
        Ok(padded.to_samples())
    }

    /// Applies `(iξ)^m` or `|ξ|^s` mode by mode.
    pub fn spectral_derivative(&self, order: DerivativeOrder) -> SpectralField {
        let grid = &self.grid;
        let nyq = grid.nyquist_slot();
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(j, &c)| {
                let xi = grid.wavenumber(j);
                match order {
                    DerivativeOrder::Integer(0) => c,
                    DerivativeOrder::Integer(m) => {
                        if j == nyq && m % 2 == 1 {
                            // odd derivatives of the Nyquist mode are not real
                            Complex64::new(0.0, 0.0)
                        } else {
                            c * ik_power(xi, m)
                        }
                    }
                    DerivativeOrder::Fractional(s) => {
                        if s == 0.0 {
                            c
                        } else if xi == 0.0 {
                            Complex64::new(0.0, 0.0)
                        } else {
                            c * xi.abs().powf(s)
                        }
                    }
                }
            })
            .collect();
        SpectralField {
            grid: grid.clone(),
            coeffs,
        }
    }

    /// First derivative, the common case.
    pub fn dx(&self) -> SpectralField {
        self.spectral_derivative(DerivativeOrder::Integer(1))
    }

    /// Zeroes every mode outside the retained band.
    pub fn dealias(&self) -> SpectralField {
        let mut out = self.clone();
        out.dealias_in_place();
        out
    }

    pub fn dealias_in_place(&mut self) {
        let kmax = self.grid.max_retained_mode();
        for j in 0..self.grid.n() {
            if self.grid.mode(j).abs() > kmax {
                self.coeffs[j] = Complex64::new(0.0, 0.0);
            }
        }
    }

    /// Enforces exact Hermitian symmetry `c(-k) = conj(c(k))`.
    pub fn symmetrize(&mut self) {
        let n = self.grid.n();
        let c0 = self.coeffs[0];
        self.coeffs[0] = Complex64::new(c0.re, 0.0);
        let nyq = n / 2;
        let cn = self.coeffs[nyq];
        self.coeffs[nyq] = Complex64::new(cn.re, 0.0);
        for j in 1..nyq {
            let a = self.coeffs[j];
            let b = self.coeffs[n - j];
            let avg = (a + b.conj()) * 0.5;
            self.coeffs[j] = avg;
            self.coeffs[n - j] = avg.conj();
        }
    }

    /// Largest `|c(-k) - conj(c(k))|` relative to the largest coefficient.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.grid.n();
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        let mut worst: f64 = 0.0;
        for j in 0..n {
            let m = (n - j) % n;
            worst = worst.max((self.coeffs[m] - self.coeffs[j].conj()).norm());
        }
        worst / scale
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// `Σ |c_k|² Δξ`, the squared L² norm.
    pub fn l2_norm_sqr(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>() * self.grid.dxi()
    }

    /// Reflection `x ↦ -x`, exact on the centered grid.
    pub fn reflect(&self) -> SpectralField {
        let n = self.grid.n();
        let coeffs = (0..n).map(|j| self.coeffs[(n - j) % n]).collect();
        SpectralField {
            grid: self.grid.clone(),
            coeffs,
        }
    }

    pub fn check_same_grid(&self, other: &SpectralField) -> Result<()> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    /// `self + alpha * other`.
    pub fn axpy(&self, alpha: f64, other: &SpectralField) -> SpectralField {
        debug_assert_eq!(self.grid, other.grid);
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a + b * alpha)
            .collect();
        SpectralField {
            grid: self.grid.clone(),
            coeffs,
        }
    }

    pub fn scale(&self, alpha: f64) -> SpectralField {
        SpectralField {
            grid: self.grid.clone(),
            coeffs: self.coeffs.iter().map(|c| c * alpha).collect(),
        }
    }

    /// Mode-wise multiplication by a complex multiplier table.
    pub fn apply_multiplier(&self, multiplier: &[Complex64]) -> SpectralField {
        SpectralField {
            grid: self.grid.clone(),
            coeffs: self.coeffs.iter().zip(multiplier).map(|(c, m)| c * m).collect(),
        }
    }

    /// Largest absolute difference between the sample values of two fields.
    pub fn max_abs_diff(&self, other: &SpectralField) -> f64 {
        let a = self.to_samples();
        let b = other.to_samples();
        a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }
}

fn ik_power(xi: f64, m: u32) -> Complex64 {
    let mag = xi.powi(m as i32);
    match m % 4 {
        0 => Complex64::new(mag, 0.0),
        1 => Complex64::new(0.0, mag),
        2 => Complex64::new(-mag, 0.0),
        _ => Complex64::new(0.0, -mag),
    }
}

/// Pseudo-spectral product of physical samples, transformed and dealiased.
pub fn dealiased_product(grid: &GridSpec, a: &[f64], b: &[f64]) -> SpectralField {
    let prod: Vec<f64> = a.iter().zip(b).map(|(x, y)| x * y).collect();
    let mut f = forward(&prod, grid).expect("product length matches grid");
    f.dealias_in_place();
    f
}

/// Periodic trapezoid rule, `Σ f_j Δx`.
pub fn integrate_samples(samples: &[f64], dx: f64) -> f64 {
    samples.iter().sum::<f64>() * dx
}

impl Add for &SpectralField {
    type Output = SpectralField;
    fn add(self, rhs: &SpectralField) -> SpectralField {
        self.axpy(1.0, rhs)
    }
}

impl Sub for &SpectralField {
    type Output = SpectralField;
    fn sub(self, rhs: &SpectralField) -> SpectralField {
        self.axpy(-1.0, rhs)
    }
}

impl Mul<f64> for &SpectralField {
    type Output = SpectralField;
    fn mul(self, rhs: f64) -> SpectralField {
        self.scale(rhs)
    }
}

impl Neg for &SpectralField {
    type Output = SpectralField;
    fn neg(self) -> SpectralField {
        self.scale(-1.0)
    }
}

//! Diagonalization of dispersion matrices, changes of variables, scaling and
//! the reduction of Sakovich-type systems.

use crate::error::{Error, Result};
use crate::grid::{GridSpec, SpectralField};
use crate::mat2::{self, Mat2};
use crate::systems::{dispersion_coeffs, Dispersion, SystemSpec};

/// Tie tolerance used when sorting and comparing eigenvalues.
pub const EIGEN_TIE_TOL: f64 = 1e-12;

/// Eigen-structure of a real 2×2 dispersion matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagonalization {
    pub alpha_plus: f64,
    pub alpha_minus: f64,
    /// `α₊ − α₋`.
    pub lambda: f64,
    /// Columns are eigenvectors; absent for complex or defective spectra.
    pub t: Option<Mat2>,
    pub t_inv: Option<Mat2>,
    pub eigenvalues_real: bool,
    pub eigenvalues_distinct: bool,
    pub nonzero: bool,
    pub opposite: bool,
}

impl Diagonalization {
    pub fn matrices(&self) -> Result<(Mat2, Mat2)> {
        match (self.t, self.t_inv) {
            (Some(t), Some(ti)) => Ok((t, ti)),
            _ => Err(Error::SingularTransform(
                "dispersion matrix is not diagonalizable over the reals".into(),
            )),
        }
    }
}

/// Real eigen-decomposition `A = T diag(α₊, α₋) T⁻¹` with `α₊ ≥ α₋`.
///
/// When `a12 ≠ 0` the eigenvector matrix has first row `(1, 1)`.
pub fn diagonalize(a: &Mat2) -> Diagonalization {
    let [[a11, a12], [a21, a22]] = *a;
    let mean = 0.5 * (a11 + a22);
    let half_gap = 0.5 * (a11 - a22);
    let disc = half_gap * half_gap + a12 * a21;
    let scale = a.iter().flatten().fold(0.0f64, |m, x| m.max(x.abs())).max(1.0);
    if disc < -EIGEN_TIE_TOL * scale * scale {
        return Diagonalization {
            alpha_plus: mean,
            alpha_minus: mean,
            lambda: 0.0,
            t: None,
            t_inv: None,
            eigenvalues_real: false,
            eigenvalues_distinct: false,
            nonzero: mean != 0.0,
            opposite: false,
        };
    }
    let root = disc.max(0.0).sqrt();
    let alpha_plus = mean + root;
    let alpha_minus = mean - root;
    let lambda = alpha_plus - alpha_minus;
    let distinct = lambda > EIGEN_TIE_TOL * scale;
    let t = if a12 == 0.0 && a21 == 0.0 {
        if a11 >= a22 {
            Some(mat2::IDENTITY)
        } else {
            Some([[0.0, 1.0], [1.0, 0.0]])
        }
    } else if !distinct {
        // defective: a single eigendirection
        None
    } else if a12 != 0.0 {
        Some([[1.0, 1.0], [(alpha_plus - a11) / a12, (alpha_minus - a11) / a12]])
    } else {
        Some([[(alpha_plus - a22) / a21, (alpha_minus - a22) / a21], [1.0, 1.0]])
    };
    let t_inv = t.as_ref().and_then(|m| {
        if a12 != 0.0 && distinct {
            let k = a12 / lambda;
            Some([[k * (a11 - alpha_minus) / a12, k], [k * (alpha_plus - a11) / a12, -k]])
        } else {
            mat2::inverse(m)
        }
    });
    Diagonalization {
        alpha_plus,
        alpha_minus,
        lambda,
        t,
        t_inv,
        eigenvalues_real: true,
        eigenvalues_distinct: distinct,
        nonzero: alpha_plus != 0.0 && alpha_minus != 0.0,
        opposite: (alpha_plus + alpha_minus).abs() < EIGEN_TIE_TOL,
    }
}

/// Closed-form `(λ, α₊, α₋)` for the Gear–Grimshaw dispersion matrix.
pub fn gg_lambda_alpha(b1: f64, b2: f64, a3: f64) -> Result<(f64, f64, f64)> {
    if !(b1 > 0.0) || !(b2 > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "requires b1 > 0 and b2 > 0, got b1 = {b1}, b2 = {b2}"
        )));
    }
    let lambda = ((1.0 - 1.0 / b1).powi(2) + 4.0 * b2 * a3 * a3 / b1).sqrt();
    let alpha_plus = 0.5 * (1.0 + 1.0 / b1 + lambda);
    let alpha_minus = 0.5 * (1.0 + 1.0 / b1 - lambda);
    Ok((lambda, alpha_plus, alpha_minus))
}

/// Result of a decoupling change of variables.
#[derive(Debug, Clone)]
pub struct ChangedVariables {
    pub first: SpectralField,
    pub second: SpectralField,
    /// Decay violations of the input data near the box edge.
    pub warnings: Vec<String>,
}

/// Largest sample magnitude allowed near the box edge before a decay warning.
pub const EDGE_DECAY_TOL: f64 = 1e-12;

fn edge_violation(field: &SpectralField, name: &str) -> Option<String> {
    let samples = field.to_samples();
    let n = samples.len();
    let band = (n / 32).max(1);
    let edge = samples[..band]
        .iter()
        .chain(&samples[n - band..])
        .fold(0.0f64, |m, x| m.max(x.abs()));
    (edge > EDGE_DECAY_TOL).then(|| format!("{name} is {edge:.3e} near the box edge"))
}

/// Evaluates `f(scale·x_j)` on the grid points of `grid`; zero outside the box.
pub fn rescaled_samples(field: &SpectralField, scale: f64, grid: &GridSpec) -> Vec<f64> {
    let half = 0.5 * field.grid().period();
    let pts: Vec<f64> = grid.points().iter().map(|x| scale * x).collect();
    let inside: Vec<usize> = (0..pts.len()).filter(|&j| pts[j] >= -half && pts[j] < half).collect();
    let xs: Vec<f64> = inside.iter().map(|&j| pts[j]).collect();
    let vals = field.eval_at(&xs);
    let mut out = vec![0.0; pts.len()];
    for (j, v) in inside.into_iter().zip(vals) {
        out[j] = v;
    }
    out
}

fn mix(t: &Mat2, u: &SpectralField, v: &SpectralField) -> (SpectralField, SpectralField) {
    (
        &u.scale(t[0][0]) + &v.scale(t[0][1]),
        &u.scale(t[1][0]) + &v.scale(t[1][1]),
    )
}

fn nonzero_alphas(d: &Diagonalization) -> Result<(f64, f64)> {
    if !d.eigenvalues_real {
        return Err(Error::SingularTransform("complex eigenvalues".into()));
    }
    if !d.nonzero {
        return Err(Error::SingularTransform("zero eigenvalue".into()));
    }
    Ok((d.alpha_plus.cbrt(), d.alpha_minus.cbrt()))
}

/// Decoupling change of variables for a system with dispersion matrix `A`.
///
/// `V = T⁻¹U`, then `first(x) = v₁(α₊^{1/3} x)`, `second(x) = v₂(α₋^{1/3} x)`.
/// Cube roots of negative eigenvalues are the real roots, so a negative
/// eigenvalue reflects the corresponding component.
pub fn change_of_variables(spec: &SystemSpec, u0: &SpectralField, v0: &SpectralField) -> Result<ChangedVariables> {
    u0.check_same_grid(v0)?;
    let d = diagonalize(&spec.dispersion_matrix()?);
    let (cp, cm) = nonzero_alphas(&d)?;
    let (_, t_inv) = d.matrices()?;
    let warnings: Vec<String> = [edge_violation(u0, "u"), edge_violation(v0, "v")]
        .into_iter()
        .flatten()
        .collect();
    let (w1, w2) = mix(&t_inv, u0, v0);
    let grid = u0.grid();
    Ok(ChangedVariables {
        first: grid.forward(&rescaled_samples(&w1, cp, grid))?,
        second: grid.forward(&rescaled_samples(&w2, cm, grid))?,
        warnings,
    })
}

/// Inverse of [`change_of_variables`]: `U = T (first(x/α₊^{1/3}), second(x/α₋^{1/3}))`.
pub fn inverse_change_of_variables(
    spec: &SystemSpec,
    first: &SpectralField,
    second: &SpectralField,
) -> Result<ChangedVariables> {
    first.check_same_grid(second)?;
    let d = diagonalize(&spec.dispersion_matrix()?);
    let (cp, cm) = nonzero_alphas(&d)?;
    let (t, _) = d.matrices()?;
    let warnings: Vec<String> = [edge_violation(first, "first"), edge_violation(second, "second")]
        .into_iter()
        .flatten()
        .collect();
    let grid = first.grid();
    let w1 = grid.forward(&rescaled_samples(first, 1.0 / cp, grid))?;
    let w2 = grid.forward(&rescaled_samples(second, 1.0 / cm, grid))?;
    let (u, v) = mix(&t, &w1, &w2);
    Ok(ChangedVariables {
        first: u,
        second: v,
        warnings,
    })
}

/// Gear–Grimshaw change of variables; fails for a zero eigenvalue.
pub fn gg_change_of_variables(spec: &SystemSpec, u0: &SpectralField, v0: &SpectralField) -> Result<ChangedVariables> {
    match spec {
        SystemSpec::GearGrimshaw { .. } | SystemSpec::GeneralCoupled { .. } => change_of_variables(spec, u0, v0),
        _ => Err(Error::NotApplicable(
            "change of variables needs a Gear-Grimshaw type system".into(),
        )),
    }
}

/// Anything that can be evaluated as `(u, v)` at points `xs` and time `t`.
pub trait SpaceTimeSource {
    fn eval(&self, xs: &[f64], t: f64) -> Result<[Vec<f64>; 2]>;
}

/// `(λ²u(λx, λ³t), λ²v(λx, λ³t))` for an underlying source.
#[derive(Debug, Clone, Copy)]
pub struct ScaledTrajectory<'a, S: SpaceTimeSource> {
    pub source: &'a S,
    pub lambda: f64,
}

impl<S: SpaceTimeSource> SpaceTimeSource for ScaledTrajectory<'_, S> {
    fn eval(&self, xs: &[f64], t: f64) -> Result<[Vec<f64>; 2]> {
        let l = self.lambda;
        let scaled: Vec<f64> = xs.iter().map(|x| l * x).collect();
        let [u, v] = self.source.eval(&scaled, l * l * l * t)?;
        let w = l * l;
        Ok([
            u.into_iter().map(|x| w * x).collect(),
            v.into_iter().map(|x| w * x).collect(),
        ])
    }
}

/// Wraps a solution source in the scaling family.
pub fn scaling_map<S: SpaceTimeSource>(source: &S, lambda: f64) -> Result<ScaledTrajectory<'_, S>> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "scaling factor must be positive, got {lambda}"
        )));
    }
    Ok(ScaledTrajectory { source, lambda })
}

/// Scaled initial datum `λ² f(λx)` sampled on `target`.
pub fn scale_field(field: &SpectralField, lambda: f64, target: &GridSpec) -> Result<SpectralField> {
    let w = lambda * lambda;
    let samples: Vec<f64> = rescaled_samples(field, lambda, target)
        .into_iter()
        .map(|x| w * x)
        .collect();
    target.forward(&samples)
}

/// A Sakovich system rewritten with diagonal dispersion.
#[derive(Debug, Clone, PartialEq)]
pub struct SakovichReduction {
    /// Same family, in the variables `V` with `U = P V`.
    pub reduced: SystemSpec,
    pub p: Mat2,
    pub eigenvalues: (f64, f64),
}

/// Coefficients of `(uu_x, vv_x, uv_x, vu_x)` in the monomials
/// `(v1v1x, v2v2x, v1v2x, v2v1x)` under `(u, v) = P (v1, v2)`.
fn monomial_substitution(p: &Mat2) -> [[f64; 4]; 4] {
    let [[p11, p12], [p21, p22]] = *p;
    let pair = |r0: f64, r1: f64, s0: f64, s1: f64| [r0 * s0, r1 * s1, r0 * s1, r1 * s0];
    [
        pair(p11, p12, p11, p12),
        pair(p21, p22, p21, p22),
        pair(p11, p12, p21, p22),
        pair(p21, p22, p11, p12),
    ]
}

/// Diagonalizes the dispersion of a Sakovich system by `U = P V`.
pub fn sakovich_reduce(spec: &SystemSpec) -> Result<SakovichReduction> {
    let SystemSpec::Sakovich { a0, a1, a2 } = spec else {
        return Err(Error::NotApplicable("expected a Sakovich system".into()));
    };
    let inv = mat2::inverse(a2).ok_or_else(|| Error::SingularTransform("time-derivative matrix is singular".into()))?;
    let (p, d0, d1) = if mat2::is_diagonal(&inv) {
        (mat2::IDENTITY, inv[0][0], inv[1][1])
    } else {
        let d = diagonalize(&inv);
        if !d.eigenvalues_real {
            return Err(Error::SingularTransform(
                "inverse time-derivative matrix has complex eigenvalues".into(),
            ));
        }
        let (t, _) = d.matrices()?;
        (t, d.alpha_plus, d.alpha_minus)
    };
    let p_inv = mat2::inverse(&p).ok_or_else(|| Error::SingularTransform("eigenvector matrix is singular".into()))?;
    let m0 = mat2::mul(&inv, a0);
    let m1 = mat2::mul(&inv, a1);
    let sub = monomial_substitution(&p);
    // K = P⁻¹ [M0 | M1] S, a 2×4 table over the V-monomials
    let mut k = [[0.0; 4]; 2];
    for (i, row) in k.iter_mut().enumerate() {
        for (m, entry) in row.iter_mut().enumerate() {
            let mut acc = 0.0;
            for j in 0..2 {
                let coupling = [m0[j][0], m0[j][1], m1[j][0], m1[j][1]];
                let mapped: f64 = (0..4).map(|q| coupling[q] * sub[q][m]).sum();
                acc += p_inv[i][j] * mapped;
            }
            *entry = acc;
        }
    }
    let d_inv = mat2::diag(1.0 / d0, 1.0 / d1);
    let k0 = [[k[0][0], k[0][1]], [k[1][0], k[1][1]]];
    let k1 = [[k[0][2], k[0][3]], [k[1][2], k[1][3]]];
    Ok(SakovichReduction {
        reduced: SystemSpec::Sakovich {
            a0: mat2::mul(&d_inv, &k0),
            a1: mat2::mul(&d_inv, &k1),
            a2: d_inv,
        },
        p,
        eigenvalues: (d0, d1),
    })
}

/// Nonlinear coefficients of a coupled system after diagonalizing `A` with `a12 ≠ 0`.
///
/// The transformed nonlinearity is
/// `κ [[a v1 + b v2, b v1 + c v2], [d v1 + e v2, e v1 + f v2]] V_x` with `κ = a12/(α₊ − α₋)`.
#[derive(Debug, Clone, PartialEq)]
pub struct OffdiagCoeffs {
    pub prefactor: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub e: f64,
    pub f: f64,
    /// First-order term `T⁻¹ diag(0, r) T`.
    pub drift: Mat2,
    pub diagonalization: Diagonalization,
}

fn congruence(t: &Mat2, g: &Mat2) -> Mat2 {
    let tt = [[t[0][0], t[1][0]], [t[0][1], t[1][1]]];
    mat2::mul(&tt, &mat2::mul(g, t))
}

pub fn gg_offdiag_coeffs(spec: &SystemSpec) -> Result<OffdiagCoeffs> {
    let SystemSpec::GeneralCoupled { a, b, r } = spec else {
        return Err(Error::NotApplicable("expected a general coupled system".into()));
    };
    if a[0][1] == 0.0 {
        return Err(Error::NotApplicable("requires a12 != 0".into()));
    }
    let d = diagonalize(a);
    if !d.eigenvalues_real || !d.eigenvalues_distinct {
        return Err(Error::SingularTransform("requires real distinct eigenvalues".into()));
    }
    let (t, t_inv) = d.matrices()?;
    // row i of C(U)U_x is the gradient of ½ Uᵀ G_i U
    let g = [[[b[1], b[0]], [b[0], b[2]]], [[b[4], b[3]], [b[3], b[5]]]];
    let h_prime = [congruence(&t, &g[0]), congruence(&t, &g[1])];
    let h: Vec<Mat2> = (0..2)
        .map(|i| {
            let mut m = [[0.0; 2]; 2];
            for (j, hj) in h_prime.iter().enumerate() {
                for p in 0..2 {
                    for q in 0..2 {
                        m[p][q] += t_inv[i][j] * hj[p][q];
                    }
                }
            }
            m
        })
        .collect();
    let kappa = a[0][1] / d.lambda;
    let drift = mat2::mul(&t_inv, &mat2::mul(&mat2::diag(0.0, *r), &t));
    Ok(OffdiagCoeffs {
        prefactor: kappa,
        a: h[0][0][0] / kappa,
        b: h[0][0][1] / kappa,
        c: h[0][1][1] / kappa,
        d: h[1][0][0] / kappa,
        e: h[1][0][1] / kappa,
        f: h[1][1][1] / kappa,
        drift,
        diagonalization: d,
    })
}

/// Diagonal dispersion coefficients of a system, after diagonalizing if needed.
pub fn diagonal_groups(spec: &SystemSpec) -> Result<(f64, f64)> {
    match dispersion_coeffs(spec)? {
        Dispersion::Diagonal { c_u, c_v } => Ok((c_u, c_v)),
        Dispersion::NotDiagonal => {
            let d = diagonalize(&spec.dispersion_matrix()?);
            if !d.eigenvalues_real {
                return Err(Error::SingularTransform("complex eigenvalues".into()));
            }
            Ok((-d.alpha_plus, -d.alpha_minus))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;
    use crate::systems::{nonlinear_rhs, State};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn reconstruct(d: &Diagonalization) -> Mat2 {
        let (t, ti) = d.matrices().unwrap();
        mat2::mul(&t, &mat2::mul(&mat2::diag(d.alpha_plus, d.alpha_minus), &ti))
    }

    #[test]
    fn worked_example_eigenvalues() {
        let d = diagonalize(&[[1.0, 2.0], [2.0, 1.0]]);
        assert_eq!((d.alpha_plus, d.alpha_minus, d.lambda), (3.0, -1.0, 4.0));
        let (t, ti) = d.matrices().unwrap();
        assert_eq!(t[0], [1.0, 1.0]);
        assert_eq!(ti, [[0.5, 0.5], [0.5, -0.5]]);
    }

    #[test]
    fn gg_worked_example() {
        assert_eq!(gg_lambda_alpha(1.0, 1.0, 2.0).unwrap(), (4.0, 3.0, -1.0));
        assert_eq!(gg_lambda_alpha(1.0, 1.0, 0.0).unwrap(), (0.0, 1.0, 1.0));
        assert!(gg_lambda_alpha(0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn gg_formula_matches_eigen_solver() {
        let (b1, b2, a3) = (2.0, 1.0, 1.0);
        let (lambda, ap, am) = gg_lambda_alpha(b1, b2, a3).unwrap();
        let d = diagonalize(&[[1.0, a3], [b2 * a3 / b1, 1.0 / b1]]);
        assert!((ap - d.alpha_plus).abs() < 1e-12);
        assert!((am - d.alpha_minus).abs() < 1e-12);
        assert!((lambda - d.lambda).abs() < 1e-12);
    }

    #[test]
    fn scalar_matrix() {
        let d = diagonalize(&[[2.5, 0.0], [0.0, 2.5]]);
        assert_eq!((d.alpha_plus, d.alpha_minus), (2.5, 2.5));
        assert!(!d.eigenvalues_distinct);
        assert_eq!(d.t, Some(mat2::IDENTITY));
    }

    #[test]
    fn complex_and_defective_spectra() {
        let d = diagonalize(&[[0.0, -1.0], [1.0, 0.0]]);
        assert!(!d.eigenvalues_real);
        assert!(d.t.is_none());
        let d = diagonalize(&[[1.0, 1.0], [0.0, 1.0]]);
        assert!(d.eigenvalues_real && !d.eigenvalues_distinct);
        assert!(d.t.is_none());
    }

    #[test]
    fn opposite_flag() {
        let d = diagonalize(&[[-1.0, 0.0], [0.0, 1.0]]);
        assert!(d.opposite);
        assert_eq!(d.t, Some([[0.0, 1.0], [1.0, 0.0]]));
        assert!(mat2::max_abs_diff(&reconstruct(&d), &[[-1.0, 0.0], [0.0, 1.0]]) < 1e-15);
    }

    fn gaussian_pair(g: &GridSpec) -> (SpectralField, SpectralField) {
        (
            SpectralField::from_fn(g, |x| (-x * x / 2.0).exp()),
            SpectralField::from_fn(g, |x| 0.5 * x * (-(x - 0.5).powi(2) / 2.0).exp()),
        )
    }

    #[test]
    fn worked_change_of_variables() {
        let g = make_grid(256, 40.0).unwrap();
        let spec = SystemSpec::GearGrimshaw {
            a1: 0.0,
            a2: 0.0,
            a3: 2.0,
            b1: 1.0,
            b2: 1.0,
            r: 0.0,
        };
        let (u0, v0) = gaussian_pair(&g);
        let out = gg_change_of_variables(&spec, &u0, &v0).unwrap();
        assert!(out.warnings.is_empty());
        let c = 3f64.cbrt();
        let first = out.first.to_samples();
        let second = out.second.to_samples();
        let u = |x: f64| (-x * x / 2.0).exp();
        let v = |x: f64| 0.5 * x * (-(x - 0.5).powi(2) / 2.0).exp();
        for j in 1..g.n() {
            let x = g.x(j);
            assert!((first[j] - (0.5 * u(c * x) + 0.5 * v(c * x))).abs() < 1e-12);
            assert!((second[j] - (0.5 * u(-x) - 0.5 * v(-x))).abs() < 1e-12);
        }
    }

    #[test]
    fn change_of_variables_round_trip() {
        let g = make_grid(512, 60.0).unwrap();
        let spec = SystemSpec::GearGrimshaw {
            a1: 0.3,
            a2: 0.1,
            a3: 0.7,
            b1: 2.0,
            b2: 0.8,
            r: 0.0,
        };
        let (u0, v0) = gaussian_pair(&g);
        let fwd = gg_change_of_variables(&spec, &u0, &v0).unwrap();
        let back = inverse_change_of_variables(&spec, &fwd.first, &fwd.second).unwrap();
        assert!(back.first.max_abs_diff(&u0) < 1e-8);
        assert!(back.second.max_abs_diff(&v0) < 1e-8);
    }

    #[test]
    fn identity_like_change_is_plain_mixing() {
        let g = make_grid(128, 30.0).unwrap();
        let spec = SystemSpec::GeneralCoupled {
            a: mat2::IDENTITY,
            b: [0.0; 6],
            r: 0.0,
        };
        let (u0, v0) = gaussian_pair(&g);
        let fwd = change_of_variables(&spec, &u0, &v0).unwrap();
        assert!(fwd.first.max_abs_diff(&u0) < 1e-13);
        assert!(fwd.second.max_abs_diff(&v0) < 1e-13);
    }

    #[test]
    fn zero_eigenvalue_is_singular() {
        let g = make_grid(32, 10.0).unwrap();
        let spec = SystemSpec::GeneralCoupled {
            a: [[1.0, 0.0], [0.0, 0.0]],
            b: [0.0; 6],
            r: 0.0,
        };
        let z = SpectralField::zeros(&g);
        assert!(matches!(
            change_of_variables(&spec, &z, &z),
            Err(Error::SingularTransform(_))
        ));
    }

    #[test]
    fn decay_warning_for_wide_data() {
        let g = make_grid(64, 10.0).unwrap();
        let spec = SystemSpec::GeneralCoupled {
            a: [[2.0, 0.0], [0.0, 1.0]],
            b: [0.0; 6],
            r: 0.0,
        };
        let wide = SpectralField::from_fn(&g, |x| (-x * x / 50.0).exp());
        let out = change_of_variables(&spec, &wide, &wide).unwrap();
        assert_eq!(out.warnings.len(), 2);
    }

    #[test]
    fn scaled_datum() {
        let g = make_grid(256, 40.0).unwrap();
        let f = SpectralField::from_fn(&g, |x| (-x * x).exp());
        let same = scale_field(&f, 1.0, &g).unwrap();
        assert!(same.max_abs_diff(&f) < 1e-14);
        let scaled = scale_field(&f, 2.0, &g).unwrap().to_samples();
        for j in 0..g.n() {
            let x = g.x(j);
            assert!((scaled[j] - 4.0 * (-4.0 * x * x).exp()).abs() < 1e-12);
        }
        assert!(scaling_map(&Static(f.clone()), 0.0).is_err());
    }

    struct Static(SpectralField);

    impl SpaceTimeSource for Static {
        fn eval(&self, xs: &[f64], t: f64) -> Result<[Vec<f64>; 2]> {
            let u = self.0.eval_at(xs);
            let v = u.iter().map(|x| x * t).collect();
            Ok([u, v])
        }
    }

    #[test]
    fn scaling_is_a_group_action() {
        let g = make_grid(256, 40.0).unwrap();
        let src = Static(SpectralField::from_fn(&g, |x| (-x * x / 3.0).exp()));
        let xs: Vec<f64> = (0..50).map(|i| -4.0 + 0.16 * i as f64).collect();
        let once = scaling_map(&src, 1.5).unwrap();
        let twice = scaling_map(&once, 1.2).unwrap();
        let direct = scaling_map(&src, 1.8).unwrap();
        let [a, b] = twice.eval(&xs, 0.3).unwrap();
        let [c, d] = direct.eval(&xs, 0.3).unwrap();
        for i in 0..xs.len() {
            assert!((a[i] - c[i]).abs() < 1e-12);
            assert!((b[i] - d[i]).abs() < 1e-12);
        }
    }

    fn random_state(g: &GridSpec, rng: &mut ChaCha8Rng) -> State {
        let c: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..1.0)).collect();
        State::from_fns(
            g,
            |x| c[0] * (-(x - c[1]).powi(2) / 2.0).exp(),
            |x| c[2] * x * (-(x + c[3]).powi(2) / 3.0).exp(),
            0.0,
        )
        .dealias()
    }

    #[test]
    fn sakovich_trivial_cases() {
        let a0 = [[1.0, 2.0], [3.0, 4.0]];
        let a1 = [[-1.0, 0.5], [0.0, 2.0]];
        let red = sakovich_reduce(&SystemSpec::Sakovich {
            a0,
            a1,
            a2: mat2::IDENTITY,
        })
        .unwrap();
        assert_eq!(red.p, mat2::IDENTITY);
        assert_eq!(
            red.reduced,
            SystemSpec::Sakovich {
                a0,
                a1,
                a2: mat2::IDENTITY
            }
        );
        let red = sakovich_reduce(&SystemSpec::Sakovich {
            a0,
            a1,
            a2: mat2::diag(2.0, 1.0),
        })
        .unwrap();
        assert_eq!(red.p, mat2::IDENTITY);
        assert_eq!(red.eigenvalues, (0.5, 1.0));
    }

    #[test]
    fn sakovich_reduction_round_trip() {
        let g = make_grid(128, 30.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let mut checked = 0;
        while checked < 10 {
            let mut m = || {
                [
                    [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)],
                    [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)],
                ]
            };
            let (a0, a1, a2) = (m(), m(), m());
            let spec = SystemSpec::Sakovich { a0, a1, a2 };
            let Ok(red) = sakovich_reduce(&spec) else {
                continue;
            };
            // dispersion: P D P⁻¹ = A2⁻¹
            let inv = mat2::inverse(&a2).unwrap();
            let dm = red.reduced.dispersion_matrix().unwrap();
            assert!(mat2::is_diagonal(&dm));
            let p_inv = mat2::inverse(&red.p).unwrap();
            let back = mat2::mul(&red.p, &mat2::mul(&dm, &p_inv));
            assert!(mat2::max_abs_diff(&back, &inv) < 1e-10 * (1.0 + inv[0][0].abs().max(inv[1][1].abs())));
            // nonlinearity: P·N_V(V) = N_U(P V)
            let vstate = random_state(&g, &mut rng);
            let p = red.p;
            let ustate = State::new(
                &vstate.u.scale(p[0][0]) + &vstate.v.scale(p[0][1]),
                &vstate.u.scale(p[1][0]) + &vstate.v.scale(p[1][1]),
                0.0,
            )
            .unwrap();
            let (nu, nv) = nonlinear_rhs(&spec, &ustate).unwrap();
            let (mu, mv) = nonlinear_rhs(&red.reduced, &vstate).unwrap();
            let pu = &mu.scale(p[0][0]) + &mv.scale(p[0][1]);
            let pv = &mu.scale(p[1][0]) + &mv.scale(p[1][1]);
            let scale = nu.max_abs().max(nv.max_abs()).max(1e-300);
            assert!(pu.max_abs_diff(&nu) <= 1e-10 * scale.max(1.0));
            assert!(pv.max_abs_diff(&nv) <= 1e-10 * scale.max(1.0));
            checked += 1;
        }
    }

    #[test]
    fn sakovich_complex_spectrum_rejected() {
        let spec = SystemSpec::Sakovich {
            a0: mat2::IDENTITY,
            a1: mat2::IDENTITY,
            a2: [[0.0, -1.0], [1.0, 0.0]],
        };
        assert!(matches!(sakovich_reduce(&spec), Err(Error::SingularTransform(_))));
    }

    #[test]
    fn offdiag_zero_coupling() {
        let spec = SystemSpec::GeneralCoupled {
            a: [[1.0, 2.0], [2.0, 1.0]],
            b: [0.0; 6],
            r: 0.0,
        };
        let c = gg_offdiag_coeffs(&spec).unwrap();
        assert_eq!([c.a, c.b, c.c, c.d, c.e, c.f], [0.0; 6]);
        let diag = SystemSpec::GeneralCoupled {
            a: [[1.0, 0.0], [2.0, 1.0]],
            b: [1.0; 6],
            r: 0.0,
        };
        assert!(matches!(gg_offdiag_coeffs(&diag), Err(Error::NotApplicable(_))));
    }

    #[test]
    fn offdiag_round_trip_pointwise() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..200 {
            let a = [
                [rng.random_range(-2.0..2.0), rng.random_range(0.2..2.0)],
                [rng.random_range(0.1..2.0), rng.random_range(-2.0..2.0)],
            ];
            let b: [f64; 6] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
            let spec = SystemSpec::GeneralCoupled { a, b, r: 0.5 };
            let c = gg_offdiag_coeffs(&spec).unwrap();
            let (t, _) = c.diagonalization.matrices().unwrap();
            // oracle: C(TV)·(T V_x) == T·C₁(V)V_x at random points
            let vv = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
            let vx = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
            let u = mat2::apply(&t, vv);
            let ux = mat2::apply(&t, vx);
            let cu = [
                [b[1] * u[0] + b[0] * u[1], b[0] * u[0] + b[2] * u[1]],
                [b[4] * u[0] + b[3] * u[1], b[3] * u[0] + b[5] * u[1]],
            ];
            let lhs = mat2::apply(&cu, ux);
            let k = c.prefactor;
            let c1 = [
                [k * (c.a * vv[0] + c.b * vv[1]), k * (c.b * vv[0] + c.c * vv[1])],
                [k * (c.d * vv[0] + c.e * vv[1]), k * (c.e * vv[0] + c.f * vv[1])],
            ];
            let rhs = mat2::apply(&t, mat2::apply(&c1, vx));
            for i in 0..2 {
                assert!((lhs[i] - rhs[i]).abs() < 1e-10 * (1.0 + lhs[i].abs()));
            }
            // drift: T B₁ T⁻¹ = diag(0, r)
            let ti = c.diagonalization.t_inv.unwrap();
            let back = mat2::mul(&t, &mat2::mul(&c.drift, &ti));
            assert!(mat2::max_abs_diff(&back, &mat2::diag(0.0, 0.5)) < 1e-10);
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(1000))]

            #[test]
            fn reconstruction_of_real_spectra(
                a11 in -5.0f64..5.0, a12 in -5.0f64..5.0, a21 in -5.0f64..5.0, a22 in -5.0f64..5.0
            ) {
                let a = [[a11, a12], [a21, a22]];
                let d = diagonalize(&a);
                prop_assume!(d.eigenvalues_real && d.eigenvalues_distinct && d.lambda > 1e-3);
                let (t, ti) = d.matrices().unwrap();
                prop_assert!(mat2::max_abs_diff(&reconstruct(&d), &a) < 1e-10);
                prop_assert!(mat2::max_abs_diff(&mat2::mul(&t, &ti), &mat2::IDENTITY) < 1e-12);
                prop_assert!(d.alpha_plus >= d.alpha_minus);
            }

            #[test]
            fn gg_formula_agrees_with_diagonalize(b1 in 0.05f64..10.0, b2 in 0.05f64..10.0, a3 in -5.0f64..5.0) {
                let (lambda, ap, am) = gg_lambda_alpha(b1, b2, a3).unwrap();
                let d = diagonalize(&[[1.0, a3], [b2 * a3 / b1, 1.0 / b1]]);
                prop_assert!((ap - d.alpha_plus).abs() < 1e-10);
                prop_assert!((am - d.alpha_minus).abs() < 1e-10);
                prop_assert!((lambda - d.lambda).abs() < 1e-10);
            }
        }
    }
}

//! Coupled KdV system variants, their dispersion symbols and nonlinear terms.
//!
//! Every system is reduced to the evolution form
//! `∂_t U + A ∂_x³ U = N(U)` where `A` is the dispersion matrix and `N`
//! collects the quadratic and first-order terms. `nonlinear_rhs` returns `N`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{forward, GridSpec, SpectralField};
use crate::mat2::{self, Mat2};

/// A coupled KdV system with real coefficients, stored as printed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SystemSpec {
    /// `u_t - a(u_xxx + 6uu_x) = 2bvv_x`, `v_t + v_xxx + 3uv_x = 0`.
    HirotaSatsuma { a: f64, b: f64 },
    /// Hirota–Satsuma with coupling `c·uv_x + d·vv_x` in the second equation.
    Feng { a: f64, b: f64, c: f64, d: f64 },
    /// Two-layer internal wave model; requires `b1, b2 > 0`.
    GearGrimshaw {
        a1: f64,
        a2: f64,
        a3: f64,
        b1: f64,
        b2: f64,
        r: f64,
    },
    /// `U_t + A U_xxx + B U_x + C(U) U_x = 0` with quadratic coefficients `b[0..6]`.
    GeneralCoupled { a: Mat2, b: [f64; 6], r: f64 },
    /// `U_xxx + A0 (uu_x, vv_x) + A1 (uv_x, vu_x) + A2 U_t = 0`; requires `det A2 ≠ 0`.
    Sakovich { a0: Mat2, a1: Mat2, a2: Mat2 },
}

/// Per-component linear group coefficients, or a coupled dispersion matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Dispersion {
    /// The linear flow of `u` is `U_{c_u}(t)`, that of `v` is `U_{c_v}(t)`.
    Diagonal {
        c_u: f64,
        c_v: f64,
    },
    NotDiagonal,
}

impl Dispersion {
    pub fn diagonal(self) -> Result<(f64, f64)> {
        match self {
            Dispersion::Diagonal { c_u, c_v } => Ok((c_u, c_v)),
            Dispersion::NotDiagonal => Err(Error::NotDiagonal),
        }
    }
}

/// Coefficients of the ∂_t-form nonlinearity.
///
/// Row `i` gives the weights of `(uu_x, vv_x, uv_x, vu_x)` in equation `i`;
/// `drift[i]` multiplies `v_x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NonlinearTable {
    pub quad: [[f64; 4]; 2],
    pub drift: [f64; 2],
}

impl SystemSpec {
    pub fn validate(&self) -> Result<()> {
        let finite = self.coefficients().iter().all(|c| c.is_finite());
        if !finite {
            return Err(Error::InvalidParameter("non-finite coefficient".into()));
        }
        match self {
            SystemSpec::GearGrimshaw { b1, b2, .. } => {
                if !(*b1 > 0.0) || !(*b2 > 0.0) {
                    return Err(Error::InvalidParameter(format!(
                        "Gear-Grimshaw requires b1 > 0 and b2 > 0, got b1 = {b1}, b2 = {b2}"
                    )));
                }
            }
            SystemSpec::Sakovich { a2, .. } => {
                if mat2::det(a2) == 0.0 {
                    return Err(Error::InvalidParameter(
                        "Sakovich time-derivative matrix is singular".into(),
                    ));
                }
            }
            _ => {}
        }
        Ok(())
    }

    fn coefficients(&self) -> Vec<f64> {
        match self {
            SystemSpec::HirotaSatsuma { a, b } => vec![*a, *b],
            SystemSpec::Feng { a, b, c, d } => vec![*a, *b, *c, *d],
            SystemSpec::GearGrimshaw { a1, a2, a3, b1, b2, r } => vec![*a1, *a2, *a3, *b1, *b2, *r],
            SystemSpec::GeneralCoupled { a, b, r } => {
                let mut v: Vec<f64> = a.iter().flatten().copied().collect();
                v.extend_from_slice(b);
                v.push(*r);
                v
            }
            SystemSpec::Sakovich { a0, a1, a2 } => {
                [a0, a1, a2].iter().flat_map(|m| m.iter().flatten().copied()).collect()
            }
        }
    }

    /// Named hypothesis flags reported alongside runs (not enforced).
    pub fn hypothesis_flags(&self) -> Vec<(&'static str, bool)> {
        match self {
            SystemSpec::HirotaSatsuma { a, b } => vec![
                ("a_nonzero", *a != 0.0),
                ("global_energy_regime", *a + 1.0 > 0.0 && *b > 0.0),
            ],
            SystemSpec::Feng { a, b, c, .. } => {
                vec![("a_plus_one_nonzero", *a + 1.0 != 0.0), ("bc_positive", *b * *c > 0.0)]
            }
            SystemSpec::GearGrimshaw { a3, b2, r, .. } => vec![
                ("a3_nonzero", *a3 != 0.0),
                ("a3_sq_b2_not_one", *a3 * *a3 * *b2 != 1.0),
                ("r_zero", *r == 0.0),
            ],
            SystemSpec::GeneralCoupled { r, .. } => vec![("r_zero", *r == 0.0)],
            SystemSpec::Sakovich { .. } => Vec::new(),
        }
    }

    /// The matrix `A` of `U_t + A U_xxx + … = 0`.
    pub fn dispersion_matrix(&self) -> Result<Mat2> {
        Ok(match self {
            SystemSpec::HirotaSatsuma { a, .. } | SystemSpec::Feng { a, .. } => [[-*a, 0.0], [0.0, 1.0]],
            SystemSpec::GearGrimshaw { a3, b1, b2, .. } => [[1.0, *a3], [*b2 * *a3 / *b1, 1.0 / *b1]],
            SystemSpec::GeneralCoupled { a, .. } => *a,
            SystemSpec::Sakovich { a2, .. } => mat2::inverse(a2)
                .ok_or_else(|| Error::InvalidParameter("Sakovich time-derivative matrix is singular".into()))?,
        })
    }

    pub fn nonlinear_table(&self) -> Result<NonlinearTable> {
        Ok(match self {
            SystemSpec::HirotaSatsuma { a, b } => NonlinearTable {
                quad: [[6.0 * a, 2.0 * b, 0.0, 0.0], [0.0, 0.0, -3.0, 0.0]],
                drift: [0.0, 0.0],
            },
            SystemSpec::Feng { a, b, c, d } => NonlinearTable {
                quad: [[6.0 * a, 2.0 * b, 0.0, 0.0], [0.0, -d, -c, 0.0]],
                drift: [0.0, 0.0],
            },
            SystemSpec::GearGrimshaw { a1, a2, b1, b2, r, .. } => NonlinearTable {
                quad: [
                    [-1.0, -a1, -a2, -a2],
                    [-b2 * a2 / b1, -1.0 / b1, -b2 * a1 / b1, -b2 * a1 / b1],
                ],
                drift: [0.0, -r / b1],
            },
            SystemSpec::GeneralCoupled { b, r, .. } => NonlinearTable {
                quad: [[-b[1], -b[2], -b[0], -b[0]], [-b[4], -b[5], -b[3], -b[3]]],
                drift: [0.0, -r],
            },
            SystemSpec::Sakovich { a0, a1, a2 } => {
                let inv = mat2::inverse(a2)
                    .ok_or_else(|| Error::InvalidParameter("Sakovich time-derivative matrix is singular".into()))?;
                let m0 = mat2::mul(&inv, a0);
                let m1 = mat2::mul(&inv, a1);
                NonlinearTable {
                    quad: [
                        [-m0[0][0], -m0[0][1], -m1[0][0], -m1[0][1]],
                        [-m0[1][0], -m0[1][1], -m1[1][0], -m1[1][1]],
                    ],
                    drift: [0.0, 0.0],
                }
            }
        })
    }
}

/// Linear group coefficients of each component, when the dispersion is diagonal.
pub fn dispersion_coeffs(spec: &SystemSpec) -> Result<Dispersion> {
    let a = spec.dispersion_matrix()?;
    if mat2::is_diagonal(&a) {
        // U_t + α U_xxx = 0 is the group U_{-α}
        Ok(Dispersion::Diagonal {
            c_u: 0.0 - a[0][0],
            c_v: 0.0 - a[1][1],
        })
    } else {
        Ok(Dispersion::NotDiagonal)
    }
}

/// A pair of real fields on a common grid at time `t`.
#[derive(Debug, Clone)]
pub struct State {
    pub u: SpectralField,
    pub v: SpectralField,
    pub t: f64,
}

impl State {
    pub fn new(u: SpectralField, v: SpectralField, t: f64) -> Result<Self> {
        u.check_same_grid(&v)?;
        Ok(Self { u, v, t })
    }

    pub fn zeros(grid: &GridSpec, t: f64) -> Self {
        Self {
            u: SpectralField::zeros(grid),
            v: SpectralField::zeros(grid),
            t,
        }
    }

    pub fn from_samples(grid: &GridSpec, u: &[f64], v: &[f64], t: f64) -> Result<Self> {
        Ok(Self {
            u: forward(u, grid)?,
            v: forward(v, grid)?,
            t,
        })
    }

    pub fn from_fns<F: Fn(f64) -> f64, G: Fn(f64) -> f64>(grid: &GridSpec, u: F, v: G, t: f64) -> Self {
        Self {
            u: SpectralField::from_fn(grid, u),
            v: SpectralField::from_fn(grid, v),
            t,
        }
    }

    pub fn grid(&self) -> &GridSpec {
        self.u.grid()
    }

    pub fn dealias(&self) -> State {
        State {
            u: self.u.dealias(),
            v: self.v.dealias(),
            t: self.t,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.u.is_finite() && self.v.is_finite()
    }

    pub fn max_abs(&self) -> f64 {
        self.u.max_abs().max(self.v.max_abs())
    }

    /// Largest pointwise difference over both components.
    pub fn max_abs_diff(&self, other: &State) -> f64 {
        self.u.max_abs_diff(&other.u).max(self.v.max_abs_diff(&other.v))
    }
}

/// Non-dispersive part of `∂_t(u, v)`, products computed pseudo-spectrally and dealiased.
pub fn nonlinear_rhs(spec: &SystemSpec, state: &State) -> Result<(SpectralField, SpectralField)> {
    let table = spec.nonlinear_table()?;
    nonlinear_rhs_with(&table, state)
}

/// As [`nonlinear_rhs`] with a precomputed coefficient table.
pub fn nonlinear_rhs_with(table: &NonlinearTable, state: &State) -> Result<(SpectralField, SpectralField)> {
    state.u.check_same_grid(&state.v)?;
    let grid = state.grid();
    let u = state.u.to_samples();
    let v = state.v.to_samples();
    let ux = state.u.dx().to_samples();
    let vx = state.v.dx().to_samples();
    let mut out = Vec::with_capacity(2);
    for (row, drift) in table.quad.iter().zip(table.drift) {
        let combo: Vec<f64> = (0..grid.n())
            .map(|j| {
                row[0] * u[j] * ux[j]
                    + row[1] * v[j] * vx[j]
                    + row[2] * u[j] * vx[j]
                    + row[3] * v[j] * ux[j]
                    + drift * vx[j]
            })
            .collect();
        if combo.iter().any(|x| !x.is_finite()) {
            return Err(Error::BlowupDetected { last_valid_t: state.t });
        }
        let mut f = forward(&combo, grid)?;
        f.dealias_in_place();
        out.push(f);
    }
    let dv = out.pop().expect("two rows");
    let du = out.pop().expect("two rows");
    Ok((du, dv))
}

/// Hirota–Satsuma initial state `(w0(-x), 0)` whose `u` reproduces the KdV flow of `w0`.
///
/// If `w` solves `w_t + w_xxx + 6ww_x = 0`, then `u(x, t) = w(-x, a t)` solves the
/// `v ≡ 0` reduction of the Hirota–Satsuma system.
pub fn hs_as_kdv(w0: &SpectralField, a: f64) -> Result<State> {
    if a == 0.0 || !a.is_finite() {
        return Err(Error::InvalidParameter(
            "KdV reduction requires a nonzero dispersion coefficient".into(),
        ));
    }
    Ok(State {
        u: w0.reflect(),
        v: SpectralField::zeros(w0.grid()),
        t: 0.0,
    })
}

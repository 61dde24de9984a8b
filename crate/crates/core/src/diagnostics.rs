//! Conserved functionals, Sobolev and mixed space-time norms, drift monitoring.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{DerivativeOrder, SpectralField};
use crate::solver::{Observer, Trajectory};
use crate::systems::{State, SystemSpec};

/// `‖f‖_s = (∫ (1 + ξ²)^s |f̂(ξ)|² dξ)^{1/2}`.
pub fn sobolev_norm(field: &SpectralField, s: f64) -> f64 {
    let grid = field.grid();
    let sum: f64 = field
        .coeffs()
        .iter()
        .enumerate()
        .map(|(j, c)| {
            let xi = grid.wavenumber(j);
            (1.0 + xi * xi).powf(s) * c.norm_sqr()
        })
        .sum();
    (sum * grid.dxi()).sqrt()
}

/// `∫ f g dx` for real fields, exact by Parseval.
pub fn inner(f: &SpectralField, g: &SpectralField) -> f64 {
    let sum: f64 = f.coeffs().iter().zip(g.coeffs()).map(|(a, b)| (a * b.conj()).re).sum();
    sum * f.grid().dxi()
}

/// `∫ f dx`.
pub fn mean_integral(f: &SpectralField) -> f64 {
    (2.0 * std::f64::consts::PI).sqrt() * f.coeffs()[0].re
}

/// Samples of `u` and `v` on a 2× refined grid, used for cubic integrands.
struct Fine {
    u: Vec<f64>,
    v: Vec<f64>,
    dx: f64,
}

impl Fine {
    fn new(state: &State) -> Result<Self> {
        Ok(Self {
            u: state.u.oversampled_samples(2)?,
            v: state.v.oversampled_samples(2)?,
            dx: state.grid().dx() / 2.0,
        })
    }

    /// `∫ u^i v^j dx` for `i + j = 3`.
    fn cubic(&self, i: i32, j: i32) -> f64 {
        self.u
            .iter()
            .zip(&self.v)
            .map(|(u, v)| u.powi(i) * v.powi(j))
            .sum::<f64>()
            * self.dx
    }
}

/// Hirota–Satsuma functionals `(V, F)`.
pub fn hs_invariants(state: &State, a: f64, b: f64) -> Result<(f64, f64)> {
    let ux = state.u.dx();
    let vx = state.v.dx();
    let fine = Fine::new(state)?;
    let v_energy =
        0.5 * (1.0 + a) * inner(&ux, &ux) + b * inner(&vx, &vx) - (1.0 + a) * fine.cubic(3, 0) - b * fine.cubic(1, 2);
    let f_mass = inner(&state.u, &state.u) + (2.0 / 3.0) * b * inner(&state.v, &state.v);
    Ok((v_energy, f_mass))
}

/// Parameters of the Gear–Grimshaw invariants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GgParams {
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub b1: f64,
    pub b2: f64,
    pub r: f64,
}

impl GgParams {
    pub fn from_spec(spec: &SystemSpec) -> Result<Self> {
        match *spec {
            SystemSpec::GearGrimshaw { a1, a2, a3, b1, b2, r } => Ok(Self { a1, a2, a3, b1, b2, r }),
            _ => Err(Error::NotApplicable("expected a Gear-Grimshaw system".into())),
        }
    }
}

/// Gear–Grimshaw functionals `(Φ₁, Φ₂, Φ₃, Φ₄)`.
pub fn gg_invariants(state: &State, p: &GgParams) -> Result<[f64; 4]> {
    let ux = state.u.dx();
    let vx = state.v.dx();
    let fine = Fine::new(state)?;
    let uu = inner(&state.u, &state.u);
    let vv = inner(&state.v, &state.v);
    let phi3 = p.b2 * uu + p.b1 * vv;
    let phi4 = p.b2 * inner(&ux, &ux) + inner(&vx, &vx) + 2.0 * p.b2 * p.a3 * inner(&ux, &vx)
        - p.b2 * fine.cubic(3, 0) / 3.0
        - p.b2 * p.a2 * fine.cubic(2, 1)
        - p.b2 * p.a1 * fine.cubic(1, 2)
        - fine.cubic(0, 3) / 3.0
        - p.r * vv;
    Ok([mean_integral(&state.u), mean_integral(&state.v), phi3, phi4])
}

/// Weights `(β, γ)` making `∫(βu² + γv²)` conserved by a diagonal coupled system.
///
/// Requires `β b1 = γ b5` and `β b3 = γ b4`; returns `None` otherwise.
pub fn general_l2_weights(spec: &SystemSpec) -> Option<(f64, f64)> {
    let SystemSpec::GeneralCoupled { a, b, .. } = spec else {
        return None;
    };
    if a[0][1] != 0.0 || a[1][0] != 0.0 {
        return None;
    }
    let (b1, b3, b4, b5) = (b[0], b[2], b[3], b[4]);
    let tol = 1e-12;
    let candidates = [(b5, b1), (b4, b3), (1.0, 1.0)];
    candidates.into_iter().find_map(|(beta, gamma)| {
        let ok = (beta * b1 - gamma * b5).abs() <= tol && (beta * b3 - gamma * b4).abs() <= tol;
        (ok && (beta != 0.0 || gamma != 0.0)).then_some((beta, gamma))
    })
}

/// One row of conserved-quantity monitoring.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagnosticRecord {
    pub t: f64,
    pub v: Option<f64>,
    pub f: Option<f64>,
    pub phi: [Option<f64>; 4],
    pub sobolev_u: f64,
    pub sobolev_v: f64,
    pub valid: bool,
}

impl DiagnosticRecord {
    pub const HEADER: [&'static str; 9] = ["t", "V", "F", "phi1", "phi2", "phi3", "phi4", "Hs_u", "Hs_v"];

    pub fn values(&self) -> [Option<f64>; 9] {
        [
            Some(self.t),
            self.v,
            self.f,
            self.phi[0],
            self.phi[1],
            self.phi[2],
            self.phi[3],
            Some(self.sobolev_u),
            Some(self.sobolev_v),
        ]
    }
}

/// Which functionals are meaningful for a given system.
#[derive(Debug, Clone, PartialEq)]
pub enum InvariantSet {
    HirotaSatsuma {
        a: f64,
        b: f64,
    },
    GearGrimshaw(GgParams),
    /// Divergence-form system: means plus an optional weighted L² mass.
    Coupled {
        l2_weights: Option<(f64, f64)>,
    },
    None,
}

impl InvariantSet {
    pub fn for_spec(spec: &SystemSpec) -> Self {
        match *spec {
            SystemSpec::HirotaSatsuma { a, b } => InvariantSet::HirotaSatsuma { a, b },
            SystemSpec::Feng { a, b, c, d } if c == 3.0 && d == 0.0 => InvariantSet::HirotaSatsuma { a, b },
            SystemSpec::GearGrimshaw { .. } => {
                InvariantSet::GearGrimshaw(GgParams::from_spec(spec).expect("variant checked"))
            }
            SystemSpec::GeneralCoupled { .. } => InvariantSet::Coupled {
                l2_weights: general_l2_weights(spec),
            },
            _ => InvariantSet::None,
        }
    }

    pub fn record(&self, state: &State, s: f64) -> Result<DiagnosticRecord> {
        let mut rec = DiagnosticRecord {
            t: state.t,
            v: None,
            f: None,
            phi: [None; 4],
            sobolev_u: sobolev_norm(&state.u, s),
            sobolev_v: sobolev_norm(&state.v, s),
            valid: true,
        };
        match self {
            InvariantSet::HirotaSatsuma { a, b } => {
                let (v, f) = hs_invariants(state, *a, *b)?;
                rec.v = Some(v);
                rec.f = Some(f);
            }
            InvariantSet::GearGrimshaw(p) => {
                rec.phi = gg_invariants(state, p)?.map(Some);
            }
            InvariantSet::Coupled { l2_weights } => {
                rec.phi[0] = Some(mean_integral(&state.u));
                rec.phi[1] = Some(mean_integral(&state.v));
                rec.phi[2] = l2_weights
                    .map(|(beta, gamma)| beta * inner(&state.u, &state.u) + gamma * inner(&state.v, &state.v));
            }
            InvariantSet::None => {}
        }
        rec.valid = rec.values().iter().all(|x| x.map(f64::is_finite).unwrap_or(true));
        Ok(rec)
    }
}

/// Observer collecting a record per stored state.
#[derive(Debug, Clone)]
pub struct DriftMonitor {
    pub set: InvariantSet,
    pub s: f64,
    pub records: Vec<DiagnosticRecord>,
}

impl DriftMonitor {
    pub fn new(spec: &SystemSpec, s: f64) -> Self {
        Self {
            set: InvariantSet::for_spec(spec),
            s,
            records: Vec::new(),
        }
    }

    /// `max_t |q(t) − q(0)| / |q(0)|` for column `index` of [`DiagnosticRecord::values`].
    pub fn relative_drift(&self, index: usize) -> Option<f64> {
        let first = self.records.first()?.values()[index]?;
        let worst = self
            .records
            .iter()
            .filter_map(|r| r.values()[index])
            .map(|q| (q - first).abs())
            .fold(0.0, f64::max);
        Some(worst / first.abs().max(f64::MIN_POSITIVE))
    }
}

impl Observer for DriftMonitor {
    fn observe(&mut self, state: &State) -> Result<()> {
        let rec = self.set.record(state, self.s)?;
        self.records.push(rec);
        Ok(())
    }
}

/// Components of the mixed space-time norm of one field over `[−T, T]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MixedNorms {
    /// `max_t ‖u(t)‖_r`.
    pub sup_sobolev: f64,
    /// `‖u_x‖_{L⁴_T L^∞_x}`.
    pub strichartz: f64,
    /// `‖D^r u_x‖_{L^∞_x L²_T}`.
    pub smoothing: f64,
    /// `‖u‖_{L²_x L^∞_T}` without the time weight.
    pub maximal_raw: f64,
    /// `(1+T)^{-1/2} ‖u‖_{L²_x L^∞_T}`.
    pub maximal: f64,
    /// `‖u_x‖_{L^∞_x L²_T}`.
    pub local_smoothing: f64,
    pub total: f64,
}

fn trapezoid(ts: &[f64], ys: &[f64]) -> f64 {
    ts.windows(2)
        .zip(ys.windows(2))
        .map(|(t, y)| 0.5 * (t[1] - t[0]) * (y[0] + y[1]))
        .sum()
}

/// Mixed norms of one component over stored states with `|t| ≤ T`.
pub fn mixed_norms_of(fields: &[(f64, &SpectralField)], r: f64, big_t: f64) -> Result<MixedNorms> {
    let window: Vec<(f64, &SpectralField)> = fields
        .iter()
        .copied()
        .filter(|(t, _)| t.abs() <= big_t * (1.0 + 1e-12))
        .collect();
    if window.is_empty() {
        return Err(Error::InvalidParameter(
            "no stored states inside the time window".into(),
        ));
    }
    let ts: Vec<f64> = window.iter().map(|(t, _)| *t).collect();
    let n = window[0].1.grid().n();
    let dx = window[0].1.grid().dx();
    let mut sup_sobolev: f64 = 0.0;
    let mut sup_ux4 = Vec::with_capacity(ts.len());
    let mut dr_sq = vec![Vec::with_capacity(ts.len()); n];
    let mut ux_sq = vec![Vec::with_capacity(ts.len()); n];
    let mut sup_t = vec![0.0f64; n];
    for (_, f) in &window {
        sup_sobolev = sup_sobolev.max(sobolev_norm(f, r));
        let ux = f.dx();
        let uxs = ux.to_samples();
        let drs = ux.spectral_derivative(DerivativeOrder::Fractional(r)).to_samples();
        let us = f.to_samples();
        sup_ux4.push(uxs.iter().fold(0.0f64, |m, x| m.max(x.abs())).powi(4));
        for j in 0..n {
            dr_sq[j].push(drs[j] * drs[j]);
            ux_sq[j].push(uxs[j] * uxs[j]);
            sup_t[j] = sup_t[j].max(us[j].abs());
        }
    }
    let time_l2_sup = |rows: &[Vec<f64>]| rows.iter().map(|row| trapezoid(&ts, row)).fold(0.0f64, f64::max).sqrt();
    let strichartz = trapezoid(&ts, &sup_ux4).powf(0.25);
    let smoothing = time_l2_sup(&dr_sq);
    let local_smoothing = time_l2_sup(&ux_sq);
    let maximal_raw = (sup_t.iter().map(|x| x * x).sum::<f64>() * dx).sqrt();
    let maximal = maximal_raw / (1.0 + big_t).sqrt();
    Ok(MixedNorms {
        sup_sobolev,
        strichartz,
        smoothing,
        maximal_raw,
        maximal,
        local_smoothing,
        total: sup_sobolev + strichartz + smoothing + maximal + local_smoothing,
    })
}

/// Mixed norms of both components of a trajectory.
pub fn mixed_norms(traj: &Trajectory, r: f64, big_t: f64) -> Result<[MixedNorms; 2]> {
    let us: Vec<(f64, &SpectralField)> = traj.states.iter().map(|s| (s.t, &s.u)).collect();
    let vs: Vec<(f64, &SpectralField)> = traj.states.iter().map(|s| (s.t, &s.v)).collect();
    Ok([mixed_norms_of(&us, r, big_t)?, mixed_norms_of(&vs, r, big_t)?])
}

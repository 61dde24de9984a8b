//! Quadrature evaluation of the reduced integral kernels behind the bilinear estimates.
//!
//! Each kernel is a one-dimensional integral depending on two outer variables. Kernels
//! on the whole line are truncated to `[c − X, c + X]` with `X` doubled until the
//! power-law tail estimate drops below `1e−6` of the value; kernels restricted to a
//! bounded region are integrated piecewise between the region's boundary points.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::norm::bracket;
use crate::error::{Error, Result};
use crate::quadrature::{integrate, QuadSpec};

const TAIL_FRACTION: f64 = 1e-6;
const MAX_DOUBLINGS: usize = 200;
const STABILITY_TOLERANCE: f64 = 0.05;

/// The eleven kernels, named by the interaction they control.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kernel {
    /// `|a||η| ∫ dx / (1 + |a||x² − η²|)^{2b}`; outer `(a, η)`.
    QuadraticResonance,
    /// `(1 + |a − a'|)^α ∫ dx / ((1 + |x − a'|)^α (1 + |x − a|)^β)`; outer `(a, a')`.
    ShiftedProduct,
    /// Auxiliary quadratic-phase kernel; outer `(ξ, y)`.
    QuadraticAuxiliary,
    /// Like-signed inputs, no region restriction; outer `(ξ, y)`.
    SameSign,
    /// Like-signed inputs, output modulation dominant; outer `(ξ, y)`.
    SameSignOutputDominant,
    /// Like-signed inputs, input modulation dominant; outer `(ξ₁, τ₁ − ξ₁³)`.
    SameSignInputDominant,
    /// Opposite-signed inputs, no region restriction; outer `(ξ, z)`.
    Mixed,
    /// Opposite-signed inputs, output modulation dominant; outer `(ξ, y)`.
    MixedOutputDominant,
    /// Opposite-signed inputs, input modulation dominant; outer `(ξ₁, τ₁ + ξ₁³)`.
    MixedInputDominant,
    /// Flipped second factor, output modulation dominant; outer `(ξ, y)`.
    FlippedOutputDominant,
    /// Flipped second factor, input modulation dominant; outer `(ξ₁, τ₁ − ξ₁³)`.
    FlippedInputDominant,
}

impl Kernel {
    pub const ALL: [Kernel; 11] = [
        Kernel::QuadraticResonance,
        Kernel::ShiftedProduct,
        Kernel::QuadraticAuxiliary,
        Kernel::SameSign,
        Kernel::SameSignOutputDominant,
        Kernel::SameSignInputDominant,
        Kernel::Mixed,
        Kernel::MixedOutputDominant,
        Kernel::MixedInputDominant,
        Kernel::FlippedOutputDominant,
        Kernel::FlippedInputDominant,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Kernel::QuadraticResonance => "quadratic_resonance",
            Kernel::ShiftedProduct => "shifted_product",
            Kernel::QuadraticAuxiliary => "quadratic_auxiliary",
            Kernel::SameSign => "same_sign",
            Kernel::SameSignOutputDominant => "same_sign_output_dominant",
            Kernel::SameSignInputDominant => "same_sign_input_dominant",
            Kernel::Mixed => "mixed",
            Kernel::MixedOutputDominant => "mixed_output_dominant",
            Kernel::MixedInputDominant => "mixed_input_dominant",
            Kernel::FlippedOutputDominant => "flipped_output_dominant",
            Kernel::FlippedInputDominant => "flipped_input_dominant",
        }
    }

    /// Names of the two outer variables.
    pub fn outer_names(&self) -> (&'static str, &'static str) {
        match self {
            Kernel::QuadraticResonance => ("a", "eta"),
            Kernel::ShiftedProduct => ("a", "a_shift"),
            Kernel::Mixed => ("xi", "z"),
            Kernel::SameSignInputDominant | Kernel::MixedInputDominant | Kernel::FlippedInputDominant => {
                ("xi1", "modulation")
            }
            _ => ("xi", "y"),
        }
    }

    /// Parameter set at which the kernel is checked by default.
    pub fn reference_params(&self) -> KernelParams {
        let (s, b_prime) = match self {
            Kernel::QuadraticResonance | Kernel::ShiftedProduct => (0.0, 0.0),
            Kernel::SameSign => (0.0, -0.3),
            Kernel::QuadraticAuxiliary
            | Kernel::SameSignOutputDominant
            | Kernel::MixedOutputDominant
            | Kernel::FlippedOutputDominant => (-0.6, -0.45),
            _ => (-0.6, -0.4),
        };
        KernelParams {
            s,
            b: 0.6,
            b_prime,
            alpha: 2.0,
            beta: 2.0,
        }
    }

    fn is_input_dominant(&self) -> bool {
        matches!(
            self,
            Kernel::SameSignInputDominant | Kernel::MixedInputDominant | Kernel::FlippedInputDominant
        )
    }
}

impl fmt::Display for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Kernel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Kernel::ALL
            .iter()
            .copied()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown kernel '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelParams {
    pub s: f64,
    pub b: f64,
    pub b_prime: f64,
    /// Exponents of the shifted-product kernel.
    #[serde(default = "default_exponent")]
    pub alpha: f64,
    #[serde(default = "default_exponent")]
    pub beta: f64,
}

fn default_exponent() -> f64 {
    2.0
}

fn violation(msg: String) -> Error {
    Error::HypothesisViolation(msg)
}

fn require(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(violation(msg()))
    }
}

/// Checks the hypotheses under which the kernel is claimed bounded.
pub fn check_hypotheses(kernel: Kernel, p: &KernelParams) -> Result<()> {
    let KernelParams {
        s,
        b,
        b_prime: bp,
        alpha,
        beta,
    } = *p;
    if kernel == Kernel::ShiftedProduct {
        require(alpha >= 0.0 && alpha <= beta, || {
            format!("need 0 <= alpha <= beta, got alpha = {alpha}, beta = {beta}")
        })?;
        return require(beta > 1.0, || format!("need beta > 1, got beta = {beta}"));
    }
    require(b > 0.5, || format!("need b > 1/2, got b = {b}"))?;
    let upper_bp = s / 3.0 - 0.25;
    match kernel {
        Kernel::QuadraticResonance | Kernel::ShiftedProduct => Ok(()),
        Kernel::QuadraticAuxiliary => {
            require((-0.75..=0.0).contains(&s), || {
                format!("need s in [-3/4, 0], got s = {s}")
            })?;
            require(bp <= upper_bp, || {
                format!("need b' <= s/3 - 1/4 = {upper_bp}, got b' = {bp}")
            })
        }
        Kernel::SameSign => require(bp <= -0.25, || format!("need b' <= -1/4, got b' = {bp}")),
        Kernel::Mixed => require(bp <= 0.0, || format!("need b' <= 0, got b' = {bp}")),
        Kernel::SameSignOutputDominant | Kernel::MixedOutputDominant | Kernel::FlippedOutputDominant => {
            let s_hi = if kernel == Kernel::SameSignOutputDominant {
                -0.25
            } else {
                -0.5
            };
            require((-0.75..=s_hi).contains(&s), || {
                format!("need s in [-3/4, {s_hi}], got s = {s}")
            })?;
            require(bp >= -0.5 && bp <= upper_bp, || {
                format!("need b' in [-1/2, s/3 - 1/4 = {upper_bp}], got b' = {bp}")
            })
        }
        Kernel::SameSignInputDominant | Kernel::MixedInputDominant | Kernel::FlippedInputDominant => {
            require(s > -0.75 && s <= -0.5, || {
                format!("need s in (-3/4, -1/2], got s = {s}")
            })?;
            require(bp > -0.5 && bp <= 0.0, || {
                format!("need b' in (-1/2, 0], got b' = {bp}")
            })?;
            let second = if kernel == Kernel::FlippedInputDominant {
                s / 3.0 - 0.75
            } else {
                s - 1.0 / 6.0
            };
            let bound = (-s - 1.5).min(second);
            require(bp - b <= bound, || {
                format!("need b' - b <= {bound}, got b' - b = {}", bp - b)
            })
        }
    }
}

/// Sorted, deduplicated, finite copy of `pts`.
fn tidy(mut pts: Vec<f64>) -> Vec<f64> {
    pts.retain(|x| x.is_finite());
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

/// Solves `g(x) = target` for increasing `g` by bracketing and bisection.
fn increasing_root<G: Fn(f64) -> f64>(g: G, target: f64) -> f64 {
    let mut lo = -1.0;
    let mut hi = 1.0;
    while g(lo) > target {
        lo *= 2.0;
    }
    while g(hi) < target {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if !(mid > lo && mid < hi) {
            break;
        }
        if g(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn symmetric_roots(r2: f64) -> Vec<f64> {
    if r2 >= 0.0 {
        let r = r2.sqrt();
        vec![-r, r]
    } else {
        Vec::new()
    }
}

/// Integral of `f` over the part of the hull of `breaks` where `inside` holds; the
/// indicator may only change at break points.
fn on_set<F, I>(f: F, breaks: Vec<f64>, inside: I, spec: &QuadSpec) -> Result<(f64, bool)>
where
    F: Fn(f64) -> f64,
    I: Fn(f64) -> bool,
{
    let pts = tidy(breaks);
    let mut total = 0.0;
    let mut converged = true;
    for w in pts.windows(2) {
        if inside(0.5 * (w[0] + w[1])) {
            let r = integrate(&f, w[0], w[1], &[], spec)?;
            total += r.value;
            converged &= r.converged;
        }
    }
    Ok((total, converged))
}

/// Whole-line integral of a power-law decaying `f ~ |x|^{-decay}`.
fn whole_line<F: Fn(f64) -> f64>(
    f: F,
    center: f64,
    scale: f64,
    breaks: &[f64],
    decay: f64,
    spec: &QuadSpec,
    reach_factor: f64,
) -> Result<(f64, bool)> {
    let mut half = breaks
        .iter()
        .map(|x| (x - center).abs())
        .fold(scale, f64::max)
        .max(1e-12)
        * 2.0;
    for _ in 0..MAX_DOUBLINGS {
        let r = integrate(&f, center - half, center + half, breaks, spec)?;
        let tail = (f(center - half) + f(center + half)) * half / (decay - 1.0);
        if r.value == 0.0 || tail <= TAIL_FRACTION * r.value.abs() {
            if reach_factor == 1.0 {
                return Ok((r.value, r.converged));
            }
            let wide = half * reach_factor;
            let r = integrate(&f, center - wide, center + wide, breaks, spec)?;
            return Ok((r.value, r.converged));
        }
        half *= 2.0;
    }
    Err(Error::NotApplicable(format!(
        "tail did not fall below {TAIL_FRACTION} of the value"
    )))
}

/// `2x³ − 3x² + 3x`, strictly increasing.
fn cubic_phase(x: f64) -> f64 {
    x * (3.0 + x * (-3.0 + 2.0 * x))
}

fn input_dominant_integrand(xi: f64, xi1: f64, s: f64, bp: f64, mu: f64) -> f64 {
    let prod = (xi * xi1 * (xi - xi1)).abs();
    xi.abs().powf(2.0 * (1.0 + s)) * prod.powf(-2.0 * s) * bracket(xi).powf(2.0 * s) * bracket(mu).powf(2.0 * bp)
}

/// Evaluates a kernel at one outer point. `reach_factor` widens the final truncation
/// window of whole-line kernels.
pub fn evaluate(
    kernel: Kernel,
    p: &KernelParams,
    outer: (f64, f64),
    spec: &QuadSpec,
    reach_factor: f64,
) -> Result<(f64, bool)> {
    let KernelParams {
        s,
        b,
        b_prime: bp,
        alpha,
        beta,
    } = *p;
    let (u, w) = outer;
    match kernel {
        Kernel::QuadraticResonance => {
            let (a, eta) = (u.abs(), w.abs());
            if a == 0.0 || eta == 0.0 {
                return Ok((0.0, true));
            }
            let f = |x: f64| (1.0 + a * (x * x - eta * eta).abs()).powf(-2.0 * b);
            let (v, c) = whole_line(f, 0.0, eta + a.powf(-0.5), &[-eta, eta], 4.0 * b, spec, reach_factor)?;
            Ok((a * eta * v, c))
        }
        Kernel::ShiftedProduct => {
            let (a, a_shift) = (u, w);
            let f = |x: f64| (1.0 + (x - a_shift).abs()).powf(-alpha) * (1.0 + (x - a).abs()).powf(-beta);
            let (v, c) = whole_line(
                f,
                0.5 * (a + a_shift),
                1.0 + 0.5 * (a - a_shift).abs(),
                &[a, a_shift],
                alpha + beta,
                spec,
                reach_factor,
            )?;
            Ok(((1.0 + (a - a_shift).abs()).powf(alpha) * v, c))
        }
        Kernel::QuadraticAuxiliary | Kernel::SameSign => {
            let xi = u.abs();
            if xi == 0.0 {
                return Ok((0.0, true));
            }
            let y = w;
            let k = xi.powi(3);
            let (pref, shift) = if kernel == Kernel::QuadraticAuxiliary {
                (
                    xi.powf(3.0 - 4.0 * s)
                        * bracket(k * (y + 2.0)).powf(2.0 * bp)
                        * bracket(xi).powf(2.0 * s)
                        * (y + 2.0).abs().powf(-2.0 * s),
                    y + 0.75,
                )
            } else {
                (k * (1.0 + k * (3.0 * y + 2.0).abs()).powf(2.0 * bp), y + 0.25)
            };
            if pref == 0.0 {
                return Ok((0.0, true));
            }
            let f = |x: f64| (1.0 + k * (shift - x * x).abs()).powf(-2.0 * b);
            let mut breaks = symmetric_roots(shift);
            breaks.push(0.0);
            let (v, c) = whole_line(
                f,
                0.0,
                shift.abs().sqrt() + xi.powf(-1.5),
                &breaks,
                4.0 * b,
                spec,
                reach_factor,
            )?;
            Ok((pref * v, c))
        }
        Kernel::SameSignOutputDominant => {
            let xi = u.abs();
            if xi == 0.0 {
                return Ok((0.0, true));
            }
            let y = w;
            let k = xi.powi(3);
            let pref = xi.powf(3.0 - 4.0 * s) * bracket(k * (y + 2.0)).powf(2.0 * bp) * bracket(xi).powf(2.0 * s);
            let radius = 2.0 * (y + 2.0).abs();
            let f = |x: f64| (x * x - 0.25).abs().powf(-2.0 * s) * bracket(k * (y + 0.75 - 3.0 * x * x)).powf(-2.0 * b);
            let inside = |x: f64| (y + 0.75 - 3.0 * x * x).abs() <= radius;
            let mut breaks = vec![0.0, -0.5, 0.5];
            for target in [y + 0.75 - radius, y + 0.75, y + 0.75 + radius] {
                breaks.extend(symmetric_roots(target / 3.0));
            }
            let (v, c) = on_set(f, breaks, inside, spec)?;
            Ok((pref * v, c))
        }
        Kernel::MixedOutputDominant | Kernel::FlippedOutputDominant => {
            let xi = u.abs();
            if xi == 0.0 {
                return Ok((0.0, true));
            }
            let y = w;
            let k = xi.powi(3);
            // inner phase `m(x)` and the half-width of the admissible region
            let (pref, radius, flip) = if kernel == Kernel::MixedOutputDominant {
                (
                    xi.powf(3.0 - 2.0 * s) * bracket(k * (y + 2.0)).powf(2.0 * bp),
                    2.0 * (y + 2.0).abs(),
                    false,
                )
            } else {
                (
                    xi.powf(3.0 - 2.0 * s) * bracket(k * y).powf(2.0 * bp),
                    2.0 * y.abs(),
                    true,
                )
            };
            let phase = move |x: f64| if flip { y - cubic_phase(x) } else { cubic_phase(x) + y };
            let f = |x: f64| (x - x * x).abs().powf(-2.0 * s) * bracket(k * phase(x)).powf(-2.0 * b);
            let inside = |x: f64| phase(x).abs() <= radius;
            let mut breaks = vec![0.0, 1.0];
            for target in [-radius, 0.0, radius] {
                let t = if flip { y - target } else { target - y };
                breaks.push(increasing_root(cubic_phase, t));
            }
            let (v, c) = on_set(f, breaks, inside, spec)?;
            Ok((pref * v, c))
        }
        Kernel::Mixed => {
            let xi = u.abs();
            if xi == 0.0 {
                return Ok((0.0, true));
            }
            let z = w;
            let k = xi.powi(3);
            let pref = k * (1.0 + k * (z + 2.0).abs()).powf(2.0 * bp);
            let f = |x: f64| (1.0 + k * (cubic_phase(x) + z).abs()).powf(-2.0 * b);
            let root = increasing_root(cubic_phase, -z);
            let (v, c) = whole_line(f, root, 1.0 + 1.0 / xi, &[root], 6.0 * b, spec, reach_factor)?;
            Ok((pref * v, c))
        }
        Kernel::SameSignInputDominant | Kernel::MixedInputDominant | Kernel::FlippedInputDominant => {
            let (xi1, d) = (u, w);
            if xi1.abs() < 1.0 || d == 0.0 {
                return Ok((0.0, true));
            }
            let radius = 2.0 * d.abs();
            let mut breaks = vec![0.0, xi1, xi1 - 1.0, xi1 + 1.0];
            let (v, c) = if kernel == Kernel::FlippedInputDominant {
                // μ(ξ) = d + 2ξ₁³ + 3ξ₁ξ² − 3ξ₁²ξ, a parabola with vertex at ξ₁/2
                let offset = d + 2.0 * xi1.powi(3);
                let mu = move |xi: f64| offset + 3.0 * xi1 * xi * (xi - xi1);
                let vertex = mu(0.5 * xi1);
                for target in [-radius, 0.0, radius] {
                    breaks.extend(
                        symmetric_roots((target - vertex) / (3.0 * xi1))
                            .iter()
                            .map(|r| r + 0.5 * xi1),
                    );
                }
                breaks.push(0.5 * xi1);
                let f = |xi: f64| input_dominant_integrand(xi, xi1, s, bp, mu(xi));
                let inside = |xi: f64| (xi - xi1).abs() >= 1.0 && mu(xi).abs() <= radius;
                on_set(f, breaks, inside, spec)?
            } else {
                // μ(ξ) = offset + 2ξ³ − 3ξ²ξ₁ + 3ξξ₁², strictly increasing
                let offset = if kernel == Kernel::SameSignInputDominant {
                    d
                } else {
                    d - 2.0 * xi1.powi(3)
                };
                let q = move |xi: f64| xi * (3.0 * xi1 * xi1 + xi * (-3.0 * xi1 + 2.0 * xi));
                let mu = move |xi: f64| offset + q(xi);
                for target in [-radius, 0.0, radius] {
                    breaks.push(increasing_root(q, target - offset));
                }
                let f = |xi: f64| input_dominant_integrand(xi, xi1, s, bp, mu(xi));
                let inside = |xi: f64| (xi - xi1).abs() >= 1.0 && mu(xi).abs() <= radius;
                on_set(f, breaks, inside, spec)?
            };
            Ok((bracket(d).powf(-b) * v.sqrt(), c))
        }
    }
}

/// Outer sample points of a kernel check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleGrid {
    pub first: Vec<f64>,
    pub second: Vec<f64>,
}

impl SampleGrid {
    /// Default lattice for a kernel: special points of the reduced phases, small offsets
    /// around them, and a logarithmic far field.
    pub fn default_for(kernel: Kernel) -> Self {
        match kernel {
            Kernel::QuadraticResonance => Self {
                first: vec![0.01, 0.1, 1.0, 10.0, 100.0],
                second: vec![0.01, 0.1, 0.5, 1.0, 2.0, 10.0, 100.0],
            },
            Kernel::ShiftedProduct => {
                let pts = vec![-100.0, -10.0, -1.0, 0.0, 0.5, 1.0, 10.0, 100.0];
                Self {
                    first: pts.clone(),
                    second: pts,
                }
            }
            k if k.is_input_dominant() => {
                let mut second = Vec::new();
                for m in [0.5, 1.0, 3.0, 10.0, 30.0, 100.0, 1e3, 1e4, 1e5, 1e6] {
                    second.push(m);
                    second.push(-m);
                }
                Self {
                    first: vec![-100.0, -10.0, -3.0, -1.5, -1.0, 0.5, 1.0, 1.5, 3.0, 10.0, 30.0, 100.0],
                    second,
                }
            }
            _ => {
                let specials = [-2.0, -0.75, -1.0 / 3.0, -0.25, -1.0 / 6.0, 0.0];
                let mut second = specials.to_vec();
                for c in specials {
                    for d in [1e-3, 1e-2, 0.1] {
                        second.push(c - d);
                        second.push(c + d);
                    }
                }
                for m in [1.0, 3.0, 10.0, 100.0, 1e3] {
                    second.push(m);
                    second.push(-m);
                }
                Self {
                    first: vec![0.0, 1e-3, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 30.0, 100.0],
                    second: tidy(second),
                }
            }
        }
    }

    pub fn points(&self) -> Vec<(f64, f64)> {
        self.first
            .iter()
            .flat_map(|&u| self.second.iter().map(move |&w| (u, w)))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelSample {
    pub first: f64,
    pub second: f64,
    pub value: f64,
    pub refined: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelReport {
    pub kernel: Kernel,
    pub params: KernelParams,
    pub samples: Vec<KernelSample>,
    pub max: f64,
    pub argmax: (f64, f64),
    pub refined_max: f64,
    pub relative_change: f64,
    /// Maximum changes by less than 5% under refinement.
    pub stable: bool,
    /// Every adaptive integration met its tolerance.
    pub converged: bool,
}

/// Maximum of a kernel over `grid` and its stability under refinement of the quadrature
/// and doubling of the truncation window.
pub fn kernel_bound_check(
    kernel: Kernel,
    params: &KernelParams,
    grid: &SampleGrid,
    spec: &QuadSpec,
) -> Result<KernelReport> {
    check_hypotheses(kernel, params)?;
    let fine = spec.refined();
    let results: Vec<(KernelSample, bool)> = grid
        .points()
        .into_par_iter()
        .map(|pt| {
            let (value, c1) = evaluate(kernel, params, pt, spec, 1.0)?;
            let (refined, c2) = evaluate(kernel, params, pt, &fine, 2.0)?;
            Ok((
                KernelSample {
                    first: pt.0,
                    second: pt.1,
                    value,
                    refined,
                },
                c1 && c2,
            ))
        })
        .collect::<Result<_>>()?;
    let converged = results.iter().all(|r| r.1);
    let samples: Vec<KernelSample> = results.into_iter().map(|r| r.0).collect();
    let mut max = 0.0;
    let mut argmax = (f64::NAN, f64::NAN);
    let mut refined_max: f64 = 0.0;
    for smp in &samples {
        if smp.value > max {
            max = smp.value;
            argmax = (smp.first, smp.second);
        }
        refined_max = refined_max.max(smp.refined);
    }
    let relative_change = if max > 0.0 {
        (refined_max - max).abs() / max
    } else {
        0.0
    };
    Ok(KernelReport {
        kernel,
        params: *params,
        samples,
        max,
        argmax,
        refined_max,
        relative_change,
        stable: max.is_finite() && relative_change < STABILITY_TOLERANCE,
        converged,
    })
}

/// Runs every kernel at its reference parameters on its default grid.
pub fn kernel_suite(spec: &QuadSpec) -> Result<Vec<KernelReport>> {
    Kernel::ALL
        .iter()
        .map(|&k| kernel_bound_check(k, &k.reference_params(), &SampleGrid::default_for(k), spec))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> QuadSpec {
        QuadSpec::default()
    }

    #[test]
    fn shifted_product_closed_form() {
        // ∫ dx/(1+|x|)⁴ = 2/3
        let p = Kernel::ShiftedProduct.reference_params();
        for a in [0.0, 3.5, -20.0] {
            let (v, c) = evaluate(Kernel::ShiftedProduct, &p, (a, a), &spec(), 1.0).unwrap();
            assert!(c);
            assert!((v - 2.0 / 3.0).abs() < 1e-6, "{v}");
        }
    }

    #[test]
    fn shifted_product_separated_closed_form() {
        // α = 1, β = 3, a' = 0, a = 2 against a direct midpoint sum
        let p = KernelParams {
            s: 0.0,
            b: 0.6,
            b_prime: 0.0,
            alpha: 1.0,
            beta: 3.0,
        };
        let (v, _) = evaluate(Kernel::ShiftedProduct, &p, (2.0, 0.0), &spec(), 1.0).unwrap();
        let h = 1e-3;
        let mut sum = 0.0;
        for i in 0..4_000_000 {
            let x = -2000.0 + (i as f64 + 0.5) * h;
            sum += h / ((1.0 + x.abs()) * (1.0 + (x - 2.0).abs()).powi(3));
        }
        // tail beyond |x| = 2000 is below 2·∫ x^{-4} = 2/(3·2000³)
        assert!((v / 3.0 - sum).abs() < 1e-6, "{} vs {sum}", v / 3.0);
    }

    #[test]
    fn quadratic_resonance_gaussian_free_limit() {
        // η → 0 limit of the integral: ∫ dx/(1+a x²)^{2b} with 2b = 2 equals π/(2√a)
        let p = KernelParams {
            s: 0.0,
            b: 1.0,
            b_prime: 0.0,
            alpha: 2.0,
            beta: 2.0,
        };
        let eta = 1e-9;
        let (v, _) = evaluate(Kernel::QuadraticResonance, &p, (4.0, eta), &spec(), 1.0).unwrap();
        let want = 4.0 * eta * std::f64::consts::PI / (2.0 * 2.0);
        assert!((v - want).abs() < 1e-6 * want, "{v} vs {want}");
    }

    #[test]
    fn zero_frequency_gives_zero() {
        for k in Kernel::ALL {
            if matches!(k, Kernel::ShiftedProduct) {
                continue;
            }
            let p = k.reference_params();
            let (v, _) = evaluate(k, &p, (0.0, 0.3), &spec(), 1.0).unwrap();
            assert_eq!(v, 0.0, "{k}");
        }
    }

    #[test]
    fn small_frequency_tends_to_zero() {
        for k in [
            Kernel::QuadraticAuxiliary,
            Kernel::SameSign,
            Kernel::SameSignOutputDominant,
            Kernel::Mixed,
            Kernel::MixedOutputDominant,
            Kernel::FlippedOutputDominant,
        ] {
            let p = k.reference_params();
            let (a, _) = evaluate(k, &p, (1e-2, 0.3), &spec(), 1.0).unwrap();
            let (b, _) = evaluate(k, &p, (1e-4, 0.3), &spec(), 1.0).unwrap();
            assert!(b < a && b < 1e-3, "{k}: {a} {b}");
        }
    }

    #[test]
    fn hypothesis_violations_named() {
        let mut p = Kernel::QuadraticAuxiliary.reference_params();
        p.b_prime = -0.1;
        match check_hypotheses(Kernel::QuadraticAuxiliary, &p) {
            Err(Error::HypothesisViolation(m)) => assert!(m.contains("s/3 - 1/4"), "{m}"),
            other => panic!("{other:?}"),
        }
        let mut p = Kernel::Mixed.reference_params();
        p.b = 0.5;
        assert!(matches!(
            check_hypotheses(Kernel::Mixed, &p),
            Err(Error::HypothesisViolation(_))
        ));
        let mut p = Kernel::FlippedInputDominant.reference_params();
        p.b_prime = -0.3;
        assert!(check_hypotheses(Kernel::FlippedInputDominant, &p).is_err());
    }

    #[test]
    fn reference_params_satisfy_hypotheses() {
        for k in Kernel::ALL {
            check_hypotheses(k, &k.reference_params()).unwrap();
        }
    }

    #[test]
    fn region_integral_matches_brute_force() {
        // direct midpoint sum of the output-dominant kernel with the indicator inline
        let k = Kernel::MixedOutputDominant;
        let p = k.reference_params();
        let (xi, y) = (1.3, 0.7);
        let (v, _) = evaluate(k, &p, (xi, y), &spec(), 1.0).unwrap();
        let kk: f64 = xi * xi * xi;
        let pref = xi.powf(3.0 - 2.0 * p.s) * (1.0 + kk * (y + 2.0)).powf(2.0 * p.b_prime);
        let n = 2_000_000;
        let (lo, hi) = (-3.0, 4.0);
        let h = (hi - lo) / n as f64;
        let mut sum = 0.0;
        for i in 0..n {
            let x: f64 = lo + (i as f64 + 0.5) * h;
            let m = y + 3.0 * (x - x * x) + 2.0 * x * x * x;
            if m.abs() <= 2.0 * (y + 2.0).abs() {
                sum += h * (x - x * x).abs().powf(-2.0 * p.s) * (1.0 + kk * m.abs()).powf(-2.0 * p.b);
            }
        }
        assert!((v - pref * sum).abs() < 1e-5 * v, "{v} vs {}", pref * sum);
    }

    #[test]
    fn input_dominant_matches_brute_force() {
        for k in [
            Kernel::SameSignInputDominant,
            Kernel::MixedInputDominant,
            Kernel::FlippedInputDominant,
        ] {
            let p = k.reference_params();
            let (xi1, d) = (2.5, 40.0);
            let (v, _) = evaluate(k, &p, (xi1, d), &spec(), 1.0).unwrap();
            let tau1 = match k {
                Kernel::MixedInputDominant => -xi1 * xi1 * xi1 + d,
                _ => xi1 * xi1 * xi1 + d,
            };
            let n = 4_000_000;
            let (lo, hi) = (-20.0, 20.0);
            let h = (hi - lo) / n as f64;
            let mut sum = 0.0;
            for i in 0..n {
                let xi: f64 = lo + (i as f64 + 0.5) * h;
                let mu = match k {
                    Kernel::FlippedInputDominant => tau1 + 3.0 * xi * xi1 * (xi - xi1) + xi1.powi(3),
                    _ => tau1 + 2.0 * xi.powi(3) - xi1.powi(3) - 3.0 * xi * xi1 * (xi - xi1),
                };
                if (xi - xi1).abs() >= 1.0 && mu.abs() <= 2.0 * d.abs() {
                    sum += h
                        * xi.abs().powf(2.0 * (1.0 + p.s))
                        * (xi * xi1 * (xi - xi1)).abs().powf(-2.0 * p.s)
                        * (1.0 + xi.abs()).powf(2.0 * p.s)
                        * (1.0 + mu.abs()).powf(2.0 * p.b_prime);
                }
            }
            let want = (1.0 + d).powf(-p.b) * sum.sqrt();
            assert!((v - want).abs() < 1e-4 * want, "{k}: {v} vs {want}");
        }
    }

    #[test]
    fn names_round_trip() {
        for k in Kernel::ALL {
            assert_eq!(k.name().parse::<Kernel>().unwrap(), k);
        }
        assert!("nope".parse::<Kernel>().is_err());
    }
}

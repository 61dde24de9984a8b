//! Globally adaptive Gauss–Kronrod (7, 15) quadrature on finite intervals.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];

const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];

const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// Tolerances and limits of [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuadSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Equal panels each breakpoint interval is split into before adapting.
    pub initial_panels: usize,
    pub max_intervals: usize,
}

impl Default for QuadSpec {
    fn default() -> Self {
        Self {
            rel_tol: 1e-8,
            abs_tol: 1e-14,
            initial_panels: 4,
            max_intervals: 4000,
        }
    }
}

impl QuadSpec {
    /// Twice the starting resolution and half the tolerance.
    pub fn refined(&self) -> Self {
        Self {
            rel_tol: 0.5 * self.rel_tol,
            abs_tol: 0.5 * self.abs_tol,
            initial_panels: 2 * self.initial_panels,
            max_intervals: 2 * self.max_intervals,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub intervals: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy)]
struct Piece {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}

impl Eq for Piece {}

impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut gauss = fc * WG[3];
    let mut kron = fc * WGK[7];
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        kron += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    let value = kron * h;
    let err = ((kron - gauss) * h).abs();
    (value, err)
}

/// `∫_a^b f` with adaptive bisection of the worst interval; `breaks` are interior points
/// where the integrand has kinks, peaks or discontinuities.
pub fn integrate<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    spec: &QuadSpec,
) -> Result<QuadResult> {
    if !a.is_finite() || !b.is_finite() {
        return Err(Error::InvalidParameter("integration limits must be finite".into()));
    }
    if a == b {
        return Ok(QuadResult {
            value: 0.0,
            error: 0.0,
            intervals: 0,
            converged: true,
        });
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let mut nodes: Vec<f64> = breaks
        .iter()
        .copied()
        .filter(|x| x.is_finite() && *x > lo && *x < hi)
        .collect();
    nodes.push(lo);
    nodes.push(hi);
    nodes.sort_by(f64::total_cmp);
    nodes.dedup();
    let panels = spec.initial_panels.max(1);
    let mut heap = BinaryHeap::new();
    let mut total = 0.0;
    let mut total_err = 0.0;
    for w in nodes.windows(2) {
        let h = (w[1] - w[0]) / panels as f64;
        for p in 0..panels {
            let pa = w[0] + p as f64 * h;
            let pb = if p + 1 == panels { w[1] } else { pa + h };
            let (value, error) = kronrod(&mut f, pa, pb);
            total += value;
            total_err += error;
            heap.push(Piece {
                a: pa,
                b: pb,
                value,
                error,
            });
        }
    }
    let mut converged = false;
    loop {
        if !total.is_finite() {
            break;
        }
        if total_err <= spec.abs_tol.max(spec.rel_tol * total.abs()) {
            converged = true;
            break;
        }
        if heap.len() >= spec.max_intervals {
            break;
        }
        let worst = match heap.pop() {
            Some(p) => p,
            None => break,
        };
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            // interval below floating-point resolution
            heap.push(Piece { error: 0.0, ..worst });
            total_err -= worst.error;
            continue;
        }
        let (v1, e1) = kronrod(&mut f, worst.a, mid);
        let (v2, e2) = kronrod(&mut f, mid, worst.b);
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.error;
        heap.push(Piece {
            a: worst.a,
            b: mid,
            value: v1,
            error: e1,
        });
        heap.push(Piece {
            a: mid,
            b: worst.b,
            value: v2,
            error: e2,
        });
    }
    // re-sum to shed accumulated rounding from the running totals
    let mut value = 0.0;
    let mut error = 0.0;
    let intervals = heap.len();
    for p in heap {
        value += p.value;
        error += p.error;
    }
    Ok(QuadResult {
        value: sign * value,
        error,
        intervals,
        converged: converged || error <= spec.abs_tol.max(spec.rel_tol * value.abs()),
    })
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x > 0.0 && **y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    let n = pts.len() as f64;
    if pts.len() < 2 {
        return f64::NAN;
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let r = integrate(|x| x.powi(5) - 2.0 * x, -1.0, 2.0, &[], &QuadSpec::default()).unwrap();
        assert!((r.value - (64.0 / 6.0 - 1.0 / 6.0 - 3.0)).abs() < 1e-13);
        assert!(r.converged);
    }

    #[test]
    fn reversed_limits_flip_sign() {
        let s = QuadSpec::default();
        let a = integrate(f64::exp, 0.0, 1.0, &[], &s).unwrap().value;
        let b = integrate(f64::exp, 1.0, 0.0, &[], &s).unwrap().value;
        assert_eq!(a, -b);
        assert!((a - (1f64.exp() - 1.0)).abs() < 1e-13);
    }

    #[test]
    fn sharp_peak_with_breakpoint() {
        // ∫ dx/(1+(x/ε)²) over [-1, 1] = 2ε·atan(1/ε)
        let eps: f64 = 1e-6;
        let want = 2.0 * eps * (1.0 / eps).atan();
        let r = integrate(
            |x| 1.0 / (1.0 + (x / eps).powi(2)),
            -1.0,
            1.0,
            &[0.0],
            &QuadSpec::default(),
        )
        .unwrap();
        assert!((r.value - want).abs() < 1e-8 * want, "{} vs {want}", r.value);
    }

    #[test]
    fn square_root_singularity() {
        let r = integrate(|x: f64| 1.0 / x.abs().sqrt(), -1.0, 1.0, &[0.0], &QuadSpec::default()).unwrap();
        assert!((r.value - 4.0).abs() < 1e-6);
    }

    #[test]
    fn kinked_integrand() {
        let r = integrate(|x: f64| (x - 0.3).abs(), 0.0, 1.0, &[0.3], &QuadSpec::default()).unwrap();
        assert!((r.value - (0.045 + 0.245)).abs() < 1e-15);
    }

    #[test]
    fn slope_of_power_law() {
        let xs = [1.0, 2.0, 4.0, 8.0];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powf(1.7)).collect();
        assert!((loglog_slope(&xs, &ys) - 1.7).abs() < 1e-12);
    }
}

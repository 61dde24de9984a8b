//! Minimal 2×2 real matrix helpers.

pub type Mat2 = [[f64; 2]; 2];

pub const IDENTITY: Mat2 = [[1.0, 0.0], [0.0, 1.0]];

pub fn det(m: &Mat2) -> f64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

pub fn inverse(m: &Mat2) -> Option<Mat2> {
    let d = det(m);
    if d == 0.0 || !d.is_finite() {
        return None;
    }
    Some([[m[1][1] / d, -m[0][1] / d], [-m[1][0] / d, m[0][0] / d]])
}

pub fn mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

pub fn apply(m: &Mat2, x: [f64; 2]) -> [f64; 2] {
    [m[0][0] * x[0] + m[0][1] * x[1], m[1][0] * x[0] + m[1][1] * x[1]]
}

pub fn diag(a: f64, b: f64) -> Mat2 {
    [[a, 0.0], [0.0, b]]
}

pub fn is_diagonal(m: &Mat2) -> bool {
    m[0][1] == 0.0 && m[1][0] == 0.0
}

pub fn max_abs_diff(a: &Mat2, b: &Mat2) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            worst = worst.max((a[i][j] - b[i][j]).abs());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_round_trip() {
        let m = [[2.0, 1.0], [-3.0, 0.5]];
        let inv = inverse(&m).unwrap();
        assert!(max_abs_diff(&mul(&m, &inv), &IDENTITY) < 1e-15);
        assert!(inverse(&[[1.0, 2.0], [2.0, 4.0]]).is_none());
    }
}

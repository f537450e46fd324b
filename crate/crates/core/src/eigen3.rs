//! Eigenvalues of real symmetric 3x3 matrices.
//!
//! The trigonometric closed form handles the common case. When two
//! eigenvalues nearly coincide the `acos` argument sits near +-1 and loses
//! half the digits, so those matrices go through cyclic Jacobi instead.

use std::f64::consts::PI;

pub type Sym3 = [[f64; 3]; 3];

const CLOSED_FORM_LIMIT: f64 = 1.0 - 1e-6;

/// Eigenvalues in ascending order.
pub fn eigenvalues(a: &Sym3) -> [f64; 3] {
    let off = a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2];
    if off == 0.0 {
        let mut d = [a[0][0], a[1][1], a[2][2]];
        d.sort_by(f64::total_cmp);
        return d;
    }
    let q = (a[0][0] + a[1][1] + a[2][2]) / 3.0;
    let d0 = a[0][0] - q;
    let d1 = a[1][1] - q;
    let d2 = a[2][2] - q;
    let p2 = d0 * d0 + d1 * d1 + d2 * d2 + 2.0 * off;
    let p = (p2 / 6.0).sqrt();
    let b = [
        [d0 / p, a[0][1] / p, a[0][2] / p],
        [a[1][0] / p, d1 / p, a[1][2] / p],
        [a[2][0] / p, a[2][1] / p, d2 / p],
    ];
    let r = 0.5 * det(&b);
    if r.abs() > CLOSED_FORM_LIMIT {
        return jacobi(a);
    }
    let phi = r.acos() / 3.0;
    let largest = q + 2.0 * p * phi.cos();
    let smallest = q + 2.0 * p * (phi + 2.0 * PI / 3.0).cos();
    let middle = 3.0 * q - largest - smallest;
    [smallest, middle, largest]
}

pub fn lowest_eigenvalue(a: &Sym3) -> f64 {
    eigenvalues(a)[0]
}

/// Unit eigenvector for a known eigenvalue `lambda`.
pub fn eigenvector(a: &Sym3, lambda: f64) -> [f64; 3] {
    let m = [
        [a[0][0] - lambda, a[0][1], a[0][2]],
        [a[1][0], a[1][1] - lambda, a[1][2]],
        [a[2][0], a[2][1], a[2][2] - lambda],
    ];
    let candidates = [cross(&m[0], &m[1]), cross(&m[0], &m[2]), cross(&m[1], &m[2])];
    let best = candidates
        .iter()
        .max_by(|x, y| norm2(x).total_cmp(&norm2(y)))
        .copied()
        .unwrap_or([0.0; 3]);
    let n = norm2(&best).sqrt();
    if n > 1e-150 {
        return [best[0] / n, best[1] / n, best[2] / n];
    }
    // Degenerate eigenspace: any unit vector orthogonal to the rows spanning m.
    let row = m
        .iter()
        .max_by(|x, y| norm2(x).total_cmp(&norm2(y)))
        .copied()
        .unwrap_or([0.0; 3]);
    if norm2(&row) == 0.0 {
        return [1.0, 0.0, 0.0];
    }
    let axis = if row[0].abs() < 0.5 * norm2(&row).sqrt() { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let v = cross(&row, &axis);
    let n = norm2(&v).sqrt();
    [v[0] / n, v[1] / n, v[2] / n]
}

fn det(m: &Sym3) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

fn cross(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn norm2(v: &[f64; 3]) -> f64 {
    v[0] * v[0] + v[1] * v[1] + v[2] * v[2]
}

fn jacobi(a: &Sym3) -> [f64; 3] {
    let mut m = *a;
    for _ in 0..64 {
        let off = m[0][1].abs() + m[0][2].abs() + m[1][2].abs();
        let scale = m[0][0].abs() + m[1][1].abs() + m[2][2].abs();
        if off <= f64::EPSILON * 1e-3 * scale || off == 0.0 {
            break;
        }
        for (p, q) in [(0, 1), (0, 2), (1, 2)] {
            if m[p][q] == 0.0 {
                continue;
            }
            let theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
            let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
            let t = if theta == 0.0 { 1.0 } else { t };
            let c = 1.0 / (t * t + 1.0).sqrt();
            let s = t * c;
            let mut next = m;
            for k in 0..3 {
                next[k][p] = c * m[k][p] - s * m[k][q];
                next[k][q] = s * m[k][p] + c * m[k][q];
            }
            let rows = next;
            for k in 0..3 {
                next[p][k] = c * rows[p][k] - s * rows[q][k];
                next[q][k] = s * rows[p][k] + c * rows[q][k];
            }
            next[p][q] = 0.0;
            next[q][p] = 0.0;
            m = next;
        }
    }
    let mut d = [m[0][0], m[1][1], m[2][2]];
    d.sort_by(f64::total_cmp);
    d
}

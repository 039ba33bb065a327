//! Small dense linear algebra on `f64` slices, sized for `d <= 10`.

use alloc::vec;
use alloc::vec::Vec;

use libm::{fabs, sqrt};

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    sqrt(dot(a, a))
}

#[inline]
pub fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[inline]
pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    sqrt(dist2(a, b))
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// `y += alpha * x`
#[inline]
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Determinant of a row-major `n x n` matrix by partial-pivot elimination.
pub fn det(mut a: Vec<f64>, n: usize) -> f64 {
    debug_assert_eq!(a.len(), n * n);
    let mut sign = 1.0;
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| fabs(a[i * n + col]).total_cmp(&fabs(a[j * n + col])))
            .unwrap();
        if a[pivot * n + col] == 0.0 {
            return 0.0;
        }
        if pivot != col {
            for c in 0..n {
                a.swap(pivot * n + c, col * n + c);
            }
            sign = -sign;
        }
        let p = a[col * n + col];
        for r in col + 1..n {
            let factor = a[r * n + col] / p;
            if factor != 0.0 {
                for c in col..n {
                    a[r * n + c] -= factor * a[col * n + c];
                }
            }
        }
    }
    (0..n).fold(sign, |acc, i| acc * a[i * n + i])
}

/// Solve `A x = b` for row-major square `A`. `None` when a pivot falls
/// below `tol` times the largest absolute entry.
pub fn solve(mut a: Vec<f64>, mut b: Vec<f64>, n: usize, tol: f64) -> Option<Vec<f64>> {
    let scale = a.iter().fold(0.0f64, |m, v| m.max(fabs(*v)));
    if scale == 0.0 {
        return None;
    }
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| fabs(a[i * n + col]).total_cmp(&fabs(a[j * n + col])))
            .unwrap();
        if fabs(a[pivot * n + col]) <= tol * scale {
            return None;
        }
        if pivot != col {
            for c in 0..n {
                a.swap(pivot * n + c, col * n + c);
            }
            b.swap(pivot, col);
        }
        let p = a[col * n + col];
        for r in col + 1..n {
            let factor = a[r * n + col] / p;
            for c in col..n {
                a[r * n + c] -= factor * a[col * n + c];
            }
            b[r] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| a[r * n + c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r * n + r];
    }
    Some(x)
}

/// Modified Gram–Schmidt. Returns the orthonormal vectors, or `None` when
/// some vector has residual norm below `tol` (rank deficiency).
pub fn orthonormalize(vectors: &[Vec<f64>], tol: f64) -> Option<Vec<Vec<f64>>> {
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(vectors.len());
    for v in vectors {
        let mut w = v.clone();
        // two passes keep orthogonality at machine precision
        for _ in 0..2 {
            for q in &out {
                let c = dot(&w, q);
                axpy(-c, q, &mut w);
            }
        }
        let n = norm(&w);
        if n <= tol {
            return None;
        }
        w.iter_mut().for_each(|x| *x /= n);
        out.push(w);
    }
    Some(out)
}

/// Orthonormal basis of the orthogonal complement of the span of the
/// orthonormal `rows` in `R^d`.
pub fn complement(rows: &[Vec<f64>], d: usize) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = rows.to_vec();
    let mut out = Vec::with_capacity(d.saturating_sub(rows.len()));
    for i in 0..d {
        if basis.len() == d {
            break;
        }
        let mut w = vec![0.0; d];
        w[i] = 1.0;
        for _ in 0..2 {
            for q in &basis {
                let c = dot(&w, q);
                axpy(-c, q, &mut w);
            }
        }
        let n = norm(&w);
        // a standard basis vector always keeps norm >= 1/sqrt(d) for some i
        if n > 0.5 / sqrt(d as f64) {
            w.iter_mut().for_each(|x| *x /= n);
            basis.push(w.clone());
            out.push(w);
        }
    }
    out
}

//! Small dense helpers: modified Gram-Schmidt, rank, orthogonal complements.

use crate::scalar::{real, Scalar};
use crate::vector::Vector;

/// Orthonormal basis of the span of `vectors` via modified Gram-Schmidt.
/// Vectors whose residual falls below `threshold` (relative to their norm)
/// are treated as dependent and skipped.
pub fn orthonormalize<T: Scalar>(vectors: &[Vector<T>], threshold: f64) -> Vec<Vector<T>> {
    let thr: T = real(threshold);
    let mut basis: Vec<Vector<T>> = Vec::new();
    for v in vectors {
        let scale = v.norm().max(T::one());
        let mut r = v.clone();
        // two MGS passes for numerical orthogonality
        for _ in 0..2 {
            for q in &basis {
                let c = q.dot(&r);
                r.axpy(-c, q);
            }
        }
        let n = r.norm();
        if n > thr * scale {
            basis.push(r.scaled(T::one() / n));
        }
    }
    basis
}

pub fn rank<T: Scalar>(vectors: &[Vector<T>], threshold: f64) -> usize {
    orthonormalize(vectors, threshold).len()
}

/// Orthonormal basis of the orthogonal complement of span(`basis`) in R^dim.
pub fn complement_basis<T: Scalar>(basis: &[Vector<T>], dim: usize) -> Vec<Vector<T>> {
    let mut all: Vec<Vector<T>> = basis.to_vec();
    for i in 0..dim {
        all.push(Vector::basis(dim, i));
    }
    let full = orthonormalize(&all, 1e-10);
    full.into_iter().skip(basis.len()).collect()
}

/// Least-squares coefficients for `b` against the listed columns.
/// Dependent columns (relative residual below `dep_tol`) receive a zero
/// coefficient; earlier columns take precedence.
pub fn ls_solve<T: Scalar>(cols: &[&Vector<T>], b: &Vector<T>, dep_tol: f64) -> Vec<T> {
    let thr: T = real(dep_tol);
    let m = cols.len();
    let mut qs: Vec<Vector<T>> = Vec::new();
    // r_cols[t] = coefficients of accepted column t against q_0..q_t
    let mut r_cols: Vec<Vec<T>> = Vec::new();
    let mut accepted: Vec<usize> = Vec::new();
    for (j, col) in cols.iter().enumerate() {
        let scale = col.norm().max(T::one());
        let mut v = (*col).clone();
        let mut coeffs = vec![T::zero(); qs.len()];
        for _ in 0..2 {
            for (k, q) in qs.iter().enumerate() {
                let c = q.dot(&v);
                coeffs[k] += c;
                v.axpy(-c, q);
            }
        }
        let n = v.norm();
        if n > thr * scale {
            qs.push(v.scaled(T::one() / n));
            coeffs.push(n);
            r_cols.push(coeffs);
            accepted.push(j);
        }
    }
    let p = qs.len();
    let y: Vec<T> = qs.iter().map(|q| q.dot(b)).collect();
    // back-substitute R z = y (R upper triangular, R[k][t] = r_cols[t][k])
    let mut z = vec![T::zero(); p];
    for t in (0..p).rev() {
        let mut s = y[t];
        for u in (t + 1)..p {
            s = s - r_cols[u][t] * z[u];
        }
        z[t] = s / r_cols[t][t];
    }
    let mut out = vec![T::zero(); m];
    for (t, &j) in accepted.iter().enumerate() {
        out[j] = z[t];
    }
    out
}

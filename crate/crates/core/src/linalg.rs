//! Small dense complex helpers.
//!
//! Hermitian eigenproblems use the closed-form quadratic for 2x2 and
//! nalgebra's iterative Hermitian solver otherwise.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Largest `|m(i,j) - conj(m(j,i))|`.
pub fn hermitian_deviation(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// `(m + m^dagger) / 2`
pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

pub fn trace(m: &CMatrix) -> Complex64 {
    m.diagonal().iter().sum()
}

/// Eigenvalues (ascending) and matching orthonormal eigenvectors (columns)
/// of a Hermitian matrix. Only the Hermitian part of `m` is used.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let h = hermitian_part(m);
    if h.nrows() == 2 {
        return eigen_2x2(&h);
    }
    let n = h.nrows();
    let eig = h.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = CMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    hermitian_eigen(m).0
}

fn eigen_2x2(h: &CMatrix) -> (Vec<f64>, CMatrix) {
    let a = h[(0, 0)].re;
    let d = h[(1, 1)].re;
    let c = h[(0, 1)];
    let mean = 0.5 * (a + d);
    let half_gap = 0.5 * (a - d);
    let r = half_gap.hypot(c.norm());
    let upper = mean + r;
    let lower = mean - r;

    let (p, q) = if c.norm() == 0.0 {
        if a >= d {
            (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0))
        } else {
            (Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0))
        }
    } else {
        // Two algebraically equivalent eigenvectors of `upper`; take the
        // better conditioned one.
        let v1 = (c, Complex64::new(upper - a, 0.0));
        let v2 = (Complex64::new(upper - d, 0.0), c.conj());
        let n1 = v1.0.norm_sqr() + v1.1.norm_sqr();
        let n2 = v2.0.norm_sqr() + v2.1.norm_sqr();
        let (v, n) = if n1 >= n2 { (v1, n1) } else { (v2, n2) };
        let n = n.sqrt();
        (v.0 / n, v.1 / n)
    };
    // Orthogonal complement in C^2 belongs to `lower`.
    let vectors = CMatrix::from_row_slice(2, 2, &[-q.conj(), p, p.conj(), q]);
    (vec![lower, upper], vectors)
}

/// Singular values of a general complex square matrix.
pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    m.clone().singular_values().iter().copied().collect()
}

/// Builds `sum_k w_k v_k v_k^dagger` from eigen data.
pub fn compose(values: &[f64], vectors: &CMatrix) -> CMatrix {
    let n = vectors.nrows();
    let mut out = CMatrix::zeros(n, n);
    for (k, &w) in values.iter().enumerate() {
        let v = vectors.column(k);
        out += (&v * v.adjoint()).scale(w);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn closed_form_matches_reconstruction() {
        let m = CMatrix::from_row_slice(2, 2, &[c(0.7, 0.0), c(0.1, -0.3), c(0.1, 0.3), c(0.3, 0.0)]);
        let (vals, vecs) = hermitian_eigen(&m);
        assert!(vals[0] <= vals[1]);
        let back = compose(&vals, &vecs);
        assert!((back - &m).norm() < 1e-14);
        let gram = vecs.adjoint() * &vecs;
        assert!((gram - CMatrix::identity(2, 2)).norm() < 1e-14);
    }

    #[test]
    fn diagonal_and_degenerate_inputs() {
        let m = CMatrix::from_row_slice(2, 2, &[c(-0.2, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.2, 0.0)]);
        let (vals, vecs) = hermitian_eigen(&m);
        assert!((vals[0] + 0.2).abs() < 1e-15 && (vals[1] - 1.2).abs() < 1e-15);
        assert!((compose(&vals, &vecs) - &m).norm() < 1e-15);

        let half = CMatrix::identity(2, 2).scale(0.5);
        let (vals, vecs) = hermitian_eigen(&half);
        assert_eq!(vals, vec![0.5, 0.5]);
        assert!((compose(&vals, &vecs) - &half).norm() < 1e-15);
    }

    #[test]
    fn general_dimension_uses_iterative_solver() {
        let m = CMatrix::from_fn(4, 4, |i, j| {
            if i == j {
                c(i as f64, 0.0)
            } else if i < j {
                c(0.1 * (i + j) as f64, 0.05 * j as f64)
            } else {
                c(0.1 * (i + j) as f64, -0.05 * i as f64)
            }
        });
        let (vals, vecs) = hermitian_eigen(&m);
        assert!(vals.windows(2).all(|w| w[0] <= w[1]));
        assert!((compose(&vals, &vecs) - &m).norm() < 1e-12);
    }
}

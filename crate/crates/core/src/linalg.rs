//! Small dense complex linear algebra on top of `nalgebra`.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex;

pub type C64 = Complex<f64>;
pub type CMat = DMatrix<C64>;

pub(crate) const I: C64 = C64::new(0.0, 1.0);

/// Largest entrywise deviation `|A - A†|`.
pub fn hermitian_deviation(a: &CMat) -> f64 {
    let n = a.nrows();
    let mut dev = 0.0_f64;
    for i in 0..n {
        for j in i..n {
            dev = dev.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    dev
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
///
/// Columns of the returned matrix are the orthonormal eigenvectors.
pub fn hermitian_eigen(a: &CMat) -> (Vec<f64>, CMat) {
    let n = a.nrows();
    if n == 0 {
        return (Vec::new(), CMat::zeros(0, 0));
    }
    // symmetrize so round-off in the caller never leaks an anti-Hermitian part
    let sym = (a + a.adjoint()) * C64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMat::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Eigendecomposition of a real symmetric matrix, eigenvalues ascending.
pub fn symmetric_eigen(a: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = a.nrows();
    if n == 0 {
        return (Vec::new(), DMatrix::zeros(0, 0));
    }
    let eig = SymmetricEigen::new(a.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// `exp(-i θ G)` for a real symmetric generator `G`.
pub fn exp_i_symmetric(generator: &DMatrix<f64>, theta: f64) -> CMat {
    let n = generator.nrows();
    let (values, vectors) = symmetric_eigen(generator);
    CMat::from_fn(n, n, |r, c| {
        (0..n)
            .map(|k| {
                let phase = C64::from_polar(1.0, -theta * values[k]);
                phase * vectors[(r, k)] * vectors[(c, k)]
            })
            .sum()
    })
}

pub fn frobenius_norm(a: &CMat) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn trace(a: &CMat) -> C64 {
    (0..a.nrows().min(a.ncols())).map(|i| a[(i, i)]).sum()
}

/// Largest entrywise deviation of `A A†` from the identity.
pub fn unitarity_deviation(a: &CMat) -> f64 {
    let prod = a * a.adjoint();
    let n = a.nrows();
    let mut dev = 0.0_f64;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { 1.0 } else { 0.0 };
            dev = dev.max((prod[(i, j)] - C64::new(target, 0.0)).norm());
        }
    }
    dev
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigen_reconstructs_hermitian() {
        let a = CMat::from_row_slice(
            3,
            3,
            &[
                C64::new(2.0, 0.0),
                C64::new(0.5, 0.3),
                C64::new(0.0, -0.2),
                C64::new(0.5, -0.3),
                C64::new(1.0, 0.0),
                C64::new(0.1, 0.0),
                C64::new(0.0, 0.2),
                C64::new(0.1, 0.0),
                C64::new(-1.0, 0.0),
            ],
        );
        let (vals, vecs) = hermitian_eigen(&a);
        assert!(vals.windows(2).all(|w| w[0] <= w[1]));
        let diag = CMat::from_diagonal(&nalgebra::DVector::from_iterator(
            3,
            vals.iter().map(|&v| C64::new(v, 0.0)),
        ));
        let back = &vecs * diag * vecs.adjoint();
        assert!((back - &a).iter().all(|z| z.norm() < 1e-12));
        assert!(unitarity_deviation(&vecs) < 1e-12);
    }

    #[test]
    fn exp_of_zero_generator_is_identity() {
        let u = exp_i_symmetric(&DMatrix::zeros(3, 3), 0.7);
        assert!(unitarity_deviation(&u) < 1e-15);
        assert!((u[(1, 1)] - C64::new(1.0, 0.0)).norm() < 1e-15);
    }
}

//! Thin wrappers around the dense SVD / Hermitian eigensolver.

use nalgebra::DMatrix;
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

const MAX_ITER: usize = 200_000;

/// Singular values of a dense complex matrix, sorted descending.
pub fn svd_values<T: Scalar>(m: &DMatrix<Complex<T>>) -> Result<Vec<T>> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Ok(Vec::new());
    }
    let svd = m
        .clone()
        .try_svd(false, false, <T as num_traits::Float>::epsilon() * T::of(4.0), MAX_ITER)
        .ok_or_else(|| Error::Numerical("SVD did not converge".into()))?;
    let mut vals: Vec<T> = svd.singular_values.iter().copied().collect();
    vals.sort_by(|a, b| b.partial_cmp(a).unwrap());
    Ok(vals)
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues sorted descending
/// with the matching eigenvector columns.
pub fn hermitian_eigen_desc<T: Scalar>(
    m: &DMatrix<Complex<T>>,
) -> Result<(Vec<T>, DMatrix<Complex<T>>)> {
    if m.nrows() == 0 {
        return Ok((Vec::new(), DMatrix::zeros(0, 0)));
    }
    let eig = m
        .clone()
        .try_symmetric_eigen(<T as num_traits::Float>::epsilon() * T::of(4.0), MAX_ITER)
        .ok_or_else(|| Error::Numerical("Hermitian eigensolver did not converge".into()))?;
    let n = m.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].partial_cmp(&eig.eigenvalues[i]).unwrap());
    let vals: Vec<T> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vecs = DMatrix::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        vecs.set_column(col, &eig.eigenvectors.column(i));
    }
    Ok((vals, vecs))
}

/// Largest singular value (operator norm); 0 for empty matrices.
pub fn operator_norm<T: Scalar>(m: &DMatrix<Complex<T>>) -> Result<T> {
    Ok(svd_values(m)?.first().copied().unwrap_or_else(T::zero))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn svd_of_diagonal() {
        let m = DMatrix::from_fn(3, 3, |i, j| {
            if i == j {
                Complex::new((3 - i) as f64, 0.0)
            } else {
                Complex::new(0.0, 0.0)
            }
        });
        let vals = svd_values(&m).unwrap();
        assert!((vals[0] - 3.0).abs() < 1e-13);
        assert!((vals[2] - 1.0).abs() < 1e-13);
    }

    #[test]
    fn hermitian_eigen_sorted() {
        let m = DMatrix::from_fn(2, 2, |i, j| match (i, j) {
            (0, 0) => Complex::new(2.0, 0.0),
            (1, 1) => Complex::new(1.0, 0.0),
            (0, 1) => Complex::new(0.0, 0.5),
            _ => Complex::new(0.0, -0.5),
        });
        let (vals, vecs) = hermitian_eigen_desc(&m).unwrap();
        assert!(vals[0] > vals[1]);
        // Residual check M v = lambda v.
        for k in 0..2 {
            let v = vecs.column(k);
            let r = &m * v - v * Complex::new(vals[k], 0.0);
            assert!(r.norm() < 1e-12);
        }
    }
}

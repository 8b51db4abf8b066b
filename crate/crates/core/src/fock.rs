//! Second quantization: exterior powers at oracle scale, the norm-product
//! formula, partial products of singular values, and the contraction +
//! trace-class split.

use nalgebra::DMatrix;
use num_complex::Complex;
use num_traits::Float;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen_desc, svd_values};
use crate::scalar::Scalar;
use crate::spectra::SingularSpectrum;
use crate::wco::OperatorMatrix;

/// Maximum base dimension / exterior degree for explicit minors.
const MAX_DIM: usize = 8;
const MAX_DEGREE: usize = 6;

/// Increasing index tuples of length `n` from `0..dim`, lexicographic.
fn index_tuples(dim: usize, n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(n);
    fn rec(dim: usize, n: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for i in start..dim {
            cur.push(i);
            rec(dim, n, i + 1, cur, out);
            cur.pop();
        }
    }
    rec(dim, n, 0, &mut cur, &mut out);
    out
}

/// Exterior power `Lambda^n(T)` of a square matrix, on the basis of
/// increasing wedge products: entry `(I, J)` is the determinant of the
/// `n x n` minor with rows `I` and columns `J`. Oracle scale only.
pub fn exterior_power<T: Scalar>(m: &OperatorMatrix<T>, n: usize) -> Result<OperatorMatrix<T>> {
    let dim = m.n_rows();
    if m.n_cols() != dim {
        return Err(Error::Size("exterior power requires a square matrix".into()));
    }
    if dim > MAX_DIM || n > MAX_DEGREE || n == 0 {
        return Err(Error::Size(format!(
            "exterior power limited to dim <= {MAX_DIM}, 1 <= n <= {MAX_DEGREE} (got dim = {dim}, n = {n})"
        )));
    }
    if n > dim {
        return Err(Error::Size(format!("degree {n} exceeds dimension {dim}")));
    }
    let tuples = index_tuples(dim, n);
    let size = tuples.len();
    let mut out = DMatrix::zeros(size, size);
    for (a, rows) in tuples.iter().enumerate() {
        for (b, cols) in tuples.iter().enumerate() {
            let minor = DMatrix::from_fn(n, n, |i, j| m.mat[(rows[i], cols[j])]);
            out[(a, b)] = minor.determinant();
        }
    }
    Ok(OperatorMatrix::new(out))
}

/// Both sides of `|| Lambda^n(T) || = prod_{j <= n} s_j(T)`, computed
/// independently: the largest singular value of the exterior power, and the
/// product of the top `n` singular values of `T`.
pub fn lambda_norm_formula_check<T: Scalar>(m: &OperatorMatrix<T>, n: usize) -> Result<(T, T)> {
    let lhs = exterior_power(m, n)?.operator_norm()?;
    let s = svd_values(&m.mat)?;
    let mut rhs = T::one();
    for v in s.iter().take(n) {
        rhs *= *v;
    }
    Ok((lhs, rhs))
}

/// Convergence verdict for the partial products of `max(1, s_n)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FockVerdict {
    /// No trusted singular value exceeds 1: the product is identically 1.
    #[serde(rename = "bounded-trivially")]
    BoundedTrivially,
    /// The last two partial products agree to relative 1e-8.
    #[serde(rename = "bounded-converged")]
    BoundedConverged,
    /// The partial products had not settled within the trusted range.
    #[serde(rename = "unconverged")]
    Unconverged,
}

/// Partial products `P_N = prod_{n <= N} max(1, s_n)` over trusted indices,
/// with an honest convergence verdict: the product formula for the Fock
/// norm is a theorem, but its finiteness for arbitrary maps is open.
#[derive(Debug, Clone, Serialize)]
pub struct FockReport<T: Scalar> {
    pub partial_products: Vec<T>,
    pub verdict: FockVerdict,
    pub lambda_norm_estimate: T,
}

pub fn fock_norm<T: Scalar>(spec: &SingularSpectrum<T>) -> FockReport<T> {
    let mut partial_products = Vec::new();
    let mut p = T::one();
    let mut any_above_one = false;
    // Stop at the first untrusted index: the product is ordered in n.
    for k in 0..spec.values.len() {
        if !spec.trusted(k) {
            break;
        }
        let s = spec.values[k];
        if s > T::one() {
            any_above_one = true;
            p *= s;
        }
        partial_products.push(p);
    }
    let verdict = if !any_above_one {
        FockVerdict::BoundedTrivially
    } else if partial_products.len() >= 2 {
        let a = partial_products[partial_products.len() - 2];
        let b = partial_products[partial_products.len() - 1];
        if Float::abs(b - a) < T::of(1e-8) * b {
            FockVerdict::BoundedConverged
        } else {
            FockVerdict::Unconverged
        }
    } else {
        FockVerdict::Unconverged
    };
    let lambda_norm_estimate = partial_products.last().copied().unwrap_or_else(T::one);
    FockReport { partial_products, verdict, lambda_norm_estimate }
}

/// Split a Hermitian PSD matrix `m` (typically `|W|`) through its spectral
/// projection at 1: `A = m P_{<=1} + P_{>1}` is a contraction and
/// `X = (m - 1) P_{>1}` is PSD with eigenvalues `{s_n - 1 : s_n > 1}`;
/// `A + X = m` in the shared eigenbasis.
pub fn split_contraction_trace<T: Scalar>(
    m: &OperatorMatrix<T>,
) -> Result<(OperatorMatrix<T>, OperatorMatrix<T>)> {
    let herm_defect = (&m.mat - m.mat.adjoint()).norm();
    if herm_defect > T::of(1e-10) {
        return Err(Error::Precondition(format!(
            "matrix is not Hermitian within 1e-10 (defect {:?})",
            herm_defect.to_f64()
        )));
    }
    let (vals, vecs) = hermitian_eigen_desc(&m.mat)?;
    let n = vals.len();
    let mut da = DMatrix::zeros(n, n);
    let mut dx = DMatrix::zeros(n, n);
    for k in 0..n {
        let lam = vals[k];
        let a = nalgebra::RealField::min(lam, T::one());
        da[(k, k)] = Complex::new(a, T::zero());
        dx[(k, k)] = Complex::new(nalgebra::RealField::max(lam - T::one(), T::zero()), T::zero());
    }
    let a = OperatorMatrix::new(&vecs * da * vecs.adjoint());
    let x = OperatorMatrix::new(&vecs * dx * vecs.adjoint());
    Ok((a, x))
}

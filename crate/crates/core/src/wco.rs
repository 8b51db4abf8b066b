//! Matrix truncations of the weighted composition operator
//! `(W f)(z) = phi'(z)^{1/2} f(phi(z))` and of the operators appearing in
//! its decomposition `W = T + A M_psi C_phi`.

use std::io::{Read, Write};
use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex;
use num_traits::Float;
use rayon::prelude::*;

use crate::coeffs::{taylor_coeffs, BoundaryGrid, CoeffVec};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen_desc, operator_norm};
use crate::map::HoloMap;
use crate::scalar::Scalar;

/// Rectangular truncation of an operator in the monomial basis.
///
/// Column `n` holds the first `n_rows` Taylor coefficients of the image of
/// `z^n`. Truncations produced by the builders are tall (`n_rows >= n_cols`):
/// rows truncated too early bias singular values downward.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix<T: Scalar> {
    pub mat: DMatrix<Complex<T>>,
}

impl<T: Scalar> OperatorMatrix<T> {
    pub fn new(mat: DMatrix<Complex<T>>) -> Self {
        OperatorMatrix { mat }
    }

    pub fn from_columns(cols: Vec<CoeffVec<T>>, n_rows: usize) -> Self {
        let n_cols = cols.len();
        let mat = DMatrix::from_fn(n_rows, n_cols, |i, j| cols[j].coeffs[i]);
        OperatorMatrix { mat }
    }

    pub fn n_rows(&self) -> usize {
        self.mat.nrows()
    }

    pub fn n_cols(&self) -> usize {
        self.mat.ncols()
    }

    pub fn column(&self, j: usize) -> CoeffVec<T> {
        CoeffVec::new(self.mat.column(j).iter().copied().collect())
    }

    /// Apply to a coefficient vector (padded / truncated to `n_cols`).
    pub fn apply(&self, f: &CoeffVec<T>) -> CoeffVec<T> {
        let zero = Complex::new(T::zero(), T::zero());
        let mut v = nalgebra::DVector::from_element(self.n_cols(), zero);
        for (k, c) in f.coeffs.iter().take(self.n_cols()).enumerate() {
            v[k] = *c;
        }
        let out = &self.mat * v;
        CoeffVec::new(out.iter().copied().collect())
    }

    /// Apply the conjugate transpose to a coefficient vector of length `n_rows`.
    pub fn adjoint_apply(&self, f: &CoeffVec<T>) -> CoeffVec<T> {
        let zero = Complex::new(T::zero(), T::zero());
        let mut v = nalgebra::DVector::from_element(self.n_rows(), zero);
        for (k, c) in f.coeffs.iter().take(self.n_rows()).enumerate() {
            v[k] = *c;
        }
        let out = self.mat.adjoint() * v;
        CoeffVec::new(out.iter().copied().collect())
    }

    /// Leading `(rows, cols)` block as a new matrix.
    pub fn leading_block(&self, rows: usize, cols: usize) -> OperatorMatrix<T> {
        OperatorMatrix::new(self.mat.view((0, 0), (rows, cols)).into_owned())
    }

    /// Operator (spectral) norm of the truncation.
    pub fn operator_norm(&self) -> Result<T> {
        operator_norm(&self.mat)
    }

    /// `W^* W` (Hermitian positive semidefinite, `n_cols x n_cols`).
    pub fn gram(&self) -> OperatorMatrix<T> {
        OperatorMatrix::new(self.mat.adjoint() * &self.mat)
    }

    /// Modulus `|W| = (W^* W)^{1/2}`, via the Hermitian eigendecomposition
    /// of the Gram matrix with eigenvalues clamped at zero.
    pub fn modulus(&self) -> Result<OperatorMatrix<T>> {
        let g = self.gram();
        let (vals, vecs) = hermitian_eigen_desc(&g.mat)?;
        let n = vals.len();
        let mut d = DMatrix::zeros(n, n);
        for k in 0..n {
            let lam = nalgebra::RealField::max(vals[k], T::zero());
            d[(k, k)] = Complex::new(Float::sqrt(lam), T::zero());
        }
        Ok(OperatorMatrix::new(&vecs * d * vecs.adjoint()))
    }

    // -- export ------------------------------------------------------------

    /// CSV export: row-major, each entry as a "re,im" field pair.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> Result<()> {
        for i in 0..self.n_rows() {
            let mut fields = Vec::with_capacity(2 * self.n_cols());
            for j in 0..self.n_cols() {
                let e = self.mat[(i, j)];
                fields.push(format!("{:.17e}", e.re.to_f64().unwrap_or(f64::NAN)));
                fields.push(format!("{:.17e}", e.im.to_f64().unwrap_or(f64::NAN)));
            }
            writeln!(out, "{}", fields.join(","))?;
        }
        Ok(())
    }

    /// Compact binary export: magic `HSPM1`, header `n_rows`, `n_cols` as
    /// little-endian u64, then row-major little-endian f64 interleaved re/im.
    pub fn write_binary<W: Write>(&self, out: &mut W) -> Result<()> {
        out.write_all(b"HSPM1")?;
        out.write_all(&(self.n_rows() as u64).to_le_bytes())?;
        out.write_all(&(self.n_cols() as u64).to_le_bytes())?;
        for i in 0..self.n_rows() {
            for j in 0..self.n_cols() {
                let e = self.mat[(i, j)];
                out.write_all(&e.re.to_f64().unwrap_or(f64::NAN).to_le_bytes())?;
                out.write_all(&e.im.to_f64().unwrap_or(f64::NAN).to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn write_binary_file(&self, path: &Path) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write_binary(&mut f)
    }

    /// Read back the `HSPM1` binary format.
    pub fn read_binary<R: Read>(input: &mut R) -> Result<OperatorMatrix<T>> {
        let mut magic = [0u8; 5];
        input.read_exact(&mut magic)?;
        if &magic != b"HSPM1" {
            return Err(Error::Config("bad magic in binary matrix file".into()));
        }
        let mut u = [0u8; 8];
        input.read_exact(&mut u)?;
        let n_rows = u64::from_le_bytes(u) as usize;
        input.read_exact(&mut u)?;
        let n_cols = u64::from_le_bytes(u) as usize;
        let mut data = Vec::with_capacity(n_rows * n_cols);
        let mut f = [0u8; 8];
        for _ in 0..n_rows * n_cols {
            input.read_exact(&mut f)?;
            let re = f64::from_le_bytes(f);
            input.read_exact(&mut f)?;
            let im = f64::from_le_bytes(f);
            data.push(Complex::new(T::of(re), T::of(im)));
        }
        Ok(OperatorMatrix::new(DMatrix::from_fn(n_rows, n_cols, |i, j| data[i * n_cols + j])))
    }
}

/// Running powers `phi^n` multiplied by a fixed weight, sampled on the grid.
fn weighted_power_samples<T: Scalar>(
    grid: &BoundaryGrid<T>,
    weight: &[Complex<T>],
    n_powers: usize,
    start_power: usize,
) -> Vec<Vec<Complex<T>>> {
    let mut pow: Vec<Complex<T>> = grid
        .phi
        .iter()
        .map(|p| crate::scalar::cpowu(*p, start_power))
        .collect();
    let mut out = Vec::with_capacity(n_powers);
    for k in 0..n_powers {
        out.push(weight.iter().zip(pow.iter()).map(|(w, p)| w * p).collect());
        if k + 1 < n_powers {
            for (p, f) in pow.iter_mut().zip(grid.phi.iter()) {
                *p *= f;
            }
        }
    }
    out
}

/// Build the truncation of `W_phi`: column `n` holds the first `n_r`
/// Taylor coefficients of `(phi')^{1/2} phi^n`.
pub fn build_wco<T: Scalar>(
    map: &HoloMap<T>,
    n_c: usize,
    n_r: usize,
    m: usize,
) -> Result<OperatorMatrix<T>> {
    if n_r < n_c {
        return Err(Error::Config(format!("need tall truncation: n_r = {n_r} < n_c = {n_c}")));
    }
    let grid = BoundaryGrid::new(map, m)?;
    let samples = weighted_power_samples(&grid, &grid.sqrt_dphi, n_c, 0);
    let cols: Result<Vec<CoeffVec<T>>> =
        samples.par_iter().map(|s| taylor_coeffs(s, n_r)).collect();
    Ok(OperatorMatrix::from_columns(cols?, n_r))
}

/// The compact shift-integral operator `A z^n = z^{n+1} / (n + 1)` as an
/// `n_r x n_c` truncation; its singular values are exactly `1/n`.
pub fn build_shift_integral<T: Scalar>(n_c: usize, n_r: usize) -> Result<OperatorMatrix<T>> {
    if n_c < 1 {
        return Err(Error::Config("shift integral needs at least one column".into()));
    }
    let mat = DMatrix::from_fn(n_r, n_c, |i, j| {
        if i == j + 1 {
            Complex::new(T::one() / T::of_usize(j + 1), T::zero())
        } else {
            Complex::new(T::zero(), T::zero())
        }
    });
    Ok(OperatorMatrix::new(mat))
}

/// Apply the shift integral to raw coefficients: `c_k -> c_k / (k+1)` at
/// position `k + 1`, truncated to `n_r` rows.
fn shift_integrate<T: Scalar>(c: &[Complex<T>], n_r: usize) -> CoeffVec<T> {
    let mut out = CoeffVec::zeros(n_r);
    for (k, ck) in c.iter().enumerate() {
        if k + 1 < n_r {
            out.coeffs[k + 1] = ck / T::of_usize(k + 1);
        }
    }
    out
}

/// The decomposition `W_phi = T + X` from the singular value estimate:
/// `T f = phi'(0)^{1/2} f(0) + A M_{(phi')^{3/2}} C_phi D f` (a contraction)
/// and `X = A M_psi C_phi` with `psi = ((phi')^{1/2})'`, so that
/// `s_n(X) <= ||psi||_inf / n`. Requires `phi(0) = 0`.
pub fn build_proof_split<T: Scalar>(
    map: &HoloMap<T>,
    n_c: usize,
    n_r: usize,
    m: usize,
) -> Result<(OperatorMatrix<T>, OperatorMatrix<T>)> {
    let zero = Complex::new(T::zero(), T::zero());
    if map.eval(zero)?.norm() > T::of(1e-10) {
        return Err(Error::Precondition(
            "proof split requires phi(0) = 0 (compose with a Mobius map first)".into(),
        ));
    }
    if n_r < n_c {
        return Err(Error::Config(format!("need tall truncation: n_r = {n_r} < n_c = {n_c}")));
    }
    let grid = BoundaryGrid::new(map, m)?;
    let sqrt0 = map.sqrt_derivative(zero)?;

    // Weight for the T columns: (phi')^{3/2} = phi' * (phi')^{1/2}.
    let w32: Vec<Complex<T>> = grid
        .dphi
        .iter()
        .zip(grid.sqrt_dphi.iter())
        .map(|(d, s)| d * s)
        .collect();
    // T column n (n >= 1): A applied to n (phi')^{3/2} phi^{n-1}.
    let t_samples = weighted_power_samples(&grid, &w32, n_c.saturating_sub(1), 0);
    let t_cols: Result<Vec<CoeffVec<T>>> = t_samples
        .par_iter()
        .enumerate()
        .map(|(idx, s)| {
            let n = idx + 1;
            let scaled: Vec<Complex<T>> = s.iter().map(|v| v * T::of_usize(n)).collect();
            Ok(shift_integrate(&taylor_coeffs(&scaled, n_r - 1)?.coeffs, n_r))
        })
        .collect();
    let mut cols = Vec::with_capacity(n_c);
    let mut col0 = CoeffVec::zeros(n_r);
    col0.coeffs[0] = sqrt0; // rank-one evaluation term, only hits f = z^0
    cols.push(col0);
    cols.extend(t_cols?);
    let t_mat = OperatorMatrix::from_columns(cols, n_r);

    // X column n: A applied to psi * phi^n.
    let psi = grid.psi();
    let x_samples = weighted_power_samples(&grid, &psi, n_c, 0);
    let x_cols: Result<Vec<CoeffVec<T>>> = x_samples
        .par_iter()
        .map(|s| Ok(shift_integrate(&taylor_coeffs(s, n_r - 1)?.coeffs, n_r)))
        .collect();
    let x_mat = OperatorMatrix::from_columns(x_cols?, n_r);
    Ok((t_mat, x_mat))
}

/// Sup norm of `psi = phi'' / (2 (phi')^{1/2})` over the boundary grid
/// (equals the sup over the disk by the maximum principle).
pub fn psi_sup_norm<T: Scalar>(map: &HoloMap<T>, m: usize) -> Result<T> {
    let grid = BoundaryGrid::new(map, m)?;
    Ok(grid
        .psi()
        .iter()
        .map(|p| p.norm())
        .fold(T::zero(), nalgebra::RealField::max))
}

/// Discrepancy `|| W_{phi_1} W_{phi_2} - W_{phi_2 o phi_1} ||` on the
/// leading `n/2` columns, with the composite branch chosen compatibly.
pub fn compose_check<T: Scalar>(
    map1: &HoloMap<T>,
    map2: &HoloMap<T>,
    n: usize,
    n_r: usize,
) -> Result<T> {
    let m = crate::coeffs::default_grid_size(n_r);
    let w1 = build_wco(map1, n_r, n_r, m)?;
    let w2 = build_wco(map2, n, n_r, m)?;
    let composite = map1.then(map2)?;
    let wc = build_wco(&composite, n, n_r, m)?;
    let product = OperatorMatrix::new(&w1.mat * &w2.mat);
    let keep = (n / 2).max(1);
    let diff = product.leading_block(n_r, keep).mat - wc.leading_block(n_r, keep).mat;
    operator_norm(&diff)
}

/// Adjoint action on normalized reproducing kernels:
/// `W^* k_w = conj((phi'(w))^{1/2}) ((1-|w|^2)/(1-|phi(w)|^2))^{1/2} k_{phi(w)}`.
/// Returns the closed-form prediction alongside the matrix-side computation
/// `W^H k_w`, both truncated at order `n`.
pub fn adjoint_kernel_action<T: Scalar>(
    map: &HoloMap<T>,
    w: Complex<T>,
    n: usize,
) -> Result<(CoeffVec<T>, CoeffVec<T>)> {
    if w.norm() >= T::one() {
        return Err(Error::NotInOpenDisk(format!("|w| = {:?}", w.norm().to_f64())));
    }
    let n_r = 4 * n;
    let m = crate::coeffs::default_grid_size(n_r);
    let wmat = build_wco(map, n, n_r, m)?;
    let kw = crate::coeffs::normalized_kernel(w, n_r)?;
    let computed = wmat.adjoint_apply(&kw);

    let phi_w = map.eval(w)?;
    let factor = map.sqrt_derivative(w)?.conj() * Float::sqrt(T::one() - w.norm_sqr());
    let predicted = CoeffVec::new(
        (0..n)
            .map(|j| crate::scalar::cpowu(phi_w.conj(), j) * factor)
            .collect(),
    );
    Ok((predicted, computed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::svd_values;
    use crate::map::Prim;

    type C = Complex<f64>;

    fn c(re: f64, im: f64) -> C {
        Complex::new(re, im)
    }

    fn half_shift() -> HoloMap<f64> {
        HoloMap::new(vec![Prim::Poly(vec![c(0.5, 0.0), c(0.5, 0.0)])], 1)
    }

    fn half_shift_fixed() -> HoloMap<f64> {
        HoloMap::new(
            vec![
                Prim::Poly(vec![c(0.5, 0.0), c(0.5, 0.0)]),
                Prim::Mobius { a: c(0.5, 0.0), theta: 0.0 },
            ],
            1,
        )
    }

    #[test]
    fn wco_scale_is_diagonal() {
        let w = build_wco(&HoloMap::scale(0.5), 8, 16, 1024).unwrap();
        for i in 0..16 {
            for j in 0..8 {
                let expect = if i == j { 0.5_f64.powf(j as f64 + 0.5) } else { 0.0 };
                assert!((w.mat[(i, j)] - c(expect, 0.0)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn wco_identity_is_identity() {
        let w = build_wco(&HoloMap::<f64>::identity(), 8, 16, 1024).unwrap();
        for i in 0..16 {
            for j in 0..8 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((w.mat[(i, j)] - c(expect, 0.0)).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn wco_half_shift_binomial_oracle() {
        // Column n of W for phi = (1+z)/2: 2^{-n-1/2} binom(n, m).
        let w = build_wco(&half_shift(), 8, 32, 1024).unwrap();
        for n in 0..8usize {
            let scale = 0.5_f64.powf(n as f64 + 0.5);
            let mut binom = 1.0_f64;
            for m in 0..32usize {
                let expect = if m <= n { scale * binom } else { 0.0 };
                assert!(
                    (w.mat[(m, n)] - c(expect, 0.0)).norm() < 1e-10,
                    "entry ({m},{n})"
                );
                if m <= n {
                    binom = binom * ((n - m) as f64) / ((m + 1) as f64);
                }
            }
        }
    }

    #[test]
    fn shift_integral_action_and_svals() {
        let a = build_shift_integral::<f64>(3, 4).unwrap();
        let e0 = CoeffVec::basis(0, 3);
        let img = a.apply(&e0);
        assert!((img.coeffs[1] - c(1.0, 0.0)).norm() < 1e-15);
        let s = svd_values(&a.mat).unwrap();
        for (k, expect) in [1.0, 0.5, 1.0 / 3.0].iter().enumerate() {
            assert!((s[k] - expect).abs() < 1e-14);
        }
        // A* A = diag(1, 1/4, 1/9).
        let g = a.gram();
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { 1.0 / ((i + 1) * (i + 1)) as f64 } else { 0.0 };
                assert!((g.mat[(i, j)] - c(expect, 0.0)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn proof_split_scale_has_zero_x() {
        // Constant derivative: psi = 0, so X = 0 and T = W exactly.
        let map = HoloMap::scale(0.5);
        let (t, x) = build_proof_split(&map, 8, 32, 1024).unwrap();
        let w = build_wco(&map, 8, 32, 1024).unwrap();
        assert!(x.mat.norm() < 1e-13);
        assert!((t.mat - w.mat).norm() < 1e-12);
    }

    #[test]
    fn proof_split_reconstructs_wco() {
        let map = half_shift_fixed();
        let n_c = 32;
        let n_r = 4 * n_c;
        let m = 2048;
        let (t, x) = build_proof_split(&map, n_c, n_r, m).unwrap();
        let w = build_wco(&map, n_c, n_r, m).unwrap();
        let keep = n_c / 2;
        let diff = (t.mat + x.mat - w.mat).view((0, 0), (n_r, keep)).into_owned();
        assert!(operator_norm(&diff).unwrap() < 1e-8);
    }

    #[test]
    fn proof_split_requires_fixed_origin() {
        assert!(matches!(
            build_proof_split(&half_shift(), 8, 32, 1024),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn compose_scale_scale() {
        let d = compose_check(&HoloMap::scale(0.5), &HoloMap::scale(0.8), 16, 64).unwrap();
        assert!(d < 1e-13, "discrepancy {d}");
    }

    #[test]
    fn compose_with_identity() {
        let map = half_shift();
        let d = compose_check(&map, &HoloMap::<f64>::identity(), 16, 64).unwrap();
        assert!(d < 1e-12, "discrepancy {d}");
        let d = compose_check(&HoloMap::<f64>::identity(), &map, 16, 64).unwrap();
        assert!(d < 1e-12, "discrepancy {d}");
    }

    #[test]
    fn compose_mobius_mobius() {
        let m1 = HoloMap::new(vec![Prim::Mobius { a: c(0.3, 0.1), theta: 0.2 }], 1);
        let m2 = HoloMap::new(vec![Prim::Mobius { a: c(-0.2, 0.25), theta: -0.7 }], -1);
        let d = compose_check(&m1, &m2, 64, 256).unwrap();
        assert!(d < 1e-8, "discrepancy {d}");
    }

    #[test]
    fn adjoint_kernel_scale_at_origin() {
        let (pred, comp) = adjoint_kernel_action(&HoloMap::scale(0.5), c(0.0, 0.0), 8).unwrap();
        let r = 0.5_f64.sqrt();
        assert!((pred.coeffs[0] - c(r, 0.0)).norm() < 1e-14);
        assert!((comp.coeffs[0] - c(r, 0.0)).norm() < 1e-13);
        assert!(pred.coeffs[1..].iter().all(|z| z.norm() < 1e-14));
    }

    #[test]
    fn adjoint_kernel_unitary_preserves_norm() {
        let map = HoloMap::new(vec![Prim::Mobius { a: c(0.3, 0.0), theta: 0.0 }], 1);
        let (_, comp) = adjoint_kernel_action(&map, c(0.2, -0.4), 48).unwrap();
        assert!((comp.norm() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn adjoint_kernel_near_boundary_half_shift() {
        let map = half_shift();
        let w = c(0.9, 0.0);
        let (pred, comp) = adjoint_kernel_action(&map, w, 64).unwrap();
        let diff_sq: f64 = pred
            .coeffs
            .iter()
            .zip(&comp.coeffs)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum();
        assert!(diff_sq.sqrt() < 1e-8, "coefficient mismatch {}", diff_sq.sqrt());
        // || W* k_w ||^2 = |phi'(w)| (1 - |w|^2) / (1 - |phi(w)|^2), up to
        // the truncation tail of k_{phi(w)} at order n.
        let phi_w = 0.95_f64;
        let full = 0.5 * (1.0 - w.norm_sqr()) / (1.0 - phi_w * phi_w);
        let truncated = full * (1.0 - phi_w.powi(2 * pred.len() as i32));
        assert!((comp.norm_sqr() - truncated).abs() < 1e-6);
    }

    #[test]
    fn lower_bound_first_singular_value() {
        // s_1(W) >= || W 1 || = || column 0 ||.
        let w = build_wco(&half_shift(), 32, 128, 1024).unwrap();
        let s = svd_values(&w.mat).unwrap();
        assert!(s[0] >= w.column(0).norm() - 1e-12);
    }

    #[test]
    fn modulus_squares_to_gram() {
        let w = build_wco(&half_shift(), 8, 32, 1024).unwrap();
        let m = w.modulus().unwrap();
        let diff = (&m.mat * &m.mat) - w.gram().mat;
        assert!(diff.norm() < 1e-10);
    }

    #[test]
    fn binary_round_trip() {
        let w = build_wco(&half_shift(), 4, 8, 1024).unwrap();
        let mut buf = Vec::new();
        w.write_binary(&mut buf).unwrap();
        assert_eq!(&buf[..5], b"HSPM1");
        let back = OperatorMatrix::<f64>::read_binary(&mut buf.as_slice()).unwrap();
        assert_eq!(w, back);
    }

    #[test]
    fn csv_shape() {
        let w = build_shift_integral::<f64>(2, 3).unwrap();
        let mut buf = Vec::new();
        w.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 3);
        assert_eq!(text.lines().next().unwrap().split(',').count(), 4);
    }
}

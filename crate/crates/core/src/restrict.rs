//! Restriction operator view of `|W_phi|`: boundary Gram discretization of
//! `R*R`, its eigenpairs, double orthogonality, the integral-equation
//! bootstrap, argument-principle zero counting, and the semigroup
//! deformation scan.

use nalgebra::DMatrix;
use num_complex::Complex;
use num_traits::Float;
use rayon::prelude::*;

use crate::coeffs::{BoundaryGrid, CoeffVec};
use crate::error::{Error, Result};
use crate::linalg::hermitian_eigen_desc;
use crate::map::HoloMap;
use crate::scalar::{wrap_angle, Scalar};
use crate::spectra::{singular_values, SingularSpectrum, STAB_TOL};
use crate::wco::{build_wco, OperatorMatrix};

/// Most eigenpairs kept per truncation or deformation step.
const MAX_PAIRS: usize = 8;

/// Pairwise (order-deterministic) summation; the reduction tree depends only
/// on the slice length, never on threading.
fn pairwise_sum<T: Scalar>(v: &[Complex<T>]) -> Complex<T> {
    match v.len() {
        0 => Complex::new(T::zero(), T::zero()),
        1 => v[0],
        n => {
            let (a, b) = v.split_at(n / 2);
            pairwise_sum(a) + pairwise_sum(b)
        }
    }
}

/// Gram matrix of the monomials on `partial phi(D)` with arclength/2pi:
/// `G_{m,n} = (1/2pi) int phi^n conj(phi)^m |phi'| d theta`, the truncation
/// of `R*R` to `span{1, ..., z^{N-1}}`. Built as `B^H B` so it is Hermitian
/// PSD by construction.
pub fn gram_matrix<T: Scalar>(map: &HoloMap<T>, n: usize, m: usize) -> Result<OperatorMatrix<T>> {
    if m < 8 * n {
        return Err(Error::Config(format!(
            "gram_matrix needs M >= 8N (got M = {m}, N = {n})"
        )));
    }
    let grid = BoundaryGrid::new(map, m)?;
    let inv_sqrt_m = Float::sqrt(T::one() / T::of_usize(m));
    let mut b = DMatrix::zeros(m, n);
    for j in 0..m {
        let w = Complex::new(Float::sqrt(grid.dphi[j].norm()), T::zero()) * inv_sqrt_m;
        let mut p = w;
        for k in 0..n {
            b[(j, k)] = p;
            p *= grid.phi[j];
        }
    }
    let g = b.adjoint() * &b;
    let defect = (&g - g.adjoint()).norm();
    if defect > T::of(1e-10) {
        return Err(Error::Numerical(format!(
            "Gram matrix Hermiticity defect {:?}",
            defect.to_f64()
        )));
    }
    Ok(OperatorMatrix::new((&g + g.adjoint()) * Complex::new(T::of(0.5), T::zero())))
}

/// Central cross-validation: max relative mismatch between the trusted
/// eigenvalues of the Gram matrix and the squared trusted singular values of
/// the coefficient-side truncation (built with `N_r = 4N`). Compared on the
/// top `min(10, trusted)` indices; deeper indices sit at the absolute
/// rounding floor of the eigensolver and carry no information.
pub fn compare_moduli<T: Scalar>(map: &HoloMap<T>, n: usize, m: usize) -> Result<T> {
    let g = gram_matrix(map, n, m)?;
    let (lams, _) = hermitian_eigen_desc(&g.mat)?;
    // The tall coefficient-side build needs a finer grid than the Gram
    // quadrature when M sits below 4 N_r.
    let m_w = std::cmp::max(m, crate::coeffs::default_grid_size(4 * n));
    let w = build_wco(map, n, 4 * n, m_w)?;
    let spec = singular_values(&w)?;
    let mut worst = T::zero();
    for k in 0..std::cmp::min(10, n) {
        if !spec.trusted(k) {
            break;
        }
        let s2 = spec.values[k] * spec.values[k];
        let rel = Float::abs(lams[k] - s2) / s2;
        worst = nalgebra::RealField::max(worst, rel);
    }
    Ok(worst)
}

/// Eigenvalue of `R*R` with its H2-normalized eigenfunction coefficients.
#[derive(Debug, Clone)]
pub struct EigenPair<T: Scalar> {
    pub lambda: T,
    /// Coefficients in the monomial basis, unit coefficient norm, phase
    /// fixed deterministically.
    pub f: CoeffVec<T>,
    /// Eigenvalue stabilized against the `N/2` truncation of the same Gram.
    pub trusted: bool,
    /// Gap to the nearest neighboring eigenvalue is below 1e-10.
    pub degenerate: bool,
    /// `|| G f - lambda f ||`.
    pub residual: T,
}

/// Eigenpairs of the Gram matrix with `lambda > threshold`, eigenvalues
/// descending, at most [`MAX_PAIRS`] of them. Stabilization is checked
/// against the leading `N/2` block, which is exactly the order-`N/2`
/// truncation of the same operator.
pub fn top_eigenpairs<T: Scalar>(
    g: &OperatorMatrix<T>,
    threshold: T,
) -> Result<Vec<EigenPair<T>>> {
    let n = g.n_rows();
    if g.n_cols() != n || n == 0 {
        return Err(Error::Size("Gram matrix must be square and non-empty".into()));
    }
    let (vals, vecs) = hermitian_eigen_desc(&g.mat)?;
    let half = if n >= 2 {
        hermitian_eigen_desc(&g.leading_block(n / 2, n / 2).mat)?.0
    } else {
        Vec::new()
    };
    let mut out = Vec::new();
    for k in 0..n {
        let lam = vals[k];
        if lam <= threshold || out.len() >= MAX_PAIRS {
            break;
        }
        let mut f = CoeffVec::new(vecs.column(k).iter().copied().collect());
        let norm = f.norm();
        if norm > T::zero() {
            let inv = Complex::new(T::one() / norm, T::zero());
            for c in f.coeffs.iter_mut() {
                *c *= inv;
            }
        }
        f.fix_phase();
        let fv = DMatrix::from_column_slice(n, 1, &f.coeffs);
        let residual = (&g.mat * &fv - &fv * Complex::new(lam, T::zero())).norm();
        let stab = match half.get(k) {
            Some(h) => Float::abs(lam - *h),
            None => T::infinity(),
        };
        let trusted = k < n / 2 && stab < T::of(STAB_TOL);
        let mut gap = T::infinity();
        if k > 0 {
            gap = nalgebra::RealField::min(gap, Float::abs(vals[k - 1] - lam));
        }
        if k + 1 < n {
            gap = nalgebra::RealField::min(gap, Float::abs(lam - vals[k + 1]));
        }
        let degenerate = gap < T::of(1e-10);
        out.push(EigenPair { lambda: lam, f, trusted, degenerate, residual });
    }
    Ok(out)
}

/// Boundary-quadrature inner product over `partial phi(D)`:
/// `(1/m) sum f(phi_j) conj(g(phi_j)) |phi'_j|`, pairwise-summed.
fn inner_image<T: Scalar>(
    f: &CoeffVec<T>,
    g: &CoeffVec<T>,
    grid: &BoundaryGrid<T>,
) -> Complex<T> {
    let terms: Vec<Complex<T>> = (0..grid.m)
        .map(|j| {
            f.eval(grid.phi[j])
                * g.eval(grid.phi[j]).conj()
                * Complex::new(grid.dphi[j].norm(), T::zero())
        })
        .collect();
    pairwise_sum(&terms) / T::of_usize(grid.m)
}

/// Double orthogonality residuals of a family of eigenpairs:
/// `resV` is the worst deviation of the coefficient inner products from
/// `delta_{nk}`; `resU` is the worst deviation of the image-boundary inner
/// products from `lambda_n delta_{nk}`.
pub fn double_orthogonality<T: Scalar>(
    pairs: &[EigenPair<T>],
    map: &HoloMap<T>,
    m: usize,
) -> Result<(T, T)> {
    let grid = BoundaryGrid::new(map, m)?;
    let mut res_v = T::zero();
    let mut res_u = T::zero();
    for (a, pa) in pairs.iter().enumerate() {
        for (b, pb) in pairs.iter().enumerate() {
            let delta = if a == b { T::one() } else { T::zero() };
            let v = pa.f.inner(&pb.f);
            res_v = nalgebra::RealField::max(res_v, (v - Complex::new(delta, T::zero())).norm());
            let u = inner_image(&pa.f, &pb.f, &grid);
            let target = Complex::new(pa.lambda * delta, T::zero());
            res_u = nalgebra::RealField::max(res_u, (u - target).norm());
        }
    }
    Ok((res_v, res_u))
}

/// Evaluate an eigenfunction two independent ways: direct polynomial
/// evaluation of its coefficients, and the integral-equation bootstrap
/// `f(z) = lambda^{-1} (1/m) sum f(phi_j) |phi'_j| / (1 - z conj(phi_j))`.
///
/// The bootstrap converges wherever `z` stays clear of the image boundary,
/// including across the free boundary arc.
pub fn eval_eigenfunction<T: Scalar>(
    pair: &EigenPair<T>,
    z: Complex<T>,
    map: &HoloMap<T>,
    m: usize,
) -> Result<(Complex<T>, Complex<T>)> {
    let grid = BoundaryGrid::new(map, m)?;
    let spacing = T::of(2.0) * T::PI() / T::of_usize(m);
    let one = Complex::new(T::one(), T::zero());
    let mut terms = Vec::with_capacity(m);
    for j in 0..m {
        if (z - grid.phi[j]).norm() < spacing {
            return Err(Error::Numerical(
                "evaluation point within node spacing of the image boundary".into(),
            ));
        }
        let denom = one - z * grid.phi[j].conj();
        terms.push(
            pair.f.eval(grid.phi[j]) * Complex::new(grid.dphi[j].norm(), T::zero()) / denom,
        );
    }
    let bootstrap = pairwise_sum(&terms) / (T::of_usize(m) * pair.lambda);
    Ok((pair.f.eval(z), bootstrap))
}

/// Zero count of a polynomial inside `|z| < radius` by the argument
/// principle on the circle.
#[derive(Debug, Clone)]
pub struct ZeroCount<T: Scalar> {
    pub count: usize,
    /// Radius actually used (may differ from the request after retries).
    pub radius: T,
    /// Distance of the raw winding integral from the nearest integer.
    pub winding_residual: T,
}

/// Count zeros of `f` in `|z| < radius` by the winding number of the image
/// of the circle, on a trapezoidal grid. If the minimum modulus on the grid
/// falls below 1e-8 the radius is perturbed inward, up to 5 retries. A
/// winding residual of 0.1 or more rejects the count.
pub fn count_zeros<T: Scalar>(f: &CoeffVec<T>, radius: T) -> Result<ZeroCount<T>> {
    if radius <= T::zero() || radius >= T::one() {
        return Err(Error::Config("zero-count radius must lie in (0, 1)".into()));
    }
    let m = std::cmp::max(1024, 64 * f.len()).next_power_of_two();
    for attempt in 0..=5 {
        let r = radius * (T::one() - T::of(2e-3) * T::of_usize(attempt));
        let mut vals = Vec::with_capacity(m);
        let mut min_mod = T::infinity();
        for j in 0..m {
            let theta = T::of(2.0) * T::PI() * T::of_usize(j) / T::of_usize(m);
            let v = f.eval(Complex::from_polar(r, theta));
            min_mod = nalgebra::RealField::min(min_mod, v.norm());
            vals.push(v);
        }
        if min_mod < T::of(1e-8) {
            continue;
        }
        let mut winding = T::zero();
        for j in 0..m {
            let a = vals[j];
            let b = vals[(j + 1) % m];
            winding += wrap_angle((b / a).arg());
        }
        let raw = winding / (T::of(2.0) * T::PI());
        let rounded = Float::round(raw);
        let winding_residual = Float::abs(raw - rounded);
        if winding_residual >= T::of(0.1) {
            return Err(Error::Numerical(format!(
                "winding integral {:?} too far from an integer",
                raw.to_f64()
            )));
        }
        let count = rounded.to_f64().unwrap() as i64;
        if count < 0 {
            return Err(Error::Numerical("negative winding number".into()));
        }
        return Ok(ZeroCount { count: count as usize, radius: r, winding_residual });
    }
    Err(Error::Numerical(
        "no admissible contour after 5 radius perturbations".into(),
    ))
}

/// One step of the deformation scan at parameter `t`.
#[derive(Debug, Clone)]
pub struct DeformationRow<T: Scalar> {
    pub t: T,
    pub spectrum: SingularSpectrum<T>,
    pub pairs: Vec<EigenPair<T>>,
    /// Zero count inside `|z| < 1 - 1e-3` for each pair; `None` when the
    /// pair is untrusted or the contour search failed.
    pub zero_counts: Vec<Option<usize>>,
}

/// Outcome of [`semigroup_deformation`].
#[derive(Debug, Clone)]
pub struct DeformationTable<T: Scalar> {
    pub rows: Vec<DeformationRow<T>>,
    /// Trusted `s_n` non-decreasing in `t` for each fixed `n` (slack 1e-8).
    pub monotone_ok: bool,
    /// For `t < 1`, trusted eigenfunction `n` has exactly `n` zeros.
    pub compact_counts_ok: bool,
    /// At `t = 1`, trusted eigenfunction `n` has at most `n` zeros.
    pub contact_counts_ok: bool,
}

/// Interior eigenvalue floor used for `t < 1`, where the deformed spectrum
/// is compact-like and sits below 1.
const INTERIOR_FLOOR: f64 = 1e-6;

/// Scan the deformation family `phi_t(z) = phi(t z)` over an increasing
/// `t_grid` ending at 1. Each step records the trusted singular values of
/// `W_{phi_t}`, the top Gram eigenpairs (threshold `threshold` at `t = 1`,
/// a small interior floor for `t < 1`), and the zero counts of the trusted
/// eigenfunctions at radius `1 - 1e-3`. Steps are independent and run in
/// parallel.
pub fn semigroup_deformation<T: Scalar>(
    map: &HoloMap<T>,
    t_grid: &[T],
    n: usize,
    m: usize,
    threshold: T,
) -> Result<DeformationTable<T>> {
    if t_grid.is_empty() {
        return Err(Error::Config("t_grid must be non-empty".into()));
    }
    for w in t_grid.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::Config("t_grid must be strictly increasing".into()));
        }
    }
    let last = *t_grid.last().unwrap();
    if t_grid[0] <= T::zero() || Float::abs(last - T::one()) > T::of(1e-12) {
        return Err(Error::Config("t_grid must lie in (0, 1] and end at 1".into()));
    }
    let rows: Result<Vec<DeformationRow<T>>> = t_grid
        .par_iter()
        .map(|&t| {
            let map_t = HoloMap::scale(t).then(map)?;
            let w = build_wco(&map_t, n, 4 * n, m)?;
            let spectrum = singular_values(&w)?;
            let g = gram_matrix(&map_t, n, m)?;
            let eff = if t < T::one() { T::of(INTERIOR_FLOOR) } else { threshold };
            let pairs = top_eigenpairs(&g, eff)?;
            let radius = T::one() - T::of(1e-3);
            let zero_counts = pairs
                .iter()
                .map(|p| {
                    if !p.trusted {
                        return None;
                    }
                    count_zeros(&p.f, radius).ok().map(|zc| zc.count)
                })
                .collect();
            Ok(DeformationRow { t, spectrum, pairs, zero_counts })
        })
        .collect();
    let rows = rows?;
    let mut monotone_ok = true;
    for pair in rows.windows(2) {
        let (lo, hi) = (&pair[0], &pair[1]);
        let upto = std::cmp::min(lo.spectrum.values.len(), hi.spectrum.values.len());
        for k in 0..upto {
            if lo.spectrum.trusted(k) && hi.spectrum.trusted(k) {
                if lo.spectrum.values[k] > hi.spectrum.values[k] + T::of(1e-8) {
                    monotone_ok = false;
                }
            }
        }
    }
    let mut compact_counts_ok = true;
    let mut contact_counts_ok = true;
    for row in &rows {
        let at_one = Float::abs(row.t - T::one()) <= T::of(1e-12);
        for (k, count) in row.zero_counts.iter().enumerate() {
            let Some(c) = count else { continue };
            if at_one {
                if *c > k {
                    contact_counts_ok = false;
                }
            } else if *c != k {
                compact_counts_ok = false;
            }
        }
    }
    Ok(DeformationTable { rows, monotone_ok, compact_counts_ok, contact_counts_ok })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffs::normalized_kernel;
    use crate::map::Prim;

    type C = Complex<f64>;

    fn c(re: f64, im: f64) -> C {
        Complex::new(re, im)
    }

    #[test]
    fn gram_of_scale_is_diagonal() {
        for &r in &[0.25, 0.5, 0.8] {
            let g = gram_matrix(&HoloMap::scale(r), 16, 256).unwrap();
            for i in 0..16 {
                for j in 0..16 {
                    let want = if i == j { r.powi(2 * i as i32 + 1) } else { 0.0 };
                    assert!(
                        (g.mat[(i, j)] - c(want, 0.0)).norm() < 1e-12,
                        "r = {r}, entry ({i},{j})"
                    );
                }
            }
        }
    }

    #[test]
    fn gram_of_identity_is_identity() {
        let g = gram_matrix(&HoloMap::<f64>::identity(), 8, 128).unwrap();
        for i in 0..8 {
            for j in 0..8 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((g.mat[(i, j)] - c(want, 0.0)).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn gram_rejects_coarse_grid() {
        assert!(matches!(
            gram_matrix(&HoloMap::<f64>::identity(), 32, 128),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn compare_moduli_scale() {
        let worst = compare_moduli(&HoloMap::scale(0.5), 32, 512).unwrap();
        assert!(worst <= 1e-10, "got {worst}");
    }

    #[test]
    fn compare_moduli_mobius() {
        let map = HoloMap::new(vec![Prim::Mobius { a: c(0.3, 0.1), theta: 0.4 }], 1);
        let worst = compare_moduli(&map, 32, 512).unwrap();
        assert!(worst <= 1e-6, "got {worst}");
    }

    #[test]
    fn eigenpairs_of_scale_are_monomials() {
        let r = 0.5_f64;
        let g = gram_matrix(&HoloMap::scale(r), 16, 256).unwrap();
        let pairs = top_eigenpairs(&g, 0.0).unwrap();
        assert_eq!(pairs.len(), MAX_PAIRS);
        for (n, p) in pairs.iter().enumerate() {
            assert!((p.lambda - r.powi(2 * n as i32 + 1)).abs() < 1e-12);
            assert!(p.residual <= 1e-8);
            assert!(p.trusted);
            assert!(!p.degenerate);
            // Eigenvector is e_n up to the fixed phase.
            assert!((p.f.coeffs[n] - c(1.0, 0.0)).norm() < 1e-10);
            assert!((p.f.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn eigenpairs_of_mobius_above_essential_spectrum_are_empty() {
        let map = HoloMap::new(vec![Prim::Mobius { a: c(0.3, 0.0), theta: 0.0 }], 1);
        let g = gram_matrix(&map, 32, 512).unwrap();
        let pairs = top_eigenpairs(&g, 1.0 + 1e-3).unwrap();
        assert!(pairs.is_empty());
    }

    #[test]
    fn double_orthogonality_of_scale() {
        let r = 0.5_f64;
        let map = HoloMap::scale(r);
        let g = gram_matrix(&map, 16, 256).unwrap();
        let pairs = top_eigenpairs(&g, 0.0).unwrap();
        let (res_v, res_u) = double_orthogonality(&pairs, &map, 256).unwrap();
        assert!(res_v <= 1e-12, "resV = {res_v}");
        assert!(res_u <= 1e-12, "resU = {res_u}");
    }

    #[test]
    fn bootstrap_matches_direct_for_scale() {
        let r = 0.5_f64;
        let map = HoloMap::scale(r);
        let g = gram_matrix(&map, 8, 128).unwrap();
        let pairs = top_eigenpairs(&g, 0.0).unwrap();
        // Constant eigenfunction at z = 0.3: both sides 1.
        let (direct, boot) = eval_eigenfunction(&pairs[0], c(0.3, 0.0), &map, 1024).unwrap();
        assert!((direct - c(1.0, 0.0)).norm() < 1e-12);
        assert!((direct - boot).norm() < 1e-10);
        // z^1 eigenfunction, a complex test point.
        let z = c(0.3, -0.2);
        let (direct, boot) = eval_eigenfunction(&pairs[1], z, &map, 1024).unwrap();
        assert!((direct - z).norm() < 1e-10);
        assert!((direct - boot).norm() < 1e-10);
    }

    #[test]
    fn bootstrap_rejects_points_on_image_boundary() {
        let map = HoloMap::scale(0.5);
        let g = gram_matrix(&map, 8, 128).unwrap();
        let pairs = top_eigenpairs(&g, 0.0).unwrap();
        assert!(matches!(
            eval_eigenfunction(&pairs[0], c(0.5, 0.0), &map, 1024),
            Err(Error::Numerical(_))
        ));
    }

    #[test]
    fn count_zeros_examples() {
        let f = CoeffVec::<f64>::basis(3, 4);
        assert_eq!(count_zeros(&f, 0.9).unwrap().count, 3);
        let k = normalized_kernel(c(0.5, 0.0), 32).unwrap();
        assert_eq!(count_zeros(&k, 0.9).unwrap().count, 0);
        // (z - 0.5)(z + 0.5i) = z^2 + (0.5i - 0.5)z - 0.25i.
        let f = CoeffVec::new(vec![c(0.0, -0.25), c(-0.5, 0.5), c(1.0, 0.0)]);
        assert_eq!(count_zeros(&f, 0.9).unwrap().count, 2);
    }

    #[test]
    fn count_zeros_retries_past_a_root_on_the_contour() {
        // Root exactly on the requested circle: retries shrink the radius,
        // leaving the root outside.
        let f = CoeffVec::new(vec![c(-0.9, 0.0), c(1.0, 0.0)]);
        let zc = count_zeros(&f, 0.9).unwrap();
        assert_eq!(zc.count, 0);
        assert!(zc.radius < 0.9);
        assert!(zc.winding_residual < 0.1);
    }

    #[test]
    fn count_zeros_rejects_bad_radius() {
        let f = CoeffVec::<f64>::basis(1, 2);
        assert!(count_zeros(&f, 1.0).is_err());
    }

    #[test]
    fn deformation_of_identity_is_the_diagonal_oracle() {
        let table = semigroup_deformation(
            &HoloMap::<f64>::identity(),
            &[0.5, 0.8, 1.0],
            16,
            256,
            1.0 + 1e-3,
        )
        .unwrap();
        assert!(table.monotone_ok);
        assert!(table.compact_counts_ok);
        assert!(table.contact_counts_ok);
        for row in &table.rows {
            if row.t < 1.0 {
                for (n, p) in row.pairs.iter().enumerate() {
                    assert!((p.lambda - row.t.powi(2 * n as i32 + 1)).abs() < 1e-10);
                    if p.trusted {
                        assert_eq!(row.zero_counts[n], Some(n));
                    }
                }
            } else {
                // Identity at t = 1 is unitary: nothing above 1 + 1e-3.
                assert!(row.pairs.is_empty());
            }
        }
    }

    #[test]
    fn deformation_of_scale_is_monotone_with_diagonal_values() {
        let table = semigroup_deformation(
            &HoloMap::scale(0.8),
            &[0.5, 0.9, 1.0],
            12,
            512,
            1.0 + 1e-3,
        )
        .unwrap();
        assert!(table.monotone_ok);
        for row in &table.rows {
            let rt = 0.8 * row.t;
            for (k, s) in row.spectrum.values.iter().enumerate().take(6) {
                assert!((s - rt.powf(k as f64 + 0.5)).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn deformation_rejects_bad_grid() {
        assert!(semigroup_deformation(&HoloMap::<f64>::identity(), &[0.9, 0.5, 1.0], 8, 128, 1.001).is_err());
        assert!(semigroup_deformation(&HoloMap::<f64>::identity(), &[0.5, 0.9], 8, 128, 1.001).is_err());
    }

    #[test]
    fn pairwise_sum_matches_sequential() {
        let v: Vec<C> = (0..37).map(|k| c(k as f64 * 0.1, -(k as f64) * 0.05)).collect();
        let seq: C = v.iter().sum();
        assert!((pairwise_sum(&v) - seq).norm() < 1e-12);
    }
}

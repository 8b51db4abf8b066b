//! Truncated Taylor coefficient sequences, boundary sampling grids,
//! FFT coefficient extraction, and the Szego reproducing kernel.

use num_complex::Complex;
use num_traits::Float;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::map::HoloMap;
use crate::scalar::{cpowu, Scalar};

/// Truncated Taylor coefficient sequence of a function in `H^2(D)`.
///
/// `coeffs[n]` is the coefficient of `z^n`; the `H^2` norm is the Euclidean
/// norm of the coefficients (normalized arclength convention on the circle).
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffVec<T: Scalar> {
    pub coeffs: Vec<Complex<T>>,
}

impl<T: Scalar> CoeffVec<T> {
    pub fn new(coeffs: Vec<Complex<T>>) -> Self {
        CoeffVec { coeffs }
    }

    pub fn zeros(n: usize) -> Self {
        CoeffVec { coeffs: vec![Complex::new(T::zero(), T::zero()); n] }
    }

    /// Unit vector `e_k` of length `n`.
    pub fn basis(k: usize, n: usize) -> Self {
        let mut v = Self::zeros(n);
        v.coeffs[k] = Complex::new(T::one(), T::zero());
        v
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn norm_sqr(&self) -> T {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn norm(&self) -> T {
        Float::sqrt(self.norm_sqr())
    }

    /// `<self, other> = sum a_n conj(b_n)`.
    pub fn inner(&self, other: &Self) -> Complex<T> {
        self.coeffs
            .iter()
            .zip(other.coeffs.iter())
            .map(|(a, b)| a * b.conj())
            .sum()
    }

    /// Horner evaluation of the polynomial at `z`.
    pub fn eval(&self, z: Complex<T>) -> Complex<T> {
        let mut acc = Complex::new(T::zero(), T::zero());
        for c in self.coeffs.iter().rev() {
            acc = acc * z + *c;
        }
        acc
    }

    /// Coefficients of the derivative (one entry shorter).
    pub fn derivative(&self) -> CoeffVec<T> {
        if self.coeffs.len() <= 1 {
            return CoeffVec::zeros(0);
        }
        CoeffVec::new(
            self.coeffs[1..]
                .iter()
                .enumerate()
                .map(|(k, c)| c * T::of_usize(k + 1))
                .collect(),
        )
    }

    /// Rescale so the largest-modulus coefficient is positive real.
    /// Used to fix the phase of eigenvectors deterministically.
    pub fn fix_phase(&mut self) {
        let mut best = Complex::new(T::zero(), T::zero());
        for c in &self.coeffs {
            if c.norm() > best.norm() {
                best = *c;
            }
        }
        if best.norm() > T::zero() {
            let rot = best.conj() / best.norm();
            for c in self.coeffs.iter_mut() {
                *c *= rot;
            }
        }
    }
}

/// Extract the first `n` Taylor coefficients of a smooth function on the
/// closed disk from its `m` equispaced boundary samples, by forward DFT.
///
/// The aliasing error is bounded by the coefficient tail beyond `m - n`;
/// the grid must satisfy `m >= 4 n`.
pub fn taylor_coeffs<T: Scalar>(samples: &[Complex<T>], n: usize) -> Result<CoeffVec<T>> {
    let m = samples.len();
    if m < 4 * n {
        return Err(Error::Config(format!(
            "grid of {m} samples is too coarse for order {n} (need m >= 4n)"
        )));
    }
    let mut buf = samples.to_vec();
    FftPlanner::<T>::new().plan_fft_forward(m).process(&mut buf);
    let scale = T::one() / T::of_usize(m);
    Ok(CoeffVec::new(buf[..n].iter().map(|c| c * scale).collect()))
}

/// Equispaced boundary quadrature grid with the map data sampled on it.
#[derive(Debug, Clone)]
pub struct BoundaryGrid<T: Scalar> {
    pub m: usize,
    /// Nodes `e^{i theta_j}`, `theta_j = 2 pi j / m`.
    pub nodes: Vec<Complex<T>>,
    /// `phi(e^{i theta_j})`.
    pub phi: Vec<Complex<T>>,
    /// `phi'(e^{i theta_j})`.
    pub dphi: Vec<Complex<T>>,
    /// `phi''(e^{i theta_j})`.
    pub ddphi: Vec<Complex<T>>,
    /// Branch-tracked `(phi')^{1/2}(e^{i theta_j})`.
    pub sqrt_dphi: Vec<Complex<T>>,
}

impl<T: Scalar> BoundaryGrid<T> {
    /// Sample `map` on `m` equispaced boundary nodes. `m` must be a power
    /// of two (anti-aliasing bookkeeping assumes it).
    pub fn new(map: &HoloMap<T>, m: usize) -> Result<Self> {
        if m < 4 || !m.is_power_of_two() {
            return Err(Error::Config(format!("grid size {m} must be a power of two >= 4")));
        }
        let mut nodes = Vec::with_capacity(m);
        let mut phi = Vec::with_capacity(m);
        let mut dphi = Vec::with_capacity(m);
        let mut ddphi = Vec::with_capacity(m);
        let mut sqrt_dphi = Vec::with_capacity(m);
        for j in 0..m {
            let theta = T::of(2.0) * T::PI() * T::of_usize(j) / T::of_usize(m);
            let z = Complex::from_polar(T::one(), theta);
            let jet = map.jet(z)?;
            nodes.push(z);
            phi.push(jet.v);
            dphi.push(jet.d1);
            ddphi.push(jet.d2);
            sqrt_dphi.push(map.sqrt_derivative(z)?);
        }
        Ok(BoundaryGrid { m, nodes, phi, dphi, ddphi, sqrt_dphi })
    }

    /// `psi = phi'' / (2 (phi')^{1/2})` on the grid.
    pub fn psi(&self) -> Vec<Complex<T>> {
        self.ddphi
            .iter()
            .zip(self.sqrt_dphi.iter())
            .map(|(dd, s)| dd / (s * T::of(2.0)))
            .collect()
    }
}

/// Default grid size for coefficient extraction at order `n`.
pub fn default_grid_size(n: usize) -> usize {
    std::cmp::max(1024, (8 * n).next_power_of_two())
}

/// Szego kernel of the disk, `K(z, w) = 1 / (1 - z conj(w))`, for `|w| < 1`.
pub fn kernel<T: Scalar>(z: Complex<T>, w: Complex<T>) -> Result<Complex<T>> {
    if w.norm() >= T::one() {
        return Err(Error::NotInOpenDisk(format!("|w| = {:?}", w.norm().to_f64())));
    }
    let one = Complex::new(T::one(), T::zero());
    Ok(one / (one - z * w.conj()))
}

/// Coefficients of the normalized reproducing kernel
/// `k_w(z) = (1 - |w|^2)^{1/2} / (1 - conj(w) z)`, truncated at order `n`:
/// coefficient `j` is `(1 - |w|^2)^{1/2} conj(w)^j`.
pub fn normalized_kernel<T: Scalar>(w: Complex<T>, n: usize) -> Result<CoeffVec<T>> {
    if w.norm() >= T::one() {
        return Err(Error::NotInOpenDisk(format!("|w| = {:?}", w.norm().to_f64())));
    }
    let amp = Float::sqrt(T::one() - w.norm_sqr());
    Ok(CoeffVec::new(
        (0..n).map(|j| cpowu(w.conj(), j) * amp).collect(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map::Prim;

    type C = Complex<f64>;

    fn c(re: f64, im: f64) -> C {
        Complex::new(re, im)
    }

    #[test]
    fn taylor_exact_on_trig_polynomial() {
        // f(e^{i theta}) = e^{3 i theta} -> e_3.
        let m = 32;
        let samples: Vec<C> = (0..m)
            .map(|j| Complex::from_polar(1.0, 3.0 * std::f64::consts::TAU * (j as f64) / (m as f64)))
            .collect();
        let cv = taylor_coeffs(&samples, 8).unwrap();
        for (k, coeff) in cv.coeffs.iter().enumerate() {
            let expect = if k == 3 { 1.0 } else { 0.0 };
            assert!((coeff - c(expect, 0.0)).norm() < 1e-13);
        }
    }

    #[test]
    fn taylor_constant() {
        let samples = vec![c(1.0, 0.0); 16];
        let cv = taylor_coeffs(&samples, 4).unwrap();
        assert!((cv.coeffs[0] - c(1.0, 0.0)).norm() < 1e-14);
        assert!(cv.coeffs[1..].iter().all(|x| x.norm() < 1e-14));
    }

    #[test]
    fn taylor_binomial_square() {
        // ((1 + z)/2)^2 = 1/4 + z/2 + z^2/4.
        let m = 64;
        let samples: Vec<C> = (0..m)
            .map(|j| {
                let z = Complex::from_polar(1.0, std::f64::consts::TAU * (j as f64) / (m as f64));
                let w = (z + c(1.0, 0.0)) * c(0.5, 0.0);
                w * w
            })
            .collect();
        let cv = taylor_coeffs(&samples, 4).unwrap();
        let expect = [0.25, 0.5, 0.25, 0.0];
        for (k, e) in expect.iter().enumerate() {
            assert!((cv.coeffs[k] - c(*e, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn taylor_rejects_coarse_grid() {
        let samples = vec![c(1.0, 0.0); 16];
        assert!(matches!(taylor_coeffs(&samples, 5), Err(Error::Config(_))));
    }

    #[test]
    fn grid_requires_power_of_two() {
        let map = HoloMap::scale(0.5);
        assert!(BoundaryGrid::new(&map, 100).is_err());
        assert!(BoundaryGrid::new(&map, 128).is_ok());
    }

    #[test]
    fn kernel_at_origin_is_one() {
        assert!((kernel(c(0.3, 0.4), c(0.0, 0.0)).unwrap() - c(1.0, 0.0)).norm() < 1e-15);
        assert!(kernel(c(0.0, 0.0), c(1.0, 0.0)).is_err());
    }

    #[test]
    fn normalized_kernel_unit_norm() {
        // Tail deficit is (1 - |w|^2) sum_{n >= N} |w|^{2n} = |w|^{2N}: ~3e-39 here.
        let k = normalized_kernel(c(0.5, 0.0), 64).unwrap();
        assert!((k.norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn reproducing_property() {
        // <f, K_w> = f(w) for polynomials, with K_w coefficients conj(w)^n.
        let f = CoeffVec::new(vec![c(1.0, 0.5), c(-0.3, 0.2), c(0.0, 0.7), c(0.25, 0.0)]);
        let w = c(0.4, -0.3);
        let kw = CoeffVec::new((0..16).map(|j| cpowu(w.conj(), j)).collect());
        let mut fpad = f.clone();
        fpad.coeffs.resize(16, c(0.0, 0.0));
        assert!((fpad.inner(&kw) - f.eval(w)).norm() < 1e-14);
    }

    #[test]
    fn grid_sqrt_consistency_on_corpus_map() {
        let map = HoloMap::new(
            vec![Prim::Poly(vec![c(0.0, 0.0), c(1.0 / 1.4, 0.0), c(0.4 / 1.4, 0.0)])],
            1,
        );
        let grid = BoundaryGrid::new(&map, 256).unwrap();
        for j in 0..grid.m {
            let s = grid.sqrt_dphi[j];
            assert!((s * s - grid.dphi[j]).norm() < 1e-12);
        }
    }
}

//! Singular value spectra, essential-norm estimation, the K-constant fit,
//! and the pointwise estimates backing the singular value theorem.

use num_complex::Complex;
use num_traits::Float;

use crate::coeffs::default_grid_size;
use crate::error::{Error, Result};
use crate::linalg::svd_values;
use crate::map::{boundary_peak, HoloMap};
use crate::scalar::Scalar;
use crate::wco::{build_wco, OperatorMatrix};

/// Stabilization threshold below which a singular value is "trusted".
pub const STAB_TOL: f64 = 1e-6;

/// Sorted singular values of a truncation, with per-index stabilization
/// deltas against the half-size truncation.
#[derive(Debug, Clone)]
pub struct SingularSpectrum<T: Scalar> {
    /// Descending, all non-negative.
    pub values: Vec<T>,
    pub n_c: usize,
    pub n_r: usize,
    /// `|s_k - s_k(half truncation)|`; infinity where the half truncation
    /// has no value `k`.
    pub stab: Vec<T>,
}

impl<T: Scalar> SingularSpectrum<T> {
    /// Index `k` (0-based) is trusted when it lies in the leading half of
    /// the columns and its stabilization delta is below `STAB_TOL`.
    pub fn trusted(&self, k: usize) -> bool {
        k < self.n_c / 2 && self.stab[k] < T::of(STAB_TOL)
    }

    /// Trusted `(one_based_index, value)` pairs in order.
    pub fn trusted_values(&self) -> Vec<(usize, T)> {
        (0..self.values.len())
            .filter(|&k| self.trusted(k))
            .map(|k| (k + 1, self.values[k]))
            .collect()
    }
}

/// Full SVD spectrum of a truncation, with stabilization deltas computed by
/// re-running on the leading `(n_r/2, n_c/2)` block.
pub fn singular_values<T: Scalar>(m: &OperatorMatrix<T>) -> Result<SingularSpectrum<T>> {
    let (n_r, n_c) = (m.n_rows(), m.n_cols());
    let values = svd_values(&m.mat)?;
    let half = if n_r / 2 >= 1 && n_c / 2 >= 1 {
        svd_values(&m.leading_block(n_r / 2, n_c / 2).mat)?
    } else {
        Vec::new()
    };
    let stab = values
        .iter()
        .enumerate()
        .map(|(k, s)| match half.get(k) {
            Some(h) => Float::abs(*s - *h),
            None => T::infinity(),
        })
        .collect();
    Ok(SingularSpectrum { values, n_c, n_r, stab })
}

/// One row of the essential-norm extrapolation profile.
#[derive(Debug, Clone)]
pub struct EssentialNormProfileRow<T: Scalar> {
    pub n: usize,
    /// Probe index `n/4` (1-based).
    pub index: usize,
    /// `s_{n/4}` of the `(n, 4n)` truncation.
    pub value: T,
}

#[derive(Debug, Clone)]
pub struct EssentialNormEstimate<T: Scalar> {
    pub estimate: T,
    pub profile: Vec<EssentialNormProfileRow<T>>,
    /// False when the probe sequence did not stabilize monotonically.
    pub converged: bool,
}

/// Fixed probe index (1-based) for the essential-norm extrapolation.
const PROBE_INDEX: usize = 8;

/// Estimate the essential norm from the finite sections `(N, 4N)` over an
/// increasing list of orders.
///
/// The estimate extrapolates `s_8` geometrically in `N`: finite sections
/// increase toward the infinite-dimensional `s_8`, which is within `K/8` of
/// the essential norm in the contact case and already negligible in the
/// non-contact case. The raw extrapolation is clamped by the largest
/// observed `s_1`, since `s_8 <= s_1 <= ||W||` at every truncation. The
/// returned profile additionally records `s_{N/4}` per order for plotting;
/// that growing-index diagnostic separates finite-rank tails but converges
/// far too slowly in `N` to serve as the estimate itself.
pub fn essential_norm_estimate<T: Scalar>(
    map: &HoloMap<T>,
    n_list: &[usize],
) -> Result<EssentialNormEstimate<T>> {
    if n_list.len() < 3 || n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Config(
            "essential norm estimate needs at least 3 strictly increasing orders".into(),
        ));
    }
    let mut profile = Vec::with_capacity(n_list.len());
    let mut probe = Vec::with_capacity(n_list.len());
    let mut top = T::zero();
    for &n in n_list {
        if n < 2 * PROBE_INDEX {
            return Err(Error::Config(format!(
                "orders must be at least {}",
                2 * PROBE_INDEX
            )));
        }
        let n_r = 4 * n;
        let w = build_wco(map, n, n_r, default_grid_size(n_r))?;
        let spec = singular_values(&w)?;
        let index = n / 4;
        profile.push(EssentialNormProfileRow { n, index, value: spec.values[index - 1] });
        probe.push(spec.values[PROBE_INDEX - 1]);
        top = nalgebra::RealField::max(top, spec.values[0]);
    }
    let k = probe.len();
    let last = probe[k - 1];
    let d1 = probe[k - 2] - probe[k - 3];
    let d2 = probe[k - 1] - probe[k - 2];
    let tiny = T::of(1e-9);
    let (mut estimate, converged) = if Float::abs(d2) < tiny {
        (last, true)
    } else if Float::abs(d1) > T::zero() && Float::abs(d2) < Float::abs(d1) && d1 * d2 > T::zero() {
        // Geometric extrapolation of the remaining tail.
        let rho = d2 / d1;
        (last + d2 * rho / (T::one() - rho), true)
    } else {
        (last, false)
    };
    estimate = nalgebra::RealField::min(estimate, top);
    estimate = nalgebra::RealField::max(estimate, T::zero());
    Ok(EssentialNormEstimate { estimate, profile, converged })
}

/// Empirical K-constant: `max over trusted n >= 4 of n (s_n - 1)`, clamped
/// at zero. The theorem predicts this stays bounded as the truncation grows.
pub fn fit_k<T: Scalar>(spec: &SingularSpectrum<T>) -> T {
    let mut k_hat = T::zero();
    for (n, s) in spec.trusted_values() {
        if n >= 4 {
            k_hat = nalgebra::RealField::max(k_hat, T::of_usize(n) * (s - T::one()));
        }
    }
    k_hat
}

#[derive(Debug, Clone)]
pub struct SchwarzPickReport<T: Scalar> {
    /// Max of `|phi'(z)| log|z| / log|phi(z)|` over the sample set.
    pub max_quotient: T,
    pub samples_used: usize,
    pub samples_skipped: usize,
}

/// Verify the pointwise estimate `|phi'(z)| log|z| / log|phi(z)| <= 1` for
/// a map fixing the origin, over a quasi-random (golden-angle) sample set.
pub fn schwarz_pick_check<T: Scalar>(
    map: &HoloMap<T>,
    n_samples: usize,
) -> Result<SchwarzPickReport<T>> {
    let zero = Complex::new(T::zero(), T::zero());
    if map.eval(zero)?.norm() > T::of(1e-10) {
        return Err(Error::Precondition("estimate is stated for maps with phi(0) = 0".into()));
    }
    let golden = T::of(0.618033988749894848);
    let mut max_q = T::zero();
    let mut used = 0usize;
    let mut skipped = 0usize;
    for i in 0..n_samples {
        let frac = (T::of_usize(i) + T::of(0.5)) / T::of_usize(n_samples);
        let r = Float::sqrt(frac) * T::of(0.999);
        let angle = T::of(2.0) * T::PI() * Float::fract(T::of_usize(i) * golden);
        let z = Complex::from_polar(r, angle);
        let jet = map.jet(z)?;
        let fz = jet.v.norm();
        if fz <= T::zero() {
            // phi(z) = 0 away from the origin: quotient degenerates to 0/inf.
            skipped += 1;
            continue;
        }
        let q = jet.d1.norm() * Float::ln(r) / Float::ln(fz);
        if !Float::is_finite(q) {
            skipped += 1;
            continue;
        }
        max_q = nalgebra::RealField::max(max_q, q);
        used += 1;
    }
    Ok(SchwarzPickReport { max_quotient: max_q, samples_used: used, samples_skipped: skipped })
}

#[derive(Debug, Clone)]
pub struct JuliaProbe<T: Scalar> {
    /// `|phi'(w)| (1 - |w|^2) / (1 - |phi(w)|^2)` along the probe ray.
    pub quotients: Vec<T>,
    /// Whether the map showed boundary contact on the scan grid.
    pub contact: bool,
    /// Probe direction (unit vector toward the largest boundary modulus).
    pub direction: Complex<T>,
}

/// Probe the Julia-Caratheodory quotient `||W^* k_w||^2` along the ray
/// toward the boundary-contact direction. Bounded by 1 (Schwarz-Pick); for
/// contact maps it increases to 1, otherwise it approaches a limit below 1.
pub fn julia_caratheodory_probe<T: Scalar>(map: &HoloMap<T>, radii: &[T]) -> Result<JuliaProbe<T>> {
    let (peak, direction) = boundary_peak(map, 4096)?;
    let contact = peak >= T::one() - T::of(1e-8);
    let mut quotients = Vec::with_capacity(radii.len());
    for &r in radii {
        if r <= T::zero() || r >= T::one() {
            return Err(Error::NotInOpenDisk(format!("radius {:?}", r.to_f64())));
        }
        let w = direction * r;
        let jet = map.jet(w)?;
        let q = jet.d1.norm() * (T::one() - w.norm_sqr()) / (T::one() - jet.v.norm_sqr());
        quotients.push(q);
    }
    Ok(JuliaProbe { quotients, contact, direction })
}

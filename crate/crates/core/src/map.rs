//! Holomorphic self-maps of the unit disk, represented as a composition
//! tree of primitives, together with evaluation, symbolic differentiation,
//! and branch-tracked square roots of the derivative.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{wrap_angle, Scalar};

/// Tolerance for the "maps into the closed disk" validation.
pub const EPS_VAL: f64 = 1e-12;

/// Minimum modulus of the derivative along a branch-tracking path.
const DERIV_FLOOR: f64 = 1e-13;

/// A primitive holomorphic map of the disk.
#[derive(Debug, Clone, PartialEq)]
pub enum Prim<T: Scalar> {
    /// `z -> r z` with `r` in `(0, 1]`. `Scale(1)` is the identity.
    Scale(T),
    /// Disk automorphism `z -> e^{i theta} (z - a) / (1 - conj(a) z)`,
    /// `|a| < 1`. With `a = 0, theta = 0` this is the identity; the
    /// derivative at 0 is `e^{i theta} (1 - |a|^2)`.
    Mobius { a: Complex<T>, theta: T },
    /// Polynomial with `coeffs[k]` the coefficient of `z^k`.
    Poly(Vec<Complex<T>>),
}

/// Value, first and second derivative of a map at a point.
#[derive(Debug, Clone, Copy)]
pub struct Jet2<T: Scalar> {
    pub v: Complex<T>,
    pub d1: Complex<T>,
    pub d2: Complex<T>,
}

impl<T: Scalar> Prim<T> {
    fn jet(&self, z: Complex<T>) -> Jet2<T> {
        let zero = Complex::new(T::zero(), T::zero());
        match self {
            Prim::Scale(r) => Jet2 {
                v: z * *r,
                d1: Complex::new(*r, T::zero()),
                d2: zero,
            },
            Prim::Mobius { a, theta } => {
                let one = Complex::new(T::one(), T::zero());
                let rot = Complex::from_polar(T::one(), *theta);
                let den = one - a.conj() * z;
                let one_m_aa = one - a * a.conj();
                Jet2 {
                    v: rot * (z - a) / den,
                    d1: rot * one_m_aa / (den * den),
                    d2: rot * one_m_aa * a.conj() * T::of(2.0) / (den * den * den),
                }
            }
            Prim::Poly(c) => {
                // Horner evaluation of p, p', p'' simultaneously.
                let mut p = zero;
                let mut dp = zero;
                let mut ddp = zero;
                for ck in c.iter().rev() {
                    ddp = ddp * z + dp * T::of(2.0);
                    dp = dp * z + p;
                    p = p * z + *ck;
                }
                Jet2 { v: p, d1: dp, d2: ddp }
            }
        }
    }
}

/// A holomorphic disk self-map with a chosen branch of `(phi')^{1/2}`.
///
/// `prims` compose left-to-right: the first element acts first, so the map
/// is `prims[k-1] o ... o prims[0]`. `branch_sign` selects the square root
/// of `phi'(0)` from which `(phi')^{1/2}` is continued.
#[derive(Debug, Clone, PartialEq)]
pub struct HoloMap<T: Scalar> {
    pub prims: Vec<Prim<T>>,
    pub branch_sign: i8,
}

impl<T: Scalar> HoloMap<T> {
    pub fn new(prims: Vec<Prim<T>>, branch_sign: i8) -> Self {
        assert!(branch_sign == 1 || branch_sign == -1, "branch sign must be +/-1");
        HoloMap { prims, branch_sign }
    }

    pub fn identity() -> Self {
        HoloMap::new(vec![Prim::Scale(T::one())], 1)
    }

    pub fn scale(r: T) -> Self {
        HoloMap::new(vec![Prim::Scale(r)], 1)
    }

    fn check_in_closed_disk(z: Complex<T>) -> Result<()> {
        if z.norm() > T::one() + T::of(EPS_VAL) {
            return Err(Error::OutsideDisk(format!("|z| = {:?}", z.norm().to_f64())));
        }
        Ok(())
    }

    /// Value, first and second derivative at `z` by the chain rule over the tree.
    pub fn jet(&self, z: Complex<T>) -> Result<Jet2<T>> {
        Self::check_in_closed_disk(z)?;
        let mut cur = Jet2 {
            v: z,
            d1: Complex::new(T::one(), T::zero()),
            d2: Complex::new(T::zero(), T::zero()),
        };
        for p in &self.prims {
            let outer = p.jet(cur.v);
            cur = Jet2 {
                v: outer.v,
                d1: outer.d1 * cur.d1,
                d2: outer.d2 * cur.d1 * cur.d1 + outer.d1 * cur.d2,
            };
        }
        Ok(cur)
    }

    /// `phi(z)`.
    pub fn eval(&self, z: Complex<T>) -> Result<Complex<T>> {
        Ok(self.jet(z)?.v)
    }

    /// `phi'(z)`.
    pub fn derivative(&self, z: Complex<T>) -> Result<Complex<T>> {
        Ok(self.jet(z)?.d1)
    }

    /// `phi''(z)`.
    pub fn second_derivative(&self, z: Complex<T>) -> Result<Complex<T>> {
        Ok(self.jet(z)?.d2)
    }

    /// `(phi'(z))^{1/2}`: the branch anchored at
    /// `branch_sign * principal_sqrt(phi'(0))` and continued along the radius
    /// `[0, z]` by tracking half the continuous argument of `phi'`.
    ///
    /// The step count along the radius is refined until the argument
    /// increment per step is below `pi/4`; the continuation is
    /// path-independent because `phi'` is zero-free on the disk.
    pub fn sqrt_derivative(&self, z: Complex<T>) -> Result<Complex<T>> {
        Self::check_in_closed_disk(z)?;
        let d0 = self.jet(Complex::new(T::zero(), T::zero()))?.d1;
        if d0.norm() < T::of(DERIV_FLOOR) {
            return Err(Error::Branch("phi'(0) vanishes within tolerance".into()));
        }
        let quarter_pi = T::PI() * T::of(0.25);
        let mut steps: usize = 8;
        loop {
            let mut arg = d0.arg();
            let mut prev = d0;
            let mut ok = true;
            let mut dz = d0;
            for k in 1..=steps {
                let s = T::of_usize(k) / T::of_usize(steps);
                dz = self.jet(z * s)?.d1;
                if dz.norm() < T::of(DERIV_FLOOR) {
                    return Err(Error::Branch(
                        "phi' vanishes within tolerance along the tracking path".into(),
                    ));
                }
                let delta = wrap_angle(dz.arg() - prev.arg());
                if Float::abs(delta) >= quarter_pi {
                    ok = false;
                    break;
                }
                arg += delta;
                prev = dz;
            }
            if ok {
                let modulus = Float::sqrt(dz.norm());
                let root = Complex::from_polar(modulus, arg * T::of(0.5));
                return Ok(if self.branch_sign >= 0 { root } else { -root });
            }
            steps *= 2;
            if steps > (1 << 20) {
                return Err(Error::Branch(
                    "argument of phi' varies too rapidly along the radius".into(),
                ));
            }
        }
    }

    /// `psi = ((phi')^{1/2})' = phi'' / (2 (phi')^{1/2})`, computed from the
    /// symbolic second derivative and the tracked square root.
    pub fn psi(&self, z: Complex<T>) -> Result<Complex<T>> {
        let jet = self.jet(z)?;
        let sq = self.sqrt_derivative(z)?;
        Ok(jet.d2 / (sq * T::of(2.0)))
    }

    /// The composite `psi o phi` as a map, i.e. `self` followed by `other`
    /// (`other(self(z))`), with the branch chosen compatibly so that
    /// `W_{self} W_{other} = W_{composite}` holds without a sign ambiguity.
    pub fn then(&self, other: &HoloMap<T>) -> Result<HoloMap<T>> {
        let mut prims = self.prims.clone();
        prims.extend(other.prims.iter().cloned());
        let mut composite = HoloMap::new(prims, 1);
        // Compatible anchor: sqrt(phi2')(phi1(0)) * sqrt(phi1')(0), each with
        // its own tracked branch. The composite principal anchor differs from
        // it by a global sign.
        let zero = Complex::new(T::zero(), T::zero());
        let w0 = self.eval(zero)?;
        let anchor = other.sqrt_derivative(w0)? * self.sqrt_derivative(zero)?;
        let principal = composite.sqrt_derivative(zero)?;
        let ratio = anchor / principal;
        if ratio.re < T::zero() {
            composite.branch_sign = -1;
        }
        Ok(composite)
    }
}

use num_traits::Float;

/// Outcome of the numerical validity screen for a map.
#[derive(Debug, Clone)]
pub struct ValidationReport<T: Scalar> {
    /// `max_j |phi(e^{i theta_j})|`; must be `<= 1 + EPS_VAL`.
    pub max_boundary_modulus: T,
    /// `min_j |phi'(e^{i theta_j})|`; must be positive.
    pub min_derivative_modulus: T,
    /// Winding of the boundary curve about `phi(0)`; `1` for univalent maps.
    pub boundary_winding: i64,
    /// Whether the injectivity screen passed (warning only when false).
    pub injectivity_ok: bool,
}

/// Check the disk-self-map invariants on `m` equispaced boundary samples.
///
/// Univalence is the caller's responsibility; the winding screen only warns.
pub fn validate<T: Scalar>(map: &HoloMap<T>, m: usize) -> Result<ValidationReport<T>> {
    let mut max_mod = T::zero();
    let mut min_deriv = T::infinity();
    let center = map.eval(Complex::new(T::zero(), T::zero()))?;
    let mut winding = T::zero();
    let mut prev_arg: Option<T> = None;
    let mut first_arg = T::zero();
    for j in 0..m {
        let theta = T::of(2.0) * T::PI() * T::of_usize(j) / T::of_usize(m);
        let z = Complex::from_polar(T::one(), theta);
        let jet = map.jet(z)?;
        max_mod = RealField::max(max_mod, jet.v.norm());
        min_deriv = RealField::min(min_deriv, jet.d1.norm());
        let a = (jet.v - center).arg();
        match prev_arg {
            None => first_arg = a,
            Some(p) => winding += wrap_angle(a - p),
        }
        prev_arg = Some(a);
    }
    if let Some(p) = prev_arg {
        winding += wrap_angle(first_arg - p);
    }
    let two_pi = T::PI() + T::PI();
    let w = num_traits::ToPrimitive::to_f64(&(winding / two_pi))
        .map(|x| x.round() as i64)
        .unwrap_or(0);
    if max_mod > T::one() + T::of(EPS_VAL) {
        return Err(Error::Precondition(format!(
            "map leaves the closed disk: max boundary modulus {:?}",
            max_mod.to_f64()
        )));
    }
    if min_deriv <= T::of(DERIV_FLOOR) {
        return Err(Error::Precondition(
            "phi' is not zero-free on the closed disk".into(),
        ));
    }
    Ok(ValidationReport {
        max_boundary_modulus: max_mod,
        min_derivative_modulus: min_deriv,
        boundary_winding: w,
        injectivity_ok: w == 1,
    })
}

use nalgebra::RealField;

/// Largest boundary modulus and the node where it is attained.
pub fn boundary_peak<T: Scalar>(map: &HoloMap<T>, m: usize) -> Result<(T, Complex<T>)> {
    let mut best = (-T::one(), Complex::new(T::one(), T::zero()));
    for j in 0..m {
        let theta = T::of(2.0) * T::PI() * T::of_usize(j) / T::of_usize(m);
        let z = Complex::from_polar(T::one(), theta);
        let v = map.eval(z)?.norm();
        if v > best.0 {
            best = (v, z);
        }
    }
    Ok(best)
}

/// Whether `phi(D)` touches the unit circle (numerically, on `m` nodes).
pub fn has_boundary_contact<T: Scalar>(map: &HoloMap<T>, m: usize) -> Result<bool> {
    Ok(boundary_peak(map, m)?.0 >= T::one() - T::of(1e-8))
}

// ---------------------------------------------------------------------------
// JSON schema (concrete f64 wire format)
// ---------------------------------------------------------------------------

/// Wire form of a primitive, e.g. `{"scale": 0.5}`,
/// `{"mobius": {"a_re": 0.3, "a_im": 0.0, "theta": 0.0}}`,
/// `{"poly": [[0.0, 0.0], [0.5, 0.0]]}`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "lowercase")]
pub enum PrimSpec {
    Scale(f64),
    Mobius { a_re: f64, a_im: f64, theta: f64 },
    Poly(Vec<[f64; 2]>),
}

/// Wire form of a map: `{"compose": [...], "branch": 1}`.
/// Composition applies left-to-right: the first element acts first.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct MapSpec {
    pub compose: Vec<PrimSpec>,
    pub branch: i8,
}

impl MapSpec {
    pub fn to_map<T: Scalar>(&self) -> Result<HoloMap<T>> {
        if self.branch != 1 && self.branch != -1 {
            return Err(Error::Config(format!("branch must be 1 or -1, got {}", self.branch)));
        }
        let mut prims = Vec::with_capacity(self.compose.len());
        for p in &self.compose {
            prims.push(match p {
                PrimSpec::Scale(r) => {
                    if !(*r > 0.0 && *r <= 1.0) {
                        return Err(Error::Config(format!("scale factor {r} not in (0, 1]")));
                    }
                    Prim::Scale(T::of(*r))
                }
                PrimSpec::Mobius { a_re, a_im, theta } => {
                    if a_re.hypot(*a_im) >= 1.0 {
                        return Err(Error::Config("mobius parameter must satisfy |a| < 1".into()));
                    }
                    Prim::Mobius {
                        a: Complex::new(T::of(*a_re), T::of(*a_im)),
                        theta: T::of(*theta),
                    }
                }
                PrimSpec::Poly(c) => Prim::Poly(
                    c.iter().map(|[re, im]| Complex::new(T::of(*re), T::of(*im))).collect(),
                ),
            });
        }
        Ok(HoloMap::new(prims, self.branch))
    }

    pub fn from_map<T: Scalar>(map: &HoloMap<T>) -> Self {
        let f = |x: &T| num_traits::ToPrimitive::to_f64(x).unwrap_or(f64::NAN);
        MapSpec {
            compose: map
                .prims
                .iter()
                .map(|p| match p {
                    Prim::Scale(r) => PrimSpec::Scale(f(r)),
                    Prim::Mobius { a, theta } => PrimSpec::Mobius {
                        a_re: f(&a.re),
                        a_im: f(&a.im),
                        theta: f(theta),
                    },
                    Prim::Poly(c) => {
                        PrimSpec::Poly(c.iter().map(|z| [f(&z.re), f(&z.im)]).collect())
                    }
                })
                .collect(),
            branch: map.branch_sign,
        }
    }
}

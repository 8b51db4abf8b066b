//! Built-in test corpus: named self-maps of the disk with their
//! boundary-contact, fixed-point, and unitarity tags.

use num_complex::Complex;

use crate::map::{HoloMap, Prim};
use crate::scalar::Scalar;

/// A named corpus map with the tags that drive the dichotomy assertions.
#[derive(Debug, Clone)]
pub struct CorpusEntry<T: Scalar> {
    pub name: &'static str,
    pub map: HoloMap<T>,
    /// Whether the image boundary touches the unit circle (at `z = 1` for
    /// every contact map in this corpus).
    pub contact: bool,
    /// Whether `phi(0) = 0`.
    pub fixes_zero: bool,
    /// Whether `phi` is a disk automorphism, so `W_phi` is unitary.
    pub unitary: bool,
}

fn c<T: Scalar>(re: f64, im: f64) -> Complex<T> {
    Complex::new(T::of(re), T::of(im))
}

fn poly<T: Scalar>(coeffs: &[(f64, f64)]) -> HoloMap<T> {
    HoloMap::new(
        vec![Prim::Poly(coeffs.iter().map(|&(re, im)| c(re, im)).collect())],
        1,
    )
}

/// `phi(z) = (1 + z) / 2`, tangential contact at 1.
fn half_shift<T: Scalar>() -> HoloMap<T> {
    poly(&[(0.5, 0.0), (0.5, 0.0)])
}

/// `phi(z) = (z + 0.4 z^2) / 1.4`, a cusp-like contact at 1 fixing 0.
fn cusp<T: Scalar>() -> HoloMap<T> {
    poly(&[(0.0, 0.0), (1.0 / 1.4, 0.0), (0.4 / 1.4, 0.0)])
}

fn mobius<T: Scalar>(a: f64) -> HoloMap<T> {
    HoloMap::new(vec![Prim::Mobius { a: c(a, 0.0), theta: T::zero() }], 1)
}

/// The built-in corpus: 6 contact and 4 non-contact maps, 3 contact maps
/// fixing 0, 2 automorphisms. Every contact map satisfies `|phi(1)| = 1`.
pub fn corpus<T: Scalar>() -> Vec<CorpusEntry<T>> {
    let compose = |a: &HoloMap<T>, b: &HoloMap<T>| {
        a.then(b).expect("built-in corpus compositions are valid")
    };
    vec![
        CorpusEntry {
            name: "identity",
            map: HoloMap::identity(),
            contact: true,
            fixes_zero: true,
            unitary: true,
        },
        CorpusEntry {
            name: "scale_half",
            map: HoloMap::scale(T::of(0.5)),
            contact: false,
            fixes_zero: true,
            unitary: false,
        },
        CorpusEntry {
            name: "scale_quarter",
            map: HoloMap::scale(T::of(0.25)),
            contact: false,
            fixes_zero: true,
            unitary: false,
        },
        CorpusEntry {
            name: "mobius_third",
            map: mobius(0.3),
            contact: true,
            fixes_zero: false,
            unitary: true,
        },
        CorpusEntry {
            name: "half_shift",
            map: half_shift(),
            contact: true,
            fixes_zero: false,
            unitary: false,
        },
        CorpusEntry {
            name: "cusp",
            map: cusp(),
            contact: true,
            fixes_zero: true,
            unitary: false,
        },
        CorpusEntry {
            name: "affine",
            map: poly(&[(0.2, 0.0), (0.5, 0.0)]),
            contact: false,
            fixes_zero: false,
            unitary: false,
        },
        CorpusEntry {
            // (1 + z)/2 followed by the automorphism sending 1/2 to 0:
            // contact at 1 with phi(0) = 0.
            name: "half_shift_fixed",
            map: compose(&half_shift(), &mobius(0.5)),
            contact: true,
            fixes_zero: true,
            unitary: false,
        },
        CorpusEntry {
            // cusp(z/2): the image pulls strictly inside the disk.
            name: "scaled_cusp",
            map: compose(&HoloMap::scale(T::of(0.5)), &cusp()),
            contact: false,
            fixes_zero: true,
            unitary: false,
        },
        CorpusEntry {
            name: "cusp_mobius",
            map: compose(&cusp(), &mobius(0.3)),
            contact: true,
            fixes_zero: false,
            unitary: false,
        },
    ]
}

//! Numerical toolkit for weighted composition operators
//! `W_phi f = (phi')^{1/2} (f o phi)` on the Hardy space of the unit disk:
//! truncated matrix construction, singular value spectra and essential
//! norms, exterior-power (Fock) norms, and the restriction-operator view
//! with its eigenfunction theory.
//!
//! All numerics are generic over the scalar type through [`Scalar`]
//! (`f32` or `f64`); the `*64` aliases below fix the common concrete
//! choice.

pub mod coeffs;
pub mod corpus;
pub mod error;
pub mod fock;
pub mod linalg;
pub mod map;
pub mod quad;
pub mod restrict;
pub mod scalar;
pub mod spectra;
pub mod wco;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub use coeffs::{BoundaryGrid, CoeffVec};
pub use corpus::{corpus, CorpusEntry};
pub use fock::{FockReport, FockVerdict};
pub use map::{HoloMap, MapSpec, Prim, PrimSpec, ValidationReport};
pub use restrict::{DeformationRow, DeformationTable, EigenPair, ZeroCount};
pub use spectra::{
    EssentialNormEstimate, JuliaProbe, SchwarzPickReport, SingularSpectrum,
};
pub use wco::OperatorMatrix;

/// Complex double.
pub type C64 = num_complex::Complex<f64>;

pub type HoloMap64 = map::HoloMap<f64>;
pub type CoeffVec64 = coeffs::CoeffVec<f64>;
pub type BoundaryGrid64 = coeffs::BoundaryGrid<f64>;
pub type OperatorMatrix64 = wco::OperatorMatrix<f64>;
pub type SingularSpectrum64 = spectra::SingularSpectrum<f64>;
pub type EigenPair64 = restrict::EigenPair<f64>;
pub type FockReport64 = fock::FockReport<f64>;
pub type CorpusEntry64 = corpus::CorpusEntry<f64>;

//! Physics-informed Gaussian-process surrogates for finite-strain hyperelasticity.
//!
//! The surrogates map strain invariants of the right Cauchy-Green tensor to the
//! scalar coefficients of a stress-generator basis, so that the predicted second
//! Piola-Kirchhoff stress is symmetric and frame indifferent by construction.
//!
//! Module overview:
//! - [`tensors`]: second/fourth-order tensor algebra, invariants, generators and their gradients.
//! - [`laws`]: analytic Mooney-Rivlin and Bonet-Burton ground-truth laws.
//! - [`coeffs`]: extraction of generator coefficients from `(C, S)` pairs.
//! - [`sampling`]: invariant-space hull, physicality checks and space-filling annealing.
//! - [`gpr`]: Matérn 3/2 kriging with REML fitting and local approximate GPR.
//! - [`surrogate`]: the trained constitutive surrogates with consistent tangents.

pub mod coeffs;
pub mod error;
pub mod gpr;
pub mod laws;
pub mod sampling;
pub mod surrogate;
pub mod tensors;

pub use coeffs::{CoeffVector, ExtractionReport, Multiplicity};
pub use error::{Error, Result};
pub use gpr::{GprConfig, GprModel, KernelParams, LaGprConfig, RefitPolicy};
pub use laws::{BonetParams, Law, MooneyRivlinParams};
pub use sampling::{AnnealConfig, ConvexHull3, DomainBounds, SampleSet};
pub use surrogate::{MappingKind, SurrogateModel};
pub use tensors::{
    GeneratorBasis, InvariantKind, InvariantPoint, Mat3, SymMat3, Tensor4, UnitVec3,
};

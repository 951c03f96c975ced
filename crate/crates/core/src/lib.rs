//! Numerical laboratory for the Klein-Gordon equation in three space dimensions.
//!
//! The crate evaluates the free sine and cosine propagator kernels and their
//! fractional integrals, measures their Lorentz norms as functions of the radius,
//! evolves radial data under `-Δ + V` on a discrete grid, and runs Picard and
//! split-step solvers for the quintic equation.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod checks;
pub mod error;
pub mod kernels;
pub mod norms;
pub mod quadrature;
pub mod semilinear;
pub mod spectral;
pub mod specfun;

pub use error::{Error, Result};
pub use kernels::{FractionalExponent, KernelField, KernelKind};
pub use norms::{DecayFit, LorentzSpec};
pub use num_complex::Complex64;
pub use quadrature::{IntegralSpec, IntegrandForm, QuadResult, Tolerance};
pub use semilinear::{IterationState, NonlinearConfig, NonlinearSign};
pub use spectral::{CauchyData, DiscreteHamiltonian, PotentialSpec, RadialGrid1D, SpectralState};

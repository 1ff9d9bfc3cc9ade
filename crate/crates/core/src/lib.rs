//! Fourth-order lattice Boltzmann schemes for hyperbolic conservation laws.
//!
//! The state is a [`lattice::DistributionField`] on a periodic lattice; a step
//! is a plan of exact integer shifts and local relaxations toward the
//! equilibria of a [`models::KineticModel`]. The core is generic over
//! [`scalar::Real`]; the aliases below fix it to `f64`.

// `!(x > 0.0)` style guards are meant to reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Index loops mirror the 2x2 matrix and per-site formulas.
#![allow(clippy::needless_range_loop)]

pub mod analysis;
pub mod entropy;
pub mod error;
pub mod lattice;
pub mod models;
pub mod operators;
pub mod scalar;

pub use error::{Error, Result};

pub type Lattice = lattice::Lattice<f64>;
pub type ConservedField = lattice::ConservedField<f64>;
pub type DistributionField = lattice::DistributionField<f64>;
pub type SchemeSpec = operators::SchemeSpec<f64>;
pub type RelaxationMode = operators::RelaxationMode<f64>;
pub type Burgers1D = models::Burgers1D<f64>;
pub type Burgers2D = models::Burgers2D<f64>;
pub type LinearAdvection1D = models::LinearAdvection1D<f64>;
pub type LinearAdvection2D = models::LinearAdvection2D<f64>;
pub type ShallowWater1D = models::ShallowWater1D<f64>;
pub type Euler2D = models::Euler2D<f64>;

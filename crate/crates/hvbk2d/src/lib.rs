//! Pseudo-spectral simulator and verification harness for the two-dimensional
//! incompressible, isothermal two-fluid (HVBK) superfluid equations.
//!
//! A normal fluid and a superfluid, each with its own viscosity, are coupled
//! through a mutual-friction force proportional to the superfluid vorticity
//! magnitude. The crate integrates the vorticity form of the system on a
//! periodic square with an integrating-factor RK4 scheme, and ships the
//! machinery to check the exact identities the model satisfies: the energy
//! and enstrophy balances, momentum cancellation of the friction, Picard
//! fixed-point contraction scalings, pressure recovery, and the finite
//! kinetic-energy bound for zero-mean vorticity fields.
//!
//! All kernels are generic over the scalar type via [`real::Real`]
//! (`f32` or `f64`); the `*64` aliases at the crate root are what the CLI and
//! the verification suites use.

pub mod diagnostics;
pub mod energybound;
pub mod error;
pub mod init;
pub mod io;
pub mod model;
pub mod picard;
pub mod pressure;
pub mod real;
pub mod spectral;
pub mod timestepping;

pub use error::{Error, Result};
pub use real::Real;

/// Concrete `f64` aliases; tolerances throughout the test suites assume these.
pub type Grid64 = spectral::Grid<f64>;
pub type ScalarField64 = spectral::ScalarField<f64>;
pub type VectorField64 = spectral::VectorField<f64>;
pub type PhysParams64 = model::PhysParams<f64>;
pub type TwoFluidState64 = model::TwoFluidState<f64>;

/// `f32` variants for memory-bound exploratory work.
pub type Grid32 = spectral::Grid<f32>;
pub type ScalarField32 = spectral::ScalarField<f32>;
pub type VectorField32 = spectral::VectorField<f32>;
pub type PhysParams32 = model::PhysParams<f32>;
pub type TwoFluidState32 = model::TwoFluidState<f32>;

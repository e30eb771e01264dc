//! Periodic-grid transforms and spectral operators: the kernel layer every
//! other module builds on.

mod fft;
mod field;
mod grid;
mod ops;

pub use field::{Representation, ScalarField, VectorField};
pub use grid::Grid;
pub use ops::{
    biot_savart, curl, ddx, ddy, dealias, divergence, grad, inv_laplacian, laplacian,
    leray_project, max_conjugate_asymmetry, perp_grad,
};

pub(crate) use ops::{
    biot_savart_hat, curl_hat, ddx_hat, ddy_hat, dealias_hat, divergence_hat,
    enforce_conjugate_symmetry, laplacian_hat, leray_hat,
};

//! Torus grids, Fourier transforms and spectral differential operators.

mod field;
mod grid;
mod ops;
pub mod snapshot;
mod transform;

pub use field::{PhysicalField, SpectralField, VectorField};
pub use grid::TorusGrid;
pub use ops::{
    dealias, dealias_mask, divergence_defect, gradient, lq_norm, oversampled_max_abs, project_divergence_free,
    remove_mean,
};
pub use transform::{forward_transform, inverse_transform};

pub(crate) use field::check_same_grid;
pub(crate) use transform::{fft_forward_in_place, fft_inverse_in_place, inverse_real};

/// Relative tolerance used to decide whether a field has zero mean.
pub const MEAN_TOLERANCE: f64 = 1e-10;

/// Relative tolerance of the divergence-free certificate.
pub const DIVERGENCE_TOLERANCE: f64 = 1e-12;

//! Littlewood–Paley analysis and passive-scalar transport on the periodic torus.
//!
//! The crate is organised bottom-up:
//!
//! - [`spectral`]: torus grids, Fourier transforms (coefficients are averages,
//!   `θ̂(η) = ⨍ e^{-iη·x} θ(x) dx`), differential operators, dealiasing and the
//!   field snapshot file format.
//! - [`littlewood_paley`]: the dyadic partition of unity `{φ̂_k}`, low-pass
//!   filters `{ψ̂_k}` and the block / high-pass / low-pass projections.
//! - [`besov`]: logarithmic Besov norms in their block, high-pass, log-sum and
//!   Gagliardo forms, plus the interpolation quantities built on them.
//! - [`solver`]: pseudo-spectral RK4 integration of the advection(-diffusion)
//!   equation, velocity models and the commutator decomposition.
//! - [`transport`]: Kantorovich–Rubinstein distances with logarithmic cost.
//! - [`experiments`]: the batch harness that turns the regularity and
//!   zero-diffusivity estimates into falsifiable, refinement-stable checks.

pub mod besov;
pub mod error;
pub mod experiments;
pub mod fields;
pub mod littlewood_paley;
pub mod solver;
pub mod spectral;
pub mod transport;

pub use error::{Error, Result};
pub use littlewood_paley::{GeneratorSpec, LPFamily};
pub use spectral::{PhysicalField, SpectralField, TorusGrid, VectorField};

//! Variable-step mollifiers on uniform grids.
//!
//! The operator averages a field over a ball whose radius `s(x)` shrinks to zero
//! towards the boundary (and an optional interior zero set), so boundary values
//! are preserved while the interior is smoothed:
//!
//! ```text
//! Tf(x) = M_ρ Σ_k w_k ρ(z_k) f(x − s(x) z_k)
//! ```
//!
//! All numerics are generic over [`Scalar`] (`f32` or `f64`); the `*64` and `*32`
//! aliases below fix the precision.

pub mod analysis;
pub mod error;
pub mod eta;
pub mod feasible;
pub mod geometry;
pub mod kernels;
pub mod mollify;
pub mod scalar;
pub mod selftest;

pub use error::{Error, Result};
pub use scalar::{lit, unit_ball_volume, Scalar};

pub type Grid64 = geometry::Grid<f64>;
pub type Domain64 = geometry::Domain<f64>;
pub type ScalarField64 = geometry::ScalarField<f64>;
pub type VectorField64 = geometry::VectorField<f64>;
pub type Kernel64 = kernels::Kernel<f64>;
pub type EtaProfile64 = eta::EtaProfile<f64>;
pub type MollifierConfig64 = mollify::MollifierConfig<f64>;
pub type ConstraintSpec64 = feasible::ConstraintSpec<f64>;

pub type Grid32 = geometry::Grid<f32>;
pub type Domain32 = geometry::Domain<f32>;
pub type ScalarField32 = geometry::ScalarField<f32>;
pub type Kernel32 = kernels::Kernel<f32>;
pub type EtaProfile32 = eta::EtaProfile<f32>;
pub type MollifierConfig32 = mollify::MollifierConfig<f32>;

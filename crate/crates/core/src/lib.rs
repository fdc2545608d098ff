//! Projections and gradient projection methods on the hyperboloid model of
//! hyperbolic space.
//!
//! The crate is organised bottom-up:
//!
//! - [`geometry`]: the hyperboloid kernel (distance, exp/log, transport,
//!   gradients).
//! - [`cone`]: Euclidean projections onto convex cones.
//! - [`lorentz`]: Lorentz projections onto cones inside the Lorentz cone.
//! - [`intrinsic`]: nearest-point projections onto convex subsets of the
//!   hyperboloid, with certificates and brute-force oracles.
//! - [`solvers`]: constant-step and backtracking gradient projection.
//! - [`fermat_weber`]: the weighted centre-of-mass objective and data sets.
//! - [`bench`]: the experiment drivers behind the `hyproj` binary.

pub mod bench;
pub mod cone;
pub mod error;
pub mod fermat_weber;
pub mod geometry;
pub mod intrinsic;
mod linalg;
pub mod lorentz;
pub mod solvers;

pub use error::{Error, Result};
pub use geometry::{lorentz_inner, HPoint, HTangent, ManifoldParams};
pub use intrinsic::ConvexSetSpec;

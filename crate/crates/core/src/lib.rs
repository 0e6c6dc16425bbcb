//! Contour dynamics and rearrangement diagnostics for 2D Euler vortex patches
//! on the half cylinder `[0, ∞) × 𝕋` with a rigid wall at `x1 = 0`.
//!
//! * [`kernel`]: Green's function, Biot–Savart kernel, velocity from contours
//!   and from gridded vorticity.
//! * [`rearrange`]: decreasing rearrangement, cut-off, impulse and the
//!   associated inequalities on a uniform grid.
//! * [`patchgeom`]: marker contours, Green's-theorem functionals, the
//!   cylinder projection and the standard initial patches.
//! * [`dynamics`]: RK4 marker advection with remeshing and checkpoints.
//! * [`expcli`]: diagnostics, experiments and the `cylpatch` command line.

// `!(x > 0.0)` is used on purpose so that NaN fails validation
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod error;
pub mod expcli;
pub mod kernel;
pub mod patchgeom;
pub mod rearrange;

pub use error::{Error, Result};

//! Finite element model updating for modulus tomography.
//!
//! A coupon is meshed with bilinear quadrilaterals (plane stress) or trilinear
//! hexahedra, partitioned into patches that each carry one unknown Young's
//! modulus, and loaded under displacement control. Surface strain fields from
//! a full-field measurement (or a synthetic stand-in) are matched against the
//! forward model with a relative-residual cost, minimized by a genetic stage
//! followed by projected-gradient refinement.
//!
//! Module map:
//!
//! * [`geometry`]: structured meshes, longitudinal sections, defect patches.
//! * [`solver`]: element stiffness, sparse assembly, static solve, surface strains.
//! * [`measurement`]: measurement grids, interpolation, synthetic fields, CSV I/O.
//! * [`inversion`]: the cost function and the hybrid optimizer.

// `!(x > 0.0)` style guards reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod error;
pub mod geometry;
pub mod inversion;
pub mod measurement;
pub mod shape;
pub mod solver;

pub use error::{Error, Result};

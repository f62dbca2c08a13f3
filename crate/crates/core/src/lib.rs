//! Workspace analysis for 3R orthogonal serial manipulators.
//!
//! A 3R orthogonal manipulator has three revolute joints with consecutive
//! axes at right angles. Its geometry is fixed by five non-negative lengths
//! `d2, d3, d4, r2, r3` (see [`GeometryParams`]); all three joints are
//! unlimited. This crate computes, for such a manipulator:
//!
//! * forward/inverse kinematics and the position Jacobian ([`kinematics`]),
//! * a sampled image of the singularity locus in the workspace cross-section
//!   ([`singularity`]),
//! * the largest singularity-free square and the regular dextrous workspace
//!   (RDW): the largest square of the cross-section on which every inverse
//!   kinematic solution keeps a conditioning index above a threshold
//!   ([`rdw`]),
//! * parameter sweeps of the performance index `eta = a_RDW / rho_max` over
//!   two-parameter design grids, with isocontour extraction ([`sweep`]).
//!
//! Derivative-free maximization used by the workspace searches lives in
//! [`optimize`].

pub mod error;
mod fmt;
pub mod kinematics;
pub mod optimize;
pub mod rdw;
pub mod singularity;
pub mod sweep;
pub mod types;

pub use error::{Error, Result};
pub use types::{
    CartesianPoint, CrossSectionPoint, GeometryParams, JointConfig, ManipulatorType, Square,
};

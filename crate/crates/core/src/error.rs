//! Error type shared by all modules of the crate.

use thiserror::Error;

use crate::types::ManipulatorType;

#[derive(Debug, Error)]
pub enum Error {
    /// Geometry parameters are not finite, negative, or `d4 = 0`.
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    /// Geometry violates the defining constraints of a manipulator type.
    #[error("type {kind} constraint violated: {detail}")]
    TypeConstraint {
        kind: ManipulatorType,
        detail: String,
    },

    /// An argument is outside its documented domain (grid too coarse,
    /// non-positive tolerance, malformed level list, ...).
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The determinant scan found no sign change: the geometry is degenerate
    /// (cannot happen for a valid `d4 > 0` geometry of the named types).
    #[error("no singularity sign change found on the scan grid")]
    EmptySingularSet,

    /// No singular sample lies within the requested band around `z = 0`.
    #[error("no singular samples within the axis band")]
    EmptyCrossings,

    /// Every candidate interval between axis crossings has an unreachable
    /// midpoint, so there is no segment to seed the square search.
    #[error("no reachable free segment between consecutive axis crossings")]
    NoFreeSegment,

    /// The center of a growing square already fails the dexterity threshold.
    #[error("square cannot grow: its center fails the dexterity threshold")]
    ZeroEdge,

    /// A cross-section point has no inverse kinematic solution.
    #[error("point (rho = {rho}, z = {z}) is outside the reachable workspace")]
    Unreachable { rho: f64, z: f64 },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    /// A CSV or config stream does not match the expected format.
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

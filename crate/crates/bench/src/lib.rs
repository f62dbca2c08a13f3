//! Shared fixtures for the pipeline benchmarks.

use ortho3r::{GeometryParams, JointConfig, ManipulatorType};

/// The type-C workhorse geometry (d4 = 1.5, r2 = 1).
pub fn geom_c() -> GeometryParams {
    ManipulatorType::C
        .sweep_geometry(1.0, 1.5)
        .expect("valid type-C geometry")
}

/// A joint configuration away from singularities.
pub fn regular_config() -> JointConfig {
    JointConfig::new(0.3, 0.7, -1.1)
}

//! Shared geometric, joint-space and design-space types.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Wraps an angle to the canonical interval `[-pi, pi)`.
pub fn wrap_angle(theta: f64) -> f64 {
    let two_pi = 2.0 * PI;
    let mut w = theta - two_pi * ((theta + PI) / two_pi).floor();
    // Guard the seam against rounding of the floor expression.
    if w < -PI {
        w += two_pi;
    }
    if w >= PI {
        w -= two_pi;
    }
    w
}

/// Link lengths and joint offsets of a 3R orthogonal manipulator.
///
/// The first joint axis passes through the base origin; the twist angles are
/// fixed to `alpha2 = -90°`, `alpha3 = +90°`. `d4` is the distance from the
/// third joint axis to the operation point and must be positive; all other
/// parameters are non-negative and may be zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometryParams {
    pub d2: f64,
    pub d3: f64,
    pub d4: f64,
    pub r2: f64,
    pub r3: f64,
}

impl GeometryParams {
    pub fn new(d2: f64, d3: f64, d4: f64, r2: f64, r3: f64) -> Result<Self> {
        let g = GeometryParams { d2, d3, d4, r2, r3 };
        for (name, v) in g.named() {
            if !v.is_finite() {
                return Err(Error::InvalidGeometry(format!("{name} must be finite")));
            }
            if v < 0.0 {
                return Err(Error::InvalidGeometry(format!(
                    "{name} must be non-negative (got {v})"
                )));
            }
        }
        if d4 <= 0.0 {
            return Err(Error::InvalidGeometry(format!(
                "d4 must be positive (got {d4})"
            )));
        }
        Ok(g)
    }

    pub fn named(&self) -> [(&'static str, f64); 5] {
        [
            ("d2", self.d2),
            ("d3", self.d3),
            ("d4", self.d4),
            ("r2", self.r2),
            ("r3", self.r3),
        ]
    }

    /// Characteristic length used to make tolerances scale-free: the sum of
    /// all five parameters (positive, since `d4 > 0`).
    pub fn length_scale(&self) -> f64 {
        self.d2 + self.d3 + self.d4 + self.r2 + self.r3
    }

    /// Same geometry with every length multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        GeometryParams {
            d2: self.d2 * factor,
            d3: self.d3 * factor,
            d4: self.d4 * factor,
            r2: self.r2 * factor,
            r3: self.r3 * factor,
        }
    }
}

/// Structural classes of 3R orthogonal manipulators with a well-connected
/// workspace, plus `Generic` for geometries outside the named classes.
///
/// Each named type pins a subset of the parameters to zero and requires the
/// rest to be non-zero; `B1` additionally requires `d3 > d4` (the complement
/// `d3 <= d4` is a different class with a workspace void).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ManipulatorType {
    B1,
    C,
    E,
    G,
    H,
    Generic,
}

impl ManipulatorType {
    pub const ALL_NAMED: [ManipulatorType; 5] = [
        ManipulatorType::B1,
        ManipulatorType::C,
        ManipulatorType::E,
        ManipulatorType::G,
        ManipulatorType::H,
    ];

    /// Parameters that must be zero / non-zero for this type.
    fn constraints(self) -> (&'static [&'static str], &'static [&'static str]) {
        match self {
            ManipulatorType::B1 => (&["d2", "r2", "r3"], &["d3", "d4"]),
            ManipulatorType::C => (&["d2", "d3", "r3"], &["r2", "d4"]),
            ManipulatorType::E => (&["d3", "r2", "r3"], &["d2", "d4"]),
            ManipulatorType::G => (&["d2", "r2"], &["d3", "d4", "r3"]),
            ManipulatorType::H => (&["d2", "d3"], &["r2", "d4", "r3"]),
            ManipulatorType::Generic => (&[], &["d4"]),
        }
    }

    /// Checks the defining constraints of the type against `geom`.
    pub fn validate(self, geom: &GeometryParams) -> Result<()> {
        let named = geom.named();
        let get = |name: &str| named.iter().find(|(n, _)| *n == name).unwrap().1;
        let (zero, nonzero) = self.constraints();
        for name in zero {
            let v = get(name);
            if v != 0.0 {
                return Err(Error::TypeConstraint {
                    kind: self,
                    detail: format!("{name} must be 0 (got {v})"),
                });
            }
        }
        for name in nonzero {
            let v = get(name);
            if v <= 0.0 {
                return Err(Error::TypeConstraint {
                    kind: self,
                    detail: format!("{name} must be positive (got {v})"),
                });
            }
        }
        if self == ManipulatorType::B1 && geom.d3 <= geom.d4 {
            return Err(Error::TypeConstraint {
                kind: self,
                detail: format!("d3 > d4 required (got d3 = {}, d4 = {})", geom.d3, geom.d4),
            });
        }
        Ok(())
    }

    /// Names of the two design parameters swept for this type, or `None`
    /// when the type has no canonical two-parameter design plane.
    pub fn sweep_axes(self) -> Option<[&'static str; 2]> {
        match self {
            ManipulatorType::B1 | ManipulatorType::G => Some(["d3", "d4"]),
            ManipulatorType::C | ManipulatorType::H => Some(["r2", "d4"]),
            ManipulatorType::E => Some(["d2", "d4"]),
            ManipulatorType::Generic => None,
        }
    }

    /// Builds the geometry at a point of the design plane. Types `G` and `H`
    /// fix `r3 = 1`, which their sweeps use as the unit of length.
    pub fn sweep_geometry(self, p1: f64, p2: f64) -> Result<GeometryParams> {
        let geom = match self {
            ManipulatorType::B1 | ManipulatorType::G => {
                let r3 = if self == ManipulatorType::G { 1.0 } else { 0.0 };
                GeometryParams::new(0.0, p1, p2, 0.0, r3)?
            }
            ManipulatorType::C | ManipulatorType::H => {
                let r3 = if self == ManipulatorType::H { 1.0 } else { 0.0 };
                GeometryParams::new(0.0, 0.0, p2, p1, r3)?
            }
            ManipulatorType::E => GeometryParams::new(p1, 0.0, p2, 0.0, 0.0)?,
            ManipulatorType::Generic => {
                return Err(Error::InvalidArgument(
                    "generic manipulators have no design plane to sweep".into(),
                ))
            }
        };
        self.validate(&geom)?;
        Ok(geom)
    }
}

impl fmt::Display for ManipulatorType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ManipulatorType::B1 => "B1",
            ManipulatorType::C => "C",
            ManipulatorType::E => "E",
            ManipulatorType::G => "G",
            ManipulatorType::H => "H",
            ManipulatorType::Generic => "generic",
        };
        f.write_str(s)
    }
}

impl FromStr for ManipulatorType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "b1" => Ok(ManipulatorType::B1),
            "c" => Ok(ManipulatorType::C),
            "e" => Ok(ManipulatorType::E),
            "g" => Ok(ManipulatorType::G),
            "h" => Ok(ManipulatorType::H),
            "generic" => Ok(ManipulatorType::Generic),
            other => Err(Error::InvalidArgument(format!(
                "unknown manipulator type '{other}' (expected B1, C, E, G, H or generic)"
            ))),
        }
    }
}

/// Joint angles in radians. Angles are unlimited; `canonical` wraps each one
/// to `[-pi, pi)`, which is the representation returned by inverse
/// kinematics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointConfig {
    pub theta1: f64,
    pub theta2: f64,
    pub theta3: f64,
}

impl JointConfig {
    pub fn new(theta1: f64, theta2: f64, theta3: f64) -> Self {
        JointConfig {
            theta1,
            theta2,
            theta3,
        }
    }

    pub fn canonical(self) -> Self {
        JointConfig {
            theta1: wrap_angle(self.theta1),
            theta2: wrap_angle(self.theta2),
            theta3: wrap_angle(self.theta3),
        }
    }
}

/// Operation point position in the base frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CartesianPoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

/// Point of the workspace cross-section: `rho` is the distance to the first
/// joint axis, `z` the height along it. The workspace is the surface of
/// revolution of this half-plane section.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossSectionPoint {
    pub rho: f64,
    pub z: f64,
}

impl CrossSectionPoint {
    pub fn new(rho: f64, z: f64) -> Self {
        CrossSectionPoint { rho, z }
    }
}

/// Axis-aligned square in the cross-section plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Square {
    pub center: CrossSectionPoint,
    pub half_edge: f64,
}

impl Square {
    pub fn new(center: CrossSectionPoint, half_edge: f64) -> Self {
        Square { center, half_edge }
    }

    pub fn edge(&self) -> f64 {
        2.0 * self.half_edge
    }

    /// True when `p` lies strictly inside the square.
    pub fn contains(&self, p: &CrossSectionPoint) -> bool {
        (p.rho - self.center.rho).abs() < self.half_edge
            && (p.z - self.center.z).abs() < self.half_edge
    }
}

//! Fixed mechanism description and the pose to platform-joint map.
//!
//! The manipulator has three prismatic actuators sliding on parallel rails.
//! Each slider `B_i` carries a link of length `L_ii` to a revolute joint
//! `C_i` on a straight platform.  The three platform joints and the gripper
//! point `G` are collinear, with `C_i` lying a distance `L_iG` behind `G`
//! along the platform axis.

use std::ops::{Add, Mul, Neg, Sub};

use thiserror::Error;

use crate::kinematics::Pose;

/// Tolerance used for the unit-length and parallel-rail checks.
pub const GEOMETRY_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    /// Unit vector at `angle` radians from the x axis.
    pub fn from_angle(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self::new(c, s)
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// Scalar z-component of the planar cross product.
    pub fn cross(self, other: Vec2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    /// Counter-clockwise quarter turn, `[[0, -1], [1, 0]] * v`.
    pub fn perp(self) -> Self {
        Self::new(-self.y, self.x)
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }

    /// Rotates the vector counter-clockwise by `angle` radians.
    pub fn rotate(self, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<Vec2> for f64 {
    type Output = Vec2;
    fn mul(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self * rhs.x, self * rhs.y)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// A prismatic actuator: slider position is `anchor + rho * direction`
/// with `rho` in `[0, stroke]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rail {
    pub anchor: Vec2,
    pub direction: Vec2,
    pub stroke: f64,
}

impl Rail {
    /// Rail along +x starting at `(anchor_x, 0)`.
    pub fn along_x(anchor_x: f64, stroke: f64) -> Self {
        Self {
            anchor: Vec2::new(anchor_x, 0.0),
            direction: Vec2::new(1.0, 0.0),
            stroke,
        }
    }

    pub fn point_at(&self, rho: f64) -> Vec2 {
        self.anchor + rho * self.direction
    }

    /// Along-rail and off-rail coordinates of `p` relative to the anchor.
    pub fn local_coordinates(&self, p: Vec2) -> (f64, f64) {
        let rel = p - self.anchor;
        (rel.dot(self.direction), rel.dot(self.direction.perp()))
    }
}

#[derive(Clone, Debug, Error, PartialEq)]
pub enum GeometryError {
    #[error("rail {leg} direction has norm {norm}, expected 1")]
    NonUnitDirection { leg: usize, norm: f64 },
    #[error("rail {leg} is not parallel to rail 1 (cross product {cross:e})")]
    NonParallelRails { leg: usize, cross: f64 },
    #[error("{field} must be strictly positive and finite, got {value}")]
    NonPositiveLength { field: String, value: f64 },
    #[error("platform offsets must be strictly decreasing, got {offsets:?}")]
    UnorderedPlatformOffsets { offsets: [f64; 3] },
}

impl GeometryError {
    /// Dotted path of the offending configuration field.
    pub fn field(&self) -> String {
        match self {
            Self::NonUnitDirection { leg, .. } | Self::NonParallelRails { leg, .. } => {
                format!("rails[{}].direction", leg - 1)
            }
            Self::NonPositiveLength { field, .. } => field.clone(),
            Self::UnorderedPlatformOffsets { .. } => "platform_offsets".to_owned(),
        }
    }
}

/// Complete fixed geometry.  Leg indices are 0-based in code; error messages
/// and reports use 1-based leg numbers.
#[derive(Clone, Debug, PartialEq)]
pub struct Geometry {
    pub rails: [Rail; 3],
    /// `L_11, L_22, L_33`: slider-to-platform link lengths.
    pub link_lengths: [f64; 3],
    /// `L_1G, L_2G, L_3G`: distance from each platform joint back to `G`.
    pub platform_offsets: [f64; 3],
}

impl Geometry {
    /// All rails on the x axis sharing one anchor at the origin.
    pub fn on_x_axis(link_lengths: [f64; 3], platform_offsets: [f64; 3], stroke: f64) -> Self {
        Self {
            rails: [Rail::along_x(0.0, stroke); 3],
            link_lengths,
            platform_offsets,
        }
    }

    /// Equal 25-unit links, platform joints spaced 5 apart, stroke 10.
    pub fn equal_links_25() -> Self {
        Self::on_x_axis([25.0; 3], [15.0, 10.0, 5.0], 10.0)
    }

    /// Graded links 1.7 / 1.8 / 1.9, platform joints spaced 1 apart.
    pub fn graded_links(stroke: f64) -> Self {
        Self::on_x_axis([1.7, 1.8, 1.9], [3.0, 2.0, 1.0], stroke)
    }

    pub fn validate(self) -> Result<Self, GeometryError> {
        for (i, rail) in self.rails.iter().enumerate() {
            let norm = rail.direction.norm();
            if !((norm - 1.0).abs() <= GEOMETRY_TOLERANCE) {
                return Err(GeometryError::NonUnitDirection { leg: i + 1, norm });
            }
        }
        let d0 = self.rails[0].direction;
        for (i, rail) in self.rails.iter().enumerate().skip(1) {
            let cross = d0.cross(rail.direction);
            if cross.abs() > GEOMETRY_TOLERANCE || d0.dot(rail.direction) < 0.0 {
                return Err(GeometryError::NonParallelRails { leg: i + 1, cross });
            }
        }
        let positive = |field: String, value: f64| {
            if value > 0.0 && value.is_finite() {
                Ok(())
            } else {
                Err(GeometryError::NonPositiveLength { field, value })
            }
        };
        for (i, rail) in self.rails.iter().enumerate() {
            positive(format!("rails[{i}].stroke"), rail.stroke)?;
        }
        for (i, &l) in self.link_lengths.iter().enumerate() {
            positive(format!("link_lengths[{i}]"), l)?;
        }
        for (i, &l) in self.platform_offsets.iter().enumerate() {
            positive(format!("platform_offsets[{i}]"), l)?;
        }
        let o = self.platform_offsets;
        if !(o[0] > o[1] && o[1] > o[2]) {
            return Err(GeometryError::UnorderedPlatformOffsets { offsets: o });
        }
        Ok(self)
    }

    /// Platform joint positions `c_i = g - L_iG * (cos θ, sin θ)`.
    pub fn platform_points(&self, pose: &Pose) -> [Vec2; 3] {
        let g = pose.position();
        let u = Vec2::from_angle(pose.theta);
        self.platform_offsets.map(|offset| g - offset * u)
    }

    /// Largest stroke among the three rails.
    pub fn max_stroke(&self) -> f64 {
        self.rails.iter().map(|r| r.stroke).fold(0.0, f64::max)
    }

    /// Copy with every rail stroke replaced by `stroke`.
    pub fn with_stroke(&self, stroke: f64) -> Self {
        let mut g = self.clone();
        for rail in &mut g.rails {
            rail.stroke = stroke;
        }
        g
    }

    /// Copy with every length (anchors included) multiplied by `k`.
    pub fn scaled(&self, k: f64) -> Self {
        let mut g = self.clone();
        for rail in &mut g.rails {
            rail.anchor = k * rail.anchor;
            rail.stroke *= k;
        }
        g.link_lengths = g.link_lengths.map(|l| k * l);
        g.platform_offsets = g.platform_offsets.map(|l| k * l);
        g
    }

    /// Copy rigidly moved by `offset`.
    pub fn translated(&self, offset: Vec2) -> Self {
        let mut g = self.clone();
        for rail in &mut g.rails {
            rail.anchor = rail.anchor + offset;
        }
        g
    }
}

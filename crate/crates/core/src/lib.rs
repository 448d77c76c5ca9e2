//! Kinematic analysis of a planar 3-PRR parallel manipulator whose three
//! prismatic actuators slide on parallel rails and whose platform carries
//! three collinear revolute joints.
//!
//! * [`geometry`]: mechanism description and the pose to platform-joint map.
//! * [`kinematics`]: closed-form inverse kinematics, Newton forward
//!   kinematics and the direct/inverse Jacobian pair.
//! * [`singularity`]: serial and parallel singularity classification.
//! * [`motion`]: rate laws for the simple gripper motions and an RK4
//!   joint-space integrator.
//! * [`workspace`]: grid reachability scans, dead zones and stroke sweeps.

pub mod config;
pub mod export;
pub mod geometry;
pub mod kinematics;
pub mod motion;
pub mod singularity;
pub mod workspace;

pub use geometry::{Geometry, GeometryError, Rail, Vec2};
pub use kinematics::{
    BranchSelector, Configuration, Elbow, FkOptions, JacobianPair, JointVector, KinematicsError,
    Pose, Twist,
};
pub use singularity::{SingularityKind, SingularityReport, Thresholds};
pub use workspace::{CellClass, WorkspaceGrid, WorkspaceSpec};

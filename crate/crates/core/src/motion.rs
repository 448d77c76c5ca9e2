//! Simple-motion rate laws and joint-space trajectory integration.
//!
//! With parallel rails the three basic gripper motions need little or no
//! computation:
//!
//! * translation along the rails: every slider moves at the gripper speed;
//! * translation across the rails: `ρ̇_i = V tan α_i`;
//! * rotation about `G`: `ρ̇_i = L_iG θ̇ sin(θ - α_i) / cos α_i`.
//!
//! Each law is the closed form of `B⁻¹ A ṗ` for its twist.  The rotation law
//! sign follows from placing `C_i` behind `G` on the platform axis.

use std::f64::consts::PI;
use std::fmt::Write as _;

use thiserror::Error;

use crate::export::fmt_f64;
use crate::geometry::{Geometry, Vec2, GEOMETRY_TOLERANCE};
use crate::kinematics::{
    assemble, forward_kinematics, inverse_kinematics, jacobians, twist_to_joint_rates, wrap_angle,
    BranchSelector, Configuration, FkOptions, JointVector, KinematicsError, Pose, Twist,
};
use crate::singularity::{classify, SingularityKind, SingularityReport, Thresholds};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RateLaw {
    /// Gripper speed along the rails.
    Horizontal(f64),
    /// Gripper speed across the rails.
    Vertical(f64),
    /// Platform angular rate about `G`.
    Rotation(f64),
    GeneralTwist(Twist),
}

impl RateLaw {
    /// The twist each law realizes, for rails along +x.
    pub fn canonical_twist(&self) -> Twist {
        match *self {
            RateLaw::Horizontal(v) => Twist::new(v, 0.0, 0.0),
            RateLaw::Vertical(v) => Twist::new(0.0, v, 0.0),
            RateLaw::Rotation(w) => Twist::new(0.0, 0.0, w),
            RateLaw::GeneralTwist(t) => t,
        }
    }

    fn is_finite(&self) -> bool {
        let t = self.canonical_twist();
        t.vx.is_finite() && t.vy.is_finite() && t.omega.is_finite()
    }
}

impl std::fmt::Display for RateLaw {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RateLaw::Horizontal(v) => write!(f, "horizontal:{v}"),
            RateLaw::Vertical(v) => write!(f, "vertical:{v}"),
            RateLaw::Rotation(w) => write!(f, "rotation:{w}"),
            RateLaw::GeneralTwist(t) => write!(f, "twist:{},{},{}", t.vx, t.vy, t.omega),
        }
    }
}

#[derive(Debug, Error)]
pub enum MotionError {
    #[error("rail {leg} is not aligned with the translation axis")]
    RailMisaligned { leg: usize },
    #[error("rate law parameter must be finite")]
    NonFiniteLaw,
    #[error("time step must be positive and finite, got {0}")]
    InvalidTimeStep(f64),
    #[error("singularity ({}) reached at step {step}", .report.kind)]
    SingularityEncountered {
        step: usize,
        report: SingularityReport,
        /// Samples accepted before the halt.
        trace: Box<TrajectoryTrace>,
    },
    #[error(transparent)]
    Kinematics(#[from] KinematicsError),
}

/// Translation along `axis`: every slider moves with the gripper.
pub fn horizontal_rates(
    geometry: &Geometry,
    axis: Vec2,
    speed: f64,
) -> Result<[f64; 3], MotionError> {
    for (i, rail) in geometry.rails.iter().enumerate() {
        if rail.direction.cross(axis).abs() > GEOMETRY_TOLERANCE || rail.direction.dot(axis) <= 0.0
        {
            return Err(MotionError::RailMisaligned { leg: i + 1 });
        }
    }
    Ok([speed; 3])
}

fn cos_guard(config: &Configuration, thresholds: &Thresholds) -> Result<[f64; 3], KinematicsError> {
    let mut cos = [0.0; 3];
    for (leg, alpha) in config.alpha.iter().enumerate() {
        cos[leg] = alpha.cos();
        if cos[leg].abs() <= thresholds.serial {
            return Err(KinematicsError::SerialSingularity {
                leg: leg + 1,
                cos_alpha: cos[leg],
            });
        }
    }
    Ok(cos)
}

/// Translation across the rails at `speed`: `ρ̇_i = V tan α_i`.
pub fn vertical_rates(
    config: &Configuration,
    speed: f64,
    thresholds: &Thresholds,
) -> Result<[f64; 3], KinematicsError> {
    let cos = cos_guard(config, thresholds)?;
    Ok(std::array::from_fn(|i| {
        speed * config.alpha[i].sin() / cos[i]
    }))
}

/// Pure rotation about `G` at `omega`.
pub fn rotation_rates(
    config: &Configuration,
    geometry: &Geometry,
    omega: f64,
    thresholds: &Thresholds,
) -> Result<[f64; 3], KinematicsError> {
    let cos = cos_guard(config, thresholds)?;
    Ok(std::array::from_fn(|i| {
        // platform angle relative to this rail
        let theta = config.pose.theta - geometry.rails[i].direction.angle();
        geometry.platform_offsets[i] * omega * (theta - config.alpha[i]).sin() / cos[i]
    }))
}

/// Platform angle from the first link angle and the revolute angle at `C_1`:
/// `θ = β + α_1 - π`.
pub fn theta_from_alpha_beta(alpha1: f64, beta: f64) -> f64 {
    wrap_angle(beta + alpha1 - PI)
}

/// Counter-clockwise angle at `C_1` from the link (toward `B_1`) to the
/// platform (toward `G`), in `[0, 2π)`.
pub fn measured_beta(config: &Configuration) -> f64 {
    let to_slider = config.b[0] - config.c[0];
    let to_gripper = config.pose.position() - config.c[0];
    to_slider
        .cross(to_gripper)
        .atan2(to_slider.dot(to_gripper))
        .rem_euclid(2.0 * PI)
}

/// Joint rates commanded by `law` at `config`.
pub fn joint_rates(
    law: &RateLaw,
    config: &Configuration,
    geometry: &Geometry,
    thresholds: &Thresholds,
) -> Result<[f64; 3], MotionError> {
    Ok(match *law {
        RateLaw::Horizontal(v) => horizontal_rates(geometry, Vec2::new(1.0, 0.0), v)?,
        RateLaw::Vertical(v) => vertical_rates(config, v, thresholds)?,
        RateLaw::Rotation(w) => rotation_rates(config, geometry, w, thresholds)?,
        RateLaw::GeneralTwist(t) => twist_to_joint_rates(config, geometry, &t, thresholds)?,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceSample {
    pub time: f64,
    pub pose: Pose,
    pub joints: JointVector,
    /// Normalized singularity margin of the sample's configuration.
    pub margin: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryTrace {
    pub initial: TraceSample,
    /// One sample per completed step, at `t = k·dt` for `k = 1, 2, ...`.
    pub samples: Vec<TraceSample>,
    pub dt: f64,
    pub law: RateLaw,
}

impl TrajectoryTrace {
    pub const CSV_HEADER: &'static str = "t,x_G,y_G,theta_G_rad,rho_1,rho_2,rho_3,margin";

    pub fn final_pose(&self) -> Pose {
        self.samples.last().unwrap_or(&self.initial).pose
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("{}\n", Self::CSV_HEADER);
        for s in &self.samples {
            let [r1, r2, r3] = s.joints.0;
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                fmt_f64(s.time),
                fmt_f64(s.pose.x),
                fmt_f64(s.pose.y),
                fmt_f64(s.pose.theta),
                fmt_f64(r1),
                fmt_f64(r2),
                fmt_f64(r3),
                fmt_f64(s.margin)
            );
        }
        out
    }

    /// Path of `G`, initial point included.
    pub fn path(&self) -> Vec<Vec2> {
        std::iter::once(&self.initial)
            .chain(&self.samples)
            .map(|s| s.pose.position())
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimulationOptions {
    pub thresholds: Thresholds,
    /// Halt before recording a sample whose margin falls below this.
    pub margin_floor: f64,
    pub fk: FkOptions,
}

impl Default for SimulationOptions {
    fn default() -> Self {
        Self {
            thresholds: Thresholds::default(),
            margin_floor: 1e-6,
            // steps are short, so Newton from the last pose tracks the motion
            fk: FkOptions {
                nearest_mode: false,
                ..FkOptions::default()
            },
        }
    }
}

struct Sampled {
    config: Configuration,
    margin: f64,
    det_a_sign: bool,
}

fn sample(config: Configuration, geometry: &Geometry) -> Sampled {
    let pair = jacobians(&config, geometry);
    let det_a = pair.det_a_normalized(geometry);
    let margin = det_a.abs().min(pair.det_b_normalized(geometry).abs());
    Sampled {
        config,
        margin,
        det_a_sign: det_a > 0.0,
    }
}

/// Integrates `law` in joint space with classical fourth-order Runge-Kutta.
///
/// The pose at every stage is recovered by forward kinematics seeded with the
/// last accepted pose.  Integration halts with
/// [`MotionError::SingularityEncountered`] when a new sample's margin drops
/// below the floor, when a leg switches elbow or `det A` changes sign between
/// samples (a singularity was crossed inside the step), or when the law itself
/// is undefined or the loops cannot be closed at a stage.  The report then
/// describes the last accepted configuration.
pub fn simulate(
    initial: &Pose,
    law: &RateLaw,
    dt: f64,
    steps: usize,
    geometry: &Geometry,
    branch: BranchSelector,
    options: &SimulationOptions,
) -> Result<TrajectoryTrace, MotionError> {
    if !law.is_finite() {
        return Err(MotionError::NonFiniteLaw);
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(MotionError::InvalidTimeStep(dt));
    }
    let start = inverse_kinematics(initial, geometry, branch, false)?;
    let mut current = sample(start, geometry);
    let mut trace = TrajectoryTrace {
        initial: TraceSample {
            time: 0.0,
            pose: current.config.pose,
            joints: current.config.joints,
            margin: current.margin,
        },
        samples: Vec::with_capacity(steps),
        dt,
        law: *law,
    };

    let halt = |step: usize, config: &Configuration, trace: TrajectoryTrace| {
        MotionError::SingularityEncountered {
            step,
            report: classify(config, geometry, &options.thresholds),
            trace: Box::new(trace),
        }
    };

    let report = classify(&current.config, geometry, &options.thresholds);
    if report.kind != SingularityKind::Regular || current.margin < options.margin_floor {
        return Err(MotionError::SingularityEncountered {
            step: 0,
            report,
            trace: Box::new(trace),
        });
    }

    for step in 1..=steps {
        let q = current.config.joints.0;
        let seed = current.config.pose;
        let stage = |q: [f64; 3]| -> Result<(Configuration, [f64; 3]), MotionError> {
            let joints = JointVector(q);
            let pose = forward_kinematics(&joints, geometry, &seed, &options.fk)?;
            let config = assemble(&pose, &joints, geometry);
            let rates = joint_rates(law, &config, geometry, &options.thresholds)?;
            Ok((config, rates))
        };
        let add = |a: [f64; 3], k: [f64; 3], h: f64| std::array::from_fn(|i| a[i] + h * k[i]);

        let stages = || -> Result<[f64; 3], MotionError> {
            let k1 = joint_rates(law, &current.config, geometry, &options.thresholds)?;
            let (_, k2) = stage(add(q, k1, dt / 2.0))?;
            let (_, k3) = stage(add(q, k2, dt / 2.0))?;
            let (_, k4) = stage(add(q, k3, dt))?;
            Ok(std::array::from_fn(|i| {
                q[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
            }))
        };
        // A stage whose law is undefined, or whose joints no longer close the
        // loops, means the step ran into the boundary of the serial
        // singularity locus.
        let next_q = match stages() {
            Ok(q) => q,
            Err(MotionError::Kinematics(
                KinematicsError::SerialSingularity { .. }
                | KinematicsError::NoConvergence { .. }
                | KinematicsError::SingularIteration { .. },
            )) => {
                let config = current.config.clone();
                return Err(halt(step, &config, trace));
            }
            Err(e) => return Err(e),
        };

        let joints = JointVector(next_q);
        let pose = match forward_kinematics(&joints, geometry, &seed, &options.fk) {
            Ok(pose) => pose,
            Err(_) => {
                let config = current.config.clone();
                return Err(halt(step, &config, trace));
            }
        };
        let next = sample(assemble(&pose, &joints, geometry), geometry);
        let crossed =
            next.config.branch != current.config.branch || next.det_a_sign != current.det_a_sign;
        if crossed || next.margin < options.margin_floor {
            let config = if crossed {
                current.config.clone()
            } else {
                next.config.clone()
            };
            return Err(halt(step, &config, trace));
        }
        trace.samples.push(TraceSample {
            time: step as f64 * dt,
            pose: next.config.pose,
            joints: next.config.joints,
            margin: next.margin,
        });
        current = next;
    }
    Ok(trace)
}

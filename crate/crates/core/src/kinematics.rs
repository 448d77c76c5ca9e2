//! Position and velocity kinematics.
//!
//! Each leg closes the loop `g = b_i + (c_i - b_i) + (g - c_i)`.  Taking the
//! time derivative and projecting on the link direction `c_i - b_i` removes
//! the passive joint rate and leaves one scalar equation per leg:
//!
//! ```text
//! (c_i - b_i)ᵀ ġ + θ̇ (c_i - b_i)ᵀ E (c_i - g) = ρ̇_i (c_i - b_i)ᵀ d_i
//! ```
//!
//! Stacked, this is `A ṗ = B q̇` with the direct-kinematics matrix `A` and the
//! diagonal inverse-kinematics matrix `B`.  `E` is the quarter turn
//! [`Vec2::perp`].

use std::f64::consts::{PI, TAU};

use nalgebra::{Matrix3, Vector3};
use thiserror::Error;

use crate::geometry::{Geometry, Rail, Vec2};
use crate::singularity::Thresholds;

/// Wraps an angle to `(-π, π]`.
pub fn wrap_angle(angle: f64) -> f64 {
    let w = angle.rem_euclid(TAU);
    if w > PI {
        w - TAU
    } else {
        w
    }
}

/// Smallest signed difference `a - b` between two angles.
pub fn angle_difference(a: f64, b: f64) -> f64 {
    wrap_angle(a - b)
}

/// End-effector pose `(x_G, y_G, θ_G)`; the angle is kept in `(-π, π]`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

impl Pose {
    pub fn new(x: f64, y: f64, theta: f64) -> Self {
        Self {
            x,
            y,
            theta: wrap_angle(theta),
        }
    }

    pub fn position(&self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }

    /// Pose displaced by `scale * twist`.
    pub fn offset(&self, twist: &Twist, scale: f64) -> Self {
        Self::new(
            self.x + scale * twist.vx,
            self.y + scale * twist.vy,
            self.theta + scale * twist.omega,
        )
    }

    /// Largest componentwise difference, angles compared modulo 2π.
    pub fn max_difference(&self, other: &Pose) -> f64 {
        (self.x - other.x)
            .abs()
            .max((self.y - other.y).abs())
            .max(angle_difference(self.theta, other.theta).abs())
    }
}

/// Planar twist `(ẋ_G, ẏ_G, θ̇_G)`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Twist {
    pub vx: f64,
    pub vy: f64,
    pub omega: f64,
}

impl Twist {
    pub const fn new(vx: f64, vy: f64, omega: f64) -> Self {
        Self { vx, vy, omega }
    }

    pub fn as_vector(&self) -> Vector3<f64> {
        Vector3::new(self.vx, self.vy, self.omega)
    }
}

/// Actuated joint values `ρ_i = |A_i B_i|`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct JointVector(pub [f64; 3]);

impl JointVector {
    pub fn max_difference(&self, other: &JointVector) -> f64 {
        (0..3)
            .map(|i| (self.0[i] - other.0[i]).abs())
            .fold(0.0, f64::max)
    }
}

/// Which of the two slider positions a leg uses.  `Plus` puts the slider
/// ahead of the foot of `C_i` along the rail direction, `Minus` behind it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Elbow {
    Plus,
    Minus,
}

impl Elbow {
    pub fn sign(self) -> f64 {
        match self {
            Elbow::Plus => 1.0,
            Elbow::Minus => -1.0,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Elbow::Plus => Elbow::Minus,
            Elbow::Minus => Elbow::Plus,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct BranchSelector(pub [Elbow; 3]);

impl BranchSelector {
    pub const ALL_MINUS: BranchSelector = BranchSelector([Elbow::Minus; 3]);

    /// The eight assembly combinations, `---` first, `+++` last.
    pub fn all() -> [BranchSelector; 8] {
        std::array::from_fn(|k| {
            BranchSelector(std::array::from_fn(|leg| {
                if k >> (2 - leg) & 1 == 1 {
                    Elbow::Plus
                } else {
                    Elbow::Minus
                }
            }))
        })
    }

    pub fn mirrored(&self) -> Self {
        BranchSelector(self.0.map(Elbow::flipped))
    }
}

impl std::fmt::Display for BranchSelector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for e in self.0 {
            f.write_str(if e == Elbow::Plus { "+" } else { "-" })?;
        }
        Ok(())
    }
}

impl std::str::FromStr for BranchSelector {
    type Err = String;

    /// Accepts three signs, optionally comma separated: `+-+`, `+,-,+`,
    /// `1,-1,1`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let tokens: Vec<&str> = if s.contains(',') {
            s.split(',').map(str::trim).collect()
        } else {
            s.trim().matches(['+', '-']).collect()
        };
        let mut elbows = Vec::with_capacity(3);
        for t in &tokens {
            elbows.push(match *t {
                "+" | "1" | "+1" => Elbow::Plus,
                "-" | "-1" => Elbow::Minus,
                _ => return Err(format!("invalid elbow sign `{t}` in `{s}`")),
            });
        }
        let arr: [Elbow; 3] = elbows
            .try_into()
            .map_err(|_| format!("expected three elbow signs, got `{s}`"))?;
        Ok(BranchSelector(arr))
    }
}

/// Fully assembled state of the mechanism.
#[derive(Clone, Debug, PartialEq)]
pub struct Configuration {
    pub pose: Pose,
    pub joints: JointVector,
    /// Slider points `b_i`.
    pub b: [Vec2; 3],
    /// Platform joints `c_i`.
    pub c: [Vec2; 3],
    /// Angle of `c_i - b_i` measured from the rail direction.
    pub alpha: [f64; 3],
    pub branch: BranchSelector,
}

impl Configuration {
    pub fn link(&self, leg: usize) -> Vec2 {
        self.c[leg] - self.b[leg]
    }

    /// Largest deviation of `|c_i - b_i|` from the link length.
    pub fn loop_closure_error(&self, geometry: &Geometry) -> f64 {
        (0..3)
            .map(|i| (self.link(i).norm() - geometry.link_lengths[i]).abs())
            .fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug)]
pub struct JacobianPair {
    pub a: Matrix3<f64>,
    pub b: Matrix3<f64>,
    pub det_a: f64,
    pub det_b: f64,
}

impl JacobianPair {
    /// `det A / (L_11 L_22 L_33 · max L_iG)`, dimensionless.
    pub fn det_a_normalized(&self, geometry: &Geometry) -> f64 {
        self.det_a / det_a_scale(geometry)
    }

    /// `det B / (L_11 L_22 L_33) = Π cos α_i`.
    pub fn det_b_normalized(&self, geometry: &Geometry) -> f64 {
        self.det_b / geometry.link_lengths.iter().product::<f64>()
    }
}

pub(crate) fn det_a_scale(geometry: &Geometry) -> f64 {
    let arm = geometry
        .platform_offsets
        .iter()
        .copied()
        .fold(0.0, f64::max);
    geometry.link_lengths.iter().product::<f64>() * arm
}

#[derive(Clone, Debug, Error, PartialEq)]
pub enum KinematicsError {
    #[error("leg {leg} cannot reach its platform joint (off-rail distance exceeds link length by {margin:.6e})")]
    Unreachable { leg: usize, margin: f64 },
    #[error("leg {leg} needs rho = {rho:.6}, outside its stroke by {margin:.6e}")]
    StrokeViolation { leg: usize, rho: f64, margin: f64 },
    #[error("forward kinematics did not converge after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("forward kinematics hit a near-singular Newton matrix at iteration {iteration} (condition {condition:.3e})")]
    SingularIteration { iteration: usize, condition: f64 },
    #[error("serial singularity on leg {leg} (cos alpha = {cos_alpha:.3e})")]
    SerialSingularity { leg: usize, cos_alpha: f64 },
    #[error("parallel singularity (normalized det A = {det_a_normalized:.3e})")]
    ParallelSingularity { det_a_normalized: f64 },
}

struct LegSolution {
    rho: f64,
    slider: Vec2,
    alpha: f64,
}

fn solve_leg(
    leg: usize,
    rail: &Rail,
    link: f64,
    c: Vec2,
    elbow: Elbow,
    strict_stroke: bool,
) -> Result<LegSolution, KinematicsError> {
    let (s, e) = rail.local_coordinates(c);
    if e.abs() > link {
        return Err(KinematicsError::Unreachable {
            leg: leg + 1,
            margin: e.abs() - link,
        });
    }
    let root = (link * link - e * e).max(0.0).sqrt();
    let along = -elbow.sign() * root;
    let rho = s - along;
    if strict_stroke && !(0.0..=rail.stroke).contains(&rho) {
        let margin = if rho < 0.0 { -rho } else { rho - rail.stroke };
        return Err(KinematicsError::StrokeViolation {
            leg: leg + 1,
            rho,
            margin,
        });
    }
    Ok(LegSolution {
        rho,
        slider: rail.point_at(rho),
        alpha: e.atan2(along),
    })
}

/// Closed-form inverse kinematics for one assembly mode.
///
/// For each leg the slider sits on the rail at `s_i + elbow_i * sqrt(L_ii² - e_i²)`
/// where `(s_i, e_i)` are the along-rail and off-rail coordinates of `c_i`.
/// With `strict_stroke` the joint values must also lie in `[0, stroke]`.
pub fn inverse_kinematics(
    pose: &Pose,
    geometry: &Geometry,
    branch: BranchSelector,
    strict_stroke: bool,
) -> Result<Configuration, KinematicsError> {
    let c = geometry.platform_points(pose);
    let mut joints = [0.0; 3];
    let mut b = [Vec2::ZERO; 3];
    let mut alpha = [0.0; 3];
    for leg in 0..3 {
        let sol = solve_leg(
            leg,
            &geometry.rails[leg],
            geometry.link_lengths[leg],
            c[leg],
            branch.0[leg],
            strict_stroke,
        )?;
        joints[leg] = sol.rho;
        b[leg] = sol.slider;
        alpha[leg] = sol.alpha;
    }
    Ok(Configuration {
        pose: *pose,
        joints: JointVector(joints),
        b,
        c,
        alpha,
        branch,
    })
}

/// Returns an assembly mode for which the pose passes strict-stroke IK, trying
/// each leg's two roots independently (equivalent to trying all eight
/// combinations).
pub fn reachable_branch(pose: &Pose, geometry: &Geometry) -> Option<BranchSelector> {
    let c = geometry.platform_points(pose);
    let mut elbows = [Elbow::Minus; 3];
    for leg in 0..3 {
        let rail = &geometry.rails[leg];
        let (s, e) = rail.local_coordinates(c[leg]);
        let link = geometry.link_lengths[leg];
        if e.abs() > link {
            return None;
        }
        let root = (link * link - e * e).max(0.0).sqrt();
        let ok = |rho: f64| (0.0..=rail.stroke).contains(&rho);
        elbows[leg] = if ok(s - root) {
            Elbow::Minus
        } else if ok(s + root) {
            Elbow::Plus
        } else {
            return None;
        };
    }
    Some(BranchSelector(elbows))
}

/// Builds the configuration implied by a pose and joint values.  The branch is
/// read from which side of `c_i`'s foot each slider sits on; `α_i` is taken
/// from the actual link vector, so loop closure is not enforced here.
pub fn assemble(pose: &Pose, joints: &JointVector, geometry: &Geometry) -> Configuration {
    let c = geometry.platform_points(pose);
    let mut b = [Vec2::ZERO; 3];
    let mut alpha = [0.0; 3];
    let mut elbows = [Elbow::Minus; 3];
    for leg in 0..3 {
        let rail = &geometry.rails[leg];
        b[leg] = rail.point_at(joints.0[leg]);
        let link = c[leg] - b[leg];
        let along = link.dot(rail.direction);
        alpha[leg] = link.dot(rail.direction.perp()).atan2(along);
        elbows[leg] = if along > 0.0 {
            Elbow::Minus
        } else {
            Elbow::Plus
        };
    }
    Configuration {
        pose: *pose,
        joints: *joints,
        b,
        c,
        alpha,
        branch: BranchSelector(elbows),
    }
}

/// Loop-closure residuals `|c_i(pose) - b_i|² - L_ii²`.
pub fn residuals(pose: &Pose, joints: &JointVector, geometry: &Geometry) -> [f64; 3] {
    let c = geometry.platform_points(pose);
    std::array::from_fn(|i| {
        let link = c[i] - geometry.rails[i].point_at(joints.0[i]);
        let l = geometry.link_lengths[i];
        link.dot(link) - l * l
    })
}

fn max_abs(r: &[f64; 3]) -> f64 {
    r.iter().map(|v| v.abs()).fold(0.0, f64::max)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FkOptions {
    /// Convergence threshold on `max_i |r_i|`.
    pub tol: f64,
    pub max_iter: usize,
    /// Newton steps are refused above this condition number.
    pub max_condition: f64,
    /// Compare the Newton result against every assembly mode and keep the
    /// one nearest the seed.  Without it the result is wherever Newton
    /// iteration from the seed settles, which is cheaper and is the natural
    /// choice when tracking a continuous motion.
    pub nearest_mode: bool,
}

impl Default for FkOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 50,
            max_condition: 1e12,
            nearest_mode: true,
        }
    }
}

/// Rows `[(c_i - b_i)ᵀ, (c_i - b_i)ᵀ E (c_i - g)]`.
fn direct_matrix(g: Vec2, b: &[Vec2; 3], c: &[Vec2; 3]) -> Matrix3<f64> {
    Matrix3::from_fn(|i, j| {
        let link = c[i] - b[i];
        match j {
            0 => link.x,
            1 => link.y,
            _ => link.dot((c[i] - g).perp()),
        }
    })
}

fn condition_number(m: &Matrix3<f64>, moment_arm: f64) -> f64 {
    // third column carries an extra length; rescale before comparing
    let mut scaled = *m;
    scaled.column_mut(2).scale_mut(1.0 / moment_arm);
    let sv = scaled.singular_values();
    let max = sv.max();
    let min = sv.min();
    if min > 0.0 {
        max / min
    } else {
        f64::INFINITY
    }
}

/// Solves for the pose that closes all three loops at the given joint
/// positions, returning the assembly mode nearest `seed`.
///
/// Newton iteration on the residuals `‖c_i - b_i‖² - L_ii²` runs from the
/// seed, with steps halved until the residual norm decreases.  Newton alone
/// can be drawn into a distant assembly mode when two modes are close, so
/// the modes found by [`assembly_modes`] are compared as well and the one
/// with the smallest [`pose_distance`] to the seed wins, unless
/// [`FkOptions::nearest_mode`] is off.  A seed at which the
/// residual Jacobian is singular is rejected with
/// [`KinematicsError::SingularIteration`].
pub fn forward_kinematics(
    joints: &JointVector,
    geometry: &Geometry,
    seed: &Pose,
    options: &FkOptions,
) -> Result<Pose, KinematicsError> {
    let from_seed = newton(joints, geometry, seed, options);
    if !options.nearest_mode {
        return from_seed;
    }
    if let Err(e @ KinematicsError::SingularIteration { iteration: 0, .. }) = from_seed {
        return Err(e);
    }
    let scale = geometry
        .platform_offsets
        .iter()
        .copied()
        .fold(0.0, f64::max);
    let mut best = from_seed.as_ref().ok().copied();
    for start in assembly_modes(joints, geometry) {
        let nearer = best
            .is_none_or(|p| pose_distance(&start, seed, scale) < pose_distance(&p, seed, scale));
        if nearer {
            if let Ok(p) = newton(joints, geometry, &start, options) {
                if best
                    .is_none_or(|q| pose_distance(&p, seed, scale) < pose_distance(&q, seed, scale))
                {
                    best = Some(p);
                }
            }
        }
    }
    match (best, from_seed) {
        (Some(p), _) => Ok(p),
        (None, Err(e)) => Err(e),
        (None, Ok(p)) => Ok(p),
    }
}

/// Distance between two poses with the orientation difference weighted by
/// `arm`, so that it is comparable to the displacement of a platform joint.
pub fn pose_distance(a: &Pose, b: &Pose, arm: f64) -> f64 {
    let dx = a.x - b.x;
    let dy = a.y - b.y;
    let dt = arm * angle_difference(a.theta, b.theta);
    (dx * dx + dy * dy + dt * dt).sqrt()
}

const MODE_SAMPLES: usize = 1440;

/// Starting poses near every assembly mode at the given joint positions.
///
/// For a fixed orientation the first platform joint lies on two circles, one
/// per loop of legs 1 and 2, giving up to two candidates; the residual of leg
/// 3 is then a function of the orientation alone.  Its sign changes over a
/// uniform orientation grid are refined by bisection.  Local dips of its
/// magnitude are searched for a hidden pair of roots, and the ends of the
/// orientation intervals where the circles meet are added as extra starting
/// points for Newton iteration.
pub fn assembly_modes(joints: &JointVector, geometry: &Geometry) -> Vec<Pose> {
    let b: [Vec2; 3] = std::array::from_fn(|i| geometry.rails[i].point_at(joints.0[i]));
    let [l1, l2, l3] = geometry.link_lengths;
    let [o1, o2, o3] = geometry.platform_offsets;
    // pose with c_1 on the circle pair; `side` picks the intersection
    let candidate = |theta: f64, side: f64| -> Option<(Pose, f64)> {
        let u = Vec2::from_angle(theta);
        let centre = b[1] - (o1 - o2) * u;
        let c1 = circle_intersection(b[0], l1, centre, l2, side)?;
        let c3 = c1 + (o1 - o3) * u;
        let g = c1 + o1 * u;
        let f = (c3 - b[2]).dot(c3 - b[2]) - l3 * l3;
        Some((Pose::new(g.x, g.y, theta), f))
    };
    let step = TAU / MODE_SAMPLES as f64;
    let f = |theta: f64, side: f64| candidate(theta, side).map(|(_, f)| f);
    // root of f in [lo, hi] given a sign change between the ends
    let bisect = |mut lo: f64, mut hi: f64, side: f64| -> Option<Pose> {
        let mut flo = f(lo, side)?;
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            match f(mid, side) {
                Some(fm) if fm.signum() == flo.signum() && fm != 0.0 => {
                    lo = mid;
                    flo = fm;
                }
                Some(_) => hi = mid,
                None => break,
            }
        }
        candidate(0.5 * (lo + hi), side).map(|(pose, _)| pose)
    };
    let mut modes = Vec::new();
    for side in [1.0, -1.0] {
        let samples: Vec<Option<f64>> = (0..=MODE_SAMPLES)
            .map(|k| f(-PI + k as f64 * step, side))
            .collect();
        let theta = |k: usize| -PI + k as f64 * step;
        for k in 1..samples.len() {
            let (Some(f0), Some(f1)) = (samples[k - 1], samples[k]) else {
                // the circles stop meeting inside this interval; locate the
                // edge, where both sides join, and look for a root before it
                let (inside, fin) = match (samples[k - 1], samples[k]) {
                    (Some(v), None) => (theta(k - 1), v),
                    (None, Some(v)) => (theta(k), v),
                    _ => continue,
                };
                let (mut ok, mut out) = (inside, theta(k - 1) + theta(k) - inside);
                for _ in 0..60 {
                    let mid = 0.5 * (ok + out);
                    if f(mid, side).is_some() {
                        ok = mid;
                    } else {
                        out = mid;
                    }
                }
                match f(ok, side) {
                    Some(fe) if fe.signum() != fin.signum() => {
                        modes.extend(bisect(inside, ok, side))
                    }
                    _ => modes.extend(candidate(ok, side).map(|(pose, _)| pose)),
                }
                continue;
            };
            if f0 == 0.0 || f0.signum() != f1.signum() {
                modes.extend(bisect(theta(k - 1), theta(k), side));
                continue;
            }
            let Some(Some(f2)) = samples.get(k + 1) else {
                continue;
            };
            if f1.abs() < f0.abs() && f1.abs() <= f2.abs() {
                // a dip of |f| without a sign change can hide a close pair of
                // roots; locate the extremum by golden-section search
                let sign = f1.signum();
                let (mut lo, mut hi) = (theta(k - 1), theta(k + 1));
                let ratio = (5f64.sqrt() - 1.0) / 2.0;
                for _ in 0..80 {
                    let m1 = hi - ratio * (hi - lo);
                    let m2 = lo + ratio * (hi - lo);
                    let v1 = f(m1, side).map_or(f64::INFINITY, |v| sign * v);
                    let v2 = f(m2, side).map_or(f64::INFINITY, |v| sign * v);
                    if v1 < v2 {
                        hi = m2;
                    } else {
                        lo = m1;
                    }
                }
                let extremum = 0.5 * (lo + hi);
                match f(extremum, side) {
                    Some(fe) if fe.signum() != sign => {
                        modes.extend(bisect(theta(k - 1), extremum, side));
                        modes.extend(bisect(extremum, theta(k + 1), side));
                    }
                    _ => modes.extend(candidate(extremum, side).map(|(pose, _)| pose)),
                }
            }
        }
    }
    modes
}

/// Intersection of two circles; `side` selects the point to the left
/// (positive) or right (negative) of the line from `p` to `q`.
fn circle_intersection(p: Vec2, rp: f64, q: Vec2, rq: f64, side: f64) -> Option<Vec2> {
    let d = q - p;
    let dist2 = d.dot(d);
    if dist2 == 0.0 {
        return None;
    }
    let a = (rp * rp - rq * rq + dist2) / (2.0 * dist2);
    let h2 = rp * rp / dist2 - a * a;
    if h2 < 0.0 {
        return None;
    }
    Some(p + a * d + (side * h2.sqrt()) * d.perp())
}

fn newton(
    joints: &JointVector,
    geometry: &Geometry,
    seed: &Pose,
    options: &FkOptions,
) -> Result<Pose, KinematicsError> {
    let b: [Vec2; 3] = std::array::from_fn(|i| geometry.rails[i].point_at(joints.0[i]));
    let arm = geometry
        .platform_offsets
        .iter()
        .copied()
        .fold(0.0, f64::max);
    let mut pose = *seed;
    let mut r = residuals(&pose, joints, geometry);
    // after convergence one more Newton step is taken; being quadratic it
    // brings the pose error down to rounding level
    let mut polished = false;
    for iteration in 0..options.max_iter {
        let converged = max_abs(&r) <= options.tol;
        if converged && (polished || max_abs(&r) == 0.0) {
            return Ok(pose);
        }
        let c = geometry.platform_points(&pose);
        let jac = 2.0 * direct_matrix(pose.position(), &b, &c);
        let condition = condition_number(&jac, arm);
        let step = if condition <= options.max_condition {
            jac.lu().solve(&Vector3::from(r))
        } else {
            None
        };
        let Some(step) = step else {
            if converged {
                return Ok(pose);
            }
            return Err(KinematicsError::SingularIteration {
                iteration,
                condition,
            });
        };
        let norm = Vector3::from(r).norm();
        let mut lambda = 1.0;
        let mut accepted = None;
        for _ in 0..40 {
            let trial = Pose::new(
                pose.x - lambda * step.x,
                pose.y - lambda * step.y,
                pose.theta - lambda * step.z,
            );
            let tr = residuals(&trial, joints, geometry);
            if Vector3::from(tr).norm() < norm {
                accepted = Some((trial, tr));
                break;
            }
            lambda *= 0.5;
        }
        match accepted {
            Some((p, tr)) => {
                pose = p;
                r = tr;
            }
            None if converged => return Ok(pose),
            None => break,
        }
        polished = converged;
    }
    if max_abs(&r) <= options.tol {
        return Ok(pose);
    }
    Err(KinematicsError::NoConvergence {
        iterations: options.max_iter,
        residual: max_abs(&r),
    })
}

/// The direct and inverse kinematics matrices of a configuration.
pub fn jacobians(config: &Configuration, geometry: &Geometry) -> JacobianPair {
    let a = direct_matrix(config.pose.position(), &config.b, &config.c);
    let diag = Vector3::from_fn(|i, _| config.link(i).dot(geometry.rails[i].direction));
    JacobianPair {
        det_a: a.determinant(),
        det_b: diag.x * diag.y * diag.z,
        a,
        b: Matrix3::from_diagonal(&diag),
    }
}

/// `q̇ = B⁻¹ A ṗ`.
pub fn twist_to_joint_rates(
    config: &Configuration,
    geometry: &Geometry,
    twist: &Twist,
    thresholds: &Thresholds,
) -> Result<[f64; 3], KinematicsError> {
    let pair = jacobians(config, geometry);
    let ap = pair.a * twist.as_vector();
    let mut rates = [0.0; 3];
    for leg in 0..3 {
        let bii = pair.b[(leg, leg)];
        let cos_alpha = bii / geometry.link_lengths[leg];
        if cos_alpha.abs() <= thresholds.serial {
            return Err(KinematicsError::SerialSingularity {
                leg: leg + 1,
                cos_alpha,
            });
        }
        rates[leg] = ap[leg] / bii;
    }
    Ok(rates)
}

/// `ṗ = A⁻¹ B q̇`.
pub fn joint_rates_to_twist(
    config: &Configuration,
    geometry: &Geometry,
    rates: &[f64; 3],
    thresholds: &Thresholds,
) -> Result<Twist, KinematicsError> {
    let pair = jacobians(config, geometry);
    let det_a_normalized = pair.det_a_normalized(geometry);
    if !(det_a_normalized.abs() > thresholds.parallel) {
        return Err(KinematicsError::ParallelSingularity { det_a_normalized });
    }
    let bq = pair.b * Vector3::from(*rates);
    let p = pair
        .a
        .lu()
        .solve(&bq)
        .ok_or(KinematicsError::ParallelSingularity { det_a_normalized })?;
    Ok(Twist::new(p.x, p.y, p.z))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single_rail_geometry() -> Geometry {
        Geometry::on_x_axis([5.0; 3], [3.0, 2.0, 1.0], 10.0)
    }

    #[test]
    fn wrap_angle_range() {
        assert_eq!(wrap_angle(PI), PI);
        assert_eq!(wrap_angle(-PI), PI);
        assert!((wrap_angle(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-15);
        assert_eq!(wrap_angle(0.0), 0.0);
    }

    #[test]
    fn three_four_five_leg() {
        let rail = Rail::along_x(0.0, 10.0);
        let sol = solve_leg(0, &rail, 5.0, Vec2::new(7.0, 3.0), Elbow::Minus, true).unwrap();
        assert!((sol.rho - 3.0).abs() < 1e-15);
        assert_eq!(sol.slider, Vec2::new(3.0, 0.0));
        assert!((sol.alpha.to_degrees() - 36.869_897_645_844_02).abs() < 1e-12);
    }

    #[test]
    fn off_rail_distance_beyond_link_is_unreachable() {
        let rail = Rail::along_x(0.0, 10.0);
        let err = solve_leg(1, &rail, 5.0, Vec2::new(7.0, 6.0), Elbow::Minus, false).err();
        assert_eq!(
            err,
            Some(KinematicsError::Unreachable {
                leg: 2,
                margin: 1.0
            })
        );
    }

    #[test]
    fn strict_mode_reports_stroke_violation() {
        let g = single_rail_geometry();
        // c_1 = (1, 3): slider at 1 - 4 = -3 with the minus elbow
        let pose = Pose::new(4.0, 3.0, 0.0);
        let err = inverse_kinematics(&pose, &g, BranchSelector::ALL_MINUS, true).unwrap_err();
        assert_eq!(
            err,
            KinematicsError::StrokeViolation {
                leg: 1,
                rho: -3.0,
                margin: 3.0
            }
        );
        assert!(inverse_kinematics(&pose, &g, BranchSelector::ALL_MINUS, false).is_ok());
    }

    #[test]
    fn double_root_is_shared_by_both_elbows() {
        let rail = Rail::along_x(0.0, 10.0);
        let a = solve_leg(0, &rail, 5.0, Vec2::new(4.0, 5.0), Elbow::Minus, true).unwrap();
        let b = solve_leg(0, &rail, 5.0, Vec2::new(4.0, 5.0), Elbow::Plus, true).unwrap();
        assert_eq!(a.slider, b.slider);
    }

    #[test]
    fn equal_links_pose_closes_loops() {
        let g = Geometry::equal_links_25();
        let cfg = inverse_kinematics(
            &Pose::new(20.0, 20.0, 0.0),
            &g,
            BranchSelector::ALL_MINUS,
            false,
        )
        .unwrap();
        for i in 0..3 {
            assert!((cfg.link(i).norm() - 25.0).abs() < 1e-12);
        }
        // c = (5,20), (10,20), (15,20); root = 15
        assert_eq!(cfg.joints, JointVector([-10.0, -5.0, 0.0]));
    }

    #[test]
    fn branch_parsing_and_display() {
        let b: BranchSelector = "+-+".parse().unwrap();
        assert_eq!(b.to_string(), "+-+");
        assert_eq!("1,-1,1".parse::<BranchSelector>().unwrap(), b);
        assert!("++".parse::<BranchSelector>().is_err());
        assert_eq!(BranchSelector::all()[0], BranchSelector::ALL_MINUS);
        assert_eq!(BranchSelector::all()[5].to_string(), "+-+");
    }

    #[test]
    fn mirrored_branch_reflects_slider_about_foot() {
        let g = Geometry::graded_links(3.0);
        let pose = Pose::new(1.5, 0.8, 0.3);
        for branch in BranchSelector::all() {
            let a = inverse_kinematics(&pose, &g, branch, false).unwrap();
            let b = inverse_kinematics(&pose, &g, branch.mirrored(), false).unwrap();
            for i in 0..3 {
                let (s, _) = g.rails[i].local_coordinates(a.c[i]);
                assert!((a.joints.0[i] + b.joints.0[i] - 2.0 * s).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn reachable_branch_agrees_with_exhaustive_search() {
        let g = Geometry::graded_links(2.0);
        for ix in 0..40 {
            for iy in 0..15 {
                for it in 0..12 {
                    let pose = Pose::new(
                        -3.0 + 0.2 * ix as f64,
                        0.2 * iy as f64,
                        -PI + TAU * it as f64 / 12.0,
                    );
                    let exhaustive = BranchSelector::all()
                        .into_iter()
                        .any(|b| inverse_kinematics(&pose, &g, b, true).is_ok());
                    let fast = reachable_branch(&pose, &g);
                    assert_eq!(exhaustive, fast.is_some(), "{pose:?}");
                    if let Some(b) = fast {
                        assert!(inverse_kinematics(&pose, &g, b, true).is_ok());
                    }
                }
            }
        }
    }

    #[test]
    fn fk_returns_immediately_from_exact_seed() {
        let g = Geometry::graded_links(3.0);
        let pose = Pose::new(1.2, 1.0, 0.4);
        let cfg = inverse_kinematics(&pose, &g, BranchSelector::ALL_MINUS, false).unwrap();
        let opts = FkOptions {
            max_iter: 0,
            ..FkOptions::default()
        };
        assert_eq!(forward_kinematics(&cfg.joints, &g, &pose, &opts), Ok(pose));
    }

    #[test]
    fn fk_recovers_three_four_five_pose() {
        // three 3-4-5 legs; the middle one mirrored so the links are not all
        // parallel
        let mut g = Geometry::on_x_axis([5.0; 3], [3.0, 2.0, 1.0], 10.0);
        for (rail, x) in g.rails.iter_mut().zip([-3.0, 6.0, -1.0]) {
            rail.anchor = Vec2::new(x, 0.0);
        }
        let pose = Pose::new(7.0, 3.0, 0.0);
        let branch: BranchSelector = "-+-".parse().unwrap();
        let cfg = inverse_kinematics(&pose, &g, branch, true).unwrap();
        assert_eq!(cfg.joints, JointVector([3.0; 3]));
        let seed = Pose::new(6.8, 3.2, 0.05);
        let fk = forward_kinematics(&cfg.joints, &g, &seed, &FkOptions::default()).unwrap();
        assert!(fk.max_difference(&pose) < 1e-9, "{fk:?}");
    }

    #[test]
    fn horizontal_twist_moves_all_sliders_equally() {
        let g = Geometry::graded_links(3.0);
        let cfg = inverse_kinematics(
            &Pose::new(1.0, 1.2, 0.2),
            &g,
            BranchSelector::ALL_MINUS,
            false,
        )
        .unwrap();
        let t = Thresholds::default();
        let q = twist_to_joint_rates(&cfg, &g, &Twist::new(0.7, 0.0, 0.0), &t).unwrap();
        for qi in q {
            assert!((qi - 0.7).abs() < 1e-14);
        }
        let p = joint_rates_to_twist(&cfg, &g, &[0.7; 3], &t).unwrap();
        assert!((p.vx - 0.7).abs() < 1e-12 && p.vy.abs() < 1e-12 && p.omega.abs() < 1e-12);
        assert_eq!(
            twist_to_joint_rates(&cfg, &g, &Twist::default(), &t).unwrap(),
            [0.0; 3]
        );
        let zero = joint_rates_to_twist(&cfg, &g, &[0.0; 3], &t).unwrap();
        assert_eq!(zero, Twist::default());
    }

    #[test]
    fn vertical_twist_gives_tangent_law() {
        let g = Geometry::graded_links(3.0);
        let cfg = inverse_kinematics(&Pose::new(1.0, 1.2, 0.2), &g, "+-+".parse().unwrap(), false)
            .unwrap();
        let q = twist_to_joint_rates(&cfg, &g, &Twist::new(0.0, 1.5, 0.0), &Thresholds::default())
            .unwrap();
        for i in 0..3 {
            assert!((q[i] - 1.5 * cfg.alpha[i].tan()).abs() < 1e-12);
        }
    }

    #[test]
    fn inverse_matrix_is_diagonal_cosine() {
        let g = Geometry::graded_links(3.0);
        let cfg = inverse_kinematics(
            &Pose::new(0.5, 0.3, -0.2),
            &g,
            "-++".parse().unwrap(),
            false,
        )
        .unwrap();
        let pair = jacobians(&cfg, &g);
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    assert_eq!(pair.b[(i, j)], 0.0);
                }
            }
            let expected = g.link_lengths[i] * cfg.alpha[i].cos();
            assert!((pair.b[(i, i)] - expected).abs() < 1e-14);
        }
        assert_eq!(pair.det_b, pair.b[(0, 0)] * pair.b[(1, 1)] * pair.b[(2, 2)]);
    }

    #[test]
    fn perpendicular_link_zeroes_inverse_determinant() {
        let g = Geometry::graded_links(3.0);
        // e_1 = 1.7 = L_11 exactly
        let cfg = inverse_kinematics(
            &Pose::new(4.0, 1.7, 0.0),
            &g,
            BranchSelector::ALL_MINUS,
            false,
        )
        .unwrap();
        assert!((cfg.alpha[0] - PI / 2.0).abs() < 1e-15);
        let pair = jacobians(&cfg, &g);
        assert_eq!(pair.b[(0, 0)], 0.0);
        assert_eq!(pair.det_b, 0.0);
        let err =
            twist_to_joint_rates(&cfg, &g, &Twist::new(0.0, 1.0, 0.0), &Thresholds::default());
        assert!(matches!(
            err,
            Err(KinematicsError::SerialSingularity { leg: 1, .. })
        ));
    }

    #[test]
    fn links_along_rails_are_parallel_singular() {
        let g = Geometry::graded_links(3.0);
        let cfg = inverse_kinematics(
            &Pose::new(4.0, 0.0, 0.0),
            &g,
            BranchSelector::ALL_MINUS,
            false,
        )
        .unwrap();
        let pair = jacobians(&cfg, &g);
        assert!(pair.a.rank(1e-12) <= 2);
        assert_eq!(pair.det_a, 0.0);
        let err = joint_rates_to_twist(&cfg, &g, &[1.0; 3], &Thresholds::default());
        assert!(matches!(
            err,
            Err(KinematicsError::ParallelSingularity { .. })
        ));
    }
}

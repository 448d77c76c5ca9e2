//! Singularity classification.
//!
//! Serial singularities (`det B = 0`) occur when a link is perpendicular to
//! its rail and bound the workspace.  Parallel singularities (`det A = 0`)
//! occur when the three link lines are concurrent or all parallel; the
//! platform then gains a motion the actuators cannot resist.
//!
//! Both determinants are reported in dimensionless form so a single pair of
//! thresholds works for any mechanism size.

use std::fmt;

use crate::geometry::Geometry;
use crate::kinematics::{jacobians, Configuration};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Thresholds {
    /// Limit on `|cos α_i|`.
    pub serial: f64,
    /// Limit on the normalized `det A` and on normalized link cross products.
    pub parallel: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            serial: 1e-8,
            parallel: 1e-8,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SingularityKind {
    Regular,
    /// 1-based numbers of the legs whose link is perpendicular to the rail.
    Serial(Vec<usize>),
    ParallelIntersecting,
    ParallelParallel,
}

impl fmt::Display for SingularityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Regular => f.write_str("regular"),
            Self::Serial(legs) => {
                let legs: Vec<String> = legs.iter().map(usize::to_string).collect();
                write!(f, "serial[{}]", legs.join("+"))
            }
            Self::ParallelIntersecting => f.write_str("parallel-intersecting"),
            Self::ParallelParallel => f.write_str("parallel-parallel"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SingularityReport {
    pub kind: SingularityKind,
    pub det_a_normalized: f64,
    pub det_b_normalized: f64,
    pub min_cos_alpha: f64,
}

impl SingularityReport {
    pub const CSV_HEADER: &'static str = "kind,det_a_normalized,det_b_normalized,min_cos_alpha";

    pub fn csv_row(&self) -> String {
        use crate::export::fmt_f64;
        format!(
            "{},{},{},{}",
            self.kind,
            fmt_f64(self.det_a_normalized),
            fmt_f64(self.det_b_normalized),
            fmt_f64(self.min_cos_alpha)
        )
    }
}

/// Classifies a closed configuration.  When several conditions hold at once
/// the order is serial, then parallel links, then concurrent links; the
/// determinant fields still record everything.
pub fn classify(
    config: &Configuration,
    geometry: &Geometry,
    thresholds: &Thresholds,
) -> SingularityReport {
    let pair = jacobians(config, geometry);
    let det_a_normalized = pair.det_a_normalized(geometry);
    let det_b_normalized = pair.det_b_normalized(geometry);

    let cos: [f64; 3] = std::array::from_fn(|i| pair.b[(i, i)] / geometry.link_lengths[i]);
    let min_cos_alpha = cos.iter().map(|c| c.abs()).fold(f64::INFINITY, f64::min);

    let serial_legs: Vec<usize> = (0..3)
        .filter(|&i| cos[i].abs() <= thresholds.serial)
        .map(|i| i + 1)
        .collect();

    let l = geometry.link_lengths;
    let cross = |i: usize, j: usize| config.link(i).cross(config.link(j)) / (l[i] * l[j]);
    let links_parallel =
        cross(0, 1).abs() <= thresholds.parallel && cross(0, 2).abs() <= thresholds.parallel;

    let kind = if !serial_legs.is_empty() {
        SingularityKind::Serial(serial_legs)
    } else if links_parallel {
        SingularityKind::ParallelParallel
    } else if det_a_normalized.abs() <= thresholds.parallel {
        SingularityKind::ParallelIntersecting
    } else {
        SingularityKind::Regular
    };

    SingularityReport {
        kind,
        det_a_normalized,
        det_b_normalized,
        min_cos_alpha,
    }
}

/// `min(|det A|, |det B|)` in normalized units.
pub fn min_singular_margin(config: &Configuration, geometry: &Geometry) -> f64 {
    let pair = jacobians(config, geometry);
    pair.det_a_normalized(geometry)
        .abs()
        .min(pair.det_b_normalized(geometry).abs())
}

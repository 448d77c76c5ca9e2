//! Workspace mapping on a rectangular grid.
//!
//! The rectangle has height `h = min(L_iG + L_ii)` above the rail line and
//! width `w = 2h + L`, extending `h` beyond each end of the stroke.  Every
//! grid point is tested for a set of platform orientations; a point belongs to
//! the workspace if the mechanism can be assembled within its strokes for at
//! least one of them.
//!
//! The layout assumes rails running along +x, which is what every shipped
//! geometry uses.

use std::collections::VecDeque;
use std::f64::consts::PI;
use std::fmt::Write as _;

use thiserror::Error;

use crate::export::fmt_f64;
use crate::geometry::{Geometry, GeometryError};
use crate::kinematics::{reachable_branch, Pose};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rectangle {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundingBox {
    pub h: f64,
    pub w: f64,
    pub rectangle: Rectangle,
}

/// Sampling of the workspace rectangle.
///
/// Grid points are `x_i = x_min + i·Δx` for `i = 0..nx` (both edges
/// included) and `y_j = y_min + (j + 1)·Δy` for `j = 0..ny`, so the lower
/// edge, which lies on the rail line, is excluded.  Orientations follow the
/// same half-open rule over `(theta_min, theta_max]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WorkspaceSpec {
    pub rectangle: Rectangle,
    pub nx: usize,
    pub ny: usize,
    pub orientation_samples: usize,
    pub theta_min: f64,
    pub theta_max: f64,
}

#[derive(Clone, Debug, Error, PartialEq)]
pub enum WorkspaceError {
    #[error("grid needs at least 2x2 points, got {nx}x{ny}")]
    GridTooSmall { nx: usize, ny: usize },
    #[error("at least one orientation sample is required")]
    NoOrientations,
    #[error("degenerate rectangle {0:?}")]
    DegenerateRectangle(Rectangle),
    #[error("degenerate orientation range ({0}, {1}]")]
    DegenerateOrientationRange(f64, f64),
    #[error("stroke values must be positive, got {0}")]
    NonPositiveStroke(f64),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("cannot start worker threads: {0}")]
    ThreadPool(String),
}

impl WorkspaceSpec {
    /// Bounding rectangle of `geometry`, orientations over `(-π, π]`.
    pub fn for_geometry(geometry: &Geometry, nx: usize, ny: usize, orientations: usize) -> Self {
        Self {
            rectangle: bounding_rectangle(geometry).rectangle,
            nx,
            ny,
            orientation_samples: orientations,
            theta_min: -PI,
            theta_max: PI,
        }
    }

    pub fn validate(&self) -> Result<(), WorkspaceError> {
        if self.nx < 2 || self.ny < 2 {
            return Err(WorkspaceError::GridTooSmall {
                nx: self.nx,
                ny: self.ny,
            });
        }
        if self.orientation_samples == 0 {
            return Err(WorkspaceError::NoOrientations);
        }
        let r = self.rectangle;
        if !(r.x_max > r.x_min && r.y_max > r.y_min) {
            return Err(WorkspaceError::DegenerateRectangle(r));
        }
        if !(self.theta_max > self.theta_min) {
            return Err(WorkspaceError::DegenerateOrientationRange(
                self.theta_min,
                self.theta_max,
            ));
        }
        Ok(())
    }

    pub fn x_step(&self) -> f64 {
        (self.rectangle.x_max - self.rectangle.x_min) / (self.nx - 1) as f64
    }

    pub fn y_step(&self) -> f64 {
        (self.rectangle.y_max - self.rectangle.y_min) / self.ny as f64
    }

    pub fn x_at(&self, i: usize) -> f64 {
        self.rectangle.x_min + i as f64 * self.x_step()
    }

    pub fn y_at(&self, j: usize) -> f64 {
        self.rectangle.y_min + (j + 1) as f64 * self.y_step()
    }

    pub fn theta_at(&self, k: usize) -> f64 {
        let span = self.theta_max - self.theta_min;
        self.theta_min + (k + 1) as f64 * span / self.orientation_samples as f64
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CellClass {
    Unreachable,
    /// Reachable for this many, but not all, sampled orientations.
    SomeOrientations(u32),
    AllOrientations,
}

impl CellClass {
    pub fn label(&self) -> &'static str {
        match self {
            Self::Unreachable => "unreachable",
            Self::SomeOrientations(_) => "some",
            Self::AllOrientations => "all",
        }
    }

    pub fn is_reachable(&self) -> bool {
        *self != Self::Unreachable
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct WorkspaceGrid {
    pub spec: WorkspaceSpec,
    /// Row-major: index `j * nx + i`.
    pub cells: Vec<CellClass>,
    /// Share of grid points with at least one reachable orientation.
    pub fraction: f64,
}

impl WorkspaceGrid {
    pub fn cell(&self, i: usize, j: usize) -> CellClass {
        self.cells[j * self.spec.nx + i]
    }

    pub fn reachable_orientations(&self, i: usize, j: usize) -> usize {
        match self.cell(i, j) {
            CellClass::Unreachable => 0,
            CellClass::SomeOrientations(n) => n as usize,
            CellClass::AllOrientations => self.spec.orientation_samples,
        }
    }

    /// `x,y,class,reachable_orientation_count`, one row per grid point,
    /// x varying fastest.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,y,class,reachable_orientation_count\n");
        for j in 0..self.spec.ny {
            let y = fmt_f64(self.spec.y_at(j));
            for i in 0..self.spec.nx {
                let _ = writeln!(
                    out,
                    "{},{},{},{}",
                    fmt_f64(self.spec.x_at(i)),
                    y,
                    self.cell(i, j).label(),
                    self.reachable_orientations(i, j)
                );
            }
        }
        out
    }
}

/// Height, width and placement of the analysis rectangle.
pub fn bounding_rectangle(geometry: &Geometry) -> BoundingBox {
    let h = (0..3)
        .map(|i| geometry.platform_offsets[i] + geometry.link_lengths[i])
        .fold(f64::INFINITY, f64::min);
    let stroke = geometry.max_stroke();
    let w = 2.0 * h + stroke;
    let x_lo = geometry
        .rails
        .iter()
        .map(|r| r.anchor.dot(r.direction))
        .fold(f64::INFINITY, f64::min);
    let y0 = geometry.rails[0].anchor.y;
    BoundingBox {
        h,
        w,
        rectangle: Rectangle {
            x_min: x_lo - h,
            x_max: x_lo + stroke + h,
            y_min: y0,
            y_max: y0 + h,
        },
    }
}

fn classify_point(geometry: &Geometry, spec: &WorkspaceSpec, x: f64, y: f64) -> CellClass {
    let count = (0..spec.orientation_samples)
        .filter(|&k| reachable_branch(&Pose::new(x, y, spec.theta_at(k)), geometry).is_some())
        .count();
    match count {
        0 => CellClass::Unreachable,
        n if n == spec.orientation_samples => CellClass::AllOrientations,
        n => CellClass::SomeOrientations(n as u32),
    }
}

fn scan_row(geometry: &Geometry, spec: &WorkspaceSpec, j: usize) -> Vec<CellClass> {
    let y = spec.y_at(j);
    (0..spec.nx)
        .map(|i| classify_point(geometry, spec, spec.x_at(i), y))
        .collect()
}

fn assemble_grid(spec: WorkspaceSpec, rows: Vec<Vec<CellClass>>) -> WorkspaceGrid {
    let cells: Vec<CellClass> = rows.into_iter().flatten().collect();
    let reachable = cells.iter().filter(|c| c.is_reachable()).count();
    WorkspaceGrid {
        fraction: reachable as f64 / cells.len() as f64,
        spec,
        cells,
    }
}

/// Grid reachability scan.  Rows are evaluated on the current rayon pool
/// when the `parallel` feature is enabled; results do not depend on the
/// number of workers.
pub fn scan(geometry: &Geometry, spec: &WorkspaceSpec) -> Result<WorkspaceGrid, WorkspaceError> {
    spec.validate()?;
    #[cfg(feature = "parallel")]
    let rows = {
        use rayon::prelude::*;
        (0..spec.ny)
            .into_par_iter()
            .map(|j| scan_row(geometry, spec, j))
            .collect()
    };
    #[cfg(not(feature = "parallel"))]
    let rows = (0..spec.ny).map(|j| scan_row(geometry, spec, j)).collect();
    Ok(assemble_grid(*spec, rows))
}

/// [`scan`] on a dedicated pool of `threads` workers (sequential for 1).
pub fn scan_with_threads(
    geometry: &Geometry,
    spec: &WorkspaceSpec,
    threads: usize,
) -> Result<WorkspaceGrid, WorkspaceError> {
    #[cfg(feature = "parallel")]
    if threads > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| WorkspaceError::ThreadPool(e.to_string()))?;
        return pool.install(|| scan(geometry, spec));
    }
    let _ = threads;
    spec.validate()?;
    let rows = (0..spec.ny).map(|j| scan_row(geometry, spec, j)).collect();
    Ok(assemble_grid(*spec, rows))
}

/// A 4-connected set of unreachable cells enclosed by reachable ones.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeadZone {
    /// `(i, j)` grid indices in row-major order.
    pub cells: Vec<(usize, usize)>,
}

/// Unreachable regions that cannot reach the rectangle's edge through other
/// unreachable cells.
pub fn dead_zones(grid: &WorkspaceGrid) -> Vec<DeadZone> {
    let (nx, ny) = (grid.spec.nx, grid.spec.ny);
    let idx = |i: usize, j: usize| j * nx + i;
    let open = |k: usize| !grid.cells[k].is_reachable();
    let neighbours = |i: usize, j: usize| {
        let mut n = Vec::with_capacity(4);
        if i > 0 {
            n.push((i - 1, j));
        }
        if i + 1 < nx {
            n.push((i + 1, j));
        }
        if j > 0 {
            n.push((i, j - 1));
        }
        if j + 1 < ny {
            n.push((i, j + 1));
        }
        n
    };

    // flood the outside from every unreachable edge cell
    let mut outside = vec![false; nx * ny];
    let mut queue = VecDeque::new();
    for j in 0..ny {
        for i in 0..nx {
            let edge = i == 0 || j == 0 || i + 1 == nx || j + 1 == ny;
            if edge && open(idx(i, j)) {
                outside[idx(i, j)] = true;
                queue.push_back((i, j));
            }
        }
    }
    while let Some((i, j)) = queue.pop_front() {
        for (a, b) in neighbours(i, j) {
            let k = idx(a, b);
            if open(k) && !outside[k] {
                outside[k] = true;
                queue.push_back((a, b));
            }
        }
    }

    let mut seen = outside;
    let mut zones = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            let k = idx(i, j);
            if !open(k) || seen[k] {
                continue;
            }
            seen[k] = true;
            let mut cells = vec![(i, j)];
            queue.push_back((i, j));
            while let Some((a, b)) = queue.pop_front() {
                for (p, q) in neighbours(a, b) {
                    let kk = idx(p, q);
                    if open(kk) && !seen[kk] {
                        seen[kk] = true;
                        cells.push((p, q));
                        queue.push_back((p, q));
                    }
                }
            }
            cells.sort_by_key(|&(a, b)| (b, a));
            zones.push(DeadZone { cells });
        }
    }
    zones
}

/// Grid resolution reused for every stroke of a sweep.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepTemplate {
    pub nx: usize,
    pub ny: usize,
    pub orientations: usize,
}

impl Default for SweepTemplate {
    fn default() -> Self {
        Self {
            nx: 200,
            ny: 200,
            orientations: 36,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub stroke: f64,
    pub fraction: f64,
    pub dead_zone_count: usize,
}

impl SweepRow {
    pub fn has_dead_zones(&self) -> bool {
        self.dead_zone_count > 0
    }
}

/// Workspace fraction as a function of stroke length; the rectangle is
/// recomputed for each stroke.
pub fn stroke_sweep(
    geometry: &Geometry,
    strokes: &[f64],
    template: &SweepTemplate,
) -> Result<Vec<SweepRow>, WorkspaceError> {
    strokes
        .iter()
        .map(|&stroke| {
            if !(stroke > 0.0) {
                return Err(WorkspaceError::NonPositiveStroke(stroke));
            }
            let g = geometry.with_stroke(stroke).validate()?;
            let spec =
                WorkspaceSpec::for_geometry(&g, template.nx, template.ny, template.orientations);
            let grid = scan(&g, &spec)?;
            Ok(SweepRow {
                stroke,
                fraction: grid.fraction,
                dead_zone_count: dead_zones(&grid).len(),
            })
        })
        .collect()
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("L,S,dead_zone_count\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{}",
            fmt_f64(r.stroke),
            fmt_f64(r.fraction),
            r.dead_zone_count
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic(nx: usize, ny: usize, unreachable: &[(usize, usize)]) -> WorkspaceGrid {
        let spec = WorkspaceSpec {
            rectangle: Rectangle {
                x_min: 0.0,
                x_max: 1.0,
                y_min: 0.0,
                y_max: 1.0,
            },
            nx,
            ny,
            orientation_samples: 1,
            theta_min: -PI,
            theta_max: PI,
        };
        let mut cells = vec![CellClass::AllOrientations; nx * ny];
        for &(i, j) in unreachable {
            cells[j * nx + i] = CellClass::Unreachable;
        }
        assemble_grid(spec, cells.chunks(nx).map(<[CellClass]>::to_vec).collect())
    }

    #[test]
    fn bounding_rectangle_of_equal_links_set() {
        let b = bounding_rectangle(&Geometry::equal_links_25());
        assert_eq!(b.h, 30.0);
        assert_eq!(b.w, 70.0);
        assert_eq!(b.rectangle.x_min, -30.0);
        assert_eq!(b.rectangle.x_max, 40.0);
    }

    #[test]
    fn bounding_rectangle_of_graded_set() {
        let b = bounding_rectangle(&Geometry::graded_links(3.0));
        assert_eq!(b.h, 2.9);
        assert_eq!(b.w, 8.8);
    }

    #[test]
    fn bounding_rectangle_scales_linearly() {
        let g = Geometry::graded_links(2.5);
        let b = bounding_rectangle(&g);
        for k in [0.5, 3.0, 40.0] {
            let s = bounding_rectangle(&g.scaled(k));
            assert!((s.h - k * b.h).abs() < 1e-12 * k);
            assert!((s.w - k * b.w).abs() < 1e-12 * k);
        }
    }

    #[test]
    fn spec_validation() {
        let g = Geometry::graded_links(3.0);
        assert!(WorkspaceSpec::for_geometry(&g, 2, 2, 1).validate().is_ok());
        assert!(matches!(
            WorkspaceSpec::for_geometry(&g, 1, 5, 1).validate(),
            Err(WorkspaceError::GridTooSmall { .. })
        ));
        assert_eq!(
            WorkspaceSpec::for_geometry(&g, 5, 5, 0).validate(),
            Err(WorkspaceError::NoOrientations)
        );
    }

    #[test]
    fn sampling_is_half_open() {
        let g = Geometry::graded_links(3.0);
        let spec = WorkspaceSpec::for_geometry(&g, 11, 29, 36);
        assert_eq!(spec.x_at(0), -2.9);
        assert!((spec.x_at(10) - 5.9).abs() < 1e-12);
        assert!((spec.y_at(0) - 0.1).abs() < 1e-12);
        assert!((spec.y_at(28) - 2.9).abs() < 1e-12);
        assert_eq!(spec.theta_at(35), PI);
        assert!((spec.theta_at(0) - (-PI + PI / 18.0)).abs() < 1e-15);
    }

    #[test]
    fn out_of_reach_rectangle_is_empty() {
        let g = Geometry::graded_links(3.0);
        let mut spec = WorkspaceSpec::for_geometry(&g, 20, 10, 12);
        spec.rectangle.y_min = 4.71;
        spec.rectangle.y_max = 6.0;
        let grid = scan(&g, &spec).unwrap();
        assert_eq!(grid.fraction, 0.0);
    }

    #[test]
    fn fully_reachable_grid_has_no_dead_zones() {
        assert!(dead_zones(&synthetic(6, 6, &[])).is_empty());
    }

    #[test]
    fn enclosed_ring_hole_is_one_dead_zone() {
        // a 3x3 unreachable block with reachable border
        let hole: Vec<(usize, usize)> = (2..5).flat_map(|i| (2..5).map(move |j| (i, j))).collect();
        let zones = dead_zones(&synthetic(7, 7, &hole));
        assert_eq!(zones.len(), 1);
        assert_eq!(zones[0].cells.len(), 9);
    }

    #[test]
    fn hole_open_to_edge_is_not_a_dead_zone() {
        let channel = [(3, 3), (3, 2), (3, 1), (3, 0)];
        assert!(dead_zones(&synthetic(7, 7, &channel)).is_empty());
    }

    #[test]
    fn diagonal_contact_does_not_connect() {
        // (1,1) touches the edge cell (0,0) only diagonally
        let zones = dead_zones(&synthetic(5, 5, &[(0, 0), (1, 1)]));
        assert_eq!(
            zones,
            vec![DeadZone {
                cells: vec![(1, 1)]
            }]
        );
    }

    #[test]
    fn csv_layout() {
        let grid = synthetic(2, 2, &[(1, 0)]);
        let csv = grid.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "x,y,class,reachable_orientation_count");
        assert_eq!(lines.len(), 5);
        assert!(lines[2].ends_with(",unreachable,0"));
        assert!(lines[1].ends_with(",all,1"));
    }
}

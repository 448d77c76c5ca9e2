//! WebAssembly bindings for the browser demo in `www/`.
//!
//! A [`Mechanism`] is built from link lengths, platform offsets and a common
//! stroke on rails along the x axis.  The page asks it for a workspace map,
//! a drawing of the mechanism at a pose, and a stroke sweep.

use std::fmt::Write as _;

use wasm_bindgen::prelude::*;

use prr_core::export::{workspace_svg, SvgStyle};
use prr_core::kinematics::{inverse_kinematics, reachable_branch};
use prr_core::singularity::{classify, Thresholds};
use prr_core::workspace::{bounding_rectangle, dead_zones, scan, stroke_sweep, SweepTemplate};
use prr_core::{BranchSelector, Configuration, Geometry, Pose, Vec2, WorkspaceSpec};

#[wasm_bindgen]
pub struct Mechanism {
    geometry: Geometry,
}

fn triple(values: &[f64], name: &str) -> Result<[f64; 3], String> {
    values
        .try_into()
        .map_err(|_| format!("{name} needs three values, got {}", values.len()))
}

impl Mechanism {
    pub fn try_new(
        link_lengths: &[f64],
        platform_offsets: &[f64],
        stroke: f64,
    ) -> Result<Self, String> {
        let geometry = Geometry::on_x_axis(
            triple(link_lengths, "link lengths")?,
            triple(platform_offsets, "platform offsets")?,
            stroke,
        )
        .validate()
        .map_err(|e| e.to_string())?;
        Ok(Self { geometry })
    }

    pub fn try_workspace(
        &self,
        nx: usize,
        ny: usize,
        orientations: usize,
    ) -> Result<WorkspaceView, String> {
        let spec = WorkspaceSpec::for_geometry(&self.geometry, nx, ny, orientations);
        let grid = scan(&self.geometry, &spec).map_err(|e| e.to_string())?;
        let zones = dead_zones(&grid);
        let style = SvgStyle {
            px_per_unit: 640.0 / (spec.rectangle.x_max - spec.rectangle.x_min),
            margin_px: 10.0,
        };
        Ok(WorkspaceView {
            svg: workspace_svg(&grid, &zones, None, &style),
            fraction: grid.fraction,
            dead_zones: zones.len(),
        })
    }

    /// Configuration drawn for a pose: the requested elbows, or the first
    /// assembly mode inside the strokes.
    fn configuration(&self, pose: &Pose, branch: &str) -> Result<Configuration, String> {
        let branch = if branch.trim().is_empty() {
            reachable_branch(pose, &self.geometry).ok_or("no assembly mode within the strokes")?
        } else {
            branch.parse::<BranchSelector>()?
        };
        inverse_kinematics(pose, &self.geometry, branch, false).map_err(|e| e.to_string())
    }

    pub fn try_pose(
        &self,
        x: f64,
        y: f64,
        theta_deg: f64,
        branch: &str,
    ) -> Result<PoseView, String> {
        let pose = Pose::new(x, y, theta_deg.to_radians());
        let config = self.configuration(&pose, branch)?;
        let report = classify(&config, &self.geometry, &Thresholds::default());
        Ok(PoseView {
            svg: mechanism_svg(&self.geometry, &config),
            summary: format!(
                "{}  |  rho = {:.4}, {:.4}, {:.4}  |  {}  |  det A (norm.) = {:.3e}, det B (norm.) = {:.3e}",
                config.branch,
                config.joints.0[0],
                config.joints.0[1],
                config.joints.0[2],
                report.kind,
                report.det_a_normalized,
                report.det_b_normalized
            ),
        })
    }

    pub fn try_sweep(
        &self,
        strokes: &[f64],
        n: usize,
        orientations: usize,
    ) -> Result<Vec<f64>, String> {
        let template = SweepTemplate {
            nx: n,
            ny: n,
            orientations,
        };
        let rows = stroke_sweep(&self.geometry, strokes, &template).map_err(|e| e.to_string())?;
        Ok(rows.iter().map(|r| r.fraction).collect())
    }
}

#[wasm_bindgen]
impl Mechanism {
    #[wasm_bindgen(constructor)]
    pub fn new(
        link_lengths: &[f64],
        platform_offsets: &[f64],
        stroke: f64,
    ) -> Result<Mechanism, JsError> {
        Self::try_new(link_lengths, platform_offsets, stroke).map_err(|e| JsError::new(&e))
    }

    /// Reachability map over the bounding rectangle.
    pub fn workspace(
        &self,
        nx: usize,
        ny: usize,
        orientations: usize,
    ) -> Result<WorkspaceView, JsError> {
        self.try_workspace(nx, ny, orientations)
            .map_err(|e| JsError::new(&e))
    }

    /// Drawing of the mechanism at a pose; `branch` is empty or like "+-+".
    pub fn pose(&self, x: f64, y: f64, theta_deg: f64, branch: &str) -> Result<PoseView, JsError> {
        self.try_pose(x, y, theta_deg, branch)
            .map_err(|e| JsError::new(&e))
    }

    /// Workspace fraction for each stroke, on an `n` by `n` grid.
    pub fn sweep(
        &self,
        strokes: &[f64],
        n: usize,
        orientations: usize,
    ) -> Result<Vec<f64>, JsError> {
        self.try_sweep(strokes, n, orientations)
            .map_err(|e| JsError::new(&e))
    }

    /// Bounding rectangle as `[x_min, x_max, y_min, y_max]`.
    pub fn rectangle(&self) -> Vec<f64> {
        let r = bounding_rectangle(&self.geometry).rectangle;
        vec![r.x_min, r.x_max, r.y_min, r.y_max]
    }
}

#[wasm_bindgen(getter_with_clone)]
pub struct WorkspaceView {
    pub svg: String,
    pub fraction: f64,
    pub dead_zones: usize,
}

#[wasm_bindgen(getter_with_clone)]
pub struct PoseView {
    pub svg: String,
    pub summary: String,
}

const LEG_COLOURS: [&str; 3] = ["#d62728", "#2ca02c", "#1f77b4"];

/// Rails, sliders, links and platform, y axis up.
pub fn mechanism_svg(geometry: &Geometry, config: &Configuration) -> String {
    let r = bounding_rectangle(geometry).rectangle;
    let (width, height) = (640.0, 360.0);
    let y_low = r.y_min - 0.35 * (r.y_max - r.y_min);
    let scale = (width / (r.x_max - r.x_min)).min(height / (r.y_max - y_low));
    let px = |p: Vec2| ((p.x - r.x_min) * scale, height - (p.y - y_low) * scale);
    let mut s = format!(
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {width} {height}" width="{width}" height="{height}">"#
    );
    s.push_str(r#"<rect width="100%" height="100%" fill="white"/>"#);

    for (i, rail) in geometry.rails.iter().enumerate() {
        let (x0, y0) = px(rail.point_at(0.0));
        let (x1, y1) = px(rail.point_at(rail.stroke));
        let (a0, _) = px(Vec2::new(r.x_min, 0.0));
        let (a1, _) = px(Vec2::new(r.x_max, 0.0));
        let dy = 4.0 * i as f64;
        let _ = write!(
            s,
            r##"<line x1="{a0:.1}" y1="{:.1}" x2="{a1:.1}" y2="{:.1}" stroke="#ccc"/><line x1="{x0:.1}" y1="{:.1}" x2="{x1:.1}" y2="{:.1}" stroke="#555" stroke-width="3"/>"##,
            y0 + dy,
            y1 + dy,
            y0 + dy,
            y1 + dy
        );
    }

    let g = config.pose.position();
    let (c0x, c0y) = px(config.c[0]);
    let (gx, gy) = px(g);
    let _ = write!(
        s,
        r##"<line x1="{c0x:.1}" y1="{c0y:.1}" x2="{gx:.1}" y2="{gy:.1}" stroke="#333" stroke-width="6" stroke-linecap="round"/>"##
    );
    for leg in 0..3 {
        let (bx, by) = px(config.b[leg]);
        let (cx, cy) = px(config.c[leg]);
        let colour = LEG_COLOURS[leg];
        let _ = write!(
            s,
            r##"<line x1="{bx:.1}" y1="{by:.1}" x2="{cx:.1}" y2="{cy:.1}" stroke="{colour}" stroke-width="3"/><rect x="{:.1}" y="{:.1}" width="14" height="8" fill="{colour}"/><circle cx="{cx:.1}" cy="{cy:.1}" r="4" fill="white" stroke="{colour}" stroke-width="2"/>"##,
            bx - 7.0,
            by - 4.0
        );
    }
    let _ = write!(
        s,
        r##"<circle cx="{gx:.1}" cy="{gy:.1}" r="5" fill="#ff7f0e"/><text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="12">G</text></svg>"##,
        gx + 8.0,
        gy - 8.0
    );
    s
}

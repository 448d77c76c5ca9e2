//! CSV and SVG writers shared by the analysis modules.
//!
//! CSV files use `,` separators, `.` decimals and 17 significant digits so
//! every `f64` survives a text round trip.  SVG plots map model units to
//! pixels with the y axis pointing up.

use std::fmt::Write as _;

use crate::geometry::Vec2;
use crate::workspace::{CellClass, DeadZone, WorkspaceGrid};

/// Formats a float with 17 significant digits, fixed notation for
/// moderate magnitudes and exponent notation otherwise.
pub fn fmt_f64(v: f64) -> String {
    if !v.is_finite() {
        return format!("{v}");
    }
    if v == 0.0 {
        return "0.0000000000000000".to_owned();
    }
    let sci = format!("{v:.16e}");
    let exp: i32 = sci
        .rsplit('e')
        .next()
        .and_then(|e| e.parse().ok())
        .unwrap_or(0);
    if (-5..17).contains(&exp) {
        format!("{:.*}", (16 - exp) as usize, v)
    } else {
        sci
    }
}

/// Rendering options for the workspace plot.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SvgStyle {
    pub px_per_unit: f64,
    pub margin_px: f64,
}

impl Default for SvgStyle {
    fn default() -> Self {
        Self {
            px_per_unit: 60.0,
            margin_px: 20.0,
        }
    }
}

struct Frame {
    x_min: f64,
    y_max: f64,
    scale: f64,
    margin: f64,
}

impl Frame {
    fn px(&self, p: Vec2) -> (f64, f64) {
        (
            self.margin + (p.x - self.x_min) * self.scale,
            self.margin + (self.y_max - p.y) * self.scale,
        )
    }
}

fn px(v: f64) -> String {
    format!("{v:.2}")
}

/// Heat map of a workspace grid.  Cells reachable for every sampled
/// orientation are dark, partially reachable cells light; dead zones are
/// hatched and the boundary of the reachable set is outlined.  An optional
/// polyline (for example a simulated trajectory of `G`) is drawn on top.
pub fn workspace_svg(
    grid: &WorkspaceGrid,
    dead_zones: &[DeadZone],
    overlay: Option<&[Vec2]>,
    style: &SvgStyle,
) -> String {
    let spec = &grid.spec;
    let (nx, ny) = (spec.nx, spec.ny);
    let dx = spec.x_step();
    let dy = spec.y_step();
    // cells are centered on grid points
    let x0 = spec.rectangle.x_min - dx / 2.0;
    let x1 = spec.rectangle.x_max + dx / 2.0;
    let y0 = spec.y_at(0) - dy / 2.0;
    let y1 = spec.y_at(ny - 1) + dy / 2.0;
    let frame = Frame {
        x_min: x0,
        y_max: y1,
        scale: style.px_per_unit,
        margin: style.margin_px,
    };
    let width = 2.0 * style.margin_px + (x1 - x0) * style.px_per_unit;
    let height = 2.0 * style.margin_px + (y1 - y0) * style.px_per_unit;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" viewBox="0 0 {} {}">"#,
        px(width),
        px(height),
        px(width),
        px(height)
    );
    s.push_str(concat!(
        "<defs><pattern id=\"hatch\" patternUnits=\"userSpaceOnUse\" width=\"6\" height=\"6\" ",
        "patternTransform=\"rotate(45)\"><line x1=\"0\" y1=\"0\" x2=\"0\" y2=\"6\" ",
        "stroke=\"#c0392b\" stroke-width=\"2\"/></pattern></defs>\n"
    ));
    s.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");

    let (rx, ry) = frame.px(Vec2::new(x0, y1));
    let _ = writeln!(
        s,
        r##"<rect x="{}" y="{}" width="{}" height="{}" fill="#f4f4f4" stroke="#888" stroke-width="1"/>"##,
        px(rx),
        px(ry),
        px((x1 - x0) * style.px_per_unit),
        px((y1 - y0) * style.px_per_unit)
    );

    // reachable cells, merged into horizontal runs of equal fill
    s.push_str("<g stroke=\"none\">\n");
    for j in 0..ny {
        let mut i = 0;
        while i < nx {
            let fill = match grid.cell(i, j) {
                CellClass::Unreachable => None,
                CellClass::SomeOrientations(_) => Some("#9ecae1"),
                CellClass::AllOrientations => Some("#3182bd"),
            };
            let start = i;
            while i < nx && same_fill(grid.cell(i, j), grid.cell(start, j)) {
                i += 1;
            }
            if let Some(fill) = fill {
                let left = spec.x_at(start) - dx / 2.0;
                let top = spec.y_at(j) + dy / 2.0;
                let (px0, py0) = frame.px(Vec2::new(left, top));
                let _ = writeln!(
                    s,
                    r#"<rect x="{}" y="{}" width="{}" height="{}" fill="{fill}"/>"#,
                    px(px0),
                    px(py0),
                    px((i - start) as f64 * dx * style.px_per_unit),
                    px(dy * style.px_per_unit)
                );
            }
        }
    }
    s.push_str("</g>\n");

    if !dead_zones.is_empty() {
        s.push_str("<g fill=\"url(#hatch)\" stroke=\"none\">\n");
        for zone in dead_zones {
            for &(i, j) in &zone.cells {
                let (px0, py0) =
                    frame.px(Vec2::new(spec.x_at(i) - dx / 2.0, spec.y_at(j) + dy / 2.0));
                let _ = writeln!(
                    s,
                    r#"<rect x="{}" y="{}" width="{}" height="{}"/>"#,
                    px(px0),
                    px(py0),
                    px(dx * style.px_per_unit),
                    px(dy * style.px_per_unit)
                );
            }
        }
        s.push_str("</g>\n");
    }

    // envelope: every edge separating a reachable cell from an unreachable
    // cell or from the outside of the rectangle
    let reachable = |i: isize, j: isize| {
        i >= 0
            && j >= 0
            && (i as usize) < nx
            && (j as usize) < ny
            && grid.cell(i as usize, j as usize) != CellClass::Unreachable
    };
    let mut d = String::new();
    for j in 0..ny as isize {
        for i in 0..nx as isize {
            if !reachable(i, j) {
                continue;
            }
            let cx = spec.x_at(i as usize);
            let cy = spec.y_at(j as usize);
            let (l, r, b, t) = (cx - dx / 2.0, cx + dx / 2.0, cy - dy / 2.0, cy + dy / 2.0);
            let edges = [
                (!reachable(i - 1, j), (l, b), (l, t)),
                (!reachable(i + 1, j), (r, b), (r, t)),
                (!reachable(i, j - 1), (l, b), (r, b)),
                (!reachable(i, j + 1), (l, t), (r, t)),
            ];
            for (open, a, z) in edges {
                if open {
                    let (ax, ay) = frame.px(Vec2::new(a.0, a.1));
                    let (zx, zy) = frame.px(Vec2::new(z.0, z.1));
                    let _ = write!(d, "M{} {}L{} {}", px(ax), px(ay), px(zx), px(zy));
                }
            }
        }
    }
    if !d.is_empty() {
        let _ = writeln!(
            s,
            r#"<path d="{d}" fill="none" stroke="black" stroke-width="1"/>"#
        );
    }

    if let Some(points) = overlay {
        if !points.is_empty() {
            let pts: Vec<String> = points
                .iter()
                .map(|p| {
                    let (x, y) = frame.px(*p);
                    format!("{},{}", px(x), px(y))
                })
                .collect();
            let _ = writeln!(
                s,
                r##"<polyline points="{}" fill="none" stroke="#e6550d" stroke-width="2"/>"##,
                pts.join(" ")
            );
        }
    }
    s.push_str("</svg>\n");
    s
}

fn same_fill(a: CellClass, b: CellClass) -> bool {
    matches!(
        (a, b),
        (CellClass::Unreachable, CellClass::Unreachable)
            | (CellClass::AllOrientations, CellClass::AllOrientations)
            | (
                CellClass::SomeOrientations(_),
                CellClass::SomeOrientations(_)
            )
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_significant_digits() {
        assert_eq!(fmt_f64(1.0), "1.0000000000000000");
        assert_eq!(fmt_f64(-2.5), "-2.5000000000000000");
        assert_eq!(fmt_f64(0.1), "0.10000000000000001");
        assert_eq!(fmt_f64(123.456), "123.45600000000000");
        assert_eq!(fmt_f64(1e-9), "1.0000000000000001e-9");
        assert_eq!(fmt_f64(6.02e23), "6.0200000000000000e23");
    }

    #[test]
    fn formatted_values_round_trip() {
        for v in [
            std::f64::consts::PI,
            -1.0 / 3.0,
            2.9e-4,
            8.8,
            1e17,
            12345.678901234567,
        ] {
            assert_eq!(fmt_f64(v).parse::<f64>().unwrap(), v);
        }
    }
}

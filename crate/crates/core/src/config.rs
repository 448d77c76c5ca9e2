//! TOML geometry files.
//!
//! ```toml
//! link_lengths = [1.7, 1.8, 1.9]      # L_11, L_22, L_33
//! platform_offsets = [3.0, 2.0, 1.0]  # L_1G, L_2G, L_3G
//!
//! [[rails]]                           # exactly three entries
//! anchor = [0.0, 0.0]
//! direction = [1.0, 0.0]
//! stroke = 3.0
//! ```
//!
//! Syntax and type errors carry the line and column reported by the TOML
//! parser.  Values that parse but violate a geometry invariant are reported
//! with the dotted field path and the line the field was written on.

use std::fmt::Write as _;
use std::path::Path;

use serde::Deserialize;
use thiserror::Error;
use toml::Spanned;

use crate::geometry::{Geometry, GeometryError, Rail, Vec2};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("line {line}: field `{field}`: {source}")]
    Invalid {
        field: String,
        line: usize,
        #[source]
        source: GeometryError,
    },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RailFile {
    anchor: Spanned<[f64; 2]>,
    direction: Spanned<[f64; 2]>,
    stroke: Spanned<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GeometryFile {
    rails: Spanned<Vec<RailFile>>,
    link_lengths: Spanned<[f64; 3]>,
    platform_offsets: Spanned<[f64; 3]>,
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())]
        .bytes()
        .filter(|&b| b == b'\n')
        .count()
        + 1
}

fn column_of(text: &str, offset: usize) -> usize {
    let head = &text[..offset.min(text.len())];
    head.len() - head.rfind('\n').map_or(0, |i| i + 1) + 1
}

pub fn parse_geometry(text: &str) -> Result<Geometry, ConfigError> {
    let file: GeometryFile = toml::from_str(text).map_err(|e| {
        let offset = e.span().map_or(0, |s| s.start);
        ConfigError::Parse {
            line: line_of(text, offset),
            column: column_of(text, offset),
            message: e.message().to_owned(),
        }
    })?;

    let rails_span = file.rails.span();
    let rails_in = file.rails.into_inner();
    if rails_in.len() != 3 {
        return Err(ConfigError::Parse {
            line: line_of(text, rails_span.start),
            column: column_of(text, rails_span.start),
            message: format!(
                "field `rails`: expected 3 entries, found {}",
                rails_in.len()
            ),
        });
    }

    let mut rails = [Rail::along_x(0.0, 1.0); 3];
    let mut field_lines = Vec::new();
    for (i, r) in rails_in.iter().enumerate() {
        let [ax, ay] = *r.anchor.get_ref();
        let [dx, dy] = *r.direction.get_ref();
        rails[i] = Rail {
            anchor: Vec2::new(ax, ay),
            direction: Vec2::new(dx, dy),
            stroke: *r.stroke.get_ref(),
        };
        field_lines.push((format!("rails[{i}].direction"), r.direction.span().start));
        field_lines.push((format!("rails[{i}].stroke"), r.stroke.span().start));
    }
    field_lines.push(("link_lengths".to_owned(), file.link_lengths.span().start));
    field_lines.push((
        "platform_offsets".to_owned(),
        file.platform_offsets.span().start,
    ));

    let geometry = Geometry {
        rails,
        link_lengths: *file.link_lengths.get_ref(),
        platform_offsets: *file.platform_offsets.get_ref(),
    };
    geometry.validate().map_err(|source| {
        let field = source.field();
        // element-level fields such as `link_lengths[2]` map to their array
        let base = field.split('[').next().unwrap_or(&field);
        let offset = field_lines
            .iter()
            .find(|(name, _)| *name == field || name == base)
            .map_or(0, |(_, o)| *o);
        ConfigError::Invalid {
            line: line_of(text, offset),
            field,
            source,
        }
    })
}

pub fn load_geometry(path: impl AsRef<Path>) -> Result<Geometry, ConfigError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_geometry(&text)
}

/// Renders a geometry in the file format accepted by [`parse_geometry`].
pub fn to_toml(geometry: &Geometry) -> String {
    let mut out = String::new();
    let [l1, l2, l3] = geometry.link_lengths;
    let [o1, o2, o3] = geometry.platform_offsets;
    let _ = writeln!(out, "link_lengths = [{l1:?}, {l2:?}, {l3:?}]");
    let _ = writeln!(out, "platform_offsets = [{o1:?}, {o2:?}, {o3:?}]");
    for rail in &geometry.rails {
        let _ = writeln!(out, "\n[[rails]]");
        let _ = writeln!(out, "anchor = [{:?}, {:?}]", rail.anchor.x, rail.anchor.y);
        let _ = writeln!(
            out,
            "direction = [{:?}, {:?}]",
            rail.direction.x, rail.direction.y
        );
        let _ = writeln!(out, "stroke = {:?}", rail.stroke);
    }
    out
}

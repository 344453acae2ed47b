//! Deterministic file emitters: SVG curves, OBJ meshes, CSV tables and JSON
//! reports/models. Equal inputs always produce byte-identical output, and all
//! numbers use `.` as the radix regardless of locale.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::analysis::PolytopeReport;
use crate::error::ExportError;
use crate::levelset::{RadialMesh, RadialPolyline};
use crate::net::{Matrix, Network, NetworkSpec};
use crate::train::TrainConfig;

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RenderStyle {
    /// Stroke width in output pixels.
    pub stroke_width: f64,
    pub image_size: u32,
    /// Fraction of the image left empty on each side.
    pub margin: f64,
    /// Draw the grey unit circle the network was fitted to.
    pub overlay_unit_circle: bool,
}

impl Default for RenderStyle {
    fn default() -> Self {
        Self {
            stroke_width: 2.0,
            image_size: 512,
            margin: 0.05,
            overlay_unit_circle: true,
        }
    }
}

impl RenderStyle {
    pub fn validate(&self) -> Result<(), ExportError> {
        if self.image_size < 64 {
            return Err(ExportError::Precondition(format!(
                "image size must be at least 64 px, got {}",
                self.image_size
            )));
        }
        if !(0.0..0.5).contains(&self.margin) {
            return Err(ExportError::Precondition(format!(
                "margin must lie in [0, 0.5), got {}",
                self.margin
            )));
        }
        if !(self.stroke_width > 0.0) {
            return Err(ExportError::Precondition("stroke width must be positive".into()));
        }
        Ok(())
    }
}

/// Drops points lying on the straight segment between their neighbours.
fn prune_collinear(points: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let n = points.len();
    (0..n)
        .filter(|&i| {
            let (p, c, q) = (points[(i + n - 1) % n], points[i], points[(i + 1) % n]);
            let a = [c[0] - p[0], c[1] - p[1]];
            let b = [q[0] - c[0], q[1] - c[1]];
            let cross = a[0] * b[1] - a[1] * b[0];
            let scale = (a[0].hypot(a[1]) * b[0].hypot(b[1])).max(f64::MIN_POSITIVE);
            cross.abs() > 1e-9 * scale
        })
        .map(|i| points[i])
        .collect()
}

pub fn svg_string(polyline: &RadialPolyline, style: &RenderStyle) -> Result<String, ExportError> {
    style.validate()?;
    let mut extent = polyline.radii().iter().copied().fold(0.0, f64::max);
    if style.overlay_unit_circle {
        extent = extent.max(1.0);
    }
    let half = extent / (1.0 - 2.0 * style.margin);
    let stroke = style.stroke_width * 2.0 * half / style.image_size as f64;
    let corners = prune_collinear(&polyline.points());

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="{min:.6} {min:.6} {span:.6} {span:.6}">"#,
        size = style.image_size,
        min = -half,
        span = 2.0 * half,
    );
    if style.overlay_unit_circle {
        let _ = writeln!(
            svg,
            r##"<circle cx="0" cy="0" r="1" fill="none" stroke="#a0a0a0" stroke-width="{stroke:.6}"/>"##
        );
    }
    let mut d = String::new();
    for (i, p) in corners.iter().enumerate() {
        let cmd = if i == 0 { 'M' } else { 'L' };
        // SVG's y axis points down.
        let _ = write!(d, "{cmd}{:.6} {:.6} ", p[0], -p[1]);
    }
    d.push('Z');
    let _ = writeln!(
        svg,
        r#"<path d="{d}" fill="none" stroke="black" stroke-width="{:.6}" stroke-linejoin="round"/>"#,
        stroke * 1.5
    );
    svg.push_str("</svg>\n");
    Ok(svg)
}

pub fn write_svg(
    polyline: &RadialPolyline,
    style: &RenderStyle,
    path: impl AsRef<Path>,
) -> Result<(), ExportError> {
    fs::write(path, svg_string(polyline, style)?)?;
    Ok(())
}

/// Nine significant digits, plain decimal for moderate magnitudes.
pub fn format_sig9(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..9).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        let s = format!("{x:.decimals$}");
        // Rounding can carry into a new leading digit; that is still 9 digits.
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        format!("{x:.8e}")
    }
}

pub fn obj_string(mesh: &RadialMesh) -> Result<String, ExportError> {
    if mesh.directions().is_empty() || mesh.triangles().is_empty() {
        return Err(ExportError::Precondition("mesh is empty".into()));
    }
    let mut out = String::with_capacity(mesh.directions().len() * 40);
    for p in mesh.points() {
        let _ = writeln!(out, "v {} {} {}", format_sig9(p[0]), format_sig9(p[1]), format_sig9(p[2]));
    }
    for t in mesh.triangles() {
        let _ = writeln!(out, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1);
    }
    Ok(out)
}

pub fn write_obj(mesh: &RadialMesh, path: impl AsRef<Path>) -> Result<(), ExportError> {
    fs::write(path, obj_string(mesh)?)?;
    Ok(())
}

/// Vertex positions and 0-based triangles read back from an OBJ file.
pub type ObjData = (Vec<[f64; 3]>, Vec<[usize; 3]>);

/// Parses `v` and triangular `f` records (0-based indices on return).
pub fn parse_obj(text: &str) -> Result<ObjData, ExportError> {
    let bad = |line: &str| ExportError::Precondition(format!("malformed OBJ line: {line}"));
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    for line in text.lines() {
        let mut parts = line.split_whitespace();
        match parts.next() {
            Some("v") => {
                let c: Vec<f64> = parts
                    .map(str::parse)
                    .collect::<Result<_, _>>()
                    .map_err(|_| bad(line))?;
                let [x, y, z] = c[..] else { return Err(bad(line)) };
                vertices.push([x, y, z]);
            }
            Some("f") => {
                let idx: Vec<usize> = parts
                    .map(|t| t.split('/').next().unwrap_or(t).parse::<usize>())
                    .collect::<Result<_, _>>()
                    .map_err(|_| bad(line))?;
                let [a, b, c] = idx[..] else { return Err(bad(line)) };
                if a == 0 || b == 0 || c == 0 {
                    return Err(bad(line));
                }
                faces.push([a - 1, b - 1, c - 1]);
            }
            _ => {}
        }
    }
    Ok((vertices, faces))
}

#[derive(Serialize)]
struct PolylineRow {
    theta: f64,
    r: f64,
    x: f64,
    y: f64,
}

pub fn write_polyline_csv(polyline: &RadialPolyline, path: impl AsRef<Path>) -> Result<(), ExportError> {
    let mut w = csv::Writer::from_path(path)?;
    for ((&theta, &r), p) in polyline
        .angles()
        .iter()
        .zip(polyline.radii())
        .zip(polyline.points())
    {
        w.serialize(PolylineRow {
            theta,
            r,
            x: p[0],
            y: p[1],
        })?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct MeshRow {
    ux: f64,
    uy: f64,
    uz: f64,
    r: f64,
}

pub fn write_mesh_csv(mesh: &RadialMesh, path: impl AsRef<Path>) -> Result<(), ExportError> {
    let mut w = csv::Writer::from_path(path)?;
    for (u, &r) in mesh.directions().iter().zip(mesh.radii()) {
        w.serialize(MeshRow {
            ux: u[0],
            uy: u[1],
            uz: u[2],
            r,
        })?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct MeshDocument<'a> {
    directions: &'a [[f64; 3]],
    radii: &'a [f64],
}

pub fn write_mesh_json(mesh: &RadialMesh, path: impl AsRef<Path>) -> Result<(), ExportError> {
    let doc = MeshDocument {
        directions: mesh.directions(),
        radii: mesh.radii(),
    };
    fs::write(path, serde_json::to_string(&doc)? + "\n")?;
    Ok(())
}

#[derive(Serialize)]
struct LossRow {
    epoch: usize,
    loss: f64,
}

pub fn write_loss_csv(history: &[(usize, f64)], path: impl AsRef<Path>) -> Result<(), ExportError> {
    let mut w = csv::Writer::from_path(path)?;
    for &(epoch, loss) in history {
        w.serialize(LossRow { epoch, loss })?;
    }
    w.flush()?;
    Ok(())
}

pub fn report_json(report: &PolytopeReport) -> Result<String, ExportError> {
    Ok(serde_json::to_string_pretty(report)? + "\n")
}

pub fn write_report(report: &PolytopeReport, path: impl AsRef<Path>) -> Result<(), ExportError> {
    fs::write(path, report_json(report)?)?;
    Ok(())
}

pub fn read_report(path: impl AsRef<Path>) -> Result<PolytopeReport, ExportError> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

/// Provenance stored alongside trained weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainMeta {
    pub config: TrainConfig,
    pub final_loss: f64,
    pub restart_index: usize,
}

/// On-disk model. Weights are row-major nested arrays; floats are written in
/// shortest round-trip form so reading recovers every bit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDocument {
    pub format_version: u32,
    pub spec: NetworkSpec,
    pub weights: Vec<Vec<Vec<f64>>>,
    pub seed: Option<u64>,
    pub train_meta: Option<TrainMeta>,
}

impl ModelDocument {
    pub fn new(net: &Network, seed: Option<u64>, train_meta: Option<TrainMeta>) -> Self {
        Self {
            format_version: MODEL_FORMAT_VERSION,
            spec: net.spec().clone(),
            weights: net.weights().iter().map(Matrix::to_rows).collect(),
            seed,
            train_meta,
        }
    }

    pub fn network(&self) -> Result<Network, ExportError> {
        let weights = self
            .weights
            .iter()
            .map(|rows| Matrix::from_rows(rows))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Network::new(self.spec.clone(), weights)?)
    }

    pub fn to_json(&self) -> Result<String, ExportError> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn from_json(text: &str) -> Result<Self, ExportError> {
        #[derive(Deserialize)]
        struct Header {
            format_version: u32,
        }
        let header: Header = serde_json::from_str(text)?;
        if header.format_version != MODEL_FORMAT_VERSION {
            return Err(ExportError::VersionMismatch {
                found: header.format_version,
                expected: MODEL_FORMAT_VERSION,
            });
        }
        let doc: Self = serde_json::from_str(text)?;
        doc.spec.validate()?;
        Ok(doc)
    }
}

pub fn write_model(doc: &ModelDocument, path: impl AsRef<Path>) -> Result<(), ExportError> {
    fs::write(path, doc.to_json()?)?;
    Ok(())
}

pub fn read_model(path: impl AsRef<Path>) -> Result<ModelDocument, ExportError> {
    ModelDocument::from_json(&fs::read_to_string(path)?)
}

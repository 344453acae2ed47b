//! Train → extract → analyse steps shared by the subcommands.

use std::fmt;
use std::path::Path;

use anyhow::{Context, Result};
use polynet::analysis::{
    analyze_polyhedron, polygon_report, Catalog, PolytopeReport, DEFAULT_ANGLE_TOL,
    DEFAULT_EDGE_CV_TOL, DEFAULT_NORMAL_TOL,
};
use polynet::export::{
    write_loss_csv, write_mesh_csv, write_mesh_json, write_model, write_obj, write_polyline_csv,
    write_report, write_svg, ModelDocument, RenderStyle, TrainMeta,
};
use polynet::levelset::{extract_mesh, extract_polyline};
use polynet::train::TrainConfig;
use polynet::{train_best_of, AnalysisError, Network, NetworkSpec, TrainError, TrainResult};

use crate::manifest::Recorder;

/// Bad input from the user; exits with status 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

/// Extraction resolution.
#[derive(Debug, Clone, Copy)]
pub struct Resolution {
    pub samples: usize,
    pub subdivisions: usize,
}

/// Builds a spec, broadcasting a single power to every layer.
pub fn build_spec(dim: usize, widths: &[usize], powers: &[f64]) -> Result<NetworkSpec> {
    let powers = if powers.len() == 1 {
        vec![powers[0]; widths.len()]
    } else {
        powers.to_vec()
    };
    NetworkSpec::new(dim, widths.to_vec(), powers).map_err(|e| usage(e.to_string()))
}

fn format_power(p: f64) -> String {
    format!("{p}").replace('.', "_")
}

/// File stem naming a network type, e.g. `d3_n4-2_p1-1`.
pub fn stem(spec: &NetworkSpec) -> String {
    let widths: Vec<String> = spec.widths().iter().map(|w| w.to_string()).collect();
    let powers: Vec<String> = spec.powers().iter().map(|&p| format_power(p)).collect();
    format!("d{}_n{}_p{}", spec.input_dim(), widths.join("-"), powers.join("-"))
}

pub fn train_and_save(
    spec: &NetworkSpec,
    config: &TrainConfig,
    rec: &mut Recorder,
    stem: &str,
) -> Result<TrainResult> {
    config.validate().map_err(|e| usage(e.to_string()))?;
    let result = train_best_of(spec, config).map_err(|e| match e {
        TrainError::InvalidConfig(m) => usage(m),
        other => anyhow::Error::new(other).context(format!("training {}", spec.type_label())),
    })?;
    rec.seed(result.seed_used);
    let meta = TrainMeta {
        config: config.clone(),
        final_loss: result.final_loss,
        restart_index: result.restart_index,
    };
    let model = format!("{stem}.model.json");
    write_model(
        &ModelDocument::new(&result.network, Some(result.seed_used), Some(meta)),
        rec.path(&model),
    )?;
    rec.record(&model)?;
    let losses = format!("{stem}.losshistory.csv");
    write_loss_csv(&result.loss_history, rec.path(&losses))?;
    rec.record(&losses)?;
    Ok(result)
}

pub fn load_model(path: &Path) -> Result<(Network, ModelDocument)> {
    let doc = polynet::export::read_model(path)
        .with_context(|| format!("reading model {}", path.display()))?;
    Ok((doc.network()?, doc))
}

/// Writes the level set: SVG + radial CSV in 2D, OBJ + radial CSV + JSON in 3D.
pub fn extract_and_save(
    net: &Network,
    res: Resolution,
    rec: &mut Recorder,
    stem: &str,
) -> Result<()> {
    match net.input_dim() {
        2 => {
            let curve = extract_polyline(net, res.samples)?;
            let svg = format!("{stem}.svg");
            write_svg(&curve, &RenderStyle::default(), rec.path(&svg))?;
            rec.record(&svg)?;
            let csv = format!("{stem}.radial.csv");
            write_polyline_csv(&curve, rec.path(&csv))?;
            rec.record(&csv)?;
        }
        3 => {
            let mesh = extract_mesh(net, res.subdivisions)?;
            let obj = format!("{stem}.obj");
            write_obj(&mesh, rec.path(&obj))?;
            rec.record(&obj)?;
            let csv = format!("{stem}.radial.csv");
            write_mesh_csv(&mesh, rec.path(&csv))?;
            rec.record(&csv)?;
            let json = format!("{stem}.mesh.json");
            write_mesh_json(&mesh, rec.path(&json))?;
            rec.record(&json)?;
        }
        d => {
            return Err(usage(format!(
                "direct extraction needs d = 2 or 3, got d = {d}; use `slice` for higher dimensions"
            )))
        }
    }
    Ok(())
}

/// Extracts the level set and describes it: polygon or polyhedron structure
/// where one is found, sphere deviation only otherwise.
pub fn analyze(net: &Network, res: Resolution) -> Result<PolytopeReport> {
    match net.input_dim() {
        2 => {
            let curve = extract_polyline(net, res.samples)?;
            match polygon_report(&curve, DEFAULT_ANGLE_TOL) {
                Ok(report) => Ok(report),
                Err(AnalysisError::NotPolygonal { .. }) => Ok(PolytopeReport::smooth(2, curve.radii())),
                Err(e) => Err(e.into()),
            }
        }
        3 => {
            let mesh = extract_mesh(net, res.subdivisions)?;
            if (net.homogeneity_degree() - 1.0).abs() > 1e-12 {
                return Ok(PolytopeReport::smooth(3, mesh.radii()));
            }
            match analyze_polyhedron(net, &mesh, DEFAULT_NORMAL_TOL, DEFAULT_EDGE_CV_TOL, &Catalog::seeded()) {
                Ok(a) => Ok(a.report),
                Err(AnalysisError::NotPolyhedral { .. }) => Ok(PolytopeReport::smooth(3, mesh.radii())),
                Err(e) => Err(e.into()),
            }
        }
        d => Err(usage(format!(
            "analysis needs d = 2 or 3, got d = {d}; use `slice` for higher dimensions"
        ))),
    }
}

pub fn save_report(report: &PolytopeReport, rec: &mut Recorder, stem: &str) -> Result<()> {
    let name = format!("{stem}.report.json");
    write_report(report, rec.path(&name))?;
    rec.record(&name)?;
    Ok(())
}

/// One-line human summary of a report.
pub fn describe(report: &PolytopeReport) -> String {
    let name = report.identified.as_deref().unwrap_or("unidentified");
    if report.vertex_count == 0 {
        return format!(
            "smooth body, max |r-1| = {:.3e}, mean |r-1| = {:.3e}",
            report.max_sphere_deviation, report.mean_sphere_deviation
        );
    }
    let counts = match report.face_count {
        Some(f) => format!("(V,E,F) = ({},{},{f})", report.vertex_count, report.edge_count),
        None => format!("V = E = {}", report.vertex_count),
    };
    format!(
        "{name}: {counts}, edge cv = {:.4}, mean |r-1| = {:.3e}",
        report.edge_length_cv, report.mean_sphere_deviation
    )
}

//! Figure presets and power sweeps.

use std::f64::consts::PI;
use std::path::Path;

use anyhow::Result;
use clap::ValueEnum;
use polynet::analysis::weight_direction_spacing;
use polynet::train::TrainConfig;
use serde::Serialize;
use serde_json::json;

use crate::manifest::Recorder;
use crate::pipeline::{self, usage, Resolution};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Figure {
    /// Polygons of type (n;1), n = 2..7.
    Fig1,
    /// Polyhedra of type (n;1), n = 3..12.
    Fig2,
    /// Polyhedra of type (n,2;1) against (n;1), n = 4..11.
    Fig3,
    /// Polygons of type (2;p).
    Fig5,
}

const FIG1_N: [usize; 6] = [2, 3, 4, 5, 6, 7];
const FIG2_N: [usize; 10] = [3, 4, 5, 6, 7, 8, 9, 10, 11, 12];
const FIG3_N: [usize; 8] = [4, 5, 6, 7, 8, 9, 10, 11];
const FIG5_P: [f64; 8] = [0.8, 1.0, 1.2, 1.5, 2.0, 3.0, 5.0, 10.0];
pub const DEFAULT_P_MAX: f64 = 50.0;

/// User overrides of a preset's parameter lists.
#[derive(Debug, Clone, Serialize)]
pub struct Overrides {
    pub n_list: Option<Vec<usize>>,
    pub p_list: Option<Vec<f64>>,
    pub p_max: f64,
}

/// One trained network and what its level set turned out to be.
#[derive(Debug, Serialize)]
struct Row {
    r#type: String,
    final_loss: Option<f64>,
    identified: Option<String>,
    expected: Option<String>,
    signature: Option<String>,
    edge_length_cv: Option<f64>,
    max_sphere_deviation: Option<f64>,
    mean_sphere_deviation: Option<f64>,
    /// Largest deviation of the weight-direction gaps from π/n (2D, p = 1).
    max_gap_error: Option<f64>,
    error: Option<String>,
}

impl Row {
    fn failed(label: String, expected: Option<String>, err: &anyhow::Error) -> Self {
        Self {
            r#type: label,
            final_loss: None,
            identified: None,
            expected,
            signature: None,
            edge_length_cv: None,
            max_sphere_deviation: None,
            mean_sphere_deviation: None,
            max_gap_error: None,
            error: Some(format!("{err:#}")),
        }
    }
}

/// Trains, extracts and analyses one network type.
fn run_one(
    dim: usize,
    widths: &[usize],
    powers: &[f64],
    expected: Option<String>,
    config: &TrainConfig,
    res: Resolution,
    rec: &mut Recorder,
) -> Result<Row> {
    let spec = pipeline::build_spec(dim, widths, powers)?;
    let label = spec.type_label();
    let stem = pipeline::stem(&spec);
    let attempt = (|| -> Result<Row> {
        let result = pipeline::train_and_save(&spec, config, rec, &stem)?;
        pipeline::extract_and_save(&result.network, res, rec, &stem)?;
        let report = pipeline::analyze(&result.network, res)?;
        pipeline::save_report(&report, rec, &stem)?;
        let max_gap_error = (dim == 2 && widths.len() == 1 && powers.iter().all(|&p| p == 1.0))
            .then(|| weight_direction_spacing(&result.network).ok())
            .flatten()
            .map(|gaps| {
                let ideal = PI / widths[0] as f64;
                gaps.iter().map(|g| (g - ideal).abs()).fold(0.0, f64::max)
            });
        let signature = (report.vertex_count > 0).then(|| match report.face_count {
            Some(f) => format!("({},{},{f})", report.vertex_count, report.edge_count),
            None => format!("{} vertices", report.vertex_count),
        });
        println!("{label}: {}", pipeline::describe(&report));
        Ok(Row {
            r#type: label.clone(),
            final_loss: Some(result.final_loss),
            identified: report.identified.clone(),
            expected: expected.clone(),
            signature,
            edge_length_cv: (report.vertex_count > 0).then_some(report.edge_length_cv),
            max_sphere_deviation: Some(report.max_sphere_deviation),
            mean_sphere_deviation: Some(report.mean_sphere_deviation),
            max_gap_error,
            error: None,
        })
    })();
    match attempt {
        Ok(row) => Ok(row),
        // Usage errors abort the whole preset; runtime failures become a row.
        Err(e) if e.downcast_ref::<pipeline::UsageError>().is_some() => Err(e),
        Err(e) => {
            println!("{label}: failed: {e:#}");
            Ok(Row::failed(label, expected, &e))
        }
    }
}

fn opt(x: Option<f64>, prec: usize) -> String {
    x.map(|v| format!("{v:.prec$e}")).unwrap_or_else(|| "-".into())
}

fn markdown(rows: &[Row]) -> String {
    let mut out = String::from(
        "| type | identified | expected | signature | edge cv | max dev | mean dev | gap error | final loss |\n\
         |---|---|---|---|---|---|---|---|---|\n",
    );
    for r in rows {
        let identified = match &r.error {
            Some(e) => format!("error: {e}"),
            None => r.identified.clone().unwrap_or_else(|| "-".into()),
        };
        out.push_str(&format!(
            "| {} | {} | {} | {} | {} | {} | {} | {} | {} |\n",
            r.r#type,
            identified,
            r.expected.as_deref().unwrap_or("-"),
            r.signature.as_deref().unwrap_or("-"),
            opt(r.edge_length_cv, 2),
            opt(r.max_sphere_deviation, 2),
            opt(r.mean_sphere_deviation, 2),
            opt(r.max_gap_error, 2),
            opt(r.final_loss, 2),
        ));
    }
    out
}

fn write_summary<T: Serialize>(rec: &mut Recorder, table: &str, rows: &T) -> Result<()> {
    rec.write("summary.md", table)?;
    rec.write("summary.json", &(serde_json::to_string_pretty(rows)? + "\n"))?;
    print!("{table}");
    Ok(())
}

pub fn sweep(
    dim: usize,
    widths: &[usize],
    p_list: &[f64],
    config: &TrainConfig,
    res: Resolution,
    out: &Path,
) -> Result<()> {
    if p_list.is_empty() {
        return Err(usage("--p-list is empty"));
    }
    let mut rec = Recorder::new(
        out,
        "sweep",
        json!({ "dim": dim, "widths": widths, "p_list": p_list, "train": config,
                "samples": res.samples, "subdiv": res.subdivisions }),
    )?;
    let mut rows = Vec::new();
    for &p in p_list {
        rows.push(run_one(dim, widths, &[p], None, config, res, &mut rec)?);
    }
    write_summary(&mut rec, &markdown(&rows), &rows)?;
    rec.finish()?;
    Ok(())
}

#[derive(Debug, Serialize)]
struct DepthRow {
    n: usize,
    shallow_mean_deviation: Option<f64>,
    deep_mean_deviation: Option<f64>,
    deep_not_worse: Option<bool>,
}

pub fn reproduce(
    figure: Figure,
    overrides: Overrides,
    config: &TrainConfig,
    res: Resolution,
    out: &Path,
) -> Result<()> {
    let ns = |preset: &[usize]| overrides.n_list.clone().unwrap_or_else(|| preset.to_vec());
    let mut rec = Recorder::new(
        out,
        &format!("reproduce {}", serde_json::to_value(figure)?.as_str().unwrap_or("")),
        json!({ "figure": figure, "overrides": overrides, "train": config,
                "samples": res.samples, "subdiv": res.subdivisions }),
    )?;
    match figure {
        Figure::Fig1 | Figure::Fig2 => {
            let (dim, preset): (usize, &[usize]) = if figure == Figure::Fig1 {
                (2, &FIG1_N)
            } else {
                (3, &FIG2_N)
            };
            let mut rows = Vec::new();
            for n in ns(preset) {
                let expected = (dim == 2).then(|| format!("regular {}-gon", 2 * n)).or(match n {
                    3 => Some("octahedron".to_string()),
                    4 => Some("cuboctahedron".to_string()),
                    6 => Some("icosidodecahedron".to_string()),
                    _ => None,
                });
                rows.push(run_one(dim, &[n], &[1.0], expected, config, res, &mut rec)?);
            }
            write_summary(&mut rec, &markdown(&rows), &rows)?;
        }
        Figure::Fig3 => {
            let mut rows = Vec::new();
            let mut depth = Vec::new();
            for n in ns(&FIG3_N) {
                let shallow = run_one(3, &[n], &[1.0], None, config, res, &mut rec)?;
                let deep = run_one(3, &[n, 2], &[1.0], None, config, res, &mut rec)?;
                let (s, d) = (shallow.mean_sphere_deviation, deep.mean_sphere_deviation);
                depth.push(DepthRow {
                    n,
                    shallow_mean_deviation: s,
                    deep_mean_deviation: d,
                    deep_not_worse: s.zip(d).map(|(s, d)| d <= s),
                });
                rows.push(shallow);
                rows.push(deep);
            }
            let mut table = markdown(&rows);
            table.push_str("\n| n | mean dev (n;1) | mean dev (n,2;1) | deeper not worse |\n|---|---|---|---|\n");
            for r in &depth {
                table.push_str(&format!(
                    "| {} | {} | {} | {} |\n",
                    r.n,
                    opt(r.shallow_mean_deviation, 3),
                    opt(r.deep_mean_deviation, 3),
                    r.deep_not_worse.map_or("-".to_string(), |b| b.to_string()),
                ));
            }
            write_summary(&mut rec, &table, &json!({ "runs": rows, "depth": depth }))?;
        }
        Figure::Fig5 => {
            let mut ps = overrides.p_list.clone().unwrap_or_else(|| FIG5_P.to_vec());
            if !(overrides.p_max > 0.0 && overrides.p_max.is_finite()) {
                return Err(usage("--p-max must be a positive finite power"));
            }
            if !ps.contains(&overrides.p_max) {
                ps.push(overrides.p_max);
            }
            let mut rows = Vec::new();
            for p in ps {
                rows.push(run_one(2, &[2], &[p], None, config, res, &mut rec)?);
            }
            write_summary(&mut rec, &markdown(&rows), &rows)?;
        }
    }
    rec.finish()?;
    Ok(())
}

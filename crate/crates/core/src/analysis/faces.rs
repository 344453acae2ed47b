//! Face recovery for piecewise-linear (`P = 1`) networks in 3D.
//!
//! On each linear region `f(x) = g . x` with a constant gradient `g`, so the
//! boundary facet inside that region is the plane `g . x = 1`. Clustering the
//! mesh samples by gradient direction therefore yields the facet planes
//! directly; vertices and edges follow from intersecting them.

use std::collections::BTreeMap;

use nalgebra::Vector3;

use crate::analysis::catalog::{coefficient_of_variation, PolytopeReport};
use crate::analysis::polytope::{ConvexPolytope3, VERTEX_TOL};
use crate::error::AnalysisError;
use crate::levelset::RadialMesh;
use crate::net::Network;

pub const DEFAULT_NORMAL_TOL: f64 = 0.02;

/// Samples whose smallest pre-activation is below this lie on a crease,
/// where the gradient mixes neighbouring regions.
const CREASE_TOL: f64 = 1e-10;

/// One cluster of boundary samples sharing a gradient direction.
#[derive(Debug, Clone, PartialEq)]
pub struct FacePlane {
    pub normal: Vector3<f64>,
    pub offset: f64,
    pub members: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FaceClusters {
    pub planes: Vec<FacePlane>,
    /// Samples that were clustered (crease samples excluded).
    pub samples: usize,
    pub normal_tol: f64,
}

struct Accumulator {
    representative: Vector3<f64>,
    gradient_sum: Vector3<f64>,
    points: Vec<Vector3<f64>>,
}

pub fn cluster_faces_3d(
    net: &Network,
    mesh: &RadialMesh,
    normal_tol: f64,
) -> Result<FaceClusters, AnalysisError> {
    if net.input_dim() != 3 {
        return Err(AnalysisError::Precondition(format!(
            "face clustering needs d = 3, got {}",
            net.input_dim()
        )));
    }
    let degree = net.homogeneity_degree();
    if (degree - 1.0).abs() > 1e-12 {
        return Err(AnalysisError::Precondition(format!(
            "face clustering needs a piecewise-linear network (P = 1), got P = {degree}"
        )));
    }
    if !(normal_tol > 0.0) {
        return Err(AnalysisError::Precondition("normal_tol must be positive".into()));
    }
    let cos_tol = normal_tol.cos();
    let mut ws = net.workspace();
    let mut clusters: Vec<Accumulator> = Vec::new();
    let mut samples = 0;
    for q in mesh.points() {
        let g = Vector3::from_column_slice(net.grad_input_with(&q, &mut ws));
        if ws.min_abs_preactivation() <= CREASE_TOL {
            continue;
        }
        let len = g.norm();
        if len == 0.0 {
            continue;
        }
        samples += 1;
        let unit = g / len;
        let point = Vector3::from(q);
        match clusters.iter_mut().find(|c| c.representative.dot(&unit) >= cos_tol) {
            Some(c) => {
                c.gradient_sum += g;
                c.points.push(point);
            }
            None => clusters.push(Accumulator {
                representative: unit,
                gradient_sum: g,
                points: vec![point],
            }),
        }
    }
    if clusters.len() * 10 > samples {
        return Err(AnalysisError::NotPolyhedral {
            clusters: clusters.len(),
            samples,
        });
    }
    let planes = clusters
        .into_iter()
        .map(|c| {
            let normal = c.gradient_sum.normalize();
            let offset = c.points.iter().map(|p| normal.dot(p)).sum::<f64>() / c.points.len() as f64;
            FacePlane {
                normal,
                offset,
                members: c.points.len(),
            }
        })
        .collect();
    Ok(FaceClusters {
        planes,
        samples,
        normal_tol,
    })
}

/// The convex body bounded by the clustered planes.
pub fn polytope_from_faces(clusters: &FaceClusters) -> Result<ConvexPolytope3, AnalysisError> {
    if clusters.planes.len() < 4 {
        return Err(AnalysisError::Precondition(format!(
            "at least 4 face planes are needed, got {}",
            clusters.planes.len()
        )));
    }
    let planes: Vec<(Vector3<f64>, f64)> =
        clusters.planes.iter().map(|p| (p.normal, p.offset)).collect();
    ConvexPolytope3::from_halfspaces(&planes, VERTEX_TOL)
}

/// `(V, E, F)` and edge regularity of a polytope; fails unless `V - E + F = 2`.
pub fn polytope_report(poly: &ConvexPolytope3) -> Result<PolytopeReport, AnalysisError> {
    let v = poly.vertices().len();
    let e = poly.edges().len();
    let f = poly.facets().len();
    if v + f != e + 2 {
        return Err(AnalysisError::EulerViolation { v, e, f });
    }
    Ok(PolytopeReport {
        dim: 3,
        vertex_count: v,
        edge_count: e,
        face_count: Some(f),
        euler: Some(v as i64 - e as i64 + f as i64),
        edge_length_cv: coefficient_of_variation(&poly.edge_lengths()),
        identified: None,
        max_sphere_deviation: 0.0,
        mean_sphere_deviation: 0.0,
        tolerances_used: BTreeMap::from([("vertex_tol".to_string(), VERTEX_TOL)]),
    })
}

pub fn combinatorics_from_faces(clusters: &FaceClusters) -> Result<PolytopeReport, AnalysisError> {
    let mut report = polytope_report(&polytope_from_faces(clusters)?)?;
    report
        .tolerances_used
        .insert("normal_tol".to_string(), clusters.normal_tol);
    Ok(report)
}

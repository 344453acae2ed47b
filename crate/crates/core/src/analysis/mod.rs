//! Combinatorics, regularity and identification of extracted bodies.

mod catalog;
mod compare;
mod faces;
mod polygon;
mod polytope;

pub use catalog::{
    coefficient_of_variation, sphere_deviation, Catalog, CatalogEntry, PolytopeReport,
    DEFAULT_EDGE_CV_TOL,
};
pub use compare::{align_point_sets, hausdorff_distance, kabsch, RadialBody};
pub use faces::{
    cluster_faces_3d, combinatorics_from_faces, polytope_from_faces, polytope_report, FaceClusters,
    FacePlane, DEFAULT_NORMAL_TOL,
};
pub use polygon::{
    detect_vertices_2d, polygon_report, weight_direction_spacing, DEFAULT_ANGLE_TOL,
    REGULAR_ANGLE_SPREAD, REGULAR_EDGE_CV,
};
pub use polytope::{ConvexPolytope3, Facet, VERTEX_TOL};

use crate::error::AnalysisError;
use crate::levelset::RadialMesh;
use crate::net::Network;

/// Result of analysing a piecewise-linear 3D network.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyhedronAnalysis {
    pub report: PolytopeReport,
    pub polytope: ConvexPolytope3,
    pub clusters: FaceClusters,
}

/// Face clustering, vertex recovery and catalog lookup for a `P = 1` network
/// on `R^3`, sampled on `mesh`.
pub fn analyze_polyhedron(
    net: &Network,
    mesh: &RadialMesh,
    normal_tol: f64,
    edge_cv_tol: f64,
    catalog: &Catalog,
) -> Result<PolyhedronAnalysis, AnalysisError> {
    let clusters = cluster_faces_3d(net, mesh, normal_tol)?;
    let polytope = polytope_from_faces(&clusters)?;
    let mut report = polytope_report(&polytope)?.with_sphere_deviation(mesh.radii());
    report
        .tolerances_used
        .insert("normal_tol".to_string(), normal_tol);
    report
        .tolerances_used
        .insert("edge_cv_tol".to_string(), edge_cv_tol);
    report.identified = catalog
        .identify(&report, edge_cv_tol)?
        .map(|e| e.name.clone());
    Ok(PolyhedronAnalysis {
        report,
        polytope,
        clusters,
    })
}

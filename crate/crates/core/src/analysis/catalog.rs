use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::AnalysisError;

pub const DEFAULT_EDGE_CV_TOL: f64 = 0.02;

/// Combinatorial summary of an extracted body.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolytopeReport {
    pub dim: usize,
    #[serde(rename = "V")]
    pub vertex_count: usize,
    #[serde(rename = "E")]
    pub edge_count: usize,
    /// Facet count; absent for polygons.
    #[serde(rename = "F")]
    pub face_count: Option<usize>,
    /// `V - E + F`; absent for polygons.
    pub euler: Option<i64>,
    pub edge_length_cv: f64,
    pub identified: Option<String>,
    /// `max | |q| - 1 |` over the sampled boundary.
    pub max_sphere_deviation: f64,
    /// `mean | |q| - 1 |` over the sampled boundary.
    pub mean_sphere_deviation: f64,
    pub tolerances_used: BTreeMap<String, f64>,
}

impl PolytopeReport {
    /// Report for a body with no recoverable vertex structure (smooth or
    /// unclassified), carrying only the sphere deviations.
    pub fn smooth(dim: usize, radii: &[f64]) -> Self {
        let (max_dev, mean_dev) = sphere_deviation(radii);
        Self {
            dim,
            vertex_count: 0,
            edge_count: 0,
            face_count: (dim == 3).then_some(0),
            euler: None,
            edge_length_cv: 0.0,
            identified: None,
            max_sphere_deviation: max_dev,
            mean_sphere_deviation: mean_dev,
            tolerances_used: BTreeMap::new(),
        }
    }

    pub fn with_sphere_deviation(mut self, radii: &[f64]) -> Self {
        let (max_dev, mean_dev) = sphere_deviation(radii);
        self.max_sphere_deviation = max_dev;
        self.mean_sphere_deviation = mean_dev;
        self
    }

    pub fn signature(&self) -> (usize, usize, Option<usize>) {
        (self.vertex_count, self.edge_count, self.face_count)
    }
}

/// `(max, mean)` of `|r - 1|`.
pub fn sphere_deviation(radii: &[f64]) -> (f64, f64) {
    if radii.is_empty() {
        return (0.0, 0.0);
    }
    let max = radii.iter().map(|r| (r - 1.0).abs()).fold(0.0, f64::max);
    let mean = radii.iter().map(|r| (r - 1.0).abs()).sum::<f64>() / radii.len() as f64;
    (max, mean)
}

/// Standard deviation over mean (population form). Zero for empty input.
pub fn coefficient_of_variation(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    var.sqrt() / mean
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub name: String,
    pub dim: usize,
    pub vertices: usize,
    pub edges: usize,
    pub faces: Option<usize>,
    pub vertex_transitive: bool,
}

impl CatalogEntry {
    pub fn solid(name: &str, v: usize, e: usize, f: usize) -> Self {
        Self {
            name: name.to_string(),
            dim: 3,
            vertices: v,
            edges: e,
            faces: Some(f),
            vertex_transitive: true,
        }
    }

    pub fn polygon(sides: usize) -> Self {
        Self {
            name: format!("regular {sides}-gon"),
            dim: 2,
            vertices: sides,
            edges: sides,
            faces: None,
            vertex_transitive: true,
        }
    }
}

/// Named polytopes keyed by `(V, E, F)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Catalog {
    entries: Vec<CatalogEntry>,
}

impl Catalog {
    /// Rejects 3D entries violating `V - E + F = 2`.
    pub fn new(entries: Vec<CatalogEntry>) -> Result<Self, AnalysisError> {
        for e in &entries {
            if e.dim == 3 {
                let f = e.faces.unwrap_or(0);
                if e.vertices + f != e.edges + 2 {
                    return Err(AnalysisError::EulerViolation {
                        v: e.vertices,
                        e: e.edges,
                        f,
                    });
                }
            }
        }
        Ok(Self { entries })
    }

    /// Octahedron, cube, cuboctahedron, icosidodecahedron and the regular
    /// `2n`-gons for `n = 2..=12`.
    pub fn seeded() -> Self {
        let mut entries = vec![
            CatalogEntry::solid("octahedron", 6, 12, 8),
            CatalogEntry::solid("cube", 8, 12, 6),
            CatalogEntry::solid("cuboctahedron", 12, 24, 14),
            CatalogEntry::solid("icosidodecahedron", 30, 60, 32),
        ];
        entries.extend((2..=12).map(|n| CatalogEntry::polygon(2 * n)));
        Self::new(entries).expect("seeded catalog is consistent")
    }

    pub fn entries(&self) -> &[CatalogEntry] {
        &self.entries
    }

    /// The unique entry with the report's `(V, E, F)`, provided the edge
    /// lengths are regular enough (`edge_length_cv < edge_cv_tol`).
    pub fn identify(
        &self,
        report: &PolytopeReport,
        edge_cv_tol: f64,
    ) -> Result<Option<&CatalogEntry>, AnalysisError> {
        let mut matches = self.entries.iter().filter(|e| {
            e.dim == report.dim
                && e.vertices == report.vertex_count
                && e.edges == report.edge_count
                && e.faces == report.face_count
        });
        let first = matches.next();
        if let (Some(a), Some(b)) = (first, matches.next()) {
            return Err(AnalysisError::AmbiguousMatch(a.name.clone(), b.name.clone()));
        }
        Ok(first.filter(|_| report.edge_length_cv < edge_cv_tol))
    }
}

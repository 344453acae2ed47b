use nalgebra::{Matrix3, Vector3};

use crate::error::AnalysisError;

/// Default incidence / deduplication tolerance for vertex recovery.
pub const VERTEX_TOL: f64 = 1e-6;

/// A supporting plane `normal . x = offset` with unit outward normal.
#[derive(Debug, Clone, PartialEq)]
pub struct Facet {
    /// Vertex indices, counter-clockwise seen from outside.
    pub vertices: Vec<usize>,
    pub normal: Vector3<f64>,
    pub offset: f64,
}

/// Bounded convex polytope in R^3 containing the origin in its interior.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexPolytope3 {
    vertices: Vec<Vector3<f64>>,
    facets: Vec<Facet>,
}

/// Sorts `indices` counter-clockwise around `normal`.
fn order_cycle(points: &[Vector3<f64>], indices: &mut [usize], normal: &Vector3<f64>) {
    let centroid: Vector3<f64> =
        indices.iter().map(|&i| points[i]).sum::<Vector3<f64>>() / indices.len() as f64;
    let seed = if normal.x.abs() < 0.9 {
        Vector3::x()
    } else {
        Vector3::y()
    };
    let u = normal.cross(&seed).normalize();
    let v = normal.cross(&u);
    indices.sort_by(|&a, &b| {
        let (pa, pb) = (points[a] - centroid, points[b] - centroid);
        let ta = pa.dot(&v).atan2(pa.dot(&u));
        let tb = pb.dot(&v).atan2(pb.dot(&u));
        ta.total_cmp(&tb)
    });
}

fn dedup_points(points: &mut Vec<Vector3<f64>>, tol: f64) {
    let mut out: Vec<Vector3<f64>> = Vec::with_capacity(points.len());
    for p in points.drain(..) {
        if !out.iter().any(|q| (q - p).norm() <= tol) {
            out.push(p);
        }
    }
    *points = out;
}

impl ConvexPolytope3 {
    /// Intersection of the half-spaces `normal . x <= offset`. Normals need
    /// not be unit; every offset must be positive. Planes touching the body in
    /// fewer than three vertices are dropped as redundant.
    pub fn from_halfspaces(planes: &[(Vector3<f64>, f64)], tol: f64) -> Result<Self, AnalysisError> {
        let mut unit: Vec<(Vector3<f64>, f64)> = Vec::with_capacity(planes.len());
        for &(n, c) in planes {
            let len = n.norm();
            if !(len > 0.0 && len.is_finite() && c.is_finite()) {
                return Err(AnalysisError::Precondition("degenerate plane".into()));
            }
            if c <= 0.0 {
                return Err(AnalysisError::OriginNotInterior);
            }
            let (n, c) = (n / len, c / len);
            if !unit.iter().any(|(m, d)| (m - n).norm() <= tol && (d - c).abs() <= tol) {
                unit.push((n, c));
            }
        }
        if unit.len() < 4 {
            return Err(AnalysisError::Precondition(format!(
                "a bounded polytope needs at least 4 planes, got {}",
                unit.len()
            )));
        }

        let mut candidates = Vec::new();
        for i in 0..unit.len() {
            for j in i + 1..unit.len() {
                for k in j + 1..unit.len() {
                    let a = Matrix3::from_rows(&[
                        unit[i].0.transpose(),
                        unit[j].0.transpose(),
                        unit[k].0.transpose(),
                    ]);
                    if a.determinant().abs() < 1e-10 {
                        continue;
                    }
                    let Some(inv) = a.try_inverse() else { continue };
                    let x = inv * Vector3::new(unit[i].1, unit[j].1, unit[k].1);
                    if unit.iter().all(|(n, c)| n.dot(&x) <= c + tol) {
                        candidates.push(x);
                    }
                }
            }
        }
        dedup_points(&mut candidates, tol);

        let mut facets: Vec<Facet> = unit
            .iter()
            .filter_map(|&(normal, offset)| {
                let vertices: Vec<usize> = candidates
                    .iter()
                    .enumerate()
                    .filter(|(_, x)| (normal.dot(x) - offset).abs() <= tol)
                    .map(|(i, _)| i)
                    .collect();
                (vertices.len() >= 3).then_some(Facet {
                    vertices,
                    normal,
                    offset,
                })
            })
            .collect();

        // Keep only vertices on at least three facets and reindex.
        let mut remap = vec![usize::MAX; candidates.len()];
        let mut vertices = Vec::new();
        for (i, x) in candidates.iter().enumerate() {
            if facets.iter().filter(|f| f.vertices.contains(&i)).count() >= 3 {
                remap[i] = vertices.len();
                vertices.push(*x);
            }
        }
        for f in &mut facets {
            f.vertices = f
                .vertices
                .iter()
                .filter(|&&i| remap[i] != usize::MAX)
                .map(|&i| remap[i])
                .collect();
        }
        facets.retain(|f| f.vertices.len() >= 3);
        for f in &mut facets {
            order_cycle(&vertices, &mut f.vertices, &f.normal);
        }
        if vertices.len() < 4 || facets.len() < 4 {
            return Err(AnalysisError::Precondition("half-spaces do not bound a polytope".into()));
        }
        Ok(Self { vertices, facets })
    }

    /// Convex hull of `points` (brute force over point triples).
    pub fn from_points(points: &[Vector3<f64>], tol: f64) -> Result<Self, AnalysisError> {
        if points.len() < 4 {
            return Err(AnalysisError::Precondition("hull needs at least 4 points".into()));
        }
        let mut planes: Vec<(Vector3<f64>, f64)> = Vec::new();
        for i in 0..points.len() {
            for j in i + 1..points.len() {
                for k in j + 1..points.len() {
                    let n = (points[j] - points[i]).cross(&(points[k] - points[i]));
                    let len = n.norm();
                    if len < 1e-12 {
                        continue;
                    }
                    let n = n / len;
                    let c = n.dot(&points[i]);
                    let above = points.iter().any(|p| n.dot(p) > c + tol);
                    let below = points.iter().any(|p| n.dot(p) < c - tol);
                    match (above, below) {
                        (false, true) => planes.push((n, c)),
                        (true, false) => planes.push((-n, -c)),
                        _ => {}
                    }
                }
            }
        }
        Self::from_halfspaces(&planes, tol)
    }

    pub fn vertices(&self) -> &[Vector3<f64>] {
        &self.vertices
    }

    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    /// Vertex pairs shared by two facets, as sorted index pairs.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut edges = Vec::new();
        for (a, fa) in self.facets.iter().enumerate() {
            for fb in &self.facets[a + 1..] {
                let shared: Vec<usize> = fa
                    .vertices
                    .iter()
                    .copied()
                    .filter(|v| fb.vertices.contains(v))
                    .collect();
                if shared.len() >= 2 {
                    // Collinear extras would be interior points; keep the extremes.
                    let (mut best, mut len) = ((shared[0], shared[1]), -1.0);
                    for (i, &p) in shared.iter().enumerate() {
                        for &q in &shared[i + 1..] {
                            let l = (self.vertices[p] - self.vertices[q]).norm();
                            if l > len {
                                best = (p.min(q), p.max(q));
                                len = l;
                            }
                        }
                    }
                    edges.push(best);
                }
            }
        }
        edges.sort_unstable();
        edges.dedup();
        edges
    }

    pub fn edge_lengths(&self) -> Vec<f64> {
        self.edges()
            .into_iter()
            .map(|(a, b)| (self.vertices[a] - self.vertices[b]).norm())
            .collect()
    }

    /// Distance from the origin to the boundary along the unit vector `u`.
    pub fn radius(&self, u: &Vector3<f64>) -> f64 {
        let support = self
            .facets
            .iter()
            .map(|f| f.normal.dot(u) / f.offset)
            .fold(f64::NEG_INFINITY, f64::max);
        1.0 / support
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            vertices: self.vertices.iter().map(|v| v * factor).collect(),
            facets: self
                .facets
                .iter()
                .map(|f| Facet {
                    offset: f.offset * factor,
                    ..f.clone()
                })
                .collect(),
        }
    }

    /// Polar body `{y : x . y <= 1 for all x in self}`: facet planes become
    /// vertices `n / c` and vertices become facets.
    pub fn polar_dual(&self) -> Result<Self, AnalysisError> {
        if self.facets.iter().any(|f| f.offset <= 0.0) {
            return Err(AnalysisError::OriginNotInterior);
        }
        let vertices: Vec<Vector3<f64>> =
            self.facets.iter().map(|f| f.normal / f.offset).collect();
        let mut facets = Vec::with_capacity(self.vertices.len());
        for (vi, v) in self.vertices.iter().enumerate() {
            let len = v.norm();
            let mut incident: Vec<usize> = self
                .facets
                .iter()
                .enumerate()
                .filter(|(_, f)| f.vertices.contains(&vi))
                .map(|(k, _)| k)
                .collect();
            let normal = v / len;
            order_cycle(&vertices, &mut incident, &normal);
            facets.push(Facet {
                vertices: incident,
                normal,
                offset: 1.0 / len,
            });
        }
        Ok(Self { vertices, facets })
    }

    /// Largest distance from a vertex of `self` to the nearest vertex of `other`, symmetrized.
    pub fn vertex_set_distance(&self, other: &Self) -> f64 {
        let one_way = |a: &[Vector3<f64>], b: &[Vector3<f64>]| {
            a.iter()
                .map(|p| b.iter().map(|q| (p - q).norm()).fold(f64::INFINITY, f64::min))
                .fold(0.0, f64::max)
        };
        one_way(&self.vertices, &other.vertices).max(one_way(&other.vertices, &self.vertices))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn octahedron() -> ConvexPolytope3 {
        let mut planes = Vec::new();
        for sx in [-1.0, 1.0] {
            for sy in [-1.0, 1.0] {
                for sz in [-1.0, 1.0] {
                    planes.push((Vector3::new(sx, sy, sz), 1.0));
                }
            }
        }
        ConvexPolytope3::from_halfspaces(&planes, VERTEX_TOL).unwrap()
    }

    fn cube() -> ConvexPolytope3 {
        let planes: Vec<_> = (0..3)
            .flat_map(|i| {
                [1.0, -1.0].map(|s| {
                    let mut n = Vector3::zeros();
                    n[i] = s;
                    (n, 1.0)
                })
            })
            .collect();
        ConvexPolytope3::from_halfspaces(&planes, VERTEX_TOL).unwrap()
    }

    #[test]
    fn octahedron_and_cube_counts() {
        let o = octahedron();
        assert_eq!((o.vertices().len(), o.edges().len(), o.facets().len()), (6, 12, 8));
        let c = cube();
        assert_eq!((c.vertices().len(), c.edges().len(), c.facets().len()), (8, 12, 6));
    }

    #[test]
    fn octahedron_dual_is_cube() {
        let dual = octahedron().polar_dual().unwrap();
        assert_eq!(dual.vertices().len(), 8);
        for v in dual.vertices() {
            assert!(v.iter().all(|c| (c.abs() - 1.0).abs() < 1e-12), "{v}");
        }
        assert_eq!(dual.edges().len(), 12);
        assert_eq!(dual.facets().len(), 6);
    }

    #[test]
    fn cube_dual_is_octahedron() {
        let dual = cube().polar_dual().unwrap();
        assert_eq!(dual.vertices().len(), 6);
        for v in dual.vertices() {
            assert!((v.norm() - 1.0).abs() < 1e-12);
            assert_eq!(v.iter().filter(|c| c.abs() > 1e-12).count(), 1);
        }
    }

    #[test]
    fn double_dual_is_identity() {
        for p in [octahedron(), cube()] {
            let back = p.polar_dual().unwrap().polar_dual().unwrap();
            assert!(back.vertex_set_distance(&p) < 1e-9);
        }
    }

    #[test]
    fn facets_are_ccw_from_outside() {
        let p = cube();
        for f in p.facets() {
            let vs: Vec<_> = f.vertices.iter().map(|&i| p.vertices()[i]).collect();
            let n = (vs[1] - vs[0]).cross(&(vs[2] - vs[1]));
            assert!(n.dot(&f.normal) > 0.0);
            for v in &vs {
                assert!((f.normal.dot(v) - f.offset).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn radius_of_cube() {
        let c = cube();
        assert!((c.radius(&Vector3::x()) - 1.0).abs() < 1e-15);
        let d = Vector3::new(1.0, 1.0, 1.0).normalize();
        assert!((c.radius(&d) - 3f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn origin_outside_is_rejected() {
        let mut planes: Vec<_> = (0..3)
            .flat_map(|i| {
                [1.0, -1.0].map(|s| {
                    let mut n = Vector3::zeros();
                    n[i] = s;
                    (n, 1.0)
                })
            })
            .collect();
        planes[0].1 = -0.5;
        assert!(matches!(
            ConvexPolytope3::from_halfspaces(&planes, VERTEX_TOL),
            Err(AnalysisError::OriginNotInterior)
        ));
        assert!(ConvexPolytope3::from_halfspaces(&planes[1..4], VERTEX_TOL).is_err());
    }

    #[test]
    fn hull_of_points_matches_halfspaces() {
        let pts: Vec<_> = cube().vertices().to_vec();
        let hull = ConvexPolytope3::from_points(&pts, VERTEX_TOL).unwrap();
        assert_eq!(hull.facets().len(), 6);
        assert!(hull.vertex_set_distance(&cube()) < 1e-12);
    }
}

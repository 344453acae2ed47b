//! Vertex recovery for extracted 2D curves.

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};

use crate::analysis::catalog::{coefficient_of_variation, PolytopeReport};
use crate::error::AnalysisError;
use crate::levelset::RadialPolyline;
use crate::net::Network;

pub const DEFAULT_ANGLE_TOL: f64 = 0.05;
/// Regularity thresholds for calling a polygon regular.
pub const REGULAR_EDGE_CV: f64 = 0.01;
pub const REGULAR_ANGLE_SPREAD: f64 = 0.02;

fn wrap_angle(a: f64) -> f64 {
    let a = a.rem_euclid(TAU);
    if a > PI {
        a - TAU
    } else {
        a
    }
}

fn line_intersection(p: [f64; 2], dp: [f64; 2], q: [f64; 2], dq: [f64; 2]) -> Option<[f64; 2]> {
    let det = dp[0] * dq[1] - dp[1] * dq[0];
    if det.abs() < 1e-300 {
        return None;
    }
    let t = ((q[0] - p[0]) * dq[1] - (q[1] - p[1]) * dq[0]) / det;
    Some([p[0] + t * dp[0], p[1] + t * dp[1]])
}

/// Corners of a sampled closed curve, counter-clockwise.
///
/// Segment `i` joins samples `i` and `i + 1`. A corner is declared where the
/// outward normal turns by more than `angle_tol` between consecutive
/// segments. A corner falling strictly between two samples produces a chord
/// with two turns in a row; such runs are merged and the corner is placed at
/// the intersection of the edge lines on either side of the run.
pub fn detect_vertices_2d(
    polyline: &RadialPolyline,
    angle_tol: f64,
) -> Result<Vec<[f64; 2]>, AnalysisError> {
    if !(angle_tol > 0.0 && angle_tol < PI / 4.0) {
        return Err(AnalysisError::Precondition(format!(
            "angle_tol must lie in (0, pi/4), got {angle_tol}"
        )));
    }
    let pts = polyline.points();
    let n = pts.len();
    let dir = |i: usize| {
        let (a, b) = (pts[i % n], pts[(i + 1) % n]);
        [b[0] - a[0], b[1] - a[1]]
    };
    let heading: Vec<f64> = (0..n)
        .map(|i| {
            let d = dir(i);
            d[1].atan2(d[0])
        })
        .collect();
    // turn[i]: turn from segment i-1 to segment i, at sample i.
    let turning: Vec<bool> = (0..n)
        .map(|i| wrap_angle(heading[i] - heading[(i + n - 1) % n]).abs() > angle_tol)
        .collect();

    let Some(start) = (0..n).find(|&i| !turning[i]) else {
        return Err(AnalysisError::NotPolygonal { found: 0 });
    };
    let mut vertices = Vec::new();
    let mut k = 0;
    while k < n {
        let i = (start + k) % n;
        if !turning[i] {
            k += 1;
            continue;
        }
        // Run of turning samples i..=j. A chord cutting the corner may sit
        // just outside the run with a sub-threshold turn, so intersect the
        // segments one further out on each side.
        let mut len = 1;
        while k + len < n && turning[(start + k + len) % n] {
            len += 1;
        }
        let j = (i + len - 1) % n;
        let before = (i + n - 2) % n;
        let after = (j + 1) % n;
        let corner =
            line_intersection(pts[before], dir(before), pts[after], dir(after)).unwrap_or(pts[i]);
        vertices.push(corner);
        k += len;
    }
    if vertices.len() < 3 {
        return Err(AnalysisError::NotPolygonal {
            found: vertices.len(),
        });
    }
    Ok(vertices)
}

fn polygon_stats(vertices: &[[f64; 2]]) -> (Vec<f64>, Vec<f64>) {
    let n = vertices.len();
    let dist = |a: [f64; 2], b: [f64; 2]| ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
    let lengths = (0..n).map(|i| dist(vertices[i], vertices[(i + 1) % n])).collect();
    let angles = (0..n)
        .map(|i| {
            let (prev, cur, next) = (vertices[(i + n - 1) % n], vertices[i], vertices[(i + 1) % n]);
            let a = [prev[0] - cur[0], prev[1] - cur[1]];
            let b = [next[0] - cur[0], next[1] - cur[1]];
            (a[0] * b[1] - a[1] * b[0]).abs().atan2(a[0] * b[0] + a[1] * b[1])
        })
        .collect();
    (lengths, angles)
}

pub fn polygon_report(
    polyline: &RadialPolyline,
    angle_tol: f64,
) -> Result<PolytopeReport, AnalysisError> {
    let vertices = detect_vertices_2d(polyline, angle_tol)?;
    let (lengths, angles) = polygon_stats(&vertices);
    let cv = coefficient_of_variation(&lengths);
    let mean_angle = angles.iter().sum::<f64>() / angles.len() as f64;
    let angle_spread = angles
        .iter()
        .map(|a| (a - mean_angle).abs())
        .fold(0.0, f64::max);
    let regular = cv < REGULAR_EDGE_CV && angle_spread <= REGULAR_ANGLE_SPREAD;
    let tolerances_used = BTreeMap::from([
        ("angle_tol".to_string(), angle_tol),
        ("regular_edge_cv".to_string(), REGULAR_EDGE_CV),
        ("regular_angle_spread".to_string(), REGULAR_ANGLE_SPREAD),
    ]);
    Ok(PolytopeReport {
        dim: 2,
        vertex_count: vertices.len(),
        edge_count: vertices.len(),
        face_count: None,
        euler: None,
        edge_length_cv: cv,
        identified: regular.then(|| format!("regular {}-gon", vertices.len())),
        max_sphere_deviation: 0.0,
        mean_sphere_deviation: 0.0,
        tolerances_used,
    }
    .with_sphere_deviation(polyline.radii()))
}

/// Sorted gaps between first-layer row directions taken modulo `pi`, for
/// single-layer networks on the plane. Equally spaced rows give `pi / n`.
pub fn weight_direction_spacing(net: &Network) -> Result<Vec<f64>, AnalysisError> {
    if net.input_dim() != 2 || net.spec().depth() != 1 {
        return Err(AnalysisError::Precondition(
            "weight spacing needs a single-layer network on R^2".into(),
        ));
    }
    let w = &net.weights()[0];
    let mut angles = Vec::with_capacity(w.rows());
    for i in 0..w.rows() {
        let row = w.row(i);
        if row[0] == 0.0 && row[1] == 0.0 {
            return Err(AnalysisError::ZeroWeightRow(i));
        }
        let a = row[1].atan2(row[0]).rem_euclid(PI);
        // rem_euclid can round up to exactly pi.
        angles.push(if a >= PI { 0.0 } else { a });
    }
    angles.sort_by(f64::total_cmp);
    let n = angles.len();
    Ok((0..n)
        .map(|i| {
            if i + 1 < n {
                angles[i + 1] - angles[i]
            } else {
                PI - angles[n - 1] + angles[0]
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levelset::extract_polyline;
    use crate::net::{Matrix, NetworkSpec};

    fn spaced_net(n: usize, phase: f64) -> Network {
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|j| {
                let a = phase + j as f64 * PI / n as f64;
                vec![a.cos(), a.sin()]
            })
            .collect();
        Network::new(
            NetworkSpec::single(2, n, 1.0).unwrap(),
            vec![Matrix::from_rows(&rows).unwrap()],
        )
        .unwrap()
    }

    fn square() -> RadialPolyline {
        let net = Network::new(NetworkSpec::single(2, 2, 1.0).unwrap(), vec![Matrix::identity(2)])
            .unwrap();
        extract_polyline(&net, 4096).unwrap()
    }

    #[test]
    fn square_vertices() {
        let v = detect_vertices_2d(&square(), DEFAULT_ANGLE_TOL).unwrap();
        let expected = [[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]];
        assert_eq!(v.len(), 4);
        for e in expected {
            assert!(v
                .iter()
                .any(|p| (p[0] - e[0]).abs() < 1e-9 && (p[1] - e[1]).abs() < 1e-9));
        }
    }

    #[test]
    fn analytic_hexagon_has_six_vertices() {
        // f(theta) = sum_j c |cos(theta - j pi / 3)|, corners between samples.
        let c = 0.5;
        let line = RadialPolyline::from_fn(4096, |t| {
            1.0 / (1..=3)
                .map(|j| c * (t - j as f64 * PI / 3.0 + 0.1234).cos().abs())
                .sum::<f64>()
        })
        .unwrap();
        assert_eq!(detect_vertices_2d(&line, DEFAULT_ANGLE_TOL).unwrap().len(), 6);
    }

    #[test]
    fn circle_is_not_polygonal() {
        let line = RadialPolyline::from_fn(4096, |_| 1.0).unwrap();
        assert!(matches!(
            detect_vertices_2d(&line, DEFAULT_ANGLE_TOL),
            Err(AnalysisError::NotPolygonal { found: 0 })
        ));
    }

    #[test]
    fn angle_tol_is_checked() {
        assert!(detect_vertices_2d(&square(), 0.0).is_err());
        assert!(detect_vertices_2d(&square(), 1.0).is_err());
    }

    #[test]
    fn regular_polygons_are_counted_exactly() {
        for n in 2..=12 {
            let net = spaced_net(n, 0.3 / n as f64);
            let line = extract_polyline(&net, 4096).unwrap();
            let report = polygon_report(&line, DEFAULT_ANGLE_TOL).unwrap();
            assert_eq!(report.vertex_count, 2 * n, "n = {n}");
            assert!(report.edge_length_cv < 1e-6, "n = {n}, cv = {}", report.edge_length_cv);
            assert_eq!(report.identified, Some(format!("regular {}-gon", 2 * n)));
        }
    }

    #[test]
    fn perturbed_square_is_not_regular() {
        // Vertex (1, 0) pushed out by 5%.
        let verts = [[1.05, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]];
        let lines: Vec<([f64; 2], f64)> = (0..4)
            .map(|k| {
                let (a, b) = (verts[k], verts[(k + 1) % 4]);
                let n = [b[1] - a[1], a[0] - b[0]];
                (n, n[0] * a[0] + n[1] * a[1])
            })
            .collect();
        let line = RadialPolyline::from_fn(4096, |t| {
            let u = [t.cos(), t.sin()];
            1.0 / lines
                .iter()
                .map(|(n, c)| (n[0] * u[0] + n[1] * u[1]) / c)
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .unwrap();
        let report = polygon_report(&line, DEFAULT_ANGLE_TOL).unwrap();
        assert_eq!(report.vertex_count, 4);
        assert!(report.edge_length_cv > 0.01);
        assert_eq!(report.identified, None);
    }

    #[test]
    fn spacing_examples() {
        let gaps = weight_direction_spacing(&spaced_net(3, 0.0)).unwrap();
        assert_eq!(gaps.len(), 3);
        for g in gaps {
            assert!((g - PI / 3.0).abs() < 1e-12);
        }

        let w = Matrix::from_rows(&[vec![1.0, 0.0], vec![-1.0, 0.0]]).unwrap();
        let net = Network::new(NetworkSpec::single(2, 2, 1.0).unwrap(), vec![w]).unwrap();
        let gaps = weight_direction_spacing(&net).unwrap();
        assert!(gaps.iter().any(|&g| g.abs() < 1e-12));

        let w = Matrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 0.0]]).unwrap();
        let net = Network::new(NetworkSpec::single(2, 2, 1.0).unwrap(), vec![w]).unwrap();
        assert!(matches!(
            weight_direction_spacing(&net),
            Err(AnalysisError::ZeroWeightRow(1))
        ));
    }
}

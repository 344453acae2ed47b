use nalgebra::{Matrix3, Vector3};

use crate::error::AnalysisError;
use crate::levelset::{RadialMesh, RadialPolyline};

const DIRECTION_MATCH_TOL: f64 = 1e-12;

/// A body sampled by one radius per direction.
pub trait RadialBody {
    fn radii(&self) -> &[f64];
    /// True when both bodies were sampled on the same direction set.
    fn same_directions(&self, other: &Self) -> bool;
}

impl RadialBody for RadialPolyline {
    fn radii(&self) -> &[f64] {
        RadialPolyline::radii(self)
    }

    fn same_directions(&self, other: &Self) -> bool {
        self.len() == other.len()
            && self
                .angles()
                .iter()
                .zip(other.angles())
                .all(|(a, b)| (a - b).abs() <= DIRECTION_MATCH_TOL)
    }
}

impl RadialBody for RadialMesh {
    fn radii(&self) -> &[f64] {
        RadialMesh::radii(self)
    }

    fn same_directions(&self, other: &Self) -> bool {
        self.directions().len() == other.directions().len()
            && self
                .directions()
                .iter()
                .zip(other.directions())
                .all(|(a, b)| (0..3).all(|k| (a[k] - b[k]).abs() <= DIRECTION_MATCH_TOL))
    }
}

/// Radial sup-difference `max_u |r_a(u) - r_b(u)|` of two bodies sampled on
/// the same directions.
pub fn hausdorff_distance<B: RadialBody>(a: &B, b: &B) -> Result<f64, AnalysisError> {
    if !a.same_directions(b) {
        return Err(AnalysisError::DirectionMismatch);
    }
    Ok(a.radii()
        .iter()
        .zip(b.radii())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max))
}

/// Least-squares orthogonal map `R` minimizing `sum |R b_i - a_i|^2` for
/// already matched pairs. Reflections are allowed.
pub fn kabsch(reference: &[Vector3<f64>], moving: &[Vector3<f64>]) -> Matrix3<f64> {
    let h: Matrix3<f64> = moving
        .iter()
        .zip(reference)
        .map(|(b, a)| b * a.transpose())
        .sum();
    let svd = h.svd(true, true);
    let (u, v_t) = (svd.u.expect("u requested"), svd.v_t.expect("v_t requested"));
    v_t.transpose() * u.transpose()
}

fn nearest_matching(reference: &[Vector3<f64>], moved: &[Vector3<f64>]) -> (Vec<Vector3<f64>>, f64) {
    let mut matched = Vec::with_capacity(reference.len());
    let mut cost = 0.0;
    for a in reference {
        let (best, d) = moved
            .iter()
            .map(|b| (b, (a - b).norm_squared()))
            .min_by(|x, y| x.1.total_cmp(&y.1))
            .expect("non-empty point set");
        matched.push(*best);
        cost += d;
    }
    (matched, cost)
}

fn frame(a: &Vector3<f64>, b: &Vector3<f64>) -> Option<Matrix3<f64>> {
    let e1 = a.try_normalize(1e-12)?;
    let e2 = (b - e1 * e1.dot(b)).try_normalize(1e-9)?;
    Some(Matrix3::from_columns(&[e1, e2, e1.cross(&e2)]))
}

/// Orthogonal map aligning the unlabelled point set `moving` onto
/// `reference` (e.g. the vertex sets of two trained polytopes).
///
/// Candidate maps send an anchor pair of `reference` onto every ordered pair
/// of `moving` (with and without a reflection); the best by nearest-neighbour
/// cost is refined by Kabsch on the induced matching.
pub fn align_point_sets(
    reference: &[Vector3<f64>],
    moving: &[Vector3<f64>],
) -> Result<Matrix3<f64>, AnalysisError> {
    if reference.len() < 2 || moving.len() < 2 {
        return Err(AnalysisError::Precondition("alignment needs at least two points".into()));
    }
    let a0 = reference[0];
    let a1 = *reference
        .iter()
        .max_by(|x, y| a0.cross(x).norm().total_cmp(&a0.cross(y).norm()))
        .expect("non-empty");
    let fa = frame(&a0, &a1)
        .ok_or_else(|| AnalysisError::Precondition("reference points are collinear".into()))?;
    let flip = Matrix3::from_diagonal(&Vector3::new(1.0, 1.0, -1.0));

    let mut best: Option<(f64, Matrix3<f64>)> = None;
    for (i, b0) in moving.iter().enumerate() {
        for (j, b1) in moving.iter().enumerate() {
            if i == j {
                continue;
            }
            let Some(fb) = frame(b0, b1) else { continue };
            for m in [Matrix3::identity(), flip] {
                let r = fa * m * fb.transpose();
                let moved: Vec<_> = moving.iter().map(|p| r * p).collect();
                let (_, cost) = nearest_matching(reference, &moved);
                if best.is_none_or(|(c, _)| cost < c) {
                    best = Some((cost, r));
                }
            }
        }
    }
    let (_, coarse) = best.ok_or_else(|| AnalysisError::Precondition("no usable anchor pair".into()))?;
    let moved: Vec<_> = moving.iter().map(|p| coarse * p).collect();
    let (matched, _) = nearest_matching(reference, &moved);
    // Map the matched originals, not their coarse images.
    let originals: Vec<_> = matched.iter().map(|p| coarse.transpose() * p).collect();
    Ok(kabsch(reference, &originals))
}

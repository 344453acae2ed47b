//! Radial extraction of the level set `f(x) = 1`.
//!
//! Without biases `f(t u) = t^P f(u)` for `t > 0`, so every ray from the
//! origin crosses the level set exactly once, at `r(u) = f(u)^{-1/P}`. The
//! body is sampled by evaluating that closed form on a fixed direction set:
//! uniform angles in 2D, an icosphere in 3D, and an icosphere inside a
//! 3-dimensional subspace for slices of higher-dimensional bodies.

use std::collections::HashMap;
use std::f64::consts::{PI, TAU};

use crate::error::LevelSetError;
use crate::net::Network;

pub const DEFAULT_POLYLINE_SAMPLES: usize = 4096;
pub const DEFAULT_SUBDIVISIONS: usize = 5;

/// `f(u)` at or below this value is treated as an unbounded direction.
pub const DEGENERACY_THRESHOLD: f64 = 1e-12;

const DIRECTION_NORM_TOL: f64 = 1e-9;
const BASIS_TOL: f64 = 1e-12;

/// Boundary distance along `direction` from `f(u)` alone.
pub fn radius_from_value(value: f64, degree: f64) -> f64 {
    if degree == 1.0 {
        1.0 / value
    } else {
        value.powf(-1.0 / degree)
    }
}

/// Distance from the origin to the level set along the unit vector `direction`.
pub fn radius(net: &Network, direction: &[f64]) -> Result<f64, LevelSetError> {
    let norm = direction.iter().map(|c| c * c).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > DIRECTION_NORM_TOL {
        return Err(LevelSetError::Precondition(format!(
            "direction has norm {norm}, expected 1"
        )));
    }
    let value = net.forward(direction)?;
    radius_checked(value, direction, net.homogeneity_degree())
}

fn radius_checked(value: f64, direction: &[f64], degree: f64) -> Result<f64, LevelSetError> {
    if value <= DEGENERACY_THRESHOLD {
        return Err(LevelSetError::DegenerateDirection {
            direction: direction.to_vec(),
            value,
        });
    }
    Ok(radius_from_value(value, degree))
}

/// Star-shaped closed curve sampled at increasing angles.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialPolyline {
    angles: Vec<f64>,
    radii: Vec<f64>,
}

impl RadialPolyline {
    pub const MIN_SAMPLES: usize = 16;

    pub fn new(angles: Vec<f64>, radii: Vec<f64>) -> Result<Self, LevelSetError> {
        if angles.len() != radii.len() {
            return Err(LevelSetError::Precondition(
                "angles and radii differ in length".into(),
            ));
        }
        if angles.len() < Self::MIN_SAMPLES {
            return Err(LevelSetError::Precondition(format!(
                "a polyline needs at least {} samples",
                Self::MIN_SAMPLES
            )));
        }
        if angles.iter().any(|a| !(0.0..TAU).contains(a)) || angles.windows(2).any(|w| w[0] >= w[1])
        {
            return Err(LevelSetError::Precondition(
                "angles must be strictly increasing in [0, 2pi)".into(),
            ));
        }
        if radii.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
            return Err(LevelSetError::Precondition("radii must be finite and positive".into()));
        }
        Ok(Self { angles, radii })
    }

    /// Samples the radial function `r(theta)` at `samples` uniform angles.
    pub fn from_fn(samples: usize, r: impl Fn(f64) -> f64) -> Result<Self, LevelSetError> {
        let angles = uniform_angles(samples);
        let radii = angles.iter().map(|&t| r(t)).collect();
        Self::new(angles, radii)
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }

    /// Always closed: the last point connects back to the first.
    pub fn closed(&self) -> bool {
        true
    }

    pub fn points(&self) -> Vec<[f64; 2]> {
        self.angles
            .iter()
            .zip(&self.radii)
            .map(|(t, r)| [r * t.cos(), r * t.sin()])
            .collect()
    }
}

fn uniform_angles(samples: usize) -> Vec<f64> {
    (0..samples).map(|k| TAU * k as f64 / samples as f64).collect()
}

pub fn extract_polyline(net: &Network, samples: usize) -> Result<RadialPolyline, LevelSetError> {
    if net.input_dim() != 2 {
        return Err(LevelSetError::Precondition(format!(
            "polyline extraction needs d = 2, network has d = {}",
            net.input_dim()
        )));
    }
    if samples < 64 {
        return Err(LevelSetError::Precondition(format!(
            "at least 64 samples required, got {samples}"
        )));
    }
    let degree = net.homogeneity_degree();
    let mut ws = net.workspace();
    let angles = uniform_angles(samples);
    let radii = angles
        .iter()
        .map(|&t| {
            let u = [t.cos(), t.sin()];
            radius_checked(net.forward_with(&u, &mut ws), &u, degree)
        })
        .collect::<Result<Vec<_>, _>>()?;
    RadialPolyline::new(angles, radii)
}

/// Unit-sphere triangulation from repeated 4-way splits of an icosahedron.
#[derive(Debug, Clone, PartialEq)]
pub struct Icosphere {
    pub vertices: Vec<[f64; 3]>,
    pub triangles: Vec<[usize; 3]>,
}

fn normalize3(v: [f64; 3]) -> [f64; 3] {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    [v[0] / n, v[1] / n, v[2] / n]
}

impl Icosphere {
    /// `10 * 4^s + 2` vertices and `20 * 4^s` outward-oriented triangles.
    pub fn new(subdivisions: usize) -> Self {
        let t = (1.0 + 5f64.sqrt()) / 2.0;
        let mut vertices: Vec<[f64; 3]> = [
            [-1.0, t, 0.0],
            [1.0, t, 0.0],
            [-1.0, -t, 0.0],
            [1.0, -t, 0.0],
            [0.0, -1.0, t],
            [0.0, 1.0, t],
            [0.0, -1.0, -t],
            [0.0, 1.0, -t],
            [t, 0.0, -1.0],
            [t, 0.0, 1.0],
            [-t, 0.0, -1.0],
            [-t, 0.0, 1.0],
        ]
        .into_iter()
        .map(normalize3)
        .collect();
        let mut triangles = vec![
            [0, 11, 5],
            [0, 5, 1],
            [0, 1, 7],
            [0, 7, 10],
            [0, 10, 11],
            [1, 5, 9],
            [5, 11, 4],
            [11, 10, 2],
            [10, 7, 6],
            [7, 1, 8],
            [3, 9, 4],
            [3, 4, 2],
            [3, 2, 6],
            [3, 6, 8],
            [3, 8, 9],
            [4, 9, 5],
            [2, 4, 11],
            [6, 2, 10],
            [8, 6, 7],
            [9, 8, 1],
        ];
        for _ in 0..subdivisions {
            let mut midpoints: HashMap<(usize, usize), usize> = HashMap::new();
            let mut midpoint = |a: usize, b: usize, vertices: &mut Vec<[f64; 3]>| {
                let key = (a.min(b), a.max(b));
                *midpoints.entry(key).or_insert_with(|| {
                    let (p, q) = (vertices[a], vertices[b]);
                    vertices.push(normalize3([p[0] + q[0], p[1] + q[1], p[2] + q[2]]));
                    vertices.len() - 1
                })
            };
            let mut next = Vec::with_capacity(triangles.len() * 4);
            for [a, b, c] in triangles {
                let ab = midpoint(a, b, &mut vertices);
                let bc = midpoint(b, c, &mut vertices);
                let ca = midpoint(c, a, &mut vertices);
                next.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
            }
            triangles = next;
        }
        Self {
            vertices,
            triangles,
        }
    }
}

/// Star-shaped closed surface: one radius per icosphere direction.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialMesh {
    directions: Vec<[f64; 3]>,
    radii: Vec<f64>,
    triangles: Vec<[usize; 3]>,
}

impl RadialMesh {
    pub fn new(
        directions: Vec<[f64; 3]>,
        radii: Vec<f64>,
        triangles: Vec<[usize; 3]>,
    ) -> Result<Self, LevelSetError> {
        if directions.is_empty() || triangles.is_empty() {
            return Err(LevelSetError::Precondition("mesh is empty".into()));
        }
        if directions.len() != radii.len() {
            return Err(LevelSetError::Precondition(
                "directions and radii differ in length".into(),
            ));
        }
        if radii.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
            return Err(LevelSetError::Precondition("radii must be finite and positive".into()));
        }
        if triangles.iter().flatten().any(|&i| i >= directions.len()) {
            return Err(LevelSetError::Precondition("triangle index out of range".into()));
        }
        let mesh = Self {
            directions,
            radii,
            triangles,
        };
        if !mesh.is_closed() {
            return Err(LevelSetError::Precondition(
                "surface is not closed: some edge is not shared by exactly two triangles".into(),
            ));
        }
        Ok(mesh)
    }

    pub fn directions(&self) -> &[[f64; 3]] {
        &self.directions
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn points(&self) -> Vec<[f64; 3]> {
        self.directions
            .iter()
            .zip(&self.radii)
            .map(|(u, r)| [r * u[0], r * u[1], r * u[2]])
            .collect()
    }

    fn edge_counts(&self) -> HashMap<(usize, usize), usize> {
        let mut counts = HashMap::new();
        for t in &self.triangles {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                *counts.entry((a.min(b), a.max(b))).or_insert(0) += 1;
            }
        }
        counts
    }

    pub fn is_closed(&self) -> bool {
        self.edge_counts().values().all(|&c| c == 2)
    }

    /// `V - E + F` of the triangulation.
    pub fn euler_characteristic(&self) -> i64 {
        self.directions.len() as i64 - self.edge_counts().len() as i64 + self.triangles.len() as i64
    }
}

fn check_dim(net: &Network, dim: usize) -> Result<(), LevelSetError> {
    if net.input_dim() != dim {
        return Err(LevelSetError::Precondition(format!(
            "expected a network on R^{dim}, got d = {}",
            net.input_dim()
        )));
    }
    Ok(())
}

fn check_subdivisions(subdivisions: usize) -> Result<(), LevelSetError> {
    if subdivisions < 2 {
        return Err(LevelSetError::Precondition(format!(
            "at least 2 icosphere subdivisions required, got {subdivisions}"
        )));
    }
    Ok(())
}

pub fn extract_mesh(net: &Network, subdivisions: usize) -> Result<RadialMesh, LevelSetError> {
    check_dim(net, 3)?;
    check_subdivisions(subdivisions)?;
    let sphere = Icosphere::new(subdivisions);
    let degree = net.homogeneity_degree();
    let mut ws = net.workspace();
    let radii = sphere
        .vertices
        .iter()
        .map(|u| radius_checked(net.forward_with(u, &mut ws), u, degree))
        .collect::<Result<Vec<_>, _>>()?;
    RadialMesh::new(sphere.vertices, radii, sphere.triangles)
}

/// A 3-dimensional linear subspace of `R^d` given by an orthonormal basis.
#[derive(Debug, Clone, PartialEq)]
pub struct SliceSpec {
    ambient_dim: usize,
    basis: [Vec<f64>; 3],
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl SliceSpec {
    pub fn new(ambient_dim: usize, basis: [Vec<f64>; 3]) -> Result<Self, LevelSetError> {
        if ambient_dim <= 3 {
            return Err(LevelSetError::Precondition(format!(
                "slices need ambient dimension > 3, got {ambient_dim}"
            )));
        }
        if basis.iter().any(|b| b.len() != ambient_dim) {
            return Err(LevelSetError::Precondition(
                "basis vectors must have the ambient dimension".into(),
            ));
        }
        for i in 0..3 {
            for j in i..3 {
                let expected = if i == j { 1.0 } else { 0.0 };
                if (dot(&basis[i], &basis[j]) - expected).abs() > BASIS_TOL {
                    return Err(LevelSetError::Precondition(format!(
                        "basis is not orthonormal: <b{i}, b{j}> = {}",
                        dot(&basis[i], &basis[j])
                    )));
                }
            }
        }
        Ok(Self { ambient_dim, basis })
    }

    /// Orthonormalizes three spanning vectors by Gram-Schmidt, in order.
    pub fn from_spanning(ambient_dim: usize, vectors: [Vec<f64>; 3]) -> Result<Self, LevelSetError> {
        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(3);
        for v in vectors {
            let mut w = v;
            for b in &basis {
                let c = dot(&w, b);
                w.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
            }
            let n = dot(&w, &w).sqrt();
            if n < 1e-12 {
                return Err(LevelSetError::Precondition(
                    "spanning vectors are linearly dependent".into(),
                ));
            }
            w.iter_mut().for_each(|x| *x /= n);
            basis.push(w);
        }
        let [a, b, c]: [Vec<f64>; 3] = basis.try_into().expect("three vectors");
        Self::new(ambient_dim, [a, b, c])
    }

    /// The subspace `{x_3 = 0, x_4 = x_5 tan(theta)}` of `R^d`, `d >= 5`,
    /// spanned by `e_1`, `e_2` and `sin(theta) e_4 + cos(theta) e_5`.
    pub fn tilted(ambient_dim: usize, theta: f64) -> Result<Self, LevelSetError> {
        if ambient_dim < 5 {
            return Err(LevelSetError::Precondition(format!(
                "the tilted slice family needs d >= 5, got {ambient_dim}"
            )));
        }
        let e = |i: usize| {
            let mut v = vec![0.0; ambient_dim];
            v[i] = 1.0;
            v
        };
        let mut tilt = vec![0.0; ambient_dim];
        tilt[3] = theta.sin();
        tilt[4] = theta.cos();
        Self::from_spanning(ambient_dim, [e(0), e(1), tilt])
    }

    /// `theta = k pi / steps` for `k = 0..steps`.
    pub fn tilted_family(ambient_dim: usize, steps: usize) -> Result<Vec<(f64, Self)>, LevelSetError> {
        (0..steps)
            .map(|k| {
                let theta = k as f64 * PI / steps as f64;
                Self::tilted(ambient_dim, theta).map(|s| (theta, s))
            })
            .collect()
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn basis(&self) -> &[Vec<f64>; 3] {
        &self.basis
    }

    /// `B y` for `y` in slice coordinates.
    pub fn embed(&self, y: &[f64; 3]) -> Vec<f64> {
        (0..self.ambient_dim)
            .map(|i| (0..3).map(|k| self.basis[k][i] * y[k]).sum())
            .collect()
    }
}

/// Level set of `g(y) = f(B y)` for `y` in the slice subspace, in slice coordinates.
pub fn slice_section(
    net: &Network,
    slice: &SliceSpec,
    subdivisions: usize,
) -> Result<RadialMesh, LevelSetError> {
    check_dim(net, slice.ambient_dim)?;
    check_subdivisions(subdivisions)?;
    let sphere = Icosphere::new(subdivisions);
    let degree = net.homogeneity_degree();
    let mut ws = net.workspace();
    let radii = sphere
        .vertices
        .iter()
        .map(|u| {
            let x = slice.embed(u);
            radius_checked(net.forward_with(&x, &mut ws), &x, degree)
        })
        .collect::<Result<Vec<_>, _>>()?;
    RadialMesh::new(sphere.vertices, radii, sphere.triangles)
}

use std::collections::HashMap;
use std::f64::consts::{FRAC_1_SQRT_2, PI, TAU};

use super::{undirected, Dimension, SurfaceMesh};
use crate::{Error, Result, Vec3};

/// Subdivision depth cap. Level 8 already has 262 146 vertices.
pub const MAX_OCTA_ITERATIONS: u32 = 8;

/// Latitude/longitude sphere.
///
/// Vertices sit at azimuth steps of `360°/n_slices` and latitude steps of
/// `180°/n_stacks`, at `(sin θ cos φ, cos θ cos φ, sin φ) * radius`. The two
/// poles are single shared vertices (index 0 is the north pole, the last
/// index the south pole). Each band quad is stored as two triangles, so the
/// quad diagonal is a structural edge as well.
pub fn build_sphere_polar(n_slices: usize, n_stacks: usize, radius: f64) -> Result<SurfaceMesh> {
    if n_slices < 3 || n_stacks < 2 {
        return Err(Error::Mesh(format!(
            "polar sphere needs at least 3 slices and 2 stacks, got {n_slices} x {n_stacks}"
        )));
    }
    check_radius(radius)?;

    let d_theta = TAU / n_slices as f64;
    let d_phi = PI / n_stacks as f64;
    let ring = |k: usize, j: usize| 1 + (k - 1) * n_slices + j % n_slices;

    let mut points = Vec::with_capacity(n_slices * (n_stacks - 1) + 2);
    points.push(Vec3::new(0.0, 0.0, radius));
    for k in 1..n_stacks {
        let phi = PI / 2.0 - k as f64 * d_phi;
        for j in 0..n_slices {
            let theta = j as f64 * d_theta;
            points.push(radius * Vec3::new(theta.sin() * phi.cos(), theta.cos() * phi.cos(), phi.sin()));
        }
    }
    let south = points.len();
    points.push(Vec3::new(0.0, 0.0, -radius));

    let mut faces = Vec::new();
    for j in 0..n_slices {
        faces.push([0, ring(1, j), ring(1, j + 1)]);
        for k in 1..n_stacks - 1 {
            let (a, b) = (ring(k, j), ring(k, j + 1));
            let (c, d) = (ring(k + 1, j + 1), ring(k + 1, j));
            faces.push([a, b, c]);
            faces.push([a, c, d]);
        }
        faces.push([ring(n_stacks - 1, j), south, ring(n_stacks - 1, j + 1)]);
    }
    for f in &mut faces {
        orient_outward(&points, f);
    }

    let (edges, face_edges) = edges_from_faces(&faces);
    Ok(SurfaceMesh {
        dimension: Dimension::Three,
        points,
        edges,
        faces,
        face_edges,
    })
}

/// Octahedron refined by repeated 1→4 midpoint subdivision, with every new
/// vertex pushed back onto the sphere.
///
/// Midpoints are shared between the two faces adjacent to an edge, so level
/// `k` has `4^k * 4 + 2` vertices, `4^k * 12` edges and `4^k * 8` faces.
/// Each parent face is replaced in place by its centre child; the three
/// corner children are appended.
pub fn build_sphere_octa(iterations: u32, radius: f64) -> Result<SurfaceMesh> {
    if iterations > MAX_OCTA_ITERATIONS {
        return Err(Error::Mesh(format!(
            "octahedron subdivision capped at {MAX_OCTA_ITERATIONS} iterations, got {iterations}"
        )));
    }
    check_radius(radius)?;

    let a = FRAC_1_SQRT_2;
    let mut points: Vec<Vec3> = [
        Vec3::new(0.0, 0.0, 1.0),
        Vec3::new(0.0, 0.0, -1.0),
        Vec3::new(-a, -a, 0.0),
        Vec3::new(a, -a, 0.0),
        Vec3::new(a, a, 0.0),
        Vec3::new(-a, a, 0.0),
    ]
    .iter()
    .map(|p| p * radius)
    .collect();
    let mut faces: Vec<[usize; 3]> = vec![
        [0, 3, 4],
        [0, 4, 5],
        [0, 5, 2],
        [0, 2, 3],
        [1, 4, 3],
        [1, 5, 4],
        [1, 2, 5],
        [1, 3, 2],
    ];

    for _ in 0..iterations {
        let mut midpoints: HashMap<(usize, usize), usize> = HashMap::new();
        let mut midpoint = |points: &mut Vec<Vec3>, i: usize, j: usize| -> usize {
            *midpoints.entry(undirected(i, j)).or_insert_with(|| {
                let m = (points[i] + points[j]) * 0.5;
                points.push(m * (radius / m.norm()));
                points.len() - 1
            })
        };
        let parents = faces.len();
        for f in 0..parents {
            let [p0, p1, p2] = faces[f];
            let m01 = midpoint(&mut points, p0, p1);
            let m12 = midpoint(&mut points, p1, p2);
            let m20 = midpoint(&mut points, p2, p0);
            faces[f] = [m01, m12, m20];
            faces.push([p0, m01, m20]);
            faces.push([m01, p1, m12]);
            faces.push([m20, m12, p2]);
        }
    }

    let (edges, face_edges) = edges_from_faces(&faces);
    Ok(SurfaceMesh {
        dimension: Dimension::Three,
        points,
        edges,
        faces,
        face_edges,
    })
}

/// Walks the faces in order and keeps the first occurrence of each
/// undirected edge.
fn edges_from_faces(faces: &[[usize; 3]]) -> (Vec<(usize, usize)>, Vec<[usize; 3]>) {
    let mut index: HashMap<(usize, usize), usize> = HashMap::new();
    let mut edges = Vec::new();
    let face_edges = faces
        .iter()
        .map(|f| {
            [0, 1, 2].map(|k| {
                let (i, j) = (f[k], f[(k + 1) % 3]);
                *index.entry(undirected(i, j)).or_insert_with(|| {
                    edges.push((i, j));
                    edges.len() - 1
                })
            })
        })
        .collect();
    (edges, face_edges)
}

fn orient_outward(points: &[Vec3], f: &mut [usize; 3]) {
    let [a, b, c] = f.map(|i| points[i]);
    let normal = (b - a).cross(&(c - a));
    if normal.dot(&(a + b + c)) < 0.0 {
        f.swap(1, 2);
    }
}

fn check_radius(radius: f64) -> Result<()> {
    if radius > 0.0 && radius.is_finite() {
        Ok(())
    } else {
        Err(Error::Mesh(format!("sphere radius must be positive, got {radius}")))
    }
}

use std::f64::consts::TAU;

use super::{
    Dimension, EdgeRef, Face, LayeredBody, Material, Particle, Spring, SpringGroup, SpringKind,
    SurfaceMesh,
};
use crate::{Error, Result, Vec3};

/// A single spring between two particles. Both particles live in the
/// outer layer; there is no inner layer, no cross-layer spring and no face.
pub fn build_1d(p0: Vec3, p1: Vec3, mass: f64, ks: f64, kd: f64) -> Result<LayeredBody> {
    if p0 == p1 {
        return Err(Error::Mesh("1D endpoints coincide".into()));
    }
    check_mass(mass)?;
    let positions = [p0, p1];
    let spring = Spring::at_rest(0, 1, SpringKind::Structural, &positions, ks, kd);
    Ok(LayeredBody {
        dimension: Dimension::One,
        particles: positions.iter().map(|&p| Particle::new(mass, p)).collect(),
        inner_count: 0,
        inner_springs: Vec::new(),
        outer_springs: vec![spring],
        radius_springs: Vec::new(),
        shear_left: Vec::new(),
        shear_right: Vec::new(),
        inner_faces: Vec::new(),
        outer_faces: Vec::new(),
        closest_outer_index: None,
        rest_volumes: [0.0; 2],
    })
}

/// `n` points on a circle at angles `i * 360°/n`, joined into a closed
/// cycle (the last edge runs from `n - 1` back to `0`).
pub fn ring_mesh(n: usize, radius: f64) -> Result<SurfaceMesh> {
    if n < 3 {
        return Err(Error::Mesh(format!("a ring needs at least 3 particles, got {n}")));
    }
    if !(radius > 0.0) {
        return Err(Error::Mesh(format!("ring radius must be positive, got {radius}")));
    }
    let step = TAU / n as f64;
    let points = (0..n)
        .map(|i| {
            let theta = i as f64 * step;
            Vec3::new(radius * theta.cos(), radius * theta.sin(), 0.0)
        })
        .collect();
    let edges = (0..n).map(|i| (i, (i + 1) % n)).collect();
    Ok(SurfaceMesh {
        dimension: Dimension::Two,
        points,
        edges,
        faces: Vec::new(),
        face_edges: Vec::new(),
    })
}

/// Two concentric rings tied together with radius and shear springs, plus
/// display triangles covering the annulus.
pub fn build_ring_2d(n: usize, r_inner: f64, r_outer: f64, material: &Material) -> Result<LayeredBody> {
    if !(r_inner > 0.0 && r_inner < r_outer) {
        return Err(Error::Mesh(format!(
            "ring radii must satisfy 0 < inner < outer, got {r_inner} and {r_outer}"
        )));
    }
    let inner = ring_mesh(n, r_inner)?;
    let outer = ring_mesh(n, r_outer)?;
    let mut body = link_layers(&inner, &outer, material)?;

    let edge = |group, index| EdgeRef { group, index };
    for i in 0..n {
        let j = (i + 1) % n;
        let (in_i, in_j, out_i, out_j) = (i, j, n + i, n + j);
        body.outer_faces.push(Face {
            vertices: [in_i, out_i, out_j],
            edges: [
                edge(SpringGroup::Radius, i),
                edge(SpringGroup::Outer, i),
                edge(SpringGroup::ShearLeft, i),
            ],
        });
        body.outer_faces.push(Face {
            vertices: [in_i, out_j, in_j],
            edges: [
                edge(SpringGroup::ShearLeft, i),
                edge(SpringGroup::Radius, j),
                edge(SpringGroup::Inner, i),
            ],
        });
    }
    Ok(body)
}

/// Joins two layers with identical topology.
///
/// Radius spring `i` joins inner particle `i` to outer particle `i`. For
/// every structural edge `(a, b)` there is a shear-left spring from inner
/// `a` to outer `b` and a shear-right spring from inner `b` to outer `a`,
/// which on a ring reduces to the usual `i ↔ i+1` diagonals.
pub fn link_layers(inner: &SurfaceMesh, outer: &SurfaceMesh, material: &Material) -> Result<LayeredBody> {
    if inner.points.len() != outer.points.len() {
        return Err(Error::Mesh(format!(
            "layer vertex counts differ: inner {} vs outer {}",
            inner.points.len(),
            outer.points.len()
        )));
    }
    if inner.dimension != outer.dimension {
        return Err(Error::Mesh("layers have different dimensions".into()));
    }
    if inner.edges != outer.edges || inner.faces != outer.faces {
        return Err(Error::Mesh("layers do not share the same topology".into()));
    }
    check_mass(material.mass)?;

    let n = inner.points.len();
    let positions: Vec<Vec3> = inner.points.iter().chain(&outer.points).copied().collect();
    for i in 0..n {
        if positions[i] == positions[n + i] {
            return Err(Error::Mesh(format!("inner and outer particle {i} coincide")));
        }
    }

    let structural = |offset: usize| -> Vec<Spring> {
        inner
            .edges
            .iter()
            .map(|&(a, b)| {
                Spring::at_rest(
                    offset + a,
                    offset + b,
                    SpringKind::Structural,
                    &positions,
                    material.ks,
                    material.kd,
                )
            })
            .collect()
    };
    let cross = |kind: SpringKind, pairs: &mut dyn Iterator<Item = (usize, usize)>| -> Vec<Spring> {
        pairs
            .map(|(i, o)| Spring::at_rest(i, n + o, kind, &positions, material.rks, material.rkd))
            .collect()
    };

    let faces = |offset: usize, group: SpringGroup| -> Vec<Face> {
        inner
            .faces
            .iter()
            .zip(&inner.face_edges)
            .map(|(f, e)| Face {
                vertices: f.map(|v| v + offset),
                edges: e.map(|index| EdgeRef { group, index }),
            })
            .collect()
    };

    let mut body = LayeredBody {
        dimension: inner.dimension,
        particles: positions.iter().map(|&p| Particle::new(material.mass, p)).collect(),
        inner_count: n,
        inner_springs: structural(0),
        outer_springs: structural(n),
        radius_springs: cross(SpringKind::Radius, &mut (0..n).map(|i| (i, i))),
        shear_left: cross(SpringKind::ShearLeft, &mut inner.edges.iter().copied()),
        shear_right: cross(SpringKind::ShearRight, &mut inner.edges.iter().map(|&(a, b)| (b, a))),
        inner_faces: faces(0, SpringGroup::Inner),
        outer_faces: faces(n, SpringGroup::Outer),
        closest_outer_index: None,
        rest_volumes: [0.0; 2],
    };
    body.record_rest_volumes();
    Ok(body)
}

fn check_mass(mass: f64) -> Result<()> {
    if mass > 0.0 && mass.is_finite() {
        Ok(())
    } else {
        Err(Error::Mesh(format!("particle mass must be positive, got {mass}")))
    }
}

//! JSON view of a body: particles, springs and faces with vectors trimmed to
//! the body's spatial dimension. Snapshots and the wire protocol reuse the
//! particle record.

use serde::{Deserialize, Serialize};

use crate::mesh::{Dimension, LayeredBody, Particle, SpringKind};
use crate::Vec3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParticleExport {
    pub m: f64,
    pub pos: Vec<f64>,
    pub vel: Vec<f64>,
}

impl ParticleExport {
    pub fn new(p: &Particle, dimension: Dimension) -> Self {
        ParticleExport {
            m: p.mass,
            pos: trim(p.position, dimension),
            vel: trim(p.velocity, dimension),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpringExport {
    pub kind: SpringKind,
    pub i: usize,
    pub j: usize,
    pub rest: f64,
    pub ks: f64,
    pub kd: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeshExport {
    pub dimension: Dimension,
    pub particles: Vec<ParticleExport>,
    pub springs: Vec<SpringExport>,
    pub faces: Vec<[usize; 3]>,
}

impl MeshExport {
    /// Springs are listed group by group (inner, outer, radius, shear left,
    /// shear right); faces list the inner layer first.
    pub fn from_body(body: &LayeredBody) -> Self {
        let dimension = body.dimension();
        MeshExport {
            dimension,
            particles: particle_exports(body),
            springs: body
                .all_springs()
                .map(|(_, s)| SpringExport {
                    kind: s.kind,
                    i: s.head,
                    j: s.tail,
                    rest: s.rest_length,
                    ks: s.ks,
                    kd: s.kd,
                })
                .collect(),
            faces: body
                .inner_faces()
                .iter()
                .chain(body.outer_faces())
                .map(|f| f.vertices)
                .collect(),
        }
    }
}

pub fn particle_exports(body: &LayeredBody) -> Vec<ParticleExport> {
    let dim = body.dimension();
    body.particles().iter().map(|p| ParticleExport::new(p, dim)).collect()
}

/// The first `dimension.spatial()` components of `v`.
pub fn trim(v: Vec3, dimension: Dimension) -> Vec<f64> {
    v.as_slice()[..dimension.spatial()].to_vec()
}

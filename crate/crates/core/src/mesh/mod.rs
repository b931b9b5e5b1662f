//! Particles, springs and faces, plus the procedural builders that lay them
//! out as 1D, 2D and 3D bodies.
//!
//! Every body is two concentric layers of particles (except the 1D spring,
//! which lives entirely in the outer layer). Springs and faces refer to
//! particles by index into one flat particle list: inner layer first, then
//! outer. That ordering is also the packing order of the integrator state.

mod build;
mod sphere;

use serde::{Deserialize, Serialize};

use crate::{Error, Result, Vec3};

pub use build::{build_1d, build_ring_2d, link_layers, ring_mesh};
pub use sphere::{build_sphere_octa, build_sphere_polar, MAX_OCTA_ITERATIONS};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum Dimension {
    One,
    Two,
    Three,
}

impl Dimension {
    /// Number of spatial components stored per vector. 1D bodies are a
    /// single spring hanging in the plane, so they use two.
    pub fn spatial(self) -> usize {
        match self {
            Dimension::One | Dimension::Two => 2,
            Dimension::Three => 3,
        }
    }

    pub fn is_closed(self) -> bool {
        !matches!(self, Dimension::One)
    }
}

impl From<Dimension> for u8 {
    fn from(d: Dimension) -> u8 {
        match d {
            Dimension::One => 1,
            Dimension::Two => 2,
            Dimension::Three => 3,
        }
    }
}

impl TryFrom<u8> for Dimension {
    type Error = String;

    fn try_from(v: u8) -> std::result::Result<Self, String> {
        match v {
            1 => Ok(Dimension::One),
            2 => Ok(Dimension::Two),
            3 => Ok(Dimension::Three),
            other => Err(format!("dimension must be 1, 2 or 3, got {other}")),
        }
    }
}

/// A point mass with its force accumulator and integrator scratch.
#[derive(Clone, Debug, PartialEq)]
pub struct Particle {
    pub mass: f64,
    pub position: Vec3,
    pub velocity: Vec3,
    pub force: Vec3,
    pub d_position: Vec3,
    pub d_velocity: Vec3,
}

impl Particle {
    pub fn new(mass: f64, position: Vec3) -> Self {
        Particle {
            mass,
            position,
            velocity: Vec3::zeros(),
            force: Vec3::zeros(),
            d_position: Vec3::zeros(),
            d_velocity: Vec3::zeros(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpringKind {
    Structural,
    Radius,
    ShearLeft,
    ShearRight,
    /// Mouse spring. Only ever built on the fly, never stored in a body.
    Drag,
    /// Reserved for contact springs; never stored in a body.
    Collision,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Spring {
    /// First endpoint (`sp1`).
    pub head: usize,
    /// Second endpoint (`sp2`).
    pub tail: usize,
    pub kind: SpringKind,
    pub rest_length: f64,
    pub ks: f64,
    pub kd: f64,
    /// Outward-oriented normal, scaled to the spring length. Refreshed
    /// every force pass.
    pub normal: Vec3,
}

impl Spring {
    /// Builds a spring whose rest length is the current endpoint distance.
    pub fn at_rest(
        head: usize,
        tail: usize,
        kind: SpringKind,
        positions: &[Vec3],
        ks: f64,
        kd: f64,
    ) -> Self {
        Spring {
            head,
            tail,
            kind,
            rest_length: (positions[tail] - positions[head]).norm(),
            ks,
            kd,
            normal: Vec3::zeros(),
        }
    }

    pub fn key(&self) -> (usize, usize) {
        undirected(self.head, self.tail)
    }
}

pub(crate) fn undirected(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

/// The spring containers of a [`LayeredBody`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpringGroup {
    Inner,
    Outer,
    Radius,
    ShearLeft,
    ShearRight,
}

impl SpringGroup {
    /// Accumulation order: structural first, then radius, then shear.
    pub const ALL: [SpringGroup; 5] = [
        SpringGroup::Inner,
        SpringGroup::Outer,
        SpringGroup::Radius,
        SpringGroup::ShearLeft,
        SpringGroup::ShearRight,
    ];

    pub fn is_structural(self) -> bool {
        matches!(self, SpringGroup::Inner | SpringGroup::Outer)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EdgeRef {
    pub group: SpringGroup,
    pub index: usize,
}

/// A triangle. `edges[k]` joins `vertices[k]` and `vertices[(k + 1) % 3]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Face {
    pub vertices: [usize; 3],
    pub edges: [EdgeRef; 3],
}

/// Particle masses and spring coefficients used when a body is built.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Material {
    pub mass: f64,
    pub ks: f64,
    pub kd: f64,
    pub rks: f64,
    pub rkd: f64,
}

impl Default for Material {
    fn default() -> Self {
        Material {
            mass: 1.0,
            ks: 800.0,
            kd: 15.0,
            rks: 700.0,
            rkd: 50.0,
        }
    }
}

/// One layer before linking: positions, undirected structural edges and
/// triangles with their edge indices.
#[derive(Clone, Debug, PartialEq)]
pub struct SurfaceMesh {
    pub dimension: Dimension,
    pub points: Vec<Vec3>,
    pub edges: Vec<(usize, usize)>,
    pub faces: Vec<[usize; 3]>,
    pub face_edges: Vec<[usize; 3]>,
}

impl SurfaceMesh {
    pub fn euler_characteristic(&self) -> i64 {
        self.points.len() as i64 - self.edges.len() as i64 + self.faces.len() as i64
    }
}

/// The simulated object: two particle layers and every spring and face that
/// connects them.
#[derive(Clone, Debug, PartialEq)]
pub struct LayeredBody {
    pub(crate) dimension: Dimension,
    pub(crate) particles: Vec<Particle>,
    pub(crate) inner_count: usize,
    pub(crate) inner_springs: Vec<Spring>,
    pub(crate) outer_springs: Vec<Spring>,
    pub(crate) radius_springs: Vec<Spring>,
    pub(crate) shear_left: Vec<Spring>,
    pub(crate) shear_right: Vec<Spring>,
    pub(crate) inner_faces: Vec<Face>,
    pub(crate) outer_faces: Vec<Face>,
    pub closest_outer_index: Option<usize>,
    pub(crate) rest_volumes: [f64; 2],
}

impl LayeredBody {
    /// Layer volume at construction time; zero for 1D bodies.
    pub fn rest_volume(&self, layer: Layer) -> f64 {
        match layer {
            Layer::Inner => self.rest_volumes[0],
            Layer::Outer => self.rest_volumes[1],
        }
    }

    pub(crate) fn record_rest_volumes(&mut self) {
        if self.dimension.is_closed() {
            self.rest_volumes = [Layer::Inner, Layer::Outer]
                .map(|l| crate::forces::volume_gauss(self, l).expect("closed body"));
        }
    }

    pub fn dimension(&self) -> Dimension {
        self.dimension
    }

    pub fn particles(&self) -> &[Particle] {
        &self.particles
    }

    pub fn particles_mut(&mut self) -> &mut [Particle] {
        &mut self.particles
    }

    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    pub fn inner_range(&self) -> std::ops::Range<usize> {
        0..self.inner_count
    }

    pub fn outer_range(&self) -> std::ops::Range<usize> {
        self.inner_count..self.particles.len()
    }

    pub fn inner_points(&self) -> &[Particle] {
        &self.particles[self.inner_range()]
    }

    pub fn outer_points(&self) -> &[Particle] {
        &self.particles[self.outer_range()]
    }

    pub fn springs(&self, group: SpringGroup) -> &[Spring] {
        match group {
            SpringGroup::Inner => &self.inner_springs,
            SpringGroup::Outer => &self.outer_springs,
            SpringGroup::Radius => &self.radius_springs,
            SpringGroup::ShearLeft => &self.shear_left,
            SpringGroup::ShearRight => &self.shear_right,
        }
    }

    pub(crate) fn springs_mut(&mut self, group: SpringGroup) -> &mut Vec<Spring> {
        match group {
            SpringGroup::Inner => &mut self.inner_springs,
            SpringGroup::Outer => &mut self.outer_springs,
            SpringGroup::Radius => &mut self.radius_springs,
            SpringGroup::ShearLeft => &mut self.shear_left,
            SpringGroup::ShearRight => &mut self.shear_right,
        }
    }

    /// Every stored spring, in accumulation order.
    pub fn all_springs(&self) -> impl Iterator<Item = (SpringGroup, &Spring)> + '_ {
        SpringGroup::ALL
            .into_iter()
            .flat_map(move |g| self.springs(g).iter().map(move |s| (g, s)))
    }

    pub fn spring_count(&self) -> usize {
        SpringGroup::ALL.iter().map(|&g| self.springs(g).len()).sum()
    }

    pub fn inner_faces(&self) -> &[Face] {
        &self.inner_faces
    }

    /// Outer-layer faces. For 2D rings these triangulate the annulus
    /// between the layers and are only used for display.
    pub fn outer_faces(&self) -> &[Face] {
        &self.outer_faces
    }

    /// Particle index range covered by the given layer's structural springs.
    pub fn layer_range(&self, layer: Layer) -> std::ops::Range<usize> {
        match layer {
            Layer::Inner => self.inner_range(),
            Layer::Outer => self.outer_range(),
        }
    }

    pub fn layer_springs(&self, layer: Layer) -> &[Spring] {
        match layer {
            Layer::Inner => &self.inner_springs,
            Layer::Outer => &self.outer_springs,
        }
    }

    pub fn positions(&self) -> Vec<Vec3> {
        self.particles.iter().map(|p| p.position).collect()
    }

    /// Moves the whole body and re-records its rest volumes at the new
    /// placement.
    pub fn translate(&mut self, offset: Vec3) {
        for p in &mut self.particles {
            p.position += offset;
        }
        self.record_rest_volumes();
    }

    /// Number of structural springs attached to each particle.
    pub fn structural_degree(&self) -> Vec<usize> {
        let mut degree = vec![0; self.particles.len()];
        for s in self.inner_springs.iter().chain(&self.outer_springs) {
            degree[s.head] += 1;
            degree[s.tail] += 1;
        }
        degree
    }

    pub fn set_mass(&mut self, mass: f64) {
        for p in &mut self.particles {
            p.mass = mass;
        }
    }

    /// Overwrites the stiffness and damping of every spring in `group`.
    pub fn set_coefficients(&mut self, group: SpringGroup, ks: f64, kd: f64) {
        for s in self.springs_mut(group) {
            s.ks = ks;
            s.kd = kd;
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Layer {
    Inner,
    Outer,
}

/// Per-particle multiplier that evens out structural stiffness on meshes
/// where particles carry different numbers of springs.
pub fn spring_force_scale(n_connected: usize) -> Result<f64> {
    if n_connected == 0 {
        return Err(Error::Mesh("spring force scale needs at least one connected spring".into()));
    }
    Ok(6.0 / n_connected as f64)
}

//! Penalty-style collision handling against a box of planes, and the
//! constraint that keeps the inner layer inside the outer one.

use serde::{Deserialize, Serialize};

use crate::mesh::{Dimension, LayeredBody, Particle};
use crate::{Error, Result, Vec3};

/// Implicit plane `a x + b y + c z + d`. The side where it is positive is
/// the legal one.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Plane {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    normal: Vec3,
    scale: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Contact {
    Inside,
    OnSurface,
    Penetrating,
}

impl Plane {
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        let n = Vec3::new(a, b, c);
        let scale = n.norm();
        if !(scale > 0.0 && scale.is_finite() && d.is_finite()) {
            return Err(Error::Config(format!("degenerate plane ({a}, {b}, {c}, {d})")));
        }
        Ok(Plane {
            a,
            b,
            c,
            d,
            normal: n / scale,
            scale,
        })
    }

    /// Unit normal pointing into the legal half-space.
    pub fn normal(&self) -> Vec3 {
        self.normal
    }

    pub fn evaluate(&self, p: Vec3) -> f64 {
        self.a * p.x + self.b * p.y + self.c * p.z + self.d
    }

    /// Signed distance, positive on the legal side.
    pub fn distance(&self, p: Vec3) -> f64 {
        self.evaluate(p) / self.scale
    }
}

/// Sign test with a dead band of `epsilon` around the surface.
pub fn classify(p: Vec3, plane: &Plane, epsilon: f64) -> Contact {
    let value = plane.distance(p);
    if value > epsilon {
        Contact::Inside
    } else if value < -epsilon {
        Contact::Penetrating
    } else {
        Contact::OnSurface
    }
}

/// Mirror of `offset` about the unit normal `n`: `2 (d · n) n - d`.
pub fn reflect(offset: Vec3, n: Vec3) -> Vec3 {
    2.0 * offset.dot(&n) * n - offset
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollisionParams {
    /// Restitution: share of the normal velocity kept, reversed.
    pub e: f64,
    /// Share of the tangential velocity kept.
    pub f: f64,
}

impl CollisionParams {
    pub fn new(e: f64, f: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&e) || !(0.0..=1.0).contains(&f) {
            return Err(Error::Config(format!(
                "restitution and friction must lie in [0, 1], got e = {e}, f = {f}"
            )));
        }
        Ok(CollisionParams { e, f })
    }
}

/// Resolves one particle against one plane. Returns whether a response was
/// applied.
///
/// A penetrating particle is moved back onto the surface. If the particle
/// is touching or inside the plane and moving into it, its velocity
/// `v = v_n + v_t` becomes `-e v_n + f v_t`.
pub fn respond(p: &mut Particle, plane: &Plane, cp: &CollisionParams, epsilon: f64) -> bool {
    let contact = classify(p.position, plane, epsilon);
    if contact == Contact::Inside {
        return false;
    }
    let n = plane.normal();
    let mut applied = false;
    if contact == Contact::Penetrating {
        p.position -= plane.distance(p.position) * n;
        applied = true;
    }
    let vn = p.velocity.dot(&n);
    if vn < 0.0 {
        let normal = vn * n;
        let tangent = p.velocity - normal;
        p.velocity = -cp.e * normal + cp.f * tangent;
        applied = true;
    }
    applied
}

/// Axis-aligned container: floor, ceiling, then the walls along x (and z in
/// 3D).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WorldBox {
    pub planes: Vec<Plane>,
}

impl WorldBox {
    pub fn new(min: Vec3, max: Vec3, dimension: Dimension) -> Self {
        let plane = |a, b, c, d| Plane::new(a, b, c, d).expect("axis plane");
        let mut planes = vec![
            plane(0.0, 1.0, 0.0, -min.y),
            plane(0.0, -1.0, 0.0, max.y),
            plane(1.0, 0.0, 0.0, -min.x),
            plane(-1.0, 0.0, 0.0, max.x),
        ];
        if dimension == Dimension::Three {
            planes.push(plane(0.0, 0.0, 1.0, -min.z));
            planes.push(plane(0.0, 0.0, -1.0, max.z));
        }
        WorldBox { planes }
    }

    pub fn contains(&self, p: Vec3, epsilon: f64) -> bool {
        self.planes.iter().all(|pl| classify(p, pl, epsilon) != Contact::Penetrating)
    }
}

/// Tests every outer-layer particle against every plane in order and
/// returns the number of responses applied.
pub fn resolve_world(body: &mut LayeredBody, world: &WorldBox, cp: &CollisionParams, epsilon: f64) -> usize {
    let range = body.outer_range();
    let mut count = 0;
    for p in &mut body.particles_mut()[range] {
        for plane in &world.planes {
            if respond(p, plane, cp, epsilon) {
                count += 1;
            }
        }
    }
    count
}

/// Pulls any inner particle that has moved further from the outer-layer
/// centroid than its outer partner back onto the segment centroid→outer,
/// at `1 - epsilon` of its length, and removes its radial velocity.
/// Returns the number of particles adjusted.
pub fn contain_inner(body: &mut LayeredBody, epsilon: f64) -> Result<usize> {
    if !body.dimension().is_closed() {
        return Err(Error::Topology("1D bodies have no inner layer".into()));
    }
    let outer = body.outer_range();
    let n = body.inner_range().len();
    let centroid = body.particles()[outer.clone()].iter().map(|p| p.position).sum::<Vec3>() / n as f64;

    let particles = body.particles_mut();
    let mut adjusted = 0;
    for i in 0..n {
        let outer_offset = particles[outer.start + i].position - centroid;
        let inner = &mut particles[i];
        if (inner.position - centroid).norm() <= outer_offset.norm() {
            continue;
        }
        inner.position = centroid + (1.0 - epsilon) * outer_offset;
        let len = outer_offset.norm();
        if len > 0.0 {
            let radial = outer_offset / len;
            inner.velocity -= inner.velocity.dot(&radial) * radial;
        }
        adjusted += 1;
    }
    Ok(adjusted)
}

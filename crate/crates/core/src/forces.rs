//! Force model: gravity, spring (Hooke + viscous damping), mouse drag and
//! ideal-gas pressure, plus the spring normals and enclosed volume the
//! pressure term needs.

use serde::{Deserialize, Serialize};

use crate::engine::SimConfig;
use crate::mesh::{spring_force_scale, Dimension, Layer, LayeredBody, Particle, Spring, SpringGroup};
use crate::{Error, Result, Vec3};

/// Springs shorter than this have no usable direction.
const DEGENERATE_LENGTH: f64 = 1e-12;

/// Gas term `P = nrt / V`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PressureParams {
    pub nrt: f64,
    pub enabled: bool,
}

impl PressureParams {
    pub fn for_body(cfg: &SimConfig, dimension: Dimension) -> Self {
        PressureParams {
            nrt: cfg.pressure_nrt,
            enabled: dimension.is_closed(),
        }
    }
}

/// A spring from the mouse anchor to one outer-layer particle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DragState {
    pub anchor: Vec3,
    /// Finite-difference estimate of the anchor velocity.
    pub anchor_velocity: Vec3,
    /// Global index of the dragged particle.
    pub target: usize,
    pub ks: f64,
    pub kd: f64,
    pub rest: f64,
    pub active: bool,
}

impl Default for DragState {
    fn default() -> Self {
        DragState {
            anchor: Vec3::zeros(),
            anchor_velocity: Vec3::zeros(),
            target: 0,
            ks: 0.0,
            kd: 0.0,
            rest: 0.0,
            active: false,
        }
    }
}

impl DragState {
    /// Grabs the outer particle nearest to `anchor`.
    pub fn start(body: &LayeredBody, anchor: Vec3, cfg: &SimConfig) -> Option<Self> {
        let target = find_closest_point(body, anchor)?;
        Some(DragState {
            anchor,
            anchor_velocity: Vec3::zeros(),
            target,
            ks: cfg.mks,
            kd: cfg.mkd,
            rest: cfg.drag_rest,
            active: true,
        })
    }

    /// Moves the anchor; `interval` is the time since the previous anchor
    /// position and sets the anchor velocity estimate.
    pub fn move_to(&mut self, anchor: Vec3, interval: f64) {
        self.anchor_velocity = if interval > 0.0 {
            (anchor - self.anchor) / interval
        } else {
            Vec3::zeros()
        };
        self.anchor = anchor;
    }

    pub fn end(&mut self) {
        self.active = false;
        self.anchor_velocity = Vec3::zeros();
    }
}

/// Non-fatal conditions seen while accumulating forces.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ForceReport {
    /// Springs whose endpoints coincided and so contributed nothing.
    pub degenerate_springs: usize,
    /// Layers whose volume fell below the floor and was clamped.
    pub clamped_volumes: usize,
    pub volume_inner: f64,
    pub volume_outer: f64,
}

impl ForceReport {
    pub fn merge(&mut self, other: &ForceReport) {
        self.degenerate_springs += other.degenerate_springs;
        self.clamped_volumes += other.clamped_volumes;
        self.volume_inner = other.volume_inner;
        self.volume_outer = other.volume_outer;
    }
}

/// `F = m g`, pointing down the y axis.
pub fn gravity_force(p: &Particle, g: f64) -> Vec3 {
    Vec3::new(0.0, -p.mass * g, 0.0)
}

fn direction(s: &Spring, particles: &[Particle]) -> Option<(Vec3, f64)> {
    let d = particles[s.tail].position - particles[s.head].position;
    let len = d.norm();
    (len > DEGENERATE_LENGTH).then(|| (d / len, len))
}

/// Hooke force `-(|r2 - r1| - rest) ks` along the spring, returned as
/// `(force on head, force on tail)`. A stretched spring pulls its ends
/// together. `None` when the endpoints coincide.
pub fn hooke_force(s: &Spring, particles: &[Particle]) -> Option<(Vec3, Vec3)> {
    let (u, len) = direction(s, particles)?;
    let f = -(len - s.rest_length) * s.ks;
    Some((-f * u, f * u))
}

/// Viscous damping `((v2 - v1) · u) kd` along the spring, opposing the
/// relative motion of the endpoints.
pub fn damping_force(s: &Spring, particles: &[Particle]) -> Option<(Vec3, Vec3)> {
    let (u, _) = direction(s, particles)?;
    let dv = particles[s.tail].velocity - particles[s.head].velocity;
    let f = dv.dot(&u) * s.kd;
    Some((f * u, -f * u))
}

/// Adds Hooke and damping forces for every stored spring. Returns the
/// number of degenerate springs skipped.
///
/// With `uniformity_correction` the structural part of each particle's
/// sum is multiplied by `6 / n`, `n` being the structural springs at it.
pub fn total_spring_forces(body: &mut LayeredBody, uniformity_correction: bool) -> usize {
    let mut degenerate = 0;
    let mut structural = uniformity_correction.then(|| vec![Vec3::zeros(); body.len()]);

    for group in SpringGroup::ALL {
        for i in 0..body.springs(group).len() {
            let s = &body.springs(group)[i];
            let (Some(h), Some(d)) = (hooke_force(s, &body.particles), damping_force(s, &body.particles))
            else {
                degenerate += 1;
                continue;
            };
            let (head, tail) = (s.head, s.tail);
            match structural.as_mut() {
                Some(buf) if group.is_structural() => {
                    buf[head] += h.0 + d.0;
                    buf[tail] += h.1 + d.1;
                }
                _ => {
                    body.particles[head].force += h.0 + d.0;
                    body.particles[tail].force += h.1 + d.1;
                }
            }
        }
    }

    if let Some(buf) = structural {
        let degree = body.structural_degree();
        for ((p, f), n) in body.particles.iter_mut().zip(buf).zip(degree) {
            if n > 0 {
                p.force += f * spring_force_scale(n).expect("n > 0");
            }
        }
    }
    degenerate
}

/// Force the drag spring exerts on its target particle. Zero while the
/// drag is inactive or the anchor sits exactly on the particle.
pub fn drag_force(d: &DragState, body: &LayeredBody) -> Vec3 {
    if !d.active {
        return Vec3::zeros();
    }
    let p = &body.particles[d.target];
    let offset = d.anchor - p.position;
    let len = offset.norm();
    if len <= DEGENERATE_LENGTH {
        return Vec3::zeros();
    }
    let u = offset / len;
    let spring = (len - d.rest) * d.ks;
    let damper = (d.anchor_velocity - p.velocity).dot(&u) * d.kd;
    (spring + damper) * u
}

/// Global index of the outer-layer particle nearest to `anchor`; the lowest
/// index wins ties.
pub fn find_closest_point(body: &LayeredBody, anchor: Vec3) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for i in body.outer_range() {
        let d = (body.particles[i].position - anchor).norm_squared();
        if best.is_none_or(|(_, bd)| d < bd) {
            best = Some((i, d));
        }
    }
    best.map(|(i, _)| i)
}

/// The spring rotated 90° about z: `(-(y2 - y1), x2 - x1)`. Not normalised;
/// its length is the spring length.
pub fn spring_normal_2d(s: &Spring, particles: &[Particle]) -> Vec3 {
    let d = particles[s.tail].position - particles[s.head].position;
    Vec3::new(-d.y, d.x, 0.0)
}

/// Cheap 3D estimate: the spring rotated 90° about z, y and x in turn,
/// `(z2 - z1, y2 - y1, -(x2 - x1))`.
///
/// This is not a true surface normal. A spring along y maps onto itself.
pub fn spring_normal_3d(s: &Spring, particles: &[Particle]) -> Vec3 {
    let d = particles[s.tail].position - particles[s.head].position;
    Vec3::new(d.z, d.y, -d.x)
}

fn raw_normal(dimension: Dimension, s: &Spring, particles: &[Particle]) -> Vec3 {
    match dimension {
        Dimension::Three => spring_normal_3d(s, particles),
        _ => spring_normal_2d(s, particles),
    }
}

fn layer_centroid(body: &LayeredBody, layer: Layer) -> Vec3 {
    let range = body.layer_range(layer);
    let n = range.len().max(1) as f64;
    body.particles[range].iter().map(|p| p.position).sum::<Vec3>() / n
}

fn outward_normal(body: &LayeredBody, s: &Spring, centroid: Vec3) -> Vec3 {
    let n = raw_normal(body.dimension, s, &body.particles);
    let mid = (body.particles[s.head].position + body.particles[s.tail].position) * 0.5;
    if n.dot(&(mid - centroid)) < 0.0 {
        -n
    } else {
        n
    }
}

/// Refreshes the cached normal of every structural spring, flipped where
/// needed so it points away from its layer's centroid.
pub fn update_normals(body: &mut LayeredBody) {
    if !body.dimension.is_closed() {
        return;
    }
    for layer in [Layer::Inner, Layer::Outer] {
        let centroid = layer_centroid(body, layer);
        let group = match layer {
            Layer::Inner => SpringGroup::Inner,
            Layer::Outer => SpringGroup::Outer,
        };
        let normals: Vec<Vec3> = body
            .springs(group)
            .iter()
            .map(|s| outward_normal(body, s, centroid))
            .collect();
        for (s, n) in body.springs_mut(group).iter_mut().zip(normals) {
            s.normal = n;
        }
    }
}

/// Enclosed volume of one layer from the divergence theorem with the field
/// `F = (x, 0, 0)`: the sum over structural springs of
/// `½ (x1 + x2) · n̂_x · length`.
///
/// In 2D the rotated spring vectors share the ring's winding, so the
/// magnitude of the sum is exactly the polygon area. In 3D the estimated
/// spring normals are oriented away from the centroid first; the result is
/// only an approximation of the true volume.
pub fn volume_gauss(body: &LayeredBody, layer: Layer) -> Result<f64> {
    if !body.dimension.is_closed() {
        return Err(Error::Topology("volume is undefined for an open 1D body".into()));
    }
    let springs = body.layer_springs(layer);
    let centroid = layer_centroid(body, layer);
    let mut sum = 0.0;
    for s in springs {
        // n̂_x · length == n_x for a normal scaled to the spring length
        let n = match body.dimension {
            Dimension::Three => outward_normal(body, s, centroid),
            _ => spring_normal_2d(s, &body.particles),
        };
        let x_mid = 0.5 * (body.particles[s.head].position.x + body.particles[s.tail].position.x);
        sum += x_mid * n.x;
    }
    Ok(sum.abs())
}

/// Adds `P n̂ length` for every structural spring, half to each endpoint,
/// with `P = nrt / V` per layer. Uses the cached outward normals, so
/// [`update_normals`] must run first.
pub fn pressure_forces(body: &mut LayeredBody, pp: &PressureParams, volume_floor_ratio: f64) -> Result<ForceReport> {
    let mut report = ForceReport::default();
    if !pp.enabled {
        return Ok(report);
    }
    for layer in [Layer::Inner, Layer::Outer] {
        let volume = volume_gauss(body, layer)?;
        let floor = volume_floor_ratio * body.rest_volume(layer);
        let effective = if volume < floor {
            report.clamped_volumes += 1;
            floor
        } else {
            volume
        };
        match layer {
            Layer::Inner => report.volume_inner = volume,
            Layer::Outer => report.volume_outer = volume,
        }
        if pp.nrt == 0.0 || effective <= 0.0 {
            continue;
        }
        let pressure = pp.nrt / effective;
        let range = body.layer_range(layer);
        let springs = body.layer_springs(layer);
        let contributions: Vec<(usize, usize, Vec3)> = springs
            .iter()
            .map(|s| (s.head, s.tail, s.normal * (0.5 * pressure)))
            .collect();
        debug_assert!(contributions.iter().all(|c| range.contains(&c.0) && range.contains(&c.1)));
        for (head, tail, f) in contributions {
            body.particles[head].force += f;
            body.particles[tail].force += f;
        }
    }
    Ok(report)
}

/// One full force pass, in order: clear accumulators, gravity, structural,
/// radius and shear springs, normals, volumes and pressure (closed bodies
/// only), then the drag spring. Integration and collision are not part of
/// this pass.
pub fn accumulate_forces(body: &mut LayeredBody, cfg: &SimConfig, drag: Option<&DragState>) -> Result<ForceReport> {
    for p in &mut body.particles {
        p.force = Vec3::zeros();
    }
    for p in &mut body.particles {
        p.force += gravity_force(p, cfg.g);
    }
    let degenerate = total_spring_forces(body, cfg.uniformity_correction);

    let mut report = if body.dimension.is_closed() {
        update_normals(body);
        pressure_forces(body, &PressureParams::for_body(cfg, body.dimension), cfg.volume_floor_ratio)?
    } else {
        ForceReport::default()
    };
    report.degenerate_springs += degenerate;

    if let Some(d) = drag.filter(|d| d.active) {
        let f = drag_force(d, body);
        body.particles[d.target].force += f;
    }
    Ok(report)
}

use serde::{Deserialize, Serialize};

use crate::export::{particle_exports, trim, ParticleExport};
use crate::forces::DragState;
use crate::mesh::{Dimension, LayeredBody};

/// Derived scalars for one step; one row of the metrics CSV.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub step: u64,
    pub time: f64,
    pub volume_inner: f64,
    pub volume_outer: f64,
    /// Kinetic energy.
    pub ke: f64,
    /// Elastic energy stored in the body's springs.
    pub pe: f64,
    /// Largest particle distance from the origin.
    pub max_norm: f64,
    pub collisions: usize,
}

impl Metrics {
    pub const CSV_HEADER: &'static str = "step,time,volume_inner,volume_outer,ke,pe,max_norm,collisions";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{}",
            self.step, self.time, self.volume_inner, self.volume_outer, self.ke, self.pe, self.max_norm, self.collisions
        )
    }
}

pub fn metrics_csv<'a>(rows: impl IntoIterator<Item = &'a Metrics>) -> String {
    let mut out = String::from(Metrics::CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r.csv_row());
        out.push('\n');
    }
    out
}

pub fn kinetic_energy(body: &LayeredBody) -> f64 {
    body.particles()
        .iter()
        .map(|p| 0.5 * p.mass * p.velocity.norm_squared())
        .sum()
}

pub fn spring_energy(body: &LayeredBody) -> f64 {
    let p = body.particles();
    body.all_springs()
        .map(|(_, s)| {
            let stretch = (p[s.tail].position - p[s.head].position).norm() - s.rest_length;
            0.5 * s.ks * stretch * stretch
        })
        .sum()
}

/// Largest particle distance from the origin; infinite if any coordinate is
/// not finite.
pub fn max_norm(body: &LayeredBody) -> f64 {
    body.particles().iter().fold(0.0, |m: f64, p| {
        let n = p.position.norm();
        if n.is_finite() {
            m.max(n)
        } else {
            f64::INFINITY
        }
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DragView {
    pub active: bool,
    pub target: usize,
    pub anchor: Vec<f64>,
}

impl DragView {
    pub fn new(d: &DragState, dimension: Dimension) -> Self {
        DragView {
            active: d.active,
            target: d.target,
            anchor: trim(d.anchor, dimension),
        }
    }
}

/// Full state after a step: what the CLI streams and the server
/// broadcasts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub step: u64,
    pub time: f64,
    pub dimension: Dimension,
    pub particles: Vec<ParticleExport>,
    pub volume_inner: f64,
    pub volume_outer: f64,
    pub ke: f64,
    pub pe: f64,
    pub max_norm: f64,
    pub collisions: usize,
    pub diverged: bool,
    pub drag: Option<DragView>,
}

impl Snapshot {
    pub fn new(body: &LayeredBody, metrics: &Metrics, diverged: bool, drag: Option<&DragState>) -> Self {
        let dimension = body.dimension();
        Snapshot {
            step: metrics.step,
            time: metrics.time,
            dimension,
            particles: particle_exports(body),
            volume_inner: metrics.volume_inner,
            volume_outer: metrics.volume_outer,
            ke: metrics.ke,
            pe: metrics.pe,
            max_norm: metrics.max_norm,
            collisions: metrics.collisions,
            diverged,
            drag: drag.filter(|d| d.active).map(|d| DragView::new(d, dimension)),
        }
    }

    pub fn metrics(&self) -> Metrics {
        Metrics {
            step: self.step,
            time: self.time,
            volume_inner: self.volume_inner,
            volume_outer: self.volume_outer,
            ke: self.ke,
            pe: self.pe,
            max_norm: self.max_norm,
            collisions: self.collisions,
        }
    }

    /// One line of the newline-delimited snapshot stream.
    pub fn to_json_line(&self) -> String {
        let mut s = serde_json::to_string(self).expect("snapshot serialises");
        s.push('\n');
        s
    }
}

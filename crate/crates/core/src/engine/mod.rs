//! The step loop: accumulate forces, integrate, resolve collisions, keep the
//! inner layer inside the outer one, then measure.

mod body;
mod config;
mod scenario;
mod snapshot;
mod sweep;

pub use body::{deserialize_body, BodySpec, MAX_PARTICLES};
pub use config::{SimConfig, PARAM_KEYS};
pub use scenario::{run, Anchor, Event, RunSummary, ScenarioEvent, ScenarioScript};
pub use snapshot::{kinetic_energy, max_norm, metrics_csv, spring_energy, DragView, Metrics, Snapshot};
pub use sweep::{default_sweep_body, is_nested, stability_sweep, sweep_csv, SweepCell, DEFAULT_SWEEP_DTS};

use crate::collide::{contain_inner, resolve_world};
use crate::export::MeshExport;
use crate::forces::{find_closest_point, volume_gauss, DragState, ForceReport};
use crate::integrate::{self, IntegratorKind, StageScratch};
use crate::mesh::{Dimension, Layer, LayeredBody, SpringGroup};
use crate::{Error, Result, Vec3};

/// One body advancing under one configuration.
#[derive(Clone, Debug)]
pub struct Simulation {
    spec: Option<BodySpec>,
    body: LayeredBody,
    cfg: SimConfig,
    scratch: StageScratch,
    drag: DragState,
    drag_time: f64,
    step: u64,
    time: f64,
    diverged: bool,
    metrics: Metrics,
    forces: ForceReport,
    adjustments: usize,
}

impl Simulation {
    pub fn new(spec: BodySpec, cfg: SimConfig) -> Result<Self> {
        cfg.validate()?;
        let body = spec.build(&cfg)?;
        let mut sim = Self::from_body(body, cfg)?;
        sim.spec = Some(spec);
        Ok(sim)
    }

    /// Wraps a body built by hand. Spring coefficients and masses are taken
    /// from the body as is.
    pub fn from_body(body: LayeredBody, cfg: SimConfig) -> Result<Self> {
        cfg.validate()?;
        if body.is_empty() {
            return Err(Error::Mesh("body has no particles".into()));
        }
        let mut sim = Simulation {
            spec: None,
            body,
            cfg,
            scratch: StageScratch::default(),
            drag: DragState::default(),
            drag_time: 0.0,
            step: 0,
            time: 0.0,
            diverged: false,
            metrics: Metrics::default(),
            forces: ForceReport::default(),
            adjustments: 0,
        };
        sim.measure(0);
        Ok(sim)
    }

    /// Replaces the body and restarts the clock. The configuration stays.
    pub fn rebuild(&mut self, spec: BodySpec) -> Result<()> {
        let body = spec.build(&self.cfg)?;
        *self = Self::from_body(body, self.cfg.clone())?;
        self.spec = Some(spec);
        Ok(())
    }

    pub fn spec(&self) -> Option<&BodySpec> {
        self.spec.as_ref()
    }

    pub fn body(&self) -> &LayeredBody {
        &self.body
    }

    pub fn config(&self) -> &SimConfig {
        &self.cfg
    }

    pub fn step_index(&self) -> u64 {
        self.step
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn diverged(&self) -> bool {
        self.diverged
    }

    pub fn metrics(&self) -> &Metrics {
        &self.metrics
    }

    /// Conditions reported by the most recent force passes.
    pub fn force_report(&self) -> &ForceReport {
        &self.forces
    }

    /// Inner particles moved back inside the outer layer by the last step.
    pub fn containment_adjustments(&self) -> usize {
        self.adjustments
    }

    /// Derivative evaluations performed so far.
    pub fn evaluations(&self) -> u64 {
        self.scratch.evaluations
    }

    pub fn drag(&self) -> Option<&DragState> {
        self.drag.active.then_some(&self.drag)
    }

    /// Advances one step without building a snapshot.
    pub fn advance(&mut self) -> Result<&Metrics> {
        if self.diverged {
            return Err(Error::Diverged { step: self.step });
        }
        let dim = self.body.dimension();
        let drag = self.drag.active.then_some(&self.drag);
        let report = integrate::step(
            self.cfg.integrator,
            &mut self.body,
            &self.cfg,
            drag,
            self.cfg.dt,
            &mut self.scratch,
        )?;
        self.forces = report.forces;

        // Judge the raw integrator output: the walls would otherwise clamp
        // a runaway body back into the box.
        let blown = report.diverged || max_norm(&self.body) > self.cfg.divergence_bound(dim);
        let mut collisions = 0;
        self.adjustments = 0;
        if blown {
            self.diverged = true;
        } else {
            let world = self.cfg.world(dim);
            collisions = resolve_world(&mut self.body, &world, &self.cfg.collision(), self.cfg.surface_epsilon);
            if dim.is_closed() {
                self.adjustments = contain_inner(&mut self.body, self.cfg.layer_epsilon)?;
            }
        }
        self.step += 1;
        self.time += self.cfg.dt;
        self.measure(collisions);
        Ok(&self.metrics)
    }

    /// Advances one step and returns the resulting state.
    pub fn step(&mut self) -> Result<Snapshot> {
        self.advance()?;
        Ok(self.snapshot())
    }

    pub fn snapshot(&self) -> Snapshot {
        Snapshot::new(&self.body, &self.metrics, self.diverged, self.drag())
    }

    pub fn topology(&self) -> MeshExport {
        MeshExport::from_body(&self.body)
    }

    fn measure(&mut self, collisions: usize) {
        let (volume_inner, volume_outer) = if self.body.dimension().is_closed() {
            (
                volume_gauss(&self.body, Layer::Inner).unwrap_or(f64::NAN),
                volume_gauss(&self.body, Layer::Outer).unwrap_or(f64::NAN),
            )
        } else {
            (0.0, 0.0)
        };
        self.metrics = Metrics {
            step: self.step,
            time: self.time,
            volume_inner,
            volume_outer,
            ke: kinetic_energy(&self.body),
            pe: spring_energy(&self.body),
            max_norm: max_norm(&self.body),
            collisions,
        };
    }

    /// Changes one configuration value and pushes it into the body (spring
    /// coefficients, masses, the active drag spring). Nothing changes when
    /// the key or value is rejected.
    pub fn set_param(&mut self, key: &str, value: f64) -> Result<()> {
        self.cfg.set_param(key, value)?;
        let cfg = &self.cfg;
        match key {
            "ks" | "kd" => {
                self.body.set_coefficients(SpringGroup::Inner, cfg.ks, cfg.kd);
                self.body.set_coefficients(SpringGroup::Outer, cfg.ks, cfg.kd);
            }
            "rks" | "rkd" => {
                for group in [SpringGroup::Radius, SpringGroup::ShearLeft, SpringGroup::ShearRight] {
                    self.body.set_coefficients(group, cfg.rks, cfg.rkd);
                }
            }
            "mass" => self.body.set_mass(cfg.mass),
            "mks" => self.drag.ks = cfg.mks,
            "mkd" => self.drag.kd = cfg.mkd,
            "drag_rest" => self.drag.rest = cfg.drag_rest,
            _ => {}
        }
        Ok(())
    }

    pub fn set_integrator(&mut self, kind: IntegratorKind) {
        self.cfg.integrator = kind;
    }

    fn planar(&self, mut anchor: Vec3) -> Result<Vec3> {
        if self.body.dimension() != Dimension::Three {
            anchor.z = 0.0;
        }
        if anchor.iter().all(|c| c.is_finite()) {
            Ok(anchor)
        } else {
            Err(Error::Config("drag anchor must be finite".into()))
        }
    }

    /// Grabs the outer particle nearest to `anchor` and returns its index.
    pub fn drag_start(&mut self, anchor: Vec3) -> Result<usize> {
        let anchor = self.planar(anchor)?;
        let drag = DragState::start(&self.body, anchor, &self.cfg)
            .ok_or_else(|| Error::Topology("body has no outer particles".into()))?;
        self.body.closest_outer_index = Some(drag.target);
        debug_assert_eq!(Some(drag.target), find_closest_point(&self.body, anchor));
        self.drag = drag;
        self.drag_time = self.time;
        Ok(self.drag.target)
    }

    /// Moves the anchor of an active drag. The anchor velocity is estimated
    /// from the previous anchor position and the simulated time since then.
    pub fn drag_move(&mut self, anchor: Vec3) -> Result<()> {
        let anchor = self.planar(anchor)?;
        if !self.drag.active {
            return Ok(());
        }
        let interval = self.time - self.drag_time;
        if interval > 0.0 {
            self.drag.move_to(anchor, interval);
        } else {
            self.drag.anchor = anchor;
        }
        self.drag_time = self.time;
        Ok(())
    }

    pub fn drag_end(&mut self) {
        self.drag.end();
        self.body.closest_outer_index = None;
    }
}

#[cfg(test)]
mod tests {
    use approx::assert_abs_diff_eq;

    use super::*;

    fn still() -> SimConfig {
        SimConfig {
            g: 0.0,
            pressure_nrt: 0.0,
            ..SimConfig::default()
        }
    }

    #[test]
    fn rest_pose_is_a_fixpoint() {
        for spec in [BodySpec::ring2d(12, 1.5, 2.0), BodySpec::sphere_octa(1, 1.5, 2.0), BodySpec::one_d([0.0, 2.0], [0.0, 1.0])] {
            let mut sim = Simulation::new(spec, still()).unwrap();
            let start = sim.body().positions();
            for _ in 0..100 {
                sim.step().unwrap();
            }
            for (a, b) in start.iter().zip(sim.body().positions()) {
                assert!((a - b).norm() <= 1e-12);
            }
        }
    }

    #[test]
    fn ring_falls_and_stays_in_the_box() {
        let mut sim = Simulation::new(BodySpec::ring2d(12, 1.5, 2.0), SimConfig::default()).unwrap();
        let mut hits = 0;
        for _ in 0..2000 {
            hits += sim.advance().unwrap().collisions;
        }
        assert!(!sim.diverged());
        assert!(hits > 0);
        let floor = SimConfig::default().world_min[1];
        assert!(sim.body().outer_points().iter().all(|p| p.position.y >= floor - 1e-9));
        assert_abs_diff_eq!(sim.time(), 2000.0 * 0.003, epsilon = 1e-9);
        assert_eq!(sim.evaluations(), 2000 * 4);
    }

    #[test]
    fn euler_blows_up_at_a_large_step() {
        let cfg = SimConfig {
            dt: 0.3,
            integrator: IntegratorKind::Euler,
            ..SimConfig::default()
        };
        let mut sim = Simulation::new(BodySpec::ring2d(12, 1.5, 2.0), cfg).unwrap();
        let mut steps = 0;
        while !sim.diverged() && steps < 5000 {
            sim.advance().unwrap();
            steps += 1;
        }
        assert!(sim.diverged());
        assert!(sim.snapshot().diverged);
        assert!(matches!(sim.advance(), Err(Error::Diverged { .. })));
    }

    #[test]
    fn set_param_updates_body_and_rejects_bad_values() {
        let mut sim = Simulation::new(BodySpec::ring2d(6, 1.0, 2.0), SimConfig::default()).unwrap();
        sim.set_param("ks", 100.0).unwrap();
        assert!(sim.body().springs(SpringGroup::Outer).iter().all(|s| s.ks == 100.0));
        sim.set_param("rkd", 7.0).unwrap();
        assert!(sim.body().springs(SpringGroup::ShearRight).iter().all(|s| s.kd == 7.0));
        sim.set_param("mass", 2.0).unwrap();
        assert!(sim.body().particles().iter().all(|p| p.mass == 2.0));

        let before = sim.config().clone();
        assert!(sim.set_param("ks", -1.0).is_err());
        assert!(sim.set_param("warp", 1.0).is_err());
        assert_eq!(sim.config(), &before);
        assert!(sim.body().springs(SpringGroup::Outer).iter().all(|s| s.ks == 100.0));
    }

    #[test]
    fn drag_pulls_the_target() {
        let mut sim = Simulation::new(BodySpec::ring2d(12, 1.5, 2.0), still()).unwrap();
        let target = sim.drag_start(Vec3::new(2.0, 0.0, 0.0)).unwrap();
        assert_eq!(target, 12);
        assert_eq!(sim.body().closest_outer_index, Some(12));
        sim.drag_move(Vec3::new(4.0, 0.0, 5.0)).unwrap();
        assert_eq!(sim.drag().unwrap().anchor, Vec3::new(4.0, 0.0, 0.0));
        let x0 = sim.body().particles()[12].position.x;
        for _ in 0..20 {
            sim.step().unwrap();
        }
        assert!(sim.body().particles()[12].position.x > x0);
        assert!(sim.snapshot().drag.is_some());
        sim.drag_end();
        assert!(sim.drag().is_none());
        assert!(sim.snapshot().drag.is_none());
        assert!(sim.drag_start(Vec3::new(f64::NAN, 0.0, 0.0)).is_err());
    }

    #[test]
    fn rebuild_resets_the_clock() {
        let mut sim = Simulation::new(BodySpec::ring2d(6, 1.0, 2.0), SimConfig::default()).unwrap();
        sim.set_param("g", 1.0).unwrap();
        sim.step().unwrap();
        sim.rebuild(BodySpec::sphere_octa(0, 1.0, 2.0)).unwrap();
        assert_eq!(sim.step_index(), 0);
        assert_eq!(sim.body().dimension(), Dimension::Three);
        assert_eq!(sim.config().g, 1.0);
        assert!(sim.rebuild(BodySpec::ring2d(2, 1.0, 2.0)).is_err());
        assert_eq!(sim.body().dimension(), Dimension::Three);
    }

    #[test]
    fn initial_metrics_are_measured() {
        let sim = Simulation::new(BodySpec::ring2d(4, 1.0, 2.0), SimConfig::default()).unwrap();
        let m = sim.metrics();
        assert_eq!(m.step, 0);
        assert_abs_diff_eq!(m.volume_inner, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(m.volume_outer, 8.0, epsilon = 1e-12);
        assert_eq!(m.ke, 0.0);
        assert_eq!(m.max_norm, 2.0);
    }
}

use serde::{Deserialize, Serialize};

use super::{deserialize_body, BodySpec, Metrics, SimConfig, Simulation, Snapshot};
use crate::integrate::IntegratorKind;
use crate::{Error, Result, Vec3};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Anchor {
    pub x: f64,
    pub y: f64,
    #[serde(default)]
    pub z: f64,
}

impl Anchor {
    pub fn to_vec(self) -> Vec3 {
        Vec3::new(self.x, self.y, self.z)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "payload", rename_all = "snake_case")]
pub enum Event {
    DragStart(Anchor),
    DragMove(Anchor),
    DragEnd,
    SetParam { key: String, value: f64 },
    SetIntegrator { kind: IntegratorKind },
}

/// An event applied at the boundary before step `step` is taken.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioEvent {
    pub step: u64,
    #[serde(flatten)]
    pub event: Event,
}

fn one() -> u64 {
    1
}

/// A headless run: body, configuration overrides, timed events, length and
/// snapshot cadence.
///
/// ```
/// use squish::engine::ScenarioScript;
///
/// let script: ScenarioScript = serde_json::from_str(r#"{
///     "body": {"kind": "ring2d", "params": {"n": 8}},
///     "config": {"dt": 0.002, "integrator": "midpoint"},
///     "events": [{"step": 5, "type": "drag_start", "payload": {"x": 3, "y": 0}},
///                {"step": 9, "type": "drag_end"}],
///     "steps": 20,
///     "snapshot_every": 10
/// }"#).unwrap();
/// let mut lines = 0;
/// let summary = squish::engine::run(&script, |_| { lines += 1; Ok(()) }).unwrap();
/// assert_eq!(lines, 3);
/// assert!(!summary.diverged);
/// ```
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioScript {
    #[serde(deserialize_with = "deserialize_body")]
    pub body: BodySpec,
    #[serde(default)]
    pub config: SimConfig,
    #[serde(default)]
    pub events: Vec<ScenarioEvent>,
    pub steps: u64,
    #[serde(default = "one")]
    pub snapshot_every: u64,
}

impl ScenarioScript {
    pub fn new(body: BodySpec, config: SimConfig, steps: u64) -> Self {
        ScenarioScript {
            body,
            config,
            events: Vec::new(),
            steps,
            snapshot_every: 1,
        }
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Checks everything that can be checked without stepping: the config,
    /// the body, event order and every event parameter.
    pub fn validate(&self) -> Result<()> {
        self.config.validate()?;
        if self.snapshot_every == 0 {
            return Err(Error::Scenario("snapshot_every must be at least 1".into()));
        }
        self.body.build(&self.config)?;
        let mut cfg = self.config.clone();
        let mut last = 0;
        for (i, e) in self.events.iter().enumerate() {
            if e.step < last {
                return Err(Error::Scenario(format!("event {i} at step {} is out of order", e.step)));
            }
            if e.step > self.steps {
                return Err(Error::Scenario(format!(
                    "event {i} at step {} is past the end of the run ({} steps)",
                    e.step, self.steps
                )));
            }
            last = e.step;
            match &e.event {
                Event::DragStart(a) | Event::DragMove(a) => {
                    if ![a.x, a.y, a.z].iter().all(|c| c.is_finite()) {
                        return Err(Error::Scenario(format!("event {i} has a non-finite anchor")));
                    }
                }
                Event::SetParam { key, value } => cfg
                    .set_param(key, *value)
                    .map_err(|err| Error::Scenario(format!("event {i}: {err}")))?,
                Event::DragEnd | Event::SetIntegrator { .. } => {}
            }
        }
        Ok(())
    }
}

impl Simulation {
    pub fn apply(&mut self, event: &Event) -> Result<()> {
        match event {
            Event::DragStart(a) => self.drag_start(a.to_vec()).map(|_| ()),
            Event::DragMove(a) => self.drag_move(a.to_vec()),
            Event::DragEnd => {
                self.drag_end();
                Ok(())
            }
            Event::SetParam { key, value } => self.set_param(key, *value),
            Event::SetIntegrator { kind } => {
                self.set_integrator(*kind);
                Ok(())
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunSummary {
    pub steps_run: u64,
    pub diverged: bool,
    pub snapshots: usize,
    pub last: Snapshot,
    /// One row per step, starting with the initial state.
    pub metrics: Vec<Metrics>,
}

/// Replays `script` and hands every snapshot to `emit`: the initial state,
/// every `snapshot_every`-th step, the final step and, if it happens, the
/// step that diverged.
pub fn run(script: &ScenarioScript, mut emit: impl FnMut(&Snapshot) -> Result<()>) -> Result<RunSummary> {
    script.validate()?;
    let mut sim = Simulation::new(script.body.clone(), script.config.clone())?;
    let mut metrics = vec![*sim.metrics()];
    let mut snapshots = 1;
    let mut last = sim.snapshot();
    emit(&last)?;

    let mut events = script.events.iter().peekable();
    for s in 0..script.steps {
        while let Some(e) = events.next_if(|e| e.step == s) {
            sim.apply(&e.event)?;
        }
        metrics.push(*sim.advance()?);
        let done = sim.diverged() || s + 1 == script.steps;
        if done || sim.step_index() % script.snapshot_every == 0 {
            last = sim.snapshot();
            emit(&last)?;
            snapshots += 1;
        }
        if sim.diverged() {
            break;
        }
    }
    if !sim.diverged() {
        for e in events {
            sim.apply(&e.event)?;
        }
    }
    Ok(RunSummary {
        steps_run: sim.step_index(),
        diverged: sim.diverged(),
        snapshots,
        last,
        metrics,
    })
}

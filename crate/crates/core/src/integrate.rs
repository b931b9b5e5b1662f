//! Explicit integrators over the packed body state.
//!
//! The state `y` holds `(position, velocity)` per particle and its
//! derivative is `(velocity, force / mass)`. Each integrator is written in
//! terms of slope evaluations `k1..k4` of that derivative:
//!
//! | method   | update                                      | evaluations |
//! |----------|---------------------------------------------|-------------|
//! | Euler    | `y + h k1`                                  | 1           |
//! | Midpoint | `y + h (k1 + k2) / 2`, `k2 = A(y + h k1)`   | 2           |
//! | RK4      | `y + h/6 (k1 + 2 k2 + 2 k3 + k4)`           | 4           |
//!
//! No force depends explicitly on time, so `A(y, t) = A(y)`. The drag anchor
//! is held fixed for the whole step.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::engine::SimConfig;
use crate::forces::{accumulate_forces, DragState, ForceReport};
use crate::mesh::{build_1d, LayeredBody};
use crate::{Error, Result, Vec3};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IntegratorKind {
    Euler,
    Midpoint,
    #[default]
    Rk4,
}

impl IntegratorKind {
    pub const ALL: [IntegratorKind; 3] = [IntegratorKind::Euler, IntegratorKind::Midpoint, IntegratorKind::Rk4];

    pub fn evaluations_per_step(self) -> u64 {
        match self {
            IntegratorKind::Euler => 1,
            IntegratorKind::Midpoint => 2,
            IntegratorKind::Rk4 => 4,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            IntegratorKind::Euler => "euler",
            IntegratorKind::Midpoint => "midpoint",
            IntegratorKind::Rk4 => "rk4",
        }
    }
}

impl fmt::Display for IntegratorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

impl FromStr for IntegratorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "euler" => Ok(IntegratorKind::Euler),
            "midpoint" => Ok(IntegratorKind::Midpoint),
            "rk4" | "runge-kutta" => Ok(IntegratorKind::Rk4),
            other => Err(Error::Config(format!("unknown integrator '{other}'"))),
        }
    }
}

/// Flat `(position, velocity)` pairs for every particle, inner layer first.
/// Only the body's spatial components are stored.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct StateVector(pub Vec<f64>);

impl StateVector {
    pub fn pack(body: &LayeredBody) -> Self {
        let dim = body.dimension().spatial();
        let mut v = Vec::with_capacity(body.len() * 2 * dim);
        for p in body.particles() {
            v.extend_from_slice(&p.position.as_slice()[..dim]);
            v.extend_from_slice(&p.velocity.as_slice()[..dim]);
        }
        StateVector(v)
    }

    pub fn expected_len(body: &LayeredBody) -> usize {
        body.len() * 2 * body.dimension().spatial()
    }

    pub fn unpack_into(&self, body: &mut LayeredBody) -> Result<()> {
        let expected = Self::expected_len(body);
        if self.0.len() != expected {
            return Err(Error::StateLength {
                expected,
                found: self.0.len(),
            });
        }
        let dim = body.dimension().spatial();
        for (p, chunk) in body.particles_mut().iter_mut().zip(self.0.chunks_exact(2 * dim)) {
            p.position.as_mut_slice()[..dim].copy_from_slice(&chunk[..dim]);
            p.velocity.as_mut_slice()[..dim].copy_from_slice(&chunk[dim..]);
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }

    /// `self = base + h * k`
    fn set_axpy(&mut self, base: &StateVector, h: f64, k: &StateVector) {
        self.0.clear();
        self.0.extend(base.0.iter().zip(&k.0).map(|(b, k)| b + h * k));
    }
}

/// Per-step integrator scratch. Also counts derivative evaluations.
#[derive(Clone, Debug, Default)]
pub struct StageScratch {
    pub y0: StateVector,
    pub k1: StateVector,
    pub k2: StateVector,
    pub k3: StateVector,
    pub k4: StateVector,
    probe: StateVector,
    pub evaluations: u64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct StepReport {
    pub forces: ForceReport,
    /// A coordinate became NaN or infinite.
    pub diverged: bool,
}

/// Writes `A(state)` into `out`: velocities into the position slots and
/// `force / mass` into the velocity slots. Leaves `state` unpacked in the
/// body with fresh force accumulators.
fn evaluate(
    body: &mut LayeredBody,
    cfg: &SimConfig,
    drag: Option<&DragState>,
    state: &StateVector,
    out: &mut StateVector,
    scratch_evals: &mut u64,
) -> Result<ForceReport> {
    state.unpack_into(body)?;
    let report = accumulate_forces(body, cfg, drag)?;
    *scratch_evals += 1;

    let dim = body.dimension().spatial();
    out.0.clear();
    for p in body.particles_mut() {
        let accel = p.force / p.mass;
        p.d_position = p.velocity;
        p.d_velocity = accel;
        out.0.extend_from_slice(&p.velocity.as_slice()[..dim]);
        out.0.extend_from_slice(&accel.as_slice()[..dim]);
    }
    Ok(report)
}

/// `y' = A(y)` for the body at `state`.
pub fn derivative(
    body: &mut LayeredBody,
    cfg: &SimConfig,
    drag: Option<&DragState>,
    state: &StateVector,
) -> Result<StateVector> {
    let mut out = StateVector::default();
    let mut evals = 0;
    evaluate(body, cfg, drag, state, &mut out, &mut evals)?;
    Ok(out)
}

fn check_step(h: f64) -> Result<()> {
    if h > 0.0 && h.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!("time step must be positive, got {h}")))
    }
}

fn finish(body: &mut LayeredBody, y: &StateVector, forces: ForceReport) -> Result<StepReport> {
    y.unpack_into(body)?;
    Ok(StepReport {
        forces,
        diverged: !y.is_finite(),
    })
}

pub fn step_euler(
    body: &mut LayeredBody,
    cfg: &SimConfig,
    drag: Option<&DragState>,
    h: f64,
    s: &mut StageScratch,
) -> Result<StepReport> {
    check_step(h)?;
    s.y0 = StateVector::pack(body);
    let forces = evaluate(body, cfg, drag, &s.y0, &mut s.k1, &mut s.evaluations)?;
    s.probe.set_axpy(&s.y0, h, &s.k1);
    finish(body, &s.probe, forces)
}

pub fn step_midpoint(
    body: &mut LayeredBody,
    cfg: &SimConfig,
    drag: Option<&DragState>,
    h: f64,
    s: &mut StageScratch,
) -> Result<StepReport> {
    check_step(h)?;
    s.y0 = StateVector::pack(body);
    let mut forces = evaluate(body, cfg, drag, &s.y0, &mut s.k1, &mut s.evaluations)?;
    s.probe.set_axpy(&s.y0, h, &s.k1);
    forces.merge(&evaluate(body, cfg, drag, &s.probe, &mut s.k2, &mut s.evaluations)?);

    let half = 0.5 * h;
    for (((y, y0), k1), k2) in s.probe.0.iter_mut().zip(&s.y0.0).zip(&s.k1.0).zip(&s.k2.0) {
        *y = y0 + half * (k1 + k2);
    }
    finish(body, &s.probe, forces)
}

pub fn step_rk4(
    body: &mut LayeredBody,
    cfg: &SimConfig,
    drag: Option<&DragState>,
    h: f64,
    s: &mut StageScratch,
) -> Result<StepReport> {
    check_step(h)?;
    s.y0 = StateVector::pack(body);
    let mut forces = evaluate(body, cfg, drag, &s.y0, &mut s.k1, &mut s.evaluations)?;
    s.probe.set_axpy(&s.y0, 0.5 * h, &s.k1);
    forces.merge(&evaluate(body, cfg, drag, &s.probe, &mut s.k2, &mut s.evaluations)?);
    s.probe.set_axpy(&s.y0, 0.5 * h, &s.k2);
    forces.merge(&evaluate(body, cfg, drag, &s.probe, &mut s.k3, &mut s.evaluations)?);
    s.probe.set_axpy(&s.y0, h, &s.k3);
    forces.merge(&evaluate(body, cfg, drag, &s.probe, &mut s.k4, &mut s.evaluations)?);

    let sixth = h / 6.0;
    s.probe.0.clear();
    for i in 0..s.y0.len() {
        let slope = s.k1.0[i] + 2.0 * s.k2.0[i] + 2.0 * s.k3.0[i] + s.k4.0[i];
        s.probe.0.push(s.y0.0[i] + sixth * slope);
    }
    finish(body, &s.probe, forces)
}

pub fn step(
    kind: IntegratorKind,
    body: &mut LayeredBody,
    cfg: &SimConfig,
    drag: Option<&DragState>,
    h: f64,
    scratch: &mut StageScratch,
) -> Result<StepReport> {
    match kind {
        IntegratorKind::Euler => step_euler(body, cfg, drag, h, scratch),
        IntegratorKind::Midpoint => step_midpoint(body, cfg, drag, h, scratch),
        IntegratorKind::Rk4 => step_rk4(body, cfg, drag, h, scratch),
    }
}

/// Reference problems with closed-form solutions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TestSystem {
    /// Two unit masses on an undamped spring, separation oscillating with
    /// period 1 s and amplitude 0.1 m.
    Oscillator,
    /// Two unconnected unit masses falling under g = 9.8.
    Freefall,
}

impl FromStr for TestSystem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "oscillator" => Ok(TestSystem::Oscillator),
            "freefall" => Ok(TestSystem::Freefall),
            other => Err(Error::Config(format!("unknown test system '{other}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AccuracyRow {
    pub integrator: IntegratorKind,
    pub h: f64,
    pub steps: usize,
    pub error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AccuracyTable {
    pub system: TestSystem,
    pub final_time: f64,
    pub rows: Vec<AccuracyRow>,
    /// Least-squares slope of log(error) against log(h). `None` when the
    /// method is exact on the system (every error at round-off level).
    pub orders: Vec<(IntegratorKind, Option<f64>)>,
}

const OSC_AMPLITUDE: f64 = 0.1;
const OSC_OMEGA: f64 = std::f64::consts::TAU;
const FREEFALL_G: f64 = 9.8;
pub const ACCURACY_FINAL_TIME: f64 = 1.0;

fn test_body(system: TestSystem) -> Result<(LayeredBody, SimConfig)> {
    let cfg = SimConfig {
        pressure_nrt: 0.0,
        g: match system {
            TestSystem::Oscillator => 0.0,
            TestSystem::Freefall => FREEFALL_G,
        },
        ..SimConfig::default()
    };
    let body = match system {
        TestSystem::Oscillator => {
            // relative coordinate: reduced mass 1/2, so omega^2 = 2 ks / m
            let ks = OSC_OMEGA * OSC_OMEGA / 2.0;
            let mut b = build_1d(Vec3::zeros(), Vec3::new(0.0, 1.0, 0.0), 1.0, ks, 0.0)?;
            b.particles_mut()[1].position.y += OSC_AMPLITUDE;
            b
        }
        TestSystem::Freefall => build_1d(Vec3::zeros(), Vec3::new(1.0, 0.0, 0.0), 1.0, 0.0, 0.0)?,
    };
    Ok((body, cfg))
}

/// Global error at `t` against the closed-form solution.
fn exact_error(system: TestSystem, body: &LayeredBody, t: f64) -> f64 {
    let p = body.particles();
    match system {
        TestSystem::Oscillator => {
            let sep = p[1].position.y - p[0].position.y;
            let rate = p[1].velocity.y - p[0].velocity.y;
            let sep_exact = 1.0 + OSC_AMPLITUDE * (OSC_OMEGA * t).cos();
            let rate_exact = -OSC_AMPLITUDE * OSC_OMEGA * (OSC_OMEGA * t).sin();
            ((sep - sep_exact).powi(2) + ((rate - rate_exact) / OSC_OMEGA).powi(2)).sqrt()
        }
        TestSystem::Freefall => {
            let y_exact = -0.5 * FREEFALL_G * t * t;
            let v_exact = -FREEFALL_G * t;
            ((p[0].position.y - y_exact).powi(2) + (p[0].velocity.y - v_exact).powi(2)).sqrt()
        }
    }
}

/// Integrates the test system to [`ACCURACY_FINAL_TIME`] with every step size
/// and reports the global error plus the fitted convergence order.
pub fn order_of_accuracy(system: TestSystem, kinds: &[IntegratorKind], h_list: &[f64]) -> Result<AccuracyTable> {
    let mut rows = Vec::new();
    let mut orders = Vec::new();
    for &kind in kinds {
        let mut points = Vec::new();
        for &h in h_list {
            check_step(h)?;
            let steps = (ACCURACY_FINAL_TIME / h).round() as usize;
            if steps == 0 || ((steps as f64) * h - ACCURACY_FINAL_TIME).abs() > 1e-9 {
                return Err(Error::Config(format!("step {h} does not divide the final time")));
            }
            let (mut body, cfg) = test_body(system)?;
            let mut scratch = StageScratch::default();
            for _ in 0..steps {
                step(kind, &mut body, &cfg, None, h, &mut scratch)?;
            }
            let error = exact_error(system, &body, steps as f64 * h);
            rows.push(AccuracyRow { integrator: kind, h, steps, error });
            points.push((h, error));
        }
        orders.push((kind, fit_order(&points)));
    }
    Ok(AccuracyTable {
        system,
        final_time: ACCURACY_FINAL_TIME,
        rows,
        orders,
    })
}

fn fit_order(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 || points.iter().all(|&(_, e)| e < 1e-12) {
        return None;
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|&(h, e)| (h.ln(), e.ln())).collect();
    let n = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Some(sxy / sxx)
}

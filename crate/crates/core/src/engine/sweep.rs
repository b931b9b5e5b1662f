use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{BodySpec, SimConfig, Simulation};
use crate::integrate::IntegratorKind;
use crate::Result;

/// The three step sizes of the reference stability figures.
pub const DEFAULT_SWEEP_DTS: [f64; 3] = [0.003, 0.03, 0.3];

/// Level-1 two-layer octahedron sphere (radii 1.5 and 2) held 5 m above the
/// origin, so it falls onto the floor of the default world box.
pub fn default_sweep_body() -> BodySpec {
    BodySpec::sphere_octa(1, 1.5, 2.0).centered_at([0.0, 5.0, 0.0])
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub dt: f64,
    pub integrator: IntegratorKind,
    pub steps: u64,
    pub survived: bool,
    pub steps_to_divergence: Option<u64>,
}

/// Runs every `dt × integrator` pair for `steps` steps from the same
/// initial state. Cells run in parallel; the result is ordered by `dt`
/// first, then by integrator, as given.
pub fn stability_sweep(
    spec: &BodySpec,
    cfg: &SimConfig,
    dts: &[f64],
    integrators: &[IntegratorKind],
    steps: u64,
) -> Result<Vec<SweepCell>> {
    let mut configs = Vec::new();
    for &dt in dts {
        for &integrator in integrators {
            let c = SimConfig {
                dt,
                integrator,
                ..cfg.clone()
            };
            c.validate()?;
            configs.push(c);
        }
    }
    spec.build(cfg)?;

    configs
        .into_par_iter()
        .map(|c| {
            let (dt, integrator) = (c.dt, c.integrator);
            let mut sim = Simulation::new(spec.clone(), c)?;
            while sim.step_index() < steps && !sim.diverged() {
                sim.advance()?;
            }
            Ok(SweepCell {
                dt,
                integrator,
                steps,
                survived: !sim.diverged(),
                steps_to_divergence: sim.diverged().then(|| sim.step_index()),
            })
        })
        .collect()
}

pub fn sweep_csv(cells: &[SweepCell]) -> String {
    let mut out = String::from("dt,integrator,steps,survived,steps_to_divergence\n");
    for c in cells {
        let failed_at = c.steps_to_divergence.map(|s| s.to_string()).unwrap_or_default();
        out.push_str(&format!("{},{},{},{},{}\n", c.dt, c.integrator, c.steps, c.survived, failed_at));
    }
    out
}

/// Whether survival is nested Euler ⊆ Midpoint ⊆ RK4 at every step size
/// where all three were run.
pub fn is_nested(cells: &[SweepCell]) -> bool {
    let survived = |dt: f64, kind| {
        cells
            .iter()
            .find(|c| c.dt == dt && c.integrator == kind)
            .map(|c| c.survived)
    };
    cells.iter().all(|c| {
        let e = survived(c.dt, IntegratorKind::Euler);
        let m = survived(c.dt, IntegratorKind::Midpoint);
        let r = survived(c.dt, IntegratorKind::Rk4);
        match (e, m, r) {
            (Some(e), Some(m), Some(r)) => (!e || m) && (!m || r),
            _ => true,
        }
    })
}

//! The gas term on its own and together with the springs.
//!
//! With every spring constant at zero the ring only feels `P = nrt / V` and
//! keeps inflating. With the default springs it swells to an equilibrium and
//! the volume oscillation dies out.

use squish::engine::{BodySpec, SimConfig, Simulation};

fn trace(label: &str, cfg: SimConfig) -> squish::Result<()> {
    let mut sim = Simulation::new(BodySpec::ring2d(12, 1.5, 2.0), cfg)?;
    println!("{label}");
    println!("  {:>6} {:>12} {:>12}", "step", "outer area", "inner area");
    for _ in 0..10 {
        for _ in 0..100 {
            sim.advance()?;
        }
        let m = sim.metrics();
        println!("  {:>6} {:>12.6} {:>12.6}", m.step, m.volume_outer, m.volume_inner);
    }
    Ok(())
}

fn main() -> squish::Result<()> {
    let base = SimConfig {
        g: 0.0,
        ..SimConfig::default()
    };
    trace(
        "gas only (ks = kd = rks = rkd = 0):",
        SimConfig {
            ks: 0.0,
            kd: 0.0,
            rks: 0.0,
            rkd: 0.0,
            ..base.clone()
        },
    )?;
    trace("\ngas and springs (defaults, no gravity):", base)
}

//! Grabs the outer particle nearest to a point and pulls it upward with the
//! mouse spring, the way the interactive viewer does.

use squish::engine::{BodySpec, SimConfig, Simulation};
use squish::Vec3;

fn main() -> squish::Result<()> {
    let mut sim = Simulation::new(BodySpec::ring2d(12, 1.5, 2.0), SimConfig::default())?;
    let target = sim.drag_start(Vec3::new(0.0, 2.5, 0.0))?;
    println!("grabbed particle {target}");

    for frame in 0..10 {
        let anchor = Vec3::new(0.0, 2.5 + 0.3 * frame as f64, 0.0);
        sim.drag_move(anchor)?;
        for _ in 0..10 {
            sim.advance()?;
        }
        let p = &sim.body().particles()[target];
        println!(
            "anchor y {:5.2}  particle y {:7.4}  vy {:7.3}",
            anchor.y, p.position.y, p.velocity.y
        );
    }

    sim.drag_end();
    for _ in 0..500 {
        sim.advance()?;
    }
    println!("released; particle y after 1.5 s: {:.4}", sim.body().particles()[target].position.y);
    Ok(())
}

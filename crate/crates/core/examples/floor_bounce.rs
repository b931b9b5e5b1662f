//! Drops a ring onto the floor of the world box and reports wall contacts,
//! height and kinetic energy as it bounces and comes to rest.
//!
//! `cargo run --example floor_bounce -- [restitution] [friction]`

use squish::engine::{BodySpec, SimConfig, Simulation};

fn main() -> squish::Result<()> {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<f64>());
    let restitution = args.next().transpose().ok().flatten().unwrap_or(0.5);
    let friction = args.next().transpose().ok().flatten().unwrap_or(0.9);

    let cfg = SimConfig {
        restitution,
        friction,
        ..SimConfig::default()
    };
    let floor = cfg.world_min[1];
    let mut sim = Simulation::new(BodySpec::ring2d(16, 1.5, 2.0).centered_at([0.0, 6.0, 0.0]), cfg)?;

    println!("e = {restitution}, f = {friction}, floor at y = {floor}");
    let mut contacts = 0;
    for frame in 1..=20 {
        for _ in 0..100 {
            contacts += sim.advance()?.collisions;
        }
        let lowest = sim
            .body()
            .outer_points()
            .iter()
            .map(|p| p.position.y)
            .fold(f64::INFINITY, f64::min);
        println!(
            "t = {:5.2} s  lowest y {:8.4}  ke {:9.4}  contacts so far {contacts}",
            sim.time(),
            lowest,
            sim.metrics().ke,
        );
        assert!(lowest >= floor - cfg_eps(), "frame {frame} penetrated the floor");
    }
    Ok(())
}

fn cfg_eps() -> f64 {
    SimConfig::default().surface_epsilon
}

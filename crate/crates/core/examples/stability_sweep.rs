//! Drops a level-1 two-layer sphere under gravity at three time steps with
//! every integrator and reports which runs stay bounded.
//!
//! `cargo run --release --example stability_sweep -- [steps]`

use std::time::Instant;

use squish::engine::{default_sweep_body, is_nested, stability_sweep, SimConfig, DEFAULT_SWEEP_DTS};
use squish::integrate::IntegratorKind;

fn main() -> squish::Result<()> {
    let steps = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(5000);
    let start = Instant::now();
    let cells = stability_sweep(
        &default_sweep_body(),
        &SimConfig::default(),
        &DEFAULT_SWEEP_DTS,
        &IntegratorKind::ALL,
        steps,
    )?;
    println!("{:>8} {:>9} result", "dt", "method");
    for c in &cells {
        let result = match c.steps_to_divergence {
            Some(s) => format!("diverged at step {s}"),
            None => "survived".to_string(),
        };
        println!("{:>8} {:>9} {result}", c.dt, c.integrator);
    }
    println!("nested: {}  ({:.2?})", is_nested(&cells), start.elapsed());
    Ok(())
}

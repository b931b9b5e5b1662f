//! Global error of Euler, Midpoint and RK4 on a spring oscillator with a
//! known solution, and the convergence order fitted to it.

use squish::integrate::{order_of_accuracy, IntegratorKind, TestSystem};

fn main() -> squish::Result<()> {
    let hs = [0.02, 0.01, 0.005, 0.0025];
    for system in [TestSystem::Oscillator, TestSystem::Freefall] {
        let table = order_of_accuracy(system, &IntegratorKind::ALL, &hs)?;
        println!("{system:?} at t = {}", table.final_time);
        for row in &table.rows {
            println!("  {:9} h = {:<7} error {:.3e}", row.integrator, row.h, row.error);
        }
        for (kind, order) in &table.orders {
            match order {
                Some(p) => println!("  {kind:9} order {p:.3}"),
                None => println!("  {kind:9} exact to round-off"),
            }
        }
        println!();
    }
    Ok(())
}

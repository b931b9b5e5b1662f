//! Replays a scenario script and writes the snapshot stream (one JSON object
//! per line) to stdout and the metrics table to stderr.
//!
//! `cargo run --example run_scenario -- [scenario.json]`
//!
//! Without an argument a built-in script is used: a sphere dropped onto the
//! floor, grabbed and pulled sideways for a moment.

use std::io::Write;

use squish::engine::{metrics_csv, run, ScenarioScript};

const BUILT_IN: &str = r#"{
    "body": {"kind": "sphere_octa", "params": {"iterations": 1, "center": [0, 2, 0]}},
    "config": {"dt": 0.003, "integrator": "rk4"},
    "events": [
        {"step": 400, "type": "drag_start", "payload": {"x": 2, "y": 0, "z": 0}},
        {"step": 410, "type": "drag_move", "payload": {"x": 4, "y": 1, "z": 0}},
        {"step": 600, "type": "drag_end"}
    ],
    "steps": 1000,
    "snapshot_every": 100
}"#;

fn main() -> squish::Result<()> {
    let text = match std::env::args().nth(1) {
        Some(path) => std::fs::read_to_string(path).map_err(|e| squish::Error::Scenario(e.to_string()))?,
        None => BUILT_IN.to_string(),
    };
    let script = ScenarioScript::from_json_str(&text)?;

    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let summary = run(&script, |snap| {
        out.write_all(snap.to_json_line().as_bytes())
            .map_err(|e| squish::Error::Scenario(e.to_string()))
    })?;

    let every = script.snapshot_every as usize;
    let sampled: Vec<_> = summary.metrics.iter().step_by(every).collect();
    eprint!("{}", metrics_csv(sampled));
    eprintln!(
        "{} steps, {} snapshots, diverged: {}",
        summary.steps_run, summary.snapshots, summary.diverged
    );
    Ok(())
}

//! The shared simulation behind the interactive service, free of any I/O so
//! it can be driven directly in tests.

use std::time::Duration;

use squish::engine::{BodySpec, SimConfig, Simulation};
use squish::integrate::IntegratorKind;
use squish::Vec3;

use crate::protocol::{ClientMessage, Level, ServerFrame};

/// Upper bound on steps per frame. When the simulation cannot keep up with
/// wall time it slows down instead of piling up work.
pub const MAX_STEPS_PER_FRAME: u32 = 200;

/// What handling one client message produced.
#[derive(Debug, Default)]
pub struct Outcome {
    /// Frames for the client that sent the message.
    pub reply: Vec<ServerFrame>,
    /// Frames for every client. Non-empty only when the body was rebuilt.
    pub broadcast: Vec<ServerFrame>,
}

pub struct Session {
    sim: Simulation,
    owed: f64,
    divergence_reported: bool,
}

impl Session {
    pub fn new(body: BodySpec, cfg: SimConfig) -> squish::Result<Self> {
        Ok(Session {
            sim: Simulation::new(body, cfg)?,
            owed: 0.0,
            divergence_reported: false,
        })
    }

    pub fn simulation(&self) -> &Simulation {
        &self.sim
    }

    pub fn topology(&self) -> ServerFrame {
        ServerFrame::Topology(self.sim.topology())
    }

    pub fn snapshot(&self) -> ServerFrame {
        ServerFrame::Snapshot(self.sim.snapshot())
    }

    pub fn handle(&mut self, msg: ClientMessage) -> Outcome {
        let mut out = Outcome::default();
        match msg {
            ClientMessage::DragStart { x, y, z } => match self.sim.drag_start(Vec3::new(x, y, z)) {
                Ok(target) => out.reply.push(ServerFrame::event(Level::Info, format!("dragging particle {target}"))),
                Err(e) => out.reply.push(ServerFrame::rejected(e)),
            },
            ClientMessage::DragMove { x, y, z } => {
                if let Err(e) = self.sim.drag_move(Vec3::new(x, y, z)) {
                    out.reply.push(ServerFrame::rejected(e));
                }
            }
            ClientMessage::DragEnd {} => self.sim.drag_end(),
            ClientMessage::SetParam { key, value } => match self.sim.set_param(&key, value) {
                Ok(()) => out.reply.push(ServerFrame::event(Level::Info, format!("{key} = {value}"))),
                Err(e) => out.reply.push(ServerFrame::rejected(e)),
            },
            ClientMessage::SetIntegrator { kind } => match kind.parse::<IntegratorKind>() {
                Ok(kind) => {
                    self.sim.set_integrator(kind);
                    out.reply.push(ServerFrame::event(Level::Info, format!("integrator = {kind}")));
                }
                Err(e) => out.reply.push(ServerFrame::rejected(e)),
            },
            ClientMessage::SelectBody { kind, params } => {
                match BodySpec::from_kind(&kind, params).and_then(|spec| self.sim.rebuild(spec)) {
                    Ok(()) => {
                        self.owed = 0.0;
                        self.divergence_reported = false;
                        out.broadcast.push(self.topology());
                        out.broadcast.push(self.snapshot());
                    }
                    Err(e) => out.reply.push(ServerFrame::rejected(e)),
                }
            }
        }
        out
    }

    /// Advances by as many steps as fit in `elapsed` of simulated time,
    /// carrying the remainder to the next frame. Returns the frames to
    /// broadcast: a snapshot if any step was taken, plus a one-off event
    /// when the body diverges.
    pub fn frame(&mut self, elapsed: Duration) -> Vec<ServerFrame> {
        if self.sim.diverged() {
            return Vec::new();
        }
        let dt = self.sim.config().dt;
        self.owed += elapsed.as_secs_f64();
        let mut steps = 0;
        while self.owed >= dt && steps < MAX_STEPS_PER_FRAME {
            self.owed -= dt;
            steps += 1;
            if self.sim.advance().is_err() || self.sim.diverged() {
                break;
            }
        }
        if steps == MAX_STEPS_PER_FRAME {
            self.owed = self.owed.min(dt);
        }
        let mut frames = Vec::new();
        if steps > 0 {
            frames.push(self.snapshot());
        }
        if self.sim.diverged() && !self.divergence_reported {
            self.divergence_reported = true;
            frames.push(ServerFrame::event(
                Level::Error,
                format!("diverged at step {}; select a body to restart", self.sim.step_index()),
            ));
        }
        frames
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn session() -> Session {
        Session::new(BodySpec::ring2d(12, 1.5, 2.0), SimConfig::default()).unwrap()
    }

    fn text(frame: &ServerFrame) -> &str {
        match frame {
            ServerFrame::Event { text, .. } => text,
            _ => "",
        }
    }

    #[test]
    fn frames_follow_wall_time() {
        let mut s = session();
        let dt = s.simulation().config().dt;
        assert!(s.frame(Duration::from_secs_f64(dt * 0.5)).is_empty());
        let frames = s.frame(Duration::from_secs_f64(dt * 10.0));
        assert_eq!(frames.len(), 1);
        assert_eq!(s.simulation().step_index(), 10);
        s.frame(Duration::from_secs(60));
        assert_eq!(s.simulation().step_index(), 10 + MAX_STEPS_PER_FRAME as u64);
    }

    #[test]
    fn rejected_parameter_leaves_config_alone() {
        let mut s = session();
        let before = s.simulation().config().clone();
        let out = s.handle(ClientMessage::SetParam { key: "ks".into(), value: -1.0 });
        assert!(text(&out.reply[0]).starts_with("rejected"));
        assert!(out.broadcast.is_empty());
        assert_eq!(s.simulation().config(), &before);

        let out = s.handle(ClientMessage::SetParam { key: "ks".into(), value: 500.0 });
        assert_eq!(text(&out.reply[0]), "ks = 500");
        assert_eq!(s.simulation().config().ks, 500.0);
    }

    #[test]
    fn select_body_rebuilds_and_broadcasts_topology() {
        let mut s = session();
        s.frame(Duration::from_secs_f64(0.1));
        let out = s.handle(ClientMessage::SelectBody {
            kind: "sphere_octa".into(),
            params: serde_json::json!({"iterations": 1}),
        });
        assert!(matches!(out.broadcast[0], ServerFrame::Topology(_)));
        assert!(matches!(out.broadcast[1], ServerFrame::Snapshot(ref snap) if snap.step == 0));
        assert_eq!(s.simulation().body().len(), 36);

        let out = s.handle(ClientMessage::SelectBody { kind: "torus".into(), params: serde_json::Value::Null });
        assert!(text(&out.reply[0]).starts_with("rejected"));
        assert_eq!(s.simulation().body().len(), 36);
    }

    #[test]
    fn unknown_integrator_is_rejected() {
        let mut s = session();
        let out = s.handle(ClientMessage::SetIntegrator { kind: "leapfrog".into() });
        assert!(text(&out.reply[0]).starts_with("rejected"));
        let out = s.handle(ClientMessage::SetIntegrator { kind: "euler".into() });
        assert_eq!(text(&out.reply[0]), "integrator = euler");
        assert_eq!(s.simulation().config().integrator, IntegratorKind::Euler);
    }

    #[test]
    fn divergence_is_reported_once_and_stops_the_clock() {
        let cfg = SimConfig {
            dt: 0.3,
            integrator: IntegratorKind::Euler,
            ..SimConfig::default()
        };
        let mut s = Session::new(BodySpec::ring2d(12, 1.5, 2.0), cfg).unwrap();
        let mut reports = 0;
        for _ in 0..200 {
            reports += s.frame(Duration::from_secs(3)).iter().filter(|f| text(f).starts_with("diverged")).count();
        }
        assert_eq!(reports, 1);
        let step = s.simulation().step_index();
        assert!(s.frame(Duration::from_secs(3)).is_empty());
        assert_eq!(s.simulation().step_index(), step);
    }
}

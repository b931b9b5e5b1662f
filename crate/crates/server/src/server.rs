//! HTTP and WebSocket front end: `GET /health` and `/ws`.
//!
//! One simulation thread owns the [`Session`]. Connection tasks push client
//! messages into an input queue that the thread drains between steps, and
//! read frames from a broadcast channel. The latest topology and snapshot
//! sit in a watch channel so a new client can start from them.

use std::future::Future;
use std::net::SocketAddr;
use std::sync::Arc;
use std::thread;
use std::time::{Duration, Instant};

use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::State;
use axum::response::Response;
use axum::routing::get;
use axum::{Json, Router};
use futures::{SinkExt, StreamExt};
use serde_json::{json, Value};
use squish::engine::{BodySpec, SimConfig};
use tokio::net::TcpListener;
use tokio::sync::{broadcast, mpsc, watch};

use crate::protocol::{parse_client, ClientMessage, ServerFrame};
use crate::session::Session;

pub const DEFAULT_FRAME_RATE: f64 = 60.0;

#[derive(Clone, Debug)]
pub struct ServeOptions {
    pub body: BodySpec,
    pub config: SimConfig,
    /// Snapshots broadcast per second of wall time.
    pub frame_rate: f64,
}

impl Default for ServeOptions {
    fn default() -> Self {
        ServeOptions {
            body: BodySpec::ring2d(12, 1.5, 2.0),
            config: SimConfig::default(),
            frame_rate: DEFAULT_FRAME_RATE,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Kind {
    Topology,
    Snapshot(u64),
    Event,
}

/// A serialised frame tagged with the body generation it belongs to. The
/// generation goes up every time the body is rebuilt.
#[derive(Clone, Debug)]
struct Outgoing {
    generation: u64,
    kind: Kind,
    text: Arc<str>,
}

#[derive(Clone, Debug)]
struct Latest {
    generation: u64,
    step: u64,
    topology: Arc<str>,
    snapshot: Arc<str>,
}

struct Input {
    msg: ClientMessage,
    reply: mpsc::UnboundedSender<Arc<str>>,
}

#[derive(Clone)]
struct AppState {
    inputs: mpsc::UnboundedSender<Input>,
    frames: broadcast::Sender<Outgoing>,
    latest: watch::Receiver<Latest>,
}

fn text_of(frame: &ServerFrame) -> Arc<str> {
    frame.to_text().into()
}

struct Loop {
    session: Session,
    generation: u64,
    frames: broadcast::Sender<Outgoing>,
    latest: watch::Sender<Latest>,
}

impl Loop {
    fn publish(&mut self, frame: ServerFrame) {
        let text = text_of(&frame);
        let kind = match &frame {
            ServerFrame::Topology(_) => {
                self.generation += 1;
                let topology = text.clone();
                let generation = self.generation;
                self.latest.send_modify(|l| {
                    l.generation = generation;
                    l.topology = topology;
                });
                Kind::Topology
            }
            ServerFrame::Snapshot(snap) => {
                let (snapshot, step) = (text.clone(), snap.step);
                self.latest.send_modify(|l| {
                    l.snapshot = snapshot;
                    l.step = step;
                });
                Kind::Snapshot(step)
            }
            ServerFrame::Event { .. } => Kind::Event,
        };
        // No subscribers is fine: frames are only for whoever is connected.
        let _ = self.frames.send(Outgoing {
            generation: self.generation,
            kind,
            text,
        });
    }

    fn run(mut self, mut inputs: mpsc::UnboundedReceiver<Input>, frame_rate: f64) {
        let period = Duration::from_secs_f64(1.0 / frame_rate);
        let mut last = Instant::now();
        let mut deadline = last + period;
        loop {
            loop {
                match inputs.try_recv() {
                    Ok(input) => {
                        let out = self.session.handle(input.msg);
                        for frame in &out.reply {
                            let _ = input.reply.send(text_of(frame));
                        }
                        for frame in out.broadcast {
                            self.publish(frame);
                        }
                    }
                    Err(mpsc::error::TryRecvError::Empty) => break,
                    Err(mpsc::error::TryRecvError::Disconnected) => return,
                }
            }
            let now = Instant::now();
            for frame in self.session.frame(now - last) {
                self.publish(frame);
            }
            last = now;

            let now = Instant::now();
            if deadline > now {
                thread::sleep(deadline - now);
                deadline += period;
            } else {
                deadline = now + period;
            }
        }
    }
}

/// Builds the router and starts the simulation thread. The thread stops
/// once the router and every connection have been dropped.
pub fn app(opts: ServeOptions) -> anyhow::Result<Router> {
    anyhow::ensure!(
        opts.frame_rate.is_finite() && opts.frame_rate > 0.0,
        "frame rate must be positive"
    );
    let session = Session::new(opts.body, opts.config)?;
    let (inputs_tx, inputs_rx) = mpsc::unbounded_channel();
    let (frames_tx, _) = broadcast::channel(256);
    let (latest_tx, latest_rx) = watch::channel(Latest {
        generation: 0,
        step: session.simulation().step_index(),
        topology: text_of(&session.topology()),
        snapshot: text_of(&session.snapshot()),
    });
    let sim_loop = Loop {
        session,
        generation: 0,
        frames: frames_tx.clone(),
        latest: latest_tx,
    };
    let frame_rate = opts.frame_rate;
    thread::Builder::new()
        .name("squish-sim".into())
        .spawn(move || sim_loop.run(inputs_rx, frame_rate))?;

    let state = AppState {
        inputs: inputs_tx,
        frames: frames_tx,
        latest: latest_rx,
    };
    Ok(Router::new()
        .route("/health", get(health))
        .route("/ws", get(ws_upgrade))
        .with_state(state))
}

/// Serves on `listener` until `shutdown` resolves.
pub async fn serve_on(
    listener: TcpListener,
    opts: ServeOptions,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> anyhow::Result<()> {
    let router = app(opts)?;
    axum::serve(listener, router).with_graceful_shutdown(shutdown).await?;
    Ok(())
}

/// Binds `addr` and serves until Ctrl-C.
pub async fn serve(addr: SocketAddr, opts: ServeOptions) -> anyhow::Result<()> {
    let listener = TcpListener::bind(addr).await?;
    tracing::info!("listening on http://{}", listener.local_addr()?);
    serve_on(listener, opts, async {
        let _ = tokio::signal::ctrl_c().await;
    })
    .await
}

async fn health() -> Json<Value> {
    Json(json!({"ok": true}))
}

async fn ws_upgrade(ws: WebSocketUpgrade, State(state): State<AppState>) -> Response {
    ws.on_upgrade(move |socket| connection(socket, state))
}

async fn connection(socket: WebSocket, state: AppState) {
    let (mut sink, mut stream) = socket.split();
    // Subscribe before reading the latest state so nothing published in
    // between is missed.
    let mut frames = state.frames.subscribe();
    let latest = state.latest.borrow().clone();
    let (reply_tx, mut replies) = mpsc::unbounded_channel::<Arc<str>>();

    let mut generation = latest.generation;
    let mut last_step = Some(latest.step);
    for text in [&latest.topology, &latest.snapshot] {
        if sink.send(Message::Text(text.to_string())).await.is_err() {
            return;
        }
    }

    loop {
        let text: Arc<str> = tokio::select! {
            incoming = stream.next() => match incoming {
                Some(Ok(Message::Text(text))) => match parse_client(&text) {
                    Ok(msg) => {
                        if state.inputs.send(Input { msg, reply: reply_tx.clone() }).is_err() {
                            break;
                        }
                        continue;
                    }
                    Err(frame) => text_of(&frame),
                },
                Some(Ok(Message::Binary(_))) => text_of(&ServerFrame::parse_error("binary frames are not accepted")),
                Some(Ok(Message::Close(_))) | Some(Err(_)) | None => break,
                Some(Ok(_)) => continue,
            },
            reply = replies.recv() => match reply {
                Some(text) => text,
                None => continue,
            },
            outgoing = frames.recv() => match outgoing {
                Ok(out) => {
                    if out.generation < generation {
                        continue;
                    }
                    if out.generation > generation && out.kind != Kind::Topology {
                        // the rebuild's topology frame was lost to lag
                        let topology = state.latest.borrow().topology.clone();
                        if sink.send(Message::Text(topology.to_string())).await.is_err() {
                            break;
                        }
                        generation = out.generation;
                        last_step = None;
                    }
                    match out.kind {
                        Kind::Topology if out.generation == generation => continue,
                        Kind::Topology => {
                            generation = out.generation;
                            last_step = None;
                        }
                        Kind::Snapshot(step) => {
                            if last_step.is_some_and(|last| step <= last) {
                                continue;
                            }
                            last_step = Some(step);
                        }
                        Kind::Event => {}
                    }
                    out.text
                }
                Err(broadcast::error::RecvError::Lagged(skipped)) => {
                    tracing::debug!("client lagged by {skipped} frames");
                    continue;
                }
                Err(broadcast::error::RecvError::Closed) => break,
            },
        };
        if sink.send(Message::Text(text.to_string())).await.is_err() {
            break;
        }
    }
}

use std::net::SocketAddr;
use std::time::{Duration, Instant};

use futures::{SinkExt, StreamExt};
use serde_json::{json, Value};
use squish_server::server::{serve_on, ServeOptions};
use tokio::io::{AsyncReadExt, AsyncWriteExt};
use tokio::net::{TcpListener, TcpStream};
use tokio_tungstenite::tungstenite::Message;
use tokio_tungstenite::{connect_async, MaybeTlsStream, WebSocketStream};

type Ws = WebSocketStream<MaybeTlsStream<TcpStream>>;

async fn start() -> SocketAddr {
    let listener = TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    tokio::spawn(serve_on(listener, ServeOptions::default(), std::future::pending()));
    addr
}

async fn connect(addr: SocketAddr) -> Ws {
    connect_async(format!("ws://{addr}/ws")).await.unwrap().0
}

async fn next(ws: &mut Ws) -> Value {
    loop {
        let msg = tokio::time::timeout(Duration::from_secs(5), ws.next())
            .await
            .expect("frame within 5 s")
            .expect("socket open")
            .unwrap();
        if let Message::Text(text) = msg {
            return serde_json::from_str(&text).unwrap();
        }
    }
}

async fn next_of(ws: &mut Ws, kind: &str) -> Value {
    loop {
        let frame = next(ws).await;
        if frame["type"] == kind {
            return frame;
        }
    }
}

async fn send(ws: &mut Ws, value: Value) {
    ws.send(Message::Text(value.to_string())).await.unwrap();
}

fn position(snapshot: &Value, i: usize) -> Vec<f64> {
    snapshot["particles"][i]["pos"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c.as_f64().unwrap())
        .collect()
}

#[tokio::test(flavor = "multi_thread")]
async fn health_reports_ok() {
    let addr = start().await;
    let mut stream = TcpStream::connect(addr).await.unwrap();
    stream
        .write_all(b"GET /health HTTP/1.1\r\nHost: localhost\r\nConnection: close\r\n\r\n")
        .await
        .unwrap();
    let mut response = String::new();
    stream.read_to_string(&mut response).await.unwrap();
    assert!(response.starts_with("HTTP/1.1 200"), "{response}");
    let body = response.split("\r\n\r\n").nth(1).unwrap();
    assert_eq!(serde_json::from_str::<Value>(body).unwrap(), json!({"ok": true}));
}

#[tokio::test(flavor = "multi_thread")]
async fn connect_sends_topology_then_snapshot() {
    let addr = start().await;
    let mut ws = connect(addr).await;
    let topology = next(&mut ws).await;
    assert_eq!(topology["type"], "topology");
    assert_eq!(topology["dimension"], 2);
    assert_eq!(topology["particles"].as_array().unwrap().len(), 24);
    assert!(!topology["springs"].as_array().unwrap().is_empty());

    let snapshot = next(&mut ws).await;
    assert_eq!(snapshot["type"], "snapshot");
    assert_eq!(snapshot["particles"].as_array().unwrap().len(), 24);
}

#[tokio::test(flavor = "multi_thread")]
async fn snapshots_stream_at_thirty_per_second_with_rising_steps() {
    let addr = start().await;
    let mut ws = connect(addr).await;
    next_of(&mut ws, "snapshot").await;
    let start = Instant::now();
    let mut steps = Vec::new();
    while start.elapsed() < Duration::from_secs(1) {
        let frame = next(&mut ws).await;
        if frame["type"] == "snapshot" {
            steps.push(frame["step"].as_u64().unwrap());
        }
    }
    assert!(steps.len() >= 30, "{} snapshots in one second", steps.len());
    assert!(steps.windows(2).all(|w| w[1] > w[0]), "{steps:?}");
}

#[tokio::test(flavor = "multi_thread")]
async fn dragged_particle_moves_toward_the_anchor() {
    let addr = start().await;
    let mut ws = connect(addr).await;
    let snapshot = next_of(&mut ws, "snapshot").await;
    let n = snapshot["particles"].as_array().unwrap().len();
    let top = (n / 2..n)
        .max_by(|&a, &b| position(&snapshot, a)[1].total_cmp(&position(&snapshot, b)[1]))
        .unwrap();
    let p = position(&snapshot, top);

    send(&mut ws, json!({"type": "drag_start", "x": p[0], "y": p[1]})).await;
    let anchor = [p[0], p[1] + 3.0];
    send(&mut ws, json!({"type": "drag_move", "x": anchor[0], "y": anchor[1]})).await;

    // skip frames stepped before the anchor moved
    let mut frame = next_of(&mut ws, "snapshot").await;
    while frame["drag"]["anchor"][1].as_f64() != Some(anchor[1]) {
        frame = next_of(&mut ws, "snapshot").await;
    }
    assert_eq!(frame["drag"]["target"], top);

    let distance = |s: &Value| {
        let q = position(s, top);
        ((q[0] - anchor[0]).powi(2) + (q[1] - anchor[1]).powi(2)).sqrt()
    };
    let mut distances = vec![distance(&frame)];
    for _ in 0..10 {
        distances.push(distance(&next_of(&mut ws, "snapshot").await));
    }
    assert!(distances.windows(2).all(|w| w[1] < w[0]), "{distances:?}");

    send(&mut ws, json!({"type": "drag_end"})).await;
    loop {
        if next_of(&mut ws, "snapshot").await["drag"].is_null() {
            break;
        }
    }
}

#[tokio::test(flavor = "multi_thread")]
async fn bad_requests_get_events_and_the_socket_stays_open() {
    let addr = start().await;
    let mut ws = connect(addr).await;

    send(&mut ws, json!({"type": "set_param", "key": "ks", "value": -1})).await;
    assert!(next_of(&mut ws, "event").await["text"].as_str().unwrap().starts_with("rejected"));

    send(&mut ws, json!({"type": "warp", "speed": 9})).await;
    assert!(next_of(&mut ws, "event").await["text"].as_str().unwrap().starts_with("unknown_type"));

    ws.send(Message::Text("{not json".into())).await.unwrap();
    assert!(next_of(&mut ws, "event").await["text"].as_str().unwrap().starts_with("parse_error"));

    send(&mut ws, json!({"type": "set_integrator", "kind": "leapfrog"})).await;
    assert!(next_of(&mut ws, "event").await["text"].as_str().unwrap().starts_with("rejected"));

    send(&mut ws, json!({"type": "set_param", "key": "ks", "value": 900})).await;
    assert_eq!(next_of(&mut ws, "event").await["text"], "ks = 900");
    next_of(&mut ws, "snapshot").await;
}

#[tokio::test(flavor = "multi_thread")]
async fn select_body_resends_topology_to_everyone() {
    let addr = start().await;
    let mut a = connect(addr).await;
    let mut b = connect(addr).await;
    next_of(&mut a, "snapshot").await;
    next_of(&mut b, "snapshot").await;

    send(&mut a, json!({"type": "select_body", "kind": "sphere_octa", "params": {"iterations": 1}})).await;
    for ws in [&mut a, &mut b] {
        let topology = next_of(ws, "topology").await;
        assert_eq!(topology["dimension"], 3);
        assert_eq!(topology["particles"].as_array().unwrap().len(), 36);
        let snapshot = next(ws).await;
        assert_eq!(snapshot["type"], "snapshot");
        assert_eq!(snapshot["dimension"], 3);
    }
}

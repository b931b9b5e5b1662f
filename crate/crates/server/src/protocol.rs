//! JSON text frames exchanged over `/ws`. Every frame is one object with a
//! `type` field.

use serde::{Deserialize, Serialize};
use serde_json::Value;
use squish::engine::Snapshot;
use squish::export::MeshExport;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ClientMessage {
    DragStart {
        x: f64,
        y: f64,
        #[serde(default)]
        z: f64,
    },
    DragMove {
        x: f64,
        y: f64,
        #[serde(default)]
        z: f64,
    },
    DragEnd {},
    SetParam {
        key: String,
        value: f64,
    },
    SelectBody {
        kind: String,
        #[serde(default)]
        params: Value,
    },
    SetIntegrator {
        kind: String,
    },
}

const CLIENT_TYPES: &[&str] = &["drag_start", "drag_move", "drag_end", "set_param", "select_body", "set_integrator"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Info,
    Warn,
    Error,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ServerFrame {
    Snapshot(Snapshot),
    Topology(MeshExport),
    Event { level: Level, text: String },
}

impl ServerFrame {
    pub fn event(level: Level, text: impl Into<String>) -> Self {
        ServerFrame::Event {
            level,
            text: text.into(),
        }
    }

    /// Malformed frames: not JSON, not an object, or fields that do not fit
    /// the message type.
    pub fn parse_error(detail: impl std::fmt::Display) -> Self {
        Self::event(Level::Error, format!("parse_error: {detail}"))
    }

    /// Well-formed requests the simulation refused, such as an out of range
    /// parameter.
    pub fn rejected(detail: impl std::fmt::Display) -> Self {
        Self::event(Level::Warn, format!("rejected: {detail}"))
    }

    pub fn to_text(&self) -> String {
        serde_json::to_string(self).expect("server frames serialise")
    }
}

/// Parses one client text frame. Anything that is not a usable message
/// comes back as the event frame to send to that client.
pub fn parse_client(text: &str) -> Result<ClientMessage, ServerFrame> {
    let value: Value = serde_json::from_str(text).map_err(ServerFrame::parse_error)?;
    let Some(object) = value.as_object() else {
        return Err(ServerFrame::parse_error("frame must be a JSON object"));
    };
    let kind = match object.get("type") {
        Some(Value::String(kind)) => kind.clone(),
        Some(_) => return Err(ServerFrame::parse_error("\"type\" must be a string")),
        None => return Err(ServerFrame::parse_error("frame has no \"type\" field")),
    };
    if !CLIENT_TYPES.contains(&kind.as_str()) {
        return Err(ServerFrame::event(
            Level::Warn,
            format!("unknown_type: '{kind}' is not a client message type"),
        ));
    }
    serde_json::from_value(value).map_err(|e| ServerFrame::parse_error(format!("{kind}: {e}")))
}

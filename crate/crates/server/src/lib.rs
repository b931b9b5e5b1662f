//! WebSocket service and command-line front end for the `squish` engine.

pub mod cli;
pub mod protocol;
pub mod server;
pub mod session;

//! Two-layer soft body simulation built from particles, springs and an
//! internal gas pressure term.
//!
//! The crate is organised the way a simulation step flows:
//!
//! * [`mesh`] builds bodies: a 1D spring, a 2D two-layer ring and two
//!   flavours of 3D two-layer sphere.
//! * [`forces`] accumulates gravity, Hooke and damping forces, the mouse
//!   drag spring and the ideal-gas pressure term.
//! * [`integrate`] advances the packed state with Euler, Midpoint or RK4.
//! * [`collide`] keeps the outer layer inside a box of planes and the inner
//!   layer inside the outer one.
//! * [`engine`] ties everything into a deterministic step loop with
//!   scenario scripting, snapshots and stability sweeps.
//!
//! ```
//! use squish::engine::{BodySpec, SimConfig, Simulation};
//!
//! let cfg = SimConfig::default();
//! let mut sim = Simulation::new(BodySpec::ring2d(12, 1.5, 2.0), cfg).unwrap();
//! for _ in 0..10 {
//!     sim.step().unwrap();
//! }
//! assert!(!sim.diverged());
//! ```

pub mod collide;
pub mod engine;
mod error;
pub mod export;
pub mod forces;
pub mod integrate;
pub mod mesh;

pub use error::{Error, Result};

/// Every vector in the engine is stored in three components. Planar bodies
/// keep `z == 0` and only their first two components are packed or exported.
pub type Vec3 = nalgebra::Vector3<f64>;

/// The engine never reads an entropy source; all trajectories are a pure
/// function of the body, configuration and event script.
pub const USES_ENTROPY: bool = false;

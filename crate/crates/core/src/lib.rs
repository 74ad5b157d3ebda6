//! Cooperative vehicle-to-pedestrian (V2P) safety library.
//!
//! The library models the full pipeline of a DSRC-based V2P system:
//!
//! * [`geo`] — WGS84 geodetic → ECEF → ENU → vehicle-local coordinate transforms.
//! * [`messages`] — BSM/PSM safety messages with a compact, bit-exact wire codec.
//! * [`awareness`] — the per-device real-time map of neighbors plus tracking
//!   (path history and constant-turn-rate path prediction).
//! * [`safety`] — stopping-distance zone computation, straight/curved path
//!   projection, target classification, and graded collision warnings.
//! * [`channel`] — a deterministic discrete-event DSRC channel with EDCA-style
//!   contention, SINR-based reception, and PER/CBP metrics.
//! * [`policy`] — smartphone-side congestion control and power consumption
//!   control, with duty-cycle energy accounting.
//! * [`scenario`] — crash-scenario construction, the simulation loop binding
//!   all modules, and CSV trace/metric emission.
//!
//! Everything is deterministic for a fixed seed: running the same scenario
//! twice produces byte-identical outputs.

pub mod awareness;
pub mod channel;
pub mod geo;
pub mod messages;
pub mod policy;
pub mod safety;
pub mod scenario;

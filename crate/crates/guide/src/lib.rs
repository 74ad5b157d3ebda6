//! Runnable companion to the book under `book/`.
//!
//! Each chapter is included as module documentation, so `cargo test --doc`
//! compiles and runs every fenced Rust block in the book. A snippet that
//! drifts from the library API fails the build, which keeps the guide honest.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/coordinates.md")]
pub mod coordinates {}

#[doc = include_str!("../../../book/src/messages.md")]
pub mod messages {}

#[doc = include_str!("../../../book/src/awareness.md")]
pub mod awareness {}

#[doc = include_str!("../../../book/src/zones.md")]
pub mod zones {}

#[doc = include_str!("../../../book/src/channel.md")]
pub mod channel {}

#[doc = include_str!("../../../book/src/policy.md")]
pub mod policy {}

#[doc = include_str!("../../../book/src/scenarios.md")]
pub mod scenarios {}

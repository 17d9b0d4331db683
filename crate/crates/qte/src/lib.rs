//! Quantum tamper-evident encryption of classical messages, simulated at
//! desk scale: dense linear algebra, channels, schemes, the constructions
//! and attacks built on them, and a seeded audit harness.

pub mod error;
pub mod attacks;
pub mod auditctl;
pub mod channels;
pub mod constructions;
pub mod qmath;
pub mod schemes;

pub use error::{Error, Result};

//! Controllability and observability of complex networks.
//!
//! Structural driver nodes, cavity estimates, exact controllability, control
//! energy, sensor placement, steering of nonlinear systems and control of
//! collective behaviour. The `cli` module backs the `netctl` binary.

pub mod cavity;
pub mod cli;
pub mod collective;
pub mod energy;
pub mod error;
pub mod exact;
pub mod graph;
pub mod observability;
pub mod ode;
pub mod steering;
pub mod structural;

pub use error::{Error, Result};

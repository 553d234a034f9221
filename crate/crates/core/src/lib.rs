//! Secure multi-hop relay planning for space-air-ground-sea networks.
//!
//! * [`channel`]: geometry, link budgets, spectral efficiency.
//! * [`secrecy`]: SPSC probability against Poisson eavesdroppers.
//! * [`rrm`]: closed-form bandwidth and power allocation on a fixed tree.
//! * [`routing`]: feasible graphs and tree search (MCRR and baselines).
//! * [`testbed`]: layer defaults, node snapshots, random scenarios.

pub mod channel;
pub mod error;
pub mod numeric;
pub mod routing;
pub mod rrm;
pub mod secrecy;
pub mod testbed;

pub use error::{Error, Result};

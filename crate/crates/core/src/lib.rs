//! Dynamic server allocation: closed-form policy evaluation, optimal policies
//! by semi-Markov policy iteration, two-site routing, and a discrete-event
//! simulator used to cross-check all of it.

pub mod analytic;
pub mod error;
pub mod experiments;
pub mod model;
pub mod routing;
pub mod sim;
pub mod smdp;

pub use error::{Error, Result};
pub use model::{objective, HoldTimer, Metrics, PolicySpec, SystemParams};

//! Bounded renewal functions for a non-critical component (NC) whose
//! maintenance cycles stop when a critical component (CR) fails.
//!
//! Exact curves come from Volterra equation solvers on a uniform [`Grid`],
//! approximations from closed forms, and [`montecarlo`] provides an
//! independent simulation oracle for all four processes.

pub mod bounded;
pub mod distributions;
pub mod error;
pub mod montecarlo;
pub mod numerics;
pub mod renewal;
pub mod scenario;
pub mod special;

pub use bounded::{ProcessKind, ProcessSpec};
pub use distributions::{ConditionalLifetime, LifetimeModel, Quantity};
pub use error::{Error, Result};
pub use montecarlo::SimEstimate;
pub use numerics::{Curve, Grid};
pub use scenario::Scenario;

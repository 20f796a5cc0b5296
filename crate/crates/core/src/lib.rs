//! Data-driven steady-state gain identification and online gradient control
//! for discrete-time LTI systems.
//!
//! The crate is organized around a two-phase workflow:
//!
//! 1. The steady-state transfer function of an unknown stable plant is
//!    computed from raw input/output samples ([`identify`]), relying on
//!    persistency-of-excitation certificates and Hankel-matrix machinery
//!    ([`excitation`]). A constant disturbance on the state equation is
//!    removed by first differencing; time-varying disturbances are handled
//!    by a rolling window that discards old samples.
//! 2. The identified gain drives an online gradient controller toward the
//!    time-varying optimizers of a convex steady-state cost
//!    ([`opt_control`]), with a certified step-size bound and per-step
//!    Lyapunov decrease diagnostics.
//!
//! [`lti`] hosts the plant model, simulator and the model-based oracles
//! (exact gains, discrete Lyapunov solutions) used to validate everything
//! else.

pub mod error;
pub mod excitation;
pub mod identify;
pub mod linalg;
pub mod lti;
pub mod opt_control;

pub use error::{Error, Result};

//! Machine models built from magnetic Lagrangians in complex currents.
//!
//! Fluxes, inductances and torque all come from differentiating one scalar
//! function `L_m(θ, currents)` with forward-mode dual numbers, so a model is
//! specified by its Lagrangian alone. On top of that sit a fixed-step
//! simulator, an energy audit and a local observability analysis for
//! sensorless operation at zero stator frequency.

pub mod checks;
pub mod dynamics;
pub mod energy;
pub mod error;
pub mod models;
pub mod observability;
pub mod wirtinger;

pub use error::{Error, Result};

//! Seasonal dry / growth / grazing Lotka-Volterra competition.
//!
//! * [`params`]: raw and nondimensional parameters, rescaling, validation.
//! * [`scalar`]: exact single-species season maps and their fixed points.
//! * [`integrator`]: RK4 integration of the two-species system, the period
//!   map, periodic orbits and monodromy matrices.
//! * [`stability`]: thresholds, Floquet multipliers and region labels.
//! * [`sweep`]: region maps over the `tau1`-`tau2` or `c1`-`c2` plane.
//! * [`cli`]: the `seasonal-graze` command-line front end.

// `!(x >= 0.0)` is how validation rejects NaN along with negatives
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod format;
pub mod integrator;
pub mod params;
pub mod scalar;
pub mod stability;
pub mod sweep;

pub use integrator::{State, Trajectory};
pub use params::{ModelParameters, RawParameters, Schedule, Species};
pub use scalar::MobiusGrowthMap;
pub use stability::{RegimeClassification, Region};

//! Performance of an underwater acoustic link between a submerged transmitter
//! and a surface receiver when seabed jammers, scattered as a homogeneous
//! Poisson point process, emit continuous interference.
//!
//! Two independent engines compute the same three metrics (coverage
//! probability, average rate, energy efficiency):
//!
//! * [`analysis`] evaluates them deterministically by quadrature over the
//!   Laplace transforms of the received signal and the aggregate jamming,
//!   using Gil-Pelaez inversion for coverage and Hamdi's lemma for the rate.
//! * [`montecarlo`] simulates node deployments with reproducible, per-trial
//!   random substreams.
//!
//! [`uwchannel`] and [`stochgeom`] hold the propagation, fading and jammer
//! field models shared by both engines, and [`numerics`] the quadrature,
//! inversion, special-function and sampling substrate.

pub mod analysis;
pub mod config;
pub mod error;
pub mod estimate;
pub mod montecarlo;
pub mod numerics;
pub mod stochgeom;
pub mod sweep;
pub mod uwchannel;
pub mod validate;

pub use error::{Error, Result};
pub use estimate::MetricEstimate;

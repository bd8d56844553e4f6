//! Numerical substrate: adaptive quadrature, characteristic-function
//! inversion, the Marcum Q function and reproducible random streams.

pub mod gil_pelaez;
pub mod marcum;
pub mod quad;
pub mod random;

pub use gil_pelaez::{gil_pelaez_tail, try_gil_pelaez_tail, TailProbability};
pub use marcum::{marcum_q1, marcum_q1_pair};
pub use quad::{integrate, integrate_panels, try_integrate, QuadValue, Quadrature, QuadratureSpec, Transform};
pub use random::{sample_normal, sample_poisson, sample_uniform, split_stream, RandomStream, StreamRng};

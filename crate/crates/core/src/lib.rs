//! Secrecy performance of a wiretap link over correlated composite
//! Nakagami-m/Gamma fading: special functions, the channel model, analytic
//! and quadrature evaluators of the outage probabilities, and an exact
//! Monte Carlo sampler.

pub mod channel;
pub mod error;
pub mod montecarlo;
pub mod quad;
pub mod secrecy;
pub mod specfun;

pub use error::{Error, Result};

//! Online Budgeted Allocation (OBA) laboratory.
//!
//! Resources with budgets and per-unit rewards are matched to sequentially
//! arriving bid vectors. The crate bundles the online policies (randomized
//! perturbed greedy and its fractional relaxation, greedy baselines, bid
//! pricing), offline benchmarks (dense simplex LP, brute force, analytic),
//! pathwise competitive-ratio certificates, and the numeric reproduction of
//! the 0.508 / 0.522 competitive constants.
//!
//! Numeric kernels (trade-off curves, quadrature, simplex) are generic over
//! the scalar type through [`scalar::Real`]; the simulation and I/O layers
//! are pinned to `f64` so instance files round-trip bit exactly.

pub mod algorithms;
pub mod certificate;
pub mod error;
pub mod harness;
pub mod instance;
pub mod numerics;
pub mod offline;
pub mod scalar;

pub use error::Error;

/// Scalar used by the simulation and I/O layers.
pub type Scalar = f64;

/// Concrete trade-off function `g(x) = e^{beta (x - 1)}`.
pub type Tradeoff = algorithms::TradeoffFunction<Scalar>;

/// Concrete sampled alpha(x) curve.
pub type AlphaCurve = numerics::AlphaCurve<Scalar>;

/// Crate-wide result type.
pub type Result<T> = std::result::Result<T, Error>;

//! Max-plus algebra models of acyclic fork-join queueing networks.
//!
//! The crate covers the (max,+) semiring and its matrices ([`maxplus`]),
//! network topologies with initial buffer contents ([`network`]), the explicit
//! state equation and an independent per-node recursion ([`dynamics`]),
//! seeded service-time samplers ([`stochastic`]) and the bounds
//! ‖E[T_1]‖ ≤ γ ≤ E‖T_1‖ on the mean cycle time ([`analysis`]).
//!
//! Algebraic code is generic over the [`Scalar`] carrier. Aliases for the
//! common choices are provided below; [`Exact`] is an exact rational type.

pub mod analysis;
pub mod config;
pub mod dynamics;
mod error;
pub mod maxplus;
pub mod network;
pub mod quadrature;
mod scalar;
pub mod stochastic;
pub mod tables;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub use maxplus::{Epsilon, Finite, Matrix, MaxPlus};

/// Exact rational scalar.
pub type Exact = num_rational::Rational64;

pub type MaxPlusF32 = MaxPlus<f32>;
pub type MaxPlusF64 = MaxPlus<f64>;
pub type MaxPlusExact = MaxPlus<Exact>;

pub type MatrixF32 = Matrix<f32>;
pub type MatrixF64 = Matrix<f64>;
pub type MatrixExact = Matrix<Exact>;

pub type PartialGraphsF64 = network::PartialGraphs<f64>;
pub type SimulatorF64 = dynamics::Simulator<f64>;

//! Four-compartment HPA-axis model (CRH, ACTH, glucocorticoid receptor, cortisol)
//! with distributed delays and Caputo fractional derivatives.
//!
//! * [`model`]: parameters, vector field, equilibria, linearization.
//! * [`numerics`]: polynomials, real roots, Routh–Hurwitz, characteristic function.
//! * [`chareq`]: stability and Hopf analysis for Dirac, mixed and weak gamma kernels.
//! * [`solver`]: delay, chain-trick and fractional integrators; oscillation classifier.
//!
//! Everything is generic over the [`Scalar`] type; the `*64` aliases below fix it
//! to `f64`.

pub mod chareq;
pub mod kernel;
pub mod model;
pub mod numerics;
mod scalar;
pub mod solver;

pub use scalar::Scalar;

pub type ModelParams64 = model::ModelParams<f64>;
pub type State64 = model::State<f64>;
pub type Equilibrium64 = model::Equilibrium<f64>;
pub type LinearizationCoeffs64 = model::LinearizationCoeffs<f64>;
pub type DelayKernel64 = kernel::DelayKernel<f64>;
pub type Polynomial64 = numerics::Polynomial<f64>;
pub type StabilityReport64 = chareq::StabilityReport<f64>;
pub type SimConfig64 = solver::SimConfig<f64>;
pub type Trajectory64 = solver::Trajectory<f64>;

pub type ModelParams32 = model::ModelParams<f32>;
pub type State32 = model::State<f32>;
pub type Trajectory32 = solver::Trajectory<f32>;

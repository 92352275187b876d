//! Goal-oriented training of neural-network Poisson solvers.
//!
//! The crate trains PINN and Deep Ritz approximations of `-Δu = f`,
//! estimates the error in a linear goal functional `J(u) = ⟨j, u⟩` with a
//! dual weighted residual estimator whose adjoint weights are themselves
//! networks, and feeds the localized estimator back into training as an
//! importance density for collocation points.
//!
//! Module map:
//!
//! - [`nn`]: network architectures, forward jets (value, gradient, Laplacian)
//!   and reverse-mode parameter gradients through those jets.
//! - [`geometry`]: domains, uniform samplers, indicator-driven resampling and
//!   quadrature rules.
//! - [`problem`]: Poisson problems, goal functionals, the two training losses
//!   and the benchmark case table.
//! - [`estimator`]: simple and localized goal-error estimators.
//! - [`adaptive`]: Adam, the epoch loop and the adaptive resampling /
//!   refinement drivers.

pub mod adaptive;
pub mod error;
pub mod estimator;
pub mod geometry;
pub mod nn;
pub mod problem;
pub mod rng;

pub use error::{Error, Result};

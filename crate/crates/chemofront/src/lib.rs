//! Numerical toolkit for transition fronts of a chemotaxis-growth system.
//!
//! The model couples a population density `u` with a chemoattractant
//! concentration `v` on the real line:
//!
//! ```text
//! u_t = u_xx - chi (u v_x)_x + u (a(t) - b(t) u)
//! 0   = v_xx - lambda v + mu u
//! ```
//!
//! The crate constructs front solutions connecting the positive entire state
//! `(u*(t), (mu/lambda) u*(t))` at `x = -inf` to `(0, 0)` at `x = +inf`,
//! verifies the differential inequalities that pin such fronts between
//! explicit sub- and super-solutions, and measures propagation speeds of
//! direct simulations.
//!
//! Everything numeric is generic over the scalar type through [`Real`];
//! the concrete aliases at the crate root fix `f64`, the type used by the
//! command-line driver.

pub mod coefficients;
pub mod config;
pub mod dispersion;
pub mod elliptic;
pub mod front;
pub mod error;
pub mod grid;
pub mod output;
pub mod parabolic;
pub mod scalar;
pub mod speed;
pub mod verify;
pub mod wave;

pub use error::{Error, Result};
pub use scalar::Real;

/// Coefficient pair `(a, b)` over `f64`.
pub type CoefficientPair64 = coefficients::CoefficientPair<f64>;
/// Spatial profile over `f64`.
pub type GridProfile64 = grid::GridProfile<f64>;
/// Positive entire solution of the logistic equation over `f64`.
pub type EntireLogistic64 = coefficients::EntireLogistic<f64>;
/// Chemotaxis parameters `(chi, mu, lambda)` over `f64`.
pub type ChemoParams64 = dispersion::ChemoParams<f64>;
/// Calibrated barrier constants over `f64`.
pub type FrontParams64 = dispersion::FrontParams<f64>;
/// Front family (barriers and speed) over `f64`.
pub type FrontFamily64 = front::FrontFamily<f64>;
/// Chemoattractant field over `f64`.
pub type EllipticField64 = elliptic::EllipticField<f64>;
/// Constructed front solution over `f64`.
pub type WaveSolution64 = wave::WaveSolution<f64>;
/// Level-tracking speed estimate over `f64`.
pub type SpeedEstimate64 = speed::SpeedEstimate<f64>;

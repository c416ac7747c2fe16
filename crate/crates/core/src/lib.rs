//! Wavepacket propagation for a laser-coupled pair of molecular electronic
//! states, together with an order-by-order implementation of time-dependent
//! perturbation theory and the machinery to dissect the resulting norm
//! deviations.
//!
//! The crate is organised around a small set of layers:
//!
//! * [`grid`] — spatial grid, two-component wave functions, Fourier helpers.
//! * [`pulse`] — unchirped and linearly chirped Gaussian laser fields.
//! * [`propagator`] — split-operator system propagator, the per-order
//!   perturbative stepper, an exactly coupled reference propagator and a
//!   fine-quadrature one-step reference.
//! * [`norm`] — decomposition of the norm into per-order contributions and
//!   their stationary/oscillatory classification.
//! * [`oracle`] — exact combinatorial counterparts (closed-form wave
//!   function, stationary closed form, rational identities, bracket-term
//!   bookkeeping) used to verify the propagation layer.
//! * [`analytics`] — analytic predictions for the norm deviations.
//! * [`scenario`] — canned experiment drivers and CSV/manifest output.
//! * [`config`] — flat key-value configuration files.

pub mod analytics;
pub mod config;
pub mod error;
pub mod grid;
pub mod norm;
pub mod oracle;
pub mod propagator;
pub mod pulse;
pub mod scenario;

pub use error::{Error, Result};

/// One femtosecond in atomic units of time.
pub const FS_TO_AU: f64 = 41.3413745758;

//! Rate-equation model and magnetometry figures of merit for laser
//! intracavity absorption magnetometry (LICAM).
//!
//! A single-mode diode laser with an absorber inside its cavity is described
//! by two coupled rate equations for the intracavity power `P` and the carrier
//! density `N`. Linearizing gain, spontaneous emission and recombination
//! around threshold makes the steady state a quadratic in `P`, which
//! [`model::steady_state`] solves in closed form. [`model::integrate_transient`]
//! integrates the same equations in time and serves as an independent check.
//!
//! On top of the model:
//!
//! - [`enhancement`] turns off/on-resonance output powers into effective
//!   optical depth, spin contrast, enhancement factor and shot-noise-limited
//!   sensitivity.
//! - [`fitting`] holds a damped least-squares solver and the fitters for
//!   L–I curves, lock-in ODMR traces, power laws and double exponentials.
//! - [`sweep`] scans drive current, locates optima under a current limit and
//!   classifies the operating regime over `(g, R_f)` grids.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the command
//! line front end and spectral analysis live in the `licam-lab` crate.

#![no_std]
#![warn(missing_debug_implementations)]
// When std ends up in the dependency graph (test builds, or a dependent
// enabling serde/std) its inherent float methods shadow `math::Real`.
#![allow(unused_imports)]
// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod constants;
pub mod enhancement;
pub mod fitting;
mod linalg;
mod math;
pub mod model;
pub mod presets;
pub mod sweep;

pub use enhancement::{EnhancementError, FigureOfMerit};
pub use fitting::{FitError, FitReport, FittedValue, OdmrFit};
pub use model::{AbsorberParams, DiodeLaserParams, LaserConfig, ModelError, OperatingPoint, Resonance};
pub use sweep::{CurrentScan, Regime, ScanConfig, SweepCell, SweepError};

//! Semi-analytical field solver and design toolkit for slotless double-sided
//! linear PM motors with arbitrary Halbach arrays.
//!
//! The crate is organised bottom-up:
//!
//! * [`config`]: machine geometry, materials, winding and operating point.
//! * [`source`]: Halbach layout and the Fourier description of its surface
//!   currents and charges.
//! * [`field`]: per-harmonic boundary-value solutions (hybrid Laplace model
//!   plus the two Poisson formulations) and field evaluation.
//! * [`machine`]: thrust, ripple, attraction force, back-EMF.
//! * [`fd`]: an independent finite-difference magnetostatic solver used as an
//!   oracle for the analytic path.
//! * [`design`]: stage metrics, objective functions, sweeps and a grid optimizer.
//! * [`verify`]: the consistency checks run by `halbach verify`.

pub mod config;
pub mod design;
pub mod error;
pub mod fd;
pub mod field;
mod linalg;
pub mod machine;
pub mod output;
pub mod source;
pub mod verify;

pub use config::{
    load_config, load_design, phase_current_density, DesignParams, HarmonicTruncation,
    MotorConfig, MotorDesign, OperatingPoint,
};
pub use error::{Error, Result};
pub use field::{
    closed_form_coefficients, evaluate_fields, solve_coefficients, solve_model2, solve_model3,
    FieldCoefficients, FieldModel, FieldSample, Region, Topology,
};
pub use source::{build_layout, fourier_coefficients, HalbachLayout, HarmonicSource};

/// Vacuum permeability, H/m.
pub const MU0: f64 = 4.0e-7 * std::f64::consts::PI;

//! Classical dynamics and geometric phases of a neutral particle carrying
//! permanent electric and magnetic dipole moments.
//!
//! The crate is organised bottom-up:
//!
//! * [`fields`] evaluates static field configurations and their Jacobians.
//! * [`dynamics`] computes force, torque, canonical momentum and RK4
//!   trajectories for a [`DipoleParticle`].
//! * [`holonomy`] integrates the connection `d×B − μ×E` along paths to give
//!   the Aharonov-Casher / He-McKellar-Wilkens phase and its closed forms.
//! * [`interferometer`] assembles two-arm geometries and fringe intensities.
//! * [`validation`] packages the physical claims as seeded pass/fail checks.
//!
//! Everything is in natural units (ħ = c = 1) and phases are in radians.

pub mod dynamics;
pub mod error;
pub mod fields;
pub mod holonomy;
pub mod interferometer;
pub mod path;
pub mod quadrature;
pub mod validation;

pub use dynamics::{DipoleParticle, Integrator, KinematicState, Trajectory};
pub use error::{EngineError, Result};
pub use fields::{Aabb, FieldConfig, FieldSample, Mat3, Vec3};
pub use holonomy::{ClosedForm, PhaseResult};
pub use interferometer::{ArmSpec, FringeResult, InterferometerSpec};
pub use path::PathSpec;
pub use validation::CheckReport;

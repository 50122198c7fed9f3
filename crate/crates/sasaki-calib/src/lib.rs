//! Numerical verification toolkit for the Sasaki calibration on the unit
//! tangent bundle of odd-dimensional round spheres.
//!
//! The crate is organised bottom-up:
//!
//! * [`linalg`] holds small dense matrix kernels (determinants, singular
//!   values, principal-minor sums, exterior-power norms, minor identities).
//! * [`sphere`] holds the explicit geometry of `S^n` in `R^{n+1}`: distances,
//!   polar and join charts, flattened cutoffs and volumes.
//! * [`fields`] represents unit vector fields and their covariant derivatives.
//! * [`calibration`] implements the Sasaki frame, the forms `Θ` and `ω`, the
//!   graph polynomial `Φ_d` and graph densities.
//! * [`recovery`] builds the repaired fields `V_k` interpolating between the
//!   Hopf field and the radial field.
//! * [`quadrature`] integrates scalar densities over spheres.

pub mod calibration;
pub mod error;
pub mod fields;
pub mod linalg;
pub mod quadrature;
pub mod recovery;
pub mod sphere;
pub(crate) mod vecops;

pub use error::{Error, Result};

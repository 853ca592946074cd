//! Single-excitation waveguide QED with hard IR/UV frequency cutoffs.
//!
//! A two-level emitter couples to two counter-propagating photon channels
//! whose momenta are restricted to `[lambda_ir, lambda_uv]`. The crate
//! propagates the N = 1 state with RK4 in the interaction picture, measures
//! reflection/transmission, and maps the Hamiltonian's bare parameters
//! `(omega_0, gamma)` to the observable `(omega_A, Gamma)` and back.

pub mod error;
pub mod experiments;
pub mod model;
pub mod observables;
pub mod oracle;
pub mod propagator;
pub mod renorm;
pub mod state;

pub use error::{Error, Result};

//! Local upgrades of local-realistic correlations with negative bits.
//!
//! The crate is organised bottom-up:
//!
//! - [`dist`]: scenarios of binary-outcome boxes and (quasi-)probability joint
//!   distributions over every party's outcome for every setting.
//! - [`bell`]: Bell functionals (CHSH, N-party Mermin) with their bounds.
//! - [`lp`]: a small revised-simplex solver.
//! - [`decomp`]: Birkhoff-von Neumann decompositions, their signed
//!   generalisation for quasi-bistochastic matrices, minimal nebit negativity.
//! - [`upgrade`]: the local quasi-bistochastic processes that rescale
//!   correlations, their optimisation and the upgrade costs.
//! - [`frames`]: SIC-POVM frame representation of qubit states and gates.
//! - [`twoqubit`]: upgrading quantum pair probabilities of a two-qubit pure
//!   state towards the no-signalling boundary.

pub mod bell;
pub mod decomp;
pub mod dist;
mod error;
mod numeric;
pub mod format;
pub mod frames;
pub mod lp;
pub mod twoqubit;
pub mod upgrade;

pub use error::{Error, Result};

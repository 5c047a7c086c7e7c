//! Comb conformal mappings of the plane with finitely many vertical slits.
//!
//! The forward problem maps slit data `(u_n, h_n)` to the gaps `(z_n^-, z_n^+)`
//! of the real axis; the inverse direction evaluates the quasimomentum `k(z)`
//! and all derived quantities, and the estimates module checks the a priori bounds
//! relating them.

// `!(x >= y)` is used on purpose so that NaN is rejected
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod capacity;
pub mod closed_forms;
pub mod domain;
pub mod error;
pub mod estimates;
pub mod forward;
pub mod quadrature;
pub mod quasimomentum;
pub mod report;
mod roots;

pub use domain::{greedy_energy_bounds, greedy_tilde, weighted_norm, NormSpec, SlitConfig};
pub use error::{Error, Result};
pub use forward::{lindelof_pair_check, round_trip_check, solve_forward, CombSolution, SolverOptions};
pub use quadrature::QuadSettings;
pub use quasimomentum::{Gap, GapSystem, Quasimomentum};

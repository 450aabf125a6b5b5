//! Time-fractional Lengyel–Epstein reaction–diffusion model.
//!
//! The crate covers the L1 discretization of the Caputo derivative, the
//! kinetics and their invariant region, local stability analysis (kinetic and
//! per Neumann mode), a finite-difference integrator, trajectory diagnostics,
//! and the configuration/CLI layer used by the `lefrac` binary.

pub mod caputo;
pub mod diagnostics;
pub mod error;
pub mod gamma;
pub mod io;
pub mod kinetics;
pub mod solver;
pub mod stability;
pub mod verify;

pub use caputo::{caputo_l1, caputo_power_rule, check_lemma2, l1_weights, FractionalOrder, L1Weights, ScalarHistory};
pub use error::{Error, Result};
pub use gamma::gamma;
pub use kinetics::{
    equilibrium, invariant_rectangle, jacobian_summary, reaction_rates, Equilibrium, JacobianSummary, SystemParams,
};

//! Method-of-lines laboratory for the damped wave equation with rotational
//! inertia and a decaying potential,
//! `u_tt - u_ttxx - u_xx + V(x) u + u_t = 0` on a truncated line.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod appendix;
pub mod config;
pub mod data;
pub mod energetics;
pub mod error;
pub mod evolution;
pub mod fit;
pub mod grid;
pub mod ledger;
pub mod output;
pub mod potential;
pub mod study;

pub use config::RunConfig;
pub use data::InitialData;
pub use energetics::EnergyRecord;
pub use error::{Error, Result};
pub use evolution::{SemidiscreteSystem, StateVector, TraceSeries};
pub use grid::{BoundaryRule, Field, Grid1D, HelmholtzSolver, Norms};
pub use ledger::{ConstantLedger, VerificationReport};
pub use potential::{PotentialFamily, PotentialSpec, ValidationResult};

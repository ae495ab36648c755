//! Simulation and numerical-analysis toolkit for operator scrambling in
//! free-fermion lattices coupled to a single interacting impurity.
//!
//! The crate bundles several cooperating engines:
//!
//! - [`lattice`]: lattice geometry and step distributions (short-range and
//!   heavy-tailed), characteristic and structure functions.
//! - [`walker`]: discrete-time Monte Carlo for independent walkers that
//!   branch at the impurity site, plus transition scans.
//! - [`master_eq`]: continuous-time exclusion process with a plaquette
//!   source on finite boxes — Gillespie sampling and exact distributions.
//! - [`quantum`]: brute-force Heisenberg evolution of Majorana strings
//!   under Brownian couplings, used to validate `master_eq`.
//! - [`spectral`]: return-probability integrals (Watson-type), recurrence
//!   classification, and position-resolved return probabilities.
//! - [`lyapunov`]: Lippmann–Schwinger solver for the growth exponent of
//!   the operator-size field, with an ODE cross-check.
//! - [`percolation`]: Galton–Watson tree percolation linking walker
//!   parameters to the scrambling threshold.
//!
//! Ensembles are embarrassingly parallel and run on rayon when the
//! `parallel` feature (default) is enabled; results are bit-identical to
//! the sequential fallback.

pub mod error;
pub mod exec;
pub mod lattice;
pub mod lyapunov;
pub mod master_eq;
pub mod percolation;
pub mod quadrature;
pub mod quantum;
pub mod rng;
pub mod spectral;
pub mod walker;

pub use error::{Error, Result};
pub use lattice::{Boundary, Kernel, LatticeSpec, Site, StepDistribution};

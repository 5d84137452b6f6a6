//! Steady-state resonance fluorescence of a phonon-dressed two-level emitter.
//!
//! The pipeline runs bottom-up: [`variational`] finds the optimal polaron
//! frame, [`correlations`] evaluates the frame's bath correlation functions,
//! [`master`] assembles the 4×4 Liouvillian and solves for the steady state,
//! and [`observables`] and [`metrology`] turn that state into squeezing and
//! phase-estimation figures. [`atomic`] holds the phonon-free closed forms
//! used as oracles, and [`sweep`] drives parameter grids from JSON configs.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod atomic;
pub mod config;
pub mod correlations;
pub mod error;
pub mod master;
pub mod metrology;
pub mod observables;
pub mod quadrature;
pub mod sweep;
pub mod types;
pub mod units;
pub mod variational;

pub use error::{Error, Result};
pub use types::{BlochVector, DensityOperator2, PhononParams, SystemParams};

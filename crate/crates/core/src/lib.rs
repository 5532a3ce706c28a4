//! Continuous-variable entanglement between the two output beams of a
//! driven two-mode optomechanical cavity.
//!
//! The crate is layered bottom-up:
//!
//! * [`model`] holds physical constants, device/drive parameters and the
//!   validity-regime report.
//! * [`steady`] solves the classical displacement of the driven cavity and
//!   produces the linearized-model parameters ([`steady::DerivedParams`]).
//! * [`adiabatic`] evaluates the closed-form output spectrum obtained after
//!   eliminating the mechanical mode, plus the entanglement metrics.
//! * [`oracle`] solves the linearized three-mode and six-mode Langevin
//!   systems exactly in the frequency domain and cross-checks the closed form.
//! * [`sweep`] runs the parameter sweeps and robustness scans.
//! * [`config`], [`output`] and [`commands`] implement the flat
//!   configuration format, the CSV / JSON-lines tables and the commands of
//!   the command-line tool.
//!
//! All rates and frequencies are angular (rad/s) internally.

// `!(x > 0.0)` style guards reject NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod adiabatic;
pub mod commands;
pub mod config;
pub mod error;
pub mod model;
pub mod oracle;
pub mod output;
pub mod steady;
pub mod sweep;

pub use error::PhysicsError;

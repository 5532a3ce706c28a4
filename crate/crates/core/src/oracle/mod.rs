//! Exact linear-response oracles for the output field statistics.
//!
//! The three-mode rotating-wave system and the six-operator system with
//! counter-rotating terms are solved directly in the frequency domain. Both
//! feed [`covariance::assemble_covariance`], which is model-agnostic.

pub mod compare;
pub mod covariance;
pub mod occupation;
pub mod response;

use std::fmt;
use std::str::FromStr;

use crate::adiabatic::{self, EntMetrics, StandardForm};
use crate::error::{PhysicsError, Result};
use crate::steady::DerivedParams;

pub use compare::{compare_models, ComparisonReport, ComparisonRow};
pub use covariance::{assemble_covariance, log_negativity, standard_form_reduce, Covariance4};
pub use occupation::intracavity_occupation;
pub use response::{adiabatic_response, full6_solve, rwa3_solve, LinearResponse, ResponseMap};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Model {
    /// Closed-form adiabatically eliminated model.
    Adiabatic,
    /// G, H, I response pushed through the exact covariance assembly.
    AdiabaticAssembled,
    Rwa3,
    Full6,
}

impl Model {
    pub const ALL: [Model; 4] = [Model::Adiabatic, Model::AdiabaticAssembled, Model::Rwa3, Model::Full6];

    pub fn name(self) -> &'static str {
        match self {
            Model::Adiabatic => "adiabatic",
            Model::AdiabaticAssembled => "adiabatic_assembled",
            Model::Rwa3 => "rwa3",
            Model::Full6 => "full6",
        }
    }

    /// Response map of a response-based model; `None` for the closed form.
    pub fn response(self, derived: &DerivedParams, omega: f64) -> Option<Result<LinearResponse>> {
        match self {
            Model::Adiabatic => None,
            Model::AdiabaticAssembled => Some(adiabatic_response(derived, omega)),
            Model::Rwa3 => Some(rwa3_solve(derived, omega)),
            Model::Full6 => Some(full6_solve(derived, omega)),
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Model {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Model::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| format!("unknown model '{s}'"))
    }
}

/// Covariance of `model` at `omega`.
pub fn covariance(model: Model, derived: &DerivedParams, omega: f64) -> Result<Covariance4> {
    match model.response(derived, omega) {
        Some(resp) => Ok(assemble_covariance(&resp?, derived.n_m)),
        None => {
            let tp = adiabatic::transfer_functions(derived, omega)?;
            Ok(adiabatic::closed_form_covariance(&tp, derived.n_m, derived).0)
        }
    }
}

/// Standard form and metrics of `model` at `omega`. Response-based models
/// take the logarithmic negativity from the full covariance rather than the
/// symmetric reduction.
pub fn evaluate(model: Model, derived: &DerivedParams, omega: f64) -> Result<(StandardForm, EntMetrics)> {
    if model == Model::Adiabatic {
        return adiabatic::evaluate(derived, omega);
    }
    let v = covariance(model, derived, omega)?;
    let sf = standard_form_reduce(&v)?;
    let mut metrics = EntMetrics::from_standard_form(&sf)?;
    metrics.log_negativity = log_negativity(&v);
    if !metrics.log_negativity.is_finite() {
        return Err(PhysicsError::DegenerateResponse { omega });
    }
    Ok((sf, metrics))
}

/// Evaluates `model` over `grid`, in grid order.
pub fn spectrum(model: Model, derived: &DerivedParams, grid: &[f64]) -> Vec<adiabatic::SpectrumPoint> {
    grid.iter()
        .map(|&omega| adiabatic::SpectrumPoint {
            omega,
            result: evaluate(model, derived, omega),
            beyond_elimination: omega.abs() >= derived.delta,
        })
        .collect()
}

use std::collections::BTreeMap;

use crate::adiabatic::{EntMetrics, StandardForm};
use crate::error::Result;
use crate::oracle::{evaluate, Model};
use crate::steady::DerivedParams;

/// Model every deviation is measured against.
pub const REFERENCE: Model = Model::Rwa3;

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub omega: f64,
    pub results: BTreeMap<Model, Result<(StandardForm, EntMetrics)>>,
    /// `|x_model - x_ref| / |x_ref|` for the EPR variance `x = n - k_x`.
    pub deviations: BTreeMap<Model, f64>,
}

impl ComparisonRow {
    pub fn epr_variance(&self, model: Model) -> Option<f64> {
        match self.results.get(&model) {
            Some(Ok((sf, _))) => Some(sf.epr_variance()),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub models: Vec<Model>,
    pub rows: Vec<ComparisonRow>,
    /// Largest deviation per model over the rows where both sides evaluated.
    pub max_deviation: BTreeMap<Model, f64>,
}

impl ComparisonReport {
    /// Largest deviation of `model` from the reference over `|omega| <= limit`.
    pub fn max_deviation_within(&self, model: Model, limit: f64) -> Option<f64> {
        self.rows
            .iter()
            .filter(|r| r.omega.abs() <= limit)
            .filter_map(|r| r.deviations.get(&model).copied())
            .reduce(f64::max)
    }

    /// Largest relative difference between two arbitrary models of the report.
    pub fn max_pair_deviation(&self, model: Model, reference: Model, limit: f64) -> Option<f64> {
        self.rows
            .iter()
            .filter(|r| r.omega.abs() <= limit)
            .filter_map(|r| Some(relative(r.epr_variance(model)?, r.epr_variance(reference)?)))
            .reduce(f64::max)
    }
}

fn relative(x: f64, reference: f64) -> f64 {
    if x == reference {
        0.0
    } else {
        (x - reference).abs() / reference.abs()
    }
}

/// Evaluates `models` (plus the reference) over `grid`. Failures are kept
/// in-row.
pub fn compare_models(derived: &DerivedParams, grid: &[f64], models: &[Model]) -> ComparisonReport {
    let mut all: Vec<Model> = models.to_vec();
    if !all.contains(&REFERENCE) {
        all.push(REFERENCE);
    }
    all.sort();
    all.dedup();

    let rows: Vec<ComparisonRow> = grid
        .iter()
        .map(|&omega| {
            let results: BTreeMap<_, _> = all.iter().map(|&m| (m, evaluate(m, derived, omega))).collect();
            let mut row = ComparisonRow {
                omega,
                results,
                deviations: BTreeMap::new(),
            };
            if let Some(x_ref) = row.epr_variance(REFERENCE) {
                for &m in all.iter().filter(|&&m| m != REFERENCE) {
                    if let Some(x) = row.epr_variance(m) {
                        row.deviations.insert(m, relative(x, x_ref));
                    }
                }
            }
            row
        })
        .collect();

    let mut max_deviation = BTreeMap::new();
    for row in &rows {
        for (&m, &dev) in &row.deviations {
            let e = max_deviation.entry(m).or_insert(dev);
            *e = f64::max(*e, dev);
        }
    }
    ComparisonReport {
        models: all,
        rows,
        max_deviation,
    }
}

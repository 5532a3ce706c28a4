use std::f64::consts::PI;

use crate::error::{PhysicsError, Result};
use crate::oracle::response::rwa3_interior;
use crate::steady::DerivedParams;

const START_POINTS: usize = 1025;
const MAX_POINTS: usize = 1 << 20;
const REL_TOL: f64 = 5e-3;

/// Spectral density of a1^dag a1 at `omega`, from the vacuum of the second
/// optical input and the thermal mechanical input.
fn density(derived: &DerivedParams, omega: f64) -> Result<f64> {
    let r = rwa3_interior(derived, omega)?;
    Ok(r[(0, 1)].norm_sqr() + derived.n_m * r[(0, 2)].norm_sqr())
}

fn simpson(values: &[f64], h: f64) -> f64 {
    let last = values.len() - 1;
    let inner: f64 = values[1..last]
        .iter()
        .enumerate()
        .map(|(k, v)| if k % 2 == 0 { 4.0 * v } else { 2.0 * v })
        .sum();
    h / 3.0 * (values[0] + inner + values[last])
}

/// Mean intracavity excitation of the first optical mode, `<a1^dag a1>`,
/// integrated over `[-delta, delta]`. The grid is doubled until the integral
/// moves by less than 0.5%.
pub fn intracavity_occupation(derived: &DerivedParams) -> Result<f64> {
    let (lo, hi) = (-derived.delta, derived.delta);
    let at = |k: usize, n: usize| lo + (hi - lo) * k as f64 / (n - 1) as f64;

    let mut n = START_POINTS;
    let mut values = (0..n).map(|k| density(derived, at(k, n))).collect::<Result<Vec<_>>>()?;
    let mut previous = simpson(&values, (hi - lo) / (n - 1) as f64);
    loop {
        let refined = 2 * n - 1;
        if refined > MAX_POINTS {
            return Err(PhysicsError::NonConvergent(format!(
                "occupation integral still moving at {n} points"
            )));
        }
        let mut next = Vec::with_capacity(refined);
        for (k, v) in values.iter().enumerate() {
            next.push(*v);
            if k + 1 < n {
                next.push(density(derived, at(2 * k + 1, refined))?);
            }
        }
        let current = simpson(&next, (hi - lo) / (refined - 1) as f64);
        let change = (current - previous).abs();
        values = next;
        n = refined;
        if change <= REL_TOL * current.abs() || (current == 0.0 && previous == 0.0) {
            return Ok(current / (2.0 * PI));
        }
        previous = current;
    }
}

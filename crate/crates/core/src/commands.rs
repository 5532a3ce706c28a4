//! Command implementations behind the CLI. Each produces a [`Table`].

use crate::adiabatic::optimum_d;
use crate::config::RunConfig;
use crate::error::{PhysicsError, Result};
use crate::model::{validate_regime, RegimeThresholds};
use crate::oracle::{self, compare_models, intracavity_occupation, Model};
use crate::output::{comparison_table, spectrum_table, Cell, Table, SPECTRUM_COLUMNS};
use crate::steady::{solve_steady_state, DerivedParams};
use crate::sweep::{find_optimum_d_numeric, run_sweep, SweepAxis, SweepResult, SweepSpec};

/// Default bracket of the numeric optimum search, in units of gamma.
pub const DEFAULT_BRACKET: (f64, f64) = (0.02, 0.2);

#[derive(Debug, Clone, PartialEq)]
pub enum Command {
    Derive,
    Spectrum,
    /// Values are in the axis' natural unit, with d in units of gamma.
    Sweep {
        axis: SweepAxis,
        values: Vec<f64>,
    },
    /// Bracket in units of gamma.
    Optimum {
        bracket: (f64, f64),
    },
    Verify {
        models: Vec<Model>,
    },
    Occupation,
}

/// Values used when a sweep is requested without explicit values.
pub fn default_sweep_values(axis: SweepAxis) -> Vec<f64> {
    match axis {
        SweepAxis::Temperature => vec![4.0, 77.0, 300.0],
        SweepAxis::Alpha => vec![500.0, 1000.0, 2000.0, 3000.0],
        SweepAxis::D => vec![0.03, 0.05, 0.07, 0.09, 0.11],
        SweepAxis::Q => vec![300.0, 3000.0, 30000.0],
        SweepAxis::PowerFluct => vec![-0.01, 0.0, 0.01],
        SweepAxis::DFluct => vec![-0.02, 0.0, 0.02],
    }
}

fn quantity_table(rows: Vec<(String, f64, String)>) -> Table {
    let mut t = Table::new(&["quantity", "value", "note"]);
    for (q, v, note) in rows {
        t.push(vec![q.into(), v.into(), note.into()]);
    }
    t
}

fn derive_table(derived: &DerivedParams, cfg: &RunConfig) -> Result<Table> {
    let params = cfg.params()?;
    let omega_max = cfg.omega_min_over_gamma.abs().max(cfg.omega_max_over_gamma.abs()) * derived.gamma;
    let regime = validate_regime(&params, derived, omega_max, &RegimeThresholds::default());
    let g = derived.gamma;
    let s = |x: &str| x.to_string();
    let mut rows = vec![
        (s("alpha_1_abs"), derived.alpha_1.norm(), s("")),
        (s("alpha_2_abs"), derived.alpha_2.norm(), s("")),
        (s("population"), derived.population(), s("")),
        (s("beta"), derived.beta, s("")),
        (s("beta_imag_dropped"), derived.beta_imag_dropped, s("")),
        (s("delta_1p"), derived.delta_1p, s("rad/s")),
        (s("delta_2p"), derived.delta_2p, s("rad/s")),
        (s("delta"), derived.delta, s("rad/s")),
        (s("d"), derived.d, s("rad/s")),
        (s("d_over_gamma"), derived.d / g, s("")),
        (s("g"), derived.g, s("rad/s")),
        (s("g_prime"), derived.g_prime, s("rad/s")),
        (s("gamma_m_tilde"), derived.gamma_m_tilde, s("rad/s")),
        (s("n_m"), derived.n_m, s("")),
        (s("multistable"), f64::from(u8::from(derived.multistable)), s("")),
    ];
    for c in &regime.checks {
        let verdict = if c.pass { "pass" } else { "fail" };
        rows.push((
            format!("regime_{}", c.name),
            c.ratio,
            format!("{verdict} (threshold {})", c.threshold),
        ));
    }
    let overall = if regime.overall_pass { "pass" } else { "fail" };
    rows.push((
        s("regime_overall"),
        f64::from(u8::from(regime.overall_pass)),
        s(overall),
    ));
    Ok(quantity_table(rows))
}

/// Summary row per swept value.
pub fn sweep_table(result: &SweepResult, gamma: f64) -> Table {
    let mut t = Table::new(&[
        "axis",
        "value",
        "peak_eof",
        "n_peaks",
        "peak_omegas_over_gamma",
        "fwhm_rads",
        "fwhm_over_gamma",
        "flags",
    ]);
    for row in &result.rows {
        let axis: Cell = result.axis.name().into();
        match &row.outcome {
            Ok(data) => {
                let p = &data.peaks;
                let omegas = p
                    .peak_omegas
                    .iter()
                    .map(|w| crate::output::format_num(w / gamma))
                    .collect::<Vec<_>>()
                    .join(";");
                let fwhm = p.fwhm.unwrap_or(f64::NAN);
                let flags = if p.fwhm.is_none() { "fwhm_open" } else { "" };
                t.push(vec![
                    axis,
                    row.value.into(),
                    p.peak_eof.into(),
                    (p.peak_omegas.len() as f64).into(),
                    omegas.into(),
                    fwhm.into(),
                    (fwhm / gamma).into(),
                    flags.into(),
                ]);
            }
            Err(e) => {
                let nan = f64::NAN;
                t.push(vec![
                    axis,
                    row.value.into(),
                    nan.into(),
                    nan.into(),
                    "".into(),
                    nan.into(),
                    nan.into(),
                    format!("error:{}", e.code()).into(),
                ]);
            }
        }
    }
    t
}

/// Every row's spectrum, prefixed with the swept value.
pub fn sweep_spectra_table(result: &SweepResult) -> Table {
    let mut columns = vec!["sweep_value".to_string()];
    columns.extend(SPECTRUM_COLUMNS.iter().map(|c| c.to_string()));
    let mut t = Table::new(&columns);
    for row in &result.rows {
        if let Ok(data) = &row.outcome {
            let inner = spectrum_table(&data.spectrum, &data.derived, result.model);
            for cells in inner.rows {
                let mut full = vec![Cell::Num(row.value)];
                full.extend(cells);
                t.push(full);
            }
        }
    }
    t
}

/// Builds the sweep described by `cfg` and the requested axis.
pub fn sweep_for(cfg: &RunConfig, axis: SweepAxis, values: &[f64]) -> Result<SweepResult> {
    let base = cfg.params()?;
    let scale = match axis {
        SweepAxis::D | SweepAxis::DFluct => base.gamma,
        _ => 1.0,
    };
    run_sweep(&SweepSpec {
        axis,
        values: values.iter().map(|v| v * scale).collect(),
        base,
        omega_grid: cfg.omega_grid(),
        model: cfg.model,
    })
}

/// Runs `cmd` and returns its primary table.
pub fn execute(cmd: &Command, cfg: &RunConfig) -> Result<Table> {
    let params = cfg.params()?;
    let derived = solve_steady_state(&params)?;
    let gamma = derived.gamma;
    match cmd {
        Command::Derive => derive_table(&derived, cfg),
        Command::Spectrum => {
            let points = oracle::spectrum(cfg.model, &derived, &cfg.omega_grid());
            Ok(spectrum_table(&points, &derived, cfg.model))
        }
        Command::Sweep { axis, values } => Ok(sweep_table(&sweep_for(cfg, *axis, values)?, gamma)),
        Command::Optimum { bracket } => {
            let o = optimum_d(&derived);
            let numeric = find_optimum_d_numeric(
                &params,
                (bracket.0 * gamma, bracket.1 * gamma),
                &cfg.omega_grid(),
                cfg.model,
            )?;
            let s = |x: &str| x.to_string();
            Ok(quantity_table(vec![
                (s("d_o"), o.d_o, s("rad/s")),
                (s("d_o_over_gamma"), o.d_o / gamma, s("")),
                (s("epr_variance"), o.epr_variance, s("")),
                (s("S_o_db"), o.s_o_db, s("dB")),
                (s("eof_o"), o.eof_o, s("ebit")),
                (s("d_numeric"), numeric, s("rad/s")),
                (s("d_numeric_over_gamma"), numeric / gamma, s("")),
                (s("relative_difference"), (numeric - o.d_o).abs() / o.d_o, s("")),
            ]))
        }
        Command::Verify { models } => {
            if models.is_empty() {
                return Err(PhysicsError::InvalidParams("no models to verify".into()));
            }
            let report = compare_models(&derived, &cfg.omega_grid(), models);
            Ok(comparison_table(&report, &derived))
        }
        Command::Occupation => {
            let occ = intracavity_occupation(&derived)?;
            let a2 = derived.alpha_1.norm_sqr();
            let s = |x: &str| x.to_string();
            Ok(quantity_table(vec![
                (s("occupation"), occ, s("")),
                (s("alpha_1_squared"), a2, s("")),
                (s("ratio"), occ / a2, s("")),
            ]))
        }
    }
}

//! Parameter sweeps, peak statistics and robustness scans.

use std::fmt;
use std::str::FromStr;

use crate::adiabatic::{optimum_d, SpectrumPoint};
use crate::error::{PhysicsError, Result};
use crate::model::PhysicalParams;
use crate::oracle::{self, Model};
use crate::steady::{drive_for_operating_point, solve_steady_state, DerivedParams, OperatingPoint};

pub const DEFAULT_GRID_POINTS: usize = 2001;
/// Half-width of the default sideband grid in units of gamma.
pub const DEFAULT_GRID_SPAN: f64 = 2.0;
/// Local maxima within this fraction of the global peak are reported.
pub const PEAK_FRACTION: f64 = 0.99;

const UNIMODAL_SCAN: usize = 33;
const GOLDEN_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    /// Bath temperature (K).
    Temperature,
    /// Cavity amplitude |alpha|; drives are re-derived, delta and d held.
    Alpha,
    /// Common detuning d (rad/s); both lasers shift together, delta held.
    D,
    /// Mechanical quality factor omega_m / gamma_m.
    Q,
    /// Fractional drive power change, P -> P (1 + value).
    PowerFluct,
    /// Offset added to the base d (rad/s).
    DFluct,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::Temperature => "T",
            SweepAxis::Alpha => "alpha",
            SweepAxis::D => "d",
            SweepAxis::Q => "Q",
            SweepAxis::PowerFluct => "power_fluct",
            SweepAxis::DFluct => "d_fluct",
        }
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepAxis {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(match s {
            "T" | "temperature" => SweepAxis::Temperature,
            "alpha" => SweepAxis::Alpha,
            "d" => SweepAxis::D,
            "Q" | "q" => SweepAxis::Q,
            "power_fluct" => SweepAxis::PowerFluct,
            "d_fluct" => SweepAxis::DFluct,
            _ => return Err(format!("unknown sweep axis '{s}'")),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
    pub base: PhysicalParams,
    pub omega_grid: Vec<f64>,
    pub model: Model,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(PhysicsError::InvalidParams("sweep has no values".into()));
        }
        if self.omega_grid.is_empty() {
            return Err(PhysicsError::InvalidParams("empty omega grid".into()));
        }
        if self.values.iter().chain(&self.omega_grid).any(|v| !v.is_finite()) {
            return Err(PhysicsError::InvalidParams("non-finite sweep value".into()));
        }
        let increasing = self.values.windows(2).all(|w| w[1] > w[0]);
        let decreasing = self.values.windows(2).all(|w| w[1] < w[0]);
        if !(increasing || decreasing) {
            return Err(PhysicsError::InvalidParams(
                "sweep values must be strictly monotone".into(),
            ));
        }
        Ok(())
    }
}

/// Peak statistics of one EOF(omega) curve.
#[derive(Debug, Clone, PartialEq)]
pub struct PeakStats {
    pub peak_eof: f64,
    /// Local maxima within [`PEAK_FRACTION`] of the peak, ascending.
    pub peak_omegas: Vec<f64>,
    /// Full width at half maximum of the region around the main peak;
    /// `None` if the curve does not fall to half inside the grid.
    pub fwhm: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRowData {
    pub derived: DerivedParams,
    pub spectrum: Vec<SpectrumPoint>,
    pub peaks: PeakStats,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub outcome: Result<SweepRowData>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub axis: SweepAxis,
    pub model: Model,
    pub rows: Vec<SweepRow>,
}

/// Uniform grid of `points` samples over `[lo, hi]`.
pub fn linear_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![0.5 * (lo + hi)],
        _ => (0..points)
            .map(|k| lo + (hi - lo) * k as f64 / (points - 1) as f64)
            .collect(),
    }
}

/// Default sideband grid: 2001 points over [-2 gamma, 2 gamma].
pub fn default_omega_grid(gamma: f64) -> Vec<f64> {
    linear_grid(
        -DEFAULT_GRID_SPAN * gamma,
        DEFAULT_GRID_SPAN * gamma,
        DEFAULT_GRID_POINTS,
    )
}

fn operating_point(derived: &DerivedParams) -> OperatingPoint {
    OperatingPoint {
        alpha: derived.alpha(),
        delta: derived.delta,
        d: derived.d,
    }
}

/// Retunes `base` to the closed-form optimum detuning of its own steady
/// state, holding |alpha| and delta.
pub fn at_optimum_d(base: &PhysicalParams) -> Result<PhysicalParams> {
    let derived = solve_steady_state(base)?;
    let op = OperatingPoint {
        d: optimum_d(&derived).d_o,
        ..operating_point(&derived)
    };
    drive_for_operating_point(base, &op)
}

/// Parameters of `base` with the swept quantity set to `value`.
pub fn apply_axis(base: &PhysicalParams, axis: SweepAxis, value: f64) -> Result<PhysicalParams> {
    let retune = |f: &dyn Fn(&mut OperatingPoint)| -> Result<PhysicalParams> {
        let mut op = operating_point(&solve_steady_state(base)?);
        f(&mut op);
        drive_for_operating_point(base, &op)
    };
    let params = match axis {
        SweepAxis::Temperature => PhysicalParams {
            temperature: value,
            ..*base
        },
        SweepAxis::Q => {
            if !(value > 0.0) {
                return Err(PhysicsError::InvalidParams(format!("Q must be positive, got {value}")));
            }
            PhysicalParams {
                gamma_m: base.omega_m / value,
                ..*base
            }
        }
        SweepAxis::PowerFluct => PhysicalParams {
            drive: base.drive.scale_power(1.0 + value),
            ..*base
        },
        SweepAxis::Alpha => retune(&|op| op.alpha = value)?,
        SweepAxis::D => retune(&|op| op.d = value)?,
        SweepAxis::DFluct => retune(&|op| op.d += value)?,
    };
    params.validate()?;
    Ok(params)
}

fn parabolic_vertex(xs: [f64; 3], ys: [f64; 3]) -> (f64, f64) {
    let h = xs[1] - xs[0];
    let denom = ys[0] - 2.0 * ys[1] + ys[2];
    if denom >= 0.0 || (xs[2] - xs[1] - h).abs() > 1e-9 * h.abs() {
        return (xs[1], ys[1]);
    }
    let shift = 0.5 * (ys[0] - ys[2]) / denom;
    (xs[1] + shift * h, ys[1] - 0.25 * (ys[0] - ys[2]) * shift)
}

/// Peak statistics of `values` sampled on `grid`. Non-finite samples break
/// the curve and are never peaks.
pub fn peak_stats(grid: &[f64], values: &[f64]) -> Option<PeakStats> {
    let n = values.len().min(grid.len());
    let (imax, &vmax) = values[..n]
        .iter()
        .enumerate()
        .filter(|(_, v)| v.is_finite())
        .max_by(|a, b| a.1.total_cmp(b.1))?;

    let refine = |i: usize| -> (f64, f64) {
        if i == 0 || i + 1 >= n || !values[i - 1].is_finite() || !values[i + 1].is_finite() {
            (grid[i], values[i])
        } else {
            parabolic_vertex(
                [grid[i - 1], grid[i], grid[i + 1]],
                [values[i - 1], values[i], values[i + 1]],
            )
        }
    };
    let peak_eof = refine(imax).1.max(vmax);

    let mut peak_omegas = Vec::new();
    let mut i = 0;
    while i < n {
        if !values[i].is_finite() {
            i += 1;
            continue;
        }
        // a plateau of equal samples counts once, at its centre
        let mut j = i;
        while j + 1 < n && values[j + 1] == values[i] {
            j += 1;
        }
        let left_lower = i == 0 || !values[i - 1].is_finite() || values[i - 1] < values[i];
        let right_lower = j + 1 >= n || !values[j + 1].is_finite() || values[j + 1] < values[i];
        let interior = i > 0 && j + 1 < n;
        if left_lower && right_lower && interior && values[i] >= PEAK_FRACTION * peak_eof && values[i] > 0.0 {
            let mid = (i + j) / 2;
            peak_omegas.push(if i == j { refine(i).0 } else { grid[mid] });
        }
        i = j + 1;
    }

    let half = 0.5 * peak_eof;
    let crossing = |a: usize, b: usize| {
        let t = (values[a] - half) / (values[a] - values[b]);
        grid[a] + t * (grid[b] - grid[a])
    };
    let mut lo = imax;
    while lo > 0 && values[lo - 1].is_finite() && values[lo - 1] >= half {
        lo -= 1;
    }
    let mut hi = imax;
    while hi + 1 < n && values[hi + 1].is_finite() && values[hi + 1] >= half {
        hi += 1;
    }
    let fwhm = if lo > 0 && hi + 1 < n && values[lo - 1].is_finite() && values[hi + 1].is_finite() && peak_eof > 0.0 {
        Some(crossing(hi, hi + 1) - crossing(lo, lo - 1))
    } else {
        None
    };

    Some(PeakStats {
        peak_eof,
        peak_omegas,
        fwhm,
    })
}

fn eof_values(spectrum: &[SpectrumPoint]) -> Vec<f64> {
    spectrum
        .iter()
        .map(|p| match &p.result {
            Ok((_, m)) => m.eof,
            Err(_) => f64::NAN,
        })
        .collect()
}

/// Spectrum and peak statistics of one parameter set.
pub fn analyze(params: &PhysicalParams, grid: &[f64], model: Model) -> Result<SweepRowData> {
    let derived = solve_steady_state(params)?;
    analyze_derived(derived, grid, model)
}

fn analyze_derived(derived: DerivedParams, grid: &[f64], model: Model) -> Result<SweepRowData> {
    let spectrum = oracle::spectrum(model, &derived, grid);
    let values = eof_values(&spectrum);
    let peaks = peak_stats(grid, &values).ok_or_else(|| {
        spectrum
            .iter()
            .find_map(|p| p.result.clone().err())
            .unwrap_or(PhysicsError::InvalidParams("empty spectrum".into()))
    })?;
    Ok(SweepRowData {
        derived,
        spectrum,
        peaks,
    })
}

/// Runs every row of `spec`. Rows fail independently.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    spec.validate()?;
    let rows = spec
        .values
        .iter()
        .map(|&value| SweepRow {
            value,
            outcome: apply_axis(&spec.base, spec.axis, value).and_then(|p| analyze(&p, &spec.omega_grid, spec.model)),
        })
        .collect();
    Ok(SweepResult {
        axis: spec.axis,
        model: spec.model,
        rows,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SensitivityCase {
    pub label: String,
    pub alpha: f64,
    pub d: f64,
    pub peak_eof: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SensitivityReport {
    pub d_o: f64,
    pub baseline_peak_eof: f64,
    pub cases: Vec<SensitivityCase>,
    pub worst_peak_eof: f64,
    /// `1 - worst / baseline`.
    pub degradation: f64,
    /// d of the full steady state after scaling the drive power by
    /// `1 - eps` and `1 + eps`, for comparison with the linear estimate.
    pub solver_d: Option<(f64, f64)>,
}

/// Peak EOF at d_o and under detuning and power jitter. Power jitter scales
/// |alpha|^2 by `1 +- eps` with the bare detunings fixed, so d moves by
/// `-4 eta^2 omega_m |alpha|^2 (+-eps)`.
pub fn sensitivity_analysis(
    base: &PhysicalParams,
    d_jitter: f64,
    power_jitter_frac: f64,
    grid: &[f64],
    model: Model,
) -> Result<SensitivityReport> {
    if !(d_jitter >= 0.0 && power_jitter_frac >= 0.0) {
        return Err(PhysicsError::InvalidParams("jitters must be non-negative".into()));
    }
    let derived = solve_steady_state(base)?;
    let d_o = optimum_d(&derived).d_o;
    let alpha = derived.alpha();
    let shift_per_frac = 4.0 * base.eta * base.eta * base.omega_m * alpha * alpha;

    let mut points = vec![("d_o".to_string(), alpha, d_o)];
    if d_jitter > 0.0 {
        points.push(("d_o-jitter".into(), alpha, d_o - d_jitter));
        points.push(("d_o+jitter".into(), alpha, d_o + d_jitter));
    }
    if power_jitter_frac > 0.0 {
        for (label, s) in [("power-", -1.0), ("power+", 1.0)] {
            let eps = s * power_jitter_frac;
            points.push((label.into(), alpha * (1.0 + eps).sqrt(), d_o - shift_per_frac * eps));
        }
    }

    let mut cases = Vec::with_capacity(points.len());
    for (label, a, d) in points {
        let op = OperatingPoint {
            alpha: a,
            delta: derived.delta,
            d,
        };
        let params = drive_for_operating_point(base, &op)?;
        let row = analyze(&params, grid, model)?;
        cases.push(SensitivityCase {
            label,
            alpha: a,
            d,
            peak_eof: row.peaks.peak_eof,
        });
    }

    let solver_d = if power_jitter_frac > 0.0 {
        let at_opt = drive_for_operating_point(
            base,
            &OperatingPoint {
                d: d_o,
                ..operating_point(&derived)
            },
        )?;
        let solve_scaled = |f: f64| -> Result<f64> {
            let p = PhysicalParams {
                drive: at_opt.drive.scale_power(f),
                ..at_opt
            };
            Ok(solve_steady_state(&p)?.d)
        };
        match (
            solve_scaled(1.0 - power_jitter_frac),
            solve_scaled(1.0 + power_jitter_frac),
        ) {
            (Ok(a), Ok(b)) => Some((a, b)),
            _ => None,
        }
    } else {
        None
    };

    let baseline_peak_eof = cases[0].peak_eof;
    let worst_peak_eof = cases.iter().map(|c| c.peak_eof).fold(f64::INFINITY, f64::min);
    let degradation = if baseline_peak_eof > 0.0 {
        1.0 - worst_peak_eof / baseline_peak_eof
    } else {
        0.0
    };
    Ok(SensitivityReport {
        d_o,
        baseline_peak_eof,
        cases,
        worst_peak_eof,
        degradation,
        solver_d,
    })
}

/// Index of the maximum of `scan` if the values rise to it and fall after
/// it (plateaus allowed), `None` otherwise.
pub fn unimodal_peak(scan: &[(f64, f64)]) -> Option<usize> {
    let best = scan
        .iter()
        .enumerate()
        .max_by(|a, b| a.1 .1.total_cmp(&b.1 .1))
        .map(|(i, _)| i)?;
    let rising = scan[..=best].windows(2).all(|w| w[1].1 >= w[0].1);
    let falling = scan[best..].windows(2).all(|w| w[1].1 <= w[0].1);
    (rising && falling).then_some(best)
}

/// Peak EOF of `base` retuned to detuning `d`.
fn peak_eof_at_d(base: &PhysicalParams, op: &OperatingPoint, d: f64, grid: &[f64], model: Model) -> Result<f64> {
    let params = drive_for_operating_point(base, &OperatingPoint { d, ..*op })?;
    Ok(analyze(&params, grid, model)?.peaks.peak_eof)
}

/// Maximizes the peak EOF over d inside `bracket` by golden-section search.
/// The bracket is first scanned; a curve that is not unimodal there is
/// rejected with the scan attached.
pub fn find_optimum_d_numeric(base: &PhysicalParams, bracket: (f64, f64), grid: &[f64], model: Model) -> Result<f64> {
    let (lo, hi) = bracket;
    if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
        return Err(PhysicsError::InvalidParams(format!("bad bracket [{lo}, {hi}]")));
    }
    if lo == hi {
        return Ok(lo);
    }
    let op = operating_point(&solve_steady_state(base)?);
    let f = |d: f64| peak_eof_at_d(base, &op, d, grid, model);

    let scan: Vec<(f64, f64)> = linear_grid(lo, hi, UNIMODAL_SCAN)
        .into_iter()
        .map(|d| Ok((d, f(d)?)))
        .collect::<Result<_>>()?;
    let best = unimodal_peak(&scan).ok_or_else(|| PhysicsError::BracketError {
        lo,
        hi,
        scan: scan.clone(),
    })?;

    let (mut a, mut b) = (scan[best.saturating_sub(1)].0, scan[(best + 1).min(scan.len() - 1)].0);
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - ratio * (b - a);
    let mut e = a + ratio * (b - a);
    let (mut fc, mut fe) = (f(c)?, f(e)?);
    while (b - a).abs() > GOLDEN_TOL * (hi - lo) {
        if fc >= fe {
            b = e;
            e = c;
            fe = fc;
            c = b - ratio * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = e;
            fc = fe;
            e = a + ratio * (b - a);
            fe = f(e)?;
        }
    }
    Ok(0.5 * (a + b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::steady::baseline_defaults;

    #[test]
    fn grid_endpoints() {
        let g = linear_grid(-1.0, 1.0, 5);
        assert_eq!(g, vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
        assert_eq!(linear_grid(0.0, 1.0, 1), vec![0.5]);
    }

    #[test]
    fn parabola_vertex_is_exact() {
        let f = |x: f64| 3.0 - 2.0 * (x - 0.23).powi(2);
        let (x, y) = parabolic_vertex([0.0, 0.3, 0.6], [f(0.0), f(0.3), f(0.6)]);
        assert!((x - 0.23).abs() < 1e-12 && (y - 3.0).abs() < 1e-12);
    }

    #[test]
    fn peaks_of_a_double_hump() {
        let grid = linear_grid(-3.0, 3.0, 601);
        let values: Vec<f64> = grid
            .iter()
            .map(|x| (-(x - 1.0f64).powi(2) * 4.0).exp() + (-(x + 1.0f64).powi(2) * 4.0).exp())
            .collect();
        let s = peak_stats(&grid, &values).unwrap();
        assert_eq!(s.peak_omegas.len(), 2);
        assert!((s.peak_omegas[0] + s.peak_omegas[1]).abs() < 1e-9);
        assert!(s.fwhm.unwrap() > 0.0);
    }

    #[test]
    fn gaussian_width() {
        let grid = linear_grid(-5.0, 5.0, 2001);
        let values: Vec<f64> = grid.iter().map(|x| (-x * x / 2.0).exp()).collect();
        let s = peak_stats(&grid, &values).unwrap();
        let exact = 2.0 * (2.0 * 2f64.ln()).sqrt();
        assert!((s.fwhm.unwrap() - exact).abs() < 1e-4);
        assert_eq!(s.peak_omegas.len(), 1);
    }

    #[test]
    fn monotone_values_required() {
        let spec = SweepSpec {
            axis: SweepAxis::Temperature,
            values: vec![4.0, 300.0, 77.0],
            base: baseline_defaults(),
            omega_grid: vec![0.0],
            model: Model::Adiabatic,
        };
        assert!(spec.validate().is_err());
        let spec = SweepSpec { values: vec![], ..spec };
        assert!(spec.validate().is_err());
    }

    #[test]
    fn axis_names_parse() {
        for a in ["T", "alpha", "d", "Q", "power_fluct", "d_fluct"] {
            assert_eq!(a.parse::<SweepAxis>().unwrap().name(), a);
        }
    }

    #[test]
    fn unimodality() {
        let pts = |ys: &[f64]| ys.iter().enumerate().map(|(i, &y)| (i as f64, y)).collect::<Vec<_>>();
        assert_eq!(unimodal_peak(&pts(&[1.0, 2.0, 3.0, 2.0])), Some(2));
        assert_eq!(unimodal_peak(&pts(&[3.0, 2.0, 1.0])), Some(0));
        assert_eq!(unimodal_peak(&pts(&[1.0, 3.0, 2.0, 2.5, 1.0])), None);
        assert_eq!(unimodal_peak(&[]), None);
    }

    #[test]
    fn degenerate_bracket() {
        let base = baseline_defaults();
        let d = find_optimum_d_numeric(&base, (0.3, 0.3), &[0.0], Model::Adiabatic).unwrap();
        assert_eq!(d, 0.3);
    }

    #[test]
    fn d_axis_holds_delta_and_alpha() {
        let base = baseline_defaults();
        let p = apply_axis(&base, SweepAxis::D, 1.2e6).unwrap();
        let d0 = solve_steady_state(&base).unwrap();
        let d1 = solve_steady_state(&p).unwrap();
        assert!((d1.d - 1.2e6).abs() < 1e-6 * 1.2e6);
        assert!((d1.delta - d0.delta).abs() < 1e-6 * d0.delta);
        assert!((d1.alpha() - d0.alpha()).abs() < 1e-6 * d0.alpha());
    }
}

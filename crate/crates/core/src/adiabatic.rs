//! Closed-form output spectrum after adiabatic elimination of the mechanical
//! mode, and the entanglement metrics derived from it.
//!
//! With `a_m` eliminated, `(a_1(omega), a_2^dag(-omega))` obey a 2x2 linear
//! system whose solution gives
//!
//! ```text
//! a_1^out(w) = G(w) a_1^in(w) - H(w) a_2^in,dag(-w) + I(w) a_m^in(w)
//! G = (w^2 + gamma^2/4 + g^2 - g'^2 - i g' gamma) / Delta(w)
//! H = i g gamma / Delta(w)
//! I = (-i w + gamma/2 - i g' + i g) sqrt(gamma gamma_m~) / Delta(w)
//! Delta(w) = (-i w + gamma/2)^2 + g'^2 - g^2
//! ```
//!
//! The output correlation matrix is reported through the closed-form
//! expressions for `n`, `V14` and `V24`, evaluated as-is apart
//! from a `gamma/4 -> gamma^2/4` correction inside `V14`.

use num_complex::Complex64;

use crate::error::{PhysicsError, Result};
use crate::oracle::covariance::Covariance4;
use crate::steady::DerivedParams;

/// Transfer coefficients at one sideband frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferPoint {
    pub omega: f64,
    pub g: Complex64,
    pub h: Complex64,
    pub i: Complex64,
    pub delta_of_omega: Complex64,
}

/// Symmetric two-mode standard form: diagonal blocks `n I`, cross block
/// `diag(k_x, k_p)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StandardForm {
    pub n: f64,
    pub k_x: f64,
    pub k_p: f64,
    /// Largest deviation of a diagonal block from `n I`.
    pub residual: f64,
}

impl StandardForm {
    /// n - k_x, the quantity that drives every entanglement metric.
    pub fn epr_variance(&self) -> f64 {
        self.n - self.k_x
    }

    /// Variance of X_1 - X_2 computed directly from the matrix, 2 (n - k_x).
    pub fn var_x_difference(&self) -> f64 {
        2.0 * (self.n - self.k_x)
    }

    /// Variance of P_1 + P_2 computed directly from the matrix, 2 (n + k_p).
    pub fn var_p_sum(&self) -> f64 {
        2.0 * (self.n + self.k_p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntMetrics {
    pub epr_variance: f64,
    pub s_db: f64,
    pub eof: f64,
    pub entangled: bool,
    pub log_negativity: f64,
}

impl EntMetrics {
    /// Metrics of a symmetric standard form. The logarithmic negativity uses
    /// the symmetric-state reduction `-log2(n - k_x)`.
    pub fn from_standard_form(sf: &StandardForm) -> Result<EntMetrics> {
        let x = sf.epr_variance();
        Ok(EntMetrics {
            epr_variance: x,
            s_db: squeezing_db(x)?,
            eof: eof(x)?,
            entangled: x < 1.0,
            log_negativity: (-x.log2()).max(0.0),
        })
    }
}

/// Evaluates G, H, I and Delta(omega).
pub fn transfer_functions(derived: &DerivedParams, omega: f64) -> Result<TransferPoint> {
    derived.require_balanced()?;
    let (g, gp, gamma) = (derived.g, derived.g_prime, derived.gamma);
    let i = Complex64::i();
    let base = Complex64::new(0.5 * gamma, -omega);
    let delta_of_omega = base * base + gp * gp - g * g;
    if delta_of_omega.norm() < 1e-30 * (gamma * gamma + omega * omega) {
        return Err(PhysicsError::DegenerateResponse { omega });
    }
    let g_num = Complex64::new(omega * omega + 0.25 * gamma * gamma + g * g - gp * gp, -gp * gamma);
    let noise = (gamma * derived.gamma_m_tilde).sqrt();
    Ok(TransferPoint {
        omega,
        g: g_num / delta_of_omega,
        h: i * g * gamma / delta_of_omega,
        i: (base - i * gp + i * g) * noise / delta_of_omega,
        delta_of_omega,
    })
}

/// Printed off-diagonal entries of the output correlation matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedFormEntries {
    pub n: f64,
    pub v14: f64,
    pub v24: f64,
}

/// Evaluates `n`, `V14`, `V24` at `tp` for bath occupancy `n_m`.
pub fn closed_form_entries(tp: &TransferPoint, n_m: f64, derived: &DerivedParams) -> ClosedFormEntries {
    let (g, gp, gamma) = (derived.g, derived.g_prime, derived.gamma);
    let w = tp.omega;
    let abs2 = tp.delta_of_omega.norm_sqr();
    let q = w * w + 0.25 * gamma * gamma + g * g - gp * gp;
    let thermal = ((w + gp - g).powi(2) + 0.25 * gamma * gamma) * gamma * derived.gamma_m_tilde * (2.0 * n_m + 1.0);
    ClosedFormEntries {
        n: (q * q + (gp * gp + g * g) * gamma * gamma + thermal) / abs2,
        v14: -2.0 * g * gamma * q / abs2,
        v24: (2.0 * gp * g * gamma * gamma + thermal) / abs2,
    }
}

/// Closed-form correlation matrix over `(X1, P1, X2, P2)` and its standard
/// form.
///
/// The cross block is laid out as `[[-V24, V14], [V14, V24]]`, the
/// two-mode-squeezing structure whose singular values are both
/// `k_x = sqrt(V14^2 + V24^2)`.
pub fn closed_form_covariance(tp: &TransferPoint, n_m: f64, derived: &DerivedParams) -> (Covariance4, StandardForm) {
    let e = closed_form_entries(tp, n_m, derived);
    let (n, v14, v24) = (e.n, e.v14, e.v24);
    let entries = nalgebra::Matrix4::new(
        n, 0.0, -v24, v14, //
        0.0, n, v14, v24, //
        -v24, v14, n, 0.0, //
        v14, v24, 0.0, n,
    );
    let k_x = v14.hypot(v24);
    (
        Covariance4 {
            entries,
            omega: tp.omega,
        },
        StandardForm {
            n,
            k_x,
            k_p: -k_x,
            residual: 0.0,
        },
    )
}

/// Entanglement of formation of a symmetric Gaussian state with EPR variance
/// `x`, in ebits. Zero for separable states (`x >= 1`).
pub fn eof(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(PhysicsError::DomainError { what: "eof", value: x });
    }
    if x >= 1.0 {
        return Ok(0.0);
    }
    let (r, s) = (x.sqrt().recip(), x.sqrt());
    let c_plus = 0.25 * (r + s) * (r + s);
    let c_minus = 0.25 * (r - s) * (r - s);
    let h = |c: f64| if c > 0.0 { c * c.log2() } else { 0.0 };
    Ok(h(c_plus) - h(c_minus))
}

/// Two-mode squeezing `-10 log10(x)` in dB. Negative values are
/// anti-squeezing and are not clamped.
pub fn squeezing_db(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(PhysicsError::DomainError {
            what: "squeezing_db",
            value: x,
        });
    }
    Ok(-10.0 * x.log10())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimumDetuning {
    pub d_o: f64,
    /// `4 (d_o / gamma)^2`.
    pub epr_variance: f64,
    pub s_o_db: f64,
    pub eof_o: f64,
    /// Set when the squeezing diverges (gamma -> 0).
    pub unbounded: bool,
}

/// Detuning that maximizes the zero-frequency entanglement,
/// `d_o = sqrt(g^2 + gamma^2/4) - g`.
pub fn optimum_d(derived: &DerivedParams) -> OptimumDetuning {
    let (g, gamma) = (derived.g, derived.gamma);
    let q = 0.25 * gamma * gamma;
    // rationalized form, stable for g >> gamma
    let d_o = if q == 0.0 { 0.0 } else { q / ((g * g + q).sqrt() + g) };
    let x = if gamma > 0.0 { 4.0 * (d_o / gamma).powi(2) } else { 0.0 };
    if x > 0.0 {
        OptimumDetuning {
            d_o,
            epr_variance: x,
            s_o_db: -10.0 * x.log10(),
            eof_o: eof(x).unwrap_or(0.0),
            unbounded: false,
        }
    } else {
        OptimumDetuning {
            d_o,
            epr_variance: 0.0,
            s_o_db: f64::INFINITY,
            eof_o: f64::INFINITY,
            unbounded: true,
        }
    }
}

/// One row of a closed-form spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumPoint {
    pub omega: f64,
    pub result: Result<(StandardForm, EntMetrics)>,
    /// `|omega| >= delta`: the elimination condition is violated here.
    pub beyond_elimination: bool,
}

/// Standard form and metrics of the closed-form model at one frequency.
pub fn evaluate(derived: &DerivedParams, omega: f64) -> Result<(StandardForm, EntMetrics)> {
    let tp = transfer_functions(derived, omega)?;
    let (_, sf) = closed_form_covariance(&tp, derived.n_m, derived);
    Ok((sf, EntMetrics::from_standard_form(&sf)?))
}

/// Evaluates the closed-form model over `grid`, preserving order. Failures
/// are recorded per point.
pub fn spectrum(derived: &DerivedParams, grid: &[f64]) -> Vec<SpectrumPoint> {
    grid.iter()
        .map(|&omega| SpectrumPoint {
            omega,
            result: evaluate(derived, omega),
            beyond_elimination: omega.abs() >= derived.delta,
        })
        .collect()
}

//! Physical constants, device and drive parameters, unit conversions and the
//! validity-regime report.

use std::f64::consts::PI;

use crate::error::{PhysicsError, Result};
use crate::steady::DerivedParams;

/// Fixed CODATA values used throughout the crate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    /// Reduced Planck constant (J s).
    pub hbar: f64,
    /// Boltzmann constant (J/K).
    pub k_b: f64,
    /// Speed of light in vacuum (m/s).
    pub c: f64,
}

pub const CODATA: PhysicalConstants = PhysicalConstants {
    hbar: 1.054571817e-34,
    k_b: 1.380649e-23,
    c: 2.99792458e8,
};

/// Converts a linear frequency in Hz to an angular frequency in rad/s.
#[inline]
pub fn hz_to_rads(f: f64) -> f64 {
    2.0 * PI * f
}

#[inline]
pub fn rads_to_hz(w: f64) -> f64 {
    w / (2.0 * PI)
}

/// How strongly the two normal modes are driven. Exactly one representation
/// is authoritative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DriveStrength {
    /// Normal-mode driving amplitudes Omega_1, Omega_2 (rad/s).
    Amplitudes { omega_1: f64, omega_2: f64 },
    /// Input laser powers P_1, P_2 (W).
    Powers { p_1: f64, p_2: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveSpec {
    pub strength: DriveStrength,
    /// Angular frequency of the laser driving normal mode 1 (rad/s).
    pub omega_l: f64,
    /// Angular frequency of the laser driving normal mode 2 (rad/s).
    pub omega_lp: f64,
}

impl DriveSpec {
    /// Resolves the driving amplitudes (Omega_1, Omega_2) in rad/s.
    pub fn amplitudes(&self, gamma: f64) -> (f64, f64) {
        match self.strength {
            DriveStrength::Amplitudes { omega_1, omega_2 } => (omega_1, omega_2),
            DriveStrength::Powers { p_1, p_2 } => (
                power_to_amplitude(p_1, self.omega_l, gamma),
                power_to_amplitude(p_2, self.omega_lp, gamma),
            ),
        }
    }

    /// Multiplies the drive power by `factor` in whichever representation is
    /// authoritative (amplitudes scale with the square root).
    pub fn scale_power(&self, factor: f64) -> DriveSpec {
        let strength = match self.strength {
            DriveStrength::Amplitudes { omega_1, omega_2 } => DriveStrength::Amplitudes {
                omega_1: omega_1 * factor.sqrt(),
                omega_2: omega_2 * factor.sqrt(),
            },
            DriveStrength::Powers { p_1, p_2 } => DriveStrength::Powers {
                p_1: p_1 * factor,
                p_2: p_2 * factor,
            },
        };
        DriveSpec { strength, ..*self }
    }
}

/// Laboratory-frame description of the device and its drives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    /// Optical resonance of the degenerate WGM pair (rad/s).
    pub omega_p: f64,
    /// Mechanical frequency (rad/s).
    pub omega_m: f64,
    /// Cavity energy decay rate (rad/s).
    pub gamma: f64,
    /// Mechanical energy decay rate (rad/s).
    pub gamma_m: f64,
    /// Coupling between the counter-propagating modes (rad/s).
    pub nu: f64,
    /// Dimensionless single-photon optomechanical coupling.
    pub eta: f64,
    /// Bath temperature (K).
    pub temperature: f64,
    /// Cavity radius (m).
    pub radius: f64,
    /// Refractive index of the resonator material.
    pub n0: f64,
    pub drive: DriveSpec,
}

impl PhysicalParams {
    /// Checks the static invariants of the parameter set.
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("omega_p", self.omega_p),
            ("omega_m", self.omega_m),
            ("gamma", self.gamma),
            ("gamma_m", self.gamma_m),
            ("nu", self.nu),
            ("radius", self.radius),
            ("n0", self.n0),
            ("omega_l", self.drive.omega_l),
            ("omega_lp", self.drive.omega_lp),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(PhysicsError::InvalidParams(format!(
                    "{name} must be finite and positive, got {v}"
                )));
            }
        }
        if !(self.temperature.is_finite() && self.temperature >= 0.0) {
            return Err(PhysicsError::InvalidParams(format!(
                "temperature must be >= 0, got {}",
                self.temperature
            )));
        }
        if !(self.eta > 0.0 && self.eta < 1.0) {
            return Err(PhysicsError::InvalidParams(format!(
                "eta must lie in (0, 1), got {}",
                self.eta
            )));
        }
        if self.gamma_m >= self.omega_m {
            return Err(PhysicsError::InvalidParams(format!(
                "gamma_m ({}) must be below omega_m ({})",
                self.gamma_m, self.omega_m
            )));
        }
        let (d1, d2) = self.detunings();
        if d1.abs() >= 10.0 * self.omega_m || d2.abs() >= 10.0 * self.omega_m {
            return Err(PhysicsError::InvalidParams(format!(
                "laser detunings ({d1}, {d2}) are not within 10 omega_m of the normal modes"
            )));
        }
        let negative = match self.drive.strength {
            DriveStrength::Amplitudes { omega_1, omega_2 } => omega_1 < 0.0 || omega_2 < 0.0,
            DriveStrength::Powers { p_1, p_2 } => p_1 < 0.0 || p_2 < 0.0,
        };
        if negative {
            return Err(PhysicsError::InvalidParams(
                "drive strengths must be non-negative".into(),
            ));
        }
        Ok(())
    }

    /// Bare laser detunings (Delta_1, Delta_2) from the normal modes.
    pub fn detunings(&self) -> (f64, f64) {
        detunings(self.drive.omega_l, self.drive.omega_lp, self.omega_p, self.nu)
    }

    pub fn thermal_occupancy(&self) -> f64 {
        thermal_occupancy(self.omega_m, self.temperature)
    }

    /// Mechanical quality factor omega_m / gamma_m.
    pub fn q_factor(&self) -> f64 {
        self.omega_m / self.gamma_m
    }

    /// Angular free spectral range c / (R n0).
    pub fn free_spectral_range(&self) -> f64 {
        CODATA.c / (self.radius * self.n0)
    }
}

/// Bose-Einstein occupancy of a mode at `omega_m` in a bath at `temperature`.
pub fn thermal_occupancy(omega_m: f64, temperature: f64) -> f64 {
    if temperature == 0.0 {
        return 0.0;
    }
    let x = CODATA.hbar * omega_m / (CODATA.k_b * temperature);
    1.0 / x.exp_m1()
}

/// Omega = 2 sqrt(P gamma / (hbar omega_L)).
pub fn power_to_amplitude(power: f64, omega_l: f64, gamma: f64) -> f64 {
    2.0 * (power * gamma / (CODATA.hbar * omega_l)).sqrt()
}

/// Inverse of [`power_to_amplitude`].
pub fn amplitude_to_power(amplitude: f64, omega_l: f64, gamma: f64) -> f64 {
    amplitude * amplitude * CODATA.hbar * omega_l / (4.0 * gamma)
}

/// Relative tolerance of the drive balance conditions.
pub const BALANCE_TOL: f64 = 1e-9;

/// Normal-mode drive amplitudes from the four physical laser amplitudes.
///
/// Requires Omega_a = Omega_b and Omega_a' = -Omega_b' so that laser L
/// only addresses the symmetric mode and laser L' only the antisymmetric one.
pub fn normal_mode_drives(omega_a: f64, omega_b: f64, omega_ap: f64, omega_bp: f64) -> Result<(f64, f64)> {
    let sym = omega_a + omega_b;
    let anti = omega_ap - omega_bp;
    if (omega_a - omega_b).abs() > BALANCE_TOL * sym.abs() {
        return Err(PhysicsError::ConstraintViolated(format!(
            "Omega_a ({omega_a}) != Omega_b ({omega_b})"
        )));
    }
    if (omega_ap + omega_bp).abs() > BALANCE_TOL * anti.abs() {
        return Err(PhysicsError::ConstraintViolated(format!(
            "Omega_a' ({omega_ap}) != -Omega_b' ({omega_bp})"
        )));
    }
    Ok((sym, anti))
}

/// (Delta_1, Delta_2) = (omega_L - omega_p - nu, omega_L' - omega_p + nu).
pub fn detunings(omega_l: f64, omega_lp: f64, omega_p: f64, nu: f64) -> (f64, f64) {
    (omega_l - omega_p - nu, omega_lp - omega_p + nu)
}

/// eta = (omega_p / omega_m) x_zpf / R with x_zpf = sqrt(hbar / (m omega_m)).
pub fn eta_from_geometry(omega_p: f64, omega_m: f64, mass: f64, radius: f64) -> f64 {
    let x_zpf = (CODATA.hbar / (mass * omega_m)).sqrt();
    omega_p / omega_m * x_zpf / radius
}

/// Minimum ratios that operationalize each "much greater than" condition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeThresholds {
    pub rotating_wave: f64,
    pub adiabatic_elimination: f64,
    pub mode_spacing: f64,
    pub linearization: f64,
}

impl Default for RegimeThresholds {
    fn default() -> Self {
        RegimeThresholds {
            rotating_wave: 5.0,
            adiabatic_elimination: 5.0,
            mode_spacing: 5.0,
            linearization: 5.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegimeCheck {
    pub name: &'static str,
    pub ratio: f64,
    pub threshold: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegimeReport {
    pub checks: Vec<RegimeCheck>,
    pub overall_pass: bool,
}

impl RegimeReport {
    pub fn check(&self, name: &str) -> Option<&RegimeCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Evaluates the approximations behind the linearized, rotating-wave and
/// adiabatically eliminated models as named ratio checks.
///
/// `omega_max` is the largest sideband frequency the caller intends to use.
pub fn validate_regime(
    params: &PhysicalParams,
    derived: &DerivedParams,
    omega_max: f64,
    thresholds: &RegimeThresholds,
) -> RegimeReport {
    let mut checks = Vec::with_capacity(4);
    let mut push = |name, ratio: f64, threshold: f64| {
        checks.push(RegimeCheck {
            name,
            ratio,
            threshold,
            pass: ratio >= threshold,
        });
    };

    let rwa_scale = derived
        .delta
        .abs()
        .max(derived.d.abs())
        .max(derived.gamma)
        .max(derived.gamma_m);
    push("rotating_wave", derived.omega_m / rwa_scale, thresholds.rotating_wave);

    let elim_scale = omega_max.abs().max(derived.gamma_m);
    push(
        "adiabatic_elimination",
        derived.delta / elim_scale,
        thresholds.adiabatic_elimination,
    );

    let (omega_1, omega_2) = params.drive.amplitudes(params.gamma);
    push(
        "mode_spacing",
        params.free_spectral_range() / omega_1.max(omega_2),
        thresholds.mode_spacing,
    );

    let (d1, d2) = params.detunings();
    let shift = 2.0 * derived.eta * derived.eta * derived.omega_m * derived.population();
    push(
        "linearization",
        d1.abs().min(d2.abs()) / shift,
        thresholds.linearization,
    );

    let overall_pass = checks.iter().all(|c| c.pass);
    RegimeReport { checks, overall_pass }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn occupancy_zero_temperature_is_exact() {
        assert_eq!(thermal_occupancy(hz_to_rads(73.5e6), 0.0), 0.0);
        assert_eq!(thermal_occupancy(1.0, 0.0), 0.0);
    }

    #[test]
    fn occupancy_room_and_nitrogen_temperature() {
        let wm = hz_to_rads(73.5e6);
        assert!(rel(thermal_occupancy(wm, 300.0), 8.50e4) < 1e-3);
        assert!(rel(thermal_occupancy(wm, 77.0), 2.183e4) < 1e-3);
    }

    #[test]
    fn occupancy_high_temperature_limit() {
        let wm = hz_to_rads(73.5e6);
        for t in [10.0, 77.0, 300.0, 1000.0] {
            let n = thermal_occupancy(wm, t);
            let classical = CODATA.k_b * t / (CODATA.hbar * wm) - 0.5;
            assert!((n - classical).abs() < 1e-3 * n);
        }
    }

    #[test]
    fn amplitude_from_ten_milliwatts() {
        let om = power_to_amplitude(10e-3, hz_to_rads(300e12), hz_to_rads(3.2e6));
        assert!(rel(om, 2.01e12) < 5e-3, "{om}");
        assert_eq!(power_to_amplitude(0.0, 1.0, 1.0), 0.0);
    }

    #[test]
    fn balanced_drives() {
        assert_eq!(normal_mode_drives(1.0, 1.0, 1.0, -1.0).unwrap(), (2.0, 2.0));
        assert_eq!(normal_mode_drives(1.0, 1.0, 0.0, 0.0).unwrap(), (2.0, 0.0));
        assert!(matches!(
            normal_mode_drives(1.0, 0.9, 1.0, -1.0),
            Err(PhysicsError::ConstraintViolated(_))
        ));
        assert!(matches!(
            normal_mode_drives(1.0, 1.0, 1.0, -0.5),
            Err(PhysicsError::ConstraintViolated(_))
        ));
    }

    #[test]
    fn detuning_arithmetic() {
        let wp = hz_to_rads(300e12);
        let nu = hz_to_rads(1e9);
        // absolute laser frequencies carry ~0.25 rad/s of rounding at 2e15 rad/s
        let tol = 4.0 * wp * f64::EPSILON;
        let (a, b) = detunings(wp + nu, wp - nu, wp, nu);
        assert!(a.abs() <= tol && b.abs() <= tol);
        let (a, b) = detunings(wp, wp, wp, nu);
        assert!((a + nu).abs() <= tol && (b - nu).abs() <= tol);
        let (a, b) = detunings(wp + nu - 5e8, wp - nu + 5e8, wp, nu);
        assert!((a + 5e8).abs() <= tol && (b - 5e8).abs() <= tol);
        // exact on small magnitudes
        assert_eq!(detunings(7.0, 3.0, 5.0, 1.0), (1.0, -1.0));
    }

    #[test]
    fn eta_scaling_laws() {
        let (wp, wm) = (hz_to_rads(300e12), hz_to_rads(73.5e6));
        let base = eta_from_geometry(wp, wm, 1e-11, 38e-6);
        assert!(rel(eta_from_geometry(wp, wm, 1e-11, 76e-6), base / 2.0) < 1e-14);
        assert!(rel(eta_from_geometry(wp, wm, 4e-11, 38e-6), base / 2.0) < 1e-14);
        // pick the mass so that x_zpf / R = 1e-4 omega_m / omega_p
        let radius = 38e-6;
        let x_target = 1e-4 * wm / wp * radius;
        let mass = CODATA.hbar / (wm * x_target * x_target);
        assert!(rel(eta_from_geometry(wp, wm, mass, radius), 1e-4) < 1e-12);
    }
}

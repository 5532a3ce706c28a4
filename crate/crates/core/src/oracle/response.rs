//! Exact frequency-domain solutions of the linearized Langevin systems.
//!
//! Every operator below is the Fourier component at the stated frequency of
//! the corresponding time-domain operator, so `a^dag` "at omega" is
//! `(a(-omega))^dag`. Output rows for adjoint operators are therefore the
//! complex conjugates of their partners solved at the mirrored frequency.

use nalgebra::{DMatrix, DVector, SMatrix};
use num_complex::Complex64;

use crate::adiabatic::transfer_functions;
use crate::error::{PhysicsError, Result};
use crate::steady::DerivedParams;

/// Input operator ordering of every response map.
pub const INPUT_LABELS: [&str; 6] = ["a1_in", "a1_in^dag", "a2_in", "a2_in^dag", "am_in", "am_in^dag"];
/// Output operator ordering of every response map.
pub const OUTPUT_LABELS: [&str; 4] = ["a1_out", "a1_out^dag", "a2_out", "a2_out^dag"];

/// Signs of `[b, b^dag]` for the input operators.
pub const INPUT_COMMUTATORS: [f64; 6] = [1.0, -1.0, 1.0, -1.0, 1.0, -1.0];
/// Expected output commutators.
pub const OUTPUT_COMMUTATORS: [f64; 4] = [1.0, -1.0, 1.0, -1.0];

pub type ResponseMap = SMatrix<Complex64, 4, 6>;

/// Linear map from input noise operators to output operators at sideband
/// frequency `omega`.
///
/// Each channel addresses the input operators at one absolute frequency; the
/// white input noises of different channels are statistically independent.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearResponse {
    pub omega: f64,
    pub channels: Vec<ResponseMap>,
}

impl LinearResponse {
    /// `[o_k, o_k^dag]` for each output, summed over channels.
    pub fn output_commutators(&self) -> [f64; 4] {
        let mut out = [0.0; 4];
        for map in &self.channels {
            for (k, o) in out.iter_mut().enumerate() {
                *o += (0..6)
                    .map(|l| map[(k, l)].norm_sqr() * INPUT_COMMUTATORS[l])
                    .sum::<f64>();
            }
        }
        out
    }

    /// Largest deviation of the output commutators from (1, -1, 1, -1).
    pub fn commutator_error(&self) -> f64 {
        self.output_commutators()
            .iter()
            .zip(OUTPUT_COMMUTATORS)
            .map(|(c, e)| (c - e).abs())
            .fold(0.0, f64::max)
    }

    /// Sum of the channel maps; for single-channel responses this is the map.
    pub fn combined(&self) -> ResponseMap {
        self.channels.iter().fold(ResponseMap::zeros(), |acc, m| acc + m)
    }
}

/// Swaps each operator with its adjoint in the input ordering.
const ADJOINT_INPUT: [usize; 6] = [1, 0, 3, 2, 5, 4];

/// Row of an adjoint output at `omega` from the partner row at `-omega`.
fn adjoint_row(row: &[Complex64; 6]) -> [Complex64; 6] {
    let mut out = [Complex64::new(0.0, 0.0); 6];
    for (l, v) in row.iter().enumerate() {
        out[ADJOINT_INPUT[l]] = v.conj();
    }
    out
}

fn solve(drift: DMatrix<Complex64>, omega: f64, noise: &[f64]) -> Result<DMatrix<Complex64>> {
    let n = drift.nrows();
    let system = DMatrix::from_diagonal_element(n, n, Complex64::new(0.0, -omega)) - drift;
    // Hadamard bound: |det| never exceeds the product of the row norms.
    let scale: f64 = system.row_iter().map(|r| r.norm()).product();
    let lu = system.lu();
    if !(lu.determinant().norm() > 1e-13 * scale) {
        return Err(PhysicsError::SingularDrift { omega });
    }
    let rhs = DMatrix::from_diagonal(&DVector::from_iterator(
        n,
        noise.iter().map(|x| Complex64::new(x.sqrt(), 0.0)),
    ));
    lu.solve(&rhs).ok_or(PhysicsError::SingularDrift { omega })
}

fn cplx(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Interior solution of the three-mode rotating-wave system at `omega`.
///
/// Variables `(a1, a2^dag, a_m)` and inputs `(a1_in, a2_in^dag, am_in)`;
/// returns the 3x3 matrix mapping inputs to intracavity fields.
pub fn rwa3_interior(derived: &DerivedParams, omega: f64) -> Result<DMatrix<Complex64>> {
    let k1 = derived.eta * derived.omega_m * derived.alpha_1.norm();
    let k2 = derived.eta * derived.omega_m * derived.alpha_2.norm();
    let (d, gamma, gm) = (derived.d, derived.gamma, derived.gamma_m);
    let z = cplx(0.0, 0.0);
    #[rustfmt::skip]
    let drift = DMatrix::from_row_slice(3, 3, &[
        cplx(-0.5 * gamma, -d), z,                      cplx(0.0, -k1),
        z,                      cplx(-0.5 * gamma, d),  cplx(0.0, k2),
        cplx(0.0, -k1),         cplx(0.0, -k2),         cplx(-0.5 * gm, derived.delta),
    ]);
    solve(drift, omega, &[gamma, gamma, gm])
}

/// Output rows `(a1_out, a2_out^dag)` of the three-mode system over inputs
/// `(a1_in, a2_in^dag, am_in)`.
fn rwa3_outputs(derived: &DerivedParams, omega: f64) -> Result<[[Complex64; 3]; 2]> {
    let r = rwa3_interior(derived, omega)?;
    let sg = derived.gamma.sqrt();
    let mut out = [[cplx(0.0, 0.0); 3]; 2];
    for (row, o) in out.iter_mut().enumerate() {
        for (col, v) in o.iter_mut().enumerate() {
            *v = sg * r[(row, col)] - if row == col { 1.0 } else { 0.0 };
        }
    }
    Ok(out)
}

fn place(map: &mut ResponseMap, row: usize, values: &[Complex64; 6]) {
    for (l, v) in values.iter().enumerate() {
        map[(row, l)] = *v;
    }
}

/// Solves the three-mode rotating-wave system {a1, a2^dag, a_m} exactly and
/// applies `a_out = -a_in + sqrt(gamma) a`.
pub fn rwa3_solve(derived: &DerivedParams, omega: f64) -> Result<LinearResponse> {
    let spread = |r: [Complex64; 3]| {
        let z = cplx(0.0, 0.0);
        [r[0], z, z, r[1], r[2], z]
    };
    let plus = rwa3_outputs(derived, omega)?;
    let minus = rwa3_outputs(derived, -omega)?;
    let mut map = ResponseMap::zeros();
    place(&mut map, 0, &spread(plus[0]));
    place(&mut map, 3, &spread(plus[1]));
    place(&mut map, 1, &adjoint_row(&spread(minus[0])));
    place(&mut map, 2, &adjoint_row(&spread(minus[1])));
    Ok(LinearResponse {
        omega,
        channels: vec![map],
    })
}

/// Six-operator drift matrix of the linearized system with counter-rotating
/// couplings, ordered `(a1, a1^dag, a2, a2^dag, a_m, a_m^dag)`.
fn full6_drift(derived: &DerivedParams) -> DMatrix<Complex64> {
    let k = [
        derived.eta * derived.omega_m * derived.alpha_1.norm(),
        derived.eta * derived.omega_m * derived.alpha_2.norm(),
    ];
    let dets = [derived.delta_1p, derived.delta_2p];
    let (gamma, gm, wm) = (derived.gamma, derived.gamma_m, derived.omega_m);
    let mut m = DMatrix::zeros(6, 6);
    for j in 0..2 {
        let (a, ad) = (2 * j, 2 * j + 1);
        m[(a, a)] = cplx(-0.5 * gamma, dets[j]);
        m[(ad, ad)] = cplx(-0.5 * gamma, -dets[j]);
        for mech in [4, 5] {
            m[(a, mech)] = cplx(0.0, -k[j]);
            m[(ad, mech)] = cplx(0.0, k[j]);
        }
        for opt in [a, ad] {
            m[(4, opt)] = cplx(0.0, -k[j]);
            m[(5, opt)] = cplx(0.0, k[j]);
        }
    }
    m[(4, 4)] = cplx(-0.5 * gm, -wm);
    m[(5, 5)] = cplx(-0.5 * gm, wm);
    m
}

/// Solves the six-operator system with counter-rotating terms retained.
///
/// The sideband frame of mode 1 rotates at `f = Delta_1' + d` and that of
/// mode 2 at `-f`, so the outputs `a1_out`, `a2_out^dag` at sideband `omega`
/// live at lab frequency `omega - f` while `a1_out^dag`, `a2_out` live at
/// `omega + f`. Each of the two lab frequencies is one independent noise
/// channel.
pub fn full6_solve(derived: &DerivedParams, omega: f64) -> Result<LinearResponse> {
    let drift = full6_drift(derived);
    let frame = derived.delta_1p + derived.d;
    let (gamma, gm) = (derived.gamma, derived.gamma_m);
    let noise = [gamma, gamma, gamma, gamma, gm, gm];
    let sg = derived.gamma.sqrt();
    let output_row = |r: &DMatrix<Complex64>, row: usize| {
        let mut out = [cplx(0.0, 0.0); 6];
        for (col, v) in out.iter_mut().enumerate() {
            *v = sg * r[(row, col)] - if row == col { 1.0 } else { 0.0 };
        }
        out
    };

    let lower = solve(drift.clone(), omega - frame, &noise)?;
    let upper = solve(drift, omega + frame, &noise)?;
    let mut first = ResponseMap::zeros();
    place(&mut first, 0, &output_row(&lower, 0));
    place(&mut first, 3, &output_row(&lower, 3));
    let mut second = ResponseMap::zeros();
    place(&mut second, 1, &output_row(&upper, 1));
    place(&mut second, 2, &output_row(&upper, 2));
    Ok(LinearResponse {
        omega,
        channels: vec![first, second],
    })
}

/// The adiabatically eliminated model written as a response map, built from
/// G, H, I at `omega` and `-omega`.
pub fn adiabatic_response(derived: &DerivedParams, omega: f64) -> Result<LinearResponse> {
    let p = transfer_functions(derived, omega)?;
    let m = transfer_functions(derived, -omega)?;
    let z = cplx(0.0, 0.0);
    // a1_out(w)      = G(w) a1_in - H(w) a2_in^dag + I(w) am_in
    // a2_out^dag(w)  = H(w) a1_in + G(-w)^* a2_in^dag - I(-w)^* am_in
    let a1 = [p.g, z, z, -p.h, p.i, z];
    let a2d = [p.h, z, z, m.g.conj(), -m.i.conj(), z];
    let a1_minus = [m.g, z, z, -m.h, m.i, z];
    let a2d_minus = [m.h, z, z, p.g.conj(), -p.i.conj(), z];
    let mut map = ResponseMap::zeros();
    place(&mut map, 0, &a1);
    place(&mut map, 3, &a2d);
    place(&mut map, 1, &adjoint_row(&a1_minus));
    place(&mut map, 2, &adjoint_row(&a2d_minus));
    Ok(LinearResponse {
        omega,
        channels: vec![map],
    })
}

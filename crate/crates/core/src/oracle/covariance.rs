//! Quadrature covariance matrices: assembly from a linear response, reduction
//! to standard form and the logarithmic negativity.
//!
//! Quadratures are `X = a + a^dag`, `P = (a - a^dag)/i`, so the vacuum has
//! unit variance and `[X, P] = 2i`. At sideband frequency `omega` the vector
//! `xi = (X1, P1, X2, P2)` is built from the Fourier components of the
//! output operators and their adjoints at the same frequency; `V` is the real
//! part of the operator-symmetrized spectral matrix
//! `<xi_i xi_j^dag + xi_j^dag xi_i> / 2`.

use nalgebra::{Matrix2, Matrix4, SMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::adiabatic::StandardForm;
use crate::error::{PhysicsError, Result};
use crate::oracle::response::LinearResponse;

/// 4x4 real symmetric spectral correlation matrix over `(X1, P1, X2, P2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Covariance4 {
    pub entries: Matrix4<f64>,
    pub omega: f64,
}

/// Symplectic form for this quadrature normalization, `[X_j, P_j] = 2i`
/// rescaled so that the vacuum saturates `V + i Omega >= 0`.
fn symplectic_form() -> Matrix4<f64> {
    Matrix4::new(
        0.0, 1.0, 0.0, 0.0, //
        -1.0, 0.0, 0.0, 0.0, //
        0.0, 0.0, 0.0, 1.0, //
        0.0, 0.0, -1.0, 0.0,
    )
}

impl Covariance4 {
    pub fn identity(omega: f64) -> Covariance4 {
        Covariance4 {
            entries: Matrix4::identity(),
            omega,
        }
    }

    pub fn block_a(&self) -> Matrix2<f64> {
        self.entries.fixed_view::<2, 2>(0, 0).into_owned()
    }

    pub fn block_b(&self) -> Matrix2<f64> {
        self.entries.fixed_view::<2, 2>(2, 2).into_owned()
    }

    pub fn block_c(&self) -> Matrix2<f64> {
        self.entries.fixed_view::<2, 2>(0, 2).into_owned()
    }

    pub fn symmetry_error(&self) -> f64 {
        (self.entries - self.entries.transpose()).abs().max()
    }

    /// Smallest eigenvalue of the Hermitian matrix `V + i Omega`.
    ///
    /// Computed through the real embedding `[[V, -Omega], [Omega, V]]`, whose
    /// spectrum is that of `V + i Omega` with every eigenvalue doubled.
    pub fn uncertainty_min_eigenvalue(&self) -> f64 {
        let om = symplectic_form();
        let mut emb = SMatrix::<f64, 8, 8>::zeros();
        emb.fixed_view_mut::<4, 4>(0, 0).copy_from(&self.entries);
        emb.fixed_view_mut::<4, 4>(4, 4).copy_from(&self.entries);
        emb.fixed_view_mut::<4, 4>(0, 4).copy_from(&(-om));
        emb.fixed_view_mut::<4, 4>(4, 0).copy_from(&om);
        SymmetricEigen::new(emb).eigenvalues.min()
    }

    /// Uncertainty relation `V + i Omega >= 0` within `tol`.
    pub fn is_physical(&self, tol: f64) -> bool {
        self.symmetry_error() <= tol && self.uncertainty_min_eigenvalue() >= -tol
    }
}

/// Quadrature transform `xi = T o` for `o = (a1, a1^dag, a2, a2^dag)`.
fn quadrature_transform() -> Matrix4<Complex64> {
    let one = Complex64::new(1.0, 0.0);
    let i = Complex64::i();
    let z = Complex64::new(0.0, 0.0);
    Matrix4::new(
        one, one, z, z, //
        -i, i, z, z, //
        z, z, one, one, //
        z, z, -i, i,
    )
}

/// Symmetrized second moments of the six input operators: vacuum on both
/// optical ports, occupancy `n_m` on the mechanical port; all cross moments
/// vanish.
pub fn input_moments(n_m: f64) -> [f64; 6] {
    [0.5, 0.5, 0.5, 0.5, n_m + 0.5, n_m + 0.5]
}

/// Complex Hermitian symmetrized spectral matrix of `xi`.
pub fn spectral_matrix(resp: &LinearResponse, n_m: f64) -> Matrix4<Complex64> {
    let t = quadrature_transform();
    let moments = input_moments(n_m);
    let mut s = Matrix4::<Complex64>::zeros();
    for map in &resp.channels {
        let mut weighted = *map;
        for (col, m) in moments.iter().enumerate() {
            weighted.column_mut(col).scale_mut(*m);
        }
        s += t * weighted * map.adjoint() * t.adjoint();
    }
    s
}

/// Assembles the output covariance from a response map and the input noise.
pub fn assemble_covariance(resp: &LinearResponse, n_m: f64) -> Covariance4 {
    let s = spectral_matrix(resp, n_m);
    let entries = s.map(|z| z.re);
    // symmetrize away round-off
    let entries = 0.5 * (entries + entries.transpose());
    Covariance4 {
        entries,
        omega: resp.omega,
    }
}

/// Spectral norm of a symmetric 2x2 matrix minus `n I`.
fn block_deviation(m: &Matrix2<f64>, n: f64) -> f64 {
    let mean = 0.5 * (m[(0, 0)] + m[(1, 1)]);
    let half_diff = 0.5 * (m[(0, 0)] - m[(1, 1)]);
    let off = 0.5 * (m[(0, 1)] + m[(1, 0)]);
    (mean - n).abs() + half_diff.hypot(off)
}

/// Singular values of a 2x2 matrix, largest first.
fn singular_values_2x2(c: &Matrix2<f64>) -> (f64, f64) {
    let s = c.norm_squared();
    let det = c.determinant();
    let disc = (s * s - 4.0 * det * det).max(0.0).sqrt();
    let s1 = (0.5 * (s + disc)).sqrt();
    // s1 s2 = |det| is better conditioned than the difference
    let s2 = if s1 > 0.0 { det.abs() / s1 } else { 0.0 };
    (s1, s2)
}

/// Reduces a covariance to the symmetric standard form by local rotations.
///
/// `k_x` is the larger singular value of the cross block and `k_p` carries
/// the sign of its determinant.
pub fn standard_form_reduce(v: &Covariance4) -> Result<StandardForm> {
    let a = v.block_a();
    let b = v.block_b();
    let n = 0.25 * (a.trace() + b.trace());
    let residual = block_deviation(&a, n).max(block_deviation(&b, n));
    if residual > 0.05 * n {
        return Err(PhysicsError::NotSymmetricState { n, residual });
    }
    let c = v.block_c();
    let (s1, s2) = singular_values_2x2(&c);
    let sign = if c.determinant() < 0.0 { -1.0 } else { 1.0 };
    Ok(StandardForm {
        n,
        k_x: s1,
        k_p: sign * s2,
        residual,
    })
}

/// Smallest symplectic eigenvalue of the partially transposed covariance.
pub fn min_pt_symplectic_eigenvalue(v: &Covariance4) -> f64 {
    let det_a = v.block_a().determinant();
    let det_b = v.block_b().determinant();
    let det_c = v.block_c().determinant();
    let det_v = v.entries.determinant();
    let tilde = det_a + det_b - 2.0 * det_c;
    let disc = (tilde * tilde - 4.0 * det_v).max(0.0).sqrt();
    // nu_- nu_+ = sqrt(det V); dividing avoids cancellation for small nu_-
    let upper = 0.5 * (tilde + disc);
    if upper <= 0.0 {
        return 0.0;
    }
    (det_v.max(0.0) / upper).sqrt()
}

/// Logarithmic negativity in ebits, `max(0, -log2 nu_min)`.
pub fn log_negativity(v: &Covariance4) -> f64 {
    let nu = min_pt_symplectic_eigenvalue(v);
    if nu <= 0.0 {
        return f64::INFINITY;
    }
    (-nu.log2()).max(0.0)
}

//! Symplectic spectra and characteristic-polynomial invariants.
//!
//! Two independent routes to the same information: [`symplectic_eigenvalues`]
//! diagonalizes `−(ΩM)²`, while [`characteristic_invariants`] extracts the
//! coefficients of `det(ΩM − y𝟙)` with the Faddeev–LeVerrier trace recursion
//! and never touches an eigensolver.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::symplectic::symplectic_form;

/// Relative tolerance when matching the doubly degenerate eigenvalues of `−(ΩM)²`.
pub const PAIRING_TOL: f64 = 1e-8;

/// Bound on the odd coefficients of the characteristic polynomial of `ΩM / ‖M‖`.
pub const ODD_COEFF_TOL: f64 = 1e-9;

/// The `n` symplectic eigenvalues of a real symmetric `2n × 2n` matrix, sorted ascending.
///
/// These are the `ν_k ≥ 0` with `spec(ΩM) = {±iν_k}`. For positive definite
/// `M` (every covariance matrix and every partial transpose of one) the
/// spectrum of `−(ΩM)²` is obtained from the symmetric matrix
/// `M^{1/2} Ωᵀ M Ω M^{1/2}`, which is similar to it. Other symmetric inputs
/// fall back to a real Schur decomposition of `−(ΩM)²`.
pub fn symplectic_eigenvalues(m: &DMatrix<f64>) -> Result<Vec<f64>> {
    let (rows, cols) = m.shape();
    if rows != cols || rows % 2 != 0 || rows == 0 {
        return Err(Error::BadShape { rows, cols });
    }
    let n = rows / 2;
    let omega = symplectic_form(n);
    let scale = m.amax().max(f64::MIN_POSITIVE);

    let eigen = SymmetricEigen::new(m.clone());
    let squared: Vec<f64> = if eigen.eigenvalues.min() > 1e-12 * scale {
        let sqrt_m = &eigen.eigenvectors
            * DMatrix::from_diagonal(&eigen.eigenvalues.map(f64::sqrt))
            * eigen.eigenvectors.transpose();
        let k = &sqrt_m * omega.transpose() * m * &omega * &sqrt_m;
        let k = (&k + k.transpose()) * 0.5;
        SymmetricEigen::new(k).eigenvalues.iter().copied().collect()
    } else {
        let om = &omega * m;
        let target = -(&om * &om);
        let spectrum = target.complex_eigenvalues();
        let max_mod = spectrum.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1e-300);
        if let Some(z) = spectrum.iter().find(|z| z.im.abs() > PAIRING_TOL * max_mod) {
            return Err(Error::PairingFailure(format!("complex eigenvalue {z} of -(ΩM)^2")));
        }
        spectrum.iter().map(|z| z.re).collect()
    };
    pair_up(squared)
}

fn pair_up(mut squared: Vec<f64>) -> Result<Vec<f64>> {
    squared.sort_by(f64::total_cmp);
    let scale = squared
        .iter()
        .fold(0.0_f64, |acc, v| acc.max(v.abs()))
        .max(f64::MIN_POSITIVE);
    let mut nu = Vec::with_capacity(squared.len() / 2);
    for pair in squared.chunks_exact(2) {
        let (lo, hi) = (pair[0], pair[1]);
        if (hi - lo).abs() > PAIRING_TOL * scale.max(1.0) {
            return Err(Error::PairingFailure(format!(
                "eigenvalues {lo:.6e} and {hi:.6e} of -(ΩM)^2 do not coincide"
            )));
        }
        let mean = 0.5 * (lo + hi);
        if mean < -PAIRING_TOL * scale.max(1.0) {
            return Err(Error::PairingFailure(format!(
                "negative eigenvalue {mean:.6e} of -(ΩM)^2"
            )));
        }
        nu.push(mean.max(0.0).sqrt());
    }
    Ok(nu)
}

/// Coefficients `[1, p1, ..., pn]` of `det(y𝟙 − A) = yⁿ + p1 yⁿ⁻¹ + ... + pn`,
/// computed with the Faddeev–LeVerrier recursion.
pub fn characteristic_polynomial(a: &DMatrix<f64>) -> Vec<f64> {
    let dim = a.nrows();
    let identity = DMatrix::<f64>::identity(dim, dim);
    let mut coeffs = Vec::with_capacity(dim + 1);
    coeffs.push(1.0);
    let mut aux = identity.clone();
    for k in 1..=dim {
        let product = a * &aux;
        let c = -product.trace() / k as f64;
        coeffs.push(c);
        aux = product + &identity * c;
    }
    coeffs
}

/// The even coefficients of `det(ΩM − y𝟙)`, i.e. `(I_1, ..., I_n)` in
/// `y^{2n} + I_1 y^{2n−2} + ... + I_n`.
///
/// The recursion runs on `ΩM / 2^e` with `2^e ≈ ‖M‖`, so rescaling is exact and
/// every coefficient is O(1). Fails when an odd coefficient of the scaled
/// polynomial exceeds [`ODD_COEFF_TOL`], which only happens for malformed
/// (non-symmetric) input.
pub fn symplectic_invariants(m: &DMatrix<f64>) -> Result<Vec<f64>> {
    let (rows, cols) = m.shape();
    if rows != cols || rows % 2 != 0 || rows == 0 {
        return Err(Error::BadShape { rows, cols });
    }
    let norm = m.norm();
    let scale = if norm > 0.0 && norm.is_finite() {
        2f64.powi(norm.log2().round() as i32)
    } else {
        1.0
    };
    let omega = symplectic_form(rows / 2);
    let coeffs = characteristic_polynomial(&(&omega * m / scale));
    let odd_max = coeffs
        .iter()
        .skip(1)
        .step_by(2)
        .fold(0.0_f64, |acc, c| acc.max(c.abs()));
    if odd_max > ODD_COEFF_TOL {
        return Err(Error::OddCoefficient { value: odd_max });
    }
    Ok(coeffs
        .into_iter()
        .enumerate()
        .skip(2)
        .step_by(2)
        .map(|(k, c)| c * scale.powi(k as i32))
        .collect())
}

/// Symplectic invariants of a three-mode matrix:
/// `det(ΩM − y𝟙) = y⁶ + I1 y⁴ + I2 y² + I3`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InvariantTriple {
    pub i1: f64,
    pub i2: f64,
    pub i3: f64,
}

impl InvariantTriple {
    /// `I1 − I2 + I3 − 1`.
    pub fn sigma(&self) -> f64 {
        self.i1 - self.i2 + self.i3 - 1.0
    }

    /// Invariants of `∏ (y² + ν_k²)` for given symplectic eigenvalues.
    pub fn from_symplectic_eigenvalues(nu: [f64; 3]) -> Self {
        let [a, b, c] = nu.map(|v| v * v);
        Self {
            i1: a + b + c,
            i2: a * b + a * c + b * c,
            i3: a * b * c,
        }
    }
}

pub fn characteristic_invariants(m: &DMatrix<f64>) -> Result<InvariantTriple> {
    if m.shape() != (6, 6) {
        return Err(Error::DimensionMismatch {
            expected: 6,
            actual: m.nrows(),
        });
    }
    let inv = symplectic_invariants(m)?;
    Ok(InvariantTriple {
        i1: inv[0],
        i2: inv[1],
        i3: inv[2],
    })
}

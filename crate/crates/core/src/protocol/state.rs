//! Step 1: the three-mode fully separable resource state and its LOCC recipe.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::Serialize;
use std::f64::consts::SQRT_2;

use super::params::Squeezing;
use crate::covariance::{apply_transform, CovarianceMatrix};
use crate::error::{Error, Result};
use crate::separability::Separable;
use crate::symplectic::balanced_beamsplitter;

/// Mode indices used throughout the protocol.
pub const MODE_A: usize = 0;
pub const MODE_B: usize = 1;
pub const MODE_C: usize = 2;

/// Relative tolerance on the smallest eigenvalue of `Q` for the PSD test.
pub const PSD_TOL: f64 = 1e-9;

/// Relative tolerance on `α² − β² − τ² − 1`.
pub const PURITY_TOL: f64 = 1e-8;

/// Locally squeezed two-mode squeezed vacuum of modes A and B.
pub fn make_gamma_ab(sq: &Squeezing) -> CovarianceMatrix {
    let (up, down) = ((2.0 * sq.d).exp(), (-2.0 * sq.d).exp());
    let (a, c) = (sq.a, sq.c);
    #[rustfmt::skip]
    let entries = [
        up * a,     0.0,          -up * c,    0.0,
        0.0,        down * a,     0.0,        down * c,
        -up * c,    0.0,          up * a,     0.0,
        0.0,        down * c,     0.0,        down * a,
    ];
    CovarianceMatrix::from_symmetrized(DMatrix::from_row_slice(4, 4, &entries))
}

/// The two classical-noise directions and their angle.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseVectors {
    pub q1: DVector<f64>,
    pub q2: DVector<f64>,
    pub phi: f64,
}

impl NoiseVectors {
    /// `P = q1 q1ᵀ + q2 q2ᵀ`.
    pub fn projector(&self) -> DMatrix<f64> {
        &self.q1 * self.q1.transpose() + &self.q2 * self.q2.transpose()
    }
}

pub fn make_noise_vectors(sq: &Squeezing) -> NoiseVectors {
    let (s, c) = sq.phi.sin_cos();
    NoiseVectors {
        q1: DVector::from_row_slice(&[0.0, s, 0.0, -s, SQRT_2, SQRT_2]),
        q2: DVector::from_row_slice(&[c, 0.0, c, 0.0, SQRT_2, SQRT_2]),
        phi: sq.phi,
    }
}

/// `γ1(x) = γ_AB ⊕ 𝟙_C + x P`.
pub fn make_gamma1(sq: &Squeezing, x: f64) -> Result<CovarianceMatrix> {
    if !(x.is_finite() && x >= 0.0) {
        return Err(Error::InvalidParameters(format!("requires x >= 0, got x={x}")));
    }
    let base = make_gamma_ab(sq).direct_sum(&CovarianceMatrix::vacuum(1));
    let noise = make_noise_vectors(sq).projector() * x;
    Ok(CovarianceMatrix::from_symmetrized(base.matrix() + noise))
}

pub fn compute_x_sep(sq: &Squeezing) -> f64 {
    sq.x_sep
}

/// Pure single-mode states whose product, displaced by correlated Gaussian
/// noise, reproduces `γ1(x)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocalStateSet {
    pub gamma_a: CovarianceMatrix,
    pub gamma_b: CovarianceMatrix,
    pub gamma_c: CovarianceMatrix,
    pub alpha: f64,
    pub beta: f64,
    pub tau: f64,
    /// Squeezing of the momentum-squeezed vacua for A and B.
    pub s: f64,
    /// Rotation angle in radians; A is rotated by `+θ`, B by `−θ` (see [`crate::symplectic::rotation_block`]).
    pub theta: f64,
}

impl LocalStateSet {
    /// `γ_A ⊕ γ_B ⊕ γ_C`.
    pub fn product(&self) -> CovarianceMatrix {
        self.gamma_a.direct_sum(&self.gamma_b).direct_sum(&self.gamma_c)
    }
}

pub fn make_local_cms(sq: &Squeezing) -> Result<LocalStateSet> {
    let (d, r, delta) = (sq.d, sq.r, sq.delta);
    let two_phi = 2.0 * sq.phi;
    let pre = (-2.0 * r).exp() / (2.0 * delta);
    let e4r = (4.0 * r).exp();
    let (ch, sh) = ((4.0 * d).cosh(), (4.0 * d).sinh());

    let alpha = pre * (e4r + ch - sh * two_phi.cos());
    let beta = pre * ((e4r - ch) * two_phi.cos() + sh);
    let tau = sq.c / delta * two_phi.sin();

    let residual = alpha * alpha - beta * beta - tau * tau - 1.0;
    if residual.abs() > PURITY_TOL * alpha * alpha {
        return Err(Error::PurityViolation { residual });
    }

    let root = (alpha * alpha - 1.0).max(0.0).sqrt();
    let s = 0.5 * (alpha + root).ln();
    let theta = if root > 0.0 {
        ((root - beta) / (root + beta)).max(0.0).sqrt().atan()
    } else {
        0.0
    };

    let local = |sign: f64| {
        CovarianceMatrix::from_symmetrized(DMatrix::from_row_slice(
            2,
            2,
            &[alpha + beta, -sign * tau, -sign * tau, alpha - beta],
        ))
    };
    Ok(LocalStateSet {
        gamma_a: local(1.0),
        gamma_b: local(-1.0),
        gamma_c: CovarianceMatrix::vacuum(1),
        alpha,
        beta,
        tau,
        s,
        theta,
    })
}

/// The full-separability witness `Q(x) = γ1(x) − γ_A ⊕ γ_B ⊕ γ_C`.
#[derive(Debug, Clone, PartialEq)]
pub struct WitnessMatrix {
    pub q: DMatrix<f64>,
    /// `U_AB Q U_ABᵀ`, isospectral with `Q`.
    pub rotated: DMatrix<f64>,
    /// Eigenvalues of `Q`, ascending.
    pub eigenvalues: Vec<f64>,
    /// `Yes` when the smallest eigenvalue is at least `−1e−9 ‖Q‖`, otherwise `No`.
    pub psd: Separable,
}

impl WitnessMatrix {
    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues[0]
    }
}

pub fn make_q_matrix(sq: &Squeezing, x: f64) -> Result<WitnessMatrix> {
    let gamma1 = make_gamma1(sq, x)?;
    let locals = make_local_cms(sq)?;
    let q = gamma1.matrix() - locals.product().matrix();
    let u_ab = balanced_beamsplitter(3, MODE_A, MODE_B)?;
    let rotated = u_ab.matrix() * &q * u_ab.matrix().transpose();
    let eigenvalues = sorted_eigenvalues(&q);
    let scale = q.amax().max(1.0);
    let psd = if eigenvalues[0] >= -PSD_TOL * scale {
        Separable::Yes
    } else {
        Separable::No
    };
    Ok(WitnessMatrix {
        q,
        rotated,
        eigenvalues,
        psd,
    })
}

pub(crate) fn sorted_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let sym = (m + m.transpose()) * 0.5;
    let mut ev: Vec<f64> = SymmetricEigen::new(sym).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// The two inputs that a balanced beam splitter maps onto [`make_gamma_ab`]:
/// momentum-squeezed vacua with position variances `e^{2(d−r)}` and `e^{2(d+r)}`.
pub fn gamma_ab_inputs(sq: &Squeezing) -> CovarianceMatrix {
    let single =
        |v: f64| CovarianceMatrix::from_symmetrized(DMatrix::from_diagonal(&DVector::from_row_slice(&[v, 1.0 / v])));
    single(sq.v_a()).direct_sum(&single(sq.v_b()))
}

/// Rebuilds `γ_AB` by mixing [`gamma_ab_inputs`] on a balanced beam splitter.
pub fn gamma_ab_from_inputs(sq: &Squeezing) -> Result<CovarianceMatrix> {
    apply_transform(&balanced_beamsplitter(2, 0, 1)?, &gamma_ab_inputs(sq))
}

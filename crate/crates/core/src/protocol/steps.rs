//! Steps 2 and 3 (the two beam splitters), the closed-form reduced state of
//! A and B, and homodyne conditioning on the ancilla.

use nalgebra::{DMatrix, Matrix2, Vector2};
use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, SQRT_2};

use super::params::Squeezing;
use super::state::{MODE_A, MODE_B, MODE_C};
use crate::covariance::{apply_transform, CovarianceMatrix};
use crate::error::{Error, Result};
use crate::symplectic::{balanced_beamsplitter, check_mode};

fn require_three_modes(gamma: &CovarianceMatrix) -> Result<()> {
    if gamma.n_modes() != 3 {
        return Err(Error::DimensionMismatch {
            expected: 6,
            actual: gamma.matrix().nrows(),
        });
    }
    Ok(())
}

/// Alice mixes A and C on a balanced beam splitter.
pub fn run_step2(gamma1: &CovarianceMatrix) -> Result<CovarianceMatrix> {
    require_three_modes(gamma1)?;
    apply_transform(&balanced_beamsplitter(3, MODE_A, MODE_C)?, gamma1)
}

/// Bob mixes B and the received C on a balanced beam splitter.
pub fn run_step3(gamma2: &CovarianceMatrix) -> Result<CovarianceMatrix> {
    require_three_modes(gamma2)?;
    apply_transform(&balanced_beamsplitter(3, MODE_B, MODE_C)?, gamma2)
}

/// Diagonal and off-diagonal 2×2 blocks of a two-mode covariance matrix
/// `[[A, C], [Cᵀ, B]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoModeBlocks {
    pub a: Matrix2<f64>,
    pub b: Matrix2<f64>,
    pub c: Matrix2<f64>,
}

impl TwoModeBlocks {
    pub fn of(gamma: &CovarianceMatrix) -> Result<Self> {
        if gamma.n_modes() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 4,
                actual: gamma.matrix().nrows(),
            });
        }
        Ok(Self {
            a: gamma.block(0, 0),
            b: gamma.block(1, 1),
            c: gamma.block(0, 1),
        })
    }

    pub fn to_covariance(&self) -> Result<CovarianceMatrix> {
        let mut m = DMatrix::zeros(4, 4);
        m.view_mut((0, 0), (2, 2)).copy_from(&self.a);
        m.view_mut((2, 2), (2, 2)).copy_from(&self.b);
        m.view_mut((0, 2), (2, 2)).copy_from(&self.c);
        m.view_mut((2, 0), (2, 2)).copy_from(&self.c.transpose());
        CovarianceMatrix::new(m)
    }

    /// Largest entrywise difference across the three blocks.
    pub fn max_deviation(&self, other: &TwoModeBlocks) -> f64 {
        (self.a - other.a)
            .amax()
            .max((self.b - other.b).amax())
            .max((self.c - other.c).amax())
    }
}

/// Closed-form blocks of the reduced A–B state after step 3, written in
/// terms of `a±`, `b±`, `c±`, `g_j` and `h_j`.
///
/// This never touches a beam-splitter matrix; it serves as an independent
/// check on [`run_step2`] and [`run_step3`].
pub fn closed_form_reduced_ab(sq: &Squeezing, x: f64) -> Result<TwoModeBlocks> {
    if !(x.is_finite() && x >= 0.0) {
        return Err(Error::InvalidParameters(format!("requires x >= 0, got x={x}")));
    }
    let (a, c) = (sq.a, sq.c);
    let (up, down) = ((2.0 * sq.d).exp(), (-2.0 * sq.d).exp());

    let a_plus = (up * a + 1.0) / 2.0;
    let a_minus = (down * a + 1.0) / 2.0;
    let b_plus = (up * (3.0 * a - 2.0 * SQRT_2 * c) + 1.0) / 4.0;
    let b_minus = (down * (3.0 * a + 2.0 * SQRT_2 * c) + 1.0) / 4.0;
    let c_plus = (up * (a - SQRT_2 * c) - 1.0) / (2.0 * SQRT_2);
    let c_minus = (down * (a + SQRT_2 * c) - 1.0) / (2.0 * SQRT_2);

    let g = |j: u32| 1.0 + (sq.phi + j as f64 * FRAC_PI_2).sin() / SQRT_2;
    let h = |j: u32| {
        let sign = if j.is_multiple_of(2) { 1.0 } else { -1.0 };
        (SQRT_2 - sign) * (sq.phi + j as f64 * FRAC_PI_2).sin() / 2.0 + sign / SQRT_2
    };
    let (g0, g1, h0, h1) = (g(0), g(1), h(0), h(1));
    let r2 = FRAC_1_SQRT_2;

    let block_a = Matrix2::new(
        a_plus + (g1 * g1 + 1.0) * x,
        (g0 + g1) * x,
        (g0 + g1) * x,
        a_minus + (g0 * g0 + 1.0) * x,
    );
    let block_b = Matrix2::new(
        b_plus + (h1 * h1 + 0.5) * x,
        (h0 - h1) * r2 * x,
        (h0 - h1) * r2 * x,
        b_minus + (h0 * h0 + 0.5) * x,
    );
    let block_c = Matrix2::new(
        c_plus + (g1 * h1 - r2) * x,
        -(h0 + g1 * r2) * x,
        (h1 - g0 * r2) * x,
        c_minus - (g0 * h0 + r2) * x,
    );
    Ok(TwoModeBlocks {
        a: block_a,
        b: block_b,
        c: block_c,
    })
}

/// Lowest PT symplectic eigenvalue of a two-mode state from its block determinants:
/// `ν = √((κ − √(κ² − 4 det γ)) / 2)` with `κ = det A + det B − 2 det C`.
pub fn nu_ab(gamma: &CovarianceMatrix) -> Result<f64> {
    let blocks = TwoModeBlocks::of(gamma)?;
    let kappa = blocks.a.determinant() + blocks.b.determinant() - 2.0 * blocks.c.determinant();
    let det = gamma.determinant();
    let inner = kappa * kappa - 4.0 * det;
    if inner < -1e-12 * kappa.abs().max(1.0).powi(2) {
        return Err(Error::NegativeRadicand(inner));
    }
    let outer = (kappa - inner.max(0.0).sqrt()) / 2.0;
    if outer < -1e-12 * kappa.abs().max(1.0) {
        return Err(Error::NegativeRadicand(outer));
    }
    Ok(outer.max(0.0).sqrt())
}

/// Conditional state of the other modes after a homodyne measurement of
/// `cos(angle) x + sin(angle) p` on `mode`.
///
/// With `Γ` the kept block, `Γ_m` the measured block and `σ` their cross
/// block, the result is `Γ − σ (Π Γ_m Π)⁺ σᵀ` where `Π = n nᵀ` projects on
/// `n = (cos angle, sin angle)`; the pseudoinverse reduces to
/// `n nᵀ / (nᵀ Γ_m n)`.
pub fn homodyne_condition(gamma: &CovarianceMatrix, mode: usize, angle: f64) -> Result<CovarianceMatrix> {
    let n_modes = gamma.n_modes();
    check_mode(mode, n_modes)?;
    if n_modes < 2 {
        return Err(Error::InvalidParameters(
            "homodyne conditioning needs at least two modes".into(),
        ));
    }
    let kept: Vec<usize> = (0..n_modes).filter(|&m| m != mode).collect();
    let kept_block = gamma.reduced(&kept)?;
    let rows: Vec<usize> = kept.iter().flat_map(|&m| [2 * m, 2 * m + 1]).collect();
    let g = gamma.matrix();
    let cross = DMatrix::from_fn(rows.len(), 2, |i, j| g[(rows[i], 2 * mode + j)]);
    let measured = gamma.block(mode, mode);

    let (s, c) = angle.sin_cos();
    let direction = Vector2::new(c, s);
    let variance = direction.dot(&(measured * direction));
    if variance <= 1e-12 * measured.amax().max(1.0) {
        return Err(Error::SingularMeasurement { variance });
    }
    let projected = &cross * direction;
    let update = &projected * projected.transpose() / variance;
    Ok(CovarianceMatrix::from_symmetrized(kept_block.matrix() - update))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::covariance::ModePartition;
    use crate::protocol::state::make_gamma1;
    use crate::separability::ppt_lowest_nu;
    use approx::assert_relative_eq;

    #[test]
    fn steps_preserve_vacuum() {
        let vac = CovarianceMatrix::vacuum(3);
        let out = run_step3(&run_step2(&vac).unwrap()).unwrap();
        assert!((out.matrix() - DMatrix::<f64>::identity(6, 6)).amax() < 1e-15);
        assert!(run_step2(&CovarianceMatrix::vacuum(2)).is_err());
    }

    #[test]
    fn closed_form_matches_pipeline_at_flagship() {
        let sq = Squeezing::flagship();
        let g3 = run_step3(&run_step2(&make_gamma1(&sq, 1.041).unwrap()).unwrap()).unwrap();
        let numeric = TwoModeBlocks::of(&g3.reduced(&[MODE_A, MODE_B]).unwrap()).unwrap();
        let closed = closed_form_reduced_ab(&sq, 1.041).unwrap();
        assert!(numeric.max_deviation(&closed) < 1e-10);
    }

    #[test]
    fn closed_form_at_zero_noise_is_beam_split_gamma_ab() {
        let sq = Squeezing::new(0.8, 0.25).unwrap();
        let g3 = run_step3(&run_step2(&make_gamma1(&sq, 0.0).unwrap()).unwrap()).unwrap();
        let numeric = TwoModeBlocks::of(&g3.reduced(&[MODE_A, MODE_B]).unwrap()).unwrap();
        let closed = closed_form_reduced_ab(&sq, 0.0).unwrap();
        assert!(numeric.max_deviation(&closed) < 1e-12);
    }

    #[test]
    fn g_sum_at_flagship() {
        let sq = Squeezing::flagship();
        let (s, c) = sq.phi.sin_cos();
        let expected = 2.0 + (s + c) / SQRT_2;
        assert_relative_eq!(expected, 2.9733, epsilon = 1e-4);
        let blocks = closed_form_reduced_ab(&sq, 1.0).unwrap();
        assert_relative_eq!(blocks.a[(0, 1)], expected, epsilon = 1e-14);
    }

    #[test]
    fn nu_ab_vacuum_and_tmsv() {
        assert_relative_eq!(nu_ab(&CovarianceMatrix::vacuum(2)).unwrap(), 1.0, epsilon = 1e-14);
        let r = 0.4;
        let sq = Squeezing::new(0.9, r).unwrap();
        let g = crate::protocol::state::make_gamma_ab(&sq);
        assert_relative_eq!(nu_ab(&g).unwrap(), (-2.0 * r).exp(), epsilon = 1e-12);
        let p = ModePartition::new(&[1], &[0], 2).unwrap();
        assert_relative_eq!(nu_ab(&g).unwrap(), ppt_lowest_nu(&g, &p).unwrap(), epsilon = 1e-12);
    }

    #[test]
    fn homodyne_on_product_state_is_marginal() {
        let kept = CovarianceMatrix::from_row_slice(
            4,
            &[
                2.0, 0.1, 0.5, 0.0, 0.1, 1.5, 0.0, -0.3, 0.5, 0.0, 2.5, 0.2, 0.0, -0.3, 0.2, 1.8,
            ],
        )
        .unwrap();
        let measured = CovarianceMatrix::from_row_slice(2, &[3.0, 0.4, 0.4, 1.0]).unwrap();
        let product = kept.direct_sum(&measured);
        let out = homodyne_condition(&product, 2, 0.7).unwrap();
        assert_eq!(out, kept);
    }

    #[test]
    fn homodyne_x_and_p_agree_on_symmetric_state() {
        // Invariant under x_C <-> p_C together with x_A <-> p_A.
        let gamma = CovarianceMatrix::from_row_slice(
            4,
            &[
                2.0, 0.0, 0.7, 0.0, 0.0, 2.0, 0.0, 0.7, 0.7, 0.0, 1.5, 0.0, 0.0, 0.7, 0.0, 1.5,
            ],
        )
        .unwrap();
        let at_x = homodyne_condition(&gamma, 1, 0.0).unwrap();
        let at_p = homodyne_condition(&gamma, 1, FRAC_PI_2).unwrap();
        let nu = |g: &CovarianceMatrix| g.symplectic_spectrum().unwrap()[0];
        assert_relative_eq!(nu(&at_x), nu(&at_p), epsilon = 1e-12);
    }

    #[test]
    fn homodyne_rejects_singular_direction() {
        let mut m = DMatrix::<f64>::identity(4, 4);
        m[(2, 2)] = 0.0;
        let g = CovarianceMatrix::new(m).unwrap();
        assert!(matches!(
            homodyne_condition(&g, 1, 0.0),
            Err(Error::SingularMeasurement { .. })
        ));
    }
}

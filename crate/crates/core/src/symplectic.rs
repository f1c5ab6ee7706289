//! Symplectic form and Gaussian unitaries in phase space.
//!
//! Quadratures are ordered `(x1, p1, x2, p2, ...)`. Every transform here
//! satisfies `S Ω Sᵀ = Ω`.

use nalgebra::{DMatrix, Matrix2};
use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::{Error, Result};

/// Tolerance on `‖S Ω Sᵀ − Ω‖_max` accepted by [`SymplecticTransform::new`].
pub const SYMPLECTIC_TOL: f64 = 1e-12;

/// The `2n × 2n` symplectic form `Ω = ⊕ J` with `J = [[0, 1], [-1, 0]]`.
pub fn symplectic_form(n_modes: usize) -> DMatrix<f64> {
    let dim = 2 * n_modes;
    let mut omega = DMatrix::zeros(dim, dim);
    for k in 0..n_modes {
        omega[(2 * k, 2 * k + 1)] = 1.0;
        omega[(2 * k + 1, 2 * k)] = -1.0;
    }
    omega
}

/// A real symplectic matrix acting on `n_modes` modes.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticTransform {
    matrix: DMatrix<f64>,
}

impl SymplecticTransform {
    /// Wraps `matrix`, checking the symplectic condition.
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        let (rows, cols) = matrix.shape();
        if rows != cols || rows % 2 != 0 || rows == 0 {
            return Err(Error::BadShape { rows, cols });
        }
        let deviation = symplectic_deviation(&matrix);
        // Scale with the entries so strongly squeezing transforms are not rejected on rounding.
        let scale = matrix.amax().powi(2).max(1.0);
        if deviation > SYMPLECTIC_TOL * scale {
            return Err(Error::NotSymplectic { deviation });
        }
        Ok(Self { matrix })
    }

    pub fn identity(n_modes: usize) -> Self {
        Self {
            matrix: DMatrix::identity(2 * n_modes, 2 * n_modes),
        }
    }

    pub fn n_modes(&self) -> usize {
        self.matrix.nrows() / 2
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.matrix
    }

    /// `self ∘ first`: the transform that applies `first` and then `self`.
    pub fn after(&self, first: &SymplecticTransform) -> Result<Self> {
        if self.n_modes() != first.n_modes() {
            return Err(Error::DimensionMismatch {
                expected: self.matrix.nrows(),
                actual: first.matrix.nrows(),
            });
        }
        Ok(Self {
            matrix: &self.matrix * &first.matrix,
        })
    }

    pub fn inverse(&self) -> Self {
        // S⁻¹ = -Ω Sᵀ Ω for symplectic S.
        let omega = symplectic_form(self.n_modes());
        Self {
            matrix: -(&omega * self.matrix.transpose() * &omega),
        }
    }

    /// `‖S Ω Sᵀ − Ω‖_max`.
    pub fn deviation(&self) -> f64 {
        symplectic_deviation(&self.matrix)
    }

    /// Embeds a mode-mixing orthogonal 2×2 block that acts identically on
    /// `x` and `p` of modes `i` and `j`.
    fn passive_pair(n_modes: usize, i: usize, j: usize, block: Matrix2<f64>) -> Result<Self> {
        check_mode(i, n_modes)?;
        check_mode(j, n_modes)?;
        if i == j {
            return Err(Error::SameMode(i));
        }
        let mut matrix = DMatrix::identity(2 * n_modes, 2 * n_modes);
        for q in 0..2 {
            let (ri, rj) = (2 * i + q, 2 * j + q);
            matrix[(ri, ri)] = block[(0, 0)];
            matrix[(ri, rj)] = block[(0, 1)];
            matrix[(rj, ri)] = block[(1, 0)];
            matrix[(rj, rj)] = block[(1, 1)];
        }
        Ok(Self { matrix })
    }
}

fn symplectic_deviation(matrix: &DMatrix<f64>) -> f64 {
    let omega = symplectic_form(matrix.nrows() / 2);
    (matrix * &omega * matrix.transpose() - omega).amax()
}

pub(crate) fn check_mode(index: usize, n_modes: usize) -> Result<()> {
    if index >= n_modes {
        Err(Error::ModeOutOfRange { index, n_modes })
    } else {
        Ok(())
    }
}

/// Beam splitter with mixing angle `angle` between modes `i` and `j`:
///
/// ```text
/// x_i' = cos(angle) x_i + sin(angle) x_j
/// x_j' = sin(angle) x_i − cos(angle) x_j
/// ```
///
/// and the same for the momenta. `angle = π/4` is the balanced splitter.
pub fn beamsplitter(n_modes: usize, i: usize, j: usize, angle: f64) -> Result<SymplecticTransform> {
    let (s, c) = angle.sin_cos();
    SymplecticTransform::passive_pair(n_modes, i, j, Matrix2::new(c, s, s, -c))
}

/// Balanced (50:50) beam splitter: `x_i' = (x_i + x_j)/√2`, `x_j' = (x_i − x_j)/√2`.
///
/// This sign convention turns two momentum-squeezed vacua with position
/// variances `e^{2(d−r)}` and `e^{2(d+r)}` into the locally squeezed
/// two-mode squeezed vacuum with anticorrelated positions.
pub fn balanced_beamsplitter(n_modes: usize, i: usize, j: usize) -> Result<SymplecticTransform> {
    let h = FRAC_1_SQRT_2;
    SymplecticTransform::passive_pair(n_modes, i, j, Matrix2::new(h, h, h, -h))
}

/// 2×2 phase-space rotation `R(θ) = [[cos θ, sin θ], [−sin θ, cos θ]]`.
///
/// Positive angles rotate clockwise in the `(x, p)` plane.
pub fn rotation_block(angle: f64) -> Matrix2<f64> {
    let (s, c) = angle.sin_cos();
    Matrix2::new(c, s, -s, c)
}

/// Single-mode squeeze followed by a rotation, `R(angle) · diag(e^squeeze, e^−squeeze)`,
/// embedded at `mode`.
pub fn local_gaussian(n_modes: usize, mode: usize, squeeze: f64, rotation_angle: f64) -> Result<SymplecticTransform> {
    check_mode(mode, n_modes)?;
    let block = rotation_block(rotation_angle) * Matrix2::new(squeeze.exp(), 0.0, 0.0, (-squeeze).exp());
    let mut matrix = DMatrix::identity(2 * n_modes, 2 * n_modes);
    matrix.view_mut((2 * mode, 2 * mode), (2, 2)).copy_from(&block);
    Ok(SymplecticTransform { matrix })
}

/// Phase rotation by `angle` on `mode` (a squeeze-free [`local_gaussian`]).
pub fn phase_rotation(n_modes: usize, mode: usize, angle: f64) -> Result<SymplecticTransform> {
    local_gaussian(n_modes, mode, 0.0, angle)
}

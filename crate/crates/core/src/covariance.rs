//! Covariance matrices of Gaussian states.
//!
//! Normalization: the vacuum has the identity as its covariance matrix, so a
//! single-mode state is physical iff its symplectic eigenvalue is at least 1.

use nalgebra::DMatrix;
use serde::{Serialize, Serializer};
use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::spectrum::symplectic_eigenvalues;
use crate::symplectic::{check_mode, SymplecticTransform};

/// Relative tolerance for the symmetry check in [`CovarianceMatrix::new`].
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Absolute slack on the bona fide condition `ν_min ≥ 1`.
pub const PHYSICAL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    entries: DMatrix<f64>,
}

impl CovarianceMatrix {
    /// Validates shape and symmetry, then stores the exactly symmetrized matrix.
    pub fn new(entries: DMatrix<f64>) -> Result<Self> {
        let (rows, cols) = entries.shape();
        if rows != cols || rows % 2 != 0 || rows == 0 {
            return Err(Error::BadShape { rows, cols });
        }
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(Error::NotSymmetric { asymmetry: f64::NAN });
        }
        let asymmetry = (&entries - entries.transpose()).amax() / entries.amax().max(1.0);
        if asymmetry > SYMMETRY_TOL {
            return Err(Error::NotSymmetric { asymmetry });
        }
        Ok(Self::from_symmetrized(entries))
    }

    /// Symmetrizes without checking; used for estimates and internal products.
    pub(crate) fn from_symmetrized(entries: DMatrix<f64>) -> Self {
        let sym = (&entries + entries.transpose()) * 0.5;
        Self { entries: sym }
    }

    /// Forces symmetry on a noisy estimate (e.g. a Monte Carlo average).
    pub fn symmetrize(entries: DMatrix<f64>) -> Result<Self> {
        let (rows, cols) = entries.shape();
        if rows != cols || rows % 2 != 0 || rows == 0 {
            return Err(Error::BadShape { rows, cols });
        }
        Ok(Self::from_symmetrized(entries))
    }

    pub fn from_row_slice(dim: usize, data: &[f64]) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                actual: data.len(),
            });
        }
        Self::new(DMatrix::from_row_slice(dim, dim, data))
    }

    pub fn vacuum(n_modes: usize) -> Self {
        Self {
            entries: DMatrix::identity(2 * n_modes, 2 * n_modes),
        }
    }

    pub fn n_modes(&self) -> usize {
        self.entries.nrows() / 2
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.entries
    }

    pub fn determinant(&self) -> f64 {
        self.entries.determinant()
    }

    /// Block-diagonal direct sum `self ⊕ other`.
    pub fn direct_sum(&self, other: &CovarianceMatrix) -> Self {
        let (a, b) = (self.entries.nrows(), other.entries.nrows());
        let mut entries = DMatrix::zeros(a + b, a + b);
        entries.view_mut((0, 0), (a, a)).copy_from(&self.entries);
        entries.view_mut((a, a), (b, b)).copy_from(&other.entries);
        Self { entries }
    }

    /// Adds a symmetric matrix (e.g. classical noise) to the covariance matrix.
    pub fn add(&self, noise: &DMatrix<f64>) -> Result<Self> {
        if noise.shape() != self.entries.shape() {
            return Err(Error::DimensionMismatch {
                expected: self.entries.nrows(),
                actual: noise.nrows(),
            });
        }
        Self::new(&self.entries + noise)
    }

    /// `γ + ε 𝟙`.
    pub fn add_isotropic_noise(&self, epsilon: f64) -> Self {
        let dim = self.entries.nrows();
        Self {
            entries: &self.entries + DMatrix::<f64>::identity(dim, dim) * epsilon,
        }
    }

    /// Reduced covariance matrix of the listed modes, in the given order.
    pub fn reduced(&self, modes: &[usize]) -> Result<Self> {
        if modes.is_empty() {
            return Err(Error::InvalidPartition("no modes selected".into()));
        }
        let mut rows = Vec::with_capacity(2 * modes.len());
        for &m in modes {
            check_mode(m, self.n_modes())?;
            rows.extend([2 * m, 2 * m + 1]);
        }
        let dim = rows.len();
        let entries = DMatrix::from_fn(dim, dim, |i, j| self.entries[(rows[i], rows[j])]);
        Ok(Self { entries })
    }

    /// The 2×2 block between modes `i` and `j`.
    pub fn block(&self, i: usize, j: usize) -> nalgebra::Matrix2<f64> {
        self.entries.fixed_view::<2, 2>(2 * i, 2 * j).into_owned()
    }

    /// Sorted symplectic eigenvalues of the state.
    pub fn symplectic_spectrum(&self) -> Result<Vec<f64>> {
        symplectic_eigenvalues(&self.entries)
    }

    /// Bona fide condition: every symplectic eigenvalue is at least `1 − 1e−9`.
    pub fn is_physical(&self) -> bool {
        is_physical(self)
    }

    /// Row-major nested vectors, the layout used in JSON output.
    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.entries
            .row_iter()
            .map(|row| row.iter().copied().collect())
            .collect()
    }
}

impl Serialize for CovarianceMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_rows().serialize(serializer)
    }
}

/// `S γ Sᵀ`.
pub fn apply_transform(s: &SymplecticTransform, gamma: &CovarianceMatrix) -> Result<CovarianceMatrix> {
    if s.n_modes() != gamma.n_modes() {
        return Err(Error::DimensionMismatch {
            expected: gamma.matrix().nrows(),
            actual: s.matrix().nrows(),
        });
    }
    let m = s.matrix();
    Ok(CovarianceMatrix::from_symmetrized(m * gamma.matrix() * m.transpose()))
}

/// `Λ γ Λ` with `Λ` flipping the momentum of every listed mode.
pub fn partial_transpose(gamma: &CovarianceMatrix, modes: &[usize]) -> Result<DMatrix<f64>> {
    if modes.is_empty() {
        return Err(Error::InvalidPartition(
            "partial transpose needs at least one mode".into(),
        ));
    }
    let n = gamma.n_modes();
    let mut signs = vec![1.0; 2 * n];
    for &m in modes {
        check_mode(m, n)?;
        signs[2 * m + 1] = -1.0;
    }
    let g = gamma.matrix();
    Ok(DMatrix::from_fn(2 * n, 2 * n, |i, j| signs[i] * signs[j] * g[(i, j)]))
}

pub fn is_physical(gamma: &CovarianceMatrix) -> bool {
    match symplectic_eigenvalues(gamma.matrix()) {
        Ok(nu) => nu.first().is_some_and(|&lo| lo >= 1.0 - PHYSICAL_TOL),
        Err(_) => false,
    }
}

/// A bipartition of the modes of a state.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct ModePartition {
    left: Vec<usize>,
    right: Vec<usize>,
}

impl ModePartition {
    pub fn new(left: &[usize], right: &[usize], n_modes: usize) -> Result<Self> {
        let l: BTreeSet<usize> = left.iter().copied().collect();
        let r: BTreeSet<usize> = right.iter().copied().collect();
        if l.is_empty() || r.is_empty() {
            return Err(Error::InvalidPartition("both sides must be nonempty".into()));
        }
        if l.len() != left.len() || r.len() != right.len() {
            return Err(Error::InvalidPartition("repeated mode index".into()));
        }
        if !l.is_disjoint(&r) {
            return Err(Error::InvalidPartition("sides overlap".into()));
        }
        if l.len() + r.len() != n_modes {
            return Err(Error::InvalidPartition(format!(
                "partition covers {} of {} modes",
                l.len() + r.len(),
                n_modes
            )));
        }
        for &m in l.iter().chain(&r) {
            check_mode(m, n_modes)?;
        }
        Ok(Self {
            left: l.into_iter().collect(),
            right: r.into_iter().collect(),
        })
    }

    /// `{mode} | rest`.
    pub fn isolate(mode: usize, n_modes: usize) -> Result<Self> {
        let rest: Vec<usize> = (0..n_modes).filter(|&m| m != mode).collect();
        Self::new(&[mode], &rest, n_modes)
    }

    pub fn left(&self) -> &[usize] {
        &self.left
    }

    pub fn right(&self) -> &[usize] {
        &self.right
    }

    pub fn n_modes(&self) -> usize {
        self.left.len() + self.right.len()
    }

    /// Label with modes named `A, B, C, ...`, e.g. `C|AB`.
    pub fn label(&self) -> String {
        let name = |side: &[usize]| -> String { side.iter().map(|&m| char::from(b'A' + (m as u8 % 26))).collect() };
        format!("{}|{}", name(&self.left), name(&self.right))
    }
}

impl std::fmt::Display for ModePartition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.label())
    }
}

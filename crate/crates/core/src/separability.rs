//! Entanglement and separability tests for Gaussian states.

use serde::Serialize;

use crate::covariance::{partial_transpose, CovarianceMatrix, ModePartition};
use crate::error::{Error, Result};
use crate::spectrum::{characteristic_invariants, symplectic_eigenvalues};
use crate::symplectic::check_mode;

/// Statistics closer than this to their threshold get a [`Separable::Boundary`] verdict.
pub const BOUNDARY_TOL: f64 = 1e-7;

/// `I1 − I2 + I3 − 1` for the invariants of `Ω γ^{T_mode}`.
///
/// For a three-mode Gaussian state, `mode` is separable from the other two
/// iff the result is nonnegative.
pub fn serafini_sigma(gamma: &CovarianceMatrix, single_mode: usize) -> Result<f64> {
    if gamma.n_modes() != 3 {
        return Err(Error::DimensionMismatch {
            expected: 6,
            actual: gamma.matrix().nrows(),
        });
    }
    check_mode(single_mode, 3)?;
    let pt = partial_transpose(gamma, &[single_mode])?;
    Ok(characteristic_invariants(&pt)?.sigma())
}

/// Lowest symplectic eigenvalue of the partial transpose across `partition`.
///
/// Below 1 means entangled. For `1 × N` mode splits, at least 1 also proves
/// separability.
pub fn ppt_lowest_nu(gamma: &CovarianceMatrix, partition: &ModePartition) -> Result<f64> {
    if partition.n_modes() != gamma.n_modes() {
        return Err(Error::InvalidPartition(format!(
            "partition over {} modes applied to a {}-mode state",
            partition.n_modes(),
            gamma.n_modes()
        )));
    }
    let pt = partial_transpose(gamma, partition.left())?;
    let nu = symplectic_eigenvalues(&pt)?;
    Ok(nu[0])
}

/// `max(0, −ln ν)`.
pub fn log_negativity(nu: f64) -> Result<f64> {
    if nu <= 0.0 || nu.is_nan() {
        return Err(Error::NonPositiveEigenvalue(nu));
    }
    Ok((-nu.ln()).max(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Criterion {
    /// `Q = γ − γ_A ⊕ γ_B ⊕ γ_C ⪰ 0`; statistic is the smallest eigenvalue of `Q`.
    PsdWitness,
    /// Invariant criterion; statistic is `Σ`, separable when `Σ ≥ 0`.
    Serafini,
    /// Partial transposition; statistic is the lowest PT symplectic eigenvalue.
    Ppt,
}

impl Criterion {
    /// Value of the statistic at which the verdict flips.
    pub fn threshold(self) -> f64 {
        match self {
            Criterion::PsdWitness | Criterion::Serafini => 0.0,
            Criterion::Ppt => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Separable {
    Yes,
    No,
    Boundary,
}

impl Separable {
    pub fn from_statistic(statistic: f64, threshold: f64, tol: f64) -> Self {
        if (statistic - threshold).abs() < tol {
            Separable::Boundary
        } else if statistic > threshold {
            Separable::Yes
        } else {
            Separable::No
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Separable::Yes => "yes",
            Separable::No => "no",
            Separable::Boundary => "boundary",
        }
    }
}

impl std::fmt::Display for Separable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Which split of the modes a verdict refers to.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Split {
    Bipartition(ModePartition),
    /// Every mode separate from every other, e.g. `A|B|C`.
    Full {
        n_modes: usize,
    },
}

impl Split {
    pub fn label(&self) -> String {
        match self {
            Split::Bipartition(p) => p.label(),
            Split::Full { n_modes } => (0..*n_modes)
                .map(|m| char::from(b'A' + (m as u8 % 26)).to_string())
                .collect::<Vec<_>>()
                .join("|"),
        }
    }
}

impl std::fmt::Display for Split {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.label())
    }
}

impl Serialize for Split {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.label())
    }
}

impl From<ModePartition> for Split {
    fn from(p: ModePartition) -> Self {
        Split::Bipartition(p)
    }
}

/// Outcome of one separability test on one split of the modes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeparabilityVerdict {
    pub partition: Split,
    pub criterion: Criterion,
    pub statistic: f64,
    pub separable: Separable,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl SeparabilityVerdict {
    pub fn new(partition: impl Into<Split>, criterion: Criterion, statistic: f64) -> Self {
        Self::with_tolerance(partition, criterion, statistic, BOUNDARY_TOL)
    }

    pub fn with_tolerance(partition: impl Into<Split>, criterion: Criterion, statistic: f64, tol: f64) -> Self {
        let separable = Separable::from_statistic(statistic, criterion.threshold(), tol);
        Self {
            partition: partition.into(),
            criterion,
            statistic,
            separable,
            note: None,
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    pub fn is_separable(&self) -> bool {
        self.separable == Separable::Yes
    }

    pub fn is_entangled(&self) -> bool {
        self.separable == Separable::No
    }
}

/// PPT verdict across `partition`.
pub fn ppt_verdict(gamma: &CovarianceMatrix, partition: &ModePartition) -> Result<SeparabilityVerdict> {
    let nu = ppt_lowest_nu(gamma, partition)?;
    Ok(SeparabilityVerdict::new(partition.clone(), Criterion::Ppt, nu))
}

/// Invariant-criterion verdict for `mode | rest` of a three-mode state.
pub fn serafini_verdict(gamma: &CovarianceMatrix, mode: usize) -> Result<SeparabilityVerdict> {
    let sigma = serafini_sigma(gamma, mode)?;
    Ok(SeparabilityVerdict::new(
        ModePartition::isolate(mode, 3)?,
        Criterion::Serafini,
        sigma,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn product_vacuum_is_boundary() {
        let vac = CovarianceMatrix::vacuum(3);
        assert_relative_eq!(serafini_sigma(&vac, 2).unwrap(), 0.0, epsilon = 1e-14);
        let v = serafini_verdict(&vac, 2).unwrap();
        assert_eq!(v.separable, Separable::Boundary);
        assert_eq!(v.partition.label(), "C|AB");
    }

    #[test]
    fn two_mode_vacuum_ppt_is_one() {
        let p = ModePartition::new(&[0], &[1], 2).unwrap();
        assert_relative_eq!(
            ppt_lowest_nu(&CovarianceMatrix::vacuum(2), &p).unwrap(),
            1.0,
            epsilon = 1e-14
        );
        assert!(ppt_lowest_nu(&CovarianceMatrix::vacuum(3), &p).is_err());
    }

    #[test]
    fn log_negativity_values() {
        assert_eq!(log_negativity(1.0).unwrap(), 0.0);
        assert_eq!(log_negativity(2.0).unwrap(), 0.0);
        assert_relative_eq!(log_negativity(0.9571).unwrap(), -(0.9571f64).ln(), epsilon = 1e-15);
        assert_relative_eq!(log_negativity(0.9571).unwrap(), 0.04385, epsilon = 1e-5);
        assert!(log_negativity(0.0).is_err());
        assert!(log_negativity(-1.0).is_err());
    }

    #[test]
    fn tri_state() {
        assert_eq!(Separable::from_statistic(0.5, 0.0, 1e-7), Separable::Yes);
        assert_eq!(Separable::from_statistic(-0.5, 0.0, 1e-7), Separable::No);
        assert_eq!(Separable::from_statistic(1.0 + 1e-9, 1.0, 1e-7), Separable::Boundary);
    }

    #[test]
    fn serafini_requires_three_modes() {
        assert!(serafini_sigma(&CovarianceMatrix::vacuum(2), 0).is_err());
        assert!(serafini_sigma(&CovarianceMatrix::vacuum(3), 3).is_err());
    }
}

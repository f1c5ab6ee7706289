//! Sensitivity of the protocol to isotropic noise on the initial state.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::protocol::{make_gamma1, nu_ab, run_step2, run_step3, ProtocolParams, MODE_A, MODE_B, MODE_C};
use crate::separability::{serafini_sigma, Separable, BOUNDARY_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RobustnessRow {
    pub epsilon: f64,
    pub nu: f64,
    pub sigma_step2: f64,
    pub sigma_step3: f64,
    /// `No` means A and B are entangled after step 3.
    pub ab_separable: Separable,
    pub c_separable_step2: Separable,
    pub c_separable_step3: Separable,
}

/// Runs steps 2 and 3 on `γ1 + ε𝟙` for each `ε`.
pub fn robustness_scan(params: &ProtocolParams, epsilons: &[f64]) -> Result<Vec<RobustnessRow>> {
    let gamma1 = make_gamma1(&params.squeezing, params.x)?;
    epsilons
        .iter()
        .map(|&epsilon| {
            if !(epsilon.is_finite() && epsilon >= 0.0) {
                return Err(Error::InvalidParameters(format!(
                    "noise level must be >= 0, got {epsilon}"
                )));
            }
            let gamma2 = run_step2(&gamma1.add_isotropic_noise(epsilon))?;
            let gamma3 = run_step3(&gamma2)?;
            let nu = nu_ab(&gamma3.reduced(&[MODE_A, MODE_B])?)?;
            let sigma_step2 = serafini_sigma(&gamma2, MODE_C)?;
            let sigma_step3 = serafini_sigma(&gamma3, MODE_C)?;
            Ok(RobustnessRow {
                epsilon,
                nu,
                sigma_step2,
                sigma_step3,
                ab_separable: Separable::from_statistic(nu, 1.0, BOUNDARY_TOL),
                c_separable_step2: Separable::from_statistic(sigma_step2, 0.0, BOUNDARY_TOL),
                c_separable_step3: Separable::from_statistic(sigma_step3, 0.0, BOUNDARY_TOL),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noise_weakens_entanglement() {
        let rows = robustness_scan(&ProtocolParams::flagship(), &[0.0, 0.005, 0.01, 0.02]).unwrap();
        assert!((rows[0].nu - 0.9571).abs() < 5e-4);
        assert!((rows[3].nu - 0.9787).abs() < 5e-4);
        assert!(rows[0].nu < rows[3].nu);
        assert!(rows.iter().all(|r| r.ab_separable == Separable::No));
    }

    #[test]
    fn negative_epsilon_rejected() {
        assert!(robustness_scan(&ProtocolParams::flagship(), &[-0.1]).is_err());
    }
}

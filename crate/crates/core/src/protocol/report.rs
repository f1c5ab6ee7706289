use serde::Serialize;
use std::f64::consts::FRAC_PI_4;

use super::params::ProtocolParams;
use super::state::{make_gamma1, make_local_cms, make_q_matrix, LocalStateSet, MODE_A, MODE_B, MODE_C};
use super::steps::{homodyne_condition, nu_ab, run_step2, run_step3};
use super::threshold::{find_x_threshold, ProtocolStep, ThresholdFit};
use crate::covariance::{CovarianceMatrix, ModePartition};
use crate::error::Result;
use crate::separability::{
    log_negativity, ppt_verdict, serafini_verdict, Criterion, SeparabilityVerdict, Separable, Split,
};

/// Homodyne angle for the quadrature `(x_C + p_C)/√2`.
pub const MEASUREMENT_ANGLE: f64 = FRAC_PI_4;

/// A verdict tagged with the protocol step it belongs to.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepVerdict {
    pub step: u8,
    #[serde(flatten)]
    pub verdict: SeparabilityVerdict,
}

/// Everything computed for one parameter point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProtocolReport {
    pub params: ProtocolParams,
    pub local_states: LocalStateSet,
    pub witness_eigenvalues: Vec<f64>,
    pub gamma1: CovarianceMatrix,
    pub gamma2: CovarianceMatrix,
    pub gamma3: CovarianceMatrix,
    pub verdicts: Vec<StepVerdict>,
    /// Lowest PT symplectic eigenvalue of the A–B state after step 3.
    pub nu: f64,
    pub log_negativity: f64,
    /// Same after measuring `(x_C + p_C)/√2`.
    pub nu_m: Option<f64>,
    pub sigma_step2: f64,
    pub sigma_step3: f64,
    pub threshold_step2: ThresholdFit,
    pub threshold_step3: ThresholdFit,
    pub x_th: Option<f64>,
    pub flags: Vec<String>,
}

impl ProtocolReport {
    pub fn verdict(&self, step: u8, criterion: Criterion, split: &str) -> Option<&SeparabilityVerdict> {
        self.verdicts
            .iter()
            .find(|v| v.step == step && v.verdict.criterion == criterion && v.verdict.partition.label() == split)
            .map(|v| &v.verdict)
    }

    /// The protocol's claims all hold: certified fully separable preparation,
    /// `C` separable after steps 2 and 3, `B|AC` separable and `A|BC`
    /// entangled after step 2, `A|B` entangled after step 3.
    pub fn all_claims_hold(&self) -> bool {
        let is = |step, criterion, split, expected: Separable| {
            self.verdict(step, criterion, split)
                .is_some_and(|v| v.separable == expected)
        };
        is(1, Criterion::PsdWitness, "A|B|C", Separable::Yes)
            && is(2, Criterion::Serafini, "C|AB", Separable::Yes)
            && is(2, Criterion::Serafini, "B|AC", Separable::Yes)
            && is(2, Criterion::Ppt, "A|BC", Separable::No)
            && is(3, Criterion::Serafini, "C|AB", Separable::Yes)
            && is(3, Criterion::Ppt, "A|B", Separable::No)
    }
}

/// Runs the three steps at `params` and collects every verdict.
///
/// Negative findings (entangled ancilla, no A–B entanglement, uncertified
/// preparation) are reported as verdicts and flags, never as errors.
pub fn run_protocol(params: &ProtocolParams, with_measurement: bool) -> Result<ProtocolReport> {
    let sq = &params.squeezing;
    let x = params.x;
    let mut flags = Vec::new();

    let local_states = make_local_cms(sq)?;
    let witness = make_q_matrix(sq, x)?;
    let gamma1 = make_gamma1(sq, x)?;
    let gamma2 = run_step2(&gamma1)?;
    let gamma3 = run_step3(&gamma2)?;

    let mut verdicts = Vec::new();
    let mut push = |step: u8, verdict: SeparabilityVerdict| verdicts.push(StepVerdict { step, verdict });

    let witness_verdict = SeparabilityVerdict {
        partition: Split::Full { n_modes: 3 },
        criterion: Criterion::PsdWitness,
        statistic: witness.min_eigenvalue(),
        separable: witness.psd,
        note: None,
    };
    if witness.psd != Separable::Yes {
        flags.push("preparation not certified fully separable (x < x_sep)".to_string());
    }
    push(1, witness_verdict);
    for mode in [MODE_A, MODE_B, MODE_C] {
        push(1, ppt_verdict(&gamma1, &ModePartition::isolate(mode, 3)?)?);
    }

    let sigma_step2 = serafini_verdict(&gamma2, MODE_C)?;
    let sigma_step2_value = sigma_step2.statistic;
    push(2, sigma_step2);
    push(2, serafini_verdict(&gamma2, MODE_B)?);
    push(2, ppt_verdict(&gamma2, &ModePartition::isolate(MODE_A, 3)?)?);

    let nu = nu_ab(&gamma3.reduced(&[MODE_A, MODE_B])?)?;
    push(
        3,
        SeparabilityVerdict::new(ModePartition::new(&[MODE_A], &[MODE_B], 2)?, Criterion::Ppt, nu),
    );
    let sigma_step3 = serafini_verdict(&gamma3, MODE_C)?;
    let sigma_step3_value = sigma_step3.statistic;
    push(3, sigma_step3);

    let nu_m = if with_measurement {
        Some(nu_ab(&homodyne_condition(&gamma3, MODE_C, MEASUREMENT_ANGLE)?)?)
    } else {
        None
    };

    let threshold_step2 = find_x_threshold(sq, ProtocolStep::Second)?;
    let threshold_step3 = find_x_threshold(sq, ProtocolStep::Third)?;

    if x == 0.0 {
        flags.push("pure input state: the ancilla cannot stay separable while entangling A and B".to_string());
    }

    Ok(ProtocolReport {
        params: *params,
        local_states,
        witness_eigenvalues: witness.eigenvalues,
        gamma1,
        gamma2,
        gamma3,
        verdicts,
        nu,
        log_negativity: log_negativity(nu)?,
        nu_m,
        sigma_step2: sigma_step2_value,
        sigma_step3: sigma_step3_value,
        x_th: threshold_step2.x_th,
        threshold_step2,
        threshold_step3,
        flags,
    })
}

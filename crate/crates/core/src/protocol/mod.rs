//! The three-step entanglement distribution protocol.
//!
//! Step 1 prepares a fully separable three-mode state by LOCC, step 2 mixes
//! A with the ancilla C, and step 3 mixes C with B.

mod params;
mod report;
mod state;
mod steps;
mod threshold;

pub use params::{ProtocolParams, Squeezing, FLAGSHIP_X};
pub use report::{run_protocol, ProtocolReport, StepVerdict, MEASUREMENT_ANGLE};
pub use state::{
    compute_x_sep, gamma_ab_from_inputs, gamma_ab_inputs, make_gamma1, make_gamma_ab, make_local_cms,
    make_noise_vectors, make_q_matrix, LocalStateSet, NoiseVectors, WitnessMatrix, MODE_A, MODE_B, MODE_C, PSD_TOL,
    PURITY_TOL,
};
pub use steps::{closed_form_reduced_ab, homodyne_condition, nu_ab, run_step2, run_step3, TwoModeBlocks};
pub use threshold::{find_x_threshold, sigma_after_step, ProtocolStep, ThresholdFit, MODEL_TOL};

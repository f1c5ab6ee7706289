//! Noise threshold above which the ancilla stays separable.
//!
//! The invariant statistic for `C | AB` after step 2 (and after step 3) is a
//! parabola through the origin, `Σ(x) = x (u x + v)`. Its coefficients are
//! recovered from two evaluations of `Σ(x)/x` and checked against a third.

use serde::Serialize;

use super::params::Squeezing;
use super::state::{make_gamma1, MODE_C};
use super::steps::{run_step2, run_step3};
use crate::error::{Error, Result};
use crate::separability::serafini_sigma;

/// Relative tolerance of the held-out check of the quadratic model.
pub const MODEL_TOL: f64 = 1e-7;

const FIT_POINTS: [f64; 2] = [1.0, 2.0];
const CHECK_POINT: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProtocolStep {
    /// After the A–C beam splitter.
    Second,
    /// After the B–C beam splitter.
    Third,
}

impl ProtocolStep {
    pub fn from_index(index: u8) -> Result<Self> {
        match index {
            2 => Ok(Self::Second),
            3 => Ok(Self::Third),
            other => Err(Error::InvalidParameters(format!(
                "step index must be 2 or 3, got {other}"
            ))),
        }
    }

    pub fn index(self) -> u8 {
        match self {
            Self::Second => 2,
            Self::Third => 3,
        }
    }
}

/// `Σ` for `C | AB` at noise strength `x` after the given step.
pub fn sigma_after_step(sq: &Squeezing, x: f64, step: ProtocolStep) -> Result<f64> {
    let gamma2 = run_step2(&make_gamma1(sq, x)?)?;
    let gamma = match step {
        ProtocolStep::Second => gamma2,
        ProtocolStep::Third => run_step3(&gamma2)?,
    };
    serafini_sigma(&gamma, MODE_C)
}

/// Fitted parabola `Σ(x) = x (u x + v)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThresholdFit {
    pub step: ProtocolStep,
    pub u: f64,
    pub v: f64,
    /// `−v/u` when `u > 0` and `v < 0`: `Σ > 0` exactly for `x > x_th`.
    pub x_th: Option<f64>,
    /// When `u < 0` and `v > 0`, `Σ ≥ 0` only on `[0, −v/u]`.
    pub separable_up_to: Option<f64>,
    /// Relative residual of the held-out check.
    pub residual: f64,
}

impl ThresholdFit {
    pub fn sigma(&self, x: f64) -> f64 {
        x * (self.u * x + self.v)
    }

    /// True when `Σ(x) > 0` for every `x > 0`.
    pub fn always_separable(&self) -> bool {
        self.u >= 0.0 && self.v >= 0.0 && (self.u > 0.0 || self.v > 0.0)
    }

    /// Smallest `x` beyond which `Σ` stays nonnegative, if any.
    pub fn separable_from(&self) -> Option<f64> {
        if self.always_separable() {
            Some(0.0)
        } else {
            self.x_th
        }
    }
}

pub fn find_x_threshold(sq: &Squeezing, step: ProtocolStep) -> Result<ThresholdFit> {
    let [x1, x2] = FIT_POINTS;
    let y1 = sigma_after_step(sq, x1, step)? / x1;
    let y2 = sigma_after_step(sq, x2, step)? / x2;
    let u = (y2 - y1) / (x2 - x1);
    let v = y1 - u * x1;

    let observed = sigma_after_step(sq, CHECK_POINT, step)? / CHECK_POINT;
    let predicted = u * CHECK_POINT + v;
    let scale = observed.abs().max(u.abs()).max(v.abs()).max(f64::MIN_POSITIVE);
    let residual = (observed - predicted).abs() / scale;
    if residual > MODEL_TOL {
        return Err(Error::QuadraticModel { residual });
    }

    let x_th = (u > 0.0 && v < 0.0).then(|| -v / u);
    let separable_up_to = (u < 0.0 && v > 0.0).then(|| -v / u);
    Ok(ThresholdFit {
        step,
        u,
        v,
        x_th,
        separable_up_to,
        residual,
    })
}

//! Parameter-region scans over the input variances `v_a = e^{2(d−r)}` and
//! `v_b = e^{2(d+r)}`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::protocol::{
    find_x_threshold, make_gamma1, make_q_matrix, nu_ab, run_step2, run_step3, ProtocolStep, Squeezing, ThresholdFit,
    MODE_A, MODE_B, MODE_C,
};
use crate::separability::{serafini_sigma, Separable, BOUNDARY_TOL};

/// How the noise strength is chosen at each grid point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "policy", content = "value")]
pub enum XPolicy {
    /// Same `x` everywhere.
    Fixed(f64),
    /// `x = (1 + margin) · max(x_sep, thresholds of steps 2 and 3)`.
    ThresholdMargin(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSpec {
    pub va_range: (f64, f64),
    pub vb_range: (f64, f64),
    pub steps_va: usize,
    pub steps_vb: usize,
    pub x_policy: XPolicy,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            va_range: (1.0, 3.0),
            vb_range: (1.0, 4.0),
            steps_va: 81,
            steps_vb: 81,
            x_policy: XPolicy::ThresholdMargin(1e-3),
        }
    }
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        for (name, (lo, hi), steps) in [
            ("vA", self.va_range, self.steps_va),
            ("vB", self.vb_range, self.steps_vb),
        ] {
            if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && lo < hi) {
                return Err(Error::InvalidSweep(format!(
                    "{name} range must satisfy 0 < min < max, got [{lo}, {hi}]"
                )));
            }
            if steps < 2 {
                return Err(Error::InvalidSweep(format!(
                    "{name} needs at least 2 steps, got {steps}"
                )));
            }
        }
        match self.x_policy {
            XPolicy::Fixed(x) if !(x.is_finite() && x >= 0.0) => {
                Err(Error::InvalidSweep(format!("fixed x must be >= 0, got {x}")))
            }
            XPolicy::ThresholdMargin(m) if !(m.is_finite() && m >= 0.0) => {
                Err(Error::InvalidSweep(format!("threshold margin must be >= 0, got {m}")))
            }
            _ => Ok(()),
        }
    }

    fn axis(range: (f64, f64), steps: usize, i: usize) -> f64 {
        range.0 + (range.1 - range.0) * i as f64 / (steps - 1) as f64
    }

    /// Grid point `(v_a, v_b)` for row-major index `k` (v_a outer, v_b inner).
    pub fn point(&self, k: usize) -> (f64, f64) {
        let (i, j) = (k / self.steps_vb, k % self.steps_vb);
        (
            Self::axis(self.va_range, self.steps_va, i),
            Self::axis(self.vb_range, self.steps_vb, j),
        )
    }

    pub fn len(&self) -> usize {
        self.steps_va * self.steps_vb
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepStatus {
    /// Every separability requirement holds and `ν < 1`.
    Ok,
    /// The ancilla never becomes separable for large `x`.
    NoThreshold,
    /// `C` is not separable from `AB` after step 2 or step 3.
    EntangledAncilla,
    /// `ν ≥ 1` after step 3.
    NotEntangled,
    /// Outside `v_b > v_a ≥ 1`, or the preparation is not certified fully separable.
    InvalidPoint,
}

impl SweepStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepStatus::Ok => "ok",
            SweepStatus::NoThreshold => "no-threshold",
            SweepStatus::EntangledAncilla => "entangled-ancilla",
            SweepStatus::NotEntangled => "not-entangled",
            SweepStatus::InvalidPoint => "invalid-point",
        }
    }
}

impl std::fmt::Display for SweepStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRecord {
    #[serde(rename = "vA")]
    pub v_a: f64,
    #[serde(rename = "vB")]
    pub v_b: f64,
    pub d: f64,
    pub r: f64,
    pub x_sep: Option<f64>,
    pub x_th: Option<f64>,
    pub x_used: Option<f64>,
    pub nu: Option<f64>,
    pub sigma_step2: Option<f64>,
    pub sigma_step3: Option<f64>,
    pub status: SweepStatus,
}

fn threshold_start(fit: &Result<ThresholdFit>) -> Option<f64> {
    fit.as_ref().ok().and_then(ThresholdFit::separable_from)
}

/// Evaluates one grid point.
pub fn evaluate_point(v_a: f64, v_b: f64, policy: XPolicy) -> Result<SweepRecord> {
    let mut record = SweepRecord {
        v_a,
        v_b,
        d: (v_a * v_b).ln() / 4.0,
        r: (v_b / v_a).ln() / 4.0,
        x_sep: None,
        x_th: None,
        x_used: None,
        nu: None,
        sigma_step2: None,
        sigma_step3: None,
        status: SweepStatus::InvalidPoint,
    };
    let sq = match Squeezing::from_variances(v_a, v_b) {
        Ok(sq) => sq,
        Err(_) => return Ok(record),
    };
    record.x_sep = Some(sq.x_sep);

    let fit2 = find_x_threshold(&sq, ProtocolStep::Second);
    let fit3 = find_x_threshold(&sq, ProtocolStep::Third);
    record.x_th = fit2.as_ref().ok().and_then(|f| f.x_th);
    let starts = [threshold_start(&fit2), threshold_start(&fit3)];
    let has_threshold = starts.iter().all(Option::is_some);

    let x = match policy {
        XPolicy::Fixed(x) => x,
        XPolicy::ThresholdMargin(margin) => {
            let lower = starts.iter().flatten().fold(sq.x_sep, |acc, &s| acc.max(s));
            (1.0 + margin) * lower
        }
    };
    record.x_used = Some(x);

    let gamma2 = run_step2(&make_gamma1(&sq, x)?)?;
    let gamma3 = run_step3(&gamma2)?;
    let sigma2 = serafini_sigma(&gamma2, MODE_C)?;
    let sigma2_b = serafini_sigma(&gamma2, MODE_B)?;
    let sigma3 = serafini_sigma(&gamma3, MODE_C)?;
    let nu = nu_ab(&gamma3.reduced(&[MODE_A, MODE_B])?)?;
    record.sigma_step2 = Some(sigma2);
    record.sigma_step3 = Some(sigma3);
    record.nu = Some(nu);

    let separable = |s: f64| Separable::from_statistic(s, 0.0, BOUNDARY_TOL) == Separable::Yes;
    let certified = make_q_matrix(&sq, x)?.psd == Separable::Yes;
    record.status = if !certified {
        SweepStatus::InvalidPoint
    } else if !has_threshold && matches!(policy, XPolicy::ThresholdMargin(_)) {
        SweepStatus::NoThreshold
    } else if !(separable(sigma2) && separable(sigma3) && separable(sigma2_b)) {
        SweepStatus::EntangledAncilla
    } else if Separable::from_statistic(nu, 1.0, BOUNDARY_TOL) != Separable::No {
        SweepStatus::NotEntangled
    } else {
        SweepStatus::Ok
    };
    Ok(record)
}

/// Environment variable overriding the number of worker threads.
pub const THREADS_ENV: &str = "GAUSS_DISTILL_THREADS";

/// Worker pool sized by [`THREADS_ENV`], or by the available parallelism when unset.
pub fn worker_pool() -> Result<rayon::ThreadPool> {
    let threads =
        match std::env::var(THREADS_ENV) {
            Ok(v) => v.trim().parse::<usize>().ok().filter(|&n| n > 0).ok_or_else(|| {
                Error::InvalidParameters(format!("{THREADS_ENV} must be a positive integer, got {v:?}"))
            })?,
            Err(_) => std::thread::available_parallelism().map_or(1, |n| n.get()),
        };
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidParameters(e.to_string()))
}

/// Evaluates the whole grid in parallel; records come back in row-major order
/// regardless of how many worker threads run.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRecord>> {
    spec.validate()?;
    (0..spec.len())
        .into_par_iter()
        .map(|k| {
            let (v_a, v_b) = spec.point(k);
            evaluate_point(v_a, v_b, spec.x_policy)
        })
        .collect()
}

//! Monte Carlo simulation of the LOCC preparation.
//!
//! Each run draws random displacements from a zero-mean Gaussian and applies
//! them to the pure product state `γ_A ⊕ γ_B ⊕ γ_C`. In the normalization
//! where the vacuum covariance matrix is `𝟙`, a displacement whose classical
//! covariance is `M` adds `2M` to the covariance matrix, so a target addition
//! `Q` is sampled with classical covariance `Q/2`.
//!
//! Sampling is split into fixed-size chunks. Chunk `k` draws from its own
//! ChaCha stream `(seed, k)`, and chunk sums are combined by pairwise
//! summation in chunk order, so results are bit-identical for any number of
//! worker threads.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::covariance::CovarianceMatrix;
use crate::covariance::ModePartition;
use crate::error::{Error, Result};
use crate::protocol::{
    make_gamma1, make_local_cms, make_q_matrix, nu_ab, run_step2, run_step3, ProtocolParams, MODE_A, MODE_B, MODE_C,
};
use crate::separability::{serafini_sigma, Criterion, SeparabilityVerdict};

/// Samples per independent random stream.
pub const CHUNK_SIZE: usize = 4096;

/// Negative eigenvalues of the target down to `−1e−9 ‖Q‖` are clipped to zero.
pub const PSD_CLIP_TOL: f64 = 1e-9;

/// Correlated displacement vectors together with the recipe that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct DisplacementEnsemble {
    pub samples: Vec<DVector<f64>>,
    pub seed: u64,
    /// Covariance-matrix addition the displacements realize on average.
    pub target_correlation: DMatrix<f64>,
}

impl DisplacementEnsemble {
    /// `2 · (1/n) Σ d dᵀ`, the empirical covariance-matrix addition.
    pub fn empirical_addition(&self) -> DMatrix<f64> {
        let dim = self.target_correlation.nrows();
        let mut acc = DMatrix::zeros(dim, dim);
        for d in &self.samples {
            acc += d * d.transpose();
        }
        acc * (2.0 / self.samples.len().max(1) as f64)
    }
}

/// Factor `L` with `L Lᵀ = correlation / 2`, clipping tiny negative eigenvalues.
pub fn displacement_factor(correlation: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let (rows, cols) = correlation.shape();
    if rows != cols || rows == 0 {
        return Err(Error::BadShape { rows, cols });
    }
    let sym = (correlation + correlation.transpose()) * 0.25;
    let scale = correlation.amax().max(f64::MIN_POSITIVE);
    let eigen = SymmetricEigen::new(sym);
    let min_eigenvalue = 2.0 * eigen.eigenvalues.min();
    if min_eigenvalue < -PSD_CLIP_TOL * scale {
        return Err(Error::NotPositiveSemidefinite { min_eigenvalue });
    }
    let roots = eigen.eigenvalues.map(|v| v.max(0.0).sqrt());
    Ok(&eigen.eigenvectors * DMatrix::from_diagonal(&roots))
}

fn chunk_rng(seed: u64, chunk: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk as u64);
    rng
}

fn chunk_ranges(n: usize) -> impl IndexedParallelIterator<Item = (usize, usize)> {
    let chunks = n.div_ceil(CHUNK_SIZE);
    (0..chunks)
        .into_par_iter()
        .map(move |k| (k, CHUNK_SIZE.min(n - k * CHUNK_SIZE)))
}

fn draw(rng: &mut ChaCha8Rng, factor: &DMatrix<f64>, z: &mut [f64], out: &mut [f64]) {
    for zi in z.iter_mut() {
        *zi = rng.sample(StandardNormal);
    }
    let dim = factor.nrows();
    for (i, o) in out.iter_mut().enumerate().take(dim) {
        *o = (0..dim).map(|j| factor[(i, j)] * z[j]).sum();
    }
}

/// Draws `n` displacement vectors whose covariance-matrix addition is `correlation`.
pub fn sample_displacements(correlation: &DMatrix<f64>, n: usize, seed: u64) -> Result<DisplacementEnsemble> {
    if n == 0 {
        return Err(Error::InvalidParameters("need at least one sample".into()));
    }
    let factor = displacement_factor(correlation)?;
    let dim = factor.nrows();
    let chunks: Vec<Vec<DVector<f64>>> = chunk_ranges(n)
        .map(|(k, len)| {
            let mut rng = chunk_rng(seed, k);
            let (mut z, mut out) = (vec![0.0; dim], vec![0.0; dim]);
            (0..len)
                .map(|_| {
                    draw(&mut rng, &factor, &mut z, &mut out);
                    DVector::from_column_slice(&out)
                })
                .collect()
        })
        .collect();
    Ok(DisplacementEnsemble {
        samples: chunks.into_iter().flatten().collect(),
        seed,
        target_correlation: correlation.clone(),
    })
}

/// First and second raw moments accumulated over a chunk.
#[derive(Debug, Clone)]
struct Moments {
    count: usize,
    sum: Vec<f64>,
    outer: Vec<f64>,
}

impl Moments {
    fn zeros(dim: usize) -> Self {
        Self {
            count: 0,
            sum: vec![0.0; dim],
            outer: vec![0.0; dim * dim],
        }
    }

    fn merge(mut self, other: &Moments) -> Self {
        self.count += other.count;
        self.sum.iter_mut().zip(&other.sum).for_each(|(a, b)| *a += b);
        self.outer.iter_mut().zip(&other.outer).for_each(|(a, b)| *a += b);
        self
    }
}

fn pairwise_sum(parts: &[Moments], dim: usize) -> Moments {
    match parts.len() {
        0 => Moments::zeros(dim),
        1 => parts[0].clone(),
        len => {
            let (lo, hi) = parts.split_at(len / 2);
            pairwise_sum(lo, dim).merge(&pairwise_sum(hi, dim))
        }
    }
}

fn accumulate(factor: &DMatrix<f64>, n: usize, seed: u64) -> Moments {
    let dim = factor.nrows();
    let parts: Vec<Moments> = chunk_ranges(n)
        .map(|(k, len)| {
            let mut rng = chunk_rng(seed, k);
            let (mut z, mut d) = (vec![0.0; dim], vec![0.0; dim]);
            let mut m = Moments::zeros(dim);
            for _ in 0..len {
                draw(&mut rng, factor, &mut z, &mut d);
                for i in 0..dim {
                    m.sum[i] += d[i];
                    for j in 0..dim {
                        m.outer[i * dim + j] += d[i] * d[j];
                    }
                }
            }
            m.count = len;
            m
        })
        .collect();
    pairwise_sum(&parts, dim)
}

/// Ensemble-averaged covariance matrix of the simulated preparation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CmEstimate {
    pub mean_vector: Vec<f64>,
    pub cm: CovarianceMatrix,
    pub n: usize,
    /// Upper bound on the standard error of any entry, `‖Q‖_max √(2/n)`.
    pub stderr_scale: f64,
}

impl CmEstimate {
    pub fn max_deviation(&self, reference: &CovarianceMatrix) -> f64 {
        (self.cm.matrix() - reference.matrix()).amax()
    }
}

/// Simulates the LOCC preparation with `n` displacement draws.
///
/// The estimate is `γ_A ⊕ γ_B ⊕ γ_C + 2 Ĉ` with `Ĉ` the unbiased sample
/// covariance of the displacements; its expectation is `γ1(x)`.
pub fn simulate_preparation(params: &ProtocolParams, n: usize, seed: u64) -> Result<CmEstimate> {
    if n < 2 {
        return Err(Error::InvalidParameters(format!("need at least two samples, got {n}")));
    }
    let sq = &params.squeezing;
    let q = make_q_matrix(sq, params.x)?.q;
    let base = make_local_cms(sq)?.product();
    let factor = displacement_factor(&q)?;
    let dim = factor.nrows();
    let moments = accumulate(&factor, n, seed);

    let nf = n as f64;
    let mean: Vec<f64> = moments.sum.iter().map(|s| s / nf).collect();
    let cov = DMatrix::from_fn(dim, dim, |i, j| {
        (moments.outer[i * dim + j] - nf * mean[i] * mean[j]) / (nf - 1.0)
    });
    let cm = CovarianceMatrix::symmetrize(base.matrix() + cov * 2.0)?;
    Ok(CmEstimate {
        mean_vector: mean,
        cm,
        n,
        stderr_scale: q.amax() * (2.0 / nf).sqrt(),
    })
}

/// Simon's two-mode criterion (PPT) on a possibly noisy A–B covariance matrix.
///
/// `stderr_scale` is the per-entry uncertainty of the estimate (zero for an
/// exact matrix). The verdict carries a note when the estimate looks
/// unphysical or when `ν` is within three standard errors of 1.
pub fn verify_simon(gamma_ab: &CovarianceMatrix, stderr_scale: f64) -> Result<SeparabilityVerdict> {
    let gamma = CovarianceMatrix::symmetrize(gamma_ab.matrix().clone())?;
    let nu = nu_ab(&gamma)?;
    let mut verdict = SeparabilityVerdict::new(ModePartition::new(&[0], &[1], 2)?, Criterion::Ppt, nu);
    let mut notes = Vec::new();
    let nu_state = gamma.symplectic_spectrum()?[0];
    if nu_state < 1.0 - 3.0 * stderr_scale - crate::covariance::PHYSICAL_TOL {
        notes.push(format!(
            "estimate is unphysical (lowest symplectic eigenvalue {nu_state:.6})"
        ));
    }
    if stderr_scale > 0.0 && (nu - 1.0).abs() < 3.0 * stderr_scale {
        notes.push("estimate statistically unreliable: verdict within 3 standard errors".to_string());
    }
    if !notes.is_empty() {
        verdict = verdict.with_note(notes.join("; "));
    }
    Ok(verdict)
}

/// Steps 2 and 3 applied to a simulated preparation, with deviations from the
/// analytic states.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulatedProtocol {
    pub estimate: CmEstimate,
    pub gamma1_exact: CovarianceMatrix,
    pub gamma3_estimate: CovarianceMatrix,
    pub deviation_gamma1: f64,
    pub deviation_gamma3: f64,
    pub simon: SeparabilityVerdict,
    pub sigma_step3: f64,
    pub reliable: bool,
}

pub fn simulate_protocol(params: &ProtocolParams, n: usize, seed: u64) -> Result<SimulatedProtocol> {
    let estimate = simulate_preparation(params, n, seed)?;
    let gamma1_exact = make_gamma1(&params.squeezing, params.x)?;
    let gamma3_exact = run_step3(&run_step2(&gamma1_exact)?)?;
    let gamma3_estimate = run_step3(&run_step2(&estimate.cm)?)?;
    // Beam splitters are orthogonal, so the entry scale of the error is unchanged up to a factor 2.
    let simon = verify_simon(
        &gamma3_estimate.reduced(&[MODE_A, MODE_B])?,
        2.0 * estimate.stderr_scale,
    )?;
    let sigma_step3 = serafini_sigma(&gamma3_estimate, MODE_C)?;
    Ok(SimulatedProtocol {
        deviation_gamma1: estimate.max_deviation(&gamma1_exact),
        deviation_gamma3: (gamma3_estimate.matrix() - gamma3_exact.matrix()).amax(),
        reliable: simon.note.is_none(),
        estimate,
        gamma1_exact,
        gamma3_estimate,
        simon,
        sigma_step3,
    })
}

//! Random symplectic maps and physical three-mode states shared by the
//! integration tests.

#![allow(dead_code)]

use gauss_distill::symplectic::beamsplitter;
use gauss_distill::{apply_transform, local_gaussian, CovarianceMatrix, SymplecticTransform};
use nalgebra::DMatrix;

/// Raw draws for one random three-mode Gaussian state.
#[derive(Debug, Clone, Copy)]
pub struct StateDraw {
    /// Williamson eigenvalues, each ≥ 1.
    pub thermal: [f64; 3],
    pub squeeze: [f64; 3],
    pub phase: [f64; 3],
    pub mix: [f64; 3],
}

impl StateDraw {
    pub fn from_uniform(u: &[f64; 12]) -> Self {
        let pick = |k: usize, lo: f64, hi: f64| [0, 1, 2].map(|i| lo + (hi - lo) * u[3 * k + i]);
        Self {
            thermal: pick(0, 1.0, 4.0),
            squeeze: pick(1, -1.0, 1.0),
            phase: pick(2, 0.0, std::f64::consts::TAU),
            mix: pick(3, 0.0, std::f64::consts::TAU),
        }
    }

    pub fn symplectic(&self) -> SymplecticTransform {
        let mut s = SymplecticTransform::identity(3);
        for mode in 0..3 {
            let local = local_gaussian(3, mode, self.squeeze[mode], self.phase[mode]).unwrap();
            s = local.after(&s).unwrap();
        }
        for (k, (i, j)) in [(0, 1), (1, 2), (0, 2)].into_iter().enumerate() {
            s = beamsplitter(3, i, j, self.mix[k]).unwrap().after(&s).unwrap();
        }
        s
    }

    pub fn state(&self) -> CovarianceMatrix {
        let diag: Vec<f64> = self.thermal.iter().flat_map(|&v| [v, v]).collect();
        let thermal = CovarianceMatrix::new(DMatrix::from_diagonal(&nalgebra::DVector::from_vec(diag))).unwrap();
        apply_transform(&self.symplectic(), &thermal).unwrap()
    }
}

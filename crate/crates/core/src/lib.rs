//! Gaussian covariance-matrix toolkit for distributing entanglement between
//! two optical modes through an ancilla that never becomes entangled with them.
//!
//! The crate is organized bottom-up:
//!
//! * [`symplectic`], [`covariance`], [`spectrum`] and [`separability`] fix the
//!   phase-space conventions and provide the entanglement tests;
//! * [`protocol`] builds the three-step protocol analytically;
//! * [`montecarlo`] simulates the LOCC preparation with correlated random displacements;
//! * [`sweep`] and [`robustness`] scan parameter space, and [`output`] renders results.
//!
//! ```
//! use gauss_distill::protocol::{run_protocol, ProtocolParams};
//!
//! let report = run_protocol(&ProtocolParams::flagship(), true).unwrap();
//! assert!(report.nu < 1.0);
//! assert!(report.all_claims_hold());
//! ```

pub mod covariance;
pub mod error;
pub mod montecarlo;
pub mod output;
pub mod protocol;
pub mod robustness;
pub mod separability;
pub mod spectrum;
pub mod sweep;
pub mod symplectic;

pub use covariance::{apply_transform, is_physical, partial_transpose, CovarianceMatrix, ModePartition};
pub use error::{Error, Result};
pub use spectrum::{characteristic_invariants, symplectic_eigenvalues, InvariantTriple};
pub use symplectic::{balanced_beamsplitter, local_gaussian, symplectic_form, SymplecticTransform};

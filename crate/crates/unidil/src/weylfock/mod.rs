//! Truncated symmetric Fock space, Weyl unitaries, vector systems encoding
//! pairs of phase matrices, and the compression audit relating the two
//! Weyl families with an explicit exponential scale.
//!
//! All truncation tolerances here are empirical: the underlying identities
//! are exact only in infinite dimensions, and each check documents the
//! cutoff at which its residual was calibrated.

mod compress;
mod fock;
mod vectors;

pub use compress::{verify_compression, CompressionReport};
pub use fock::{
    gauge_conjugation_defect, weyl_commutation_defect, weyl_commutation_defect_at_phase,
    weyl_matrix, FockContext, WeylPropagator,
};
pub use vectors::{construct_vectors, VectorDefects, VectorSystem, VECTOR_TOL};

use crate::matcore::MatError;

/// Errors from Fock-space construction and truncation audits.
#[derive(Debug, thiserror::Error)]
pub enum FockError {
    #[error("bad context: {0}")]
    BadContext(String),
    #[error("basis of size {dim} exceeds cap {cap}")]
    TooLarge { dim: usize, cap: usize },
    #[error(
        "truncation too small: residual {residual:.3e} above requested {requested:.3e}; \
         retry with cutoff ≥ {suggested}"
    )]
    TruncationTooSmall { residual: f64, requested: f64, suggested: usize },
    #[error(transparent)]
    Mat(#[from] MatError),
}

//! Numerical verification that compressing the doubled Weyl family back to
//! the original mode block reproduces the original family up to the
//! explicit exponential scale.

use super::fock::{weyl_commutation_defect, FockContext, WeylPropagator};
use super::vectors::VectorSystem;
use super::FockError;
use crate::matcore::{hermitian_norm, vec_norm, Complex64, ComplexMatrix};

/// Result of a compression audit.
#[derive(Clone, Debug)]
pub struct CompressionReport {
    pub d: usize,
    pub modes: usize,
    pub cutoff: usize,
    /// Occupation bound of the audited block (cutoff/2).
    pub low_occupation: u32,
    /// ‖P W(z_k) P − e^{−‖y_k‖²/2} W(x_k)‖ on the low block, per vector.
    pub per_vector_residual: Vec<f64>,
    pub max_residual: f64,
    /// The scale e^{‖y_k‖²/2} relating compression and original, which
    /// equals e^{‖Θ−Θ'‖/4} by construction of the vector system.
    pub scale: f64,
    /// Worst commutation defect of the compressed-family representatives
    /// W(x_k) against the phases of Θ, on occupation ≤ 2.
    pub x_commutation_defect: f64,
    /// Cutoff at which the commutation audit ran. The x_k live on d modes
    /// only, so this can sit far above the compression cutoff at no cost;
    /// at the compression cutoff itself, truncation noise would mask the
    /// phase identity for unit-length vectors.
    pub x_commutation_cutoff: usize,
}

/// Largest cutoff ≤ 22 whose d-mode basis stays small enough for the
/// commutation audit (empirically calibrated: ≤ 22 reaches residuals below
/// 1e−4 for vectors of length ~1 on occupation ≤ 2).
fn audit_cutoff(d: usize) -> usize {
    let mut cutoff = 22;
    while cutoff > 4 {
        let dim: usize = (1..=d).fold(1, |acc, i| acc * (cutoff + i) / i);
        if dim <= 4_000 {
            break;
        }
        cutoff -= 1;
    }
    cutoff
}

/// Compresses each W(z_k) on the doubled truncated Fock space to the block
/// with no occupation in the last d modes and compares it against
/// e^{−‖y_k‖²/2}·W(x_k) on occupation ≤ cutoff/2, in operator norm. A
/// residual above `requested` is rejected with a suggested larger cutoff.
pub fn verify_compression(
    sys: &VectorSystem,
    ctx: &FockContext,
    requested: f64,
) -> Result<CompressionReport, FockError> {
    let d = sys.dim();
    if ctx.modes != 2 * d {
        return Err(FockError::BadContext(format!(
            "system of {d} vectors needs {} modes, context has {}",
            2 * d,
            ctx.modes
        )));
    }
    let cutoff = ctx.cutoff;
    let low_occ = (cutoff / 2) as u32;
    let small = FockContext::new(d, cutoff)?;

    // Row/column embedding of the small basis into the zero-tail block of
    // the doubled basis; enumeration order is preserved by the index map.
    let embed: Vec<usize> = small
        .basis()
        .iter()
        .map(|n| {
            let mut padded = n.clone();
            padded.resize(2 * d, 0);
            ctx.index_of(&padded).expect("zero-tail state within cutoff")
        })
        .collect();
    let low_small = small.low_block(low_occ);
    let low_embedded: Vec<usize> = low_small.iter().map(|&s| embed[s]).collect();

    let mut per_vector_residual = Vec::with_capacity(d);
    for k in 0..d {
        let big = WeylPropagator::new(&sys.z[k], ctx)?;
        let block = big.apply_basis_columns(&low_embedded)?;
        let compressed = ComplexMatrix::from_fn(low_small.len(), low_small.len(), |i, j| {
            block.get(embed[low_small[i]], j)
        });

        let damp = (-vec_norm(&sys.y[k]).powi(2) / 2.0).exp();
        let small_block = WeylPropagator::new(&sys.x[k], &small)?
            .apply_basis_columns(&low_small)?
            .scale(Complex64::new(damp, 0.0));
        let reference = ComplexMatrix::from_fn(low_small.len(), low_small.len(), |i, j| {
            small_block.get(low_small[i], j)
        });

        let diff = compressed.sub(&reference);
        let gram = diff.adjoint().mul(&diff);
        per_vector_residual.push(hermitian_norm(&gram)?.sqrt());
    }
    let max_residual = per_vector_residual.iter().cloned().fold(0.0, f64::max);
    if max_residual > requested {
        return Err(FockError::TruncationTooSmall {
            residual: max_residual,
            requested,
            suggested: cutoff + 4,
        });
    }

    let x_commutation_cutoff = audit_cutoff(d).max(cutoff);
    let audit_ctx = FockContext::new(d, x_commutation_cutoff)?;
    let mut x_commutation_defect = 0.0_f64;
    for k in 0..d {
        for l in k + 1..d {
            let defect = weyl_commutation_defect(&sys.x[l], &sys.x[k], &audit_ctx, 2)?;
            x_commutation_defect = x_commutation_defect.max(defect);
        }
    }

    Ok(CompressionReport {
        d,
        modes: ctx.modes,
        cutoff,
        low_occupation: low_occ,
        per_vector_residual,
        max_residual,
        scale: (0.25 * sys.theta_prime.sub(&sys.theta).spectral_norm()).exp(),
        x_commutation_defect,
        x_commutation_cutoff,
    })
}

#[cfg(test)]
mod tests {
    use super::super::vectors::construct_vectors;
    use super::*;
    use crate::rotreps::ThetaMatrix;

    #[test]
    fn equal_matrices_compress_exactly() {
        let theta = ThetaMatrix::constant(2, 0.7);
        let sys = construct_vectors(&theta, &theta).unwrap();
        let ctx = FockContext::new(4, 8).unwrap();
        let report = verify_compression(&sys, &ctx, 1e-6).unwrap();
        assert!((report.scale - 1.0).abs() < 1e-12);
        // With y = 0 the doubled operator acts trivially on the tail modes,
        // so the only residual is the tiny integrator error.
        assert!(report.max_residual < 1e-10, "residual {}", report.max_residual);
    }

    #[test]
    fn small_difference_matches_the_documented_scale_and_residual() {
        let theta = ThetaMatrix::zero(2);
        let theta_prime = ThetaMatrix::from_upper(2, vec![0.4]);
        let sys = construct_vectors(&theta, &theta_prime).unwrap();
        let ctx = FockContext::new(4, 10).unwrap();
        let report = verify_compression(&sys, &ctx, 1e-3).unwrap();
        assert!((report.scale - 0.1_f64.exp()).abs() < 1e-12);
        assert!(report.max_residual <= 1e-3, "residual {}", report.max_residual);
        assert!(
            report.x_commutation_defect < 1e-3,
            "commutation defect {}",
            report.x_commutation_defect
        );
        assert_eq!(report.low_occupation, 5);
        assert_eq!(report.x_commutation_cutoff, 22);
    }

    #[test]
    fn nonzero_base_phases_also_compress() {
        let theta = ThetaMatrix::constant(2, 0.5);
        let theta_prime = ThetaMatrix::constant(2, 0.9);
        let sys = construct_vectors(&theta, &theta_prime).unwrap();
        let ctx = FockContext::new(4, 10).unwrap();
        let report = verify_compression(&sys, &ctx, 1e-3).unwrap();
        assert!(report.max_residual <= 1e-3, "residual {}", report.max_residual);
    }

    #[test]
    fn compression_residual_decreases_along_the_cutoff_chain() {
        let theta = ThetaMatrix::zero(2);
        let theta_prime = ThetaMatrix::from_upper(2, vec![0.5]);
        let sys = construct_vectors(&theta, &theta_prime).unwrap();
        let mut previous = f64::INFINITY;
        for cutoff in [6usize, 8, 10, 12] {
            let ctx = FockContext::new(4, cutoff).unwrap();
            let report = verify_compression(&sys, &ctx, 1.0).unwrap();
            assert!(
                report.max_residual <= previous * 1.1,
                "residual {} grew from {previous} at cutoff {cutoff}",
                report.max_residual
            );
            previous = report.max_residual;
        }
        assert!(previous < 1e-3, "final residual {previous}");
    }

    #[test]
    fn too_small_truncations_are_rejected_with_a_suggestion() {
        let theta = ThetaMatrix::zero(2);
        let theta_prime = ThetaMatrix::from_upper(2, vec![2.5]);
        let sys = construct_vectors(&theta, &theta_prime).unwrap();
        let ctx = FockContext::new(4, 6).unwrap();
        match verify_compression(&sys, &ctx, 1e-6) {
            Err(FockError::TruncationTooSmall { residual, suggested, .. }) => {
                assert!(residual > 1e-6);
                assert!(suggested > 6);
            }
            other => panic!("expected truncation rejection, got {other:?}"),
        }
    }

    #[test]
    fn wrong_mode_count_is_rejected() {
        let theta = ThetaMatrix::zero(2);
        let sys = construct_vectors(&theta, &theta).unwrap();
        let ctx = FockContext::new(3, 6).unwrap();
        assert!(matches!(
            verify_compression(&sys, &ctx, 1e-3),
            Err(FockError::BadContext(_))
        ));
    }
}

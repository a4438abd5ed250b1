//! Monte-Carlo audit of the operator-coefficient norm bound
//! ‖Σ a_k ⊗ U_k + a_k* ⊗ U_k*‖ ≤ √(2d)·(√(2d−1)/d)·‖Σ a_k a_k* + a_k* a_k‖^{1/2}
//! for tuples of independent Haar unitaries, together with the certified
//! commuting-side value of the same coefficient family.

use super::tchain::hermitian_norm_hybrid;
use super::{haar_tuple, trial_rng, FreeModelError, SampleConfig};
use crate::dilation::opt::{certify_sup_grid, PhaseFamily};
use crate::matcore::{operator_norm, ComplexMatrix, MatError};
use std::f64::consts::TAU;

/// One audited inequality instance.
#[derive(Clone, Debug)]
pub struct LehnerReport {
    pub config: SampleConfig,
    /// Sampled left side per trial, and its maximum.
    pub lhs_per_trial: Vec<f64>,
    pub lhs_max: f64,
    /// Exact right side.
    pub rhs: f64,
    /// Certified commuting-side supremum sup_z ‖Σ z_k a_k + z̄_k a_k*‖
    /// and the grid's error bound.
    pub commuting_value: f64,
    pub commuting_error: f64,
    /// Whether every sampled trial respects the bound.
    pub holds: bool,
    /// rhs − lhs_max.
    pub margin: f64,
}

/// Samples Haar tuples and checks the bound for the given coefficient
/// matrices. The left side grows toward its free limit as N grows, so the
/// sampled maximum is the honest side of the comparison; the right side and
/// the commuting supremum are computed exactly (the latter up to a reported
/// certified error).
pub fn lehner_inequality_check(
    a: &[ComplexMatrix],
    cfg: &SampleConfig,
) -> Result<LehnerReport, FreeModelError> {
    if a.is_empty() {
        return Err(FreeModelError::BadInput("no coefficient matrices".into()));
    }
    if a.len() != cfg.d {
        return Err(FreeModelError::BadInput(format!(
            "{} coefficient matrices for d = {}",
            a.len(),
            cfg.d
        )));
    }
    let m = a[0].rows;
    for mat in a {
        if !mat.is_square() || mat.rows != m {
            return Err(FreeModelError::Mat(MatError::DimensionMismatch(format!(
                "coefficients must all be {m}×{m}, found {}×{}",
                mat.rows, mat.cols
            ))));
        }
    }

    let d = cfg.d as f64;
    let mut quad = ComplexMatrix::zeros(m, m);
    for mat in a {
        let adj = mat.adjoint();
        quad = quad.add(&mat.mul(&adj)).add(&adj.mul(mat));
    }
    let rhs = (2.0 * d).sqrt() * ((2.0 * d - 1.0).sqrt() / d)
        * operator_norm(&quad)?.sqrt();

    let mut lhs_per_trial = Vec::with_capacity(cfg.trials);
    for trial in 0..cfg.trials as u64 {
        let tuple = haar_tuple(cfg.d, cfg.matrix_dim, &mut trial_rng(cfg.seed, trial));
        let mut s = ComplexMatrix::zeros(m * cfg.matrix_dim, m * cfg.matrix_dim);
        for (mat, u) in a.iter().zip(&tuple) {
            s = s
                .add(&mat.tensor(u)?)
                .add(&mat.adjoint().tensor(&u.adjoint())?);
        }
        lhs_per_trial.push(hermitian_norm_hybrid(&s, cfg.seed ^ trial)?);
    }
    let lhs_max = lhs_per_trial.iter().cloned().fold(0.0, f64::max);

    // Commuting side: on the full torus the shift z → −z negates the
    // assembled matrix, so the λmax supremum of the grid equals the norm
    // supremum.
    let zero_family = a.iter().all(|mat| mat.max_abs() == 0.0);
    let (commuting_value, commuting_error) = if zero_family {
        (0.0, 0.0)
    } else {
        let fam = PhaseFamily::unit_weights(a.to_vec(), vec![TAU; a.len()]);
        let step = if a.len() <= 2 { 2e-2 } else { 0.1 };
        let cert = certify_sup_grid(&fam, step, 50_000_000)?;
        (cert.best, cert.slack)
    };

    Ok(LehnerReport {
        config: *cfg,
        lhs_max,
        lhs_per_trial,
        rhs,
        commuting_value,
        commuting_error,
        holds: lhs_max <= rhs,
        margin: rhs - lhs_max,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::Complex64;

    fn scalar(x: f64) -> ComplexMatrix {
        ComplexMatrix::from_fn(1, 1, |_, _| Complex64::new(x, 0.0))
    }

    #[test]
    fn scalar_coefficients_saturate_the_bound() {
        // With a_k = 1 the right side is exactly 2√(2d−1) and the sampled
        // left side converges to it from below.
        let cfg = SampleConfig::new(200, 2, 41, 2);
        let report = lehner_inequality_check(&[scalar(1.0), scalar(1.0)], &cfg).unwrap();
        let limit = 2.0 * 3.0_f64.sqrt();
        assert!((report.rhs - limit).abs() < 1e-12);
        assert!(report.holds);
        assert!(report.lhs_max > limit - 0.25, "lhs {}", report.lhs_max);
        // Commuting scalars reach the full sum of moduli.
        assert!((report.commuting_value - 4.0).abs() < report.commuting_error + 1e-9);
    }

    #[test]
    fn zero_coefficients_give_zero_on_both_sides() {
        let z = ComplexMatrix::zeros(2, 2);
        let cfg = SampleConfig::new(20, 1, 1, 2);
        let report = lehner_inequality_check(&[z.clone(), z], &cfg).unwrap();
        assert_eq!(report.lhs_max, 0.0);
        assert_eq!(report.rhs, 0.0);
        assert!(report.holds);
    }

    #[test]
    fn random_coefficients_respect_the_bound_with_margin() {
        let mut rng = trial_rng(77, 0);
        let cfg = SampleConfig::new(80, 3, 513, 2);
        for _ in 0..3 {
            let a: Vec<ComplexMatrix> = (0..2)
                .map(|_| {
                    ComplexMatrix::from_fn(2, 2, |_, _| super::super::standard_complex(&mut rng))
                })
                .collect();
            let report = lehner_inequality_check(&a, &cfg).unwrap();
            assert!(
                report.holds && report.margin > 0.05,
                "margin {}",
                report.margin
            );
            // The commuting supremum never exceeds the free side's limit,
            // and both sit under the right side.
            assert!(report.commuting_value <= report.rhs + 1e-9);
        }
    }

    #[test]
    fn shape_mismatches_are_rejected() {
        let cfg = SampleConfig::new(10, 1, 0, 2);
        let bad = [ComplexMatrix::zeros(2, 2), ComplexMatrix::zeros(3, 3)];
        assert!(matches!(
            lehner_inequality_check(&bad, &cfg),
            Err(FreeModelError::Mat(MatError::DimensionMismatch(_)))
        ));
        let wrong_count = [ComplexMatrix::zeros(2, 2)];
        assert!(matches!(
            lehner_inequality_check(&wrong_count, &cfg),
            Err(FreeModelError::BadInput(_))
        ));
    }
}

//! Random-matrix models for tuples of independent Haar unitaries:
//! Monte-Carlo estimates of the norms that large free tuples attain,
//! spectral-law checks, and coefficient-search experiments.
//!
//! Everything is exactly reproducible: a master seed plus the trial index
//! determine the generator state (see [`trial_rng`]), so serial and
//! parallel runs produce identical numbers.

mod lehner;
mod tchain;

pub use lehner::{lehner_inequality_check, LehnerReport};
pub use tchain::{
    build_t, cf0_ratio_search, coefficient_pattern, commuting_diagonal_tuple, estimate_t_norm,
    RatioSearchReport,
};

use crate::matcore::{
    hermitian_eigensystem, hermitian_eigenvalues, hermitian_norm, householder_qr, inner,
    Complex64, ComplexMatrix, MatError,
};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Errors from the Monte-Carlo routines that combine sampling with
/// certified torus grids.
#[derive(Debug, thiserror::Error)]
pub enum FreeModelError {
    #[error("bad input: {0}")]
    BadInput(String),
    #[error(transparent)]
    Mat(#[from] MatError),
    #[error(transparent)]
    Opt(#[from] crate::dilation::OptError),
}

/// Sampling parameters shared by the Monte-Carlo routines.
#[derive(Clone, Copy, Debug)]
pub struct SampleConfig {
    /// Matrix dimension N of each sampled unitary.
    pub matrix_dim: usize,
    /// Number of independent trials.
    pub trials: usize,
    /// Master seed; trial k uses stream k of this seed.
    pub seed: u64,
    /// Number of unitaries per tuple.
    pub d: usize,
}

impl SampleConfig {
    pub fn new(matrix_dim: usize, trials: usize, seed: u64, d: usize) -> Self {
        assert!(matrix_dim >= 1, "SampleConfig: matrix dimension ≥ 1");
        assert!(trials >= 1, "SampleConfig: at least one trial");
        assert!(d >= 1, "SampleConfig: at least one unitary");
        Self { matrix_dim, trials, seed, d }
    }
}

/// Deterministic per-trial generator: a ChaCha stream of the master seed,
/// so trials are independent and identical in serial and parallel runs.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// One standard complex Gaussian entry via the Box–Muller transform.
fn standard_complex(rng: &mut impl RngCore) -> Complex64 {
    // Map to (0, 1], avoiding ln(0).
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen();
    let r = (-2.0 * u1.ln()).sqrt();
    let phi = std::f64::consts::TAU * u2;
    Complex64::new(r * phi.cos(), r * phi.sin()) / 2.0_f64.sqrt()
}

/// Matrix with independent standard complex Gaussian entries.
pub fn ginibre(rows: usize, cols: usize, rng: &mut impl RngCore) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| standard_complex(rng))
}

/// A Haar-distributed N×N unitary: Gaussian matrix, QR factorization, with
/// the R diagonal normalized to nonnegative reals (plain QR is biased; the
/// phase correction makes the law exactly invariant).
pub fn haar_unitary(n: usize, rng: &mut impl RngCore) -> ComplexMatrix {
    assert!(n >= 1, "haar_unitary: dimension ≥ 1");
    let g = ginibre(n, n, rng);
    let (q, _) = householder_qr(&g);
    q
}

/// A tuple of d independent Haar unitaries from one generator.
pub fn haar_tuple(d: usize, n: usize, rng: &mut impl RngCore) -> Vec<ComplexMatrix> {
    (0..d).map(|_| haar_unitary(n, rng)).collect()
}

/// Statistics of one scalar observable across trials, with provenance.
#[derive(Clone, Debug)]
pub struct TrialStats {
    pub config: SampleConfig,
    pub per_trial: Vec<f64>,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    /// The limiting value the observable is compared against.
    pub reference: f64,
    /// |mean − reference|.
    pub deviation: f64,
}

impl TrialStats {
    fn from_values(config: SampleConfig, per_trial: Vec<f64>, reference: f64) -> Self {
        let mean = per_trial.iter().sum::<f64>() / per_trial.len() as f64;
        let min = per_trial.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = per_trial.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        Self { config, per_trial, mean, min, max, reference, deviation: (mean - reference).abs() }
    }
}

/// Norm of the Hermitian sum Σ (U_k + U_k*) over independent Haar tuples,
/// compared against the large-N limit 2√(2d−1). For a single unitary the
/// reference is its exact norm limit 2.
pub fn estimate_hf_norm(cfg: &SampleConfig) -> Result<TrialStats, MatError> {
    let values = run_trials(cfg, |tuple| {
        let mut h = ComplexMatrix::zeros(tuple[0].rows, tuple[0].rows);
        for u in tuple {
            h = h.add(&u.add(&u.adjoint()));
        }
        hermitian_norm(&h)
    })?;
    let reference = if cfg.d == 1 { 2.0 } else { 2.0 * (2.0 * cfg.d as f64 - 1.0).sqrt() };
    Ok(TrialStats::from_values(*cfg, values, reference))
}

fn run_trials(
    cfg: &SampleConfig,
    f: impl Fn(&[ComplexMatrix]) -> Result<f64, MatError> + Sync,
) -> Result<Vec<f64>, MatError> {
    (0..cfg.trials as u64)
        .into_par_iter()
        .map(|trial| {
            let mut rng = trial_rng(cfg.seed, trial);
            let tuple = haar_tuple(cfg.d, cfg.matrix_dim, &mut rng);
            f(&tuple)
        })
        .collect()
}

/// Eigenvalue phases of a unitary matrix, in [−π, π).
///
/// The Hermitian part (U + U*)/2 has the cosines as eigenvalues; for a
/// generic unitary its eigenvectors are eigenvectors of U itself, so the
/// Rayleigh quotient of the skew part recovers the sine and with it the
/// signed phase.
pub fn unitary_eigenphases(u: &ComplexMatrix) -> Result<Vec<f64>, MatError> {
    let n = u.rows;
    let herm = u.add(&u.adjoint()).scale(Complex64::new(0.5, 0.0));
    let skew = u.sub(&u.adjoint()).scale(Complex64::new(0.0, -0.5));
    let (cosines, vecs) = hermitian_eigensystem(&herm)?;
    let mut phases = Vec::with_capacity(n);
    for (j, &c) in cosines.iter().enumerate() {
        let psi: Vec<Complex64> = (0..n).map(|i| vecs.get(i, j)).collect();
        let s = inner(&skew.apply(&psi), &psi).re;
        phases.push(s.atan2(c));
    }
    Ok(phases)
}

/// Kolmogorov–Smirnov distance between a sample and a CDF.
pub fn ks_distance(sample: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    sample.sort_by(|a, b| a.partial_cmp(b).expect("finite sample"));
    let n = sample.len() as f64;
    let mut worst = 0.0_f64;
    for (i, &x) in sample.iter().enumerate() {
        let f = cdf(x);
        worst = worst.max((f - i as f64 / n).abs());
        worst = worst.max(((i + 1) as f64 / n - f).abs());
    }
    worst
}

/// CDF of the spectral law of U*V + V*U for free Haar pairs: the arcsine
/// distribution on [−2, 2] with density 1/(π√(4−x²)).
pub fn arcsine_cdf(x: f64) -> f64 {
    if x <= -2.0 {
        0.0
    } else if x >= 2.0 {
        1.0
    } else {
        0.5 + (x / 2.0).asin() / std::f64::consts::PI
    }
}

/// Joint report of the two-unitary spectral checks.
#[derive(Clone, Debug)]
pub struct ArcsineReport {
    pub config: SampleConfig,
    /// KS distance of the pooled spectrum of U*V + V*U to the arcsine law.
    pub ks: f64,
    /// Per-trial ‖U + V‖; tends to 2.
    pub sum_norm: TrialStats,
    /// Per-trial ‖VU − qUV‖ at a sampled unit q; tends to 2.
    pub twisted_commutator_norm: TrialStats,
}

/// Samples independent Haar pairs (U, V), pools the spectrum of
/// U*V + V*U against the arcsine law, and tracks ‖U + V‖ and
/// ‖VU − qUV‖ for a phase q drawn uniformly per trial (trial 0 uses q = 1
/// so the plain commutator is always represented).
pub fn arcsine_check(cfg: &SampleConfig) -> Result<ArcsineReport, MatError> {
    assert_eq!(cfg.d, 2, "arcsine_check: the law concerns pairs");
    struct Trial {
        spectrum: Vec<f64>,
        sum_norm: f64,
        twisted: f64,
    }
    let trials: Vec<Trial> = (0..cfg.trials as u64)
        .into_par_iter()
        .map(|trial| {
            let mut rng = trial_rng(cfg.seed, trial);
            let u = haar_unitary(cfg.matrix_dim, &mut rng);
            let v = haar_unitary(cfg.matrix_dim, &mut rng);
            let anti = u.adjoint().mul(&v).add(&v.adjoint().mul(&u));
            let spectrum = hermitian_eigenvalues(&anti)?;
            let sum_norm = crate::matcore::operator_norm(&u.add(&v))?;
            let q = if trial == 0 {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::from_polar(1.0, std::f64::consts::TAU * rng.gen::<f64>())
            };
            let twisted =
                crate::matcore::operator_norm(&v.mul(&u).sub(&u.mul(&v).scale(q)))?;
            Ok(Trial { spectrum, sum_norm, twisted })
        })
        .collect::<Result<_, MatError>>()?;

    let mut pooled: Vec<f64> = trials.iter().flat_map(|t| t.spectrum.iter().copied()).collect();
    let ks = ks_distance(&mut pooled, arcsine_cdf);
    let sum_norm =
        TrialStats::from_values(*cfg, trials.iter().map(|t| t.sum_norm).collect(), 2.0);
    let twisted_commutator_norm =
        TrialStats::from_values(*cfg, trials.iter().map(|t| t.twisted).collect(), 2.0);
    Ok(ArcsineReport { config: *cfg, ks, sum_norm, twisted_commutator_norm })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn haar_sampling_is_unitary_and_reproducible() {
        let mut rng = trial_rng(7, 0);
        let u = haar_unitary(50, &mut rng);
        assert!(u.unitary_defect() < 1e-10, "defect {}", u.unitary_defect());

        let again = haar_unitary(50, &mut trial_rng(7, 0));
        assert_eq!(u.data, again.data, "same seed and stream must agree bitwise");

        let other = haar_unitary(50, &mut trial_rng(7, 1));
        assert!(u.sub(&other).max_abs() > 1e-3, "different streams must differ");
    }

    #[test]
    fn single_dimension_samples_average_to_zero() {
        // A 1×1 Haar unitary is a uniform phase; the empirical mean of many
        // samples must sit near the origin.
        let mut rng = trial_rng(11, 0);
        let mut sum = Complex64::new(0.0, 0.0);
        let k = 10_000;
        for _ in 0..k {
            sum += haar_unitary(1, &mut rng).get(0, 0);
        }
        assert!((sum / k as f64).norm() < 0.05);
    }

    #[test]
    fn eigenphases_are_uniform_on_the_circle() {
        let mut rng = trial_rng(3, 0);
        let u = haar_unitary(200, &mut rng);
        let mut phases = unitary_eigenphases(&u).unwrap();
        // Uniform CDF on [−π, π).
        let ks = ks_distance(&mut phases, |t| {
            (t + std::f64::consts::PI) / std::f64::consts::TAU
        });
        assert!(ks < 0.1, "KS distance {ks}");
        // The phases must reproduce the unitary's trace.
        let tr: Complex64 = phases
            .iter()
            .map(|&t| Complex64::from_polar(1.0, t))
            .sum();
        assert!((tr - u.trace()).norm() < 1e-8);
    }

    #[test]
    fn hermitian_sum_norm_approaches_the_free_value() {
        let cfg = SampleConfig::new(120, 3, 2024, 2);
        let stats = estimate_hf_norm(&cfg).unwrap();
        let free = 2.0 * 3.0_f64.sqrt();
        assert!(stats.deviation < 0.2, "mean {} vs {free}", stats.mean);
        // Trivial bound and finite-size tripwire.
        assert!(stats.max <= 2.0 * cfg.d as f64 + 1e-9);
        assert!(stats.min >= free - 0.25);

        let single = estimate_hf_norm(&SampleConfig::new(300, 2, 5, 1)).unwrap();
        assert!((single.mean - 2.0).abs() < 0.05, "d = 1 mean {}", single.mean);
    }

    #[test]
    fn anticommutator_spectrum_follows_the_arcsine_law() {
        let cfg = SampleConfig::new(150, 2, 99, 2);
        let report = arcsine_check(&cfg).unwrap();
        assert!(report.ks < 0.08, "KS distance {}", report.ks);
        assert!(report.sum_norm.mean > 1.9 && report.sum_norm.mean <= 2.0 + 1e-9);
        assert!(
            report.twisted_commutator_norm.mean > 1.9
                && report.twisted_commutator_norm.mean <= 2.0 + 1e-9
        );
    }

    #[test]
    fn ks_distance_matches_hand_computation() {
        // Sample {0.25, 0.75} against the uniform CDF on [0, 1]: the
        // empirical CDF jumps to 1/2 at 0.25 and to 1 at 0.75.
        let mut sample = [0.75, 0.25];
        let d = ks_distance(&mut sample, |x| x);
        assert!((d - 0.25).abs() < 1e-12);
    }
}

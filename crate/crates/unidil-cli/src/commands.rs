//! One function per subcommand, each mapping parsed flags to library calls
//! and packaging the results as record drafts.
//!
//! Commands that audit an inequality or a certificate report every computed
//! quantity even when a check fails; the failure is carried alongside the
//! drafts so the dispatcher can emit the records first and exit nonzero
//! afterwards.

use std::f64::consts::TAU;
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use rand::Rng;

use unidil::dilation::{
    c_constant_lower_proof, c_theta_constant, c_theta_constant_with_grid, c_theta_general,
    closed_form_constants, tensor_upper_bound, BoundKind, CertifiedValue, DilationError, OptError,
    WeightsSearch,
};
use unidil::freemodel::{
    arcsine_check, cf0_ratio_search, estimate_hf_norm, estimate_t_norm, ginibre,
    lehner_inequality_check, trial_rng, FreeModelError, SampleConfig, TrialStats,
};
use unidil::matcore::{ComplexMatrix, MatError};
use unidil::mrange::{
    l1_ball_containment, metric_inequality_audit, DirectionNet, MrangeError, RotationFamily,
};
use unidil::pathext::{
    constant_real_oracle, displacement_real_oracle, linear_real_oracle, rotating_tuple_oracle,
    tuple_norm_metric, GridPathOracle, PathError,
};
use unidil::rotreps::{RationalAngle, RepError, ThetaMatrix};
use unidil::weylfock::{construct_vectors, verify_compression, FockContext, FockError, VECTOR_TOL};

use crate::record::{Draft, Params};
use crate::theta_file::load_theta_file;
use crate::CliError;

/// Drafts plus an optional deferred failure (records are still emitted).
pub(crate) struct CommandOutput {
    pub drafts: Vec<Draft>,
    pub failure: Option<CliError>,
    pub warnings: Vec<String>,
}

impl CommandOutput {
    fn ok(drafts: Vec<Draft>) -> Self {
        Self { drafts, failure: None, warnings: Vec::new() }
    }
}

fn kind_str(bound: BoundKind) -> &'static str {
    match bound {
        BoundKind::CertifiedLower => "certified_lower",
        BoundKind::CertifiedUpper => "certified_upper",
        BoundKind::TwoSided => "two_sided",
    }
}

// ---------------------------------------------------------------------------
// Exit-code classification of library errors: parameter problems exit 2,
// exceeded caps and budgets exit 4, everything that means "the requested
// certificate was not obtained" exits 3.

fn classify_mat(e: MatError) -> CliError {
    match &e {
        MatError::TensorTooLarge { .. } => CliError::Resource(e.to_string()),
        _ => CliError::Certificate(e.to_string()),
    }
}

fn classify_rep(e: RepError) -> CliError {
    match e {
        RepError::DimensionCap { .. } => CliError::Resource(e.to_string()),
        RepError::PhaseCount { .. } => CliError::Usage(e.to_string()),
        RepError::Mat(m) => classify_mat(m),
    }
}

fn classify_opt(e: OptError) -> CliError {
    match &e {
        OptError::BadStep(_) => CliError::Usage(e.to_string()),
        OptError::Budget { .. } => CliError::Resource(e.to_string()),
        OptError::TargetUnprovable { .. } => CliError::Certificate(e.to_string()),
    }
}

fn classify_dilation(e: DilationError) -> CliError {
    match e {
        DilationError::UnsupportedDim(_)
        | DilationError::BadGridStep { .. }
        | DilationError::BadWeights(_) => CliError::Usage(e.to_string()),
        DilationError::Opt(inner) => classify_opt(inner),
        DilationError::Rep(inner) => classify_rep(inner),
        DilationError::Mat(inner) => classify_mat(inner),
        other => CliError::Certificate(other.to_string()),
    }
}

fn classify_free(e: FreeModelError) -> CliError {
    match e {
        FreeModelError::BadInput(_) => CliError::Usage(e.to_string()),
        FreeModelError::Mat(inner) => classify_mat(inner),
        FreeModelError::Opt(inner) => classify_opt(inner),
    }
}

fn classify_fock(e: FockError) -> CliError {
    match e {
        FockError::BadContext(_) => CliError::Usage(e.to_string()),
        FockError::TooLarge { .. } => CliError::Resource(e.to_string()),
        FockError::TruncationTooSmall { .. } => CliError::Certificate(e.to_string()),
        FockError::Mat(inner) => classify_mat(inner),
    }
}

fn classify_mrange(e: MrangeError) -> CliError {
    match e {
        MrangeError::UnsupportedDim(_)
        | MrangeError::BadDirection(_)
        | MrangeError::ScaleOutOfRange(_)
        | MrangeError::NoCoveringBound => CliError::Usage(e.to_string()),
        MrangeError::Rep(inner) => classify_rep(inner),
        MrangeError::Mat(inner) => classify_mat(inner),
    }
}

fn classify_path(e: PathError) -> CliError {
    match e {
        PathError::DepthExhausted { .. } => CliError::Certificate(e.to_string()),
        other => CliError::Usage(other.to_string()),
    }
}

fn rational(m: i64, n: u64) -> Result<RationalAngle, CliError> {
    if n == 0 {
        return Err(CliError::Usage("angle denominator must be positive".into()));
    }
    Ok(RationalAngle::new(m, n))
}

fn cert_draft(params: Params, cert: &CertifiedValue, seed: Option<u64>) -> Draft {
    Draft::new(
        params.set("method", &cert.method),
        cert.value,
        cert.error_bound,
        kind_str(cert.bound),
        seed,
    )
}

// ---------------------------------------------------------------------------
// ctheta

/// Dilation constant for d generators at a constant rational angle 2π·m/n.
#[derive(Args, Debug)]
pub struct CthetaArgs {
    /// Angle numerator (of 2π·m/n)
    #[arg(long, allow_hyphen_values = true)]
    pub m: i64,
    /// Angle denominator
    #[arg(long)]
    pub n: u64,
    /// Number of generators
    #[arg(long)]
    pub d: usize,
    /// Torus grid step in radians (default: resolution-matched)
    #[arg(long)]
    pub grid: Option<f64>,
}

pub(crate) fn ctheta(a: &CthetaArgs) -> Result<CommandOutput, CliError> {
    let q = rational(a.m, a.n)?;
    let cert = match a.grid {
        Some(step) => c_theta_constant_with_grid(q, a.d, step),
        None => c_theta_constant(q, a.d),
    }
    .map_err(classify_dilation)?;
    let params = Params::new()
        .set("m", a.m)
        .set("n", a.n)
        .set("angle", format!("{}/{}", q.numerator(), q.denominator()))
        .set("d", a.d)
        .set_if("grid", a.grid);
    Ok(CommandOutput::ok(vec![cert_draft(params, &cert, None)]))
}

// ---------------------------------------------------------------------------
// ctheta-general

/// Dilation constant for an angle matrix read from a file.
#[derive(Args, Debug)]
pub struct CthetaGeneralArgs {
    /// Angle-matrix file: first line d, then the strict upper triangle
    #[arg(long)]
    pub theta_file: PathBuf,
}

/// Largest dimension accepted on the non-rational path, where every
/// generator pair costs a certified two-generator sweep.
const GENERAL_DIM_CAP: usize = 6;

pub(crate) fn ctheta_general(a: &CthetaGeneralArgs) -> Result<CommandOutput, CliError> {
    let parsed = load_theta_file(&a.theta_file)?;
    let base = Params::new().set("theta_file", a.theta_file.display()).set("d", parsed.d);
    let mut out = if let Some(rational) = &parsed.rational {
        let general =
            c_theta_general(rational, &WeightsSearch::default()).map_err(classify_dilation)?;
        let params = base.set("weights", format!("{:?}", general.weights.as_slice()));
        CommandOutput::ok(vec![cert_draft(params, &general.constant, None)])
    } else {
        if parsed.d > GENERAL_DIM_CAP {
            return Err(CliError::Resource(format!(
                "non-rational angle matrix with {} generators: every pair needs a certified \
                 sweep and the budget caps out at {GENERAL_DIM_CAP}",
                parsed.d
            )));
        }
        let value = tensor_upper_bound(&parsed.matrix).map_err(classify_dilation)?;
        let params = base.set(
            "method",
            "product over columns of certified two-generator bounds at convergent angles",
        );
        CommandOutput::ok(vec![Draft::new(params, value, 0.0, "certified_upper", None)])
    };
    out.warnings = parsed.warnings;
    Ok(out)
}

// ---------------------------------------------------------------------------
// c3-bound

/// Certified lower bound for the three-generator constant at angle 2π·m/n.
#[derive(Args, Debug)]
pub struct C3BoundArgs {
    /// Angle numerator
    #[arg(long, default_value_t = 3, allow_hyphen_values = true)]
    pub m: i64,
    /// Angle denominator
    #[arg(long, default_value_t = 7)]
    pub n: u64,
    /// Finest branch-and-bound box width in radians
    #[arg(long, default_value_t = 2e-3)]
    pub grid: f64,
    /// Constant to prove the family exceeds
    #[arg(long, default_value_t = 1.858)]
    pub target: f64,
}

pub(crate) fn c3_bound(a: &C3BoundArgs) -> Result<CommandOutput, CliError> {
    let q = rational(a.m, a.n)?;
    let proof = c_constant_lower_proof(q, 3, a.target, a.grid).map_err(classify_dilation)?;
    let params = Params::new()
        .set("m", a.m)
        .set("n", a.n)
        .set("d", 3)
        .set("grid", a.grid)
        .set("target", a.target);
    Ok(CommandOutput::ok(vec![cert_draft(params, &proof, None)]))
}

// ---------------------------------------------------------------------------
// constants

/// Closed-form reference constants for d generators.
#[derive(Args, Debug)]
pub struct ConstantsArgs {
    /// Number of generators
    #[arg(long)]
    pub d: usize,
}

pub(crate) fn constants(a: &ConstantsArgs) -> Result<CommandOutput, CliError> {
    if a.d == 0 {
        return Err(CliError::Usage("constants: d must be at least 1".into()));
    }
    let cc = closed_form_constants(a.d);
    let base = || {
        let p = Params::new().set("d", a.d);
        if cc.degenerate {
            p.set("degenerate", true)
        } else {
            p
        }
    };
    let quantity = |name: &str, value: f64, kind: &str| {
        Draft::new(base().set("quantity", name), value, 0.0, kind, None)
    };
    let factorization = (cc.c_uf * cc.c_f0_upper - (2.0 * a.d as f64).sqrt()).abs();
    Ok(CommandOutput::ok(vec![
        quantity("c_uf", cc.c_uf, "exact"),
        quantity("c_f0_lower", cc.c_f0_lower, "certified_lower"),
        quantity("c_f0_upper", cc.c_f0_upper, "certified_upper"),
        quantity("c_d_upper", cc.c_d_upper, "certified_upper"),
        quantity("c_d_lower_known", cc.c_d_lower_known, "certified_lower"),
        quantity("factorization_defect", factorization, "measured"),
    ]))
}

// ---------------------------------------------------------------------------
// free-norms

/// Sampled operator norms of free-model observables over Haar tuples.
#[derive(Args, Debug)]
pub struct FreeNormsArgs {
    /// Number of generators
    #[arg(long)]
    pub d: usize,
    /// Matrix dimension per unitary
    #[arg(long, default_value_t = 500)]
    pub dim: usize,
    /// Independent Haar tuples to sample
    #[arg(long, default_value_t = 4)]
    pub trials: usize,
    /// RNG seed
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

/// Cap on the chain observable's ambient dimension dim·2^d.
const CHAIN_DIM_CAP: usize = 1 << 18;

fn sampled_draft(name: &str, stats: &TrialStats, params: Params, seed: u64) -> Draft {
    let params = params
        .set("quantity", name)
        .set("reference", stats.reference)
        .set("deviation", stats.deviation)
        .set("min", stats.min)
        .set("max", stats.max);
    Draft::new(params, stats.mean, stats.max - stats.min, "sampled", Some(seed))
}

pub(crate) fn free_norms(a: &FreeNormsArgs) -> Result<CommandOutput, CliError> {
    if a.d == 0 || a.dim == 0 || a.trials == 0 {
        return Err(CliError::Usage("free-norms: d, dim, and trials must be positive".into()));
    }
    let chain_dim = a
        .dim
        .checked_shl(a.d.min(63) as u32)
        .filter(|&total| total <= CHAIN_DIM_CAP)
        .ok_or_else(|| {
            CliError::Resource(format!(
                "free-norms: chain dimension dim·2^d exceeds {CHAIN_DIM_CAP}"
            ))
        })?;
    let cfg = SampleConfig::new(a.dim, a.trials, a.seed, a.d);
    let hf = estimate_hf_norm(&cfg).map_err(classify_mat)?;
    let td = estimate_t_norm(&cfg).map_err(classify_mat)?;
    let base =
        || Params::new().set("d", a.d).set("dim", a.dim).set("trials", a.trials);
    Ok(CommandOutput::ok(vec![
        sampled_draft("hermitian_sum_norm", &hf, base(), a.seed),
        sampled_draft("chain_norm", &td, base().set("chain_dim", chain_dim), a.seed),
    ]))
}

// ---------------------------------------------------------------------------
// arcsine

/// Spectral-law and norm checks for independent Haar pairs.
#[derive(Args, Debug)]
pub struct ArcsineArgs {
    /// Matrix dimension per unitary
    #[arg(long, default_value_t = 500)]
    pub dim: usize,
    /// Independent pairs to sample
    #[arg(long, default_value_t = 3)]
    pub trials: usize,
    /// RNG seed
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

pub(crate) fn arcsine(a: &ArcsineArgs) -> Result<CommandOutput, CliError> {
    if a.dim == 0 || a.trials == 0 {
        return Err(CliError::Usage("arcsine: dim and trials must be positive".into()));
    }
    let cfg = SampleConfig::new(a.dim, a.trials, a.seed, 2);
    let report = arcsine_check(&cfg).map_err(classify_mat)?;
    let base = || Params::new().set("dim", a.dim).set("trials", a.trials);
    let ks = Draft::new(
        base().set("quantity", "ks_distance").set("pooled", a.dim * a.trials),
        report.ks,
        0.0,
        "measured",
        Some(a.seed),
    );
    let sum = sampled_draft("pair_sum_norm", &report.sum_norm, base(), a.seed);
    let twisted = sampled_draft(
        "twisted_commutator_norm",
        &report.twisted_commutator_norm,
        base().set("plain_commutator", report.twisted_commutator_norm.per_trial[0]),
        a.seed,
    );
    Ok(CommandOutput::ok(vec![ks, sum, twisted]))
}

// ---------------------------------------------------------------------------
// lehner

/// Coefficient-norm inequality audit over random coefficient tuples.
#[derive(Args, Debug)]
pub struct LehnerArgs {
    /// Number of generators
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    /// Matrix dimension per sampled unitary
    #[arg(long, default_value_t = 300)]
    pub dim: usize,
    /// Independent coefficient draws, one inequality instance each
    #[arg(long, default_value_t = 20)]
    pub trials: usize,
    /// RNG seed
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Coefficient matrix size
    #[arg(long, default_value_t = 2)]
    pub coeff_dim: usize,
    /// Tolerated sampling excess of the left side over the bound
    #[arg(long, default_value_t = 0.05)]
    pub slack: f64,
}

/// Stream offset separating coefficient draws from the Haar streams the
/// inequality check consumes.
const COEFF_STREAM: u64 = 1 << 32;

pub(crate) fn lehner(a: &LehnerArgs) -> Result<CommandOutput, CliError> {
    if a.d == 0 || a.dim == 0 || a.trials == 0 || a.coeff_dim == 0 {
        return Err(CliError::Usage(
            "lehner: d, dim, trials, and coeff-dim must be positive".into(),
        ));
    }
    if !(a.slack >= 0.0) {
        return Err(CliError::Usage("lehner: slack must be nonnegative".into()));
    }
    let mut drafts = Vec::with_capacity(a.trials);
    let mut failure = None;
    for instance in 0..a.trials as u64 {
        let mut coeff_rng = trial_rng(a.seed, COEFF_STREAM | instance);
        let coeffs: Vec<ComplexMatrix> =
            (0..a.d).map(|_| ginibre(a.coeff_dim, a.coeff_dim, &mut coeff_rng)).collect();
        // One Haar draw per instance, on a per-instance key so instances
        // are independent.
        let cfg = SampleConfig::new(a.dim, 1, a.seed.wrapping_add(instance), a.d);
        let report = lehner_inequality_check(&coeffs, &cfg).map_err(classify_free)?;
        let params = Params::new()
            .set("instance", instance)
            .set("d", a.d)
            .set("dim", a.dim)
            .set("coeff_dim", a.coeff_dim)
            .set("lhs_max", report.lhs_max)
            .set("rhs", report.rhs)
            .set("commuting_value", report.commuting_value)
            .set("commuting_error", report.commuting_error)
            .set("slack", a.slack);
        drafts.push(Draft::new(params, report.margin, 0.0, "sampled", Some(a.seed)));
        if report.lhs_max > report.rhs + a.slack && failure.is_none() {
            failure = Some(CliError::Certificate(format!(
                "lehner: instance {instance} violates the bound: sampled {:.6} against {:.6} \
                 with slack {}",
                report.lhs_max, report.rhs, a.slack
            )));
        }
    }
    Ok(CommandOutput { drafts, failure, warnings: Vec::new() })
}

// ---------------------------------------------------------------------------
// cf0-search

/// Searches coefficient tuples maximizing the free-to-commuting norm ratio.
#[derive(Args, Debug)]
pub struct Cf0SearchArgs {
    /// Number of generators
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    /// Matrix dimension per sampled unitary
    #[arg(long, default_value_t = 120)]
    pub dim: usize,
    /// Haar tuples shared by all candidates
    #[arg(long, default_value_t = 3)]
    pub trials: usize,
    /// RNG seed
    #[arg(long, default_value_t = 2024)]
    pub seed: u64,
    /// Coefficient matrix size
    #[arg(long, default_value_t = 2)]
    pub coeff_dim: usize,
}

pub(crate) fn cf0_search(a: &Cf0SearchArgs) -> Result<CommandOutput, CliError> {
    if a.d == 0 || a.dim == 0 || a.trials == 0 {
        return Err(CliError::Usage("cf0-search: d, dim, and trials must be positive".into()));
    }
    let cfg = SampleConfig::new(a.dim, a.trials, a.seed, a.d);
    let report = cf0_ratio_search(&cfg, a.coeff_dim).map_err(classify_free)?;
    let params = Params::new()
        .set("d", a.d)
        .set("dim", a.dim)
        .set("trials", a.trials)
        .set("coeff_dim", a.coeff_dim)
        .set("bracket_lower", report.bracket.0)
        .set("bracket_upper", report.bracket.1)
        .set("free_value", report.free_value)
        .set("commuting_value", report.commuting_value)
        .set("commuting_error", report.commuting_error)
        .set("candidates_tried", report.candidates_tried)
        .set("method", &report.method);
    Ok(CommandOutput::ok(vec![Draft::new(
        params,
        report.best_ratio,
        0.0,
        "sampled",
        Some(a.seed),
    )]))
}

// ---------------------------------------------------------------------------
// weyl-verify

/// Compression audit of doubled Weyl families over random angle pairs.
#[derive(Args, Debug)]
pub struct WeylVerifyArgs {
    /// Number of generators
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    /// Fock truncation cutoff for the compression check
    #[arg(long, default_value_t = 10)]
    pub cutoff: usize,
    /// Random angle pairs to audit
    #[arg(long, default_value_t = 10)]
    pub pairs: usize,
    /// RNG seed
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Largest tolerated compression residual on the low block
    #[arg(long, default_value_t = 1e-3)]
    pub max_residual: f64,
    /// Largest tolerated defect in the vector-system identities
    #[arg(long, default_value_t = VECTOR_TOL)]
    pub vector_tol: f64,
    /// Largest tolerated commutation-phase defect of the compressed family
    #[arg(long, default_value_t = 1e-4)]
    pub commutation_tol: f64,
}

pub(crate) fn weyl_verify(a: &WeylVerifyArgs) -> Result<CommandOutput, CliError> {
    if a.d == 0 || a.pairs == 0 {
        return Err(CliError::Usage("weyl-verify: d and pairs must be positive".into()));
    }
    if !(a.max_residual > 0.0 && a.vector_tol > 0.0 && a.commutation_tol > 0.0) {
        return Err(CliError::Usage("weyl-verify: tolerances must be positive".into()));
    }
    fn fail(f: &mut Option<CliError>, msg: String) {
        if f.is_none() {
            *f = Some(CliError::Certificate(msg));
        }
    }
    let entries = a.d * (a.d - 1) / 2;
    let mut drafts = Vec::with_capacity(a.pairs);
    let mut failure: Option<CliError> = None;
    for pair in 0..a.pairs as u64 {
        let mut rng = trial_rng(a.seed, pair);
        let upper: Vec<f64> =
            (0..entries).map(|_| (rng.gen::<f64>() - 0.5) * TAU).collect();
        let mut delta: Vec<f64> = (0..entries).map(|_| 2.0 * rng.gen::<f64>() - 1.0).collect();
        let target = 0.2 + 0.8 * rng.gen::<f64>();
        let raw_norm = ThetaMatrix::from_upper(a.d, delta.clone()).spectral_norm();
        if raw_norm > 0.0 {
            for x in &mut delta {
                *x *= target / raw_norm;
            }
        }
        let theta = ThetaMatrix::from_upper(a.d, upper.clone());
        let theta_prime = ThetaMatrix::from_upper(
            a.d,
            upper.iter().zip(&delta).map(|(t, dl)| t + dl).collect(),
        );
        let gap = theta_prime.sub(&theta).spectral_norm();

        let sys = construct_vectors(&theta, &theta_prime).map_err(classify_fock)?;
        let worst = sys.defects().worst();
        if worst > a.vector_tol {
            fail(&mut failure, format!(
                "weyl-verify: pair {pair} vector defect {worst:.3e} above {:.3e}",
                a.vector_tol
            ));
        }
        let ctx = FockContext::new(2 * a.d, a.cutoff).map_err(classify_fock)?;
        let report = match verify_compression(&sys, &ctx, a.max_residual) {
            Ok(r) => r,
            Err(e @ FockError::TruncationTooSmall { .. }) => {
                fail(&mut failure, format!("weyl-verify: pair {pair}: {e}"));
                continue;
            }
            Err(e) => return Err(classify_fock(e)),
        };
        if report.x_commutation_defect > a.commutation_tol {
            fail(&mut failure, format!(
                "weyl-verify: pair {pair} commutation defect {:.3e} above {:.3e}",
                report.x_commutation_defect, a.commutation_tol
            ));
        }
        let params = Params::new()
            .set("pair", pair)
            .set("d", a.d)
            .set("cutoff", a.cutoff)
            .set("low_occupation", report.low_occupation)
            .set("delta_norm", gap)
            .set("scale", report.scale)
            .set("vector_defect", worst)
            .set("commutation_defect", report.x_commutation_defect)
            .set("commutation_cutoff", report.x_commutation_cutoff);
        drafts.push(Draft::new(params, report.max_residual, 0.0, "measured", Some(a.seed)));
    }
    Ok(CommandOutput { drafts, failure, warnings: Vec::new() })
}

// ---------------------------------------------------------------------------
// vectors

/// Vector-system construction for a pair of angle files, with defects.
#[derive(Args, Debug)]
pub struct VectorsArgs {
    /// Angle-matrix file for the base matrix
    #[arg(long)]
    pub theta_file: PathBuf,
    /// Angle-matrix file for the perturbed matrix
    #[arg(long)]
    pub theta_prime_file: PathBuf,
    /// Largest tolerated identity defect
    #[arg(long, default_value_t = VECTOR_TOL)]
    pub tol: f64,
}

pub(crate) fn vectors(a: &VectorsArgs) -> Result<CommandOutput, CliError> {
    let first = load_theta_file(&a.theta_file)?;
    let second = load_theta_file(&a.theta_prime_file)?;
    if first.d != second.d {
        return Err(CliError::Usage(format!(
            "vectors: files have {} and {} generators",
            first.d, second.d
        )));
    }
    let sys = construct_vectors(&first.matrix, &second.matrix).map_err(classify_fock)?;
    let defects = sys.defects();
    let worst = defects.worst();
    let params = Params::new()
        .set("d", first.d)
        .set("theta_file", a.theta_file.display())
        .set("theta_prime_file", a.theta_prime_file.display())
        .set("distance", second.matrix.sub(&first.matrix).spectral_norm())
        .set("x_phases", defects.x_phases)
        .set("z_phases", defects.z_phases)
        .set("y_norms", defects.y_norms)
        .set("concatenation", defects.concatenation)
        .set("tol", a.tol);
    let failure = (worst > a.tol).then(|| {
        CliError::Certificate(format!(
            "vectors: worst identity defect {worst:.3e} above {:.3e}",
            a.tol
        ))
    });
    let mut warnings = first.warnings;
    warnings.extend(second.warnings);
    Ok(CommandOutput {
        drafts: vec![Draft::new(params, worst, 0.0, "measured", None)],
        failure,
        warnings,
    })
}

// ---------------------------------------------------------------------------
// mrange-audit

/// Range-distance inequality audit over random two-generator angle pairs.
#[derive(Args, Debug)]
pub struct MrangeAuditArgs {
    /// Random angle pairs to audit
    #[arg(long, default_value_t = 10)]
    pub pairs: usize,
    /// RNG seed
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Direction-net spacing (covering radius is twice this)
    #[arg(long, default_value_t = 0.3)]
    pub net_spacing: f64,
    /// Largest angle denominator drawn
    #[arg(long, default_value_t = 9)]
    pub max_den: u64,
}

pub(crate) fn mrange_audit(a: &MrangeAuditArgs) -> Result<CommandOutput, CliError> {
    if a.pairs == 0 || a.max_den == 0 {
        return Err(CliError::Usage("mrange-audit: pairs and max-den must be positive".into()));
    }
    if !(a.net_spacing > 0.0 && a.net_spacing <= 0.5) {
        return Err(CliError::Usage(
            "mrange-audit: net spacing must lie in (0, 0.5] to keep a covering bound".into(),
        ));
    }
    fn draw(rng: &mut impl Rng, max_den: u64) -> RationalAngle {
        let n = rng.gen_range(1..=max_den);
        let m = rng.gen_range(0..n) as i64;
        RationalAngle::new(m, n)
    }
    let mut angle_pairs = Vec::with_capacity(a.pairs);
    for i in 0..a.pairs as u64 {
        let mut rng = trial_rng(a.seed, i);
        let q = draw(&mut rng, a.max_den);
        let qp = draw(&mut rng, a.max_den);
        angle_pairs.push((q, qp));
    }
    let net = DirectionNet::cube_shell(4, a.net_spacing);
    let rows = metric_inequality_audit(&angle_pairs, &net).map_err(classify_mrange)?;
    let mut drafts = Vec::with_capacity(rows.len());
    let mut failure = None;
    for (i, row) in rows.iter().enumerate() {
        let params = Params::new()
            .set("pair", i)
            .set("theta", format!("{}/{}", row.theta.numerator(), row.theta.denominator()))
            .set(
                "theta_prime",
                format!("{}/{}", row.theta_prime.numerator(), row.theta_prime.denominator()),
            )
            .set("upper", row.upper)
            .set("margin", row.margin)
            .set("net_size", net.len())
            .set("net_spacing", a.net_spacing);
        drafts.push(Draft::new(params, row.lower, 0.0, "measured", Some(a.seed)));
        if !row.passed && failure.is_none() {
            failure = Some(CliError::Certificate(format!(
                "mrange-audit: pair {i} measured distance {:.6} above modulus {:.6}",
                row.lower, row.upper
            )));
        }
    }
    Ok(CommandOutput { drafts, failure, warnings: Vec::new() })
}

// ---------------------------------------------------------------------------
// l1-ball

/// Certified Euclidean ball inside the level-1 range of a gauge family.
#[derive(Args, Debug)]
pub struct L1BallArgs {
    /// Angle numerator (of 2π·m/n)
    #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
    pub m: i64,
    /// Angle denominator
    #[arg(long, default_value_t = 1)]
    pub n: u64,
    /// Number of generators
    #[arg(long)]
    pub d: usize,
    /// Angular step of the axis-direction audit net
    #[arg(long, default_value_t = 1e-2)]
    pub phase_step: f64,
    /// Tolerated support deficit in the net audit
    #[arg(long, default_value_t = 1e-3)]
    pub tolerance: f64,
    /// Radius the certificate must reach (default 1/√d − 10⁻³)
    #[arg(long)]
    pub delta_floor: Option<f64>,
}

pub(crate) fn l1_ball(a: &L1BallArgs) -> Result<CommandOutput, CliError> {
    let q = rational(a.m, a.n)?;
    if a.d == 0 {
        return Err(CliError::Usage("l1-ball: d must be at least 1".into()));
    }
    if !(a.phase_step > 0.0 && a.phase_step < TAU) {
        return Err(CliError::Usage("l1-ball: phase step must lie in (0, 2π)".into()));
    }
    if !(a.tolerance > 0.0) {
        return Err(CliError::Usage("l1-ball: tolerance must be positive".into()));
    }
    let floor = a.delta_floor.unwrap_or(1.0 / (a.d as f64).sqrt() - 1e-3);
    let family = RotationFamily::new(q, a.d).map_err(classify_mrange)?;
    let net = DirectionNet::axis_phases(a.d, a.phase_step);
    let report = l1_ball_containment(&family, &net, a.tolerance).map_err(classify_mrange)?;
    let params = Params::new()
        .set("m", a.m)
        .set("n", a.n)
        .set("d", a.d)
        .set("phase_step", a.phase_step)
        .set("tolerance", a.tolerance)
        .set("delta_floor", floor)
        .set("axis_defect", report.axis_defect)
        .set("net_size", report.net_size)
        .set("net_min_excess", report.net_min_excess);
    let mut failure = None;
    if !report.passed {
        failure = Some(CliError::Certificate(format!(
            "l1-ball: a net direction shows support deficit {:.3e}",
            -report.net_min_excess
        )));
    } else if report.delta < floor {
        failure = Some(CliError::Certificate(format!(
            "l1-ball: certified radius {:.6} below requested floor {floor:.6}",
            report.delta
        )));
    }
    Ok(CommandOutput {
        drafts: vec![Draft::new(params, report.delta, 0.0, "certified_lower", None)],
        failure,
        warnings: Vec::new(),
    })
}

// ---------------------------------------------------------------------------
// extend-path

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OracleKind {
    /// Constant path (zero adjacent-step constant)
    Constant,
    /// Linear path, exact interpolation at α = 1
    Linear,
    /// Seeded midpoint-displacement rough path
    Displacement,
    /// Commuting unitary pair with rotating eigenphases
    Rotating,
}

/// Hölder extension of a grid path to an off-grid time.
#[derive(Args, Debug)]
pub struct ExtendPathArgs {
    /// Which shipped oracle to extend
    #[arg(long, value_enum)]
    pub oracle: OracleKind,
    /// Time in [0, 1] to extend to
    #[arg(long, default_value_t = 0.37)]
    pub t: f64,
    /// Requested tail accuracy
    #[arg(long, default_value_t = 1e-6)]
    pub eps: f64,
    /// Grid base (real-line oracles)
    #[arg(long, default_value_t = 2)]
    pub base: u32,
    /// Hölder exponent (constant and displacement oracles)
    #[arg(long, default_value_t = 0.5)]
    pub alpha: f64,
    /// Adjacent-step constant (slope for the linear oracle)
    #[arg(long, default_value_t = 1.0)]
    pub c1: f64,
    /// RNG seed (displacement oracle and audits)
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// If positive, additionally audit this many random grid pairs
    #[arg(long, default_value_t = 0)]
    pub audit_samples: usize,
}

pub(crate) fn extend_path(a: &ExtendPathArgs) -> Result<CommandOutput, CliError> {
    if a.base < 2 {
        return Err(CliError::Usage("extend-path: grid base must be at least 2".into()));
    }
    if !(a.alpha > 0.0 && a.alpha <= 1.0) {
        return Err(CliError::Usage("extend-path: exponent must lie in (0, 1]".into()));
    }
    if !(a.c1.is_finite() && a.c1 >= 0.0) {
        return Err(CliError::Usage(
            "extend-path: adjacent-step constant must be nonnegative and finite".into(),
        ));
    }
    let seed = (a.oracle == OracleKind::Displacement || a.audit_samples > 0).then_some(a.seed);
    match a.oracle {
        OracleKind::Constant => {
            run_extend(a, constant_real_oracle(1.0, a.base, a.alpha), seed, |p| *p)
        }
        OracleKind::Linear => run_extend(a, linear_real_oracle(a.c1, a.base), seed, |p| *p),
        OracleKind::Displacement => {
            if !(a.alpha < 1.0) {
                return Err(CliError::Usage(
                    "extend-path: the displacement oracle needs an exponent in (0, 1)".into(),
                ));
            }
            if !(a.c1 > 0.0) {
                return Err(CliError::Usage(
                    "extend-path: the displacement oracle needs a positive step constant".into(),
                ));
            }
            run_extend(a, displacement_real_oracle(a.c1, a.alpha, a.seed), seed, |p| *p)
        }
        OracleKind::Rotating => {
            let oracle = rotating_tuple_oracle();
            let start = oracle.grid_value(0, 0);
            run_extend(a, oracle, seed, move |p| tuple_norm_metric(p, &start))
        }
    }
}

fn run_extend<P>(
    a: &ExtendPathArgs,
    oracle: GridPathOracle<P>,
    seed: Option<u64>,
    to_value: impl Fn(&P) -> f64,
) -> Result<CommandOutput, CliError> {
    let extension = oracle.extend(a.t, a.eps).map_err(classify_path)?;
    let oracle_name = format!("{:?}", a.oracle).to_lowercase();
    let params = Params::new()
        .set("oracle", &oracle_name)
        .set("t", a.t)
        .set("eps", a.eps)
        .set("base", oracle.base())
        .set("alpha", oracle.alpha())
        .set("c1", oracle.adjacent_constant())
        .set("depth", extension.depth)
        .set("holder_constant", oracle.holder_constant());
    let mut drafts = vec![Draft::new(
        params,
        to_value(&extension.point),
        extension.tail_bound,
        "two_sided",
        seed,
    )];
    let mut failure = None;
    if a.audit_samples > 0 {
        let audit = oracle.audit_pair_bound(a.audit_samples, a.seed);
        let params = Params::new()
            .set("oracle", &oracle_name)
            .set("quantity", "audit_max_ratio")
            .set("samples", audit.samples)
            .set("holder_constant", audit.holder_constant)
            .set("equal_point_defect", audit.equal_point_defect)
            .set("max_level", audit.max_level);
        drafts.push(Draft::new(params, audit.max_ratio, 0.0, "measured", Some(a.seed)));
        if !audit.passed {
            failure = Some(CliError::Certificate(format!(
                "extend-path: audited distance ratio {:.6} exceeds the admissible constant {:.6}",
                audit.max_ratio, audit.holder_constant
            )));
        }
    }
    Ok(CommandOutput { drafts, failure, warnings: Vec::new() })
}

//! Containment and distance audits on level-1 ranges.
//!
//! Three consumers of the support machinery: a certificate that the range
//! of a gauge family contains a Euclidean ball, a net-based two-sided
//! estimate of the Hausdorff distance between two ranges, and an audit that
//! the measured distance between two constant-angle families stays below
//! the exponential modulus in the angle gap.

use super::{
    linf_norm, DirectionNet, MrangeError, RotationFamily,
};
use crate::dilation::{BoundKind, CertifiedValue};
use crate::rotreps::{RationalAngle, ThetaMatrix};
use rayon::prelude::*;

/// Fixed slack for the metric audit: the level-1 estimate is a lower bound
/// up to ascent-convergence noise, so only rounding headroom is needed.
const METRIC_AUDIT_SLACK: f64 = 1e-6;

/// Outcome of the ℓ¹-ball containment check for one gauge family.
#[derive(Clone, Debug)]
pub struct L1BallReport {
    /// Number of generators.
    pub d: usize,
    /// Verified radius: the Euclidean ball of this radius around 0 lies in
    /// the level-1 range.
    pub delta: f64,
    /// Worst measured defect `|1 − |⟨Vₖψ,ψ⟩||` over the member eigenstates
    /// backing the certificate.
    pub axis_defect: f64,
    /// Tolerance the net audit ran with.
    pub tolerance: f64,
    /// Number of audited directions.
    pub net_size: usize,
    /// Minimum of `support − scale·‖c‖∞` over the net; the audit wants this
    /// above `−tolerance`.
    pub net_min_excess: f64,
    /// Whether the net audit confirmed the floor everywhere.
    pub passed: bool,
}

/// Certifies that the level-1 range of the family contains the closed
/// Euclidean ball of radius `scale·(1 − ε)/√d`, then audits the stronger
/// per-direction floor `support ≥ scale·‖c‖∞ − tolerance` over the net.
///
/// The certificate part needs no net: an eigenstate ψ of the k-th member
/// realizes a range point whose k-th coordinate has modulus `scale(1 − ε)`,
/// and the gauge sweep spins every coordinate independently, so the convex
/// hull of those orbits is the ℓ¹ ball of radius `scale(1 − ε)` — which
/// contains the Euclidean ball `1/√d` as large. The net audit then probes
/// the same floor through the actual support optimizer.
pub fn l1_ball_containment(
    family: &RotationFamily,
    net: &DirectionNet,
    tolerance: f64,
) -> Result<L1BallReport, MrangeError> {
    let d = family.d();
    if net.dim() != 2 * d {
        return Err(MrangeError::BadDirection(format!(
            "net lives in R^{}, family needs R^{}",
            net.dim(),
            2 * d
        )));
    }
    assert!(tolerance > 0.0, "audit tolerance must be positive");

    let defects = family.axis_states()?;
    let axis_defect = defects.iter().fold(0.0_f64, |m, &v| m.max(v));
    let delta = family.scale() * (1.0 - axis_defect) / (d as f64).sqrt();

    let dirs = net.complex_directions();
    let excesses: Vec<f64> = dirs
        .par_iter()
        .map(|c| {
            family
                .support_lower(c)
                .map(|s| s - family.scale() * linf_norm(c))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let net_min_excess = excesses.iter().fold(f64::INFINITY, |m, &v| m.min(v));
    let passed = net_min_excess >= -tolerance;

    Ok(L1BallReport {
        d,
        delta,
        axis_defect,
        tolerance,
        net_size: net.len(),
        net_min_excess,
        passed,
    })
}

/// Two-sided estimate of the Hausdorff distance between the level-1 ranges
/// of two gauge families with the same number of generators.
///
/// Both ranges are convex, so their Hausdorff distance equals the supremum
/// over unit directions of the absolute support difference. The returned
/// value is the maximum over the net; the error bound adds the covering
/// slack `2√d·gap`, valid because both supports are `√d`-Lipschitz in the
/// direction (range points sit in the polydisc). Evaluating the same family
/// against itself yields exactly zero.
pub fn hausdorff_level1(
    a: &RotationFamily,
    b: &RotationFamily,
    net: &DirectionNet,
) -> Result<CertifiedValue, MrangeError> {
    if a.d() != b.d() {
        return Err(MrangeError::BadDirection(format!(
            "families have {} and {} generators",
            a.d(),
            b.d()
        )));
    }
    let d = a.d();
    if net.dim() != 2 * d {
        return Err(MrangeError::BadDirection(format!(
            "net lives in R^{}, families need R^{}",
            net.dim(),
            2 * d
        )));
    }
    let gap = net.gap().ok_or(MrangeError::NoCoveringBound)?;

    let dirs = net.complex_directions();
    let value = dirs
        .par_iter()
        .map(|c| {
            let sa = a.support_lower(c)?;
            let sb = b.support_lower(c)?;
            Ok::<f64, MrangeError>((sa - sb).abs())
        })
        .try_reduce(|| 0.0, |x, y| Ok(x.max(y)))?;
    let slack = 2.0 * (d as f64).sqrt() * gap;

    Ok(CertifiedValue {
        value,
        error_bound: slack,
        bound: BoundKind::TwoSided,
        method: format!(
            "support comparison over {} directions, covering radius {gap:.3}",
            net.len()
        ),
    })
}

/// One row of the metric audit.
#[derive(Clone, Debug)]
pub struct MetricAuditPair {
    pub theta: RationalAngle,
    pub theta_prime: RationalAngle,
    /// Net maximum of the level-1 support difference — a lower estimate of
    /// the range distance.
    pub lower: f64,
    /// The exponential modulus `e^{|θ−θ′|/4} − 1` in the angle gap.
    pub upper: f64,
    /// `upper − lower`; how much room the inequality has.
    pub margin: f64,
    pub passed: bool,
}

/// Checks, for each pair of rational angles, that the measured level-1
/// distance between the two-generator gauge families stays below the
/// exponential modulus of the angle gap.
///
/// The lower estimate cannot exceed the true range distance (support
/// differences at sampled directions never do), so a failure here would
/// falsify the continuity bound itself rather than the net resolution.
pub fn metric_inequality_audit(
    pairs: &[(RationalAngle, RationalAngle)],
    net: &DirectionNet,
) -> Result<Vec<MetricAuditPair>, MrangeError> {
    let mut rows = Vec::with_capacity(pairs.len());
    for &(q, qp) in pairs {
        let fam_a = RotationFamily::new(q, 2)?;
        let fam_b = RotationFamily::new(qp, 2)?;
        let lower = hausdorff_level1(&fam_a, &fam_b, net)?.value;
        let gap = ThetaMatrix::constant(2, q.radians())
            .distance(&ThetaMatrix::constant(2, qp.radians()));
        let upper = (gap / 4.0).exp() - 1.0;
        let margin = upper - lower;
        rows.push(MetricAuditPair {
            theta: q,
            theta_prime: qp,
            lower,
            upper,
            margin,
            passed: lower <= upper + METRIC_AUDIT_SLACK,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::Complex64;
    use crate::mrange::l1_norm;

    #[test]
    fn torus_family_contains_unit_axis_ball() {
        // d = 2 at angle zero: commuting scalars, range = hull of the
        // torus. The certificate must clear 1/√2 with only rounding lost.
        let fam = RotationFamily::new(RationalAngle::zero(), 2).unwrap();
        let net = DirectionNet::cube_shell(4, 0.6);
        let report = l1_ball_containment(&fam, &net, 1e-3).unwrap();
        assert!(report.passed, "net audit failed: min excess {}", report.net_min_excess);
        assert!(report.delta >= 1.0 / 2.0_f64.sqrt() - 1e-3, "delta {}", report.delta);
        assert!(report.axis_defect < 1e-9);
        // The torus support is the full ℓ¹ norm, so the excess over ‖c‖∞
        // is strictly positive away from the axes.
        assert!(report.net_min_excess > -1e-12);
    }

    #[test]
    fn rotation_triple_contains_scaled_ball() {
        let fam = RotationFamily::new(RationalAngle::new(3, 7), 3).unwrap();
        let net = DirectionNet::cube_shell(6, 0.75);
        let report = l1_ball_containment(&fam, &net, 1e-3).unwrap();
        assert!(report.passed, "net audit failed: min excess {}", report.net_min_excess);
        assert!(report.delta >= 1.0 / 3.0_f64.sqrt() - 1e-3, "delta {}", report.delta);
    }

    #[test]
    fn single_generator_range_is_unit_disc() {
        let fam = RotationFamily::new(RationalAngle::zero(), 1).unwrap();
        let net = DirectionNet::cube_shell(2, 0.45);
        let report = l1_ball_containment(&fam, &net, 1e-6).unwrap();
        assert!(report.passed);
        assert!(report.delta > 1.0 - 1e-9, "delta {}", report.delta);
    }

    #[test]
    fn hausdorff_of_family_with_itself_is_zero() {
        let fam = RotationFamily::new(RationalAngle::new(1, 3), 2).unwrap();
        let net = DirectionNet::cube_shell(4, 0.45);
        let cert = hausdorff_level1(&fam, &fam, &net).unwrap();
        assert_eq!(cert.value, 0.0);
        assert!(cert.error_bound > 0.0);
    }

    #[test]
    fn hausdorff_is_symmetric() {
        let a = RotationFamily::new(RationalAngle::new(1, 3), 2).unwrap();
        let b = RotationFamily::new(RationalAngle::new(1, 2), 2).unwrap();
        let net = DirectionNet::cube_shell(4, 0.45);
        let ab = hausdorff_level1(&a, &b, &net).unwrap();
        let ba = hausdorff_level1(&b, &a, &net).unwrap();
        assert!((ab.value - ba.value).abs() < 1e-12);
        assert!(ab.value > 0.0, "distinct families at distance 0");
    }

    #[test]
    fn hausdorff_of_scaled_torus_matches_closed_form() {
        // Scaling every member by r scales all supports by r, so the
        // distance is (1 − r) times the largest ℓ¹ norm over the net.
        let r = 0.72;
        let a = RotationFamily::new(RationalAngle::zero(), 2).unwrap();
        let b = RotationFamily::scaled(RationalAngle::zero(), 2, r).unwrap();
        let net = DirectionNet::cube_shell(4, 0.45);
        let cert = hausdorff_level1(&a, &b, &net).unwrap();
        let l1_max = net
            .complex_directions()
            .iter()
            .map(|c| l1_norm(c))
            .fold(0.0_f64, f64::max);
        let expect = (1.0 - r) * l1_max;
        assert!((cert.value - expect).abs() < 1e-9, "{} vs {expect}", cert.value);
    }

    #[test]
    fn hausdorff_requires_covering_bound() {
        let a = RotationFamily::new(RationalAngle::zero(), 2).unwrap();
        let coarse = DirectionNet::cube_shell(4, 0.8);
        assert!(matches!(
            hausdorff_level1(&a, &a, &coarse),
            Err(MrangeError::NoCoveringBound)
        ));
    }

    #[test]
    fn metric_audit_passes_on_reference_pairs() {
        let net = DirectionNet::cube_shell(4, 0.45);
        let pairs = [
            (RationalAngle::zero(), RationalAngle::zero()),
            (RationalAngle::zero(), RationalAngle::new(1, 2)),
            (RationalAngle::zero(), RationalAngle::new(1, 3)),
        ];
        let rows = metric_inequality_audit(&pairs, &net).unwrap();
        assert_eq!(rows.len(), 3);

        // Identical angles: identical families, distance exactly zero.
        assert_eq!(rows[0].lower, 0.0);
        assert!(rows[0].passed);

        // Angle gap π: the measured distance must stay below e^{π/4} − 1
        // while being visibly nonzero (the π family is genuinely smaller).
        let e_quarter = (std::f64::consts::PI / 4.0).exp() - 1.0;
        assert!((rows[1].upper - e_quarter).abs() < 1e-12);
        assert!(rows[1].lower > 0.3, "lower {}", rows[1].lower);
        assert!(rows[1].passed, "lower {} vs upper {}", rows[1].lower, rows[1].upper);

        // Angle gap 2π/3: passes with positive margin.
        assert!(rows[2].passed);
        assert!(rows[2].margin > 0.0, "margin {}", rows[2].margin);
    }

    #[test]
    fn mismatched_net_dimension_is_rejected() {
        let fam = RotationFamily::new(RationalAngle::zero(), 2).unwrap();
        let net = DirectionNet::cube_shell(6, 0.75);
        assert!(matches!(
            l1_ball_containment(&fam, &net, 1e-3),
            Err(MrangeError::BadDirection(_))
        ));
        let c = vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
        ];
        assert!(fam.support_lower(&c).is_err());
    }
}

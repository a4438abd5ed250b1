//! Hölder extension of maps defined on base-k grids: given values on the
//! refining grids Γₙ = {j/kⁿ} whose adjacent points move at most
//! `C₁·k^{−nα}`, the map extends continuously to all of [0,1] with the
//! global constant `C = 2kC₁/(1 − k^{−α})`, and the extension is computable
//! to any requested accuracy by evaluating at a deep-enough truncation.
//!
//! The target space is abstract: an oracle carries an evaluation callback
//! from grid coordinates `(j, n)` — meaning the point `j/kⁿ` — into the
//! caller's complete metric space, plus the metric itself. Two concrete
//! instances ship for tests and demos: the real line, and tuples of
//! unitaries under the largest member-wise operator-norm distance.
//!
//! Extension calls are independent and share nothing mutable; callbacks
//! must tolerate concurrent invocation if the caller runs them in parallel
//! (everything here is `Send + Sync` when the callbacks are).

use crate::matcore::{operator_norm, Complex64, ComplexMatrix, UnitaryTuple};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Errors from the extension routines.
#[derive(Debug, thiserror::Error)]
pub enum PathError {
    #[error("grid base {0} must be at least 2")]
    BadBase(u32),
    #[error("Hölder exponent {0} outside (0, 1]")]
    BadExponent(f64),
    #[error("adjacent-step constant {0} must be nonnegative and finite")]
    BadConstant(f64),
    #[error("evaluation point {0} outside [0, 1]")]
    BadTime(f64),
    #[error("accuracy {0} must be positive")]
    BadEps(f64),
    #[error(
        "truncation depth {depth} reached with tail bound {achieved:.3e} > \
         requested {requested:.3e}; the grid index space is exhausted"
    )]
    DepthExhausted { depth: u32, achieved: f64, requested: f64 },
}

/// Global Hölder constant of the grid extension: `2kC₁/(1 − k^{−α})` for
/// α < 1, and the Lipschitz case α = 1 needs no chaining loss, so `C₁`.
pub fn holder_constant(k: u32, alpha: f64, c1: f64) -> Result<f64, PathError> {
    if k < 2 {
        return Err(PathError::BadBase(k));
    }
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(PathError::BadExponent(alpha));
    }
    if !(c1 >= 0.0 && c1.is_finite()) {
        return Err(PathError::BadConstant(c1));
    }
    if alpha == 1.0 {
        return Ok(c1);
    }
    Ok(2.0 * k as f64 * c1 / (1.0 - (k as f64).powf(-alpha)))
}

/// A map on the base-k grid of [0,1] into a caller-supplied complete metric
/// space, with the promise that adjacent points of the level-n grid are at
/// distance ≤ `C₁·k^{−nα}`.
///
/// `evaluate(j, n)` must be a well-defined function of the rational `j/kⁿ`:
/// coordinates naming the same point must map to the same target point
/// ([`GridPathOracle::audit_pair_bound`] measures that defect too).
pub struct GridPathOracle<P> {
    k: u32,
    alpha: f64,
    c1: f64,
    evaluate: Box<dyn Fn(u64, u32) -> P + Send + Sync>,
    metric: Box<dyn Fn(&P, &P) -> f64 + Send + Sync>,
}

/// Result of one extension evaluation.
#[derive(Clone, Debug)]
pub struct Extension<P> {
    /// The value at the deepest truncation used.
    pub point: P,
    /// Truncation level the stop rule reached.
    pub depth: u32,
    /// Certified distance bound between `point` and the continuous
    /// extension at the requested time.
    pub tail_bound: f64,
}

/// Pair-bound audit outcome: the chained global estimate measured on
/// random grid pairs of mixed levels.
#[derive(Clone, Debug)]
pub struct PairBoundReport {
    pub samples: usize,
    /// Largest observed `d(γ(s), γ(t)) / |t−s|^α` over distinct pairs.
    pub max_ratio: f64,
    /// The global constant the ratios must stay below.
    pub holder_constant: f64,
    /// Largest distance observed between coordinates naming the same grid
    /// point (well-definedness defect).
    pub equal_point_defect: f64,
    /// Deepest grid level sampled.
    pub max_level: u32,
    pub passed: bool,
}

/// Deepest level whose indices fit the coordinate type.
fn depth_cap(k: u32) -> u32 {
    (63.0 / (k as f64).log2()).floor() as u32
}

/// Grid levels the pair audit samples from.
const AUDIT_MAX_LEVEL: u32 = 10;

impl<P> GridPathOracle<P> {
    pub fn new(
        k: u32,
        alpha: f64,
        c1: f64,
        evaluate: impl Fn(u64, u32) -> P + Send + Sync + 'static,
        metric: impl Fn(&P, &P) -> f64 + Send + Sync + 'static,
    ) -> Result<Self, PathError> {
        if k < 2 {
            return Err(PathError::BadBase(k));
        }
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(PathError::BadExponent(alpha));
        }
        if !(c1 >= 0.0 && c1.is_finite()) {
            return Err(PathError::BadConstant(c1));
        }
        Ok(Self { k, alpha, c1, evaluate: Box::new(evaluate), metric: Box::new(metric) })
    }

    pub fn base(&self) -> u32 {
        self.k
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn adjacent_constant(&self) -> f64 {
        self.c1
    }

    /// The certified global constant for this oracle's parameters.
    pub fn holder_constant(&self) -> f64 {
        holder_constant(self.k, self.alpha, self.c1)
            .expect("constructor validated the parameters")
    }

    /// Evaluates the underlying grid map at `j/kⁿ`.
    pub fn grid_value(&self, j: u64, n: u32) -> P {
        (self.evaluate)(j, n)
    }

    /// Distance in the oracle's target space.
    pub fn distance(&self, a: &P, b: &P) -> f64 {
        (self.metric)(a, b)
    }

    /// Largest adjacent-pair ratio `d/(C₁·k^{−nα})` at one grid level,
    /// sampled with a stride when the level holds too many pairs. Values
    /// at most 1 (plus rounding) confirm the oracle's step invariant.
    pub fn adjacent_defect(&self, level: u32) -> f64 {
        assert!(level <= depth_cap(self.k), "level {level} beyond coordinate range");
        let count = (self.k as u64).pow(level);
        let stride = (count / 512).max(1);
        let allowed = self.c1 * (self.k as f64).powf(-(level as f64) * self.alpha);
        let mut worst = 0.0_f64;
        let mut j = 0;
        while j < count {
            let a = (self.evaluate)(j, level);
            let b = (self.evaluate)(j + 1, level);
            let d = (self.metric)(&a, &b);
            // A zero step budget (constant paths) counts as satisfied only
            // by zero distances.
            let ratio = if allowed > 0.0 {
                d / allowed
            } else if d == 0.0 {
                0.0
            } else {
                f64::INFINITY
            };
            worst = worst.max(ratio);
            j += stride;
        }
        worst
    }

    /// Value of the continuous extension at `t`, within `eps`.
    ///
    /// Walks the base-k floor truncations `tₙ = ⌊t·kⁿ⌋/kⁿ` downward until
    /// `C·(t − tₙ)^α ≤ eps`, then returns the oracle's value there. A
    /// truncation landing exactly on `t` short-circuits with a zero tail
    /// bound, so grid points at reachable levels reproduce the oracle's own
    /// values once `eps` is below the level's resolution. Deterministic in
    /// `(t, eps)`.
    pub fn extend(&self, t: f64, eps: f64) -> Result<Extension<P>, PathError> {
        if !(0.0..=1.0).contains(&t) {
            return Err(PathError::BadTime(t));
        }
        if !(eps > 0.0) {
            return Err(PathError::BadEps(eps));
        }
        let c = self.holder_constant();
        let cap = depth_cap(self.k);
        let mut last_bound = f64::INFINITY;
        for n in 0..=cap {
            let kn = (self.k as f64).powi(n as i32);
            let j = (t * kn).floor().min(kn) as u64;
            let tn = j as f64 / kn;
            let diff = t - tn;
            let bound = if diff <= 0.0 { 0.0 } else { c * diff.powf(self.alpha) };
            if bound <= eps {
                return Ok(Extension { point: (self.evaluate)(j, n), depth: n, tail_bound: bound });
            }
            last_bound = bound;
        }
        Err(PathError::DepthExhausted { depth: cap, achieved: last_bound, requested: eps })
    }

    /// Samples random grid pairs across mixed levels and measures the
    /// chained global bound `d(γ(s), γ(t)) ≤ C·|t−s|^α`, along with the
    /// well-definedness of coordinates naming the same point.
    pub fn audit_pair_bound(&self, samples: usize, seed: u64) -> PairBoundReport {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = self.holder_constant();
        let max_level = AUDIT_MAX_LEVEL.min(depth_cap(self.k));
        let mut max_ratio = 0.0_f64;
        let mut equal_defect = 0.0_f64;
        for _ in 0..samples {
            let n1 = rng.gen_range(0..=max_level);
            let n2 = rng.gen_range(0..=max_level);
            let j1 = rng.gen_range(0..=(self.k as u64).pow(n1));
            let j2 = rng.gen_range(0..=(self.k as u64).pow(n2));
            let s = j1 as f64 / (self.k as f64).powi(n1 as i32);
            let t = j2 as f64 / (self.k as f64).powi(n2 as i32);
            let a = (self.evaluate)(j1, n1);
            let b = (self.evaluate)(j2, n2);
            let d = (self.metric)(&a, &b);
            if s == t {
                equal_defect = equal_defect.max(d);
            } else {
                max_ratio = max_ratio.max(d / (t - s).abs().powf(self.alpha));
            }
        }
        let passed = max_ratio <= c * (1.0 + 1e-12) + 1e-12 && equal_defect <= 1e-10;
        PairBoundReport {
            samples,
            max_ratio,
            holder_constant: c,
            equal_point_defect: equal_defect,
            max_level,
            passed,
        }
    }
}

/// Largest member-wise operator-norm distance between two tuples of the
/// same shape — the metric on the tuple space instance.
pub fn tuple_norm_metric(a: &UnitaryTuple, b: &UnitaryTuple) -> f64 {
    assert_eq!(a.len(), b.len(), "tuple metrics need equally long tuples");
    assert_eq!(a.dim(), b.dim(), "tuple metrics need members of equal dimension");
    a.members()
        .iter()
        .zip(b.members())
        .map(|(x, y)| operator_norm(&x.sub(y)).expect("member difference is well formed"))
        .fold(0.0, f64::max)
}

/// Constant path on the real line: every grid point maps to `value`.
pub fn constant_real_oracle(value: f64, k: u32, alpha: f64) -> GridPathOracle<f64> {
    GridPathOracle::new(k, alpha, 0.0, move |_, _| value, |a: &f64, b: &f64| (a - b).abs())
        .expect("constant-path parameters are valid")
}

/// Linear path `γ(s) = s·slope` on the real line; Lipschitz with α = 1, so
/// the extension reproduces exact interpolation.
pub fn linear_real_oracle(slope: f64, k: u32) -> GridPathOracle<f64> {
    GridPathOracle::new(
        k,
        1.0,
        slope.abs(),
        move |j, n| j as f64 / (k as f64).powi(n as i32) * slope,
        |a: &f64, b: &f64| (a - b).abs(),
    )
    .expect("linear-path parameters are valid")
}

/// Seeded rough path on the dyadic grid (base 2): midpoint displacement
/// with level-n noise amplitude `0.9·C₁·2^{−nα}(1 − 2^{α−1})`, which keeps
/// the adjacent-step invariant by induction — each new adjacent distance is
/// at most half the parent's plus the displacement. Evaluation descends the
/// chain of bracketing dyadic intervals, so one call costs O(n) hash draws
/// and coordinates naming the same point agree exactly.
pub fn displacement_real_oracle(c1: f64, alpha: f64, seed: u64) -> GridPathOracle<f64> {
    assert!(c1 > 0.0, "displacement path needs a positive step constant");
    assert!(
        alpha > 0.0 && alpha < 1.0,
        "displacement path needs a strictly fractional exponent"
    );
    let evaluate = move |j: u64, n: u32| -> f64 {
        if j >= 1u64 << n {
            return 0.8 * c1; // right endpoint γ(1)
        }
        let mut left = 0.0_f64;
        let mut right = 0.8 * c1;
        let mut interval: u64 = 0;
        for m in 1..=n {
            let mid_index = 2 * interval + 1;
            let sigma = 0.9
                * c1
                * 2f64.powf(-(m as f64) * alpha)
                * (1.0 - 2f64.powf(alpha - 1.0));
            let mid = 0.5 * (left + right) + sigma * unit_noise(mid_index, m, seed);
            if (j >> (n - m)) & 1 == 0 {
                right = mid;
                interval *= 2;
            } else {
                left = mid;
                interval = 2 * interval + 1;
            }
        }
        left
    };
    GridPathOracle::new(2, alpha, c1, evaluate, |a: &f64, b: &f64| (a - b).abs())
        .expect("displacement-path parameters are valid")
}

/// Path of commuting unitary pairs with linearly rotating eigenphases;
/// Lipschitz in the tuple operator-norm metric with constant equal to the
/// largest phase rate.
pub fn rotating_tuple_oracle() -> GridPathOracle<UnitaryTuple> {
    const RATES: [[f64; 2]; 2] = [[1.0, -1.4], [2.2, 0.6]];
    let c1 = RATES
        .iter()
        .flatten()
        .fold(0.0_f64, |m, &r| m.max(r.abs()));
    let build = move |t: f64| -> UnitaryTuple {
        let members = RATES
            .iter()
            .map(|rates| {
                let entries: Vec<Complex64> =
                    rates.iter().map(|&r| Complex64::from_polar(1.0, r * t)).collect();
                ComplexMatrix::diagonal(&entries)
            })
            .collect();
        UnitaryTuple::new(members).expect("diagonal phases are unitary")
    };
    GridPathOracle::new(
        2,
        1.0,
        c1,
        move |j, n| build(j as f64 / (2f64).powi(n as i32)),
        tuple_norm_metric,
    )
    .expect("rotating-tuple parameters are valid")
}

/// Deterministic noise in [−1, 1) from grid coordinates and a seed
/// (splitmix-style finalizer).
fn unit_noise(j: u64, n: u32, seed: u64) -> f64 {
    let mut z = seed
        .wrapping_add(j.wrapping_mul(0x9E3779B97F4A7C15))
        .wrapping_add((n as u64).wrapping_mul(0xD1B54A32D192ED03));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^= z >> 31;
    (z >> 11) as f64 / (1u64 << 52) as f64 - 1.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn holder_constant_matches_closed_forms() {
        let c = holder_constant(2, 0.5, 1.0).unwrap();
        assert!((c - 13.65685424949238).abs() < 1e-12, "{c}");
        assert!((c - (8.0 + 4.0 * 2f64.sqrt())).abs() < 1e-12);
        assert_eq!(holder_constant(3, 1.0, 2.5).unwrap(), 2.5);
        assert_eq!(holder_constant(2, 0.5, 0.0).unwrap(), 0.0);
        assert!(matches!(holder_constant(1, 0.5, 1.0), Err(PathError::BadBase(1))));
        assert!(matches!(holder_constant(2, 0.0, 1.0), Err(PathError::BadExponent(_))));
        assert!(matches!(holder_constant(2, 1.2, 1.0), Err(PathError::BadExponent(_))));
        assert!(matches!(holder_constant(2, 0.5, -1.0), Err(PathError::BadConstant(_))));
    }

    #[test]
    fn grid_points_reproduce_oracle_values() {
        let oracle = linear_real_oracle(2.0, 2);
        // eps below the level resolution forces the loop to the exact hit.
        let ext = oracle.extend(5.0 / 8.0, 1e-9).unwrap();
        assert_eq!(ext.depth, 3);
        assert_eq!(ext.tail_bound, 0.0);
        assert_eq!(ext.point, 2.0 * 5.0 / 8.0);
        // Endpoints are level-0 grid points.
        let one = oracle.extend(1.0, 1e-9).unwrap();
        assert_eq!(one.depth, 0);
        assert_eq!(one.point, 2.0);
    }

    #[test]
    fn linear_oracle_extends_to_interpolation() {
        let slope = -1.7;
        let oracle = linear_real_oracle(slope, 2);
        for (t, eps) in [(0.31, 1e-3), (0.77215, 1e-9), (0.999, 1e-6)] {
            let ext = oracle.extend(t, eps).unwrap();
            assert!(
                (ext.point - slope * t).abs() <= eps + 1e-15,
                "t={t}: {} vs {}",
                ext.point,
                slope * t
            );
            assert!(ext.tail_bound <= eps);
        }
    }

    #[test]
    fn constant_oracle_audit_is_degenerate() {
        let oracle = constant_real_oracle(7.5, 2, 0.5);
        let report = oracle.audit_pair_bound(500, 11);
        assert_eq!(report.max_ratio, 0.0);
        assert_eq!(report.equal_point_defect, 0.0);
        assert!(report.passed);
        let ext = oracle.extend(0.123, 1e-12).unwrap();
        assert_eq!(ext.point, 7.5);
    }

    #[test]
    fn displacement_oracle_keeps_adjacent_invariant() {
        let oracle = displacement_real_oracle(1.0, 0.5, 424242);
        for level in 1..=8 {
            let defect = oracle.adjacent_defect(level);
            assert!(defect <= 1.0 + 1e-12, "level {level}: adjacent ratio {defect}");
        }
        // The path is genuinely rough: some level uses most of its budget.
        let used = (1..=8).map(|l| oracle.adjacent_defect(l)).fold(0.0_f64, f64::max);
        assert!(used > 0.3, "suspiciously smooth path: max ratio {used}");
    }

    #[test]
    fn displacement_oracle_passes_global_pair_audit() {
        let oracle = displacement_real_oracle(1.0, 0.5, 97);
        let report = oracle.audit_pair_bound(1000, 5);
        assert!(report.passed, "max ratio {} vs C {}", report.max_ratio, report.holder_constant);
        assert!(report.max_ratio > 0.0);
        assert!(report.equal_point_defect == 0.0, "inconsistent coordinates");
        // Identical runs give identical reports.
        let again = oracle.audit_pair_bound(1000, 5);
        assert_eq!(report.max_ratio, again.max_ratio);
    }

    #[test]
    fn extension_is_consistent_across_accuracies() {
        let oracle = displacement_real_oracle(1.0, 0.5, 31415);
        let mut state = 0xABCDEFu64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..60 {
            let t = next();
            let coarse = oracle.extend(t, 1e-2).unwrap();
            let fine = oracle.extend(t, 1e-5).unwrap();
            let d = oracle.distance(&coarse.point, &fine.point);
            assert!(d <= 1e-2 + 1e-5, "t={t}: drift {d}");
            assert!(fine.depth >= coarse.depth);
        }
    }

    #[test]
    fn extension_pairs_satisfy_global_modulus() {
        let oracle = displacement_real_oracle(1.0, 0.5, 2718);
        let c = oracle.holder_constant();
        let eps = 1e-4;
        let mut state = 0x5EED5EEDu64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..60 {
            let s = next();
            let t = next();
            let a = oracle.extend(s, eps).unwrap();
            let b = oracle.extend(t, eps).unwrap();
            let d = oracle.distance(&a.point, &b.point);
            assert!(
                d <= c * (s - t).abs().powf(0.5) + 2.0 * eps,
                "pair ({s}, {t}): distance {d}"
            );
        }
    }

    #[test]
    fn tuple_space_instance_extends_rotating_path() {
        let oracle = rotating_tuple_oracle();
        let report = oracle.audit_pair_bound(400, 77);
        assert!(report.passed, "max ratio {}", report.max_ratio);
        for (t, eps) in [(0.37, 1e-6), (0.9001, 1e-4)] {
            let ext = oracle.extend(t, eps).unwrap();
            // The continuous path is available in closed form; the
            // extension must land within eps of it.
            let truth = {
                let members = [[1.0, -1.4], [2.2, 0.6]]
                    .iter()
                    .map(|rates| {
                        let entries: Vec<Complex64> = rates
                            .iter()
                            .map(|&r| Complex64::from_polar(1.0, r * t))
                            .collect();
                        ComplexMatrix::diagonal(&entries)
                    })
                    .collect();
                UnitaryTuple::new(members).unwrap()
            };
            let d = tuple_norm_metric(&ext.point, &truth);
            assert!(d <= eps + 1e-13, "t={t}: tuple distance {d}");
        }
    }

    #[test]
    fn extend_is_deterministic() {
        let oracle = displacement_real_oracle(0.8, 0.5, 99);
        let a = oracle.extend(0.637, 1e-6).unwrap();
        let b = oracle.extend(0.637, 1e-6).unwrap();
        assert_eq!(a.point, b.point);
        assert_eq!(a.depth, b.depth);
        assert_eq!(a.tail_bound, b.tail_bound);
    }

    #[test]
    fn bad_inputs_are_rejected() {
        let oracle = linear_real_oracle(1.0, 2);
        assert!(matches!(oracle.extend(1.5, 1e-3), Err(PathError::BadTime(_))));
        assert!(matches!(oracle.extend(-0.1, 1e-3), Err(PathError::BadTime(_))));
        assert!(matches!(oracle.extend(0.5, 0.0), Err(PathError::BadEps(_))));
        assert!(matches!(oracle.extend(0.5, -1.0), Err(PathError::BadEps(_))));
    }

    #[test]
    fn unreachable_accuracy_reports_exhaustion() {
        // A time this small keeps a positive truncation gap at every
        // reachable level, and √gap times the global constant stays far
        // above the requested accuracy even at the deepest level.
        let oracle = displacement_real_oracle(1.0, 0.5, 1);
        match oracle.extend(1e-18, 1e-12) {
            Err(PathError::DepthExhausted { requested, achieved, depth }) => {
                assert_eq!(requested, 1e-12);
                assert!(achieved > 1e-12);
                assert_eq!(depth, 63);
            }
            other => panic!("expected exhaustion, got {other:?}"),
        }
    }
}

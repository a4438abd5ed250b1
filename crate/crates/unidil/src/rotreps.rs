//! Finite-dimensional representations of unitary tuples with prescribed
//! commutation phases.
//!
//! A pair (X, Y) of clock and shift matrices at a primitive root of unity q
//! satisfies YX = qXY; dressing its members with free phases produces the
//! two-generator family (αX, βY) and, for three generators with one common
//! phase, the family (αX, βXY, γY). Tuples with a general rational phase
//! matrix come out of a recursive tensor construction that peels off the
//! last generator.
//!
//! All commutation angles here are rational multiples of 2π; irrational
//! angles are approximated upstream by continued-fraction convergents and
//! transported by a Lipschitz bound on the dilation scale.

use crate::matcore::{hermitian_norm, ComplexMatrix, Complex64, MatError, UnitaryTuple};
use std::f64::consts::TAU;

/// Tolerances for representation validation.
pub mod tol {
    /// Commutation-relation residual ‖U_ℓU_k − e^{iθ}U_kU_ℓ‖ accepted for a
    /// freshly built tuple. Construction is exact up to a handful of
    /// floating-point products.
    pub const RELATION: f64 = 1e-10;

    /// Stricter residual used for the hand-assembled two- and
    /// three-generator families, which involve a single matrix product.
    pub const RELATION_DIRECT: f64 = 1e-12;
}

/// Errors from representation construction.
#[derive(Debug, thiserror::Error)]
pub enum RepError {
    #[error("representation dimension {required} exceeds cap {cap}")]
    DimensionCap { required: usize, cap: usize },
    #[error("phase point has {got} angles, expected {expected}")]
    PhaseCount { got: usize, expected: usize },
    #[error(transparent)]
    Mat(#[from] MatError),
}

/// Reduced rational multiple of a full turn: the angle 2πm/n with
/// gcd(m, n) = 1 and 0 ≤ m < n.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RationalAngle {
    m: u64,
    n: u64,
}

impl RationalAngle {
    /// Builds the reduced representative of 2πm/n; `m` may be any integer
    /// and is wrapped into [0, n).
    pub fn new(m: i64, n: u64) -> Self {
        assert!(n > 0, "RationalAngle: denominator must be positive");
        let mm = m.rem_euclid(n as i64) as u64;
        let g = gcd(mm, n);
        if mm == 0 {
            Self { m: 0, n: 1 }
        } else {
            Self { m: mm / g, n: n / g }
        }
    }

    pub fn zero() -> Self {
        Self { m: 0, n: 1 }
    }

    pub fn numerator(&self) -> u64 {
        self.m
    }

    pub fn denominator(&self) -> u64 {
        self.n
    }

    /// The angle in radians, in [0, 2π).
    pub fn radians(&self) -> f64 {
        TAU * self.m as f64 / self.n as f64
    }

    /// The unit complex number e^{iθ}.
    pub fn unit(&self) -> Complex64 {
        Complex64::from_polar(1.0, self.radians())
    }

    /// The angle −θ, reduced.
    pub fn negated(&self) -> Self {
        Self::new(-(self.m as i64), self.n)
    }

    /// Best rational approximation of an arbitrary angle (radians) by a
    /// continued-fraction convergent of θ/2π with denominator ≤ `max_den`.
    /// The convergent m/n satisfies |θ/2π − m/n| < 1/(n·max_den), so the
    /// angle error is below 2π/(n·max_den).
    pub fn approximate(radians: f64, max_den: u64) -> Self {
        assert!(max_den >= 1, "RationalAngle::approximate: max_den ≥ 1");
        let x = (radians / TAU).rem_euclid(1.0);
        // Convergents p_j/q_j of the continued fraction of x.
        let (mut p0, mut q0, mut p1, mut q1) = (1u64, 0u64, x.floor() as u64, 1u64);
        let mut frac = x - x.floor();
        while frac > 1e-15 {
            let a = (1.0 / frac).floor();
            if a >= u64::MAX as f64 {
                break;
            }
            let a = a as u64;
            let (Some(pm), Some(qm)) = (
                a.checked_mul(p1).and_then(|v| v.checked_add(p0)),
                a.checked_mul(q1).and_then(|v| v.checked_add(q0)),
            ) else {
                break;
            };
            if qm > max_den {
                break;
            }
            p0 = p1;
            q0 = q1;
            p1 = pm;
            q1 = qm;
            frac = 1.0 / frac - a as f64;
        }
        Self::new(p1 as i64, q1)
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a.max(1)
    } else {
        gcd(b, a % b)
    }
}

/// Real antisymmetric matrix of commutation angles, stored as the strict
/// upper triangle in row-major pair order (1,2), (1,3), …, (d−1,d).
#[derive(Clone, Debug, PartialEq)]
pub struct ThetaMatrix {
    d: usize,
    upper: Vec<f64>,
}

impl ThetaMatrix {
    /// From the strict upper triangle, row-major.
    pub fn from_upper(d: usize, upper: Vec<f64>) -> Self {
        assert_eq!(upper.len(), d * (d - 1) / 2, "ThetaMatrix: triangle length");
        Self { d, upper }
    }

    /// All off-diagonal angles equal to `theta`.
    pub fn constant(d: usize, theta: f64) -> Self {
        Self { d, upper: vec![theta; d * (d - 1) / 2] }
    }

    pub fn zero(d: usize) -> Self {
        Self::constant(d, 0.0)
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn upper_entries(&self) -> &[f64] {
        &self.upper
    }

    /// Entry θ_{k,ℓ} with antisymmetry filled in (0-based indices).
    pub fn get(&self, k: usize, l: usize) -> f64 {
        use std::cmp::Ordering;
        match k.cmp(&l) {
            Ordering::Equal => 0.0,
            Ordering::Less => self.upper[upper_index(self.d, k, l)],
            Ordering::Greater => -self.upper[upper_index(self.d, l, k)],
        }
    }

    /// Spectral norm. iΘ is Hermitian, so its eigenvalues are real and the
    /// norm is the spectral radius of iΘ.
    pub fn spectral_norm(&self) -> f64 {
        let h = ComplexMatrix::from_fn(self.d, self.d, |k, l| {
            Complex64::new(0.0, self.get(k, l))
        });
        hermitian_norm(&h).expect("iΘ is Hermitian by construction")
    }

    /// Entrywise difference, again antisymmetric.
    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.d, other.d, "ThetaMatrix::sub: dimension mismatch");
        Self {
            d: self.d,
            upper: self.upper.iter().zip(&other.upper).map(|(a, b)| a - b).collect(),
        }
    }

    /// `‖Θ − Θ'‖` in spectral norm.
    pub fn distance(&self, other: &Self) -> f64 {
        self.sub(other).spectral_norm()
    }
}

fn upper_index(d: usize, k: usize, l: usize) -> usize {
    debug_assert!(k < l && l < d);
    // Row k starts after rows 0..k, each row j holding d−1−j entries.
    k * (2 * d - k - 1) / 2 + (l - k - 1)
}

/// Phase matrix with every entry a rational angle; the form tensor
/// representations require.
#[derive(Clone, Debug)]
pub struct RationalTheta {
    d: usize,
    upper: Vec<RationalAngle>,
}

impl RationalTheta {
    pub fn from_upper(d: usize, upper: Vec<RationalAngle>) -> Self {
        assert_eq!(upper.len(), d * (d - 1) / 2, "RationalTheta: triangle length");
        Self { d, upper }
    }

    pub fn constant(d: usize, angle: RationalAngle) -> Self {
        Self { d, upper: vec![angle; d * (d - 1) / 2] }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn get(&self, k: usize, l: usize) -> RationalAngle {
        use std::cmp::Ordering;
        match k.cmp(&l) {
            Ordering::Equal => RationalAngle::zero(),
            Ordering::Less => self.upper[upper_index(self.d, k, l)],
            Ordering::Greater => self.upper[upper_index(self.d, l, k)].negated(),
        }
    }

    /// The real-angle matrix this rational matrix represents.
    pub fn to_theta(&self) -> ThetaMatrix {
        ThetaMatrix::from_upper(self.d, self.upper.iter().map(|a| a.radians()).collect())
    }
}

/// Point on the phase torus: one angle per free phase, each in [0, 2π).
#[derive(Clone, Debug, PartialEq)]
pub struct PhasePoint {
    angles: Vec<f64>,
}

impl PhasePoint {
    /// Wraps every coordinate into [0, 2π).
    pub fn new(angles: Vec<f64>) -> Self {
        Self { angles: angles.into_iter().map(|a| a.rem_euclid(TAU)).collect() }
    }

    pub fn origin(len: usize) -> Self {
        Self { angles: vec![0.0; len] }
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }
}

/// Diagonal clock matrix diag(q, q², …, qⁿ) for a unit complex q.
pub fn clock_matrix(q: Complex64, n: usize) -> ComplexMatrix {
    debug_assert!((q.norm() - 1.0).abs() < 1e-12, "clock_matrix: |q| must be 1");
    let arg = q.arg();
    ComplexMatrix::from_fn(n, n, |i, j| {
        if i == j {
            Complex64::from_polar(1.0, arg * (i as f64 + 1.0))
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// Cyclic shift: ones on the superdiagonal and in the lower-left corner,
/// so e_j ↦ e_{j−1} and e_1 ↦ e_n.
pub fn shift_matrix(n: usize) -> ComplexMatrix {
    let mut y = ComplexMatrix::zeros(n, n);
    for j in 1..n {
        y.set(j - 1, j, Complex64::new(1.0, 0.0));
    }
    y.set(n - 1, 0, Complex64::new(1.0, 0.0));
    y
}

/// Two-generator family (e^{iφ₁}X, e^{iφ₂}Y) at the rational angle q; the
/// second member advances the first by the phase e^{iθ}.
pub fn irrep_d2(q: RationalAngle, phases: &PhasePoint) -> Result<UnitaryTuple, RepError> {
    if phases.len() != 2 {
        return Err(RepError::PhaseCount { got: phases.len(), expected: 2 });
    }
    let n = q.denominator() as usize;
    let x = clock_matrix(q.unit(), n);
    let y = shift_matrix(n);
    let a = Complex64::from_polar(1.0, phases.angles()[0]);
    let b = Complex64::from_polar(1.0, phases.angles()[1]);
    Ok(UnitaryTuple::new(vec![x.scale(a), y.scale(b)])?)
}

/// Three-generator family (e^{iφ₁}X, e^{iφ₂}XY, e^{iφ₃}Y) with one common
/// commutation angle: every later member advances every earlier one by
/// e^{iθ}.
pub fn irrep_d3_constant(q: RationalAngle, phases: &PhasePoint) -> Result<UnitaryTuple, RepError> {
    if phases.len() != 3 {
        return Err(RepError::PhaseCount { got: phases.len(), expected: 3 });
    }
    let n = q.denominator() as usize;
    let x = clock_matrix(q.unit(), n);
    let y = shift_matrix(n);
    let xy = x.mul(&y);
    let ph: Vec<Complex64> =
        phases.angles().iter().map(|&a| Complex64::from_polar(1.0, a)).collect();
    Ok(UnitaryTuple::new(vec![x.scale(ph[0]), xy.scale(ph[1]), y.scale(ph[2])])?)
}

/// Recursive tensor representation for an arbitrary rational phase matrix.
///
/// The last generator is peeled off: each earlier generator picks up a clock
/// factor in its own slot and the last generator is a chain of shifts, so
/// all pairwise phases come out right. The result is a representation
/// (a norm upper-bound producer); only the two-generator and constant-angle
/// three-generator families are treated as exhaustive irreducible sweeps.
pub fn tensor_rep(theta: &RationalTheta) -> Result<UnitaryTuple, RepError> {
    let cap = crate::matcore::tol::TENSOR_DIM_CAP;
    let required = tensor_rep_dimension(theta);
    if required > cap {
        return Err(RepError::DimensionCap { required, cap });
    }
    let mats = build_tensor_rep(theta);
    Ok(UnitaryTuple::new(mats)?)
}

/// Total dimension the tensor construction needs: the product of the
/// denominators over all generator pairs.
pub fn tensor_rep_dimension(theta: &RationalTheta) -> usize {
    let d = theta.dim();
    let mut dim: usize = 1;
    for k in 0..d {
        for l in k + 1..d {
            dim = dim.saturating_mul(theta.get(k, l).denominator() as usize);
        }
    }
    dim
}

fn build_tensor_rep(theta: &RationalTheta) -> Vec<ComplexMatrix> {
    let d = theta.dim();
    if d == 0 {
        return Vec::new();
    }
    if d == 1 {
        return vec![ComplexMatrix::identity(1)];
    }
    // Representation of the leading (d−1)-block.
    let sub_upper: Vec<RationalAngle> = (0..d - 1)
        .flat_map(|k| (k + 1..d - 1).map(move |l| theta.get(k, l)))
        .collect();
    let sub = build_tensor_rep(&RationalTheta::from_upper(d - 1, sub_upper));
    let sub_dim = sub[0].rows;

    // Extra slot k carries the pair for the angle θ_{k,d}.
    let slots: Vec<(ComplexMatrix, ComplexMatrix)> = (0..d - 1)
        .map(|k| {
            let a = theta.get(k, d - 1);
            let n = a.denominator() as usize;
            (clock_matrix(a.unit(), n), shift_matrix(n))
        })
        .collect();

    let mut mats = Vec::with_capacity(d);
    for k in 0..d - 1 {
        // U_k = sub_k ⊗ I ⊗ … ⊗ u(θ_{k,d}) [slot k] ⊗ … ⊗ I
        let mut m = sub[k].clone();
        for (j, (u, _)) in slots.iter().enumerate() {
            let factor = if j == k { u.clone() } else { ComplexMatrix::identity(u.rows) };
            m = m.tensor(&factor).expect("dimension checked before building");
        }
        mats.push(m);
    }
    // U_d = I ⊗ v(θ_{1,d}) ⊗ … ⊗ v(θ_{d−1,d})
    let mut last = ComplexMatrix::identity(sub_dim);
    for (_, v) in &slots {
        last = last.tensor(v).expect("dimension checked before building");
    }
    mats.push(last);
    mats
}

/// Worst pairwise commutation residual
/// `max_{k<ℓ} ‖U_ℓU_k − e^{iθ_{k,ℓ}}U_kU_ℓ‖` (operator norm).
pub fn commutation_residual(tuple: &UnitaryTuple, theta: &ThetaMatrix) -> f64 {
    let mut worst = 0.0_f64;
    for k in 0..tuple.len() {
        for l in k + 1..tuple.len() {
            let lhs = tuple.member(l).mul(tuple.member(k));
            let rhs = tuple
                .member(k)
                .mul(tuple.member(l))
                .scale(Complex64::from_polar(1.0, theta.get(k, l)));
            let r = crate::matcore::operator_norm(&lhs.sub(&rhs))
                .expect("difference of bounded matrices");
            worst = worst.max(r);
        }
    }
    worst
}

/// Optimization domain on the phase torus: half-open per-axis lengths.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseDomain {
    pub lengths: Vec<f64>,
}

impl PhaseDomain {
    /// Domain for the two-generator family at denominator n. Conjugating by
    /// clock and shift translates both phases in steps of 2π/n, so with
    /// `reduced` both axes shrink to [0, 2π/n); otherwise the full torus.
    pub fn d2(n: u64, reduced: bool) -> Self {
        let l = if reduced { TAU / n as f64 } else { TAU };
        Self { lengths: vec![l, l] }
    }

    /// Domain for the three-generator constant-angle family. The clock and
    /// shift conjugations translate the phase triple by (0, s, s) and
    /// (−s, −s, 0) with s = 2π/n, which reduces the first and third axes to
    /// [0, 2π/n) while the middle axis keeps its full circle. The `reduced`
    /// flag toggles that reduction.
    pub fn d3(n: u64, reduced: bool) -> Self {
        if reduced {
            let l = TAU / n as f64;
            Self { lengths: vec![l, TAU, l] }
        } else {
            Self { lengths: vec![TAU; 3] }
        }
    }

    pub fn free_phases(&self) -> usize {
        self.lengths.len()
    }
}

//! Truncated bosonic Fock space over m modes and the Weyl unitaries on it.
//!
//! States are multi-indices (n₁,…,n_m) with total occupation at most the
//! cutoff, enumerated in graded lexicographic order. Weyl operators are the
//! exponentials of the truncated anti-Hermitian generator a†(z) − a(z);
//! they are computed column-block-wise by a stepped Taylor integrator over
//! the sparse generator, which is exact to machine precision and never
//! materializes matrices beyond the requested columns.

use super::FockError;
use crate::matcore::{vec_norm, Complex64, ComplexMatrix};
use std::collections::HashMap;

/// Largest basis size a context will enumerate.
const BASIS_CAP: usize = 150_000;

/// Largest dimension for which a dense Weyl matrix is assembled; larger
/// contexts must go through column blocks.
const DENSE_WEYL_CAP: usize = 2_048;

/// Binomial coefficient with overflow protection.
fn binomial(n: usize, k: usize) -> usize {
    let mut acc: u128 = 1;
    for i in 0..k.min(n - k) {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > usize::MAX as u128 {
            return usize::MAX;
        }
    }
    acc as usize
}

/// Enumerated truncated Fock basis over a fixed number of modes.
#[derive(Clone, Debug)]
pub struct FockContext {
    pub modes: usize,
    pub cutoff: usize,
    basis: Vec<Vec<u32>>,
    index: HashMap<Vec<u32>, usize>,
}

impl FockContext {
    /// Enumerates all multi-indices with total occupation ≤ cutoff in
    /// graded lexicographic order (by total, then entrywise).
    pub fn new(modes: usize, cutoff: usize) -> Result<Self, FockError> {
        if modes == 0 || cutoff == 0 {
            return Err(FockError::BadContext("modes and cutoff must be positive".into()));
        }
        let dim = binomial(cutoff + modes, modes);
        if dim > BASIS_CAP {
            return Err(FockError::TooLarge { dim, cap: BASIS_CAP });
        }
        let mut basis = Vec::with_capacity(dim);
        let mut current = vec![0u32; modes];
        for total in 0..=cutoff as u32 {
            enumerate_grade(&mut basis, &mut current, 0, total);
        }
        debug_assert_eq!(basis.len(), dim);
        let index = basis
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), i))
            .collect();
        Ok(Self { modes, cutoff, basis, index })
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Vec<u32>] {
        &self.basis
    }

    pub fn index_of(&self, n: &[u32]) -> Option<usize> {
        self.index.get(n).copied()
    }

    /// Total occupation of basis state i.
    pub fn occupation(&self, i: usize) -> u32 {
        self.basis[i].iter().sum()
    }

    /// Indices of all basis states with total occupation ≤ max_occ,
    /// in basis order.
    pub fn low_block(&self, max_occ: u32) -> Vec<usize> {
        (0..self.dim()).filter(|&i| self.occupation(i) <= max_occ).collect()
    }
}

fn enumerate_grade(out: &mut Vec<Vec<u32>>, current: &mut Vec<u32>, mode: usize, remaining: u32) {
    if mode + 1 == current.len() {
        current[mode] = remaining;
        out.push(current.clone());
        return;
    }
    for v in 0..=remaining {
        current[mode] = v;
        enumerate_grade(out, current, mode + 1, remaining - v);
    }
}

/// The Weyl unitary W(z) = exp(a†(z) − a(z)) on a truncated basis, held as
/// the sparse generator plus the step count of its Taylor integrator.
pub struct WeylPropagator<'a> {
    ctx: &'a FockContext,
    /// Entries (row, col, value) of the truncated generator.
    triplets: Vec<(usize, usize, Complex64)>,
    steps: usize,
}

impl<'a> WeylPropagator<'a> {
    pub fn new(z: &[Complex64], ctx: &'a FockContext) -> Result<Self, FockError> {
        if z.len() != ctx.modes {
            return Err(FockError::BadContext(format!(
                "vector has {} modes, context has {}",
                z.len(),
                ctx.modes
            )));
        }
        let mut triplets = Vec::new();
        for (col, n) in ctx.basis.iter().enumerate() {
            let total: u32 = n.iter().sum();
            for (j, &zj) in z.iter().enumerate() {
                // Creation a†(z): n → n + e_j with amplitude z_j √(n_j + 1),
                // dropped past the cutoff.
                if (total as usize) < ctx.cutoff {
                    let mut up = n.clone();
                    up[j] += 1;
                    let row = ctx.index_of(&up).expect("within cutoff");
                    triplets.push((row, col, zj * ((n[j] + 1) as f64).sqrt()));
                }
                // Annihilation −a(z): n → n − e_j with amplitude −z̄_j √n_j.
                if n[j] > 0 {
                    let mut down = n.clone();
                    down[j] -= 1;
                    let row = ctx.index_of(&down).expect("below cutoff");
                    triplets.push((row, col, -zj.conj() * (n[j] as f64).sqrt()));
                }
            }
        }
        // ‖a(z)‖ and ‖a†(z)‖ are both ≤ ‖z‖√cutoff on the truncation, so
        // steps of size 1/⌈2‖z‖√cutoff⌉ keep each Taylor series in the
        // cancellation-free regime.
        let norm_bound = 2.0 * vec_norm(z) * (ctx.cutoff as f64).sqrt();
        let steps = (norm_bound.ceil() as usize).max(1);
        Ok(Self { ctx, triplets, steps })
    }

    /// y ← G x restricted to the stored sparsity, for a block of columns.
    fn generator_block(&self, block: &ComplexMatrix, scale: f64) -> ComplexMatrix {
        let cols = block.cols;
        let mut out = ComplexMatrix::zeros(block.rows, cols);
        for &(r, c, v) in &self.triplets {
            let sv = v * scale;
            let (src, dst) = (c * cols, r * cols);
            for j in 0..cols {
                out.data[dst + j] += sv * block.data[src + j];
            }
        }
        out
    }

    /// Applies W(z) to a block of column vectors (dim × k matrix).
    pub fn apply_block(&self, block: &ComplexMatrix) -> Result<ComplexMatrix, FockError> {
        if block.rows != self.ctx.dim() {
            return Err(FockError::BadContext(format!(
                "block has {} rows, basis has {}",
                block.rows,
                self.ctx.dim()
            )));
        }
        let delta = 1.0 / self.steps as f64;
        let mut state = block.clone();
        for _ in 0..self.steps {
            // exp(δG)·state by Taylor; δ‖G‖ ≤ 1, so ~20 terms reach the
            // machine floor without cancellation.
            let mut acc = state.clone();
            let mut term = state;
            for order in 1..=24 {
                term = self.generator_block(&term, delta / order as f64);
                acc = acc.add(&term);
                if term.max_abs() < 1e-17 * acc.max_abs().max(1.0) {
                    break;
                }
            }
            state = acc;
        }
        Ok(state)
    }

    /// Applies W(z) to the listed basis columns, producing a dim × len
    /// block in the given column order.
    pub fn apply_basis_columns(&self, columns: &[usize]) -> Result<ComplexMatrix, FockError> {
        let dim = self.ctx.dim();
        let mut block = ComplexMatrix::zeros(dim, columns.len());
        for (j, &c) in columns.iter().enumerate() {
            block.set(c, j, Complex64::new(1.0, 0.0));
        }
        self.apply_block(&block)
    }
}

/// Dense matrix of W(z) on the truncated basis. Only for contexts small
/// enough to hold it; large contexts must use [`WeylPropagator`] blocks.
pub fn weyl_matrix(z: &[Complex64], ctx: &FockContext) -> Result<ComplexMatrix, FockError> {
    if ctx.dim() > DENSE_WEYL_CAP {
        return Err(FockError::TooLarge { dim: ctx.dim(), cap: DENSE_WEYL_CAP });
    }
    let prop = WeylPropagator::new(z, ctx)?;
    let all: Vec<usize> = (0..ctx.dim()).collect();
    prop.apply_basis_columns(&all)
}

/// Frobenius defect of W(y)W(z) = e^{2i·Im⟨y,z⟩} W(z)W(y) on the columns
/// with occupation ≤ max_occ, computed column-block-wise so it scales to
/// large truncations. The expected phase uses the inner product linear in
/// its first argument.
pub fn weyl_commutation_defect(
    y: &[Complex64],
    z: &[Complex64],
    ctx: &FockContext,
    max_occ: u32,
) -> Result<f64, FockError> {
    let phase: f64 = 2.0
        * y.iter()
            .zip(z)
            .map(|(a, b)| (a * b.conj()).im)
            .sum::<f64>();
    weyl_commutation_defect_at_phase(y, z, phase, ctx, max_occ)
}

/// Like [`weyl_commutation_defect`], but against an externally prescribed
/// phase — used to audit families whose phases are specified by a matrix
/// rather than recomputed from the vectors.
pub fn weyl_commutation_defect_at_phase(
    y: &[Complex64],
    z: &[Complex64],
    phase: f64,
    ctx: &FockContext,
    max_occ: u32,
) -> Result<f64, FockError> {
    let wy = WeylPropagator::new(y, ctx)?;
    let wz = WeylPropagator::new(z, ctx)?;
    let cols = ctx.low_block(max_occ);
    let forward = wy.apply_block(&wz.apply_basis_columns(&cols)?)?;
    let swapped = wz
        .apply_block(&wy.apply_basis_columns(&cols)?)?
        .scale(Complex64::from_polar(1.0, phase));
    Ok(forward.sub(&swapped).frobenius_norm())
}

/// Frobenius defect of the gauge-shift identity
/// W(x)* W(x_k) W(x) = e^{2i·Im⟨x_k,x⟩} W(x_k) on occupation ≤ max_occ.
pub fn gauge_conjugation_defect(
    x: &[Complex64],
    xk: &[Complex64],
    ctx: &FockContext,
    max_occ: u32,
) -> Result<f64, FockError> {
    let minus_x: Vec<Complex64> = x.iter().map(|v| -v).collect();
    let wx = WeylPropagator::new(x, ctx)?;
    let wx_inv = WeylPropagator::new(&minus_x, ctx)?;
    let wk = WeylPropagator::new(xk, ctx)?;
    let phase: f64 = 2.0
        * xk.iter()
            .zip(x)
            .map(|(a, b)| (a * b.conj()).im)
            .sum::<f64>();
    let cols = ctx.low_block(max_occ);
    let conjugated = wx_inv.apply_block(&wk.apply_block(&wx.apply_basis_columns(&cols)?)?)?;
    let expected = wk
        .apply_basis_columns(&cols)?
        .scale(Complex64::from_polar(1.0, phase));
    Ok(conjugated.sub(&expected).frobenius_norm())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cvec(entries: &[(f64, f64)]) -> Vec<Complex64> {
        entries.iter().map(|&(re, im)| Complex64::new(re, im)).collect()
    }

    #[test]
    fn basis_is_graded_lexicographic_with_known_sizes() {
        let ctx = FockContext::new(2, 2).unwrap();
        let expected: Vec<Vec<u32>> =
            vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![0, 2], vec![1, 1], vec![2, 0]];
        assert_eq!(ctx.basis(), expected.as_slice());
        for (i, n) in expected.iter().enumerate() {
            assert_eq!(ctx.index_of(n), Some(i));
        }

        assert_eq!(FockContext::new(4, 10).unwrap().dim(), 1001);
        assert_eq!(FockContext::new(4, 22).unwrap().dim(), 14950);
        assert!(matches!(
            FockContext::new(8, 40),
            Err(FockError::TooLarge { .. })
        ));
    }

    #[test]
    fn weyl_of_zero_is_the_identity() {
        let ctx = FockContext::new(2, 4).unwrap();
        let w = weyl_matrix(&cvec(&[(0.0, 0.0), (0.0, 0.0)]), &ctx).unwrap();
        assert!(w.sub(&ComplexMatrix::identity(ctx.dim())).max_abs() < 1e-14);
    }

    #[test]
    fn weyl_operators_are_unitary_with_inverse_at_minus_z() {
        let ctx = FockContext::new(2, 8).unwrap();
        let z = cvec(&[(0.4, -0.3), (0.2, 0.5)]);
        let w = weyl_matrix(&z, &ctx).unwrap();
        assert!(w.unitary_defect() < 1e-9, "defect {}", w.unitary_defect());

        let minus: Vec<Complex64> = z.iter().map(|v| -v).collect();
        let w_min = weyl_matrix(&minus, &ctx).unwrap();
        assert!(w_min.sub(&w.adjoint()).max_abs() < 1e-9);
    }

    #[test]
    fn vacuum_overlap_matches_the_coherent_state_formula() {
        let ctx = FockContext::new(1, 12).unwrap();
        let z = cvec(&[(0.5, 0.35)]);
        let w = weyl_matrix(&z, &ctx).unwrap();
        let overlap = w.get(0, 0);
        let expected = (-(0.5_f64.powi(2) + 0.35_f64.powi(2)) / 2.0).exp();
        assert!((overlap - Complex64::new(expected, 0.0)).norm() < 1e-6);
    }

    #[test]
    fn commutation_phase_holds_on_the_low_block() {
        // Vector lengths ~0.23: small enough that a cutoff of 14 pushes the
        // truncation noise on occupation ≤ 7 well below the 1e−4 contract.
        let ctx = FockContext::new(2, 14).unwrap();
        let y = cvec(&[(0.175, 0.05), (-0.1, 0.125)]);
        let z = cvec(&[(0.05, -0.15), (0.15, 0.075)]);
        let defect = weyl_commutation_defect(&y, &z, &ctx, 7).unwrap();
        assert!(defect < 1e-4, "defect {defect}");

        // The check has teeth: the conjugate phase (wrong sign) must leave
        // a much larger defect than the correct one.
        let phase: f64 =
            2.0 * y.iter().zip(&z).map(|(a, b)| (a * b.conj()).im).sum::<f64>();
        assert!(phase.abs() > 0.01, "test vectors must not commute trivially");
        let wrong =
            weyl_commutation_defect_at_phase(&y, &z, -phase, &ctx, 7).unwrap();
        assert!(wrong > 100.0 * defect, "wrong-phase defect only {wrong}");
    }

    #[test]
    fn commutation_residual_decreases_along_the_cutoff_chain() {
        let y = cvec(&[(0.15, 0.1), (0.05, -0.075)]);
        let z = cvec(&[(-0.1, 0.05), (0.125, 0.15)]);
        let mut previous = f64::INFINITY;
        for cutoff in [6usize, 8, 10, 12] {
            let ctx = FockContext::new(2, cutoff).unwrap();
            let defect = weyl_commutation_defect(&y, &z, &ctx, (cutoff / 2) as u32).unwrap();
            assert!(
                defect <= previous * 1.1,
                "defect {defect} grew from {previous} at cutoff {cutoff}"
            );
            previous = defect;
        }
        assert!(previous < 1e-3, "final defect {previous}");
    }

    #[test]
    fn gauge_conjugation_shifts_by_the_expected_phase() {
        let ctx = FockContext::new(2, 14).unwrap();
        let x = cvec(&[(0.25, 0.0), (0.1, -0.15)]);
        let xk = cvec(&[(0.05, 0.2), (-0.125, 0.1)]);
        let defect = gauge_conjugation_defect(&x, &xk, &ctx, 5).unwrap();
        assert!(defect < 1e-5, "defect {defect}");
    }
}

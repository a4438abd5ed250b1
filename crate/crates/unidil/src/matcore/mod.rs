//! Dense complex linear algebra primitives.
//!
//! Everything downstream works over row-major dense matrices of `Complex64`.
//! The module is deliberately self-contained: the Hermitian eigensolver
//! (Householder tridiagonalization plus implicit-shift QL), the matrix
//! exponential (Padé 13 with scaling and squaring), the Householder QR used
//! for unitary sampling, and a Lanczos iteration for large Monte-Carlo norm
//! estimates are all implemented here so that certified results never depend
//! on an external solver's rounding behaviour.
//!
//! Conventions: matrices are row-major; `tensor` is the Kronecker product
//! with the left factor owning the coarse block index; inner products over
//! vectors are linear in the first argument.

mod eig;
mod expm;
mod lanczos;
mod qr;

pub use eig::{
    hermitian_eigensystem, hermitian_eigenvalues, hermitian_norm, operator_norm,
    unitary_eigensystem,
};
pub use expm::matrix_exponential;
pub use lanczos::{lanczos_extreme, LanczosEstimate};
pub use qr::householder_qr;

pub type Complex64 = num_complex::Complex<f64>;

use std::fmt;

/// Tolerances used by validation in this module, with their rationale.
pub mod tol {
    /// Relative Hermitian-symmetry tolerance: `max |A - A*|` against
    /// `max |A|`. Entries of a Hermitian matrix assembled from products of
    /// unitaries pick up a few ulps per operation; 1e-12 catches genuine
    /// asymmetry while accepting accumulated rounding.
    pub const HERMITIAN_REL: f64 = 1e-12;

    /// Unitarity defect `‖U*U − I‖` accepted when constructing a tuple.
    /// Sampled and constructed unitaries are exact to ~1e-14; 1e-10 leaves
    /// room for products of a few of them.
    pub const UNITARY_DEFECT: f64 = 1e-10;

    /// Largest dimension `tensor` will produce. Keeps accidental
    /// high-order products from exhausting memory.
    pub const TENSOR_DIM_CAP: usize = 4096;
}

/// Errors from matrix construction and factorizations.
#[derive(Debug, thiserror::Error)]
pub enum MatError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix is not Hermitian (asymmetry {defect:.3e} exceeds {tol:.3e})")]
    NotHermitian { defect: f64, tol: f64 },
    #[error("matrix is not unitary (defect {defect:.3e} exceeds {tol:.3e})")]
    NotUnitary { defect: f64, tol: f64 },
    #[error("tensor product dimension {dim} exceeds cap {cap}")]
    TensorTooLarge { dim: usize, cap: usize },
    #[error("eigeniteration failed to converge at index {0}")]
    NoConvergence(usize),
    #[error("matrix is singular at pivot {0}")]
    Singular(usize),
    #[error("matrix is not positive semidefinite (eigenvalue {0:.3e})")]
    NotPsd(f64),
}

/// Dense row-major complex matrix.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Complex64>,
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows.min(8) {
            write!(f, "  ")?;
            for j in 0..self.cols.min(8) {
                let z = self.get(i, j);
                write!(f, "{:+.3e}{:+.3e}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![Complex64::new(0.0, 0.0); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Complex64::new(1.0, 0.0));
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Diagonal matrix from the given entries.
    pub fn diagonal(d: &[Complex64]) -> Self {
        let mut m = Self::zeros(d.len(), d.len());
        for (i, &z) in d.iter().enumerate() {
            m.set(i, i, z);
        }
        m
    }

    #[inline(always)]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.cols + j]
    }

    #[inline(always)]
    pub fn set(&mut self, i: usize, j: usize, z: Complex64) {
        self.data[i * self.cols + j] = z;
    }

    #[inline(always)]
    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).conj())
    }

    /// Entrywise complex conjugate (no transpose).
    pub fn conjugate(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "add: shape mismatch");
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "sub: shape mismatch");
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| a * s).collect(),
        }
    }

    /// Matrix product, accumulated row by row for cache locality.
    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "mul: inner dimension mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                let orow = &other.data[k * other.cols..(k + 1) * other.cols];
                let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (o, b) in out_row.iter_mut().zip(orow) {
                    *o += a * b;
                }
            }
        }
        out
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.cols, v.len(), "apply: dimension mismatch");
        let mut out = vec![Complex64::new(0.0, 0.0); self.rows];
        for i in 0..self.rows {
            let mut acc = Complex64::new(0.0, 0.0);
            for (a, x) in self.row(i).iter().zip(v) {
                acc += a * x;
            }
            out[i] = acc;
        }
        out
    }

    pub fn trace(&self) -> Complex64 {
        assert!(self.is_square(), "trace: square matrix required");
        (0..self.rows).map(|i| self.get(i, i)).sum()
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Maximum absolute column sum (the induced 1-norm), used by the
    /// exponential's scaling heuristic.
    pub fn norm_one(&self) -> f64 {
        let mut best = 0.0_f64;
        for j in 0..self.cols {
            let s: f64 = (0..self.rows).map(|i| self.get(i, j).norm()).sum();
            best = best.max(s);
        }
        best
    }

    /// Hermitian-symmetry defect `max_{ij} |A_ij - conj(A_ji)|`.
    pub fn hermitian_defect(&self) -> f64 {
        assert!(self.is_square(), "hermitian_defect: square matrix required");
        let mut worst = 0.0_f64;
        for i in 0..self.rows {
            for j in i..self.cols {
                worst = worst.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        worst
    }

    /// True when the asymmetry is below `tol::HERMITIAN_REL` relative to the
    /// largest entry.
    pub fn is_hermitian(&self) -> bool {
        let scale = self.max_abs().max(1.0);
        self.hermitian_defect() <= tol::HERMITIAN_REL * scale
    }

    /// `‖U*U − I‖_max`, zero for a unitary.
    pub fn unitary_defect(&self) -> f64 {
        assert!(self.is_square(), "unitary_defect: square matrix required");
        let p = self.adjoint().mul(self);
        let mut worst = 0.0_f64;
        for i in 0..self.rows {
            for j in 0..self.cols {
                let id = if i == j { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) };
                worst = worst.max((p.get(i, j) - id).norm());
            }
        }
        worst
    }

    /// Kronecker product; rejects results above `tol::TENSOR_DIM_CAP`.
    pub fn tensor(&self, other: &Self) -> Result<Self, MatError> {
        let rows = self.rows * other.rows;
        let cols = self.cols * other.cols;
        let cap = tol::TENSOR_DIM_CAP;
        if rows > cap || cols > cap {
            return Err(MatError::TensorTooLarge { dim: rows.max(cols), cap });
        }
        let mut out = Self::zeros(rows, cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self.get(i, j);
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                for p in 0..other.rows {
                    for q in 0..other.cols {
                        out.set(i * other.rows + p, j * other.cols + q, a * other.get(p, q));
                    }
                }
            }
        }
        Ok(out)
    }

    /// Block-diagonal direct sum.
    pub fn direct_sum(&self, other: &Self) -> Self {
        let mut out = Self::zeros(self.rows + other.rows, self.cols + other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(i, j, self.get(i, j));
            }
        }
        for i in 0..other.rows {
            for j in 0..other.cols {
                out.set(self.rows + i, self.cols + j, other.get(i, j));
            }
        }
        out
    }

    /// Positive-semidefinite square root through the eigendecomposition.
    /// Eigenvalues below `-psd_tol` are rejected; small negatives from
    /// rounding are clamped to zero.
    pub fn psd_sqrt(&self, psd_tol: f64) -> Result<Self, MatError> {
        let (vals, vecs) = hermitian_eigensystem(self)?;
        if let Some(&lo) = vals.first() {
            if lo < -psd_tol {
                return Err(MatError::NotPsd(lo));
            }
        }
        let n = self.rows;
        // V * sqrt(D) * V^*
        let mut out = Self::zeros(n, n);
        for k in 0..n {
            let s = vals[k].max(0.0).sqrt();
            if s == 0.0 {
                continue;
            }
            for i in 0..n {
                let vi = vecs.get(i, k);
                for j in 0..n {
                    let z = out.get(i, j) + vi * vecs.get(j, k).conj() * s;
                    out.set(i, j, z);
                }
            }
        }
        Ok(out)
    }
}

/// Inner product `⟨x, y⟩ = Σ x_i conj(y_i)`, linear in the first argument.
pub fn inner(x: &[Complex64], y: &[Complex64]) -> Complex64 {
    assert_eq!(x.len(), y.len(), "inner: length mismatch");
    x.iter().zip(y).map(|(a, b)| a * b.conj()).sum()
}

/// Euclidean norm of a complex vector.
pub fn vec_norm(x: &[Complex64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// A tuple of same-dimension unitaries, validated on construction.
#[derive(Clone, Debug)]
pub struct UnitaryTuple {
    mats: Vec<ComplexMatrix>,
    dim: usize,
}

impl UnitaryTuple {
    /// Builds the tuple, checking squareness, equal dimensions, and the
    /// unitarity defect of every member against `tol::UNITARY_DEFECT`.
    pub fn new(mats: Vec<ComplexMatrix>) -> Result<Self, MatError> {
        if mats.is_empty() {
            return Err(MatError::DimensionMismatch("empty tuple".into()));
        }
        let dim = mats[0].rows;
        for (k, m) in mats.iter().enumerate() {
            if !m.is_square() || m.rows != dim {
                return Err(MatError::DimensionMismatch(format!(
                    "member {k} is {}x{}, expected {dim}x{dim}",
                    m.rows, m.cols
                )));
            }
            let defect = m.unitary_defect();
            if defect > tol::UNITARY_DEFECT {
                return Err(MatError::NotUnitary { defect, tol: tol::UNITARY_DEFECT });
            }
        }
        Ok(Self { mats, dim })
    }

    pub fn len(&self) -> usize {
        self.mats.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mats.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn member(&self, k: usize) -> &ComplexMatrix {
        &self.mats[k]
    }

    pub fn members(&self) -> &[ComplexMatrix] {
        &self.mats
    }

    /// `Σ_k (U_k + U_k*)`, the Hermitian sum whose norm drives the
    /// dilation-scale computations.
    pub fn hermitian_sum(&self) -> ComplexMatrix {
        let mut h = ComplexMatrix::zeros(self.dim, self.dim);
        for m in &self.mats {
            h = h.add(m).add(&m.adjoint());
        }
        h
    }

    /// Operator-norm distance `max_k ‖U_k − V_k‖` between equal-length
    /// tuples.
    pub fn distance(&self, other: &Self) -> Result<f64, MatError> {
        if self.len() != other.len() || self.dim != other.dim {
            return Err(MatError::DimensionMismatch(format!(
                "tuple shapes ({}, dim {}) vs ({}, dim {})",
                self.len(),
                self.dim,
                other.len(),
                other.dim
            )));
        }
        let mut worst = 0.0_f64;
        for (a, b) in self.mats.iter().zip(&other.mats) {
            worst = worst.max(operator_norm(&a.sub(b))?);
        }
        Ok(worst)
    }
}

pub(crate) use lu::lu_solve;

mod lu {
    use super::{ComplexMatrix, MatError};

    /// Solves `A X = B` by LU with partial pivoting, overwriting nothing.
    pub fn lu_solve(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix, MatError> {
        assert!(a.is_square(), "lu_solve: square matrix required");
        assert_eq!(a.rows, b.rows, "lu_solve: right-hand side mismatch");
        let n = a.rows;
        let mut lu = a.clone();
        let mut x = b.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (mut pk, mut pmax) = (k, lu.get(k, k).norm());
            for i in k + 1..n {
                let m = lu.get(i, k).norm();
                if m > pmax {
                    pk = i;
                    pmax = m;
                }
            }
            if pmax == 0.0 {
                return Err(MatError::Singular(k));
            }
            if pk != k {
                for j in 0..n {
                    let (u, v) = (lu.get(k, j), lu.get(pk, j));
                    lu.set(k, j, v);
                    lu.set(pk, j, u);
                }
                for j in 0..x.cols {
                    let (u, v) = (x.get(k, j), x.get(pk, j));
                    x.set(k, j, v);
                    x.set(pk, j, u);
                }
                perm.swap(k, pk);
            }
            let piv = lu.get(k, k);
            for i in k + 1..n {
                let f = lu.get(i, k) / piv;
                lu.set(i, k, f);
                if f.re == 0.0 && f.im == 0.0 {
                    continue;
                }
                for j in k + 1..n {
                    let z = lu.get(i, j) - f * lu.get(k, j);
                    lu.set(i, j, z);
                }
            }
        }
        // Forward substitution (unit lower triangle).
        for j in 0..x.cols {
            for i in 0..n {
                let mut acc = x.get(i, j);
                for k in 0..i {
                    acc -= lu.get(i, k) * x.get(k, j);
                }
                x.set(i, j, acc);
            }
            // Back substitution.
            for i in (0..n).rev() {
                let mut acc = x.get(i, j);
                for k in i + 1..n {
                    acc -= lu.get(i, k) * x.get(k, j);
                }
                x.set(i, j, acc / lu.get(i, i));
            }
        }
        Ok(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn identity_multiplication_is_neutral() {
        let a = ComplexMatrix::from_fn(3, 3, |i, j| c((i + 2 * j) as f64, (i as f64) - 1.0));
        let id = ComplexMatrix::identity(3);
        assert_eq!(a.mul(&id).data, a.data);
        assert_eq!(id.mul(&a).data, a.data);
    }

    #[test]
    fn adjoint_of_product_reverses_factors() {
        let a = ComplexMatrix::from_fn(2, 3, |i, j| c(i as f64 + 0.5, j as f64 - 1.0));
        let b = ComplexMatrix::from_fn(3, 2, |i, j| c(j as f64 - 0.25, i as f64));
        let lhs = a.mul(&b).adjoint();
        let rhs = b.adjoint().mul(&a.adjoint());
        for (x, y) in lhs.data.iter().zip(&rhs.data) {
            assert!((x - y).norm() < 1e-14);
        }
    }

    #[test]
    fn tensor_respects_dimension_cap() {
        let a = ComplexMatrix::identity(100);
        let b = ComplexMatrix::identity(50);
        match a.tensor(&b) {
            Err(MatError::TensorTooLarge { dim, cap }) => {
                assert_eq!(dim, 5000);
                assert_eq!(cap, tol::TENSOR_DIM_CAP);
            }
            other => panic!("expected cap rejection, got {other:?}"),
        }
    }

    #[test]
    fn tensor_of_identities_is_identity() {
        let a = ComplexMatrix::identity(3);
        let b = ComplexMatrix::identity(4);
        let t = a.tensor(&b).unwrap();
        assert_eq!(t.data, ComplexMatrix::identity(12).data);
    }

    #[test]
    fn direct_sum_places_blocks() {
        let a = ComplexMatrix::from_fn(2, 2, |i, j| c((i * 2 + j) as f64, 0.0));
        let b = ComplexMatrix::from_fn(1, 1, |_, _| c(9.0, 0.0));
        let s = a.direct_sum(&b);
        assert_eq!(s.rows, 3);
        assert_eq!(s.get(2, 2), c(9.0, 0.0));
        assert_eq!(s.get(0, 2), c(0.0, 0.0));
        assert_eq!(s.get(1, 1), c(3.0, 0.0));
    }

    #[test]
    fn unitary_tuple_rejects_nonunitary() {
        let bad = ComplexMatrix::from_fn(2, 2, |i, j| c((i + j) as f64, 0.0));
        match UnitaryTuple::new(vec![bad]) {
            Err(MatError::NotUnitary { .. }) => {}
            other => panic!("expected unitarity rejection, got {other:?}"),
        }
    }

    #[test]
    fn lu_solve_recovers_inverse_action() {
        let a = ComplexMatrix::from_fn(4, 4, |i, j| {
            c(((i * 7 + j * 3) % 5) as f64 + if i == j { 6.0 } else { 0.0 }, ((i + 2 * j) % 3) as f64)
        });
        let b = ComplexMatrix::from_fn(4, 2, |i, j| c(i as f64 - j as f64, 1.0));
        let x = lu_solve(&a, &b).unwrap();
        let r = a.mul(&x).sub(&b);
        assert!(r.max_abs() < 1e-12, "residual {}", r.max_abs());
    }

    #[test]
    fn psd_sqrt_squares_back() {
        // B = M* M is PSD by construction.
        let m = ComplexMatrix::from_fn(3, 3, |i, j| c((i as f64) - 0.3 * (j as f64), 0.2 * (i * j) as f64));
        let b = m.adjoint().mul(&m);
        let r = b.psd_sqrt(1e-10).unwrap();
        let back = r.mul(&r).sub(&b);
        assert!(back.max_abs() < 1e-10, "residual {}", back.max_abs());
        assert!(r.hermitian_defect() < 1e-10);
    }
}

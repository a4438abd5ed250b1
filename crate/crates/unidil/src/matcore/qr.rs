//! Householder QR for complex matrices.
//!
//! Returns `(Q, R)` with `Q` unitary and `R` upper triangular whose diagonal
//! is real and nonnegative. The diagonal normalization matters downstream:
//! sampling unitaries from Gaussian matrices is only uniform after the
//! R-diagonal phases are absorbed into Q.

use super::{Complex64, ComplexMatrix};

/// QR factorization with the R-diagonal phase convention described above.
pub fn householder_qr(a: &ComplexMatrix) -> (ComplexMatrix, ComplexMatrix) {
    assert!(a.rows >= a.cols, "householder_qr: rows >= cols required");
    let (m, n) = (a.rows, a.cols);
    let mut r = a.clone();
    let mut q = ComplexMatrix::identity(m);

    for k in 0..n.min(m.saturating_sub(1)) {
        let mut x: Vec<Complex64> = (k..m).map(|i| r.get(i, k)).collect();
        let xnorm = super::vec_norm(&x);
        if xnorm == 0.0 {
            continue;
        }
        let x0 = x[0];
        let phase = if x0.norm() > 0.0 { x0 / x0.norm() } else { Complex64::new(1.0, 0.0) };
        let alpha = -phase * xnorm;
        x[0] -= alpha;
        let vnorm_sq: f64 = x.iter().map(|z| z.norm_sqr()).sum();
        if vnorm_sq == 0.0 {
            continue;
        }
        let tau = 2.0 / vnorm_sq;
        let v = x;
        let blk = m - k;

        // R ← P R on rows k..m.
        for j in k..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for i in 0..blk {
                acc += v[i].conj() * r.get(k + i, j);
            }
            acc *= tau;
            for i in 0..blk {
                let z = r.get(k + i, j) - v[i] * acc;
                r.set(k + i, j, z);
            }
        }
        // Q ← Q P on columns k..m (P is Hermitian).
        for i in 0..m {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 0..blk {
                acc += q.get(i, k + j) * v[j];
            }
            acc *= tau;
            for j in 0..blk {
                let z = q.get(i, k + j) - acc * v[j].conj();
                q.set(i, k + j, z);
            }
        }
    }

    // Normalize: make diag(R) real nonnegative by pushing phases into Q.
    for k in 0..n {
        let dkk = r.get(k, k);
        let mag = dkk.norm();
        if mag == 0.0 {
            continue;
        }
        let phase = dkk / mag;
        for j in k..n {
            let z = r.get(k, j) * phase.conj();
            r.set(k, j, z);
        }
        for i in 0..m {
            let z = q.get(i, k) * phase;
            q.set(i, k, z);
        }
    }
    // Zero out the subdiagonal dust so R is exactly triangular.
    for i in 0..m {
        for j in 0..n.min(i) {
            r.set(i, j, Complex64::new(0.0, 0.0));
        }
    }
    (q, r)
}

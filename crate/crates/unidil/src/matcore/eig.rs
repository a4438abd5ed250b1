//! Hermitian eigensolver: complex Householder tridiagonalization followed by
//! implicit-shift QL on the real tridiagonal form.
//!
//! The reduction applies two-sided Householder reflections restricted to the
//! trailing block, then absorbs the residual subdiagonal phases into a
//! diagonal unitary so the QL stage runs in real arithmetic. Eigenvalues come
//! back sorted ascending; eigenvectors (when requested) are the columns of a
//! unitary satisfying `A v = λ v` to a residual well below the documented
//! 1e-9·‖A‖ contract for conditioned inputs.

use super::{Complex64, ComplexMatrix, MatError};

/// Maximum QL sweeps per eigenvalue before giving up. The classic solvers
/// use 30–50; convergence is cubic, so hitting this means a malformed input.
const MAX_QL_ITER: usize = 60;

/// Eigenvalues of a Hermitian matrix, ascending. Rejects matrices whose
/// Hermitian defect exceeds the module tolerance.
pub fn hermitian_eigenvalues(a: &ComplexMatrix) -> Result<Vec<f64>, MatError> {
    check_hermitian(a)?;
    let (mut d, mut e, _) = tridiagonalize(a, false);
    ql_implicit(&mut d, &mut e, None)?;
    d.sort_by(|x, y| x.partial_cmp(y).unwrap());
    Ok(d)
}

/// Eigenvalues (ascending) and a unitary of eigenvectors in matching column
/// order.
pub fn hermitian_eigensystem(a: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix), MatError> {
    check_hermitian(a)?;
    let (mut d, mut e, q) = tridiagonalize(a, true);
    let mut z = q.expect("tridiagonalize(want_q = true) returns the accumulated unitary");
    ql_implicit(&mut d, &mut e, Some(&mut z))?;
    // Sort ascending, carrying columns.
    let n = d.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].partial_cmp(&d[j]).unwrap());
    let vals: Vec<f64> = order.iter().map(|&i| d[i]).collect();
    let mut vecs = ComplexMatrix::zeros(n, n);
    for (new_col, &old_col) in order.iter().enumerate() {
        for r in 0..n {
            vecs.set(r, new_col, z.get(r, old_col));
        }
    }
    Ok((vals, vecs))
}

/// Spectral radius of a Hermitian matrix: `max |λ|`.
pub fn hermitian_norm(a: &ComplexMatrix) -> Result<f64, MatError> {
    let vals = hermitian_eigenvalues(a)?;
    Ok(vals.iter().fold(0.0_f64, |m, &v| m.max(v.abs())))
}

/// Operator (spectral) norm of an arbitrary matrix, `√λmax(A*A)`.
pub fn operator_norm(a: &ComplexMatrix) -> Result<f64, MatError> {
    let g = a.adjoint().mul(a);
    // A*A is Hermitian PSD by construction; clamp tiny negative rounding.
    let vals = hermitian_eigenvalues(&g)?;
    Ok(vals.last().copied().unwrap_or(0.0).max(0.0).sqrt())
}

/// Cosine clusters closer than this are treated as one eigenspace of the
/// Hermitian part and split by the skew part instead.
const COS_CLUSTER_TOL: f64 = 1e-8;

/// Full eigensystem of a unitary matrix: unit-modulus eigenvalues and an
/// orthonormal eigenbasis.
///
/// A unitary is normal, so `(U + U*)/2` and `(U − U*)/(2i)` commute and share
/// an eigenbasis — but the Hermitian part alone cannot tell `e^{iθ}` from
/// `e^{−iθ}`: their cosines coincide, and structured inputs (clock matrices,
/// real rotations) hit that degeneracy exactly. Each (near-)repeated cosine
/// cluster is therefore re-diagonalized by the skew part restricted to the
/// cluster, which separates the conjugate pair and leaves genuine eigenvectors
/// of `U` itself. Eigenvalues come back sorted by angle in `(−π, π]`.
pub fn unitary_eigensystem(
    u: &ComplexMatrix,
) -> Result<(Vec<Complex64>, ComplexMatrix), MatError> {
    let defect = u.unitary_defect();
    if defect > super::tol::UNITARY_DEFECT {
        return Err(MatError::NotUnitary { defect, tol: super::tol::UNITARY_DEFECT });
    }
    let n = u.rows;
    let ua = u.adjoint();
    let herm = ComplexMatrix::from_fn(n, n, |i, j| (u.get(i, j) + ua.get(i, j)) * 0.5);
    let skew = ComplexMatrix::from_fn(n, n, |i, j| {
        (u.get(i, j) - ua.get(i, j)) * Complex64::new(0.0, -0.5)
    });
    let (cosines, vecs) = hermitian_eigensystem(&herm)?;

    let mut values = vec![Complex64::new(0.0, 0.0); n];
    let mut basis = ComplexMatrix::zeros(n, n);
    let column = |m: &ComplexMatrix, k: usize| -> Vec<Complex64> {
        (0..n).map(|i| m.get(i, k)).collect()
    };

    // Ascending sort makes every cosine cluster a contiguous run.
    let mut start = 0;
    while start < n {
        let mut stop = start + 1;
        while stop < n && cosines[stop] - cosines[stop - 1] < COS_CLUSTER_TOL {
            stop += 1;
        }
        if stop - start == 1 {
            let v = column(&vecs, start);
            let sine = super::inner(&skew.apply(&v), &v).re;
            values[start] = Complex64::new(cosines[start], sine);
            for i in 0..n {
                basis.set(i, start, v[i]);
            }
        } else {
            // Skew part compressed to the cluster: Hermitian, and its
            // eigenvectors rotate the cluster basis into eigenvectors of U.
            let m = stop - start;
            let cols: Vec<Vec<Complex64>> = (start..stop).map(|k| column(&vecs, k)).collect();
            let images: Vec<Vec<Complex64>> = cols.iter().map(|v| skew.apply(v)).collect();
            let small = ComplexMatrix::from_fn(m, m, |a, b| super::inner(&images[b], &cols[a]));
            let (sines, rot) = hermitian_eigensystem(&small)?;
            for a in 0..m {
                let mut w = vec![Complex64::new(0.0, 0.0); n];
                for b in 0..m {
                    let r = rot.get(b, a);
                    for i in 0..n {
                        w[i] += cols[b][i] * r;
                    }
                }
                // The cluster's cosines agree only to the cluster tolerance;
                // the rotated vector's own Rayleigh quotient is exact.
                let cos = super::inner(&herm.apply(&w), &w).re;
                values[start + a] = Complex64::new(cos, sines[a]);
                for i in 0..n {
                    basis.set(i, start + a, w[i]);
                }
            }
        }
        start = stop;
    }

    // Order by principal angle, carrying columns along.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| values[i].arg().partial_cmp(&values[j].arg()).unwrap());
    let sorted_values: Vec<Complex64> = order.iter().map(|&k| values[k]).collect();
    let mut sorted_basis = ComplexMatrix::zeros(n, n);
    for (new_col, &old_col) in order.iter().enumerate() {
        for i in 0..n {
            sorted_basis.set(i, new_col, basis.get(i, old_col));
        }
    }
    Ok((sorted_values, sorted_basis))
}

fn check_hermitian(a: &ComplexMatrix) -> Result<(), MatError> {
    assert!(a.is_square(), "eigensolver: square matrix required");
    let defect = a.hermitian_defect();
    let tol = super::tol::HERMITIAN_REL * a.max_abs().max(1.0);
    if defect > tol {
        return Err(MatError::NotHermitian { defect, tol });
    }
    Ok(())
}

/// Householder reduction of a Hermitian matrix to real symmetric tridiagonal
/// form. Returns the diagonal, the subdiagonal (length n−1), and — when
/// requested — the accumulated unitary `Q` with `Q* A Q` tridiagonal.
fn tridiagonalize(a: &ComplexMatrix, want_q: bool) -> (Vec<f64>, Vec<f64>, Option<ComplexMatrix>) {
    let n = a.rows;
    let mut m = a.clone();
    // Reflector k is stored as (tau_k, v_k) acting on rows k+1..n.
    let mut taus: Vec<f64> = Vec::with_capacity(n.saturating_sub(2));
    let mut vs: Vec<Vec<Complex64>> = Vec::with_capacity(n.saturating_sub(2));

    for k in 0..n.saturating_sub(2) {
        // Column below the diagonal.
        let mut x: Vec<Complex64> = (k + 1..n).map(|i| m.get(i, k)).collect();
        let xnorm = super::vec_norm(&x);
        if xnorm == 0.0 {
            taus.push(0.0);
            vs.push(Vec::new());
            continue;
        }
        // alpha carries the phase of the leading entry so v has a large head.
        let x0 = x[0];
        let phase = if x0.norm() > 0.0 { x0 / x0.norm() } else { Complex64::new(1.0, 0.0) };
        let alpha = -phase * xnorm;
        x[0] -= alpha;
        let vnorm_sq: f64 = x.iter().map(|z| z.norm_sqr()).sum();
        if vnorm_sq == 0.0 {
            taus.push(0.0);
            vs.push(Vec::new());
            continue;
        }
        let tau = 2.0 / vnorm_sq;
        let v = x;

        // Two-sided update of the trailing block: A' = A − v w* − w v* with
        // w = τ(Av) − (τ²/2)(v*Av) v, all restricted to rows/cols k+1..n.
        let blk = n - (k + 1);
        let mut av = vec![Complex64::new(0.0, 0.0); blk];
        for i in 0..blk {
            let mut acc = Complex64::new(0.0, 0.0);
            let row = &m.data[(k + 1 + i) * n + (k + 1)..(k + 1 + i) * n + n];
            for (aij, vj) in row.iter().zip(&v) {
                acc += aij * vj;
            }
            av[i] = acc;
        }
        let vav: Complex64 = v.iter().zip(&av).map(|(vi, ai)| vi.conj() * ai).sum();
        let coef = tau * tau * 0.5 * vav;
        let w: Vec<Complex64> = av.iter().zip(&v).map(|(ai, vi)| tau * ai - coef * vi).collect();
        for i in 0..blk {
            let vi = v[i];
            let wi = w[i];
            let row = &mut m.data[(k + 1 + i) * n + (k + 1)..(k + 1 + i) * n + n];
            for j in 0..blk {
                row[j] -= vi * w[j].conj() + wi * v[j].conj();
            }
        }
        // Write the produced column entry and clear below it.
        m.set(k + 1, k, alpha);
        m.set(k, k + 1, alpha.conj());
        for i in k + 2..n {
            m.set(i, k, Complex64::new(0.0, 0.0));
            m.set(k, i, Complex64::new(0.0, 0.0));
        }
        taus.push(tau);
        vs.push(v);
    }

    // Phase absorption: D* T D is real tridiagonal for D = diag(ph).
    let mut ph = vec![Complex64::new(1.0, 0.0); n];
    let mut d = vec![0.0_f64; n];
    let mut e = vec![0.0_f64; n.saturating_sub(1)];
    for i in 0..n {
        d[i] = m.get(i, i).re;
    }
    for k in 0..n.saturating_sub(1) {
        let sub = m.get(k + 1, k);
        let r = sub.norm();
        e[k] = r;
        ph[k + 1] = if r > 0.0 { ph[k] * (sub / r) } else { ph[k] };
    }

    let q = want_q.then(|| {
        // Accumulate Q = P_0 P_1 ⋯ backwards, then fold in the phases.
        let mut q = ComplexMatrix::identity(n);
        for k in (0..vs.len()).rev() {
            let tau = taus[k];
            if tau == 0.0 {
                continue;
            }
            let v = &vs[k];
            let blk = n - (k + 1);
            // Q ← P_k Q on rows k+1..n: row block ← row block − τ v (v* rows).
            for j in 0..n {
                let mut acc = Complex64::new(0.0, 0.0);
                for i in 0..blk {
                    acc += v[i].conj() * q.get(k + 1 + i, j);
                }
                acc *= tau;
                for i in 0..blk {
                    let z = q.get(k + 1 + i, j) - v[i] * acc;
                    q.set(k + 1 + i, j, z);
                }
            }
        }
        // Columns pick up the subdiagonal phases.
        for j in 0..n {
            for i in 0..n {
                let z = q.get(i, j) * ph[j];
                q.set(i, j, z);
            }
        }
        q
    });

    (d, e, q)
}

/// Implicit-shift QL on a real symmetric tridiagonal matrix. `d` holds the
/// diagonal, `e` the subdiagonal (length n−1). Eigenvalues overwrite `d`
/// unordered; accumulated rotations are applied to the columns of `z`.
fn ql_implicit(d: &mut [f64], e: &mut [f64], mut z: Option<&mut ComplexMatrix>) -> Result<(), MatError> {
    let n = d.len();
    if n <= 1 {
        return Ok(());
    }
    // Sentinel layout: work[i] is the coupling below d[i]; work[n-1] = 0.
    let mut work = vec![0.0_f64; n];
    work[..n - 1].copy_from_slice(e);

    for l in 0..n {
        let mut iter = 0;
        loop {
            // Find the first negligible coupling at or above l.
            let mut m = l;
            while m < n - 1 {
                let dd = d[m].abs() + d[m + 1].abs();
                if work[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > MAX_QL_ITER {
                return Err(MatError::NoConvergence(l));
            }
            // Wilkinson-style shift from the leading 2x2.
            let mut g = (d[l + 1] - d[l]) / (2.0 * work[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + work[l] / (g + r.copysign(g));
            let (mut s, mut c) = (1.0_f64, 1.0_f64);
            let mut p = 0.0_f64;
            let mut i = m;
            while i > l {
                let i1 = i - 1;
                let f = s * work[i1];
                let b = c * work[i1];
                r = f.hypot(g);
                work[i] = r;
                if r == 0.0 {
                    // Deflation happened mid-sweep; restart this l.
                    d[i] -= p;
                    work[m] = 0.0;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i] - p;
                r = (d[i1] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i] = g + p;
                g = c * r - b;
                if let Some(zz) = z.as_deref_mut() {
                    for k in 0..zz.rows {
                        let zi = zz.get(k, i);
                        let zi1 = zz.get(k, i1);
                        zz.set(k, i, s * zi1 + c * zi);
                        zz.set(k, i1, c * zi1 - s * zi);
                    }
                }
                i -= 1;
            }
            if i > l {
                continue; // mid-sweep deflation: retry
            }
            d[l] -= p;
            work[l] = g;
            work[m] = 0.0;
        }
    }
    Ok(())
}

//! Matrix exponential by degree-13 Padé approximation with scaling and
//! squaring. The scaling count comes from the 1-norm against the standard
//! degree-13 threshold; the Padé solve uses the module's partial-pivot LU.

use super::{lu_solve, Complex64, ComplexMatrix, MatError};

/// 1-norm threshold at which the degree-13 approximant holds full double
/// accuracy without scaling.
const THETA_13: f64 = 5.371920351148152;

/// Padé-13 numerator coefficients (denominator uses alternating signs).
const B: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

/// `exp(A)` for a square complex matrix.
///
/// For anti-Hermitian input the result is unitary to the defect documented by
/// the caller's tests (the approximant preserves the group structure up to
/// rounding).
pub fn matrix_exponential(a: &ComplexMatrix) -> Result<ComplexMatrix, MatError> {
    assert!(a.is_square(), "matrix_exponential: square matrix required");
    let n = a.rows;
    let norm = a.norm_one();
    let s = if norm > THETA_13 {
        (norm / THETA_13).log2().ceil().max(0.0) as u32
    } else {
        0
    };
    let scaled = a.scale(Complex64::new(1.0 / f64::powi(2.0, s as i32), 0.0));

    let id = ComplexMatrix::identity(n);
    let a2 = scaled.mul(&scaled);
    let a4 = a2.mul(&a2);
    let a6 = a4.mul(&a2);

    let r = |x: f64| Complex64::new(x, 0.0);
    // U = A · (A6(b13 A6 + b11 A4 + b9 A2) + b7 A6 + b5 A4 + b3 A2 + b1 I)
    let inner_u = a6
        .scale(r(B[13]))
        .add(&a4.scale(r(B[11])))
        .add(&a2.scale(r(B[9])));
    let u_poly = a6
        .mul(&inner_u)
        .add(&a6.scale(r(B[7])))
        .add(&a4.scale(r(B[5])))
        .add(&a2.scale(r(B[3])))
        .add(&id.scale(r(B[1])));
    let u = scaled.mul(&u_poly);
    // V = A6(b12 A6 + b10 A4 + b8 A2) + b6 A6 + b4 A4 + b2 A2 + b0 I
    let inner_v = a6
        .scale(r(B[12]))
        .add(&a4.scale(r(B[10])))
        .add(&a2.scale(r(B[8])));
    let v = a6
        .mul(&inner_v)
        .add(&a6.scale(r(B[6])))
        .add(&a4.scale(r(B[4])))
        .add(&a2.scale(r(B[2])))
        .add(&id.scale(r(B[0])));

    // (V − U) X = (V + U)
    let mut x = lu_solve(&v.sub(&u), &v.add(&u))?;
    for _ in 0..s {
        x = x.mul(&x);
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn exponential_of_zero_is_identity() {
        let z = ComplexMatrix::zeros(4, 4);
        let e = matrix_exponential(&z).unwrap();
        assert!(e.sub(&ComplexMatrix::identity(4)).max_abs() < 1e-15);
    }

    #[test]
    fn diagonal_exponential_matches_scalar_exp() {
        let d = ComplexMatrix::diagonal(&[c(0.5, 1.0), c(-2.0, 0.3), c(0.0, -3.1)]);
        let e = matrix_exponential(&d).unwrap();
        for (i, &z) in [c(0.5, 1.0), c(-2.0, 0.3), c(0.0, -3.1)].iter().enumerate() {
            let expect = z.exp();
            assert!((e.get(i, i) - expect).norm() < 1e-13);
        }
        assert!(e.get(0, 1).norm() < 1e-15);
    }

    #[test]
    fn nilpotent_exponential_truncates_exactly() {
        // N = single superdiagonal entry: exp(N) = I + N.
        let mut n = ComplexMatrix::zeros(3, 3);
        n.set(0, 1, c(2.0, -1.0));
        let e = matrix_exponential(&n).unwrap();
        let expect = ComplexMatrix::identity(3).add(&n);
        assert!(e.sub(&expect).max_abs() < 1e-14);
    }

    #[test]
    fn antihermitian_exponential_is_unitary() {
        // G = i H for Hermitian H; exp(G) must be unitary.
        let mut g = ComplexMatrix::zeros(5, 5);
        for i in 0..5 {
            g.set(i, i, c(0.0, 0.9 * (i as f64) - 2.0));
            for j in i + 1..5 {
                let z = c(0.4 * ((i + 2 * j) as f64).sin(), 0.7 * ((3 * i + j) as f64).cos());
                g.set(i, j, z);
                g.set(j, i, -z.conj());
            }
        }
        let e = matrix_exponential(&g).unwrap();
        assert!(e.unitary_defect() < 1e-9, "defect {}", e.unitary_defect());
    }

    #[test]
    fn large_norm_input_scales_and_squares() {
        // exp(t K) for rotation generator K = [[0,-t],[t,0]] is a rotation.
        let t = 40.0_f64;
        let mut k = ComplexMatrix::zeros(2, 2);
        k.set(0, 1, c(-t, 0.0));
        k.set(1, 0, c(t, 0.0));
        let e = matrix_exponential(&k).unwrap();
        assert!((e.get(0, 0).re - t.cos()).abs() < 1e-10);
        assert!((e.get(1, 0).re - t.sin()).abs() < 1e-10);
    }

    #[test]
    fn exponential_residual_against_series() {
        // Moderate-norm dense matrix: compare with a long Taylor sum.
        let a = ComplexMatrix::from_fn(4, 4, |i, j| {
            c(0.2 * ((i * 3 + j) as f64).sin(), 0.15 * ((i + 4 * j) as f64).cos())
        });
        let e = matrix_exponential(&a).unwrap();
        let mut series = ComplexMatrix::identity(4);
        let mut term = ComplexMatrix::identity(4);
        for k in 1..40 {
            term = term.mul(&a).scale(c(1.0 / k as f64, 0.0));
            series = series.add(&term);
        }
        assert!(e.sub(&series).max_abs() < 1e-10);
    }
}

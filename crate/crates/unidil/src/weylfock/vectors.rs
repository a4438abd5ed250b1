//! The vector systems whose Weyl operators realize two phase matrices at
//! once: d vectors x_k encoding Θ, orthogonal-direction corrections y_k
//! encoding the difference to Θ', and their concatenations z_k.

use super::FockError;
use crate::matcore::{inner, vec_norm, Complex64, ComplexMatrix};
use crate::rotreps::ThetaMatrix;

/// Tolerance on the realized phase identities; the constructions below are
/// a triangular solve and an eigendecomposition square root, both accurate
/// to a comfortable margin under this.
pub const VECTOR_TOL: f64 = 1e-10;

/// d vectors x_k ∈ C^d with 2·Im⟨x_ℓ, x_k⟩ = θ_{k,ℓ}, corrections
/// y_k ∈ C^d with ‖y_k‖² = ½‖Θ' − Θ‖, and z_k = x_k ⊕ y_k realizing Θ'.
/// Inner products are linear in the first argument throughout.
#[derive(Clone, Debug)]
pub struct VectorSystem {
    pub x: Vec<Vec<Complex64>>,
    pub y: Vec<Vec<Complex64>>,
    pub z: Vec<Vec<Complex64>>,
    pub theta: ThetaMatrix,
    pub theta_prime: ThetaMatrix,
}

/// Worst-case violations of the defining identities of a [`VectorSystem`].
#[derive(Clone, Copy, Debug)]
pub struct VectorDefects {
    /// max |2·Im⟨x_ℓ, x_k⟩ − θ_{k,ℓ}|.
    pub x_phases: f64,
    /// max |2·Im⟨z_ℓ, z_k⟩ − θ'_{k,ℓ}|.
    pub z_phases: f64,
    /// max |‖y_k‖² − ½‖Θ'−Θ‖|.
    pub y_norms: f64,
    /// max |(z_k)_i − (x_k ⊕ y_k)_i|.
    pub concatenation: f64,
}

impl VectorDefects {
    pub fn worst(&self) -> f64 {
        self.x_phases.max(self.z_phases).max(self.y_norms).max(self.concatenation)
    }
}

impl VectorSystem {
    pub fn dim(&self) -> usize {
        self.x.len()
    }

    pub fn defects(&self) -> VectorDefects {
        let d = self.dim();
        let half_dist = 0.5 * self.theta_prime.sub(&self.theta).spectral_norm();
        let mut out = VectorDefects {
            x_phases: 0.0,
            z_phases: 0.0,
            y_norms: 0.0,
            concatenation: 0.0,
        };
        for k in 0..d {
            for l in 0..d {
                let xp = 2.0 * inner(&self.x[l], &self.x[k]).im - self.theta.get(k, l);
                let zp = 2.0 * inner(&self.z[l], &self.z[k]).im - self.theta_prime.get(k, l);
                out.x_phases = out.x_phases.max(xp.abs());
                out.z_phases = out.z_phases.max(zp.abs());
            }
            out.y_norms = out
                .y_norms
                .max((vec_norm(&self.y[k]).powi(2) - half_dist).abs());
            let concat: Vec<Complex64> =
                self.x[k].iter().chain(&self.y[k]).copied().collect();
            let dev = concat
                .iter()
                .zip(&self.z[k])
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            out.concatenation = out.concatenation.max(dev);
        }
        out
    }
}

/// Builds the vector system for a pair of antisymmetric phase matrices.
///
/// The x_k are e_k plus a correction in span{e₁,…,e_{k−1}} found by forward
/// substitution on the unit lower-triangular system ⟨x_ℓ, x̃_k⟩ = (i/2)θ_{k,ℓ};
/// the y_k are the columns of the eigendecomposition square root of the
/// positive semidefinite matrix ½‖Θ'−Θ‖·I + (i/2)(Θ'−Θ). A difference
/// matrix whose symmetrization fails positivity beyond rounding is rejected.
pub fn construct_vectors(
    theta: &ThetaMatrix,
    theta_prime: &ThetaMatrix,
) -> Result<VectorSystem, FockError> {
    let d = theta.dim();
    if theta_prime.dim() != d {
        return Err(FockError::BadContext(format!(
            "phase matrices of sizes {d} and {}",
            theta_prime.dim()
        )));
    }

    // x_k = e_k + conj(w) with the triangular system M w = b, where row ℓ
    // of M is x_ℓ on the first k−1 coordinates.
    let mut x: Vec<Vec<Complex64>> = Vec::with_capacity(d);
    for k in 0..d {
        let mut xk = vec![Complex64::new(0.0, 0.0); d];
        xk[k] = Complex64::new(1.0, 0.0);
        let mut w = vec![Complex64::new(0.0, 0.0); k];
        for l in 0..k {
            let b = Complex64::new(0.0, 0.5) * theta.get(k, l);
            let partial: Complex64 = (0..l).map(|i| x[l][i] * w[i]).sum();
            // Unit diagonal: (x_ℓ)_ℓ = 1.
            w[l] = b - partial;
        }
        for (i, wi) in w.iter().enumerate() {
            xk[i] = wi.conj();
        }
        x.push(xk);
    }

    let delta = theta_prime.sub(theta);
    let half_norm = 0.5 * delta.spectral_norm();
    let target = ComplexMatrix::from_fn(d, d, |i, j| {
        let diag = if i == j { half_norm } else { 0.0 };
        Complex64::new(diag, 0.5 * delta.get(i, j))
    });
    let root = target.psd_sqrt(VECTOR_TOL)?;
    let y: Vec<Vec<Complex64>> = (0..d)
        .map(|k| (0..d).map(|i| root.get(i, k)).collect())
        .collect();

    let z = x
        .iter()
        .zip(&y)
        .map(|(xk, yk)| xk.iter().chain(yk).copied().collect())
        .collect();

    let sys = VectorSystem {
        x,
        y,
        z,
        theta: theta.clone(),
        theta_prime: theta_prime.clone(),
    };
    let defects = sys.defects();
    debug_assert!(
        defects.worst() < VECTOR_TOL,
        "construction defects {defects:?}"
    );
    Ok(sys)
}

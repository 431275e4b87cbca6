//! Spin transformations `S = diag(lambda, (lambda^dag)^-1)` with
//! `det lambda = 1`, and the Lorentz matrices they induce on the currents.

use nalgebra::{Matrix2, Matrix4};
use num_complex::Complex64;

use crate::algebra::{block_diag, pauli, ComplexMatrix4, Spinor};
use crate::bilinears::currents;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SpinTransform {
    pub lambda: Matrix2<Complex64>,
    pub matrix: ComplexMatrix4,
}

fn check_axis(axis: usize) -> Result<usize> {
    if (1..=3).contains(&axis) {
        Ok(axis - 1)
    } else {
        Err(Error::InvalidParameter(format!("axis must be 1, 2 or 3, got {axis}")))
    }
}

/// `exp(c * tau)` for a Pauli matrix `tau` (uses `tau^2 = 1`).
fn pauli_exp(c: Complex64, tau: &Matrix2<Complex64>) -> Matrix2<Complex64> {
    Matrix2::identity() * c.cosh() + tau * c.sinh()
}

impl SpinTransform {
    /// Builds the transform from `lambda`; fails if `det lambda != 1`.
    pub fn from_lambda(lambda: Matrix2<Complex64>) -> Result<Self> {
        let det = lambda.determinant();
        if (det - Complex64::new(1.0, 0.0)).norm() > 1e-10 {
            return Err(Error::InvalidParameter(format!("det lambda = {det}, expected 1")));
        }
        let inv_adj = lambda
            .adjoint()
            .try_inverse()
            .ok_or_else(|| Error::NonInvertible("lambda".into()))?;
        Ok(Self { lambda, matrix: block_diag(&lambda, &inv_adj) })
    }

    /// Rotation by `angle` about coordinate axis 1, 2 or 3.
    pub fn rotation(angle: f64, axis: usize) -> Result<Self> {
        let i = check_axis(axis)?;
        Self::from_lambda(pauli_exp(Complex64::new(0.0, -0.5 * angle), &pauli()[i]))
    }

    /// Boost with the given rapidity along coordinate axis 1, 2 or 3.
    pub fn boost(rapidity: f64, axis: usize) -> Result<Self> {
        let i = check_axis(axis)?;
        Self::from_lambda(pauli_exp(Complex64::new(-0.5 * rapidity, 0.0), &pauli()[i]))
    }

    /// General element `lambda = [[a, b], [c, d]]` with `d = (1 + b c) / a`.
    pub fn from_parameters(a: Complex64, b: Complex64, c: Complex64) -> Result<Self> {
        if a.norm() == 0.0 {
            return Err(Error::InvalidParameter("leading parameter must be nonzero".into()));
        }
        let d = (Complex64::new(1.0, 0.0) + b * c) / a;
        Self::from_lambda(Matrix2::new(a, b, c, d))
    }

    /// `self` applied after `first`.
    pub fn compose(&self, first: &SpinTransform) -> SpinTransform {
        SpinTransform {
            lambda: self.lambda * first.lambda,
            matrix: self.matrix * first.matrix,
        }
    }

    pub fn apply(&self, psi: &Spinor) -> Spinor {
        self.matrix * psi
    }

    pub fn inverse(&self) -> SpinTransform {
        let l = self.lambda;
        let inv = Matrix2::new(l[(1, 1)], -l[(0, 1)], -l[(1, 0)], l[(0, 0)]);
        let inv_adj = l.adjoint();
        SpinTransform { lambda: inv, matrix: block_diag(&inv, &inv_adj) }
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        let d = self.matrix.adjoint() * self.matrix - ComplexMatrix4::identity();
        d.iter().all(|z| z.norm() <= tol)
    }
}

fn probe_spinors() -> [Spinor; 4] {
    let z = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let ih = Complex64::new(0.0, std::f64::consts::FRAC_1_SQRT_2);
    [
        Spinor::new(one, z, z, z),
        Spinor::new(z, one, z, z),
        Spinor::new(h, h, z, z),
        Spinor::new(h, ih, z, z),
    ]
}

/// Lorentz matrix `Lambda` with `j(S psi) = Lambda j(psi)`, obtained by
/// transforming four probe spinors whose currents span spacetime.
pub fn induced_lorentz_matrix(t: &SpinTransform) -> Result<Matrix4<f64>> {
    let probes = probe_spinors();
    let mut before = Matrix4::zeros();
    let mut after = Matrix4::zeros();
    for (k, p) in probes.iter().enumerate() {
        before.set_column(k, &currents(p).0);
        after.set_column(k, &currents(&t.apply(p)).0);
    }
    let inv = before
        .try_inverse()
        .ok_or_else(|| Error::NonInvertible("probe current matrix".into()))?;
    Ok(after * inv)
}

/// Spin transform covering a proper orthochronous Lorentz matrix.
///
/// Uses `sum_{mu,nu} Lambda^mu_nu s_mu B s_nu = 2 tr(B lambda^dag) lambda`
/// with `s = (1, tau)`, choosing `B` among `1, tau_i` to keep the trace away
/// from zero. The sign is fixed by `Re tr lambda >= 0`.
pub fn spin_from_lorentz(lam: &Matrix4<f64>) -> Result<SpinTransform> {
    let tau = pauli();
    let s = [Matrix2::identity(), tau[0], tau[1], tau[2]];
    let mut best: Option<(Matrix2<Complex64>, Complex64)> = None;
    for b in &s {
        let mut m = Matrix2::zeros();
        for mu in 0..4 {
            for nu in 0..4 {
                let c = lam[(mu, nu)];
                if c != 0.0 {
                    m += s[mu] * b * s[nu] * Complex64::from(c);
                }
            }
        }
        let det = m.determinant();
        if best.as_ref().is_none_or(|(_, d)| det.norm() > d.norm()) {
            best = Some((m, det));
        }
    }
    let (m, det) = best.expect("four candidates");
    if det.norm() < 1e-24 {
        return Err(Error::NonInvertible("not a proper Lorentz matrix".into()));
    }
    let mut lambda = m / det.sqrt();
    if lambda.trace().re < 0.0 {
        lambda = -lambda;
    }
    SpinTransform::from_lambda(lambda)
}

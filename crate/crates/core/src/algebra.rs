//! Dirac matrices in the chiral representation.
//!
//! The spinor is `(u_L, d_L, u_R, d_R)`. `alpha^0` is the identity and
//! `alpha^i = diag(tau_i, -tau_i)`; the `rho` matrices act on the chirality
//! index and the `sigma` matrices on spin, so every `rho` commutes with every
//! `sigma`.

use nalgebra::{Matrix2, Matrix4, Vector4};
use num_complex::Complex64;

use crate::report::IdentityReport;

pub type ComplexMatrix4 = Matrix4<Complex64>;
pub type Spinor = Vector4<Complex64>;

pub const METRIC: [f64; 4] = [1.0, -1.0, -1.0, -1.0];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, PartialEq)]
pub struct DiracBasis {
    pub alpha: [ComplexMatrix4; 4],
    pub rho: [ComplexMatrix4; 3],
    pub sigma: [ComplexMatrix4; 3],
    pub beta: ComplexMatrix4,
    pub gamma5: ComplexMatrix4,
    pub charge_conj: ComplexMatrix4,
    pub eta: Matrix4<f64>,
}

/// Pauli matrices `tau_1, tau_2, tau_3`.
pub fn pauli() -> [Matrix2<Complex64>; 3] {
    [
        Matrix2::new(ZERO, ONE, ONE, ZERO),
        Matrix2::new(ZERO, -I, I, ZERO),
        Matrix2::new(ONE, ZERO, ZERO, -ONE),
    ]
}

pub fn block_diag(a: &Matrix2<Complex64>, b: &Matrix2<Complex64>) -> ComplexMatrix4 {
    let mut m = ComplexMatrix4::zeros();
    m.fixed_view_mut::<2, 2>(0, 0).copy_from(a);
    m.fixed_view_mut::<2, 2>(2, 2).copy_from(b);
    m
}

pub fn block_offdiag(upper: &Matrix2<Complex64>, lower: &Matrix2<Complex64>) -> ComplexMatrix4 {
    let mut m = ComplexMatrix4::zeros();
    m.fixed_view_mut::<2, 2>(0, 2).copy_from(upper);
    m.fixed_view_mut::<2, 2>(2, 0).copy_from(lower);
    m
}

pub fn build_dirac_basis() -> DiracBasis {
    let tau = pauli();
    let id2 = Matrix2::<Complex64>::identity();
    let alpha = [
        ComplexMatrix4::identity(),
        block_diag(&tau[0], &(-tau[0])),
        block_diag(&tau[1], &(-tau[1])),
        block_diag(&tau[2], &(-tau[2])),
    ];
    let rho = [
        block_offdiag(&id2, &id2),
        block_offdiag(&(-id2 * I), &(id2 * I)),
        block_diag(&id2, &(-id2)),
    ];
    let sigma = [
        block_diag(&tau[0], &tau[0]),
        block_diag(&tau[1], &tau[1]),
        block_diag(&tau[2], &tau[2]),
    ];
    let charge_conj = rho[1] * sigma[1];
    DiracBasis {
        alpha,
        beta: rho[0],
        gamma5: -rho[2],
        charge_conj,
        rho,
        sigma,
        eta: Matrix4::from_diagonal(&Vector4::from(METRIC)),
    }
}

pub fn anticommutator(a: &ComplexMatrix4, b: &ComplexMatrix4) -> ComplexMatrix4 {
    a * b + b * a
}

pub fn commutator(a: &ComplexMatrix4, b: &ComplexMatrix4) -> ComplexMatrix4 {
    a * b - b * a
}

/// Largest entry modulus.
pub fn max_abs(m: &ComplexMatrix4) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Three-index Levi-Civita symbol on `{0, 1, 2}`.
pub fn levi_civita3(i: usize, j: usize, k: usize) -> f64 {
    match (i, j, k) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
        _ => 0.0,
    }
}

/// Four-index Levi-Civita symbol with upper indices, `eps^{0123} = +1`.
pub fn levi_civita4(a: usize, b: usize, c: usize, d: usize) -> f64 {
    let idx = [a, b, c, d];
    for i in 0..4 {
        if idx[i] > 3 {
            return 0.0;
        }
        for j in (i + 1)..4 {
            if idx[i] == idx[j] {
                return 0.0;
            }
        }
    }
    let mut sign = 1.0;
    for i in 0..4 {
        for j in (i + 1)..4 {
            if idx[i] > idx[j] {
                sign = -sign;
            }
        }
    }
    sign
}

/// Checks the defining relations of a basis and reports the worst violation
/// of each. For the built-in basis every violation is exactly zero because
/// all entries and products are small dyadic rationals.
pub fn verify_basis(basis: &DiracBasis) -> IdentityReport {
    let mut report = IdentityReport::new();
    let tau = pauli();
    let id = ComplexMatrix4::identity();

    for a in 0..4 {
        for b in 0..4 {
            let lhs = basis.alpha[a] * basis.beta * basis.alpha[b]
                + basis.alpha[b] * basis.beta * basis.alpha[a];
            let rhs = basis.beta * Complex64::from(2.0 * basis.eta[(a, b)]);
            report.record("alpha_beta_anticommutator", max_abs(&(lhs - rhs)), &[a, b]);
        }
        let herm = basis.alpha[a] - basis.alpha[a].adjoint();
        report.record("alpha_hermitian", max_abs(&herm), &[a]);
    }

    report.record("alpha_block_structure", max_abs(&(basis.alpha[0] - id)), &[0]);
    for i in 0..3 {
        let expected = block_diag(&tau[i], &(-tau[i]));
        report.record(
            "alpha_block_structure",
            max_abs(&(basis.alpha[i + 1] - expected)),
            &[i + 1],
        );
    }

    for i in 0..3 {
        for j in 0..3 {
            let delta = if i == j { 1.0 } else { 0.0 };
            let mut rhs_rho = id * Complex64::from(delta);
            let mut rhs_sigma = id * Complex64::from(delta);
            for k in 0..3 {
                let e = levi_civita3(i, j, k);
                if e != 0.0 {
                    rhs_rho += basis.rho[k] * (I * e);
                    rhs_sigma += basis.sigma[k] * (I * e);
                }
            }
            report.record(
                "rho_pauli_algebra",
                max_abs(&(basis.rho[i] * basis.rho[j] - rhs_rho)),
                &[i + 1, j + 1],
            );
            report.record(
                "sigma_pauli_algebra",
                max_abs(&(basis.sigma[i] * basis.sigma[j] - rhs_sigma)),
                &[i + 1, j + 1],
            );
            report.record(
                "rho_sigma_commute",
                max_abs(&commutator(&basis.rho[i], &basis.sigma[j])),
                &[i + 1, j + 1],
            );
        }
    }

    let triple = basis.alpha[1] * basis.alpha[2] * basis.alpha[3] * (-I);
    report.record("rho3_triple_product", max_abs(&(basis.rho[2] - triple)), &[]);
    for i in 0..3 {
        let s = basis.rho[2] * basis.alpha[i + 1];
        report.record("sigma_from_alpha", max_abs(&(basis.sigma[i] - s)), &[i + 1]);
    }
    report.record("beta_is_rho1", max_abs(&(basis.beta - basis.rho[0])), &[]);
    report.record("gamma5_is_minus_rho3", max_abs(&(basis.gamma5 + basis.rho[2])), &[]);
    report.record(
        "charge_conj_structure",
        max_abs(&(basis.charge_conj - basis.rho[1] * basis.sigma[1])),
        &[],
    );
    let cc = basis.charge_conj * basis.charge_conj.map(|z| z.conj());
    report.record("charge_conj_involution", max_abs(&(cc - id)), &[]);
    report
}

/// Charge conjugate `C psi*`.
pub fn charge_conjugate(basis: &DiracBasis, psi: &Spinor) -> Spinor {
    basis.charge_conj * psi.map(|z| z.conj())
}

/// Euclidean norm of a spinor.
pub fn spinor_norm(psi: &Spinor) -> f64 {
    psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `psi^dagger m psi`.
pub fn sandwich(psi: &Spinor, m: &ComplexMatrix4) -> Complex64 {
    psi.dotc(&(m * psi))
}

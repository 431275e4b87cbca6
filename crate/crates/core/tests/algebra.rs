use nalgebra::Matrix2;
use num_complex::Complex64;
use spingeo_core::algebra::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Builds a 4x4 matrix from rows written out by hand.
fn m4(rows: [[Complex64; 4]; 4]) -> ComplexMatrix4 {
    ComplexMatrix4::from_fn(|i, j| rows[i][j])
}

#[test]
fn alpha_blocks_are_pauli_matrices() {
    let b = build_dirac_basis();
    let z = c(0.0, 0.0);
    let one = c(1.0, 0.0);
    let alpha1 = m4([[z, one, z, z], [one, z, z, z], [z, z, z, -one], [z, z, -one, z]]);
    assert_eq!(b.alpha[1], alpha1);
    assert_eq!(b.alpha[0], ComplexMatrix4::identity());
    let tau = pauli();
    assert_eq!(b.alpha[3], block_diag(&tau[2], &(-tau[2])));
}

#[test]
fn charge_conjugation_matrix_is_offdiagonal_tau2() {
    let b = build_dirac_basis();
    let tau2 = pauli()[1];
    let i = c(0.0, 1.0);
    let expected = block_offdiag(&(tau2 * -i), &(tau2 * i));
    assert_eq!(b.charge_conj, expected);
    // C C* = 1
    let cc = b.charge_conj * b.charge_conj.map(|z| z.conj());
    assert_eq!(cc, ComplexMatrix4::identity());
}

#[test]
fn time_component_anticommutator_is_twice_beta() {
    let b = build_dirac_basis();
    let lhs = b.alpha[0] * b.beta * b.alpha[0] + b.alpha[0] * b.beta * b.alpha[0];
    assert_eq!(lhs, b.beta * c(2.0, 0.0));
}

#[test]
fn anticommutator_examples() {
    let b = build_dirac_basis();
    assert_eq!(anticommutator(&b.sigma[0], &b.sigma[0]), ComplexMatrix4::identity() * c(2.0, 0.0));
    let rho3_sigma2 = b.rho[2] * b.sigma[1];
    assert_eq!(anticommutator(&b.rho[2], &b.sigma[1]), rho3_sigma2 * c(2.0, 0.0));
    for a in 0..4 {
        for bb in 0..4 {
            if a != bb {
                let x = b.alpha[a] * b.beta;
                let y = b.alpha[bb];
                // alpha^a beta alpha^b + alpha^b beta alpha^a = 0 off the diagonal
                let s = x * y + b.alpha[bb] * b.beta * b.alpha[a];
                assert_eq!(max_abs(&s), 0.0, "a={a} b={bb}");
            }
        }
    }
}

#[test]
fn builtin_basis_verifies_exactly() {
    let r = verify_basis(&build_dirac_basis());
    assert!(!r.checks.is_empty());
    for check in &r.checks {
        assert_eq!(check.max_violation, 0.0, "{}", check.name);
    }
}

#[test]
fn swapped_alpha_labels_are_flagged() {
    let mut b = build_dirac_basis();
    b.alpha.swap(1, 2);
    let r = verify_basis(&b);
    let block = r.get("alpha_block_structure").unwrap();
    assert!(block.max_violation >= 1.0);
    assert!(block.worst_index == vec![1] || block.worst_index == vec![2]);
    assert!(r.violation("rho3_triple_product") >= 1.0);
    // the pairwise relation is symmetric in the labels and cannot see the swap
    assert_eq!(r.violation("alpha_beta_anticommutator"), 0.0);
}

#[test]
fn negated_rho2_breaks_the_rho_algebra() {
    let mut b = build_dirac_basis();
    b.rho[1] = -b.rho[1];
    let r = verify_basis(&b);
    assert!(r.violation("rho_pauli_algebra") >= 1.0);
    assert_eq!(r.violation("sigma_pauli_algebra"), 0.0);
}

#[test]
fn levi_civita_signs() {
    assert_eq!(levi_civita4(0, 1, 2, 3), 1.0);
    assert_eq!(levi_civita4(1, 0, 2, 3), -1.0);
    assert_eq!(levi_civita4(1, 2, 3, 0), -1.0);
    assert_eq!(levi_civita4(0, 0, 2, 3), 0.0);
    assert_eq!(levi_civita3(2, 0, 1), 1.0);
    assert_eq!(levi_civita3(2, 1, 0), -1.0);
}

#[test]
fn charge_conjugate_matches_components() {
    let b = build_dirac_basis();
    let psi = Spinor::new(c(1.0, 2.0), c(-0.5, 0.3), c(0.2, -1.0), c(0.7, 0.1));
    let cp = charge_conjugate(&b, &psi);
    // C psi* = (-d_R*, u_R*, d_L*, -u_L*)
    let expected = Spinor::new(-psi[3].conj(), psi[2].conj(), psi[1].conj(), -psi[0].conj());
    assert!((cp - expected).norm() < 1e-15);
    assert!((charge_conjugate(&b, &cp) - psi).norm() < 1e-15);
}

#[test]
fn pauli_matrices_square_to_one() {
    for t in pauli() {
        assert_eq!(t * t, Matrix2::identity());
    }
}

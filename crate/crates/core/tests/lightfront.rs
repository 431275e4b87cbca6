use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4, PI};

use nalgebra::Vector4;
use num_complex::Complex64;
use proptest::prelude::*;
use spingeo_core::algebra::{build_dirac_basis, charge_conjugate, spinor_norm, Spinor};
use spingeo_core::bilinears::{compute_bilinears, minkowski_dot};
use spingeo_core::lightfront::*;
use spingeo_core::suites::majorana_spinor;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn polar(m: f64, phase: f64) -> Complex64 {
    Complex64::from_polar(m, phase)
}

/// Front spinor with every modulus 1/2 whose phases satisfy the front relation.
fn front_spinor() -> Spinor {
    Spinor::new(polar(0.5, 0.0), polar(0.5, FRAC_PI_4), polar(0.5, FRAC_PI_2), polar(0.5, 0.75 * PI + PI))
}

#[test]
fn classification_fixtures() {
    let left = Spinor::new(c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0));
    let f = classify(&left);
    assert_eq!(f.kind, FrontKind::LightFrontLeft);
    assert!(!f.both_chiralities);
    let s = compute_bilinears(&left);
    assert_eq!(s.left, Vector4::new(1.0, 0.0, 0.0, 1.0));
    assert_eq!(s.right, Vector4::zeros());

    let h = FRAC_1_SQRT_2;
    let rest = Spinor::new(c(h, 0.0), c(0.0, 0.0), c(h, 0.0), c(0.0, 0.0));
    let f = classify(&rest);
    assert_eq!(f.kind, FrontKind::Regular);
    assert!((f.density_sq - 1.0).abs() <= 1e-15);
    assert!(f.angle_limit.is_none());

    assert_eq!(classify(&Spinor::zeros()).kind, FrontKind::Zero);
}

#[test]
fn right_handed_front() {
    let right = Spinor::new(c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 2.0));
    assert_eq!(classify(&right).kind, FrontKind::LightFrontRight);
}

#[test]
fn phase_relation_on_a_constructed_front() {
    let pd = phase_decomposition(&front_spinor());
    assert!(pd.phase_residual.unwrap() <= 1e-12);
    assert!(pd.modulus_residual.abs() <= 1e-12);
    let f = classify(&front_spinor());
    assert!(f.kind != FrontKind::Regular && f.both_chiralities);
}

#[test]
fn real_positive_spinor_is_off_the_front() {
    let psi = Spinor::from_element(c(0.5, 0.0));
    let pd = phase_decomposition(&psi);
    assert!((pd.phase_residual.unwrap() - PI).abs() <= 1e-15);
    assert_eq!(classify(&psi).kind, FrontKind::Regular);
}

#[test]
fn vanishing_component_masks_its_phase() {
    let psi = Spinor::new(c(0.0, 0.0), c(0.3, 0.2), c(0.5, -0.1), c(0.1, 0.4));
    let pd = phase_decomposition(&psi);
    assert!(pd.phases[0].is_none());
    assert!(pd.phases[1..].iter().all(|p| p.is_some()));
    assert!(pd.phase_residual.is_none());
    let expected = psi[2].norm() * 0.0 - psi[3].norm() * psi[1].norm();
    assert!((pd.modulus_residual - expected).abs() <= 1e-15);
}

#[test]
fn reconstruction_reproduces_the_spinor() {
    let psi = Spinor::new(c(0.3, -0.7), c(-0.2, 0.1), c(0.9, 0.4), c(-0.5, -0.5));
    let pd = phase_decomposition(&psi);
    for i in 0..4 {
        let z = polar(pd.moduli[i], pd.phases[i].unwrap());
        assert!((z - psi[i]).norm() <= 1e-12);
    }
}

#[test]
fn angle_limit_matches_the_density_ratio_near_the_front() {
    let front = front_spinor();
    let limit = classify(&front).angle_limit.unwrap();
    let alt = limit.alternate.expect("modulus difference vanishes on the front");
    // move off the front by growing or shrinking |u_R|
    let mut seen = Vec::new();
    for eps in [1e-6, -1e-6] {
        let mut psi = front;
        psi[2] *= 1.0 + eps;
        let s = compute_bilinears(&psi);
        assert!(s.density_sq > 0.0);
        seen.push(s.pseudoscalar / s.density_sq.sqrt());
    }
    for v in &seen {
        let d = (v - limit.sin_angle).abs().min((v - alt).abs());
        assert!(d <= 1e-9, "{v} vs {limit:?}");
    }
    assert!((seen[0] - seen[1]).abs() > 1.0);
}

#[test]
fn phase_forms_agree_with_bilinears() {
    for i in 0..100 {
        let psi = spingeo_core::sampling::random_unit_spinor(8, i);
        let pd = phase_decomposition(&psi);
        let s = compute_bilinears(&psi);
        assert!((pd.pseudoscalar - s.pseudoscalar).abs() <= 1e-10);
        assert!((pd.scalar - s.scalar).abs() <= 1e-10);
    }
}

#[test]
fn majorana_fixtures() {
    let h = FRAC_1_SQRT_2;
    let a = Spinor::new(c(h, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-h, 0.0));
    let r = majorana_check(&a);
    assert!(r.is_majorana && r.residual == 0.0);
    assert_eq!(r.axial, Vector4::zeros());
    assert!((r.vector - Vector4::new(1.0, 0.0, 0.0, 1.0)).amax() <= 1e-15);

    let b = Spinor::new(c(0.0, 0.0), c(h, 0.0), c(h, 0.0), c(0.0, 0.0));
    let r = majorana_check(&b);
    assert!(r.is_majorana);
    assert!(r.axial.amax() <= 1e-15);

    let rest = Spinor::new(c(h, 0.0), c(0.0, 0.0), c(h, 0.0), c(0.0, 0.0));
    let r = majorana_check(&rest);
    assert!(!r.is_majorana);
    assert!((r.residual - 1.0).abs() <= 1e-15);
}

#[test]
fn thousand_majorana_spinors_are_future_lightlike() {
    let basis = build_dirac_basis();
    for i in 0..1000 {
        let psi = majorana_spinor(42, i);
        let n = spinor_norm(&psi);
        let r = majorana_check(&psi);
        assert!(r.is_majorana);
        assert_eq!(charge_conjugate(&basis, &psi), psi);
        let s = compute_bilinears(&psi);
        assert!(s.density_sq <= 1e-12 * n.powi(4));
        assert!(s.scalar.abs() <= 1e-12 && s.pseudoscalar.abs() <= 1e-12);
        assert!(r.axial.amax() <= 1e-12);
        assert!(minkowski_dot(&r.vector, &r.vector).abs() <= 1e-12 * n.powi(4));
        assert!(r.vector[0] >= 0.0);
        assert!(classify(&psi).kind != FrontKind::Regular);
    }
}

fn arb_spinor() -> impl Strategy<Value = Spinor> {
    prop::array::uniform8(-1.0f64..1.0).prop_map(|v| {
        Spinor::new(c(v[0], v[1]), c(v[2], v[3]), c(v[4], v[5]), c(v[6], v[7]))
    })
}

proptest! {
    #[test]
    fn classification_ignores_global_phase(psi in arb_spinor(), gamma in -3.2f64..3.2) {
        let a = classify(&psi);
        let b = classify(&(psi * polar(1.0, gamma)));
        prop_assert_eq!(a.kind, b.kind);
        prop_assert!((a.density_sq - b.density_sq).abs() <= 1e-12);
    }

    #[test]
    fn majorana_part_satisfies_the_condition(psi in arb_spinor()) {
        let m = majorana_part(&psi);
        prop_assume!(spinor_norm(&m) > 1e-3);
        prop_assert!(majorana_check(&m).is_majorana);
        prop_assert_eq!(classify(&m).kind == FrontKind::Regular, false);
    }

    #[test]
    fn wrap_angle_stays_in_range(x in -100.0f64..100.0) {
        let w = wrap_angle(x);
        prop_assert!(w > -PI && w <= PI);
        let turns = (x - w) / (2.0 * PI);
        prop_assert!((turns - turns.round()).abs() <= 1e-9);
    }
}

use nalgebra::{Matrix2, Matrix4, Vector4};
use num_complex::Complex64;
use proptest::prelude::*;
use spingeo_core::algebra::{ComplexMatrix4, Spinor, METRIC};
use spingeo_core::bilinears::{compute_bilinears, currents, minkowski_dot};
use spingeo_core::lightfront::wrap_angle;
use spingeo_core::lorentz::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn eta() -> Matrix4<f64> {
    Matrix4::from_diagonal(&Vector4::from(METRIC))
}

/// Lorentz matrix of a rotation or boost written out with cos/sin or
/// cosh/sinh, independent of the spinor route.
fn closed_form(kind: &str, x: f64, axis: usize) -> Matrix4<f64> {
    let mut m = Matrix4::identity();
    match kind {
        "rotation" => {
            let (i, j) = match axis {
                1 => (2, 3),
                2 => (3, 1),
                _ => (1, 2),
            };
            m[(i, i)] = x.cos();
            m[(j, j)] = x.cos();
            m[(i, j)] = -x.sin();
            m[(j, i)] = x.sin();
        }
        _ => {
            m[(0, 0)] = x.cosh();
            m[(axis, axis)] = x.cosh();
            m[(0, axis)] = -x.sinh();
            m[(axis, 0)] = -x.sinh();
        }
    }
    m
}

#[test]
fn quarter_turn_about_z_maps_x_to_y() {
    let lam = induced_lorentz_matrix(&SpinTransform::rotation(std::f64::consts::FRAC_PI_2, 3).unwrap()).unwrap();
    let v = lam * Vector4::new(0.0, 1.0, 0.0, 0.0);
    assert!((v - Vector4::new(0.0, 0.0, 1.0, 0.0)).amax() <= 1e-15);
}

#[test]
fn zero_parameters_give_identity() {
    for axis in 1..=3 {
        for t in [SpinTransform::rotation(0.0, axis).unwrap(), SpinTransform::boost(0.0, axis).unwrap()] {
            assert_eq!(t.matrix, ComplexMatrix4::identity());
            let lam = induced_lorentz_matrix(&t).unwrap();
            assert!((lam - Matrix4::identity()).amax() <= 1e-15);
        }
    }
}

#[test]
fn full_turn_is_minus_identity() {
    let t = SpinTransform::rotation(2.0 * std::f64::consts::PI, 3).unwrap();
    let d = t.matrix + ComplexMatrix4::identity();
    assert!(d.iter().all(|z| z.norm() <= 1e-15));
    let psi = Spinor::new(c(0.3, 0.1), c(-0.2, 0.5), c(0.7, 0.0), c(0.1, -0.4));
    let a = compute_bilinears(&psi);
    let b = compute_bilinears(&t.apply(&psi));
    assert!((a.vector - b.vector).amax() <= 1e-15);
    assert!((a.scalar - b.scalar).abs() <= 1e-15);
}

#[test]
fn boost_by_log_two_halves_the_null_current() {
    let t = SpinTransform::boost(2f64.ln(), 3).unwrap();
    let psi = Spinor::new(c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0));
    let (j, _) = currents(&t.apply(&psi));
    assert!((j - Vector4::new(0.5, 0.0, 0.0, 0.5)).amax() <= 1e-15);
    assert!(!t.is_unitary(1e-6));
    assert!(SpinTransform::rotation(0.7, 2).unwrap().is_unitary(1e-14));
}

#[test]
fn induced_matrices_match_closed_forms() {
    for axis in 1..=3 {
        for x in [-1.3, 0.4, 2.0] {
            let rot = induced_lorentz_matrix(&SpinTransform::rotation(x, axis).unwrap()).unwrap();
            assert!((rot - closed_form("rotation", x, axis)).amax() <= 1e-13, "rotation {axis} {x}");
            let boost = induced_lorentz_matrix(&SpinTransform::boost(x, axis).unwrap()).unwrap();
            assert!((boost - closed_form("boost", x, axis)).amax() <= 1e-13, "boost {axis} {x}");
        }
    }
}

#[test]
fn bad_axis_and_determinant_are_rejected() {
    assert!(SpinTransform::rotation(1.0, 0).is_err());
    assert!(SpinTransform::boost(1.0, 4).is_err());
    let two = Matrix2::identity() * c(2.0, 0.0);
    assert!(SpinTransform::from_lambda(two).is_err());
    assert!(SpinTransform::from_parameters(c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)).is_err());
}

#[test]
fn inverse_undoes_the_transform() {
    let t = SpinTransform::from_parameters(c(1.2, 0.3), c(-0.4, 0.8), c(0.5, -0.1)).unwrap();
    let id = t.compose(&t.inverse()).matrix - ComplexMatrix4::identity();
    assert!(id.iter().all(|z| z.norm() <= 1e-14));
}

fn arb_transform() -> impl Strategy<Value = SpinTransform> {
    (prop::array::uniform6(-1.0f64..1.0)).prop_filter_map("leading parameter too small", |v| {
        let a = c(1.0 + 0.5 * v[0], 0.5 * v[1]);
        SpinTransform::from_parameters(a, c(v[2], v[3]), c(v[4], v[5])).ok()
    })
}

fn arb_spinor() -> impl Strategy<Value = Spinor> {
    prop::array::uniform8(-1.0f64..1.0).prop_map(|v| {
        Spinor::new(c(v[0], v[1]), c(v[2], v[3]), c(v[4], v[5]), c(v[6], v[7]))
    })
}

proptest! {
    #[test]
    fn induced_matrix_is_pseudo_orthogonal(t in arb_transform()) {
        let lam = induced_lorentz_matrix(&t).unwrap();
        let d = lam.transpose() * eta() * lam - eta();
        prop_assert!(d.amax() <= 1e-10 * (1.0 + lam.amax().powi(2)));
        prop_assert!(lam.determinant() > 0.0 && lam[(0, 0)] >= 1.0 - 1e-12);
    }

    #[test]
    fn composition_is_a_homomorphism(a in arb_transform(), b in arb_transform()) {
        let lab = induced_lorentz_matrix(&a.compose(&b)).unwrap();
        let la = induced_lorentz_matrix(&a).unwrap();
        let lb = induced_lorentz_matrix(&b).unwrap();
        let scale = 1.0 + la.amax() * lb.amax();
        prop_assert!((lab - la * lb).amax() <= 1e-9 * scale);
    }

    #[test]
    fn invariants_survive_spin_transforms(psi in arb_spinor(), t in arb_transform()) {
        let a = compute_bilinears(&psi);
        let b = compute_bilinears(&t.apply(&psi));
        let n = psi.norm().max(t.apply(&psi).norm()).powi(4);
        prop_assert!((a.density_sq - b.density_sq).abs() <= 1e-10 * n);
        prop_assert!((minkowski_dot(&a.vector, &a.axial) - minkowski_dot(&b.vector, &b.axial)).abs() <= 1e-10 * n);
        if a.density_sq > 1e-3 * n {
            prop_assert!(wrap_angle(a.chiral_angle - b.chiral_angle).abs() <= 1e-9);
        }
        let lam = induced_lorentz_matrix(&t).unwrap();
        prop_assert!((lam * a.vector - b.vector).amax() <= 1e-10 * n);
        prop_assert!((lam * a.axial - b.axial).amax() <= 1e-10 * n);
    }

    #[test]
    fn spin_transform_recovered_from_its_lorentz_matrix(t in arb_transform()) {
        let lam = induced_lorentz_matrix(&t).unwrap();
        let back = spin_from_lorentz(&lam).unwrap();
        // equal up to the overall sign of the double cover
        let plus = (back.lambda - t.lambda).iter().map(|z| z.norm()).fold(0.0, f64::max);
        let minus = (back.lambda + t.lambda).iter().map(|z| z.norm()).fold(0.0, f64::max);
        prop_assert!(plus.min(minus) <= 1e-8 * (1.0 + lam.amax()));
    }
}

//! Seeded randomized checks shared by the command-line driver and the tests.
//!
//! Every suite draws its spinors with [`crate::sampling`], so a suite's report
//! depends only on `(seed, samples)`. Residuals are absolute for unit-norm
//! spinors; the covariance checks divide by `max(|psi|^4, |S psi|^4)`.

use nalgebra::Matrix4;

use crate::algebra::{spinor_norm, Spinor, METRIC};
use crate::bilinears::{compute_bilinears, density_floor, identity_residuals, minkowski_dot};
use crate::frames::{build_tetrad, orthonormality_defect, reciprocal};
use crate::lightfront::{classify, majorana_check, FrontKind};
use crate::lorentz::{induced_lorentz_matrix, SpinTransform};
use crate::report::IdentityReport;
use crate::sampling::{random_unit_spinor, SampleStream};

/// Stream offsets so the suites draw disjoint samples for one seed.
const LORENTZ_STREAM: u64 = 1 << 40;
const TETRAD_STREAM: u64 = 2 << 40;
const MAJORANA_STREAM: u64 = 3 << 40;

/// Largest rapidity used for random boosts.
pub const MAX_RAPIDITY: f64 = 1.0;

/// Algebraic identities among the bilinears of `samples` unit spinors.
pub fn bilinear_suite(seed: u64, samples: usize) -> IdentityReport {
    let mut report = IdentityReport::new();
    for i in 0..samples {
        let psi = random_unit_spinor(seed, i as u64);
        let r = identity_residuals(&compute_bilinears(&psi));
        for c in &r.checks {
            report.record(&c.name, c.max_violation, &[i]);
        }
    }
    report
}

/// Rotation about a random axis, then a boost along another, then a
/// second rotation.
pub fn random_transform(stream: &mut SampleStream) -> SpinTransform {
    let two_pi = 2.0 * std::f64::consts::PI;
    let axis = |u: f64| 1 + ((3.0 * u) as usize).min(2);
    let r1 = SpinTransform::rotation(two_pi * stream.uniform(), axis(stream.uniform())).expect("axis");
    let b = SpinTransform::boost(
        MAX_RAPIDITY * (2.0 * stream.uniform() - 1.0),
        axis(stream.uniform()),
    )
    .expect("axis");
    let r2 = SpinTransform::rotation(two_pi * stream.uniform(), axis(stream.uniform())).expect("axis");
    r2.compose(&b.compose(&r1))
}

/// Invariance of `R^2`, the chiral angle and `j.J` under random spin
/// transforms, and pseudo-orthogonality of the induced Lorentz matrix.
pub fn lorentz_suite(seed: u64, samples: usize) -> IdentityReport {
    let mut report = IdentityReport::new();
    let eta = Matrix4::from_diagonal(&nalgebra::Vector4::from(METRIC));
    for i in 0..samples {
        let mut stream = SampleStream::new(seed, LORENTZ_STREAM + i as u64);
        let psi = stream.spinor();
        let t = random_transform(&mut stream);
        let moved = t.apply(&psi);
        let scale = spinor_norm(&psi).powi(4).max(spinor_norm(&moved).powi(4));
        let a = compute_bilinears(&psi);
        let b = compute_bilinears(&moved);
        report.record("density_invariance", (a.density_sq - b.density_sq).abs() / scale, &[i]);
        // the angle error is the (S, P) error divided by R^2
        let turn = crate::lightfront::wrap_angle(a.chiral_angle - b.chiral_angle).abs();
        report.record("chiral_angle_invariance", turn * a.density_sq / scale, &[i]);
        let jj_a = minkowski_dot(&a.vector, &a.axial);
        let jj_b = minkowski_dot(&b.vector, &b.axial);
        report.record("current_product_invariance", (jj_a - jj_b).abs() / scale, &[i]);
        match induced_lorentz_matrix(&t) {
            Ok(lam) => {
                let d = lam.transpose() * eta * lam - eta;
                report.record("pseudo_orthogonality", d.amax(), &[i]);
                let predicted = lam * a.vector;
                report.record("current_transport", (predicted - b.vector).amax() / scale.sqrt(), &[i]);
            }
            Err(_) => report.record("pseudo_orthogonality", f64::INFINITY, &[i]),
        }
    }
    report
}

/// Orthonormality of the spinor tetrad and the reciprocal-system relations
/// `e_(a) . e^(b) = delta` and `sum_a e_(a)^mu e^(a)_nu = delta`.
pub fn tetrad_suite(seed: u64, samples: usize) -> IdentityReport {
    let mut report = IdentityReport::new();
    let mut skipped = 0usize;
    for i in 0..samples {
        let psi = random_unit_spinor(seed, TETRAD_STREAM + i as u64);
        if compute_bilinears(&psi).density_sq <= density_floor(&psi) {
            skipped += 1;
            continue;
        }
        let t = match build_tetrad(&psi) {
            Ok(t) => t,
            Err(_) => {
                report.record("tetrad_orthonormality", f64::INFINITY, &[i]);
                continue;
            }
        };
        report.record("tetrad_orthonormality", orthonormality_defect(&t), &[i]);
        match reciprocal(&t) {
            Ok(co) => {
                let id = Matrix4::<f64>::identity();
                let frame = t.e * co.transpose() - id;
                let coord = t.e.transpose() * co - id;
                report.record("reciprocal_frame", frame.amax(), &[i]);
                report.record("reciprocal_coordinate", coord.amax(), &[i]);
            }
            Err(_) => report.record("reciprocal_frame", f64::INFINITY, &[i]),
        }
    }
    report.record("degenerate_samples", skipped as f64, &[]);
    report
}

/// Spinors on the Majorana subspace, `u_R = d_L^*`, `d_R = -u_L^*`, built
/// from a random left half.
pub fn majorana_spinor(seed: u64, index: u64) -> Spinor {
    let mut s = SampleStream::new(seed, MAJORANA_STREAM + index);
    let (u, d) = (s.complex_normal(), s.complex_normal());
    let n = (2.0 * (u.norm_sqr() + d.norm_sqr())).sqrt();
    Spinor::new(u / n, d / n, d.conj() / n, -u.conj() / n)
}

/// Majorana spinors: vanishing density and axial current, null
/// future-pointing vector current, and recognition by the classifier.
pub fn majorana_suite(seed: u64, samples: usize) -> IdentityReport {
    let mut report = IdentityReport::new();
    for i in 0..samples {
        let psi = majorana_spinor(seed, i as u64);
        let set = compute_bilinears(&psi);
        report.record("majorana_density", set.density_sq, &[i]);
        report.record("majorana_axial", set.axial.amax(), &[i]);
        report.record("majorana_vector_null", minkowski_dot(&set.vector, &set.vector).abs(), &[i]);
        report.record("majorana_future_pointing", if set.vector[0] > 0.0 { 0.0 } else { 1.0 }, &[i]);
        let check = majorana_check(&psi);
        report.record("majorana_condition", if check.is_majorana { check.residual } else { 1.0 }, &[i]);
        let front = classify(&psi);
        let on_front = matches!(front.kind, FrontKind::LightFrontLeft | FrontKind::LightFrontRight);
        report.record("majorana_on_light_front", if on_front { 0.0 } else { 1.0 }, &[i]);
    }
    report
}

//! Classification of spinors whose invariant density vanishes, the phase
//! form of the density near such points, and the Majorana condition.
//!
//! Writing `u_{L,R} = |u| e^{i phi_{L,R}}` and `d_{L,R} = |d| e^{i chi_{L,R}}`,
//! `R^2 = 4 |u_R^* u_L + d_R^* d_L|^2`, which vanishes exactly when
//! `phi_R - chi_R = phi_L - chi_L + pi (mod 2 pi)` and
//! `|u_R||u_L| = |d_R||d_L|`.

use num_complex::Complex64;
use serde::Serialize;

use crate::algebra::{spinor_norm, Spinor};
use crate::bilinears::{compute_bilinears, FourVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FrontKind {
    Regular,
    LightFrontLeft,
    LightFrontRight,
    Zero,
}

/// Limiting value of `sin U` approached at a light front. When the modulus
/// difference that fixes the sign is itself zero, both signs are listed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AngleLimit {
    pub sin_angle: f64,
    pub alternate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrontClassification {
    pub kind: FrontKind,
    pub density_sq: f64,
    /// Both chiral currents are nonzero (they are then parallel and null).
    pub both_chiralities: bool,
    pub angle_limit: Option<AngleLimit>,
}

/// Relative floor on `R^2`, scaled by `|psi|^4`.
pub const FRONT_FLOOR: f64 = 1e-12;
/// Modulus below which a component's phase is treated as undefined.
pub const PHASE_MODULUS_FLOOR: f64 = 1e-14;

pub fn classify(psi: &Spinor) -> FrontClassification {
    classify_with_floor(psi, FRONT_FLOOR)
}

pub fn classify_with_floor(psi: &Spinor, relative_floor: f64) -> FrontClassification {
    let n = spinor_norm(psi);
    let set = compute_bilinears(psi);
    if n == 0.0 {
        return FrontClassification {
            kind: FrontKind::Zero,
            density_sq: 0.0,
            both_chiralities: false,
            angle_limit: None,
        };
    }
    let floor = relative_floor * n.powi(4);
    if set.density_sq > floor {
        return FrontClassification {
            kind: FrontKind::Regular,
            density_sq: set.density_sq,
            both_chiralities: set.left[0] > 0.0 && set.right[0] > 0.0,
            angle_limit: None,
        };
    }
    let tiny = 1e-14 * n * n;
    let has_left = set.left[0] > tiny;
    let has_right = set.right[0] > tiny;
    let kind = if has_left && set.left[0] >= set.right[0] {
        FrontKind::LightFrontLeft
    } else {
        FrontKind::LightFrontRight
    };
    FrontClassification {
        kind,
        density_sq: set.density_sq,
        both_chiralities: has_left && has_right,
        angle_limit: angle_limit(psi),
    }
}

fn angle_limit(psi: &Spinor) -> Option<AngleLimit> {
    let pd = phase_decomposition(psi);
    let [ul, dl, ur, dr] = pd.moduli;
    let diff = ur * ul - dr * dl;
    // sin(phi_R - phi_L), or the d-pair route which differs by pi
    let s = match (pd.phases[0], pd.phases[2], pd.phases[1], pd.phases[3]) {
        (Some(pl), Some(pr), _, _) => (pr - pl).sin(),
        (_, _, Some(cl), Some(cr)) => -(cr - cl).sin(),
        _ => return None,
    };
    let scale = (ur * ul).max(dr * dl).max(f64::MIN_POSITIVE);
    if diff.abs() <= 1e-10 * scale {
        Some(AngleLimit { sin_angle: s, alternate: Some(-s) })
    } else {
        Some(AngleLimit { sin_angle: diff.signum() * s, alternate: None })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseDecomposition {
    /// `|u_L|, |d_L|, |u_R|, |d_R|`.
    pub moduli: [f64; 4],
    /// `phi_L, chi_L, phi_R, chi_R`; `None` where the modulus is below floor.
    pub phases: [Option<f64>; 4],
    /// `|wrap(phi_R - chi_R - phi_L + chi_L + pi)|`, in `[0, pi]`.
    pub phase_residual: Option<f64>,
    /// `|u_R||u_L| - |d_R||d_L|`.
    pub modulus_residual: f64,
    /// Pseudoscalar from moduli and phases.
    pub pseudoscalar: f64,
    /// Scalar from moduli and phases.
    pub scalar: f64,
}

pub fn wrap_angle(x: f64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut y = (x + std::f64::consts::PI).rem_euclid(two_pi) - std::f64::consts::PI;
    if y <= -std::f64::consts::PI {
        y += two_pi;
    }
    y
}

pub fn phase_decomposition(psi: &Spinor) -> PhaseDecomposition {
    let moduli = [psi[0].norm(), psi[1].norm(), psi[2].norm(), psi[3].norm()];
    let mut phases = [None; 4];
    for i in 0..4 {
        if moduli[i] >= PHASE_MODULUS_FLOOR {
            phases[i] = Some(psi[i].arg());
        }
    }
    let phase_residual = match phases {
        [Some(pl), Some(cl), Some(pr), Some(cr)] => {
            Some(wrap_angle(pr - cr - pl + cl + std::f64::consts::PI).abs())
        }
        _ => None,
    };
    let [ul, dl, ur, dr] = moduli;
    let term = |m1: f64, m2: f64, l: Option<f64>, r: Option<f64>| -> (f64, f64) {
        match (l, r) {
            (Some(l), Some(r)) => (m1 * m2 * (r - l).cos(), m1 * m2 * (r - l).sin()),
            _ => (0.0, 0.0),
        }
    };
    let (su, pu) = term(ur, ul, phases[0], phases[2]);
    let (sd, pd) = term(dr, dl, phases[1], phases[3]);
    PhaseDecomposition {
        moduli,
        phases,
        phase_residual,
        modulus_residual: ur * ul - dr * dl,
        pseudoscalar: 2.0 * (pu + pd),
        scalar: 2.0 * (su + sd),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MajoranaReport {
    pub is_majorana: bool,
    /// `|(u_R - d_L^*, d_R + u_L^*)|`.
    pub residual: f64,
    pub vector: FourVector,
    pub axial: FourVector,
}

pub const MAJORANA_TOLERANCE: f64 = 1e-12;

pub fn majorana_check(psi: &Spinor) -> MajoranaReport {
    let a = psi[2] - psi[1].conj();
    let b = psi[3] + psi[0].conj();
    let residual = (a.norm_sqr() + b.norm_sqr()).sqrt();
    let set = compute_bilinears(psi);
    MajoranaReport {
        is_majorana: residual <= MAJORANA_TOLERANCE * spinor_norm(psi),
        residual,
        vector: set.vector,
        axial: set.axial,
    }
}

/// Projects onto the Majorana subspace: `(psi + C psi*) / 2`.
pub fn majorana_part(psi: &Spinor) -> Spinor {
    let c = Spinor::new(
        -psi[3].conj(),
        psi[2].conj(),
        psi[1].conj(),
        -psi[0].conj(),
    );
    (psi + c) * Complex64::new(0.5, 0.0)
}

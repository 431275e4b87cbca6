//! Orthonormal tetrads built from the bilinears of a spinor.
//!
//! `e_(0) = j / R` and `e_(3) = J / R`. The transverse pair is taken from the
//! first non-degenerate source in this order: the `H` polarization pair, the
//! `E` pair, the conjugate current `e_(1) + i e_(2) = Phi / R`, and finally
//! Gram-Schmidt against the coordinate axes. For a single spinor the two
//! polarization pairs always vanish, so the conjugate current is what is
//! used in practice; it is Lorentz covariant and carries the spinor phase
//! (a global phase `theta` rotates the transverse pair by `2 theta`).

use nalgebra::Matrix4;
use num_complex::Complex64;
use serde::Serialize;

use crate::algebra::{Spinor, METRIC};
use crate::bilinears::{
    compute_bilinears, conjugate_current, density_floor, minkowski_dot, reduced_frame_vectors,
    FourVector,
};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TetradSource {
    /// Transverse legs from the `H` or `E` polarization vectors.
    Polarization,
    /// Transverse legs from the conjugate current.
    ConjugateCurrent,
    /// Transverse legs completed against coordinate axes.
    Fallback,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tetrad {
    /// Row `a` holds `e_(a)^mu`.
    pub e: Matrix4<f64>,
    pub source: TetradSource,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Metric {
    pub g: Matrix4<f64>,
    pub ginv: Matrix4<f64>,
}

/// Relative threshold on `|v.v|^(1/2) / R^4` for polarization vectors.
pub const POLARIZATION_THRESHOLD: f64 = 1e-8;
pub const DETERMINANT_FLOOR: f64 = 1e-12;

fn eta() -> Matrix4<f64> {
    Matrix4::from_diagonal(&FourVector::from(METRIC))
}

fn minkowski_length(v: &FourVector) -> f64 {
    minkowski_dot(v, v).abs().sqrt()
}

/// Removes from `v` its components along the (non-null) `basis` vectors.
fn project_out(v: &FourVector, basis: &[FourVector]) -> FourVector {
    let mut w = *v;
    for b in basis {
        let bb = minkowski_dot(b, b);
        w -= b * (minkowski_dot(&w, b) / bb);
    }
    w
}

fn normalize(v: &FourVector) -> FourVector {
    v / minkowski_length(v)
}

/// Builds the tetrad with the default density floor `1e-12 |psi|^4`.
pub fn build_tetrad(psi: &Spinor) -> Result<Tetrad> {
    build_tetrad_with_floor(psi, density_floor(psi))
}

pub fn build_tetrad_with_floor(psi: &Spinor, floor: f64) -> Result<Tetrad> {
    let set = compute_bilinears(psi);
    let r2 = set.density_sq;
    if r2 <= floor || r2 == 0.0 {
        return Err(Error::DegenerateDensity { r2, floor });
    }
    let r = r2.sqrt();
    let e0 = set.vector / r;
    let e3 = project_out(&(set.axial / r), &[e0]);
    let e3 = normalize(&e3);

    let threshold = POLARIZATION_THRESHOLD * r2 * r2;
    let fv = reduced_frame_vectors(&set, floor)?;
    let mut pair = None;
    for (a, b) in [(fv.h, fv.h_dual), (fv.e, fv.e_dual)] {
        let (a, b) = (raise(&a), raise(&b));
        if minkowski_length(&a) >= threshold && minkowski_length(&b) >= threshold {
            pair = Some((a, b, TetradSource::Polarization));
            break;
        }
    }
    if pair.is_none() {
        let phi = conjugate_current(psi);
        let re = FourVector::from_fn(|i, _| phi[i].re);
        let im = FourVector::from_fn(|i, _| phi[i].im);
        if minkowski_length(&re) >= 1e-8 * r && minkowski_length(&im) >= 1e-8 * r {
            pair = Some((re, im, TetradSource::ConjugateCurrent));
        }
    }

    let (e1, e2, source) = match pair {
        Some((a, b, src)) => {
            let e1 = normalize(&project_out(&a, &[e0, e3]));
            let e2 = normalize(&project_out(&b, &[e0, e3, e1]));
            (e1, e2, src)
        }
        None => {
            let mut found = Vec::new();
            for axis in 0..4 {
                let mut v = FourVector::zeros();
                v[axis] = 1.0;
                let mut basis = vec![e0, e3];
                basis.extend(found.iter().copied());
                let w = project_out(&v, &basis);
                if minkowski_length(&w) > 1e-6 {
                    found.push(normalize(&w));
                }
                if found.len() == 2 {
                    break;
                }
            }
            (found[0], found[1], TetradSource::Fallback)
        }
    };
    let mut e = Matrix4::zeros();
    e.set_row(0, &e0.transpose());
    e.set_row(1, &e1.transpose());
    e.set_row(2, &e2.transpose());
    e.set_row(3, &e3.transpose());
    Ok(Tetrad { e, source })
}

fn raise(v: &FourVector) -> FourVector {
    FourVector::new(v[0], -v[1], -v[2], -v[3])
}

/// Co-tetrad: row `b` holds `e^(b)_mu` with `sum_mu e_(a)^mu e^(b)_mu = delta`.
pub fn reciprocal(t: &Tetrad) -> Result<Matrix4<f64>> {
    reciprocal_of(&t.e)
}

pub fn reciprocal_of(e: &Matrix4<f64>) -> Result<Matrix4<f64>> {
    let det = e.determinant();
    if det.abs() < DETERMINANT_FLOOR {
        return Err(Error::SingularTetrad { det });
    }
    let inv = e.try_inverse().ok_or(Error::SingularTetrad { det })?;
    Ok(inv.transpose())
}

/// `g_{mu nu} = eta_ab e^(a)_mu e^(b)_nu` and its inverse
/// `g^{mu nu} = eta^ab e_(a)^mu e_(b)^nu`.
pub fn metric_from_tetrad(t: &Tetrad) -> Result<Metric> {
    metric_of(&t.e)
}

pub fn metric_of(e: &Matrix4<f64>) -> Result<Metric> {
    let co = reciprocal_of(e)?;
    let eta = eta();
    Ok(Metric { g: co.transpose() * eta * co, ginv: e.transpose() * eta * e })
}

/// Tetrad expressed in coordinates `(T, x^1, x^2, x^3)` where the new time
/// coordinate satisfies `dT = R e^(0)`. Its time column is `(R, 0, 0, 0)`,
/// so `g^{TT} = R^2`, and in a frame with `e_(0)` along the time axis
/// `g_TT = 1 / R^2`.
pub fn world_time_tetrad(t: &Tetrad, density: f64) -> Result<Tetrad> {
    if density <= 0.0 {
        return Err(Error::InvalidParameter("density must be positive".into()));
    }
    let mut e = t.e;
    e[(0, 0)] = density;
    for a in 1..4 {
        e[(a, 0)] = 0.0;
    }
    Ok(Tetrad { e, source: t.source })
}

/// Spinor components in its own frame,
/// `sqrt(R/2) (e^{-i U/2}, 0, e^{i U/2}, 0)` with `U` the chiral angle.
/// This equals `S^{-1} psi` for the spin transform `S` whose Lorentz matrix
/// maps the coordinate axes onto the tetrad, up to the overall sign.
pub fn frame_spinor_from(density: f64, angle: f64) -> Spinor {
    let a = (0.5 * density).sqrt();
    let z = Complex64::new(0.0, 0.0);
    Spinor::new(
        Complex64::from_polar(a, -0.5 * angle),
        z,
        Complex64::from_polar(a, 0.5 * angle),
        z,
    )
}

/// Frame-orthonormality defect `max |g(e_a, e_b) - eta_ab|`.
pub fn orthonormality_defect(t: &Tetrad) -> f64 {
    let d = t.e * eta() * t.e.transpose() - eta();
    d.amax()
}

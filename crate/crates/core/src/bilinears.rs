//! Real bilinear covariants of a single spinor.
//!
//! Everything is computed from the chiral halves `xi_L = (u_L, d_L)` and
//! `xi_R = (u_R, d_R)`:
//! `j_L = xi_L^dag (1, tau) xi_L`, `j_R = xi_R^dag (1, -tau) xi_R`,
//! `S + iP = 2 xi_L^dag xi_R`, `L + iK = 2 xi_L^dag tau xi_R`.

use nalgebra::{Matrix4, Vector3, Vector4};
use num_complex::Complex64;
use serde::Serialize;

use crate::algebra::{levi_civita3, levi_civita4, spinor_norm, Spinor, METRIC};
use crate::error::{Error, Result};
use crate::report::IdentityReport;

pub type FourVector = Vector4<f64>;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BilinearSet {
    /// Vector current `j^a = psi^dag alpha^a psi`.
    pub vector: FourVector,
    /// Axial current `J^a = psi^dag rho3 alpha^a psi`.
    pub axial: FourVector,
    pub scalar: f64,
    pub pseudoscalar: f64,
    /// Antisymmetric tensor `M^{ab}` (both indices up).
    pub bivector: Matrix4<f64>,
    /// `1/2 eps^{abcd} M_{cd}`.
    pub dual_bivector: Matrix4<f64>,
    /// `K_i = M^{0i}`.
    pub boost_part: Vector3<f64>,
    /// `L_i = Mdual^{0i}`.
    pub rotation_part: Vector3<f64>,
    /// Invariant density squared, `S^2 + P^2`.
    pub density_sq: f64,
    /// Chiral angle `atan2(P, S)`, zero for the zero spinor.
    pub chiral_angle: f64,
    pub left: FourVector,
    pub right: FourVector,
}

pub fn minkowski_dot(a: &FourVector, b: &FourVector) -> f64 {
    a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3]
}

pub fn lower(v: &FourVector) -> FourVector {
    FourVector::new(v[0], -v[1], -v[2], -v[3])
}

/// Lowers both indices of a rank-2 tensor.
pub fn lower2(m: &Matrix4<f64>) -> Matrix4<f64> {
    Matrix4::from_fn(|a, b| METRIC[a] * METRIC[b] * m[(a, b)])
}

fn chiral_currents(psi: &Spinor) -> (FourVector, FourVector) {
    let (a, b, c, d) = (psi[0], psi[1], psi[2], psi[3]);
    let ab = a.conj() * b;
    let cd = c.conj() * d;
    let left = FourVector::new(
        a.norm_sqr() + b.norm_sqr(),
        2.0 * ab.re,
        2.0 * ab.im,
        a.norm_sqr() - b.norm_sqr(),
    );
    let right = FourVector::new(
        c.norm_sqr() + d.norm_sqr(),
        -2.0 * cd.re,
        -2.0 * cd.im,
        -(c.norm_sqr() - d.norm_sqr()),
    );
    (left, right)
}

/// `S + iP`.
pub fn scalar_pair(psi: &Spinor) -> Complex64 {
    (psi[0].conj() * psi[2] + psi[1].conj() * psi[3]) * 2.0
}

/// Vector and axial currents only.
pub fn currents(psi: &Spinor) -> (FourVector, FourVector) {
    let (l, r) = chiral_currents(psi);
    (l + r, l - r)
}

/// Complex current `(C psi*)^dag alpha^a psi`. It is null, orthogonal to both
/// currents, and its real and imaginary parts each have length `R`.
pub fn conjugate_current(psi: &Spinor) -> [Complex64; 4] {
    let (a, b, c, d) = (psi[0], psi[1], psi[2], psi[3]);
    [
        (b * c - a * d) * 2.0,
        (a * c - b * d) * 2.0,
        (a * c + b * d) * Complex64::new(0.0, 2.0),
        (a * d + b * c) * -2.0,
    ]
}

pub fn compute_bilinears(psi: &Spinor) -> BilinearSet {
    let (left, right) = chiral_currents(psi);
    let sp = scalar_pair(psi);
    let (a, b, c, d) = (psi[0], psi[1], psi[2], psi[3]);
    // xi_L^dag tau_i xi_R
    let w = [
        a.conj() * d + b.conj() * c,
        (b.conj() * c - a.conj() * d) * Complex64::new(0.0, 1.0),
        a.conj() * c - b.conj() * d,
    ];
    let rotation_part = Vector3::new(2.0 * w[0].re, 2.0 * w[1].re, 2.0 * w[2].re);
    let boost_part = Vector3::new(2.0 * w[0].im, 2.0 * w[1].im, 2.0 * w[2].im);

    let mut bivector = Matrix4::zeros();
    for i in 0..3 {
        bivector[(0, i + 1)] = boost_part[i];
        bivector[(i + 1, 0)] = -boost_part[i];
        for j in 0..3 {
            let mut v = 0.0;
            for k in 0..3 {
                v += levi_civita3(i, j, k) * rotation_part[k];
            }
            bivector[(i + 1, j + 1)] = v;
        }
    }
    let dual_bivector = dualize(&bivector);
    let density_sq = sp.re * sp.re + sp.im * sp.im;
    let chiral_angle = if density_sq == 0.0 { 0.0 } else { sp.im.atan2(sp.re) };
    BilinearSet {
        vector: left + right,
        axial: left - right,
        scalar: sp.re,
        pseudoscalar: sp.im,
        bivector,
        dual_bivector,
        boost_part,
        rotation_part,
        density_sq,
        chiral_angle,
        left,
        right,
    }
}

/// `1/2 eps^{abcd} M_{cd}` for a tensor given with upper indices.
pub fn dualize(m_upper: &Matrix4<f64>) -> Matrix4<f64> {
    let m = lower2(m_upper);
    Matrix4::from_fn(|a, b| {
        let mut s = 0.0;
        for c in 0..4 {
            for d in 0..4 {
                let e = levi_civita4(a, b, c, d);
                if e != 0.0 {
                    s += e * m[(c, d)];
                }
            }
        }
        0.5 * s
    })
}

/// Residual of every algebraic identity among the bilinears, as absolute
/// values. The stored density and angle are used as given, so a corrupted
/// set shows up in the residuals that involve them.
pub fn identity_residuals(set: &BilinearSet) -> IdentityReport {
    let mut r = IdentityReport::new();
    let (j, jj) = (&set.vector, &set.axial);
    let (s, p, r2) = (set.scalar, set.pseudoscalar, set.density_sq);
    let l = &set.rotation_part;
    let k = &set.boost_part;
    let ups = set.chiral_angle;

    r.record("vector_norm", (minkowski_dot(j, j) - r2).abs(), &[]);
    r.record("axial_norm", (minkowski_dot(jj, jj) + r2).abs(), &[]);
    r.record("scalar_pseudoscalar_sum", (s * s + p * p - r2).abs(), &[]);
    r.record("vector_axial_orthogonal", minkowski_dot(j, jj).abs(), &[]);
    r.record(
        "tensor_invariant_difference",
        (s * s - p * p - (l.norm_squared() - k.norm_squared())).abs(),
        &[],
    );
    r.record("tensor_invariant_product", (s * p - l.dot(k)).abs(), &[]);
    r.record("double_angle_cos", (s * s - p * p - r2 * (2.0 * ups).cos()).abs(), &[]);
    r.record("double_angle_sin", (2.0 * s * p - r2 * (2.0 * ups).sin()).abs(), &[]);
    r.record("left_null", minkowski_dot(&set.left, &set.left).abs(), &[]);
    r.record("right_null", minkowski_dot(&set.right, &set.right).abs(), &[]);
    r.record(
        "chiral_product",
        (r2 - 2.0 * minkowski_dot(&set.left, &set.right)).abs(),
        &[],
    );
    r.record(
        "chiral_split",
        ((set.left + set.right) - j).amax().max(((set.left - set.right) - jj).amax()),
        &[],
    );

    // M^{ab} Mdual_{bc} = (L.K) delta^a_c
    let prod = set.bivector * Matrix4::from_diagonal(&FourVector::from(METRIC)) * set.dual_bivector;
    let prod = prod * Matrix4::from_diagonal(&FourVector::from(METRIC));
    let lk = l.dot(k);
    let mut worst = 0.0f64;
    for a in 0..4 {
        for c in 0..4 {
            let target = if a == c { lk } else { 0.0 };
            worst = worst.max((prod[(a, c)] - target).abs());
        }
    }
    r.record("tensor_dual_product", worst, &[]);

    let mut skew = 0.0f64;
    for a in 0..4 {
        for b in 0..4 {
            skew = skew.max((set.bivector[(a, b)] + set.bivector[(b, a)]).abs());
        }
    }
    r.record("tensor_antisymmetry", skew, &[]);
    let mut dual_parts = 0.0f64;
    for i in 0..3 {
        dual_parts = dual_parts
            .max((set.bivector[(0, i + 1)] - k[i]).abs())
            .max((set.dual_bivector[(0, i + 1)] - l[i]).abs());
    }
    r.record("tensor_dual_components", dual_parts, &[]);
    r
}

/// Tolerance used for the identity residuals of a spinor: a few dozen ulps of
/// the largest quartic term.
pub fn identity_tolerance(psi: &Spinor) -> f64 {
    let n = spinor_norm(psi);
    64.0 * f64::EPSILON * (1.0 + n.powi(4))
}

/// Default floor on `R^2` below which frame constructions are refused.
pub fn density_floor(psi: &Spinor) -> f64 {
    1e-12 * spinor_norm(psi).powi(4)
}

/// Polarization frame vectors, covariant components.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrameVectors {
    pub e: FourVector,
    pub e_dual: FourVector,
    pub h: FourVector,
    pub h_dual: FourVector,
}

/// Builds the four polarization vectors from the tensor and the currents:
///
/// `E_c = j^a M_ab P^b_c`, `E*_c = J^a Mdual_ab Q^b_c`,
/// `H_c = J^a M_ab Q^b_c`, `H*_c = j^a Mdual_ab P^b_c`,
///
/// with `P^b_c = R^2 delta^b_c + J^b J_c` and `Q^b_c = R^2 delta^b_c - j^b j_c`.
/// For a single spinor these vanish identically up to rounding, because the
/// tensor is a combination of `j ^ J` and its dual.
pub fn reduced_frame_vectors(set: &BilinearSet, floor: f64) -> Result<FrameVectors> {
    if set.density_sq <= floor {
        return Err(Error::DegenerateDensity { r2: set.density_sq, floor });
    }
    let r2 = set.density_sq;
    let m = lower2(&set.bivector);
    let md = lower2(&set.dual_bivector);
    let jl = lower(&set.vector);
    let axl = lower(&set.axial);
    let p = Matrix4::from_fn(|b, c| {
        (if b == c { r2 } else { 0.0 }) + set.axial[b] * axl[c]
    });
    let q = Matrix4::from_fn(|b, c| {
        (if b == c { r2 } else { 0.0 }) - set.vector[b] * jl[c]
    });
    let row = |v: &FourVector, t: &Matrix4<f64>, proj: &Matrix4<f64>| -> FourVector {
        (v.transpose() * t * proj).transpose()
    };
    Ok(FrameVectors {
        e: row(&set.vector, &m, &p),
        e_dual: row(&set.axial, &md, &q),
        h: row(&set.axial, &m, &q),
        h_dual: row(&set.vector, &md, &p),
    })
}

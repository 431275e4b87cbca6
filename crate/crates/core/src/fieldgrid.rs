//! Spinor fields sampled on a regular 4-d grid and the differential geometry
//! of the tetrads they induce.
//!
//! Nodes are stored row-major in axis order `(0, 1, 2, 3)`, axis 0 being time.
//! Derivatives use centered second-order differences in the interior and
//! one-sided second-order differences on the boundary; an axis with a single
//! point is not differentiated.
//!
//! The differential identities are evaluated on the spinor in its own frame,
//! `psi' = sqrt(R/2) (e^{-iU/2}, 0, e^{iU/2}, 0)`, with the chiral angle `U`
//! aligned to the centre node inside every stencil. The tetrad at each node is
//! built from the bilinears of the stored (coordinate) spinor.

use std::sync::OnceLock;

use nalgebra::Matrix4;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::algebra::{build_dirac_basis, levi_civita4, ComplexMatrix4, DiracBasis, Spinor, METRIC};
use crate::bilinears::{compute_bilinears, density_floor};
use crate::error::{Error, Result};
use crate::frames::{build_tetrad_with_floor, frame_spinor_from, metric_of, reciprocal_of};
use crate::lightfront::wrap_angle;

/// `omega[a][b][c]` holds `omega_{abc}`; the last index is the derivative
/// direction.
pub type Omega = [[[f64; 4]; 4]; 4];

/// Nodes closer than this to a differentiated boundary are excluded from
/// residual norms.
pub const INTERIOR_MARGIN: usize = 2;
/// Fewest points on an axis that is differentiated.
pub const MIN_AXIS_POINTS: usize = 5;

fn basis() -> &'static DiracBasis {
    static BASIS: OnceLock<DiracBasis> = OnceLock::new();
    BASIS.get_or_init(build_dirac_basis)
}

/// Products of Dirac matrices used in the residual families.
struct Products {
    /// `rho3 alpha^a`.
    axial: [ComplexMatrix4; 4],
    /// `alpha^a rho2 alpha^b`.
    polar: [[ComplexMatrix4; 4]; 4],
    /// Non-zero `eps^{abcd}` as `(a, b, c, d, sign)`.
    levi: Vec<(usize, usize, usize, usize, f64)>,
}

fn products() -> &'static Products {
    static P: OnceLock<Products> = OnceLock::new();
    P.get_or_init(|| {
        let bs = basis();
        let mut levi = Vec::new();
        for i in 0..256 {
            let (a, b, c, d) = (i / 64, (i / 16) % 4, (i / 4) % 4, i % 4);
            let e = levi_civita4(a, b, c, d);
            if e != 0.0 {
                levi.push((a, b, c, d, e));
            }
        }
        Products {
            axial: std::array::from_fn(|a| bs.rho[2] * bs.alpha[a]),
            polar: std::array::from_fn(|a| std::array::from_fn(|b| bs.alpha[a] * bs.rho[1] * bs.alpha[b])),
            levi,
        }
    })
}

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Couplings {
    /// Electric charge `e`.
    pub charge: f64,
    /// Axial coupling `g`.
    pub axial: f64,
    pub mass: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum AxialMode {
    /// `aleph` is the stored input (zero when absent).
    Given,
    /// `aleph_a = -d_a U / (2 g)` from the field's own chiral angle.
    Gradient,
}

#[derive(Debug, Clone)]
pub struct SpinorField {
    pub dims: [usize; 4],
    pub spacing: [f64; 4],
    /// Coordinates of node `(0, 0, 0, 0)`.
    pub origin: [f64; 4],
    pub psi: Vec<Spinor>,
    /// Frame components `A_a` per node; `None` means zero.
    pub potential: Option<Vec<[f64; 4]>>,
    /// Frame components `aleph_a` per node; `None` means zero.
    pub aleph: Option<Vec<[f64; 4]>>,
    pub couplings: Couplings,
    pub axial_mode: AxialMode,
}

impl SpinorField {
    pub fn new(
        dims: [usize; 4],
        spacing: [f64; 4],
        couplings: Couplings,
        psi: Vec<Spinor>,
    ) -> Result<Self> {
        let f = Self {
            dims,
            spacing,
            origin: [0.0; 4],
            psi,
            potential: None,
            aleph: None,
            couplings,
            axial_mode: AxialMode::Given,
        };
        f.validate()?;
        Ok(f)
    }

    /// Samples `f(x)` at every node, `x = origin + index * spacing`.
    pub fn from_fn<F>(
        dims: [usize; 4],
        spacing: [f64; 4],
        origin: [f64; 4],
        couplings: Couplings,
        f: F,
    ) -> Result<Self>
    where
        F: Fn([f64; 4]) -> Spinor + Sync,
    {
        let n: usize = dims.iter().product();
        let mut field = Self {
            dims,
            spacing,
            origin,
            psi: Vec::new(),
            potential: None,
            aleph: None,
            couplings,
            axial_mode: AxialMode::Given,
        };
        field.psi = (0..n).into_par_iter().map(|k| f(field.coordinates(k))).collect();
        field.validate()?;
        Ok(field)
    }

    pub fn with_potential_fn<F: Fn([f64; 4]) -> [f64; 4] + Sync>(mut self, f: F) -> Self {
        let n = self.len();
        self.potential = Some((0..n).into_par_iter().map(|k| f(self.coordinates(k))).collect());
        self
    }

    pub fn with_aleph_fn<F: Fn([f64; 4]) -> [f64; 4] + Sync>(mut self, f: F) -> Self {
        let n = self.len();
        self.aleph = Some((0..n).into_par_iter().map(|k| f(self.coordinates(k))).collect());
        self
    }

    pub fn validate(&self) -> Result<()> {
        let n: usize = self.dims.iter().product();
        if n == 0 {
            return Err(Error::InvalidParameter("grid has no nodes".into()));
        }
        for axis in 0..4 {
            let d = self.dims[axis];
            if d > 1 && d < MIN_AXIS_POINTS {
                return Err(Error::GridTooSmall { axis, points: d });
            }
            if !(self.spacing[axis] > 0.0) {
                return Err(Error::InvalidParameter(format!("spacing on axis {axis} must be positive")));
            }
        }
        if self.psi.len() != n {
            return Err(Error::InvalidParameter(format!(
                "expected {n} spinors, got {}",
                self.psi.len()
            )));
        }
        for (name, arr) in [("A", &self.potential), ("aleph", &self.aleph)] {
            if let Some(a) = arr {
                if a.len() != n {
                    return Err(Error::InvalidParameter(format!("{name} has {} nodes, expected {n}", a.len())));
                }
            }
        }
        if self.axial_mode == AxialMode::Gradient && self.couplings.axial == 0.0 {
            return Err(Error::InvalidParameter("gradient axial mode needs g != 0".into()));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.psi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.psi.is_empty()
    }

    pub fn index(&self, ix: [usize; 4]) -> usize {
        ((ix[0] * self.dims[1] + ix[1]) * self.dims[2] + ix[2]) * self.dims[3] + ix[3]
    }

    pub fn multi_index(&self, mut k: usize) -> [usize; 4] {
        let mut ix = [0; 4];
        for axis in (0..4).rev() {
            ix[axis] = k % self.dims[axis];
            k /= self.dims[axis];
        }
        ix
    }

    pub fn coordinates(&self, k: usize) -> [f64; 4] {
        let ix = self.multi_index(k);
        std::array::from_fn(|a| self.origin[a] + ix[a] as f64 * self.spacing[a])
    }

    /// At least `INTERIOR_MARGIN` nodes from every differentiated boundary.
    pub fn is_interior(&self, k: usize) -> bool {
        let ix = self.multi_index(k);
        (0..4).all(|a| {
            self.dims[a] == 1
                || (ix[a] >= INTERIOR_MARGIN && ix[a] + INTERIOR_MARGIN < self.dims[a])
        })
    }

    /// Finite-difference weights for `d/dx^axis` at node `k`, or `None` for an
    /// undifferentiated axis.
    pub fn stencil(&self, k: usize, axis: usize) -> Option<[(usize, f64); 3]> {
        let n = self.dims[axis];
        if n == 1 {
            return None;
        }
        let ix = self.multi_index(k);
        let stride: usize = self.dims[axis + 1..].iter().product();
        let h = self.spacing[axis];
        let i = ix[axis];
        Some(if i == 0 {
            [(k, -1.5 / h), (k + stride, 2.0 / h), (k + 2 * stride, -0.5 / h)]
        } else if i == n - 1 {
            [(k, 1.5 / h), (k - stride, -2.0 / h), (k - 2 * stride, 0.5 / h)]
        } else {
            [(k + stride, 0.5 / h), (k - stride, -0.5 / h), (k, 0.0)]
        })
    }
}

/// Pointwise data that needs no derivatives.
#[derive(Debug, Clone)]
struct NodeData {
    e: Matrix4<f64>,
    g: Matrix4<f64>,
    sqrt_neg_g: f64,
    density: f64,
    angle: f64,
    scalar: f64,
    pseudoscalar: f64,
    vector: [f64; 4],
    axial: [f64; 4],
    valid: bool,
}

impl NodeData {
    fn degenerate() -> Self {
        Self {
            e: Matrix4::zeros(),
            g: Matrix4::zeros(),
            sqrt_neg_g: f64::NAN,
            density: 0.0,
            angle: 0.0,
            scalar: 0.0,
            pseudoscalar: 0.0,
            vector: [0.0; 4],
            axial: [0.0; 4],
            valid: false,
        }
    }

    fn compute(psi: &Spinor) -> Self {
        let set = compute_bilinears(psi);
        let Ok(t) = build_tetrad_with_floor(psi, density_floor(psi)) else {
            return Self::degenerate();
        };
        let Ok(metric) = metric_of(&t.e) else {
            return Self::degenerate();
        };
        Self {
            sqrt_neg_g: 1.0 / t.e.determinant().abs(),
            e: t.e,
            g: metric.g,
            density: set.density_sq.sqrt(),
            angle: set.chiral_angle,
            scalar: set.scalar,
            pseudoscalar: set.pseudoscalar,
            vector: set.vector.into(),
            axial: set.axial.into(),
            valid: true,
        }
    }
}

/// Everything at one node that needs first derivatives of the field.
#[derive(Debug, Clone)]
pub struct NodeLocal {
    pub node: usize,
    /// Tetrad rows `e_(a)^mu`.
    pub tetrad: Matrix4<f64>,
    pub omega: Omega,
    pub density: f64,
    /// Chiral angle at this node (not unwrapped).
    pub angle: f64,
    pub scalar: f64,
    pub pseudoscalar: f64,
    /// Spinor in its own frame.
    pub frame_spinor: Spinor,
    /// Directional derivatives `d_a psi'`.
    pub frame_derivative: [Spinor; 4],
    /// `D_a psi' = d_a psi' - Gamma_a psi'`.
    pub covariant: [Spinor; 4],
    pub connection: [ComplexMatrix4; 4],
    pub potential: [f64; 4],
    pub aleph: [f64; 4],
    /// Directional derivatives of `ln R`, `S`, `P` and `U`.
    pub d_ln_density: [f64; 4],
    pub d_scalar: [f64; 4],
    pub d_pseudoscalar: [f64; 4],
    pub d_angle: [f64; 4],
    /// Coordinate divergences of `j`, `J`, `j_L`, `j_R`.
    pub divergence: [f64; 4],
}

/// Spin connection `Gamma_b` from the rotation coefficients and the two
/// potentials at one node:
/// `Gamma_b = i e A_b + i g rho3 aleph_b + 1/2 omega_{0kb} rho3 sigma_k
///  - (i/4) eps_{kim} omega_{imb} sigma_k`.
/// It is block diagonal in chirality, which is how it is assembled here.
pub fn connection_matrix(
    omega: &Omega,
    b: usize,
    potential_b: f64,
    aleph_b: f64,
    couplings: &Couplings,
) -> ComplexMatrix4 {
    let electric = couplings.charge * potential_b;
    let axial = couplings.axial * aleph_b;
    let mut m = ComplexMatrix4::zeros();
    for (offset, chir) in [(0usize, 1.0f64), (2, -1.0)] {
        let diag = Complex64::new(0.0, electric + chir * axial);
        // coefficient of tau_k in this block
        let c: [Complex64; 3] = std::array::from_fn(|k| {
            let (i, l) = ((k + 1) % 3 + 1, (k + 2) % 3 + 1);
            Complex64::new(0.5 * chir * omega[0][k + 1][b], -0.5 * omega[i][l][b])
        });
        m[(offset, offset)] = diag + c[2];
        m[(offset + 1, offset + 1)] = diag - c[2];
        m[(offset, offset + 1)] = c[0] - I * c[1];
        m[(offset + 1, offset)] = c[0] + I * c[1];
    }
    m
}

/// Largest defects of `Gamma_b^dag alpha_a + alpha_a Gamma_b = omega_{acb} alpha^c`
/// and of the `rho_1`/`rho_2` relations
/// `Gamma^dag rho_1 + rho_1 Gamma = 2 g rho_2 aleph`,
/// `Gamma^dag rho_2 + rho_2 Gamma = -2 g rho_1 aleph`.
pub fn connection_defects(
    omega: &Omega,
    connection: &[ComplexMatrix4; 4],
    aleph: &[f64; 4],
    axial_coupling: f64,
) -> (f64, f64) {
    let bs = basis();
    let (rho1, rho2) = (bs.rho[0], bs.rho[1]);
    let mut transport = 0.0f64;
    let mut mixing = 0.0f64;
    for b in 0..4 {
        let gm = &connection[b];
        let gd = gm.adjoint();
        for a in 0..4 {
            let al = bs.alpha[a] * Complex64::from(METRIC[a]);
            let mut rhs = ComplexMatrix4::zeros();
            for c in 0..4 {
                rhs += bs.alpha[c] * Complex64::from(omega[a][c][b]);
            }
            let d = gd * al + al * gm - rhs;
            transport = transport.max(d.iter().map(|z| z.norm()).fold(0.0, f64::max));
        }
        let ga = 2.0 * axial_coupling * aleph[b];
        let d1 = gd * rho1 + rho1 * gm - rho2 * Complex64::from(ga);
        let d2 = gd * rho2 + rho2 * gm + rho1 * Complex64::from(ga);
        for d in [d1, d2] {
            mixing = mixing.max(d.iter().map(|z| z.norm()).fold(0.0, f64::max));
        }
    }
    (transport, mixing)
}

fn sandwich(a: &Spinor, m: &ComplexMatrix4, b: &Spinor) -> Complex64 {
    a.dotc(&(m * b))
}

impl NodeLocal {
    /// `T^a_b = i psi'^dag alpha^a D_b psi'`, indexed `[a][b]`.
    pub fn energy_momentum(&self) -> [[Complex64; 4]; 4] {
        let bs = basis();
        std::array::from_fn(|a| {
            std::array::from_fn(|b| I * sandwich(&self.frame_spinor, &bs.alpha[a], &self.covariant[b]))
        })
    }

    /// `P^a_b = i psi'^dag rho3 alpha^a D_b psi'`, indexed `[a][b]`.
    pub fn stress(&self) -> [[Complex64; 4]; 4] {
        std::array::from_fn(|a| {
            std::array::from_fn(|b| {
                I * sandwich(&self.frame_spinor, &products().axial[a], &self.covariant[b])
            })
        })
    }

    /// Coordinate components `T^mu_nu = e_(a)^mu T^a_b e^(b)_nu`.
    pub fn lab_energy_momentum(&self) -> Result<Matrix4<Complex64>> {
        let co = reciprocal_of(&self.tetrad)?;
        let t = self.energy_momentum();
        Ok(Matrix4::from_fn(|mu, nu| {
            let mut s = ZERO;
            for a in 0..4 {
                for b in 0..4 {
                    s += t[a][b] * self.tetrad[(a, mu)] * co[(b, nu)];
                }
            }
            s
        }))
    }

    /// Frame components `J^a` of the axial current.
    fn frame_axial(&self) -> [f64; 4] {
        std::array::from_fn(|a| {
            sandwich(&self.frame_spinor, &products().axial[a], &self.frame_spinor).re
        })
    }
}

/// Named residual families evaluated from first derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Family {
    /// `|alpha^a D_a psi + i m rho1 psi|`.
    Dirac,
    /// `div j`.
    VectorDivergence,
    /// `div J - 2 m P`.
    AxialDivergence,
    /// `div j_L - m P`.
    LeftDivergence,
    /// `div j_R + m P`.
    RightDivergence,
    /// `max_b |omega_{acb} T_{ca} - 2 m g P aleph_b|`.
    TraceBalance,
    /// Same with `omega_{abc}` in place of `omega_{acb}`.
    TraceBalanceSwapped,
    /// `max_b |omega_{acb} P_{ca} + 2 i g m S aleph_b|`.
    AxialTraceBalance,
    /// `max_a |omega_{a00} + d_a ln R|`, `a = 1, 2, 3`.
    DensityGradient,
    /// `sum_a eta_(a) omega_{0aa} + d_0 ln R`.
    FrameExpansion,
    /// `omega_131 + omega_232 - 2 m sin U`.
    AxialExpansion,
    /// `max_b |1/4 omega_{acb} eps^{acst} D_s J_t - 2 m g P aleph_b|`.
    AxialCurlBalance,
    /// `max |omega_{0ab} - omega_{0ba}|` over spatial pairs.
    ShearSymmetry,
    /// Leibniz `D_b j_a` against `d_b j_a - omega_{acb} j^c`.
    VectorTransport,
    /// `max_a |D_a S + 2 g P aleph_a - d_a S|`.
    ScalarAnomaly,
    /// `max_a |J^a + eta_(a) D_a P / 2m - I^a / 2m|`.
    AxialGordon,
    /// Worst defect of the connection's defining relations.
    ConnectionDefect,
}

impl Family {
    pub const ALL: [Family; 17] = [
        Family::Dirac,
        Family::VectorDivergence,
        Family::AxialDivergence,
        Family::LeftDivergence,
        Family::RightDivergence,
        Family::TraceBalance,
        Family::TraceBalanceSwapped,
        Family::AxialTraceBalance,
        Family::DensityGradient,
        Family::FrameExpansion,
        Family::AxialExpansion,
        Family::AxialCurlBalance,
        Family::ShearSymmetry,
        Family::VectorTransport,
        Family::ScalarAnomaly,
        Family::AxialGordon,
        Family::ConnectionDefect,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Dirac => "dirac",
            Family::VectorDivergence => "vector_divergence",
            Family::AxialDivergence => "axial_divergence",
            Family::LeftDivergence => "left_divergence",
            Family::RightDivergence => "right_divergence",
            Family::TraceBalance => "trace_balance",
            Family::TraceBalanceSwapped => "trace_balance_swapped",
            Family::AxialTraceBalance => "axial_trace_balance",
            Family::DensityGradient => "density_gradient",
            Family::FrameExpansion => "frame_expansion",
            Family::AxialExpansion => "axial_expansion",
            Family::AxialCurlBalance => "axial_curl_balance",
            Family::ShearSymmetry => "shear_symmetry",
            Family::VectorTransport => "vector_transport",
            Family::ScalarAnomaly => "scalar_anomaly",
            Family::AxialGordon => "axial_gordon",
            Family::ConnectionDefect => "connection_defect",
        }
    }

    pub fn from_name(name: &str) -> Option<Family> {
        Family::ALL.iter().copied().find(|f| f.name() == name)
    }

    /// Families that vanish on exact solutions of the free equation.
    pub fn holds_on_solutions(self) -> bool {
        matches!(
            self,
            Family::Dirac
                | Family::VectorDivergence
                | Family::AxialDivergence
                | Family::LeftDivergence
                | Family::RightDivergence
                | Family::FrameExpansion
                | Family::VectorTransport
                | Family::ScalarAnomaly
                | Family::AxialGordon
                | Family::ConnectionDefect
        )
    }

    pub fn evaluate(self, l: &NodeLocal, c: &Couplings) -> f64 {
        let bs = basis();
        let pr = products();
        let (m, g) = (c.mass, c.axial);
        let psi = &l.frame_spinor;
        let om = &l.omega;
        match self {
            Family::Dirac => {
                let mut r = bs.rho[0] * psi * (I * m);
                for a in 0..4 {
                    r += bs.alpha[a] * l.covariant[a];
                }
                r.norm()
            }
            Family::VectorDivergence => l.divergence[0],
            Family::AxialDivergence => l.divergence[1] - 2.0 * m * l.pseudoscalar,
            Family::LeftDivergence => l.divergence[2] - m * l.pseudoscalar,
            Family::RightDivergence => l.divergence[3] + m * l.pseudoscalar,
            Family::TraceBalance | Family::TraceBalanceSwapped => {
                let t = l.energy_momentum();
                let swapped = self == Family::TraceBalanceSwapped;
                (0..4)
                    .map(|b| {
                        let mut s = ZERO;
                        for a in 0..4 {
                            for cc in 0..4 {
                                let w = if swapped { om[a][b][cc] } else { om[a][cc][b] };
                                s += t[cc][a] * (METRIC[a] * w);
                            }
                        }
                        (s - 2.0 * m * g * l.pseudoscalar * l.aleph[b]).norm()
                    })
                    .fold(0.0, f64::max)
            }
            Family::AxialTraceBalance => {
                let p = l.stress();
                (0..4)
                    .map(|b| {
                        let mut s = ZERO;
                        for a in 0..4 {
                            for cc in 0..4 {
                                s += p[cc][a] * (METRIC[a] * om[a][cc][b]);
                            }
                        }
                        (s + I * (2.0 * g * m * l.scalar * l.aleph[b])).norm()
                    })
                    .fold(0.0, f64::max)
            }
            Family::DensityGradient => (1..4)
                .map(|a| (om[a][0][0] + l.d_ln_density[a]).abs())
                .fold(0.0, f64::max),
            Family::FrameExpansion => {
                (0..4).map(|a| METRIC[a] * om[0][a][a]).sum::<f64>() + l.d_ln_density[0]
            }
            Family::AxialExpansion => om[1][3][1] + om[2][3][2] - 2.0 * m * l.angle.sin(),
            Family::AxialCurlBalance => {
                let jf = l.frame_axial();
                // D_s J_t = d_s J_t - omega_{tcs} J^c with J_t = eta_t J^t
                let djt = |s: usize, t: usize| -> f64 {
                    let d = 2.0
                        * sandwich(psi, &pr.axial[t], &l.frame_derivative[s]).re
                        * METRIC[t];
                    d - (0..4).map(|cc| om[t][cc][s] * jf[cc]).sum::<f64>()
                };
                let mut grad = [[0.0; 4]; 4];
                for (s, row) in grad.iter_mut().enumerate() {
                    for (t, v) in row.iter_mut().enumerate() {
                        *v = djt(s, t);
                    }
                }
                (0..4)
                    .map(|b| {
                        let acc: f64 = pr
                            .levi
                            .iter()
                            .map(|&(a, cc, s, t, e)| om[a][cc][b] * e * grad[s][t])
                            .sum();
                        (0.25 * acc - 2.0 * m * g * l.pseudoscalar * l.aleph[b]).abs()
                    })
                    .fold(0.0, f64::max)
            }
            Family::ShearSymmetry => [(1, 2), (1, 3), (2, 3)]
                .iter()
                .map(|&(a, b)| (om[0][a][b] - om[0][b][a]).abs())
                .fold(0.0, f64::max),
            Family::VectorTransport => {
                let jf: [f64; 4] =
                    std::array::from_fn(|a| sandwich(psi, &bs.alpha[a], psi).re);
                let mut worst = 0.0f64;
                for a in 0..4 {
                    let al = bs.alpha[a] * Complex64::from(METRIC[a]);
                    for b in 0..4 {
                        let leibniz = 2.0 * sandwich(psi, &al, &l.covariant[b]).re;
                        // frame components of j are (R, 0, 0, 0)
                        let dj = if a == 0 { l.density * l.d_ln_density[b] } else { 0.0 };
                        let transported = dj - (0..4).map(|cc| om[a][cc][b] * jf[cc]).sum::<f64>();
                        worst = worst.max((leibniz - transported).abs());
                    }
                }
                worst
            }
            Family::ScalarAnomaly => (0..4)
                .map(|a| {
                    let ds = 2.0 * sandwich(psi, &bs.rho[0], &l.covariant[a]).re;
                    (ds + 2.0 * g * l.pseudoscalar * l.aleph[a] - l.d_scalar[a]).abs()
                })
                .fold(0.0, f64::max),
            Family::AxialGordon => {
                if m == 0.0 {
                    return f64::NAN;
                }
                let jf = l.frame_axial();
                (0..4)
                    .map(|a| {
                        let mut ia = ZERO;
                        for b in 0..4 {
                            let am = pr.polar[a][b] - pr.polar[b][a];
                            ia += sandwich(psi, &am, &l.covariant[b])
                                - sandwich(&l.covariant[b], &am, psi);
                        }
                        ia *= -0.5;
                        let dp = l.d_pseudoscalar[a] + 2.0 * g * l.scalar * l.aleph[a];
                        (jf[a] + METRIC[a] * dp / (2.0 * m) - ia / (2.0 * m)).norm()
                    })
                    .fold(0.0, f64::max)
            }
            Family::ConnectionDefect => {
                let (a, b) = connection_defects(om, &l.connection, &l.aleph, g);
                a.max(b)
            }
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ResidualField {
    pub name: String,
    /// One value per node; `NaN` where the node or its stencil is degenerate.
    pub values: Vec<f64>,
    /// Nodes whose own density is below the floor.
    pub degenerate: Vec<bool>,
    /// Largest `|value|` over interior nodes with a value.
    pub max_interior: f64,
    /// Root mean square over the same nodes.
    pub rms_interior: f64,
    /// Nodes without a value (degenerate or next to a degenerate node).
    pub masked: usize,
}

impl ResidualField {
    fn from_values(field: &SpinorField, name: &str, values: Vec<f64>, degenerate: Vec<bool>) -> Self {
        let (mut max, mut sq, mut count) = (0.0f64, 0.0f64, 0usize);
        let mut masked = 0;
        for (k, v) in values.iter().enumerate() {
            if !v.is_finite() {
                masked += 1;
                continue;
            }
            if field.is_interior(k) {
                max = max.max(v.abs());
                sq += v * v;
                count += 1;
            }
        }
        Self {
            name: name.to_string(),
            values,
            degenerate,
            max_interior: max,
            rms_interior: if count > 0 { (sq / count as f64).sqrt() } else { 0.0 },
            masked,
        }
    }
}

/// Pointwise tetrads, metrics and bilinears of a field, from which per-node
/// derivative data is computed on demand.
pub struct GridAnalysis<'a> {
    pub field: &'a SpinorField,
    data: Vec<NodeData>,
}

fn scaled<const N: usize>(acc: &mut [f64; N], v: &[f64; N], w: f64) {
    for i in 0..N {
        acc[i] += w * v[i];
    }
}

impl<'a> GridAnalysis<'a> {
    pub fn new(field: &'a SpinorField) -> Result<Self> {
        field.validate()?;
        let data = field.psi.par_iter().map(NodeData::compute).collect();
        Ok(Self { field, data })
    }

    pub fn is_degenerate(&self, k: usize) -> bool {
        !self.data[k].valid
    }

    pub fn degenerate_count(&self) -> usize {
        self.data.iter().filter(|d| !d.valid).count()
    }

    pub fn tetrad(&self, k: usize) -> Option<Matrix4<f64>> {
        self.data[k].valid.then_some(self.data[k].e)
    }

    fn stencils(&self, k: usize) -> [Option<[(usize, f64); 3]>; 4] {
        std::array::from_fn(|axis| self.field.stencil(k, axis))
    }

    /// Coordinate derivatives of a per-node quantity.
    fn coord_derivative<const N: usize>(
        &self,
        st: &[Option<[(usize, f64); 3]>; 4],
        f: impl Fn(usize) -> [f64; N],
    ) -> [[f64; N]; 4] {
        std::array::from_fn(|axis| {
            let mut acc = [0.0; N];
            if let Some(s) = st[axis] {
                for &(n, w) in &s {
                    if w != 0.0 {
                        scaled(&mut acc, &f(n), w);
                    }
                }
            }
            acc
        })
    }

    /// First-derivative data at node `k`, or `None` if the node or any node
    /// of its stencil is degenerate.
    pub fn local(&self, k: usize) -> Option<NodeLocal> {
        let field = self.field;
        let c = &self.data[k];
        if !c.valid {
            return None;
        }
        let st = self.stencils(k);
        for s in st.iter().flatten() {
            if s.iter().any(|&(n, _)| !self.data[n].valid) {
                return None;
            }
        }
        let align = |u: f64| c.angle + wrap_angle(u - c.angle);
        let e = c.e;
        let flat16 = |m: &Matrix4<f64>| -> [f64; 16] { std::array::from_fn(|i| m[(i / 4, i % 4)]) };

        let d_e = self.coord_derivative(&st, |n| flat16(&self.data[n].e));
        let d_g = self.coord_derivative(&st, |n| flat16(&self.data[n].g));
        let d_scal = self.coord_derivative(&st, |n| {
            let d = &self.data[n];
            [d.density.ln(), d.scalar, d.pseudoscalar, align(d.angle)]
        });
        let d_psi: [[f64; 8]; 4] = self.coord_derivative(&st, |n| {
            let d = &self.data[n];
            let s = frame_spinor_from(d.density, align(d.angle));
            std::array::from_fn(|i| if i % 2 == 0 { s[i / 2].re } else { s[i / 2].im })
        });
        let d_cur: [[f64; 16]; 4] = self.coord_derivative(&st, |n| {
            let d = &self.data[n];
            let w = d.sqrt_neg_g;
            std::array::from_fn(|i| {
                let (kind, mu) = (i / 4, i % 4);
                let (j, ax) = (d.vector[mu], d.axial[mu]);
                w * match kind {
                    0 => j,
                    1 => ax,
                    2 => 0.5 * (j + ax),
                    _ => 0.5 * (j - ax),
                }
            })
        });
        let divergence: [f64; 4] =
            std::array::from_fn(|kind| (0..4).map(|mu| d_cur[mu][4 * kind + mu]).sum::<f64>() / c.sqrt_neg_g);

        // Christoffel symbols of the pointwise metric
        let ginv = e.transpose() * Matrix4::from_diagonal(&METRIC.into()) * e;
        let dg = |lam: usize, s: usize, mu: usize| d_g[lam][s * 4 + mu];
        let mut chris = [[[0.0f64; 4]; 4]; 4]; // [nu][mu][lam]
        for (nu, plane) in chris.iter_mut().enumerate() {
            for (mu, row) in plane.iter_mut().enumerate() {
                for (lam, v) in row.iter_mut().enumerate() {
                    let mut s = 0.0;
                    for sg in 0..4 {
                        let gi = ginv[(nu, sg)];
                        if gi != 0.0 {
                            s += gi * (dg(mu, sg, lam) + dg(lam, sg, mu) - dg(sg, mu, lam));
                        }
                    }
                    *v = 0.5 * s;
                }
            }
        }
        // nabla_mu e_(b)^nu
        let mut nab = [[[0.0f64; 4]; 4]; 4]; // [mu][b][nu]
        for mu in 0..4 {
            for b in 0..4 {
                for nu in 0..4 {
                    let mut v = d_e[mu][b * 4 + nu];
                    for lam in 0..4 {
                        v += chris[nu][mu][lam] * e[(b, lam)];
                    }
                    nab[mu][b][nu] = v;
                }
            }
        }
        let e_low = e * c.g; // row c: e_(c)nu = e_(c)^sigma g_{sigma nu}
        let mut omega: Omega = [[[0.0; 4]; 4]; 4];
        for b in 0..4 {
            for cc in 0..4 {
                for a in 0..4 {
                    let mut s = 0.0;
                    for mu in 0..4 {
                        let ea = e[(a, mu)];
                        if ea == 0.0 {
                            continue;
                        }
                        let mut inner = 0.0;
                        for nu in 0..4 {
                            inner += nab[mu][b][nu] * e_low[(cc, nu)];
                        }
                        s += ea * inner;
                    }
                    omega[b][cc][a] = s;
                }
            }
        }
        // e_b . e_c is constant, so omega is skew in its first pair; the
        // differenced products only satisfy that to O(h^2), and the connection
        // relations need it exactly.
        for a in 0..4 {
            for b in 0..4 {
                for cc in b..4 {
                    let v = 0.5 * (omega[b][cc][a] - omega[cc][b][a]);
                    omega[b][cc][a] = v;
                    omega[cc][b][a] = -v;
                }
            }
        }

        let dir = |v: &dyn Fn(usize) -> f64| -> [f64; 4] {
            std::array::from_fn(|a| (0..4).map(|mu| e[(a, mu)] * v(mu)).sum())
        };
        let d_ln_density = dir(&|mu| d_scal[mu][0]);
        let d_scalar = dir(&|mu| d_scal[mu][1]);
        let d_pseudoscalar = dir(&|mu| d_scal[mu][2]);
        let d_angle = dir(&|mu| d_scal[mu][3]);
        let frame_derivative: [Spinor; 4] = std::array::from_fn(|a| {
            let mut s = Spinor::zeros();
            for mu in 0..4 {
                let w = e[(a, mu)];
                if w != 0.0 {
                    for i in 0..4 {
                        s[i] += Complex64::new(d_psi[mu][2 * i], d_psi[mu][2 * i + 1]) * w;
                    }
                }
            }
            s
        });
        let potential = field.potential.as_ref().map_or([0.0; 4], |p| p[k]);
        let aleph = match field.axial_mode {
            AxialMode::Given => field.aleph.as_ref().map_or([0.0; 4], |p| p[k]),
            AxialMode::Gradient => d_angle.map(|d| -d / (2.0 * field.couplings.axial)),
        };
        let connection: [ComplexMatrix4; 4] = std::array::from_fn(|b| {
            connection_matrix(&omega, b, potential[b], aleph[b], &field.couplings)
        });
        let frame_spinor = frame_spinor_from(c.density, c.angle);
        let covariant = std::array::from_fn(|a| frame_derivative[a] - connection[a] * frame_spinor);
        Some(NodeLocal {
            node: k,
            tetrad: e,
            omega,
            density: c.density,
            angle: c.angle,
            scalar: c.scalar,
            pseudoscalar: c.pseudoscalar,
            frame_spinor,
            frame_derivative,
            covariant,
            connection,
            potential,
            aleph,
            d_ln_density,
            d_scalar,
            d_pseudoscalar,
            d_angle,
            divergence,
        })
    }

    /// Residual fields for the requested families in one sweep.
    pub fn residuals(&self, families: &[Family]) -> Vec<ResidualField> {
        let couplings = self.field.couplings;
        let n = self.field.len();
        let nf = families.len();
        let flat: Vec<f64> = (0..n)
            .into_par_iter()
            .flat_map_iter(|k| {
                let vals: Vec<f64> = match self.local(k) {
                    Some(l) => families.iter().map(|f| f.evaluate(&l, &couplings)).collect(),
                    None => vec![f64::NAN; nf],
                };
                vals.into_iter()
            })
            .collect();
        let degenerate: Vec<bool> = self.data.iter().map(|d| !d.valid).collect();
        families
            .iter()
            .enumerate()
            .map(|(i, f)| {
                let values: Vec<f64> = (0..n).map(|k| flat[k * nf + i]).collect();
                ResidualField::from_values(self.field, f.name(), values, degenerate.clone())
            })
            .collect()
    }

    /// Sign relating a neighbour's own frame spinor to the one aligned with
    /// the centre's chiral angle (the half-angle flips sign across a `2 pi`
    /// unwrap).
    fn branch_sign(&self, center: usize, neighbour: usize) -> f64 {
        let uc = self.data[center].angle;
        let un = self.data[neighbour].angle;
        let aligned = uc + wrap_angle(un - uc);
        let turns = ((aligned - un) / (2.0 * std::f64::consts::PI)).round() as i64;
        if turns % 2 == 0 { 1.0 } else { -1.0 }
    }

    /// Locals at the centre and at every node of its stencils.
    fn neighbourhood(&self, k: usize) -> Result<(NodeLocal, Vec<(usize, NodeLocal)>)> {
        let center = self.local(k).ok_or(Error::DegenerateDensity { r2: self.data[k].density.powi(2), floor: 0.0 })?;
        let mut around = Vec::new();
        for s in self.stencils(k).iter().flatten() {
            for &(n, _) in s {
                if around.iter().any(|(m, _)| *m == n) {
                    continue;
                }
                let l = if n == k {
                    center.clone()
                } else {
                    self.local(n).ok_or(Error::DegenerateDensity {
                        r2: self.data[n].density.powi(2),
                        floor: 0.0,
                    })?
                };
                around.push((n, l));
            }
        }
        Ok((center, around))
    }

    /// Directional derivative `d_a` at `k` of a quantity given at the stencil
    /// nodes.
    fn directional<const N: usize>(
        &self,
        k: usize,
        tetrad: &Matrix4<f64>,
        around: &[(usize, NodeLocal)],
        f: impl Fn(usize, &NodeLocal) -> [f64; N],
    ) -> [[f64; N]; 4] {
        let st = self.stencils(k);
        let lookup = |n: usize| &around.iter().find(|(m, _)| *m == n).expect("stencil node").1;
        let coord = self.coord_derivative(&st, |n| f(n, lookup(n)));
        std::array::from_fn(|a| {
            let mut acc = [0.0; N];
            for (mu, row) in coord.iter().enumerate() {
                scaled(&mut acc, row, tetrad[(a, mu)]);
            }
            acc
        })
    }

    /// Tetrad components of the Riemann tensor at node `k`:
    /// `R_{abcd} = d_d w_{abc} - d_c w_{abd}
    ///  + sum_f eta_f [w_{fad} w_{fbc} - w_{fac} w_{fbd} + w_{abf} (w_{fcd} - w_{fdc})]`.
    pub fn riemann_at(&self, k: usize) -> Result<Riemann> {
        let (center, around) = self.neighbourhood(k)?;
        Ok(self.riemann_from(k, &center, &around))
    }

    fn riemann_from(&self, k: usize, center: &NodeLocal, around: &[(usize, NodeLocal)]) -> Riemann {
        let d_om = self.directional(k, &center.tetrad, around, |_, l| -> [f64; 64] {
            std::array::from_fn(|i| l.omega[i / 16][(i / 4) % 4][i % 4])
        });
        let om = &center.omega;
        let dw = |d: usize, a: usize, b: usize, c: usize| d_om[d][a * 16 + b * 4 + c];
        let mut r = [[[[0.0f64; 4]; 4]; 4]; 4];
        for a in 0..4 {
            for b in 0..4 {
                for c in 0..4 {
                    for d in 0..4 {
                        let mut v = dw(d, a, b, c) - dw(c, a, b, d);
                        for f in 0..4 {
                            v += METRIC[f]
                                * (om[f][a][d] * om[f][b][c] - om[f][a][c] * om[f][b][d]
                                    + om[a][b][f] * (om[f][c][d] - om[f][d][c]));
                        }
                        r[a][b][c][d] = v;
                    }
                }
            }
        }
        let mut scalar = 0.0;
        for a in 0..4 {
            for b in 0..4 {
                scalar += METRIC[a] * METRIC[b] * r[a][b][a][b];
            }
        }
        Riemann { components: r, scalar }
    }

    /// Numerical `[D_a, D_b] psi'` at node `k` against
    /// `C_{cab} D_c psi' - DD_{ab} psi'`, with
    /// `DD_{ab} = -1/4 R_{abcd} rho1 alpha^c rho1 alpha^d + i e F_{ab} + i g rho3 U_{ab}`.
    pub fn commutator_decomposition(&self, k: usize, a: usize, b: usize) -> Result<CommutatorCheck> {
        if a > 3 || b > 3 {
            return Err(Error::InvalidParameter("frame indices must be 0..=3".into()));
        }
        let (center, around) = self.neighbourhood(k)?;
        let riem = self.riemann_from(k, &center, &around);
        Ok(self.commutator_from(k, a, b, &center, &around, &riem))
    }

    /// Largest commutator defect over the six frame planes at node `k`.
    pub fn commutator_defect_at(&self, k: usize) -> Result<f64> {
        let (center, around) = self.neighbourhood(k)?;
        let riem = self.riemann_from(k, &center, &around);
        let mut worst = 0.0f64;
        for a in 0..4 {
            for b in a + 1..4 {
                worst = worst.max(self.commutator_from(k, a, b, &center, &around, &riem).defect);
            }
        }
        Ok(worst)
    }

    fn commutator_from(
        &self,
        k: usize,
        a: usize,
        b: usize,
        center: &NodeLocal,
        around: &[(usize, NodeLocal)],
        riem: &Riemann,
    ) -> CommutatorCheck {
        let bs = basis();
        let cpl = &self.field.couplings;
        let spinor_flat = |s: &Spinor, sign: f64| -> [f64; 8] {
            std::array::from_fn(|i| sign * if i % 2 == 0 { s[i / 2].re } else { s[i / 2].im })
        };
        let unflat = |v: &[f64; 8]| Spinor::from_fn(|i, _| Complex64::new(v[2 * i], v[2 * i + 1]));
        let d_cov_b = self.directional(k, &center.tetrad, around, |n, l| {
            spinor_flat(&l.covariant[b], self.branch_sign(k, n))
        });
        let d_cov_a = self.directional(k, &center.tetrad, around, |n, l| {
            spinor_flat(&l.covariant[a], self.branch_sign(k, n))
        });
        let lhs = (unflat(&d_cov_b[a]) - center.connection[a] * center.covariant[b])
            - (unflat(&d_cov_a[b]) - center.connection[b] * center.covariant[a]);

        let om = &center.omega;
        let torsion = |c: usize| om[c][a][b] - om[c][b][a];
        let d_pot = self.directional(k, &center.tetrad, around, |_, l| -> [f64; 8] {
            std::array::from_fn(|i| if i < 4 { l.potential[i] } else { l.aleph[i - 4] })
        });
        let field_strength = |off: usize, vals: &[f64; 4]| -> f64 {
            d_pot[a][off + b] - d_pot[b][off + a]
                - (0..4).map(|c| METRIC[c] * torsion(c) * vals[c]).sum::<f64>()
        };
        let f_ab = field_strength(0, &center.potential);
        let u_ab = field_strength(4, &center.aleph);
        let mut curvature = ComplexMatrix4::zeros();
        for c in 0..4 {
            for d in 0..4 {
                let r = riem.components[a][b][c][d];
                if r != 0.0 {
                    curvature += bs.rho[0] * bs.alpha[c] * bs.rho[0] * bs.alpha[d] * Complex64::from(-0.25 * r);
                }
            }
        }
        let dd = curvature
            + ComplexMatrix4::identity() * (I * cpl.charge * f_ab)
            + bs.rho[2] * (I * cpl.axial * u_ab);
        let mut rhs = -(dd * center.frame_spinor);
        for c in 0..4 {
            rhs += center.covariant[c] * Complex64::from(METRIC[c] * torsion(c));
        }
        CommutatorCheck {
            defect: (lhs - rhs).norm(),
            lhs,
            rhs,
            field_strength: f_ab,
            axial_strength: u_ab,
            curvature_operator: dd,
        }
    }

    /// Residual of the approximate pseudoscalar wave equation
    /// `D^a D_a P - (R_s/2) P + C_{cab} Re[psi^dag alpha^a rho2 alpha^b D_c psi]
    ///  - e F_{ab} Mdual^{ab}` at node `k`.
    pub fn pseudoscalar_wave_at(&self, k: usize) -> Result<f64> {
        let (center, around) = self.neighbourhood(k)?;
        let cpl = &self.field.couplings;
        let g = cpl.axial;
        let om = &center.omega;
        // D_b P = d_b P + 2 g S aleph_b and D_b S = d_b S - 2 g P aleph_b
        let dp = |l: &NodeLocal| -> [f64; 4] {
            std::array::from_fn(|b| l.d_pseudoscalar[b] + 2.0 * g * l.scalar * l.aleph[b])
        };
        let ds = |l: &NodeLocal| -> [f64; 4] {
            std::array::from_fn(|b| l.d_scalar[b] - 2.0 * g * l.pseudoscalar * l.aleph[b])
        };
        let d_dp = self.directional(k, &center.tetrad, &around, |_, l| dp(l));
        let v = dp(&center);
        let w = ds(&center);
        let mut wave = 0.0;
        for a in 0..4 {
            let transport: f64 = (0..4).map(|c| METRIC[c] * om[a][c][a] * v[c]).sum();
            wave += METRIC[a] * (d_dp[a][a] - transport + 2.0 * g * center.aleph[a] * w[a]);
        }
        let riem = self.riemann_from(k, &center, &around);
        let mut source = 0.0;
        for c in 0..4 {
            for a in 0..4 {
                for b in 0..4 {
                    let cab = om[c][a][b] - om[c][b][a];
                    if cab != 0.0 {
                        let m = &products().polar[a][b];
                        source += METRIC[c] * cab * sandwich(&center.frame_spinor, m, &center.covariant[c]).re;
                    }
                }
            }
        }
        let mut em = 0.0;
        if cpl.charge != 0.0 {
            let d_pot = self.directional(k, &center.tetrad, &around, |_, l| l.potential);
            let dual = compute_bilinears(&center.frame_spinor).dual_bivector;
            for a in 0..4 {
                for b in 0..4 {
                    let tor: f64 = (0..4)
                        .map(|c| METRIC[c] * (om[c][a][b] - om[c][b][a]) * center.potential[c])
                        .sum();
                    em += (d_pot[a][b] - d_pot[b][a] - tor) * dual[(a, b)];
                }
            }
        }
        Ok(wave - 0.5 * riem.scalar * center.pseudoscalar + source - cpl.charge * em)
    }
}

#[derive(Debug, Clone)]
pub struct Riemann {
    /// `components[a][b][c][d] = R_{abcd}`.
    pub components: [[[[f64; 4]; 4]; 4]; 4],
    /// `eta^{ac} eta^{bd} R_{abcd}`.
    pub scalar: f64,
}

#[derive(Debug, Clone)]
pub struct CommutatorCheck {
    pub lhs: Spinor,
    pub rhs: Spinor,
    pub defect: f64,
    pub field_strength: f64,
    pub axial_strength: f64,
    pub curvature_operator: ComplexMatrix4,
}

#[derive(Debug, Clone, Serialize)]
pub struct RotationCoefficients {
    pub omega: Omega,
    /// `1/2 eps_{abst} omega^{st}_c`.
    pub dual: Omega,
    /// `k_i = sum_{j != i} omega_{jij}`.
    pub k: [f64; 3],
    /// `w_b = -1/2 eps_{acdb} omega^{acd}`.
    pub w: [f64; 4],
}

impl RotationCoefficients {
    pub fn from_omega(omega: Omega) -> Self {
        let mut dual = [[[0.0; 4]; 4]; 4];
        for (a, plane) in dual.iter_mut().enumerate() {
            for (b, row) in plane.iter_mut().enumerate() {
                for (c, v) in row.iter_mut().enumerate() {
                    let mut s = 0.0;
                    for st in 0..16 {
                        let (s_, t) = (st / 4, st % 4);
                        // eps with all indices down is -eps^{...}
                        let e = -levi_civita4(a, b, s_, t);
                        if e != 0.0 {
                            s += e * METRIC[s_] * METRIC[t] * omega[s_][t][c];
                        }
                    }
                    *v = 0.5 * s;
                }
            }
        }
        let k = std::array::from_fn(|i| {
            let i = i + 1;
            (1..4).filter(|&j| j != i).map(|j| omega[j][i][j]).sum()
        });
        let w = std::array::from_fn(|b| {
            let mut s = 0.0;
            for a in 0..4 {
                for c in 0..4 {
                    for d in 0..4 {
                        let e = -levi_civita4(a, c, d, b);
                        if e != 0.0 {
                            s += e * METRIC[a] * METRIC[c] * METRIC[d] * omega[a][c][d];
                        }
                    }
                }
            }
            -0.5 * s
        });
        Self { omega, dual, k, w }
    }

    /// Largest `|omega_{abc} + omega_{bac}|`.
    pub fn skew_defect(&self) -> f64 {
        let mut d = 0.0f64;
        for a in 0..4 {
            for b in 0..4 {
                for c in 0..4 {
                    d = d.max((self.omega[a][b][c] + self.omega[b][a][c]).abs());
                }
            }
        }
        d
    }
}

/// Rotation coefficients at every node; fails if any node is degenerate.
pub fn rotation_coefficients(field: &SpinorField) -> Result<Vec<RotationCoefficients>> {
    let an = GridAnalysis::new(field)?;
    if let Some(k) = (0..field.len()).find(|&k| an.is_degenerate(k)) {
        let psi = &field.psi[k];
        return Err(Error::DegenerateDensity {
            r2: compute_bilinears(psi).density_sq,
            floor: density_floor(psi),
        });
    }
    (0..field.len())
        .into_par_iter()
        .map(|k| {
            an.local(k)
                .map(|l| RotationCoefficients::from_omega(l.omega))
                .ok_or(Error::InvalidParameter(format!("no local data at node {k}")))
        })
        .collect()
}

pub fn dirac_residual(field: &SpinorField) -> Result<ResidualField> {
    Ok(GridAnalysis::new(field)?.residuals(&[Family::Dirac]).remove(0))
}

/// Vector, axial, left and right current divergences.
pub fn current_divergences(field: &SpinorField) -> Result<Vec<ResidualField>> {
    Ok(GridAnalysis::new(field)?.residuals(&[
        Family::VectorDivergence,
        Family::AxialDivergence,
        Family::LeftDivergence,
        Family::RightDivergence,
    ]))
}

/// Frame-geometry constraint families.
pub const CONSTRAINT_FAMILIES: [Family; 8] = [
    Family::TraceBalance,
    Family::TraceBalanceSwapped,
    Family::AxialTraceBalance,
    Family::DensityGradient,
    Family::FrameExpansion,
    Family::AxialExpansion,
    Family::AxialCurlBalance,
    Family::ShearSymmetry,
];

pub fn constraint_residuals(field: &SpinorField) -> Result<Vec<ResidualField>> {
    Ok(GridAnalysis::new(field)?.residuals(&CONSTRAINT_FAMILIES))
}

/// `T^a_b` and `P^a_b` at every non-degenerate node.
pub fn energy_momentum(
    field: &SpinorField,
) -> Result<Vec<Option<([[Complex64; 4]; 4], [[Complex64; 4]; 4])>>> {
    let an = GridAnalysis::new(field)?;
    Ok((0..field.len())
        .into_par_iter()
        .map(|k| an.local(k).map(|l| (l.energy_momentum(), l.stress())))
        .collect())
}

/// Riemann tensor at every node whose neighbourhood is non-degenerate.
pub fn tetrad_riemann(field: &SpinorField) -> Result<Vec<Option<Riemann>>> {
    let an = GridAnalysis::new(field)?;
    Ok((0..field.len()).into_par_iter().map(|k| an.riemann_at(k).ok()).collect())
}

pub fn pseudoscalar_wave_residual(field: &SpinorField) -> Result<ResidualField> {
    let an = GridAnalysis::new(field)?;
    let values: Vec<f64> = (0..field.len())
        .into_par_iter()
        .map(|k| an.pseudoscalar_wave_at(k).unwrap_or(f64::NAN))
        .collect();
    let degenerate = (0..field.len()).map(|k| an.is_degenerate(k)).collect();
    Ok(ResidualField::from_values(field, "pseudoscalar_wave", values, degenerate))
}

/// Largest commutator-decomposition defect over the six frame planes at each
/// node.
pub fn commutator_residual(field: &SpinorField) -> Result<ResidualField> {
    let an = GridAnalysis::new(field)?;
    let values: Vec<f64> = (0..field.len())
        .into_par_iter()
        .map(|k| an.commutator_defect_at(k).unwrap_or(f64::NAN))
        .collect();
    let degenerate = (0..field.len()).map(|k| an.is_degenerate(k)).collect();
    Ok(ResidualField::from_values(field, "commutator", values, degenerate))
}

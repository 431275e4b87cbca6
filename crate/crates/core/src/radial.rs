//! Stationary radial reduction of the four-component equation with a scalar
//! potential `A0(r)` and a radial axial field `aleph(r)`.
//!
//! With `psi = (u_L Y, d_L Z, u_R Y, d_R Z) / (r sqrt(sin theta))`, the
//! angular pair obeying `Lambda_- Z = -k Y`, `Lambda_+ Y = k Z` (see
//! [`angular_harmonics`]), and `eps = f(r) E - e A0`,
//! `G = g aleph`, the radial equations are
//!
//! ```text
//! u_L' =  i m u_R + (k/r) d_L - i (eps - G) u_L
//! d_L' = -i m d_R + (k/r) u_L + i (eps + G) d_L
//! u_R' = -i m u_L + (k/r) d_R + i (eps - G) u_R
//! d_R' =  i m d_L + (k/r) u_R - i (eps + G) d_R
//! ```
//!
//! The substitution `s = u_L + u_R`, `iD = u_L - u_R`, `t = d_L + d_R`,
//! `iW = d_L - d_R` makes the system real:
//!
//! ```text
//! s' =  (eps + m - G) D + (k/r) t
//! D' = -(eps - m - G) s + (k/r) W
//! t' = -(eps + m + G) W + (k/r) s
//! W' =  (eps - m + G) t + (k/r) D
//! ```
//!
//! For `G = 0` it splits into `(s + t, D - W)` and `(s - t, D + W)`, the
//! usual Dirac radial pairs with `kappa = -k` and `kappa = +k`. The first pair
//! is the subspace `u_L = d_R`, `u_R = d_L`.

use std::sync::Arc;

use nalgebra::{Matrix4, Vector4};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

/// Piecewise-linear table, held constant outside its range.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl Table {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() || x.len() < 2 {
            return Err(Error::InvalidParameter("table needs at least two (x, y) pairs".into()));
        }
        if x.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter("table abscissae must increase".into()));
        }
        Ok(Self { x, y })
    }

    pub fn eval(&self, t: f64) -> f64 {
        let n = self.x.len();
        if t <= self.x[0] {
            return self.y[0];
        }
        if t >= self.x[n - 1] {
            return self.y[n - 1];
        }
        let i = self.x.partition_point(|&v| v <= t) - 1;
        let w = (t - self.x[i]) / (self.x[i + 1] - self.x[i]);
        self.y[i] * (1.0 - w) + self.y[i + 1] * w
    }
}

pub type Profile = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum Potential {
    Zero,
    /// `A0 = -z_alpha / r`.
    Coulomb { z_alpha: f64 },
    Table(Table),
    Function(Profile),
}

#[derive(Clone)]
pub enum AxialProfile {
    Zero,
    /// `aleph = 1 / (2 g r sqrt(m^2 r^2 - 1))`, the radial field that makes
    /// the chiral angle `arcsin(1 / (m r))`. Needs `m r > 1` on the grid.
    ArcsinAngle,
    Table(Table),
    Function(Profile),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum GridKind {
    Log,
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RadialGrid {
    pub r_min: f64,
    pub r_max: f64,
    pub n: usize,
    pub kind: GridKind,
}

impl RadialGrid {
    pub fn nodes(&self) -> Vec<f64> {
        let n = self.n;
        (0..n)
            .map(|i| {
                let w = i as f64 / (n - 1) as f64;
                match self.kind {
                    GridKind::Log => (self.r_min.ln() * (1.0 - w) + self.r_max.ln() * w).exp(),
                    GridKind::Uniform => self.r_min * (1.0 - w) + self.r_max * w,
                }
            })
            .collect()
    }
}

pub const MIN_GRID_POINTS: usize = 200;
/// Margin required above `m r = 1` for the arcsin-angle profile.
pub const CAUSTIC_MARGIN: f64 = 1e-3;

#[derive(Clone)]
pub struct RadialProblem {
    pub mass: f64,
    pub charge: f64,
    pub axial_coupling: f64,
    pub potential: Potential,
    pub axial: AxialProfile,
    pub k: u32,
    pub grid: RadialGrid,
    /// Pointwise factor multiplying the energy; `None` means 1.
    pub energy_scale: Option<Table>,
}

impl RadialProblem {
    pub fn coulomb(mass: f64, z_alpha: f64, k: u32, grid: RadialGrid) -> Self {
        Self {
            mass,
            charge: 1.0,
            axial_coupling: 0.0,
            potential: Potential::Coulomb { z_alpha },
            axial: AxialProfile::Zero,
            k,
            grid,
            energy_scale: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let g = &self.grid;
        if !(self.mass > 0.0) {
            return Err(Error::InvalidParameter("mass must be positive".into()));
        }
        if self.k < 1 {
            return Err(Error::InvalidParameter("k must be at least 1".into()));
        }
        if g.n < MIN_GRID_POINTS {
            return Err(Error::InvalidParameter(format!(
                "grid needs at least {MIN_GRID_POINTS} points, got {}",
                g.n
            )));
        }
        if !(g.r_min > 0.0) || !(g.r_max > g.r_min) {
            return Err(Error::InvalidParameter("need 0 < r_min < r_max".into()));
        }
        if let AxialProfile::ArcsinAngle = self.axial {
            if self.axial_coupling == 0.0 {
                return Err(Error::InvalidParameter(
                    "arcsin-angle axial profile needs a nonzero axial coupling".into(),
                ));
            }
            if g.r_min * self.mass <= 1.0 + CAUSTIC_MARGIN {
                return Err(Error::InvalidParameter(format!(
                    "arcsin-angle axial profile needs r_min * m > {}, got {}",
                    1.0 + CAUSTIC_MARGIN,
                    g.r_min * self.mass
                )));
            }
        }
        Ok(())
    }

    /// `e A0(r)`.
    pub fn potential_energy(&self, r: f64) -> f64 {
        let a0 = match &self.potential {
            Potential::Zero => 0.0,
            Potential::Coulomb { z_alpha } => -z_alpha / r,
            Potential::Table(t) => t.eval(r),
            Potential::Function(f) => f(r),
        };
        self.charge * a0
    }

    /// `g aleph(r)`.
    pub fn axial_energy(&self, r: f64) -> f64 {
        match &self.axial {
            AxialProfile::Zero => 0.0,
            AxialProfile::ArcsinAngle => {
                let mr = self.mass * r;
                1.0 / (2.0 * r * (mr * mr - 1.0).sqrt())
            }
            AxialProfile::Table(t) => self.axial_coupling * t.eval(r),
            AxialProfile::Function(f) => self.axial_coupling * f(r),
        }
    }

    fn energy_factor(&self, r: f64) -> f64 {
        self.energy_scale.as_ref().map_or(1.0, |t| t.eval(r))
    }

    /// Coefficient matrix `A(r)` of the real system `y' = A y`,
    /// `y = (s, D, t, W)`.
    pub fn coefficient_matrix(&self, energy: f64, r: f64) -> Matrix4<f64> {
        let m = self.mass;
        let eps = self.energy_factor(r) * energy - self.potential_energy(r);
        let g = self.axial_energy(r);
        let kr = self.k as f64 / r;
        Matrix4::new(
            0.0, eps + m - g, kr, 0.0,
            -(eps - m - g), 0.0, 0.0, kr,
            kr, 0.0, 0.0, -(eps + m + g),
            0.0, kr, eps - m + g, 0.0,
        )
    }
}

/// Right-hand side of the real radial system.
pub fn radial_rhs(p: &RadialProblem, energy: f64, r: f64, y: &Vector4<f64>) -> Vector4<f64> {
    p.coefficient_matrix(energy, r) * y
}

/// Right-hand side in the original complex components `(u_L, d_L, u_R, d_R)`.
pub fn complex_rhs(p: &RadialProblem, energy: f64, r: f64, u: &[Complex64; 4]) -> [Complex64; 4] {
    let m = p.mass;
    let eps = p.energy_factor(r) * energy - p.potential_energy(r);
    let g = p.axial_energy(r);
    let kr = p.k as f64 / r;
    let i = Complex64::new(0.0, 1.0);
    let [ul, dl, ur, dr] = *u;
    [
        i * m * ur + dl * kr - i * (eps - g) * ul,
        -i * m * dr + ul * kr + i * (eps + g) * dl,
        -i * m * ul + dr * kr + i * (eps - g) * ur,
        i * m * dl + ur * kr - i * (eps + g) * dr,
    ]
}

/// `(s, D, t, W)` to `(u_L, d_L, u_R, d_R)`.
pub fn to_components(y: &Vector4<f64>) -> [Complex64; 4] {
    let (s, d, t, w) = (y[0], y[1], y[2], y[3]);
    [
        Complex64::new(0.5 * s, 0.5 * d),
        Complex64::new(0.5 * t, 0.5 * w),
        Complex64::new(0.5 * s, -0.5 * d),
        Complex64::new(0.5 * t, -0.5 * w),
    ]
}

/// Largest allowed `step * |r A|` in the log-radius integrator.
pub const STEP_PRODUCT: f64 = 0.01;

fn rk4_log(
    p: &RadialProblem,
    energy: f64,
    r0: f64,
    r1: f64,
    y: &mut [Vector4<f64>],
    step_product: f64,
) -> Result<()> {
    let (x0, x1) = (r0.ln(), r1.ln());
    let a0 = (p.coefficient_matrix(energy, r0) * r0).abs().row_sum().amax();
    let a1 = (p.coefficient_matrix(energy, r1) * r1).abs().row_sum().amax();
    let n = (((x1 - x0).abs() * a0.max(a1) / step_product).ceil() as usize).max(1);
    let h = (x1 - x0) / n as f64;
    let f = |x: f64, v: &Vector4<f64>| {
        let r = x.exp();
        p.coefficient_matrix(energy, r) * v * r
    };
    for step in 0..n {
        let x = x0 + h * step as f64;
        for v in y.iter_mut() {
            let k1 = f(x, v);
            let k2 = f(x + 0.5 * h, &(*v + k1 * (0.5 * h)));
            let k3 = f(x + 0.5 * h, &(*v + k2 * (0.5 * h)));
            let k4 = f(x + h, &(*v + k3 * h));
            *v += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
            if !v.iter().all(|c| c.is_finite()) {
                return Err(Error::StiffnessFailure { r: x.exp() });
            }
        }
    }
    Ok(())
}

/// Two real vectors spanning the invariant subspace of the two eigenvalues
/// of `m` with the largest (or smallest) real parts.
fn extreme_subspace(m: &Matrix4<f64>, largest: bool) -> Result<[Vector4<f64>; 2]> {
    let mut ev: Vec<Complex64> = m.complex_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| {
        let o = a.re.partial_cmp(&b.re).unwrap_or(std::cmp::Ordering::Equal);
        if largest { o.reverse() } else { o }
    });
    let scale = 1.0 + m.amax();
    let (l1, l2) = (ev[0], ev[1]);
    let null_space = |lam: Complex64, count: usize| -> Vec<nalgebra::Vector4<Complex64>> {
        let mc: Matrix4<Complex64> = m.map(Complex64::from) - Matrix4::identity() * lam;
        let svd = mc.svd(false, true);
        let vt = svd.v_t.expect("requested");
        let mut idx: Vec<usize> = (0..4).collect();
        idx.sort_by(|&a, &b| svd.singular_values[a].partial_cmp(&svd.singular_values[b]).unwrap());
        idx.iter()
            .take(count)
            .map(|&i| vt.row(i).adjoint().into_owned())
            .collect()
    };
    let real_part = |v: &nalgebra::Vector4<Complex64>| -> Vector4<f64> {
        // rotate so the largest entry is real before taking the real part
        let big = v.iter().copied().max_by(|a, b| a.norm().partial_cmp(&b.norm()).unwrap()).unwrap();
        let ph = big.conj() / big.norm();
        v.map(|z| (z * ph).re)
    };
    if l1.im.abs() > 1e-12 * scale {
        let v = null_space(l1, 1)[0];
        let re = v.map(|z| z.re);
        let im = v.map(|z| z.im);
        return Ok([re, im]);
    }
    if (l1 - l2).norm() <= 1e-9 * scale {
        let vs = null_space(Complex64::new(0.5 * (l1.re + l2.re), 0.0), 2);
        return Ok([real_part(&vs[0]), real_part(&vs[1])]);
    }
    if l2.im.abs() > 1e-12 * scale {
        return Err(Error::NonInvertible("boundary eigenvalues are not separable".into()));
    }
    Ok([real_part(&null_space(l1, 1)[0]), real_part(&null_space(l2, 1)[0])])
}

/// Gram-Schmidt on two columns; returns the upper-triangular factor
/// (positive diagonal) so that `old = new * r`.
fn orthonormalize(y: &mut [Vector4<f64>; 2]) -> [[f64; 2]; 2] {
    let n0 = y[0].norm();
    y[0] /= n0;
    let c = y[0].dot(&y[1]);
    y[1] -= y[0] * c;
    let n1 = y[1].norm();
    y[1] /= n1;
    [[n0, c], [0.0, n1]]
}

/// Column pair integrated over a range of grid nodes, stored orthonormalized
/// at each node together with the triangular factors applied there.
struct Sweep {
    /// Node index for each stored entry.
    nodes: Vec<usize>,
    values: Vec<[Vector4<f64>; 2]>,
    /// `factors[i]`: `Y_before(i) = Y_stored(i) * factors[i]`.
    factors: Vec<[[f64; 2]; 2]>,
}

fn sweep(
    p: &RadialProblem,
    energy: f64,
    r: &[f64],
    from: usize,
    to: usize,
    start: [Vector4<f64>; 2],
) -> Result<Sweep> {
    let mut y = start;
    let f0 = orthonormalize(&mut y);
    let mut out = Sweep { nodes: vec![from], values: vec![y], factors: vec![f0] };
    let mut i = from;
    while i != to {
        let j = if to > from { i + 1 } else { i - 1 };
        rk4_log(p, energy, r[i], r[j], &mut y, STEP_PRODUCT)?;
        let f = orthonormalize(&mut y);
        if !f[0][0].is_finite() || f[1][1] == 0.0 || !f[1][1].is_finite() {
            return Err(Error::StiffnessFailure { r: r[j] });
        }
        out.nodes.push(j);
        out.values.push(y);
        out.factors.push(f);
        i = j;
    }
    Ok(out)
}

impl Sweep {
    /// Values of the solution whose coefficients in the final stored basis
    /// are `c`, at every node of the sweep.
    fn combine(&self, c: [f64; 2]) -> Vec<(usize, Vector4<f64>)> {
        let n = self.values.len();
        let mut coeff = c;
        let mut out = vec![(0usize, Vector4::zeros()); n];
        for idx in (0..n).rev() {
            let y = &self.values[idx];
            out[idx] = (self.nodes[idx], y[0] * coeff[0] + y[1] * coeff[1]);
            // move to the basis stored at idx - 1: Y(idx) = Y_prev_propagated,
            // Y_prev_propagated = Y(idx) * factors[idx]  =>  coefficients
            // in the propagated previous basis are factors[idx]^-1 c.
            let f = self.factors[idx];
            let c1 = coeff[1] / f[1][1];
            let c0 = (coeff[0] - f[0][1] * c1) / f[0][0];
            coeff = [c0, c1];
        }
        out
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RadialState {
    pub energy: f64,
    pub r: Vec<f64>,
    /// `(u_L, d_L, u_R, d_R)` at each node.
    pub components: Vec<[Complex64; 4]>,
    /// `integral sum |component|^2 dr` of the stored profile.
    pub norm: f64,
    /// Sign changes of `s, D, t, W` along the grid.
    pub node_counts: [usize; 4],
    /// Smallest over largest singular value of the matching matrix.
    pub matching_defect: f64,
    pub match_index: usize,
}

struct Shooter<'a> {
    p: &'a RadialProblem,
    r: Vec<f64>,
    match_index: usize,
    /// Fixed reference pairs projected onto the boundary subspaces, so the
    /// start columns (and the sign of the matching determinant) vary
    /// continuously with the energy.
    inner_ref: [Vector4<f64>; 2],
    outer_ref: [Vector4<f64>; 2],
}

fn project_onto(span: &[Vector4<f64>; 2], refs: &[Vector4<f64>; 2]) -> [Vector4<f64>; 2] {
    let mut q = *span;
    orthonormalize(&mut q);
    refs.map(|v| q[0] * q[0].dot(&v) + q[1] * q[1].dot(&v))
}

impl<'a> Shooter<'a> {
    fn new(p: &'a RadialProblem, energy_hint: f64) -> Self {
        let r = p.grid.nodes();
        let n = r.len();
        // outermost node still classically allowed at the hint energy
        let mut idx = None;
        for (i, &ri) in r.iter().enumerate() {
            let eps = p.energy_factor(ri) * energy_hint - p.potential_energy(ri);
            if eps.abs() >= p.mass {
                idx = Some(i);
            }
        }
        let lo = n / 10;
        let hi = n - n / 10;
        let mid = idx.unwrap_or(n / 2).clamp(lo, hi);
        let mut shooter = Self {
            p,
            r,
            match_index: mid,
            inner_ref: [Vector4::x(), Vector4::y()],
            outer_ref: [Vector4::x(), Vector4::y()],
        };
        if let Ok((a, b)) = shooter.boundary_spans(energy_hint) {
            shooter.inner_ref = a;
            shooter.outer_ref = b;
        }
        shooter
    }

    fn boundary_spans(&self, energy: f64) -> Result<([Vector4<f64>; 2], [Vector4<f64>; 2])> {
        let n = self.r.len();
        let inner = self.p.coefficient_matrix(energy, self.r[0]) * self.r[0];
        let outer = self.p.coefficient_matrix(energy, self.r[n - 1]);
        Ok((extreme_subspace(&inner, true)?, extreme_subspace(&outer, false)?))
    }

    fn sweeps(&self, energy: f64) -> Result<(Sweep, Sweep)> {
        let n = self.r.len();
        let (inner, outer) = self.boundary_spans(energy)?;
        let inner = project_onto(&inner, &self.inner_ref);
        let outer = project_onto(&outer, &self.outer_ref);
        let out = sweep(self.p, energy, &self.r, 0, self.match_index, inner)?;
        let inw = sweep(self.p, energy, &self.r, n - 1, self.match_index, outer)?;
        Ok((out, inw))
    }

    fn matching_matrix(out: &Sweep, inw: &Sweep) -> Matrix4<f64> {
        let a = out.values.last().unwrap();
        let b = inw.values.last().unwrap();
        Matrix4::from_columns(&[a[0], a[1], b[0], b[1]])
    }

    fn determinant(&self, energy: f64) -> Result<f64> {
        let (out, inw) = self.sweeps(energy)?;
        Ok(Self::matching_matrix(&out, &inw).determinant())
    }
}

/// Sign-continuous matching function of the energy: the determinant of the
/// two regular and two decaying solutions at the matching node.
pub fn matching_function(p: &RadialProblem, energy: f64, match_hint: f64) -> Result<f64> {
    Shooter::new(p, match_hint).determinant(energy)
}

/// Finds the bound state with energy in `bracket`.
pub fn solve_bound_state(p: &RadialProblem, bracket: (f64, f64)) -> Result<RadialState> {
    p.validate()?;
    let (lo, hi) = bracket;
    if !(lo < hi) {
        return Err(Error::InvalidParameter("bracket must satisfy lo < hi".into()));
    }
    let shooter = Shooter::new(p, 0.5 * (lo + hi));
    let mut trace = Vec::new();
    let (mut a, mut b) = (lo, hi);
    let mut fa = shooter.determinant(a)?;
    let mut fb = shooter.determinant(b)?;
    trace.push((a, fa));
    trace.push((b, fb));
    if fa == 0.0 {
        return build_state(&shooter, a);
    }
    if fb == 0.0 {
        return build_state(&shooter, b);
    }
    if fa.signum() == fb.signum() {
        // look for an interior sign change before giving up
        let samples = 16;
        let mut found = None;
        let mut prev = (a, fa);
        for i in 1..=samples {
            let e = lo + (hi - lo) * i as f64 / samples as f64;
            let f = if i == samples { fb } else { shooter.determinant(e)? };
            trace.push((e, f));
            if f.signum() != prev.1.signum() {
                found = Some((prev, (e, f)));
                break;
            }
            prev = (e, f);
        }
        match found {
            Some(((x0, f0), (x1, f1))) => {
                a = x0;
                fa = f0;
                b = x1;
                fb = f1;
            }
            None => return Err(Error::NoRootInBracket { lo, hi, trace }),
        }
    }
    // Illinois false position
    let mut side = 0i8;
    let tol = 1e-15 * p.mass.max(hi.abs());
    for _ in 0..200 {
        let c = (a * fb - b * fa) / (fb - fa);
        let c = if c <= a.min(b) || c >= a.max(b) { 0.5 * (a + b) } else { c };
        let fc = shooter.determinant(c)?;
        if fc == 0.0 || (b - a).abs() < tol {
            return build_state(&shooter, c);
        }
        if fc.signum() == fb.signum() {
            b = c;
            fb = fc;
            if side == -1 {
                fa *= 0.5;
            }
            side = -1;
        } else {
            a = c;
            fa = fc;
            if side == 1 {
                fb *= 0.5;
            }
            side = 1;
        }
    }
    build_state(&shooter, 0.5 * (a + b))
}

fn trapezoid(r: &[f64], f: &[f64]) -> f64 {
    r.windows(2).zip(f.windows(2)).map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1])).sum()
}

fn count_sign_changes(v: &[f64]) -> usize {
    let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let mut last = 0.0f64;
    let mut count = 0;
    for &x in v {
        if x.abs() <= 1e-10 * scale {
            continue;
        }
        if last != 0.0 && x.signum() != last.signum() {
            count += 1;
        }
        last = x;
    }
    count
}

fn build_state(shooter: &Shooter, energy: f64) -> Result<RadialState> {
    let (out, inw) = shooter.sweeps(energy)?;
    let mm = Shooter::matching_matrix(&out, &inw);
    let svd = mm.svd(false, true);
    let vt = svd.v_t.expect("requested");
    let (mut imin, mut imax) = (0, 0);
    for i in 0..4 {
        if svd.singular_values[i] < svd.singular_values[imin] {
            imin = i;
        }
        if svd.singular_values[i] > svd.singular_values[imax] {
            imax = i;
        }
    }
    let c = vt.row(imin);
    let defect = svd.singular_values[imin] / svd.singular_values[imax];
    let n = shooter.r.len();
    let mut y = vec![Vector4::zeros(); n];
    for (i, v) in out.combine([c[0], c[1]]) {
        y[i] = v;
    }
    for (i, v) in inw.combine([-c[2], -c[3]]) {
        if i != shooter.match_index {
            y[i] = v;
        }
    }
    finish_state(&shooter.r, y, energy, defect, shooter.match_index)
}

fn finish_state(
    r: &[f64],
    mut y: Vec<Vector4<f64>>,
    energy: f64,
    defect: f64,
    match_index: usize,
) -> Result<RadialState> {
    let dens: Vec<f64> = y.iter().map(|v| 0.5 * v.norm_squared()).collect();
    let norm = trapezoid(r, &dens);
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(Error::StiffnessFailure { r: r[match_index] });
    }
    // fix scale and sign: largest |s| or |t| entry positive
    let mut best = (0.0f64, 1.0f64);
    for v in &y {
        for &c in &[v[0], v[2]] {
            if c.abs() > best.0 {
                best = (c.abs(), c.signum());
            }
        }
    }
    let scale = best.1 / norm.sqrt();
    for v in y.iter_mut() {
        *v *= scale;
    }
    let components: Vec<[Complex64; 4]> = y.iter().map(to_components).collect();
    let dens: Vec<f64> = components.iter().map(|c| c.iter().map(|z| z.norm_sqr()).sum()).collect();
    let mut node_counts = [0usize; 4];
    for (k, nc) in node_counts.iter_mut().enumerate() {
        let col: Vec<f64> = y.iter().map(|v| v[k]).collect();
        *nc = count_sign_changes(&col);
    }
    Ok(RadialState {
        energy,
        r: r.to_vec(),
        components,
        norm: trapezoid(r, &dens),
        node_counts,
        matching_defect: defect,
        match_index,
    })
}

/// Profile obtained by integrating one regular solution outward over the
/// whole grid at a trial energy (not an eigenstate in general).
pub fn shoot_profile(p: &RadialProblem, energy: f64) -> Result<RadialState> {
    p.validate()?;
    let r = p.grid.nodes();
    let inner = p.coefficient_matrix(energy, r[0]) * r[0];
    let start = extreme_subspace(&inner, true)?;
    let mut y = vec![start[0]];
    let mut v = [start[0]];
    for i in 0..r.len() - 1 {
        rk4_log(p, energy, r[i], r[i + 1], &mut v, STEP_PRODUCT)?;
        let s = v[0].norm();
        if s > 1e100 {
            v[0] /= s;
            for w in y.iter_mut() {
                *w /= s;
            }
        }
        y.push(v[0]);
    }
    finish_state(&r, y, energy, f64::NAN, r.len() - 1)
}

fn from_components(c: &[Complex64; 4]) -> Vector4<f64> {
    let [ul, dl, ur, dr] = *c;
    Vector4::new((ul + ur).re, (ul - ur).im, (dl + dr).re, (dl - dr).im)
}

/// Largest relative change between each stored node and the propagation of
/// the previous node to it with a finer integrator. Measures how well the
/// stored profile solves the radial system, including any jump at the
/// matching node.
pub fn ode_defect(p: &RadialProblem, state: &RadialState) -> Result<f64> {
    let r = &state.r;
    let ys: Vec<Vector4<f64>> = state.components.iter().map(from_components).collect();
    let scale = ys.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let mut worst = 0.0f64;
    for i in 0..r.len() - 1 {
        let mut v = [ys[i]];
        rk4_log(p, state.energy, r[i], r[i + 1], &mut v, 0.5 * STEP_PRODUCT)?;
        worst = worst.max((v[0] - ys[i + 1]).norm() / scale);
    }
    Ok(worst)
}

/// Relative distance from the reduced subspaces `u_L = +-d_R`,
/// `u_R = +-d_L`; the smaller of the two signs.
pub fn reduction_defect(state: &RadialState) -> f64 {
    let r = &state.r;
    let total: Vec<f64> = state.components.iter().map(|c| c.iter().map(|z| z.norm_sqr()).sum()).collect();
    let total = trapezoid(r, &total);
    let mut best = f64::INFINITY;
    for sign in [1.0, -1.0] {
        let d: Vec<f64> = state
            .components
            .iter()
            .map(|c| (c[0] - c[3] * sign).norm_sqr() + (c[2] - c[1] * sign).norm_sqr())
            .collect();
        best = best.min((trapezoid(r, &d) / total).sqrt());
    }
    best
}

/// Angular pair solving `Lambda_+ Y = k Z`, `Lambda_- Z = -k Y` with
/// `Lambda_pm = d/dtheta pm (i / sin theta) d/dphi`.
///
/// Both functions carry `exp(i m3 phi)`; the theta profiles `y`, `z` are
/// real. Values on the grid are stored theta-major: `values[i * n_phi + j]`.
#[derive(Debug, Clone, Serialize)]
pub struct HarmonicPair {
    pub k: f64,
    pub m3: i32,
    pub theta: Vec<f64>,
    pub phi: Vec<f64>,
    pub y_profile: Vec<f64>,
    pub z_profile: Vec<f64>,
    pub y: Vec<Complex64>,
    pub z: Vec<Complex64>,
}

impl HarmonicPair {
    pub fn y_at(&self, i: usize, j: usize) -> Complex64 {
        self.y[i * self.phi.len() + j]
    }

    pub fn z_at(&self, i: usize, j: usize) -> Complex64 {
        self.z[i * self.phi.len() + j]
    }
}

/// Pole exponents `(a, b)` and polynomial degree of the regular pair, if any.
///
/// Near `theta = 0` the profile `y` behaves as `theta^m3` or `theta^(1 - m3)`,
/// near `pi` as `(pi - theta)^(-m3)` or `(pi - theta)^(m3 + 1)`. Away from
/// `m3 = 0` only one branch at each pole is square integrable; at `m3 = 0`
/// both are, and the branch with `Y` vanishing at the poles is taken. The
/// regular solution is then `sin^a(theta/2) cos^b(theta/2) P_n(cos theta)`
/// with a Jacobi polynomial of degree `n = k - (a + b) / 2`.
fn harmonic_branch(k: f64, m3: i32) -> Option<(i32, i32, usize)> {
    let (a, b) = if m3 > 0 {
        (m3, m3 + 1)
    } else if m3 < 0 {
        (1 - m3, -m3)
    } else {
        (1, 1)
    };
    let n = k - 0.5 * (a + b) as f64;
    if !k.is_finite() || n < -1e-12 || (n - n.round()).abs() > 1e-12 {
        return None;
    }
    Some((a, b, n.round() as usize))
}

/// Jacobi polynomial `P_n^(alpha, beta)(x)` and its derivative.
fn jacobi(n: usize, alpha: f64, beta: f64, x: f64) -> (f64, f64) {
    let value = |n: usize, alpha: f64, beta: f64| -> f64 {
        if n == 0 {
            return 1.0;
        }
        let mut p0 = 1.0;
        let mut p1 = 0.5 * (alpha - beta + (alpha + beta + 2.0) * x);
        for j in 2..=n {
            let j = j as f64;
            let s = 2.0 * j + alpha + beta;
            let c1 = 2.0 * j * (j + alpha + beta) * (s - 2.0);
            let c2 = (s - 1.0) * (alpha * alpha - beta * beta);
            let c3 = (s - 2.0) * (s - 1.0) * s;
            let c4 = 2.0 * (j + alpha - 1.0) * (j + beta - 1.0) * s;
            let p2 = ((c2 + c3 * x) * p1 - c4 * p0) / c1;
            p0 = p1;
            p1 = p2;
        }
        p1
    };
    let p = value(n, alpha, beta);
    let dp = if n == 0 {
        0.0
    } else {
        0.5 * (n as f64 + alpha + beta + 1.0) * value(n - 1, alpha + 1.0, beta + 1.0)
    };
    (p, dp)
}

/// Unnormalised `(y, z)` at one angle.
fn harmonic_profile(k: f64, m3: i32, a: i32, b: i32, n: usize, theta: f64) -> (f64, f64) {
    let s = (0.5 * theta).sin();
    let c = (0.5 * theta).cos();
    let (p, dp) = jacobi(n, a as f64 - 0.5, b as f64 - 0.5, theta.cos());
    let y = s.powi(a) * c.powi(b) * p;
    // k z = y' - m3 y / sin(theta), written without dividing by sin(theta)
    let bracket = 0.5 * (a as f64 * c * c - b as f64 * s * s - m3 as f64);
    let z = (s.powi(a - 1) * c.powi(b - 1) * bracket * p - 2.0 * s.powi(a + 1) * c.powi(b + 1) * dp) / k;
    (y, z)
}

const HARMONIC_QUADRATURE: usize = 4096;

/// Regular harmonic pair sampled on the given grids, normalised so that
/// `int |Y|^2 dtheta dphi = 1` over `[0, pi] x [0, 2 pi)`; the same then holds
/// for `Z`. `k` is a half-integer when `m3 != 0` and an integer when
/// `m3 = 0`, with `|m3| < k` in both cases.
pub fn angular_harmonics(k: f64, m3: i32, theta: &[f64], phi: &[f64]) -> Result<HarmonicPair> {
    let err = Error::NoRegularSolution { k, m3 };
    if !(k >= 0.5) || theta.is_empty() || phi.is_empty() {
        return Err(err);
    }
    let (a, b, n) = harmonic_branch(k, m3).ok_or(err)?;
    // the integrand extends to a smooth even periodic function, so the
    // trapezoid rule converges spectrally
    let h = std::f64::consts::PI / HARMONIC_QUADRATURE as f64;
    let mut total = 0.0;
    for i in 0..=HARMONIC_QUADRATURE {
        let (y, _) = harmonic_profile(k, m3, a, b, n, i as f64 * h);
        let w = if i == 0 || i == HARMONIC_QUADRATURE { 0.5 } else { 1.0 };
        total += w * y * y;
    }
    let scale = 1.0 / (2.0 * std::f64::consts::PI * total * h).sqrt();
    let (y_profile, z_profile): (Vec<f64>, Vec<f64>) = theta
        .iter()
        .map(|&t| {
            let (y, z) = harmonic_profile(k, m3, a, b, n, t);
            (y * scale, z * scale)
        })
        .unzip();
    let phase: Vec<Complex64> = phi.iter().map(|&p| Complex64::from_polar(1.0, m3 as f64 * p)).collect();
    let mut y = Vec::with_capacity(theta.len() * phi.len());
    let mut z = Vec::with_capacity(theta.len() * phi.len());
    for i in 0..theta.len() {
        for e in &phase {
            y.push(e * y_profile[i]);
            z.push(e * z_profile[i]);
        }
    }
    Ok(HarmonicPair { k, m3, theta: theta.to_vec(), phi: phi.to_vec(), y_profile, z_profile, y, z })
}

/// `n` equally spaced angles covering `[0, pi]` and `[0, 2 pi)`.
pub fn theta_grid(n: usize) -> Vec<f64> {
    let h = std::f64::consts::PI / (n.max(2) - 1) as f64;
    (0..n).map(|i| i as f64 * h).collect()
}

pub fn phi_grid(n: usize) -> Vec<f64> {
    let h = 2.0 * std::f64::consts::PI / n.max(1) as f64;
    (0..n).map(|i| i as f64 * h).collect()
}

/// Largest violation of both pair equations on the grid. Theta derivatives
/// use sixth order differences on a uniform theta grid (interior points);
/// phi derivatives are spectral over a uniform periodic phi grid.
pub fn harmonic_residual(pair: &HarmonicPair) -> f64 {
    let nt = pair.theta.len();
    let np = pair.phi.len();
    if nt < 7 || np == 0 {
        return f64::NAN;
    }
    let h = pair.theta[1] - pair.theta[0];
    let c = [-1.0 / 60.0, 3.0 / 20.0, -3.0 / 4.0, 0.0, 3.0 / 4.0, -3.0 / 20.0, 1.0 / 60.0];
    let d_theta = |v: &[Complex64], i: usize, j: usize| -> Complex64 {
        (0..7).map(|q| v[(i + q - 3) * np + j] * c[q]).sum::<Complex64>() / h
    };
    let d_phi_y = spectral_phi_derivative(&pair.y, nt, np);
    let d_phi_z = spectral_phi_derivative(&pair.z, nt, np);
    let i_unit = Complex64::new(0.0, 1.0);
    let mut worst = 0.0f64;
    for i in 3..nt - 3 {
        let sin_t = pair.theta[i].sin();
        for j in 0..np {
            let q = i * np + j;
            let plus = d_theta(&pair.y, i, j) + i_unit * d_phi_y[q] / sin_t - pair.z[q] * pair.k;
            let minus = d_theta(&pair.z, i, j) - i_unit * d_phi_z[q] / sin_t + pair.y[q] * pair.k;
            worst = worst.max(plus.norm()).max(minus.norm());
        }
    }
    worst
}

/// Derivative along each phi row by discrete Fourier transform.
fn spectral_phi_derivative(v: &[Complex64], nt: usize, np: usize) -> Vec<Complex64> {
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut out = vec![Complex64::new(0.0, 0.0); v.len()];
    let wave = |q: usize| -> f64 {
        // the Nyquist mode of an even grid has no well defined derivative
        if 2 * q == np {
            0.0
        } else if 2 * q < np {
            q as f64
        } else {
            q as f64 - np as f64
        }
    };
    for i in 0..nt {
        let row = &v[i * np..(i + 1) * np];
        let coeffs: Vec<Complex64> = (0..np)
            .map(|q| {
                row.iter()
                    .enumerate()
                    .map(|(j, x)| x * Complex64::from_polar(1.0, -two_pi * (q * j) as f64 / np as f64))
                    .sum::<Complex64>()
                    / np as f64
            })
            .collect();
        for j in 0..np {
            out[i * np + j] = (0..np)
                .map(|q| {
                    coeffs[q]
                        * Complex64::new(0.0, wave(q))
                        * Complex64::from_polar(1.0, two_pi * (q * j) as f64 / np as f64)
                })
                .sum();
        }
    }
    out
}

#[derive(Debug, Clone, Copy)]
pub struct NonlinearOptions {
    /// Fraction of the new profile mixed in each iteration.
    pub damping: f64,
    pub max_iterations: usize,
    /// Stop when the L2 change of the profile drops below this.
    pub tolerance: f64,
    /// Weight of the state density in the energy factor `1 + w R(r)`.
    pub density_scale: f64,
    /// Half-width of the energy bracket around the previous energy.
    pub bracket_half_width: f64,
}

impl Default for NonlinearOptions {
    fn default() -> Self {
        Self {
            damping: 0.5,
            max_iterations: 60,
            tolerance: 1e-10,
            density_scale: 1.0,
            bracket_half_width: 0.05,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct NonlinearResult {
    pub state: RadialState,
    /// L2 change of the profile at each iteration.
    pub history: Vec<f64>,
    pub energies: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Nodes where the density vanished and the chiral angle was carried
    /// over from a neighbour.
    pub flagged_nodes: Vec<usize>,
}

/// Number of consecutive growing changes treated as divergence.
pub const DIVERGENCE_RUN: usize = 5;

/// Density and unwrapped chiral angle along the profile, with flagged nodes.
pub fn density_and_angle(state: &RadialState) -> (Vec<f64>, Vec<f64>, Vec<usize>) {
    let n = state.r.len();
    let mut dens = vec![0.0; n];
    let mut ang = vec![f64::NAN; n];
    let mut flagged = Vec::new();
    let sp: Vec<Complex64> = state
        .components
        .iter()
        .map(|c| (c[0].conj() * c[2] + c[1].conj() * c[3]) * 2.0)
        .collect();
    let peak = sp.iter().map(|z| z.norm()).fold(0.0, f64::max);
    for i in 0..n {
        let r = state.r[i];
        dens[i] = sp[i].norm() / (r * r);
        if sp[i].norm() <= 1e-15 * peak {
            flagged.push(i);
        } else {
            ang[i] = sp[i].im.atan2(sp[i].re);
        }
    }
    // carry over across flagged nodes, then unwrap
    let first = ang.iter().position(|a| a.is_finite()).unwrap_or(0);
    let mut last = if ang[first].is_finite() { ang[first] } else { 0.0 };
    for a in ang.iter_mut() {
        if a.is_finite() {
            let mut v = *a;
            while v - last > std::f64::consts::PI {
                v -= 2.0 * std::f64::consts::PI;
            }
            while v - last < -std::f64::consts::PI {
                v += 2.0 * std::f64::consts::PI;
            }
            *a = v;
            last = v;
        } else {
            *a = last;
        }
    }
    (dens, ang, flagged)
}

fn derivative_nonuniform(x: &[f64], f: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut d = vec![0.0; n];
    for i in 0..n {
        let (a, b) = if i == 0 { (0, 1) } else if i == n - 1 { (n - 2, n - 1) } else { (i - 1, i + 1) };
        d[i] = (f[b] - f[a]) / (x[b] - x[a]);
    }
    d
}

fn l2_distance(r: &[f64], a: &[[Complex64; 4]], b: &[[Complex64; 4]]) -> f64 {
    let d: Vec<f64> = a
        .iter()
        .zip(b)
        .map(|(x, y)| (0..4).map(|k| (x[k] - y[k]).norm_sqr()).sum())
        .collect();
    trapezoid(r, &d).sqrt()
}

/// Self-consistent loop: the chiral angle of the current profile feeds back
/// as `g aleph_r = -(1/2) dU/dr`, and its density rescales the energy term
/// as `E -> (1 + w R(r)) E`. Both feedbacks rest on the phase-gradient
/// relation `2 g aleph = -dU`, so for `g = 0` the problem is decoupled and
/// the linear state is returned after one iteration.
pub fn nonlinear_iterate(
    p: &RadialProblem,
    bracket: (f64, f64),
    opts: &NonlinearOptions,
) -> Result<NonlinearResult> {
    if !(opts.damping > 0.0 && opts.damping <= 1.0) {
        return Err(Error::InvalidParameter("damping must lie in (0, 1]".into()));
    }
    let mut state = solve_bound_state(p, bracket)?;
    let mut energies = vec![state.energy];
    if p.axial_coupling == 0.0 {
        let (_, _, flagged) = density_and_angle(&state);
        return Ok(NonlinearResult {
            state,
            history: vec![0.0],
            energies,
            iterations: 1,
            converged: true,
            flagged_nodes: flagged,
        });
    }
    let mut history = Vec::new();
    let mut growth_run = 0usize;
    let mut flagged_nodes = Vec::new();
    for iteration in 1..=opts.max_iterations {
        let (dens, ang, flagged) = density_and_angle(&state);
        flagged_nodes = flagged;
        let dudr = derivative_nonuniform(&state.r, &ang);
        let g_aleph: Vec<f64> = dudr.iter().map(|d| -0.5 * d).collect();
        let factor: Vec<f64> = dens.iter().map(|d| 1.0 + opts.density_scale * d).collect();
        let mut q = p.clone();
        let base = p.clone();
        let table = Table::new(state.r.clone(), g_aleph)?;
        q.axial = AxialProfile::Function(Arc::new(move |r| base.axial_energy(r) + table.eval(r)));
        q.axial_coupling = 1.0;
        q.energy_scale = Some(Table::new(state.r.clone(), factor)?);
        let w = opts.bracket_half_width;
        let fresh = solve_bound_state(&q, (state.energy - w, state.energy + w))?;
        // align the overall phase with the current profile before mixing
        let overlap: Complex64 = state
            .components
            .iter()
            .zip(&fresh.components)
            .map(|(a, b)| (0..4).map(|k| a[k].conj() * b[k]).sum::<Complex64>())
            .sum();
        let phase = if overlap.norm() > 0.0 { overlap.conj() / overlap.norm() } else { Complex64::new(1.0, 0.0) };
        let d = opts.damping;
        let mixed: Vec<[Complex64; 4]> = state
            .components
            .iter()
            .zip(&fresh.components)
            .map(|(a, b)| {
                let mut c = [Complex64::new(0.0, 0.0); 4];
                for k in 0..4 {
                    c[k] = a[k] * (1.0 - d) + b[k] * phase * d;
                }
                c
            })
            .collect();
        let dens_m: Vec<f64> = mixed.iter().map(|c| c.iter().map(|z| z.norm_sqr()).sum()).collect();
        let nm = trapezoid(&state.r, &dens_m).sqrt();
        let mixed: Vec<[Complex64; 4]> = mixed.iter().map(|c| c.map(|z| z / nm)).collect();
        let change = l2_distance(&state.r, &state.components, &mixed);
        if let Some(&prev) = history.last() {
            if change > prev {
                growth_run += 1;
            } else {
                growth_run = 0;
            }
        }
        history.push(change);
        energies.push(fresh.energy);
        state = RadialState { energy: fresh.energy, components: mixed, norm: 1.0, ..fresh };
        if growth_run >= DIVERGENCE_RUN || !change.is_finite() {
            return Err(Error::DivergenceDetected { iteration, history });
        }
        if change < opts.tolerance {
            return Ok(NonlinearResult {
                state,
                history,
                energies,
                iterations: iteration,
                converged: true,
                flagged_nodes,
            });
        }
    }
    Ok(NonlinearResult {
        iterations: history.len(),
        state,
        history,
        energies,
        converged: false,
        flagged_nodes,
    })
}

//! Rank-2 Higgs pairs `(A, Phi)` on the elliptic curve `T^1`.
//!
//! A connection is `A = A_0 + alpha dzbar - alpha^dag dz` over a flat base
//! `A_0` carrying the constant curvature of degree `d`; a Higgs field is
//! `Phi = phi dz`. Densities are taken against `dx ^ dy` (which is `omega`).

use std::f64::consts::PI;

use nalgebra::{DMatrix, Matrix2, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::chern::{c_kl_constant, to_f64};
use crate::error::{LabError, Result};
use crate::fields::{random_complex_field, ComplexField, TorusGrid};
use crate::moment::{FdFit, FD_STEPS};

pub type Mat2 = Matrix2<Complex64>;

const RANK: u32 = 2;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Orthonormal (under `tr(AB)`) real basis of 2x2 Hermitian matrices.
pub fn hermitian_basis() -> [Mat2; 4] {
    let r = 1.0 / 2f64.sqrt();
    let z = c(0.0, 0.0);
    [
        Mat2::new(c(r, 0.0), z, z, c(r, 0.0)),
        Mat2::new(z, c(r, 0.0), c(r, 0.0), z),
        Mat2::new(z, c(0.0, -r), c(0.0, r), z),
        Mat2::new(c(r, 0.0), z, z, c(-r, 0.0)),
    ]
}

/// 2x2 complex-matrix-valued field on `T^1`.
#[derive(Clone, Debug, PartialEq)]
pub struct MatField {
    pub grid: TorusGrid,
    pub values: Vec<Mat2>,
}

impl MatField {
    pub fn zeros(grid: TorusGrid) -> Self {
        Self { grid, values: vec![Mat2::zeros(); grid.len()] }
    }

    pub fn constant(grid: TorusGrid, m: Mat2) -> Self {
        Self { grid, values: vec![m; grid.len()] }
    }

    pub fn from_fn(grid: TorusGrid, f: impl Fn([f64; 4]) -> Mat2) -> Self {
        Self { grid, values: (0..grid.len()).map(|i| f(grid.coords(i))).collect() }
    }

    pub fn random(grid: TorusGrid, rng: &mut impl Rng, amp: f64) -> Self {
        let comps: Vec<ComplexField> = (0..4).map(|_| random_complex_field(grid, rng, amp)).collect();
        Self::from_components(&comps)
    }

    fn component(&self, r: usize, s: usize) -> ComplexField {
        ComplexField { grid: self.grid, values: self.values.iter().map(|m| m[(r, s)]).collect() }
    }

    fn from_components(comps: &[ComplexField]) -> Self {
        let grid = comps[0].grid;
        let values = (0..grid.len())
            .map(|p| Mat2::new(comps[0].values[p], comps[1].values[p], comps[2].values[p], comps[3].values[p]))
            .collect();
        Self { grid, values }
    }

    fn map_components(&self, f: impl Fn(&ComplexField) -> ComplexField) -> Self {
        let comps: Vec<ComplexField> = (0..4).map(|i| f(&self.component(i / 2, i % 2))).collect();
        Self::from_components(&comps)
    }

    pub fn dz(&self) -> Self {
        self.map_components(|f| f.dz(0))
    }

    pub fn dzbar(&self) -> Self {
        self.map_components(|f| f.dzbar(0))
    }

    pub fn adjoint(&self) -> Self {
        Self { grid: self.grid, values: self.values.iter().map(|m| m.adjoint()).collect() }
    }

    pub fn zip(&self, other: &MatField, f: impl Fn(&Mat2, &Mat2) -> Mat2) -> Self {
        Self { grid: self.grid, values: self.values.iter().zip(&other.values).map(|(a, b)| f(a, b)).collect() }
    }

    pub fn mul(&self, other: &MatField) -> Self {
        self.zip(other, |a, b| a * b)
    }

    pub fn commutator(&self, other: &MatField) -> Self {
        self.zip(other, |a, b| a * b - b * a)
    }

    pub fn add(&self, other: &MatField) -> Self {
        self.zip(other, |a, b| a + b)
    }

    pub fn axpy(&self, s: Complex64, other: &MatField) -> Self {
        self.zip(other, |a, b| a + b * s)
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self { grid: self.grid, values: self.values.iter().map(|m| m * s).collect() }
    }

    /// Conjugation `U M U^dag` by a constant matrix.
    pub fn conjugate(&self, u: &Mat2) -> Self {
        Self { grid: self.grid, values: self.values.iter().map(|m| u * m * u.adjoint()).collect() }
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|m| m.iter().fold(0.0f64, |a, v| a.max(v.norm()))).fold(0.0, f64::max)
    }

    /// Mean of `tr(M)` over the torus.
    pub fn integral_trace(&self) -> Complex64 {
        self.values.iter().map(|m| m.trace()).sum::<Complex64>() / self.values.len() as f64
    }

    pub fn trace_sup(&self) -> f64 {
        self.values.iter().map(|m| m.trace().norm()).fold(0.0, f64::max)
    }

    pub fn hermitian_defect(&self) -> f64 {
        self.values.iter().map(|m| (m - m.adjoint()).iter().fold(0.0f64, |a, v| a.max(v.norm()))).fold(0.0, f64::max)
    }
}

/// `int tr(A B)`.
fn integral_tr_product(a: &MatField, b: &MatField) -> Complex64 {
    a.values.iter().zip(&b.values).map(|(x, y)| (x * y).trace()).sum::<Complex64>() / a.values.len() as f64
}

#[derive(Clone, Debug, PartialEq)]
pub struct RankTwoConn {
    pub grid: TorusGrid,
    /// Coefficient `alpha` of the (0,1) offset `alpha dzbar`.
    pub a: MatField,
    pub deg: i64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HiggsPoint {
    pub grid: TorusGrid,
    /// Coefficient of `dz` in `Phi`.
    pub phi: MatField,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HermEndoField {
    pub grid: TorusGrid,
    pub h: MatField,
}

/// Tangent `(alpha-dot, phi-dot)` to the configuration space, both as matrix coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct HiggsTangent {
    pub p: MatField,
    pub q: MatField,
}

fn check_n1(grid: TorusGrid) -> Result<()> {
    if grid.n != 1 {
        return Err(LabError::UnsupportedDimension(grid.n));
    }
    Ok(())
}

impl RankTwoConn {
    pub fn flat(grid: TorusGrid, deg: i64) -> Self {
        Self { grid, a: MatField::zeros(grid), deg }
    }

    pub fn moved(&self, t: f64, x: &HiggsTangent) -> Self {
        Self { grid: self.grid, a: self.a.axpy(c(t, 0.0), &x.p), deg: self.deg }
    }
}

impl HiggsPoint {
    pub fn zero(grid: TorusGrid) -> Self {
        Self { grid, phi: MatField::zeros(grid) }
    }

    pub fn constant(grid: TorusGrid, m: Mat2) -> Self {
        Self { grid, phi: MatField::constant(grid, m) }
    }

    pub fn nilpotent(grid: TorusGrid) -> Self {
        Self::constant(grid, Mat2::new(c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)))
    }

    pub fn diagonal(grid: TorusGrid, v: f64) -> Self {
        Self::constant(grid, Mat2::new(c(v, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-v, 0.0)))
    }

    pub fn moved(&self, t: f64, x: &HiggsTangent) -> Self {
        Self { grid: self.grid, phi: self.phi.axpy(c(t, 0.0), &x.q) }
    }
}

impl HiggsTangent {
    pub fn zero(grid: TorusGrid) -> Self {
        Self { p: MatField::zeros(grid), q: MatField::zeros(grid) }
    }

    pub fn random(grid: TorusGrid, rng: &mut impl Rng, amp: f64) -> Self {
        Self { p: MatField::random(grid, rng, amp), q: MatField::random(grid, rng, amp) }
    }

    pub fn add(&self, other: &HiggsTangent) -> Self {
        Self { p: self.p.add(&other.p), q: self.q.add(&other.q) }
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { p: self.p.scale(c(s, 0.0)), q: self.q.scale(c(s, 0.0)) }
    }
}

/// `[Phi, Phi^dag] = Phi ^ Phi^dag + Phi^dag ^ Phi`, as the coefficient of `dz ^ dzbar`.
pub fn bracket_phiphidag(phi: &HiggsPoint) -> MatField {
    phi.phi.commutator(&phi.phi.adjoint())
}

/// Coefficient of `dz ^ dzbar` in the curvature of the offset `alpha dzbar - alpha^dag dz`.
pub fn offset_curvature(a: &RankTwoConn) -> MatField {
    let alpha = &a.a;
    let adag = alpha.adjoint();
    alpha.dz().add(&adag.dzbar()).add(&alpha.commutator(&adag))
}

/// Normalising constant `c_{k,l} / rank` of the equation; its trace integral matches the left side.
pub fn normalizer(deg: i64, k: i64, l: i64) -> Result<f64> {
    Ok(to_f64(&c_kl_constant(1, RANK, deg, k, l)?) / RANK as f64)
}

#[derive(Clone, Debug)]
pub struct HitchinResidual {
    /// Hermitian density of the left side minus `c_{k,l}/r * omega * I`.
    pub density: MatField,
    /// `sup |dbar phi + [alpha, phi]|`.
    pub holomorphicity_defect: f64,
}

/// `d_A^{0,1} Phi` coefficient against `dzbar ^ dz`.
pub fn dbar_a_phi(a: &RankTwoConn, phi: &HiggsPoint) -> MatField {
    phi.phi.dzbar().add(&a.a.commutator(&phi.phi))
}

pub fn hitchin_residual(a: &RankTwoConn, phi: &HiggsPoint, k: i64, l: i64) -> Result<HitchinResidual> {
    check_n1(a.grid)?;
    a.grid.check(&phi.grid)?;
    // k omega I + i Theta_A / 2pi: the flat base contributes (d / r) I and
    // i (X dz^dzbar) / 2pi = X / pi dx^dy.
    let constant = k as f64 + a.deg as f64 / RANK as f64 - normalizer(a.deg, k, l)?;
    let x = offset_curvature(a);
    let b = bracket_phiphidag(phi);
    let shift = MatField::constant(a.grid, Mat2::identity() * c(constant, 0.0));
    let density = x.add(&b).scale(c(1.0 / PI, 0.0)).add(&shift);
    let holomorphicity_defect = dbar_a_phi(a, phi).sup_norm();
    Ok(HitchinResidual { density, holomorphicity_defect })
}

/// Real symplectic form `(W / 2pi) * 4 int (Im tr(p r^dag) + Im tr(q s^dag))`.
pub fn omega_higgs(x: &HiggsTangent, y: &HiggsTangent, w: f64) -> Result<f64> {
    check_n1(x.p.grid)?;
    let pr = integral_tr_product(&x.p, &y.p.adjoint()).im;
    let qs = integral_tr_product(&x.q, &y.q.adjoint()).im;
    Ok(w / (2.0 * PI) * 4.0 * (pr + qs))
}

/// Complex symplectic form `2 i W~ int tr(r q - p s)`.
pub fn omega_tilde(x: &HiggsTangent, y: &HiggsTangent, w_tilde: f64) -> Result<Complex64> {
    check_n1(x.p.grid)?;
    let v = integral_tr_product(&y.p, &x.q) - integral_tr_product(&x.p, &y.q);
    Ok(c(0.0, 2.0 * w_tilde) * v)
}

/// `W int i tr(g Res)` for a skew-Hermitian `g`.
pub fn mu_higgs(a: &RankTwoConn, phi: &HiggsPoint, g: &MatField, w: f64, k: i64, l: i64) -> Result<f64> {
    let res = hitchin_residual(a, phi, k, l)?;
    Ok(w * (c(0.0, 1.0) * integral_tr_product(g, &res.density)).re)
}

/// `2 i W~ int tr(g (dbar phi + [alpha, phi]))`.
pub fn mu_tilde(a: &RankTwoConn, phi: &HiggsPoint, g: &MatField, w_tilde: f64) -> Result<Complex64> {
    check_n1(a.grid)?;
    Ok(c(0.0, 2.0 * w_tilde) * integral_tr_product(g, &dbar_a_phi(a, phi)))
}

/// Fundamental vector field of `g`: `(-d_A g, [g, Phi])` in coefficient form.
pub fn gauge_vector(a: &RankTwoConn, phi: &HiggsPoint, g: &MatField) -> HiggsTangent {
    HiggsTangent { p: g.dzbar().add(&a.a.commutator(g)).scale(c(-1.0, 0.0)), q: g.commutator(&phi.phi) }
}

/// Random skew-Hermitian gauge direction.
pub fn random_gauge(grid: TorusGrid, rng: &mut impl Rng, amp: f64) -> MatField {
    let m = MatField::random(grid, rng, amp);
    m.zip(&m.adjoint(), |a, b| (a - b) * c(0.5, 0.0))
}

/// `|mu(z + t x) - mu(z) + t Omega(X_g, x)|` over [`FD_STEPS`].
pub fn fd_mu_identity(
    a: &RankTwoConn,
    phi: &HiggsPoint,
    g: &MatField,
    x: &HiggsTangent,
    k: i64,
    l: i64,
) -> Result<FdFit> {
    let mu0 = mu_higgs(a, phi, g, 1.0, k, l)?;
    let om = omega_higgs(&gauge_vector(a, phi, g), x, 1.0)?;
    let errors = FD_STEPS
        .iter()
        .map(|&t| Ok((mu_higgs(&a.moved(t, x), &phi.moved(t, x), g, 1.0, k, l)? - mu0 + t * om).abs()))
        .collect::<Result<Vec<_>>>()?;
    Ok(FdFit::from_errors(&FD_STEPS, errors, mu0.abs() + om.abs()))
}

/// `|mu~(z + t x) - mu~(z) + t Omega~(X_g, x)|` over [`FD_STEPS`].
pub fn fd_mu_tilde_identity(a: &RankTwoConn, phi: &HiggsPoint, g: &MatField, x: &HiggsTangent) -> Result<FdFit> {
    let mu0 = mu_tilde(a, phi, g, 1.0)?;
    let om = omega_tilde(&gauge_vector(a, phi, g), x, 1.0)?;
    let errors = FD_STEPS
        .iter()
        .map(|&t| Ok((mu_tilde(&a.moved(t, x), &phi.moved(t, x), g, 1.0)? - mu0 + t * om).norm()))
        .collect::<Result<Vec<_>>>()?;
    Ok(FdFit::from_errors(&FD_STEPS, errors, mu0.norm() + om.norm()))
}

/// The three positive factors `(f, h1, h2)`.
pub fn metric_factors(a: &RankTwoConn, phi: &HiggsPoint) -> Result<(f64, f64, f64)> {
    check_n1(a.grid)?;
    // i tr(phi phi^dag) dz^dzbar = 2 tr(phi phi^dag) dx^dy.
    let f = (2.0 * integral_tr_product(&phi.phi, &phi.phi.adjoint()).re).exp();
    let pair = pairing_phi_a(a, phi);
    Ok((f, pair.re.exp(), pair.im.exp()))
}

/// `int Tr(Phi ^ a) = -2i int tr(phi alpha)`.
fn pairing_phi_a(a: &RankTwoConn, phi: &HiggsPoint) -> Complex64 {
    c(0.0, -2.0) * integral_tr_product(&phi.phi, &a.a)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LogMetric {
    H1,
    H2,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Structure {
    I,
    J,
    K,
}

pub fn apply_structure(s: Structure, x: &HiggsTangent) -> HiggsTangent {
    let i = c(0.0, 1.0);
    match s {
        Structure::I => HiggsTangent { p: x.p.scale(i), q: x.q.scale(i) },
        Structure::J => HiggsTangent { p: x.q.adjoint().scale(c(-1.0, 0.0)), q: x.p.adjoint() },
        Structure::K => apply_structure(Structure::I, &apply_structure(Structure::J, x)),
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct CurvatureReport {
    pub curvature: f64,
    pub omega_component: f64,
    pub difference: f64,
}

/// Central-difference mixed second derivative `D^2 F(x, y)`.
fn hessian(
    f: &dyn Fn(&RankTwoConn, &HiggsPoint) -> f64,
    a: &RankTwoConn,
    phi: &HiggsPoint,
    x: &HiggsTangent,
    y: &HiggsTangent,
    h: f64,
) -> f64 {
    let eval = |sx: f64, sy: f64| {
        let dir = x.scale(sx).add(&y.scale(sy));
        f(&a.moved(h, &dir), &phi.moved(h, &dir))
    };
    (eval(1.0, 1.0) - eval(1.0, -1.0) - eval(-1.0, 1.0) + eval(-1.0, -1.0)) / (4.0 * h * h)
}

/// (1,1)-part of the second variation of `-log h_i` with respect to a
/// structure, set beside the matching component of the complex symplectic form.
pub fn fd_curvature_report(
    choice: LogMetric,
    s: Structure,
    a: &RankTwoConn,
    phi: &HiggsPoint,
    x: &HiggsTangent,
    y: &HiggsTangent,
) -> Result<CurvatureReport> {
    check_n1(a.grid)?;
    let f = move |a: &RankTwoConn, phi: &HiggsPoint| {
        let pair = pairing_phi_a(a, phi);
        match choice {
            LogMetric::H1 => -pair.re,
            LogMetric::H2 => -pair.im,
        }
    };
    let h = 1e-3;
    let jx = apply_structure(s, x);
    let jy = apply_structure(s, y);
    let curvature = -hessian(&f, a, phi, x, &jy, h) + hessian(&f, a, phi, y, &jx, h);
    let om = omega_tilde(x, y, 1.0)?;
    let omega_component = match choice {
        LogMetric::H1 => om.re,
        LogMetric::H2 => om.im,
    };
    Ok(CurvatureReport { curvature, omega_component, difference: curvature - omega_component })
}

/// Dense matrix of the linearised operator in a truncated Fourier x Hermitian basis.
#[derive(Clone, Debug)]
pub struct LinOpMatrix {
    pub mode_cap: usize,
    pub modes: Vec<(i64, i64, u8)>,
    pub mat: DMatrix<f64>,
}

impl LinOpMatrix {
    pub fn symmetry_defect(&self) -> f64 {
        (&self.mat - self.mat.transpose()).amax()
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = SymmetricEigen::new(self.mat.clone()).eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }
}

/// Real Fourier modes `(m1, m2, kind)` with `|m_i| <= cap`: the constant
/// (`kind = 0`), then `sqrt2 cos` (`1`) and `sqrt2 sin` (`2`) over a half-plane.
pub fn fourier_modes(cap: usize) -> Vec<(i64, i64, u8)> {
    let m = cap as i64;
    let mut out = vec![(0, 0, 0)];
    for m1 in -m..=m {
        for m2 in -m..=m {
            if m1 > 0 || (m1 == 0 && m2 > 0) {
                out.push((m1, m2, 1));
                out.push((m1, m2, 2));
            }
        }
    }
    out
}

fn mode_value(mode: (i64, i64, u8), x: [f64; 4]) -> f64 {
    let phase = 2.0 * PI * (mode.0 as f64 * x[0] + mode.1 as f64 * x[1]);
    match mode.2 {
        0 => 1.0,
        1 => 2f64.sqrt() * phase.cos(),
        _ => 2f64.sqrt() * phase.sin(),
    }
}

/// `DT h = -laplacian(h) / 4pi + [phi, [phi^dag, h]] / pi` at the flat base.
pub fn apply_dt(phi: &HiggsPoint, h: &MatField) -> MatField {
    // laplacian = 4 d^2/dz dzbar
    let lap = h.map_components(|f| f.dz(0).dzbar(0));
    let comm = phi.phi.commutator(&phi.phi.adjoint().commutator(h));
    lap.scale(c(-1.0 / PI, 0.0)).add(&comm.scale(c(1.0 / PI, 0.0)))
}

pub fn assemble_dt(phi: &HiggsPoint, mode_cap: usize) -> Result<LinOpMatrix> {
    check_n1(phi.grid)?;
    let grid = phi.grid;
    if grid.pts < 4 * mode_cap.max(1) {
        return Err(LabError::InvalidInput(format!(
            "pts = {} too small for mode cap {mode_cap}; need at least {}",
            grid.pts,
            4 * mode_cap
        )));
    }
    let modes = fourier_modes(mode_cap);
    let herm = hermitian_basis();
    let size = modes.len() * 4;
    let sp = grid.spectral();
    let npts = grid.len() as f64;
    let pts = grid.pts as i64;
    let flat_index = |m1: i64, m2: i64| (m1.rem_euclid(pts) as usize) * grid.pts + m2.rem_euclid(pts) as usize;
    let samples: Vec<Vec<f64>> =
        modes.iter().map(|&m| (0..grid.len()).map(|p| mode_value(m, grid.coords(p))).collect()).collect();
    let mut mat = DMatrix::zeros(size, size);
    for jm in 0..modes.len() {
        for (jh, e) in herm.iter().enumerate() {
            let col = jm * 4 + jh;
            let h = MatField { grid, values: samples[jm].iter().map(|&v| e * c(v, 0.0)).collect() };
            let out = apply_dt(phi, &h);
            for (ih, f) in herm.iter().enumerate() {
                // Real coefficient field tr(f * out).
                let mut coef: Vec<Complex64> = out.values.iter().map(|m| c((f * m).trace().re, 0.0)).collect();
                sp.forward(&mut coef);
                for (im, &(m1, m2, kind)) in modes.iter().enumerate() {
                    let hat = coef[flat_index(m1, m2)] / npts;
                    let v = match kind {
                        0 => hat.re,
                        1 => 2f64.sqrt() * hat.re,
                        _ => -2f64.sqrt() * hat.im,
                    };
                    mat[(im * 4 + ih, col)] = v;
                }
            }
        }
    }
    Ok(LinOpMatrix { mode_cap, modes, mat })
}

/// `(dim ker, dim ker restricted to int tr(h) = 0)`.
pub fn kernel_diagnosis(op: &LinOpMatrix, tol: f64) -> Result<(usize, usize)> {
    if tol <= 0.0 {
        return Err(LabError::InvalidInput(format!("tolerance must be positive, got {tol}")));
    }
    let count = |m: DMatrix<f64>| SymmetricEigen::new(m).eigenvalues.iter().filter(|v| v.abs() < tol).count();
    let full = count(op.mat.clone());
    // The constant multiple of the identity is basis vector 0.
    let reduced = op.mat.clone().remove_row(0).remove_column(0);
    Ok((full, count(reduced)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn grid(pts: usize) -> TorusGrid {
        TorusGrid::new(1, pts).unwrap()
    }

    fn random_config(rng: &mut ChaCha8Rng, pts: usize) -> (RankTwoConn, HiggsPoint) {
        let g = grid(pts);
        (
            RankTwoConn { grid: g, a: MatField::random(g, rng, 0.3), deg: 1 },
            HiggsPoint { grid: g, phi: MatField::random(g, rng, 0.3) },
        )
    }

    #[test]
    fn bracket_examples() {
        let g = grid(8);
        assert_eq!(bracket_phiphidag(&HiggsPoint::zero(g)).sup_norm(), 0.0);
        let b = bracket_phiphidag(&HiggsPoint::nilpotent(g));
        let expected = Mat2::new(c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0));
        assert!(b.values.iter().all(|m| (m - expected).norm() < 1e-15));
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let r = bracket_phiphidag(&HiggsPoint { grid: g, phi: MatField::random(g, &mut rng, 1.0) });
        assert!(r.trace_sup() < 1e-13);
        assert!(r.hermitian_defect() < 1e-13);
    }

    #[test]
    fn residual_examples() {
        let g = grid(16);
        let res = hitchin_residual(&RankTwoConn::flat(g, 0), &HiggsPoint::zero(g), 3, 1).unwrap();
        assert!(res.density.sup_norm() < 1e-14);
        assert_eq!(res.holomorphicity_defect, 0.0);
        let res = hitchin_residual(&RankTwoConn::flat(g, 0), &HiggsPoint::nilpotent(g), 3, 1).unwrap();
        assert!((res.density.values[0][(0, 0)].re - 1.0 / PI).abs() < 1e-14);
        assert!(res.density.trace_sup() < 1e-14);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let (a, phi) = random_config(&mut rng, 16);
        let res = hitchin_residual(&a, &phi, 2, 5).unwrap();
        assert!(res.density.integral_trace().norm() < 1e-11);
        assert!(res.density.hermitian_defect() < 1e-12);
    }

    #[test]
    fn residual_equivariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (a, phi) = random_config(&mut rng, 16);
        let t: f64 = 0.7;
        let u = Mat2::new(c(t.cos(), 0.0), c(0.0, t.sin()), c(0.0, t.sin()), c(t.cos(), 0.0));
        let base = hitchin_residual(&a, &phi, 2, 1).unwrap().density.conjugate(&u);
        let a2 = RankTwoConn { a: a.a.conjugate(&u), ..a.clone() };
        let phi2 = HiggsPoint { grid: phi.grid, phi: phi.phi.conjugate(&u) };
        let moved = hitchin_residual(&a2, &phi2, 2, 1).unwrap().density;
        assert!(moved.axpy(c(-1.0, 0.0), &base).sup_norm() < 1e-12);
    }

    #[test]
    fn symplectic_forms_antisymmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let g = grid(8);
        let x = HiggsTangent::random(g, &mut rng, 1.0);
        let y = HiggsTangent::random(g, &mut rng, 1.0);
        assert!((omega_higgs(&x, &y, 1.0).unwrap() + omega_higgs(&y, &x, 1.0).unwrap()).abs() < 1e-13);
        assert!(omega_higgs(&x, &x, 1.0).unwrap().abs() < 1e-13);
        assert!((omega_tilde(&x, &y, 1.0).unwrap() + omega_tilde(&y, &x, 1.0).unwrap()).norm() < 1e-13);
        assert!(omega_tilde(&x, &x, 1.0).unwrap().norm() < 1e-13);
        let only_q = HiggsTangent { p: MatField::zeros(g), q: x.q.clone() };
        let zero_pq = HiggsTangent { p: MatField::zeros(g), q: MatField::zeros(g) };
        assert_eq!(omega_tilde(&zero_pq, &only_q, 1.0).unwrap().norm(), 0.0);
    }

    #[test]
    fn moment_maps_match_symplectic_forms() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..3 {
            let (a, phi) = random_config(&mut rng, 16);
            let g = random_gauge(a.grid, &mut rng, 1.0);
            let x = HiggsTangent::random(a.grid, &mut rng, 1.0);
            let fit = fd_mu_identity(&a, &phi, &g, &x, 2, 1).unwrap();
            assert!(fit.passes(1.9), "{fit:?}");
            let fit = fd_mu_tilde_identity(&a, &phi, &g, &x).unwrap();
            assert!(fit.passes(1.9), "{fit:?}");
        }
        let g = grid(8);
        let ident = MatField::constant(g, Mat2::identity() * c(0.0, 1.0));
        assert!(mu_higgs(&RankTwoConn::flat(g, 0), &HiggsPoint::zero(g), &ident, 1.0, 2, 1).unwrap().abs() < 1e-11);
        assert_eq!(mu_tilde(&RankTwoConn::flat(g, 0), &HiggsPoint::nilpotent(g), &ident, 1.0).unwrap().norm(), 0.0);
    }

    #[test]
    fn metric_factor_examples() {
        let g = grid(8);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let (a, phi) = random_config(&mut rng, 8);
        assert_eq!(metric_factors(&a, &HiggsPoint::zero(g)).unwrap(), (1.0, 1.0, 1.0));
        let (f, h1, h2) = metric_factors(&RankTwoConn::flat(g, 0), &phi).unwrap();
        assert!(f > 0.0 && f.ln().is_finite());
        assert_eq!((h1, h2), (1.0, 1.0));
    }

    #[test]
    fn curvature_of_h1_vanishes_under_i() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let (a, phi) = random_config(&mut rng, 8);
        let x = HiggsTangent::random(a.grid, &mut rng, 1.0);
        let y = HiggsTangent::random(a.grid, &mut rng, 1.0);
        let rep = fd_curvature_report(LogMetric::H1, Structure::I, &a, &phi, &x, &y).unwrap();
        assert!(rep.curvature.abs() < 1e-8, "{rep:?}");
        let z = HiggsTangent::zero(a.grid);
        let rep = fd_curvature_report(LogMetric::H2, Structure::J, &a, &phi, &z, &z).unwrap();
        assert_eq!((rep.curvature, rep.omega_component, rep.difference), (0.0, 0.0, 0.0));
    }

    #[test]
    fn dt_kernels() {
        let g = grid(16);
        let cases =
            [(HiggsPoint::zero(g), (4, 3)), (HiggsPoint::nilpotent(g), (1, 0)), (HiggsPoint::diagonal(g, 0.8), (2, 1))];
        for (phi, expected) in cases {
            let op = assemble_dt(&phi, 2).unwrap();
            assert_eq!(op.mat.nrows(), 100);
            assert!(op.symmetry_defect() < 1e-10);
            assert!(op.eigenvalues()[0] > -1e-10);
            assert_eq!(kernel_diagnosis(&op, 1e-8).unwrap(), expected);
        }
        assert!(kernel_diagnosis(&assemble_dt(&HiggsPoint::zero(g), 1).unwrap(), 0.0).is_err());
    }
}

//! Real-coordinate evaluation of the curvature form `Omega_alpha` of the
//! Calabi-Yang-Mills prequantum bundle and of its moment map `mu_alpha` on `T^2`.
//!
//! Connections are anti-Hermitian one-forms in the real basis
//! `(dx1, dy1, dx2, dy2)`; coefficients are scalars for line bundles and 2x2
//! matrices for rank-two bundles. Top forms are integrated against
//! `dx1 dy1 dx2 dy2`, which is `omega^2`.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use rand::Rng;

use crate::cym::{CymProblem, CymState};
use crate::error::{LabError, Result};
use crate::fields::{random_field, ComplexField, ScalarField, TopForm, TorusGrid};
use crate::higgs::Mat2;
use crate::moment::{FdFit, TangentU1, FD_STEPS};

/// Pointwise coefficient ring.
pub trait Coeff:
    Copy + Send + Sync + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Neg<Output = Self>
{
    /// Number of real parameters of an anti-Hermitian coefficient.
    const SKEW_DIM: usize;
    fn zero() -> Self;
    fn one() -> Self;
    fn scale(self, c: Complex64) -> Self;
    fn tr(self) -> Complex64;
    fn derive(grid: TorusGrid, v: &[Self], axis: usize) -> Vec<Self>;
    /// Anti-Hermitian coefficient from `SKEW_DIM` real numbers.
    fn skew(params: &[f64]) -> Self;
}

impl Coeff for Complex64 {
    const SKEW_DIM: usize = 1;
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn scale(self, c: Complex64) -> Self {
        self * c
    }
    fn tr(self) -> Complex64 {
        self
    }
    fn derive(grid: TorusGrid, v: &[Self], axis: usize) -> Vec<Self> {
        ComplexField { grid, values: v.to_vec() }.dreal(axis).values
    }
    fn skew(params: &[f64]) -> Self {
        Complex64::new(0.0, params[0])
    }
}

impl Coeff for Mat2 {
    const SKEW_DIM: usize = 4;
    fn zero() -> Self {
        Mat2::zeros()
    }
    fn one() -> Self {
        Mat2::identity()
    }
    fn scale(self, c: Complex64) -> Self {
        self * c
    }
    fn tr(self) -> Complex64 {
        self.trace()
    }
    fn derive(grid: TorusGrid, v: &[Self], axis: usize) -> Vec<Self> {
        let mut out = vec![Mat2::zeros(); v.len()];
        for r in 0..2 {
            for s in 0..2 {
                let f = ComplexField { grid, values: v.iter().map(|m| m[(r, s)]).collect() }.dreal(axis);
                for (o, x) in out.iter_mut().zip(f.values) {
                    o[(r, s)] = x;
                }
            }
        }
        out
    }
    fn skew(params: &[f64]) -> Self {
        let i = Complex64::new(0.0, 1.0);
        let c = |x: f64| Complex64::new(x, 0.0);
        // i (p0 I + p1 sx + p2 sy + p3 sz)
        Mat2::new(
            i * c(params[0] + params[3]),
            i * c(params[1]) + c(params[2]),
            i * c(params[1]) - c(params[2]),
            i * c(params[0] - params[3]),
        )
    }
}

const DEG0: [usize; 1] = [0];
const DEG1: [usize; 4] = [1, 2, 4, 8];
/// `e01, e02, e03, e12, e13, e23`.
const DEG2: [usize; 6] = [3, 5, 9, 6, 10, 12];
const DEG3: [usize; 4] = [7, 11, 13, 14];
const DEG4: [usize; 1] = [15];
const TOP: usize = 15;

fn masks(d: usize) -> &'static [usize] {
    match d {
        0 => &DEG0,
        1 => &DEG1,
        2 => &DEG2,
        3 => &DEG3,
        4 => &DEG4,
        _ => &[],
    }
}

const fn build_sign() -> [[f64; 16]; 16] {
    let mut t = [[0.0; 16]; 16];
    let mut a = 0;
    while a < 16 {
        let mut b = 0;
        while b < 16 {
            if a & b == 0 {
                let mut swaps = 0;
                let mut i = 0;
                while i < 4 {
                    if (a >> i) & 1 == 1 {
                        let mut j = 0;
                        while j < i {
                            if (b >> j) & 1 == 1 {
                                swaps += 1;
                            }
                            j += 1;
                        }
                    }
                    i += 1;
                }
                t[a][b] = if swaps % 2 == 0 { 1.0 } else { -1.0 };
            }
            b += 1;
        }
        a += 1;
    }
    t
}

/// `e_A ^ e_B = SIGN[A][B] e_{A | B}` for disjoint index sets.
const SIGN: [[f64; 16]; 16] = build_sign();

/// Homogeneous form at one point.
#[derive(Clone, Copy, Debug)]
pub struct Local<C: Coeff> {
    pub deg: usize,
    pub c: [C; 16],
}

impl<C: Coeff> Local<C> {
    pub fn zero(deg: usize) -> Self {
        Self { deg, c: [C::zero(); 16] }
    }

    pub fn scalar(v: C) -> Self {
        let mut out = Self::zero(0);
        out.c[0] = v;
        out
    }

    pub fn wedge(&self, other: &Local<C>) -> Local<C> {
        let mut out = Local::zero(self.deg + other.deg);
        for &a in masks(self.deg) {
            for &b in masks(other.deg) {
                if a & b == 0 {
                    let term = (self.c[a] * other.c[b]).scale(Complex64::new(SIGN[a][b], 0.0));
                    out.c[a | b] = out.c[a | b] + term;
                }
            }
        }
        out
    }

    /// Wedge with a scalar-valued form on the right.
    pub fn wedge_scalar(&self, other: &Local<Complex64>) -> Local<C> {
        let mut out = Local::zero(self.deg + other.deg);
        for &a in masks(self.deg) {
            for &b in masks(other.deg) {
                if a & b == 0 {
                    out.c[a | b] = out.c[a | b] + self.c[a].scale(other.c[b] * SIGN[a][b]);
                }
            }
        }
        out
    }

    pub fn tr(&self) -> Local<Complex64> {
        let mut out = Local::zero(self.deg);
        for &a in masks(self.deg) {
            out.c[a] = self.c[a].tr();
        }
        out
    }

    pub fn add(&self, other: &Local<C>) -> Local<C> {
        let mut out = *self;
        for &a in masks(self.deg) {
            out.c[a] = out.c[a] + other.c[a];
        }
        out
    }

    pub fn scale(&self, s: Complex64) -> Local<C> {
        let mut out = *self;
        for &a in masks(self.deg) {
            out.c[a] = out.c[a].scale(s);
        }
        out
    }
}

impl Local<Complex64> {
    pub fn top(&self) -> Complex64 {
        self.c[TOP]
    }
}

/// One-form field `sum_i c[i] dx_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct Form1Field<C> {
    pub grid: TorusGrid,
    pub c: [Vec<C>; 4],
}

/// Two-form field in the order `e01, e02, e03, e12, e13, e23`.
#[derive(Clone, Debug, PartialEq)]
pub struct Form2Field<C> {
    pub grid: TorusGrid,
    pub c: [Vec<C>; 6],
}

impl<C: Coeff> Form1Field<C> {
    pub fn zeros(grid: TorusGrid) -> Self {
        Self { grid, c: std::array::from_fn(|_| vec![C::zero(); grid.len()]) }
    }

    /// Smooth random anti-Hermitian one-form.
    pub fn random(grid: TorusGrid, rng: &mut impl Rng, amp: f64) -> Self {
        Self { grid, c: std::array::from_fn(|_| random_skew_field::<C>(grid, rng, amp)) }
    }

    pub fn local(&self, p: usize) -> Local<C> {
        let mut out = Local::zero(1);
        for (i, &m) in DEG1.iter().enumerate() {
            out.c[m] = self.c[i][p];
        }
        out
    }

    pub fn axpy(&self, t: f64, other: &Form1Field<C>) -> Self {
        let s = Complex64::new(t, 0.0);
        Self {
            grid: self.grid,
            c: std::array::from_fn(|i| self.c[i].iter().zip(&other.c[i]).map(|(a, b)| *a + b.scale(s)).collect()),
        }
    }

    pub fn scale(&self, t: f64) -> Self {
        Self::zeros(self.grid).axpy(t, self)
    }
}

impl<C: Coeff> Form2Field<C> {
    pub fn local(&self, p: usize) -> Local<C> {
        let mut out = Local::zero(2);
        for (i, &m) in DEG2.iter().enumerate() {
            out.c[m] = self.c[i][p];
        }
        out
    }
}

fn random_skew_field<C: Coeff>(grid: TorusGrid, rng: &mut impl Rng, amp: f64) -> Vec<C> {
    let parts: Vec<ScalarField> = (0..C::SKEW_DIM).map(|_| random_field(grid, rng, amp)).collect();
    (0..grid.len())
        .map(|p| {
            let v: Vec<f64> = parts.iter().map(|f| f.values[p]).collect();
            C::skew(&v)
        })
        .collect()
}

/// Constant coefficients of `omega = (e01 + e23) / sqrt2` in [`DEG2`] order.
fn omega_coeffs() -> [f64; 6] {
    let r = 1.0 / 2f64.sqrt();
    [r, 0.0, 0.0, 0.0, 0.0, r]
}

/// `Theta = Theta_0 + dA + A ^ A` with `Theta_0 = -2 pi i c omega * 1`.
pub fn curvature<C: Coeff>(a: &Form1Field<C>, c_background: f64) -> Form2Field<C> {
    let grid = a.grid;
    let w = omega_coeffs();
    let bg = C::one().scale(Complex64::new(0.0, -2.0 * PI * c_background));
    let pairs = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];
    let c = std::array::from_fn(|k| {
        let (i, j) = pairs[k];
        let di_aj = C::derive(grid, &a.c[j], i);
        let dj_ai = C::derive(grid, &a.c[i], j);
        (0..grid.len())
            .map(|p| {
                let ai = a.c[i][p];
                let aj = a.c[j][p];
                di_aj[p] - dj_ai[p] + ai * aj - aj * ai + bg.scale(Complex64::new(w[k], 0.0))
            })
            .collect()
    });
    Form2Field { grid, c }
}

/// Point `(A_E, A_L)` of the product of connection spaces.
#[derive(Clone, Debug, PartialEq)]
pub struct CymPoint<C> {
    pub grid: TorusGrid,
    pub a_e: Form1Field<C>,
    pub a_l: Form1Field<Complex64>,
    pub rank: usize,
    pub deg_e: i64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CymTangent<C> {
    pub e: Form1Field<C>,
    pub l: Form1Field<Complex64>,
}

/// Gauge Lie algebra element `(g_E, g_L)`, anti-Hermitian.
#[derive(Clone, Debug, PartialEq)]
pub struct CymGauge<C> {
    pub g_e: Vec<C>,
    pub g_l: Vec<Complex64>,
}

#[derive(Clone, Copy, Debug)]
pub struct AlphaParams {
    pub big_n: f64,
    pub alpha: f64,
    pub lambda: f64,
}

impl<C: Coeff> CymPoint<C> {
    pub fn flat(grid: TorusGrid, rank: usize, deg_e: i64) -> Self {
        Self { grid, a_e: Form1Field::zeros(grid), a_l: Form1Field::zeros(grid), rank, deg_e }
    }

    pub fn random(grid: TorusGrid, rank: usize, deg_e: i64, rng: &mut impl Rng, amp: f64) -> Self {
        Self { grid, a_e: Form1Field::random(grid, rng, amp), a_l: Form1Field::random(grid, rng, amp), rank, deg_e }
    }

    pub fn moved(&self, t: f64, x: &CymTangent<C>) -> Self {
        Self { a_e: self.a_e.axpy(t, &x.e), a_l: self.a_l.axpy(t, &x.l), ..self.clone() }
    }

    fn curvatures(&self) -> (Form2Field<C>, Form2Field<Complex64>) {
        (curvature(&self.a_e, self.deg_e as f64 / self.rank as f64), curvature(&self.a_l, 1.0))
    }
}

impl<C: Coeff> CymTangent<C> {
    pub fn zero(grid: TorusGrid) -> Self {
        Self { e: Form1Field::zeros(grid), l: Form1Field::zeros(grid) }
    }

    pub fn random(grid: TorusGrid, rng: &mut impl Rng, amp: f64) -> Self {
        Self { e: Form1Field::random(grid, rng, amp), l: Form1Field::random(grid, rng, amp) }
    }
}

impl<C: Coeff> CymGauge<C> {
    pub fn zero(grid: TorusGrid) -> Self {
        Self { g_e: vec![C::zero(); grid.len()], g_l: vec![Complex64::new(0.0, 0.0); grid.len()] }
    }

    pub fn random(grid: TorusGrid, rng: &mut impl Rng, amp: f64) -> Self {
        Self { g_e: random_skew_field(grid, rng, amp), g_l: random_skew_field(grid, rng, amp) }
    }

    /// `(d_{A_E} g_E, d g_L)`.
    pub fn vector(&self, at: &CymPoint<C>) -> CymTangent<C> {
        let grid = at.grid;
        let e = std::array::from_fn(|i| {
            let d = C::derive(grid, &self.g_e, i);
            (0..grid.len()).map(|p| d[p] + at.a_e.c[i][p] * self.g_e[p] - self.g_e[p] * at.a_e.c[i][p]).collect()
        });
        let l = std::array::from_fn(|i| Complex64::derive(grid, &self.g_l, i));
        CymTangent { e: Form1Field { grid, c: e }, l: Form1Field { grid, c: l } }
    }
}

/// `(sqrt(-1))^{n-1} / (2 pi)^{n+1}` at `n = 2`.
fn prefactor() -> Complex64 {
    Complex64::new(0.0, 1.0 / (8.0 * PI * PI * PI))
}

fn check_grid(a: TorusGrid, b: TorusGrid) -> Result<()> {
    a.check(&b)?;
    if a.n != 2 {
        return Err(LabError::UnsupportedDimension(a.n));
    }
    Ok(())
}

/// Complex value of `Omega_alpha(x, y)`; real up to roundoff for anti-Hermitian inputs.
pub fn omega_alpha_complex<C: Coeff>(
    at: &CymPoint<C>,
    x: &CymTangent<C>,
    y: &CymTangent<C>,
    prm: AlphaParams,
) -> Result<Complex64> {
    check_grid(at.grid, x.e.grid)?;
    check_grid(at.grid, y.e.grid)?;
    let (th_e, th_l) = at.curvatures();
    let two = Complex64::new(2.0, 0.0);
    let (alpha, lambda) = (prm.alpha, prm.lambda);
    let mut total = Complex64::new(0.0, 0.0);
    for p in 0..at.grid.len() {
        let te = th_e.local(p);
        let tl = th_l.local(p);
        let (ae, be) = (x.e.local(p), y.e.local(p));
        let (al, bl) = (x.l.local(p), y.l.local(p));
        let t1 = ae.wedge(&be).tr().wedge(&tl).top() * two;
        let t2 = (te.wedge(&ae).tr().wedge(&bl).top() + al.wedge(&te.wedge(&be).tr()).top()) * two;
        let t3 = (tl.wedge(&ae.tr()).wedge(&bl).top() + tl.wedge(&al).wedge(&be.tr()).top()) * two * lambda;
        let ab_l = al.wedge(&bl);
        let t4 = te.tr().wedge(&ab_l).top() * two * (-lambda * alpha);
        let t5 = ab_l.wedge(&tl).top() * two;
        total += -(t1 + t2 + t3) * alpha + t4 + t5;
    }
    Ok(prefactor() * prm.big_n * total / at.grid.len() as f64)
}

pub fn omega_alpha_eval<C: Coeff>(
    at: &CymPoint<C>,
    x: &CymTangent<C>,
    y: &CymTangent<C>,
    prm: AlphaParams,
) -> Result<f64> {
    Ok(omega_alpha_complex(at, x, y, prm)?.re)
}

/// Complex value of `mu_alpha(g_E, g_L)`.
pub fn mu_alpha_complex<C: Coeff>(
    at: &CymPoint<C>,
    g: &CymGauge<C>,
    prm: AlphaParams,
    eta: &TopForm,
) -> Result<Complex64> {
    check_grid(at.grid, eta.grid)?;
    let (th_e, th_l) = at.curvatures();
    let (alpha, lambda) = (prm.alpha, prm.lambda);
    let four_pi2 = 4.0 * PI * PI;
    let mut total = Complex64::new(0.0, 0.0);
    for p in 0..at.grid.len() {
        let te = th_e.local(p);
        let tl = th_l.local(p);
        let ge = Local::scalar(g.g_e[p]);
        let tl2 = tl.wedge(&tl).top();
        let e_part = ge.wedge(&te).tr().wedge(&tl).top() * 2.0 + g.g_e[p].tr() * lambda * tl2;
        let l_inner = tl2 + four_pi2 * eta.density[p]
            - alpha * te.wedge(&te).tr().top()
            - lambda * alpha * 2.0 * te.tr().wedge(&tl).top();
        total += -alpha * e_part + g.g_l[p] * l_inner;
    }
    Ok(prefactor() * prm.big_n * total / at.grid.len() as f64)
}

pub fn mu_alpha_eval<C: Coeff>(at: &CymPoint<C>, g: &CymGauge<C>, prm: AlphaParams, eta: &TopForm) -> Result<f64> {
    Ok(mu_alpha_complex(at, g, prm, eta)?.re)
}

/// `|mu(A + t b) - mu(A) + t Omega(X_g, b)|` over [`FD_STEPS`].
pub fn fd_mu_alpha_identity<C: Coeff>(
    at: &CymPoint<C>,
    g: &CymGauge<C>,
    b: &CymTangent<C>,
    prm: AlphaParams,
    eta: &TopForm,
) -> Result<FdFit> {
    let mu0 = mu_alpha_eval(at, g, prm, eta)?;
    let om = omega_alpha_eval(at, &g.vector(at), b, prm)?;
    let errors = FD_STEPS
        .iter()
        .map(|&t| Ok((mu_alpha_eval(&at.moved(t, b), g, prm, eta)? - mu0 + t * om).abs()))
        .collect::<Result<Vec<_>>>()?;
    Ok(FdFit::from_errors(&FD_STEPS, errors, mu0.abs() + om.abs()))
}

/// Connections realising a solver state: `Theta_L = -2 pi i omega_phi` and
/// `Theta_E = Theta_0 + dbar d u`.
pub fn point_from_state(p: &CymProblem, s: &CymState) -> Result<CymPoint<Complex64>> {
    check_grid(p.grid, s.phi.grid)?;
    let grid = p.grid;
    let i = Complex64::new(0.0, 1.0);
    let dphi: Vec<ScalarField> = (0..4).map(|a| s.phi.dreal(a)).collect();
    let du: Vec<ScalarField> = (0..4).map(|a| s.u.dreal(a)).collect();
    // For each complex direction j: x axis 2j, y axis 2j+1.
    let l = std::array::from_fn(|axis| {
        let (partner, sign) = if axis % 2 == 0 { (axis + 1, 1.0) } else { (axis - 1, -1.0) };
        dphi[partner].values.iter().map(|v| i * PI * sign * v).collect()
    });
    let e = std::array::from_fn(|axis| {
        let (partner, sign) = if axis % 2 == 0 { (axis + 1, -0.5) } else { (axis - 1, 0.5) };
        du[partner].values.iter().map(|v| i * sign * v).collect()
    });
    Ok(CymPoint { grid, a_e: Form1Field { grid, c: e }, a_l: Form1Field { grid, c: l }, rank: 1, deg_e: p.deg_e })
}

/// Real imaginary-valued one-form of a line-bundle tangent:
/// `a = a^{0,1} - conj(a^{0,1}) = sum_k 2i Im(p_k) dx_k - 2i Re(p_k) dy_k`.
pub fn tangent_to_real(t: &TangentU1) -> Form1Field<Complex64> {
    let grid = t.v.grid;
    let coeffs = t.coefficients();
    let c = std::array::from_fn(|axis| {
        let pk = &coeffs[axis / 2].values;
        pk.iter()
            .map(|p| if axis % 2 == 0 { Complex64::new(0.0, 2.0 * p.im) } else { Complex64::new(0.0, -2.0 * p.re) })
            .collect()
    });
    Form1Field { grid, c }
}

/// Line-bundle connection whose curvature is `-2 pi i omega_phi`.
pub fn line_connection(phi: &ScalarField) -> Form1Field<Complex64> {
    let i = Complex64::new(0.0, 1.0);
    let d: Vec<ScalarField> = (0..4).map(|a| phi.dreal(a)).collect();
    Form1Field {
        grid: phi.grid,
        c: std::array::from_fn(|axis| {
            let (partner, sign) = if axis % 2 == 0 { (axis + 1, 1.0) } else { (axis - 1, -1.0) };
            d[partner].values.iter().map(|v| i * PI * sign * v).collect()
        }),
    }
}

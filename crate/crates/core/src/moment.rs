//! Finite-dimensional model of the space of integrable U(1) connections on a
//! flat torus: the symplectic form, its moment map and gauge actions.

use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use crate::chern::{build_l, solve_lk, to_f64, Rational, TruncPoly};
use crate::conventions::POTENTIAL_FROM_U;
use crate::error::Result;
use crate::fields::{
    integrate, random_complex_field, random_field, wedge, ComplexField, OneOneForm, ScalarField, TopForm, TorusGrid,
};
use crate::gma::{omega_phi, raw_residual, GmaProblem};

/// A connection `A` with `A^{0,1} = A_0^{0,1} + dbar u + sum_k harm_k dzbar_k`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConnPointU1 {
    pub grid: TorusGrid,
    pub u: ComplexField,
    pub harm: Vec<Complex64>,
}

/// Tangent vector with (0,1) part `dbar v + sum_k harm_k dzbar_k`; the real
/// imaginary-valued 1-form is `a = a^{0,1} - conj(a^{0,1})`.
#[derive(Clone, Debug, PartialEq)]
pub struct TangentU1 {
    pub v: ComplexField,
    pub harm: Vec<Complex64>,
}

/// Gauge Lie algebra direction `i H`.
#[derive(Clone, Debug, PartialEq)]
pub struct GaugeDirU1 {
    pub h: ScalarField,
}

impl ConnPointU1 {
    pub fn base(grid: TorusGrid) -> Self {
        Self { grid, u: ComplexField::zeros(grid), harm: vec![Complex64::default(); grid.n] }
    }

    pub fn random(grid: TorusGrid, rng: &mut impl Rng, amp: f64) -> Self {
        Self {
            grid,
            u: random_complex_field(grid, rng, amp),
            harm: (0..grid.n).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect(),
        }
    }

    /// Kahler potential of the first Chern form: `omega_A = omega + i ddbar phi_A`.
    pub fn potential(&self) -> ScalarField {
        self.u.re().scale(POTENTIAL_FROM_U)
    }

    pub fn chern_form(&self) -> OneOneForm {
        omega_phi(&self.potential())
    }

    /// `A + t b`.
    pub fn moved(&self, t: f64, b: &TangentU1) -> ConnPointU1 {
        ConnPointU1 {
            grid: self.grid,
            u: self.u.axpy(Complex64::new(t, 0.0), &b.v),
            harm: self.harm.iter().zip(&b.harm).map(|(x, y)| x + t * y).collect(),
        }
    }
}

impl TangentU1 {
    pub fn zero(grid: TorusGrid) -> Self {
        Self { v: ComplexField::zeros(grid), harm: vec![Complex64::default(); grid.n] }
    }

    pub fn random(grid: TorusGrid, rng: &mut impl Rng, amp: f64) -> Self {
        Self {
            v: random_complex_field(grid, rng, amp),
            harm: (0..grid.n)
                .map(|_| Complex64::new(amp * rng.gen_range(-1.0..1.0), amp * rng.gen_range(-1.0..1.0)))
                .collect(),
        }
    }

    pub fn scale(&self, c: f64) -> TangentU1 {
        TangentU1 { v: self.v.scale(Complex64::new(c, 0.0)), harm: self.harm.iter().map(|h| h * c).collect() }
    }

    /// Infinitesimal gauge action `d(iH) = i dH`.
    pub fn from_gauge(h: &GaugeDirU1) -> TangentU1 {
        TangentU1 {
            v: ComplexField::from_parts(&ScalarField::zeros(h.h.grid), &h.h),
            harm: vec![Complex64::default(); h.h.grid.n],
        }
    }

    /// Coefficients `p_k` of `a^{0,1} = sum_k p_k dzbar_k`.
    pub fn coefficients(&self) -> Vec<ComplexField> {
        (0..self.v.grid.n)
            .map(|k| {
                let mut d = self.v.dzbar(k);
                d.values.iter_mut().for_each(|x| *x += self.harm[k]);
                d
            })
            .collect()
    }
}

impl GaugeDirU1 {
    pub fn random(grid: TorusGrid, rng: &mut impl Rng, amp: f64) -> Self {
        Self { h: random_field(grid, rng, amp) }
    }
}

/// Hermitian coefficient matrix of `(a ^ b)^{1,1}`.
pub fn wedge_tangents(a: &TangentU1, b: &TangentU1) -> OneOneForm {
    let grid = a.v.grid;
    let n = grid.n;
    let p = a.coefficients();
    let q = b.coefficients();
    let mut out = OneOneForm::zeros(grid);
    let mi = Complex64::new(0.0, -1.0);
    for j in 0..n {
        for k in 0..n {
            out.comps[j * n + k] = (0..grid.len())
                .map(|x| mi * (q[j].values[x].conj() * p[k].values[x] - p[j].values[x].conj() * q[k].values[x]))
                .collect();
        }
    }
    out
}

/// `n omega_A^{n-1} - sum_k (n-k) alpha_k omega_A^{n-k-1}` paired with a (1,1)-form.
fn pair_with_coefficient(p: &GmaProblem, a: &ConnPointU1, m: &OneOneForm) -> Result<TopForm> {
    match p.grid.n {
        1 => m.top_density(),
        _ => {
            let a1 = p.alphas()[0].as_one_one().expect("alpha_1 is a (1,1)-form");
            let e = a.chern_form().scale(2.0).axpy(-1.0, a1);
            wedge(m, &e)
        }
    }
}

fn check_grids(p: &GmaProblem, a: &ConnPointU1, tangents: &[&TangentU1]) -> Result<()> {
    p.grid.check(&a.grid)?;
    for t in tangents {
        p.grid.check(&t.v.grid)?;
    }
    Ok(())
}

/// `W int a ^ b ^ (n omega_A^{n-1} - sum_k (n-k) alpha_k omega_A^{n-k-1})`.
pub fn omega_eval(p: &GmaProblem, a: &ConnPointU1, x: &TangentU1, y: &TangentU1, w: f64) -> Result<f64> {
    check_grids(p, a, &[x, y])?;
    Ok(w * integrate(&pair_with_coefficient(p, a, &wedge_tangents(x, y))?))
}

/// `W int H (omega_A^n - sum_k alpha_k omega_A^{n-k})`, the moment map with the
/// overall factor `i` of the Lie algebra element stripped.
pub fn moment_eval(p: &GmaProblem, a: &ConnPointU1, h: &GaugeDirU1, w: f64) -> Result<f64> {
    p.grid.check(&a.grid)?;
    p.grid.check(&h.h.grid)?;
    let r = raw_residual(p, &a.potential())?;
    Ok(w * h.h.dot(&r.as_field()))
}

/// Finite-difference errors and their fitted log-log slope.
#[derive(Clone, Debug, Serialize)]
pub struct FdFit {
    pub steps: Vec<f64>,
    pub errors: Vec<f64>,
    /// `None` when every error sits at roundoff and no slope can be fitted.
    pub slope: Option<f64>,
    pub exact: bool,
}

impl FdFit {
    pub fn from_errors(steps: &[f64], errors: Vec<f64>, scale: f64) -> Self {
        let floor = 1e-13 * scale.max(1.0);
        let exact = errors.iter().all(|e| *e <= floor);
        let pts: Vec<(f64, f64)> =
            steps.iter().zip(&errors).filter(|(_, e)| **e > floor).map(|(t, e)| (t.ln(), e.ln())).collect();
        let slope = if exact || pts.len() < 2 { None } else { Some(least_squares_slope(&pts)) };
        Self { steps: steps.to_vec(), errors, slope, exact }
    }

    /// Satisfies the contract `slope >= min_slope` (or the errors are at roundoff).
    pub fn passes(&self, min_slope: f64) -> bool {
        self.exact || self.slope.is_some_and(|s| s >= min_slope)
    }
}

pub fn least_squares_slope(pts: &[(f64, f64)]) -> f64 {
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

pub const FD_STEPS: [f64; 3] = [1e-2, 1e-3, 1e-4];

/// `e(t) = |mu_{A+tb}(iH) - mu_A(iH) + t Omega_A(i dH, b)|` over [`FD_STEPS`].
pub fn fd_moment_identity(p: &GmaProblem, a: &ConnPointU1, h: &GaugeDirU1, b: &TangentU1, w: f64) -> Result<FdFit> {
    let mu0 = moment_eval(p, a, h, w)?;
    let om = omega_eval(p, a, &TangentU1::from_gauge(h), b, w)?;
    let errors = FD_STEPS
        .iter()
        .map(|&t| Ok((moment_eval(p, &a.moved(t, b), h, w)? - mu0 + t * om).abs()))
        .collect::<Result<Vec<_>>>()?;
    Ok(FdFit::from_errors(&FD_STEPS, errors, mu0.abs() + om.abs()))
}

/// Complex gauge transformation with `ln|g|^2 = phi`.
pub fn complex_gauge_act(a: &ConnPointU1, phi: &ScalarField) -> Result<ConnPointU1> {
    a.grid.check(&phi.grid)?;
    let shift = phi.scale(1.0 / POTENTIAL_FROM_U);
    Ok(ConnPointU1 { grid: a.grid, u: a.u.axpy(Complex64::new(1.0, 0.0), &shift.to_complex()), harm: a.harm.clone() })
}

/// Unitary gauge transformation `g = exp(i theta)`.
pub fn unitary_gauge_act(a: &ConnPointU1, theta: &ScalarField) -> Result<ConnPointU1> {
    a.grid.check(&theta.grid)?;
    Ok(ConnPointU1 { grid: a.grid, u: a.u.axpy(Complex64::new(0.0, 1.0), &theta.to_complex()), harm: a.harm.clone() })
}

/// Central-difference derivative of `Omega(b, c)` along `a`.
fn directional_omega(
    p: &GmaProblem,
    at: &ConnPointU1,
    dir: &TangentU1,
    b: &TangentU1,
    c: &TangentU1,
    h: f64,
) -> Result<f64> {
    let plus = omega_eval(p, &at.moved(h, dir), b, c, 1.0)?;
    let minus = omega_eval(p, &at.moved(-h, dir), b, c, 1.0)?;
    Ok((plus - minus) / (2.0 * h))
}

/// `dOmega(a, b, c) = D_a Omega(b, c) - D_b Omega(a, c) + D_c Omega(a, b)`,
/// Richardson-extrapolated from central differences at steps `1e-3` and `1e-4`.
pub fn closedness_check(p: &GmaProblem, at: &ConnPointU1, a: &TangentU1, b: &TangentU1, c: &TangentU1) -> Result<f64> {
    check_grids(p, at, &[a, b, c])?;
    let d = |h: f64| -> Result<f64> {
        Ok(directional_omega(p, at, a, b, c, h)? - directional_omega(p, at, b, a, c, h)?
            + directional_omega(p, at, c, a, b, h)?)
    };
    let (h1, h2) = (1e-3, 1e-4);
    let (d1, d2) = (d(h1)?, d(h2)?);
    let r = (h1 / h2) * (h1 / h2);
    Ok((r * d2 - d1) / (r - 1.0))
}

/// Top-degree coefficients `d_k` with `[ch(L)]_{n+1} = sum_k d_k alpha_k F^{n+1-k}`
/// (`alpha_0 = 1`), read off from the exact class computation by linearity.
pub fn index_coefficients(n: usize) -> Result<Vec<Rational>> {
    let lk = solve_lk(n)?;
    let cap = n + 1;
    let zero: Vec<TruncPoly> = (0..n).map(|_| TruncPoly::zero(cap)).collect();
    let base = build_l(&lk, &zero)?;
    let mut out = vec![base.coeff(cap)];
    for k in 1..=n {
        let mut classes = zero.clone();
        classes[k - 1] = TruncPoly::monomial(cap, k, Rational::from_integer(1.into()));
        out.push(build_l(&lk, &classes)?.coeff(cap) - base.coeff(cap));
    }
    Ok(out)
}

/// Ratio `index_density_omega / omega_eval` predicted by the exact coefficients:
/// `-(n+1)! N^{n+1} / W`.
pub fn index_constant(n: usize, w: f64) -> Result<f64> {
    let lk = solve_lk(n)?;
    let big_n = to_f64(&lk.big_n_rational());
    let fact: f64 = (1..=n + 1).map(|k| k as f64).product();
    Ok(-fact * big_n.powi(n as i32 + 1) / w)
}

/// Integrates the `dx ^ dy` coefficient of `[ch(L)]_{n+1}` evaluated on the
/// family curvature `F = omega_A + a dx + b dy`. Since `(a dx + b dy)^2 = -2 a^b dx^dy`
/// the coefficient of `d_k alpha_k F^m` is `-2 C(m, 2) d_k alpha_k a^b omega_A^{m-2}`.
pub fn index_density_omega(p: &GmaProblem, at: &ConnPointU1, a: &TangentU1, b: &TangentU1) -> Result<f64> {
    check_grids(p, at, &[a, b])?;
    let n = p.grid.n;
    let d: Vec<f64> = index_coefficients(n)?.iter().map(to_f64).collect();
    let ab = wedge_tangents(a, b);
    let binom2 = |m: usize| (m * (m - 1) / 2) as f64;
    let total = match n {
        1 => -2.0 * binom2(2) * d[0] * integrate(&ab.top_density()?),
        _ => {
            let a1 = p.alphas()[0].as_one_one().expect("alpha_1 is a (1,1)-form");
            let lead = -2.0 * binom2(3) * d[0] * integrate(&wedge(&ab, &at.chern_form())?);
            let sub = -2.0 * binom2(2) * d[1] * integrate(&wedge(&ab, a1)?);
            lead + sub
        }
    };
    Ok(total)
}

//! Calabi-Yang-Mills system for a line bundle `E` on `T^2`:
//!
//! ```text
//! i Theta_A ^ 2 omega_phi = -lambda omega_phi^2
//! omega_phi^2 (1 + alpha lambda^2 / 2) - eta = alpha c1(A)^2
//! ```
//!
//! with `Theta_A = Theta_0 + dbar d u` and `c1(Theta_0) = deg * omega`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::conventions::omega_scale;
use crate::error::{LabError, Result};
use crate::fields::{i_ddbar, integrate, positivity_margin, wedge, OneOneForm, ScalarField, TopForm, TorusGrid};
use crate::gma::omega_phi;
use crate::linalg::{gmres, KrylovOptions};

#[derive(Clone, Debug)]
pub struct CymProblem {
    pub grid: TorusGrid,
    pub alpha: f64,
    pub eta: TopForm,
    pub deg_e: i64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CymState {
    pub phi: ScalarField,
    pub u: ScalarField,
}

impl CymState {
    pub fn zero(grid: TorusGrid) -> Self {
        Self { phi: ScalarField::zeros(grid), u: ScalarField::zeros(grid) }
    }
}

impl CymProblem {
    pub fn new(grid: TorusGrid, alpha: f64, eta: TopForm, deg_e: i64) -> Result<Self> {
        if grid.n != 2 {
            return Err(LabError::UnsupportedDimension(grid.n));
        }
        grid.check(&eta.grid)?;
        if !(alpha >= 0.0 && alpha.is_finite()) {
            return Err(LabError::InvalidInput(format!("alpha = {alpha} must be non-negative")));
        }
        Ok(Self { grid, alpha, eta, deg_e })
    }

    /// Builds `eta` from a positive profile rescaled so that the integral constraint holds exactly.
    pub fn with_eta_profile(grid: TorusGrid, alpha: f64, profile: &ScalarField, deg_e: i64) -> Result<Self> {
        let mass = profile.mean();
        if mass <= 0.0 {
            return Err(LabError::InvalidInput("eta profile must have positive mass".into()));
        }
        let probe = Self::new(grid, alpha, TopForm::zeros(grid), deg_e)?;
        let target = probe.required_eta_mass();
        Self::new(grid, alpha, TopForm::from_field(&profile.scale(target / mass)), deg_e)
    }

    /// `1 + alpha lambda^2 / 2 - alpha deg^2`, the only admissible value of `int eta`.
    pub fn required_eta_mass(&self) -> f64 {
        let l = compute_lambda(self);
        1.0 + 0.5 * self.alpha * l * l - self.alpha * (self.deg_e * self.deg_e) as f64
    }

    fn kappa(&self) -> f64 {
        let l = compute_lambda(self);
        1.0 + 0.5 * self.alpha * l * l
    }
}

/// First Chern form `deg omega - i ddbar u / 2pi` of the bundle connection.
pub fn chern_form_e(p: &CymProblem, u: &ScalarField) -> OneOneForm {
    let s = omega_scale(2);
    OneOneForm::diagonal(p.grid, p.deg_e as f64 * s).axpy(-1.0 / (2.0 * PI), &i_ddbar(u))
}

/// `lambda = -int i Theta ^ n omega^{n-1} / int omega^n = -2 pi n deg`.
pub fn compute_lambda(p: &CymProblem) -> f64 {
    -2.0 * PI * 2.0 * p.deg_e as f64
}

/// The same constant by quadrature of the Chern-Weil integrand along a state.
pub fn lambda_by_quadrature(p: &CymProblem, s: &CymState) -> Result<f64> {
    let c1 = chern_form_e(p, &s.u);
    let w = omega_phi(&s.phi);
    let num = integrate(&wedge(&c1, &w)?) * 2.0 * PI * 2.0;
    let den = integrate(&wedge(&w, &w)?);
    Ok(-num / den)
}

fn raw_residuals(p: &CymProblem, s: &CymState) -> Result<(TopForm, TopForm)> {
    let lambda = compute_lambda(p);
    let w = omega_phi(&s.phi);
    let c1 = chern_form_e(p, &s.u);
    let ww = wedge(&w, &w)?;
    let r1 = wedge(&c1, &w)?.scale(4.0 * PI).axpy(lambda, &ww);
    let r2 = ww.scale(p.kappa()).axpy(-1.0, &p.eta).axpy(-p.alpha, &wedge(&c1, &c1)?);
    Ok((r1, r2))
}

fn truncate(t: &TopForm) -> TopForm {
    TopForm::from_field(&t.as_field().filter_nyquist())
}

/// Both residual densities, truncated to the modes a potential can reach.
pub fn residual_cym(p: &CymProblem, s: &CymState) -> Result<(TopForm, TopForm)> {
    p.grid.check(&s.phi.grid)?;
    p.grid.check(&s.u.grid)?;
    let (r1, r2) = raw_residuals(p, s)?;
    Ok((truncate(&r1), truncate(&r2)))
}

/// `|1 + alpha lambda^2 / 2 - int eta - alpha deg^2|`.
pub fn check_eta_admissible(p: &CymProblem) -> f64 {
    (p.required_eta_mass() - integrate(&p.eta)).abs()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CymConfig {
    pub tol: f64,
    pub max_iters: usize,
    pub admissibility_tol: f64,
    pub max_halvings: usize,
    pub krylov_rel_tol: f64,
    pub krylov_max_iters: usize,
    pub restart: usize,
}

impl Default for CymConfig {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            max_iters: 30,
            admissibility_tol: 1e-10,
            max_halvings: 10,
            krylov_rel_tol: 1e-11,
            krylov_max_iters: 600,
            restart: 20,
        }
    }
}

#[derive(Clone, Debug)]
pub struct CymSolution {
    pub state: CymState,
    pub r1_norm: f64,
    pub r2_norm: f64,
    pub newton_iters: usize,
    pub positivity_margin: f64,
    /// `max(|R1|, |R2|)` before the first step and after every accepted step.
    pub history: Vec<f64>,
}

/// Jacobian of `(R1, R2)` with respect to `(phi, u)` applied to `(dphi, du)`.
fn jacobian_apply(p: &CymProblem, s: &CymState, dphi: &ScalarField, du: &ScalarField) -> (TopForm, TopForm) {
    let lambda = compute_lambda(p);
    let w = omega_phi(&s.phi);
    let c1 = chern_form_e(p, &s.u);
    let h = i_ddbar(dphi);
    let hv = i_ddbar(du);
    let w2 = |a: &OneOneForm, b: &OneOneForm| wedge(a, b).expect("n = 2");
    let j1 = w2(&c1, &h).scale(4.0 * PI).axpy(2.0 * lambda, &w2(&w, &h)).axpy(-2.0, &w2(&hv, &w));
    let j2 = w2(&w, &h).scale(2.0 * p.kappa()).axpy(p.alpha / PI, &w2(&c1, &hv));
    (j1, j2)
}

fn split(grid: TorusGrid, x: &[f64]) -> (ScalarField, ScalarField) {
    let m = grid.len();
    (ScalarField { grid, values: x[..m].to_vec() }, ScalarField { grid, values: x[m..].to_vec() })
}

fn newton_direction(p: &CymProblem, s: &CymState, r1: &TopForm, r2: &TopForm, cfg: &CymConfig) -> Result<CymState> {
    let grid = p.grid;
    let sc = omega_scale(2);
    let kappa = p.kappa();
    let mut rhs = r1.as_field().project_resolved().scale(-1.0).values;
    rhs.extend(r2.as_field().project_resolved().scale(-1.0).values);
    let apply = |x: &[f64]| {
        let (dphi, du) = split(grid, x);
        let (j1, j2) = jacobian_apply(p, s, &dphi, &du);
        let mut out = j1.as_field().project_resolved().values;
        out.extend(j2.as_field().project_resolved().values);
        out
    };
    // u from R1 ~ -2 s lap u, phi from R2 ~ 2 kappa s lap phi.
    let precond = |x: &[f64]| {
        let (a, b) = split(grid, x);
        let du = a.inverse_laplacian().scale(-1.0 / (2.0 * sc));
        let dphi = b.inverse_laplacian().scale(1.0 / (2.0 * kappa * sc));
        let mut out = dphi.values;
        out.extend(du.values);
        out
    };
    let opts = KrylovOptions { rel_tol: cfg.krylov_rel_tol, max_iters: cfg.krylov_max_iters };
    let out = gmres(apply, precond, &rhs, cfg.restart, opts)?;
    let (dphi, du) = split(grid, &out.x);
    Ok(CymState { phi: dphi.remove_mean(), u: du.remove_mean() })
}

fn positivity(s: &CymState, iter: usize) -> Result<f64> {
    let m = positivity_margin(&omega_phi(&s.phi));
    if m <= 0.0 || !m.is_finite() {
        return Err(LabError::PositivityLost { iter, margin: m });
    }
    Ok(m)
}

pub fn coupled_newton(p: &CymProblem, s0: &CymState, cfg: &CymConfig) -> Result<CymSolution> {
    let defect = check_eta_admissible(p);
    if defect > cfg.admissibility_tol {
        return Err(LabError::Admissibility { defect, tol: cfg.admissibility_tol });
    }
    if p.eta.density.iter().any(|v| *v <= 0.0) {
        return Err(LabError::InvalidInput("eta must be pointwise positive".into()));
    }
    let mut s = CymState { phi: s0.phi.remove_mean(), u: s0.u.remove_mean() };
    let mut margin = positivity(&s, 0)?;
    let (mut r1, mut r2) = residual_cym(p, &s)?;
    let norm = |a: &TopForm, b: &TopForm| a.sup_norm().max(b.sup_norm());
    let mut rn = norm(&r1, &r2);
    let mut history = vec![rn];
    let mut iters = 0;
    while rn >= cfg.tol {
        if iters >= cfg.max_iters {
            return Err(LabError::MaxIterations { max_iters: cfg.max_iters, residual: rn });
        }
        iters += 1;
        let d = newton_direction(p, &s, &r1, &r2, cfg)?;
        let mut step = 1.0;
        let mut accepted = None;
        let mut last_err = None;
        for _ in 0..=cfg.max_halvings {
            let trial = CymState { phi: s.phi.axpy(step, &d.phi), u: s.u.axpy(step, &d.u) };
            match positivity(&trial, iters) {
                Ok(m) => {
                    let (t1, t2) = residual_cym(p, &trial)?;
                    let tn = norm(&t1, &t2);
                    if tn.is_finite() && tn < rn {
                        accepted = Some((trial, t1, t2, tn, m));
                        break;
                    }
                }
                Err(e) => last_err = Some(e),
            }
            step *= 0.5;
        }
        match accepted {
            Some((trial, t1, t2, tn, m)) => {
                s = trial;
                r1 = t1;
                r2 = t2;
                rn = tn;
                margin = m;
                history.push(rn);
            }
            None => return Err(last_err.unwrap_or(LabError::Divergence { iter: iters, residual: rn })),
        }
    }
    Ok(CymSolution {
        r1_norm: r1.sup_norm(),
        r2_norm: r2.sup_norm(),
        state: s,
        newton_iters: iters,
        positivity_margin: margin,
        history,
    })
}

/// Warm-started continuation `alpha = alpha_max * i / steps`, `i = 0..=steps`,
/// rescaling the `eta` profile at each step.
pub fn alpha_continuation(
    grid: TorusGrid,
    profile: &ScalarField,
    deg_e: i64,
    alpha_max: f64,
    steps: usize,
    cfg: &CymConfig,
) -> Result<Vec<(f64, CymSolution)>> {
    let steps = steps.max(1);
    let mut path = Vec::with_capacity(steps + 1);
    let mut state = CymState::zero(grid);
    let mut last = 0.0;
    for i in 0..=steps {
        let a = alpha_max * i as f64 / steps as f64;
        let wrap = |e: LabError| LabError::Continuation { at: a, last_reached: last, source: Box::new(e) };
        let p = CymProblem::with_eta_profile(grid, a, profile, deg_e).map_err(wrap)?;
        let sol = coupled_newton(&p, &state, cfg).map_err(wrap)?;
        state = sol.state.clone();
        last = a;
        path.push((a, sol));
    }
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{random_field, FourierProfile};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn grid() -> TorusGrid {
        TorusGrid::new(2, 8).unwrap()
    }

    fn unit_eta(g: TorusGrid) -> TopForm {
        TopForm::from_field(&ScalarField::constant(g, 1.0))
    }

    #[test]
    fn lambda_values_and_invariance() {
        let g = grid();
        let p0 = CymProblem::new(g, 0.1, unit_eta(g), 0).unwrap();
        assert_eq!(compute_lambda(&p0), 0.0);
        let p1 = CymProblem::new(g, 0.1, unit_eta(g), 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let direct = lambda_by_quadrature(&p1, &CymState::zero(g)).unwrap();
        assert!((direct - compute_lambda(&p1)).abs() < 1e-12);
        let s = CymState { phi: random_field(g, &mut rng, 0.01), u: random_field(g, &mut rng, 0.3) };
        let c1 = chern_form_e(&p1, &s.u);
        let top = integrate(&wedge(&c1, &omega_phi(&s.phi)).unwrap()) * 4.0 * PI;
        assert!((-top - compute_lambda(&p1)).abs() < 1e-11);
    }

    #[test]
    fn flat_state_solves_trivial_problem() {
        let g = grid();
        let p = CymProblem::new(g, 0.3, unit_eta(g), 0).unwrap();
        let (r1, r2) = residual_cym(&p, &CymState::zero(g)).unwrap();
        assert!(r1.sup_norm() < 1e-14 && r2.sup_norm() < 1e-14);
        let sol = coupled_newton(&p, &CymState::zero(g), &CymConfig::default()).unwrap();
        assert_eq!(sol.newton_iters, 0);
    }

    #[test]
    fn residual_integrals_are_topological() {
        let g = grid();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let p = CymProblem::new(g, 0.05, unit_eta(g), 1).unwrap();
        let mut seconds = Vec::new();
        for _ in 0..2 {
            let s = CymState { phi: random_field(g, &mut rng, 0.01), u: random_field(g, &mut rng, 0.3) };
            let (r1, r2) = residual_cym(&p, &s).unwrap();
            assert!(integrate(&r1).abs() < 1e-11);
            seconds.push(integrate(&r2));
        }
        assert!((seconds[0] - seconds[1]).abs() < 1e-10);
        let expected = p.required_eta_mass() - 1.0;
        assert!((seconds[0] - expected).abs() < 1e-10);
    }

    #[test]
    fn admissibility_defect() {
        let g = grid();
        let p = CymProblem::new(g, 0.2, TopForm::from_field(&ScalarField::constant(g, 1.1)), 0).unwrap();
        assert!((check_eta_admissible(&p) - 0.1).abs() < 1e-12);
        let bump = FourierProfile::single(&[1, 0, 0, 0], 0.05).sample(g);
        let p2 = CymProblem::new(g, 0.2, TopForm::from_field(&bump.add(&ScalarField::constant(g, 1.1))), 0).unwrap();
        assert!((check_eta_admissible(&p2) - 0.1).abs() < 1e-12);
    }

    #[test]
    fn jacobian_matches_finite_difference() {
        let g = grid();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = CymProblem::new(g, 0.1, unit_eta(g), 1).unwrap();
        let s = CymState { phi: random_field(g, &mut rng, 0.005), u: random_field(g, &mut rng, 0.1) };
        let d = CymState { phi: random_field(g, &mut rng, 1.0), u: random_field(g, &mut rng, 1.0) };
        let (j1, j2) = jacobian_apply(&p, &s, &d.phi, &d.u);
        let t = 1e-6;
        let plus = CymState { phi: s.phi.axpy(t, &d.phi), u: s.u.axpy(t, &d.u) };
        let minus = CymState { phi: s.phi.axpy(-t, &d.phi), u: s.u.axpy(-t, &d.u) };
        let (a1, a2) = raw_residuals(&p, &plus).unwrap();
        let (b1, b2) = raw_residuals(&p, &minus).unwrap();
        let fd1 = a1.axpy(-1.0, &b1).scale(0.5 / t);
        let fd2 = a2.axpy(-1.0, &b2).scale(0.5 / t);
        assert!(fd1.axpy(-1.0, &j1).sup_norm() < 1e-5 * j1.sup_norm().max(1.0));
        assert!(fd2.axpy(-1.0, &j2).sup_norm() < 1e-5 * j2.sup_norm().max(1.0));
    }

    #[test]
    fn coupled_solve_degree_one() {
        let g = TorusGrid::new(2, 16).unwrap();
        let profile = FourierProfile::single(&[1, 0, 0, 0], 0.05).sample(g).add(&ScalarField::constant(g, 1.0));
        let p = CymProblem::with_eta_profile(g, 0.01, &profile, 1).unwrap();
        let sol = coupled_newton(&p, &CymState::zero(g), &CymConfig::default()).unwrap();
        let (r1, r2) = residual_cym(&p, &sol.state).unwrap();
        assert!(r1.sup_norm() < 1e-9 && r2.sup_norm() < 1e-9, "{:?}", sol.history);
    }
}

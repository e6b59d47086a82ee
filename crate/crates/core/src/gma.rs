//! Generalised Monge-Ampere equation `omega_phi^n = sum_k alpha_k omega_phi^{n-k}`
//! on `T^1` and `T^2`.

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::fields::{
    build_alpha, cohomology_pairing, i_ddbar, integrate, positivity_margin, reference_omega, wedge, AlphaForm,
    ClosedKKSpec, OneOneForm, ScalarField, TopForm, TorusGrid,
};
use crate::linalg::{pcg, KrylovOptions};

/// Problem data: the grid and one closed (k,k)-form per `k = 1..=n`.
#[derive(Clone, Debug)]
pub struct GmaProblem {
    pub grid: TorusGrid,
    pub specs: Vec<ClosedKKSpec>,
    alphas: Vec<AlphaForm>,
}

impl GmaProblem {
    pub fn new(grid: TorusGrid, specs: Vec<ClosedKKSpec>) -> Result<Self> {
        if specs.len() != grid.n {
            return Err(LabError::InvalidInput(format!("expected {} forms, got {}", grid.n, specs.len())));
        }
        for (i, s) in specs.iter().enumerate() {
            if s.k != i + 1 {
                return Err(LabError::DegreeOutOfRange { k: s.k, n: grid.n });
            }
        }
        let alphas = specs.iter().map(|s| build_alpha(s, grid)).collect::<Result<Vec<_>>>()?;
        Ok(Self { grid, specs, alphas })
    }

    /// Constant-coefficient problem `alpha_k = c_k omega^k`.
    pub fn constant(grid: TorusGrid, coeffs: &[f64]) -> Result<Self> {
        let specs = coeffs
            .iter()
            .enumerate()
            .map(|(i, &c)| ClosedKKSpec { k: i + 1, c, eta: ScalarField::zeros(grid) })
            .collect();
        Self::new(grid, specs)
    }

    pub fn alphas(&self) -> &[AlphaForm] {
        &self.alphas
    }

    /// Exact parts scaled by `t`; the `k < n` coefficients scaled by `t` and
    /// the top coefficient chosen so that the defect stays `1 - sum c_k` at `t = 1`
    /// and vanishes at `t = 0`.
    pub fn scaled(&self, t: f64) -> Result<Self> {
        let n = self.grid.n;
        let lower: f64 = self.specs[..n - 1].iter().map(|s| s.c).sum();
        let top_shift = self.specs[n - 1].c - (1.0 - lower);
        let specs = self
            .specs
            .iter()
            .map(|s| {
                let c = if s.k < n { t * s.c } else { 1.0 - t * lower + t * top_shift };
                ClosedKKSpec { k: s.k, c, eta: s.eta.scale(t) }
            })
            .collect();
        Self::new(self.grid, specs)
    }
}

#[derive(Clone, Debug)]
pub struct GmaSolution {
    pub phi: ScalarField,
    pub residual_norm: f64,
    pub ellipticity_margin: f64,
    pub newton_iters: usize,
    /// Residual sup norm before the first step and after every accepted step.
    pub history: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GmaConfig {
    pub tol: f64,
    pub max_iters: usize,
    pub compat_tol: f64,
    pub max_halvings: usize,
    pub cg_rel_tol: f64,
    pub cg_max_iters: usize,
}

impl Default for GmaConfig {
    fn default() -> Self {
        Self { tol: 1e-9, max_iters: 30, compat_tol: 1e-10, max_halvings: 10, cg_rel_tol: 1e-12, cg_max_iters: 400 }
    }
}

/// Coefficient of the linearised operator: a form for `n = 2`, the constant 1 for `n = 1`.
#[derive(Clone, Debug)]
pub enum Ellipticity {
    Scalar(f64),
    Form(OneOneForm),
}

impl Ellipticity {
    pub fn margin(&self) -> f64 {
        match self {
            Ellipticity::Scalar(c) => *c,
            Ellipticity::Form(f) => positivity_margin(f),
        }
    }
}

/// `|int omega^n - sum_k int alpha_k ^ omega^{n-k}|`.
pub fn check_compatibility(p: &GmaProblem) -> f64 {
    let total: f64 = p.alphas.iter().map(|a| cohomology_pairing(a, p.grid).expect("grids checked")).sum();
    (1.0 - total).abs()
}

pub fn omega_phi(phi: &ScalarField) -> OneOneForm {
    reference_omega(phi.grid).add(&i_ddbar(phi))
}

fn top_of(a: &AlphaForm) -> &TopForm {
    a.as_top().expect("top-degree alpha")
}

/// `omega_phi^n - sum_k alpha_k ^ omega_phi^{n-k}`, truncated to the modes a
/// potential on this grid can reach.
pub fn residual(p: &GmaProblem, phi: &ScalarField) -> Result<TopForm> {
    p.grid.check(&phi.grid)?;
    Ok(TopForm::from_field(&raw_residual(p, phi)?.as_field().filter_nyquist()))
}

/// Pointwise residual without spectral truncation.
pub fn raw_residual(p: &GmaProblem, phi: &ScalarField) -> Result<TopForm> {
    p.grid.check(&phi.grid)?;
    let w = omega_phi(phi);
    match p.grid.n {
        1 => Ok(w.top_density()?.axpy(-1.0, top_of(&p.alphas[0]))),
        _ => {
            let a1 = p.alphas[0].as_one_one().expect("alpha_1 is a (1,1)-form");
            let ww = wedge(&w, &w)?;
            let aw = wedge(a1, &w)?;
            Ok(ww.axpy(-1.0, &aw).axpy(-1.0, top_of(&p.alphas[1])))
        }
    }
}

/// `n omega_phi^{n-1} - sum_k (n-k) alpha_k omega_phi^{n-k-1}`.
pub fn ellipticity_form(p: &GmaProblem, phi: &ScalarField) -> Result<Ellipticity> {
    p.grid.check(&phi.grid)?;
    match p.grid.n {
        1 => Ok(Ellipticity::Scalar(1.0)),
        _ => {
            let a1 = p.alphas[0].as_one_one().expect("alpha_1 is a (1,1)-form");
            Ok(Ellipticity::Form(omega_phi(phi).scale(2.0).axpy(-1.0, a1)))
        }
    }
}

fn apply_with(e: &Ellipticity, psi: &ScalarField) -> TopForm {
    let h = i_ddbar(psi);
    match e {
        Ellipticity::Scalar(c) => h.top_density().expect("n = 1").scale(*c),
        Ellipticity::Form(f) => wedge(f, &h).expect("n = 2"),
    }
}

/// First variation of the residual: `ellipticity_form ^ i ddbar psi`.
pub fn linearized_apply(p: &GmaProblem, phi: &ScalarField, psi: &ScalarField) -> Result<TopForm> {
    p.grid.check(&psi.grid)?;
    Ok(apply_with(&ellipticity_form(p, phi)?, psi))
}

/// Solves `L delta = -r` on mean-zero functions with a flat-Laplacian preconditioner.
fn newton_direction(e: &Ellipticity, r: &TopForm, cfg: &GmaConfig) -> Result<ScalarField> {
    let grid = r.grid;
    // -L psi ~ -(e s) laplacian(psi) for n = 2 and -laplacian(psi) / 2 for n = 1.
    let flat = match e {
        Ellipticity::Scalar(c) => 0.5 * c,
        Ellipticity::Form(f) => {
            let tr: f64 = f.get(0, 0).iter().chain(f.get(1, 1)).map(|v| v.re).sum::<f64>() / grid.len() as f64;
            0.5 * tr
        }
    };
    let rhs = r.as_field().project_resolved();
    let apply = |x: &[f64]| {
        let psi = ScalarField { grid, values: x.to_vec() };
        apply_with(e, &psi).as_field().project_resolved().scale(-1.0).values
    };
    let precond = |x: &[f64]| {
        let f = ScalarField { grid, values: x.to_vec() };
        f.inverse_laplacian().scale(-1.0 / flat).values
    };
    let opts = KrylovOptions { rel_tol: cfg.cg_rel_tol, max_iters: cfg.cg_max_iters };
    let out = pcg(apply, precond, &rhs.values, opts)?;
    Ok(ScalarField { grid, values: out.x }.remove_mean())
}

fn admissible(p: &GmaProblem, phi: &ScalarField, iter: usize) -> Result<f64> {
    let w = omega_phi(phi);
    let pos = positivity_margin(&w);
    if pos <= 0.0 || !pos.is_finite() {
        return Err(LabError::PositivityLost { iter, margin: pos });
    }
    let margin = ellipticity_form(p, phi)?.margin();
    if margin <= 0.0 || !margin.is_finite() {
        return Err(LabError::EllipticityLost { iter, margin });
    }
    Ok(margin)
}

pub fn newton_solve(p: &GmaProblem, cfg: &GmaConfig) -> Result<GmaSolution> {
    newton_solve_from(p, cfg, ScalarField::zeros(p.grid))
}

/// Damped Newton iteration from a given mean-zero starting potential.
pub fn newton_solve_from(p: &GmaProblem, cfg: &GmaConfig, phi0: ScalarField) -> Result<GmaSolution> {
    let defect = check_compatibility(p);
    if defect > cfg.compat_tol {
        return Err(LabError::Compatibility { defect, tol: cfg.compat_tol });
    }
    let mut phi = phi0.remove_mean();
    let mut margin = admissible(p, &phi, 0)?;
    let mut r = residual(p, &phi)?;
    let mut rn = r.sup_norm();
    let mut history = vec![rn];
    let mut iters = 0;
    while rn >= cfg.tol {
        if iters >= cfg.max_iters {
            return Err(LabError::MaxIterations { max_iters: cfg.max_iters, residual: rn });
        }
        iters += 1;
        let e = ellipticity_form(p, &phi)?;
        let delta = newton_direction(&e, &r, cfg)?;
        let mut step = 1.0;
        let mut accepted = None;
        let mut last_err = None;
        for _ in 0..=cfg.max_halvings {
            let trial = phi.axpy(step, &delta);
            match admissible(p, &trial, iters) {
                Ok(m) => {
                    let tr = residual(p, &trial)?;
                    let tn = tr.sup_norm();
                    if tn.is_finite() && tn < rn {
                        accepted = Some((trial, tr, tn, m));
                        break;
                    }
                }
                Err(err) => last_err = Some(err),
            }
            step *= 0.5;
        }
        match accepted {
            Some((trial, tr, tn, m)) => {
                phi = trial;
                r = tr;
                rn = tn;
                margin = m;
                history.push(rn);
            }
            None => {
                return Err(last_err.unwrap_or(LabError::Divergence { iter: iters, residual: rn }));
            }
        }
    }
    Ok(GmaSolution { phi, residual_norm: rn, ellipticity_margin: margin, newton_iters: iters, history })
}

/// Solves along `t = 1/steps, 2/steps, ..., 1`, warm-starting each Newton solve.
pub fn continuation_solve(p: &GmaProblem, t_steps: usize, cfg: &GmaConfig) -> Result<Vec<(f64, GmaSolution)>> {
    let steps = t_steps.max(1);
    let mut path = Vec::with_capacity(steps);
    let mut phi = ScalarField::zeros(p.grid);
    let mut last = 0.0;
    for i in 1..=steps {
        let t = i as f64 / steps as f64;
        let wrap = |e: LabError| LabError::Continuation { at: t, last_reached: last, source: Box::new(e) };
        let pt = p.scaled(t).map_err(wrap)?;
        let sol = newton_solve_from(&pt, cfg, phi.clone()).map_err(wrap)?;
        phi = sol.phi.clone();
        last = t;
        path.push((t, sol));
    }
    Ok(path)
}

/// Largest constant `C` with `r_{m+1} <= C r_m^2` over the final `window`
/// accepted steps, skipping pairs that start or land below the roundoff `floor`.
pub fn quadratic_constant(history: &[f64], window: usize, floor: f64) -> Option<f64> {
    let pairs: Vec<(f64, f64)> =
        history.windows(2).map(|w| (w[0], w[1])).filter(|(a, b)| *a > floor && *b > floor).collect();
    let start = pairs.len().saturating_sub(window);
    pairs[start..].iter().map(|(a, b)| b / (a * a)).fold(None, |m, c| Some(m.map_or(c, |m: f64| m.max(c))))
}

/// `int residual` for convenience in reporting.
pub fn residual_integral(p: &GmaProblem, phi: &ScalarField) -> Result<f64> {
    Ok(integrate(&residual(p, phi)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conventions::omega_scale;
    use crate::fields::{random_field, FourierProfile};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn grid(n: usize, pts: usize) -> TorusGrid {
        TorusGrid::new(n, pts).unwrap()
    }

    #[test]
    fn compatibility_defect() {
        let g = grid(2, 8);
        assert!(check_compatibility(&GmaProblem::constant(g, &[0.5, 0.5]).unwrap()) < 1e-15);
        assert!((check_compatibility(&GmaProblem::constant(g, &[1.0, 1.0]).unwrap()) - 1.0).abs() < 1e-15);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let specs = vec![
            ClosedKKSpec { k: 1, c: 0.5, eta: random_field(g, &mut rng, 0.3) },
            ClosedKKSpec { k: 2, c: 0.5, eta: random_field(g, &mut rng, 0.3) },
        ];
        assert!(check_compatibility(&GmaProblem::new(g, specs).unwrap()) < 1e-12);
    }

    #[test]
    fn constant_problem_is_solved_by_zero() {
        let g = grid(2, 8);
        let p = GmaProblem::constant(g, &[0.3, 0.7]).unwrap();
        let r = residual(&p, &ScalarField::zeros(g)).unwrap();
        assert!(r.sup_norm() < 1e-13);
        let sol = newton_solve(&p, &GmaConfig::default()).unwrap();
        assert_eq!(sol.newton_iters, 0);
        assert!(sol.phi.sup_norm() == 0.0);
        let m = ellipticity_form(&p, &ScalarField::zeros(g)).unwrap().margin();
        assert!((m - 1.7 * omega_scale(2)).abs() < 1e-14);
    }

    #[test]
    fn one_dimensional_solution_is_eta() {
        let g = grid(1, 32);
        let eta = FourierProfile::single(&[1, 1], 0.02).sample(g);
        let p = GmaProblem::new(g, vec![ClosedKKSpec { k: 1, c: 1.0, eta: eta.clone() }]).unwrap();
        assert!(residual(&p, &eta).unwrap().sup_norm() < 1e-12);
        let sol = newton_solve(&p, &GmaConfig::default()).unwrap();
        assert!(sol.phi.sub(&eta.remove_mean()).sup_norm() < 1e-10);
        assert!(matches!(ellipticity_form(&p, &eta).unwrap(), Ellipticity::Scalar(c) if c == 1.0));
    }

    #[test]
    fn incompatible_rejected() {
        let p = GmaProblem::constant(grid(2, 8), &[1.0, 1.0]).unwrap();
        assert!(matches!(newton_solve(&p, &GmaConfig::default()), Err(LabError::Compatibility { .. })));
        assert!(GmaProblem::constant(grid(2, 8), &[1.0]).is_err());
    }

    #[test]
    fn linearization_self_adjoint() {
        let g = grid(2, 8);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let specs = vec![
            ClosedKKSpec { k: 1, c: 0.4, eta: random_field(g, &mut rng, 0.01) },
            ClosedKKSpec { k: 2, c: 0.6, eta: random_field(g, &mut rng, 0.01) },
        ];
        let p = GmaProblem::new(g, specs).unwrap();
        let phi = random_field(g, &mut rng, 0.01);
        let a = random_field(g, &mut rng, 1.0);
        let b = random_field(g, &mut rng, 1.0);
        let la = linearized_apply(&p, &phi, &a).unwrap().as_field();
        let lb = linearized_apply(&p, &phi, &b).unwrap().as_field();
        assert!((b.dot(&la) - a.dot(&lb)).abs() < 1e-10);
    }

    #[test]
    fn two_dimensional_newton_converges_quadratically() {
        let g = grid(2, 16);
        let specs = vec![
            ClosedKKSpec { k: 1, c: 0.4, eta: FourierProfile::single(&[1, 0, 0, 1], 0.01).sample(g) },
            ClosedKKSpec { k: 2, c: 0.6, eta: FourierProfile::single(&[0, 1, 1, 1], 0.01).sample(g) },
        ];
        let p = GmaProblem::new(g, specs).unwrap();
        let sol = newton_solve(&p, &GmaConfig::default()).unwrap();
        assert!(sol.newton_iters <= 6, "{:?}", sol.history);
        assert!(residual(&p, &sol.phi).unwrap().sup_norm() < 1e-9);
        assert!(sol.phi.mean().abs() < 1e-12);
        let c = quadratic_constant(&sol.history, 3, 1e-13).unwrap();
        assert!(c <= 100.0, "{c} {:?}", sol.history);
    }
}

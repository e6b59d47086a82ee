use std::path::Path;

use num_complex::Complex64;
use rand::Rng;

use prequant_core::cym::{alpha_continuation, check_eta_admissible, compute_lambda, residual_cym, CymProblem};
use prequant_core::cym_forms::{
    fd_mu_alpha_identity, mu_alpha_eval, point_from_state, AlphaParams, Coeff, CymGauge, CymPoint, CymTangent,
};
use prequant_core::fields::random_field;
use prequant_core::higgs::Mat2;
use prequant_core::{LabError, ScalarField, TopForm, TorusGrid};

use crate::config::CymScenario;
use crate::report::{ScenarioReport, Series, Verdict};
use crate::scenarios::fitted_exponent;

/// Largest `|mu_alpha|` over random gauge directions at a solved state.
fn mu_at_solution(
    p: &CymProblem,
    s: &prequant_core::cym::CymState,
    dirs: usize,
    rng: &mut impl Rng,
) -> Result<f64, LabError> {
    let at = point_from_state(p, s)?;
    let prm = AlphaParams { big_n: 1.0, alpha: p.alpha, lambda: 0.0 };
    let mut worst = 0.0f64;
    for _ in 0..dirs {
        let g = CymGauge::<Complex64>::random(p.grid, rng, 1.0);
        worst = worst.max(mu_alpha_eval(&at, &g, prm, &p.eta)?.abs());
    }
    Ok(worst)
}

/// Number of random configurations whose finite-difference slope falls short.
fn fd_failures<C: Coeff>(s: &CymScenario, grid: TorusGrid, rng: &mut impl Rng) -> Result<usize, LabError> {
    let prm = AlphaParams { big_n: 1.0, alpha: s.alpha, lambda: -4.0 * std::f64::consts::PI * s.deg_e as f64 };
    let mut bad = 0;
    for _ in 0..s.fd_configs {
        let eta = TopForm::from_field(&random_field(grid, rng, 1.0));
        let at = CymPoint::<C>::random(grid, s.fd_rank, s.deg_e, rng, s.fd_amp);
        let g = CymGauge::<C>::random(grid, rng, 1.0);
        let b = CymTangent::<C>::random(grid, rng, 1.0);
        if !fd_mu_alpha_identity(&at, &g, &b, prm, &eta)?.passes(s.min_slope) {
            bad += 1;
        }
    }
    Ok(bad)
}

pub fn run(s: &CymScenario, rng: &mut impl Rng, snapshot_dir: Option<&Path>) -> ScenarioReport {
    let mut rep = ScenarioReport::new("cym", &s.name);
    let grid = match TorusGrid::new(2, s.pts) {
        Ok(g) => g,
        Err(e) => {
            rep.verdict(Verdict::failed("grid", e.to_string()));
            return rep;
        }
    };
    if s.fd_configs > 0 {
        let fd =
            if s.fd_rank == 1 { fd_failures::<Complex64>(s, grid, rng) } else { fd_failures::<Mat2>(s, grid, rng) };
        match fd {
            Ok(bad) => {
                rep.fact("fd_configs", s.fd_configs);
                rep.verdict(Verdict::exact("fd_mu_alpha_failures", bad));
            }
            Err(e) => rep.verdict(Verdict::failed("fd_mu_alpha_failures", e.to_string())),
        }
    }
    let profile = s.eta.sample(grid).add(&ScalarField::constant(grid, 1.0));
    if profile.values.iter().any(|v| *v <= 0.0) {
        rep.verdict(Verdict::failed("eta_positive", "eta profile must be pointwise positive"));
        return rep;
    }
    let path = match alpha_continuation(grid, &profile, s.deg_e, s.alpha, s.steps, &s.solver) {
        Ok(p) => p,
        Err(e) => {
            if let LabError::Continuation { last_reached, .. } = &e {
                rep.fact("last_reached_alpha", last_reached);
            }
            rep.verdict(Verdict::failed("continuation", e.to_string()));
            return rep;
        }
    };

    let mut summary =
        Series::new("alpha_path", &["alpha", "sup_dphi", "sup_du", "r1", "r2", "newton_iters", "positivity_margin"]);
    let mut history = Series::new("residual_history", &["step", "iter", "residual"]);
    let (_, first) = &path[0];
    let mut worst_residual = 0.0f64;
    let mut worst_margin = f64::INFINITY;
    let mut worst_admissibility = 0.0f64;
    let mut worst_mu = 0.0f64;
    let mut scaling = Vec::new();
    let mut continuity = Vec::new();
    for (i, (alpha, sol)) in path.iter().enumerate() {
        let p = match CymProblem::with_eta_profile(grid, *alpha, &profile, s.deg_e) {
            Ok(p) => p,
            Err(e) => {
                rep.verdict(Verdict::failed("problem", e.to_string()));
                return rep;
            }
        };
        let (r1, r2) = match residual_cym(&p, &sol.state) {
            Ok((a, b)) => (a.sup_norm(), b.sup_norm()),
            Err(e) => {
                rep.verdict(Verdict::failed("residual", e.to_string()));
                return rep;
            }
        };
        let dphi = sol.state.phi.sub(&first.state.phi).sup_norm();
        let du = sol.state.u.sub(&first.state.u).sup_norm();
        summary.push(vec![*alpha, dphi, du, r1, r2, sol.newton_iters as f64, sol.positivity_margin]);
        for (it, r) in sol.history.iter().enumerate() {
            history.push(vec![i as f64, it as f64, *r]);
        }
        worst_residual = worst_residual.max(r1).max(r2);
        worst_margin = worst_margin.min(sol.positivity_margin);
        worst_admissibility = worst_admissibility.max(check_eta_admissible(&p));
        if i > 0 {
            scaling.push((*alpha, dphi));
            let (prev_alpha, prev) = &path[i - 1];
            let step = sol.state.phi.sub(&prev.state.phi).sup_norm();
            continuity.push(step / (alpha - prev_alpha));
        }
        if s.deg_e == 0 && s.mu_directions > 0 {
            match mu_at_solution(&p, &sol.state, s.mu_directions, rng) {
                Ok(v) => worst_mu = worst_mu.max(v),
                Err(e) => {
                    rep.verdict(Verdict::failed("mu_alpha_at_solution", e.to_string()));
                    return rep;
                }
            }
        }
        if i == path.len() - 1 {
            rep.fact("lambda", compute_lambda(&p));
        }
    }
    rep.verdict(Verdict::at_most("residual_sup_all_steps", worst_residual, s.residual_tol));
    rep.verdict(Verdict::at_most("eta_admissibility", worst_admissibility, s.solver.admissibility_tol));
    rep.verdict(Verdict::at_least("positivity_margin", worst_margin, f64::MIN_POSITIVE));
    if s.deg_e == 0 && s.mu_directions > 0 {
        rep.verdict(Verdict::at_most("mu_alpha_at_solutions", worst_mu, s.mu_tol));
    }
    if let Some(c) = continuity.iter().copied().reduce(f64::max) {
        rep.fact("continuity_constant", c);
    }
    let (_, last) = path.last().expect("continuation returns at least one step");
    rep.fact("sup_phi_final", last.state.phi.sup_norm());
    rep.fact("sup_dphi_final", last.state.phi.sub(&first.state.phi).sup_norm());
    if s.scaling_check {
        // Differences at roundoff carry no scaling information.
        let informative: Vec<(f64, f64)> = scaling.iter().copied().filter(|(_, d)| *d > 1e-12).collect();
        let p = if informative.len() == scaling.len() { fitted_exponent(&informative) } else { None };
        let v = Verdict::at_most(
            "alpha_scaling_exponent_deviation",
            p.map_or(f64::NAN, |p| (p - 1.0).abs()),
            s.scaling_tol,
        );
        let detail = match p {
            Some(p) => format!("fitted exponent {p}"),
            None => format!(
                "exponent undefined: sup|phi_alpha - phi_0| at roundoff ({:e})",
                scaling.iter().map(|x| x.1).fold(0.0, f64::max)
            ),
        };
        rep.verdict(v.with_detail(detail));
    }
    if let (true, Some(dir)) = (s.snapshot, snapshot_dir) {
        let written = std::fs::create_dir_all(dir).map_err(LabError::from).and_then(|_| {
            last.state.phi.write_binary(std::io::BufWriter::new(std::fs::File::create(dir.join("phi.bin"))?))?;
            last.state.u.write_binary(std::io::BufWriter::new(std::fs::File::create(dir.join("u.bin"))?))
        });
        if let Err(e) = written {
            rep.verdict(Verdict::failed("snapshot", e.to_string()));
        }
    }
    rep.series(summary);
    rep.series(history);
    rep
}

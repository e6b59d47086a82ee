use std::path::Path;

use prequant_core::fields::ClosedKKSpec;
use prequant_core::gma::{
    check_compatibility, continuation_solve, ellipticity_form, quadratic_constant, residual_integral, GmaProblem,
    GmaSolution,
};
use prequant_core::{LabError, ScalarField, TorusGrid};

use crate::config::GmaScenario;
use crate::report::{ScenarioReport, Series, Verdict};
use crate::scenarios::relative_perturbation;

fn problem(s: &GmaScenario, pts: usize) -> Result<GmaProblem, LabError> {
    let grid = TorusGrid::new(s.n, pts)?;
    let specs = s.alphas.iter().map(|a| ClosedKKSpec { k: a.k, c: a.c, eta: a.eta.sample(grid) }).collect();
    GmaProblem::new(grid, specs)
}

fn solve(s: &GmaScenario, pts: usize) -> Result<(GmaProblem, Vec<(f64, GmaSolution)>), LabError> {
    let p = problem(s, pts)?;
    let path = continuation_solve(&p, s.continuation_steps, &s.solver)?;
    Ok((p, path))
}

fn error_kind(e: &LabError) -> &'static str {
    match e {
        LabError::EllipticityLost { .. } => "ellipticity",
        LabError::PositivityLost { .. } => "positivity",
        LabError::Compatibility { .. } => "compatibility",
        LabError::MaxIterations { .. } => "max-iterations",
        LabError::Continuation { source, .. } => error_kind(source),
        _ => "other",
    }
}

pub fn run(s: &GmaScenario, snapshot_dir: Option<&Path>) -> ScenarioReport {
    let mut rep = ScenarioReport::new("gma", &s.name);
    if let Ok(p) = problem(s, s.pts) {
        for k in 0..p.specs.len() {
            rep.fact(format!("relative_perturbation_{}", k + 1), relative_perturbation(&p.specs[k]));
        }
    }
    let outcome = solve(s, s.pts);
    if let Some(kind) = &s.expect_error {
        match outcome {
            Err(e) => {
                rep.fact("error", &e);
                if let LabError::Continuation { at, last_reached, .. } = &e {
                    rep.fact("failed_at_t", at);
                    rep.fact("last_reached_t", last_reached);
                }
                let v = Verdict::exact(format!("expected_error_{kind}"), usize::from(error_kind(&e) != kind));
                rep.verdict(v.with_detail(e.to_string()));
            }
            Ok(_) => rep.verdict(Verdict::failed(format!("expected_error_{kind}"), "solver succeeded")),
        }
        return rep;
    }
    let (p, path) = match outcome {
        Ok(v) => v,
        Err(e) => {
            rep.verdict(Verdict::failed("solve", e.to_string()));
            return rep;
        }
    };
    rep.verdict(Verdict::at_most("compatibility_defect", check_compatibility(&p), s.solver.compat_tol));

    let mut summary = Series::new("continuation", &["t", "sup_phi", "residual", "newton_iters", "ellipticity_margin"]);
    let mut history = Series::new("residual_history", &["step", "iter", "residual"]);
    let mut worst_residual = 0.0f64;
    let mut worst_margin = f64::INFINITY;
    for (i, (t, sol)) in path.iter().enumerate() {
        summary.push(vec![*t, sol.phi.sup_norm(), sol.residual_norm, sol.newton_iters as f64, sol.ellipticity_margin]);
        for (it, r) in sol.history.iter().enumerate() {
            history.push(vec![i as f64, it as f64, *r]);
        }
        worst_residual = worst_residual.max(sol.residual_norm);
        worst_margin = worst_margin.min(sol.ellipticity_margin);
    }
    let (_, last) = path.last().expect("at least one continuation step");
    rep.verdict(Verdict::at_most("residual_sup", worst_residual, s.solver.tol));
    rep.verdict(Verdict::at_most("newton_steps_final", last.newton_iters as f64, s.max_newton_steps as f64));
    rep.verdict(Verdict::at_least("ellipticity_margin", worst_margin, f64::MIN_POSITIVE));
    let phi = &last.phi;
    rep.verdict(Verdict::at_most("mean_phi", phi.mean().abs(), 1e-12));
    // The residual integral is the compatibility defect for every potential.
    let drift = (residual_integral(&p, phi).unwrap_or(f64::NAN)
        - residual_integral(&p, &ScalarField::zeros(p.grid)).unwrap_or(f64::NAN))
    .abs();
    rep.verdict(Verdict::at_most("residual_integral_drift", drift, 1e-11));
    match ellipticity_form(&p, phi) {
        Ok(e) => rep.fact("final_ellipticity_margin", e.margin()),
        Err(e) => rep.verdict(Verdict::failed("ellipticity_form", e.to_string())),
    }
    rep.fact("sup_phi", phi.sup_norm());
    if s.quadratic_tail {
        let c = quadratic_constant(&last.history, 3, 1e-13).unwrap_or(f64::NAN);
        rep.verdict(Verdict::at_most("quadratic_constant", c, s.quadratic_cap));
    }
    if s.analytic {
        let eta = s.alphas[0].eta.sample(p.grid).remove_mean();
        rep.verdict(Verdict::at_most("analytic_error", phi.sub(&eta).sup_norm(), s.analytic_tol));
    }
    if let Some(fine) = s.refine_pts {
        match solve(s, fine) {
            Ok((pf, pathf)) => {
                let (_, solf) = pathf.last().expect("at least one continuation step");
                let diff = match phi.resample(pf.grid) {
                    Ok(up) => up.sub(&solf.phi).sup_norm(),
                    Err(_) => f64::NAN,
                };
                rep.fact("refine_pts", fine);
                rep.verdict(Verdict::at_most("refinement_difference", diff, s.refine_tol));
            }
            Err(e) => rep.verdict(Verdict::failed("refinement_solve", e.to_string())),
        }
    }
    if let (true, Some(dir)) = (s.snapshot, snapshot_dir) {
        let written = std::fs::create_dir_all(dir)
            .map_err(LabError::from)
            .and_then(|_| std::fs::File::create(dir.join("phi.bin")).map_err(LabError::from))
            .and_then(|f| phi.write_binary(std::io::BufWriter::new(f)));
        if let Err(e) = written {
            rep.verdict(Verdict::failed("snapshot", e.to_string()));
        }
    }
    rep.series(summary);
    rep.series(history);
    rep
}

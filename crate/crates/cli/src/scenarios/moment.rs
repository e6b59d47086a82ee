use rand::Rng;

use prequant_core::fields::{random_field, ClosedKKSpec};
use prequant_core::gma::{newton_solve, GmaConfig, GmaProblem};
use prequant_core::moment::{
    complex_gauge_act, fd_moment_identity, index_constant, index_density_omega, moment_eval, omega_eval,
    unitary_gauge_act, ConnPointU1, GaugeDirU1, TangentU1,
};
use prequant_core::{LabError, ScalarField, TorusGrid};

use crate::config::MomentScenario;
use crate::report::{ScenarioReport, Series, Verdict};
use crate::scenarios::relative_perturbation;

fn problem(s: &MomentScenario, rng: &mut impl Rng) -> Result<GmaProblem, LabError> {
    let grid = TorusGrid::new(s.n, s.pts)?;
    let default: Vec<f64> = if s.n == 1 { vec![1.0] } else { vec![0.4, 0.6] };
    let coeffs = s.coeffs.clone().unwrap_or(default);
    let specs = coeffs
        .iter()
        .enumerate()
        .map(|(i, &c)| ClosedKKSpec { k: i + 1, c, eta: random_field(grid, rng, s.eta_amp) })
        .collect();
    GmaProblem::new(grid, specs)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

struct Tally {
    fd_failures: usize,
    exact_configs: usize,
    min_slope: f64,
    antisym: f64,
    constant_mu: f64,
    index_ratios: Vec<f64>,
    unitary: f64,
}

fn one_config(
    s: &MomentScenario,
    rng: &mut impl Rng,
    t: &mut Tally,
    fd_series: Option<&mut Series>,
) -> Result<(), LabError> {
    let p = problem(s, rng)?;
    let g = p.grid;
    let at = ConnPointU1::random(g, rng, s.amp);
    let h = GaugeDirU1::random(g, rng, 1.0);
    let a = TangentU1::random(g, rng, 1.0);
    let b = TangentU1::random(g, rng, 1.0);

    let fit = fd_moment_identity(&p, &at, &h, &b, s.w)?;
    if !fit.passes(s.min_slope) {
        t.fd_failures += 1;
    }
    if fit.exact {
        t.exact_configs += 1;
    }
    if let Some(sl) = fit.slope {
        t.min_slope = t.min_slope.min(sl);
    }
    if let Some(series) = fd_series {
        for (step, e) in fit.steps.iter().zip(&fit.errors) {
            series.push(vec![*step, *e]);
        }
    }

    let ab = omega_eval(&p, &at, &a, &b, s.w)?;
    let ba = omega_eval(&p, &at, &b, &a, s.w)?;
    t.antisym = t.antisym.max((ab + ba).abs() / ab.abs().max(1.0));

    let c = GaugeDirU1 { h: ScalarField::constant(g, rng.gen_range(-2.0..2.0)) };
    t.constant_mu = t.constant_mu.max(moment_eval(&p, &at, &c, s.w)?.abs());

    // Ratio at W = 1 so the constant is comparable across configurations.
    let idx = index_density_omega(&p, &at, &a, &b)?;
    let om = omega_eval(&p, &at, &a, &b, 1.0)?;
    t.index_ratios.push(idx / om);

    let theta = random_field(g, rng, 1.0);
    let rot = unitary_gauge_act(&at, &theta)?;
    let d_form =
        at.chern_form().axpy(-1.0, &rot.chern_form()).comps.iter().flatten().fold(0.0f64, |m, v| m.max(v.norm()));
    let d_om = (omega_eval(&p, &rot, &a, &b, s.w)? - ab).abs();
    let d_mu = (moment_eval(&p, &rot, &h, s.w)? - moment_eval(&p, &at, &h, s.w)?).abs();
    t.unitary = t.unitary.max(d_form).max(d_om).max(d_mu);
    Ok(())
}

fn solution_check(s: &MomentScenario, rng: &mut impl Rng) -> Result<f64, LabError> {
    let raw = problem(s, rng)?;
    let specs = raw
        .specs
        .iter()
        .map(|k| {
            let r = relative_perturbation(k);
            let scale = if r > 0.0 { s.solution_perturbation / r } else { 0.0 };
            ClosedKKSpec { eta: k.eta.scale(scale), ..k.clone() }
        })
        .collect();
    let p = GmaProblem::new(raw.grid, specs)?;
    let sol = newton_solve(&p, &GmaConfig::default())?;
    let at = complex_gauge_act(&ConnPointU1::base(p.grid), &sol.phi)?;
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let h = GaugeDirU1::random(p.grid, rng, 1.0);
        worst = worst.max(moment_eval(&p, &at, &h, s.w)?.abs());
    }
    Ok(worst)
}

pub fn run(s: &MomentScenario, rng: &mut impl Rng) -> ScenarioReport {
    let mut rep = ScenarioReport::new("moment", &s.name);
    let mut t = Tally {
        fd_failures: 0,
        exact_configs: 0,
        min_slope: f64::INFINITY,
        antisym: 0.0,
        constant_mu: 0.0,
        index_ratios: Vec::new(),
        unitary: 0.0,
    };
    let mut fd = Series::new("fd_errors_config0", &["t", "error"]);
    for i in 0..s.configs {
        let series = if i == 0 { Some(&mut fd) } else { None };
        if let Err(e) = one_config(s, rng, &mut t, series) {
            rep.verdict(Verdict::failed(format!("config_{i}"), e.to_string()));
            return rep;
        }
    }
    rep.verdict(Verdict::exact("fd_order_failures", t.fd_failures));
    rep.fact("fd_configs", s.configs);
    rep.fact("fd_exact_configs", t.exact_configs);
    if t.min_slope.is_finite() {
        rep.fact("fd_min_slope", t.min_slope);
    }
    rep.verdict(Verdict::at_most("omega_antisymmetry", t.antisym, 1e-12));
    rep.verdict(Verdict::at_most("constant_gauge_moment", t.constant_mu, 1e-11));
    rep.verdict(Verdict::at_most("unitary_invariance", t.unitary, 1e-12));
    if let Some(&measured) = t.index_ratios.first() {
        let spread = t.index_ratios.iter().map(|r| rel(*r, measured)).fold(0.0, f64::max);
        rep.fact("index_constant_measured", measured);
        rep.verdict(Verdict::at_most("index_constant_spread", spread, s.index_tol));
        match index_constant(s.n, 1.0) {
            Ok(predicted) => {
                rep.fact("index_constant_predicted", predicted);
                rep.verdict(Verdict::at_most("index_constant_vs_exact", rel(measured, predicted), s.index_tol));
            }
            Err(e) => rep.verdict(Verdict::failed("index_constant_vs_exact", e.to_string())),
        }
    }
    if s.solution_check {
        match solution_check(s, rng) {
            Ok(v) => rep.verdict(Verdict::at_most("moment_at_solution", v, 1e-9)),
            Err(e) => rep.verdict(Verdict::failed("moment_at_solution", e.to_string())),
        }
    }
    rep.series(fd);
    rep
}

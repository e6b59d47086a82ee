use num_complex::Complex64;
use rand::Rng;

use prequant_core::chern::c_kl_constant;
use prequant_core::higgs::{
    assemble_dt, bracket_phiphidag, fd_curvature_report, fd_mu_identity, fd_mu_tilde_identity, hitchin_residual,
    kernel_diagnosis, metric_factors, random_gauge, HiggsPoint, HiggsTangent, LogMetric, Mat2, MatField, RankTwoConn,
    Structure,
};
use prequant_core::{LabError, TorusGrid};

use crate::config::{HitchinScenario, PhiPreset};
use crate::report::{ScenarioReport, Series, Verdict};

const DIAGONAL_ENTRY: f64 = 0.5;

fn preset(p: PhiPreset, grid: TorusGrid, rng: &mut impl Rng, amp: f64) -> HiggsPoint {
    match p {
        PhiPreset::Zero => HiggsPoint::zero(grid),
        PhiPreset::Nilpotent => HiggsPoint::nilpotent(grid),
        PhiPreset::Diagonal => HiggsPoint::diagonal(grid, DIAGONAL_ENTRY),
        PhiPreset::Random => HiggsPoint { grid, phi: MatField::random(grid, rng, amp) },
    }
}

fn random_unitary(rng: &mut impl Rng) -> Mat2 {
    let (t, a, b): (f64, f64, f64) = (rng.gen_range(0.0..3.0), rng.gen_range(0.0..6.0), rng.gen_range(0.0..6.0));
    let e = |x: f64| Complex64::from_polar(1.0, x);
    Mat2::new(e(a) * t.cos(), -e(b) * t.sin(), e(-b) * t.sin(), e(-a) * t.cos())
}

#[derive(Default)]
struct Tally {
    trace_bracket: f64,
    trace_integral: f64,
    hermitian: f64,
    equivariance: f64,
    fd_mu_failures: usize,
    fd_tilde_failures: usize,
    i_curvature: f64,
    jk_difference: f64,
    f_positive_failures: usize,
}

fn residual_checks(
    s: &HitchinScenario,
    a: &RankTwoConn,
    phi: &HiggsPoint,
    rng: &mut impl Rng,
    t: &mut Tally,
) -> Result<(), LabError> {
    t.trace_bracket = t.trace_bracket.max(bracket_phiphidag(phi).trace_sup());
    let res = hitchin_residual(a, phi, s.k, s.l)?;
    t.trace_integral = t.trace_integral.max(res.density.integral_trace().norm());
    t.hermitian = t.hermitian.max(res.density.hermitian_defect());
    let u = random_unitary(rng);
    let a2 = RankTwoConn { a: a.a.conjugate(&u), ..a.clone() };
    let phi2 = HiggsPoint { grid: phi.grid, phi: phi.phi.conjugate(&u) };
    let res2 = hitchin_residual(&a2, &phi2, s.k, s.l)?;
    let diff = res.density.conjugate(&u).axpy(Complex64::new(-1.0, 0.0), &res2.density).sup_norm();
    t.equivariance = t.equivariance.max(diff);
    Ok(())
}

fn random_config(s: &HitchinScenario, grid: TorusGrid, rng: &mut impl Rng, t: &mut Tally) -> Result<(), LabError> {
    let a = RankTwoConn { grid, a: MatField::random(grid, rng, s.amp), deg: s.deg };
    let phi = HiggsPoint { grid, phi: MatField::random(grid, rng, s.amp) };
    residual_checks(s, &a, &phi, rng, t)?;
    let g = random_gauge(grid, rng, 1.0);
    let x = HiggsTangent::random(grid, rng, 1.0);
    if !fd_mu_identity(&a, &phi, &g, &x, s.k, s.l)?.passes(s.min_slope) {
        t.fd_mu_failures += 1;
    }
    if !fd_mu_tilde_identity(&a, &phi, &g, &x)?.passes(s.min_slope) {
        t.fd_tilde_failures += 1;
    }
    let y = HiggsTangent::random(grid, rng, 1.0);
    let r = fd_curvature_report(LogMetric::H1, Structure::I, &a, &phi, &x, &y)?;
    t.i_curvature = t.i_curvature.max(r.curvature.abs());
    for s in [Structure::J, Structure::K] {
        for m in [LogMetric::H1, LogMetric::H2] {
            t.jk_difference = t.jk_difference.max(fd_curvature_report(m, s, &a, &phi, &x, &y)?.difference.abs());
        }
    }
    let (f, h1, h2) = metric_factors(&a, &phi)?;
    if !(f > 0.0 && h1 > 0.0 && h2 > 0.0 && f.ln().is_finite()) {
        t.f_positive_failures += 1;
    }
    Ok(())
}

pub fn run(s: &HitchinScenario, rng: &mut impl Rng) -> ScenarioReport {
    let mut rep = ScenarioReport::new("hitchin", &s.name);
    let grid = match TorusGrid::new(1, s.pts) {
        Ok(g) => g,
        Err(e) => {
            rep.verdict(Verdict::failed("grid", e.to_string()));
            return rep;
        }
    };
    let phi = preset(s.phi, grid, rng, s.amp);
    let base = RankTwoConn::flat(grid, s.deg);
    let mut t = Tally::default();
    if let Err(e) = residual_checks(s, &base, &phi, rng, &mut t) {
        rep.verdict(Verdict::failed("preset_residual", e.to_string()));
        return rep;
    }
    match hitchin_residual(&base, &phi, s.k, s.l) {
        Ok(r) => {
            rep.fact("residual_sup", r.density.sup_norm());
            rep.fact("holomorphicity_defect", r.holomorphicity_defect);
        }
        Err(e) => rep.verdict(Verdict::failed("residual", e.to_string())),
    }
    if let Ok((f, h1, h2)) = metric_factors(&base, &phi) {
        rep.fact("metric_factors", format!("{f} {h1} {h2}"));
    }
    for i in 0..s.configs {
        if let Err(e) = random_config(s, grid, rng, &mut t) {
            rep.verdict(Verdict::failed(format!("config_{i}"), e.to_string()));
            return rep;
        }
    }
    rep.verdict(Verdict::at_most("trace_bracket_sup", t.trace_bracket, 1e-13));
    rep.verdict(Verdict::at_most("residual_trace_integral", t.trace_integral, 1e-11));
    rep.verdict(Verdict::at_most("residual_hermitian_defect", t.hermitian, 1e-12));
    rep.verdict(Verdict::at_most("residual_equivariance", t.equivariance, 1e-12));
    let slope_bad = (s.k - 1..=s.k + 1)
        .map(|k| match (c_kl_constant(1, 2, s.deg, k + 1, s.l), c_kl_constant(1, 2, s.deg, k, s.l)) {
            (Ok(a), Ok(b)) => usize::from(a - b != prequant_core::chern::int(2)),
            _ => 1,
        })
        .sum();
    rep.verdict(Verdict::exact("c_kl_slope_equals_rank", slope_bad));
    if s.configs > 0 {
        rep.fact("fd_configs", s.configs);
        rep.verdict(Verdict::exact("fd_mu_failures", t.fd_mu_failures));
        rep.verdict(Verdict::exact("fd_mu_tilde_failures", t.fd_tilde_failures));
        rep.verdict(Verdict::at_most("curvature_i_h1", t.i_curvature, 1e-8));
        rep.fact("curvature_jk_max_difference", t.jk_difference);
        rep.verdict(Verdict::exact("metric_factor_positivity_failures", t.f_positive_failures));
    }
    if s.mode_cap > 0 {
        match assemble_dt(&phi, s.mode_cap) {
            Ok(op) => {
                let eig = op.eigenvalues();
                rep.verdict(Verdict::at_most("dt_symmetry_defect", op.symmetry_defect(), 1e-10));
                rep.verdict(Verdict::at_least("dt_min_eigenvalue", eig.first().copied().unwrap_or(f64::NAN), -1e-10));
                rep.fact("dt_size", eig.len());
                let mut spectrum = Series::new("dt_spectrum", &["index", "eigenvalue"]);
                for (i, v) in eig.iter().enumerate() {
                    spectrum.push(vec![i as f64, *v]);
                }
                rep.series(spectrum);
                match kernel_diagnosis(&op, s.kernel_tol) {
                    Ok((full, reduced)) => {
                        rep.fact("kernel_dim", full);
                        rep.fact("normalized_kernel_dim", reduced);
                        if let Some([ef, er]) = s.expected_kernel {
                            let bad = usize::from(full != ef) + usize::from(reduced != er);
                            rep.verdict(Verdict::exact("kernel_dims", bad).with_detail(format!("({full}, {reduced})")));
                        }
                    }
                    Err(e) => rep.verdict(Verdict::failed("kernel_dims", e.to_string())),
                }
            }
            Err(e) => rep.verdict(Verdict::failed("assemble_dt", e.to_string())),
        }
    }
    rep
}

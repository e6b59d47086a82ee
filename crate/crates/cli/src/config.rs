//! TOML run configuration. Every table rejects unknown keys; numeric ranges are
//! checked by [`RunConfig::validate`] right after parsing.

use std::path::Path;

use clap::ValueEnum;
use prequant_core::cym::CymConfig;
use prequant_core::fields::FourierProfile;
use prequant_core::gma::GmaConfig;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    VerifyChern,
    SolveGma,
    VerifyMoment,
    HitchinLab,
    SolveCym,
    All,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::VerifyChern => "verify-chern",
            Command::SolveGma => "solve-gma",
            Command::VerifyMoment => "verify-moment",
            Command::HitchinLab => "hitchin-lab",
            Command::SolveCym => "solve-cym",
            Command::All => "all",
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Used when `--seed` is not given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default)]
    pub chern: Vec<ChernScenario>,
    #[serde(default)]
    pub gma: Vec<GmaScenario>,
    #[serde(default)]
    pub moment: Vec<MomentScenario>,
    #[serde(default)]
    pub hitchin: Vec<HitchinScenario>,
    #[serde(default)]
    pub cym: Vec<CymScenario>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChernScenario {
    pub name: String,
    #[serde(default = "default_dims")]
    pub dims: Vec<usize>,
    /// Random rational alpha inputs per dimension.
    #[serde(default = "default_random_cases")]
    pub random_cases: usize,
}

fn default_dims() -> Vec<usize> {
    vec![1, 2, 3, 4]
}

fn default_random_cases() -> usize {
    50
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlphaConfig {
    pub k: usize,
    pub c: f64,
    #[serde(default)]
    pub eta: FourierProfile,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GmaScenario {
    pub name: String,
    pub n: usize,
    pub pts: usize,
    pub alphas: Vec<AlphaConfig>,
    #[serde(default)]
    pub solver: GmaConfig,
    #[serde(default = "one")]
    pub continuation_steps: usize,
    #[serde(default = "default_newton_cap")]
    pub max_newton_steps: usize,
    /// Check the `n = 1` closed form `phi = eta_1 - mean`.
    #[serde(default)]
    pub analytic: bool,
    #[serde(default = "default_tight")]
    pub analytic_tol: f64,
    #[serde(default)]
    pub quadratic_tail: bool,
    #[serde(default = "default_quad_cap")]
    pub quadratic_cap: f64,
    /// Solve again on this grid and compare.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub refine_pts: Option<usize>,
    #[serde(default = "default_tight")]
    pub refine_tol: f64,
    /// Error kind the run must end with, e.g. `ellipticity`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expect_error: Option<String>,
    #[serde(default)]
    pub snapshot: bool,
}

fn one() -> usize {
    1
}

fn default_newton_cap() -> usize {
    8
}

fn default_tight() -> f64 {
    1e-8
}

fn default_quad_cap() -> f64 {
    100.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MomentScenario {
    pub name: String,
    pub n: usize,
    pub pts: usize,
    #[serde(default = "default_configs")]
    pub configs: usize,
    /// Amplitude of the random connection potential.
    #[serde(default = "default_small_amp")]
    pub amp: f64,
    /// Amplitude of the exact parts of the closed forms.
    #[serde(default = "default_small_amp")]
    pub eta_amp: f64,
    /// `c_k` for `k = 1..n`; must sum to one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coeffs: Option<Vec<f64>>,
    #[serde(default = "default_w")]
    pub w: f64,
    #[serde(default = "default_min_slope")]
    pub min_slope: f64,
    #[serde(default = "default_index_tol")]
    pub index_tol: f64,
    /// Also check that the moment map vanishes at a solved point.
    #[serde(default)]
    pub solution_check: bool,
    /// Relative size of the exact parts used for the solved point.
    #[serde(default = "default_solution_perturbation")]
    pub solution_perturbation: f64,
}

fn default_configs() -> usize {
    20
}

fn default_small_amp() -> f64 {
    0.02
}

fn default_solution_perturbation() -> f64 {
    0.05
}

fn default_w() -> f64 {
    1.0
}

fn default_min_slope() -> f64 {
    1.9
}

fn default_index_tol() -> f64 {
    1e-9
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PhiPreset {
    Zero,
    Nilpotent,
    Diagonal,
    Random,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HitchinScenario {
    pub name: String,
    pub phi: PhiPreset,
    pub pts: usize,
    #[serde(default)]
    pub k: i64,
    #[serde(default)]
    pub l: i64,
    #[serde(default)]
    pub deg: i64,
    /// Fourier mode cap `M` of the DT basis; zero skips the assembly.
    #[serde(default)]
    pub mode_cap: usize,
    #[serde(default = "default_kernel_tol")]
    pub kernel_tol: f64,
    /// Expected `[dim ker, dim ker after normalisation]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected_kernel: Option<[usize; 2]>,
    /// Random configurations for the finite-difference and trace checks.
    #[serde(default)]
    pub configs: usize,
    #[serde(default = "default_higgs_amp")]
    pub amp: f64,
    #[serde(default = "default_min_slope")]
    pub min_slope: f64,
}

fn default_kernel_tol() -> f64 {
    1e-8
}

fn default_higgs_amp() -> f64 {
    0.5
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CymScenario {
    pub name: String,
    pub pts: usize,
    /// Final value of the continuation parameter.
    pub alpha: f64,
    #[serde(default)]
    pub deg_e: i64,
    /// Perturbation of the constant unit density; rescaled to the admissible mass.
    #[serde(default)]
    pub eta: FourierProfile,
    #[serde(default = "default_steps")]
    pub steps: usize,
    #[serde(default)]
    pub solver: CymConfig,
    #[serde(default = "default_tight")]
    pub residual_tol: f64,
    /// Random gauge directions for the moment-map check (degree zero only).
    #[serde(default = "default_mu_dirs")]
    pub mu_directions: usize,
    #[serde(default = "default_tight")]
    pub mu_tol: f64,
    /// Fit `sup|phi_alpha - phi_0| ~ alpha^p` and require `|p - 1| <= scaling_tol`.
    #[serde(default)]
    pub scaling_check: bool,
    #[serde(default = "default_scaling_tol")]
    pub scaling_tol: f64,
    /// Random configurations for the finite-difference moment identity.
    #[serde(default)]
    pub fd_configs: usize,
    /// Rank of the bundle in the finite-difference check, 1 or 2.
    #[serde(default = "default_rank")]
    pub fd_rank: usize,
    #[serde(default = "default_fd_amp")]
    pub fd_amp: f64,
    #[serde(default = "default_min_slope")]
    pub min_slope: f64,
    #[serde(default)]
    pub snapshot: bool,
}

fn default_rank() -> usize {
    1
}

fn default_fd_amp() -> f64 {
    0.2
}

fn default_steps() -> usize {
    5
}

fn default_mu_dirs() -> usize {
    10
}

fn default_scaling_tol() -> f64 {
    0.15
}

fn invalid(key: impl Into<String>, msg: impl Into<String>) -> CliError {
    CliError::Invalid { key: key.into(), msg: msg.into() }
}

fn check_grid(key: &str, n: usize, pts: usize) -> Result<()> {
    if !(1..=2).contains(&n) {
        return Err(invalid(format!("{key}.n"), format!("dimension must be 1 or 2, got {n}")));
    }
    if pts < 8 || !pts.is_power_of_two() {
        return Err(invalid(format!("{key}.pts"), format!("must be a power of two >= 8, got {pts}")));
    }
    Ok(())
}

fn positive(key: String, v: f64) -> Result<()> {
    if !(v.is_finite() && v > 0.0) {
        return Err(invalid(key, format!("must be positive and finite, got {v}")));
    }
    Ok(())
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<()> {
        for (i, s) in self.chern.iter().enumerate() {
            let key = format!("chern[{i}]");
            if let Some(n) = s.dims.iter().find(|n| !(1..=6).contains(*n)) {
                return Err(invalid(format!("{key}.dims"), format!("dimension {n} outside 1..=6")));
            }
        }
        for (i, s) in self.gma.iter().enumerate() {
            let key = format!("gma[{i}]");
            check_grid(&key, s.n, s.pts)?;
            if s.alphas.len() != s.n {
                return Err(invalid(
                    format!("{key}.alphas"),
                    format!("expected {} entries, found {}", s.n, s.alphas.len()),
                ));
            }
            for (j, a) in s.alphas.iter().enumerate() {
                if a.k != j + 1 {
                    return Err(invalid(format!("{key}.alphas[{j}].k"), format!("expected {}, found {}", j + 1, a.k)));
                }
                if !a.c.is_finite() {
                    return Err(invalid(format!("{key}.alphas[{j}].c"), "must be finite"));
                }
            }
            if s.continuation_steps == 0 {
                return Err(invalid(format!("{key}.continuation_steps"), "must be at least 1"));
            }
            positive(format!("{key}.solver.tol"), s.solver.tol)?;
            positive(format!("{key}.analytic_tol"), s.analytic_tol)?;
            positive(format!("{key}.refine_tol"), s.refine_tol)?;
            if let Some(p) = s.refine_pts {
                check_grid(&key, s.n, p)?;
            }
            if s.analytic && s.n != 1 {
                return Err(invalid(format!("{key}.analytic"), "closed form available for n = 1 only"));
            }
        }
        for (i, s) in self.moment.iter().enumerate() {
            let key = format!("moment[{i}]");
            check_grid(&key, s.n, s.pts)?;
            positive(format!("{key}.w"), s.w)?;
            positive(format!("{key}.index_tol"), s.index_tol)?;
            if !(s.solution_perturbation >= 0.0 && s.solution_perturbation < 1.0) {
                return Err(invalid(format!("{key}.solution_perturbation"), "must lie in [0, 1)"));
            }
            if let Some(c) = &s.coeffs {
                if c.len() != s.n {
                    return Err(invalid(format!("{key}.coeffs"), format!("expected {} entries", s.n)));
                }
            }
        }
        for (i, s) in self.hitchin.iter().enumerate() {
            let key = format!("hitchin[{i}]");
            check_grid(&key, 1, s.pts)?;
            if s.mode_cap > 0 && s.pts < 4 * s.mode_cap {
                return Err(invalid(
                    format!("{key}.mode_cap"),
                    format!("needs pts >= 4 * mode_cap, got pts = {}", s.pts),
                ));
            }
            positive(format!("{key}.kernel_tol"), s.kernel_tol)?;
        }
        for (i, s) in self.cym.iter().enumerate() {
            let key = format!("cym[{i}]");
            check_grid(&key, 2, s.pts)?;
            if !(s.alpha.is_finite() && s.alpha >= 0.0) {
                return Err(invalid(format!("{key}.alpha"), format!("must be finite and >= 0, got {}", s.alpha)));
            }
            if s.steps == 0 {
                return Err(invalid(format!("{key}.steps"), "must be at least 1"));
            }
            positive(format!("{key}.residual_tol"), s.residual_tol)?;
            positive(format!("{key}.mu_tol"), s.mu_tol)?;
            if !(1..=2).contains(&s.fd_rank) {
                return Err(invalid(format!("{key}.fd_rank"), format!("must be 1 or 2, got {}", s.fd_rank)));
            }
            if s.scaling_check && s.steps < 2 {
                return Err(invalid(format!("{key}.steps"), "scaling fit needs at least 2 steps"));
            }
        }
        Ok(())
    }

    /// Number of scenarios a command would run.
    pub fn count(&self, cmd: Command) -> usize {
        match cmd {
            Command::VerifyChern => self.chern.len(),
            Command::SolveGma => self.gma.len(),
            Command::VerifyMoment => self.moment.len(),
            Command::HitchinLab => self.hitchin.len(),
            Command::SolveCym => self.cym.len(),
            Command::All => self.chern.len() + self.gma.len() + self.moment.len() + self.hitchin.len() + self.cym.len(),
        }
    }
}

//! Scenario runner: parses a TOML config, runs the selected checks and emits a
//! versioned JSON report plus CSV series.

pub mod config;
pub mod error;
pub mod report;
pub mod scenarios;

use std::path::{Path, PathBuf};
use std::time::Instant;

pub use config::{Command, RunConfig};
pub use error::{CliError, Result};
pub use report::{RunReport, ScenarioReport, Series, Verdict};

/// Environment variable holding the default output directory.
pub const OUT_ENV: &str = "PREQUANT_LAB_OUT";
pub const DEFAULT_OUT: &str = "prequant-out";

const KIND_CHERN: u64 = 1;
const KIND_MOMENT: u64 = 3;
const KIND_HITCHIN: u64 = 4;
const KIND_CYM: u64 = 5;

fn selected(cmd: Command, kind: Command) -> bool {
    cmd == Command::All || cmd == kind
}

/// Runs every scenario the command selects. `snapshots` receives field dumps
/// for scenarios that ask for them.
pub fn run(cmd: Command, cfg: &RunConfig, seed: u64, snapshots: Option<&Path>) -> RunReport {
    let start = Instant::now();
    let mut report = RunReport::new(cmd.name(), seed, cfg.clone());
    let timed = |report: &mut RunReport, f: &mut dyn FnMut() -> ScenarioReport| {
        let t = Instant::now();
        let s = f();
        report.push(s, t.elapsed().as_secs_f64() * 1e3);
    };
    let snap = |kind: &str, name: &str| snapshots.map(|d| d.join(format!("{kind}-{name}")));
    if selected(cmd, Command::VerifyChern) {
        for (i, s) in cfg.chern.iter().enumerate() {
            let mut rng = scenarios::rng_for(seed, KIND_CHERN, i);
            timed(&mut report, &mut || scenarios::chern::run(s, &mut rng));
        }
    }
    if selected(cmd, Command::SolveGma) {
        for s in &cfg.gma {
            let dir = snap("gma", &s.name);
            timed(&mut report, &mut || scenarios::gma::run(s, dir.as_deref()));
        }
    }
    if selected(cmd, Command::VerifyMoment) {
        for (i, s) in cfg.moment.iter().enumerate() {
            let mut rng = scenarios::rng_for(seed, KIND_MOMENT, i);
            timed(&mut report, &mut || scenarios::moment::run(s, &mut rng));
        }
    }
    if selected(cmd, Command::HitchinLab) {
        for (i, s) in cfg.hitchin.iter().enumerate() {
            let mut rng = scenarios::rng_for(seed, KIND_HITCHIN, i);
            timed(&mut report, &mut || scenarios::hitchin::run(s, &mut rng));
        }
    }
    if selected(cmd, Command::SolveCym) {
        for (i, s) in cfg.cym.iter().enumerate() {
            let mut rng = scenarios::rng_for(seed, KIND_CYM, i);
            let dir = snap("cym", &s.name);
            timed(&mut report, &mut || scenarios::cym::run(s, &mut rng, dir.as_deref()));
        }
    }
    report.timing.total_ms = start.elapsed().as_secs_f64() * 1e3;
    report
}

/// `--out`, else the environment variable, else [`DEFAULT_OUT`].
pub fn resolve_out(flag: Option<PathBuf>, env: Option<String>) -> PathBuf {
    flag.or_else(|| env.filter(|s| !s.is_empty()).map(PathBuf::from)).unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
}

/// `--seed`, else the config's seed, else 0.
pub fn resolve_seed(flag: Option<u64>, cfg: &RunConfig) -> u64 {
    flag.or(cfg.seed).unwrap_or(0)
}

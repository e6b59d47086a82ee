use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use prequant_cli::{resolve_out, resolve_seed, run, Command, RunConfig, OUT_ENV};

#[derive(Parser, Debug)]
#[command(name = "prequant-lab", version, about = "Run prequantisation and moment-map checks from a TOML config")]
struct Args {
    #[arg(value_enum)]
    command: Command,
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; falls back to $PREQUANT_LAB_OUT, then ./prequant-out.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let cfg = match RunConfig::load(&args.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let seed = resolve_seed(args.seed, &cfg);
    let out = resolve_out(args.out, std::env::var(OUT_ENV).ok());
    let report = run(args.command, &cfg, seed, Some(&out));
    for s in &report.scenarios {
        for v in &s.verdicts {
            let status = if v.pass { "PASS" } else { "FAIL" };
            let value = v.value.map_or("n/a".to_string(), |x| format!("{x:e}"));
            println!("{status} {}/{}/{} value={value} threshold={:e}", s.kind, s.name, v.name, v.threshold);
        }
    }
    match report.write(&out) {
        Ok(files) => eprintln!("wrote {} files to {}", files.len(), out.display()),
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    ExitCode::from(report.exit_code() as u8)
}

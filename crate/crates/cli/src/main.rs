use std::f64::consts::PI;
use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use serde_json::json;

use rolldisc_cli::args::{parse_domain, resolve, Cli, Command};
use rolldisc_cli::output::fmt17;
use rolldisc_cli::{experiment, verify};
use rolldisc_core::analytics::densities::{DensityKind, DensityModel};
use rolldisc_core::analytics::tails::{matching_interpretations, tail_sweep};
use rolldisc_core::{Error, Result};

/// Writes to stdout, tolerating a closed pipe.
fn emit(text: &str) {
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(text.as_bytes()).and_then(|_| out.flush());
}

fn pretty(v: &serde_json::Value) -> String {
    serde_json::to_string_pretty(v).unwrap_or_default() + "\n"
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::InvalidArgument(_) => "invalid_argument",
        Error::Precondition(_) => "precondition",
        Error::Degenerate(_) => "degenerate",
        Error::RankDeficient { .. } => "rank_deficient",
        Error::ProjectionDiverged { .. } => "projection_diverged",
        Error::NotPositiveDefinite(_) => "not_positive_definite",
    }
}

fn density_table(points: usize, domain: &str) -> Result<()> {
    if points < 2 {
        return Err(Error::InvalidArgument("points must be at least 2".into()));
    }
    let domain = parse_domain(domain)?;
    let models = DensityKind::ALL
        .iter()
        .map(|&k| DensityModel::new(k, domain))
        .collect::<Result<Vec<_>>>()?;
    let names: Vec<&str> = DensityKind::ALL.iter().map(|k| k.name()).collect();
    let mut table = format!("omega,{}\n", names.join(","));
    for i in 0..points {
        let w = domain.lo + (domain.hi - domain.lo) * i as f64 / (points - 1) as f64;
        let row: Vec<String> = models.iter().map(|m| fmt17(m.pdf(w))).collect();
        table.push_str(&format!("{},{}\n", fmt17(w), row.join(",")));
    }
    emit(&table);
    Ok(())
}

fn tails(threshold: f64) -> Result<()> {
    if !(threshold > 0.0 && threshold < PI) {
        return Err(Error::InvalidArgument(format!(
            "threshold must lie in (0, pi), got {threshold}"
        )));
    }
    let rows = tail_sweep(threshold)?;
    let report = json!({
        "threshold": threshold,
        "rows": rows.iter().map(|r| json!({
            "density": r.kind.name(),
            "domain": r.domain.name(),
            "variable": r.variable.name(),
            "probability": r.probability,
            "reference": r.reference,
            "matches": r.matches,
        })).collect::<Vec<_>>(),
        "matching_interpretations": matching_interpretations(&rows),
    });
    emit(&pretty(&report));
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Simulate(args) => {
            let spec = resolve(&args)?;
            let report = experiment::run(&spec)?;
            emit(&pretty(&report));
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { suite } => {
            let suites = verify::parse_suites(&suite)?;
            let (report, pass) = verify::run(&suites)?;
            emit(&pretty(&report));
            Ok(if pass { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Command::DensityTable { points, domain } => {
            density_table(points, &domain)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::TailSweep { threshold } => {
            tails(threshold)?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            let body = json!({ "error": { "kind": error_kind(&e), "message": e.to_string() } });
            eprintln!("{body}");
            ExitCode::from(2)
        }
    }
}

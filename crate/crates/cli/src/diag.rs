use std::fs::File;
use std::path::PathBuf;

use bayescrisis::sampler::diagnose;
use bayescrisis::{DiagnosticsReport, PosteriorSamples};
use serde_json::{json, Value};

use crate::args::DiagnosticsArgs;
use crate::error::CliError;
use crate::report::{converged, diagnostics_json, OutDir};
use crate::Outcome;

/// Agreement required between stored and recomputed statistics.
pub const TOLERANCE: f64 = 1e-10;

pub fn run(args: &DiagnosticsArgs) -> Result<Outcome, CliError> {
    let file = File::open(&args.draws).map_err(|e| CliError::io(&args.draws, e))?;
    let samples = PosteriorSamples::read_csv(file).map_err(|e| CliError::Mismatch(format!("{}: {e}", args.draws.display())))?;
    let report = diagnose(&samples)?;

    let stored_path: Option<PathBuf> = args.report.clone().or_else(|| {
        let sibling = args.draws.with_file_name("diagnostics.json");
        sibling.exists().then_some(sibling)
    });
    let verified = match &stored_path {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::io(p, e))?;
            let stored: Value = serde_json::from_str(&text).map_err(|e| CliError::Mismatch(format!("{}: {e}", p.display())))?;
            compare(&report, &stored).map_err(|m| CliError::Mismatch(format!("{}: {m}", p.display())))?;
            true
        }
        None => false,
    };

    let mut v = diagnostics_json(&report, &[]);
    v["draws"] = json!(args.draws.display().to_string());
    v["verified_against"] = json!(stored_path.map(|p| p.display().to_string()));
    v["verified"] = json!(verified);
    println!("{}", serde_json::to_string(&v).expect("report serialises"));
    if let Some(dir) = &args.out {
        OutDir::create(dir)?.json("diagnostics.json", &v)?;
    }
    Ok(if converged(&report) {
        Outcome::Success
    } else {
        Outcome::NotConverged
    })
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= TOLERANCE * a.abs().max(1.0)
}

/// Checks a stored diagnostics JSON against a recomputed report.
pub fn compare(report: &DiagnosticsReport, stored: &Value) -> Result<(), String> {
    let field = |k: &str| stored.get(k).ok_or_else(|| format!("stored report has no '{k}' field"));
    for (k, want) in [("n_chains", report.n_chains), ("n_draws", report.n_draws)] {
        let got = field(k)?.as_u64().ok_or_else(|| format!("'{k}' is not an integer"))?;
        if got != want as u64 {
            return Err(format!("{k}: stored {got}, draw file has {want}"));
        }
    }
    let params = field("params")?.as_array().ok_or("'params' is not an array")?;
    if params.len() != report.params.len() {
        return Err(format!("stored report lists {} parameters, draw file has {}", params.len(), report.params.len()));
    }
    for (s, r) in params.iter().zip(&report.params) {
        let name = s.get("name").and_then(Value::as_str).ok_or("parameter entry without a name")?;
        if name != r.name {
            return Err(format!("parameter '{name}' in report, '{}' in draw file", r.name));
        }
        for (stat, ours) in [("rhat", r.rhat), ("ess", r.ess)] {
            let theirs = s.get(stat).ok_or_else(|| format!("{name}: missing {stat}"))?;
            let ok = match (ours.value(), theirs) {
                (None, Value::String(t)) => t == "degenerate_constant",
                (Some(a), Value::Number(n)) => n.as_f64().is_some_and(|b| close(a, b)),
                _ => false,
            };
            if !ok {
                return Err(format!("{name}: {stat} stored as {theirs}, recomputed {}", json!(ours)));
            }
        }
    }
    Ok(())
}

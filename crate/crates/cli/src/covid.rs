use std::fs::File;

use bayescrisis::analytics::{box_stats, estimate_peak, forecast};
use bayescrisis::ingest::load_case_csv;
use bayescrisis::models::logistic::PARAM_NAMES;
use bayescrisis::models::{LogisticData, LogisticPosterior};
use bayescrisis::sampler::{diagnose, sample};
use chrono::Duration;
use serde_json::json;

use crate::args::Format;
use crate::config::CovidConfig;
use crate::error::CliError;
use crate::report::{converged, diagnostics_json, OutDir};
use crate::svg;
use crate::Outcome;

pub fn run(cfg: &CovidConfig) -> Result<Outcome, CliError> {
    let file = File::open(&cfg.cases).map_err(|e| CliError::io(&cfg.cases, e))?;
    let parsed = load_case_csv(file, &cfg.region)?;
    let series = parsed.value;
    let mut warnings = parsed.warnings;

    let data = LogisticData::new(series.weeks(), series.cumulative.clone())?;
    let posterior = LogisticPosterior::new(data, &cfg.common.priors)?;
    let chain = &cfg.common.chain;
    let raw = sample(&posterior, &posterior.initial_point(), chain)?;
    warnings.extend(raw.warnings.iter().map(|w| format!("chain {}: {}", w.chain, w.message)));
    let samples = posterior.constrain(&raw)?;
    let report = diagnose(&samples)?;

    let last = *series.dates.last().expect("loader returns at least one date");
    let n_days = (last - series.date0).num_days() + i64::from(cfg.horizon_days);
    let horizon: Vec<_> = (0..=n_days).map(|i| series.date0 + Duration::days(i)).collect();
    let fc = forecast(&samples, series.date0, &horizon, cfg.band, chain.seed)?;
    let peak = estimate_peak(&samples, series.date0)?;
    let params = PARAM_NAMES
        .iter()
        .map(|p| box_stats(&samples, p))
        .collect::<Result<Vec<_>, _>>()?;

    let mut out = OutDir::create(&cfg.common.out)?;
    if cfg.common.wants(Format::Csv) {
        out.draws("draws.csv", &samples)?;
        let mut buf = Vec::new();
        fc.write_csv(&mut buf).map_err(|e| CliError::io(&cfg.common.out, e))?;
        out.bytes("forecast.csv", &buf)?;
    }
    if cfg.common.wants(Format::Json) {
        out.json("diagnostics.json", &diagnostics_json(&report, &warnings))?;
        out.json("params.json", &json!({ "region": series.region, "params": params }))?;
        out.json("forecast.json", &json!({ "region": series.region, "forecast": fc }))?;
        out.json("peak.json", &json!({ "region": series.region, "peak": peak }))?;
    }
    if cfg.common.wants(Format::Svg) {
        let title = format!("{}: cumulative cases", series.region);
        out.bytes("forecast.svg", svg::forecast_chart(&title, (&series.dates, &series.cumulative), &fc).as_bytes())?;
        let panels: Vec<svg::Panel> = params
            .iter()
            .map(|b| svg::Panel {
                title: b.label.clone(),
                boxes: vec![(b.label.as_str(), b)],
            })
            .collect();
        out.bytes("params.svg", svg::box_chart(&format!("{}: posterior parameters", series.region), &panels).as_bytes())?;
    }
    if cfg.common.wants(Format::Json) {
        let mut files = out.written().to_vec();
        files.push("run.json".into());
        out.json(
            "run.json",
            &json!({
                "command": "fit-covid",
                "version": env!("CARGO_PKG_VERSION"),
                "region": series.region,
                "date0": series.date0,
                "n_observations": series.dates.len(),
                "horizon_days": cfg.horizon_days,
                "band": cfg.band,
                "chain_config": chain,
                "priors": posterior.priors(),
                "warnings": warnings,
                "files": files,
            }),
        )?;
    }
    Ok(if converged(&report) {
        Outcome::Success
    } else {
        Outcome::NotConverged
    })
}

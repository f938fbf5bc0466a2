use std::collections::BTreeMap;
use std::fs::File;

use bayescrisis::analytics::{box_stats, rank_tickers, RankDirection, TickerWeights, WeightSummary};
use bayescrisis::ingest::{build_crisis_design, daily_returns, default_crisis_windows, load_price_csv, load_windows_csv, CrisisWindow};
use bayescrisis::models::CrisisPosterior;
use bayescrisis::sampler::{diagnose, sample};
use serde_json::json;

use crate::args::Format;
use crate::config::{CrisisConfig, WindowSource};
use crate::error::CliError;
use crate::report::{converged, diagnostics_json, OutDir};
use crate::svg;
use crate::Outcome;

const RESERVED: [&str; 3] = ["intercept", "sigma", "nu"];

fn windows(cfg: &CrisisConfig) -> Result<Vec<CrisisWindow>, CliError> {
    let w = match &cfg.windows {
        WindowSource::File(p) => load_windows_csv(File::open(p).map_err(|e| CliError::io(p, e))?)?,
        WindowSource::Inline(w) => w.clone(),
        WindowSource::Default => default_crisis_windows(),
    };
    if let Some(bad) = w.iter().find(|w| RESERVED.contains(&w.name.as_str())) {
        return Err(CliError::Usage(format!("crisis window name '{}' is reserved", bad.name)));
    }
    Ok(w)
}

pub fn run(cfg: &CrisisConfig) -> Result<Outcome, CliError> {
    let windows = windows(cfg)?;
    let mut tickers: Vec<(String, &std::path::Path)> = Vec::new();
    for p in &cfg.prices {
        let ticker = p
            .file_stem()
            .and_then(|s| s.to_str())
            .ok_or_else(|| CliError::Usage(format!("cannot derive a ticker from '{}'", p.display())))?
            .to_string();
        if tickers.iter().any(|(t, _)| *t == ticker) {
            return Err(CliError::Usage(format!("ticker '{ticker}' given twice")));
        }
        tickers.push((ticker, p));
    }

    let mut out = OutDir::create(&cfg.common.out)?;
    let mut summaries = Vec::new();
    let mut warnings = Vec::new();
    let mut all_converged = true;
    for (ticker, path) in &tickers {
        let parsed = load_price_csv(File::open(path).map_err(|e| CliError::io(path, e))?, ticker)?;
        let mut ticker_warnings: Vec<String> = parsed.warnings.iter().map(|w| format!("{ticker}: {w}")).collect();
        let returns = daily_returns(&parsed.value, cfg.returns)?;
        let design = build_crisis_design(&returns.dates, &windows)?;
        let identified = design.identified_windows();
        for (k, w) in windows.iter().enumerate() {
            if !identified.contains(&k) {
                ticker_warnings.push(format!("{ticker}: no return dates inside window '{}'; weight unidentified", w.name));
            }
        }
        let fit_design = design.restrict(&identified);
        let posterior = CrisisPosterior::new(&returns, &fit_design, &cfg.common.priors, cfg.likelihood)?;
        let ols = posterior.ols()?;
        let raw = sample(&posterior, &posterior.initial_point()?, &cfg.common.chain)?;
        ticker_warnings.extend(raw.warnings.iter().map(|w| format!("{ticker}: chain {}: {}", w.chain, w.message)));
        let samples = posterior.constrain(&raw)?;
        let report = diagnose(&samples)?;
        all_converged &= converged(&report);

        let mut weights = BTreeMap::new();
        for (k, w) in windows.iter().enumerate() {
            let summary = if identified.contains(&k) {
                WeightSummary::Identified(box_stats(&samples, &w.name)?)
            } else {
                WeightSummary::Unidentified
            };
            weights.insert(w.name.clone(), summary);
        }
        let mut other = BTreeMap::new();
        for name in samples.param_names() {
            if !windows.iter().any(|w| &w.name == name) {
                other.insert(name.clone(), box_stats(&samples, name)?);
            }
        }

        if cfg.common.wants(Format::Csv) {
            out.draws(&format!("{ticker}/draws.csv"), &samples)?;
        }
        if cfg.common.wants(Format::Json) {
            out.json(&format!("{ticker}/ols.json"), &json!({ "ticker": ticker, "ols": ols }))?;
            out.json(
                &format!("{ticker}/weights.json"),
                &json!({
                    "ticker": ticker,
                    "likelihood": cfg.likelihood,
                    "n_returns": returns.returns.len(),
                    "weights": weights,
                    "other_params": other,
                }),
            )?;
            out.json(&format!("{ticker}/diagnostics.json"), &diagnostics_json(&report, &ticker_warnings))?;
        }
        warnings.extend(ticker_warnings);
        summaries.push(TickerWeights {
            ticker: ticker.clone(),
            weights,
        });
    }

    let mut rankings = Vec::new();
    for w in &windows {
        rankings.push(json!({
            "crisis": w.name,
            "most_negative": rank_tickers(&summaries, &w.name, RankDirection::MostNegative, cfg.top_k)?,
            "most_positive": rank_tickers(&summaries, &w.name, RankDirection::MostPositive, cfg.top_k)?,
        }));
    }
    if cfg.common.wants(Format::Json) {
        out.json("rankings.json", &json!({ "top_k": cfg.top_k, "rankings": rankings }))?;
    }
    if cfg.common.wants(Format::Svg) {
        let panels: Vec<svg::Panel> = windows
            .iter()
            .map(|w| svg::Panel {
                title: w.name.clone(),
                boxes: summaries
                    .iter()
                    .filter_map(|s| match &s.weights[&w.name] {
                        WeightSummary::Identified(b) => Some((s.ticker.as_str(), b)),
                        WeightSummary::Unidentified => None,
                    })
                    .collect(),
            })
            .collect();
        out.bytes("weights.svg", svg::box_chart("Crisis weights by ticker", &panels).as_bytes())?;
    }
    if cfg.common.wants(Format::Json) {
        let mut files = out.written().to_vec();
        files.push("run.json".into());
        out.json(
            "run.json",
            &json!({
                "command": "fit-crisis",
                "version": env!("CARGO_PKG_VERSION"),
                "tickers": tickers.iter().map(|(t, _)| t).collect::<Vec<_>>(),
                "windows": windows,
                "likelihood": cfg.likelihood,
                "returns": cfg.returns,
                "top_k": cfg.top_k,
                "chain_config": cfg.common.chain,
                "prior_overrides": cfg.common.priors,
                "warnings": warnings,
                "files": files,
            }),
        )?;
    }
    Ok(if all_converged {
        Outcome::Success
    } else {
        Outcome::NotConverged
    })
}

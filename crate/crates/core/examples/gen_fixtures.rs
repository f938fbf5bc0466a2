//! Regenerates the committed synthetic fixtures under `fixtures/`.
//!
//! cargo run -p bayescrisis --example gen_fixtures [-- <out-dir>]

use std::fs::{self, File};
use std::path::PathBuf;

use bayescrisis::ingest::{default_crisis_windows, CrisisWindow};
use bayescrisis::models::LogisticParams;
use bayescrisis::synth::{logistic_cases, shifted_price_path, write_price_csv, write_wide_case_csv};
use chrono::NaiveDate;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures"));
    fs::create_dir_all(out.join("prices"))?;
    let d = |y, m, day| NaiveDate::from_ymd_opt(y, m, day).unwrap();

    // Two regions on a shared JHU-style date axis.
    let date0 = d(2020, 1, 22);
    let synth = logistic_cases(&LogisticParams::new(1.2, 0.8, 6.0, 200.0)?, date0, 60, 42);
    let other = logistic_cases(&LogisticParams::new(0.5, 1.1, 4.0, 100.0)?, date0, 60, 43);
    write_wide_case_csv(
        &synth.dates,
        &[("Synthland", &synth.counts[..]), ("Otherland", &other.counts[..])],
        File::create(out.join("cases_wide.csv"))?,
    )?;

    let corona = default_crisis_windows().pop().expect("three default windows");
    let start = d(2019, 6, 3);
    let tickers: [(&str, f64, u64); 3] = [("SYNA", -0.02, 7), ("SYNB", 0.01, 8), ("SYNC", 0.0, 9)];
    for (ticker, shift, seed) in tickers {
        let prices = shifted_price_path(ticker, start, 300, 0.01, shift, &corona, seed);
        write_price_csv(&prices, File::create(out.join("prices").join(format!("{ticker}.csv")))?)?;
    }
    // 2016 lies outside all three default windows.
    let never = CrisisWindow::new("none", d(2000, 1, 1), d(2000, 1, 2))?;
    let outside = shifted_price_path("OUTS", d(2016, 1, 4), 120, 0.01, 0.0, &never, 10);
    write_price_csv(&outside, File::create(out.join("prices").join("OUTS.csv"))?)?;

    fs::write(
        out.join("windows.csv"),
        "name,start,end\ncoronavirus,2020-02-18,2020-03-25\nrecovery,2020-04-01,2020-05-29\n",
    )?;
    println!("fixtures written to {}", out.display());
    Ok(())
}

//! Seeded synthetic data with known generating parameters.

use std::io::Write;

use chrono::{Datelike, Duration, NaiveDate, Weekday};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::ingest::{CrisisWindow, PriceSeries};
use crate::models::logistic::{logistic_mean, LogisticParams};
use crate::rng::seeded;

/// Cumulative counts from the logistic model observed once a day.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticCases {
    pub params: LogisticParams,
    pub date0: NaiveDate,
    pub dates: Vec<NaiveDate>,
    /// Weeks since `date0`.
    pub t: Vec<f64>,
    pub counts: Vec<f64>,
}

/// `n_days` daily observations `mu(t) + sigma z` with `t = day / 7`.
pub fn logistic_cases(params: &LogisticParams, date0: NaiveDate, n_days: usize, seed: u64) -> SyntheticCases {
    let mut rng = seeded(seed);
    let dates: Vec<NaiveDate> = (0..n_days as i64).map(|i| date0 + Duration::days(i)).collect();
    let t: Vec<f64> = (0..n_days).map(|i| i as f64 / 7.0).collect();
    let counts = t
        .iter()
        .map(|&ti| {
            let z: f64 = rng.sample(StandardNormal);
            logistic_mean(params, ti) + params.sigma * z
        })
        .collect();
    SyntheticCases {
        params: *params,
        date0,
        dates,
        t,
        counts,
    }
}

/// Writes series in the wide JHU layout, one row per region. Counts are
/// rounded to whole cases and floored at zero, as published counts would be.
pub fn write_wide_case_csv<W: Write>(
    dates: &[NaiveDate],
    regions: &[(&str, &[f64])],
    out: W,
) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["Province/State".to_string(), "Country/Region".into(), "Lat".into(), "Long".into()];
    header.extend(dates.iter().map(|d| format!("{}/{}/{:02}", d.month(), d.day(), d.year() % 100)));
    w.write_record(&header)?;
    for (name, counts) in regions {
        let mut rec = vec![String::new(), name.to_string(), "0".into(), "0".into()];
        rec.extend(counts.iter().map(|c| format!("{}", c.round().max(0.0) as i64)));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Mon-Fri dates starting at the first weekday on or after `start`.
pub fn weekdays(start: NaiveDate, n: usize) -> Vec<NaiveDate> {
    let mut out = Vec::with_capacity(n);
    let mut d = start;
    while out.len() < n {
        if !matches!(d.weekday(), Weekday::Sat | Weekday::Sun) {
            out.push(d);
        }
        d += Duration::days(1);
    }
    out
}

/// Price path over `n` weekdays whose simple returns are
/// `Normal(0, sd)` plus `shift` on dates inside `window`. The first date
/// carries the starting price 100 and has no return.
pub fn shifted_price_path(
    ticker: &str,
    start: NaiveDate,
    n: usize,
    sd: f64,
    shift: f64,
    window: &CrisisWindow,
    seed: u64,
) -> PriceSeries {
    let mut rng = seeded(seed);
    let dates = weekdays(start, n);
    let mut close = Vec::with_capacity(n);
    let mut p = 100.0;
    close.push(p);
    for d in &dates[1..] {
        let z: f64 = rng.sample(StandardNormal);
        let r = sd * z + if window.contains(*d) { shift } else { 0.0 };
        p *= 1.0 + r;
        close.push(p);
    }
    PriceSeries {
        ticker: ticker.to_string(),
        dates,
        close,
    }
}

/// Writes a `date,close` price CSV.
pub fn write_price_csv<W: Write>(prices: &PriceSeries, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["date", "close"])?;
    for (d, c) in prices.dates.iter().zip(&prices.close) {
        w.write_record([d.to_string(), c.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{daily_returns, load_case_csv, ReturnKind};

    fn d(y: i32, m: u32, day: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(y, m, day).unwrap()
    }

    #[test]
    fn cases_are_seeded() {
        let p = LogisticParams::new(1.2, 0.8, 6.0, 200.0).unwrap();
        let a = logistic_cases(&p, d(2020, 1, 22), 60, 42);
        assert_eq!(a, logistic_cases(&p, d(2020, 1, 22), 60, 42));
        assert_ne!(a.counts, logistic_cases(&p, d(2020, 1, 22), 60, 43).counts);
        assert_eq!(a.t[7], 1.0);
        let resid: Vec<f64> = a.t.iter().zip(&a.counts).map(|(&t, c)| c - logistic_mean(&p, t)).collect();
        let sd = (resid.iter().map(|r| r * r).sum::<f64>() / 60.0).sqrt();
        assert!((sd - 200.0).abs() < 60.0, "{sd}");
    }

    #[test]
    fn wide_csv_loads_back() {
        let dates = [d(2020, 1, 22), d(2020, 1, 23), d(2020, 1, 24)];
        let mut buf = Vec::new();
        write_wide_case_csv(&dates, &[("Synthland", &[10.2, 19.6, 31.0][..])], &mut buf).unwrap();
        let s = load_case_csv(buf.as_slice(), "Synthland").unwrap().value;
        assert_eq!(s.cumulative, vec![10.0, 20.0, 31.0]);
        assert_eq!(s.dates, dates);
    }

    #[test]
    fn weekdays_skip_weekends() {
        let w = weekdays(d(2020, 2, 15), 3);
        assert_eq!(w, vec![d(2020, 2, 17), d(2020, 2, 18), d(2020, 2, 19)]);
    }

    #[test]
    fn price_path_has_injected_shift() {
        let window = CrisisWindow::new("w", d(2020, 2, 18), d(2020, 3, 25)).unwrap();
        let p = shifted_price_path("S", d(2019, 6, 3), 300, 0.0, -0.02, &window, 7);
        let r = daily_returns(&p, ReturnKind::Simple).unwrap();
        for (date, ret) in r.dates.iter().zip(&r.returns) {
            let expected = if window.contains(*date) { -0.02 } else { 0.0 };
            assert!((ret - expected).abs() < 1e-12, "{date}: {ret}");
        }
    }
}

//! Posterior summaries: forecast bands, peak timing, box statistics and
//! cross-ticker rankings.
//!
//! All quantiles use linear interpolation between order statistics: for
//! sorted values `x_0 <= .. <= x_{n-1}` and level `p`, let `h = (n - 1) p`;
//! the quantile is `x_{floor h} + (h - floor h) (x_{floor h + 1} - x_{floor h})`.

use std::collections::BTreeMap;
use std::io::Write;

use chrono::{Duration, NaiveDate};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

use crate::ingest::to_weeks;
use crate::models::logistic::{logistic_mean, LogisticParams, CASE_SCALE, PARAM_NAMES};
use crate::rng::seeded;
use crate::sampler::PosteriorSamples;

/// Levels reported in every forecast band and quantile set.
pub const BAND_LEVELS: [f64; 5] = [0.05, 0.25, 0.5, 0.75, 0.95];

#[derive(Debug, Error, PartialEq)]
pub enum AnalyticsError {
    #[error("input error: {0}")]
    Input(String),
}

/// Quantile of already sorted values (see the module docs for the rule).
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of empty slice");
    let h = (sorted.len() - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let frac = h - lo as f64;
    if lo + 1 >= sorted.len() || frac == 0.0 {
        sorted[lo]
    } else {
        sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
    }
}

pub fn quantile(values: &[f64], p: f64) -> f64 {
    quantile_sorted(&sorted(values), p)
}

fn sorted(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Sample standard deviation (divisor `n - 1`; zero for a single value).
pub fn sample_std_dev(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let m = mean(values);
    let ss: f64 = values.iter().map(|v| (v - m) * (v - m)).sum();
    (ss / (values.len() - 1) as f64).sqrt()
}

/// The five [`BAND_LEVELS`] quantiles of a set of values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quantiles {
    pub q05: f64,
    pub q25: f64,
    pub q50: f64,
    pub q75: f64,
    pub q95: f64,
}

impl Quantiles {
    pub fn of(values: &[f64]) -> Self {
        let s = sorted(values);
        Self {
            q05: quantile_sorted(&s, 0.05),
            q25: quantile_sorted(&s, 0.25),
            q50: quantile_sorted(&s, 0.5),
            q75: quantile_sorted(&s, 0.75),
            q95: quantile_sorted(&s, 0.95),
        }
    }

    pub fn as_array(&self) -> [f64; 5] {
        [self.q05, self.q25, self.q50, self.q75, self.q95]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ForecastKind {
    /// Bands over the noise-free curve of each draw.
    #[default]
    MeanCurve,
    /// Bands over the curve plus `Normal(0, sigma)` observation noise.
    Predictive,
}

impl std::str::FromStr for ForecastKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "mean_curve" => Ok(ForecastKind::MeanCurve),
            "predictive" => Ok(ForecastKind::Predictive),
            other => Err(format!("unknown band kind '{other}' (expected mean_curve or predictive)")),
        }
    }
}

/// Forecast of cumulative cases at each horizon date.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastSummary {
    pub kind: ForecastKind,
    pub date0: NaiveDate,
    pub dates: Vec<NaiveDate>,
    pub weeks: Vec<f64>,
    pub mean: Vec<f64>,
    /// One entry per date.
    pub quantiles: Vec<Quantiles>,
}

impl ForecastSummary {
    pub fn median(&self) -> Vec<f64> {
        self.quantiles.iter().map(|q| q.q50).collect()
    }

    /// CSV with header `date,week,mean,q05,q25,q50,q75,q95`.
    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["date", "week", "mean", "q05", "q25", "q50", "q75", "q95"])?;
        for i in 0..self.dates.len() {
            let mut rec = vec![self.dates[i].to_string(), self.weeks[i].to_string(), self.mean[i].to_string()];
            rec.extend(self.quantiles[i].as_array().iter().map(f64::to_string));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn logistic_draws(samples: &PosteriorSamples) -> Result<Vec<LogisticParams>, AnalyticsError> {
    let idx = PARAM_NAMES
        .iter()
        .map(|n| {
            samples.param_index(n).ok_or_else(|| {
                AnalyticsError::Input(format!("samples have no parameter '{n}'"))
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut out = Vec::with_capacity(samples.n_chains() * samples.n_draws());
    for c in 0..samples.n_chains() {
        for d in 0..samples.n_draws() {
            let row = samples.draw(c, d);
            out.push(LogisticParams::from_slice(&idx.iter().map(|&i| row[i]).collect::<Vec<_>>()));
        }
    }
    Ok(out)
}

/// Per-date mean and [`BAND_LEVELS`] quantiles of cumulative cases over all
/// draws. `seed` drives the noise of [`ForecastKind::Predictive`] and is
/// ignored for mean curves.
pub fn forecast(
    samples: &PosteriorSamples,
    date0: NaiveDate,
    horizon: &[NaiveDate],
    kind: ForecastKind,
    seed: u64,
) -> Result<ForecastSummary, AnalyticsError> {
    if horizon.is_empty() {
        return Err(AnalyticsError::Input("forecast horizon is empty".into()));
    }
    let draws = logistic_draws(samples)?;
    let weeks = to_weeks(horizon, date0);
    let mut rng = seeded(seed);
    // values[date][draw]
    let mut values = vec![Vec::with_capacity(draws.len()); weeks.len()];
    for p in &draws {
        for (col, &t) in values.iter_mut().zip(&weeks) {
            let mu = logistic_mean(p, t);
            col.push(match kind {
                ForecastKind::MeanCurve => mu,
                ForecastKind::Predictive => {
                    let z: f64 = rng.sample(StandardNormal);
                    mu + p.sigma * z
                }
            });
        }
    }
    Ok(ForecastSummary {
        kind,
        date0,
        dates: horizon.to_vec(),
        weeks,
        mean: values.iter().map(|v| mean(v)).collect(),
        quantiles: values.iter().map(|v| Quantiles::of(v)).collect(),
    })
}

/// Time of the maximum of the daily-new-cases curve: exactly `t0`.
pub fn peak_time(p: &LogisticParams) -> f64 {
    p.t0
}

/// Height of the daily-new-cases curve at its maximum, in cases per week.
pub fn peak_height(p: &LogisticParams) -> f64 {
    p.alpha * CASE_SCALE * p.beta / 4.0
}

/// `date0 + round(7 t)` days.
pub fn week_to_date(date0: NaiveDate, t: f64) -> NaiveDate {
    date0 + Duration::days((7.0 * t).round() as i64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeakEstimate {
    pub date0: NaiveDate,
    pub median_date: NaiveDate,
    pub lower_date: NaiveDate,
    pub upper_date: NaiveDate,
    /// Peak time in weeks since `date0`.
    pub t0: Quantiles,
    /// New cases per week at the peak.
    pub peak_cases_per_week: Quantiles,
}

pub fn estimate_peak(samples: &PosteriorSamples, date0: NaiveDate) -> Result<PeakEstimate, AnalyticsError> {
    let draws = logistic_draws(samples)?;
    let times: Vec<f64> = draws.iter().map(peak_time).collect();
    let heights: Vec<f64> = draws.iter().map(peak_height).collect();
    let t0 = Quantiles::of(&times);
    Ok(PeakEstimate {
        date0,
        median_date: week_to_date(date0, t0.q50),
        lower_date: week_to_date(date0, t0.q05),
        upper_date: week_to_date(date0, t0.q95),
        t0,
        peak_cases_per_week: Quantiles::of(&heights),
    })
}

/// Box-plot statistics with Tukey whiskers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxStats {
    pub label: String,
    pub n: usize,
    pub mean: f64,
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    /// Smallest value at or above `q1 - 1.5 IQR`, capped at `q1`.
    pub whisker_low: f64,
    /// Largest value at or below `q3 + 1.5 IQR`, floored at `q3`.
    pub whisker_high: f64,
    pub std_dev: f64,
}

impl BoxStats {
    pub fn from_values(label: &str, values: &[f64]) -> Result<Self, AnalyticsError> {
        if values.is_empty() {
            return Err(AnalyticsError::Input(format!("no values for '{label}'")));
        }
        let s = sorted(values);
        let (q1, median, q3) = (quantile_sorted(&s, 0.25), quantile_sorted(&s, 0.5), quantile_sorted(&s, 0.75));
        let iqr = q3 - q1;
        let (lo_fence, hi_fence) = (q1 - 1.5 * iqr, q3 + 1.5 * iqr);
        let whisker_low = s.iter().copied().find(|&v| v >= lo_fence).unwrap_or(q1).min(q1);
        let whisker_high = s.iter().rev().copied().find(|&v| v <= hi_fence).unwrap_or(q3).max(q3);
        Ok(Self {
            label: label.to_string(),
            n: s.len(),
            mean: mean(&s),
            median,
            q1,
            q3,
            whisker_low,
            whisker_high,
            std_dev: sample_std_dev(values),
        })
    }
}

/// Box statistics of one parameter's pooled draws.
pub fn box_stats(samples: &PosteriorSamples, param: &str) -> Result<BoxStats, AnalyticsError> {
    let values = samples
        .pooled_by_name(param)
        .ok_or_else(|| AnalyticsError::Input(format!("samples have no parameter '{param}'")))?;
    BoxStats::from_values(param, &values)
}

/// Posterior summary of one crisis weight, or a marker that the data had no
/// rows inside the window.
#[derive(Debug, Clone, PartialEq)]
pub enum WeightSummary {
    Identified(BoxStats),
    Unidentified,
}

impl Serialize for WeightSummary {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            WeightSummary::Identified(b) => b.serialize(s),
            WeightSummary::Unidentified => s.serialize_str("unidentified"),
        }
    }
}

/// Crisis weight summaries for one ticker, keyed by window name.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TickerWeights {
    pub ticker: String,
    pub weights: BTreeMap<String, WeightSummary>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RankDirection {
    MostNegative,
    MostPositive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankEntry {
    pub ticker: String,
    pub median: f64,
}

/// Top `k` tickers by posterior median weight for `crisis`. Ties go to the
/// lexicographically smaller ticker. Tickers whose weight is unidentified
/// for that crisis are skipped.
pub fn rank_tickers(
    summaries: &[TickerWeights],
    crisis: &str,
    direction: RankDirection,
    k: usize,
) -> Result<Vec<RankEntry>, AnalyticsError> {
    if summaries.is_empty() {
        return Err(AnalyticsError::Input("no ticker summaries to rank".into()));
    }
    if k == 0 {
        return Err(AnalyticsError::Input("k must be positive".into()));
    }
    if !summaries.iter().any(|s| s.weights.contains_key(crisis)) {
        return Err(AnalyticsError::Input(format!("unknown crisis '{crisis}'")));
    }
    let mut entries: Vec<RankEntry> = summaries
        .iter()
        .filter_map(|s| match s.weights.get(crisis) {
            Some(WeightSummary::Identified(b)) => Some(RankEntry {
                ticker: s.ticker.clone(),
                median: b.median,
            }),
            _ => None,
        })
        .collect();
    entries.sort_by(|a, b| {
        let by_median = match direction {
            RankDirection::MostNegative => a.median.total_cmp(&b.median),
            RankDirection::MostPositive => b.median.total_cmp(&a.median),
        };
        by_median.then_with(|| a.ticker.cmp(&b.ticker))
    });
    entries.truncate(k);
    Ok(entries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::logistic::daily_new_cases;
    use proptest::prelude::*;
    use rand_distr::Distribution;

    fn d0() -> NaiveDate {
        NaiveDate::from_ymd_opt(2020, 1, 22).unwrap()
    }

    fn logistic_samples(rows: &[[f64; 4]]) -> PosteriorSamples {
        let flat = rows.iter().flatten().copied().collect();
        PosteriorSamples::new(PARAM_NAMES.iter().map(|s| s.to_string()).collect(), 1, rows.len(), flat).unwrap()
    }

    #[test]
    fn quantile_rule_examples() {
        let v = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(quantile(&v, 0.5), 3.0);
        assert_eq!(quantile(&v, 0.25), 2.0);
        assert_eq!(quantile(&v, 0.1), 1.4);
        assert_eq!(quantile(&[7.0], 0.3), 7.0);
        assert_eq!(quantile(&[0.0, 10.0], 0.05), 0.5);
    }

    #[test]
    fn point_mass_forecast() {
        let s = logistic_samples(&[[1.0, 1.0, 0.0, 1e-9]; 5]);
        let f = forecast(&s, d0(), &[d0()], ForecastKind::MeanCurve, 0).unwrap();
        assert_eq!(f.quantiles[0].as_array(), [50000.0; 5]);
        assert_eq!(f.mean[0], 50000.0);
    }

    #[test]
    fn two_draw_forecast() {
        // Curves are 50000 and 100000 at t = t0; h = 0.05 and 0.95 between them.
        let s = logistic_samples(&[[1.0, 1.0, 0.0, 1.0], [2.0, 1.0, 0.0, 1.0]]);
        let f = forecast(&s, d0(), &[d0()], ForecastKind::MeanCurve, 0).unwrap();
        assert_eq!(f.mean[0], 75000.0);
        assert_eq!(f.quantiles[0].q05, 52500.0);
        assert_eq!(f.quantiles[0].q95, 97500.0);
        assert!(f.quantiles[0].q05 > 50000.0 && f.quantiles[0].q95 < 100000.0);
    }

    #[test]
    fn forecast_requires_all_parameters() {
        let s = PosteriorSamples::new(vec!["alpha".into(), "beta".into()], 1, 1, vec![1.0, 1.0]).unwrap();
        assert!(matches!(
            forecast(&s, d0(), &[d0()], ForecastKind::MeanCurve, 0),
            Err(AnalyticsError::Input(m)) if m.contains("t0")
        ));
        let full = logistic_samples(&[[1.0, 1.0, 0.0, 1.0]]);
        assert!(forecast(&full, d0(), &[], ForecastKind::MeanCurve, 0).is_err());
    }

    #[test]
    fn predictive_is_seeded() {
        let s = logistic_samples(&[[1.0, 1.0, 2.0, 500.0], [1.1, 0.9, 2.5, 400.0]]);
        let horizon: Vec<NaiveDate> = (0..30).map(|i| d0() + Duration::days(i)).collect();
        let a = forecast(&s, d0(), &horizon, ForecastKind::Predictive, 9).unwrap();
        let b = forecast(&s, d0(), &horizon, ForecastKind::Predictive, 9).unwrap();
        let c = forecast(&s, d0(), &horizon, ForecastKind::Predictive, 10).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        let m = forecast(&s, d0(), &horizon, ForecastKind::MeanCurve, 9).unwrap();
        assert_ne!(a.mean, m.mean);
    }

    #[test]
    fn forecast_csv_layout() {
        let s = logistic_samples(&[[1.0, 1.0, 0.0, 1.0]]);
        let f = forecast(&s, d0(), &[d0(), d0() + Duration::days(7)], ForecastKind::MeanCurve, 0).unwrap();
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "date,week,mean,q05,q25,q50,q75,q95");
        assert_eq!(lines[1], "2020-01-22,0,50000,50000,50000,50000,50000,50000");
        assert!(lines[2].starts_with("2020-01-29,1,"));
    }

    #[test]
    fn peak_examples() {
        let s = logistic_samples(&[[1.0, 2.0, 10.0, 1.0]; 3]);
        let p = estimate_peak(&s, d0()).unwrap();
        assert_eq!(p.median_date, d0() + Duration::days(70));
        assert_eq!(p.lower_date, p.upper_date);
        assert_eq!(p.peak_cases_per_week.q50, 50000.0);

        let s = logistic_samples(&[[1.0, 1.0, 9.0, 1.0], [1.0, 1.0, 11.0, 1.0], [1.0, 1.0, 10.0, 1.0]]);
        let p = estimate_peak(&s, d0()).unwrap();
        assert_eq!(p.median_date, d0() + Duration::days(70));
        assert!(p.lower_date <= p.median_date && p.median_date <= p.upper_date);
    }

    #[test]
    fn peak_date_rounds_to_nearest_day() {
        assert_eq!(week_to_date(d0(), 1.0 / 7.0 * 2.4), d0() + Duration::days(2));
        assert_eq!(week_to_date(d0(), 1.0 / 7.0 * 2.6), d0() + Duration::days(3));
    }

    #[test]
    fn box_stats_examples() {
        let b = BoxStats::from_values("x", &[1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
        assert_eq!((b.median, b.q1, b.q3), (3.0, 2.0, 4.0));
        assert_eq!((b.whisker_low, b.whisker_high), (1.0, 5.0));

        let c = BoxStats::from_values("c", &[2.5; 7]).unwrap();
        assert_eq!(
            [c.median, c.q1, c.q3, c.whisker_low, c.whisker_high, c.mean],
            [2.5; 6]
        );
        assert_eq!(c.std_dev, 0.0);
    }

    #[test]
    fn whiskers_exclude_outliers() {
        let b = BoxStats::from_values("x", &[1.0, 2.0, 3.0, 4.0, 5.0, 100.0]).unwrap();
        assert_eq!(b.whisker_high, 5.0);
        assert_eq!(b.whisker_low, 1.0);
    }

    #[test]
    fn std_dev_of_standard_normal_draws() {
        let mut rng = seeded(3);
        let v: Vec<f64> = (0..10_000).map(|_| rand_distr::Normal::new(0.0, 1.0).unwrap().sample(&mut rng)).collect();
        let b = BoxStats::from_values("z", &v).unwrap();
        assert!((b.std_dev - 1.0).abs() < 0.03, "{}", b.std_dev);
    }

    #[test]
    fn box_stats_unknown_parameter() {
        let s = logistic_samples(&[[1.0, 1.0, 0.0, 1.0]]);
        assert!(box_stats(&s, "gamma").is_err());
        assert_eq!(box_stats(&s, "beta").unwrap().median, 1.0);
    }

    fn tw(ticker: &str, crisis: &str, median: f64) -> TickerWeights {
        let stats = BoxStats::from_values(crisis, &[median]).unwrap();
        TickerWeights {
            ticker: ticker.into(),
            weights: BTreeMap::from([(crisis.to_string(), WeightSummary::Identified(stats))]),
        }
    }

    fn names(r: &[RankEntry]) -> Vec<&str> {
        r.iter().map(|e| e.ticker.as_str()).collect()
    }

    #[test]
    fn ranking_examples() {
        let set = vec![tw("A", "c", -0.03), tw("B", "c", 0.01), tw("C", "c", -0.01)];
        assert_eq!(names(&rank_tickers(&set, "c", RankDirection::MostNegative, 2).unwrap()), ["A", "C"]);
        assert_eq!(names(&rank_tickers(&set, "c", RankDirection::MostPositive, 1).unwrap()), ["B"]);
        let tie = vec![tw("Y", "c", 0.02), tw("X", "c", 0.02)];
        assert_eq!(names(&rank_tickers(&tie, "c", RankDirection::MostPositive, 2).unwrap()), ["X", "Y"]);
        assert!(rank_tickers(&set, "nope", RankDirection::MostPositive, 1).is_err());
        assert!(rank_tickers(&[], "c", RankDirection::MostPositive, 1).is_err());
    }

    #[test]
    fn unidentified_weights_are_skipped_and_serialize_as_marker() {
        let mut u = tw("U", "c", 0.0);
        u.weights.insert("c".into(), WeightSummary::Unidentified);
        let set = vec![u, tw("A", "c", 0.5)];
        assert_eq!(names(&rank_tickers(&set, "c", RankDirection::MostPositive, 5).unwrap()), ["A"]);
        assert_eq!(serde_json::to_string(&set[0].weights["c"]).unwrap(), "\"unidentified\"");
        let identified = serde_json::to_value(&set[1].weights["c"]).unwrap();
        assert_eq!(identified["median"], 0.5);
    }

    proptest! {
        #[test]
        fn band_quantiles_are_ordered(rows in prop::collection::vec(
            (0.1f64..5.0, 0.05f64..3.0, -5.0f64..20.0, 1.0f64..1e4), 1..30),
            days in prop::collection::vec(0i64..200, 1..10),
            predictive in any::<bool>(), seed in any::<u64>()) {
            let rows: Vec<[f64; 4]> = rows.into_iter().map(|(a, b, t, s)| [a, b, t, s]).collect();
            let s = logistic_samples(&rows);
            let horizon: Vec<NaiveDate> = days.iter().map(|&d| d0() + Duration::days(d)).collect();
            let kind = if predictive { ForecastKind::Predictive } else { ForecastKind::MeanCurve };
            let f = forecast(&s, d0(), &horizon, kind, seed).unwrap();
            for q in &f.quantiles {
                let a = q.as_array();
                prop_assert!(a.windows(2).all(|w| w[0] <= w[1]), "{:?}", a);
            }
        }

        #[test]
        fn mean_curve_is_arithmetic_mean(rows in prop::collection::vec(
            (0.1f64..5.0, 0.05f64..3.0, -5.0f64..20.0, 1.0f64..1e4), 1..40), day in 0i64..200) {
            let rows: Vec<[f64; 4]> = rows.into_iter().map(|(a, b, t, s)| [a, b, t, s]).collect();
            let s = logistic_samples(&rows);
            let date = d0() + Duration::days(day);
            let f = forecast(&s, d0(), &[date], ForecastKind::MeanCurve, 0).unwrap();
            let t = day as f64 / 7.0;
            let expected = rows.iter().map(|r| logistic_mean(&LogisticParams::from_slice(r), t)).sum::<f64>() / rows.len() as f64;
            prop_assert!((f.mean[0] - expected).abs() <= 1e-12 * expected.abs().max(f64::MIN_POSITIVE));
        }

        #[test]
        fn median_band_is_non_decreasing(rows in prop::collection::vec(
            (0.1f64..5.0, 0.05f64..3.0, -5.0f64..20.0), 1..30)) {
            let rows: Vec<[f64; 4]> = rows.into_iter().map(|(a, b, t)| [a, b, t, 1.0]).collect();
            let s = logistic_samples(&rows);
            let horizon: Vec<NaiveDate> = (0..120).map(|d| d0() + Duration::days(d)).collect();
            let med = forecast(&s, d0(), &horizon, ForecastKind::MeanCurve, 0).unwrap().median();
            prop_assert!(med.windows(2).all(|w| w[0] <= w[1]));
        }

        #[test]
        fn peak_is_grid_argmax(alpha in 0.01f64..10.0, beta in 0.05f64..5.0, t0 in -10.0f64..30.0) {
            let p = LogisticParams { alpha, beta, t0, sigma: 1.0 };
            let at_peak = daily_new_cases(&p, peak_time(&p));
            for i in 0..=2000 {
                let t = t0 - 10.0 + i as f64 * 0.01;
                prop_assert!(daily_new_cases(&p, t) <= at_peak);
            }
            prop_assert!((at_peak - peak_height(&p)).abs() <= 1e-12 * at_peak);
        }

        #[test]
        fn box_stats_shift_exactly_on_dyadic_data(vals in prop::collection::vec(-4096i32..4096, 1..200), c in -1000i32..1000) {
            // Sixteenths of small integers keep every sum and interpolation exact.
            let x: Vec<f64> = vals.iter().map(|&v| v as f64 / 16.0).collect();
            let c = c as f64;
            let y: Vec<f64> = x.iter().map(|v| v + c).collect();
            let (a, b) = (BoxStats::from_values("x", &x).unwrap(), BoxStats::from_values("x", &y).unwrap());
            prop_assert_eq!(b.median, a.median + c);
            prop_assert_eq!(b.q1, a.q1 + c);
            prop_assert_eq!(b.q3, a.q3 + c);
            prop_assert_eq!(b.whisker_low, a.whisker_low + c);
            prop_assert_eq!(b.whisker_high, a.whisker_high + c);
            prop_assert!((b.std_dev - a.std_dev).abs() <= 1e-12 * a.std_dev.max(1.0));
        }

        #[test]
        fn box_stats_shift_general(x in prop::collection::vec(-10.0f64..10.0, 2..200), c in -100.0f64..100.0) {
            let y: Vec<f64> = x.iter().map(|v| v + c).collect();
            let (a, b) = (BoxStats::from_values("x", &x).unwrap(), BoxStats::from_values("x", &y).unwrap());
            let tol = 1e-12 * (c.abs() + 10.0);
            for (u, v) in [(a.median, b.median), (a.q1, b.q1), (a.q3, b.q3), (a.mean, b.mean)] {
                prop_assert!((v - u - c).abs() <= 4.0 * tol);
            }
            prop_assert!((b.std_dev - a.std_dev).abs() <= 1e-12 * a.std_dev.max(1.0));
            prop_assert!(a.whisker_low <= a.q1 && a.q1 <= a.median && a.median <= a.q3 && a.q3 <= a.whisker_high);
        }

        #[test]
        fn ranking_ignores_input_order(meds in prop::collection::vec(-5i32..5, 1..12), k in 1usize..6, seed in any::<u64>()) {
            let set: Vec<TickerWeights> = meds.iter().enumerate()
                .map(|(i, &m)| tw(&format!("T{i:02}"), "c", m as f64 / 100.0)).collect();
            let mut shuffled = set.clone();
            use rand::seq::SliceRandom;
            shuffled.shuffle(&mut seeded(seed));
            for dir in [RankDirection::MostNegative, RankDirection::MostPositive] {
                prop_assert_eq!(rank_tickers(&set, "c", dir, k).unwrap(), rank_tickers(&shuffled, "c", dir, k).unwrap());
            }
        }
    }
}

use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::dates::parse_date;
use super::{IngestError, Parsed, PriceSeries, ReturnSeries};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ReturnKind {
    /// `(p_i - p_{i-1}) / p_{i-1}`
    #[default]
    Simple,
    /// `ln(p_i / p_{i-1})`
    Log,
}

impl std::str::FromStr for ReturnKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "simple" => Ok(ReturnKind::Simple),
            "log" => Ok(ReturnKind::Log),
            other => Err(format!("unknown return kind '{other}' (expected simple or log)")),
        }
    }
}

/// Loads a `date,close` CSV (column names matched case-insensitively, other
/// columns ignored). Output is sorted by date; for duplicated dates the last
/// row wins. Rows with a non-positive price are dropped. Both cases produce
/// a warning.
pub fn load_price_csv<R: Read>(source: R, ticker: &str) -> Result<Parsed<PriceSeries>, IngestError> {
    let mut reader = csv::Reader::from_reader(source);
    let header = reader.headers()?.clone();
    let col = |name: &str| {
        header
            .iter()
            .position(|h| h.trim().eq_ignore_ascii_case(name))
            .ok_or_else(|| IngestError::Input(format!("price file has no '{name}' column")))
    };
    let (date_col, close_col) = (col("date")?, col("close")?);

    let mut by_date = BTreeMap::new();
    let mut warnings = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| IngestError::Parse {
            line,
            message: e.to_string(),
        })?;
        let raw_date = rec.get(date_col).unwrap_or("");
        let date = parse_date(raw_date).ok_or_else(|| IngestError::Parse {
            line,
            message: format!("invalid date '{raw_date}'"),
        })?;
        let raw_close = rec.get(close_col).unwrap_or("").trim();
        let close: f64 = raw_close.parse().map_err(|_| IngestError::Parse {
            line,
            message: format!("invalid close price '{raw_close}'"),
        })?;
        if !(close > 0.0) || !close.is_finite() {
            warnings.push(format!("line {line}: non-positive price {close} on {date}; row dropped"));
            continue;
        }
        if let Some(prev) = by_date.insert(date, close) {
            warnings.push(format!(
                "line {line}: duplicate date {date}; {close} replaces {prev}"
            ));
        }
    }
    let (dates, close) = by_date.into_iter().unzip();
    Ok(Parsed {
        value: PriceSeries {
            ticker: ticker.to_string(),
            dates,
            close,
        },
        warnings,
    })
}

/// Close-to-close returns between consecutive available prices, dated at
/// the later price. Calendar gaps are not interpolated.
pub fn daily_returns(prices: &PriceSeries, kind: ReturnKind) -> Result<ReturnSeries, IngestError> {
    if prices.close.len() < 2 {
        return Err(IngestError::Input(format!(
            "need at least 2 prices to compute returns, got {}",
            prices.close.len()
        )));
    }
    let returns = prices
        .close
        .windows(2)
        .map(|w| match kind {
            ReturnKind::Simple => (w[1] - w[0]) / w[0],
            ReturnKind::Log => (w[1] / w[0]).ln(),
        })
        .collect();
    Ok(ReturnSeries {
        ticker: prices.ticker.clone(),
        dates: prices.dates[1..].to_vec(),
        returns,
    })
}

/// Canonical long form `date,value` for prices.
pub fn write_price_long_csv<W: Write>(series: &PriceSeries, out: W) -> Result<(), IngestError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["date", "value"])?;
    for (d, v) in series.dates.iter().zip(&series.close) {
        w.write_record([d.to_string(), v.to_string()])?;
    }
    w.flush().map_err(|e| IngestError::Csv(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::NaiveDate;
    use proptest::prelude::*;

    fn series(close: Vec<f64>) -> PriceSeries {
        let d0 = NaiveDate::from_ymd_opt(2020, 1, 2).unwrap();
        PriceSeries {
            ticker: "T".into(),
            dates: (0..close.len() as i64).map(|i| d0 + chrono::Duration::days(i)).collect(),
            close,
        }
    }

    #[test]
    fn two_rows_load() {
        let p = load_price_csv("date,close\n2020-01-02,100\n2020-01-03,110\n".as_bytes(), "T").unwrap();
        assert_eq!(p.value.close, vec![100.0, 110.0]);
        assert!(p.warnings.is_empty());
    }

    #[test]
    fn duplicate_date_last_wins() {
        let p = load_price_csv("Date,Open,Close\n2020-01-02,1,100\n2020-01-02,1,101\n".as_bytes(), "T").unwrap();
        assert_eq!(p.value.close, vec![101.0]);
        assert_eq!(p.warnings.len(), 1);
    }

    #[test]
    fn rows_are_sorted() {
        let p = load_price_csv("date,close\n2020-01-05,3\n2020-01-02,1\n2020-01-03,2\n".as_bytes(), "T").unwrap();
        assert_eq!(p.value.close, vec![1.0, 2.0, 3.0]);
        assert!(p.value.dates.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn non_positive_price_is_dropped_with_warning() {
        let p = load_price_csv("date,close\n2020-01-02,0\n2020-01-03,5\n".as_bytes(), "T").unwrap();
        assert_eq!(p.value.close, vec![5.0]);
        assert_eq!(p.warnings.len(), 1);
    }

    #[test]
    fn bad_date_reports_line() {
        let err = load_price_csv("date,close\n2020-01-02,1\nyesterday,2\n".as_bytes(), "T").unwrap_err();
        assert!(matches!(err, IngestError::Parse { line: 3, .. }), "{err:?}");
    }

    #[test]
    fn simple_returns() {
        assert_eq!(daily_returns(&series(vec![100.0, 110.0]), ReturnKind::Simple).unwrap().returns, vec![0.1]);
        assert_eq!(daily_returns(&series(vec![50.0, 50.0, 50.0]), ReturnKind::Simple).unwrap().returns, vec![0.0, 0.0]);
        assert_eq!(daily_returns(&series(vec![100.0, 90.0]), ReturnKind::Simple).unwrap().returns, vec![-0.1]);
        let r = daily_returns(&series(vec![100.0, 110.0]), ReturnKind::Simple).unwrap();
        assert_eq!(r.dates, vec![NaiveDate::from_ymd_opt(2020, 1, 3).unwrap()]);
    }

    #[test]
    fn log_returns() {
        let r = daily_returns(&series(vec![100.0, 110.0]), ReturnKind::Log).unwrap();
        assert!((r.returns[0] - 1.1f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn single_price_is_an_error() {
        assert!(daily_returns(&series(vec![100.0]), ReturnKind::Simple).is_err());
    }

    proptest! {
        #[test]
        fn compounding_returns_recovers_last_price(prices in prop::collection::vec(1.0f64..1000.0, 2..200)) {
            let r = daily_returns(&series(prices.clone()), ReturnKind::Simple).unwrap();
            let rebuilt = r.returns.iter().fold(prices[0], |p, ri| p * (1.0 + ri));
            let last = *prices.last().unwrap();
            prop_assert!((rebuilt - last).abs() <= 1e-10 * last);
            prop_assert_eq!(r.returns.len(), prices.len() - 1);
        }
    }
}

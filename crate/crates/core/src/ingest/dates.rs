use chrono::NaiveDate;

use super::IngestError;

/// Parses ISO `YYYY-MM-DD` or the JHU header form `M/D/YY`.
pub fn parse_date(s: &str) -> Option<NaiveDate> {
    let s = s.trim();
    if s.contains('-') {
        return NaiveDate::parse_from_str(s, "%Y-%m-%d").ok();
    }
    let mut parts = s.split('/');
    let (m, d, y) = (parts.next()?, parts.next()?, parts.next()?);
    if parts.next().is_some() || y.len() != 2 {
        return None;
    }
    let all_digits = |p: &str| !p.is_empty() && p.len() <= 2 && p.bytes().all(|b| b.is_ascii_digit());
    if !(all_digits(m) && all_digits(d) && all_digits(y)) {
        return None;
    }
    NaiveDate::from_ymd_opt(2000 + y.parse::<i32>().ok()?, m.parse().ok()?, d.parse().ok()?)
}

/// Weeks elapsed since `date0` for each date; errors on dates before
/// `date0`.
pub fn to_week_axis(dates: &[NaiveDate], date0: NaiveDate) -> Result<Vec<f64>, IngestError> {
    if let Some(bad) = dates.iter().find(|d| **d < date0) {
        return Err(IngestError::Input(format!(
            "date {bad} precedes the start date {date0}"
        )));
    }
    Ok(to_weeks(dates, date0))
}

/// Week offsets without the ordering check; dates before `date0` map to
/// negative weeks.
pub fn to_weeks(dates: &[NaiveDate], date0: NaiveDate) -> Vec<f64> {
    dates
        .iter()
        .map(|d| (*d - date0).num_days() as f64 / 7.0)
        .collect()
}

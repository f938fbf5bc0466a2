use std::io::Read;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::dates::parse_date;
use super::{CrisisDesign, IngestError};

/// A named calendar interval; both endpoints are inside the window.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrisisWindow {
    pub name: String,
    pub start: NaiveDate,
    pub end: NaiveDate,
}

impl CrisisWindow {
    pub fn new(name: &str, start: NaiveDate, end: NaiveDate) -> Result<Self, IngestError> {
        if name.trim().is_empty() {
            return Err(IngestError::Input("crisis window needs a name".into()));
        }
        if end < start {
            return Err(IngestError::Input(format!(
                "crisis window '{name}' ends ({end}) before it starts ({start})"
            )));
        }
        Ok(Self {
            name: name.to_string(),
            start,
            end,
        })
    }

    pub fn contains(&self, d: NaiveDate) -> bool {
        self.start <= d && d <= self.end
    }

    fn overlaps(&self, other: &CrisisWindow) -> bool {
        self.start <= other.end && other.start <= self.end
    }
}

pub fn default_crisis_windows() -> Vec<CrisisWindow> {
    let d = |y, m, day| NaiveDate::from_ymd_opt(y, m, day).unwrap();
    vec![
        CrisisWindow::new("crisis_2008", d(2008, 1, 1), d(2009, 1, 31)).unwrap(),
        CrisisWindow::new("down_turn_2018", d(2018, 10, 1), d(2019, 1, 3)).unwrap(),
        CrisisWindow::new("coronavirus", d(2020, 2, 18), d(2020, 3, 25)).unwrap(),
    ]
}

/// Reads `name,start,end` rows (header required).
pub fn load_windows_csv<R: Read>(source: R) -> Result<Vec<CrisisWindow>, IngestError> {
    let mut reader = csv::Reader::from_reader(source);
    let mut out = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| IngestError::Parse {
            line,
            message: e.to_string(),
        })?;
        if rec.len() != 3 {
            return Err(IngestError::Parse {
                line,
                message: format!("expected 3 fields (name,start,end), found {}", rec.len()),
            });
        }
        let date = |s: &str| {
            parse_date(s).ok_or_else(|| IngestError::Parse {
                line,
                message: format!("invalid date '{s}'"),
            })
        };
        out.push(CrisisWindow::new(rec[0].trim(), date(&rec[1])?, date(&rec[2])?)?);
    }
    if out.is_empty() {
        return Err(IngestError::Input("window file has no rows".into()));
    }
    Ok(out)
}

/// One row `[1, I_1, .., I_K]` per date. Windows must be pairwise disjoint.
pub fn build_crisis_design(dates: &[NaiveDate], windows: &[CrisisWindow]) -> Result<CrisisDesign, IngestError> {
    for (i, a) in windows.iter().enumerate() {
        for b in &windows[i + 1..] {
            if a.name == b.name {
                return Err(IngestError::Input(format!("duplicate crisis window name '{}'", a.name)));
            }
            if a.overlaps(b) {
                return Err(IngestError::OverlappingWindows {
                    first: a.name.clone(),
                    second: b.name.clone(),
                });
            }
        }
    }
    let rows = dates
        .iter()
        .map(|&d| {
            let mut row = Vec::with_capacity(windows.len() + 1);
            row.push(1.0);
            row.extend(windows.iter().map(|w| if w.contains(d) { 1.0 } else { 0.0 }));
            row
        })
        .collect();
    Ok(CrisisDesign {
        dates: dates.to_vec(),
        window_names: windows.iter().map(|w| w.name.clone()).collect(),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn d(y: i32, m: u32, day: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(y, m, day).unwrap()
    }

    #[test]
    fn default_windows_rows() {
        let w = default_crisis_windows();
        let design = build_crisis_design(&[d(2008, 6, 15), d(2015, 5, 1), d(2020, 2, 18), d(2020, 2, 17)], &w).unwrap();
        assert_eq!(design.rows[0], vec![1.0, 1.0, 0.0, 0.0]);
        assert_eq!(design.rows[1], vec![1.0, 0.0, 0.0, 0.0]);
        assert_eq!(design.rows[2], vec![1.0, 0.0, 0.0, 1.0]);
        assert_eq!(design.rows[3], vec![1.0, 0.0, 0.0, 0.0]);
        assert_eq!(design.column_names(), ["intercept", "crisis_2008", "down_turn_2018", "coronavirus"]);
    }

    #[test]
    fn endpoints_are_inclusive() {
        let w = default_crisis_windows();
        let design = build_crisis_design(&[d(2020, 3, 25), d(2020, 3, 26), d(2008, 1, 1), d(2009, 1, 31)], &w).unwrap();
        assert_eq!(design.rows[0][3], 1.0);
        assert_eq!(design.rows[1][3], 0.0);
        assert_eq!(design.rows[2][1], 1.0);
        assert_eq!(design.rows[3][1], 1.0);
    }

    #[test]
    fn overlapping_windows_are_named() {
        let w = vec![
            CrisisWindow::new("a", d(2020, 1, 1), d(2020, 2, 1)).unwrap(),
            CrisisWindow::new("b", d(2020, 2, 1), d(2020, 3, 1)).unwrap(),
        ];
        assert_eq!(
            build_crisis_design(&[d(2020, 1, 5)], &w).unwrap_err(),
            IngestError::OverlappingWindows {
                first: "a".into(),
                second: "b".into()
            }
        );
    }

    #[test]
    fn reversed_window_is_rejected() {
        assert!(CrisisWindow::new("x", d(2020, 2, 1), d(2020, 1, 1)).is_err());
    }

    #[test]
    fn windows_csv_loads() {
        let w = load_windows_csv("name,start,end\nshock,2020-02-18,2020-03-25\nlate,2021-01-01,2021-01-31\n".as_bytes()).unwrap();
        assert_eq!(w.len(), 2);
        assert_eq!(w[0], CrisisWindow::new("shock", d(2020, 2, 18), d(2020, 3, 25)).unwrap());
        assert!(matches!(
            load_windows_csv("name,start,end\nx,2020-13-01,2020-01-02\n".as_bytes()),
            Err(IngestError::Parse { line: 2, .. })
        ));
    }

    proptest! {
        #[test]
        fn indicator_counts_match_day_arithmetic(start in 0i64..400, len in 1i64..300, n in 1i64..600) {
            let base = d(2019, 1, 1);
            let w = CrisisWindow::new("w", base + chrono::Duration::days(start), base + chrono::Duration::days(start + len - 1)).unwrap();
            let dates: Vec<NaiveDate> = (0..n).map(|i| base + chrono::Duration::days(i)).collect();
            let design = build_crisis_design(&dates, &[w]).unwrap();
            let expected = (n.min(start + len) - start).max(0) as usize;
            prop_assert_eq!(design.window_count(0), expected);
        }
    }
}

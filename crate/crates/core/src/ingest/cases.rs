use std::collections::BTreeSet;
use std::io::{Read, Write};

use chrono::NaiveDate;

use super::dates::parse_date;
use super::{CaseSeries, IngestError, Parsed};

const REGION_HEADERS: [&str; 2] = ["Country/Region", "Country_Region"];
const PROVINCE_HEADERS: [&str; 2] = ["Province/State", "Province_State"];

/// Loads one region from a wide JHU-style CSV.
///
/// All rows whose country column equals `region` are summed date by date
/// (falling back to the province column when no country matches). Leading
/// all-zero dates are dropped and `date0` is the first retained date.
/// Decreases in the cumulative series are clamped to the running maximum,
/// one warning per affected date.
pub fn load_case_csv<R: Read>(source: R, region: &str) -> Result<Parsed<CaseSeries>, IngestError> {
    let mut reader = csv::ReaderBuilder::new().flexible(true).from_reader(source);
    let header = reader.headers()?.clone();

    let first_date = header
        .iter()
        .position(|h| parse_date(h).is_some())
        .ok_or_else(|| IngestError::Input("no date columns in case file header".into()))?;
    let mut dates = Vec::with_capacity(header.len() - first_date);
    for (column, h) in header.iter().enumerate().skip(first_date) {
        let d = parse_date(h).ok_or_else(|| IngestError::DateHeader {
            column,
            header: h.to_string(),
        })?;
        if dates.last().is_some_and(|prev| *prev >= d) {
            return Err(IngestError::DateHeader {
                column,
                header: format!("{h} (dates must be strictly increasing)"),
            });
        }
        dates.push(d);
    }

    let find = |names: &[&str]| header.iter().position(|h| names.contains(&h.trim()));
    let country_col = find(&REGION_HEADERS).unwrap_or(if first_date >= 2 { 1 } else { 0 });
    let province_col = find(&PROVINCE_HEADERS);

    let mut by_country = vec![0.0; dates.len()];
    let mut by_province = vec![0.0; dates.len()];
    let (mut country_hits, mut province_hits) = (0, 0);
    let mut known = BTreeSet::new();
    for (i, rec) in reader.records().enumerate() {
        let line = i + 2;
        let rec = rec?;
        if rec.len() != header.len() {
            return Err(IngestError::Parse {
                line,
                message: format!("expected {} fields, found {}", header.len(), rec.len()),
            });
        }
        let country = rec[country_col].trim();
        let province = province_col.map(|c| rec[c].trim()).unwrap_or("");
        known.insert(country.to_string());
        let (target, hits) = if country == region {
            (&mut by_country, &mut country_hits)
        } else if !province.is_empty() && province == region {
            (&mut by_province, &mut province_hits)
        } else {
            continue;
        };
        *hits += 1;
        for (j, field) in rec.iter().skip(first_date).enumerate() {
            let v: f64 = field.trim().parse().map_err(|_| IngestError::Parse {
                line,
                message: format!("invalid count '{field}' in column {}", first_date + j),
            })?;
            if !(v >= 0.0) || !v.is_finite() {
                return Err(IngestError::Parse {
                    line,
                    message: format!("negative or non-finite count {v} in column {}", first_date + j),
                });
            }
            target[j] += v;
        }
    }

    let totals = if country_hits > 0 {
        by_country
    } else if province_hits > 0 {
        by_province
    } else {
        return Err(IngestError::RegionNotFound {
            region: region.to_string(),
            near: near_matches(region, &known),
        });
    };

    let start = totals
        .iter()
        .position(|&v| v > 0.0)
        .ok_or_else(|| IngestError::Input(format!("region '{region}' has no non-zero counts")))?;
    let dates = dates[start..].to_vec();
    let (cumulative, warnings) = clamp_to_running_max(&dates, &totals[start..]);

    Ok(Parsed {
        value: CaseSeries {
            region: region.to_string(),
            date0: dates[0],
            dates,
            cumulative,
        },
        warnings,
    })
}

fn clamp_to_running_max(dates: &[NaiveDate], values: &[f64]) -> (Vec<f64>, Vec<String>) {
    let mut out = Vec::with_capacity(values.len());
    let mut warnings = Vec::new();
    let mut running = f64::NEG_INFINITY;
    for (d, &v) in dates.iter().zip(values) {
        if v < running {
            warnings.push(format!(
                "{d}: cumulative count fell from {running} to {v}; clamped to {running}"
            ));
            out.push(running);
        } else {
            running = v;
            out.push(v);
        }
    }
    (out, warnings)
}

fn near_matches(region: &str, known: &BTreeSet<String>) -> Vec<String> {
    let lower = region.to_lowercase();
    let mut scored: Vec<(usize, &String)> = known
        .iter()
        .filter_map(|k| {
            let kl = k.to_lowercase();
            let dist = strsim::levenshtein(&lower, &kl);
            let close = dist <= 3 || (!lower.is_empty() && (kl.contains(&lower) || lower.contains(&kl)));
            close.then_some((dist, k))
        })
        .collect();
    scored.sort();
    scored.into_iter().take(5).map(|(_, k)| k.clone()).collect()
}

/// Writes the canonical long form: header `date,value`, one row per date.
pub fn write_case_long_csv<W: Write>(series: &CaseSeries, out: W) -> Result<(), IngestError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["date", "value"])?;
    for (d, v) in series.dates.iter().zip(&series.cumulative) {
        w.write_record([d.to_string(), v.to_string()])?;
    }
    w.flush().map_err(|e| IngestError::Csv(e.to_string()))
}

/// Reads the canonical long form back; `date0` is the first row's date.
pub fn read_case_long_csv<R: Read>(source: R, region: &str) -> Result<CaseSeries, IngestError> {
    let mut r = csv::Reader::from_reader(source);
    let mut dates = Vec::new();
    let mut cumulative = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let line = i + 2;
        let rec = rec?;
        let parse_err = |message: String| IngestError::Parse { line, message };
        let d = parse_date(rec.get(0).unwrap_or(""))
            .ok_or_else(|| parse_err(format!("invalid date '{}'", rec.get(0).unwrap_or(""))))?;
        let v: f64 = rec
            .get(1)
            .unwrap_or("")
            .parse()
            .map_err(|_| parse_err(format!("invalid value '{}'", rec.get(1).unwrap_or(""))))?;
        if dates.last().is_some_and(|p| *p >= d) {
            return Err(parse_err("dates must be strictly increasing".into()));
        }
        dates.push(d);
        cumulative.push(v);
    }
    let date0 = *dates
        .first()
        .ok_or_else(|| IngestError::Input("case file has no rows".into()))?;
    Ok(CaseSeries {
        region: region.to_string(),
        date0,
        dates,
        cumulative,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const WIDE: &str = "\
Province/State,Country/Region,Lat,Long,1/22/20,1/23/20,1/24/20
North,X,1.0,2.0,1,2,3
South,X,1.5,2.5,0,1,1
,Yland,0,0,5,6,7
";

    #[test]
    fn province_rows_are_summed() {
        let s = load_case_csv(WIDE.as_bytes(), "X").unwrap().value;
        assert_eq!(s.cumulative, vec![1.0, 3.0, 4.0]);
        assert_eq!(s.date0, NaiveDate::from_ymd_opt(2020, 1, 22).unwrap());
    }

    #[test]
    fn province_name_is_a_fallback() {
        let s = load_case_csv(WIDE.as_bytes(), "South").unwrap().value;
        assert_eq!(s.cumulative, vec![1.0, 1.0]);
        assert_eq!(s.date0, NaiveDate::from_ymd_opt(2020, 1, 23).unwrap());
    }

    #[test]
    fn leading_zeros_are_trimmed() {
        let csv = "Province/State,Country/Region,Lat,Long,3/1/20,3/2/20,3/3/20,3/4/20\n,Z,0,0,0,0,5,9\n";
        let s = load_case_csv(csv.as_bytes(), "Z").unwrap().value;
        assert_eq!(s.date0, NaiveDate::from_ymd_opt(2020, 3, 3).unwrap());
        assert_eq!(s.cumulative, vec![5.0, 9.0]);
    }

    #[test]
    fn unknown_region_lists_near_matches() {
        let err = load_case_csv(WIDE.as_bytes(), "Ylnd").unwrap_err();
        match &err {
            IngestError::RegionNotFound { region, near } => {
                assert_eq!(region, "Ylnd");
                assert_eq!(near, &vec!["Yland".to_string()]);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(err.to_string().contains("Ylnd"));
    }

    #[test]
    fn malformed_date_header_reports_column() {
        let csv = "Province/State,Country/Region,Lat,Long,1/22/20,Jan 23,1/24/20\n,X,0,0,1,2,3\n";
        assert_eq!(
            load_case_csv(csv.as_bytes(), "X").unwrap_err(),
            IngestError::DateHeader {
                column: 5,
                header: "Jan 23".into()
            }
        );
    }

    #[test]
    fn decreasing_counts_are_clamped_with_warnings() {
        let csv = "Province/State,Country/Region,Lat,Long,1/22/20,1/23/20,1/24/20,1/25/20\n,X,0,0,4,6,5,7\n";
        let parsed = load_case_csv(csv.as_bytes(), "X").unwrap();
        assert_eq!(parsed.value.cumulative, vec![4.0, 6.0, 6.0, 7.0]);
        assert_eq!(parsed.warnings.len(), 1);
        assert!(parsed.warnings[0].starts_with("2020-01-24"));
    }

    #[test]
    fn bad_count_reports_line() {
        let csv = "Province/State,Country/Region,Lat,Long,1/22/20\n,X,0,0,abc\n";
        assert!(matches!(
            load_case_csv(csv.as_bytes(), "X"),
            Err(IngestError::Parse { line: 2, .. })
        ));
    }

    proptest! {
        #[test]
        fn long_csv_round_trip(start in 0i64..2000, gaps in prop::collection::vec(1i64..5, 1..40),
                               incs in prop::collection::vec(0.0f64..1e6, 40)) {
            let d0 = NaiveDate::from_ymd_opt(2020, 1, 1).unwrap() + chrono::Duration::days(start);
            let mut dates = vec![d0];
            for g in &gaps {
                let last = *dates.last().unwrap();
                dates.push(last + chrono::Duration::days(*g));
            }
            let mut acc = 1.0;
            let cumulative: Vec<f64> = dates.iter().zip(incs.iter().cycle()).map(|(_, inc)| { acc += inc / 3.0; acc }).collect();
            let series = CaseSeries { region: "R".into(), date0: d0, dates, cumulative };
            let mut buf = Vec::new();
            write_case_long_csv(&series, &mut buf).unwrap();
            prop_assert_eq!(read_case_long_csv(buf.as_slice(), "R").unwrap(), series);
        }
    }
}

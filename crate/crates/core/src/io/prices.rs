use std::fmt;
use std::fs::File;
use std::io::Read;
use std::path::Path;
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::ecf::{make_increments, IncrementSample};
use crate::error::{Error, Result};

/// How prices become increments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Transform {
    RawDiff,
    #[default]
    LogDiff,
}

impl Transform {
    pub fn as_str(&self) -> &'static str {
        match self {
            Transform::RawDiff => "raw_diff",
            Transform::LogDiff => "log_diff",
        }
    }
}

impl fmt::Display for Transform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Transform {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.replace('-', "_").as_str() {
            "raw_diff" | "raw" => Ok(Transform::RawDiff),
            "log_diff" | "log" => Ok(Transform::LogDiff),
            _ => Err(Error::invalid(
                "transform",
                format!("unknown transform `{s}`"),
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PriceSeries {
    /// Present when the file was read with a date column.
    pub dates: Option<Vec<NaiveDate>>,
    pub values: Vec<f64>,
    pub transform: Transform,
    /// Rows with an empty or missing value.
    pub missing: usize,
    /// Rows that failed to parse and were dropped.
    pub bad: usize,
}

impl PriceSeries {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// The series on the scale that gets differenced.
    pub fn observations(&self) -> Vec<f64> {
        match self.transform {
            Transform::RawDiff => self.values.clone(),
            Transform::LogDiff => self.values.iter().map(|v| v.ln()).collect(),
        }
    }

    pub fn increments(&self) -> Result<IncrementSample> {
        make_increments(&self.observations())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsvOptions {
    /// `None` reads rows in file order without date checks.
    pub date_column: Option<String>,
    pub value_column: String,
    pub transform: Transform,
    /// Largest tolerated share of unparseable rows.
    pub max_bad_fraction: f64,
}

impl Default for CsvOptions {
    fn default() -> Self {
        CsvOptions {
            date_column: Some("date".to_string()),
            value_column: "value".to_string(),
            transform: Transform::LogDiff,
            max_bad_fraction: 0.05,
        }
    }
}

pub fn load_csv(path: &Path, opts: &CsvOptions) -> Result<PriceSeries> {
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_csv(file, opts)
}

fn find_column(headers: &csv::StringRecord, name: &str) -> Result<usize> {
    headers
        .iter()
        .position(|h| h.trim() == name)
        .or_else(|| {
            headers
                .iter()
                .position(|h| h.trim().eq_ignore_ascii_case(name))
        })
        .ok_or_else(|| Error::MissingColumn(name.to_string()))
}

fn is_missing(field: &str) -> bool {
    matches!(field, "" | "." | "NA" | "NaN" | "nan" | "null")
}

pub fn parse_csv<R: Read>(reader: R, opts: &CsvOptions) -> Result<PriceSeries> {
    let mut rdr = csv::ReaderBuilder::new()
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| Error::Csv(e.to_string()))?
        .clone();
    let value_idx = find_column(&headers, &opts.value_column)?;
    let date_idx = opts
        .date_column
        .as_deref()
        .map(|c| find_column(&headers, c))
        .transpose()?;

    let mut dates = Vec::new();
    let mut values = Vec::new();
    let (mut total, mut missing, mut bad) = (0usize, 0usize, 0usize);
    for (i, row) in rdr.records().enumerate() {
        total += 1;
        // Header is line 1.
        let line = i + 2;
        let row = match row {
            Ok(r) => r,
            Err(e) => {
                log::warn!("line {line}: {e}");
                bad += 1;
                continue;
            }
        };
        let raw = row.get(value_idx).unwrap_or("");
        if is_missing(raw) {
            missing += 1;
            continue;
        }
        let value = match raw.parse::<f64>() {
            Ok(v) if v.is_finite() && (opts.transform == Transform::RawDiff || v > 0.0) => v,
            _ => {
                log::warn!("line {line}: unusable value `{raw}`");
                bad += 1;
                continue;
            }
        };
        if let Some(di) = date_idx {
            let raw_date = row.get(di).unwrap_or("");
            let date = match NaiveDate::parse_from_str(raw_date, "%Y-%m-%d") {
                Ok(d) => d,
                Err(_) => {
                    log::warn!("line {line}: unparseable date `{raw_date}`");
                    bad += 1;
                    continue;
                }
            };
            if let Some(&prev) = dates.last() {
                if date <= prev {
                    return Err(Error::NonMonotoneDates {
                        row: line,
                        date: raw_date.to_string(),
                    });
                }
            }
            dates.push(date);
        }
        values.push(value);
    }
    if total > 0 && bad as f64 > opts.max_bad_fraction * total as f64 {
        return Err(Error::TooManyBadRows {
            bad,
            total,
            limit: 100.0 * opts.max_bad_fraction,
        });
    }
    if missing + bad > 0 {
        log::warn!("skipped {missing} missing and {bad} unparseable rows of {total}");
    }
    if values.len() < 3 {
        return Err(Error::TooFewObservations {
            required: 3,
            got: values.len(),
        });
    }
    Ok(PriceSeries {
        dates: date_idx.map(|_| dates),
        values,
        transform: opts.transform,
        missing,
        bad,
    })
}

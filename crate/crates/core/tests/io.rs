use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use jumpclust::io::*;
use jumpclust::{jump_test, Error};

fn write_temp(text: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(text.as_bytes()).unwrap();
    f
}

fn opts(transform: Transform) -> CsvOptions {
    CsvOptions {
        transform,
        ..CsvOptions::default()
    }
}

#[test]
fn four_row_file() {
    let f =
        write_temp("date,value\n2020-01-01,10\n2020-01-02,11\n2020-01-03,10.5\n2020-01-06,12\n");
    let s = load_csv(f.path(), &opts(Transform::LogDiff)).unwrap();
    assert_eq!(s.len(), 4);
    assert_eq!(s.dates.as_ref().unwrap().len(), 4);
}

#[test]
fn one_blank_among_a_thousand() {
    let mut text = String::from("date,value\n");
    let start = chrono::NaiveDate::from_ymd_opt(2000, 1, 1).unwrap();
    for i in 0..1000 {
        let d = start + chrono::Days::new(i);
        if i == 500 {
            writeln!(text, "{d},").unwrap();
        } else {
            writeln!(text, "{d},{}", 100.0 + (i as f64).sin()).unwrap();
        }
    }
    let f = write_temp(&text);
    let s = load_csv(f.path(), &opts(Transform::LogDiff)).unwrap();
    assert_eq!((s.len(), s.missing, s.bad), (999, 1, 0));
}

#[test]
fn bad_row_threshold() {
    let mut text = String::from("date,value\n");
    let start = chrono::NaiveDate::from_ymd_opt(2000, 1, 1).unwrap();
    for i in 0..100u64 {
        let d = start + chrono::Days::new(i);
        let v = if i % 10 == 0 {
            "oops".to_string()
        } else {
            format!("{}", 10 + i)
        };
        writeln!(text, "{d},{v}").unwrap();
    }
    let f = write_temp(&text);
    assert!(matches!(
        load_csv(f.path(), &opts(Transform::RawDiff)),
        Err(Error::TooManyBadRows {
            bad: 10,
            total: 100,
            ..
        })
    ));
    let lenient = CsvOptions {
        max_bad_fraction: 0.2,
        ..opts(Transform::RawDiff)
    };
    assert_eq!(load_csv(f.path(), &lenient).unwrap().bad, 10);
}

#[test]
fn missing_file_is_an_io_error() {
    let e = load_csv(
        &PathBuf::from("/definitely/not/here.csv"),
        &CsvOptions::default(),
    )
    .unwrap_err();
    assert!(matches!(e, Error::Io { .. }));
    assert_eq!(e.code(), "io");
}

#[test]
fn undated_series_keeps_file_order() {
    let f = write_temp("value\n3\n1\n2\n");
    let o = CsvOptions {
        date_column: None,
        ..opts(Transform::RawDiff)
    };
    let s = load_csv(f.path(), &o).unwrap();
    assert_eq!(s.values, vec![3.0, 1.0, 2.0]);
    assert!(s.dates.is_none());
    assert_eq!(s.increments().unwrap().values(), &[-2.0, 1.0]);
}

#[test]
fn index_file_feeds_the_test() {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data/sp500_2006_2010.csv");
    let o = CsvOptions {
        value_column: "close".into(),
        transform: Transform::RawDiff,
        ..CsvOptions::default()
    };
    let s = load_csv(&path, &o).unwrap();
    assert_eq!(s.len(), 1259);
    let r = jump_test(&s.increments().unwrap(), 0.05).unwrap();
    let json = jump_result_json(&r, Some(s.transform), None);
    assert_eq!(json["transform"], "raw_diff");
    assert!(json.get("seed").is_none());
    assert_eq!(json["decision"], "jumps");
}

#![no_main]

use jumpclust::io::{parse_csv, CsvOptions, Transform};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Some((&flags, body)) = data.split_first() else {
        return;
    };
    let opts = CsvOptions {
        date_column: (flags & 1 == 0).then(|| "date".to_string()),
        transform: if flags & 2 == 0 {
            Transform::LogDiff
        } else {
            Transform::RawDiff
        },
        ..CsvOptions::default()
    };
    if let Ok(series) = parse_csv(body, &opts) {
        assert!(series.len() >= 3);
        if let Some(dates) = &series.dates {
            assert_eq!(dates.len(), series.len());
            assert!(dates.windows(2).all(|w| w[0] < w[1]));
        }
        if let Ok(inc) = series.increments() {
            assert_eq!(inc.n(), series.len() - 1);
        }
    }
});

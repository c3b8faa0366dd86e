//! Price-series ingestion, run configuration and report serialization.

pub mod config;
pub mod output;
pub mod prices;

pub use config::{load_plan, parse_plan, RunConfig};
pub use output::{fmt17, jump_result_json, write_ecf_csv, write_path_csv, write_report_csv};
pub use prices::{load_csv, parse_csv, CsvOptions, PriceSeries, Transform};

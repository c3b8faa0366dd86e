use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use jumpclust::ecf::{compute_ecf, jump_test_with, SlopeEstimator, TestOptions};
use jumpclust::error::{Error, Result};
use jumpclust::experiments::{
    run_level_study, run_power_curve, run_power_study, ExperimentPlan, ExperimentReport,
};
use jumpclust::io::{
    jump_result_json, load_csv, load_plan, write_ecf_csv, write_path_csv, write_report_csv,
    CsvOptions, PriceSeries, RunConfig, Transform,
};
use jumpclust::sim::{simulate_path, ModelSpec};
use jumpclust::st::st_test;
use serde_json::json;

use crate::args::{Cli, Command, Common, Format, InputArgs, PlanArgs, TransformArg};

/// Flags merged over the configuration file.
struct Settings {
    cfg: RunConfig,
    seed: Option<u64>,
    alpha: f64,
    transform: Transform,
    slope: SlopeEstimator,
    workers: usize,
    output: Option<PathBuf>,
}

fn parse_slope(s: &str) -> Result<SlopeEstimator> {
    match s {
        "auto" => Ok(SlopeEstimator::Auto),
        "single" | "single_spacing" | "single-spacing" => Ok(SlopeEstimator::SingleSpacing),
        other => other
            .parse::<usize>()
            .ok()
            .filter(|&m| m >= 1)
            .map(SlopeEstimator::Window)
            .ok_or_else(|| {
                Error::Config(format!(
                    "--slope: expected auto, single or a positive integer, got `{other}`"
                ))
            }),
    }
}

fn settings(common: &Common) -> Result<Settings> {
    let cfg = match &common.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let alpha = common.alpha.or(cfg.alpha).unwrap_or(0.05);
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Config(format!("alpha {alpha} is outside (0, 1)")));
    }
    let transform = match common.transform {
        Some(TransformArg::RawDiff) => Transform::RawDiff,
        Some(TransformArg::LogDiff) => Transform::LogDiff,
        None => cfg.transform.unwrap_or_default(),
    };
    let slope = match &common.slope {
        Some(s) => parse_slope(s)?,
        None => cfg.slope.unwrap_or_default(),
    };
    Ok(Settings {
        seed: common.seed.or(cfg.seed),
        alpha,
        transform,
        slope,
        workers: common.workers.or(cfg.workers).unwrap_or(0),
        output: common.output.clone().or_else(|| cfg.output.clone()),
        cfg,
    })
}

fn open_output(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|source| {
            Error::Io {
                path: p.clone(),
                source,
            }
        })?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn io_error(path: &Option<PathBuf>, source: io::Error) -> Error {
    Error::Io {
        path: path.clone().unwrap_or_else(|| PathBuf::from("<stdout>")),
        source,
    }
}

fn write_json(s: &Settings, value: &serde_json::Value) -> Result<()> {
    let mut out = open_output(&s.output)?;
    let text = serde_json::to_string_pretty(value).expect("json values serialize");
    writeln!(out, "{text}")
        .and_then(|_| out.flush())
        .map_err(|e| io_error(&s.output, e))
}

fn load_series(s: &Settings, input: &InputArgs) -> Result<PriceSeries> {
    let path = input
        .input
        .clone()
        .or_else(|| s.cfg.input.clone())
        .ok_or_else(|| Error::Config("no input file (use --input)".into()))?;
    let date_column = if input.no_date_column {
        None
    } else {
        Some(
            input
                .date_column
                .clone()
                .or_else(|| s.cfg.date_column.clone())
                .unwrap_or_else(|| "date".into()),
        )
    };
    let opts = CsvOptions {
        date_column,
        value_column: input
            .value_column
            .clone()
            .or_else(|| s.cfg.value_column.clone())
            .unwrap_or_else(|| "value".into()),
        transform: s.transform,
        ..CsvOptions::default()
    };
    let series = load_csv(&path, &opts)?;
    if series.missing + series.bad > 0 {
        log::warn!(
            "{}: skipped {} missing and {} unparseable rows",
            path.display(),
            series.missing,
            series.bad
        );
    }
    Ok(series)
}

fn cmd_test(s: &Settings, input: &InputArgs) -> Result<()> {
    let series = load_series(s, input)?;
    let sample = series.increments()?;
    let result = jump_test_with(
        &sample,
        &TestOptions {
            alpha: s.alpha,
            slope: s.slope,
        },
    )?;
    write_json(
        s,
        &jump_result_json(&result, Some(series.transform), s.seed),
    )
}

fn cmd_ecf(s: &Settings, input: &InputArgs) -> Result<()> {
    let series = load_series(s, input)?;
    let curve = compute_ecf(&series.increments()?);
    let mut out = open_output(&s.output)?;
    write_ecf_csv(&mut out, &curve)
        .and_then(|_| out.flush())
        .map_err(|e| io_error(&s.output, e))
}

fn read_model(path: &Path) -> Result<ModelSpec> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let model: ModelSpec = toml::from_str(&text).map_err(|e| Error::Config(e.to_string()))?;
    model.validate()?;
    Ok(model)
}

fn cmd_simulate(s: &Settings, model: &Option<PathBuf>) -> Result<()> {
    let spec = match model {
        Some(p) => read_model(p)?,
        None => s.cfg.model.ok_or_else(|| {
            Error::Config("no model (use --model or a [model] table in --config)".into())
        })?,
    };
    let path = simulate_path(&spec, s.seed.unwrap_or(0))?;
    let mut out = open_output(&s.output)?;
    write_path_csv(&mut out, &path)
        .and_then(|_| out.flush())
        .map_err(|e| io_error(&s.output, e))
}

fn plan_for(s: &Settings, args: &PlanArgs) -> Result<ExperimentPlan> {
    let path = args
        .plan
        .clone()
        .or_else(|| s.cfg.plan.clone())
        .ok_or_else(|| Error::Config("no experiment plan (use --plan)".into()))?;
    let mut plan = load_plan(&path)?;
    if let Some(seed) = s.seed {
        plan.base_seed = seed;
    }
    if let Some(r) = args.replications {
        plan.replications = r;
    }
    if args.records {
        plan.keep_records = true;
    }
    Ok(plan)
}

fn write_report(s: &Settings, args: &PlanArgs, mut report: ExperimentReport) -> Result<()> {
    if !args.timing {
        report.strip_timing();
    }
    match args.format {
        Format::Json => write_json(
            s,
            &serde_json::to_value(&report).expect("report serializes"),
        ),
        Format::Csv => {
            let mut out = open_output(&s.output)?;
            write_report_csv(&mut out, &report)
                .and_then(|_| out.flush())
                .map_err(|e| io_error(&s.output, e))
        }
    }
}

fn cmd_st(s: &Settings, input: &InputArgs, p: f64, k: usize) -> Result<()> {
    let series = load_series(s, input)?;
    let r = st_test(&series.observations(), p, k, s.alpha)?;
    let mut v = serde_json::to_value(r).expect("result serializes");
    let obj = v.as_object_mut().expect("struct serializes to an object");
    obj.insert("n".into(), json!(series.len() - 1));
    obj.insert("transform".into(), json!(series.transform.as_str()));
    write_json(s, &v)
}

pub fn run(cli: Cli) -> Result<()> {
    let s = settings(&cli.common)?;
    match &cli.command {
        Command::Test(input) => cmd_test(&s, input),
        Command::Ecf(input) => cmd_ecf(&s, input),
        Command::Simulate { model } => cmd_simulate(&s, model),
        Command::McLevel(args) => {
            let plan = plan_for(&s, args)?;
            write_report(&s, args, run_level_study(&plan, s.workers)?)
        }
        Command::McPower(args) => {
            let plan = plan_for(&s, args)?;
            write_report(&s, args, run_power_study(&plan, s.workers)?)
        }
        Command::PowerCurve(args) => {
            let plan = plan_for(&s, args)?;
            write_report(&s, args, run_power_curve(&plan, s.workers)?)
        }
        Command::StTest { input, p, k } => cmd_st(&s, input, *p, *k),
    }
}

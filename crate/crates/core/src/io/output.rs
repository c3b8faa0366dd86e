//! Report and plot-data writers. Floats in CSV carry 17 significant digits;
//! JSON numbers use the shortest representation that round-trips exactly.

use std::io::Write;

use serde_json::{json, Value};

use crate::ecf::{EcfCurve, JumpTestResult};
use crate::experiments::{ExperimentReport, TestSummary};
use crate::io::prices::Transform;
use crate::sim::PathSample;

/// `x` with 17 significant digits in scientific notation.
pub fn fmt17(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

fn opt17(x: Option<f64>) -> String {
    x.map(fmt17).unwrap_or_default()
}

fn finite(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::Null
    }
}

/// Columns `p,g_n`; the last row has `p = terminal`.
pub fn write_ecf_csv<W: Write>(out: W, curve: &EcfCurve) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["p", "g_n"])?;
    let n = curve.n() as f64;
    for (i, g) in curve.grid.iter().enumerate() {
        w.write_record([fmt17(i as f64 / n), fmt17(*g)])?;
    }
    w.write_record(["terminal".to_string(), fmt17(curve.terminal)])?;
    w.flush()
}

/// Columns `step,time,value,jumps` with one row per observation time.
pub fn write_path_csv<W: Write>(out: W, path: &PathSample) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["step", "time", "value", "jumps"])?;
    let n = path.increments.len();
    let mut jumps = vec![0usize; n + 1];
    for &s in &path.jump_steps {
        jumps[s + 1] = 1;
    }
    for (i, v) in path.values.iter().enumerate() {
        w.write_record([
            i.to_string(),
            fmt17(i as f64 / n as f64),
            fmt17(*v),
            jumps[i].to_string(),
        ])?;
    }
    w.flush()
}

pub fn jump_result_json(
    r: &JumpTestResult,
    transform: Option<Transform>,
    seed: Option<u64>,
) -> Value {
    let mut v = json!({
        "n": r.n,
        "p_n": r.p_n(),
        "crossing_index": r.split_point.crossing_index,
        "statistic": finite(r.statistic),
        "p_value": r.p_value,
        "alpha": r.alpha,
        "critical_value": r.critical_value,
        "ci": r.ci.map(|(lo, hi)| json!([lo, hi])).unwrap_or(Value::Null),
        "ci_clipped": r.ci_clipped,
        "decision": r.decision,
        "boundary": r.split_point.boundary,
        "boundary_degenerate": r.boundary_degenerate,
        "variance": r.variance.map(|vc| json!({
            "eta": vc.eta,
            "delta": vc.delta,
            "s_nl": vc.s_nl,
            "s_nu": vc.s_nu,
            "t_nl": vc.t_nl,
            "t_nu": vc.t_nu,
            "q_slope": vc.q_slope,
            "pivot_value": vc.pivot_value,
        })).unwrap_or(Value::Null),
    });
    let obj = v.as_object_mut().expect("object literal");
    if let Some(t) = transform {
        obj.insert("transform".into(), json!(t.as_str()));
    }
    if let Some(s) = seed {
        obj.insert("seed".into(), json!(s));
    }
    v
}

fn summary_fields(s: Option<TestSummary>) -> [String; 5] {
    match s {
        Some(s) => [
            fmt17(s.rejection_rate),
            fmt17(s.failure_proportion),
            fmt17(s.mc_se),
            s.valid.to_string(),
            s.failed.to_string(),
        ],
        None => Default::default(),
    }
}

/// One row per cell.
pub fn write_report_csv<W: Write>(out: W, report: &ExperimentReport) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let with_time = report.cells.iter().any(|c| c.runtime_secs.is_some());
    let mut header = vec![
        "cell",
        "label",
        "parameter",
        "n",
        "mu",
        "sigma",
        "replications",
        "measure",
        "value",
        "mean_p_n",
        "mean_jump_count",
        "jump_free_paths",
        "cluster_rejection_rate",
        "cluster_failure_proportion",
        "cluster_mc_se",
        "cluster_valid",
        "cluster_failed",
        "st_rejection_rate",
        "st_failure_proportion",
        "st_mc_se",
        "st_valid",
        "st_failed",
    ];
    if with_time {
        header.push("runtime_secs");
    }
    w.write_record(&header)?;
    let measure = serde_json::to_value(report.measure)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_default();
    for c in &report.cells {
        let mut row = vec![
            c.cell.to_string(),
            c.label.clone(),
            opt17(c.parameter),
            c.model.n.to_string(),
            fmt17(c.model.mu),
            fmt17(c.model.sigma),
            c.replications.to_string(),
            measure.clone(),
            opt17(c.value(report.measure)),
            opt17(c.mean_p_n),
            fmt17(c.mean_jump_count),
            c.jump_free_paths.to_string(),
        ];
        row.extend(summary_fields(c.cluster));
        row.extend(summary_fields(c.st));
        if with_time {
            row.push(opt17(c.runtime_secs));
        }
        w.write_record(&row)?;
    }
    w.flush()
}

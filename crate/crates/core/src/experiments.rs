//! Monte Carlo level and power studies.
//!
//! A plan is a list of cells, each a [`ModelSpec`], run for a fixed number of
//! replications. Replication `r` of cell `c` uses the path seed
//! `derive_seed(base_seed, c, r)`, so results do not depend on scheduling or
//! on the number of worker threads. Replications run on a rayon pool and are
//! collected in index order before any floating-point reduction.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ecf::{jump_test_with, Decision, IncrementSample, SlopeEstimator, TestOptions};
use crate::error::{Error, Result};
use crate::rng::derive_seed;
use crate::sim::{simulate_path, JumpSpec, ModelSpec, SizeLaw};
use crate::st::st_test;
use crate::summation::CompensatedSum;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestKind {
    Cluster,
    St,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StParams {
    pub p: f64,
    pub k: usize,
}

impl Default for StParams {
    fn default() -> Self {
        StParams { p: 4.0, k: 2 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellSpec {
    pub label: String,
    pub model: ModelSpec,
    /// Abscissa for power curves.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parameter: Option<f64>,
}

/// Cartesian product of sample sizes and jump models.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub n: Vec<usize>,
    pub mu: f64,
    pub sigma: f64,
    #[serde(default = "default_jumps")]
    pub jumps: Vec<JumpSpec>,
}

fn default_jumps() -> Vec<JumpSpec> {
    vec![JumpSpec::None]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveParameter {
    Tau,
    Eta,
}

/// Compound-Poisson cells with normal jump sizes, one per value of the
/// varied parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveSpec {
    pub n: usize,
    pub mu: f64,
    pub sigma: f64,
    pub lambda: f64,
    pub vary: CurveParameter,
    pub values: Vec<f64>,
    /// The other size parameter, held fixed.
    pub fixed: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentPlan {
    pub scenario: String,
    pub replications: usize,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    pub base_seed: u64,
    #[serde(default = "default_tests")]
    pub tests: Vec<TestKind>,
    #[serde(default)]
    pub slope: SlopeEstimator,
    #[serde(default)]
    pub st: StParams,
    #[serde(default)]
    pub keep_records: bool,
    #[serde(default)]
    pub cells: Vec<CellSpec>,
    #[serde(default)]
    pub grid: Option<GridSpec>,
    #[serde(default)]
    pub curve: Option<CurveSpec>,
}

fn default_alpha() -> f64 {
    0.05
}

fn default_tests() -> Vec<TestKind> {
    vec![TestKind::Cluster]
}

impl ExperimentPlan {
    pub fn new(scenario: &str, replications: usize, base_seed: u64) -> Self {
        ExperimentPlan {
            scenario: scenario.to_string(),
            replications,
            alpha: default_alpha(),
            base_seed,
            tests: default_tests(),
            slope: SlopeEstimator::default(),
            st: StParams::default(),
            keep_records: false,
            cells: Vec::new(),
            grid: None,
            curve: None,
        }
    }

    /// Explicit cells, then grid cells, then curve cells.
    pub fn expand_cells(&self) -> Vec<CellSpec> {
        let mut out = self.cells.clone();
        if let Some(g) = &self.grid {
            for &n in &g.n {
                for jumps in &g.jumps {
                    out.push(CellSpec {
                        label: format!("n={n} {}", jump_label(jumps)),
                        model: ModelSpec::brownian(g.mu, g.sigma, n).with_jumps(*jumps),
                        parameter: None,
                    });
                }
            }
        }
        if let Some(c) = &self.curve {
            for &v in &c.values {
                let (tau, eta, name) = match c.vary {
                    CurveParameter::Tau => (v, c.fixed, "tau"),
                    CurveParameter::Eta => (c.fixed, v, "eta"),
                };
                out.push(CellSpec {
                    label: format!("{name}={v}"),
                    model: ModelSpec::brownian(c.mu, c.sigma, c.n).with_jumps(
                        JumpSpec::CompoundPoisson {
                            lambda: c.lambda,
                            size: SizeLaw::Normal { tau, eta },
                        },
                    ),
                    parameter: Some(v),
                });
            }
        }
        out
    }

    pub fn validate(&self) -> Result<Vec<CellSpec>> {
        if self.replications == 0 {
            return Err(Error::invalid("replications", "must be at least 1"));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::invalid(
                "alpha",
                format!("{} is outside (0, 1)", self.alpha),
            ));
        }
        if self.tests.is_empty() {
            return Err(Error::invalid("tests", "no test selected"));
        }
        let cells = self.expand_cells();
        if cells.is_empty() {
            return Err(Error::invalid("cells", "the plan has no cells"));
        }
        for c in &cells {
            c.model.validate()?;
        }
        Ok(cells)
    }

    fn runs(&self, kind: TestKind) -> bool {
        self.tests.contains(&kind)
    }
}

fn jump_label(j: &JumpSpec) -> String {
    let size = |s: &SizeLaw| match *s {
        SizeLaw::Normal { tau, eta } => format!("N({tau},{eta})"),
        SizeLaw::DoubleExponential { location, scale } => format!("DE({location},{scale})"),
        SizeLaw::Constant { h } => format!("h={h}"),
    };
    match j {
        JumpSpec::None => "no jumps".to_string(),
        JumpSpec::Constant { h, lambda } => format!("constant h={h} lambda={lambda}"),
        JumpSpec::CompoundPoisson { lambda, size: s } => format!("CP lambda={lambda} {}", size(s)),
        JumpSpec::Bernoulli {
            prob_per_step,
            size: s,
        } => format!("Bernoulli p={prob_per_step} {}", size(s)),
    }
}

/// Which proportion a report's `value` column carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Measure {
    RejectionRate,
    FailureProportion,
    Power,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestSummary {
    pub valid: usize,
    pub failed: usize,
    pub rejections: usize,
    pub rejection_rate: f64,
    /// Proportion of valid replications that did not reject.
    pub failure_proportion: f64,
    /// `sqrt(p (1 - p) / R)` with `R` the number of valid replications.
    pub mc_se: f64,
}

impl TestSummary {
    fn from_outcomes(outcomes: impl Iterator<Item = Option<bool>>) -> Self {
        let (mut valid, mut failed, mut rejections) = (0, 0, 0);
        for o in outcomes {
            match o {
                Some(r) => {
                    valid += 1;
                    rejections += r as usize;
                }
                None => failed += 1,
            }
        }
        let rate = if valid > 0 {
            rejections as f64 / valid as f64
        } else {
            f64::NAN
        };
        TestSummary {
            valid,
            failed,
            rejections,
            rejection_rate: rate,
            failure_proportion: 1.0 - rate,
            mc_se: (rate * (1.0 - rate) / valid as f64).sqrt(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub replication: usize,
    pub seed: u64,
    pub jump_count: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_n: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub statistic: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decision: Option<Decision>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub st_ratio: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub st_statistic: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub st_decision: Option<Decision>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellReport {
    pub cell: usize,
    pub label: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub parameter: Option<f64>,
    pub model: ModelSpec,
    pub replications: usize,
    /// Mean `p_n` over replications where the split point was computed.
    pub mean_p_n: Option<f64>,
    pub mean_jump_count: f64,
    /// Replications whose path had no jump at all.
    pub jump_free_paths: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cluster: Option<TestSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub st: Option<TestSummary>,
    /// Wall-clock seconds; not reproducible, so omitted unless requested.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub runtime_secs: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub records: Option<Vec<Record>>,
}

impl CellReport {
    /// The cell's headline value under `measure` for the primary test.
    pub fn value(&self, measure: Measure) -> Option<f64> {
        let s = self.cluster.or(self.st)?;
        Some(match measure {
            Measure::RejectionRate | Measure::Power => s.rejection_rate,
            Measure::FailureProportion => s.failure_proportion,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub scenario: String,
    pub measure: Measure,
    pub alpha: f64,
    pub base_seed: u64,
    pub replications: usize,
    pub cells: Vec<CellReport>,
}

impl ExperimentReport {
    pub fn strip_timing(&mut self) {
        for c in &mut self.cells {
            c.runtime_secs = None;
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Outcome {
    record: Record,
    cluster: Option<bool>,
    st: Option<bool>,
}

fn run_replication(
    plan: &ExperimentPlan,
    cell_index: usize,
    model: &ModelSpec,
    rep: usize,
) -> Outcome {
    let seed = derive_seed(plan.base_seed, cell_index as u64, rep as u64);
    let mut record = Record {
        replication: rep,
        seed,
        jump_count: 0,
        p_n: None,
        statistic: None,
        decision: None,
        st_ratio: None,
        st_statistic: None,
        st_decision: None,
    };
    let path = match simulate_path(model, seed) {
        Ok(p) => p,
        Err(e) => {
            log::warn!("cell {cell_index} replication {rep}: {e}");
            return Outcome {
                record,
                cluster: None,
                st: None,
            };
        }
    };
    record.jump_count = path.jump_count;
    let mut cluster = None;
    if plan.runs(TestKind::Cluster) {
        let opts = TestOptions {
            alpha: plan.alpha,
            slope: plan.slope,
        };
        let result = IncrementSample::from_unsorted(path.increments.clone())
            .and_then(|s| jump_test_with(&s, &opts));
        match result {
            Ok(r) => {
                record.p_n = Some(r.p_n());
                record.statistic = Some(r.statistic);
                record.decision = Some(r.decision);
                cluster = Some(r.decision == Decision::Jumps);
            }
            Err(e) => log::debug!("cell {cell_index} replication {rep}: {e}"),
        }
    }
    let mut st = None;
    if plan.runs(TestKind::St) {
        match st_test(&path.values, plan.st.p, plan.st.k, plan.alpha) {
            Ok(r) => {
                record.st_ratio = Some(r.ratio);
                record.st_statistic = Some(r.standardized);
                record.st_decision = Some(r.decision);
                st = Some(r.decision == Decision::Jumps);
            }
            Err(e) => log::debug!("cell {cell_index} replication {rep} (st): {e}"),
        }
    }
    Outcome {
        record,
        cluster,
        st,
    }
}

fn run_cell(plan: &ExperimentPlan, cell_index: usize, cell: &CellSpec) -> CellReport {
    let start = Instant::now();
    let outcomes: Vec<Outcome> = (0..plan.replications)
        .into_par_iter()
        .map(|rep| run_replication(plan, cell_index, &cell.model, rep))
        .collect();

    let mut p_sum = CompensatedSum::new();
    let mut p_count = 0usize;
    let mut jump_sum = 0usize;
    let mut jump_free = 0usize;
    for o in &outcomes {
        if let Some(p) = o.record.p_n {
            p_sum.add(p);
            p_count += 1;
        }
        jump_sum += o.record.jump_count;
        jump_free += (o.record.jump_count == 0) as usize;
    }
    let cluster = plan
        .runs(TestKind::Cluster)
        .then(|| TestSummary::from_outcomes(outcomes.iter().map(|o| o.cluster)));
    let st = plan
        .runs(TestKind::St)
        .then(|| TestSummary::from_outcomes(outcomes.iter().map(|o| o.st)));
    CellReport {
        cell: cell_index,
        label: cell.label.clone(),
        parameter: cell.parameter,
        model: cell.model,
        replications: plan.replications,
        mean_p_n: (p_count > 0).then(|| p_sum.value() / p_count as f64),
        mean_jump_count: jump_sum as f64 / plan.replications as f64,
        jump_free_paths: jump_free,
        cluster,
        st,
        runtime_secs: Some(start.elapsed().as_secs_f64()),
        records: plan
            .keep_records
            .then(|| outcomes.iter().map(|o| o.record).collect()),
    }
}

/// Runs every cell of `plan` on `workers` threads (0 picks rayon's default).
pub fn run_plan(
    plan: &ExperimentPlan,
    measure: Measure,
    workers: usize,
) -> Result<ExperimentReport> {
    let cells = plan.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let reports = pool.install(|| {
        cells
            .iter()
            .enumerate()
            .map(|(i, c)| run_cell(plan, i, c))
            .collect::<Vec<_>>()
    });
    Ok(ExperimentReport {
        scenario: plan.scenario.clone(),
        measure,
        alpha: plan.alpha,
        base_seed: plan.base_seed,
        replications: plan.replications,
        cells: reports,
    })
}

/// Level study: every cell must be jump-free.
pub fn run_level_study(plan: &ExperimentPlan, workers: usize) -> Result<ExperimentReport> {
    let cells = plan.validate()?;
    if let Some(c) = cells.iter().find(|c| c.model.jumps != JumpSpec::None) {
        return Err(Error::invalid(
            "jumps",
            format!("level study cell '{}' has jumps", c.label),
        ));
    }
    run_plan(plan, Measure::RejectionRate, workers)
}

/// Power study reported as the proportion of tests failing to reject.
pub fn run_power_study(plan: &ExperimentPlan, workers: usize) -> Result<ExperimentReport> {
    run_plan(plan, Measure::FailureProportion, workers)
}

/// Power as a function of the cell parameter.
pub fn run_power_curve(plan: &ExperimentPlan, workers: usize) -> Result<ExperimentReport> {
    run_plan(plan, Measure::Power, workers)
}

/// Brownian-only cells at the given sample sizes (`mu = 0`, `sigma = 1`).
pub fn level_plan(
    ns: &[usize],
    replications: usize,
    base_seed: u64,
    tests: Vec<TestKind>,
) -> ExperimentPlan {
    let mut plan = ExperimentPlan::new("level", replications, base_seed);
    plan.tests = tests;
    plan.grid = Some(GridSpec {
        n: ns.to_vec(),
        mu: 0.0,
        sigma: 1.0,
        jumps: default_jumps(),
    });
    plan
}

/// The four jump models of the power table with `mu = 2`, `sigma = 1`.
/// The Bernoulli column uses per-step probability `lambda / n`, matching
/// the compound-Poisson cells in expected jump count.
pub fn power_table_cells(n: usize, lambda: f64) -> Vec<CellSpec> {
    let base = ModelSpec::brownian(2.0, 1.0, n);
    let cp = |size| JumpSpec::CompoundPoisson { lambda, size };
    [
        (
            "CP N(10,2)",
            cp(SizeLaw::Normal {
                tau: 10.0,
                eta: 2.0,
            }),
        ),
        (
            "CP DE(4,1)",
            cp(SizeLaw::DoubleExponential {
                location: 4.0,
                scale: 1.0,
            }),
        ),
        ("CP N(1.5,1)", cp(SizeLaw::Normal { tau: 1.5, eta: 1.0 })),
        (
            "Bernoulli N(10,2)",
            JumpSpec::Bernoulli {
                prob_per_step: lambda / n as f64,
                size: SizeLaw::Normal {
                    tau: 10.0,
                    eta: 2.0,
                },
            },
        ),
    ]
    .into_iter()
    .map(|(label, jumps)| CellSpec {
        label: format!("n={n} {label}"),
        model: base.with_jumps(jumps),
        parameter: None,
    })
    .collect()
}

//! Acceptance criteria, one line each. Run with
//! `cargo test -p jumpclust-cli --test acceptance` (add `-- --full` for the
//! large level table).

use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::Instant;

use jumpclust::experiments::{
    level_plan, power_table_cells, run_level_study, run_power_study, ExperimentPlan, Measure,
    TestKind,
};
use jumpclust::io::{load_csv, CsvOptions, Transform};
use jumpclust::ks::{ks_p_value, ks_statistic, standard_normal_cdf};
use jumpclust::quad::integrate;
use jumpclust::rng::stream_rng;
use jumpclust::theory::{g_prime, split_theory, theta, PopulationLaw};
use jumpclust::{compute_ecf, jump_test, split_point, Decision, IncrementSample, JumpSpec};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

const SEED: u64 = 20_240_601;

const ORACLE_SAMPLES: usize = 500;
const ORACLE_REL_TOL: f64 = 1e-12;
const ORACLE_MAX_SECS: f64 = 10.0;
const AFFINE_SAMPLES: usize = 200;
const P0_TOL: f64 = 1e-9;
const NORMAL_AVAR: f64 = 0.688;
const NORMAL_AVAR_TOL: f64 = 0.005;
const MIXTURE_P0: f64 = 0.80;
const MIXTURE_P0_TOL: f64 = 0.01;
const LEVEL_N: usize = 5000;
const LEVEL_R: usize = 2000;
const LEVEL_BAND: (f64, f64) = (0.035, 0.065);
const LEVEL_MAX_SECS: f64 = 300.0;
const MEAN_PN_BAND: (f64, f64) = (0.49, 0.51);
const CLT_N: usize = 10_000;
const CLT_R: usize = 2000;
const CLT_KS_LEVEL: f64 = 0.01;
const POWER_N: usize = 5000;
const POWER_R: usize = 2000;
const POWER_LAMBDA: f64 = 0.2;
const POWER_TABLE: [f64; 4] = [0.044, 0.053, 0.187, 0.051];
const POWER_TOL: f64 = 0.02;
const ST_SMALL_N: usize = 500;
const ST_SMALL_BAND: (f64, f64) = (0.083, 0.124);
const ST_LARGE_N: usize = 50_000;
const ST_LARGE_R: usize = 500;
const ST_RATIO_REL_TOL: f64 = 0.05;
const CASE_PN: [(&str, f64, Decision); 2] = [
    ("1996-2000", 0.479, Decision::NoJumps),
    ("2006-2010", 0.237, Decision::Jumps),
];
const CASE_TOL: f64 = 0.02;
const CAPTURE_N: usize = 1000;
const CAPTURE_K: usize = 900;
const CAPTURE_GAP_OVER_SD: f64 = 50.0;
const CAPTURE_SEEDS: u64 = 1000;
const CAPTURE_RATE: f64 = 0.99;
const FULL_NS: [usize; 6] = [500, 1000, 5000, 10_000, 25_000, 50_000];
const FULL_LEVELS: [f64; 6] = [0.043, 0.046, 0.0492, 0.0497, 0.0482, 0.0501];
const FULL_R: usize = 10_000;
const FULL_TOL: f64 = 0.006;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn random_sample(rng: &mut impl Rng) -> Vec<f64> {
    let n = rng.random_range(3..=200);
    let kind = rng.random_range(0..4);
    (0..n)
        .map(|_| {
            let z: f64 = StandardNormal.sample(rng);
            match kind {
                0 => z,
                1 => rng.random::<f64>() * 10.0 - 3.0,
                2 => (z * 2.0).round(),
                _ => {
                    if rng.random::<f64>() < 0.1 {
                        8.0 + z
                    } else {
                        z * 0.1
                    }
                }
            }
        })
        .collect()
}

/// Every ECF value from its definition, one trimmed mean at a time.
fn naive_ecf(sorted: &[f64]) -> Vec<f64> {
    let n = sorted.len();
    let mean = |xs: &[f64]| xs.iter().sum::<f64>() / xs.len() as f64;
    let mut out: Vec<f64> = (1..n)
        .map(|k| mean(&sorted[..k]) - sorted[k - 1] + mean(&sorted[k..]) - sorted[k])
        .collect();
    out.push(mean(sorted) - sorted[n - 1]);
    out
}

fn naive_crossing(values: &[f64]) -> Option<usize> {
    let n = values.len();
    if values[..n - 1].iter().all(|&g| g < 0.0) || values[..n - 1].iter().all(|&g| g > 0.0) {
        return None;
    }
    (1..n).rev().find(|&k| values[k - 1] * values[k] <= 0.0)
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut rng = stream_rng(SEED, 1);
    let mut worst = 0.0f64;
    let mut split_mismatch = 0;
    for _ in 0..ORACLE_SAMPLES {
        let s = IncrementSample::from_unsorted(random_sample(&mut rng)).unwrap();
        let ecf = compute_ecf(&s);
        let fast: Vec<f64> = ecf.values().collect();
        let slow = naive_ecf(s.values());
        let scale = s
            .values()
            .iter()
            .fold(f64::MIN_POSITIVE, |m, v| m.max(v.abs()));
        for (a, b) in fast.iter().zip(&slow) {
            worst = worst.max((a - b).abs() / scale);
        }
        let sp = split_point(&ecf);
        let k = naive_crossing(&slow);
        let expect_p = k.map_or_else(
            || if slow[0] < 0.0 { 0.0 } else { 1.0 },
            |k| k as f64 / s.n() as f64,
        );
        if sp.crossing_index != k || sp.p_n != expect_p {
            split_mismatch += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        worst <= ORACLE_REL_TOL && split_mismatch == 0 && secs < ORACLE_MAX_SECS,
        format!("max rel err {worst:.2e}, split mismatches {split_mismatch}, {secs:.2}s"),
    )
}

fn criterion_2() -> Outcome {
    let mut rng = stream_rng(SEED, 2);
    let mut exceptions = 0;
    for _ in 0..AFFINE_SAMPLES {
        let xs = random_sample(&mut rng);
        let a = 10f64.powf(rng.random_range(-3.0..3.0));
        let b = rng.random_range(-1e3..1e3);
        let base = split_point(&compute_ecf(
            &IncrementSample::from_unsorted(xs.clone()).unwrap(),
        ));
        let moved = IncrementSample::from_unsorted(xs.iter().map(|x| a * x + b).collect()).unwrap();
        if split_point(&compute_ecf(&moved)).crossing_index != base.crossing_index {
            exceptions += 1;
        }
    }
    outcome(
        exceptions == 0,
        format!("{exceptions} exceptions in {AFFINE_SAMPLES}"),
    )
}

fn criterion_3() -> Outcome {
    let normal = PopulationLaw::standard_normal();
    let t = split_theory(&normal).unwrap();
    // Var(theta) by direct quadrature over the normal density.
    let q = 0.0;
    let f = normal.pdf(q);
    let (lo, hi) = normal.support_bounds();
    let moment = |power: i32| -> f64 {
        let g = |w: f64| theta(w, 0.5, q, f).powi(power) * normal.pdf(w);
        integrate(g, lo, q, 1e-13, 1e-12).unwrap() + integrate(g, q, hi, 1e-13, 1e-12).unwrap()
    };
    let (m1, m2) = (moment(1), moment(2));
    let oracle = (m2 - m1 * m1) / g_prime(&normal, 0.5).unwrap().powi(2);
    let mix = split_theory(&PopulationLaw::mixture2(0.8, 0.0, 1.0, 5.0, 1.0).unwrap()).unwrap();
    let pass = (t.p0 - 0.5).abs() <= P0_TOL
        && (t.asymptotic_var - NORMAL_AVAR).abs() <= NORMAL_AVAR_TOL
        && (oracle - NORMAL_AVAR).abs() <= NORMAL_AVAR_TOL
        && (mix.p0 - MIXTURE_P0).abs() <= MIXTURE_P0_TOL;
    outcome(
        pass,
        format!(
            "N(0,1) p0 {:.12}, avar {:.5} (quadrature {oracle:.5}); mixture p0 {:.5}",
            t.p0, t.asymptotic_var, mix.p0
        ),
    )
}

fn criteria_4_5_9a() -> [Outcome; 3] {
    let plan = level_plan(
        &[ST_SMALL_N, LEVEL_N],
        LEVEL_R,
        SEED,
        vec![TestKind::Cluster, TestKind::St],
    );
    let start = Instant::now();
    let r = run_level_study(&plan, 0).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let big = r.cells.iter().find(|c| c.model.n == LEVEL_N).unwrap();
    let small = r.cells.iter().find(|c| c.model.n == ST_SMALL_N).unwrap();
    let level = big.cluster.unwrap().rejection_rate;
    let mean_pn = big.mean_p_n.unwrap();
    let st = small.st.unwrap().rejection_rate;
    [
        outcome(
            (LEVEL_BAND.0..=LEVEL_BAND.1).contains(&level) && secs < LEVEL_MAX_SECS,
            format!("level {level:.4} at n={LEVEL_N}, R={LEVEL_R} in {LEVEL_BAND:?}; {secs:.1}s for both cells"),
        ),
        outcome(
            (MEAN_PN_BAND.0..=MEAN_PN_BAND.1).contains(&mean_pn),
            format!("mean p_n {mean_pn:.5} at n={LEVEL_N} in {MEAN_PN_BAND:?}"),
        ),
        outcome(
            (ST_SMALL_BAND.0..=ST_SMALL_BAND.1).contains(&st),
            format!("ST rejection {st:.4} at n={ST_SMALL_N} in {ST_SMALL_BAND:?}"),
        ),
    ]
}

fn criterion_6() -> Outcome {
    let mut plan = level_plan(&[CLT_N], CLT_R, SEED + 6, vec![TestKind::Cluster]);
    plan.keep_records = true;
    let r = run_level_study(&plan, 0).unwrap();
    let z: Vec<f64> = r.cells[0]
        .records
        .as_ref()
        .unwrap()
        .iter()
        .filter_map(|rec| rec.statistic)
        .filter(|s| s.is_finite())
        .collect();
    let d = ks_statistic(&z, standard_normal_cdf);
    let p = ks_p_value(d, z.len());
    outcome(
        p > CLT_KS_LEVEL,
        format!("KS D {d:.4}, p {p:.3} over {} draws", z.len()),
    )
}

fn criteria_7_8() -> [Outcome; 2] {
    let mut plan = ExperimentPlan::new("power", POWER_R, SEED + 7);
    plan.cells = power_table_cells(POWER_N, POWER_LAMBDA);
    let r = run_power_study(&plan, 0).unwrap();
    assert_eq!(r.measure, Measure::FailureProportion);
    let mut table_ok = true;
    let mut table = Vec::new();
    for (c, want) in r.cells.iter().zip(POWER_TABLE) {
        let got = c.cluster.unwrap().failure_proportion;
        table_ok &= (got - want).abs() <= POWER_TOL;
        table.push(format!("{got:.4} (want {want})"));
    }
    let ceiling = 1.0 - (-POWER_LAMBDA).exp();
    let mut ceiling_ok = true;
    let mut powers = Vec::new();
    for c in r
        .cells
        .iter()
        .filter(|c| matches!(c.model.jumps, JumpSpec::CompoundPoisson { .. }))
    {
        let s = c.cluster.unwrap();
        ceiling_ok &= s.rejection_rate <= ceiling + 3.0 * s.mc_se;
        powers.push(format!("{:.4}+-{:.4}", s.rejection_rate, s.mc_se));
    }
    [
        outcome(
            table_ok,
            format!("failure proportions {}", table.join(" / ")),
        ),
        outcome(
            ceiling_ok,
            format!(
                "CP power {} vs ceiling {ceiling:.4} + 3 s.e.",
                powers.join(", ")
            ),
        ),
    ]
}

fn criterion_9b() -> Outcome {
    let mut plan = level_plan(&[ST_LARGE_N], ST_LARGE_R, SEED + 9, vec![TestKind::St]);
    plan.keep_records = true;
    let r = run_level_study(&plan, 0).unwrap();
    let ratios: Vec<f64> = r.cells[0]
        .records
        .as_ref()
        .unwrap()
        .iter()
        .filter_map(|x| x.st_ratio)
        .collect();
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    outcome(
        ((mean - 2.0) / 2.0).abs() <= ST_RATIO_REL_TOL,
        format!("ST ratio mean {mean:.4} at n={ST_LARGE_N}"),
    )
}

fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/data")
}

fn criterion_10() -> Outcome {
    let files = [
        ("1996-2000", "sp500_1996_2000.csv"),
        ("2006-2010", "sp500_2006_2010.csv"),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for ((window, want_p, want_d), (_, file)) in CASE_PN.iter().zip(files) {
        let path = data_dir().join(file);
        if !path.exists() {
            pass = false;
            parts.push(format!("{window}: no data file"));
            continue;
        }
        let opts = CsvOptions {
            value_column: "close".into(),
            transform: Transform::RawDiff,
            ..CsvOptions::default()
        };
        let series = load_csv(&path, &opts).unwrap();
        let r = jump_test(&series.increments().unwrap(), 0.05).unwrap();
        let ok = (r.p_n() - want_p).abs() <= CASE_TOL && r.decision == *want_d;
        pass &= ok;
        parts.push(format!(
            "{window}: p_n {:.4} (want {want_p}), {:?}",
            r.p_n(),
            r.decision
        ));
    }
    outcome(pass, parts.join("; "))
}

fn criterion_11() -> Outcome {
    let mut hits = 0;
    for seed in 0..CAPTURE_SEEDS {
        let mut rng = stream_rng(SEED + seed, 11);
        let xs: Vec<f64> = (0..CAPTURE_N)
            .map(|i| {
                let z: f64 = StandardNormal.sample(&mut rng);
                if i < CAPTURE_K {
                    z
                } else {
                    CAPTURE_GAP_OVER_SD + z
                }
            })
            .collect();
        let sp = split_point(&compute_ecf(&IncrementSample::from_unsorted(xs).unwrap()));
        if sp.crossing_index == Some(CAPTURE_K) {
            hits += 1;
        }
    }
    let rate = hits as f64 / CAPTURE_SEEDS as f64;
    outcome(
        rate >= CAPTURE_RATE,
        format!("crossing_index = {CAPTURE_K} in {hits}/{CAPTURE_SEEDS} runs"),
    )
}

fn criterion_12() -> Outcome {
    let plans = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../plans");
    let runs = [
        ("mc-level", "level.toml"),
        ("mc-power", "power.toml"),
        ("power-curve", "curve.toml"),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (cmd, plan) in runs {
        for format in ["json", "csv"] {
            let outs: Vec<Vec<u8>> = ["1", "2", "5"]
                .iter()
                .map(|w| {
                    let o = Command::new(env!("CARGO_BIN_EXE_jumpclust"))
                        .env_remove("SEED")
                        .args([
                            cmd,
                            "--plan",
                            plans.join(plan).to_str().unwrap(),
                            "--replications",
                            "40",
                        ])
                        .args(["--records", "--format", format, "--workers", w])
                        .output()
                        .unwrap();
                    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
                    o.stdout
                })
                .collect();
            let same = outs.iter().all(|o| o == &outs[0]) && !outs[0].is_empty();
            pass &= same;
            parts.push(format!(
                "{cmd}/{format} {}",
                if same { "identical" } else { "differs" }
            ));
        }
    }
    outcome(pass, parts.join(", "))
}

fn full_table() -> Outcome {
    let plan = level_plan(&FULL_NS, FULL_R, SEED + 4, vec![TestKind::Cluster]);
    let r = run_level_study(&plan, 0).unwrap();
    let mut pass = true;
    let mut parts = Vec::new();
    for (c, want) in r.cells.iter().zip(FULL_LEVELS) {
        let got = c.cluster.unwrap().rejection_rate;
        pass &= (got - want).abs() <= FULL_TOL;
        parts.push(format!("n={} {got:.4} (want {want})", c.model.n));
    }
    outcome(pass, parts.join(", "))
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().collect();
    if args.iter().any(|a| a == "--list") {
        return ExitCode::SUCCESS;
    }
    let full = args.iter().any(|a| a == "--full");

    let mut results: Vec<(&str, Outcome)> = vec![
        ("1", criterion_1()),
        ("2", criterion_2()),
        ("3", criterion_3()),
    ];
    let [c4, c5, c9a] = criteria_4_5_9a();
    results.push(("4", c4));
    if full {
        results.push(("4 (full table)", full_table()));
    }
    results.push(("5", c5));
    results.push(("6", criterion_6()));
    let [c7, c8] = criteria_7_8();
    results.push(("7", c7));
    results.push(("8", c8));
    results.push(("9 (n=500 level)", c9a));
    results.push(("9 (n=5e4 ratio)", criterion_9b()));
    results.push(("10", criterion_10()));
    results.push(("11", criterion_11()));
    results.push(("12", criterion_12()));

    let mut failed = 0;
    for (name, o) in &results {
        println!(
            "{} criterion {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
        failed += usize::from(!o.pass);
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        results.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

//! One line per acceptance criterion. Runs without the libtest harness so the
//! lines are always printed.

use std::time::Instant;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use starspec::config::{GraphSpec, MeshSpec, ProblemSpec};
use starspec::core::{count_below, solve_lowest, SolverOptions, SparseSymMatrix};
use starspec::experiments::*;
use starspec::report::ExperimentReport;
use starspec::Result;

struct Outcome {
    passed: bool,
    detail: String,
    reports: Vec<ExperimentReport>,
}

fn flags_pass(reports: &[ExperimentReport]) -> (bool, String) {
    let failed: Vec<String> = reports
        .iter()
        .flat_map(|r| {
            r.failed_flags()
                .into_iter()
                .map(move |f| format!("{}/{} = {:e}", r.name, f.name, f.value))
        })
        .collect();
    let total: usize = reports.iter().map(|r| r.flags.len()).sum();
    if failed.is_empty() {
        (true, format!("{total} flags"))
    } else {
        (false, failed.join(", "))
    }
}

fn by_flags(reports: Vec<ExperimentReport>) -> Outcome {
    let (passed, detail) = flags_pass(&reports);
    Outcome {
        passed,
        detail,
        reports,
    }
}

fn summary_usize(r: &ExperimentReport, key: &str) -> Vec<usize> {
    match r.summary.get(key) {
        Some(serde_json::Value::Array(a)) => a.iter().map(|v| v.as_u64().unwrap_or(u64::MAX) as usize).collect(),
        Some(v) => vec![v.as_u64().unwrap_or(u64::MAX) as usize],
        None => vec![],
    }
}

fn c1_delta_prime_1d() -> Result<Outcome> {
    Ok(by_flags(vec![delta_prime_1d_study(&DeltaPrime1dConfig::default())?]))
}

fn c2_repulsive() -> Result<Outcome> {
    Ok(by_flags(vec![repulsive_study(&RepulsiveConfig::default())?]))
}

fn c3_line_and_half_line() -> Result<Outcome> {
    let mut reports = Vec::new();
    let mut counts = Vec::new();
    for graph in [GraphSpec::Line, GraphSpec::HalfLine] {
        let cfg = SolveConfig {
            problem: ProblemSpec::Star { graph, alpha: -1.0 },
            mesh: MeshSpec::new(16.0, 0.02, 1.0),
            k: 2,
            threshold: Some(-4.0),
            ..SolveConfig::default()
        };
        let r = solve_report(&cfg)?;
        counts.extend(summary_usize(&r, "count_below"));
        reports.push(r);
    }
    let (ok, detail) = flags_pass(&reports);
    Ok(Outcome {
        passed: ok && counts == [0, 0],
        detail: format!("counts below -4 {counts:?}, {detail}"),
        reports,
    })
}

fn c4_non_empty() -> Result<Outcome> {
    let mut reports = Vec::new();
    let mut counts = Vec::new();
    for theta in [0.2, 0.3, 0.45] {
        let r = threshold_study(&ThresholdConfig {
            graph: GraphSpec::BrokenLine { theta },
            ..ThresholdConfig::default()
        })?;
        counts.push(summary_usize(&r, "counts"));
        reports.push(r);
    }
    let (ok, detail) = flags_pass(&reports);
    let nonempty = counts.iter().all(|c| c.last().is_some_and(|&n| n >= 1));
    Ok(Outcome {
        passed: ok && nonempty,
        detail: format!("counts per R {counts:?}, {detail}"),
        reports,
    })
}

fn c5_scaling() -> Result<Outcome> {
    Ok(by_flags(vec![scale_study(&ScaleConfig::default())?]))
}

fn c6_comparison() -> Result<Outcome> {
    Ok(by_flags(vec![comparison_suite(&ComparisonConfig::default())?]))
}

fn c7_parity() -> Result<Outcome> {
    Ok(by_flags(vec![parity_study(&ParityConfig::default())?]))
}

fn c8_monotonicity() -> Result<Outcome> {
    Ok(by_flags(vec![monotonicity_study(&MonotonicityConfig::default())?]))
}

fn c9_small_angle() -> Result<Outcome> {
    let full = asymptotics_study(&AsymptoticsConfig::preset(Preset::Full))?;
    let mut reduced = asymptotics_study(&AsymptoticsConfig::preset(Preset::Reduced))?;
    reduced.name = "asymptotics_reduced".into();
    Ok(by_flags(vec![full, reduced]))
}

fn c10_weyl() -> Result<Outcome> {
    Ok(by_flags(vec![weyl_study(&WeylConfig::default())?]))
}

fn c11_oracle() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst: f64 = 0.0;
    let mut count_mismatches = 0;
    for _ in 0..50 {
        let n = rng.gen_range(3..=200);
        let mut ta = Vec::new();
        let mut tm = Vec::new();
        for i in 0..n {
            ta.push((i, i, rng.gen_range(-5.0..5.0)));
            tm.push((i, i, rng.gen_range(1.5..2.5)));
            if i + 1 < n {
                let (v, w) = (rng.gen_range(-1.0..1.0), rng.gen_range(-0.2..0.2));
                ta.extend([(i, i + 1, v), (i + 1, i, v)]);
                tm.extend([(i, i + 1, w), (i + 1, i, w)]);
            }
            let j = rng.gen_range(0..n);
            if j != i {
                let v = rng.gen_range(-1.0..1.0);
                ta.extend([(i, j, v), (j, i, v)]);
            }
        }
        let a = SparseSymMatrix::from_triplets(n, &ta)?;
        let m = SparseSymMatrix::from_triplets(n, &tm)?;
        let dense = |t: &[(usize, usize, f64)]| {
            let mut d = DMatrix::<f64>::zeros(n, n);
            for &(i, j, v) in t {
                d[(i, j)] += v;
            }
            d
        };
        let li = dense(&tm)
            .cholesky()
            .expect("SPD")
            .l()
            .try_inverse()
            .expect("invertible");
        let c = &li * dense(&ta) * li.transpose();
        let mut want: Vec<f64> = SymmetricEigen::new((&c + c.transpose()) * 0.5)
            .eigenvalues
            .iter()
            .copied()
            .collect();
        want.sort_by(f64::total_cmp);

        let k = rng.gen_range(1..=6.min(n));
        let got = solve_lowest(&a, &m, &SolverOptions::with_k(k))?;
        for (g, w) in got.eigenvalues.iter().zip(&want) {
            worst = worst.max((g - w).abs() / w.abs().max(1.0));
        }
        let j = rng.gen_range(0..n - 1);
        if want[j + 1] - want[j] > 1e-6 && count_below(&a, &m, 0.5 * (want[j] + want[j + 1]))? != j + 1 {
            count_mismatches += 1;
        }
    }
    Ok(Outcome {
        passed: worst <= 1e-9 && count_mismatches == 0,
        detail: format!("worst relative eigenvalue error {worst:.2e}, count mismatches {count_mismatches}"),
        reports: vec![],
    })
}

type Criterion = (&'static str, fn() -> Result<Outcome>);

const CRITERIA: [Criterion; 11] = [
    ("1  1D ground state", c1_delta_prime_1d),
    ("2  repulsive coupling", c2_repulsive),
    ("3  line and half-line empty", c3_line_and_half_line),
    ("4  broken line non-empty", c4_non_empty),
    ("5  scaling laws", c5_scaling),
    ("6  comparison inequalities", c6_comparison),
    ("7  parity split", c7_parity),
    ("8  monotonicity and fold", c8_monotonicity),
    ("9  small-angle law", c9_small_angle),
    ("10 Weyl quotients", c10_weyl),
    ("11 eigensolver oracle", c11_oracle),
];

fn main() {
    let mut all = true;
    let mut first_csv: Vec<Vec<String>> = Vec::new();
    for (name, run) in CRITERIA {
        let start = Instant::now();
        let (passed, detail, csv) = match run() {
            Ok(o) => (
                o.passed,
                o.detail,
                o.reports.iter().map(|r| r.to_csv()).collect::<Result<Vec<_>>>(),
            ),
            Err(e) => (false, format!("error: {e}"), Ok(vec![])),
        };
        let csv = csv.unwrap_or_default();
        all &= passed;
        println!(
            "criterion {name}: {} ({detail}) [{:.1}s]",
            if passed { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
        first_csv.push(csv);
    }

    // Same experiments again on a two-thread pool: the CSV text must not change.
    let start = Instant::now();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(2)
        .build()
        .expect("thread pool");
    let mut differing = Vec::new();
    let mut compared = 0;
    for ((name, run), before) in CRITERIA.iter().zip(&first_csv) {
        let again = pool
            .install(run)
            .and_then(|o| o.reports.iter().map(|r| r.to_csv()).collect::<Result<Vec<_>>>());
        match again {
            Ok(csv) if csv == *before => compared += csv.len(),
            _ => differing.push(name.trim()),
        }
    }
    let deterministic = differing.is_empty();
    all &= deterministic;
    println!(
        "criterion 12 determinism: {} ({compared} CSV files identical on rerun{}) [{:.1}s]",
        if deterministic { "PASS" } else { "FAIL" },
        if deterministic {
            String::new()
        } else {
            format!("; differing: {}", differing.join(", "))
        },
        start.elapsed().as_secs_f64()
    );
    if !all {
        std::process::exit(1);
    }
}

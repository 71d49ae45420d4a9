//! Acceptance checks: one PASS/FAIL line per criterion. Exits non-zero when
//! any criterion fails.

use std::path::Path;
use std::process::Command;
use std::time::Instant;

use nalgebra::DMatrix;
use ndarray::{s, Array2};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use reliability_core::assoc::{
    coefficient_w, empirical_copula_sigma, ksg_mutual_information, r_squared,
    schweizer_wolff_sigma, squared_correlation, table1_battery, BatteryConfig, CoefficientName,
};
use reliability_core::experiment::ScoreSet;
use reliability_core::experiment::{
    run_replication_conditions, AggregateTable, ExperimentConfig, LatentTransform, Metric,
    ReplicationResult, TransformSelection,
};
use reliability_core::model::{sample_latents, LatentSpec};
use reliability_core::par;
use reliability_core::smoother::SmootherConfig;

use CoefficientName::*;

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(failures: Vec<String>, summary: String) -> Self {
        if failures.is_empty() {
            Self {
                pass: true,
                detail: summary,
            }
        } else {
            Self {
                pass: false,
                detail: format!("{summary}; {}", failures.join("; ")),
            }
        }
    }
}

fn gaussian(n: usize, cov: &[f64], seed: u64) -> Array2<f64> {
    let d = (cov.len() as f64).sqrt() as usize;
    let spec = LatentSpec::new(vec![0.0; d], DMatrix::from_row_slice(d, d, cov)).unwrap();
    sample_latents(n, &spec, seed)
}

fn gaussian_concordance() -> Outcome {
    let start = Instant::now();
    let x = gaussian(20_000, &[1.0, 0.5, 0.5, 1.0], 101);
    let (u, v) = (x.column(0).to_vec(), x.column(1).to_vec());
    let smoother = SmootherConfig::default();
    let estimates = [
        ("Corr2", squared_correlation(&u, &v).unwrap()),
        ("Sigma", schweizer_wolff_sigma(&u, &v).unwrap().rescaled),
        (
            "MI",
            ksg_mutual_information(x.slice(s![.., 0..1]), x.slice(s![.., 1..2]), 5, 7)
                .unwrap()
                .rescaled,
        ),
        (
            "r2(u|v)",
            r_squared(&u, x.slice(s![.., 1..2]), &smoother).unwrap(),
        ),
        (
            "r2(v|u)",
            r_squared(&v, x.slice(s![.., 0..1]), &smoother).unwrap(),
        ),
    ];
    let elapsed = start.elapsed().as_secs_f64();
    let mut failures: Vec<String> = estimates
        .iter()
        .filter(|(_, v)| (v - 0.25).abs() > 0.03)
        .map(|(n, v)| format!("{n}={v:.4} outside 0.25±0.03"))
        .collect();
    if elapsed >= 30.0 {
        failures.push(format!("took {elapsed:.1}s"));
    }
    let summary = estimates
        .iter()
        .map(|(n, v)| format!("{n}={v:.4}"))
        .collect::<Vec<_>>()
        .join(" ");
    Outcome::new(failures, format!("{summary} ({elapsed:.1}s)"))
}

fn limits() -> Outcome {
    let config = BatteryConfig::default();
    let mut failures = Vec::new();
    let independent = ScoreSet::new(
        sample_latents(5000, &LatentSpec::default(), 201),
        sample_latents(5000, &LatentSpec::default(), 202),
        LatentTransform::Raw,
    )
    .unwrap();
    let low = table1_battery(&independent, &config).unwrap();
    let latent = sample_latents(2000, &LatentSpec::default(), 203);
    let identical = ScoreSet::new(latent.clone(), latent, LatentTransform::Raw).unwrap();
    let high = table1_battery(&identical, &config).unwrap();
    for e in &low {
        if e.value > 0.05 {
            failures.push(format!("independent {}={:.4}", e.name, e.value));
        }
    }
    for e in &high {
        if e.value < 0.95 {
            failures.push(format!("identical {}={:.4}", e.name, e.value));
        }
    }
    let max_low = low.iter().map(|e| e.value).fold(f64::MIN, f64::max);
    let min_high = high.iter().map(|e| e.value).fold(f64::MAX, f64::min);
    Outcome::new(
        failures,
        format!("max independent {max_low:.4}, min identical {min_high:.4}"),
    )
}

/// Desk-scale sweep keeping per-replication results.
struct Sweep {
    results: Vec<ReplicationResult>,
    table: AggregateTable,
    seconds: f64,
}

fn desk_sweep() -> Sweep {
    let config = ExperimentConfig {
        m_grid: vec![6, 24, 60],
        replications: 20,
        n_mc: 1000,
        latent_transform: TransformSelection::Both,
        ..ExperimentConfig::default()
    };
    let start = Instant::now();
    let units: Vec<(usize, usize)> = config
        .m_grid
        .iter()
        .flat_map(|&m| (0..config.replications).map(move |r| (m, r)))
        .collect();
    let conditions = config.latent_transform.conditions();
    let results: Vec<ReplicationResult> = par::map_slice(&units, |&(m, rep)| {
        run_replication_conditions(m, rep, &config, &conditions).expect("replication succeeds")
    })
    .into_iter()
    .flatten()
    .collect();
    let table = AggregateTable::from_results(&results, Vec::new());
    Sweep {
        results,
        table,
        seconds: start.elapsed().as_secs_f64(),
    }
}

fn mean(sweep: &Sweep, m: usize, cond: LatentTransform, name: CoefficientName) -> f64 {
    sweep
        .table
        .mean(m, cond, Metric::Coefficient(name))
        .expect("cell present")
}

fn invariance(sweep: &Sweep) -> Outcome {
    let mut failures = Vec::new();
    let mut pairs = 0;
    for raw in sweep
        .results
        .iter()
        .filter(|r| r.condition == LatentTransform::Raw)
    {
        let pct = sweep
            .results
            .iter()
            .find(|p| {
                p.condition == LatentTransform::Percentile && p.m == raw.m && p.rep == raw.rep
            })
            .expect("paired percentile result");
        for name in [Sigma, TPredict] {
            let (a, b) = (raw.value(name).unwrap(), pct.value(name).unwrap());
            if a.to_bits() != b.to_bits() {
                failures.push(format!("m={} rep={} {name}: {a} vs {b}", raw.m, raw.rep));
            }
        }
        pairs += 1;
    }
    let mut gaps = Vec::new();
    for name in [R2Measure, TMeasure, MI, WMeasure] {
        let gap = (mean(sweep, 24, LatentTransform::Raw, name)
            - mean(sweep, 24, LatentTransform::Percentile, name))
        .abs();
        if gap > 0.03 {
            failures.push(format!("m=24 {name} differs by {gap:.4}"));
        }
        gaps.push(format!("{name} {gap:.4}"));
    }
    Outcome::new(
        failures,
        format!(
            "Sigma/T_predict bit-identical over {pairs} pairs; m=24 gaps: {}",
            gaps.join(", ")
        ),
    )
}

fn ordering(sweep: &Sweep) -> Outcome {
    const TOL: f64 = 0.02;
    let mut failures = Vec::new();
    for cond in [LatentTransform::Raw, LatentTransform::Percentile] {
        for m in [6, 24, 60] {
            let v = |n| mean(sweep, m, cond, n);
            let tag = format!("{} m={m}", cond.as_str());
            if v(R2Measure) < v(R2Predict) - TOL {
                failures.push(format!(
                    "{tag}: R2_measure {:.4} < R2_predict {:.4}",
                    v(R2Measure),
                    v(R2Predict)
                ));
            }
            let top = [MI, WMeasure, WPredict].map(v);
            let middle = [R2Measure, R2Predict, Corr2, Sigma].map(v);
            let bottom = [TMeasure, TPredict].map(v);
            let min = |a: &[f64]| a.iter().copied().fold(f64::MAX, f64::min);
            let max = |a: &[f64]| a.iter().copied().fold(f64::MIN, f64::max);
            if min(&top) < max(&middle) - TOL {
                failures.push(format!(
                    "{tag}: multivariate group {:.4} below scalar group {:.4}",
                    min(&top),
                    max(&middle)
                ));
            }
            if min(&middle) < max(&bottom) - TOL {
                failures.push(format!(
                    "{tag}: scalar group {:.4} below T group {:.4}",
                    min(&middle),
                    max(&bottom)
                ));
            }
            if v(WMeasure) < v(WPredict) - TOL || v(WPredict) < v(MI) - TOL {
                failures.push(format!(
                    "{tag}: W_measure {:.4}, W_predict {:.4}, MI {:.4} out of order",
                    v(WMeasure),
                    v(WPredict),
                    v(MI)
                ));
            }
        }
    }
    let minutes = sweep.seconds / 60.0;
    if minutes >= 20.0 {
        failures.push(format!("sweep took {minutes:.1} min"));
    }
    Outcome::new(
        failures,
        format!("3 test lengths x 2 conditions, sweep {:.1}s", sweep.seconds),
    )
}

fn envelopes(sweep: &Sweep) -> Outcome {
    let groups: [(&str, Vec<Metric>, f64, f64); 5] = [
        (
            "rho2 group",
            [R2Measure, R2Predict, Corr2, Sigma]
                .map(Metric::Coefficient)
                .to_vec(),
            0.35,
            0.95,
        ),
        (
            "T group",
            [TMeasure, TPredict].map(Metric::Coefficient).to_vec(),
            0.18,
            0.78,
        ),
        (
            "multivariate group",
            [MI, WMeasure, WPredict].map(Metric::Coefficient).to_vec(),
            0.50,
            1.00,
        ),
        ("RRMSE", vec![Metric::Rrmse], 0.24, 0.84),
        ("RAE", vec![Metric::Rae], 0.03, 0.52),
    ];
    let mut failures = Vec::new();
    let mut ranges = Vec::new();
    for (label, metrics, lo, hi) in groups {
        let mut seen = (f64::MAX, f64::MIN);
        for cond in [LatentTransform::Raw, LatentTransform::Percentile] {
            for m in [6, 60] {
                for &metric in &metrics {
                    let v = sweep.table.mean(m, cond, metric).unwrap();
                    seen = (seen.0.min(v), seen.1.max(v));
                    if !(lo..=hi).contains(&v) {
                        failures.push(format!(
                            "{} m={m} {metric}={v:.4} outside [{lo}, {hi}]",
                            cond.as_str()
                        ));
                    }
                }
            }
        }
        ranges.push(format!("{label} {:.3}..{:.3}", seen.0, seen.1));
    }
    Outcome::new(failures, ranges.join(", "))
}

fn monotonicity(sweep: &Sweep) -> Outcome {
    let mut failures = Vec::new();
    let mut violations = 0;
    for cond in [LatentTransform::Raw, LatentTransform::Percentile] {
        for metric in Metric::all() {
            let sign = if matches!(metric, Metric::Rrmse | Metric::Rae) {
                -1.0
            } else {
                1.0
            };
            let series: Vec<f64> = [6, 24, 60]
                .iter()
                .map(|&m| sweep.table.mean(m, cond, metric).unwrap())
                .collect();
            let drops: Vec<f64> = series
                .windows(2)
                .map(|w| sign * (w[0] - w[1]))
                .filter(|&d| d > 0.0)
                .collect();
            violations += drops.len();
            if drops.len() > 1 || drops.iter().any(|&d| d > 0.01) {
                failures.push(format!("{} {metric}: {series:.4?}", cond.as_str()));
            }
        }
    }
    Outcome::new(
        failures,
        format!("{violations} adjacent-pair violations across 22 series"),
    )
}

/// Copula double sum evaluated cell by cell.
fn enumerated_sigma(ranks: &[(usize, usize)]) -> f64 {
    let n = ranks.len() as i64;
    let mut total = 0i64;
    for i in 1..=n {
        for j in 1..=n {
            let count = ranks
                .iter()
                .filter(|&&(a, b)| a as i64 <= i && b as i64 <= j)
                .count() as i64;
            total += (n * count - i * j).abs();
        }
    }
    12.0 * total as f64 / ((n * n) as f64 * (n * n - 1) as f64)
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let inner: f64 = (1..n)
        .map(|i| f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 })
        .sum();
    h / 3.0 * (f(a) + f(b) + inner)
}

fn oracles() -> Outcome {
    let mut failures = Vec::new();

    let cases: [[(usize, usize); 4]; 3] = [
        [(1, 1), (2, 2), (3, 3), (4, 4)],
        [(1, 2), (2, 1), (3, 4), (4, 3)],
        [(1, 3), (2, 1), (3, 4), (4, 2)],
    ];
    for ranks in cases {
        let u: Vec<f64> = ranks.iter().map(|r| r.0 as f64).collect();
        let v: Vec<f64> = ranks.iter().map(|r| r.1 as f64).collect();
        let (got, want) = (
            empirical_copula_sigma(&u, &v).unwrap().raw,
            enumerated_sigma(&ranks),
        );
        if got != want {
            failures.push(format!("sigma {ranks:?}: {got} vs {want}"));
        }
    }

    #[rustfmt::skip]
    let cov = [
        1.0, 0.4, 0.6, 0.2,
        0.4, 1.0, 0.1, 0.5,
        0.6, 0.1, 1.0, 0.3,
        0.2, 0.5, 0.3, 1.0,
    ];
    let sigma = DMatrix::from_row_slice(4, 4, &cov);
    let suu = sigma.view((0, 0), (2, 2)).into_owned();
    let sux = sigma.view((0, 2), (2, 2)).into_owned();
    let sxx = sigma.view((2, 2), (2, 2)).into_owned();
    let conditional = &suu - &sux * sxx.try_inverse().unwrap() * sux.transpose();
    let w_oracle = 1.0 - conditional.determinant() / suu.determinant();
    let data = gaussian(5000, &cov, 301);
    let w = coefficient_w(
        data.slice(s![.., 0..2]),
        data.slice(s![.., 2..4]),
        &SmootherConfig::default(),
    )
    .unwrap();
    if (w - w_oracle).abs() > 0.03 {
        failures.push(format!("W {w:.4} vs {w_oracle:.4}"));
    }

    let mean = simpson(|x| (3.0 * x).sin(), -2.0, 2.0, 10_000) / 4.0;
    let second = simpson(|x| (3.0 * x).sin().powi(2), -2.0, 2.0, 10_000) / 4.0;
    let signal = second - mean * mean;
    let r2_oracle = signal / (signal + 0.01);
    let mut rng = ChaCha8Rng::seed_from_u64(302);
    let noise = Normal::new(0.0, 0.1).unwrap();
    let x: Vec<f64> = (0..2000).map(|_| rng.random_range(-2.0..2.0)).collect();
    let u: Vec<f64> = x
        .iter()
        .map(|&x| (3.0 * x).sin() + noise.sample(&mut rng))
        .collect();
    let x = Array2::from_shape_vec((2000, 1), x).unwrap();
    let r2 = r_squared(&u, x.view(), &SmootherConfig::local_linear(0.1)).unwrap();
    if (r2 - r2_oracle).abs() > 0.03 {
        failures.push(format!("sin(3x) R2 {r2:.4} vs {r2_oracle:.4}"));
    }
    Outcome::new(
        failures,
        format!("sigma n=4 exact; W {w:.4} vs {w_oracle:.4}; sin(3x) R2 {r2:.4} vs {r2_oracle:.4}"),
    )
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    std::fs::write(
        root.join("config.json"),
        r#"{"m_grid": [6, 12, 18], "n_mc": 300, "replications": 3, "master_seed": 17}"#,
    )
    .unwrap();
    let run = |config: &str, out: &str, workers: &str| {
        let status = Command::new(env!("CARGO_BIN_EXE_reliability"))
            .args([
                "experiment",
                "--config",
                config,
                "--out",
                out,
                "--workers",
                workers,
            ])
            .current_dir(root)
            .stderr(std::process::Stdio::null())
            .status()
            .unwrap();
        assert!(status.success(), "experiment run failed");
    };
    run("config.json", "first", "2");
    run("first/manifest.json", "second", "1");
    run("first/manifest.json", "third", "3");
    let read = |p: &Path| std::fs::read(root.join(p)).unwrap();
    let mut failures = Vec::new();
    for file in ["aggregate.csv", "figure.svg"] {
        let reference = read(&Path::new("first").join(file));
        for other in ["second", "third"] {
            if read(&Path::new(other).join(file)) != reference {
                failures.push(format!("{other}/{file} differs"));
            }
        }
    }
    Outcome::new(
        failures,
        "aggregate.csv and figure.svg identical across 3 runs".into(),
    )
}

fn main() {
    let mut all_pass = true;
    let mut report = |n: usize, name: &str, outcome: Outcome| {
        all_pass &= outcome.pass;
        println!(
            "{} criterion {n} ({name}): {}",
            if outcome.pass { "PASS" } else { "FAIL" },
            outcome.detail
        );
    };
    report(1, "Gaussian concordance", gaussian_concordance());
    report(2, "independence and perfect-dependence limits", limits());
    let sweep = desk_sweep();
    report(3, "invariance", invariance(&sweep));
    report(4, "ordering laws", ordering(&sweep));
    report(5, "envelopes", envelopes(&sweep));
    report(6, "monotonicity", monotonicity(&sweep));
    report(7, "brute-force oracles", oracles());
    report(8, "determinism", determinism());
    if !all_pass {
        std::process::exit(1);
    }
}

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use ndarray::Array2;
use reliability_core::assoc::{table1_battery, BatteryConfig, ReliabilityEstimate};
use reliability_core::experiment::{
    run_sweep, simulate_replication, AggregateTable, ExperimentConfig, LatentTransform,
    ProgressEvent, ScoreSet,
};
use reliability_core::io::{fmt_real, write_item_bank, write_sample};
use reliability_core::model::{draw_item_bank, MonteCarloSample};
use reliability_core::rng::{stream_seed, Purpose};

use crate::error::{CliError, CliResult};
use crate::figure;
use crate::manifest::RunManifest;

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::io(path, e))
}

fn ensure_dir(dir: &Path) -> CliResult<()> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

fn estimation(e: reliability_core::Error) -> CliError {
    CliError::Estimation(e.to_string())
}

/// Core errors that arise from bad input files rather than failed estimation.
fn input(path: &Path, e: reliability_core::Error) -> CliError {
    CliError::Config(format!("{}: {e}", path.display()))
}

pub fn simulate(
    config: &ExperimentConfig,
    m: Option<usize>,
    n: Option<usize>,
    out: &Path,
) -> CliResult<()> {
    let mut config = config.clone();
    if let Some(m) = m {
        config.m_grid = vec![m];
    }
    if let Some(n) = n {
        config.n_mc = n;
    }
    config
        .validate()
        .map_err(|e| CliError::Config(e.to_string()))?;
    ensure_dir(out)?;
    let mut manifest = RunManifest::start("simulate", &config);

    for &m in &config.m_grid {
        let sim = simulate_replication(m, 0, &config).map_err(estimation)?;
        let bank = draw_item_bank(m, stream_seed(config.master_seed, m, 0, Purpose::Items))
            .map_err(estimation)?;

        let items = out.join(format!("items_m{m}.csv"));
        write_item_bank(create(&items)?, &bank).map_err(|e| CliError::io(&items, e))?;
        manifest.outputs.push(items);

        let sample_path = out.join(format!("sample_m{m}.csv"));
        let sample = MonteCarloSample::new(sim.eta.clone(), sim.y.clone()).map_err(estimation)?;
        write_sample(create(&sample_path)?, &sample).map_err(|e| CliError::io(&sample_path, e))?;
        manifest.outputs.push(sample_path);

        for condition in config.latent_transform.conditions() {
            let scores =
                ScoreSet::from_latents(sim.eap.clone(), &sim.eta, &config.latent, condition)
                    .map_err(estimation)?;
            let path = out.join(format!("scores_m{m}_{}.csv", condition.as_str()));
            write_scores(&path, &scores)?;
            manifest.outputs.push(path);
        }
        log::info!("simulated m={m}, n={}", config.n_mc);
    }
    manifest.finish(out)?;
    Ok(())
}

pub const SCORE_COLUMNS: [&str; 4] = ["observed_1", "observed_2", "latent_1", "latent_2"];

pub fn write_scores(path: &Path, scores: &ScoreSet) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    let io = |e: csv::Error| CliError::io(path, e);
    w.write_record(SCORE_COLUMNS).map_err(io)?;
    for (s, xi) in scores.observed.rows().into_iter().zip(scores.latent.rows()) {
        let row: Vec<String> = s.iter().chain(xi.iter()).map(|&v| fmt_real(v)).collect();
        w.write_record(&row).map_err(io)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn read_scores(path: &Path, transform: LatentTransform) -> CliResult<ScoreSet> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut r = csv::Reader::from_reader(file);
    let headers = r.headers().map_err(|e| CliError::io(path, e))?.clone();
    let mut idx = [0usize; 4];
    let mut missing = Vec::new();
    for (slot, name) in idx.iter_mut().zip(SCORE_COLUMNS) {
        match headers.iter().position(|h| h.trim() == name) {
            Some(i) => *slot = i,
            None => missing.push(name),
        }
    }
    if !missing.is_empty() {
        return Err(CliError::Config(format!(
            "{}: missing score columns: {}",
            path.display(),
            missing.join(", ")
        )));
    }
    let mut observed = Vec::new();
    let mut latent = Vec::new();
    for (line, record) in r.records().enumerate() {
        let record = record.map_err(|e| CliError::io(path, e))?;
        for (k, &i) in idx.iter().enumerate() {
            let field = record.get(i).unwrap_or("");
            let v: f64 = field.trim().parse().map_err(|_| {
                CliError::Config(format!(
                    "{}: row {}: column {} is not a number: {field:?}",
                    path.display(),
                    line + 2,
                    SCORE_COLUMNS[k]
                ))
            })?;
            if k < 2 {
                observed.push(v)
            } else {
                latent.push(v)
            }
        }
    }
    let n = observed.len() / 2;
    let observed = Array2::from_shape_vec((n, 2), observed).expect("two columns");
    let latent = Array2::from_shape_vec((n, 2), latent).expect("two columns");
    ScoreSet::new(observed, latent, transform).map_err(|e| input(path, e))
}

pub struct EstimateArgs<'a> {
    pub scores: Option<&'a Path>,
    pub m: Option<usize>,
    pub rep: usize,
    pub out: &'a Path,
}

pub fn estimate(config: &ExperimentConfig, args: EstimateArgs<'_>) -> CliResult<()> {
    let conditions = config.latent_transform.conditions();
    let mut config = config.clone();
    let mut rows: Vec<(LatentTransform, Vec<ReliabilityEstimate>)> = Vec::new();

    match args.scores {
        Some(path) => {
            let [condition] = conditions[..] else {
                return Err(CliError::Config(
                    "--transform must be raw or percentile when estimating from a scores file"
                        .into(),
                ));
            };
            let scores = read_scores(path, condition)?;
            let battery = BatteryConfig {
                smoother: config.smoother,
                mi_k: config.mi_k,
                seed: stream_seed(config.master_seed, 0, 0, Purpose::Estimators),
            };
            let estimates = table1_battery(&scores, &battery).map_err(estimation)?;
            rows.push((condition, estimates));
        }
        None => {
            if let Some(m) = args.m {
                config.m_grid = vec![m];
            }
            config
                .validate()
                .map_err(|e| CliError::Config(e.to_string()))?;
            let [m] = config.m_grid[..] else {
                return Err(CliError::Config(
                    "m_grid must hold a single test length for estimate (or pass --m)".into(),
                ));
            };
            let sim = simulate_replication(m, args.rep, &config).map_err(estimation)?;
            let battery = config.battery(m, args.rep);
            for condition in conditions {
                let scores =
                    ScoreSet::from_latents(sim.eap.clone(), &sim.eta, &config.latent, condition)
                        .map_err(estimation)?;
                rows.push((
                    condition,
                    table1_battery(&scores, &battery).map_err(estimation)?,
                ));
            }
        }
    }

    ensure_dir(args.out)?;
    let mut manifest = RunManifest::start("estimate", &config);
    let path = args.out.join("battery.csv");
    let mut w = csv::Writer::from_writer(create(&path)?);
    let io = |e: csv::Error| CliError::io(&path, e);
    w.write_record(["name", "raw", "clamped", "direction", "condition"])
        .map_err(io)?;
    for (condition, estimates) in &rows {
        for e in estimates {
            w.write_record([
                e.name.as_str(),
                &fmt_real(e.value),
                &fmt_real(e.clamped()),
                e.direction().as_str(),
                condition.as_str(),
            ])
            .map_err(io)?;
        }
    }
    w.flush().map_err(|e| CliError::io(&path, e))?;
    manifest.outputs.push(path);
    manifest.finish(args.out)?;
    Ok(())
}

pub const AGGREGATE_COLUMNS: [&str; 6] = ["m", "condition", "metric", "mean", "sd", "count"];

pub fn write_aggregate(path: &Path, table: &AggregateTable) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    let io = |e: csv::Error| CliError::io(path, e);
    w.write_record(AGGREGATE_COLUMNS).map_err(io)?;
    for (&(m, condition, metric), stats) in &table.cells {
        w.write_record([
            m.to_string(),
            condition.as_str().to_string(),
            metric.as_str().to_string(),
            fmt_real(stats.mean),
            stats.sd.map(fmt_real).unwrap_or_default(),
            stats.count.to_string(),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn experiment(config: &ExperimentConfig, out: &Path) -> CliResult<()> {
    ensure_dir(out)?;
    let mut manifest = RunManifest::start("experiment", config);
    let table = run_sweep(config, |event| match event {
        ProgressEvent::Started { units } => eprintln!("running {units} replication units"),
        ProgressEvent::Finished {
            m,
            rep,
            done,
            units,
        } => {
            eprintln!("[{done}/{units}] m={m} rep={rep} done")
        }
        ProgressEvent::Failed {
            m,
            rep,
            done,
            units,
            message,
        } => eprintln!("[{done}/{units}] m={m} rep={rep} failed: {message}"),
    })
    .map_err(estimation)?;

    let aggregate = out.join("aggregate.csv");
    write_aggregate(&aggregate, &table)?;
    let svg = out.join("figure.svg");
    figure::render_file(&aggregate, &svg)?;
    manifest.outputs = vec![aggregate, svg];
    manifest.failures = table
        .failures
        .iter()
        .map(|f| format!("m={} rep={}: {}", f.m, f.rep, f.message))
        .collect();
    manifest.finish(out)?;
    Ok(())
}

pub fn figure(aggregate: &Path, svg: Option<PathBuf>, out: &Path) -> CliResult<()> {
    let svg = match svg {
        Some(p) => p,
        None => {
            ensure_dir(out)?;
            out.join("figure.svg")
        }
    };
    figure::render_file(aggregate, &svg)
}

//! The test-length sweep: item-bank replications at each test length,
//! EAP scoring, the coefficient battery under raw and percentile-rank latent
//! scores, and aggregation over replications.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::{Duration, Instant};

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::assoc::{table1_battery, BatteryConfig, CoefficientName, ReliabilityEstimate};
use crate::benchmark::{benchmarks, BenchmarkResult};
use crate::error::{Error, Result};
use crate::model::{
    draw_item_bank, eap_scores, percentile_ranks_for, sample_latents, simulate_responses,
    LatentSpec, QuadratureGrid,
};
use crate::par;
use crate::rng::{stream_seed, Purpose};
use crate::smoother::SmootherConfig;

/// How latent scores are formed from the latent variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LatentTransform {
    /// The latent variables themselves.
    Raw,
    /// `100 * Phi(eta)` per latent variable.
    Percentile,
}

impl LatentTransform {
    pub fn as_str(self) -> &'static str {
        match self {
            LatentTransform::Raw => "raw",
            LatentTransform::Percentile => "percentile",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "raw" => Some(LatentTransform::Raw),
            "percentile" => Some(LatentTransform::Percentile),
            _ => None,
        }
    }
}

impl fmt::Display for LatentTransform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Which latent-score conditions a run evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TransformSelection {
    Raw,
    Percentile,
    Both,
}

impl TransformSelection {
    pub fn conditions(self) -> Vec<LatentTransform> {
        match self {
            TransformSelection::Raw => vec![LatentTransform::Raw],
            TransformSelection::Percentile => vec![LatentTransform::Percentile],
            TransformSelection::Both => vec![LatentTransform::Raw, LatentTransform::Percentile],
        }
    }
}

/// Observed (EAP) and latent score matrices for one condition.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreSet {
    pub observed: Array2<f64>,
    pub latent: Array2<f64>,
    pub transform: LatentTransform,
}

impl ScoreSet {
    pub fn new(
        observed: Array2<f64>,
        latent: Array2<f64>,
        transform: LatentTransform,
    ) -> Result<Self> {
        if observed.nrows() != latent.nrows() {
            return Err(Error::DimensionMismatch {
                what: "latent score rows",
                expected: observed.nrows(),
                got: latent.nrows(),
            });
        }
        for (what, m) in [
            ("observed score columns", &observed),
            ("latent score columns", &latent),
        ] {
            if !(1..=2).contains(&m.ncols()) {
                return Err(Error::DimensionMismatch {
                    what,
                    expected: 2,
                    got: m.ncols(),
                });
            }
        }
        Ok(Self {
            observed,
            latent,
            transform,
        })
    }

    /// Builds the score set from EAPs and latent draws, transforming the
    /// latent side as requested.
    pub fn from_latents(
        eap: Array2<f64>,
        eta: &Array2<f64>,
        spec: &LatentSpec,
        transform: LatentTransform,
    ) -> Result<Self> {
        let latent = match transform {
            LatentTransform::Raw => eta.clone(),
            LatentTransform::Percentile => percentile_ranks_for(eta, spec),
        };
        Self::new(eap, latent, transform)
    }

    pub fn n(&self) -> usize {
        self.observed.nrows()
    }
}

fn default_m_grid() -> Vec<usize> {
    (6..=120).step_by(6).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub m_grid: Vec<usize>,
    pub n_mc: usize,
    pub replications: usize,
    pub latent_transform: TransformSelection,
    pub master_seed: u64,
    pub smoother: SmootherConfig,
    pub mi_k: usize,
    pub latent: LatentSpec,
    pub quadrature_nodes: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            m_grid: default_m_grid(),
            n_mc: 1000,
            replications: 50,
            latent_transform: TransformSelection::Both,
            master_seed: 1,
            smoother: SmootherConfig::default(),
            mi_k: 5,
            latent: LatentSpec::default(),
            quadrature_nodes: QuadratureGrid::DEFAULT_NODES,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.m_grid.is_empty() {
            return Err(Error::invalid("m_grid must not be empty"));
        }
        if let Some(m) = self.m_grid.iter().find(|&&m| m < 2 || m % 2 != 0) {
            return Err(Error::invalid(format!(
                "m_grid entries must be even and at least 2, got {m}"
            )));
        }
        if self.n_mc < 100 {
            return Err(Error::invalid(format!(
                "n_mc must be at least 100, got {}",
                self.n_mc
            )));
        }
        if self.replications == 0 {
            return Err(Error::invalid("replications must be at least 1"));
        }
        if self.mi_k < 2 {
            return Err(Error::invalid(format!(
                "mi_k must be at least 2, got {}",
                self.mi_k
            )));
        }
        if self.latent.dim() != 2 {
            return Err(Error::invalid("latent must be two-dimensional"));
        }
        self.smoother.validate()?;
        self.grid().map(|_| ())
    }

    pub fn grid(&self) -> Result<QuadratureGrid> {
        QuadratureGrid::new(
            &self.latent,
            self.quadrature_nodes,
            -QuadratureGrid::DEFAULT_BOUND,
            QuadratureGrid::DEFAULT_BOUND,
        )
    }

    pub fn battery(&self, m: usize, rep: usize) -> BatteryConfig {
        BatteryConfig {
            smoother: self.smoother,
            mi_k: self.mi_k,
            seed: stream_seed(self.master_seed, m, rep, Purpose::Estimators),
        }
    }

    /// Correlation the RAE benchmark compares against.
    pub fn target_correlation(&self) -> f64 {
        self.latent.correlation(0, 1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplicationResult {
    pub m: usize,
    pub rep: usize,
    /// Seed of the replication's item-bank stream.
    pub seed: u64,
    pub condition: LatentTransform,
    pub estimates: Vec<ReliabilityEstimate>,
    pub benchmark: BenchmarkResult,
    pub wall_time: Duration,
}

impl ReplicationResult {
    pub fn value(&self, name: CoefficientName) -> Option<f64> {
        self.estimates
            .iter()
            .find(|e| e.name == name)
            .map(|e| e.value)
    }
}

/// One replication's simulated data and EAP scores.
#[derive(Debug, Clone)]
pub struct SimulatedReplication {
    pub eta: Array2<f64>,
    pub y: Array2<u8>,
    pub eap: Array2<f64>,
}

pub fn simulate_replication(
    m: usize,
    rep: usize,
    config: &ExperimentConfig,
) -> Result<SimulatedReplication> {
    let seed = |p| stream_seed(config.master_seed, m, rep, p);
    let bank = draw_item_bank(m, seed(Purpose::Items))?;
    let eta = sample_latents(config.n_mc, &config.latent, seed(Purpose::Latents));
    let y = simulate_responses(&eta, &bank, seed(Purpose::Responses))?;
    let eap = eap_scores(&y, &bank, &config.latent, &config.grid()?)?;
    Ok(SimulatedReplication { eta, y, eap })
}

/// Runs one replication under a single latent-score condition.
pub fn run_replication(
    m: usize,
    rep: usize,
    config: &ExperimentConfig,
    condition: LatentTransform,
) -> Result<ReplicationResult> {
    Ok(run_replication_conditions(m, rep, config, &[condition])?
        .pop()
        .expect("one condition"))
}

/// Runs one replication, evaluating every listed condition on the same
/// simulated data and estimator seeds.
pub fn run_replication_conditions(
    m: usize,
    rep: usize,
    config: &ExperimentConfig,
    conditions: &[LatentTransform],
) -> Result<Vec<ReplicationResult>> {
    let annotate = |e: Error| Error::Replication {
        m,
        rep,
        source: Box::new(e),
    };
    config.validate().map_err(annotate)?;
    let start = Instant::now();
    let sim = simulate_replication(m, rep, config).map_err(annotate)?;
    let benchmark =
        benchmarks(&sim.eap, &sim.eta, config.target_correlation()).map_err(annotate)?;
    let battery = config.battery(m, rep);
    let shared = start.elapsed();

    conditions
        .iter()
        .map(|&condition| {
            let t = Instant::now();
            let scores =
                ScoreSet::from_latents(sim.eap.clone(), &sim.eta, &config.latent, condition)
                    .map_err(annotate)?;
            let estimates = table1_battery(&scores, &battery).map_err(annotate)?;
            Ok(ReplicationResult {
                m,
                rep,
                seed: stream_seed(config.master_seed, m, rep, Purpose::Items),
                condition,
                estimates,
                benchmark,
                wall_time: shared + t.elapsed(),
            })
        })
        .collect()
}

/// A quantity aggregated over replications.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Metric {
    Coefficient(CoefficientName),
    Rrmse,
    Rae,
}

impl Metric {
    pub fn all() -> impl Iterator<Item = Metric> {
        CoefficientName::ALL
            .into_iter()
            .map(Metric::Coefficient)
            .chain([Metric::Rrmse, Metric::Rae])
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Coefficient(c) => c.as_str(),
            Metric::Rrmse => "RRMSE",
            Metric::Rae => "RAE",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "RRMSE" => Some(Metric::Rrmse),
            "RAE" => Some(Metric::Rae),
            _ => CoefficientName::parse(s).map(Metric::Coefficient),
        }
    }

    fn of(self, r: &ReplicationResult) -> f64 {
        match self {
            Metric::Coefficient(c) => r.value(c).unwrap_or(f64::NAN),
            Metric::Rrmse => r.benchmark.rrmse,
            Metric::Rae => r.benchmark.rae,
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Mean and spread of one metric across successful replications.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellStats {
    pub mean: f64,
    /// Sample SD; `None` with fewer than two replications.
    pub sd: Option<f64>,
    pub count: usize,
}

impl CellStats {
    pub fn from_values(values: &[f64]) -> Option<Self> {
        let count = values.len();
        if count == 0 {
            return None;
        }
        let mean = values.iter().sum::<f64>() / count as f64;
        let sd = (count > 1).then(|| {
            (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (count - 1) as f64)
                .sqrt()
        });
        Some(Self { mean, sd, count })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplicationFailure {
    pub m: usize,
    pub rep: usize,
    pub message: String,
}

/// Per `(m, condition, metric)` summaries, in deterministic key order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AggregateTable {
    pub cells: BTreeMap<(usize, LatentTransform, Metric), CellStats>,
    pub failures: Vec<ReplicationFailure>,
}

impl AggregateTable {
    pub fn get(&self, m: usize, condition: LatentTransform, metric: Metric) -> Option<&CellStats> {
        self.cells.get(&(m, condition, metric))
    }

    pub fn mean(&self, m: usize, condition: LatentTransform, metric: Metric) -> Option<f64> {
        self.get(m, condition, metric).map(|c| c.mean)
    }

    pub fn m_values(&self) -> Vec<usize> {
        let mut ms: Vec<usize> = self.cells.keys().map(|k| k.0).collect();
        ms.dedup();
        ms
    }

    /// Aggregates replication results; ordering of `results` is irrelevant.
    pub fn from_results(results: &[ReplicationResult], failures: Vec<ReplicationFailure>) -> Self {
        let mut sorted: Vec<&ReplicationResult> = results.iter().collect();
        sorted.sort_by_key(|r| (r.m, r.condition, r.rep));
        let mut groups: BTreeMap<(usize, LatentTransform), Vec<&ReplicationResult>> =
            BTreeMap::new();
        for r in sorted {
            groups.entry((r.m, r.condition)).or_default().push(r);
        }
        let mut cells = BTreeMap::new();
        for ((m, cond), rs) in groups {
            for metric in Metric::all() {
                let values: Vec<f64> = rs.iter().map(|r| metric.of(r)).collect();
                if let Some(stats) = CellStats::from_values(&values) {
                    cells.insert((m, cond, metric), stats);
                }
            }
        }
        Self { cells, failures }
    }
}

/// Status updates emitted while a sweep runs.
#[derive(Debug, Clone, PartialEq)]
pub enum ProgressEvent {
    Started {
        units: usize,
    },
    Finished {
        m: usize,
        rep: usize,
        done: usize,
        units: usize,
    },
    Failed {
        m: usize,
        rep: usize,
        done: usize,
        units: usize,
        message: String,
    },
}

/// Runs every `(m, replication)` unit, in parallel when enabled, and
/// aggregates. Failed replications are recorded; the sweep errors only when
/// some `(m, condition)` cell has no successful replication.
pub fn run_sweep<F>(config: &ExperimentConfig, progress: F) -> Result<AggregateTable>
where
    F: Fn(&ProgressEvent) + Sync + Send,
{
    config.validate()?;
    let conditions = config.latent_transform.conditions();
    let units: Vec<(usize, usize)> = config
        .m_grid
        .iter()
        .flat_map(|&m| (0..config.replications).map(move |rep| (m, rep)))
        .collect();
    let total = units.len();
    progress(&ProgressEvent::Started { units: total });
    let done = AtomicUsize::new(0);

    let outcomes = par::map_slice(&units, |&(m, rep)| {
        let out = run_replication_conditions(m, rep, config, &conditions);
        let finished = done.fetch_add(1, Ordering::Relaxed) + 1;
        match &out {
            Ok(_) => progress(&ProgressEvent::Finished {
                m,
                rep,
                done: finished,
                units: total,
            }),
            Err(e) => progress(&ProgressEvent::Failed {
                m,
                rep,
                done: finished,
                units: total,
                message: e.to_string(),
            }),
        }
        out
    });

    let mut results = Vec::new();
    let mut failures = Vec::new();
    for (&(m, rep), out) in units.iter().zip(outcomes) {
        match out {
            Ok(rs) => results.extend(rs),
            Err(e) => failures.push(ReplicationFailure {
                m,
                rep,
                message: e.to_string(),
            }),
        }
    }
    let table = AggregateTable::from_results(&results, failures);
    let mut grid = config.m_grid.clone();
    grid.sort_unstable();
    grid.dedup();
    for &m in &grid {
        for &cond in &conditions {
            if table.get(m, cond, Metric::Rrmse).is_none() {
                let first = table
                    .failures
                    .iter()
                    .find(|f| f.m == m)
                    .map(|f| f.message.clone())
                    .unwrap_or_default();
                return Err(Error::invalid(format!(
                    "every replication failed at m = {m} ({cond}): {first}"
                )));
            }
        }
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_config() -> ExperimentConfig {
        ExperimentConfig {
            m_grid: vec![6],
            n_mc: 300,
            replications: 1,
            master_seed: 5,
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn default_grid() {
        let cfg = ExperimentConfig::default();
        assert_eq!(cfg.m_grid.len(), 20);
        assert_eq!(cfg.m_grid[0], 6);
        assert_eq!(*cfg.m_grid.last().unwrap(), 120);
        assert!(cfg.validate().is_ok());
    }

    #[test]
    fn validation_errors() {
        let mut cfg = small_config();
        cfg.m_grid = vec![];
        assert!(cfg.validate().is_err());
        cfg.m_grid = vec![6, 7];
        assert!(cfg.validate().unwrap_err().to_string().contains("m_grid"));
        let cfg = ExperimentConfig {
            n_mc: 50,
            ..small_config()
        };
        assert!(cfg.validate().is_err());
        let cfg = ExperimentConfig {
            replications: 0,
            ..small_config()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn replication_is_deterministic() {
        let cfg = small_config();
        let a = run_replication(6, 0, &cfg, LatentTransform::Raw).unwrap();
        let b = run_replication(6, 0, &cfg, LatentTransform::Raw).unwrap();
        assert_eq!(a.estimates, b.estimates);
        assert_eq!(a.benchmark, b.benchmark);
        assert_eq!(a.estimates.len(), 9);
        let names: Vec<_> = a.estimates.iter().map(|e| e.name).collect();
        assert_eq!(names, CoefficientName::ALL.to_vec());
    }

    #[test]
    fn single_replication_aggregate_has_no_sd() {
        let table = run_sweep(&small_config(), |_| {}).unwrap();
        let cell = table.get(6, LatentTransform::Raw, Metric::Rrmse).unwrap();
        assert_eq!(cell.count, 1);
        assert_eq!(cell.sd, None);
        assert_eq!(table.cells.len(), 2 * 11);
    }

    #[test]
    fn cell_stats() {
        let s = CellStats::from_values(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(s.mean, 2.0);
        assert_eq!(s.sd, Some(1.0));
        assert!(CellStats::from_values(&[]).is_none());
    }
}

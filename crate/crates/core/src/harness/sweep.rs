use rayon::prelude::*;

use crate::engine::{run_episode_accumulated, Mode};
use crate::error::{Error, Result};
use crate::metrics::{MetricsAccumulator, MetricsRecord};
use crate::rng::episode_stream;
use crate::schemes::SchemeKind;

use super::ExperimentSpec;

/// 97.5% standard-normal quantile.
const Z_95: f64 = 1.959_963_984_540_054;

/// Pooled value with a 95% confidence half-width across replications.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Estimate {
    pub value: Option<f64>,
    pub ci: Option<f64>,
}

impl Estimate {
    fn new(value: Option<f64>, per_replication: impl Iterator<Item = Option<f64>>) -> Self {
        let samples: Vec<f64> = per_replication.flatten().collect();
        Estimate {
            value,
            ci: half_width(&samples),
        }
    }

    /// Whether the two confidence intervals overlap.
    pub fn overlaps(&self, other: &Estimate) -> bool {
        match (self.value, other.value) {
            (Some(a), Some(b)) => {
                (a - b).abs() <= self.ci.unwrap_or(0.0) + other.ci.unwrap_or(0.0)
            }
            _ => false,
        }
    }
}

/// Normal-approximation half-width over per-replication values.
fn half_width(samples: &[f64]) -> Option<f64> {
    let n = samples.len();
    if n < 2 {
        return None;
    }
    let mean = samples.iter().sum::<f64>() / n as f64;
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    Some(Z_95 * (var / n as f64).sqrt())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub mode: Mode,
    pub scheme: SchemeKind,
    pub gamma: usize,
    pub replications: u32,
    pub hrr: Estimate,
    pub mean_sv: Estimate,
    pub lrr: Estimate,
    pub usage: Estimate,
    pub se: Estimate,
    pub mean_eps: Option<f64>,
    pub tx_multiplicity: Option<f64>,
    /// All replications merged.
    pub pooled: MetricsRecord,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ResultTable {
    pub rows: Vec<ResultRow>,
}

impl ResultTable {
    pub fn row(&self, scheme: SchemeKind, gamma: usize) -> Option<&ResultRow> {
        self.rows
            .iter()
            .find(|r| r.scheme == scheme && r.gamma == gamma)
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    fn sort(&mut self) {
        self.rows.sort_by_key(|r| (r.mode, r.scheme, r.gamma));
    }
}

/// Runs the sweep on the global rayon pool.
pub fn run_sweep(spec: &ExperimentSpec) -> Result<ResultTable> {
    spec.validate()?;
    let mut schemes = spec.schemes.clone();
    schemes.sort();
    schemes.dedup();
    let mut gammas = spec.gammas.clone();
    gammas.sort();
    gammas.dedup();

    let cells: Vec<(SchemeKind, usize)> = schemes
        .iter()
        .flat_map(|&s| gammas.iter().map(move |&g| (s, g)))
        .collect();
    let reps = spec.replications;
    let tasks: Vec<(SchemeKind, usize, u32)> = cells
        .iter()
        .flat_map(|&(s, g)| (0..reps).map(move |r| (s, g, r)))
        .collect();

    // Order-preserving collect keeps the merge order, and so the output bytes,
    // independent of scheduling.
    let accumulators: Vec<MetricsAccumulator> = tasks
        .par_iter()
        .map(|&(scheme, gamma, replication)| {
            let wrap = |source: Error| Error::Episode {
                scheme,
                gamma,
                replication,
                source: Box::new(source),
            };
            let mut rng = episode_stream(spec.master_seed, spec.mode, scheme, gamma, replication)
                .map_err(wrap)?;
            run_episode_accumulated(&spec.episode_config(scheme, gamma), &mut rng).map_err(wrap)
        })
        .collect::<Result<_>>()?;

    let mut table = ResultTable::default();
    for (&(scheme, gamma), chunk) in cells.iter().zip(accumulators.chunks(reps as usize)) {
        let per_rep: Vec<MetricsRecord> = chunk
            .iter()
            .map(MetricsAccumulator::finalize)
            .collect::<Result<_>>()?;
        let mut merged = chunk[0].clone();
        for acc in &chunk[1..] {
            merged.merge(acc);
        }
        let pooled = merged.finalize()?;
        table.rows.push(ResultRow {
            mode: spec.mode,
            scheme,
            gamma,
            replications: reps,
            hrr: Estimate::new(pooled.hrr, per_rep.iter().map(|r| r.hrr)),
            mean_sv: Estimate::new(Some(pooled.mean_sv), per_rep.iter().map(|r| Some(r.mean_sv))),
            lrr: Estimate::new(pooled.lrr, per_rep.iter().map(|r| r.lrr)),
            usage: Estimate::new(Some(pooled.usage), per_rep.iter().map(|r| Some(r.usage))),
            se: Estimate::new(pooled.se, per_rep.iter().map(|r| r.se)),
            mean_eps: pooled.mean_eps,
            tx_multiplicity: pooled.tx_multiplicity,
            pooled,
        });
    }
    table.sort();
    Ok(table)
}

/// Runs the sweep on a dedicated pool of `threads` workers.
pub fn run_sweep_with_threads(spec: &ExperimentSpec, threads: usize) -> Result<ResultTable> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::InvalidParameter(format!("cannot start worker pool: {e}")))?;
    pool.install(|| run_sweep(spec))
}

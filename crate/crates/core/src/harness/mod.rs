//! Experiment orchestration: presets, configuration files, replicated sweeps
//! and CSV output.

mod config;
mod output;
mod preset;
mod sweep;

use std::path::PathBuf;

pub use config::{parse_config, render_config, ConfigKey, CONFIG_KEYS};
pub use output::{emit_csv, emit_gnuplot, format_sig6, render_csv, CSV_HEADER};
pub use preset::{Metric, Preset};
pub use sweep::{run_sweep, run_sweep_with_threads, Estimate, ResultRow, ResultTable};

use crate::engine::{EpisodeConfig, Mode};
use crate::error::{Error, Result};
use crate::metrics::SvAggregation;
use crate::relevance::RelevanceParams;
use crate::scenario::SceneConfig;
use crate::schemes::{EstimationModel, SchemeKind};

pub const DEFAULT_REPLICATIONS: u32 = 200;
pub const DEFAULT_SLOTS: usize = 400;
pub const DEFAULT_MASTER_SEED: u64 = 1;
pub const DEFAULT_GAMMAS: std::ops::RangeInclusive<usize> = 1..=25;

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub mode: Mode,
    pub schemes: Vec<SchemeKind>,
    pub gammas: Vec<usize>,
    pub replications: u32,
    pub slots_per_episode: usize,
    pub master_seed: u64,
    pub scene: SceneConfig,
    pub relevance: RelevanceParams,
    pub estimation: EstimationModel,
    pub sv_aggregation: SvAggregation,
    pub output_path: Option<PathBuf>,
}

impl Default for ExperimentSpec {
    /// Unicast with two vehicles, all schemes, budgets 1 to 25.
    fn default() -> Self {
        ExperimentSpec {
            mode: Mode::Unicast,
            schemes: SchemeKind::ALL.to_vec(),
            gammas: DEFAULT_GAMMAS.collect(),
            replications: DEFAULT_REPLICATIONS,
            slots_per_episode: DEFAULT_SLOTS,
            master_seed: DEFAULT_MASTER_SEED,
            scene: SceneConfig::default(),
            relevance: RelevanceParams::default(),
            estimation: EstimationModel::default(),
            sv_aggregation: SvAggregation::Max,
            output_path: None,
        }
    }
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.gammas.is_empty() {
            return Err(Error::InvalidParameter("at least one gamma is required".into()));
        }
        if self.gammas.contains(&0) {
            return Err(Error::InvalidParameter("every gamma must be at least 1".into()));
        }
        if self.schemes.is_empty() {
            return Err(Error::InvalidParameter("at least one scheme is required".into()));
        }
        if self.replications == 0 {
            return Err(Error::InvalidParameter("replications must be at least 1".into()));
        }
        for &gamma in &self.gammas {
            crate::rng::stream_id(self.mode, SchemeKind::Baseline, gamma, 0)?;
        }
        self.episode_config(self.schemes[0], self.gammas[0]).validate()
    }

    pub fn episode_config(&self, scheme: SchemeKind, gamma: usize) -> EpisodeConfig {
        EpisodeConfig {
            scene: self.scene.clone(),
            relevance: self.relevance.clone(),
            estimation: self.estimation.clone(),
            scheme,
            gamma,
            mode: self.mode,
            slots: self.slots_per_episode,
            sv_aggregation: self.sv_aggregation,
        }
    }
}

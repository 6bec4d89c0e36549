//! The outer learning loop: sample an environment from the pool, refresh the
//! reward model and information gains, run the solver, play in the hidden
//! environment and record what was seen.

mod config;
mod metrics;
mod run;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{GameTree, InfosetId, StrategyProfile};

pub use config::{ExperimentConfig, Variant};
pub use metrics::{emit_metrics, format_metrics, parse_metrics, MetricsRow, METRICS_HEADER};
pub use run::{
    run_experiment, run_experiment_report, run_with_environment, true_env_seed, ExperimentReport,
};

/// Strategy profile on disk: the game name and, per infoset, its key and
/// probability vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileFile {
    pub game: String,
    pub infosets: Vec<ProfileEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileEntry {
    pub id: usize,
    pub key: String,
    pub probs: Vec<f64>,
}

impl ProfileFile {
    pub fn new(tree: &GameTree, profile: &StrategyProfile) -> Self {
        ProfileFile {
            game: tree.name().to_string(),
            infosets: tree
                .infosets()
                .iter()
                .map(|i| ProfileEntry {
                    id: i.id.0,
                    key: i.key.clone(),
                    probs: profile.get(i.id).to_vec(),
                })
                .collect(),
        }
    }

    pub fn to_profile(&self, tree: &GameTree) -> Result<StrategyProfile> {
        if self.game != tree.name() {
            return Err(Error::InvalidProfile(format!(
                "profile is for game {}, tree is {}",
                self.game,
                tree.name()
            )));
        }
        let mut probs = vec![Vec::new(); tree.num_infosets()];
        for e in &self.infosets {
            if e.id >= probs.len() || tree.infoset(InfosetId(e.id)).key != e.key {
                return Err(Error::InvalidProfile(format!(
                    "infoset {} ({}) does not exist in {}",
                    e.id,
                    e.key,
                    tree.name()
                )));
            }
            probs[e.id] = e.probs.clone();
        }
        StrategyProfile::from_vecs(tree, probs)
    }
}

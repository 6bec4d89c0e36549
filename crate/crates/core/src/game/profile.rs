use serde::{Deserialize, Serialize};

use super::{GameTree, InfosetId, Player};
use crate::error::{Error, Result};

const SUM_TOLERANCE: f64 = 1e-9;

/// A behavioural strategy for both players: one probability vector per
/// infoset, shared by every node of that infoset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyProfile {
    probs: Vec<Vec<f64>>,
}

impl StrategyProfile {
    pub fn uniform(tree: &GameTree) -> StrategyProfile {
        let probs = tree
            .infosets()
            .iter()
            .map(|i| vec![1.0 / i.num_actions() as f64; i.num_actions()])
            .collect();
        StrategyProfile { probs }
    }

    pub fn from_vecs(tree: &GameTree, probs: Vec<Vec<f64>>) -> Result<StrategyProfile> {
        let profile = StrategyProfile { probs };
        profile.validate(tree)?;
        Ok(profile)
    }

    pub(crate) fn from_vecs_unchecked(probs: Vec<Vec<f64>>) -> StrategyProfile {
        StrategyProfile { probs }
    }

    pub fn get(&self, id: InfosetId) -> &[f64] {
        &self.probs[id.0]
    }

    pub fn set(&mut self, id: InfosetId, probs: Vec<f64>) {
        self.probs[id.0] = probs;
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn as_vecs(&self) -> &[Vec<f64>] {
        &self.probs
    }

    /// Replaces `player`'s entries with those of `other`.
    pub fn with_player_from(&self, tree: &GameTree, player: Player, other: &StrategyProfile) -> Self {
        let mut out = self.clone();
        for info in tree.infosets() {
            if info.owner == player {
                out.probs[info.id.0] = other.probs[info.id.0].clone();
            }
        }
        out
    }

    pub fn validate(&self, tree: &GameTree) -> Result<()> {
        if self.probs.len() != tree.num_infosets() {
            return Err(Error::InvalidProfile(format!(
                "profile covers {} infosets, tree has {}",
                self.probs.len(),
                tree.num_infosets()
            )));
        }
        for (info, p) in tree.infosets().iter().zip(&self.probs) {
            if p.len() != info.num_actions() {
                return Err(Error::InvalidProfile(format!(
                    "infoset {} expects {} actions, got {}",
                    info.key,
                    info.num_actions(),
                    p.len()
                )));
            }
            if p.iter().any(|&x| !x.is_finite() || x < 0.0) {
                return Err(Error::InvalidProfile(format!(
                    "infoset {} has a negative or non-finite probability",
                    info.key
                )));
            }
            let sum: f64 = p.iter().sum();
            if (sum - 1.0).abs() > SUM_TOLERANCE {
                return Err(Error::InvalidProfile(format!(
                    "infoset {} sums to {sum}",
                    info.key
                )));
            }
        }
        Ok(())
    }
}

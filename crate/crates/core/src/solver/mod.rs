//! Regret-based solvers over a fixed (sampled or true) environment.

mod cfr;
mod mccfr;

use serde::{Deserialize, Serialize};

use crate::bnn::InfoGainTable;
use crate::error::{Error, Result};
use crate::game::{GameTree, InfosetId, Player, StrategyProfile};

pub use cfr::{
    apply_dcfr_discount, cfr_round, root_values, traverse, CfrParams, DcfrParams, UpdateScheme,
};
pub use mccfr::{mccfr_os_round, os_play_probability, os_sample_play, os_update, SampledPlay};

/// Regret matching: positive parts normalized, uniform if none is positive.
pub fn regret_match(regrets: &[f64]) -> Result<Vec<f64>> {
    if regrets.is_empty() {
        return Err(Error::Empty("regret vector"));
    }
    let mut out = vec![0.0; regrets.len()];
    regret_match_into(regrets, &mut out);
    Ok(out)
}

pub(crate) fn regret_match_into(regrets: &[f64], out: &mut [f64]) {
    let total: f64 = regrets.iter().map(|r| r.max(0.0)).sum();
    if total > 0.0 {
        for (o, r) in out.iter_mut().zip(regrets) {
            *o = r.max(0.0) / total;
        }
    } else {
        out.fill(1.0 / regrets.len() as f64);
    }
}

/// Terminal utilities seen by the solver: the expected player-one reward
/// `base` and the exploration bonus `eta * D_KL`, which both players receive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AugmentedRewards {
    pub base: Vec<f64>,
    pub bonus: Vec<f64>,
    pub eta: f64,
}

impl AugmentedRewards {
    /// Unaugmented rewards (`eta = 0`).
    pub fn plain(base: Vec<f64>) -> Self {
        let bonus = vec![0.0; base.len()];
        AugmentedRewards {
            base,
            bonus,
            eta: 0.0,
        }
    }

    /// `r' = r + eta * D_KL`, player one's augmented reward.
    pub fn augmented(&self, terminal_index: usize) -> f64 {
        self.base[terminal_index] + self.bonus[terminal_index]
    }

    /// Utility of `player` at a terminal: its own side of the zero-sum
    /// reward plus the bonus.
    pub fn utility(&self, terminal_index: usize, player: Player) -> f64 {
        player.sign() * self.base[terminal_index] + self.bonus[terminal_index]
    }

    pub fn len(&self) -> usize {
        self.base.len()
    }

    pub fn is_empty(&self) -> bool {
        self.base.is_empty()
    }
}

pub fn augment_rewards(rewards: &[f64], gains: &InfoGainTable, eta: f64) -> Result<AugmentedRewards> {
    if gains.values.len() != rewards.len() {
        return Err(Error::LengthMismatch {
            expected: rewards.len(),
            actual: gains.values.len(),
        });
    }
    if !(eta.is_finite() && eta >= 0.0) {
        return Err(Error::InvalidParameter(format!("eta must be >= 0, got {eta}")));
    }
    Ok(AugmentedRewards {
        base: rewards.to_vec(),
        bonus: gains.values.iter().map(|d| eta * d).collect(),
        eta,
    })
}

/// Cumulative regrets, average-strategy accumulators and the current
/// regret-matching strategy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverState {
    pub regrets: Vec<Vec<f64>>,
    /// Reach-weighted sums of past strategies, one vector per infoset. Their
    /// per-infoset totals are the average-strategy denominators.
    pub strategy_sum: Vec<Vec<f64>>,
    pub current: Vec<Vec<f64>>,
    pub t: u64,
    /// Round in which each infoset last contributed to `strategy_sum`.
    stamp: Vec<u64>,
}

impl SolverState {
    pub fn new(tree: &GameTree) -> Self {
        let zeros: Vec<Vec<f64>> = tree
            .infosets()
            .iter()
            .map(|i| vec![0.0; i.num_actions()])
            .collect();
        let current = tree
            .infosets()
            .iter()
            .map(|i| vec![1.0 / i.num_actions() as f64; i.num_actions()])
            .collect();
        SolverState {
            regrets: zeros.clone(),
            strategy_sum: zeros,
            current,
            t: 0,
            stamp: vec![u64::MAX; tree.num_infosets()],
        }
    }

    pub fn current_profile(&self) -> StrategyProfile {
        StrategyProfile::from_vecs_unchecked(self.current.clone())
    }

    pub fn denominator(&self, id: InfosetId) -> f64 {
        self.strategy_sum[id.0].iter().sum()
    }

    /// Recomputes the current strategy of `player`'s infosets from regrets.
    pub(crate) fn refresh(&mut self, tree: &GameTree, player: Option<Player>) {
        for info in tree.infosets() {
            if player.is_none_or(|p| p == info.owner) {
                let k = info.id.0;
                regret_match_into(&self.regrets[k], &mut self.current[k]);
            }
        }
    }

    /// Sum over `player`'s infosets of the largest positive cumulative regret.
    pub fn regret_mass(&self, tree: &GameTree, player: Player) -> f64 {
        tree.infosets()
            .iter()
            .filter(|i| i.owner == player)
            .map(|i| {
                self.regrets[i.id.0]
                    .iter()
                    .fold(0.0f64, |m, &r| m.max(r))
            })
            .sum()
    }
}

/// Normalized strategy sums; uniform where an infoset was never reached.
pub fn average_strategy(state: &SolverState) -> StrategyProfile {
    let probs = state
        .strategy_sum
        .iter()
        .map(|sums| {
            let total: f64 = sums.iter().sum();
            if total > 0.0 {
                sums.iter().map(|s| s / total).collect()
            } else {
                vec![1.0 / sums.len() as f64; sums.len()]
            }
        })
        .collect();
    StrategyProfile::from_vecs_unchecked(probs)
}

/// Uniformly random play at every infoset. The seed is accepted for
/// interface symmetry; the profile itself is deterministic.
pub fn random_policy(tree: &GameTree, _seed: u64) -> StrategyProfile {
    StrategyProfile::uniform(tree)
}

use serde::{Deserialize, Serialize};

use super::{AugmentedRewards, SolverState};
use crate::env::EnvironmentSpec;
use crate::error::{Error, Result};
use crate::game::{GameTree, NodeId, NodeKind, Player, Reach, StrategyProfile};

/// Order of the two players' regret updates within one round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UpdateScheme {
    /// Player one is updated first; player two then responds to player one's
    /// new strategy.
    Alternating,
    /// Both players are updated against the same profile.
    Simultaneous,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CfrParams {
    /// Regret updates are skipped in subtrees whose opponent-and-chance reach
    /// falls below this value; such subtrees count as value 0 for the round.
    pub prune_eps: f64,
    pub scheme: UpdateScheme,
}

impl Default for CfrParams {
    fn default() -> Self {
        CfrParams {
            prune_eps: 1e-5,
            scheme: UpdateScheme::Alternating,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DcfrParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl Default for DcfrParams {
    fn default() -> Self {
        DcfrParams {
            alpha: 1.5,
            beta: 0.0,
            gamma: 2.0,
        }
    }
}

/// One CFR round against `env`'s chance probabilities with terminal
/// utilities from `rewards`. Increments `state.t` first, so the first round
/// is round 1.
pub fn cfr_round(
    tree: &GameTree,
    env: &EnvironmentSpec,
    rewards: &AugmentedRewards,
    state: &mut SolverState,
    params: &CfrParams,
) {
    state.t += 1;
    match params.scheme {
        UpdateScheme::Alternating => {
            for p in Player::BOTH {
                traverse(tree, &env.chance_probs, rewards, state, p, params.prune_eps);
                state.refresh(tree, Some(p));
            }
        }
        UpdateScheme::Simultaneous => {
            for p in Player::BOTH {
                traverse(tree, &env.chance_probs, rewards, state, p, params.prune_eps);
            }
            state.refresh(tree, None);
        }
    }
}

/// Discounts cumulative regrets and strategy sums after round `t`: positive
/// regrets by `t^a / (t^a + 1)`, negative regrets by `t^b / (t^b + 1)` and
/// strategy sums by `(t / (t + 1))^g`.
pub fn apply_dcfr_discount(state: &mut SolverState, t: u64, params: &DcfrParams) -> Result<()> {
    if t == 0 {
        return Err(Error::InvalidParameter("discounting starts at round 1".into()));
    }
    let t = t as f64;
    let ta = t.powf(params.alpha);
    let tb = t.powf(params.beta);
    let pos = ta / (ta + 1.0);
    let neg = tb / (tb + 1.0);
    let avg = (t / (t + 1.0)).powf(params.gamma);
    for regrets in &mut state.regrets {
        for r in regrets.iter_mut() {
            if *r > 0.0 {
                *r *= pos;
            } else if *r < 0.0 {
                *r *= neg;
            }
        }
    }
    for sums in &mut state.strategy_sum {
        for s in sums.iter_mut() {
            *s *= avg;
        }
    }
    Ok(())
}

struct Walker<'a> {
    tree: &'a GameTree,
    chance: &'a [Vec<f64>],
    rewards: &'a AugmentedRewards,
    player: Player,
    prune_eps: f64,
    round: u64,
    state: &'a mut SolverState,
    values: Vec<f64>,
}

impl Walker<'_> {
    /// Strategy-sum update for a pruned subtree. Regret updates there are
    /// skipped but the average strategy still receives this round's weight.
    fn accumulate(&mut self, node: NodeId, reach: Reach) {
        if reach.player(self.player) == 0.0 {
            return;
        }
        let n = self.tree.node(node);
        match n.kind {
            NodeKind::Terminal => {}
            NodeKind::Chance => {
                for &c in &n.children {
                    self.accumulate(c, reach);
                }
            }
            NodeKind::Decision(owner) if owner != self.player => {
                for &c in &n.children {
                    self.accumulate(c, reach);
                }
            }
            NodeKind::Decision(_) => {
                let k = n.infoset.expect("decision infoset").0;
                self.add_to_average(k, reach.player(self.player));
                for (a, &c) in n.children.iter().enumerate() {
                    let p = self.state.current[k][a];
                    self.accumulate(c, reach.step(n.kind, p));
                }
            }
        }
    }

    fn add_to_average(&mut self, k: usize, own_reach: f64) {
        if self.state.stamp[k] != self.round {
            self.state.stamp[k] = self.round;
            for (s, &p) in self.state.strategy_sum[k].iter_mut().zip(&self.state.current[k]) {
                *s += own_reach * p;
            }
        }
    }

    fn walk(&mut self, node: NodeId, reach: Reach) -> f64 {
        let n = self.tree.node(node);
        if let Some(t) = n.terminal_index {
            return self.rewards.utility(t, self.player);
        }
        if reach.others(self.player) < self.prune_eps {
            self.accumulate(node, reach);
            return 0.0;
        }
        match n.kind {
            NodeKind::Chance => {
                let probs = &self.chance[n.chance_index.expect("chance index")];
                let mut v = 0.0;
                for (a, &child) in n.children.iter().enumerate() {
                    let p = probs[a];
                    v += p * self.walk(child, reach.step(n.kind, p));
                }
                v
            }
            NodeKind::Decision(owner) => {
                let k = n.infoset.expect("decision infoset").0;
                let k_actions = n.children.len();
                let sigma = self.state.current[k].clone();
                if owner != self.player {
                    let mut v = 0.0;
                    for (a, &child) in n.children.iter().enumerate() {
                        v += sigma[a] * self.walk(child, reach.step(n.kind, sigma[a]));
                    }
                    return v;
                }
                let base = self.values.len();
                let mut v = 0.0;
                for (a, &child) in n.children.iter().enumerate() {
                    let va = self.walk(child, reach.step(n.kind, sigma[a]));
                    self.values.push(va);
                    v += sigma[a] * va;
                }
                let weight = reach.others(self.player);
                for a in 0..k_actions {
                    self.state.regrets[k][a] += weight * (self.values[base + a] - v);
                }
                self.values.truncate(base);
                self.add_to_average(k, reach.player(self.player));
                v
            }
            NodeKind::Terminal => unreachable!(),
        }
    }
}

/// Single-player pass: adds `player`'s instantaneous counterfactual regrets
/// and reach-weighted current strategy to `state`, using `state.current` for
/// both players. Returns `player`'s expected utility at the root (pruned
/// subtrees count as 0). Strategy sums are updated at most once per infoset
/// for each value of `state.t`.
pub fn traverse(
    tree: &GameTree,
    chance: &[Vec<f64>],
    rewards: &AugmentedRewards,
    state: &mut SolverState,
    player: Player,
    prune_eps: f64,
) -> f64 {
    let round = state.t;
    let mut w = Walker {
        tree,
        chance,
        rewards,
        player,
        prune_eps,
        round,
        state,
        values: Vec::new(),
    };
    w.walk(tree.root(), Reach::ROOT)
}

/// Expected utility of each player at the root under `profile`.
pub fn root_values(
    tree: &GameTree,
    chance: &[Vec<f64>],
    rewards: &AugmentedRewards,
    profile: &StrategyProfile,
) -> [f64; 2] {
    fn walk(
        tree: &GameTree,
        chance: &[Vec<f64>],
        rewards: &AugmentedRewards,
        profile: &StrategyProfile,
        node: NodeId,
    ) -> [f64; 2] {
        let n = tree.node(node);
        if let Some(t) = n.terminal_index {
            return Player::BOTH.map(|p| rewards.utility(t, p));
        }
        let probs = match n.kind {
            NodeKind::Chance => &chance[n.chance_index.expect("chance index")][..],
            _ => profile.get(n.infoset.expect("decision infoset")),
        };
        let mut v = [0.0; 2];
        for (a, &child) in n.children.iter().enumerate() {
            if probs[a] > 0.0 {
                let c = walk(tree, chance, rewards, profile, child);
                v[0] += probs[a] * c[0];
                v[1] += probs[a] * c[1];
            }
        }
        v
    }
    walk(tree, chance, rewards, profile, tree.root())
}

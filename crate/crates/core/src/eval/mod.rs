//! Exact best responses and exploitability against a known environment.

use serde::{Deserialize, Serialize};

use crate::env::EnvironmentSpec;
use crate::error::{Error, Result};
use crate::game::{all_reaches, GameTree, InfosetId, NodeId, NodeKind, Player, StrategyProfile};
use crate::solver::{average_strategy, SolverState};

const TIE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct BestResponseResult {
    pub responder: Player,
    /// `profile` with the responder's infosets replaced by the pure best
    /// response.
    pub strategy: StrategyProfile,
    /// Responder's expected payoff against the fixed opponent.
    pub value: f64,
}

struct Responder<'a> {
    tree: &'a GameTree,
    env: &'a EnvironmentSpec,
    profile: &'a StrategyProfile,
    player: Player,
    weights: Vec<f64>,
    values: Vec<Option<f64>>,
    choice: Vec<Option<usize>>,
}

impl Responder<'_> {
    fn value(&mut self, node: NodeId) -> f64 {
        if let Some(v) = self.values[node] {
            return v;
        }
        let n = self.tree.node(node);
        let v = match n.kind {
            NodeKind::Terminal => {
                self.player.sign() * self.env.expected_reward(n.terminal_index.unwrap())
            }
            NodeKind::Chance => {
                let probs = &self.env.chance_probs[n.chance_index.unwrap()];
                let mut v = 0.0;
                for (a, &c) in n.children.iter().enumerate() {
                    if probs[a] > 0.0 {
                        v += probs[a] * self.value(c);
                    }
                }
                v
            }
            NodeKind::Decision(p) if p != self.player => {
                let probs = self.profile.get(n.infoset.unwrap());
                let mut v = 0.0;
                for (a, &c) in n.children.iter().enumerate() {
                    if probs[a] > 0.0 {
                        v += probs[a] * self.value(c);
                    }
                }
                v
            }
            NodeKind::Decision(_) => {
                let a = self.choose(n.infoset.unwrap());
                self.value(n.children[a])
            }
        };
        self.values[node] = Some(v);
        v
    }

    fn choose(&mut self, id: InfosetId) -> usize {
        if let Some(a) = self.choice[id.0] {
            return a;
        }
        let info = self.tree.infoset(id);
        let mut totals = vec![0.0; info.num_actions()];
        for &h in &info.nodes {
            let w = self.weights[h];
            if w == 0.0 {
                continue;
            }
            for (a, total) in totals.iter_mut().enumerate() {
                *total += w * self.value(self.tree.node(h).children[a]);
            }
        }
        let mut best = 0;
        for a in 1..totals.len() {
            if totals[a] > totals[best] + TIE_TOLERANCE {
                best = a;
            }
        }
        self.choice[id.0] = Some(best);
        best
    }
}

/// Exact best response of `responder` to the other player's part of
/// `profile` by backward induction. Ties go to the lowest action index.
pub fn best_response(
    tree: &GameTree,
    env: &EnvironmentSpec,
    profile: &StrategyProfile,
    responder: Player,
) -> BestResponseResult {
    let reaches = all_reaches(tree, profile, &env.chance_probs);
    let mut r = Responder {
        tree,
        env,
        profile,
        player: responder,
        weights: reaches.iter().map(|x| x.others(responder)).collect(),
        values: vec![None; tree.num_nodes()],
        choice: vec![None; tree.num_infosets()],
    };
    let value = r.value(tree.root());
    let mut strategy = profile.clone();
    for info in tree.infosets().iter().filter(|i| i.owner == responder) {
        let a = r.choose(info.id);
        let mut pure = vec![0.0; info.num_actions()];
        pure[a] = 1.0;
        strategy.set(info.id, pure);
    }
    BestResponseResult {
        responder,
        strategy,
        value,
    }
}

/// Sum of both players' best-response values; zero exactly at an
/// equilibrium of the zero-sum game.
pub fn exploitability(tree: &GameTree, env: &EnvironmentSpec, profile: &StrategyProfile) -> f64 {
    Player::BOTH
        .iter()
        .map(|&p| best_response(tree, env, profile, p).value)
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegretBoundReport {
    pub rounds: u64,
    pub exploitability: f64,
    pub bound: f64,
}

impl RegretBoundReport {
    pub fn slack(&self) -> f64 {
        self.bound - self.exploitability
    }

    pub fn check(&self) -> Result<()> {
        if self.exploitability > self.bound + 1e-9 {
            return Err(Error::RegretBoundViolated {
                exploitability: self.exploitability,
                bound: self.bound,
            });
        }
        Ok(())
    }
}

/// Exploitability of the average strategy against the bound
/// `(sum over players and infosets of max_a R+(I, a)) / T`.
pub fn regret_bound_report(
    state: &SolverState,
    tree: &GameTree,
    env: &EnvironmentSpec,
) -> Result<RegretBoundReport> {
    if state.t == 0 {
        return Err(Error::InvalidParameter("no rounds have been run".into()));
    }
    let expl = exploitability(tree, env, &average_strategy(state));
    let mass: f64 = Player::BOTH.iter().map(|&p| state.regret_mass(tree, p)).sum();
    Ok(RegretBoundReport {
        rounds: state.t,
        exploitability: expl,
        bound: mass / state.t as f64,
    })
}

//! Environments (chance probabilities plus terminal reward distributions),
//! the pool of observations gathered by playing in the true environment, and
//! conjugate posterior sampling from that pool.

use rand::Rng as _;
use rand_distr::{Beta, Distribution, Gamma};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{GameTree, NodeId, NodeKind, StrategyProfile};
use crate::seed::{rng, Rng};

const SUM_TOLERANCE: f64 = 1e-9;

/// Chance distributions indexed by chance index and, per terminal index, the
/// probability that player one receives +1 (otherwise -1).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvironmentSpec {
    pub chance_probs: Vec<Vec<f64>>,
    pub reward_p: Vec<f64>,
}

impl EnvironmentSpec {
    pub fn new(tree: &GameTree, chance_probs: Vec<Vec<f64>>, reward_p: Vec<f64>) -> Result<Self> {
        let env = EnvironmentSpec {
            chance_probs,
            reward_p,
        };
        env.validate(tree)?;
        Ok(env)
    }

    /// Uniform chance and a deterministic unit payoff: +1 to the hand winner,
    /// a fair coin on split pots.
    pub fn standard(tree: &GameTree) -> Self {
        let chance_probs = tree
            .chance_action_counts()
            .into_iter()
            .map(|k| vec![1.0 / k as f64; k])
            .collect();
        let reward_p = (0..tree.num_terminals())
            .map(|t| match tree.terminal_info(t).winner() {
                Some(crate::game::Player::One) => 1.0,
                Some(crate::game::Player::Two) => 0.0,
                None => 0.5,
            })
            .collect();
        EnvironmentSpec {
            chance_probs,
            reward_p,
        }
    }

    /// Uniform chance with expected rewards equal to player one's net chip
    /// gain divided by the contribution cap, so the reward table reproduces
    /// the poker payoffs up to scale.
    pub fn chip_scaled(tree: &GameTree) -> Self {
        let scale = tree.max_contribution().max(1) as f64;
        let mut env = Self::standard(tree);
        env.reward_p = (0..tree.num_terminals())
            .map(|t| 0.5 * (1.0 + tree.terminal_info(t).chip_payoff() / scale))
            .collect();
        env
    }

    pub fn validate(&self, tree: &GameTree) -> Result<()> {
        if self.chance_probs.len() != tree.num_chance_nodes() {
            return Err(Error::LengthMismatch {
                expected: tree.num_chance_nodes(),
                actual: self.chance_probs.len(),
            });
        }
        if self.reward_p.len() != tree.num_terminals() {
            return Err(Error::LengthMismatch {
                expected: tree.num_terminals(),
                actual: self.reward_p.len(),
            });
        }
        for (c, (probs, k)) in self
            .chance_probs
            .iter()
            .zip(tree.chance_action_counts())
            .enumerate()
        {
            if probs.len() != k {
                return Err(Error::InvalidEnvironment(format!(
                    "chance node {c} has {k} actions but {} probabilities",
                    probs.len()
                )));
            }
            if probs.iter().any(|&p| !p.is_finite() || p < 0.0) {
                return Err(Error::InvalidEnvironment(format!(
                    "chance node {c} has a negative probability"
                )));
            }
            let sum: f64 = probs.iter().sum();
            if (sum - 1.0).abs() > SUM_TOLERANCE {
                return Err(Error::InvalidEnvironment(format!(
                    "chance node {c} sums to {sum}"
                )));
            }
        }
        if let Some(t) = self
            .reward_p
            .iter()
            .position(|p| !(0.0..=1.0).contains(p))
        {
            return Err(Error::InvalidEnvironment(format!(
                "terminal {t} has p(+1) = {}",
                self.reward_p[t]
            )));
        }
        Ok(())
    }

    /// Expected player-one reward at a terminal: 2 p(+1) - 1.
    pub fn expected_reward(&self, terminal_index: usize) -> f64 {
        2.0 * self.reward_p[terminal_index] - 1.0
    }

    pub fn expected_rewards(&self) -> Vec<f64> {
        (0..self.reward_p.len()).map(|t| self.expected_reward(t)).collect()
    }
}

/// Sufficient statistics of everything observed in the true environment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DataPool {
    pub chance_counts: Vec<Vec<u64>>,
    /// Per terminal: `[count of +1, count of -1]`.
    pub reward_counts: Vec<[u64; 2]>,
}

impl DataPool {
    pub fn new(tree: &GameTree) -> Self {
        DataPool {
            chance_counts: tree
                .chance_action_counts()
                .into_iter()
                .map(|k| vec![0; k])
                .collect(),
            reward_counts: vec![[0, 0]; tree.num_terminals()],
        }
    }

    pub fn validate(&self, tree: &GameTree) -> Result<()> {
        let expected = tree.chance_action_counts();
        if self.chance_counts.len() != expected.len() {
            return Err(Error::LengthMismatch {
                expected: expected.len(),
                actual: self.chance_counts.len(),
            });
        }
        for (counts, k) in self.chance_counts.iter().zip(expected) {
            if counts.len() != k {
                return Err(Error::LengthMismatch {
                    expected: k,
                    actual: counts.len(),
                });
            }
        }
        if self.reward_counts.len() != tree.num_terminals() {
            return Err(Error::LengthMismatch {
                expected: tree.num_terminals(),
                actual: self.reward_counts.len(),
            });
        }
        Ok(())
    }

    pub fn observations(&self, terminal_index: usize) -> u64 {
        let [pos, neg] = self.reward_counts[terminal_index];
        pos + neg
    }

    /// Number of recorded episodes (each ends in exactly one terminal).
    pub fn total_episodes(&self) -> u64 {
        self.reward_counts.iter().map(|[p, n]| p + n).sum()
    }

    /// Adds every chance step and realized reward of `trajectories`.
    pub fn record(&mut self, tree: &GameTree, trajectories: &[Trajectory]) {
        for traj in trajectories {
            for &(node, action) in &traj.steps {
                if let Some(c) = tree.node(node).chance_index {
                    self.chance_counts[c][action] += 1;
                }
            }
            let slot = if traj.reward > 0 { 0 } else { 1 };
            self.reward_counts[traj.terminal_index][slot] += 1;
        }
    }
}

/// One simulated play: the `(node, action)` edges from the root, the terminal
/// reached and player one's realized reward.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trajectory {
    pub steps: Vec<(NodeId, usize)>,
    pub terminal_index: usize,
    pub reward: i8,
}

/// Draws an index from `probs` by inverting the cumulative sum. Zero-weight
/// entries are never chosen.
pub fn sample_index(probs: &[f64], rng: &mut Rng) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p > 0.0 {
            acc += p;
            last = i;
            if u < acc {
                return i;
            }
        }
    }
    last
}

fn flat_dirichlet(alphas: impl Iterator<Item = f64>, rng: &mut Rng) -> Vec<f64> {
    let draws: Vec<f64> = alphas
        .map(|a| Gamma::new(a, 1.0).expect("positive shape").sample(rng))
        .collect();
    if draws.len() == 1 {
        return vec![1.0];
    }
    let sum: f64 = draws.iter().sum();
    if sum > 0.0 {
        draws.iter().map(|g| g / sum).collect()
    } else {
        vec![1.0 / draws.len() as f64; draws.len()]
    }
}

/// A hidden environment: flat Dirichlet chance vectors and uniform p(+1).
pub fn make_true_environment(tree: &GameTree, seed: u64) -> EnvironmentSpec {
    sample_environment(tree, &DataPool::new(tree), seed)
}

/// Posterior draw given the pool: Dirichlet(1 + counts) at chance nodes and
/// Beta(1 + #(+1), 1 + #(-1)) at terminals.
pub fn sample_environment(tree: &GameTree, pool: &DataPool, seed: u64) -> EnvironmentSpec {
    debug_assert!(pool.validate(tree).is_ok());
    let mut rng = rng(seed);
    let chance_probs = pool
        .chance_counts
        .iter()
        .map(|counts| flat_dirichlet(counts.iter().map(|&n| 1.0 + n as f64), &mut rng))
        .collect();
    let reward_p = pool
        .reward_counts
        .iter()
        .map(|&[pos, neg]| {
            Beta::new(1.0 + pos as f64, 1.0 + neg as f64)
                .expect("positive shapes")
                .sample(&mut rng)
        })
        .collect();
    EnvironmentSpec {
        chance_probs,
        reward_p,
    }
}

/// Plays `episodes` hands in `env` with both players following `profile`.
pub fn interact(
    tree: &GameTree,
    env: &EnvironmentSpec,
    profile: &StrategyProfile,
    episodes: usize,
    seed: u64,
) -> Vec<Trajectory> {
    let mut rng = rng(seed);
    (0..episodes)
        .map(|_| play_once(tree, env, profile, &mut rng))
        .collect()
}

fn play_once(
    tree: &GameTree,
    env: &EnvironmentSpec,
    profile: &StrategyProfile,
    rng: &mut Rng,
) -> Trajectory {
    let mut steps = Vec::new();
    let mut node = tree.root();
    loop {
        let n = tree.node(node);
        let action = match n.kind {
            NodeKind::Terminal => break,
            NodeKind::Chance => sample_index(&env.chance_probs[n.chance_index.unwrap()], rng),
            NodeKind::Decision(_) => sample_index(profile.get(n.infoset.unwrap()), rng),
        };
        steps.push((node, action));
        node = n.children[action];
    }
    let terminal_index = tree.node(node).terminal_index.unwrap();
    let reward = if rng.random::<f64>() < env.reward_p[terminal_index] {
        1
    } else {
        -1
    };
    Trajectory {
        steps,
        terminal_index,
        reward,
    }
}

/// Returns `pool` with `trajectories` recorded.
pub fn update_pool(tree: &GameTree, mut pool: DataPool, trajectories: &[Trajectory]) -> DataPool {
    pool.record(tree, trajectories);
    pool
}

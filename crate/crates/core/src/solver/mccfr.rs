use rand::SeedableRng;

use super::{AugmentedRewards, SolverState};
use crate::env::{sample_index, EnvironmentSpec};
use crate::game::{GameTree, NodeId, NodeKind, Player};
use crate::seed::Rng;

/// A sampled root-to-terminal play.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampledPlay {
    pub steps: Vec<(NodeId, usize)>,
    pub terminal_index: usize,
}

/// Traverser sampling distribution: `eps` uniform mixed with `1 - eps` of
/// the current strategy.
pub fn exploration_mix(sigma: &[f64], eps: f64) -> Vec<f64> {
    let k = sigma.len() as f64;
    sigma.iter().map(|&s| eps / k + (1.0 - eps) * s).collect()
}

/// Samples one play: `traverser` follows [`exploration_mix`], the opponent
/// its current strategy and chance its probabilities.
pub fn os_sample_play(
    tree: &GameTree,
    chance: &[Vec<f64>],
    current: &[Vec<f64>],
    traverser: Player,
    eps: f64,
    rng: &mut Rng,
) -> SampledPlay {
    let mut steps = Vec::new();
    let mut node = tree.root();
    loop {
        let n = tree.node(node);
        let a = match n.kind {
            NodeKind::Terminal => break,
            NodeKind::Chance => sample_index(&chance[n.chance_index.unwrap()], rng),
            NodeKind::Decision(p) => {
                let sigma = &current[n.infoset.unwrap().0];
                if p == traverser {
                    sample_index(&exploration_mix(sigma, eps), rng)
                } else {
                    sample_index(sigma, rng)
                }
            }
        };
        steps.push((node, a));
        node = n.children[a];
    }
    SampledPlay {
        steps,
        terminal_index: tree.node(node).terminal_index.unwrap(),
    }
}

/// Probability that [`os_sample_play`] produces `play`.
pub fn os_play_probability(
    tree: &GameTree,
    chance: &[Vec<f64>],
    current: &[Vec<f64>],
    traverser: Player,
    eps: f64,
    play: &SampledPlay,
) -> f64 {
    play.steps
        .iter()
        .map(|&(node, a)| {
            let n = tree.node(node);
            match n.kind {
                NodeKind::Chance => chance[n.chance_index.unwrap()][a],
                NodeKind::Decision(p) => {
                    let sigma = &current[n.infoset.unwrap().0];
                    if p == traverser {
                        exploration_mix(sigma, eps)[a]
                    } else {
                        sigma[a]
                    }
                }
                NodeKind::Terminal => unreachable!(),
            }
        })
        .product()
}

/// Importance-weighted regret and average-strategy update for `traverser`
/// along one sampled play.
///
/// With `W = u(z) / q(z)`, where `q` is the traverser's sampling
/// probability of the play, the sampled regret of action `b` at a traverser
/// infoset whose sampled action is `a` is `W * tail * ([b = a] - sigma(a))`,
/// `tail` being the traverser's strategy probability of the rest of the play
/// after `a`. Opponent and chance factors cancel because they are sampled
/// on-policy. Strategy sums receive `sigma * pi(h) / q(h)` from the
/// traverser's reach and sampling probability up to each infoset.
pub fn os_update(
    state: &mut SolverState,
    tree: &GameTree,
    rewards: &AugmentedRewards,
    traverser: Player,
    eps: f64,
    play: &SampledPlay,
) {
    // (infoset, sampled action, sigma(a), sampling probability of a)
    let mut mine = Vec::new();
    for &(node, a) in &play.steps {
        let n = tree.node(node);
        if n.kind == NodeKind::Decision(traverser) {
            let k = n.infoset.unwrap().0;
            let sigma = state.current[k][a];
            let q = exploration_mix(&state.current[k], eps)[a];
            mine.push((k, a, sigma, q));
        }
    }
    let q_total: f64 = mine.iter().map(|m| m.3).product();
    let w = rewards.utility(play.terminal_index, traverser) / q_total;

    let mut reach = 1.0;
    let mut sample_reach = 1.0;
    for &(k, _, sigma, q) in &mine {
        let scale = reach / sample_reach;
        for (s, &p) in state.strategy_sum[k].iter_mut().zip(&state.current[k]) {
            *s += scale * p;
        }
        reach *= sigma;
        sample_reach *= q;
    }

    let mut tail = 1.0;
    for &(k, a, sigma, _) in mine.iter().rev() {
        for b in 0..state.regrets[k].len() {
            let hit = if b == a { 1.0 } else { 0.0 };
            state.regrets[k][b] += w * tail * (hit - sigma);
        }
        tail *= sigma;
    }
}

/// One outcome-sampling round: one sampled play and update per player,
/// player one first.
pub fn mccfr_os_round(
    tree: &GameTree,
    env: &EnvironmentSpec,
    rewards: &AugmentedRewards,
    state: &mut SolverState,
    eps: f64,
    seed: u64,
) {
    state.t += 1;
    let mut rng = Rng::seed_from_u64(seed);
    for p in Player::BOTH {
        let play = os_sample_play(tree, &env.chance_probs, &state.current, p, eps, &mut rng);
        os_update(state, tree, rewards, p, eps, &play);
        state.refresh(tree, Some(p));
    }
}

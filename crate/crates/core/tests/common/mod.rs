//! Test oracles written against the rules of the games, not the builders.
#![allow(dead_code)]

use std::collections::HashMap;

use cfrlab::game::{GameSpec, GameTree, NodeKind, Player, TerminalInfo};

pub const KUHN_CARDS: [&str; 3] = ["J", "Q", "K"];

/// Kuhn betting sequences: c = check/call, b = bet, f = fold.
pub fn kuhn_is_terminal(history: &str) -> bool {
    matches!(history, "cc" | "bc" | "bf" | "cbc" | "cbf")
}

pub fn kuhn_actions(history: &str) -> &'static [char] {
    if history.ends_with('b') {
        &['f', 'c']
    } else {
        &['c', 'b']
    }
}

pub fn kuhn_to_act(history: &str) -> usize {
    history.len() % 2
}

/// Chips won by player one at a terminal history with cards `(c1, c2)`.
pub fn kuhn_chips(cards: (usize, usize), history: &str) -> f64 {
    let showdown = if cards.0 > cards.1 { 1.0 } else { -1.0 };
    match history {
        "cc" => showdown,
        "bc" | "cbc" => 2.0 * showdown,
        "bf" => 1.0,
        "cbf" => -1.0,
        _ => panic!("not terminal: {history}"),
    }
}

pub fn kuhn_deals() -> Vec<(usize, usize)> {
    let mut d = Vec::new();
    for a in 0..3 {
        for b in 0..3 {
            if a != b {
                d.push((a, b));
            }
        }
    }
    d
}

pub fn deal_label(cards: (usize, usize)) -> String {
    format!("{}{}", KUHN_CARDS[cards.0], KUHN_CARDS[cards.1])
}

pub fn infoset_key(cards: (usize, usize), history: &str) -> String {
    let card = if kuhn_to_act(history) == 0 { cards.0 } else { cards.1 };
    format!("{}:{history}", KUHN_CARDS[card])
}

/// Every history (deal label plus betting string) of Kuhn poker, the
/// root chance node included as the empty deal.
pub fn kuhn_histories() -> Vec<(Option<(usize, usize)>, String)> {
    fn rec(cards: (usize, usize), h: String, out: &mut Vec<(Option<(usize, usize)>, String)>) {
        out.push((Some(cards), h.clone()));
        if !kuhn_is_terminal(&h) {
            for &a in kuhn_actions(&h) {
                rec(cards, format!("{h}{a}"), out);
            }
        }
    }
    let mut out = vec![(None, String::new())];
    for cards in kuhn_deals() {
        rec(cards, String::new(), &mut out);
    }
    out
}

/// Looks up tree positions by action labels along their paths.
pub struct KuhnIndex {
    /// (deal, betting) -> terminal index
    pub terminal: HashMap<(String, String), usize>,
    /// deal label -> action index at the root chance node
    pub deal: HashMap<String, usize>,
}

impl KuhnIndex {
    pub fn new(tree: &GameTree) -> Self {
        let mut terminal = HashMap::new();
        for z in 0..tree.num_terminals() {
            let path = tree.path_to(tree.terminal_node(z));
            let deal = tree.node(path[0].0).actions[path[0].1].clone();
            let betting: String = path[1..]
                .iter()
                .map(|&(n, a)| tree.node(n).actions[a].clone())
                .collect();
            terminal.insert((deal, betting), z);
        }
        let root = tree.node(tree.root());
        assert_eq!(root.kind, NodeKind::Chance);
        let deal = root
            .actions
            .iter()
            .enumerate()
            .map(|(i, l)| (l.clone(), i))
            .collect();
        KuhnIndex { terminal, deal }
    }
}

/// Strategy of one infoset keyed by its information-set key; actions in the
/// order of [`kuhn_actions`].
pub type KeyedProfile = HashMap<String, Vec<f64>>;

/// Expected utility for `player` of history `h` under `profile`, with
/// terminal utilities given for player one by `u1`.
pub fn kuhn_value(
    cards: (usize, usize),
    h: &str,
    profile: &KeyedProfile,
    u1: &dyn Fn((usize, usize), &str) -> f64,
    player: usize,
) -> f64 {
    if kuhn_is_terminal(h) {
        let u = u1(cards, h);
        return if player == 0 { u } else { -u };
    }
    let sigma = &profile[&infoset_key(cards, h)];
    kuhn_actions(h)
        .iter()
        .zip(sigma)
        .map(|(&a, &p)| p * kuhn_value(cards, &format!("{h}{a}"), profile, u1, player))
        .sum()
}

/// Counterfactual regrets of one round for `player`, keyed by infoset key:
/// for every history of the infoset, opponent and chance reach times the
/// action value minus the strategy value.
pub fn kuhn_regrets(
    profile: &KeyedProfile,
    deal_probs: &HashMap<(usize, usize), f64>,
    u1: &dyn Fn((usize, usize), &str) -> f64,
    player: usize,
) -> HashMap<String, Vec<f64>> {
    let mut out: HashMap<String, Vec<f64>> = HashMap::new();
    for cards in kuhn_deals() {
        // walk histories with the opponent's reach
        let mut stack = vec![(String::new(), deal_probs[&cards])];
        while let Some((h, reach)) = stack.pop() {
            if kuhn_is_terminal(&h) {
                continue;
            }
            let key = infoset_key(cards, &h);
            let sigma = profile[&key].clone();
            let actions = kuhn_actions(&h);
            if kuhn_to_act(&h) == player {
                let values: Vec<f64> = actions
                    .iter()
                    .map(|&a| kuhn_value(cards, &format!("{h}{a}"), profile, u1, player))
                    .collect();
                let v: f64 = values.iter().zip(&sigma).map(|(x, p)| x * p).sum();
                let entry = out.entry(key).or_insert_with(|| vec![0.0; actions.len()]);
                for (e, x) in entry.iter_mut().zip(&values) {
                    *e += reach * (x - v);
                }
                for &a in actions {
                    stack.push((format!("{h}{a}"), reach));
                }
            } else {
                for (&a, &p) in actions.iter().zip(&sigma) {
                    stack.push((format!("{h}{a}"), reach * p));
                }
            }
        }
    }
    out
}

pub fn regret_matching(r: &[f64]) -> Vec<f64> {
    let pos: Vec<f64> = r.iter().map(|x| x.max(0.0)).collect();
    let s: f64 = pos.iter().sum();
    if s > 0.0 {
        pos.iter().map(|x| x / s).collect()
    } else {
        vec![1.0 / r.len() as f64; r.len()]
    }
}

/// All pure strategies of `player` in Kuhn as keyed profiles.
pub fn kuhn_pure_strategies(player: usize) -> Vec<KeyedProfile> {
    let histories: &[&str] = if player == 0 { &["", "cb"] } else { &["c", "b"] };
    let mut keys = Vec::new();
    for card in KUHN_CARDS {
        for h in histories {
            keys.push(format!("{card}:{h}"));
        }
    }
    (0..1u32 << keys.len())
        .map(|mask| {
            keys.iter()
                .enumerate()
                .map(|(i, k)| {
                    let a = (mask >> i) & 1;
                    (k.clone(), if a == 0 { vec![1.0, 0.0] } else { vec![0.0, 1.0] })
                })
                .collect()
        })
        .collect()
}

/// A hand-built tree: a chance node with outcome probabilities given by the
/// environment, one player-one infoset per outcome (two actions), then one
/// player-two infoset that sees nothing (two actions).
pub fn two_level_tree() -> GameTree {
    let leaf = || GameSpec::Terminal(TerminalInfo::default());
    let p2 = || GameSpec::Decision {
        player: Player::Two,
        infoset: "p2".into(),
        actions: vec![("l".into(), leaf()), ("r".into(), leaf())],
    };
    let p1 = |key: &str| GameSpec::Decision {
        player: Player::One,
        infoset: key.into(),
        actions: vec![("u".into(), p2()), ("d".into(), p2())],
    };
    let spec = GameSpec::Chance(vec![("x".into(), p1("p1x")), ("y".into(), p1("p1y"))]);
    GameTree::from_spec("two-level", spec, 1, 1).unwrap()
}

pub mod checks {
    //! Measurements shared by the integration tests and the acceptance run.

    use std::collections::HashMap;

    use rand::{Rng as _, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    use cfrlab::bnn::{gaussian_kl, softplus, softplus_inv, BnnConfig, BnnPosterior, Example};
    use cfrlab::env::{make_true_environment, EnvironmentSpec};
    use cfrlab::game::{build_kuhn, GameTree, Player};
    use cfrlab::solver::{
        cfr_round, os_play_probability, os_update, traverse, AugmentedRewards, CfrParams,
        SampledPlay, SolverState, UpdateScheme,
    };

    use super::*;

    fn keyed(tree: &GameTree, probs: &[Vec<f64>]) -> KeyedProfile {
        tree.infosets()
            .iter()
            .map(|i| (i.key.clone(), probs[i.id.0].clone()))
            .collect()
    }

    fn oracle_regrets(
        tree: &GameTree,
        env: &EnvironmentSpec,
        profile: &KeyedProfile,
        player: usize,
    ) -> HashMap<String, Vec<f64>> {
        let index = KuhnIndex::new(tree);
        let deal_probs: HashMap<(usize, usize), f64> = kuhn_deals()
            .into_iter()
            .map(|c| (c, env.chance_probs[0][index.deal[&deal_label(c)]]))
            .collect();
        let u1 = |c: (usize, usize), h: &str| {
            env.expected_reward(index.terminal[&(deal_label(c), h.to_string())])
        };
        kuhn_regrets(profile, &deal_probs, &u1, player)
    }

    fn max_regret_gap(
        tree: &GameTree,
        before: &SolverState,
        after: &SolverState,
        expected: &HashMap<String, Vec<f64>>,
        player: Player,
    ) -> f64 {
        let mut worst: f64 = 0.0;
        for info in tree.infosets().iter().filter(|i| i.owner == player) {
            for (a, want) in expected[&info.key].iter().enumerate() {
                let got = after.regrets[info.id.0][a] - before.regrets[info.id.0][a];
                worst = worst.max((got - want).abs());
            }
        }
        worst
    }

    /// Largest difference between `cfr_round` regret increments on Kuhn and
    /// the expectimax oracle over `rounds` rounds in a random environment.
    pub fn kuhn_regret_oracle_gap(scheme: UpdateScheme, rounds: usize, env_seed: u64) -> f64 {
        let tree = build_kuhn();
        let env = make_true_environment(&tree, env_seed);
        let rewards = AugmentedRewards::plain(env.expected_rewards());
        let params = CfrParams {
            scheme,
            ..Default::default()
        };
        let mut state = SolverState::new(&tree);
        let mut worst: f64 = 0.0;
        for _ in 0..rounds {
            let before = state.clone();
            let mut profile = keyed(&tree, &before.current);
            let r1 = oracle_regrets(&tree, &env, &profile, 0);
            if scheme == UpdateScheme::Alternating {
                // player two faces player one's refreshed strategy
                for info in tree.infosets().iter().filter(|i| i.owner == Player::One) {
                    let cumulative: Vec<f64> = before.regrets[info.id.0]
                        .iter()
                        .zip(&r1[&info.key])
                        .map(|(a, b)| a + b)
                        .collect();
                    profile.insert(info.key.clone(), regret_matching(&cumulative));
                }
            }
            let r2 = oracle_regrets(&tree, &env, &profile, 1);
            cfr_round(&tree, &env, &rewards, &mut state, &params);
            worst = worst
                .max(max_regret_gap(&tree, &before, &state, &r1, Player::One))
                .max(max_regret_gap(&tree, &before, &state, &r2, Player::Two));
        }
        worst
    }

    /// A state whose current strategy is a fixed random interior profile.
    pub fn skewed_state(tree: &GameTree, seed: u64) -> SolverState {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut state = SolverState::new(tree);
        for probs in state.current.iter_mut() {
            let w: Vec<f64> = probs.iter().map(|_| rng.random::<f64>() + 0.1).collect();
            let s: f64 = w.iter().sum();
            *probs = w.iter().map(|x| x / s).collect();
        }
        state.t = 1;
        state
    }

    /// Largest difference between the exact single-player regret update and
    /// the expectation of the outcome-sampling update, enumerated over every
    /// sampled terminal of the two-level tree.
    pub fn outcome_sampling_bias(eps: f64) -> f64 {
        let tree = two_level_tree();
        let env = EnvironmentSpec::new(
            &tree,
            vec![vec![0.3, 0.7]],
            vec![0.9, 0.2, 0.35, 0.6, 0.1, 0.75, 0.5, 0.05],
        )
        .unwrap();
        let rewards = AugmentedRewards::plain(env.expected_rewards());
        let base = skewed_state(&tree, 1);
        let mut worst: f64 = 0.0;
        for p in Player::BOTH {
            let mut exact = base.clone();
            traverse(&tree, &env.chance_probs, &rewards, &mut exact, p, 0.0);
            let mut expected = vec![vec![0.0; 2]; tree.num_infosets()];
            let mut total_q = 0.0;
            for z in 0..tree.num_terminals() {
                let play = SampledPlay {
                    steps: tree.path_to(tree.terminal_node(z)),
                    terminal_index: z,
                };
                let q = os_play_probability(&tree, &env.chance_probs, &base.current, p, eps, &play);
                total_q += q;
                let mut sampled = base.clone();
                os_update(&mut sampled, &tree, &rewards, p, eps, &play);
                for (e, r) in expected.iter_mut().zip(&sampled.regrets) {
                    for (x, y) in e.iter_mut().zip(r) {
                        *x += q * y;
                    }
                }
            }
            worst = worst.max((total_q - 1.0).abs());
            for (e, r) in expected.iter().zip(&exact.regrets) {
                for (x, y) in e.iter().zip(r) {
                    worst = worst.max((x - y).abs());
                }
            }
        }
        worst
    }

    pub fn random_posterior(input_dim: usize, hidden_dim: usize, rng: &mut ChaCha8Rng) -> BnnPosterior {
        let cfg = BnnConfig {
            input_dim,
            hidden_dim,
            ..BnnConfig::small()
        };
        let mut p = BnnPosterior::init(&cfg, rng.random()).unwrap();
        for (m, r) in p.mu.iter_mut().zip(p.rho.iter_mut()) {
            *m = rng.random_range(-1.0..1.0);
            *r = softplus_inv(rng.random_range(0.2..1.5));
        }
        p
    }

    /// Worst relative error between the analytic training-loss gradient and
    /// central finite differences on a one-input, one-hidden-unit network.
    pub fn gradient_check(trials: usize, seed: u64) -> f64 {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let batch: Vec<Example> = vec![(vec![0.3], 1.0), (vec![-0.7], -1.0), (vec![0.9], 1.0)];
        let (kl_weight, sigma_obs, h) = (0.1, 0.5, 1e-6);
        let mut worst: f64 = 0.0;
        for _ in 0..trials {
            let p = random_posterior(1, 1, &mut r);
            let noise = p.draw_noise(&mut r);
            let (_, grad) = p.loss_and_grad(&batch, kl_weight, sigma_obs, &noise).unwrap();
            let loss =
                |q: &BnnPosterior| q.loss_and_grad(&batch, kl_weight, sigma_obs, &noise).unwrap().0;
            for i in 0..p.num_params() {
                for (analytic, is_mu) in [(grad.mu[i], true), (grad.rho[i], false)] {
                    let (mut up, mut down) = (p.clone(), p.clone());
                    let (u, d) = if is_mu {
                        (&mut up.mu[i], &mut down.mu[i])
                    } else {
                        (&mut up.rho[i], &mut down.rho[i])
                    };
                    *u += h;
                    *d -= h;
                    let fd = (loss(&up) - loss(&down)) / (2.0 * h);
                    let rel = (analytic - fd).abs() / analytic.abs().max(fd.abs()).max(1e-8);
                    worst = worst.max(rel);
                }
            }
        }
        worst
    }

    /// Worst gap between closed-form and Monte-Carlo KL over `pairs` random
    /// ten-weight posterior pairs, with `samples` draws each.
    pub fn monte_carlo_kl_gap(pairs: usize, samples: usize, seed: u64) -> f64 {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let mut worst: f64 = 0.0;
        for _ in 0..pairs {
            let a = random_posterior(1, 3, &mut r);
            let mut b = a.clone();
            for (m, rho) in b.mu.iter_mut().zip(b.rho.iter_mut()) {
                *m += r.random_range(-0.3..0.3);
                *rho = softplus_inv(softplus(*rho) * r.random_range(0.7..1.4));
            }
            assert_eq!(a.num_params(), 10);
            let (sa, sb) = (a.sigma(), b.sigma());
            let mut total = 0.0;
            for _ in 0..samples {
                for i in 0..10 {
                    let e: f64 = r.sample(StandardNormal);
                    let zb = (a.mu[i] + sa[i] * e - b.mu[i]) / sb[i];
                    // log q_a(w) - log q_b(w)
                    total += (sb[i] / sa[i]).ln() - 0.5 * e * e + 0.5 * zb * zb;
                }
            }
            let mc = total / samples as f64;
            worst = worst.max((mc - gaussian_kl(&a, &b).unwrap()).abs());
        }
        worst
    }

    /// Number of random posterior pairs with a negative KL, or a KL whose
    /// zero/nonzero status disagrees with parameter equality.
    pub fn kl_sign_violations(pairs: usize, seed: u64) -> usize {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let mut bad = 0;
        for i in 0..pairs {
            let a = random_posterior(1, 3, &mut r);
            let mut b = a.clone();
            for j in 0..b.num_params() {
                if i % 7 != 0 && r.random_bool(0.3) {
                    b.mu[j] += r.random_range(-0.5..0.5);
                    b.rho[j] += r.random_range(-0.5..0.5);
                }
            }
            let kl = gaussian_kl(&a, &b).unwrap();
            if kl < 0.0 || (kl == 0.0) != (a == b) {
                bad += 1;
            }
        }
        bad
    }
}

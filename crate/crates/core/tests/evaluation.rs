mod common;

use rand::{Rng as _, SeedableRng};
use rand_chacha::ChaCha8Rng;

use cfrlab::env::{make_true_environment, EnvironmentSpec};
use cfrlab::eval::{best_response, exploitability, regret_bound_report};
use cfrlab::game::{
    build_kuhn, build_leduc, GameSpec, GameTree, Player, StrategyProfile, TerminalInfo,
};
use cfrlab::solver::{cfr_round, random_policy, AugmentedRewards, CfrParams, SolverState};
use common::*;

fn random_profile(tree: &GameTree, seed: u64) -> StrategyProfile {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let probs = tree
        .infosets()
        .iter()
        .map(|i| {
            let w: Vec<f64> = (0..i.num_actions()).map(|_| rng.random::<f64>()).collect();
            let s: f64 = w.iter().sum();
            w.iter().map(|x| x / s).collect()
        })
        .collect();
    StrategyProfile::from_vecs(tree, probs).unwrap()
}

fn keyed(tree: &GameTree, profile: &StrategyProfile) -> KeyedProfile {
    tree.infosets()
        .iter()
        .map(|i| (i.key.clone(), profile.get(i.id).to_vec()))
        .collect()
}

/// Best value over all pure strategies of `responder`, by enumeration.
fn enumerated_best(tree: &GameTree, env: &EnvironmentSpec, profile: &StrategyProfile, responder: usize) -> f64 {
    let index = KuhnIndex::new(tree);
    let u1 = |c: (usize, usize), h: &str| env.expected_reward(index.terminal[&(deal_label(c), h.to_string())]);
    let base = keyed(tree, profile);
    kuhn_pure_strategies(responder)
        .into_iter()
        .map(|pure| {
            let mut full = base.clone();
            full.extend(pure);
            kuhn_deals()
                .into_iter()
                .map(|c| {
                    env.chance_probs[0][index.deal[&deal_label(c)]]
                        * kuhn_value(c, "", &full, &u1, responder)
                })
                .sum::<f64>()
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

#[test]
fn best_response_matches_pure_strategy_enumeration() {
    let tree = build_kuhn();
    for (seed, env) in [
        (0, EnvironmentSpec::standard(&tree)),
        (1, EnvironmentSpec::chip_scaled(&tree)),
        (2, make_true_environment(&tree, 2)),
    ] {
        for profile in [StrategyProfile::uniform(&tree), random_profile(&tree, seed)] {
            for (i, p) in Player::BOTH.into_iter().enumerate() {
                let br = best_response(&tree, &env, &profile, p).value;
                let oracle = enumerated_best(&tree, &env, &profile, i);
                assert!((br - oracle).abs() < 1e-12, "{p:?}: {br} vs {oracle}");
            }
        }
    }
}

#[test]
fn uniform_kuhn_exploitability_golden_value() {
    // unit showdown payoffs, uniform chance: computed by the enumeration oracle
    let tree = build_kuhn();
    let env = EnvironmentSpec::standard(&tree);
    let uniform = StrategyProfile::uniform(&tree);
    let oracle = enumerated_best(&tree, &env, &uniform, 0) + enumerated_best(&tree, &env, &uniform, 1);
    assert!((oracle - 0.75).abs() < 1e-12, "{oracle}");
    assert!((exploitability(&tree, &env, &uniform) - 0.75).abs() < 1e-12);
    // the random-policy baseline is this profile
    assert_eq!(random_policy(&tree, 9), uniform);
}

#[test]
fn best_response_is_a_fixed_point_and_beats_alternatives() {
    let tree = build_leduc(4).unwrap();
    let env = make_true_environment(&tree, 3);
    let profile = random_profile(&tree, 3);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for p in Player::BOTH {
        let br = best_response(&tree, &env, &profile, p);
        let again = best_response(&tree, &env, &br.strategy, p);
        assert!((again.value - br.value).abs() < 1e-12);
        for _ in 0..5 {
            let alt = profile.with_player_from(&tree, p, &random_profile(&tree, rng.random()));
            let exact = exact_value(&tree, &env, &alt, p);
            assert!(exact <= br.value + 1e-12);
            // the opponent can only do better than its fixed strategy
            let against_br = -best_response(&tree, &env, &alt, p.opponent()).value;
            assert!(against_br <= exact + 1e-12);
        }
    }
}

/// Expected utility of `player` when both follow `profile`.
fn exact_value(tree: &GameTree, env: &EnvironmentSpec, profile: &StrategyProfile, player: Player) -> f64 {
    let rewards = AugmentedRewards::plain(env.expected_rewards());
    cfrlab::solver::root_values(tree, &env.chance_probs, &rewards, profile)[player.index()]
}

#[test]
fn exploitability_is_nonnegative() {
    let tree = build_leduc(4).unwrap();
    for seed in 0..20 {
        let env = make_true_environment(&tree, seed);
        let e = exploitability(&tree, &env, &random_profile(&tree, seed + 100));
        assert!(e >= -1e-9, "{e}");
    }
}

/// Kuhn built from the rules with every action list reversed.
fn reversed_kuhn() -> GameTree {
    fn node(cards: (usize, usize), h: &str) -> GameSpec {
        if kuhn_is_terminal(h) {
            let mut chips = [1, 1];
            let mut facing = false;
            for (i, ch) in h.chars().enumerate() {
                match ch {
                    'b' => {
                        chips[i % 2] += 1;
                        facing = true;
                    }
                    'c' if facing => chips[i % 2] += 1,
                    _ => {}
                }
            }
            let contributions = [chips, [0, 0]];
            let folded = h.ends_with('f').then(|| Player::from_index(kuhn_to_act(&h[..h.len() - 1])).unwrap());
            return GameSpec::Terminal(TerminalInfo {
                private_ranks: [Some(cards.0 as u8), Some(cards.1 as u8)],
                public_rank: None,
                contributions,
                folded,
            });
        }
        let mut actions: Vec<(String, GameSpec)> = kuhn_actions(h)
            .iter()
            .map(|&a| (a.to_string(), node(cards, &format!("{h}{a}"))))
            .collect();
        actions.reverse();
        GameSpec::Decision {
            player: Player::from_index(kuhn_to_act(h)).unwrap(),
            infoset: infoset_key(cards, h),
            actions,
        }
    }
    let mut deals: Vec<(String, GameSpec)> = kuhn_deals()
        .into_iter()
        .map(|c| (deal_label(c), node(c, "")))
        .collect();
    deals.reverse();
    GameTree::from_spec("kuhn", GameSpec::Chance(deals), 3, 2).unwrap()
}

#[test]
fn exploitability_ignores_action_order() {
    let tree = build_kuhn();
    let rev = reversed_kuhn();
    let index = KuhnIndex::new(&tree);
    let rindex = KuhnIndex::new(&rev);
    for (k, v) in &index.terminal {
        let (z, rz) = (*v, rindex.terminal[k]);
        assert_eq!(tree.terminal_info(z).chip_payoff(), rev.terminal_info(rz).chip_payoff(), "{k:?}");
    }
    let env = make_true_environment(&tree, 5);
    let mut reward_p = vec![0.0; rev.num_terminals()];
    for (k, &z) in &index.terminal {
        reward_p[rindex.terminal[k]] = env.reward_p[z];
    }
    let mut chance = vec![0.0; 6];
    for (label, &i) in &index.deal {
        chance[rindex.deal[label]] = env.chance_probs[0][i];
    }
    let renv = EnvironmentSpec::new(&rev, vec![chance], reward_p).unwrap();

    let profile = random_profile(&tree, 5);
    let rprobs = rev
        .infosets()
        .iter()
        .map(|i| {
            let orig = tree.infosets().iter().find(|o| o.key == i.key).unwrap();
            let mut p = profile.get(orig.id).to_vec();
            p.reverse();
            p
        })
        .collect();
    let rprofile = StrategyProfile::from_vecs(&rev, rprobs).unwrap();
    let a = exploitability(&tree, &env, &profile);
    let b = exploitability(&rev, &renv, &rprofile);
    assert!((a - b).abs() < 1e-12, "{a} vs {b}");
}

#[test]
fn bound_holds_on_leduc_after_200_rounds() {
    let tree = build_leduc(4).unwrap();
    let env = make_true_environment(&tree, 6);
    let rewards = AugmentedRewards::plain(env.expected_rewards());
    let mut state = SolverState::new(&tree);
    cfr_round(&tree, &env, &rewards, &mut state, &CfrParams::default());
    regret_bound_report(&state, &tree, &env).unwrap().check().unwrap();
    for _ in 1..200 {
        cfr_round(&tree, &env, &rewards, &mut state, &CfrParams::default());
    }
    let report = regret_bound_report(&state, &tree, &env).unwrap();
    assert_eq!(report.rounds, 200);
    report.check().unwrap();
}

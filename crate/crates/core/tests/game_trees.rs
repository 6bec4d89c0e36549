mod common;

use std::collections::HashSet;

use rand::{Rng as _, SeedableRng};
use rand_chacha::ChaCha8Rng;

use cfrlab::env::{make_true_environment, sample_index, EnvironmentSpec};
use cfrlab::game::{
    all_reaches, build_kuhn, build_leduc, dump_tree, load_tree, reach_probability, GameTree,
    NodeKind, Player, StrategyProfile,
};
use common::*;

fn random_profile(tree: &GameTree, seed: u64) -> StrategyProfile {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let probs = tree
        .infosets()
        .iter()
        .map(|i| {
            let w: Vec<f64> = (0..i.num_actions()).map(|_| rng.random::<f64>() + 0.05).collect();
            let s: f64 = w.iter().sum();
            w.iter().map(|x| x / s).collect()
        })
        .collect();
    StrategyProfile::from_vecs(tree, probs).unwrap()
}

#[test]
fn kuhn_matches_brute_force_enumeration() {
    let tree = build_kuhn();
    let histories = kuhn_histories();
    assert_eq!(tree.num_nodes(), histories.len());
    assert_eq!(tree.num_nodes(), 55);

    let terminals = histories
        .iter()
        .filter(|(c, h)| c.is_some() && kuhn_is_terminal(h))
        .count();
    assert_eq!(tree.num_terminals(), terminals);
    assert_eq!(terminals, 30);

    let keys: HashSet<String> = histories
        .iter()
        .filter_map(|(c, h)| c.filter(|_| !kuhn_is_terminal(h)).map(|c| infoset_key(c, h)))
        .collect();
    assert_eq!(keys.len(), 12);
    let tree_keys: HashSet<String> = tree.infosets().iter().map(|i| i.key.clone()).collect();
    assert_eq!(tree_keys, keys);

    // chip payoffs of every terminal agree with the rules
    let index = KuhnIndex::new(&tree);
    for cards in kuhn_deals() {
        for h in ["cc", "bc", "bf", "cbc", "cbf"] {
            let z = index.terminal[&(deal_label(cards), h.to_string())];
            assert_eq!(tree.terminal_info(z).chip_payoff(), kuhn_chips(cards, h), "{cards:?} {h}");
        }
    }
}

#[test]
fn kuhn_deals_six_equally_likely_pairs() {
    let tree = build_kuhn();
    let env = EnvironmentSpec::standard(&tree);
    assert_eq!(env.chance_probs, vec![vec![1.0 / 6.0; 6]]);
}

#[test]
fn leduc_node_counts() {
    let t4 = build_leduc(4).unwrap();
    let t5 = build_leduc(5).unwrap();
    assert_eq!(t4.num_nodes(), 9_667);
    assert_eq!(t5.num_nodes(), 22_627);
    assert!(build_leduc(3).is_err());
    assert!(build_leduc(6).is_err());
}

#[test]
fn leduc_dump_round_trips_through_a_file() {
    let tree = build_leduc(4).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("leduc4.txt");
    std::fs::write(&path, dump_tree(&tree).unwrap()).unwrap();
    let back = load_tree(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(back, tree);
}

#[test]
fn monte_carlo_reach_matches_exact_reach() {
    let tree = build_kuhn();
    let profile = random_profile(&tree, 3);
    let env = make_true_environment(&tree, 5);
    let plays = 1_000_000;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut visits = vec![0u64; tree.num_nodes()];
    for _ in 0..plays {
        let mut node = tree.root();
        loop {
            visits[node] += 1;
            let n = tree.node(node);
            let a = match n.kind {
                NodeKind::Terminal => break,
                NodeKind::Chance => sample_index(&env.chance_probs[n.chance_index.unwrap()], &mut rng),
                NodeKind::Decision(_) => sample_index(profile.get(n.infoset.unwrap()), &mut rng),
            };
            node = n.children[a];
        }
    }
    let mut pick = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..10 {
        let node = pick.random_range(0..tree.num_nodes());
        let p = reach_probability(&tree, node, &profile, &env.chance_probs).total();
        let freq = visits[node] as f64 / plays as f64;
        let se = (p * (1.0 - p) / plays as f64).sqrt();
        assert!((freq - p).abs() <= 3.0 * se + 1e-12, "node {node}: {freq} vs {p}");
    }
}

#[test]
fn terminal_reach_sums_to_one() {
    for (tree, seed) in [(build_kuhn(), 1), (build_leduc(4).unwrap(), 2)] {
        let profile = random_profile(&tree, seed);
        let env = make_true_environment(&tree, seed);
        let reaches = all_reaches(&tree, &profile, &env.chance_probs);
        let total: f64 = (0..tree.num_terminals())
            .map(|z| reaches[tree.terminal_node(z)].total())
            .sum();
        assert!((total - 1.0).abs() < 1e-9, "{}: {total}", tree.name());
        // children of every node carry exactly the parent's reach
        for n in tree.nodes().iter().filter(|n| !n.is_terminal()) {
            let s: f64 = n.children.iter().map(|&c| reaches[c].total()).sum();
            assert!((s - reaches[n.id].total()).abs() < 1e-12);
        }
    }
}

#[test]
fn reach_factors_multiply_to_total() {
    let tree = build_leduc(4).unwrap();
    let profile = random_profile(&tree, 4);
    let env = make_true_environment(&tree, 4);
    for (id, r) in all_reaches(&tree, &profile, &env.chance_probs).iter().enumerate().step_by(37) {
        let direct = reach_probability(&tree, id, &profile, &env.chance_probs);
        assert_eq!(direct, *r);
        assert_eq!(r.total(), r.player(Player::One) * r.player(Player::Two) * r.chance);
    }
}

#[test]
fn infosets_share_one_owner_and_action_set() {
    let tree = build_leduc(5).unwrap();
    for info in tree.infosets() {
        for &n in &info.nodes {
            let node = tree.node(n);
            assert_eq!(node.kind, NodeKind::Decision(info.owner));
            assert_eq!(node.actions, info.actions);
        }
    }
}

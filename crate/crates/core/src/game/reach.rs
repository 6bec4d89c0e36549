use super::{GameTree, NodeId, NodeKind, Player, StrategyProfile};

/// Reach probability of a node split by contributor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reach {
    pub players: [f64; 2],
    pub chance: f64,
}

impl Reach {
    pub const ROOT: Reach = Reach {
        players: [1.0, 1.0],
        chance: 1.0,
    };

    pub fn total(&self) -> f64 {
        self.players[0] * self.players[1] * self.chance
    }

    pub fn player(&self, p: Player) -> f64 {
        self.players[p.index()]
    }

    /// Reach of everyone except `p`: the opponent times chance.
    pub fn others(&self, p: Player) -> f64 {
        self.players[p.opponent().index()] * self.chance
    }

    /// Reach after taking `action` at `node` with probability `prob`.
    pub(crate) fn step(&self, kind: NodeKind, prob: f64) -> Reach {
        let mut next = *self;
        match kind {
            NodeKind::Decision(p) => next.players[p.index()] *= prob,
            NodeKind::Chance => next.chance *= prob,
            NodeKind::Terminal => unreachable!("terminals have no actions"),
        }
        next
    }
}

fn action_prob(
    tree: &GameTree,
    node: NodeId,
    action: usize,
    profile: &StrategyProfile,
    chance: &[Vec<f64>],
) -> f64 {
    let n = tree.node(node);
    match n.kind {
        NodeKind::Decision(_) => profile.get(n.infoset.expect("decision infoset"))[action],
        NodeKind::Chance => chance[n.chance_index.expect("chance index")][action],
        NodeKind::Terminal => unreachable!("terminals have no actions"),
    }
}

/// Reach probability of `node` under `profile` and the chance table `chance`
/// (indexed by chance index). Factors are multiplied root to node.
pub fn reach_probability(
    tree: &GameTree,
    node: NodeId,
    profile: &StrategyProfile,
    chance: &[Vec<f64>],
) -> Reach {
    tree.path_to(node)
        .into_iter()
        .fold(Reach::ROOT, |reach, (n, a)| {
            reach.step(tree.node(n).kind, action_prob(tree, n, a, profile, chance))
        })
}

/// Reach probabilities of every node, computed in one preorder pass.
pub fn all_reaches(tree: &GameTree, profile: &StrategyProfile, chance: &[Vec<f64>]) -> Vec<Reach> {
    let mut out = vec![Reach::ROOT; tree.num_nodes()];
    for node in tree.nodes() {
        let here = out[node.id];
        for (a, &child) in node.children.iter().enumerate() {
            out[child] = here.step(node.kind, action_prob(tree, node.id, a, profile, chance));
        }
    }
    out
}

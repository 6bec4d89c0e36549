//! Extensive-form game trees.
//!
//! A [`GameTree`] is an immutable, preorder-indexed node arena. Decision nodes
//! are grouped into information sets, chance nodes and terminals get their own
//! dense indices so that environment tables can be flat vectors.

mod dump;
mod kuhn;
mod leduc;
mod profile;
mod reach;

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use dump::{dump_tree, load_tree};
pub use kuhn::build_kuhn;
pub use leduc::{build_leduc, grammar as leduc_grammar};
pub use profile::StrategyProfile;
pub use reach::{all_reaches, reach_probability, Reach};

pub type NodeId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Player {
    One,
    Two,
}

impl Player {
    pub const BOTH: [Player; 2] = [Player::One, Player::Two];

    pub fn index(self) -> usize {
        match self {
            Player::One => 0,
            Player::Two => 1,
        }
    }

    pub fn from_index(i: usize) -> Option<Player> {
        match i {
            0 => Some(Player::One),
            1 => Some(Player::Two),
            _ => None,
        }
    }

    pub fn opponent(self) -> Player {
        match self {
            Player::One => Player::Two,
            Player::Two => Player::One,
        }
    }

    /// +1 for player one, -1 for player two. Rewards are stored from player
    /// one's point of view.
    pub fn sign(self) -> f64 {
        match self {
            Player::One => 1.0,
            Player::Two => -1.0,
        }
    }
}

impl fmt::Display for Player {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.index() + 1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct InfosetId(pub usize);

impl InfosetId {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    Decision(Player),
    Chance,
    Terminal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub id: NodeId,
    pub kind: NodeKind,
    pub parent: Option<NodeId>,
    pub actions: Vec<String>,
    pub children: Vec<NodeId>,
    pub infoset: Option<InfosetId>,
    pub chance_index: Option<usize>,
    pub terminal_index: Option<usize>,
}

impl Node {
    pub fn is_terminal(&self) -> bool {
        self.kind == NodeKind::Terminal
    }

    pub fn player(&self) -> Option<Player> {
        match self.kind {
            NodeKind::Decision(p) => Some(p),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Infoset {
    pub id: InfosetId,
    pub owner: Player,
    pub key: String,
    pub actions: Vec<String>,
    pub nodes: Vec<NodeId>,
}

impl Infoset {
    pub fn num_actions(&self) -> usize {
        self.actions.len()
    }
}

/// Reward-relevant description of a terminal history. Card ranks are zero
/// based; contributions are chips put in per round and player.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TerminalInfo {
    pub private_ranks: [Option<u8>; 2],
    pub public_rank: Option<u8>,
    pub contributions: [[u32; 2]; 2],
    pub folded: Option<Player>,
}

impl TerminalInfo {
    pub fn round_total(&self, round: usize) -> u32 {
        self.contributions[round][0] + self.contributions[round][1]
    }

    pub fn player_total(&self, player: Player) -> u32 {
        self.contributions[0][player.index()] + self.contributions[1][player.index()]
    }

    /// Player one's net chip gain: the loser's contribution goes to the
    /// winner; a split pot returns everything.
    pub fn chip_payoff(&self) -> f64 {
        match self.winner() {
            Some(Player::One) => self.player_total(Player::Two) as f64,
            Some(Player::Two) => -(self.player_total(Player::One) as f64),
            None => 0.0,
        }
    }

    /// Winner under poker showdown rules (pair with the public card beats
    /// high card). `None` means a split pot or missing card information.
    pub fn winner(&self) -> Option<Player> {
        if let Some(p) = self.folded {
            return Some(p.opponent());
        }
        let (a, b) = match self.private_ranks {
            [Some(a), Some(b)] => (a, b),
            _ => return None,
        };
        let strength = |r: u8| -> u32 {
            match self.public_rank {
                Some(p) if p == r => 100 + r as u32,
                _ => r as u32,
            }
        };
        match strength(a).cmp(&strength(b)) {
            std::cmp::Ordering::Greater => Some(Player::One),
            std::cmp::Ordering::Less => Some(Player::Two),
            std::cmp::Ordering::Equal => None,
        }
    }
}

/// Recursive description of a game used to build a [`GameTree`].
#[derive(Debug, Clone)]
pub enum GameSpec {
    Terminal(TerminalInfo),
    Chance(Vec<(String, GameSpec)>),
    Decision {
        player: Player,
        infoset: String,
        actions: Vec<(String, GameSpec)>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GameKind {
    #[serde(rename = "kuhn")]
    Kuhn,
    #[serde(rename = "leduc4")]
    Leduc4,
    #[serde(rename = "leduc5")]
    Leduc5,
}

impl GameKind {
    pub fn build(self) -> GameTree {
        match self {
            GameKind::Kuhn => build_kuhn(),
            GameKind::Leduc4 => build_leduc(4).expect("cap 4 is supported"),
            GameKind::Leduc5 => build_leduc(5).expect("cap 5 is supported"),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GameKind::Kuhn => "kuhn",
            GameKind::Leduc4 => "leduc4",
            GameKind::Leduc5 => "leduc5",
        }
    }
}

impl fmt::Display for GameKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GameKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "kuhn" => Ok(GameKind::Kuhn),
            "leduc4" => Ok(GameKind::Leduc4),
            "leduc5" => Ok(GameKind::Leduc5),
            other => Err(Error::InvalidConfig(format!("unknown game '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GameTree {
    name: String,
    nodes: Vec<Node>,
    infosets: Vec<Infoset>,
    terminals: Vec<NodeId>,
    terminal_info: Vec<TerminalInfo>,
    chance_nodes: Vec<NodeId>,
    rank_count: u8,
    max_contribution: u32,
}

impl GameTree {
    /// Flattens `spec` in preorder. Infoset ids, chance indices and terminal
    /// indices are assigned in order of first appearance.
    pub fn from_spec(
        name: impl Into<String>,
        spec: GameSpec,
        rank_count: u8,
        max_contribution: u32,
    ) -> Result<GameTree> {
        let mut b = Flattener::default();
        b.push(spec, None);
        let tree = GameTree {
            name: name.into(),
            nodes: b.nodes,
            infosets: b.infosets,
            terminals: b.terminals,
            terminal_info: b.terminal_info,
            chance_nodes: b.chance_nodes,
            rank_count,
            max_contribution,
        };
        tree.validate()?;
        Ok(tree)
    }

    pub(crate) fn from_parts(
        name: String,
        nodes: Vec<Node>,
        infosets: Vec<Infoset>,
        terminal_info: Vec<TerminalInfo>,
        rank_count: u8,
        max_contribution: u32,
    ) -> Result<GameTree> {
        let mut terminals = vec![usize::MAX; terminal_info.len()];
        let mut chance_nodes = Vec::new();
        for node in &nodes {
            if let Some(t) = node.terminal_index {
                if t >= terminals.len() || terminals[t] != usize::MAX {
                    return Err(Error::InvalidTree(format!(
                        "terminal index {t} is duplicated or out of range"
                    )));
                }
                terminals[t] = node.id;
            }
            if let Some(c) = node.chance_index {
                if c != chance_nodes.len() {
                    return Err(Error::InvalidTree(format!(
                        "chance index {c} out of order at node {}",
                        node.id
                    )));
                }
                chance_nodes.push(node.id);
            }
        }
        if terminals.contains(&usize::MAX) {
            return Err(Error::InvalidTree("terminal indices are not contiguous".into()));
        }
        let tree = GameTree {
            name,
            nodes,
            infosets,
            terminals,
            terminal_info,
            chance_nodes,
            rank_count,
            max_contribution,
        };
        tree.validate()?;
        Ok(tree)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn root(&self) -> NodeId {
        0
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id]
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn infosets(&self) -> &[Infoset] {
        &self.infosets
    }

    pub fn infoset(&self, id: InfosetId) -> &Infoset {
        &self.infosets[id.0]
    }

    pub fn num_infosets(&self) -> usize {
        self.infosets.len()
    }

    pub fn num_terminals(&self) -> usize {
        self.terminals.len()
    }

    pub fn terminal_node(&self, terminal_index: usize) -> NodeId {
        self.terminals[terminal_index]
    }

    pub fn terminal_info(&self, terminal_index: usize) -> &TerminalInfo {
        &self.terminal_info[terminal_index]
    }

    pub fn num_chance_nodes(&self) -> usize {
        self.chance_nodes.len()
    }

    pub fn chance_node(&self, chance_index: usize) -> NodeId {
        self.chance_nodes[chance_index]
    }

    pub fn chance_nodes(&self) -> &[NodeId] {
        &self.chance_nodes
    }

    pub fn rank_count(&self) -> u8 {
        self.rank_count
    }

    /// Largest total contribution a single player can make.
    pub fn max_contribution(&self) -> u32 {
        self.max_contribution
    }

    /// Edges `(node, action)` from the root down to `node`.
    pub fn path_to(&self, node: NodeId) -> Vec<(NodeId, usize)> {
        let mut path = Vec::new();
        let mut cur = node;
        while let Some(parent) = self.nodes[cur].parent {
            let action = self.nodes[parent]
                .children
                .iter()
                .position(|&c| c == cur)
                .expect("child is listed by its parent");
            path.push((parent, action));
            cur = parent;
        }
        path.reverse();
        path
    }

    /// Action counts of every chance node, in chance-index order.
    pub fn chance_action_counts(&self) -> Vec<usize> {
        self.chance_nodes
            .iter()
            .map(|&n| self.nodes[n].actions.len())
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidTree(msg));
        if self.nodes.is_empty() {
            return bad("tree has no nodes".into());
        }
        if self.nodes[0].parent.is_some() {
            return bad("root has a parent".into());
        }
        let mut seen = vec![false; self.nodes.len()];
        seen[0] = true;
        for (i, node) in self.nodes.iter().enumerate() {
            if node.id != i {
                return bad(format!("node {i} carries id {}", node.id));
            }
            if node.children.len() != node.actions.len() {
                return bad(format!("node {i}: children and actions differ in length"));
            }
            match node.kind {
                NodeKind::Terminal => {
                    if !node.actions.is_empty() {
                        return bad(format!("terminal {i} has actions"));
                    }
                    if node.terminal_index.is_none() {
                        return bad(format!("terminal {i} has no terminal index"));
                    }
                }
                NodeKind::Chance => {
                    if node.infoset.is_some() {
                        return bad(format!("chance node {i} belongs to an infoset"));
                    }
                    if node.chance_index.is_none() {
                        return bad(format!("chance node {i} has no chance index"));
                    }
                }
                NodeKind::Decision(_) => {
                    if node.infoset.is_none() {
                        return bad(format!("decision node {i} has no infoset"));
                    }
                }
            }
            if node.kind != NodeKind::Terminal && node.actions.is_empty() {
                return bad(format!("non-terminal node {i} has no actions"));
            }
            for &c in &node.children {
                if c <= i || c >= self.nodes.len() {
                    return bad(format!("node {i} has out-of-order child {c}"));
                }
                if seen[c] {
                    return bad(format!("node {c} has two parents"));
                }
                seen[c] = true;
                if self.nodes[c].parent != Some(i) {
                    return bad(format!("node {c} does not point back to parent {i}"));
                }
            }
        }
        if seen.iter().any(|s| !s) {
            return bad("tree has unreachable nodes".into());
        }
        for t in 0..self.terminals.len() {
            if self.nodes[self.terminals[t]].terminal_index != Some(t) {
                return bad(format!("terminal index {t} is inconsistent"));
            }
        }
        if self.terminal_info.len() != self.terminals.len() {
            return bad("terminal info table has the wrong length".into());
        }
        for (k, info) in self.infosets.iter().enumerate() {
            if info.id.0 != k {
                return bad(format!("infoset {k} carries id {}", info.id.0));
            }
            if info.actions.is_empty() {
                return bad(format!("infoset {k} has no actions"));
            }
            for &n in &info.nodes {
                let node = &self.nodes[n];
                if node.kind != NodeKind::Decision(info.owner) {
                    return bad(format!("node {n} in infoset {k} has a different owner"));
                }
                if node.infoset != Some(info.id) {
                    return bad(format!("node {n} is not tagged with infoset {k}"));
                }
                if node.actions != info.actions {
                    return bad(format!("node {n} disagrees with infoset {k} on actions"));
                }
            }
        }
        // perfect recall: no ancestor shares the infoset
        for node in &self.nodes {
            let Some(id) = node.infoset else { continue };
            let mut cur = node.parent;
            while let Some(p) = cur {
                if self.nodes[p].infoset == Some(id) {
                    return bad(format!(
                        "nodes {p} and {} of infoset {} lie on one path",
                        node.id, id.0
                    ));
                }
                cur = self.nodes[p].parent;
            }
        }
        Ok(())
    }
}

#[derive(Default)]
struct Flattener {
    nodes: Vec<Node>,
    infosets: Vec<Infoset>,
    keys: HashMap<(Player, String), InfosetId>,
    terminals: Vec<NodeId>,
    terminal_info: Vec<TerminalInfo>,
    chance_nodes: Vec<NodeId>,
}

impl Flattener {
    fn push(&mut self, spec: GameSpec, parent: Option<NodeId>) -> NodeId {
        let id = self.nodes.len();
        self.nodes.push(Node {
            id,
            kind: NodeKind::Terminal,
            parent,
            actions: Vec::new(),
            children: Vec::new(),
            infoset: None,
            chance_index: None,
            terminal_index: None,
        });
        let branches = match spec {
            GameSpec::Terminal(info) => {
                self.nodes[id].terminal_index = Some(self.terminals.len());
                self.terminals.push(id);
                self.terminal_info.push(info);
                return id;
            }
            GameSpec::Chance(branches) => {
                self.nodes[id].kind = NodeKind::Chance;
                self.nodes[id].chance_index = Some(self.chance_nodes.len());
                self.chance_nodes.push(id);
                branches
            }
            GameSpec::Decision {
                player,
                infoset,
                actions,
            } => {
                let labels: Vec<String> = actions.iter().map(|(a, _)| a.clone()).collect();
                let next = InfosetId(self.infosets.len());
                let iid = *self.keys.entry((player, infoset.clone())).or_insert(next);
                if iid == next {
                    self.infosets.push(Infoset {
                        id: iid,
                        owner: player,
                        key: infoset,
                        actions: labels,
                        nodes: Vec::new(),
                    });
                }
                self.infosets[iid.0].nodes.push(id);
                self.nodes[id].kind = NodeKind::Decision(player);
                self.nodes[id].infoset = Some(iid);
                actions
            }
        };
        for (label, child) in branches {
            let c = self.push(child, Some(id));
            self.nodes[id].actions.push(label);
            self.nodes[id].children.push(c);
        }
        id
    }
}

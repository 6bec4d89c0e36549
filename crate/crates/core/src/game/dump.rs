//! Line-oriented text form of a [`GameTree`].
//!
//! ```text
//! # cfrlab game tree v1
//! game kuhn ranks=3 max_contribution=2
//! infoset 0 1 J:
//! node 0 chance - JQ,JK,QJ,QK,KJ,KQ 1,8,... - - 0
//! node 1 decision 1 c,b 2,5 0 - -
//! terminal 0 p1=0 p2=1 pub=- r1=1,1 r2=0,0 fold=-
//! ```
//!
//! Node fields are: id, kind, player, actions, children, infoset,
//! terminal index, chance index; `-` marks an absent value. Infoset keys run
//! to the end of the line.

use std::fmt::Write as _;

use super::{GameTree, Infoset, InfosetId, Node, NodeKind, Player, TerminalInfo};
use crate::error::{Error, Result};

const HEADER: &str = "# cfrlab game tree v1";

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_else(|| "-".into())
}

fn list<T: ToString>(items: &[T]) -> String {
    if items.is_empty() {
        return "-".into();
    }
    items.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

pub fn dump_tree(tree: &GameTree) -> Result<String> {
    let mut out = String::new();
    writeln!(out, "{HEADER}").unwrap();
    writeln!(
        out,
        "game {} ranks={} max_contribution={}",
        tree.name(),
        tree.rank_count(),
        tree.max_contribution()
    )
    .unwrap();
    for info in tree.infosets() {
        writeln!(out, "infoset {} {} {}", info.id.0, info.owner, info.key).unwrap();
    }
    for node in tree.nodes() {
        if let Some(bad) = node
            .actions
            .iter()
            .find(|a| a.is_empty() || a.contains(',') || a.contains(char::is_whitespace) || *a == "-")
        {
            return Err(Error::InvalidTree(format!(
                "action label {bad:?} cannot be written to a tree dump"
            )));
        }
        let (kind, player) = match node.kind {
            NodeKind::Decision(p) => ("decision", p.to_string()),
            NodeKind::Chance => ("chance", "-".into()),
            NodeKind::Terminal => ("terminal", "-".into()),
        };
        writeln!(
            out,
            "node {} {kind} {player} {} {} {} {} {}",
            node.id,
            list(&node.actions),
            list(&node.children),
            opt(node.infoset.map(|i| i.0)),
            opt(node.terminal_index),
            opt(node.chance_index),
        )
        .unwrap();
    }
    for t in 0..tree.num_terminals() {
        let info = tree.terminal_info(t);
        writeln!(
            out,
            "terminal {t} p1={} p2={} pub={} r1={},{} r2={},{} fold={}",
            opt(info.private_ranks[0]),
            opt(info.private_ranks[1]),
            opt(info.public_rank),
            info.contributions[0][0],
            info.contributions[0][1],
            info.contributions[1][0],
            info.contributions[1][1],
            opt(info.folded),
        )
        .unwrap();
    }
    Ok(out)
}

struct LineParser {
    line: usize,
}

impl LineParser {
    fn err(&self, msg: impl Into<String>) -> Error {
        Error::Parse {
            line: self.line,
            msg: msg.into(),
        }
    }

    fn num<T: std::str::FromStr>(&self, s: &str) -> Result<T> {
        s.parse().map_err(|_| self.err(format!("expected a number, got {s:?}")))
    }

    fn opt_num<T: std::str::FromStr>(&self, s: &str) -> Result<Option<T>> {
        if s == "-" {
            Ok(None)
        } else {
            self.num(s).map(Some)
        }
    }

    fn player(&self, s: &str) -> Result<Player> {
        match s {
            "1" => Ok(Player::One),
            "2" => Ok(Player::Two),
            _ => Err(self.err(format!("expected player 1 or 2, got {s:?}"))),
        }
    }

    fn keyed<'a>(&self, field: &'a str, key: &str) -> Result<&'a str> {
        field
            .strip_prefix(key)
            .and_then(|rest| rest.strip_prefix('='))
            .ok_or_else(|| self.err(format!("expected {key}=..., got {field:?}")))
    }

    fn pair(&self, s: &str) -> Result<[u32; 2]> {
        let (a, b) = s
            .split_once(',')
            .ok_or_else(|| self.err(format!("expected a,b got {s:?}")))?;
        Ok([self.num(a)?, self.num(b)?])
    }
}

pub fn load_tree(text: &str) -> Result<GameTree> {
    let mut name = None;
    let mut rank_count = 0u8;
    let mut max_contribution = 0u32;
    let mut infosets: Vec<Infoset> = Vec::new();
    let mut nodes: Vec<Node> = Vec::new();
    let mut terminal_info: Vec<TerminalInfo> = Vec::new();

    for (i, raw) in text.lines().enumerate() {
        let p = LineParser { line: i + 1 };
        let line = raw.trim_end();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (tag, rest) = line.split_once(' ').unwrap_or((line, ""));
        match tag {
            "game" => {
                let f: Vec<&str> = rest.split_whitespace().collect();
                if f.len() != 3 {
                    return Err(p.err("game line needs name, ranks and max_contribution"));
                }
                name = Some(f[0].to_string());
                rank_count = p.num(p.keyed(f[1], "ranks")?)?;
                max_contribution = p.num(p.keyed(f[2], "max_contribution")?)?;
            }
            "infoset" => {
                let mut f = rest.splitn(3, ' ');
                let id: usize = p.num(f.next().unwrap_or(""))?;
                let owner = p.player(f.next().unwrap_or(""))?;
                let key = f.next().unwrap_or("").to_string();
                if id != infosets.len() {
                    return Err(p.err(format!("infoset {id} out of order")));
                }
                infosets.push(Infoset {
                    id: InfosetId(id),
                    owner,
                    key,
                    actions: Vec::new(),
                    nodes: Vec::new(),
                });
            }
            "node" => {
                let f: Vec<&str> = rest.split_whitespace().collect();
                if f.len() != 8 {
                    return Err(p.err(format!("node line has {} fields, expected 8", f.len())));
                }
                let id: usize = p.num(f[0])?;
                if id != nodes.len() {
                    return Err(p.err(format!("node {id} out of order")));
                }
                let kind = match f[1] {
                    "decision" => NodeKind::Decision(p.player(f[2])?),
                    "chance" => NodeKind::Chance,
                    "terminal" => NodeKind::Terminal,
                    other => return Err(p.err(format!("unknown node kind {other:?}"))),
                };
                let actions: Vec<String> = if f[3] == "-" {
                    Vec::new()
                } else {
                    f[3].split(',').map(str::to_string).collect()
                };
                let children: Vec<usize> = if f[4] == "-" {
                    Vec::new()
                } else {
                    f[4].split(',').map(|c| p.num(c)).collect::<Result<_>>()?
                };
                let infoset = p.opt_num::<usize>(f[5])?.map(InfosetId);
                if let Some(iid) = infoset {
                    let info = infosets
                        .get_mut(iid.0)
                        .ok_or_else(|| p.err(format!("unknown infoset {}", iid.0)))?;
                    if info.nodes.is_empty() {
                        info.actions = actions.clone();
                    }
                    info.nodes.push(id);
                }
                nodes.push(Node {
                    id,
                    kind,
                    parent: None,
                    actions,
                    children,
                    infoset,
                    terminal_index: p.opt_num(f[6])?,
                    chance_index: p.opt_num(f[7])?,
                });
            }
            "terminal" => {
                let f: Vec<&str> = rest.split_whitespace().collect();
                if f.len() != 7 {
                    return Err(p.err("terminal line needs 7 fields"));
                }
                let t: usize = p.num(f[0])?;
                if t != terminal_info.len() {
                    return Err(p.err(format!("terminal {t} out of order")));
                }
                let fold = p.keyed(f[6], "fold")?;
                terminal_info.push(TerminalInfo {
                    private_ranks: [
                        p.opt_num(p.keyed(f[1], "p1")?)?,
                        p.opt_num(p.keyed(f[2], "p2")?)?,
                    ],
                    public_rank: p.opt_num(p.keyed(f[3], "pub")?)?,
                    contributions: [p.pair(p.keyed(f[4], "r1")?)?, p.pair(p.keyed(f[5], "r2")?)?],
                    folded: if fold == "-" { None } else { Some(p.player(fold)?) },
                });
            }
            other => {
                return Err(p.err(format!("unknown record {other:?}")));
            }
        }
    }

    let name = name.ok_or_else(|| Error::InvalidTree("missing game line".into()))?;
    for i in 0..nodes.len() {
        for c in nodes[i].children.clone() {
            if c >= nodes.len() {
                return Err(Error::InvalidTree(format!("node {i} has unknown child {c}")));
            }
            if nodes[c].parent.is_some() {
                return Err(Error::InvalidTree(format!("node {c} has two parents")));
            }
            nodes[c].parent = Some(i);
        }
    }
    GameTree::from_parts(name, nodes, infosets, terminal_info, rank_count, max_contribution)
}

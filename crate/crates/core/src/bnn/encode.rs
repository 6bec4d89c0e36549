use crate::game::{GameTree, Player};

pub const ENCODING_DIM: usize = 6;

pub type Encoding = [f64; ENCODING_DIM];

/// Features of a terminal, each in [0, 1]: player one's rank, player two's
/// rank, public rank (ranks map to `(r + 1) / ranks`, absent cards to 0),
/// first-round pot, second-round pot (both over twice the contribution cap)
/// and who folded (0 nobody, 0.5 player one, 1 player two).
pub fn encode_terminal(tree: &GameTree, terminal_index: usize) -> Encoding {
    let info = tree.terminal_info(terminal_index);
    let ranks = tree.rank_count().max(1) as f64;
    let rank = |r: Option<u8>| r.map(|r| (r as f64 + 1.0) / ranks).unwrap_or(0.0);
    let pot_scale = (2 * tree.max_contribution()).max(1) as f64;
    let fold = match info.folded {
        None => 0.0,
        Some(Player::One) => 0.5,
        Some(Player::Two) => 1.0,
    };
    [
        rank(info.private_ranks[0]),
        rank(info.private_ranks[1]),
        rank(info.public_rank),
        info.round_total(0) as f64 / pot_scale,
        info.round_total(1) as f64 / pot_scale,
        fold,
    ]
}

pub fn encode_all(tree: &GameTree) -> Vec<Encoding> {
    (0..tree.num_terminals())
        .map(|t| encode_terminal(tree, t))
        .collect()
}

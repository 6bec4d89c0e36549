use super::{GameSpec, GameTree, Player, TerminalInfo};

const RANKS: [&str; 3] = ["J", "Q", "K"];
const ANTE: u32 = 1;
const BET: u32 = 1;

/// Three-card Kuhn poker. A single chance node deals an ordered pair of
/// distinct cards; each player antes one chip and may bet one more.
pub fn build_kuhn() -> GameTree {
    let mut deals = Vec::with_capacity(6);
    for a in 0..3u8 {
        for b in 0..3u8 {
            if a != b {
                let label = format!("{}{}", RANKS[a as usize], RANKS[b as usize]);
                deals.push((label, betting([a, b], "", [ANTE, ANTE])));
            }
        }
    }
    GameTree::from_spec("kuhn", GameSpec::Chance(deals), 3, ANTE + BET)
        .expect("kuhn tree is well formed")
}

fn terminal(cards: [u8; 2], contrib: [u32; 2], folded: Option<Player>) -> GameSpec {
    GameSpec::Terminal(TerminalInfo {
        private_ranks: [Some(cards[0]), Some(cards[1])],
        public_rank: None,
        contributions: [contrib, [0, 0]],
        folded,
    })
}

fn betting(cards: [u8; 2], history: &str, contrib: [u32; 2]) -> GameSpec {
    let player = if history.len().is_multiple_of(2) {
        Player::One
    } else {
        Player::Two
    };
    let key = format!("{}:{}", RANKS[cards[player.index()] as usize], history);
    let facing = history.ends_with('b');
    let actions = if facing {
        let mut called = contrib;
        called[player.index()] += BET;
        vec![
            ("f".to_string(), terminal(cards, contrib, Some(player))),
            ("c".to_string(), terminal(cards, called, None)),
        ]
    } else {
        let check = if history.is_empty() {
            betting(cards, "c", contrib)
        } else {
            terminal(cards, contrib, None)
        };
        let mut bet = contrib;
        bet[player.index()] += BET;
        vec![
            ("c".to_string(), check),
            ("b".to_string(), betting(cards, &format!("{history}b"), bet)),
        ]
    };
    GameSpec::Decision {
        player,
        infoset: key,
        actions,
    }
}

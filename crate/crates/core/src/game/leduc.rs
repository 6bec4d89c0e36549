use super::{GameSpec, GameTree, Player, TerminalInfo};
use crate::error::{Error, Result};

/// Betting grammar of the capped Leduc variants. All amounts are chips.
///
/// Player one posts the small blind and acts first in both rounds. A call of
/// the big blind does not close the first round: the big blind may still
/// check or raise. Raises must add at least `MIN_RAISE[round]` over the
/// amount being matched and go up in steps of `RAISE_STEP`; there is no limit
/// on the number of raises beyond the cap of `multiple * BIG_BLIND` on each
/// player's total contribution.
pub mod grammar {
    pub const SMALL_BLIND: u32 = 1;
    pub const BIG_BLIND: u32 = 2;
    pub const MIN_RAISE: [u32; 2] = [BIG_BLIND, 2 * BIG_BLIND];
    pub const RAISE_STEP: u32 = BIG_BLIND;
    pub const RANKS: u8 = 3;
    pub const SUITS: u8 = 2;
    pub const DECK: u8 = RANKS * SUITS;
}

use grammar::*;

const RANK_LABELS: [&str; 3] = ["J", "Q", "K"];
const SUIT_LABELS: [&str; 2] = ["s", "h"];

fn rank(card: u8) -> u8 {
    card / SUITS
}

fn card_label(card: u8) -> String {
    format!(
        "{}{}",
        RANK_LABELS[rank(card) as usize],
        SUIT_LABELS[(card % SUITS) as usize]
    )
}

/// Two-round Leduc hold'em over a six-card deck with every player's total
/// contribution capped at `max_bet_multiple` big blinds.
pub fn build_leduc(max_bet_multiple: u32) -> Result<GameTree> {
    if !(max_bet_multiple == 4 || max_bet_multiple == 5) {
        return Err(Error::UnsupportedBetCap(max_bet_multiple));
    }
    let builder = Builder {
        cap: max_bet_multiple * BIG_BLIND,
    };
    let deal_first = (0..DECK)
        .map(|c1| {
            let deal_second = (0..DECK)
                .filter(|&c2| c2 != c1)
                .map(|c2| {
                    let hand = Hand {
                        private: [c1, c2],
                        public: None,
                    };
                    let state = Betting {
                        round: 0,
                        contrib: [SMALL_BLIND, BIG_BLIND],
                        round_start: [0, 0],
                        to_act: Player::One,
                        acted: 0,
                        history: String::new(),
                    };
                    (card_label(c2), builder.betting(&hand, state))
                })
                .collect();
            (card_label(c1), GameSpec::Chance(deal_second))
        })
        .collect();
    GameTree::from_spec(
        format!("leduc{max_bet_multiple}"),
        GameSpec::Chance(deal_first),
        RANKS,
        builder.cap,
    )
}

#[derive(Clone, Copy)]
struct Hand {
    private: [u8; 2],
    public: Option<u8>,
}

#[derive(Clone)]
struct Betting {
    round: usize,
    contrib: [u32; 2],
    round_start: [u32; 2],
    to_act: Player,
    acted: u32,
    history: String,
}

struct Builder {
    cap: u32,
}

impl Builder {
    fn terminal(&self, hand: &Hand, state: &Betting, folded: Option<Player>) -> GameSpec {
        let mut contributions = [[0; 2]; 2];
        if state.round == 0 {
            contributions[0] = state.contrib;
        } else {
            contributions[0] = state.round_start;
            contributions[1] = [
                state.contrib[0] - state.round_start[0],
                state.contrib[1] - state.round_start[1],
            ];
        }
        GameSpec::Terminal(TerminalInfo {
            private_ranks: [Some(rank(hand.private[0])), Some(rank(hand.private[1]))],
            public_rank: hand.public.map(rank),
            contributions,
            folded,
        })
    }

    fn infoset_key(&self, hand: &Hand, state: &Betting) -> String {
        let own = card_label(hand.private[state.to_act.index()]);
        let public = hand.public.map(card_label).unwrap_or_else(|| "-".into());
        format!("{own}|{public}|{}", state.history)
    }

    fn close_round(&self, hand: &Hand, state: Betting) -> GameSpec {
        if state.round == 1 {
            return self.terminal(hand, &state, None);
        }
        let deals = (0..DECK)
            .filter(|c| !hand.private.contains(c))
            .map(|c| {
                let next_hand = Hand {
                    public: Some(c),
                    ..*hand
                };
                let next = Betting {
                    round: 1,
                    contrib: state.contrib,
                    round_start: state.contrib,
                    to_act: Player::One,
                    acted: 0,
                    history: format!("{}/", state.history),
                };
                (card_label(c), self.betting(&next_hand, next))
            })
            .collect();
        GameSpec::Chance(deals)
    }

    fn betting(&self, hand: &Hand, state: Betting) -> GameSpec {
        let me = state.to_act.index();
        let opp = state.to_act.opponent().index();
        let target = state.contrib[opp];
        let facing = target > state.contrib[me];
        // the small blind completing preflop leaves the big blind an option
        let limp = state.round == 0 && state.acted == 0 && facing;
        let mut actions = Vec::new();

        if facing {
            actions.push((
                "f".to_string(),
                self.terminal(hand, &state, Some(state.to_act)),
            ));
        }

        let mut called = state.clone();
        called.contrib[me] = target;
        called.history.push('c');
        let call = if (facing && !limp) || state.acted >= 1 {
            self.close_round(hand, called)
        } else {
            called.to_act = state.to_act.opponent();
            called.acted += 1;
            self.betting(hand, called)
        };
        actions.push(("c".to_string(), call));

        let mut raise_to = target + MIN_RAISE[state.round];
        while raise_to <= self.cap {
            let mut raised = state.clone();
            raised.contrib[me] = raise_to;
            raised.to_act = state.to_act.opponent();
            raised.acted += 1;
            raised.history.push_str(&format!("r{raise_to}"));
            actions.push((format!("r{raise_to}"), self.betting(hand, raised)));
            raise_to += RAISE_STEP;
        }

        GameSpec::Decision {
            player: state.to_act,
            infoset: self.infoset_key(hand, &state),
            actions,
        }
    }
}

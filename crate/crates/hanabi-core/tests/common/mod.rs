#![allow(dead_code)]

use hanabi_core::beliefs::{CardKnowledge, ColorSet, RankSet};
use hanabi_core::card::full_deck;
use hanabi_core::engine::{Fireworks, PositionParts};
use hanabi_core::{Card, Color, GameConfig, GameState, Move};

pub fn cards(s: &str) -> Vec<Card> {
    s.split_whitespace().map(|c| c.parse().unwrap()).collect()
}

/// Knowledge carrying hint marks, with sets pinned to whatever was hinted.
pub fn hinted(color: Option<Color>, rank: Option<u8>) -> CardKnowledge {
    let mut k = CardKnowledge::unknown();
    if let Some(c) = color {
        k.colors = ColorSet::single(c);
        k.hinted_color = Some(c);
    }
    if let Some(r) = rank {
        k.ranks = RankSet::single(r);
        k.hinted_rank = Some(r);
    }
    k
}

pub fn sets(colors: &[Color], ranks: &[u8]) -> CardKnowledge {
    let mut cs = ColorSet::EMPTY;
    colors.iter().for_each(|&c| cs.insert(c));
    let mut rs = RankSet::EMPTY;
    ranks.iter().for_each(|&r| rs.insert(r));
    CardKnowledge::from_sets(cs, rs)
}

pub fn fireworks(h: [u8; 5]) -> Fireworks {
    Fireworks(h)
}

/// Whatever the hands and `prefix` leave over, appended after `prefix` in canonical order.
pub fn complete_deck(hands: &[Vec<Card>], prefix: &[Card]) -> Vec<Card> {
    let mut rest = full_deck();
    for c in hands.iter().flatten().chain(prefix) {
        let i = rest.iter().position(|x| x == c).expect("card available");
        rest.remove(i);
    }
    let mut deck = prefix.to_vec();
    deck.extend(rest);
    deck
}

pub fn config(n: usize, first_player: usize) -> GameConfig {
    let mut c = GameConfig::new(n, 0).unwrap();
    c.first_player = first_player;
    c
}

/// Two-player endgame where P1 takes the last turn with one info token.
pub fn watson_final_turn() -> GameState {
    use Color::*;
    let hands = vec![cards("B3 R1 R4 W5 B3"), cards("R5 G1 Y3 B2 G3")];
    let none = CardKnowledge::unknown();
    let knowledge = vec![
        vec![hinted(None, Some(3)), hinted(None, Some(1)), none, none, none],
        vec![none, none, hinted(None, Some(3)), hinted(Some(B), Some(2)), none],
    ];
    GameState::from_parts(
        config(2, 0),
        PositionParts {
            hands,
            deck: vec![],
            fireworks: fireworks([2, 4, 2, 3, 1]),
            discards: cards(
                "R1 R2 R3 R3 R4 Y1 Y1 Y2 Y4 Y5 G1 G2 G3 G4 G4 G5 W1 W1 W2 W3 W4 W4 B1 B1 B2 B4 B4 B5",
            ),
            info_tokens: 1,
            life_tokens: 3,
            current_player: 1,
            turn_index: 40,
            final_countdown: Some(1),
            knowledge: Some(knowledge),
        },
    )
    .unwrap()
}

/// Two-player endgame where P1 has nothing safe to play.
pub fn sherlock_final_turn() -> GameState {
    use Color::*;
    let rygw = [R, Y, G, W];
    let all = [R, Y, G, W, B];
    let knowledge = vec![
        vec![sets(&[Y, G, W], &[1, 2, 3]), sets(&rygw, &[1, 2, 3]), sets(&rygw, &[1, 2, 3, 4, 5]), CardKnowledge::unknown()],
        vec![
            sets(&rygw, &[1, 3, 4, 5]),
            sets(&rygw, &[1, 2, 3, 4, 5]),
            sets(&rygw, &[1, 2, 3, 4, 5]),
            {
                let mut k = sets(&[B], &[1, 2, 3, 4, 5]);
                k.hinted_color = Some(B);
                k
            },
            sets(&all, &[1, 2, 3, 4, 5]),
        ],
    ];
    GameState::from_parts(
        config(2, 0),
        PositionParts {
            hands: vec![cards("W1 W2 Y4 R3"), cards("Y1 R2 W4 B4 W4")],
            deck: vec![],
            fireworks: fireworks([5, 5, 3, 2, 4]),
            discards: cards("R1 R1 R4 Y1 Y2 Y3 G1 G1 G2 G3 G4 G4 G5 W1 W3 W3 W5 B1 B1 B2 B3 B5"),
            info_tokens: 2,
            life_tokens: 3,
            current_player: 1,
            turn_index: 45,
            final_countdown: Some(1),
            knowledge: Some(knowledge),
        },
    )
    .unwrap()
}

/// Fresh two-player deal seen by P0; the partner holds no 5s.
pub fn fresh_two_player() -> GameState {
    let hands = vec![cards("G2 B3 Y2 R1 G3"), cards("R3 Y1 W3 B2 W1")];
    let deck = complete_deck(&hands, &[]);
    GameState::from_deal(config(2, 0), hands, deck).unwrap()
}

/// Five-player opening where P2 moves first; the judge's example game as seen by P1.
pub fn five_player_game_a() -> (GameState, Vec<Move>) {
    use Color::*;
    let hands = vec![
        cards("G1 R2 R3 G4"),
        cards("W4 R5 R1 Y2"),
        cards("R4 W3 Y1 G3"),
        cards("B1 Y3 G5 B3"),
        cards("B1 B5 G1 W1"),
    ];
    let deck = complete_deck(&hands, &cards("Y4 W2 Y2 G3 G2 B2"));
    let start = GameState::from_deal(config(5, 2), hands, deck).unwrap();
    let moves = vec![
        Move::RevealRank { offset: 1, rank: 1 },
        Move::Play { slot: 0 },
        Move::RevealRank { offset: 1, rank: 1 },
        Move::Play { slot: 0 },
        Move::RevealRank { offset: 1, rank: 1 },
        Move::Play { slot: 2 },
        Move::Discard { slot: 0 },
        Move::RevealColor { offset: 2, color: Y },
        Move::RevealRank { offset: 1, rank: 2 },
        Move::Play { slot: 3 },
        Move::Discard { slot: 0 },
        Move::RevealColor { offset: 1, color: W },
        Move::RevealColor { offset: 3, color: B },
        Move::RevealColor { offset: 1, color: R },
    ];
    (start, moves)
}

/// Second judge example, seen by P2.
pub fn five_player_game_b() -> (GameState, Vec<Move>) {
    use Color::*;
    let hands = vec![
        cards("R2 B1 R3 G4"),
        cards("G1 R1 R1 Y2"),
        cards("R4 W3 Y1 B4"),
        cards("Y3 G1 G5 B3"),
        cards("B1 B5 G1 W1"),
    ];
    let deck = complete_deck(&hands, &cards("Y4 W2 Y2"));
    let start = GameState::from_deal(config(5, 2), hands, deck).unwrap();
    let moves = vec![
        Move::RevealRank { offset: 2, rank: 1 },
        Move::RevealColor { offset: 1, color: B },
        Move::Play { slot: 0 },
        Move::RevealRank { offset: 2, rank: 1 },
        Move::RevealColor { offset: 1, color: Y },
        Move::Play { slot: 2 },
        Move::RevealColor { offset: 3, color: G },
        Move::RevealRank { offset: 2, rank: 1 },
        Move::RevealRank { offset: 3, rank: 1 },
        Move::Play { slot: 0 },
    ];
    (start, moves)
}

pub fn replay(start: &GameState, moves: &[Move]) -> GameState {
    let mut s = start.clone();
    for &m in moves {
        s.step(m).unwrap();
    }
    s
}

pub fn fixture(name: &str) -> String {
    // Sibling-relative so the harness crate can include this module too.
    std::fs::read_to_string(format!("{}/../hanabi-core/tests/fixtures/{name}", env!("CARGO_MANIFEST_DIR"))).unwrap()
}

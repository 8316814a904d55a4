//! The rules engine: deal, legal moves, move application, scoring, termination.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::beliefs::{apply_clue, shift_on_removal, CardKnowledge, Clue};
use crate::card::{full_deck, multiplicity, Card, Color, COLORS};

/// Name of the shuffle used by [`GameState::new_game`]. Bumped whenever deals could change.
pub const SHUFFLE_ALGORITHM: &str = "chacha8-fisher-yates-v1";

pub const MAX_INFO_TOKENS: u8 = 8;
pub const MAX_LIFE_TOKENS: u8 = 3;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("game is over; no legal moves")]
    Terminal,
    #[error("illegal move {mv}: {reason}")]
    IllegalMove { mv: Move, reason: &'static str },
    #[error("inconsistent position: {0}")]
    BadPosition(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum BombOutScoring {
    /// Keep the fireworks total reached when the last life was lost.
    #[default]
    AtFailure,
    /// Standard tabletop rule: losing all lives scores zero.
    Zero,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GameConfig {
    pub n_players: usize,
    pub hand_size: usize,
    pub max_info_tokens: u8,
    pub max_life_tokens: u8,
    pub seed: u64,
    #[serde(default)]
    pub score_on_bombout: BombOutScoring,
    #[serde(default = "default_true")]
    pub five_restores_token: bool,
    /// Seat that takes the first turn.
    #[serde(default)]
    pub first_player: usize,
}

fn default_true() -> bool {
    true
}

impl GameConfig {
    pub fn new(n_players: usize, seed: u64) -> Result<GameConfig, EngineError> {
        let cfg = GameConfig {
            n_players,
            hand_size: hand_size_for(n_players),
            max_info_tokens: MAX_INFO_TOKENS,
            max_life_tokens: MAX_LIFE_TOKENS,
            seed,
            score_on_bombout: BombOutScoring::AtFailure,
            five_restores_token: true,
            first_player: 0,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), EngineError> {
        if !(2..=5).contains(&self.n_players) {
            return Err(EngineError::InvalidConfig(format!("n_players must be 2..=5, got {}", self.n_players)));
        }
        if self.hand_size != hand_size_for(self.n_players) {
            return Err(EngineError::InvalidConfig(format!(
                "hand_size {} does not match {} players",
                self.hand_size, self.n_players
            )));
        }
        if self.max_info_tokens != MAX_INFO_TOKENS || self.max_life_tokens != MAX_LIFE_TOKENS {
            return Err(EngineError::InvalidConfig("token limits are fixed at 8 info and 3 lives".into()));
        }
        if self.first_player >= self.n_players {
            return Err(EngineError::InvalidConfig(format!("first_player {} out of range", self.first_player)));
        }
        Ok(())
    }
}

pub const fn hand_size_for(n_players: usize) -> usize {
    if n_players <= 3 {
        5
    } else {
        4
    }
}

/// Per-color stack heights. Serialized as a `{"R": 0, ...}` map.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct Fireworks(pub [u8; 5]);

impl Fireworks {
    pub fn height(&self, c: Color) -> u8 {
        self.0[c.index()]
    }

    pub fn score(&self) -> u8 {
        self.0.iter().sum()
    }

    pub fn complete(&self) -> bool {
        self.0.iter().all(|&h| h == 5)
    }

    pub fn playable(&self, card: Card) -> bool {
        self.height(card.color) + 1 == card.rank
    }
}

impl fmt::Display for Fireworks {
    /// `R2 Y4 G2 W3 B1`
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in COLORS.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{}{}", c.letter(), self.0[i])?;
        }
        Ok(())
    }
}

impl Serialize for Fireworks {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(5))?;
        for c in COLORS {
            m.serialize_entry(&c, &self.0[c.index()])?;
        }
        m.end()
    }
}

impl<'de> Deserialize<'de> for Fireworks {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let m = alloc::collections::BTreeMap::<Color, u8>::deserialize(d)?;
        let mut fw = [0u8; 5];
        for (c, h) in m {
            if h > 5 {
                return Err(serde::de::Error::custom(format!("stack height {h} above 5")));
            }
            fw[c.index()] = h;
        }
        Ok(Fireworks(fw))
    }
}

/// What a player has been told directly about one of their cards.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Hint {
    pub color: Option<Color>,
    pub rank: Option<u8>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum Move {
    Play { slot: usize },
    Discard { slot: usize },
    RevealColor { offset: usize, color: Color },
    RevealRank { offset: usize, rank: u8 },
}

impl Move {
    pub fn clue(self) -> Option<(usize, Clue)> {
        match self {
            Move::RevealColor { offset, color } => Some((offset, Clue::Color(color))),
            Move::RevealRank { offset, rank } => Some((offset, Clue::Rank(rank))),
            _ => None,
        }
    }

    pub fn is_reveal(self) -> bool {
        self.clue().is_some()
    }

    /// Same move with the clue target written as an absolute seat, e.g. `(Reveal player P4 color W)`.
    pub fn absolute_text(self, actor: usize, n_players: usize) -> String {
        match self {
            Move::RevealColor { offset, color } => {
                format!("(Reveal player P{} color {})", (actor + offset) % n_players, color)
            }
            Move::RevealRank { offset, rank } => {
                format!("(Reveal player P{} rank {})", (actor + offset) % n_players, rank)
            }
            other => format!("{other}"),
        }
    }
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Move::Play { slot } => write!(f, "(Play {slot})"),
            Move::Discard { slot } => write!(f, "(Discard {slot})"),
            Move::RevealColor { offset, color } => write!(f, "(Reveal player +{offset} color {color})"),
            Move::RevealRank { offset, rank } => write!(f, "(Reveal player +{offset} rank {rank})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum MoveOutcome {
    Played { card: Card, success: bool, drew: bool },
    Discarded { card: Card, drew: bool },
    Revealed { target: usize, touched: Vec<usize> },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TerminalReason {
    Perfect,
    DeckExhausted,
    LivesExhausted,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TerminalStatus {
    pub reason: TerminalReason,
    pub final_score: u8,
}

/// One applied move, with the public state around it.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HistoryEntry {
    pub turn: u32,
    pub player: usize,
    pub mv: Move,
    /// Card played or discarded, if any.
    pub card: Option<Card>,
    pub fireworks_before: Fireworks,
    pub fireworks_after: Fireworks,
    pub info_before: u8,
    pub info_after: u8,
    pub lives_after: u8,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameState {
    pub config: GameConfig,
    /// Hidden draw pile; `deck[0]` is drawn next.
    pub deck: Vec<Card>,
    pub hands: Vec<Vec<Card>>,
    pub explicit_hints: Vec<Vec<Hint>>,
    /// Clue-only possibility sets, per player and slot.
    pub knowledge: Vec<Vec<CardKnowledge>>,
    pub fireworks: Fireworks,
    pub discards: Vec<Card>,
    pub info_tokens: u8,
    pub life_tokens: u8,
    pub turn_index: u32,
    pub current_player: usize,
    pub final_countdown: Option<u8>,
    pub terminal: Option<TerminalStatus>,
    pub history: Vec<HistoryEntry>,
}

/// Everything needed to build a mid-game position directly (fixtures, tests).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PositionParts {
    pub hands: Vec<Vec<Card>>,
    pub deck: Vec<Card>,
    pub fireworks: Fireworks,
    pub discards: Vec<Card>,
    pub info_tokens: u8,
    pub life_tokens: u8,
    pub current_player: usize,
    pub turn_index: u32,
    pub final_countdown: Option<u8>,
    /// Defaults to fully unknown when `None`.
    pub knowledge: Option<Vec<Vec<CardKnowledge>>>,
}

impl GameState {
    /// Seeded shuffle, round-robin deal from seat 0.
    pub fn new_game(config: GameConfig) -> Result<GameState, EngineError> {
        config.validate()?;
        let mut deck = full_deck();
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        deck.shuffle(&mut rng);
        let n = config.n_players;
        let mut hands = vec![Vec::with_capacity(config.hand_size); n];
        let mut it = deck.into_iter();
        for _ in 0..config.hand_size {
            for hand in hands.iter_mut() {
                hand.push(it.next().expect("deck holds enough cards for the deal"));
            }
        }
        let deck: Vec<Card> = it.collect();
        GameState::from_deal(config, hands, deck)
    }

    /// Start of game with a given deal and draw pile.
    pub fn from_deal(config: GameConfig, hands: Vec<Vec<Card>>, deck: Vec<Card>) -> Result<GameState, EngineError> {
        let first = config.first_player;
        GameState::from_parts(
            config,
            PositionParts {
                hands,
                deck,
                fireworks: Fireworks::default(),
                discards: Vec::new(),
                info_tokens: MAX_INFO_TOKENS,
                life_tokens: MAX_LIFE_TOKENS,
                current_player: first,
                turn_index: 0,
                final_countdown: None,
                knowledge: None,
            },
        )
    }

    /// Builds an arbitrary position, checking card conservation and token bounds.
    pub fn from_parts(config: GameConfig, parts: PositionParts) -> Result<GameState, EngineError> {
        config.validate()?;
        let n = config.n_players;
        if parts.hands.len() != n {
            return Err(EngineError::BadPosition(format!("{} hands for {n} players", parts.hands.len())));
        }
        if parts.hands.iter().any(|h| h.len() > config.hand_size) {
            return Err(EngineError::BadPosition("hand larger than hand size".into()));
        }
        if parts.info_tokens > MAX_INFO_TOKENS || parts.life_tokens > MAX_LIFE_TOKENS || parts.life_tokens == 0 {
            return Err(EngineError::BadPosition("token counts out of range".into()));
        }
        if parts.current_player >= n {
            return Err(EngineError::BadPosition("current player out of range".into()));
        }
        let knowledge = match parts.knowledge {
            Some(k) => {
                if k.len() != n || k.iter().zip(&parts.hands).any(|(k, h)| k.len() != h.len()) {
                    return Err(EngineError::BadPosition("knowledge shape does not match hands".into()));
                }
                for (kh, hand) in k.iter().zip(&parts.hands) {
                    if kh.iter().zip(hand).any(|(k, c)| !k.admits(*c)) {
                        return Err(EngineError::BadPosition("knowledge excludes the true card".into()));
                    }
                }
                k
            }
            None => parts.hands.iter().map(|h| vec![CardKnowledge::unknown(); h.len()]).collect(),
        };
        let explicit_hints = knowledge
            .iter()
            .map(|h| h.iter().map(|k| Hint { color: k.hinted_color, rank: k.hinted_rank }).collect())
            .collect();
        let state = GameState {
            config,
            deck: parts.deck,
            hands: parts.hands,
            explicit_hints,
            knowledge,
            fireworks: parts.fireworks,
            discards: parts.discards,
            info_tokens: parts.info_tokens,
            life_tokens: parts.life_tokens,
            turn_index: parts.turn_index,
            current_player: parts.current_player,
            final_countdown: parts.final_countdown,
            terminal: None,
            history: Vec::new(),
        };
        state.check_conservation().map_err(EngineError::BadPosition)?;
        Ok(state)
    }

    pub fn n_players(&self) -> usize {
        self.config.n_players
    }

    /// Absolute seat `offset` places after `player`.
    pub fn seat_after(&self, player: usize, offset: usize) -> usize {
        (player + offset) % self.n_players()
    }

    /// Every card in every zone accounts for the canonical multiset exactly.
    pub fn check_conservation(&self) -> Result<(), String> {
        let mut counts = [0u8; 25];
        let mut total = 0usize;
        let mut add = |c: Card| {
            counts[c.slot()] += 1;
            total += 1;
        };
        self.deck.iter().copied().for_each(&mut add);
        self.hands.iter().flatten().copied().for_each(&mut add);
        self.discards.iter().copied().for_each(&mut add);
        for c in COLORS {
            let h = self.fireworks.height(c);
            if h > 5 {
                return Err(format!("{c} stack at {h}"));
            }
            for r in 1..=h {
                add(Card::new(c, r));
            }
        }
        if total != 50 {
            return Err(format!("{total} cards across zones"));
        }
        for (i, &n) in counts.iter().enumerate() {
            let card = Card::from_slot(i);
            if n != multiplicity(card.rank) {
                return Err(format!("{n} copies of {card}"));
            }
        }
        Ok(())
    }

    pub fn is_terminal(&self) -> Option<TerminalStatus> {
        self.terminal
    }

    pub fn score(&self) -> u8 {
        match self.terminal {
            Some(t) => t.final_score,
            None => self.fireworks.score(),
        }
    }

    /// Independent legality predicate over the full move universe.
    pub fn check_move(&self, mv: Move) -> Result<(), EngineError> {
        if self.terminal.is_some() {
            return Err(EngineError::Terminal);
        }
        let illegal = |reason| Err(EngineError::IllegalMove { mv, reason });
        let hand_len = self.hands[self.current_player].len();
        match mv {
            Move::Play { slot } => {
                if slot >= hand_len {
                    return illegal("slot out of range");
                }
            }
            Move::Discard { slot } => {
                if slot >= hand_len {
                    return illegal("slot out of range");
                }
                if self.info_tokens >= self.config.max_info_tokens {
                    return illegal("info tokens are full");
                }
            }
            Move::RevealColor { offset, .. } | Move::RevealRank { offset, .. } => {
                if self.info_tokens == 0 {
                    return illegal("no info tokens");
                }
                if offset == 0 || offset >= self.n_players() {
                    return illegal("bad target offset");
                }
                if let Move::RevealRank { rank, .. } = mv {
                    if !(1..=5).contains(&rank) {
                        return illegal("rank out of range");
                    }
                }
                let (_, clue) = mv.clue().expect("reveal");
                let target = self.seat_after(self.current_player, offset);
                if !self.hands[target].iter().any(|&c| clue.matches(c)) {
                    return illegal("clue touches no card");
                }
            }
        }
        Ok(())
    }

    /// Discards, plays, every color reveal by ascending offset, then every rank reveal by ascending offset.
    pub fn legal_moves(&self) -> Result<Vec<Move>, EngineError> {
        if self.terminal.is_some() {
            return Err(EngineError::Terminal);
        }
        let me = self.current_player;
        let hand_len = self.hands[me].len();
        let mut out = Vec::with_capacity(2 * hand_len + 10 * (self.n_players() - 1));
        if self.info_tokens < self.config.max_info_tokens {
            out.extend((0..hand_len).map(|slot| Move::Discard { slot }));
        }
        out.extend((0..hand_len).map(|slot| Move::Play { slot }));
        if self.info_tokens > 0 {
            for offset in 1..self.n_players() {
                let hand = &self.hands[self.seat_after(me, offset)];
                for color in COLORS {
                    if hand.iter().any(|c| c.color == color) {
                        out.push(Move::RevealColor { offset, color });
                    }
                }
            }
            for offset in 1..self.n_players() {
                let hand = &self.hands[self.seat_after(me, offset)];
                for rank in 1..=5 {
                    if hand.iter().any(|c| c.rank == rank) {
                        out.push(Move::RevealRank { offset, rank });
                    }
                }
            }
        }
        Ok(out)
    }

    /// Pure transition: returns the successor and leaves `self` untouched.
    pub fn apply_move(&self, mv: Move) -> Result<(GameState, MoveOutcome), EngineError> {
        let mut next = self.clone();
        let outcome = next.step(mv)?;
        Ok((next, outcome))
    }

    /// In-place transition; on error the state is unchanged.
    pub fn step(&mut self, mv: Move) -> Result<MoveOutcome, EngineError> {
        self.check_move(mv)?;
        let me = self.current_player;
        let countdown_running = self.final_countdown.is_some();
        let fireworks_before = self.fireworks;
        let info_before = self.info_tokens;
        let mut moved_card = None;

        let outcome = match mv {
            Move::Play { slot } | Move::Discard { slot } => {
                let card = self.hands[me].remove(slot);
                self.explicit_hints[me].remove(slot);
                let drawn = if self.deck.is_empty() { None } else { Some(self.deck.remove(0)) };
                if let Some(c) = drawn {
                    self.hands[me].push(c);
                    self.explicit_hints[me].push(Hint::default());
                }
                self.knowledge[me] =
                    shift_on_removal(&self.knowledge[me], slot, drawn.is_some()).expect("slot checked above");
                moved_card = Some(card);
                if drawn.is_some() && self.deck.is_empty() && !countdown_running {
                    self.final_countdown = Some(self.n_players() as u8);
                }
                if let Move::Play { .. } = mv {
                    let success = self.fireworks.playable(card);
                    if success {
                        self.fireworks.0[card.color.index()] += 1;
                        if card.rank == 5 && self.config.five_restores_token {
                            self.info_tokens = (self.info_tokens + 1).min(self.config.max_info_tokens);
                        }
                    } else {
                        self.life_tokens -= 1;
                        self.discards.push(card);
                    }
                    MoveOutcome::Played { card, success, drew: drawn.is_some() }
                } else {
                    self.discards.push(card);
                    self.info_tokens = (self.info_tokens + 1).min(self.config.max_info_tokens);
                    MoveOutcome::Discarded { card, drew: drawn.is_some() }
                }
            }
            Move::RevealColor { offset, .. } | Move::RevealRank { offset, .. } => {
                let (_, clue) = mv.clue().expect("reveal");
                let target = self.seat_after(me, offset);
                let touched: Vec<usize> = (0..self.hands[target].len())
                    .filter(|&i| clue.matches(self.hands[target][i]))
                    .collect();
                for &i in &touched {
                    let hint = &mut self.explicit_hints[target][i];
                    match clue {
                        Clue::Color(c) => hint.color = Some(c),
                        Clue::Rank(r) => hint.rank = Some(r),
                    }
                }
                self.knowledge[target] = apply_clue(&self.knowledge[target], &touched, clue).expect("legal clue touches a card");
                self.info_tokens -= 1;
                MoveOutcome::Revealed { target, touched }
            }
        };

        if countdown_running {
            if let Some(c) = self.final_countdown.as_mut() {
                *c -= 1;
            }
        }
        self.history.push(HistoryEntry {
            turn: self.turn_index,
            player: me,
            mv,
            card: moved_card,
            fireworks_before,
            fireworks_after: self.fireworks,
            info_before,
            info_after: self.info_tokens,
            lives_after: self.life_tokens,
        });
        self.turn_index += 1;
        self.current_player = (me + 1) % self.n_players();
        self.terminal = self.compute_terminal();
        Ok(outcome)
    }

    fn compute_terminal(&self) -> Option<TerminalStatus> {
        if self.life_tokens == 0 {
            let final_score = match self.config.score_on_bombout {
                BombOutScoring::AtFailure => self.fireworks.score(),
                BombOutScoring::Zero => 0,
            };
            return Some(TerminalStatus { reason: TerminalReason::LivesExhausted, final_score });
        }
        if self.fireworks.complete() {
            return Some(TerminalStatus { reason: TerminalReason::Perfect, final_score: 25 });
        }
        if self.final_countdown == Some(0) {
            return Some(TerminalStatus { reason: TerminalReason::DeckExhausted, final_score: self.fireworks.score() });
        }
        None
    }

    /// JSON with lexicographically sorted keys at every level.
    pub fn canonical_json(&self) -> String {
        let value = serde_json::to_value(self).expect("state serializes");
        serde_json::to_string(&value).expect("value serializes")
    }

    /// Lower-case hex SHA-256 of [`GameState::canonical_json`].
    pub fn state_hash(&self) -> String {
        hex_digest(self.canonical_json().as_bytes())
    }

    /// Players whose turn-since-last entries are the tail of `history`, newest last:
    /// everything applied after `player`'s previous move.
    pub fn actions_since_last_turn(&self, player: usize) -> &[HistoryEntry] {
        let start = self
            .history
            .iter()
            .rposition(|h| h.player == player)
            .map_or(0, |i| i + 1);
        &self.history[start..]
    }
}

pub fn hex_digest(bytes: &[u8]) -> String {
    use core::fmt::Write;
    let digest = Sha256::digest(bytes);
    let mut out = String::with_capacity(64);
    for b in digest.iter() {
        let _ = write!(out, "{b:02x}");
    }
    out
}

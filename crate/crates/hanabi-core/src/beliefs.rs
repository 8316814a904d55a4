//! Clue-only deductive context and the unseen-card probability calculus.
//!
//! Possibility sets shrink only through clues (positive information on the
//! touched slots, negative information on the rest). Discards never prune a
//! set; they enter the picture through [`remaining_counts`].

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write as _;

use num_rational::Ratio;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::Value;
use thiserror::Error;

use crate::card::{multiplicity, Card, Color, COLORS, RANKS};
use crate::engine::GameState;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BeliefError {
    #[error("clue touches no card")]
    EmptyClue,
    #[error("slot {slot} out of range for hand of {len}")]
    SlotOutOfRange { slot: usize, len: usize },
    #[error("no unseen card is consistent with the knowledge")]
    Contradiction,
    #[error("malformed deduction: {0}")]
    Malformed(String),
}

/// A truthful hint: one color or one rank.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Clue {
    Color(Color),
    Rank(u8),
}

impl Clue {
    pub fn matches(self, card: Card) -> bool {
        match self {
            Clue::Color(c) => card.color == c,
            Clue::Rank(r) => card.rank == r,
        }
    }
}

/// Subset of the five colors, bit `i` for `COLORS[i]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct ColorSet(u8);

/// Subset of ranks 1..=5, bit `r - 1` for rank `r`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct RankSet(u8);

impl ColorSet {
    pub const ALL: ColorSet = ColorSet(0b11111);
    pub const EMPTY: ColorSet = ColorSet(0);

    pub fn single(c: Color) -> Self {
        ColorSet(1 << c.index())
    }
    pub fn contains(self, c: Color) -> bool {
        self.0 & (1 << c.index()) != 0
    }
    pub fn insert(&mut self, c: Color) {
        self.0 |= 1 << c.index();
    }
    pub fn remove(&mut self, c: Color) {
        self.0 &= !(1 << c.index());
    }
    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }
    pub fn is_empty(self) -> bool {
        self.0 == 0
    }
    pub fn is_superset(self, other: ColorSet) -> bool {
        self.0 & other.0 == other.0
    }
    pub fn intersect(self, other: ColorSet) -> ColorSet {
        ColorSet(self.0 & other.0)
    }
    pub fn union(self, other: ColorSet) -> ColorSet {
        ColorSet(self.0 | other.0)
    }
    pub fn complement(self) -> ColorSet {
        ColorSet(!self.0 & 0b11111)
    }
    pub fn iter(self) -> impl Iterator<Item = Color> {
        COLORS.into_iter().filter(move |c| self.contains(*c))
    }
    pub fn bits(self) -> u8 {
        self.0
    }
    pub fn from_bits(bits: u8) -> Self {
        ColorSet(bits & 0b11111)
    }
}

impl RankSet {
    pub const ALL: RankSet = RankSet(0b11111);
    pub const EMPTY: RankSet = RankSet(0);

    pub fn single(r: u8) -> Self {
        RankSet(1 << (r - 1))
    }
    pub fn contains(self, r: u8) -> bool {
        (1..=5).contains(&r) && self.0 & (1 << (r - 1)) != 0
    }
    pub fn insert(&mut self, r: u8) {
        self.0 |= 1 << (r - 1);
    }
    pub fn remove(&mut self, r: u8) {
        self.0 &= !(1 << (r - 1));
    }
    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }
    pub fn is_empty(self) -> bool {
        self.0 == 0
    }
    pub fn is_superset(self, other: RankSet) -> bool {
        self.0 & other.0 == other.0
    }
    pub fn intersect(self, other: RankSet) -> RankSet {
        RankSet(self.0 & other.0)
    }
    pub fn union(self, other: RankSet) -> RankSet {
        RankSet(self.0 | other.0)
    }
    pub fn complement(self) -> RankSet {
        RankSet(!self.0 & 0b11111)
    }
    pub fn iter(self) -> impl Iterator<Item = u8> {
        RANKS.into_iter().filter(move |r| self.contains(*r))
    }
    pub fn bits(self) -> u8 {
        self.0
    }
    pub fn from_bits(bits: u8) -> Self {
        RankSet(bits & 0b11111)
    }
}

impl Serialize for ColorSet {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let text: String = self.iter().map(Color::letter).collect();
        s.serialize_str(&text)
    }
}

impl<'de> Deserialize<'de> for ColorSet {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        let mut set = ColorSet::EMPTY;
        for ch in s.chars() {
            let c: Color = ch.encode_utf8(&mut [0; 4]).parse().map_err(serde::de::Error::custom)?;
            set.insert(c);
        }
        Ok(set)
    }
}

impl Serialize for RankSet {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let text: String = self.iter().map(|r| char::from(b'0' + r)).collect();
        s.serialize_str(&text)
    }
}

impl<'de> Deserialize<'de> for RankSet {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        let mut set = RankSet::EMPTY;
        for ch in s.chars() {
            match ch {
                '1'..='5' => set.insert(ch as u8 - b'0'),
                _ => return Err(serde::de::Error::custom(format!("bad rank `{ch}`"))),
            }
        }
        Ok(set)
    }
}

/// What a player can know about one of their own cards from clues alone.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CardKnowledge {
    pub colors: ColorSet,
    pub ranks: RankSet,
    pub hinted_color: Option<Color>,
    pub hinted_rank: Option<u8>,
}

impl Default for CardKnowledge {
    fn default() -> Self {
        Self::unknown()
    }
}

impl CardKnowledge {
    pub const fn unknown() -> Self {
        CardKnowledge {
            colors: ColorSet::ALL,
            ranks: RankSet::ALL,
            hinted_color: None,
            hinted_rank: None,
        }
    }

    /// Knowledge holding only possibility sets, no hint marks.
    pub fn from_sets(colors: ColorSet, ranks: RankSet) -> Self {
        CardKnowledge {
            colors,
            ranks,
            hinted_color: None,
            hinted_rank: None,
        }
    }

    pub fn admits(&self, card: Card) -> bool {
        self.colors.contains(card.color) && self.ranks.contains(card.rank)
    }

    /// Same possibility sets, ignoring hint marks.
    pub fn same_sets(&self, other: &CardKnowledge) -> bool {
        self.colors == other.colors && self.ranks == other.ranks
    }

    fn touch(&mut self, clue: Clue) {
        match clue {
            Clue::Color(c) => {
                self.colors = ColorSet::single(c);
                self.hinted_color = Some(c);
            }
            Clue::Rank(r) => {
                self.ranks = RankSet::single(r);
                self.hinted_rank = Some(r);
            }
        }
    }

    fn exclude(&mut self, clue: Clue) {
        match clue {
            Clue::Color(c) => self.colors.remove(c),
            Clue::Rank(r) => self.ranks.remove(r),
        }
    }

    /// Compact form used inside agent prompts: `color could be R, Y; rank is 2`.
    pub fn describe_short(&self) -> String {
        let mut out = String::new();
        let colors: Vec<char> = self.colors.iter().map(Color::letter).collect();
        if colors.len() == 1 {
            let _ = write!(out, "color is {}", colors[0]);
        } else {
            out.push_str("color could be ");
            push_joined(&mut out, colors.iter());
        }
        out.push_str("; ");
        let ranks: Vec<u8> = self.ranks.iter().collect();
        if ranks.len() == 1 {
            let _ = write!(out, "rank is {}", ranks[0]);
        } else {
            out.push_str("rank could be ");
            push_joined(&mut out, ranks.iter());
        }
        out
    }

    /// Long form used by the judge block, with explicit exclusions:
    /// `color could be Green, White, Blue; color cannot be Red, Yellow; rank is 1`.
    pub fn describe_long(&self) -> String {
        let mut out = String::new();
        let colors: Vec<&str> = self.colors.iter().map(Color::name).collect();
        if colors.len() == 1 {
            let _ = write!(out, "color is {}", colors[0]);
        } else {
            out.push_str("color could be ");
            push_joined(&mut out, colors.iter());
            if self.colors != ColorSet::ALL {
                out.push_str("; color cannot be ");
                let missing: Vec<&str> = self.colors.complement().iter().map(Color::name).collect();
                push_joined(&mut out, missing.iter());
            }
        }
        out.push_str("; ");
        let ranks: Vec<u8> = self.ranks.iter().collect();
        if ranks.len() == 1 {
            let _ = write!(out, "rank is {}", ranks[0]);
        } else {
            out.push_str("rank could be ");
            push_joined(&mut out, ranks.iter());
            if self.ranks != RankSet::ALL {
                out.push_str("; rank cannot be ");
                let missing: Vec<u8> = self.ranks.complement().iter().collect();
                push_joined(&mut out, missing.iter());
            }
        }
        out
    }

    /// Reads either description style, plus the looser phrasings models
    /// tend to produce (`color is not Blue`, `rank could be 1 or 5`).
    pub fn parse_description(text: &str) -> Result<CardKnowledge, BeliefError> {
        let mut colors = ColorSet::ALL;
        let mut ranks = RankSet::ALL;
        let lower = text.to_ascii_lowercase();
        for clause in lower.split([';', '.']) {
            let clause = clause.trim();
            if clause.is_empty() {
                continue;
            }
            let (is_color, rest) = if let Some(r) = clause.strip_prefix("color") {
                (true, r)
            } else if let Some(r) = clause.strip_prefix("colour") {
                (true, r)
            } else if let Some(r) = clause.strip_prefix("rank") {
                (false, r)
            } else {
                return Err(BeliefError::Malformed(format!("unrecognised clause `{clause}`")));
            };
            let rest = rest.trim_start_matches([':', ' ']);
            let (negative, list) = if let Some(l) = rest.strip_prefix("cannot be") {
                (true, l)
            } else if let Some(l) = rest.strip_prefix("is not") {
                (true, l)
            } else if let Some(l) = rest.strip_prefix("could be") {
                (false, l)
            } else if let Some(l) = rest.strip_prefix("is") {
                (false, l)
            } else {
                (false, rest)
            };
            let items = list
                .split([',', ' ', '/'])
                .map(str::trim)
                .filter(|t| !t.is_empty() && *t != "or" && *t != "and");
            if is_color {
                let mut set = ColorSet::EMPTY;
                for item in items {
                    match Color::parse_loose(item) {
                        Some(c) => set.insert(c),
                        None if item == "unknown" || item == "any" => set = ColorSet::ALL,
                        None => return Err(BeliefError::Malformed(format!("unknown color `{item}`"))),
                    }
                }
                colors = if negative { colors.intersect(set.complement()) } else { colors.intersect(set) };
            } else {
                let mut set = RankSet::EMPTY;
                for item in items {
                    match item.parse::<u8>() {
                        Ok(r) if (1..=5).contains(&r) => set.insert(r),
                        _ if item == "unknown" || item == "any" => set = RankSet::ALL,
                        _ => return Err(BeliefError::Malformed(format!("unknown rank `{item}`"))),
                    }
                }
                ranks = if negative { ranks.intersect(set.complement()) } else { ranks.intersect(set) };
            }
        }
        if colors.is_empty() || ranks.is_empty() {
            return Err(BeliefError::Malformed(format!("empty possibility set in `{text}`")));
        }
        Ok(CardKnowledge::from_sets(colors, ranks))
    }
}

fn push_joined<T: core::fmt::Display>(out: &mut String, items: impl Iterator<Item = T>) {
    for (i, item) in items.enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        let _ = write!(out, "{item}");
    }
}

/// Positive information on `touched`, mandatory negative information elsewhere.
pub fn apply_clue(hand: &[CardKnowledge], touched: &[usize], clue: Clue) -> Result<Vec<CardKnowledge>, BeliefError> {
    if touched.is_empty() {
        return Err(BeliefError::EmptyClue);
    }
    if let Some(&slot) = touched.iter().find(|&&s| s >= hand.len()) {
        return Err(BeliefError::SlotOutOfRange { slot, len: hand.len() });
    }
    let mut out = hand.to_vec();
    for (i, k) in out.iter_mut().enumerate() {
        if touched.contains(&i) {
            k.touch(clue);
        } else {
            k.exclude(clue);
        }
    }
    Ok(out)
}

/// Removes `slot`, compacting the rest left; a fresh unknown card goes last when one was drawn.
pub fn shift_on_removal(hand: &[CardKnowledge], slot: usize, drew_new: bool) -> Result<Vec<CardKnowledge>, BeliefError> {
    if slot >= hand.len() {
        return Err(BeliefError::SlotOutOfRange { slot, len: hand.len() });
    }
    let mut out = hand.to_vec();
    out.remove(slot);
    if drew_new {
        out.push(CardKnowledge::unknown());
    }
    Ok(out)
}

/// Unseen-copy counts per (color, rank), indexed by [`Card::slot`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct CardCounts(pub [u8; 25]);

impl CardCounts {
    pub fn full() -> Self {
        let mut c = [0u8; 25];
        for (i, slot) in c.iter_mut().enumerate() {
            *slot = multiplicity(Card::from_slot(i).rank);
        }
        CardCounts(c)
    }

    pub fn get(&self, card: Card) -> u8 {
        self.0[card.slot()]
    }

    pub fn total(&self) -> u32 {
        self.0.iter().map(|&n| u32::from(n)).sum()
    }

    /// Decrements, saturating at zero.
    pub fn take(&mut self, card: Card) {
        let n = &mut self.0[card.slot()];
        *n = n.saturating_sub(1);
    }
}

/// Canonical multiplicities minus everything the viewer can see: other hands,
/// played cards and discards. The viewer's own hand is not subtracted.
pub fn remaining_counts(state: &GameState, viewer: usize) -> CardCounts {
    let mut counts = public_counts(state);
    for (p, hand) in state.hands.iter().enumerate() {
        if p != viewer {
            for &card in hand {
                counts.take(card);
            }
        }
    }
    counts
}

/// Counts visible to everyone: canonical minus fireworks and discards.
pub fn public_counts(state: &GameState) -> CardCounts {
    let mut counts = CardCounts::full();
    for color in COLORS {
        for rank in 1..=state.fireworks.height(color) {
            counts.take(Card::new(color, rank));
        }
    }
    for &card in &state.discards {
        counts.take(card);
    }
    counts
}

/// Exact distribution over (color, rank) for one card.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CardDistribution {
    weights: [u8; 25],
    total: u32,
}

impl CardDistribution {
    pub fn prob(&self, card: Card) -> Ratio<u64> {
        Ratio::new(u64::from(self.weights[card.slot()]), u64::from(self.total))
    }

    pub fn prob_f64(&self, card: Card) -> f64 {
        f64::from(self.weights[card.slot()]) / f64::from(self.total)
    }

    /// Cards with non-zero probability, in canonical order.
    pub fn support(&self) -> impl Iterator<Item = (Card, Ratio<u64>)> + '_ {
        (0..25)
            .filter(|&i| self.weights[i] > 0)
            .map(|i| (Card::from_slot(i), Ratio::new(u64::from(self.weights[i]), u64::from(self.total))))
    }

    pub fn rank_prob(&self, rank: u8) -> Ratio<u64> {
        let w: u64 = COLORS.iter().map(|&c| u64::from(self.weights[Card::new(c, rank).slot()])).sum();
        Ratio::new(w, u64::from(self.total))
    }
}

/// Probability proportional to unseen counts, restricted to the card's possibility sets.
pub fn card_probability(k: &CardKnowledge, counts: &CardCounts) -> Result<CardDistribution, BeliefError> {
    let mut weights = [0u8; 25];
    let mut total = 0u32;
    for (i, w) in weights.iter_mut().enumerate() {
        let card = Card::from_slot(i);
        if k.admits(card) {
            *w = counts.0[i];
            total += u32::from(*w);
        }
    }
    if total == 0 {
        return Err(BeliefError::Contradiction);
    }
    Ok(CardDistribution { weights, total })
}

/// Mass on cards that would extend their stack right now.
pub fn playability_probability(dist: &CardDistribution, fireworks: &[u8; 5]) -> Ratio<u64> {
    let mut p = Ratio::new(0, 1);
    for color in COLORS {
        let next = fireworks[color.index()] + 1;
        if next <= 5 {
            p += dist.prob(Card::new(color, next));
        }
    }
    p
}

/// A card can never score: its stack is past it, or a lower rank is gone for good.
pub fn is_dead(card: Card, fireworks: &[u8; 5], discarded: &CardCounts) -> bool {
    let height = fireworks[card.color.index()];
    if card.rank <= height {
        return true;
    }
    (height + 1..card.rank).any(|r| discarded.get(Card::new(card.color, r)) >= multiplicity(r))
}

/// Per-viewer map of every player's card knowledge, keyed by relative offset.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeductionBlock {
    pub viewer: usize,
    /// `hands[k]` belongs to the player `k` seats after the viewer; `hands[0]` is the viewer.
    pub hands: Vec<Vec<CardKnowledge>>,
}

impl DeductionBlock {
    pub fn n_players(&self) -> usize {
        self.hands.len()
    }

    pub fn key(offset: usize) -> String {
        if offset == 0 {
            "you".into()
        } else {
            format!("player+{offset}")
        }
    }

    fn offset_of_key(key: &str, n: usize) -> Option<usize> {
        let k = key.trim().to_ascii_lowercase();
        if k == "you" || k == "player+0" {
            return Some(0);
        }
        let off: usize = k.strip_prefix("player+")?.trim().parse().ok()?;
        (1..n).contains(&off).then_some(off)
    }

    /// Absolute seat for a relative offset.
    pub fn seat(&self, offset: usize) -> usize {
        (self.viewer + offset) % self.n_players()
    }

    pub fn same_sets(&self, other: &DeductionBlock) -> bool {
        self.hands.len() == other.hands.len()
            && self.hands.iter().zip(&other.hands).all(|(a, b)| {
                a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.same_sets(y))
            })
    }

    /// Prompt style: keys `you`, `player+1`, ... in that order, compact descriptions.
    pub fn to_prompt_json(&self) -> String {
        let order: Vec<usize> = (0..self.n_players()).collect();
        self.render(&order, CardKnowledge::describe_short)
    }

    /// Judge style: keys in absolute seat order, long descriptions with exclusions.
    pub fn to_judge_json(&self) -> String {
        let n = self.n_players();
        let order: Vec<usize> = (0..n).map(|seat| (seat + n - self.viewer) % n).collect();
        self.render(&order, CardKnowledge::describe_long)
    }

    fn render(&self, order: &[usize], describe: fn(&CardKnowledge) -> String) -> String {
        let mut out = String::from("{\n");
        for (i, &offset) in order.iter().enumerate() {
            let _ = writeln!(out, "  {}: {{", json_str(&Self::key(offset)));
            let hand = &self.hands[offset];
            for (j, k) in hand.iter().enumerate() {
                let sep = if j + 1 < hand.len() { "," } else { "" };
                let _ = writeln!(out, "    {}: {}{}", json_str(&format!("card{j}")), json_str(&describe(k)), sep);
            }
            out.push_str(if i + 1 < order.len() { "  },\n" } else { "  }\n" });
        }
        out.push('}');
        out
    }

    /// Reads a deduction object as emitted by an agent. Every roster key must be
    /// present and each hand must list `card0..cardN` for its current length.
    pub fn from_value(value: &Value, viewer: usize, hand_lens: &[usize]) -> Result<DeductionBlock, BeliefError> {
        let n = hand_lens.len();
        let obj = value
            .as_object()
            .ok_or_else(|| BeliefError::Malformed("deduction is not an object".into()))?;
        let mut hands: Vec<Option<Vec<CardKnowledge>>> = alloc::vec![None; n];
        for (key, cards) in obj {
            let offset = Self::offset_of_key(key, n)
                .ok_or_else(|| BeliefError::Malformed(format!("unexpected key `{key}`")))?;
            let cards = cards
                .as_object()
                .ok_or_else(|| BeliefError::Malformed(format!("`{key}` is not an object")))?;
            let len = hand_lens[offset];
            if cards.len() != len {
                return Err(BeliefError::Malformed(format!("`{key}` lists {} cards, hand has {len}", cards.len())));
            }
            let mut hand = Vec::with_capacity(len);
            for j in 0..len {
                let text = cards
                    .get(&format!("card{j}"))
                    .and_then(Value::as_str)
                    .ok_or_else(|| BeliefError::Malformed(format!("`{key}` is missing card{j}")))?;
                hand.push(CardKnowledge::parse_description(text)?);
            }
            if hands[offset].replace(hand).is_some() {
                return Err(BeliefError::Malformed(format!("duplicate key for offset {offset}")));
            }
        }
        let hands = hands
            .into_iter()
            .enumerate()
            .map(|(off, h)| h.ok_or_else(|| BeliefError::Malformed(format!("missing `{}`", Self::key(off)))))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(DeductionBlock { viewer, hands })
    }
}

pub(crate) fn json_str(s: &str) -> String {
    serde_json::to_string(s).unwrap_or_default()
}

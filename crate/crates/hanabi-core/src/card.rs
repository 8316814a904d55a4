//! Cards, colors and the canonical 50-card multiset.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// The five suits, in canonical order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Color {
    R,
    Y,
    G,
    W,
    B,
}

pub const COLORS: [Color; 5] = [Color::R, Color::Y, Color::G, Color::W, Color::B];
pub const RANKS: [u8; 5] = [1, 2, 3, 4, 5];

/// Copies of each rank in one suit.
pub const fn multiplicity(rank: u8) -> u8 {
    match rank {
        1 => 3,
        2..=4 => 2,
        5 => 1,
        _ => 0,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CardParseError {
    #[error("unknown color `{0}`")]
    Color(String),
    #[error("invalid card `{0}`")]
    Card(String),
}

impl Color {
    pub const fn index(self) -> usize {
        self as usize
    }

    pub const fn from_index(i: usize) -> Option<Color> {
        match i {
            0 => Some(Color::R),
            1 => Some(Color::Y),
            2 => Some(Color::G),
            3 => Some(Color::W),
            4 => Some(Color::B),
            _ => None,
        }
    }

    pub const fn letter(self) -> char {
        match self {
            Color::R => 'R',
            Color::Y => 'Y',
            Color::G => 'G',
            Color::W => 'W',
            Color::B => 'B',
        }
    }

    /// Capitalised name, e.g. `Red`.
    pub const fn name(self) -> &'static str {
        match self {
            Color::R => "Red",
            Color::Y => "Yellow",
            Color::G => "Green",
            Color::W => "White",
            Color::B => "Blue",
        }
    }

    /// Lower-case name, e.g. `red`.
    pub const fn lower(self) -> &'static str {
        match self {
            Color::R => "red",
            Color::Y => "yellow",
            Color::G => "green",
            Color::W => "white",
            Color::B => "blue",
        }
    }

    /// Accepts a letter or a full name, case-insensitively.
    pub fn parse_loose(s: &str) -> Option<Color> {
        let t = s.trim();
        COLORS.into_iter().find(|c| {
            t.eq_ignore_ascii_case(c.name()) || (t.len() == 1 && t.eq_ignore_ascii_case(c.letter().encode_utf8(&mut [0; 4])))
        })
    }
}

impl fmt::Display for Color {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

impl FromStr for Color {
    type Err = CardParseError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "R" => Ok(Color::R),
            "Y" => Ok(Color::Y),
            "G" => Ok(Color::G),
            "W" => Ok(Color::W),
            "B" => Ok(Color::B),
            _ => Err(CardParseError::Color(s.into())),
        }
    }
}

impl Serialize for Color {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(match self {
            Color::R => "R",
            Color::Y => "Y",
            Color::G => "G",
            Color::W => "W",
            Color::B => "B",
        })
    }
}

impl<'de> Deserialize<'de> for Color {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Card {
    pub color: Color,
    pub rank: u8,
}

impl Card {
    pub const fn new(color: Color, rank: u8) -> Card {
        Card { color, rank }
    }

    /// Index into a 25-entry (color, rank) table.
    pub const fn slot(self) -> usize {
        self.color.index() * 5 + (self.rank as usize - 1)
    }

    pub fn from_slot(i: usize) -> Card {
        Card::new(Color::from_index(i / 5).expect("slot < 25"), (i % 5) as u8 + 1)
    }

    /// `Blue 3`
    pub fn long_name(self) -> String {
        alloc::format!("{} {}", self.color.name(), self.rank)
    }
}

impl fmt::Display for Card {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.color.letter(), self.rank)
    }
}

impl FromStr for Card {
    type Err = CardParseError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bytes = s.as_bytes();
        if bytes.len() != 2 {
            return Err(CardParseError::Card(s.into()));
        }
        let color: Color = s[..1].parse().map_err(|_| CardParseError::Card(s.into()))?;
        match bytes[1] {
            b'1'..=b'5' => Ok(Card::new(color, bytes[1] - b'0')),
            _ => Err(CardParseError::Card(s.into())),
        }
    }
}

impl Serialize for Card {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Card {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// The 50 cards in canonical order: colors R..B, ranks ascending, copies adjacent.
pub fn full_deck() -> Vec<Card> {
    let mut deck = Vec::with_capacity(50);
    for color in COLORS {
        for rank in RANKS {
            for _ in 0..multiplicity(rank) {
                deck.push(Card::new(color, rank));
            }
        }
    }
    deck
}

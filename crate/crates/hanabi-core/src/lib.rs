//! Hanabi simulator core: rules engine, clue-based belief calculus, prompt
//! scaffolds for LLM agents, scripted baselines, the game loop and the
//! state-tracking oracle.
//!
//! The crate is `no_std` (with `alloc`) when the default `std` feature is
//! disabled. Everything that touches files, sockets or threads lives in the
//! companion harness crate.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod agents;
pub mod beliefs;
pub mod card;
pub mod engine;
pub mod judge;
pub mod orchestrator;
pub mod scaffold;

pub use card::{Card, Color, COLORS, RANKS};
pub use engine::{GameConfig, GameState, Move, MoveOutcome, TerminalReason, TerminalStatus};

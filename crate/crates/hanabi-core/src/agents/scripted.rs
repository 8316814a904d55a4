use alloc::format;
use alloc::string::String;

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::beliefs::{
    apply_clue, card_probability, is_dead, playability_probability, public_counts, remaining_counts, CardCounts,
    CardKnowledge,
};
use crate::engine::{GameState, Move};

use super::{flat_decision, local_reply, Agent, AgentError, AgentReply, AgentSpec, TurnContext};

fn discarded_counts(state: &GameState) -> CardCounts {
    let mut c = CardCounts([0; 25]);
    for card in &state.discards {
        c.0[card.slot()] += 1;
    }
    c
}

fn certain_play(k: &CardKnowledge, counts: &CardCounts, fireworks: &[u8; 5]) -> bool {
    card_probability(k, counts).is_ok_and(|d| playability_probability(&d, fireworks) == Ratio::from_integer(1))
}

/// Every card the knowledge still admits (with unseen copies) can never be played.
fn surely_dead(k: &CardKnowledge, counts: &CardCounts, fireworks: &[u8; 5], discarded: &CardCounts) -> bool {
    card_probability(k, counts).is_ok_and(|d| d.support().all(|(card, _)| is_dead(card, fireworks, discarded)))
}

/// The greedy baseline's move for the current player, from their own clue knowledge.
pub fn scripted_greedy(state: &GameState, knowledge: &[CardKnowledge]) -> Move {
    let me = state.current_player;
    let fw = state.fireworks.0;
    let mine = remaining_counts(state, me);
    if let Some(slot) = knowledge.iter().position(|k| certain_play(k, &mine, &fw)) {
        return Move::Play { slot };
    }
    let legal = state.legal_moves().unwrap_or_default();
    let reveals = || legal.iter().copied().filter(|m| m.is_reveal());
    if state.info_tokens > 0 {
        let public = public_counts(state);
        for mv in reveals() {
            let (offset, clue) = mv.clue().expect("reveal");
            let target = state.seat_after(me, offset);
            let hand = &state.hands[target];
            let touched: alloc::vec::Vec<usize> = (0..hand.len()).filter(|&i| clue.matches(hand[i])).collect();
            let Ok(after) = apply_clue(&state.knowledge[target], &touched, clue) else { continue };
            let enables = touched.iter().any(|&i| {
                state.fireworks.playable(hand[i])
                    && !certain_play(&state.knowledge[target][i], &public, &fw)
                    && certain_play(&after[i], &public, &fw)
            });
            if enables {
                return mv;
            }
        }
    }
    if state.info_tokens < state.config.max_info_tokens && !knowledge.is_empty() {
        let discarded = discarded_counts(state);
        let slot = knowledge
            .iter()
            .position(|k| surely_dead(k, &mine, &fw, &discarded))
            .or_else(|| state.explicit_hints[me].iter().position(|h| h.color.is_none() && h.rank.is_none()))
            .unwrap_or(0);
        return Move::Discard { slot };
    }
    reveals().next().or_else(|| legal.first().copied()).unwrap_or(Move::Play { slot: 0 })
}

#[derive(Clone, Debug)]
pub struct ScriptedGreedy {
    spec: AgentSpec,
}

impl ScriptedGreedy {
    pub fn new(spec: AgentSpec) -> Self {
        ScriptedGreedy { spec }
    }
}

impl Agent for ScriptedGreedy {
    fn spec(&self) -> &AgentSpec {
        &self.spec
    }

    fn decide(&self, ctx: &TurnContext<'_>) -> Result<AgentReply, AgentError> {
        let legal = ctx.legal()?;
        let mv = scripted_greedy(ctx.state, &ctx.state.knowledge[ctx.viewer]);
        let action = legal.iter().position(|&m| m == mv).unwrap_or(0);
        let reason = match mv {
            Move::Play { .. } => "certain play",
            Move::Discard { .. } => "safest discard",
            _ if ctx.state.info_tokens > 0 => "clue",
            _ => "only option",
        };
        local_reply(ctx, flat_decision(action, legal.len(), format!("greedy: {reason} {mv}")))
    }
}

/// Uniform over legal moves; the stream depends only on (game seed, seat, turn).
#[derive(Clone, Debug)]
pub struct RandomLegal {
    spec: AgentSpec,
}

impl RandomLegal {
    pub fn new(spec: AgentSpec) -> Self {
        RandomLegal { spec }
    }

    pub fn rng_for(seed: u64, seat: usize, turn: u32) -> ChaCha8Rng {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&seed.to_le_bytes());
        key[8..16].copy_from_slice(&(seat as u64).to_le_bytes());
        key[16..20].copy_from_slice(&turn.to_le_bytes());
        key[24..].copy_from_slice(b"randlgl1");
        ChaCha8Rng::from_seed(key)
    }
}

impl Agent for RandomLegal {
    fn spec(&self) -> &AgentSpec {
        &self.spec
    }

    fn decide(&self, ctx: &TurnContext<'_>) -> Result<AgentReply, AgentError> {
        let legal = ctx.legal()?;
        let mut rng = Self::rng_for(ctx.state.config.seed, ctx.viewer, ctx.state.turn_index);
        let action = rng.random_range(0..legal.len());
        local_reply(ctx, flat_decision(action, legal.len(), String::from("uniform random legal move")))
    }
}

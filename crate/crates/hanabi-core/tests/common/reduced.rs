//! A two-color, three-rank Hanabi used to check `card_probability` against
//! exhaustive enumeration of every arrangement of the unseen cards.

use hanabi_core::beliefs::{apply_clue, card_probability, shift_on_removal, CardCounts, CardKnowledge, Clue};
use hanabi_core::{Card, Color};
use num_rational::Ratio;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const COLORS: [Color; 2] = [Color::R, Color::Y];
pub const RANKS: [u8; 3] = [1, 2, 3];
const HAND: usize = 3;

pub fn copies(rank: u8) -> u8 {
    [3, 2, 2][rank as usize - 1]
}

pub fn deck() -> Vec<Card> {
    let mut d = Vec::new();
    for c in COLORS {
        for r in RANKS {
            for _ in 0..copies(r) {
                d.push(Card::new(c, r));
            }
        }
    }
    d
}

/// What the player to move cannot see.
pub struct Position {
    pub own_knowledge: Vec<CardKnowledge>,
    pub unseen: CardCounts,
    /// Own hand size plus the draw pile.
    pub hidden: usize,
}

/// Random two-player games; every position where someone is about to act.
pub fn positions(count: usize, seed: u64) -> Vec<Position> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    while out.len() < count {
        let mut d = deck();
        d.shuffle(&mut rng);
        let mut hands: Vec<Vec<Card>> = vec![d.drain(..HAND).collect(), d.drain(..HAND).collect()];
        let mut know = vec![vec![CardKnowledge::unknown(); HAND]; 2];
        let mut fw = [0u8; 2];
        let mut gone: Vec<Card> = Vec::new();
        let mut lives = 3;
        let mut info = 8;
        let mut me = 0;
        while !d.is_empty() && lives > 0 && out.len() < count {
            let other = 1 - me;
            let mut unseen = CardCounts([0; 25]);
            for c in deck() {
                unseen.0[c.slot()] += 1;
            }
            for c in hands[other].iter().chain(&gone) {
                unseen.0[c.slot()] -= 1;
            }
            out.push(Position { own_knowledge: know[me].clone(), unseen, hidden: hands[me].len() + d.len() });

            let roll = rng.random_range(0..3);
            if roll == 0 && info > 0 {
                let target = hands[other][rng.random_range(0..hands[other].len())];
                let clue = if rng.random_bool(0.5) { Clue::Color(target.color) } else { Clue::Rank(target.rank) };
                let touched: Vec<usize> = (0..hands[other].len()).filter(|&i| clue.matches(hands[other][i])).collect();
                know[other] = apply_clue(&know[other], &touched, clue).unwrap();
                info -= 1;
            } else {
                let slot = rng.random_range(0..hands[me].len());
                let card = hands[me].remove(slot);
                let ci = if card.color == Color::R { 0 } else { 1 };
                if roll == 1 && fw[ci] + 1 == card.rank {
                    fw[ci] += 1;
                } else {
                    if roll == 1 {
                        lives -= 1;
                    } else {
                        info = (info + 1).min(8);
                    }
                }
                gone.push(card);
                hands[me].push(d.remove(0));
                know[me] = shift_on_removal(&know[me], slot, true).unwrap();
            }
            me = other;
        }
    }
    out
}

/// Probability of each card in each own slot, counting every distinct
/// arrangement of the unseen cards over the hidden positions in which that
/// slot's card fits its knowledge.
pub fn enumerate(pos: &Position) -> Vec<Vec<(Card, Ratio<u64>)>> {
    let kinds: Vec<Card> = deck().into_iter().collect::<std::collections::BTreeSet<_>>().into_iter().collect();
    let mut left: Vec<u8> = kinds.iter().map(|c| pos.unseen.get(*c)).collect();
    assert_eq!(left.iter().map(|&x| x as usize).sum::<usize>(), pos.hidden);
    let slots = pos.own_knowledge.len();
    let mut hits = vec![vec![0u64; kinds.len()]; slots];
    let mut totals = vec![0u64; slots];
    let mut prefix = Vec::with_capacity(pos.hidden);
    fn rec(
        left: &mut [u8],
        prefix: &mut Vec<usize>,
        hidden: usize,
        kinds: &[Card],
        know: &[CardKnowledge],
        hits: &mut [Vec<u64>],
        totals: &mut [u64],
    ) {
        if prefix.len() == hidden {
            for (j, k) in know.iter().enumerate() {
                if k.admits(kinds[prefix[j]]) {
                    hits[j][prefix[j]] += 1;
                    totals[j] += 1;
                }
            }
            return;
        }
        for i in 0..left.len() {
            if left[i] > 0 {
                left[i] -= 1;
                prefix.push(i);
                rec(left, prefix, hidden, kinds, know, hits, totals);
                prefix.pop();
                left[i] += 1;
            }
        }
    }
    rec(&mut left, &mut prefix, pos.hidden, &kinds, &pos.own_knowledge, &mut hits, &mut totals);
    (0..slots)
        .map(|j| {
            kinds
                .iter()
                .enumerate()
                .filter(|&(i, _)| hits[j][i] > 0)
                .map(|(i, c)| (*c, Ratio::new(hits[j][i], totals[j])))
                .collect()
        })
        .collect()
}

/// Number of positions checked, or the first disagreement.
pub fn check(count: usize, seed: u64) -> Result<usize, String> {
    let all = positions(count, seed);
    for (n, pos) in all.iter().enumerate() {
        let expected = enumerate(pos);
        for (j, k) in pos.own_knowledge.iter().enumerate() {
            let dist = card_probability(k, &pos.unseen).map_err(|e| format!("position {n} slot {j}: {e}"))?;
            let got: Vec<(Card, Ratio<u64>)> = dist.support().filter(|(_, p)| *p > Ratio::new(0, 1)).collect();
            if got != expected[j] {
                return Err(format!("position {n} slot {j}: {got:?} vs {:?}", expected[j]));
            }
            let float: f64 = got.iter().map(|(c, _)| dist.prob_f64(*c)).sum();
            if (float - 1.0).abs() > 1e-12 {
                return Err(format!("position {n} slot {j}: float mass {float}"));
            }
        }
    }
    Ok(all.len())
}

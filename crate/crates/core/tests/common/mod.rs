//! Helpers shared by the integration tests.
#![allow(dead_code)]

use std::collections::{HashSet, VecDeque};

use pdres::arena::{ExplicitArena, VertexId};
use pdres::generators::{gen_random, RandomParams};
use pdres::model::{Player, PushdownGameSpec};
use pdres::play::PositionalStrategy;

/// Small random game: 1 to 4 states, one or two stack symbols.
pub fn small_spec(seed: u64) -> PushdownGameSpec {
    let p = RandomParams {
        states: 1 + (seed % 4) as usize,
        symbols: 1 + ((seed / 4) % 2) as usize,
        ..RandomParams::default()
    };
    gen_random(seed, &p)
}

/// Truncation height used for [`small_spec`] instances.
pub fn small_height(spec: &PushdownGameSpec) -> usize {
    if spec.is_one_counter() {
        10
    } else {
        5
    }
}

fn player0_moves(arena: &ExplicitArena, sigma: &PositionalStrategy, v: VertexId) -> Vec<VertexId> {
    match sigma.get(v) {
        Some(t) => vec![t],
        None => arena.successors(v).to_vec(),
    }
}

/// Whether `sigma` keeps every play from `start` out of the unsafe set for
/// `steps` moves when the adversary owns Player 1 and may fire at most
/// `budget` disturbances whenever and wherever possible. Exhaustive.
pub fn survives_bounded(
    arena: &ExplicitArena,
    sigma: &PositionalStrategy,
    start: VertexId,
    budget: u64,
    steps: usize,
) -> bool {
    let mut seen = HashSet::new();
    let mut stack = vec![(start, budget, steps)];
    while let Some((v, b, s)) = stack.pop() {
        if arena.is_unsafe(v) {
            return false;
        }
        if s == 0 || !seen.insert((v, b, s)) {
            continue;
        }
        let moves = match arena.owner(v) {
            Player::Zero => player0_moves(arena, sigma, v),
            Player::One => arena.successors(v).to_vec(),
        };
        for w in moves {
            stack.push((w, b, s - 1));
        }
        if b > 0 && arena.owner(v) == Player::Zero {
            for &w in arena.disturbance_successors(v) {
                stack.push((w, b - 1, s - 1));
            }
        }
    }
    true
}

/// Whether the same adversary reaches the unsafe set from `start` with at
/// most `budget` disturbances, without a step limit.
pub fn attack_exists(arena: &ExplicitArena, sigma: &PositionalStrategy, start: VertexId, budget: u64) -> bool {
    let mut seen = HashSet::from([(start, budget)]);
    let mut queue = VecDeque::from([(start, budget)]);
    while let Some((v, b)) = queue.pop_front() {
        if arena.is_unsafe(v) {
            return true;
        }
        let mut next: Vec<(VertexId, u64)> = match arena.owner(v) {
            Player::Zero => player0_moves(arena, sigma, v).into_iter().map(|w| (w, b)).collect(),
            Player::One => arena.successors(v).iter().map(|&w| (w, b)).collect(),
        };
        if b > 0 && arena.owner(v) == Player::Zero {
            next.extend(arena.disturbance_successors(v).iter().map(|&w| (w, b - 1)));
        }
        for n in next {
            if seen.insert(n) {
                queue.push_back(n);
            }
        }
    }
    false
}

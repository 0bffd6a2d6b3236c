//! Plays, positional strategies and seeded simulation.

use std::collections::{BTreeSet, VecDeque};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::arena::{ExplicitArena, VertexId};
use crate::model::Player;

/// A finite play prefix. Each step records the vertex and whether it was
/// reached through a disturbance edge; the first bit is always `false`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Play {
    pub steps: Vec<(VertexId, bool)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum PlayError {
    #[error("empty play")]
    Empty,
    #[error("the first step carries a disturbance bit")]
    DisturbedStart,
    #[error("step {0} does not follow an edge of the kind its bit requires")]
    BadStep(usize),
}

impl Play {
    pub fn new(start: VertexId) -> Self {
        Play {
            steps: vec![(start, false)],
        }
    }

    pub fn push(&mut self, v: VertexId, disturbed: bool) {
        self.steps.push((v, disturbed));
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn last(&self) -> Option<VertexId> {
        self.steps.last().map(|s| s.0)
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.steps.iter().map(|s| s.0)
    }

    pub fn disturbance_count(&self) -> usize {
        self.steps.iter().filter(|s| s.1).count()
    }

    pub fn visits(&self, set: &crate::arena::VertexSet) -> bool {
        self.vertices().any(|v| set.contains(v))
    }

    /// Checks every step against the edge relation its bit names.
    pub fn validate(&self, arena: &ExplicitArena) -> Result<(), PlayError> {
        let first = self.steps.first().ok_or(PlayError::Empty)?;
        if first.1 {
            return Err(PlayError::DisturbedStart);
        }
        for j in 1..self.steps.len() {
            let (u, _) = self.steps[j - 1];
            let (v, bit) = self.steps[j];
            let ok = if bit {
                arena.has_disturbance_edge(u, v)
            } else {
                arena.has_edge(u, v)
            };
            if !ok {
                return Err(PlayError::BadStep(j));
            }
        }
        Ok(())
    }

    /// Positions whose disturbance actually changed the play: bit 1 and a
    /// vertex different from what `sigma` prescribed at the predecessor.
    pub fn consequential_disturbances(&self, sigma: &PositionalStrategy) -> Vec<usize> {
        (1..self.steps.len())
            .filter(|&j| {
                let (u, _) = self.steps[j - 1];
                let (v, bit) = self.steps[j];
                bit && sigma.get(u) != Some(v)
            })
            .collect()
    }
}

/// A positional strategy for `player`: one optional successor per vertex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PositionalStrategy {
    pub player: Player,
    choice: Vec<Option<VertexId>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum StrategyError {
    #[error("strategy has a choice at {0}, which the player does not own")]
    NotOwned(VertexId),
    #[error("strategy moves from {0} to {1} along no edge")]
    NotAnEdge(VertexId, VertexId),
    #[error("strategy is sized for {0} vertices, arena has {1}")]
    SizeMismatch(usize, usize),
}

impl PositionalStrategy {
    pub fn new(player: Player, vertex_count: usize) -> Self {
        PositionalStrategy {
            player,
            choice: vec![None; vertex_count],
        }
    }

    pub fn get(&self, v: VertexId) -> Option<VertexId> {
        self.choice.get(v.index()).copied().flatten()
    }

    pub fn set(&mut self, v: VertexId, to: VertexId) {
        self.choice[v.index()] = Some(to);
    }

    pub fn unset(&mut self, v: VertexId) {
        self.choice[v.index()] = None;
    }

    pub fn len(&self) -> usize {
        self.choice.len()
    }

    pub fn is_empty(&self) -> bool {
        self.choice.iter().all(Option::is_none)
    }

    pub fn entries(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        self.choice
            .iter()
            .enumerate()
            .filter_map(|(i, c)| c.map(|t| (VertexId::new(i), t)))
    }

    /// Fills every owned vertex without a choice with its lowest successor.
    pub fn completed(mut self, arena: &ExplicitArena) -> Self {
        for v in arena.owned_by(self.player) {
            if self.choice[v.index()].is_none() {
                self.choice[v.index()] = Some(arena.successors(v)[0]);
            }
        }
        self
    }

    pub fn validate(&self, arena: &ExplicitArena) -> Result<(), StrategyError> {
        if self.choice.len() != arena.vertex_count() {
            return Err(StrategyError::SizeMismatch(self.choice.len(), arena.vertex_count()));
        }
        for (v, t) in self.entries() {
            if arena.owner(v) != self.player {
                return Err(StrategyError::NotOwned(v));
            }
            if !arena.has_edge(v, t) {
                return Err(StrategyError::NotAnEdge(v, t));
            }
        }
        Ok(())
    }
}

/// How a player moves during simulation.
#[derive(Clone, Copy, Debug)]
pub enum Policy<'a> {
    Positional(&'a PositionalStrategy),
    /// Uniformly random successor, drawn from the seeded generator.
    Random,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum SimulationError {
    #[error("the strategy for Player {0} is undefined at {1}")]
    Undefined(Player, VertexId),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Simulation {
    pub play: Play,
    /// Schedule positions that could not fire (no disturbance edge there).
    pub skipped: Vec<usize>,
}

/// Plays `max_steps` moves from `start`. A disturbance is attempted at every
/// step index in `schedule`; it fires only at Player-0 vertices with a
/// disturbance edge (target chosen uniformly), otherwise it is skipped.
pub fn simulate(
    arena: &ExplicitArena,
    start: VertexId,
    player0: Policy<'_>,
    player1: Policy<'_>,
    schedule: &BTreeSet<usize>,
    max_steps: usize,
    seed: u64,
) -> Result<Simulation, SimulationError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut play = Play::new(start);
    let mut skipped = Vec::new();
    let mut v = start;
    for step in 0..max_steps {
        if schedule.contains(&step) {
            let d = arena.disturbance_successors(v);
            if arena.owner(v) == Player::Zero && !d.is_empty() {
                v = *d.choose(&mut rng).expect("nonempty");
                play.push(v, true);
                continue;
            }
            skipped.push(step);
        }
        let p = arena.owner(v);
        let policy = match p {
            Player::Zero => player0,
            Player::One => player1,
        };
        v = match policy {
            Policy::Positional(s) => s.get(v).ok_or(SimulationError::Undefined(p, v))?,
            Policy::Random => *arena.successors(v).choose(&mut rng).expect("no dead ends"),
        };
        play.push(v, false);
    }
    Ok(Simulation { play, skipped })
}

/// For a Player-0 strategy `sigma`, the least number of disturbances with
/// which an adversary controlling Player 1 and the disturbance timing can
/// force a visit to the unsafe set, per vertex (`None`: impossible).
///
/// This is the resilience of `sigma` itself. Computed as a 0-1 shortest path
/// on the reversed graph: strategy and Player-1 moves cost 0, disturbances 1.
/// Player-0 vertices without a choice let the adversary pick any successor.
pub fn strategy_resilience(arena: &ExplicitArena, sigma: &PositionalStrategy) -> Vec<Option<u64>> {
    let n = arena.vertex_count();
    let mut dist: Vec<Option<u64>> = vec![None; n];
    let mut deque = VecDeque::new();
    for v in arena.unsafe_set().iter() {
        dist[v.index()] = Some(0);
        deque.push_back(v);
    }
    let mut done = vec![false; n];
    while let Some(v) = deque.pop_front() {
        if done[v.index()] {
            continue;
        }
        done[v.index()] = true;
        let d = dist[v.index()].expect("queued vertices have a distance");
        let mut relax = |u: VertexId, cost: u64, deque: &mut VecDeque<VertexId>| {
            if arena.is_unsafe(u) {
                return;
            }
            let nd = d + cost;
            if dist[u.index()].is_none_or(|old| nd < old) {
                dist[u.index()] = Some(nd);
                if cost == 0 {
                    deque.push_front(u);
                } else {
                    deque.push_back(u);
                }
            }
        };
        for &u in arena.predecessors(v) {
            let follows = match arena.owner(u) {
                Player::One => true,
                Player::Zero => sigma.get(u).is_none_or(|t| t == v),
            };
            if follows {
                relax(u, 0, &mut deque);
            }
        }
        for &u in arena.disturbance_predecessors(v) {
            relax(u, 1, &mut deque);
        }
    }
    dist
}

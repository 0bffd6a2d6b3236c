//! Disturbance-free solving of finite arenas: attractors, safety, Büchi and
//! the union of a safety and a Büchi objective.

use crate::arena::{ArenaBuilder, ExplicitArena, VertexId, VertexLabel, VertexSet};
use crate::model::Player;
use crate::play::PositionalStrategy;

/// Result of an attractor computation.
#[derive(Clone, Debug)]
pub struct Attractor {
    pub player: Player,
    pub set: VertexSet,
    /// Layer index of each vertex in the set (target vertices have rank 0).
    pub rank: Vec<Option<u32>>,
    /// Forces a visit to the target from every owned vertex of the set.
    pub attacker: PositionalStrategy,
    /// Keeps the opponent outside the set forever (trap strategy).
    pub defender: PositionalStrategy,
}

impl Attractor {
    pub fn contains(&self, v: VertexId) -> bool {
        self.set.contains(v)
    }
}

/// The `player`-attractor of `target`, computed layer by layer.
pub fn attractor(arena: &ExplicitArena, target: &VertexSet, player: Player) -> Attractor {
    attractor_within(arena, &VertexSet::full(arena.vertex_count()), target, player)
}

/// The attractor in the subgame induced by `domain`; edges leaving the domain
/// are ignored. `domain` must give every vertex at least one edge inside it.
pub fn attractor_within(
    arena: &ExplicitArena,
    domain: &VertexSet,
    target: &VertexSet,
    player: Player,
) -> Attractor {
    let n = arena.vertex_count();
    let mut rank: Vec<Option<u32>> = vec![None; n];
    let mut set = VertexSet::new(n);
    let mut remaining: Vec<u32> = arena
        .vertices()
        .map(|v| {
            arena
                .successors(v)
                .iter()
                .filter(|&&w| domain.contains(w))
                .count() as u32
        })
        .collect();

    let mut layer: Vec<VertexId> = Vec::new();
    for v in target.iter().filter(|&v| domain.contains(v)) {
        set.insert(v);
        rank[v.index()] = Some(0);
        layer.push(v);
    }
    let mut j = 0u32;
    while !layer.is_empty() {
        let mut next = Vec::new();
        for &w in &layer {
            for &u in arena.predecessors(w) {
                if !domain.contains(u) || set.contains(u) {
                    continue;
                }
                let ready = if arena.owner(u) == player {
                    true
                } else {
                    remaining[u.index()] -= 1;
                    remaining[u.index()] == 0
                };
                if ready {
                    set.insert(u);
                    rank[u.index()] = Some(j + 1);
                    next.push(u);
                }
            }
        }
        next.sort();
        layer = next;
        j += 1;
    }

    let mut attacker = PositionalStrategy::new(player, n);
    let mut defender = PositionalStrategy::new(player.opponent(), n);
    for v in domain.iter() {
        let inside = |w: &&VertexId| domain.contains(**w);
        if arena.owner(v) == player {
            if let Some(r) = rank[v.index()].filter(|&r| r > 0) {
                let w = arena
                    .successors(v)
                    .iter()
                    .filter(inside)
                    .find(|w| rank[w.index()].is_some_and(|rw| rw < r))
                    .expect("an attractor vertex has a successor in a lower layer");
                attacker.set(v, *w);
            }
        } else if !set.contains(v) {
            let w = arena
                .successors(v)
                .iter()
                .filter(inside)
                .find(|w| !set.contains(**w))
                .expect("an opponent vertex outside the attractor can stay outside");
            defender.set(v, *w);
        }
    }
    Attractor {
        player,
        set,
        rank,
        attacker,
        defender,
    }
}

/// Winning regions and strategies of a finite game.
#[derive(Clone, Debug)]
pub struct Solution {
    pub win0: VertexSet,
    pub win1: VertexSet,
    /// Winning from every Player-0 vertex of `win0`; lowest successor elsewhere.
    pub strategy0: PositionalStrategy,
    /// Winning from every Player-1 vertex of `win1`; lowest successor elsewhere.
    pub strategy1: PositionalStrategy,
}

/// Safety for Player 0 with respect to the arena's unsafe set.
pub fn solve_safety(arena: &ExplicitArena) -> Solution {
    let attr = attractor(arena, arena.unsafe_set(), Player::One);
    let win1 = attr.set.clone();
    let win0 = win1.complement();
    Solution {
        win0,
        win1,
        strategy0: attr.defender.completed(arena),
        strategy1: attr.attacker.completed(arena),
    }
}

/// Büchi for Player 0: visit `accepting` infinitely often.
pub fn solve_buchi(arena: &ExplicitArena, accepting: &VertexSet) -> Solution {
    let n = arena.vertex_count();
    let mut game = VertexSet::full(n);
    loop {
        let recur = attractor_within(arena, &game, &accepting.intersection(&game), Player::Zero);
        let trap = game.difference(&recur.set);
        if trap.is_empty() {
            let mut strategy0 = recur.attacker.clone();
            for v in game.iter() {
                if arena.owner(v) == Player::Zero && strategy0.get(v).is_none() {
                    let w = arena
                        .successors(v)
                        .iter()
                        .find(|w| game.contains(**w))
                        .expect("Player 0 can stay in her winning region");
                    strategy0.set(v, *w);
                }
            }
            let win1 = game.complement();
            let strategy1 = attractor(arena, &win1, Player::One).attacker;
            return Solution {
                win0: game,
                win1,
                strategy0: strategy0.completed(arena),
                strategy1: strategy1.completed(arena),
            };
        }
        let lost = attractor_within(arena, &game, &trap, Player::One);
        game = game.difference(&lost.set);
    }
}

/// Player 0 wins a play if it never visits `unsafe_set` or visits `accepting`
/// infinitely often. Reduced to Büchi on the product with a one-bit memory
/// recording whether an unsafe vertex was seen; plays that never see one are
/// accepted at every position.
pub fn solve_union_safety_or_buchi(
    arena: &ExplicitArena,
    unsafe_set: &VertexSet,
    accepting: &VertexSet,
) -> (VertexSet, VertexSet) {
    let n = arena.vertex_count();
    let id = |v: VertexId, flag: bool| VertexId::new(2 * v.index() + usize::from(flag));
    let mut b = ArenaBuilder::new();
    for v in arena.vertices() {
        for flag in [false, true] {
            b.add_vertex(VertexLabel::Product(v, u32::from(flag)), arena.owner(v), false);
        }
    }
    for v in arena.vertices() {
        for flag in [false, true] {
            for &w in arena.successors(v) {
                b.add_edge(id(v, flag), id(w, flag || unsafe_set.contains(w)));
            }
        }
    }
    let product = b.build().expect("product of a valid arena");
    let good = VertexSet::from_iter(
        2 * n,
        arena.vertices().flat_map(|v| {
            let mut out = vec![id(v, false)];
            if accepting.contains(v) {
                out.push(id(v, true));
            }
            out
        }),
    );
    let sol = solve_buchi(&product, &good);
    let win0 = VertexSet::from_iter(
        n,
        arena
            .vertices()
            .filter(|&v| sol.win0.contains(id(v, unsafe_set.contains(v)))),
    );
    let win1 = win0.complement();
    (win0, win1)
}

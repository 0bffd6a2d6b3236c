//! Rigging: handing control over disturbances to Player 1.
//!
//! The rigged arena replaces every disturbance edge by a Player-1 choice that
//! passes through a marked auxiliary vertex, so that counting simulated
//! disturbances becomes counting visits to those vertices. Both an explicit
//! version and a symbolic version on pushdown systems are provided, plus the
//! counter product that turns "fewer than `k` simulated disturbances" into a
//! plain safety condition.

use std::collections::HashSet;

use thiserror::Error;

use crate::arena::{ArenaBuilder, ExplicitArena, VertexId, VertexLabel, VertexSet};
use crate::model::{Configuration, Player, PushdownGameSpec, Rule, SpecBuilder, StateId};
use crate::play::{Play, PositionalStrategy};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EdgeKind {
    Disturbance,
    PlayerOneMove,
}

/// Vertex of a rigged arena, in terms of vertices of the original arena.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RiggedLabel {
    Original(VertexId),
    /// `v̄`: where Player 0 picks the move of `v` once Player 1 declined to
    /// simulate a disturbance.
    Copy(VertexId),
    Edge {
        from: VertexId,
        to: VertexId,
        kind: EdgeKind,
    },
}

/// Output of [`rig_arena`]. Original vertices keep their indices.
#[derive(Clone, Debug)]
pub struct RiggedArena {
    pub arena: ExplicitArena,
    pub original_count: usize,
    copy_of: Vec<Option<VertexId>>,
    /// Auxiliary vertices simulating a disturbance.
    pub d_vertices: VertexSet,
}

impl RiggedArena {
    pub fn copy_of(&self, v: VertexId) -> Option<VertexId> {
        self.copy_of.get(v.index()).copied().flatten()
    }

    pub fn label(&self, v: VertexId) -> RiggedLabel {
        match self.arena.label(v) {
            VertexLabel::Rigged(l) => *l,
            other => unreachable!("rigged arena carries rigged labels, found {other:?}"),
        }
    }

    pub fn edge_vertex(&self, from: VertexId, to: VertexId, kind: EdgeKind) -> Option<VertexId> {
        self.arena
            .find(&VertexLabel::Rigged(RiggedLabel::Edge { from, to, kind }))
    }

    pub fn is_original(&self, v: VertexId) -> bool {
        v.index() < self.original_count
    }
}

/// Builds `(V ∪ A, V'_0, V'_1, E', ∅)`: Player 0 owns exactly the copies,
/// every disturbance edge and every Player-1 edge is subdivided, and every
/// Player-0 vertex first passes through its copy. A frontier sink stays a
/// sink. Unsafe vertices are the original unsafe ones.
pub fn rig_arena(arena: &ExplicitArena) -> RiggedArena {
    let n = arena.vertex_count();
    let mut b = ArenaBuilder::new();
    for v in arena.vertices() {
        b.add_vertex(VertexLabel::Rigged(RiggedLabel::Original(v)), Player::One, arena.is_unsafe(v));
    }
    let mut copy_of = vec![None; n];
    for v in arena.owned_by(Player::Zero) {
        let c = b.add_vertex(VertexLabel::Rigged(RiggedLabel::Copy(v)), Player::Zero, false);
        copy_of[v.index()] = Some(c);
        b.add_edge(v, c);
        for &w in arena.successors(v) {
            b.add_edge(c, w);
        }
    }
    let mut d_list = Vec::new();
    for v in arena.vertices() {
        for &w in arena.disturbance_successors(v) {
            let label = RiggedLabel::Edge {
                from: v,
                to: w,
                kind: EdgeKind::Disturbance,
            };
            let x = b.add_vertex(VertexLabel::Rigged(label), Player::One, false);
            d_list.push(x);
            b.add_edge(v, x).add_edge(x, w);
        }
    }
    for v in arena.owned_by(Player::One) {
        if Some(v) == arena.frontier() {
            b.add_edge(v, v);
            continue;
        }
        for &w in arena.successors(v) {
            let label = RiggedLabel::Edge {
                from: v,
                to: w,
                kind: EdgeKind::PlayerOneMove,
            };
            let x = b.add_vertex(VertexLabel::Rigged(label), Player::One, false);
            b.add_edge(v, x).add_edge(x, w);
        }
    }
    if let Some(f) = arena.frontier() {
        b.set_frontier(f);
    }
    if let Some(i) = arena.initial() {
        b.set_initial(i);
    }
    let rigged = b.build().expect("rigging preserves well-formedness");
    let d_vertices = VertexSet::from_iter(rigged.vertex_count(), d_list);
    RiggedArena {
        arena: rigged,
        original_count: n,
        copy_of,
        d_vertices,
    }
}

/// Where a state of a rigged pushdown system comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RigOrigin {
    Original(StateId),
    Copy(StateId),
    /// Index into the original disturbance rules.
    DisturbanceRule(usize),
    /// Index into the original standard rules (Player-1 sources only).
    MoveRule(usize),
}

/// Output of [`rig_pds`]. Original states keep their indices.
#[derive(Clone, Debug)]
pub struct RiggedPds {
    pub spec: PushdownGameSpec,
    pub origin: Vec<RigOrigin>,
    /// States whose configurations simulate a disturbance.
    pub d_states: Vec<bool>,
    pub original_states: usize,
}

impl RiggedPds {
    pub fn is_d_state(&self, q: StateId) -> bool {
        self.d_states[q]
    }
}

pub(crate) fn fresh_name(taken: &mut HashSet<String>, base: String) -> String {
    let mut name = base;
    while taken.contains(&name) {
        name.push('\'');
    }
    taken.insert(name.clone());
    name
}

pub(crate) fn rule_tag(spec: &PushdownGameSpec, r: &Rule) -> String {
    let word = if r.push.is_empty() {
        "eps".to_string()
    } else {
        r.push
            .iter()
            .map(|&a| spec.symbol_name(a))
            .collect::<Vec<_>>()
            .join(".")
    };
    format!(
        "{}:{}→{}:{}",
        spec.state(r.from).name,
        spec.top_name(r.top),
        spec.state(r.to).name,
        word
    )
}

/// Symbolic rigging. Auxiliary states are named `q~copy` for copies and
/// `q:X→p:w~d` / `q:X→p:w~e` for simulated disturbances and Player-1 moves.
/// An auxiliary state for rule `(q, X, p, w)` is only ever entered with `X`
/// on top; for other tops it carries an unreachable self-loop so that the
/// result stays deadlock-free.
pub fn rig_pds(spec: &PushdownGameSpec) -> RiggedPds {
    let mut b = SpecBuilder::new();
    for a in spec.alphabet() {
        b.symbol(a);
    }
    let tops = spec.tops();
    let mut taken: HashSet<String> = spec.states().iter().map(|s| s.name.clone()).collect();
    let mut origin = Vec::new();
    for (q, s) in spec.states().iter().enumerate() {
        let id = b.state(&s.name, Player::One);
        b.set_unsafe(id, s.is_unsafe);
        origin.push(RigOrigin::Original(q));
    }
    b.initial(spec.initial());

    let aux = |b: &mut SpecBuilder, origin: &mut Vec<RigOrigin>, r: &Rule, name: String, o| {
        let x = b.state(&name, Player::One);
        origin.push(o);
        b.rule(r.from, r.top, x, &r.top.keep());
        b.rule(x, r.top, r.to, &r.push);
        for &t in tops.iter().filter(|&&t| t != r.top) {
            b.rule(x, t, x, &t.keep());
        }
        x
    };

    for (q, s) in spec.states().iter().enumerate() {
        if s.owner != Player::Zero {
            continue;
        }
        let name = fresh_name(&mut taken, format!("{}~copy", s.name));
        let c = b.state(&name, Player::Zero);
        origin.push(RigOrigin::Copy(q));
        for &t in &tops {
            b.rule(q, t, c, &t.keep());
        }
        for r in spec.rules().iter().filter(|r| r.from == q) {
            b.rule(c, r.top, r.to, &r.push);
        }
    }
    let mut d_states = vec![false; b.states().len()];
    for (i, r) in spec.disturbances().iter().enumerate() {
        let name = fresh_name(&mut taken, format!("{}~d", rule_tag(spec, r)));
        aux(&mut b, &mut origin, r, name, RigOrigin::DisturbanceRule(i));
        d_states.push(true);
    }
    for (i, r) in spec.rules().iter().enumerate() {
        if spec.state(r.from).owner != Player::One {
            continue;
        }
        let name = fresh_name(&mut taken, format!("{}~e", rule_tag(spec, r)));
        aux(&mut b, &mut origin, r, name, RigOrigin::MoveRule(i));
        d_states.push(false);
    }
    let rigged = b.build().expect("rigging preserves well-formedness");
    RiggedPds {
        spec: rigged,
        origin,
        d_states,
        original_states: spec.state_count(),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum RigError {
    #[error("the disturbance counter needs k >= 1")]
    ZeroK,
    #[error("the strategy is undefined at stack height {height} (defined up to {max})")]
    UndefinedAtHeight { height: usize, max: usize },
    #[error("configuration {0} is not reachable in the truncation")]
    Unreachable(String),
    #[error("configuration {0} is not owned by Player 0")]
    NotOwned(String),
}

/// The rigged system times a saturating counter `0..=k` of simulated
/// disturbances. States are named `q@c<c>`.
#[derive(Clone, Debug)]
pub struct CounterProduct {
    pub spec: PushdownGameSpec,
    pub k: u64,
    pub base_states: usize,
}

impl CounterProduct {
    pub fn state(&self, q: StateId, c: u64) -> StateId {
        q * (self.k as usize + 1) + c as usize
    }

    pub fn split(&self, s: StateId) -> (StateId, u64) {
        let w = self.k as usize + 1;
        (s / w, (s % w) as u64)
    }
}

/// Player 0 wins the product safety game iff she wins
/// `Safety(F)_rig ∪ R_{≥k}` in the rigged game: unsafe states count only
/// while fewer than `k` disturbances were simulated.
pub fn counter_product(rigged: &RiggedPds, k: u64) -> Result<CounterProduct, RigError> {
    if k == 0 {
        return Err(RigError::ZeroK);
    }
    let spec = &rigged.spec;
    let mut b = SpecBuilder::new();
    for a in spec.alphabet() {
        b.symbol(a);
    }
    for s in spec.states() {
        for c in 0..=k {
            let id = b.state(&format!("{}@c{}", s.name, c), s.owner);
            b.set_unsafe(id, s.is_unsafe && c < k);
        }
    }
    let w = k as usize + 1;
    let id = |q: StateId, c: u64| q * w + c as usize;
    for r in spec.rules() {
        let bump = rigged.is_d_state(r.from);
        for c in 0..=k {
            let c2 = if bump { (c + 1).min(k) } else { c };
            b.rule(id(r.from, c), r.top, id(r.to, c2), &r.push);
        }
    }
    b.initial(id(spec.initial(), 0));
    Ok(CounterProduct {
        spec: b.build().expect("product of a valid spec"),
        k,
        base_states: spec.state_count(),
    })
}

/// The translation `t′` of a play of `original` into the rigged arena. The
/// output has no disturbance bits; each disturbance becomes a visit to a
/// marked auxiliary vertex.
pub fn translate_play_up(rigged: &RiggedArena, original: &ExplicitArena, play: &Play) -> Play {
    let mut out = Play::new(play.steps[0].0);
    for j in 1..play.steps.len() {
        let (u, _) = play.steps[j - 1];
        let (v, bit) = play.steps[j];
        let mid = if bit {
            rigged.edge_vertex(u, v, EdgeKind::Disturbance)
        } else if original.owner(u) == Player::Zero {
            rigged.copy_of(u)
        } else if Some(u) == original.frontier() {
            None
        } else {
            rigged.edge_vertex(u, v, EdgeKind::PlayerOneMove)
        };
        if let Some(m) = mid {
            out.push(m, false);
        }
        out.push(v, false);
    }
    out
}

/// Reads a Player-0 strategy of the original arena off the choices at the
/// copies: `σ(v) = σ'(v̄)`.
pub fn lift_strategy_down(
    rigged: &RiggedArena,
    original: &ExplicitArena,
    strategy: &PositionalStrategy,
) -> PositionalStrategy {
    let mut out = PositionalStrategy::new(Player::Zero, original.vertex_count());
    for v in original.owned_by(Player::Zero) {
        if let Some(t) = rigged.copy_of(v).and_then(|c| strategy.get(c)) {
            out.set(v, t);
        }
    }
    out
}

/// A move prescribed by a strategy on a truncation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Move {
    To(Configuration),
    /// The prescribed move leaves the truncation.
    Frontier,
}

/// A Player-0 strategy on the configurations of a truncation of height
/// `height`, represented positionally on the expanded arena.
#[derive(Clone, Debug)]
pub struct TruncatedStrategy {
    pub height: usize,
    pub arena: ExplicitArena,
    pub strategy: PositionalStrategy,
}

impl TruncatedStrategy {
    pub fn query(&self, config: &Configuration) -> Result<Move, RigError> {
        if config.height() > self.height {
            return Err(RigError::UndefinedAtHeight {
                height: config.height(),
                max: self.height,
            });
        }
        let v = self
            .arena
            .vertex_of(config)
            .ok_or_else(|| RigError::Unreachable(format!("{config:?}")))?;
        let t = self
            .strategy
            .get(v)
            .ok_or_else(|| RigError::NotOwned(self.arena.describe(v)))?;
        Ok(match self.arena.config(t) {
            Some(c) => Move::To(c),
            None => Move::Frontier,
        })
    }

    /// Owned configurations with their moves, in vertex order.
    pub fn moves(&self) -> Vec<(Configuration, Move)> {
        self.strategy
            .entries()
            .filter_map(|(v, t)| {
                let c = self.arena.config(v)?;
                let m = match self.arena.config(t) {
                    Some(ct) => Move::To(ct),
                    None => Move::Frontier,
                };
                Some((c, m))
            })
            .collect()
    }
}

/// Lifts a Player-0 strategy on an expansion of `rigged` down to `original`,
/// an expansion of the unrigged spec at the same height.
pub fn lift_pds_strategy(
    rigged: &RiggedPds,
    rigged_arena: &ExplicitArena,
    strategy: &PositionalStrategy,
    original: ExplicitArena,
    height: usize,
) -> TruncatedStrategy {
    let mut copy_state = vec![None; rigged.original_states];
    for (s, o) in rigged.origin.iter().enumerate() {
        if let RigOrigin::Copy(q) = o {
            copy_state[*q] = Some(s);
        }
    }
    let mut out = PositionalStrategy::new(Player::Zero, original.vertex_count());
    for v in original.owned_by(Player::Zero) {
        let Some(c) = original.config(v) else { continue };
        let Some(cs) = copy_state[c.state] else { continue };
        let Some(rv) = rigged_arena.vertex_of(&Configuration::new(cs, c.stack.clone())) else {
            continue;
        };
        let Some(rt) = strategy.get(rv) else { continue };
        let target = match rigged_arena.config(rt) {
            Some(tc) => original.vertex_of(&tc),
            None => original.frontier(),
        };
        if let Some(t) = target {
            out.set(v, t);
        }
    }
    TruncatedStrategy {
        height,
        arena: original,
        strategy: out,
    }
}

/// Canonical form of a vertex of an expansion of `rigged`, phrased in the
/// vertices of `original` (an expansion of the unrigged spec at the same
/// height). Auxiliary configurations whose move leaves the truncation map to
/// the edge into the frontier. Used to compare both ways of rigging.
pub fn canonical_rigged_label(
    rigged: &RiggedPds,
    original_spec: &PushdownGameSpec,
    rigged_arena: &ExplicitArena,
    original: &ExplicitArena,
    height: usize,
    v: VertexId,
) -> Option<RiggedLabel> {
    let Some(c) = rigged_arena.config(v) else {
        return original.frontier().map(RiggedLabel::Original);
    };
    let at = |q: StateId| original.vertex_of(&Configuration::new(q, c.stack.clone()));
    let via = |r: &Rule, kind: EdgeKind| -> Option<RiggedLabel> {
        let from = at(r.from)?;
        let to = match original_spec.apply(r, &Configuration::new(r.from, c.stack.clone())) {
            Some(next) if next.height() <= height => original.vertex_of(&next)?,
            Some(_) => original.frontier()?,
            None => return None,
        };
        Some(RiggedLabel::Edge { from, to, kind })
    };
    match rigged.origin[c.state] {
        RigOrigin::Original(q) => at(q).map(RiggedLabel::Original),
        RigOrigin::Copy(q) => at(q).map(RiggedLabel::Copy),
        RigOrigin::DisturbanceRule(i) => via(&original_spec.disturbances()[i], EdgeKind::Disturbance),
        RigOrigin::MoveRule(i) => via(&original_spec.rules()[i], EdgeKind::PlayerOneMove),
    }
}

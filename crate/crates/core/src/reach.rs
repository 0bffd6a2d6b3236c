//! Reachability-optimal strategies through resilience.
//!
//! In a disturbance-free reachability game (target = the states marked
//! unsafe), split every rule through an edge state that can only be left by
//! a disturbance, and flip the owners. Each move of the original game then
//! costs one disturbance, so the resilience of the initial vertex in the
//! split safety game is the least number of steps in which the reaching
//! player can force the target.

use std::collections::HashSet;

use thiserror::Error;

use crate::arena::{expand_truncated, ExplicitArena, FrontierMode, VertexSet};
use crate::engine::{resilience_initial, AnalysisOptions, EngineError, ResilienceReport};
use crate::model::{Player, PushdownGameSpec, SpecBuilder};
use crate::rigging::{fresh_name, rule_tag};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ReachError {
    #[error("reachability games must not have disturbance rules ({0} found)")]
    HasDisturbances(usize),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

/// The split safety game. Original states keep their indices with flipped
/// owners; rule `i` gets the state `original_states + i`, named after the
/// rule with a `~s` suffix.
pub fn split_edges_transform(spec: &PushdownGameSpec) -> Result<PushdownGameSpec, ReachError> {
    if !spec.disturbances().is_empty() {
        return Err(ReachError::HasDisturbances(spec.disturbances().len()));
    }
    let mut b = SpecBuilder::new();
    for a in spec.alphabet() {
        b.symbol(a);
    }
    for s in spec.states() {
        let q = b.state(&s.name, s.owner.opponent());
        b.set_unsafe(q, s.is_unsafe);
    }
    b.initial(spec.initial());
    let mut taken: HashSet<String> = spec.states().iter().map(|s| s.name.clone()).collect();
    let tops = spec.tops();
    for r in spec.rules() {
        let name = fresh_name(&mut taken, format!("{}~s", rule_tag(spec, r)));
        let e = b.state(&name, Player::Zero);
        b.rule(r.from, r.top, e, &r.top.keep());
        for &t in &tops {
            b.rule(e, t, e, &t.keep());
        }
        b.disturbance(e, r.top, r.to, &r.push);
    }
    Ok(b.build().expect("splitting preserves well-formedness"))
}

/// Value of a reachability-optimal strategy from the initial vertex:
/// `Finite(n)` when the target can be forced within `n` steps, `ω+1` when it
/// cannot be forced at all.
pub fn optimal_reach_value(
    spec: &PushdownGameSpec,
    options: &AnalysisOptions,
) -> Result<ResilienceReport, ReachError> {
    let split = split_edges_transform(spec)?;
    Ok(resilience_initial(&split, options)?)
}

/// Steps in which Player 0 forces a visit to `target` (minimum over her
/// moves, maximum over his), or `None` if she cannot. Disturbance edges are
/// ignored.
pub fn backward_induction_oracle(arena: &ExplicitArena, target: &VertexSet) -> Vec<Option<u64>> {
    let n = arena.vertex_count();
    let mut value: Vec<Option<u64>> = (0..n)
        .map(|i| target.contains(crate::arena::VertexId::new(i)).then_some(0))
        .collect();
    loop {
        let mut changed = false;
        for v in arena.vertices() {
            if target.contains(v) {
                continue;
            }
            let succ = arena.successors(v).iter().map(|w| value[w.index()]);
            let best = match arena.owner(v) {
                Player::Zero => succ.flatten().min(),
                Player::One => succ.collect::<Option<Vec<u64>>>().and_then(|s| s.into_iter().max()),
            };
            let new = best.map(|b| b + 1);
            if new != value[v.index()] && new.is_some_and(|x| value[v.index()].is_none_or(|y| x < y)) {
                value[v.index()] = new;
                changed = true;
            }
        }
        if !changed {
            return value;
        }
    }
}

/// [`backward_induction_oracle`] at the initial vertex of the truncation of
/// `spec` at `height`, whose frontier is not a target.
pub fn reach_oracle_initial(spec: &PushdownGameSpec, height: usize) -> Option<u64> {
    let arena = expand_truncated(spec, height, FrontierMode::Optimistic);
    let v = arena.initial().expect("expansions have an initial vertex");
    backward_induction_oracle(&arena, arena.unsafe_set())[v.index()]
}

/// A disturbance-free copy of `spec`, for running reachability analyses on
/// games that carry disturbance rules.
pub fn without_disturbances(spec: &PushdownGameSpec) -> PushdownGameSpec {
    let mut b = spec.clone().into_builder();
    b.clear_disturbances();
    b.build().expect("dropping disturbances preserves well-formedness")
}

mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;

use pdres::arena::{expand_truncated, ExplicitArena, FrontierMode, VertexId, VertexSet};
use pdres::engine::resilience_fixpoint;
use pdres::generators::random_arena;
use pdres::play::{simulate, Policy};
use pdres::solver::{attractor, solve_buchi, solve_safety, solve_union_safety_or_buchi};
use pdres::{Player, Resilience};

use common::small_spec;

/// Least set containing `target` closed under the attractor rules, by
/// iterating a full backward scan until nothing changes.
fn naive_attractor(a: &ExplicitArena, target: &VertexSet, p: Player) -> VertexSet {
    let mut set = target.clone();
    loop {
        let mut grew = false;
        for v in a.vertices() {
            if set.contains(v) {
                continue;
            }
            let s = a.successors(v);
            let joins = if a.owner(v) == p {
                s.iter().any(|w| set.contains(*w))
            } else {
                s.iter().all(|w| set.contains(*w))
            };
            if joins {
                set.insert(v);
                grew = true;
            }
        }
        if !grew {
            return set;
        }
    }
}

/// Every positional choice function for the vertices owned by `p`.
fn positional_choices(a: &ExplicitArena, p: Player) -> Vec<Vec<VertexId>> {
    let mut all = vec![a.vertices().map(|v| a.successors(v)[0]).collect::<Vec<_>>()];
    for v in a.owned_by(p) {
        let mut next = Vec::new();
        for c in &all {
            for &w in a.successors(v) {
                let mut c2 = c.clone();
                c2[v.index()] = w;
                next.push(c2);
            }
        }
        all = next;
    }
    all
}

/// With Player 0 fixed to `choice`, the vertices from which Player 1 can
/// reach an infinite path avoiding `good` (a lasso, as the graph is finite).
fn player1_escapes(a: &ExplicitArena, choice: &[VertexId], good: &VertexSet) -> VertexSet {
    let succ = |v: VertexId| -> Vec<VertexId> {
        if a.owner(v) == Player::Zero {
            vec![choice[v.index()]]
        } else {
            a.successors(v).to_vec()
        }
    };
    let mut alive = good.complement();
    loop {
        let dead: Vec<VertexId> = alive
            .iter()
            .filter(|&v| !succ(v).iter().any(|w| alive.contains(*w)))
            .collect();
        if dead.is_empty() {
            break;
        }
        for v in dead {
            alive.remove(v);
        }
    }
    let mut reach = alive;
    loop {
        let more: Vec<VertexId> = a
            .vertices()
            .filter(|&v| !reach.contains(v) && succ(v).iter().any(|w| reach.contains(*w)))
            .collect();
        if more.is_empty() {
            return reach;
        }
        for v in more {
            reach.insert(v);
        }
    }
}

fn buchi_by_enumeration(a: &ExplicitArena, good: &VertexSet) -> VertexSet {
    let mut win = VertexSet::new(a.vertex_count());
    for choice in positional_choices(a, Player::Zero) {
        let lose = player1_escapes(a, &choice, good);
        win = win.union(&lose.complement());
    }
    win
}

/// The union objective through an independently built flag product and the
/// Büchi enumeration.
fn union_by_enumeration(a: &ExplicitArena, bad: &VertexSet, good: &VertexSet) -> VertexSet {
    let n = a.vertex_count();
    let mut b = pdres::arena::ArenaBuilder::new();
    for v in a.vertices() {
        for f in 0..2 {
            b.add_vertex(pdres::arena::VertexLabel::Named(format!("{}/{f}", v.index())), a.owner(v), false);
        }
    }
    for v in a.vertices() {
        for f in 0..2usize {
            for &w in a.successors(v) {
                let f2 = f | usize::from(bad.contains(w));
                b.add_edge(VertexId::new(2 * v.index() + f), VertexId::new(2 * w.index() + f2));
            }
        }
    }
    let p = b.build().unwrap();
    let acc = VertexSet::from_iter(
        2 * n,
        (0..n).flat_map(|i| {
            let mut out = vec![VertexId::new(2 * i)];
            if good.contains(VertexId::new(i)) {
                out.push(VertexId::new(2 * i + 1));
            }
            out
        }),
    );
    let w = buchi_by_enumeration(&p, &acc);
    VertexSet::from_iter(
        n,
        a.vertices()
            .filter(|&v| w.contains(VertexId::new(2 * v.index() + usize::from(bad.contains(v))))),
    )
}

fn some_set(seed: u64, n: usize) -> VertexSet {
    VertexSet::from_iter(n, (0..n).filter(|i| (seed >> (i % 64)) & 1 == 1).map(VertexId::new))
}

#[test]
fn buchi_hand_built_controllable_cycle() {
    let mut b = pdres::arena::ArenaBuilder::new();
    let v: Vec<_> = (0..6)
        .map(|i| b.named(&format!("u{i}"), if i % 2 == 0 { Player::Zero } else { Player::One }, false))
        .collect();
    // u0 chooses between the accepting cycle u0 -> u1 -> u0 and u2 -> u3 -> u4 <-> u5.
    b.add_edge(v[0], v[1]).add_edge(v[0], v[2]).add_edge(v[1], v[0]);
    b.add_edge(v[2], v[3]).add_edge(v[3], v[4]).add_edge(v[4], v[5]).add_edge(v[5], v[4]);
    let a = b.build().unwrap();
    let good = VertexSet::from_iter(6, [v[1]]);
    assert_eq!(solve_buchi(&a, &good).win0, buchi_by_enumeration(&a, &good));
    assert!(solve_buchi(&a, &good).win0.contains(v[0]));
    assert!(!solve_buchi(&a, &good).win0.contains(v[2]));
}

#[test]
fn safety_strategy_survives_random_plays() {
    let a = random_arena(17, 20, 3, 0.0);
    let sol = solve_safety(&a);
    for v in sol.win0.iter() {
        for seed in 0..1000 {
            let sim = simulate(&a, v, Policy::Positional(&sol.strategy0), Policy::Random, &BTreeSet::new(), 30, seed).unwrap();
            assert!(!sim.play.visits(a.unsafe_set()));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn attractor_matches_naive_oracle(seed in 0u64..100_000, p in 0u8..2) {
        let a = random_arena(seed, 20, 3, 0.3);
        let player = Player::from_index(p).unwrap();
        let target = some_set(seed.wrapping_mul(0x9e37_79b9), 20);
        let attr = attractor(&a, &target, player);
        prop_assert_eq!(&attr.set, &naive_attractor(&a, &target, player));
        prop_assert_eq!(&attractor(&a, &attr.set, player).set, &attr.set);
    }

    #[test]
    fn determinacy(seed in 0u64..100_000) {
        let a = random_arena(seed, 12, 3, 0.3);
        let good = some_set(seed ^ 0x5555, 12);
        for (w0, w1) in [
            { let s = solve_safety(&a); (s.win0, s.win1) },
            { let s = solve_buchi(&a, &good); (s.win0, s.win1) },
            solve_union_safety_or_buchi(&a, a.unsafe_set(), &good),
        ] {
            prop_assert!(w0.intersection(&w1).is_empty());
            prop_assert_eq!(w0.union(&w1).len(), a.vertex_count());
        }
    }

    #[test]
    fn buchi_matches_enumeration(seed in 0u64..100_000) {
        let a = random_arena(seed, 6, 2, 0.0);
        let good = some_set(seed ^ 0xabcd, 6);
        prop_assert_eq!(solve_buchi(&a, &good).win0, buchi_by_enumeration(&a, &good));
    }

    #[test]
    fn union_matches_enumeration(seed in 0u64..100_000) {
        let a = random_arena(seed, 8, 2, 0.0);
        let good = some_set(seed ^ 0x1234, 8);
        let (w0, _) = solve_union_safety_or_buchi(&a, a.unsafe_set(), &good);
        prop_assert_eq!(w0, union_by_enumeration(&a, a.unsafe_set(), &good));
    }

    #[test]
    fn safety_strategy_is_winning(seed in 0u64..100_000) {
        let a = random_arena(seed, 15, 3, 0.0);
        let sol = solve_safety(&a);
        prop_assert!(sol.strategy0.validate(&a).is_ok());
        for v in sol.win0.iter() {
            for s in 0..20 {
                let sim = simulate(&a, v, Policy::Positional(&sol.strategy0), Policy::Random, &BTreeSet::new(), 30, s).unwrap();
                prop_assert!(!sim.play.visits(a.unsafe_set()));
            }
        }
    }

    #[test]
    fn positive_resilience_is_winning(seed in 0u64..100_000) {
        let spec = small_spec(seed);
        let a = expand_truncated(&spec, 5, FrontierMode::Optimistic);
        let t = resilience_fixpoint(&a);
        let w0 = solve_safety(&a).win0;
        for v in a.vertices() {
            prop_assert_eq!(t.value(v) > Resilience::Finite(0), w0.contains(v));
        }
    }

    #[test]
    fn disturbance_free_values_are_extreme(seed in 0u64..100_000) {
        let a = random_arena(seed, 15, 3, 0.0);
        let t = resilience_fixpoint(&a);
        let w0 = solve_safety(&a).win0;
        for v in a.vertices() {
            let want = if w0.contains(v) { Resilience::OmegaPlusOne } else { Resilience::Finite(0) };
            prop_assert_eq!(t.value(v), want);
        }
    }
}

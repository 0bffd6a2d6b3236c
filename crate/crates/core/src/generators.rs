//! Fixture games with known resilience values, and seeded random instances.

use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::arena::{ArenaBuilder, ExplicitArena, VertexId};
use crate::model::{Player, PushdownGameSpec, SpecBuilder, Symbol, Top};

/// The first `k` primes.
pub fn primes(k: usize) -> Vec<u64> {
    let mut out: Vec<u64> = Vec::with_capacity(k);
    let mut n = 2u64;
    while out.len() < k {
        if out.iter().take_while(|&&p| p * p <= n).all(|&p| !n.is_multiple_of(p)) {
            out.push(n);
        }
        n += 1;
    }
    out
}

/// Product of the first `k` primes.
pub fn primorial(k: usize) -> BigUint {
    primes(k).into_iter().map(BigUint::from).product()
}

/// The one-counter game of Example 1. From `q_I` Player 0 may count up
/// forever or drop to `q_1`, where each disturbance decrements the counter;
/// at zero the play is forced into the unsafe state `q_2`.
pub fn gen_fig1() -> PushdownGameSpec {
    let mut b = SpecBuilder::new();
    let a = b.symbol("A");
    let qi = b.state("q_I", Player::Zero);
    let q1 = b.state("q_1", Player::Zero);
    let q2 = b.unsafe_state("q_2", Player::Zero);
    b.initial(qi);
    let (bot, top) = (Top::Bottom, Top::Symbol(a));
    b.rule(qi, bot, qi, &[a]).rule(qi, bot, q1, &[]);
    b.rule(qi, top, qi, &[a, a]).rule(qi, top, q1, &[a]);
    b.rule(q1, top, q1, &[a]).disturbance(q1, top, q1, &[]);
    b.rule(q1, bot, q2, &[]);
    b.rule(q2, bot, q2, &[]).rule(q2, top, q2, &[a]);
    b.build().expect("fixture is well formed")
}

/// [`gen_fig1`] with a Player-1 preamble `pre0, …, pre{n}` that pushes `n`
/// symbols and hands over to `q_1`, so the initial vertex behaves like
/// `(q_1, A^n)`.
pub fn gen_fig1_from_q1(n: usize) -> PushdownGameSpec {
    let base = gen_fig1();
    let q1 = base.state_index("q_1").expect("fixture state");
    let mut b = base.clone().into_builder();
    let mut prev = b.state("pre0", Player::One);
    b.initial(prev);
    for i in 1..=n {
        let next = b.state(&format!("pre{i}"), Player::One);
        for t in base.tops() {
            let mut w = t.keep();
            w.insert(0, 0);
            b.rule(prev, t, next, &w);
        }
        prev = next;
    }
    for t in base.tops() {
        b.rule(prev, t, q1, &t.keep());
    }
    b.build().expect("fixture is well formed")
}

/// Shared part of the two lower-bound families: Player 1 pumps in `i`,
/// Player 0 picks in `c` either the drain `d` or one of the modulo checkers.
/// Checker `(p, j)` pops the stack while counting modulo `p` and loses for
/// Player 1 unless it meets the bottom at remainder 0. Returns `(i, c, d, s)`.
fn pump_and_check(b: &mut SpecBuilder, k: usize, alphabet: &[Symbol]) -> (usize, usize, usize, usize) {
    let i = b.state("i", Player::One);
    let c = b.state("c", Player::Zero);
    let d = b.state("d", Player::Zero);
    let s = b.unsafe_state("s", Player::One);
    b.initial(i);
    b.rule(s, Top::Bottom, s, &[]);
    for &x in alphabet {
        b.rule(s, Top::Symbol(x), s, &[x]);
    }
    b.rule(c, Top::Bottom, d, &[]);
    for p in primes(k) {
        let ids: Vec<usize> = (0..p).map(|j| b.state(&format!("m{p}_{j}"), Player::One)).collect();
        for (j, &q) in ids.iter().enumerate() {
            let next = ids[(j + 1) % p as usize];
            for &x in alphabet {
                b.rule(q, Top::Symbol(x), next, &[]);
            }
            if j == 0 {
                b.rule(q, Top::Bottom, s, &[]);
            } else {
                b.rule(q, Top::Bottom, q, &[]);
            }
        }
        for &x in alphabet {
            b.rule(c, Top::Symbol(x), ids[0], &[x]);
        }
    }
    for &x in alphabet {
        b.rule(c, Top::Symbol(x), d, &[x]);
    }
    (i, c, d, s)
}

/// One-counter family whose initial vertex has resilience `primorial(k)`.
/// Player 1 must stop pumping at a multiple of every one of the first `k`
/// primes, otherwise Player 0 escapes through a checker; from the drain `d`
/// each disturbance removes one unit and the empty counter is unsafe.
pub fn gen_primorial_ocs(k: usize) -> PushdownGameSpec {
    assert!(k >= 1, "k must be positive");
    let mut b = SpecBuilder::new();
    let a = b.symbol("A");
    let (i, c, d, s) = pump_and_check(&mut b, k, &[a]);
    b.rule(i, Top::Bottom, i, &[a]);
    b.rule(i, Top::Symbol(a), i, &[a, a]).rule(i, Top::Symbol(a), c, &[a]);
    b.rule(d, Top::Symbol(a), d, &[a]).disturbance(d, Top::Symbol(a), d, &[]);
    b.rule(d, Top::Bottom, s, &[]);
    b.build().expect("fixture is well formed")
}

/// Pushdown family whose initial vertex has resilience `2^primorial(k) - 1`.
/// The stack is a binary number, least significant bit on top. Player 1
/// pumps ones; the drain `d` strips trailing zeros, and a disturbance at a
/// one clears it and hands control back to Player 1, who must refill the
/// stripped positions with ones to keep the height a multiple of every
/// checked prime. Each disturbance thus decrements the number by one.
pub fn gen_binary_pds(k: usize) -> PushdownGameSpec {
    assert!(k >= 1, "k must be positive");
    let mut b = SpecBuilder::new();
    let zero = b.symbol("0");
    let one = b.symbol("1");
    let (i, c, d, s) = pump_and_check(&mut b, k, &[zero, one]);
    b.rule(i, Top::Bottom, i, &[one]);
    for x in [zero, one] {
        b.rule(i, Top::Symbol(x), i, &[one, x]).rule(i, Top::Symbol(x), c, &[x]);
    }
    b.rule(d, Top::Symbol(zero), d, &[]);
    b.rule(d, Top::Symbol(one), d, &[one]).disturbance(d, Top::Symbol(one), i, &[zero]);
    b.rule(d, Top::Bottom, s, &[]);
    b.build().expect("fixture is well formed")
}

/// The one-counter reachability game with vertices of every resilience
/// kind, target state `a` (marked unsafe). From `o` Player 0 counts up and
/// moves to `l`, where the step to the target can be disturbed into a
/// decrement. State `b` reaches the target from the bottom unless disturbed.
pub fn gen_fig3() -> PushdownGameSpec {
    let mut bld = SpecBuilder::new();
    let x = bld.symbol("A");
    let o = bld.state("o", Player::Zero);
    let l = bld.state("l", Player::Zero);
    let a = bld.unsafe_state("a", Player::Zero);
    let b = bld.state("b", Player::Zero);
    bld.initial(o);
    let (bot, top) = (Top::Bottom, Top::Symbol(x));
    bld.rule(o, bot, o, &[x]).rule(o, bot, l, &[]);
    bld.rule(o, top, o, &[x, x]).rule(o, top, l, &[x]);
    bld.rule(l, top, a, &[x]).disturbance(l, top, l, &[]);
    bld.rule(l, bot, l, &[]);
    bld.rule(a, top, a, &[]).rule(a, bot, a, &[]);
    bld.rule(b, bot, a, &[]).disturbance(b, bot, b, &[]);
    bld.rule(b, top, b, &[x]);
    bld.build().expect("fixture is well formed")
}

/// Knobs for [`gen_random`].
#[derive(Clone, Debug, PartialEq)]
pub struct RandomParams {
    pub states: usize,
    /// 1 gives a one-counter game.
    pub symbols: usize,
    /// Rules per `(state, top)` pair are drawn from `1..=max_rules`.
    pub max_rules: usize,
    /// Chance that a Player-0 `(state, top)` pair gets a disturbance rule.
    pub disturbance_prob: f64,
    pub unsafe_prob: f64,
    pub player0_prob: f64,
}

impl Default for RandomParams {
    fn default() -> Self {
        RandomParams {
            states: 3,
            symbols: 1,
            max_rules: 2,
            disturbance_prob: 0.4,
            unsafe_prob: 0.25,
            player0_prob: 0.5,
        }
    }
}

impl RandomParams {
    pub fn one_counter(states: usize) -> Self {
        RandomParams {
            states,
            ..Self::default()
        }
    }
}

fn random_rule_target(rng: &mut ChaCha8Rng, p: &RandomParams, top: Top) -> (usize, Vec<Symbol>) {
    let to = rng.gen_range(0..p.states);
    let sym = |rng: &mut ChaCha8Rng| rng.gen_range(0..p.symbols) as Symbol;
    let push = match top {
        Top::Bottom => {
            if rng.gen_bool(0.5) {
                vec![sym(rng)]
            } else {
                vec![]
            }
        }
        Top::Symbol(_) => match rng.gen_range(0..3) {
            0 => vec![],
            1 => vec![sym(rng)],
            _ => vec![sym(rng), sym(rng)],
        },
    };
    (to, push)
}

/// A random well-formed game, deterministic in `seed`. State 0 is initial.
pub fn gen_random(seed: u64, p: &RandomParams) -> PushdownGameSpec {
    assert!(p.states >= 1 && p.symbols >= 1 && p.max_rules >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut b = SpecBuilder::new();
    let symbols: Vec<Symbol> = (0..p.symbols)
        .map(|j| b.symbol(&((b'A' + (j % 26) as u8) as char).to_string().repeat(j / 26 + 1)))
        .collect();
    let mut ids = Vec::new();
    for q in 0..p.states {
        let owner = if rng.gen_bool(p.player0_prob) { Player::Zero } else { Player::One };
        let id = b.state(&format!("s{q}"), owner);
        if rng.gen_bool(p.unsafe_prob) {
            b.set_unsafe(id, true);
        }
        ids.push((id, owner));
    }
    b.initial(0);
    let tops: Vec<Top> = std::iter::once(Top::Bottom)
        .chain(symbols.iter().map(|&a| Top::Symbol(a)))
        .collect();
    for &(q, owner) in &ids {
        for &t in &tops {
            for _ in 0..rng.gen_range(1..=p.max_rules) {
                let (to, push) = random_rule_target(&mut rng, p, t);
                b.rule(q, t, to, &push);
            }
            if owner == Player::Zero && rng.gen_bool(p.disturbance_prob) {
                let (to, push) = random_rule_target(&mut rng, p, t);
                b.disturbance(q, t, to, &push);
            }
        }
    }
    b.build().expect("random games are well formed by construction")
}

/// A random explicit arena with vertices `v0..v{n-1}` and initial `v0`.
/// Disturbance edges leave Player-0 vertices only.
pub fn random_arena(seed: u64, n: usize, max_out: usize, dist_prob: f64) -> ExplicitArena {
    assert!(n >= 1 && max_out >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut b = ArenaBuilder::new();
    let mut owners = Vec::with_capacity(n);
    for i in 0..n {
        let owner = if rng.gen_bool(0.5) { Player::Zero } else { Player::One };
        let is_unsafe = rng.gen_bool(0.2);
        b.named(&format!("v{i}"), owner, is_unsafe);
        owners.push(owner);
    }
    for (i, &owner) in owners.iter().enumerate() {
        let u = VertexId::new(i);
        for _ in 0..rng.gen_range(1..=max_out) {
            b.add_edge(u, VertexId::new(rng.gen_range(0..n)));
        }
        if owner == Player::Zero && rng.gen_bool(dist_prob) {
            for _ in 0..rng.gen_range(1..=2) {
                b.add_disturbance(u, VertexId::new(rng.gen_range(0..n)));
            }
        }
    }
    b.set_initial(VertexId::new(0));
    b.build().expect("random arenas are well formed by construction")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arena::{expand_truncated, FrontierMode};
    use crate::engine::{brute_force_resilience, resilience_fixpoint, OracleValue};
    use crate::model::Configuration;
    use crate::value::Resilience;

    #[test]
    fn primorial_values() {
        assert_eq!(primorial(1), BigUint::from(2u32));
        assert_eq!(primorial(2), BigUint::from(6u32));
        assert_eq!(primorial(5), BigUint::from(2310u32));
        for k in 1..=20 {
            assert!(primorial(k) >= BigUint::from(1u32) << k);
        }
    }

    #[test]
    fn fixtures_are_well_formed() {
        assert_eq!(gen_fig1().state_count(), 3);
        assert!(gen_fig1().is_one_counter());
        assert!(gen_primorial_ocs(3).is_one_counter());
        assert!(!gen_binary_pds(1).is_one_counter());
        assert_eq!(gen_fig3().state_count(), 4);
        // i, c, d, s and 2 + 3 checker states.
        assert_eq!(gen_primorial_ocs(2).state_count(), 9);
    }

    #[test]
    fn random_is_reproducible() {
        let p = RandomParams::one_counter(4);
        assert_eq!(gen_random(9, &p), gen_random(9, &p));
        assert_ne!(gen_random(9, &p), gen_random(10, &p));
    }

    #[test]
    fn primorial_one_by_truncation() {
        let spec = gen_primorial_ocs(1);
        let arena = expand_truncated(&spec, 8, FrontierMode::Optimistic);
        let t = resilience_fixpoint(&arena);
        let o = brute_force_resilience(&arena, 6);
        let v = arena.initial().unwrap();
        assert_eq!(t.value(v), Resilience::Finite(2));
        assert_eq!(o[v.index()], OracleValue::Finite(2));
    }

    #[test]
    fn binary_one_by_truncation() {
        let spec = gen_binary_pds(1);
        let arena = expand_truncated(&spec, 6, FrontierMode::Optimistic);
        let t = resilience_fixpoint(&arena);
        let v = arena.vertex_of(&Configuration::new(spec.initial(), vec![])).unwrap();
        assert_eq!(t.value(v), Resilience::Finite(3));
        assert_eq!(brute_force_resilience(&arena, 6)[v.index()], OracleValue::Finite(3));
    }
}

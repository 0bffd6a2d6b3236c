//! Brute-force resilience by naive fixpoint iteration over a disturbance
//! budget. Deliberately shares no code with the attractor machinery.

use crate::arena::{ExplicitArena, VertexId};
use crate::model::Player;
use crate::value::Resilience;

/// Resilience as seen through a finite budget.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum OracleValue {
    Finite(u64),
    /// Player 0 survives every budget up to the cap.
    AboveCap,
}

impl OracleValue {
    /// Whether `r` is consistent with this oracle answer under `cap`.
    pub fn agrees_with(self, r: Resilience, cap: u64) -> bool {
        match (self, r) {
            (OracleValue::Finite(a), Resilience::Finite(b)) => a == b,
            (OracleValue::AboveCap, Resilience::Finite(b)) => b > cap,
            (OracleValue::AboveCap, _) => true,
            (OracleValue::Finite(_), _) => false,
        }
    }
}

/// `survive[d][v]`: Player 0 avoids the unsafe set from `v` when Player 1
/// may additionally fire up to `d` disturbance edges. Computed as a greatest
/// fixpoint per `d`: a safe vertex stays if Player 1 cannot leave the set,
/// Player 0 can stay in it, and every disturbance lands in `survive[d-1]`.
pub fn survival_table(arena: &ExplicitArena, cap: u64) -> Vec<Vec<bool>> {
    let n = arena.vertex_count();
    let mut table: Vec<Vec<bool>> = Vec::new();
    for d in 0..=cap {
        let mut alive: Vec<bool> = (0..n)
            .map(|i| !arena.is_unsafe(VertexId::new(i)))
            .collect();
        loop {
            let mut changed = false;
            for v in arena.vertices() {
                if !alive[v.index()] {
                    continue;
                }
                let succ = arena.successors(v);
                let ok = match arena.owner(v) {
                    Player::One => succ.iter().all(|w| alive[w.index()]),
                    Player::Zero => {
                        succ.iter().any(|w| alive[w.index()])
                            && (d == 0
                                || arena
                                    .disturbance_successors(v)
                                    .iter()
                                    .all(|w| table[d as usize - 1][w.index()]))
                    }
                };
                if !ok {
                    alive[v.index()] = false;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        table.push(alive);
    }
    table
}

/// Least budget Player 0 does not survive, per vertex.
pub fn brute_force_resilience(arena: &ExplicitArena, budget_cap: u64) -> Vec<OracleValue> {
    let table = survival_table(arena, budget_cap);
    arena
        .vertices()
        .map(|v| {
            (0..=budget_cap)
                .find(|&d| !table[d as usize][v.index()])
                .map_or(OracleValue::AboveCap, OracleValue::Finite)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arena::{expand_truncated, FrontierMode};
    use crate::generators::{gen_fig1, random_arena};
    use crate::model::Configuration;
    use crate::solver::solve_safety;

    #[test]
    fn cap_zero_matches_safety() {
        for seed in 0..15 {
            let a = random_arena(seed, 14, 2, 0.3);
            let o = brute_force_resilience(&a, 0);
            let sol = solve_safety(&a);
            for v in a.vertices() {
                assert_eq!(o[v.index()] == OracleValue::Finite(0), sol.win1.contains(v));
            }
        }
    }

    #[test]
    fn fig1_values() {
        let spec = gen_fig1();
        let a = expand_truncated(&spec, 8, FrontierMode::Optimistic);
        let o = brute_force_resilience(&a, 6);
        let q1 = spec.state_index("q_1").unwrap();
        for n in 0..=8usize {
            let v = a.vertex_of(&Configuration::new(q1, vec![0; n])).unwrap();
            let want = if n <= 6 { OracleValue::Finite(n as u64) } else { OracleValue::AboveCap };
            assert_eq!(o[v.index()], want);
        }
    }
}

//! The attractor/D-boundary fixpoint computing resilience on finite arenas.

use crate::arena::{ExplicitArena, VertexId, VertexSet};
use crate::model::Player;
use crate::play::PositionalStrategy;
use crate::value::Resilience;

/// Owner-0 vertices outside `x` with a disturbance edge into `x`.
pub fn d_boundary(arena: &ExplicitArena, x: &VertexSet) -> VertexSet {
    VertexSet::from_iter(
        arena.vertex_count(),
        arena.vertices().filter(|&v| {
            !x.contains(v)
                && arena.owner(v) == Player::Zero
                && arena.disturbance_successors(v).iter().any(|&w| x.contains(w))
        }),
    )
}

/// Resilience of every vertex of a finite safety game, with the layers
/// `S_0 ⊆ S_1 ⊆ …` of the fixpoint.
#[derive(Clone, Debug)]
pub struct ResilienceTable {
    rank: Vec<Option<u32>>,
    layer_count: usize,
}

impl ResilienceTable {
    pub fn value(&self, v: VertexId) -> Resilience {
        match self.rank[v.index()] {
            Some(j) => Resilience::Finite(j as u64),
            None => Resilience::OmegaPlusOne,
        }
    }

    pub fn values(&self) -> Vec<Resilience> {
        (0..self.rank.len()).map(|i| self.value(VertexId::new(i))).collect()
    }

    /// `min { j | v ∈ S_j }`, if `v` is in some layer.
    pub fn rank(&self, v: VertexId) -> Option<u32> {
        self.rank[v.index()]
    }

    /// Number of distinct layers until stabilization.
    pub fn layer_count(&self) -> usize {
        self.layer_count
    }

    pub fn layer(&self, j: usize) -> VertexSet {
        VertexSet::from_iter(
            self.rank.len(),
            self.rank
                .iter()
                .enumerate()
                .filter(|(_, r)| r.is_some_and(|r| r as usize <= j))
                .map(|(i, _)| VertexId::new(i)),
        )
    }

    pub fn layers(&self) -> Vec<VertexSet> {
        (0..self.layer_count).map(|j| self.layer(j)).collect()
    }
}

/// `S_0 = Att_1(F)`, `S_{j+1} = Att_1(S_j ∪ Bndr(S_j))`. Runs in linear time:
/// the attractor counters are kept across layers, and the boundary of
/// `S_{j+1}` can only come from vertices that entered in layer `j+1`.
pub fn resilience_fixpoint(arena: &ExplicitArena) -> ResilienceTable {
    let n = arena.vertex_count();
    let mut rank: Vec<Option<u32>> = vec![None; n];
    let mut remaining: Vec<u32> = arena
        .vertices()
        .map(|v| arena.successors(v).len() as u32)
        .collect();

    let mut seeds: Vec<VertexId> = arena.unsafe_set().iter().collect();
    let mut j = 0u32;
    let mut layer_count = 0;
    while !seeds.is_empty() {
        let mut added = Vec::new();
        let mut stack = Vec::new();
        for v in seeds {
            if rank[v.index()].is_none() {
                rank[v.index()] = Some(j);
                added.push(v);
                stack.push(v);
            }
        }
        while let Some(w) = stack.pop() {
            for &u in arena.predecessors(w) {
                if rank[u.index()].is_some() {
                    continue;
                }
                let ready = match arena.owner(u) {
                    Player::One => true,
                    Player::Zero => {
                        remaining[u.index()] -= 1;
                        remaining[u.index()] == 0
                    }
                };
                if ready {
                    rank[u.index()] = Some(j);
                    added.push(u);
                    stack.push(u);
                }
            }
        }
        layer_count = j as usize + 1;
        let mut next: Vec<VertexId> = added
            .iter()
            .flat_map(|&w| arena.disturbance_predecessors(w).iter().copied())
            .filter(|&u| rank[u.index()].is_none())
            .collect();
        next.sort();
        next.dedup();
        seeds = next;
        j += 1;
    }
    ResilienceTable { rank, layer_count }
}

/// The optimal positional strategy: at a vertex of resilience `j > 0` move
/// outside `S_{j-1}` (a trap strategy for that layer), at `ω+1` stay outside
/// every layer, at `0` take the lowest successor. Ties go to the lowest index.
pub fn extract_optimal_strategy(arena: &ExplicitArena, table: &ResilienceTable) -> PositionalStrategy {
    let mut s = PositionalStrategy::new(Player::Zero, arena.vertex_count());
    for v in arena.owned_by(Player::Zero) {
        let succ = arena.successors(v);
        let pick = match table.rank(v) {
            Some(0) => succ[0],
            Some(j) => *succ
                .iter()
                .find(|&&u| table.rank(u).is_none_or(|r| r >= j))
                .expect("a vertex outside S_{j-1} can stay outside it"),
            None => *succ
                .iter()
                .find(|&&u| table.rank(u).is_none())
                .expect("a vertex outside every layer can stay outside"),
        };
        s.set(v, pick);
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arena::{expand_truncated, FrontierMode};
    use crate::generators::gen_fig1;
    use crate::model::Configuration;

    #[test]
    fn boundary_of_empty_set() {
        let spec = gen_fig1();
        let a = expand_truncated(&spec, 3, FrontierMode::Optimistic);
        assert!(d_boundary(&a, &VertexSet::new(a.vertex_count())).is_empty());
    }

    #[test]
    fn fig1_boundary() {
        let spec = gen_fig1();
        let q1 = spec.state_index("q_1").unwrap();
        let a = expand_truncated(&spec, 3, FrontierMode::Optimistic);
        let at = |n: usize| a.vertex_of(&Configuration::new(q1, vec![0; n])).unwrap();
        let x = VertexSet::from_iter(a.vertex_count(), [at(0)]);
        assert_eq!(d_boundary(&a, &x).iter().collect::<Vec<_>>(), vec![at(1)]);
    }

    #[test]
    fn fig1_values_at_height_8() {
        let spec = gen_fig1();
        let a = expand_truncated(&spec, 8, FrontierMode::Optimistic);
        let t = resilience_fixpoint(&a);
        let q = |name: &str| spec.state_index(name).unwrap();
        for n in 0..=8 {
            let v = a.vertex_of(&Configuration::new(q("q_1"), vec![0; n])).unwrap();
            assert_eq!(t.value(v), Resilience::Finite(n as u64));
            let w = a.vertex_of(&Configuration::new(q("q_I"), vec![0; n])).unwrap();
            assert_eq!(t.value(w), Resilience::OmegaPlusOne);
        }
        let s = a.vertex_of(&Configuration::new(q("q_2"), vec![])).unwrap();
        assert_eq!(t.value(s), Resilience::Finite(0));
        assert_eq!(t.layer_count(), 9);
        let layers = t.layers();
        for w in layers.windows(2) {
            assert!(w[0].is_subset(&w[1]));
        }
    }

    #[test]
    fn no_unsafe_means_omega_plus_one_everywhere() {
        let spec = gen_fig1();
        let a = expand_truncated(&spec, 4, FrontierMode::Optimistic);
        let a = a.with_unsafe(VertexSet::new(a.vertex_count()));
        let t = resilience_fixpoint(&a);
        assert!(t.values().iter().all(|&r| r == Resilience::OmegaPlusOne));
        assert_eq!(t.layer_count(), 0);
    }

    #[test]
    fn fig1_strategy_stays_in_qi() {
        let spec = gen_fig1();
        let qi = spec.state_index("q_I").unwrap();
        let a = expand_truncated(&spec, 6, FrontierMode::Optimistic);
        let t = resilience_fixpoint(&a);
        let s = extract_optimal_strategy(&a, &t);
        for n in 0..6 {
            let v = a.vertex_of(&Configuration::new(qi, vec![0; n])).unwrap();
            let w = s.get(v).unwrap();
            assert_eq!(a.config(w).unwrap().state, qi);
        }
    }
}

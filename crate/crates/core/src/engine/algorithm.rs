//! Resilience of the initial vertex of a pushdown safety game.
//!
//! First decide `ω+1` on the rigged game, then search for the least `k` such
//! that Player 1 wins the rigged game with a counter of `k` simulated
//! disturbances; the answer is `k - 1`. Every game is solved on a truncation.
//! With a safe frontier a Player-1 win is sound, with an unsafe frontier a
//! Player-0 win is sound, and beyond the height bound `h` both are.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use super::bounds::{bounds_for, height_bound_at_most, Bounds};
use crate::arena::{expand_truncated_bounded, ExpandError, ExplicitArena, FrontierMode, VertexSet};
use crate::model::{Configuration, PushdownGameSpec};
use crate::rigging::{counter_product, lift_pds_strategy, rig_pds, RigError, RiggedPds, TruncatedStrategy};
use crate::solver::{solve_safety, solve_union_safety_or_buchi};
use crate::value::{Certificate, Resilience, ResilienceValue};

/// Order in which candidate counters `k` are tried. Both rely on Player 1
/// winning with `k` disturbances implying he wins with `k + 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KSearch {
    Ascending,
    /// Doubling until the first win, then bisection.
    Galloping,
}

#[derive(Clone, Debug)]
pub struct AnalysisOptions {
    /// Truncation height; `None` picks the largest height whose rigged
    /// configuration count stays within `auto_budget`. Never exceeds `h`.
    pub height_cap: Option<usize>,
    pub k_cap: u64,
    pub search: KSearch,
    /// Abort any single expansion with more vertices than this.
    pub vertex_budget: Option<usize>,
    pub auto_budget: usize,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions {
            height_cap: None,
            k_cap: 1 << 16,
            search: KSearch::Galloping,
            vertex_budget: Some(20_000_000),
            auto_budget: 1 << 14,
        }
    }
}

impl AnalysisOptions {
    pub fn with_height(height: usize) -> Self {
        AnalysisOptions {
            height_cap: Some(height),
            ..Self::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error(transparent)]
    Expand(#[from] ExpandError),
    #[error(transparent)]
    Rig(#[from] RigError),
}

/// Largest `t` with `q · (1 + γ + … + γ^t) <= budget`.
pub fn auto_height(q: usize, gamma: usize, budget: usize) -> usize {
    let mut total = q.max(1);
    let mut level = 1usize;
    let mut t = 0;
    loop {
        level = level.saturating_mul(gamma);
        total = total.saturating_add(q.max(1).saturating_mul(level));
        if total > budget {
            return t;
        }
        t += 1;
    }
}

fn analysis_height(bounds: &Bounds, options: &AnalysisOptions) -> usize {
    let h = bounds.h_usize().unwrap_or(usize::MAX);
    let cap = options
        .height_cap
        .unwrap_or_else(|| auto_height(bounds.q_rig, bounds.gamma, options.auto_budget));
    h.min(cap)
}

fn is_exact_height(bounds: &Bounds, height: usize) -> bool {
    bounds.h_usize().is_some_and(|h| height >= h)
}

/// Outcome of the `ω+1` check.
#[derive(Clone, Debug)]
pub struct OmegaCheck {
    pub holds: bool,
    pub certificate: Certificate,
    /// An `(ω+1)`-resilient strategy on the truncation, when `holds`.
    pub strategy: Option<TruncatedStrategy>,
    pub height: usize,
    /// For heuristic answers: whether Player 0's winning region stopped
    /// changing over the last three truncation steps.
    pub stabilized: Option<bool>,
}

/// Does Player 0 win the rigged safety game from the initial vertex?
pub fn check_omega_plus_one(
    spec: &PushdownGameSpec,
    options: &AnalysisOptions,
) -> Result<OmegaCheck, EngineError> {
    let rig = rig_pds(spec);
    let bounds = bounds_for(rig.spec.state_count(), spec.alphabet().len());
    let height = analysis_height(&bounds, options);
    check_omega_with(spec, &rig, &bounds, height, options)
}

fn check_omega_with(
    spec: &PushdownGameSpec,
    rig: &RiggedPds,
    bounds: &Bounds,
    height: usize,
    options: &AnalysisOptions,
) -> Result<OmegaCheck, EngineError> {
    let opt = expand_truncated_bounded(&rig.spec, height, FrontierMode::Optimistic, options.vertex_budget)?;
    let init = opt.initial().expect("expansions have an initial vertex");
    let sol = solve_safety(&opt);
    if sol.win1.contains(init) {
        return Ok(OmegaCheck {
            holds: false,
            certificate: Certificate::Exact,
            strategy: None,
            height,
            stabilized: None,
        });
    }
    let pess = solve_safety(&opt.with_frontier_mode(FrontierMode::Pessimistic));
    let pess_win = pess.win0.contains(init);
    let certificate = if pess_win || is_exact_height(bounds, height) {
        Certificate::Exact
    } else {
        Certificate::Heuristic
    };
    let stabilized = if certificate == Certificate::Heuristic {
        stabilization(rig, height, options)?
    } else {
        None
    };
    let sigma = if pess_win { &pess.strategy0 } else { &sol.strategy0 };
    let original = expand_truncated_bounded(spec, height, FrontierMode::Optimistic, options.vertex_budget)?;
    let strategy = lift_pds_strategy(rig, &opt, sigma, original, height);
    Ok(OmegaCheck {
        holds: true,
        certificate,
        strategy: Some(strategy),
        height,
        stabilized,
    })
}

/// Compares Player 0's winning region on original configurations of height
/// at most `T - 3Δ` across the truncations `T, T-Δ, T-2Δ, T-3Δ`, `Δ = |Q'|`.
fn stabilization(
    rig: &RiggedPds,
    height: usize,
    options: &AnalysisOptions,
) -> Result<Option<bool>, EngineError> {
    let delta = rig.spec.state_count();
    let Some(base) = height.checked_sub(3 * delta) else {
        return Ok(None);
    };
    let mut regions: Vec<BTreeSet<Configuration>> = Vec::new();
    for i in 0..4 {
        let t = height - i * delta;
        let a = expand_truncated_bounded(&rig.spec, t, FrontierMode::Optimistic, options.vertex_budget)?;
        let sol = solve_safety(&a);
        regions.push(
            sol.win0
                .iter()
                .filter_map(|v| a.config(v))
                .filter(|c| c.height() <= base && c.state < rig.original_states)
                .collect(),
        );
    }
    Ok(Some(regions.windows(2).all(|w| w[0] == w[1])))
}

/// Either a value or an admission that the caps were hit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    Value(ResilienceValue),
    /// Player 1 did not win any counter game up to `k_cap`.
    Unknown { k_cap: u64 },
}

#[derive(Clone, Debug)]
pub struct ResilienceReport {
    pub outcome: Outcome,
    pub bounds: Bounds,
    pub height: usize,
    /// Every counter `k` tried, with whether Player 1 won its truncation.
    pub probes: Vec<(u64, bool)>,
    pub stabilized: Option<bool>,
}

impl ResilienceReport {
    pub fn value(&self) -> Option<ResilienceValue> {
        match self.outcome {
            Outcome::Value(v) => Some(v),
            Outcome::Unknown { .. } => None,
        }
    }
}

fn product_arena(
    rig: &RiggedPds,
    k: u64,
    height: usize,
    mode: FrontierMode,
    options: &AnalysisOptions,
) -> Result<ExplicitArena, EngineError> {
    let prod = counter_product(rig, k)?;
    Ok(expand_truncated_bounded(&prod.spec, height, mode, options.vertex_budget)?)
}

/// Whether Player 1 wins the `k`-counter game from the initial vertex on the
/// truncation at `height` with the given frontier scoring.
pub fn player1_wins_counter_game(
    rig: &RiggedPds,
    k: u64,
    height: usize,
    mode: FrontierMode,
    options: &AnalysisOptions,
) -> Result<bool, EngineError> {
    let a = product_arena(rig, k, height, mode, options)?;
    let init = a.initial().expect("expansions have an initial vertex");
    Ok(solve_safety(&a).win1.contains(init))
}

/// Resilience of the initial vertex.
pub fn resilience_initial(
    spec: &PushdownGameSpec,
    options: &AnalysisOptions,
) -> Result<ResilienceReport, EngineError> {
    let rig = rig_pds(spec);
    let bounds = bounds_for(rig.spec.state_count(), spec.alphabet().len());
    let height = analysis_height(&bounds, options);
    let omega = check_omega_with(spec, &rig, &bounds, height, options)?;
    if omega.holds {
        return Ok(ResilienceReport {
            outcome: Outcome::Value(ResilienceValue::new(Resilience::OmegaPlusOne, omega.certificate)),
            bounds,
            height,
            probes: Vec::new(),
            stabilized: omega.stabilized,
        });
    }

    let mut probes: BTreeMap<u64, bool> = BTreeMap::new();
    let mut wins = |k: u64| -> Result<bool, EngineError> {
        if let Some(&w) = probes.get(&k) {
            return Ok(w);
        }
        let w = player1_wins_counter_game(&rig, k, height, FrontierMode::Optimistic, options)?;
        probes.insert(k, w);
        Ok(w)
    };
    let k_cap = options.k_cap.max(1);
    let least = match options.search {
        KSearch::Ascending => {
            let mut found = None;
            for k in 1..=k_cap {
                if wins(k)? {
                    found = Some(k);
                    break;
                }
            }
            found
        }
        KSearch::Galloping => galloping(k_cap, &mut wins)?,
    };
    let probes: Vec<(u64, bool)> = probes.into_iter().collect();
    let Some(k) = least else {
        return Ok(ResilienceReport {
            outcome: Outcome::Unknown { k_cap },
            bounds,
            height,
            probes,
            stabilized: None,
        });
    };
    let j = k - 1;
    let certificate = if j == 0
        || !player1_wins_counter_game(&rig, j, height, FrontierMode::Pessimistic, options)?
        || height_bound_at_most(rig.spec.state_count() * (j as usize + 1), bounds.gamma, height)
    {
        Certificate::Exact
    } else {
        Certificate::SoundLowerBound
    };
    Ok(ResilienceReport {
        outcome: Outcome::Value(ResilienceValue::new(Resilience::Finite(j), certificate)),
        bounds,
        height,
        probes,
        stabilized: None,
    })
}

/// Least `k <= k_cap` with `wins(k)`, assuming `wins` is monotone.
fn galloping(
    k_cap: u64,
    wins: &mut impl FnMut(u64) -> Result<bool, EngineError>,
) -> Result<Option<u64>, EngineError> {
    if wins(1)? {
        return Ok(Some(1));
    }
    let mut lo = 1;
    let mut k = 2u64;
    let hi = loop {
        if k >= k_cap {
            if lo < k_cap && wins(k_cap)? {
                break k_cap;
            }
            return Ok(None);
        }
        if wins(k)? {
            break k;
        }
        lo = k;
        k = k.saturating_mul(2);
    };
    let (mut lo, mut hi) = (lo, hi);
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if wins(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Some(hi))
}

/// Answer to "does Player 0 have an `alpha`-resilient strategy from the
/// initial vertex?".
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlphaCheck {
    pub holds: bool,
    pub certificate: Certificate,
    pub height: usize,
}

pub fn check_alpha(
    spec: &PushdownGameSpec,
    alpha: Resilience,
    options: &AnalysisOptions,
) -> Result<AlphaCheck, EngineError> {
    let rig = rig_pds(spec);
    let bounds = bounds_for(rig.spec.state_count(), spec.alphabet().len());
    let height = analysis_height(&bounds, options);
    let answer = |holds, certificate| AlphaCheck {
        holds,
        certificate,
        height,
    };
    match alpha {
        Resilience::OmegaPlusOne => {
            let c = check_omega_with(spec, &rig, &bounds, height, options)?;
            Ok(answer(c.holds, c.certificate))
        }
        Resilience::Omega { .. } => {
            // Safety(F)_rig ∪ Büchi(D) on the rigged truncation.
            let opt = expand_truncated_bounded(&rig.spec, height, FrontierMode::Optimistic, options.vertex_budget)?;
            let init = opt.initial().expect("expansions have an initial vertex");
            let d = VertexSet::from_iter(
                opt.vertex_count(),
                opt.vertices()
                    .filter(|&v| opt.config(v).is_some_and(|c| rig.is_d_state(c.state))),
            );
            let (w0, _) = solve_union_safety_or_buchi(&opt, opt.unsafe_set(), &d);
            if !w0.contains(init) {
                return Ok(answer(false, Certificate::Exact));
            }
            let pess = opt.with_frontier_mode(FrontierMode::Pessimistic);
            let (w0, _) = solve_union_safety_or_buchi(&pess, pess.unsafe_set(), &d);
            let cert = if w0.contains(init) {
                Certificate::Exact
            } else {
                Certificate::Heuristic
            };
            Ok(answer(true, cert))
        }
        Resilience::Finite(0) => Ok(answer(true, Certificate::Exact)),
        Resilience::Finite(k) => {
            if player1_wins_counter_game(&rig, k, height, FrontierMode::Optimistic, options)? {
                return Ok(answer(false, Certificate::Exact));
            }
            let exact = !player1_wins_counter_game(&rig, k, height, FrontierMode::Pessimistic, options)?
                || height_bound_at_most(rig.spec.state_count() * (k as usize + 1), bounds.gamma, height);
            let cert = if exact {
                Certificate::Exact
            } else {
                Certificate::Heuristic
            };
            Ok(answer(true, cert))
        }
    }
}

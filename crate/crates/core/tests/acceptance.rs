//! Acceptance suite. Each criterion prints one PASS/FAIL line; the test fails
//! if any criterion does.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pdres::arena::{expand_truncated, FrontierMode};
use pdres::engine::{
    brute_force_resilience, compute_bounds, extract_optimal_strategy, player1_wins_counter_game,
    resilience_fixpoint, resilience_initial, AnalysisOptions, OracleValue,
};
use pdres::generators::{
    gen_binary_pds, gen_fig1, gen_fig1_from_q1, gen_primorial_ocs, gen_random, primorial,
    RandomParams,
};
use pdres::model::{Configuration, Player, PushdownGameSpec};
use pdres::normalize::f_sink_normalize;
use pdres::play::strategy_resilience;
use pdres::reach::{optimal_reach_value, reach_oracle_initial};
use pdres::rigging::{counter_product, rig_pds};
use pdres::solver::{attractor, solve_safety};
use pdres::strategy_graph::{
    extract_strategy_graph, induced_strategy, strategy_graph_exists, verify_strategy_graph,
};
use pdres::value::Resilience;

use common::{attack_exists, small_height, small_spec, survives_bounded};

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn value_of(spec: &PushdownGameSpec, options: &AnalysisOptions) -> Result<(Resilience, String), String> {
    let r = resilience_initial(spec, options).map_err(|e| e.to_string())?;
    let v = r.value().ok_or("caps exhausted")?;
    Ok((v.value, v.to_string()))
}

fn criterion_1() -> Check {
    let start = Instant::now();
    let spec = gen_fig1();
    let (v, shown) = value_of(&spec, &AnalysisOptions::default())?;
    ensure(v == Resilience::OmegaPlusOne, || format!("initial value {shown}"))?;
    let arena = expand_truncated(&spec, 8, FrontierMode::Optimistic);
    let table = resilience_fixpoint(&arena);
    let q1 = spec.state_index("q_1").unwrap();
    let q2 = spec.state_index("q_2").unwrap();
    for n in 0..=8 {
        let c = Configuration::new(q1, vec![0; n]);
        let got = table.value(arena.vertex_of(&c).unwrap());
        ensure(got == Resilience::Finite(n as u64), || format!("r(q_1, A^{n}) = {got}"))?;
    }
    let got = table.value(arena.vertex_of(&Configuration::new(q2, vec![])).unwrap());
    ensure(got == Resilience::Finite(0), || format!("r(q_2, bottom) = {got}"))?;
    let t = start.elapsed();
    ensure(t < Duration::from_secs(1), || format!("took {t:?}"))?;
    Ok(format!("{shown}; q_1 row 0..8 and q_2 match ({t:.2?})"))
}

fn criterion_2() -> Check {
    let mut parts = Vec::new();
    for (k, cap) in [(1, 16), (2, 16), (3, 64)] {
        let start = Instant::now();
        let (v, shown) = value_of(&gen_primorial_ocs(k), &AnalysisOptions::with_height(cap))?;
        let want = primorial(k);
        ensure(v == Resilience::Finite(want.to_string().parse().unwrap()), || {
            format!("k = {k}: got {shown}, want {want}")
        })?;
        let t = start.elapsed();
        if k == 3 {
            ensure(t < Duration::from_secs(300), || format!("k = 3 took {t:?}"))?;
        }
        parts.push(format!("k={k}: {shown} ({t:.1?})"));
    }
    Ok(parts.join(", "))
}

fn criterion_3() -> Check {
    let mut parts = Vec::new();
    for (k, want) in [(1usize, 3u64), (2, 63)] {
        let start = Instant::now();
        let (v, shown) = value_of(&gen_binary_pds(k), &AnalysisOptions::with_height(8))?;
        ensure(v == Resilience::Finite(want), || format!("k = {k}: got {shown}, want {want}"))?;
        let t = start.elapsed();
        ensure(t < Duration::from_secs(600), || format!("k = {k} took {t:?}"))?;
        parts.push(format!("k={k}: {shown} ({t:.1?})"));
    }
    Ok(parts.join(", "))
}

const ORACLE_SEEDS: u64 = 240;
const BUDGET: u64 = 6;

fn criterion_4() -> Check {
    let mut vertices = 0;
    for seed in 0..ORACLE_SEEDS {
        let spec = small_spec(seed);
        let arena = expand_truncated(&spec, small_height(&spec), FrontierMode::Optimistic);
        let table = resilience_fixpoint(&arena);
        let oracle = brute_force_resilience(&arena, BUDGET);
        for v in arena.vertices() {
            vertices += 1;
            ensure(oracle[v.index()].agrees_with(table.value(v), BUDGET), || {
                format!("seed {seed}, {}: fixpoint {} vs oracle {:?}", arena.describe(v), table.value(v), oracle[v.index()])
            })?;
        }
    }
    Ok(format!("{ORACLE_SEEDS} specs, {vertices} vertices, 0 mismatches"))
}

fn criterion_5() -> Check {
    let mut checked = 0;
    for seed in 0..ORACLE_SEEDS {
        let spec = small_spec(seed);
        let arena = expand_truncated(&spec, small_height(&spec), FrontierMode::Optimistic);
        let table = resilience_fixpoint(&arena);
        let v = arena.initial().unwrap();
        let Resilience::Finite(j) = table.value(v) else { continue };
        if j > BUDGET {
            continue;
        }
        checked += 1;
        let sigma = extract_optimal_strategy(&arena, &table);
        let ctx = || format!("seed {seed}, r = {j}");
        if j > 0 {
            ensure(survives_bounded(&arena, &sigma, v, j - 1, 10), || format!("{}: defeated by {} disturbances", ctx(), j - 1))?;
            ensure(!attack_exists(&arena, &sigma, v, j - 1), || format!("{}: defeated by {} disturbances", ctx(), j - 1))?;
        }
        ensure(attack_exists(&arena, &sigma, v, j), || format!("{}: survives {j} disturbances", ctx()))?;
        ensure(strategy_resilience(&arena, &sigma)[v.index()] == Some(j), || format!("{}: strategy value differs", ctx()))?;
        let oracle = brute_force_resilience(&arena, j);
        ensure(oracle[v.index()] == OracleValue::Finite(j), || format!("{}: some strategy survives {j}", ctx()))?;
    }
    Ok(format!("{checked} instances with finite initial value, 0 violations"))
}

fn graph_round_trip(spec: &PushdownGameSpec, k: u64, height: usize, sims: usize, seed: u64) -> Result<(), String> {
    let norm = f_sink_normalize(spec);
    let rig = rig_pds(&norm);
    let prod = counter_product(&rig, k).map_err(|e| e.to_string())?;
    let arena = expand_truncated(&prod.spec, height, FrontierMode::Optimistic);
    let sol = solve_safety(&arena);
    if !sol.win1.contains(arena.initial().unwrap()) {
        return Ok(());
    }
    let graph = extract_strategy_graph(&norm, k, &arena, &sol.strategy1).map_err(|e| e.to_string())?;
    let violations = verify_strategy_graph(&graph, &norm, k);
    ensure(violations.is_empty(), || format!("violations: {violations:?}"))?;
    let rigged_arena = expand_truncated(&rig.spec, height + 1, FrontierMode::Optimistic);
    let tau = induced_strategy(&graph, &rig, &rigged_arena);
    let v0 = rigged_arena.initial().unwrap();
    let limit = graph.mu_d[graph.index_of(&rig.spec.initial_configuration()).unwrap()];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..sims {
        let (mut v, mut steps, mut simulated) = (v0, 0u64, 0u64);
        while !rigged_arena.is_unsafe(v) {
            ensure(steps < limit, || format!("no visit to F within {limit} steps"))?;
            if let Some(c) = rigged_arena.config(v) {
                simulated += u64::from(rig.is_d_state(c.state));
            }
            v = match rigged_arena.owner(v) {
                Player::One => tau.get(v).ok_or("induced strategy undefined on a consistent play")?,
                Player::Zero => {
                    let s = rigged_arena.successors(v);
                    s[rng.gen_range(0..s.len())]
                }
            };
            steps += 1;
        }
        ensure(simulated < k, || format!("{simulated} simulated disturbances with k = {k}"))?;
    }
    Ok(())
}

fn criterion_6() -> Check {
    let mut wins = 0;
    // Round trip on random one-counter games.
    for seed in 0..60u64 {
        let spec = gen_random(seed, &RandomParams::one_counter(1 + (seed % 3) as usize));
        for k in 1..=4 {
            graph_round_trip(&spec, k, 6, 1000, seed).map_err(|e| format!("seed {seed}, k = {k}: {e}"))?;
            let arena = expand_truncated(&spec, 6, FrontierMode::Optimistic);
            let r = resilience_fixpoint(&arena).value(arena.initial().unwrap());
            let exists = strategy_graph_exists(&spec, k, 6, None).map_err(|e| e.to_string())?;
            ensure(exists.exists == (r < Resilience::Finite(k)), || {
                format!("seed {seed}, k = {k}: exists = {}, r = {r}", exists.exists)
            })?;
            wins += usize::from(exists.exists);
        }
    }
    // Fixtures: exists(k) iff r < k.
    let fixtures: Vec<(&str, PushdownGameSpec, u64, Vec<u64>, usize)> = vec![
        ("fig1", gen_fig1(), u64::MAX, (1..=4).collect(), 8),
        ("fig1 from q_1 A^2", gen_fig1_from_q1(2), 2, (1..=4).collect(), 8),
        ("primorial 1", gen_primorial_ocs(1), 2, (1..=4).collect(), 8),
        ("primorial 2", gen_primorial_ocs(2), 6, vec![1, 6, 7], 8),
    ];
    for (name, spec, r, ks, height) in fixtures {
        for k in ks {
            let ans = strategy_graph_exists(&spec, k, height, None).map_err(|e| format!("{name}: {e}"))?;
            ensure(ans.exists == (r < k), || format!("{name}, k = {k}: exists = {}", ans.exists))?;
            if k <= 4 {
                graph_round_trip(&spec, k, height, 1000, k).map_err(|e| format!("{name}, k = {k}: {e}"))?;
            }
        }
    }
    Ok(format!("{wins} Player-1 wins on random games round-tripped; fixtures agree"))
}

fn criterion_7() -> Check {
    let start = Instant::now();
    let mut finite = 0;
    for seed in 0..120u64 {
        let p = RandomParams {
            states: 1 + (seed % 4) as usize,
            disturbance_prob: 0.0,
            unsafe_prob: 0.3,
            ..RandomParams::default()
        };
        let spec = gen_random(seed, &p);
        let report = optimal_reach_value(&spec, &AnalysisOptions::with_height(8)).map_err(|e| e.to_string())?;
        let got = report.value().ok_or("caps exhausted")?.value;
        let want = reach_oracle_initial(&spec, 8);
        let agree = match (got, want) {
            (Resilience::Finite(a), Some(b)) => a == b,
            (Resilience::OmegaPlusOne, None) => true,
            _ => false,
        };
        ensure(agree, || format!("seed {seed}: reduction {got}, oracle {want:?}"))?;
        finite += usize::from(want.is_some());
    }
    let t = start.elapsed();
    ensure(t < Duration::from_secs(30), || format!("took {t:?}"))?;
    Ok(format!("120 games ({finite} with finite value), 0 mismatches ({t:.1?})"))
}

fn criterion_8() -> Check {
    for seed in 0..100u64 {
        let spec = small_spec(seed);
        let arena = expand_truncated(&spec, small_height(&spec), FrontierMode::Optimistic);
        let ctx = |what: &str| format!("seed {seed}: {what}");
        let a = attractor(&arena, arena.unsafe_set(), Player::One);
        let again = attractor(&arena, &a.set, Player::One);
        ensure(again.set == a.set, || ctx("attractor not idempotent"))?;
        let table = resilience_fixpoint(&arena);
        let layers = table.layers();
        ensure(layers.windows(2).all(|w| w[0].is_subset(&w[1])), || ctx("layers not monotone"))?;
        ensure(
            table.values().iter().all(|r| !matches!(r, Resilience::Omega { .. })),
            || ctx("omega on a safety game"),
        )?;
        let w0 = solve_safety(&arena).win0;
        for v in arena.vertices() {
            ensure((table.value(v) > Resilience::Finite(0)) == w0.contains(v), || ctx("r > 0 differs from W_0"))?;
        }
        let rig = rig_pds(&spec);
        let opts = AnalysisOptions::default();
        let mut prev = false;
        for k in 1..=5 {
            let wins = player1_wins_counter_game(&rig, k, 4, FrontierMode::Optimistic, &opts).map_err(|e| e.to_string())?;
            ensure(!prev || wins, || ctx("counter game not monotone in k"))?;
            prev = wins;
        }
    }
    for k in 1..=20 {
        ensure(primorial(k) >= BigUint::from(1u32) << k, || format!("primorial({k}) < 2^{k}"))?;
    }
    Ok("six invariants over 100 seeds".to_string())
}

fn recount_rigged_states(spec: &PushdownGameSpec) -> usize {
    let q = spec.state_count();
    let q0 = spec.states().iter().filter(|s| s.owner == Player::Zero).count();
    let moves1 = spec.rules().iter().filter(|r| spec.state(r.from).owner == Player::One).count();
    q + q0 + spec.disturbances().len() + moves1
}

fn criterion_9() -> Check {
    let check = |q: usize, gamma: usize, b: &pdres::engine::Bounds| -> Result<(), String> {
        let mut two_pow = BigUint::from(1u32);
        for _ in 0..q + 1 {
            two_pow *= 2u32;
        }
        let h = BigUint::from(q * gamma) * two_pow + 1u32;
        ensure(b.h == h, || format!("h: {} vs {h}", b.h))?;
        let hs: usize = h.to_string().parse().map_err(|_| "h too large")?;
        let mut g = BigUint::from(1u32);
        if gamma > 1 {
            for _ in 0..hs {
                g *= gamma as u32;
            }
        }
        let want = BigUint::from(q) * &h * g;
        ensure(b.b.as_ref() == Some(&want), || "b differs".to_string())
    };
    let hand = pdres::engine::bounds_for(2, 1);
    ensure(hand.h == BigUint::from(17u32) && hand.b == Some(BigUint::from(34u32)), || "hand case".into())?;
    check(2, 1, &hand)?;
    let mut n = 1;
    for seed in 0..19u64 {
        let p = RandomParams {
            states: if seed % 2 == 0 { 1 + (seed % 4) as usize } else { 1 },
            symbols: 1 + (seed % 2) as usize,
            max_rules: 1,
            ..RandomParams::default()
        };
        let spec = gen_random(seed, &p);
        let b = compute_bounds(&spec);
        let q = recount_rigged_states(&spec);
        ensure(b.q_rig == q, || format!("seed {seed}: |Q'| {} vs {q}", b.q_rig))?;
        check(q, spec.alphabet().len(), &b).map_err(|e| format!("seed {seed}: {e}"))?;
        n += 1;
    }
    Ok(format!("{n} specs including the hand case h = 17, b = 34"))
}

type Criterion = (&'static str, fn() -> Check);

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("example values", criterion_1),
        ("primorial family", criterion_2),
        ("binary counter family", criterion_3),
        ("oracle equivalence", criterion_4),
        ("strategy soundness and tightness", criterion_5),
        ("strategy graph round trip", criterion_6),
        ("reachability reduction", criterion_7),
        ("invariant suite", criterion_8),
        ("bounds arithmetic", criterion_9),
    ];
    let mut failed = Vec::new();
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("criterion {} ({name}): PASS - {detail}", i + 1),
            Err(e) => {
                println!("criterion {} ({name}): FAIL - {e}", i + 1);
                failed.push(i + 1);
            }
        }
    }
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("failed criteria: {failed:?}");
        ExitCode::FAILURE
    }
}

//! Strategy graphs: finite certificates that Player 1 wins the rigged game
//! with fewer than `k` simulated disturbances.
//!
//! A strategy graph `(V°, E°, μ_r, μ_d)` lives in the rigged configuration
//! graph. It must contain the initial vertex with bounded stack heights, keep
//! all edges of Player-0 vertices and exactly one edge of Player-1 vertices
//! outside `F`, and carry two ranks: `μ_r` bounds the disturbances still to
//! be simulated and `μ_d` the distance to `F`.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use thiserror::Error;

use crate::arena::{expand_truncated_bounded, ExpandError, ExplicitArena, FrontierMode, VertexId};
use crate::format::{format_config, parse_config_label};
use crate::model::{Configuration, Player, PushdownGameSpec};
use crate::normalize::{f_sink_normalize, is_f_sink_normal};
use crate::play::PositionalStrategy;
use crate::rigging::{counter_product, rig_pds, RigError, RiggedPds};
use crate::solver::solve_safety;
use crate::value::Certificate;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StrategyGraph {
    pub k: u64,
    /// Configurations of the rigged system.
    pub vertices: Vec<Configuration>,
    pub edges: Vec<(usize, usize)>,
    pub mu_r: Vec<u64>,
    pub mu_d: Vec<u64>,
}

impl StrategyGraph {
    pub fn index_of(&self, c: &Configuration) -> Option<usize> {
        self.vertices.iter().position(|v| v == c)
    }

    pub fn out_edges(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.edges.iter().filter(move |e| e.0 == i).map(|e| e.1)
    }

    pub fn max_height(&self) -> usize {
        self.vertices.iter().map(Configuration::height).max().unwrap_or(0)
    }
}

/// The stack-height bound `(2k)^(n²)` for `n` states.
pub fn level_bound(k: u64, n: usize) -> BigUint {
    BigUint::from(2 * k).pow((n * n) as u32)
}

/// Which defining property a violation breaks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Property {
    /// The graph does not describe a subgraph of the rigged graph.
    Structure,
    Initial,
    Player0Edges,
    Player1Edge,
    DisturbanceRank,
    DistanceRank,
}

impl Property {
    pub fn number(self) -> u8 {
        match self {
            Property::Structure => 0,
            Property::Initial => 1,
            Property::Player0Edges => 2,
            Property::Player1Edge => 3,
            Property::DisturbanceRank => 4,
            Property::DistanceRank => 5,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub property: Property,
    pub vertex: Option<String>,
    pub edge: Option<(String, String)>,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "property {}: {}", self.property.number(), self.message)?;
        if let Some(v) = &self.vertex {
            write!(f, " at {v}")?;
        }
        if let Some((a, b)) = &self.edge {
            write!(f, " on edge {a} -> {b}")?;
        }
        Ok(())
    }
}

/// Checks the five properties against the rigged configuration graph of
/// `spec`. The height bound uses the state count of `spec` itself.
pub fn verify_strategy_graph(graph: &StrategyGraph, spec: &PushdownGameSpec, k: u64) -> Vec<Violation> {
    let rig = rig_pds(spec);
    let rs = &rig.spec;
    let mut out = Vec::new();
    let name = |c: &Configuration| -> String {
        if c.state < rs.state_count() && c.stack.iter().all(|&a| (a as usize) < rs.alphabet().len()) {
            format_config(rs, c)
        } else {
            format!("{c:?}")
        }
    };
    let mut violation = |property, vertex: Option<String>, edge, message: String| {
        out.push(Violation {
            property,
            vertex,
            edge,
            message,
        })
    };

    let n = graph.vertices.len();
    if graph.mu_r.len() != n || graph.mu_d.len() != n {
        violation(Property::Structure, None, None, "rank maps do not cover every vertex".into());
        return out;
    }
    if graph.k != k {
        violation(Property::Structure, None, None, format!("graph is for k = {}, asked for {k}", graph.k));
    }
    let mut index = HashMap::new();
    let mut valid = vec![true; n];
    for (i, c) in graph.vertices.iter().enumerate() {
        if c.state >= rs.state_count() || c.stack.iter().any(|&a| a as usize >= rs.alphabet().len()) {
            violation(Property::Structure, Some(name(c)), None, "not a configuration of the rigged system".into());
            valid[i] = false;
        } else if index.insert(c.clone(), i).is_some() {
            violation(Property::Structure, Some(name(c)), None, "duplicate vertex".into());
        }
    }
    let mut succ: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &(a, b) in &graph.edges {
        if a >= n || b >= n {
            violation(Property::Structure, None, None, format!("edge ({a}, {b}) out of range"));
            continue;
        }
        if valid[a] && valid[b] && !rs.successors(&graph.vertices[a]).contains(&graph.vertices[b]) {
            violation(
                Property::Structure,
                None,
                Some((name(&graph.vertices[a]), name(&graph.vertices[b]))),
                "not an edge of the rigged graph".into(),
            );
        }
        succ[a].push(b);
    }

    // 1
    if !index.contains_key(&rs.initial_configuration()) {
        violation(Property::Initial, None, None, "the initial vertex is missing".into());
    }
    let bound = level_bound(k, spec.state_count());
    for c in &graph.vertices {
        if BigUint::from(c.height()) > bound {
            violation(Property::Initial, Some(name(c)), None, format!("stack height exceeds {bound}"));
        }
    }

    for (i, c) in graph.vertices.iter().enumerate() {
        if !valid[i] || rs.state(c.state).is_unsafe {
            continue;
        }
        match rs.state(c.state).owner {
            // 2
            Player::Zero => {
                let have: HashSet<&Configuration> = succ[i].iter().map(|&j| &graph.vertices[j]).collect();
                for s in rs.successors(c) {
                    if !have.contains(&s) {
                        violation(
                            Property::Player0Edges,
                            Some(name(c)),
                            Some((name(c), name(&s))),
                            "Player-0 edge missing".into(),
                        );
                    }
                }
            }
            // 3
            Player::One => {
                let distinct: HashSet<usize> = succ[i].iter().copied().collect();
                if distinct.len() != 1 {
                    violation(
                        Property::Player1Edge,
                        Some(name(c)),
                        None,
                        format!("Player-1 vertex keeps {} edges", distinct.len()),
                    );
                }
            }
        }
    }

    // 4 and 5
    for (i, c) in graph.vertices.iter().enumerate() {
        if graph.mu_r[i] >= k {
            violation(Property::DisturbanceRank, Some(name(c)), None, format!("mu_r = {} is not below k", graph.mu_r[i]));
        }
        if graph.mu_d[i] > n as u64 {
            violation(Property::DistanceRank, Some(name(c)), None, format!("mu_d = {} exceeds |V| = {n}", graph.mu_d[i]));
        }
    }
    for &(a, b) in &graph.edges {
        if a >= n || b >= n {
            continue;
        }
        let (ca, cb) = (&graph.vertices[a], &graph.vertices[b]);
        let is_d = valid[a] && rig.is_d_state(ca.state);
        let edge = Some((name(ca), name(cb)));
        if graph.mu_r[b] > graph.mu_r[a] || (is_d && graph.mu_r[b] == graph.mu_r[a]) {
            let msg = if is_d {
                "mu_r does not decrease after a disturbance"
            } else {
                "mu_r increases"
            };
            violation(Property::DisturbanceRank, None, edge.clone(), msg.into());
        }
        if graph.mu_d[b] >= graph.mu_d[a] {
            violation(Property::DistanceRank, None, edge, "mu_d does not decrease".into());
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ExtractionError {
    #[error("Player 1's strategy is undefined at {0}")]
    Undefined(String),
    #[error("a consistent play reaches the truncation frontier: {}", .0.join(" -> "))]
    ReachesFrontier(Vec<String>),
    #[error("a consistent play simulates k disturbances: {}", .0.join(" -> "))]
    CounterExhausted(Vec<String>),
    #[error("a consistent play loops without visiting F: {}", .0.join(" -> "))]
    Cycle(Vec<String>),
    #[error("the extracted graph fails verification: {0:?}")]
    Invalid(Vec<String>),
    #[error(transparent)]
    Rig(#[from] RigError),
}

/// Builds a strategy graph from a Player-1 strategy `tau` on `arena`, an
/// expansion of `counter_product(rig_pds(spec), k)`. `spec` should be in
/// F-sink normal form. The positional projection uses, for each rigged
/// configuration, the move of its reachable copy with the largest counter.
pub fn extract_strategy_graph(
    spec: &PushdownGameSpec,
    k: u64,
    arena: &ExplicitArena,
    tau: &PositionalStrategy,
) -> Result<StrategyGraph, ExtractionError> {
    let rig = rig_pds(spec);
    let prod = counter_product(&rig, k)?;
    let init = arena.initial().expect("expansions have an initial vertex");

    // Product vertices reachable under tau, stopping at F; reject cycles.
    let n = arena.vertex_count();
    let mut color = vec![0u8; n];
    let mut parent: Vec<Option<VertexId>> = vec![None; n];
    let path_to = |v: VertexId, parent: &[Option<VertexId>]| {
        let mut p = vec![arena.describe(v)];
        let mut cur = v;
        while let Some(u) = parent[cur.index()] {
            p.push(arena.describe(u));
            cur = u;
        }
        p.reverse();
        p
    };
    let next = |v: VertexId| -> Result<Vec<VertexId>, ExtractionError> {
        if arena.is_unsafe(v) {
            return Ok(Vec::new());
        }
        match arena.owner(v) {
            Player::Zero => Ok(arena.successors(v).to_vec()),
            Player::One => tau
                .get(v)
                .map(|t| vec![t])
                .ok_or_else(|| ExtractionError::Undefined(arena.describe(v))),
        }
    };
    let mut stack: Vec<(VertexId, Vec<VertexId>, usize)> = vec![(init, next(init)?, 0)];
    color[init.index()] = 1;
    let mut reached = vec![init];
    while let Some(top) = stack.last_mut() {
        let (v, succ, i) = (top.0, &top.1, top.2);
        if i == succ.len() {
            color[v.index()] = 2;
            stack.pop();
            continue;
        }
        let w = succ[i];
        top.2 += 1;
        match color[w.index()] {
            1 => {
                let mut p = path_to(v, &parent);
                p.push(arena.describe(w));
                return Err(ExtractionError::Cycle(p));
            }
            2 => continue,
            _ => {}
        }
        parent[w.index()] = Some(v);
        let Some(c) = arena.config(w) else {
            return Err(ExtractionError::ReachesFrontier(path_to(w, &parent)));
        };
        if prod.split(c.state).1 >= k {
            return Err(ExtractionError::CounterExhausted(path_to(w, &parent)));
        }
        color[w.index()] = 1;
        reached.push(w);
        let s = next(w)?;
        stack.push((w, s, 0));
    }

    // Representative: the reachable copy with the largest counter.
    let mut rep: HashMap<Configuration, (u64, VertexId)> = HashMap::new();
    for &v in &reached {
        let c = arena.config(v).expect("reached vertices are configurations");
        let (q, counter) = prod.split(c.state);
        let key = Configuration::new(q, c.stack);
        let e = rep.entry(key).or_insert((counter, v));
        if counter > e.0 {
            *e = (counter, v);
        }
    }
    let project = |v: VertexId| {
        let c = arena.config(v).expect("reached vertices are configurations");
        Configuration::new(prod.split(c.state).0, c.stack)
    };

    // Rigged graph under the projected strategy.
    let rs = &rig.spec;
    let mut vertices = vec![rs.initial_configuration()];
    let mut index: HashMap<Configuration, usize> = HashMap::from([(rs.initial_configuration(), 0)]);
    let mut edges = Vec::new();
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        let c = vertices[i].clone();
        if rs.state(c.state).is_unsafe {
            continue;
        }
        let targets = match rs.state(c.state).owner {
            Player::Zero => rs.successors(&c),
            Player::One => {
                let &(_, v) = rep
                    .get(&c)
                    .ok_or_else(|| ExtractionError::Undefined(format_config(rs, &c)))?;
                let t = tau.get(v).ok_or_else(|| ExtractionError::Undefined(arena.describe(v)))?;
                vec![project(t)]
            }
        };
        for t in targets {
            let j = match index.get(&t) {
                Some(&j) => j,
                None => {
                    if !rep.contains_key(&t) && !rs.state(t.state).is_unsafe {
                        return Err(ExtractionError::Undefined(format_config(rs, &t)));
                    }
                    vertices.push(t.clone());
                    index.insert(t, vertices.len() - 1);
                    queue.push_back(vertices.len() - 1);
                    vertices.len() - 1
                }
            };
            edges.push((i, j));
        }
    }

    let m = vertices.len();
    let mut succ: Vec<Vec<usize>> = vec![Vec::new(); m];
    for &(a, b) in &edges {
        succ[a].push(b);
    }
    let order = topological_order(&succ).ok_or_else(|| {
        ExtractionError::Cycle(vec!["projected strategy graph".to_string()])
    })?;
    let mut mu_r = vec![0u64; m];
    let mut mu_d = vec![0u64; m];
    for &v in order.iter().rev() {
        let d = u64::from(rig.is_d_state(vertices[v].state));
        mu_r[v] = d + succ[v].iter().map(|&w| mu_r[w]).max().unwrap_or(0);
        mu_d[v] = succ[v].iter().map(|&w| mu_d[w] + 1).max().unwrap_or(0);
    }
    Ok(StrategyGraph {
        k,
        vertices,
        edges,
        mu_r,
        mu_d,
    })
}

fn topological_order(succ: &[Vec<usize>]) -> Option<Vec<usize>> {
    let n = succ.len();
    let mut indeg = vec![0usize; n];
    for s in succ {
        for &w in s {
            indeg[w] += 1;
        }
    }
    let mut queue: VecDeque<usize> = (0..n).filter(|&v| indeg[v] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(v) = queue.pop_front() {
        order.push(v);
        for &w in &succ[v] {
            indeg[w] -= 1;
            if indeg[w] == 0 {
                queue.push_back(w);
            }
        }
    }
    (order.len() == n).then_some(order)
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum StrategyGraphError {
    #[error(transparent)]
    Expand(#[from] ExpandError),
    #[error(transparent)]
    Extraction(#[from] ExtractionError),
    #[error(transparent)]
    Rig(#[from] RigError),
}

#[derive(Clone, Debug)]
pub struct GraphAnswer {
    pub exists: bool,
    pub graph: Option<StrategyGraph>,
    pub certificate: Certificate,
    pub height: usize,
    /// `(2k)^(|Q|²)` for the input spec.
    pub bound: BigUint,
    /// The normalized spec the graph refers to.
    pub normalized: PushdownGameSpec,
}

/// Decides whether a strategy graph for the `k`-counter game exists by
/// solving the product on a truncation of height `min((2k)^(|Q|²), cap)`,
/// then extracting and verifying one. The input is normalized first unless
/// it already is in F-sink normal form.
pub fn strategy_graph_exists(
    spec: &PushdownGameSpec,
    k: u64,
    height_cap: usize,
    vertex_budget: Option<usize>,
) -> Result<GraphAnswer, StrategyGraphError> {
    let normalized = if is_f_sink_normal(spec) {
        spec.clone()
    } else {
        f_sink_normalize(spec)
    };
    let bound = level_bound(k, spec.state_count());
    let height = bound.to_usize().map_or(height_cap, |b| b.min(height_cap));
    let rig = rig_pds(&normalized);
    let prod = counter_product(&rig, k)?;
    let arena = expand_truncated_bounded(&prod.spec, height, FrontierMode::Optimistic, vertex_budget)?;
    let init = arena.initial().expect("expansions have an initial vertex");
    let sol = solve_safety(&arena);
    if sol.win1.contains(init) {
        let graph = extract_strategy_graph(&normalized, k, &arena, &sol.strategy1)?;
        let violations = verify_strategy_graph(&graph, &normalized, k);
        if !violations.is_empty() {
            return Err(ExtractionError::Invalid(violations.iter().map(|v| v.to_string()).collect()).into());
        }
        return Ok(GraphAnswer {
            exists: true,
            graph: Some(graph),
            certificate: Certificate::Exact,
            height,
            bound,
            normalized,
        });
    }
    let pess = solve_safety(&arena.with_frontier_mode(FrontierMode::Pessimistic));
    let certificate = if BigUint::from(height) >= bound || pess.win0.contains(init) {
        Certificate::Exact
    } else {
        Certificate::Heuristic
    };
    Ok(GraphAnswer {
        exists: false,
        graph: None,
        certificate,
        height,
        bound,
        normalized,
    })
}

/// The positional Player-1 strategy a graph induces on `arena`, an expansion
/// of the rigged system the graph refers to.
pub fn induced_strategy(graph: &StrategyGraph, rig: &RiggedPds, arena: &ExplicitArena) -> PositionalStrategy {
    let mut s = PositionalStrategy::new(Player::One, arena.vertex_count());
    for (i, c) in graph.vertices.iter().enumerate() {
        if rig.spec.state(c.state).owner != Player::One || rig.spec.state(c.state).is_unsafe {
            continue;
        }
        let Some(j) = graph.out_edges(i).next() else { continue };
        if let (Some(v), Some(w)) = (arena.vertex_of(c), arena.vertex_of(&graph.vertices[j])) {
            s.set(v, w);
        }
    }
    s
}

/// One line `k K`, then `label mu_r mu_d` per vertex and `label -> label` per
/// edge. Labels are rigged configurations written `state[A,B]`, top first.
pub fn serialize_strategy_graph(graph: &StrategyGraph, rigged: &PushdownGameSpec) -> String {
    let mut out = format!("k {}\n", graph.k);
    for (i, c) in graph.vertices.iter().enumerate() {
        out.push_str(&format!("{} {} {}\n", format_config(rigged, c), graph.mu_r[i], graph.mu_d[i]));
    }
    for &(a, b) in &graph.edges {
        out.push_str(&format!(
            "{} -> {}\n",
            format_config(rigged, &graph.vertices[a]),
            format_config(rigged, &graph.vertices[b])
        ));
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct GraphParseError {
    pub line: usize,
    pub message: String,
}

pub fn parse_strategy_graph(text: &str, rigged: &PushdownGameSpec) -> Result<StrategyGraph, GraphParseError> {
    let mut k = None;
    let mut graph = StrategyGraph {
        k: 0,
        vertices: Vec::new(),
        edges: Vec::new(),
        mu_r: Vec::new(),
        mu_d: Vec::new(),
    };
    let mut index: HashMap<Configuration, usize> = HashMap::new();
    let mut pending = Vec::new();
    for (ln, raw) in text.lines().enumerate() {
        let line = ln + 1;
        let err = |message: String| GraphParseError { line, message };
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let tok: Vec<&str> = content.split_whitespace().collect();
        match tok.as_slice() {
            ["k", v] => k = Some(v.parse::<u64>().map_err(|_| err(format!("bad k `{v}`")))?),
            [a, "->", b] => pending.push((line, a.to_string(), b.to_string())),
            [label, r, d] => {
                let c = parse_config_label(rigged, label).map_err(err)?;
                let r = r.parse().map_err(|_| err(format!("bad mu_r `{r}`")))?;
                let d = d.parse().map_err(|_| err(format!("bad mu_d `{d}`")))?;
                index.insert(c.clone(), graph.vertices.len());
                graph.vertices.push(c);
                graph.mu_r.push(r);
                graph.mu_d.push(d);
            }
            _ => return Err(err(format!("unrecognized line `{content}`"))),
        }
    }
    for (line, a, b) in pending {
        let err = |message: String| GraphParseError { line, message };
        let ca = parse_config_label(rigged, &a).map_err(err)?;
        let cb = parse_config_label(rigged, &b).map_err(err)?;
        let ia = *index.get(&ca).ok_or_else(|| err(format!("undeclared vertex `{a}`")))?;
        let ib = *index.get(&cb).ok_or_else(|| err(format!("undeclared vertex `{b}`")))?;
        graph.edges.push((ia, ib));
    }
    graph.k = k.ok_or(GraphParseError {
        line: 0,
        message: "missing `k` line".into(),
    })?;
    Ok(graph)
}

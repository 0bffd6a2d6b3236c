//! Explicit finite arenas and the truncated expansion of pushdown games.

use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::model::{Configuration, Player, PushdownGameSpec, StateId, Symbol, Top};
use crate::rigging::RiggedLabel;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VertexId(pub u32);

impl VertexId {
    pub fn new(i: usize) -> Self {
        VertexId(i as u32)
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// Dense bit set over vertex indices.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct VertexSet {
    words: Vec<u64>,
    capacity: usize,
    len: usize,
}

impl VertexSet {
    pub fn new(capacity: usize) -> Self {
        VertexSet {
            words: vec![0; capacity.div_ceil(64)],
            capacity,
            len: 0,
        }
    }

    pub fn full(capacity: usize) -> Self {
        let mut s = Self::new(capacity);
        for i in 0..capacity {
            s.insert(VertexId::new(i));
        }
        s
    }

    pub fn from_iter<I: IntoIterator<Item = VertexId>>(capacity: usize, it: I) -> Self {
        let mut s = Self::new(capacity);
        for v in it {
            s.insert(v);
        }
        s
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn contains(&self, v: VertexId) -> bool {
        let i = v.index();
        i < self.capacity && self.words[i / 64] >> (i % 64) & 1 == 1
    }

    /// Returns true if `v` was not yet present.
    pub fn insert(&mut self, v: VertexId) -> bool {
        let i = v.index();
        assert!(i < self.capacity, "vertex {v} out of range");
        let bit = 1u64 << (i % 64);
        if self.words[i / 64] & bit != 0 {
            return false;
        }
        self.words[i / 64] |= bit;
        self.len += 1;
        true
    }

    pub fn remove(&mut self, v: VertexId) -> bool {
        let i = v.index();
        if !self.contains(v) {
            return false;
        }
        self.words[i / 64] &= !(1u64 << (i % 64));
        self.len -= 1;
        true
    }

    pub fn iter(&self) -> impl Iterator<Item = VertexId> + '_ {
        (0..self.capacity)
            .filter(move |&i| self.words[i / 64] >> (i % 64) & 1 == 1)
            .map(VertexId::new)
    }

    pub fn complement(&self) -> VertexSet {
        VertexSet::from_iter(
            self.capacity,
            (0..self.capacity).map(VertexId::new).filter(|&v| !self.contains(v)),
        )
    }

    pub fn union(&self, other: &VertexSet) -> VertexSet {
        let mut out = self.clone();
        for v in other.iter() {
            out.insert(v);
        }
        out
    }

    pub fn intersection(&self, other: &VertexSet) -> VertexSet {
        VertexSet::from_iter(self.capacity, self.iter().filter(|&v| other.contains(v)))
    }

    pub fn difference(&self, other: &VertexSet) -> VertexSet {
        VertexSet::from_iter(self.capacity, self.iter().filter(|&v| !other.contains(v)))
    }

    pub fn is_subset(&self, other: &VertexSet) -> bool {
        self.iter().all(|v| other.contains(v))
    }
}

impl fmt::Debug for VertexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter().map(|v| v.0)).finish()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StackId(pub u32);

#[derive(Clone, Copy, Debug)]
struct StackNode {
    parent: StackId,
    symbol: Symbol,
    height: u32,
}

/// Hash-consed stack words. Every word is a path from the root (the empty
/// stack) and pushing is a child lookup, so configurations stay small.
#[derive(Clone, Debug)]
pub struct StackTrie {
    nodes: Vec<StackNode>,
    children: HashMap<(StackId, Symbol), StackId>,
}

impl Default for StackTrie {
    fn default() -> Self {
        Self::new()
    }
}

impl StackTrie {
    pub fn new() -> Self {
        StackTrie {
            nodes: vec![StackNode {
                parent: StackId(0),
                symbol: 0,
                height: 0,
            }],
            children: HashMap::new(),
        }
    }

    pub const EMPTY: StackId = StackId(0);

    pub fn push(&mut self, s: StackId, a: Symbol) -> StackId {
        if let Some(&c) = self.children.get(&(s, a)) {
            return c;
        }
        let id = StackId(self.nodes.len() as u32);
        let height = self.nodes[s.0 as usize].height + 1;
        self.nodes.push(StackNode { parent: s, symbol: a, height });
        self.children.insert((s, a), id);
        id
    }

    pub fn child(&self, s: StackId, a: Symbol) -> Option<StackId> {
        self.children.get(&(s, a)).copied()
    }

    pub fn height(&self, s: StackId) -> usize {
        self.nodes[s.0 as usize].height as usize
    }

    pub fn top(&self, s: StackId) -> Top {
        if s == Self::EMPTY {
            Top::Bottom
        } else {
            Top::Symbol(self.nodes[s.0 as usize].symbol)
        }
    }

    /// The stack below the top symbol; the empty stack is its own tail.
    pub fn tail(&self, s: StackId) -> StackId {
        self.nodes[s.0 as usize].parent
    }

    /// Top-first word of `s`.
    pub fn word(&self, mut s: StackId) -> Vec<Symbol> {
        let mut out = Vec::with_capacity(self.height(s));
        while s != Self::EMPTY {
            let n = self.nodes[s.0 as usize];
            out.push(n.symbol);
            s = n.parent;
        }
        out
    }

    pub fn intern(&mut self, word: &[Symbol]) -> StackId {
        word.iter().rev().fold(Self::EMPTY, |s, &a| self.push(s, a))
    }

    pub fn lookup(&self, word: &[Symbol]) -> Option<StackId> {
        word.iter()
            .rev()
            .try_fold(Self::EMPTY, |s, &a| self.child(s, a))
    }

    /// Replaces the top (if it is a symbol) by `push`, top-first.
    pub fn rewrite(&mut self, s: StackId, top: Top, push: &[Symbol]) -> StackId {
        let base = match top {
            Top::Bottom => s,
            Top::Symbol(_) => self.tail(s),
        };
        push.iter().rev().fold(base, |t, &a| self.push(t, a))
    }
}

/// Where an arena's vertices come from; used only for reporting.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum VertexLabel {
    Config { state: StateId, stack: StackId },
    Frontier,
    Named(String),
    Rigged(RiggedLabel),
    Product(VertexId, u32),
}

/// How the frontier sink of a truncation is scored.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FrontierMode {
    /// The frontier is safe: Player 1 wins only if he wins below the cut.
    Optimistic,
    /// The frontier is unsafe: Player 0 wins only if she wins below the cut.
    Pessimistic,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ArenaError {
    #[error("vertex {0} has no outgoing edge")]
    DeadEnd(String),
    #[error("disturbance edge leaves Player-1 vertex {0}")]
    DisturbanceFromPlayerOne(String),
    #[error("duplicate vertex label {0}")]
    DuplicateLabel(String),
    #[error("sink {0} must have a single self-loop and no disturbance edge")]
    MalformedSink(String),
    #[error("edge endpoint {0} out of range")]
    OutOfRange(u32),
}

#[derive(Clone, Debug, Default)]
struct Csr {
    start: Vec<u32>,
    targets: Vec<VertexId>,
}

impl Csr {
    fn from_edges(n: usize, edges: &mut [(u32, u32)]) -> Csr {
        edges.sort_unstable();
        let mut start = vec![0u32; n + 1];
        let mut targets = Vec::with_capacity(edges.len());
        let mut last = None;
        for &(u, v) in edges.iter() {
            if last == Some((u, v)) {
                continue;
            }
            last = Some((u, v));
            start[u as usize + 1] += 1;
            targets.push(VertexId(v));
        }
        for i in 0..n {
            start[i + 1] += start[i];
        }
        Csr { start, targets }
    }

    fn reversed(&self, n: usize) -> Csr {
        let mut edges: Vec<(u32, u32)> = (0..n)
            .flat_map(|u| self.get(u).iter().map(move |v| (v.0, u as u32)))
            .collect();
        Csr::from_edges(n, &mut edges)
    }

    fn get(&self, u: usize) -> &[VertexId] {
        &self.targets[self.start[u] as usize..self.start[u + 1] as usize]
    }
}

/// State and symbol names of the spec an arena was expanded from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Naming {
    pub states: Vec<String>,
    pub alphabet: Vec<String>,
}

impl Naming {
    pub fn of(spec: &PushdownGameSpec) -> Naming {
        Naming {
            states: spec.states().iter().map(|s| s.name.clone()).collect(),
            alphabet: spec.alphabet().to_vec(),
        }
    }
}

/// A finite game graph `(V, V0, V1, E, D)` with an unsafe set. Immutable once
/// built; successor lists are sorted by vertex index.
#[derive(Clone, Debug)]
pub struct ExplicitArena {
    owner: Vec<Player>,
    unsafe_set: VertexSet,
    succ: Csr,
    dsucc: Csr,
    pred: Csr,
    dpred: Csr,
    labels: Vec<VertexLabel>,
    index: HashMap<VertexLabel, VertexId>,
    stacks: Arc<StackTrie>,
    naming: Option<Arc<Naming>>,
    initial: Option<VertexId>,
    frontier: Option<VertexId>,
}

impl ExplicitArena {
    pub fn vertex_count(&self) -> usize {
        self.owner.len()
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> {
        (0..self.owner.len()).map(VertexId::new)
    }

    pub fn owner(&self, v: VertexId) -> Player {
        self.owner[v.index()]
    }

    pub fn is_unsafe(&self, v: VertexId) -> bool {
        self.unsafe_set.contains(v)
    }

    pub fn unsafe_set(&self) -> &VertexSet {
        &self.unsafe_set
    }

    pub fn successors(&self, v: VertexId) -> &[VertexId] {
        self.succ.get(v.index())
    }

    pub fn disturbance_successors(&self, v: VertexId) -> &[VertexId] {
        self.dsucc.get(v.index())
    }

    pub fn predecessors(&self, v: VertexId) -> &[VertexId] {
        self.pred.get(v.index())
    }

    pub fn disturbance_predecessors(&self, v: VertexId) -> &[VertexId] {
        self.dpred.get(v.index())
    }

    pub fn edge_count(&self) -> usize {
        self.succ.targets.len()
    }

    pub fn disturbance_edge_count(&self) -> usize {
        self.dsucc.targets.len()
    }

    pub fn has_edge(&self, u: VertexId, v: VertexId) -> bool {
        self.successors(u).binary_search(&v).is_ok()
    }

    pub fn has_disturbance_edge(&self, u: VertexId, v: VertexId) -> bool {
        self.disturbance_successors(u).binary_search(&v).is_ok()
    }

    pub fn label(&self, v: VertexId) -> &VertexLabel {
        &self.labels[v.index()]
    }

    pub fn find(&self, label: &VertexLabel) -> Option<VertexId> {
        self.index.get(label).copied()
    }

    pub fn initial(&self) -> Option<VertexId> {
        self.initial
    }

    pub fn frontier(&self) -> Option<VertexId> {
        self.frontier
    }

    pub fn stacks(&self) -> &StackTrie {
        &self.stacks
    }

    pub fn naming(&self) -> Option<&Naming> {
        self.naming.as_deref()
    }

    pub fn config(&self, v: VertexId) -> Option<Configuration> {
        match self.label(v) {
            VertexLabel::Config { state, stack } => {
                Some(Configuration::new(*state, self.stacks.word(*stack)))
            }
            _ => None,
        }
    }

    pub fn vertex_of(&self, config: &Configuration) -> Option<VertexId> {
        let stack = self.stacks.lookup(&config.stack)?;
        self.find(&VertexLabel::Config {
            state: config.state,
            stack,
        })
    }

    pub fn height(&self, v: VertexId) -> Option<usize> {
        match self.label(v) {
            VertexLabel::Config { stack, .. } => Some(self.stacks.height(*stack)),
            _ => None,
        }
    }

    pub fn describe(&self, v: VertexId) -> String {
        match self.label(v) {
            VertexLabel::Config { state, stack } => {
                let word = self.stacks.word(*stack);
                match &self.naming {
                    Some(n) => {
                        let syms: Vec<&str> =
                            word.iter().map(|&a| n.alphabet[a as usize].as_str()).collect();
                        format!("{}[{}]", n.states[*state], syms.join(","))
                    }
                    None => {
                        let syms: Vec<String> = word.iter().map(|a| a.to_string()).collect();
                        format!("q{}[{}]", state, syms.join(","))
                    }
                }
            }
            VertexLabel::Frontier => "frontier".to_string(),
            VertexLabel::Named(s) => s.clone(),
            VertexLabel::Rigged(l) => format!("{l:?}"),
            VertexLabel::Product(u, c) => format!("({u},{c})"),
        }
    }

    /// The same graph with a different unsafe set.
    pub fn with_unsafe(&self, unsafe_set: VertexSet) -> ExplicitArena {
        assert_eq!(unsafe_set.capacity(), self.vertex_count());
        ExplicitArena {
            unsafe_set,
            ..self.clone()
        }
    }

    /// Re-scores the frontier sink (if any) according to `mode`.
    pub fn with_frontier_mode(&self, mode: FrontierMode) -> ExplicitArena {
        let mut set = self.unsafe_set.clone();
        if let Some(f) = self.frontier {
            match mode {
                FrontierMode::Optimistic => set.remove(f),
                FrontierMode::Pessimistic => set.insert(f),
            };
        }
        self.with_unsafe(set)
    }

    /// Vertices owned by `p`.
    pub fn owned_by(&self, p: Player) -> impl Iterator<Item = VertexId> + '_ {
        self.vertices().filter(move |&v| self.owner(v) == p)
    }
}

/// Incremental construction of an [`ExplicitArena`].
#[derive(Clone, Debug, Default)]
pub struct ArenaBuilder {
    owner: Vec<Player>,
    unsafe_flags: Vec<bool>,
    labels: Vec<VertexLabel>,
    edges: Vec<(u32, u32)>,
    dedges: Vec<(u32, u32)>,
    initial: Option<VertexId>,
    frontier: Option<VertexId>,
    stacks: Option<Arc<StackTrie>>,
    naming: Option<Arc<Naming>>,
}

impl ArenaBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_vertex(&mut self, label: VertexLabel, owner: Player, is_unsafe: bool) -> VertexId {
        self.owner.push(owner);
        self.unsafe_flags.push(is_unsafe);
        self.labels.push(label);
        VertexId::new(self.owner.len() - 1)
    }

    /// Adds a vertex labelled `Named(name)`.
    pub fn named(&mut self, name: &str, owner: Player, is_unsafe: bool) -> VertexId {
        self.add_vertex(VertexLabel::Named(name.to_string()), owner, is_unsafe)
    }

    pub fn vertex_count(&self) -> usize {
        self.owner.len()
    }

    pub fn add_edge(&mut self, u: VertexId, v: VertexId) -> &mut Self {
        self.edges.push((u.0, v.0));
        self
    }

    pub fn add_disturbance(&mut self, u: VertexId, v: VertexId) -> &mut Self {
        self.dedges.push((u.0, v.0));
        self
    }

    pub fn set_initial(&mut self, v: VertexId) -> &mut Self {
        self.initial = Some(v);
        self
    }

    pub fn set_frontier(&mut self, v: VertexId) -> &mut Self {
        self.frontier = Some(v);
        self
    }

    pub fn set_stacks(&mut self, stacks: Arc<StackTrie>) -> &mut Self {
        self.stacks = Some(stacks);
        self
    }

    pub fn set_naming(&mut self, naming: Arc<Naming>) -> &mut Self {
        self.naming = Some(naming);
        self
    }

    pub fn build(mut self) -> Result<ExplicitArena, ArenaError> {
        let n = self.owner.len();
        for &(u, v) in self.edges.iter().chain(self.dedges.iter()) {
            if u as usize >= n {
                return Err(ArenaError::OutOfRange(u));
            }
            if v as usize >= n {
                return Err(ArenaError::OutOfRange(v));
            }
        }
        let mut index = HashMap::with_capacity(n);
        for (i, l) in self.labels.iter().enumerate() {
            if index.insert(l.clone(), VertexId::new(i)).is_some() {
                return Err(ArenaError::DuplicateLabel(format!("{l:?}")));
            }
        }
        let succ = Csr::from_edges(n, &mut self.edges);
        let dsucc = Csr::from_edges(n, &mut self.dedges);
        let pred = succ.reversed(n);
        let dpred = dsucc.reversed(n);
        let unsafe_set = VertexSet::from_iter(
            n,
            (0..n).filter(|&i| self.unsafe_flags[i]).map(VertexId::new),
        );
        let arena = ExplicitArena {
            owner: self.owner,
            unsafe_set,
            succ,
            dsucc,
            pred,
            dpred,
            labels: self.labels,
            index,
            stacks: self.stacks.unwrap_or_default(),
            naming: self.naming,
            initial: self.initial,
            frontier: self.frontier,
        };
        for v in arena.vertices() {
            if arena.successors(v).is_empty() {
                return Err(ArenaError::DeadEnd(arena.describe(v)));
            }
            if arena.owner(v) == Player::One && !arena.disturbance_successors(v).is_empty() {
                return Err(ArenaError::DisturbanceFromPlayerOne(arena.describe(v)));
            }
        }
        if let Some(f) = arena.frontier {
            if arena.successors(f) != [f] || !arena.disturbance_successors(f).is_empty() {
                return Err(ArenaError::MalformedSink(arena.describe(f)));
            }
        }
        Ok(arena)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ExpandError {
    #[error("expansion exceeded the vertex budget of {0}")]
    Budget(usize),
}

/// Materializes the configuration graph of `spec` restricted to stack
/// heights `<= max_height`, reachable from the initial configuration. Moves
/// that would exceed the bound lead to a frontier sink scored by `mode`.
pub fn expand_truncated(
    spec: &PushdownGameSpec,
    max_height: usize,
    mode: FrontierMode,
) -> ExplicitArena {
    expand_truncated_bounded(spec, max_height, mode, None).expect("no budget given")
}

/// [`expand_truncated`] that fails once more than `budget` vertices exist.
pub fn expand_truncated_bounded(
    spec: &PushdownGameSpec,
    max_height: usize,
    mode: FrontierMode,
    budget: Option<usize>,
) -> Result<ExplicitArena, ExpandError> {
    const FRONTIER: u32 = u32::MAX;
    let n_tops = spec.alphabet().len() + 1;
    let top_index = |t: Top| match t {
        Top::Bottom => 0,
        Top::Symbol(a) => a as usize + 1,
    };
    let mut table: Vec<Vec<usize>> = vec![Vec::new(); spec.state_count() * n_tops];
    let mut dtable: Vec<Vec<usize>> = vec![Vec::new(); spec.state_count() * n_tops];
    for (i, r) in spec.rules().iter().enumerate() {
        table[r.from * n_tops + top_index(r.top)].push(i);
    }
    for (i, r) in spec.disturbances().iter().enumerate() {
        dtable[r.from * n_tops + top_index(r.top)].push(i);
    }

    let mut stacks = StackTrie::new();
    let mut ids: HashMap<(StateId, StackId), u32> = HashMap::new();
    let mut configs: Vec<(StateId, StackId)> = Vec::new();
    let mut edges = Vec::new();
    let mut dedges = Vec::new();
    let mut queue = VecDeque::new();

    let start = (spec.initial(), StackTrie::EMPTY);
    ids.insert(start, 0);
    configs.push(start);
    queue.push_back(0u32);

    while let Some(u) = queue.pop_front() {
        let (q, s) = configs[u as usize];
        let top = stacks.top(s);
        let h = stacks.height(s);
        let slot = q * n_tops + top_index(top);
        for (is_dist, rules) in [(false, spec.rules()), (true, spec.disturbances())] {
            let list = if is_dist { &dtable[slot] } else { &table[slot] };
            for &ri in list {
                let r = &rules[ri];
                let new_h = h + r.push.len() - usize::from(top != Top::Bottom);
                let target = if new_h > max_height {
                    FRONTIER
                } else {
                    let t = stacks.rewrite(s, top, &r.push);
                    let key = (r.to, t);
                    match ids.get(&key) {
                        Some(&id) => id,
                        None => {
                            let id = configs.len() as u32;
                            if let Some(b) = budget {
                                if configs.len() >= b {
                                    return Err(ExpandError::Budget(b));
                                }
                            }
                            ids.insert(key, id);
                            configs.push(key);
                            queue.push_back(id);
                            id
                        }
                    }
                };
                if is_dist {
                    dedges.push((u, target));
                } else {
                    edges.push((u, target));
                }
            }
        }
    }

    let frontier = configs.len() as u32;
    let mut b = ArenaBuilder::new();
    b.edges = edges;
    b.dedges = dedges;
    for e in b.edges.iter_mut().chain(b.dedges.iter_mut()) {
        if e.1 == FRONTIER {
            e.1 = frontier;
        }
    }
    for &(q, s) in &configs {
        let st = spec.state(q);
        b.add_vertex(VertexLabel::Config { state: q, stack: s }, st.owner, st.is_unsafe);
    }
    let f = b.add_vertex(
        VertexLabel::Frontier,
        Player::One,
        mode == FrontierMode::Pessimistic,
    );
    b.add_edge(f, f);
    b.set_frontier(f)
        .set_initial(VertexId(0))
        .set_stacks(Arc::new(stacks))
        .set_naming(Arc::new(Naming::of(spec)));
    Ok(b.build().expect("expansion of a valid spec is a valid arena"))
}

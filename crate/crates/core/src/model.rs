//! Symbolic pushdown games: states, stack alphabet, rules and configurations.
//!
//! Stack words are stored top-first. The bottom symbol is never stored; a rule
//! that reads the bottom sees an empty word and may push at most one symbol.

use std::collections::HashSet;
use std::fmt;

use thiserror::Error;

/// One of the two players. Player 0 is the system, Player 1 the environment.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Player {
    Zero,
    One,
}

impl Player {
    pub fn opponent(self) -> Player {
        match self {
            Player::Zero => Player::One,
            Player::One => Player::Zero,
        }
    }

    pub fn index(self) -> u8 {
        match self {
            Player::Zero => 0,
            Player::One => 1,
        }
    }

    pub fn from_index(i: u8) -> Option<Player> {
        match i {
            0 => Some(Player::Zero),
            1 => Some(Player::One),
            _ => None,
        }
    }
}

impl fmt::Display for Player {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.index())
    }
}

pub type StateId = usize;
pub type Symbol = u16;

/// What a rule reads on top of the stack.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Top {
    Bottom,
    Symbol(Symbol),
}

impl Top {
    /// The word a rule must write to leave the stack untouched.
    pub fn keep(self) -> Vec<Symbol> {
        match self {
            Top::Bottom => Vec::new(),
            Top::Symbol(a) => vec![a],
        }
    }
}

/// `(from, top) -> (to, push)`: replace `top` by the word `push` (top-first).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Rule {
    pub from: StateId,
    pub top: Top,
    pub to: StateId,
    pub push: Vec<Symbol>,
}

impl Rule {
    pub fn new(from: StateId, top: Top, to: StateId, push: Vec<Symbol>) -> Rule {
        Rule { from, top, to, push }
    }

    /// Stack height change caused by this rule.
    pub fn height_delta(&self) -> isize {
        match self.top {
            Top::Bottom => self.push.len() as isize,
            Top::Symbol(_) => self.push.len() as isize - 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct State {
    pub name: String,
    pub owner: Player,
    pub is_unsafe: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum SpecError {
    #[error("the stack alphabet is empty")]
    EmptyAlphabet,
    #[error("the game has no states")]
    NoStates,
    #[error("no initial state declared")]
    NoInitial,
    #[error("duplicate state `{0}`")]
    DuplicateState(String),
    #[error("duplicate stack symbol `{0}`")]
    DuplicateSymbol(String),
    #[error("invalid name `{0}`")]
    InvalidName(String),
    #[error("rule {0} refers to an unknown state or symbol")]
    Dangling(String),
    #[error("rule {0} would write or delete the stack bottom")]
    BottomRewrite(String),
    #[error("rule {0} writes more than two symbols")]
    WordTooLong(String),
    #[error("disturbance rule {0} leaves a Player-1 state")]
    DisturbanceFromPlayerOne(String),
    #[error("state `{state}` has no rule reading `{top}` (deadlock)")]
    Deadlock { state: String, top: String },
}

/// A pushdown system with an ownership partition, a disturbance relation and
/// a set of unsafe states. Instances are always well formed: they can only be
/// obtained through [`SpecBuilder::build`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PushdownGameSpec {
    states: Vec<State>,
    initial: StateId,
    alphabet: Vec<String>,
    rules: Vec<Rule>,
    disturbances: Vec<Rule>,
}

impl PushdownGameSpec {
    pub fn states(&self) -> &[State] {
        &self.states
    }

    pub fn state(&self, q: StateId) -> &State {
        &self.states[q]
    }

    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    pub fn initial(&self) -> StateId {
        self.initial
    }

    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn disturbances(&self) -> &[Rule] {
        &self.disturbances
    }

    pub fn is_one_counter(&self) -> bool {
        self.alphabet.len() == 1
    }

    pub fn state_index(&self, name: &str) -> Option<StateId> {
        self.states.iter().position(|s| s.name == name)
    }

    pub fn symbol_index(&self, name: &str) -> Option<Symbol> {
        self.alphabet.iter().position(|s| s == name).map(|i| i as Symbol)
    }

    pub fn initial_configuration(&self) -> Configuration {
        Configuration::new(self.initial, Vec::new())
    }

    /// Every top a rule may read: the bottom followed by the alphabet.
    pub fn tops(&self) -> Vec<Top> {
        std::iter::once(Top::Bottom)
            .chain((0..self.alphabet.len()).map(|a| Top::Symbol(a as Symbol)))
            .collect()
    }

    /// Applies `rule` to `config`, or returns `None` if the rule does not match.
    pub fn apply(&self, rule: &Rule, config: &Configuration) -> Option<Configuration> {
        if rule.from != config.state || rule.top != config.top() {
            return None;
        }
        let mut stack = rule.push.clone();
        if !config.stack.is_empty() {
            stack.extend_from_slice(&config.stack[1..]);
        }
        Some(Configuration::new(rule.to, stack))
    }

    pub fn successors(&self, config: &Configuration) -> Vec<Configuration> {
        collect_successors(self, &self.rules, config)
    }

    pub fn disturbance_successors(&self, config: &Configuration) -> Vec<Configuration> {
        collect_successors(self, &self.disturbances, config)
    }

    pub fn symbol_name(&self, a: Symbol) -> &str {
        &self.alphabet[a as usize]
    }

    pub fn top_name(&self, top: Top) -> &str {
        match top {
            Top::Bottom => "_",
            Top::Symbol(a) => self.symbol_name(a),
        }
    }

    /// `name[A,B]`, top of the stack first.
    pub fn describe_config(&self, config: &Configuration) -> String {
        let word: Vec<&str> = config.stack.iter().map(|&a| self.symbol_name(a)).collect();
        format!("{}[{}]", self.states[config.state].name, word.join(","))
    }

    pub fn describe_rule(&self, rule: &Rule) -> String {
        describe_rule_with(&self.states, &self.alphabet, rule)
    }

    pub fn into_builder(self) -> SpecBuilder {
        let seen = self
            .rules
            .iter()
            .map(|r| (false, r.clone()))
            .chain(self.disturbances.iter().map(|r| (true, r.clone())))
            .collect();
        SpecBuilder {
            states: self.states,
            initial: Some(self.initial),
            alphabet: self.alphabet,
            rules: self.rules,
            disturbances: self.disturbances,
            seen,
        }
    }
}

fn collect_successors(
    spec: &PushdownGameSpec,
    rules: &[Rule],
    config: &Configuration,
) -> Vec<Configuration> {
    let mut out: Vec<Configuration> = rules.iter().filter_map(|r| spec.apply(r, config)).collect();
    out.sort();
    out.dedup();
    out
}

fn describe_rule_with(states: &[State], alphabet: &[String], rule: &Rule) -> String {
    let state = |q: StateId| states.get(q).map(|s| s.name.as_str()).unwrap_or("?");
    let sym = |a: Symbol| alphabet.get(a as usize).map(|s| s.as_str()).unwrap_or("?");
    let top = match rule.top {
        Top::Bottom => "_",
        Top::Symbol(a) => sym(a),
    };
    let word = if rule.push.is_empty() {
        "eps".to_string()
    } else {
        rule.push.iter().map(|&a| sym(a)).collect::<Vec<_>>().join(" ")
    };
    format!("`{} {} -> {} {}`", state(rule.from), top, state(rule.to), word)
}

/// Characters that may not appear in state or symbol names.
pub const RESERVED_CHARS: &[char] = &['[', ']', ',', '#'];

pub fn is_valid_name(name: &str) -> bool {
    !name.is_empty()
        && !name.chars().any(|c| c.is_whitespace() || RESERVED_CHARS.contains(&c))
}

/// Incremental construction of a [`PushdownGameSpec`]. Duplicate rules are
/// dropped; validation happens in [`SpecBuilder::build`].
#[derive(Clone, Debug, Default)]
pub struct SpecBuilder {
    states: Vec<State>,
    initial: Option<StateId>,
    alphabet: Vec<String>,
    rules: Vec<Rule>,
    disturbances: Vec<Rule>,
    seen: HashSet<(bool, Rule)>,
}

impl SpecBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn symbol(&mut self, name: &str) -> Symbol {
        if let Some(i) = self.alphabet.iter().position(|s| s == name) {
            return i as Symbol;
        }
        self.alphabet.push(name.to_string());
        (self.alphabet.len() - 1) as Symbol
    }

    pub fn state(&mut self, name: &str, owner: Player) -> StateId {
        self.states.push(State {
            name: name.to_string(),
            owner,
            is_unsafe: false,
        });
        self.states.len() - 1
    }

    pub fn unsafe_state(&mut self, name: &str, owner: Player) -> StateId {
        let q = self.state(name, owner);
        self.states[q].is_unsafe = true;
        q
    }

    pub fn set_unsafe(&mut self, q: StateId, is_unsafe: bool) -> &mut Self {
        self.states[q].is_unsafe = is_unsafe;
        self
    }

    pub fn set_owner(&mut self, q: StateId, owner: Player) -> &mut Self {
        self.states[q].owner = owner;
        self
    }

    pub fn initial(&mut self, q: StateId) -> &mut Self {
        self.initial = Some(q);
        self
    }

    pub fn rule(&mut self, from: StateId, top: Top, to: StateId, push: &[Symbol]) -> &mut Self {
        let r = Rule::new(from, top, to, push.to_vec());
        if self.seen.insert((false, r.clone())) {
            self.rules.push(r);
        }
        self
    }

    pub fn disturbance(
        &mut self,
        from: StateId,
        top: Top,
        to: StateId,
        push: &[Symbol],
    ) -> &mut Self {
        let r = Rule::new(from, top, to, push.to_vec());
        if self.seen.insert((true, r.clone())) {
            self.disturbances.push(r);
        }
        self
    }

    pub fn states(&self) -> &[State] {
        &self.states
    }

    pub fn state_index(&self, name: &str) -> Option<StateId> {
        self.states.iter().position(|s| s.name == name)
    }

    pub fn alphabet_len(&self) -> usize {
        self.alphabet.len()
    }

    /// Removes every standard and disturbance rule leaving `q`.
    pub fn clear_rules_from(&mut self, q: StateId) -> &mut Self {
        self.rules.retain(|r| r.from != q);
        self.disturbances.retain(|r| r.from != q);
        self.seen.retain(|(_, r)| r.from != q);
        self
    }

    pub fn clear_disturbances(&mut self) -> &mut Self {
        self.disturbances.clear();
        self.seen.retain(|(d, _)| !d);
        self
    }

    pub fn build(self) -> Result<PushdownGameSpec, SpecError> {
        if self.alphabet.is_empty() {
            return Err(SpecError::EmptyAlphabet);
        }
        if self.states.is_empty() {
            return Err(SpecError::NoStates);
        }
        let initial = self.initial.ok_or(SpecError::NoInitial)?;
        if initial >= self.states.len() {
            return Err(SpecError::NoInitial);
        }
        let mut seen = HashSet::new();
        for s in &self.states {
            if !is_valid_name(&s.name) {
                return Err(SpecError::InvalidName(s.name.clone()));
            }
            if !seen.insert(s.name.as_str()) {
                return Err(SpecError::DuplicateState(s.name.clone()));
            }
        }
        let mut seen = HashSet::new();
        for a in &self.alphabet {
            if !is_valid_name(a) || a == "_" || a == "eps" {
                return Err(SpecError::InvalidName(a.clone()));
            }
            if !seen.insert(a.as_str()) {
                return Err(SpecError::DuplicateSymbol(a.clone()));
            }
        }

        let describe = |r: &Rule| describe_rule_with(&self.states, &self.alphabet, r);
        let n_sym = self.alphabet.len();
        let check = |r: &Rule| -> Result<(), SpecError> {
            let symbol_ok = |a: Symbol| (a as usize) < n_sym;
            let top_ok = match r.top {
                Top::Bottom => true,
                Top::Symbol(a) => symbol_ok(a),
            };
            if r.from >= self.states.len()
                || r.to >= self.states.len()
                || !top_ok
                || !r.push.iter().all(|&a| symbol_ok(a))
            {
                return Err(SpecError::Dangling(describe(r)));
            }
            match r.top {
                Top::Bottom if r.push.len() > 1 => Err(SpecError::BottomRewrite(describe(r))),
                Top::Symbol(_) if r.push.len() > 2 => Err(SpecError::WordTooLong(describe(r))),
                _ => Ok(()),
            }
        };
        for r in &self.rules {
            check(r)?;
        }
        for r in &self.disturbances {
            check(r)?;
            if self.states[r.from].owner != Player::Zero {
                return Err(SpecError::DisturbanceFromPlayerOne(describe(r)));
            }
        }

        let mut covered = vec![vec![false; n_sym + 1]; self.states.len()];
        for r in &self.rules {
            let t = match r.top {
                Top::Bottom => 0,
                Top::Symbol(a) => a as usize + 1,
            };
            covered[r.from][t] = true;
        }
        for (q, row) in covered.iter().enumerate() {
            if let Some(t) = row.iter().position(|c| !c) {
                let top = if t == 0 { "_".to_string() } else { self.alphabet[t - 1].clone() };
                return Err(SpecError::Deadlock {
                    state: self.states[q].name.clone(),
                    top,
                });
            }
        }

        Ok(PushdownGameSpec {
            states: self.states,
            initial,
            alphabet: self.alphabet,
            rules: self.rules,
            disturbances: self.disturbances,
        })
    }
}

/// A state together with a stack word (top first, bottom implicit).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Configuration {
    pub state: StateId,
    pub stack: Vec<Symbol>,
}

impl Configuration {
    pub fn new(state: StateId, stack: Vec<Symbol>) -> Self {
        Configuration { state, stack }
    }

    pub fn height(&self) -> usize {
        self.stack.len()
    }

    pub fn top(&self) -> Top {
        match self.stack.first() {
            Some(&a) => Top::Symbol(a),
            None => Top::Bottom,
        }
    }
}

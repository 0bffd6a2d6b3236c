//! Text formats: game files, strategy listings and configuration labels.
//!
//! A game file is line oriented; `#` starts a comment.
//!
//! ```text
//! game onecounter
//! stack A
//! state q_I owner=0 initial
//! state q_2 owner=0 unsafe
//! edge q_I _ -> q_I A
//! edge q_I A -> q_I A A
//! dedge q_1 A -> q_1 eps
//! ```
//!
//! Words are written top first; `_` is the stack bottom and `eps` the empty
//! word. A rule reading `_` writes at most one symbol and the bottom stays in
//! place implicitly.

use std::collections::HashMap;

use thiserror::Error;

use crate::model::{Configuration, Player, PushdownGameSpec, SpecBuilder, SpecError, Symbol, Top};
use crate::rigging::{Move, TruncatedStrategy};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct ParseError {
    /// 1-based; 0 when the problem is not tied to a line.
    pub line: usize,
    pub message: String,
}

fn err(line: usize, message: impl Into<String>) -> ParseError {
    ParseError {
        line,
        message: message.into(),
    }
}

fn tokens(raw: &str) -> Vec<&str> {
    raw.split('#').next().unwrap_or("").split_whitespace().collect()
}

/// Parses a game file given as raw bytes.
pub fn parse_game_bytes(bytes: &[u8]) -> Result<PushdownGameSpec, ParseError> {
    let text = std::str::from_utf8(bytes).map_err(|e| {
        let line = 1 + bytes[..e.valid_up_to()].iter().filter(|&&b| b == b'\n').count();
        err(line, "invalid UTF-8")
    })?;
    parse_game(text)
}

pub fn parse_game(text: &str) -> Result<PushdownGameSpec, ParseError> {
    let mut b = SpecBuilder::new();
    let mut kind: Option<(usize, bool)> = None;
    let mut stack_line = None;
    let mut state_lines: HashMap<String, usize> = HashMap::new();
    let mut symbols: HashMap<String, Symbol> = HashMap::new();
    let mut initial_line = None;
    let mut edges = Vec::new();

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let tok = tokens(raw);
        let Some(&head) = tok.first() else { continue };
        if kind.is_none() {
            match tok.as_slice() {
                ["game", "pushdown"] => kind = Some((line, false)),
                ["game", "onecounter"] => kind = Some((line, true)),
                _ => return Err(err(line, "expected `game pushdown` or `game onecounter`")),
            }
            continue;
        }
        match head {
            "game" => return Err(err(line, "duplicate `game` line")),
            "stack" => {
                if stack_line.is_some() {
                    return Err(err(line, "duplicate `stack` line"));
                }
                if tok.len() < 2 {
                    return Err(err(line, "the stack alphabet must not be empty"));
                }
                for &s in &tok[1..] {
                    if s == "_" || s == "eps" || !crate::model::is_valid_name(s) {
                        return Err(err(line, format!("`{s}` is not a valid stack symbol")));
                    }
                    if symbols.contains_key(s) {
                        return Err(err(line, format!("duplicate stack symbol `{s}`")));
                    }
                    symbols.insert(s.to_string(), b.symbol(s));
                }
                stack_line = Some(line);
            }
            "state" => {
                let Some(&name) = tok.get(1) else {
                    return Err(err(line, "`state` needs a name"));
                };
                if !crate::model::is_valid_name(name) {
                    return Err(err(line, format!("`{name}` is not a valid state name")));
                }
                if state_lines.contains_key(name) {
                    return Err(err(line, format!("duplicate state `{name}`")));
                }
                let mut owner = None;
                let (mut initial, mut unsafe_) = (false, false);
                for &t in &tok[2..] {
                    match t {
                        "owner=0" => owner = Some(Player::Zero),
                        "owner=1" => owner = Some(Player::One),
                        "initial" => initial = true,
                        "unsafe" => unsafe_ = true,
                        _ => return Err(err(line, format!("unknown state attribute `{t}`"))),
                    }
                }
                let owner = owner.ok_or_else(|| err(line, format!("state `{name}` needs owner=0 or owner=1")))?;
                let q = b.state(name, owner);
                b.set_unsafe(q, unsafe_);
                if initial {
                    if let Some(prev) = initial_line {
                        return Err(err(line, format!("duplicate initial state (first on line {prev})")));
                    }
                    initial_line = Some(line);
                    b.initial(q);
                }
                state_lines.insert(name.to_string(), line);
            }
            "edge" | "dedge" => edges.push((line, tok.iter().map(|s| s.to_string()).collect::<Vec<_>>())),
            _ => return Err(err(line, format!("unknown directive `{head}`"))),
        }
    }

    let (kind_line, one_counter) = kind.ok_or_else(|| err(0, "empty game file"))?;
    let stack_line = stack_line.ok_or_else(|| err(0, "missing `stack` line"))?;
    if one_counter && symbols.len() != 1 {
        return Err(err(stack_line, "a one-counter game has exactly one stack symbol"));
    }
    if initial_line.is_none() {
        return Err(err(kind_line, "no state is marked `initial`"));
    }

    for (line, tok) in edges {
        let disturbance = tok[0] == "dedge";
        let arrow = tok.iter().position(|t| t == "->");
        let (Some(3), true) = (arrow, tok.len() >= 5) else {
            return Err(err(line, format!("expected `{} <q> <top> -> <q'> <word>`", tok[0])));
        };
        let state = |name: &str| {
            b.state_index(name)
                .ok_or_else(|| err(line, format!("unknown state `{name}`")))
        };
        let from = state(&tok[1])?;
        let to = state(&tok[4])?;
        let top = match tok[2].as_str() {
            "_" => Top::Bottom,
            s => Top::Symbol(
                *symbols
                    .get(s)
                    .ok_or_else(|| err(line, format!("unknown stack symbol `{s}`")))?,
            ),
        };
        let word = &tok[5..];
        let push: Vec<Symbol> = match word {
            [] => return Err(err(line, "missing replacement word (use `eps` for the empty word)")),
            [e] if e == "eps" => Vec::new(),
            _ => word
                .iter()
                .map(|s| match s.as_str() {
                    "_" => Err(err(line, "rules cannot write or delete the stack bottom `_`")),
                    "eps" => Err(err(line, "`eps` cannot be combined with symbols")),
                    s => symbols
                        .get(s)
                        .copied()
                        .ok_or_else(|| err(line, format!("unknown stack symbol `{s}`"))),
                })
                .collect::<Result<_, _>>()?,
        };
        match top {
            Top::Bottom if push.len() > 1 => {
                return Err(err(line, "a rule reading `_` may write at most one symbol"))
            }
            Top::Symbol(_) if push.len() > 2 => {
                return Err(err(line, "replacement words have at most two symbols"))
            }
            _ => {}
        }
        if disturbance {
            if b.states()[from].owner != Player::Zero {
                return Err(err(line, format!("disturbance from Player-1 state `{}`", tok[1])));
            }
            b.disturbance(from, top, to, &push);
        } else {
            b.rule(from, top, to, &push);
        }
    }

    b.build().map_err(|e| match &e {
        SpecError::Deadlock { state, .. } => err(state_lines.get(state).copied().unwrap_or(0), e.to_string()),
        _ => err(0, e.to_string()),
    })
}

fn word(spec: &PushdownGameSpec, w: &[Symbol]) -> String {
    if w.is_empty() {
        "eps".to_string()
    } else {
        w.iter().map(|&a| spec.symbol_name(a)).collect::<Vec<_>>().join(" ")
    }
}

pub fn serialize_game(spec: &PushdownGameSpec) -> String {
    let mut out = String::new();
    out.push_str(if spec.is_one_counter() { "game onecounter\n" } else { "game pushdown\n" });
    out.push_str(&format!("stack {}\n", spec.alphabet().join(" ")));
    for (q, s) in spec.states().iter().enumerate() {
        out.push_str(&format!("state {} owner={}", s.name, s.owner));
        if q == spec.initial() {
            out.push_str(" initial");
        }
        if s.is_unsafe {
            out.push_str(" unsafe");
        }
        out.push('\n');
    }
    for (kw, rules) in [("edge", spec.rules()), ("dedge", spec.disturbances())] {
        for r in rules {
            out.push_str(&format!(
                "{kw} {} {} -> {} {}\n",
                spec.state(r.from).name,
                spec.top_name(r.top),
                spec.state(r.to).name,
                word(spec, &r.push)
            ));
        }
    }
    out
}

/// `name[A,B]`, top first.
pub fn format_config(spec: &PushdownGameSpec, c: &Configuration) -> String {
    spec.describe_config(c)
}

/// Inverse of [`format_config`].
pub fn parse_config_label(spec: &PushdownGameSpec, label: &str) -> Result<Configuration, String> {
    let (name, rest) = label
        .split_once('[')
        .ok_or_else(|| format!("`{label}` is not of the form state[word]"))?;
    let inner = rest
        .strip_suffix(']')
        .ok_or_else(|| format!("`{label}` is missing `]`"))?;
    let state = spec
        .state_index(name)
        .ok_or_else(|| format!("unknown state `{name}`"))?;
    let stack = if inner.is_empty() {
        Vec::new()
    } else {
        inner
            .split(',')
            .map(|s| spec.symbol_index(s).ok_or_else(|| format!("unknown stack symbol `{s}`")))
            .collect::<Result<_, _>>()?
    };
    Ok(Configuration::new(state, stack))
}

/// A strategy listing: `height N`, then `state word -> state word` per owned
/// configuration, with `frontier` for moves leaving the truncation.
pub fn serialize_strategy(spec: &PushdownGameSpec, s: &TruncatedStrategy) -> String {
    let mut out = format!("height {}\n", s.height);
    for (c, m) in s.moves() {
        let target = match m {
            Move::To(t) => format!("{} {}", spec.state(t.state).name, word(spec, &t.stack)),
            Move::Frontier => "frontier".to_string(),
        };
        out.push_str(&format!("{} {} -> {}\n", spec.state(c.state).name, word(spec, &c.stack), target));
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StrategyListing {
    pub height: usize,
    pub moves: Vec<(Configuration, Move)>,
}

fn parse_listed_config(spec: &PushdownGameSpec, tok: &[&str], line: usize) -> Result<Configuration, ParseError> {
    let (&name, word) = tok.split_first().ok_or_else(|| err(line, "missing configuration"))?;
    let state = spec
        .state_index(name)
        .ok_or_else(|| err(line, format!("unknown state `{name}`")))?;
    let stack = match word {
        [] => return Err(err(line, "missing stack word (use `eps` for the empty stack)")),
        ["eps"] => Vec::new(),
        _ => word
            .iter()
            .map(|s| {
                spec.symbol_index(s)
                    .ok_or_else(|| err(line, format!("unknown stack symbol `{s}`")))
            })
            .collect::<Result<_, _>>()?,
    };
    Ok(Configuration::new(state, stack))
}

pub fn parse_strategy(text: &str, spec: &PushdownGameSpec) -> Result<StrategyListing, ParseError> {
    let mut height = None;
    let mut moves = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let tok = tokens(raw);
        if tok.is_empty() {
            continue;
        }
        if height.is_none() {
            match tok.as_slice() {
                ["height", n] => {
                    height = Some(n.parse().map_err(|_| err(line, format!("bad height `{n}`")))?);
                    continue;
                }
                _ => return Err(err(line, "expected `height N`")),
            }
        }
        let arrow = tok
            .iter()
            .position(|&t| t == "->")
            .ok_or_else(|| err(line, "expected `state word -> state word`"))?;
        let from = parse_listed_config(spec, &tok[..arrow], line)?;
        let to = match &tok[arrow + 1..] {
            ["frontier"] => Move::Frontier,
            rest => Move::To(parse_listed_config(spec, rest, line)?),
        };
        moves.push((from, to));
    }
    let height = height.ok_or_else(|| err(0, "empty strategy listing"))?;
    Ok(StrategyListing { height, moves })
}

//! Normal form in which unsafe configurations drain into one absorbing sink.

use std::collections::HashSet;

use crate::model::{Player, PushdownGameSpec, Top};
use crate::rigging::fresh_name;

/// Every unsafe state loses its rules (and disturbances) and instead pops its
/// stack down to the bottom, then enters a fresh absorbing unsafe state
/// `q_f`. Resilience of every configuration is unchanged: reaching an unsafe
/// state already decides the play.
pub fn f_sink_normalize(spec: &PushdownGameSpec) -> PushdownGameSpec {
    let mut b = spec.clone().into_builder();
    let mut taken: HashSet<String> = spec.states().iter().map(|s| s.name.clone()).collect();
    let name = fresh_name(&mut taken, "q_f".to_string());
    let qf = b.unsafe_state(&name, Player::One);
    let alphabet: Vec<Top> = spec.tops().into_iter().filter(|&t| t != Top::Bottom).collect();
    for (q, s) in spec.states().iter().enumerate() {
        if !s.is_unsafe {
            continue;
        }
        b.clear_rules_from(q);
        for &t in &alphabet {
            b.rule(q, t, q, &[]);
        }
        b.rule(q, Top::Bottom, qf, &[]);
    }
    b.rule(qf, Top::Bottom, qf, &[]);
    for &t in &alphabet {
        b.rule(qf, t, qf, &t.keep());
    }
    b.build().expect("normalization preserves well-formedness")
}

/// Whether `spec` already has the shape produced by [`f_sink_normalize`]
/// (every unsafe state pops to the bottom and ends in an absorbing state).
pub fn is_f_sink_normal(spec: &PushdownGameSpec) -> bool {
    spec.states().iter().enumerate().all(|(q, s)| {
        if !s.is_unsafe {
            return true;
        }
        let out: Vec<_> = spec.rules().iter().filter(|r| r.from == q).collect();
        let absorbing = out.iter().all(|r| r.to == q && r.push == r.top.keep());
        let draining = out.iter().all(|r| match r.top {
            Top::Symbol(_) => r.to == q && r.push.is_empty(),
            Top::Bottom => spec.state(r.to).is_unsafe && r.push.is_empty(),
        });
        let quiet = spec.disturbances().iter().all(|r| r.from != q);
        quiet && (absorbing || draining)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{brute_force_resilience, OracleValue};
    use crate::arena::{expand_truncated, FrontierMode};
    use crate::generators::gen_fig1;
    use crate::model::{Configuration, SpecBuilder};

    #[test]
    fn fig1_normal_form() {
        let spec = gen_fig1();
        let n = f_sink_normalize(&spec);
        assert_eq!(n.state_count(), 4);
        assert!(is_f_sink_normal(&n));
        let q2 = n.state_index("q_2").unwrap();
        let qf = n.state_index("q_f").unwrap();
        assert_eq!(
            n.successors(&Configuration::new(q2, vec![])),
            vec![Configuration::new(qf, vec![])]
        );
    }

    #[test]
    fn already_absorbing_input() {
        let mut b = SpecBuilder::new();
        b.symbol("A");
        let p = b.state("p", Player::Zero);
        let s = b.unsafe_state("s", Player::One);
        b.initial(p);
        b.rule(p, Top::Bottom, s, &[]).rule(p, Top::Symbol(0), p, &[]);
        b.rule(s, Top::Bottom, s, &[]).rule(s, Top::Symbol(0), s, &[0]);
        let spec = b.build().unwrap();
        let n = f_sink_normalize(&spec);
        assert_eq!(n.state_count(), spec.state_count() + 1);
        assert_eq!(n.rules().len(), spec.rules().len() + 2);
    }

    #[test]
    fn values_are_preserved_on_fig1() {
        let spec = gen_fig1();
        let n = f_sink_normalize(&spec);
        let a = expand_truncated(&spec, 6, FrontierMode::Optimistic);
        let b = expand_truncated(&n, 6, FrontierMode::Optimistic);
        let ra = brute_force_resilience(&a, 8);
        let rb = brute_force_resilience(&b, 8);
        for v in a.vertices() {
            let Some(c) = a.config(v) else { continue };
            let w = b.vertex_of(&c).unwrap();
            assert_eq!(ra[v.index()], rb[w.index()], "{c:?}");
        }
        assert_eq!(ra[a.initial().unwrap().index()], OracleValue::AboveCap);
    }
}

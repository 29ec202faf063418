mod common;

use std::collections::{BTreeMap, BTreeSet};

use common::{program, toggle_theory as theory};
use proptest::prelude::*;
use sitcalc::bat::BasicActionTheory;
use sitcalc::congolog::{
    do_end_states, do_executions, executions_up_to, is_situation_determined, trans, Configuration,
    Program, DEFAULT_CONFIG_BUDGET,
};
use sitcalc::frontend::parse_program;
use sitcalc::kernel::{GroundAction, WorldState};

type Runs = BTreeSet<(Vec<GroundAction>, WorldState)>;

fn runs(p: &Program, bat: &BasicActionTheory, n: usize) -> Runs {
    let w = bat.initial_model(0).unwrap();
    executions_up_to(p, w, bat, n)
        .unwrap()
        .into_iter()
        .map(|e| (e.trace, e.state))
        .collect()
}

const N: usize = 4;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn star_unrolls_once(p in program(true), q in program(true)) {
        let bat = theory();
        let lhs = Program::seq(Program::star(p.clone()), q.clone());
        let rhs = Program::seq(
            Program::choice(Program::Nil, Program::seq(p.clone(), Program::star(p))),
            q,
        );
        prop_assert_eq!(runs(&lhs, &bat, N), runs(&rhs, &bat, N));
    }

    #[test]
    fn interleaving_is_symmetric(p in program(true), q in program(true)) {
        let bat = theory();
        prop_assert_eq!(
            runs(&Program::interleave(p.clone(), q.clone()), &bat, N),
            runs(&Program::interleave(q, p), &bat, N)
        );
    }

    #[test]
    fn interleaving_with_nil_is_identity(p in program(true)) {
        let bat = theory();
        prop_assert_eq!(runs(&Program::interleave(p.clone(), Program::Nil), &bat, N), runs(&p, &bat, N));
    }

    #[test]
    fn sequence_is_associative(p in program(true), q in program(true), r in program(true)) {
        let bat = theory();
        let lhs = Program::seq(Program::seq(p.clone(), q.clone()), r.clone());
        let rhs = Program::seq(p, Program::seq(q, r));
        prop_assert_eq!(runs(&lhs, &bat, N), runs(&rhs, &bat, N));
    }

    #[test]
    fn choice_is_commutative_and_idempotent(p in program(true), q in program(true)) {
        let bat = theory();
        prop_assert_eq!(
            runs(&Program::choice(p.clone(), q.clone()), &bat, N),
            runs(&Program::choice(q, p.clone()), &bat, N)
        );
        prop_assert_eq!(runs(&Program::choice(p.clone(), p.clone()), &bat, N), runs(&p, &bat, N));
    }

    #[test]
    fn normalization_preserves_executions(p in program(true)) {
        let bat = theory();
        prop_assert_eq!(runs(&p.normalize(), &bat, N), runs(&p, &bat, N));
    }

    #[test]
    fn loop_free_search_is_complete(p in program(false)) {
        let bat = theory();
        let w = bat.initial_model(0).unwrap();
        let all = runs(&p, &bat, 64);
        let dfs: Runs = do_executions(&p, w, &bat, DEFAULT_CONFIG_BUDGET)
            .unwrap()
            .into_iter()
            .map(|e| (e.trace, e.state))
            .collect();
        prop_assert_eq!(&dfs, &all);
        let ends: BTreeSet<WorldState> = do_end_states(&p, w, &bat, DEFAULT_CONFIG_BUDGET)
            .unwrap()
            .into_iter()
            .map(|e| e.state)
            .collect();
        prop_assert_eq!(ends, all.iter().map(|(_, s)| s.clone()).collect::<BTreeSet<_>>());
    }

    #[test]
    fn end_states_cover_looping_programs(p in program(true)) {
        let bat = theory();
        let w = bat.initial_model(0).unwrap();
        let ends: BTreeSet<WorldState> = do_end_states(&p, w, &bat, DEFAULT_CONFIG_BUDGET)
            .unwrap()
            .into_iter()
            .map(|e| e.state)
            .collect();
        // Four boolean atoms give at most 8 states, reached within 8 steps.
        let bounded: BTreeSet<WorldState> = runs(&p, &bat, 8).into_iter().map(|(_, s)| s).collect();
        prop_assert_eq!(ends, bounded);
    }

    #[test]
    fn situation_determinedness_matches_trace_enumeration(p in program(false)) {
        let bat = theory();
        let w = bat.initial_model(0).unwrap().clone();
        // trace -> residual programs reached by it
        let mut by_trace: BTreeMap<Vec<GroundAction>, BTreeSet<Configuration>> = BTreeMap::new();
        let mut frontier = vec![(Vec::new(), Configuration::new(p.clone(), w))];
        while let Some((t, c)) = frontier.pop() {
            by_trace.entry(t.clone()).or_default().insert(c.clone());
            for tr in trans(&c, &bat).unwrap() {
                let mut t2 = t.clone();
                t2.push(tr.action);
                frontier.push((t2, tr.next));
            }
        }
        let brute = by_trace.values().all(|s| s.len() <= 1);
        let engine = is_situation_determined(&p, bat.initial_model(0).unwrap(), &bat, DEFAULT_CONFIG_BUDGET)
            .unwrap()
            .is_none();
        prop_assert_eq!(engine, brute);
    }

    #[test]
    fn printed_programs_parse_back(p in program(true)) {
        let text = p.to_string();
        prop_assert_eq!(parse_program(&text, &[]).unwrap(), p, "{}", text);
    }
}

#[test]
fn deterministic_sequences_are_situation_determined() {
    let bat = theory();
    let p = parse_program("set(O1); tick; clr(O1)", &[]).unwrap();
    assert!(
        is_situation_determined(&p, bat.initial_model(0).unwrap(), &bat, 100)
            .unwrap()
            .is_none()
    );
    let q = parse_program("(tick; set(O1)) | (tick; clr(O2))", &[]).unwrap();
    let wit = is_situation_determined(&q, bat.initial_model(0).unwrap(), &bat, 100)
        .unwrap()
        .unwrap();
    assert_eq!(wit.trace, vec![GroundAction::new("tick", &[])]);
}

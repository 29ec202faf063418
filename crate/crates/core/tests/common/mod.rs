//! Independent reference implementations and generators shared by the
//! integration tests. Nothing here goes through compiled formulas, the
//! successor cache or the program interpreter.

#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};

use proptest::prelude::*;
use sitcalc::bat::BasicActionTheory;
use sitcalc::kernel::{
    sym, ActionTerm, FluentAtom, Formula, GroundAction, Sym, Term, Vocabulary, WorldState,
};

pub type Binding = HashMap<Sym, Sym>;

fn resolve(t: &Term, env: &Binding) -> Sym {
    match t {
        Term::Obj(o) => o.clone(),
        Term::Var(v) => env.get(v).cloned().unwrap_or_else(|| panic!("unbound {v}")),
    }
}

/// Tarskian evaluation by structural recursion over the formula.
pub fn naive_eval(
    phi: &Formula,
    w: &WorldState,
    vocab: &Vocabulary,
    env: &mut Binding,
    action: Option<&GroundAction>,
) -> bool {
    match phi {
        Formula::True => true,
        Formula::False => false,
        Formula::Atom(FluentAtom { fluent, args }) => {
            let args: Vec<Term> = args.iter().map(|t| Term::Obj(resolve(t, env))).collect();
            w.get(vocab.ground_atom(fluent, &args).expect("well-formed atom"))
        }
        Formula::Eq(a, b) => resolve(a, env) == resolve(b, env),
        Formula::ActionIs(ActionTerm { name, args }) => {
            let a = action.expect("action equality needs an action");
            a.name == *name
                && a.args.len() == args.len()
                && a.args.iter().zip(args).all(|(x, t)| *x == resolve(t, env))
        }
        Formula::Not(p) => !naive_eval(p, w, vocab, env, action),
        Formula::And(p, q) => {
            naive_eval(p, w, vocab, env, action) && naive_eval(q, w, vocab, env, action)
        }
        Formula::Or(p, q) => {
            naive_eval(p, w, vocab, env, action) || naive_eval(q, w, vocab, env, action)
        }
        Formula::Implies(p, q) => {
            !naive_eval(p, w, vocab, env, action) || naive_eval(q, w, vocab, env, action)
        }
        Formula::Iff(p, q) => {
            naive_eval(p, w, vocab, env, action) == naive_eval(q, w, vocab, env, action)
        }
        Formula::Forall(v, body) | Formula::Exists(v, body) => {
            let universal = matches!(phi, Formula::Forall(..));
            let saved = env.get(v).cloned();
            let mut result = universal;
            for o in vocab.domain().names() {
                env.insert(v.clone(), o.clone());
                if naive_eval(body, w, vocab, env, action) != universal {
                    result = !universal;
                    break;
                }
            }
            match saved {
                Some(s) => env.insert(v.clone(), s),
                None => env.remove(v),
            };
            result
        }
    }
}

pub fn eval_closed(phi: &Formula, w: &WorldState, vocab: &Vocabulary) -> bool {
    naive_eval(phi, w, vocab, &mut HashMap::new(), None)
}

fn tuples(arity: usize, objs: &[Sym]) -> Vec<Vec<Sym>> {
    let mut out = vec![Vec::new()];
    for _ in 0..arity {
        out = out
            .into_iter()
            .flat_map(|t| {
                objs.iter().map(move |o| {
                    let mut t = t.clone();
                    t.push(o.clone());
                    t
                })
            })
            .collect();
    }
    out
}

pub fn naive_poss(bat: &BasicActionTheory, a: &GroundAction, w: &WorldState) -> bool {
    let ty = bat
        .actions()
        .iter()
        .find(|t| t.name == a.name)
        .expect("declared action");
    let mut env: Binding = ty
        .params
        .iter()
        .cloned()
        .zip(a.args.iter().cloned())
        .collect();
    naive_eval(&ty.precondition, w, bat.vocab(), &mut env, None)
}

/// Progression straight from the successor-state axioms.
pub fn naive_step(bat: &BasicActionTheory, a: &GroundAction, w: &WorldState) -> WorldState {
    let vocab = bat.vocab();
    let objs = vocab.domain().names().to_vec();
    let mut next = vocab.empty_state();
    for ssa in bat.ssas() {
        let arity = ssa.params.len();
        for t in tuples(arity, &objs) {
            let mut env: Binding = ssa.params.iter().cloned().zip(t.iter().cloned()).collect();
            let v = naive_eval(&ssa.rhs, w, vocab, &mut env, Some(a));
            let args: Vec<Term> = t.into_iter().map(Term::Obj).collect();
            next.set(vocab.ground_atom(&ssa.fluent, &args).unwrap(), v);
        }
    }
    next
}

pub fn all_ground_actions(bat: &BasicActionTheory) -> Vec<GroundAction> {
    let objs = bat.domain().names().to_vec();
    let mut out = Vec::new();
    for ty in bat.actions() {
        for t in tuples(ty.params.len(), &objs) {
            out.push(GroundAction {
                name: ty.name.clone(),
                args: t,
            });
        }
    }
    out
}

/// Breadth-first enumeration of states reachable by executable actions.
pub fn naive_reachable(bat: &BasicActionTheory) -> BTreeSet<Vec<bool>> {
    let actions = all_ground_actions(bat);
    let mut seen: HashSet<WorldState> = HashSet::new();
    let mut queue: VecDeque<WorldState> = VecDeque::new();
    for w in bat.initial_models() {
        if seen.insert(w.clone()) {
            queue.push_back(w.clone());
        }
    }
    while let Some(w) = queue.pop_front() {
        for a in &actions {
            if naive_poss(bat, a, &w) {
                let n = naive_step(bat, a, &w);
                if seen.insert(n.clone()) {
                    queue.push_back(n);
                }
            }
        }
    }
    seen.iter().map(|w| bits(w, bat.vocab())).collect()
}

pub fn bits(w: &WorldState, vocab: &Vocabulary) -> Vec<bool> {
    (0..vocab.atom_count()).map(|i| w.get(i)).collect()
}

pub fn state_from_bits(vocab: &Vocabulary, bits: &[bool]) -> WorldState {
    let mut w = vocab.empty_state();
    for (i, b) in bits.iter().enumerate() {
        w.set(i, *b);
    }
    w
}

fn term(vars: &[&'static str], objs: &[&'static str]) -> BoxedStrategy<Term> {
    let mut choices: Vec<Term> = vars.iter().map(|v| Term::var(v)).collect();
    choices.extend(objs.iter().map(|o| Term::obj(o)));
    proptest::sample::select(choices).boxed()
}

/// Formulas whose free variables are among `vars`; quantifiers rebind
/// the same names.
pub fn formula(
    fluents: Vec<(&'static str, usize)>,
    vars: Vec<&'static str>,
    objs: Vec<&'static str>,
) -> BoxedStrategy<Formula> {
    let t = term(&vars, &objs);
    let atom = proptest::sample::select(fluents).prop_flat_map(move |(f, n)| {
        proptest::collection::vec(t.clone(), n).prop_map(move |args| {
            Formula::Atom(FluentAtom {
                fluent: sym(f),
                args,
            })
        })
    });
    let t2 = term(&vars, &objs);
    let eq = (t2.clone(), t2).prop_map(|(a, b)| Formula::Eq(a, b));
    let leaf = prop_oneof![
        1 => Just(Formula::True),
        1 => Just(Formula::False),
        6 => atom,
        2 => eq,
    ];
    let qvars = vars.clone();
    leaf.prop_recursive(4, 24, 2, move |inner| {
        let v = proptest::sample::select(qvars.clone());
        prop_oneof![
            inner.clone().prop_map(Formula::not),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::and(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::or(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::implies(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::iff(a, b)),
            (v.clone(), inner.clone()).prop_map(|(x, b)| Formula::forall(x, b)),
            (v, inner).prop_map(|(x, b)| Formula::exists(x, b)),
        ]
    })
    .boxed()
}

/// Binds every variable in `vars` with an outer quantifier.
pub fn close(phi: Formula, vars: &[&str], universal: &[bool]) -> Formula {
    vars.iter().zip(universal).rev().fold(phi, |acc, (v, u)| {
        if *u {
            Formula::forall(v, acc)
        } else {
            Formula::exists(v, acc)
        }
    })
}

/// The high-level state a low-level state represents, by evaluating each
/// fluent's mapped formula directly.
pub fn naive_abstract(pair: &sitcalc::mapping::TheoryPair, w: &WorldState) -> WorldState {
    let hv = pair.high.vocab();
    let objs = hv.domain().names().to_vec();
    let mut out = hv.empty_state();
    for f in hv.fluents() {
        let e = pair.mapping.fluent_entry(&f.name).unwrap();
        for t in tuples(f.arity, &objs) {
            let mut env: Binding = e.params.iter().cloned().zip(t.iter().cloned()).collect();
            let v = naive_eval(&e.formula, w, pair.low.vocab(), &mut env, None);
            let args: Vec<Term> = t.into_iter().map(Term::Obj).collect();
            out.set(hv.ground_atom(&f.name, &args).unwrap(), v);
        }
    }
    out
}

/// Ground tuples of `arity` over `objs`.
pub fn ground_tuples(arity: usize, objs: &[Sym]) -> Vec<Vec<Sym>> {
    tuples(arity, objs)
}

/// End states of every refinement of `a` from `w`, by bounded enumeration.
pub fn naive_refine(
    p: &sitcalc::mapping::TheoryPair,
    a: &GroundAction,
    w: &WorldState,
) -> BTreeSet<WorldState> {
    let prog = p.mapping.map_action(a).unwrap();
    sitcalc::congolog::executions_up_to(&prog, w, &p.low, 6)
        .unwrap()
        .into_iter()
        .map(|e| e.state)
        .collect()
}

const SHIPMENTS: &[&str] = &["123"];
const ROUTES: &[&str] = &["Rt_A", "Rt_B", "Rt_C"];
const LOCATIONS: &[&str] = &["W", "L1", "L2", "L3", "L4", "Cf"];

/// Every ground high-level action in canonical order, except that the
/// logistics arguments are restricted to their sorts; no other object
/// occurs in a precondition or refinement that could succeed.
pub fn universe(p: &sitcalc::mapping::TheoryPair) -> Vec<GroundAction> {
    let sort = |action: &str, pos: usize| -> Option<&[&str]> {
        match (action, pos) {
            ("takeRoute", 0) | ("deliver", 0) => Some(SHIPMENTS),
            ("takeRoute", 1) => Some(ROUTES),
            ("takeRoute", _) => Some(LOCATIONS),
            _ => None,
        }
    };
    let all = p.high.domain().names().to_vec();
    let mut out = Vec::new();
    for ty in p.high.actions() {
        let mut args = vec![Vec::new()];
        for pos in 0..ty.params.len() {
            let objs: Vec<Sym> = match sort(&ty.name, pos) {
                Some(o) => o.iter().map(|x| sym(x)).collect(),
                None => all.clone(),
            };
            args = args
                .into_iter()
                .flat_map(|t| {
                    objs.iter().map(move |o| {
                        let mut t = t.clone();
                        t.push(o.clone());
                        t
                    })
                })
                .collect();
        }
        out.extend(args.into_iter().map(|args| GroundAction {
            name: ty.name.clone(),
            args,
        }));
    }
    p.high.sort_actions(&mut out);
    out
}

/// From each position reachable by whole refinements, every high-level
/// action whose refinement matches the trace from there, with the
/// matched segment. Refinements are enumerated, not followed.
pub fn segment_edges(
    p: &sitcalc::mapping::TheoryPair,
    acts: &[GroundAction],
    trace: &[GroundAction],
    ws: &[WorldState],
) -> Vec<Vec<(GroundAction, Vec<GroundAction>)>> {
    let n = trace.len();
    let mut edges = vec![Vec::new(); n + 1];
    let mut reached = vec![false; n + 1];
    reached[0] = true;
    for i in 0..=n {
        if !reached[i] {
            continue;
        }
        for a in acts {
            let prog = p.mapping.map_action(a).unwrap();
            // Try a short bound first; redo with the full one only if some
            // execution reaches it.
            let short = (n - i).min(4);
            let mut execs =
                sitcalc::congolog::executions_up_to(&prog, &ws[i], &p.low, short).unwrap();
            if short < n - i && execs.iter().any(|e| e.trace.len() == short) {
                execs = sitcalc::congolog::executions_up_to(&prog, &ws[i], &p.low, n - i).unwrap();
            }
            for e in execs {
                let k = e.trace.len();
                if k > 0 && e.trace[..] == trace[i..i + k] {
                    reached[i + k] = true;
                    edges[i].push((a.clone(), e.trace));
                }
            }
        }
    }
    edges
}

/// A high-level sequence and the trace segments refining each action.
pub type Cut = (Vec<GroundAction>, Vec<Vec<GroundAction>>);

/// The largest prefix cut into whole refinements, and every way of
/// cutting it (up to `cap`).
pub fn naive_explanations(
    p: &sitcalc::mapping::TheoryPair,
    trace: &[GroundAction],
    ws: &[WorldState],
    cap: usize,
) -> (usize, Vec<Cut>) {
    let edges = segment_edges(p, &universe(p), trace, ws);
    let mut reached = vec![false; trace.len() + 1];
    reached[0] = true;
    for (i, out) in edges.iter().enumerate() {
        for (_, seg) in out {
            reached[i + seg.len()] = true;
        }
    }
    let lp = (0..=trace.len()).rev().find(|&k| reached[k]).unwrap();
    fn paths(
        edges: &[Vec<(GroundAction, Vec<GroundAction>)>],
        i: usize,
        end: usize,
        cap: usize,
        out: &mut Vec<Cut>,
        cur: &mut Cut,
    ) {
        if out.len() >= cap {
            return;
        }
        if i == end {
            out.push(cur.clone());
            return;
        }
        for (a, seg) in &edges[i] {
            if i + seg.len() <= end {
                cur.0.push(a.clone());
                cur.1.push(seg.clone());
                paths(edges, i + seg.len(), end, cap, out, cur);
                cur.0.pop();
                cur.1.pop();
            }
        }
    }
    let mut out = Vec::new();
    paths(&edges, 0, lp, cap, &mut out, &mut (Vec::new(), Vec::new()));
    (lp, out)
}

/// States along an executable low-level trace from model `model`.
/// Progression itself is checked against the axioms elsewhere; here the
/// engine's step keeps the monitor oracles fast.
pub fn states_along(
    bat: &BasicActionTheory,
    trace: &[GroundAction],
    model: usize,
) -> Vec<WorldState> {
    let mut w = bat.initial_model(model).unwrap().clone();
    let mut out = vec![w.clone()];
    for a in trace {
        assert!(bat.poss(a, &w).unwrap(), "{a} is not executable");
        w = bat.step(a, &w).unwrap();
        out.push(w.clone());
    }
    out
}

/// Random executable traces: at each step pick among the executable
/// actions by index.
pub fn random_walk(bat: &BasicActionTheory, picks: &[usize]) -> Vec<GroundAction> {
    type Key = (usize, WorldState);
    static MOVES: std::sync::OnceLock<std::sync::Mutex<HashMap<Key, Vec<GroundAction>>>> =
        std::sync::OnceLock::new();
    let moves = MOVES.get_or_init(Default::default);
    let mut w = bat.initial_model(0).unwrap().clone();
    let mut out = Vec::new();
    for &k in picks {
        let key = (bat as *const BasicActionTheory as usize, w.clone());
        let next = moves
            .lock()
            .unwrap()
            .entry(key)
            .or_insert_with(|| bat.executable_actions(&w))
            .clone();
        if next.is_empty() {
            break;
        }
        let a = next[k % next.len()].clone();
        w = bat.step(&a, &w).unwrap();
        out.push(a);
    }
    out
}

const TOGGLES: &str = "
domain: O1, O2
fluents: F/1, G/0
action set(x) possible when ~F(x)
action clr(x) possible when F(x)
action tick possible when true
ssa F(x) <- a = set(x) | F(x) & a != clr(x)
ssa G <- a = tick & ~G | G & a != tick
init model { F(O2) }
";

/// Two toggles and a switch, for exercising the program interpreter.
pub fn toggle_theory() -> BasicActionTheory {
    let decl = sitcalc::frontend::parse_theory(TOGGLES).unwrap();
    let d = std::sync::Arc::new(sitcalc::kernel::Domain::new(["O1", "O2"]).unwrap());
    sitcalc::frontend::build_theory(&decl, d).unwrap()
}

fn leaf() -> BoxedStrategy<sitcalc::congolog::Program> {
    let arg = prop_oneof![Just("O1"), Just("O2"), Just("x")];
    prop_oneof![
        arg.clone()
            .prop_map(|a| sitcalc::congolog::Program::action("set", vec![arg_term(a)])),
        arg.prop_map(|a| sitcalc::congolog::Program::action("clr", vec![arg_term(a)])),
        Just(sitcalc::congolog::Program::action("tick", vec![])),
        Just(sitcalc::congolog::Program::Nil),
        Just(sitcalc::congolog::Program::test(Formula::atom(
            "F",
            vec![Term::obj("O1")]
        ))),
        Just(sitcalc::congolog::Program::test(Formula::not(
            Formula::atom("G", vec![])
        ))),
    ]
    .boxed()
}

fn arg_term(a: &str) -> Term {
    if a == "x" {
        Term::var(a)
    } else {
        Term::obj(a)
    }
}

/// Closed programs over [`toggle_theory`]; `x` is bound by an outer
/// pick.
pub fn program(star: bool) -> BoxedStrategy<sitcalc::congolog::Program> {
    leaf()
        .prop_recursive(3, 12, 2, move |inner| {
            let mut options = vec![
                (inner.clone(), inner.clone())
                    .prop_map(|(p, q)| sitcalc::congolog::Program::seq(p, q))
                    .boxed(),
                (inner.clone(), inner.clone())
                    .prop_map(|(p, q)| sitcalc::congolog::Program::choice(p, q))
                    .boxed(),
                (inner.clone(), inner.clone())
                    .prop_map(|(p, q)| sitcalc::congolog::Program::interleave(p, q))
                    .boxed(),
                inner
                    .clone()
                    .prop_map(|p| sitcalc::congolog::Program::pick("x", p))
                    .boxed(),
            ];
            if star {
                options.push(inner.prop_map(sitcalc::congolog::Program::star).boxed());
            }
            proptest::strategy::Union::new(options)
        })
        .prop_map(|p| sitcalc::congolog::Program::pick("x", p))
        .boxed()
}

/// Runs every high-level sequence of up to `depth` actions from [`universe`]
/// in high-level model `i` alongside its refinements from low-level model
/// `j`. Returns the number of sequences run and the first one after which
/// executability or the represented state differs.
pub fn divergence(
    p: &sitcalc::mapping::TheoryPair,
    i: usize,
    j: usize,
    depth: usize,
) -> (usize, Option<Vec<GroundAction>>) {
    fn go(
        p: &sitcalc::mapping::TheoryPair,
        actions: &[GroundAction],
        h: &WorldState,
        ls: &BTreeSet<WorldState>,
        trace: &mut Vec<GroundAction>,
        depth: usize,
        count: &mut usize,
    ) -> Option<Vec<GroundAction>> {
        *count += 1;
        if ls.iter().any(|l| naive_abstract(p, l) != *h) {
            return Some(trace.clone());
        }
        if trace.len() == depth {
            return None;
        }
        for a in actions {
            let next: BTreeSet<WorldState> =
                ls.iter().flat_map(|l| naive_refine(p, a, l)).collect();
            trace.push(a.clone());
            let hl_ok = naive_poss(&p.high, a, h);
            if hl_ok != !next.is_empty() {
                return Some(trace.clone());
            }
            if hl_ok {
                if let Some(t) = go(
                    p,
                    actions,
                    &naive_step(&p.high, a, h),
                    &next,
                    trace,
                    depth,
                    count,
                ) {
                    return Some(t);
                }
            } else {
                *count += 1;
            }
            trace.pop();
        }
        None
    }
    let h = p.high.initial_model(i).unwrap().clone();
    let ls = BTreeSet::from([p.low.initial_model(j).unwrap().clone()]);
    let mut count = 0;
    let found = go(p, &universe(p), &h, &ls, &mut Vec::new(), depth, &mut count);
    (count, found)
}

/// A low-level state built from arbitrary values of the atoms the
/// mapping mentions, over a handful of objects.
pub fn logistics_ll_state() -> impl Strategy<Value = WorldState> {
    static ATOMS: std::sync::OnceLock<Vec<usize>> = std::sync::OnceLock::new();
    let p = logistics_pair();
    let atoms = ATOMS
        .get_or_init(|| {
            let objs = ["123", "W", "L2", "Cf", "Rt_A", "Rt_B"].map(sitcalc::kernel::sym);
            let v = p.low.vocab();
            let mut out = Vec::new();
            for (f, n) in [
                ("At_LL", 2),
                ("CnRoute_LL", 3),
                ("Dest_LL", 2),
                ("BadWeather", 0),
                ("Express", 1),
                ("Unloaded", 1),
                ("Signed", 1),
            ] {
                for t in ground_tuples(n, &objs) {
                    let args: Vec<Term> = t.into_iter().map(Term::Obj).collect();
                    out.push(v.ground_atom(f, &args).unwrap());
                }
            }
            out
        })
        .clone();
    proptest::collection::vec(any::<bool>(), atoms.len()).prop_map(move |vals| {
        let mut w = logistics_pair().low.vocab().empty_state();
        for (&i, b) in atoms.iter().zip(vals) {
            w.set(i, b);
        }
        w
    })
}

pub fn logistics_pair() -> &'static sitcalc::mapping::TheoryPair {
    static P: std::sync::OnceLock<sitcalc::mapping::TheoryPair> = std::sync::OnceLock::new();
    P.get_or_init(|| sitcalc::fixtures::logistics().unwrap())
}

pub fn logistics_hl_formula() -> impl Strategy<Value = Formula> {
    let f = formula(
        vec![
            ("At_HL", 2),
            ("CnRoute_HL", 3),
            ("Dest_HL", 2),
            ("Priority", 1),
            ("Delivered", 1),
        ],
        vec!["x", "y"],
        vec!["123", "W", "L2", "Cf", "Rt_A"],
    );
    (f, any::<[bool; 2]>()).prop_map(|(f, u)| close(f, &["x", "y"], &u))
}

use std::collections::{HashMap, HashSet, VecDeque};

use super::Program;
use crate::bat::BasicActionTheory;
use crate::error::{Error, Result};
use crate::kernel::{eval_in, resolve_term, Env, GroundAction, Sym, WorldState};

/// Default cap on the number of configurations any single search visits.
pub const DEFAULT_CONFIG_BUDGET: usize = 1_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Configuration {
    pub program: Program,
    pub state: WorldState,
}

impl Configuration {
    pub fn new(program: Program, state: WorldState) -> Configuration {
        Configuration {
            program: program.normalize(),
            state,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transition {
    pub action: GroundAction,
    pub next: Configuration,
}

/// A complete execution: the actions performed and the state reached.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Execution {
    pub trace: Vec<GroundAction>,
    pub state: WorldState,
}

fn binding(env: &Env, bat: &BasicActionTheory) -> Vec<(Sym, Sym)> {
    env.iter()
        .map(|(v, o)| (v.clone(), bat.domain().name(*o).clone()))
        .collect()
}

/// Single-step transitions of `p` (free variables resolved through `env`)
/// in state `w`. Residual programs are ground. With `filter`, only
/// transitions performing exactly that action are produced.
pub(crate) fn trans_with(
    p: &Program,
    env: &mut Env,
    w: &WorldState,
    bat: &BasicActionTheory,
    filter: Option<&GroundAction>,
    out: &mut Vec<(GroundAction, Program)>,
) -> Result<()> {
    match p {
        Program::Nil | Program::Test(_) => {}
        Program::Action(t) => {
            let (ty, decl) = bat.action_type(&t.name)?;
            if decl.params.len() != t.args.len() {
                return Err(Error::ArityMismatch {
                    symbol: t.name.to_string(),
                    expected: decl.params.len(),
                    found: t.args.len(),
                });
            }
            let mut args = Vec::with_capacity(t.args.len());
            for a in &t.args {
                args.push(resolve_term(a, bat.vocab(), env)?);
            }
            if let Some(f) = filter {
                if f.name != t.name
                    || f.args.len() != args.len()
                    || f.args
                        .iter()
                        .zip(&args)
                        .any(|(x, &o)| x != bat.domain().name(o))
                {
                    return Ok(());
                }
            }
            if bat.poss_indexed(ty, &args, w) {
                out.push((bat.make_action(ty, &args), Program::Nil));
            }
        }
        Program::Seq(p1, p2) => {
            let start = out.len();
            trans_with(p1, env, w, bat, filter, out)?;
            if out.len() > start {
                let rest = p2.substitute(&binding(env, bat));
                for item in &mut out[start..] {
                    let r = std::mem::replace(&mut item.1, Program::Nil);
                    item.1 = Program::seq(r, rest.clone());
                }
            }
            if final_with(p1, env, w, bat)? {
                trans_with(p2, env, w, bat, filter, out)?;
            }
        }
        Program::Choice(p1, p2) => {
            trans_with(p1, env, w, bat, filter, out)?;
            trans_with(p2, env, w, bat, filter, out)?;
        }
        Program::Pick(v, body) => {
            for o in 0..bat.domain().len() as u32 {
                env.push(v.clone(), o);
                let r = trans_with(body, env, w, bat, filter, out);
                env.pop();
                r?;
            }
        }
        Program::Star(body) => {
            let start = out.len();
            trans_with(body, env, w, bat, filter, out)?;
            if out.len() > start {
                let again = Program::star(body.substitute(&binding(env, bat)));
                for item in &mut out[start..] {
                    let r = std::mem::replace(&mut item.1, Program::Nil);
                    item.1 = Program::seq(r, again.clone());
                }
            }
        }
        Program::Interleave(p1, p2) => {
            let start = out.len();
            trans_with(p1, env, w, bat, filter, out)?;
            let mid = out.len();
            trans_with(p2, env, w, bat, filter, out)?;
            if out.len() > start {
                let b = binding(env, bat);
                if mid > start {
                    let right = p2.substitute(&b);
                    for item in &mut out[start..mid] {
                        let r = std::mem::replace(&mut item.1, Program::Nil);
                        item.1 = Program::interleave(r, right.clone());
                    }
                }
                if out.len() > mid {
                    let left = p1.substitute(&b);
                    for item in &mut out[mid..] {
                        let r = std::mem::replace(&mut item.1, Program::Nil);
                        item.1 = Program::interleave(left.clone(), r);
                    }
                }
            }
        }
    }
    Ok(())
}

pub(crate) fn final_with(
    p: &Program,
    env: &mut Env,
    w: &WorldState,
    bat: &BasicActionTheory,
) -> Result<bool> {
    Ok(match p {
        Program::Nil | Program::Star(_) => true,
        Program::Action(_) => false,
        Program::Test(phi) => eval_in(phi, w, bat.vocab(), env)?,
        Program::Seq(p1, p2) | Program::Interleave(p1, p2) => {
            final_with(p1, env, w, bat)? && final_with(p2, env, w, bat)?
        }
        Program::Choice(p1, p2) => final_with(p1, env, w, bat)? || final_with(p2, env, w, bat)?,
        Program::Pick(v, body) => {
            let mut any = false;
            for o in 0..bat.domain().len() as u32 {
                env.push(v.clone(), o);
                let r = final_with(body, env, w, bat);
                env.pop();
                if r? {
                    any = true;
                    break;
                }
            }
            any
        }
    })
}

/// Normalized, deduplicated, canonically ordered single-step successors.
pub(crate) fn successors(
    p: &Program,
    w: &WorldState,
    bat: &BasicActionTheory,
    filter: Option<&GroundAction>,
) -> Result<Vec<(GroundAction, Program)>> {
    let mut out = Vec::new();
    trans_with(p, &mut Env::new(), w, bat, filter, &mut out)?;
    let mut out: Vec<((usize, Vec<u32>), GroundAction, Program)> = out
        .into_iter()
        .map(|(a, r)| (bat.action_key(&a), a, r.normalize()))
        .collect();
    out.sort();
    out.dedup();
    Ok(out.into_iter().map(|(_, a, r)| (a, r)).collect())
}

/// Groups successors by action and computes each successor state once.
fn expand(
    c: &Configuration,
    bat: &BasicActionTheory,
) -> Result<Vec<(GroundAction, Program, WorldState)>> {
    let succ = successors(&c.program, &c.state, bat, None)?;
    let mut out = Vec::with_capacity(succ.len());
    let mut last: Option<(GroundAction, WorldState)> = None;
    for (a, r) in succ {
        let w = match &last {
            Some((b, w)) if *b == a => w.clone(),
            _ => {
                let w = bat.step(&a, &c.state)?;
                last = Some((a.clone(), w.clone()));
                w
            }
        };
        out.push((a, r, w));
    }
    Ok(out)
}

/// All `(a, c')` with `Trans(c, c')`, canonically ordered.
pub fn trans(c: &Configuration, bat: &BasicActionTheory) -> Result<Vec<Transition>> {
    Ok(expand(c, bat)?
        .into_iter()
        .map(|(action, program, state)| Transition {
            action,
            next: Configuration { program, state },
        })
        .collect())
}

pub fn is_final(p: &Program, w: &WorldState, bat: &BasicActionTheory) -> Result<bool> {
    final_with(p, &mut Env::new(), w, bat)
}

/// Complete executions of `p` from `w`, sorted by trace. Loops are cut
/// where a configuration repeats along the current path, so for programs
/// with iteration every distinct end state is covered but not every
/// trace of unbounded length.
pub fn do_executions(
    p: &Program,
    w: &WorldState,
    bat: &BasicActionTheory,
    budget: usize,
) -> Result<Vec<Execution>> {
    let mut found = HashSet::new();
    let mut on_path = HashSet::new();
    let mut trace = Vec::new();
    let mut visited = 0usize;
    let root = Configuration::new(p.clone(), w.clone());
    dfs(
        &root,
        bat,
        budget,
        &mut visited,
        &mut on_path,
        &mut trace,
        &mut found,
    )?;
    Ok(sorted_executions(found, bat))
}

fn dfs(
    c: &Configuration,
    bat: &BasicActionTheory,
    budget: usize,
    visited: &mut usize,
    on_path: &mut HashSet<Configuration>,
    trace: &mut Vec<GroundAction>,
    found: &mut HashSet<Execution>,
) -> Result<()> {
    *visited += 1;
    if *visited > budget {
        return Err(Error::ConfigurationBudgetExceeded { cap: budget });
    }
    if is_final(&c.program, &c.state, bat)? {
        found.insert(Execution {
            trace: trace.clone(),
            state: c.state.clone(),
        });
    }
    on_path.insert(c.clone());
    for (a, program, state) in expand(c, bat)? {
        let next = Configuration { program, state };
        if on_path.contains(&next) {
            continue;
        }
        trace.push(a);
        let r = dfs(&next, bat, budget, visited, on_path, trace, found);
        trace.pop();
        r?;
    }
    on_path.remove(c);
    Ok(())
}

/// Every complete execution with at most `max_len` actions, without any
/// loop pruning. Sorted by length, then canonical action order.
pub fn executions_up_to(
    p: &Program,
    w: &WorldState,
    bat: &BasicActionTheory,
    max_len: usize,
) -> Result<Vec<Execution>> {
    fn go(
        c: &Configuration,
        bat: &BasicActionTheory,
        left: usize,
        trace: &mut Vec<GroundAction>,
        out: &mut HashSet<Execution>,
    ) -> Result<()> {
        if is_final(&c.program, &c.state, bat)? {
            out.insert(Execution {
                trace: trace.clone(),
                state: c.state.clone(),
            });
        }
        if left == 0 {
            return Ok(());
        }
        for (a, program, state) in expand(c, bat)? {
            trace.push(a);
            let r = go(&Configuration { program, state }, bat, left - 1, trace, out);
            trace.pop();
            r?;
        }
        Ok(())
    }
    let mut found = HashSet::new();
    go(
        &Configuration::new(p.clone(), w.clone()),
        bat,
        max_len,
        &mut Vec::new(),
        &mut found,
    )?;
    Ok(sorted_executions(found, bat))
}

fn sorted_executions(found: HashSet<Execution>, bat: &BasicActionTheory) -> Vec<Execution> {
    let mut out: Vec<Execution> = found.into_iter().collect();
    out.sort_by_cached_key(|e| {
        (
            e.trace.len(),
            e.trace
                .iter()
                .map(|a| bat.action_key(a))
                .collect::<Vec<_>>(),
        )
    });
    out
}

/// Breadth-first search over configurations; calls `visit` on each new
/// configuration with a shortest trace reaching it. Stops early when
/// `visit` returns `false`.
fn explore(
    p: &Program,
    w: &WorldState,
    bat: &BasicActionTheory,
    budget: usize,
    mut visit: impl FnMut(
        &Configuration,
        &[GroundAction],
        &[(GroundAction, Program, WorldState)],
    ) -> Result<bool>,
) -> Result<()> {
    let root = Configuration::new(p.clone(), w.clone());
    let mut index: HashMap<Configuration, usize> = HashMap::new();
    let mut nodes: Vec<(Configuration, Option<(usize, GroundAction)>)> = Vec::new();
    index.insert(root.clone(), 0);
    nodes.push((root, None));
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        let c = nodes[i].0.clone();
        let succ = expand(&c, bat)?;
        let mut trace = Vec::new();
        let mut cur = i;
        while let Some((prev, a)) = &nodes[cur].1 {
            trace.push(a.clone());
            cur = *prev;
        }
        trace.reverse();
        if !visit(&c, &trace, &succ)? {
            return Ok(());
        }
        for (a, program, state) in succ {
            let next = Configuration { program, state };
            if index.contains_key(&next) {
                continue;
            }
            if nodes.len() >= budget {
                return Err(Error::ConfigurationBudgetExceeded { cap: budget });
            }
            index.insert(next.clone(), nodes.len());
            queue.push_back(nodes.len());
            nodes.push((next, Some((i, a))));
        }
    }
    Ok(())
}

/// Distinct end states of complete executions, each with a shortest
/// witness trace, in breadth-first discovery order.
pub fn do_end_states(
    p: &Program,
    w: &WorldState,
    bat: &BasicActionTheory,
    budget: usize,
) -> Result<Vec<Execution>> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    explore(p, w, bat, budget, |c, trace, _| {
        if is_final(&c.program, &c.state, bat)? && seen.insert(c.state.clone()) {
            out.push(Execution {
                trace: trace.to_vec(),
                state: c.state.clone(),
            });
        }
        Ok(true)
    })?;
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SdWitness {
    pub trace: Vec<GroundAction>,
    pub first: Program,
    pub second: Program,
}

/// Whether every reachable trace leaves a unique (normalized) remaining
/// program; on failure a trace with two distinct residuals.
pub fn is_situation_determined(
    p: &Program,
    w: &WorldState,
    bat: &BasicActionTheory,
    budget: usize,
) -> Result<Option<SdWitness>> {
    let mut witness = None;
    explore(p, w, bat, budget, |_, trace, succ| {
        for pair in succ.windows(2) {
            if pair[0].0 == pair[1].0 {
                let mut t = trace.to_vec();
                t.push(pair[0].0.clone());
                witness = Some(SdWitness {
                    trace: t,
                    first: pair[0].1.clone(),
                    second: pair[1].1.clone(),
                });
                return Ok(false);
            }
        }
        Ok(true)
    })?;
    Ok(witness)
}

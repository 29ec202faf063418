//! Explaining low-level traces in high-level terms: the largest mapped
//! prefix, the inverse mapping, the two constraints that make it well
//! defined, and forecasting the next high-level action.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use serde::Serialize;

use crate::bat::{BasicActionTheory, Situation};
use crate::congolog::{do_executions, is_final, successors, Program};
use crate::error::{Error, Result};
use crate::kernel::{GroundAction, WorldState};
use crate::mapping::TheoryPair;

fn strings(trace: &[GroundAction]) -> Vec<String> {
    trace.iter().map(|a| a.to_string()).collect()
}

/// States along `trace` from low-level model `model`; `NonExecutableTrace`
/// carries the 1-based position of the first impossible action.
fn states_along(
    low: &BasicActionTheory,
    trace: &[GroundAction],
    model: usize,
) -> Result<Vec<WorldState>> {
    let mut w = low.initial_model(model)?.clone();
    let mut out = vec![w.clone()];
    for (i, a) in trace.iter().enumerate() {
        if !low.poss(a, &w)? {
            return Err(Error::NonExecutableTrace {
                index: i + 1,
                action: a.to_string(),
            });
        }
        w = low.step(a, &w)?;
        out.push(w.clone());
    }
    Ok(out)
}

/// Runs `p` along `trace[from..]`. Returns every position `j` at which some
/// run over `trace[from..j]` may terminate, and the furthest position the
/// program can follow.
fn follow(
    p: &Program,
    low: &BasicActionTheory,
    states: &[WorldState],
    trace: &[GroundAction],
    from: usize,
) -> Result<(Vec<usize>, usize, BTreeSet<Program>)> {
    let mut configs: BTreeSet<Program> = BTreeSet::from([p.normalize()]);
    let mut complete = Vec::new();
    let mut j = from;
    loop {
        let mut fin = false;
        for c in &configs {
            if is_final(c, &states[j], low)? {
                fin = true;
                break;
            }
        }
        if fin {
            complete.push(j);
        }
        if j == trace.len() {
            return Ok((complete, j, configs));
        }
        let mut next = BTreeSet::new();
        for c in &configs {
            for (_, r) in successors(c, &states[j], low, Some(&trace[j]))? {
                next.insert(r);
            }
        }
        if next.is_empty() {
            return Ok((complete, j, configs));
        }
        configs = next;
        j += 1;
    }
}

/// Complete refinements found inside a trace: `edges[k]` lists `(α, j)`
/// such that `trace[k..j]` is a nonempty complete execution of `m(α)`,
/// for every `k` that ends a complete run of refinements from the start.
struct SegmentGraph {
    states: Vec<WorldState>,
    completion: BTreeSet<usize>,
    edges: BTreeMap<usize, Vec<(GroundAction, usize)>>,
}

fn segment_graph(pair: &TheoryPair, trace: &[GroundAction], model: usize) -> Result<SegmentGraph> {
    let states = states_along(&pair.low, trace, model)?;
    let mut completion = BTreeSet::from([0usize]);
    let mut edges: BTreeMap<usize, Vec<(GroundAction, usize)>> = BTreeMap::new();
    let mut work = BTreeSet::from([0usize]);
    while let Some(k) = work.pop_first() {
        let mut out = Vec::new();
        for a in pair.live_instances(&states[k])?.iter() {
            let p = pair.mapping.map_action(a)?;
            let (ends, _, _) = follow(&p, &pair.low, &states, trace, k)?;
            for j in ends.into_iter().filter(|&j| j > k) {
                if completion.insert(j) {
                    work.insert(j);
                }
                out.push((a.clone(), j));
            }
        }
        edges.insert(k, out);
    }
    Ok(SegmentGraph {
        states,
        completion,
        edges,
    })
}

/// Length of the largest prefix of `trace` that is a complete execution of
/// any sequence of high-level refinements, from low-level model `model`.
pub fn lp(pair: &TheoryPair, trace: &[GroundAction], model: usize) -> Result<usize> {
    Ok(*segment_graph(pair, trace, model)?
        .completion
        .last()
        .expect("the empty prefix always completes"))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceExplanation {
    pub model: usize,
    pub prefix_end: usize,
    pub hl_sequence: Vec<GroundAction>,
    pub segments: Vec<Vec<GroundAction>>,
    pub residual: Vec<GroundAction>,
    /// High-level actions whose refinement the residual may be the start of.
    pub mid_refinement_of: Vec<GroundAction>,
}

impl TraceExplanation {
    pub fn report(&self) -> ExplanationReport {
        ExplanationReport {
            model: self.model,
            prefix_end: self.prefix_end,
            hl_sequence: strings(&self.hl_sequence),
            segments: self
                .hl_sequence
                .iter()
                .zip(&self.segments)
                .map(|(a, s)| (strings(s), a.to_string()))
                .collect(),
            residual: strings(&self.residual),
            mid_refinement_of: strings(&self.mid_refinement_of),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ExplanationReport {
    pub model: usize,
    pub prefix_end: usize,
    pub hl_sequence: Vec<String>,
    pub segments: Vec<(Vec<String>, String)>,
    pub residual: Vec<String>,
    pub mid_refinement_of: Vec<String>,
}

type Explained = (Vec<GroundAction>, Vec<usize>);

/// Up to two distinct high-level sequences explaining `trace[k..end]`,
/// each with the positions where its segments end.
fn explanations(
    g: &SegmentGraph,
    k: usize,
    end: usize,
    memo: &mut HashMap<usize, Vec<Explained>>,
) -> Vec<Explained> {
    if k == end {
        return vec![(Vec::new(), Vec::new())];
    }
    if let Some(v) = memo.get(&k) {
        return v.clone();
    }
    let mut found: BTreeMap<Vec<GroundAction>, Vec<usize>> = BTreeMap::new();
    for (a, j) in g.edges.get(&k).into_iter().flatten() {
        if *j > end || !g.completion.contains(j) {
            continue;
        }
        for (seq, cuts) in explanations(g, *j, end, memo) {
            let mut s = vec![a.clone()];
            s.extend(seq);
            let mut c = vec![*j];
            c.extend(cuts);
            found.entry(s).or_insert(c);
        }
    }
    let v: Vec<Explained> = found.into_iter().take(2).collect();
    memo.insert(k, v.clone());
    v
}

/// The inverse mapping without requiring Constraint 1: reports
/// `AmbiguousExplanation` when two high-level sequences fit.
pub fn invert_unchecked(
    pair: &TheoryPair,
    trace: &[GroundAction],
    model: usize,
) -> Result<TraceExplanation> {
    let g = segment_graph(pair, trace, model)?;
    let end = *g.completion.last().expect("nonempty");
    let mut found = explanations(&g, 0, end, &mut HashMap::new());
    if found.len() > 1 {
        return Err(Error::AmbiguousExplanation {
            prefix: end,
            candidates: found
                .iter()
                .map(|(s, _)| format!("[{}]", strings(s).join(", ")))
                .collect::<Vec<_>>()
                .join(" and "),
        });
    }
    let (hl_sequence, cuts) = found.pop().expect("a path to the last completion point");
    let mut segments = Vec::new();
    let mut start = 0;
    for c in cuts {
        segments.push(trace[start..c].to_vec());
        start = c;
    }
    let residual = trace[end..].to_vec();
    let mut mid = Vec::new();
    if !residual.is_empty() {
        for a in pair.live_instances(&g.states[end])?.iter() {
            let p = pair.mapping.map_action(a)?;
            let (_, reach, _) = follow(&p, &pair.low, &g.states, trace, end)?;
            if reach == trace.len() {
                mid.push(a.clone());
            }
        }
    }
    Ok(TraceExplanation {
        model,
        prefix_end: end,
        hl_sequence,
        segments,
        residual,
        mid_refinement_of: mid,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClauseWitness {
    pub ll_model: usize,
    /// Low-level actions leading to the state where the clause fails.
    pub ll_trace: Vec<String>,
    pub hl_action: String,
    /// The complete execution of the action's template at fault.
    pub execution: Vec<String>,
    pub other: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Clause {
    pub holds: bool,
    pub witness: Option<ClauseWitness>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Constraint1Verdict {
    /// Refinements of distinct high-level actions are disjoint.
    pub a: Clause,
    /// A complete refinement cannot be extended further.
    pub b: Clause,
    /// Every refinement performs at least one action.
    pub c: Clause,
}

impl Constraint1Verdict {
    pub fn holds(&self) -> bool {
        self.a.holds && self.b.holds && self.c.holds
    }
}

/// Checks the three clauses of Constraint 1 at every low-level state
/// reachable by primitive actions, for every pair of high-level ground
/// actions.
pub fn verify_constraint1(pair: &TheoryPair, budget: usize) -> Result<Constraint1Verdict> {
    let lts = pair.ll_reachable_states(budget)?;
    let mut clauses: [Option<ClauseWitness>; 3] = [None, None, None];
    for node in 0..lts.len() {
        if clauses.iter().all(|c| c.is_some()) {
            break;
        }
        let w = &lts.nodes[node];
        let live = pair.live_instances(w)?;
        let witness = |a: &GroundAction, exec: &[GroundAction], other: Option<&GroundAction>| {
            let (seed, trace) = lts.path_to(node);
            ClauseWitness {
                ll_model: pair
                    .low
                    .initial_models()
                    .iter()
                    .position(|m| *m == lts.nodes[seed])
                    .unwrap_or(0),
                ll_trace: strings(&trace),
                hl_action: a.to_string(),
                execution: strings(exec),
                other: other.map(|o| o.to_string()),
            }
        };
        for a in live.iter() {
            let p = pair.mapping.map_action(a)?;
            for e in do_executions(&p, w, &pair.low, budget)? {
                if clauses[2].is_none() && e.trace.is_empty() {
                    clauses[2] = Some(witness(a, &e.trace, None));
                }
                let mut states = vec![w.clone()];
                for x in &e.trace {
                    states.push(pair.low.step(x, states.last().unwrap())?);
                }
                if clauses[1].is_none() {
                    let (_, reach, configs) = follow(&p, &pair.low, &states, &e.trace, 0)?;
                    debug_assert_eq!(reach, e.trace.len());
                    let mut extends = false;
                    for c in &configs {
                        if !successors(c, &e.state, &pair.low, None)?.is_empty() {
                            extends = true;
                            break;
                        }
                    }
                    if extends {
                        clauses[1] = Some(witness(a, &e.trace, None));
                    }
                }
                if clauses[0].is_none() {
                    for b in live.iter().filter(|b| *b != a) {
                        let q = pair.mapping.map_action(b)?;
                        let (_, reach, _) = follow(&q, &pair.low, &states, &e.trace, 0)?;
                        if reach == e.trace.len() {
                            clauses[0] = Some(witness(a, &e.trace, Some(b)));
                            break;
                        }
                    }
                }
            }
        }
    }
    let [a, b, c] = clauses.map(|w| Clause {
        holds: w.is_none(),
        witness: w,
    });
    Ok(Constraint1Verdict { a, b, c })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Constraint2Verdict {
    pub holds: bool,
    pub ll_model: Option<usize>,
    /// An executable trace that no sequence of refinements can produce,
    /// even partially.
    pub counterexample: Option<Vec<String>>,
}

/// Checks that every executable low-level trace is a partial execution of
/// some sequence of high-level refinements, by exploring pairs of a
/// low-level state and the set of refinements in progress.
pub fn verify_constraint2(pair: &TheoryPair, budget: usize) -> Result<Constraint2Verdict> {
    // (state, residual templates, at a refinement boundary)
    type Node = (WorldState, BTreeSet<Program>, bool);
    let mut index: HashMap<Node, usize> = HashMap::new();
    let mut nodes: Vec<Node> = Vec::new();
    let mut parent: Vec<Option<(usize, GroundAction)>> = Vec::new();
    let mut queue = VecDeque::new();
    let mut seed_of = Vec::new();
    for (m, w) in pair.low.initial_models().iter().enumerate() {
        let n: Node = (w.clone(), BTreeSet::new(), true);
        if !index.contains_key(&n) {
            index.insert(n.clone(), nodes.len());
            queue.push_back(nodes.len());
            nodes.push(n);
            parent.push(None);
            seed_of.push(m);
        }
    }
    let trace_to = |mut n: usize, parent: &[Option<(usize, GroundAction)>]| {
        let mut out = Vec::new();
        while let Some((p, a)) = &parent[n] {
            out.push(a.clone());
            n = *p;
        }
        out.reverse();
        (n, out)
    };
    while let Some(n) = queue.pop_front() {
        let (w, residuals, start) = nodes[n].clone();
        let mut boundary = start;
        for r in &residuals {
            if boundary {
                break;
            }
            boundary = is_final(r, &w, &pair.low)?;
        }
        let fresh: Vec<Program> = if boundary {
            pair.live_instances(&w)?
                .iter()
                .map(|a| pair.mapping.map_action(a))
                .collect::<Result<_>>()?
        } else {
            Vec::new()
        };
        for b in pair.low.executable_actions(&w) {
            let mut next = BTreeSet::new();
            for p in residuals.iter().chain(&fresh) {
                for (_, r) in successors(p, &w, &pair.low, Some(&b))? {
                    next.insert(r);
                }
            }
            if next.is_empty() {
                let (root, mut trace) = trace_to(n, &parent);
                trace.push(b);
                return Ok(Constraint2Verdict {
                    holds: false,
                    ll_model: Some(seed_of[root]),
                    counterexample: Some(strings(&trace)),
                });
            }
            let node: Node = (pair.low.step(&b, &w)?, next, false);
            if !index.contains_key(&node) {
                if nodes.len() >= budget {
                    return Err(Error::StateSpaceBudgetExceeded { cap: budget });
                }
                index.insert(node.clone(), nodes.len());
                queue.push_back(nodes.len());
                nodes.push(node);
                parent.push(Some((n, b)));
                seed_of.push(0);
            }
        }
    }
    Ok(Constraint2Verdict {
        holds: true,
        ll_model: None,
        counterexample: None,
    })
}

/// Caches a Constraint 1 result for one theory pair so that explanations
/// can rely on it.
pub struct Monitor<'a> {
    pub pair: &'a TheoryPair,
    pub budget: usize,
    constraint1: Option<Constraint1Verdict>,
}

impl<'a> Monitor<'a> {
    pub fn new(pair: &'a TheoryPair, budget: usize) -> Monitor<'a> {
        Monitor {
            pair,
            budget,
            constraint1: None,
        }
    }

    pub fn verify_constraint1(&mut self) -> Result<&Constraint1Verdict> {
        if self.constraint1.is_none() {
            self.constraint1 = Some(verify_constraint1(self.pair, self.budget)?);
        }
        Ok(self.constraint1.as_ref().expect("just set"))
    }

    /// The unique high-level explanation of the largest mapped prefix.
    /// Requires Constraint 1 to have been verified to hold.
    pub fn invert(&self, trace: &[GroundAction], model: usize) -> Result<TraceExplanation> {
        match &self.constraint1 {
            Some(v) if v.holds() => invert_unchecked(self.pair, trace, model),
            _ => Err(Error::ConstraintNotVerified),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ForecastStatus {
    Satisfiable,
    Impossible,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Forecast {
    /// Ground high-level actions executable after the sequence in at least
    /// one high-level model, canonically ordered.
    pub satisfiable: Vec<GroundAction>,
}

impl Forecast {
    pub fn status(&self, a: &GroundAction) -> ForecastStatus {
        if self.satisfiable.contains(a) {
            ForecastStatus::Satisfiable
        } else {
            ForecastStatus::Impossible
        }
    }
}

/// High-level actions that may come next after `hl_sequence`.
pub fn forecast_next(high: &BasicActionTheory, hl_sequence: &[GroundAction]) -> Result<Forecast> {
    let mut found = BTreeSet::new();
    for m in 0..high.initial_models().len() {
        let s = Situation {
            model: m,
            trace: hl_sequence.to_vec(),
        };
        if !high.executable(&s)? {
            continue;
        }
        let w = high.state_of(&s)?;
        for a in high.executable_actions(&w) {
            found.insert((high.action_key(&a), a));
        }
    }
    Ok(Forecast {
        satisfiable: found.into_iter().map(|(_, a)| a).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bat::DEFAULT_STATE_BUDGET as B;
    use crate::fixtures;
    use crate::frontend::parse_actions;

    const A_VEC: &str = "takeRoad(123, Rd_a, W, L1), takeRoad(123, Rd_b, L1, L2)";

    #[test]
    fn largest_prefix() {
        let p = fixtures::logistics().unwrap();
        assert_eq!(lp(&p, &[], 0).unwrap(), 0);
        assert_eq!(lp(&p, &parse_actions(A_VEC).unwrap(), 0).unwrap(), 2);
        let one = parse_actions("takeRoad(123, Rd_a, W, L1)").unwrap();
        assert_eq!(lp(&p, &one, 0).unwrap(), 0);
        let bad = parse_actions("unload(123)").unwrap();
        assert!(matches!(
            lp(&p, &bad, 0),
            Err(Error::NonExecutableTrace { index: 1, .. })
        ));
    }

    #[test]
    fn explanation_and_residual() {
        let p = fixtures::logistics().unwrap();
        let mut mon = Monitor::new(&p, B);
        let trace = parse_actions(A_VEC).unwrap();
        assert_eq!(
            mon.invert(&trace, 0).unwrap_err(),
            Error::ConstraintNotVerified
        );
        assert!(mon.verify_constraint1().unwrap().holds());
        let e = mon.invert(&trace, 0).unwrap();
        assert_eq!(
            e.hl_sequence,
            parse_actions("takeRoute(123, Rt_A, W, L2)").unwrap()
        );
        assert!(e.residual.is_empty());
        let longer = parse_actions(&format!("{A_VEC}, takeRoad(123, Rd_f, L2, L4)")).unwrap();
        let e = mon.invert(&longer, 0).unwrap();
        assert_eq!(e.prefix_end, 2);
        assert_eq!(e.residual.len(), 1);
        assert_eq!(
            e.mid_refinement_of,
            parse_actions("takeRoute(123, Rt_C, L2, Cf)").unwrap()
        );
        assert!(mon.invert(&[], 0).unwrap().hl_sequence.is_empty());
    }

    #[test]
    fn overlapping_refinements_break_disjointness() {
        let p = fixtures::overlap().unwrap();
        let v = verify_constraint1(&p, B).unwrap();
        assert!(!v.a.holds);
        assert_eq!(v.a.witness.unwrap().execution, vec!["D".to_string()]);
        assert!(v.b.holds && v.c.holds);
        let d = parse_actions("D").unwrap();
        assert!(matches!(
            invert_unchecked(&p, &d, 0),
            Err(Error::AmbiguousExplanation { prefix: 1, .. })
        ));
    }

    #[test]
    fn repeated_unload_escapes_every_refinement() {
        let p = fixtures::logistics().unwrap();
        let v = verify_constraint2(&p, B).unwrap();
        assert!(!v.holds);
        let t = v.counterexample.unwrap();
        assert_eq!(&t[t.len() - 2..], ["unload(123)", "unload(123)"]);
    }

    #[test]
    fn constraint2_on_the_one_shot_variant() {
        let p = fixtures::logistics_oneshot().unwrap();
        assert!(verify_constraint2(&p, B).unwrap().holds);
        assert!(verify_constraint1(&p, B).unwrap().holds());
    }

    #[test]
    fn forecasting() {
        let p = fixtures::logistics().unwrap();
        let after = parse_actions("takeRoute(123, Rt_A, W, L2)").unwrap();
        let f = forecast_next(&p.high, &after).unwrap();
        for a in [
            "takeRoute(123, Rt_B, L2, Cf)",
            "takeRoute(123, Rt_C, L2, Cf)",
        ] {
            assert_eq!(
                f.status(&parse_actions(a).unwrap()[0]),
                ForecastStatus::Satisfiable
            );
        }
        let d = parse_actions("deliver(123)").unwrap();
        assert_eq!(f.status(&d[0]), ForecastStatus::Impossible);
        let f0 = forecast_next(&p.high, &[]).unwrap();
        assert_eq!(
            f0.satisfiable,
            parse_actions("takeRoute(123, Rt_A, W, L2)").unwrap()
        );
        assert!(forecast_next(&p.high, &d).unwrap().satisfiable.is_empty());
    }
}

//! High-level plan search, projection and stepwise refinement of plans
//! into low-level traces.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::bat::BasicActionTheory;
use crate::congolog::{do_end_states, do_executions};
use crate::error::{Error, Result};
use crate::kernel::{CompiledFormula, Formula, GroundAction, WorldState};
use crate::mapping::TheoryPair;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// Executable with the goal true in every initial model.
    Entailed,
    /// Executable with the goal true in at least one initial model.
    Satisfiable,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlanRequest {
    pub goal: Formula,
    pub horizon: usize,
    pub mode: Mode,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PlanOutcome {
    Found(Vec<GroundAction>),
    /// The reachable belief space was exhausted without meeting the goal.
    NoPlan,
    /// Unexplored beliefs remain beyond the horizon.
    HorizonExhausted,
}

/// One state per initial model; `None` marks a model in which the plan so
/// far is not executable.
type Belief = Vec<Option<WorldState>>;

fn step_belief(
    bat: &BasicActionTheory,
    mode: Mode,
    b: &Belief,
    a: &GroundAction,
) -> Option<Belief> {
    let mut out = Vec::with_capacity(b.len());
    let mut alive = false;
    for w in b {
        let next = match w {
            Some(w) if bat.poss(a, w).unwrap_or(false) => Some(bat.step(a, w).ok()?),
            Some(_) if mode == Mode::Entailed => return None,
            _ => None,
        };
        alive |= next.is_some();
        out.push(next);
    }
    alive.then_some(out)
}

fn goal_holds(goal: &CompiledFormula, mode: Mode, b: &Belief) -> bool {
    match mode {
        Mode::Entailed => b
            .iter()
            .all(|w| w.as_ref().is_some_and(|w| goal.eval(w, &[]))),
        Mode::Satisfiable => b.iter().flatten().any(|w| goal.eval(w, &[])),
    }
}

/// Breadth-first search over beliefs. Actions are tried in canonical order
/// and each belief keeps its first-discovered parent, so the plan returned
/// is the shortest, and lexicographically least among the shortest.
pub fn plan(bat: &BasicActionTheory, req: &PlanRequest, budget: usize) -> Result<PlanOutcome> {
    let goal = CompiledFormula::compile(&req.goal, bat.vocab(), &[])?;
    let mut actions = Vec::new();
    for ty in 0..bat.actions().len() {
        bat.for_each_instance(ty, |args| actions.push(bat.make_action(ty, args)));
    }
    let start: Belief = bat.initial_models().iter().cloned().map(Some).collect();
    let mut nodes: Vec<Belief> = vec![start.clone()];
    let mut parent: Vec<Option<(usize, usize)>> = vec![None];
    let mut index: HashMap<Belief, usize> = HashMap::from([(start, 0)]);
    let mut frontier = vec![0usize];
    let mut depth = 0;
    let path = |mut n: usize, parent: &[Option<(usize, usize)>]| {
        let mut out = Vec::new();
        while let Some((p, a)) = parent[n] {
            out.push(actions[a].clone());
            n = p;
        }
        out.reverse();
        out
    };
    loop {
        if let Some(&n) = frontier
            .iter()
            .find(|&&n| goal_holds(&goal, req.mode, &nodes[n]))
        {
            return Ok(PlanOutcome::Found(path(n, &parent)));
        }
        if frontier.is_empty() {
            return Ok(PlanOutcome::NoPlan);
        }
        if depth == req.horizon {
            return Ok(PlanOutcome::HorizonExhausted);
        }
        let expand = |&n: &usize| -> Vec<(usize, Belief)> {
            actions
                .iter()
                .enumerate()
                .filter_map(|(i, a)| step_belief(bat, req.mode, &nodes[n], a).map(|b| (i, b)))
                .collect()
        };
        let succ: Vec<Vec<(usize, Belief)>> = if frontier.len() > 8 {
            frontier.par_iter().map(expand).collect()
        } else {
            frontier.iter().map(expand).collect()
        };
        let mut next = Vec::new();
        for (&n, list) in frontier.iter().zip(succ) {
            for (a, b) in list {
                if index.contains_key(&b) {
                    continue;
                }
                if nodes.len() >= budget {
                    return Err(Error::StateSpaceBudgetExceeded { cap: budget });
                }
                index.insert(b.clone(), nodes.len());
                next.push(nodes.len());
                nodes.push(b);
                parent.push(Some((n, a)));
            }
        }
        frontier = next;
        depth += 1;
    }
}

/// Planning over the high-level theory of a pair.
pub fn plan_hl(pair: &TheoryPair, req: &PlanRequest, budget: usize) -> Result<PlanOutcome> {
    plan(&pair.high, req, budget)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Projection {
    Entailed,
    SatisfiableOnly,
    Unsatisfiable,
}

/// Whether `plan` is executable and ends in a state satisfying `phi`, in
/// all, some or none of the initial models.
pub fn project(
    bat: &BasicActionTheory,
    plan: &[GroundAction],
    phi: &Formula,
) -> Result<Projection> {
    let goal = CompiledFormula::compile(phi, bat.vocab(), &[])?;
    let mut yes = 0;
    for w0 in bat.initial_models() {
        let mut w = w0.clone();
        let mut ok = true;
        for a in plan {
            if !bat.poss(a, &w)? {
                ok = false;
                break;
            }
            w = bat.step(a, &w)?;
        }
        if ok && goal.eval(&w, &[]) {
            yes += 1;
        }
    }
    Ok(if yes == bat.initial_models().len() {
        Projection::Entailed
    } else if yes > 0 {
        Projection::SatisfiableOnly
    } else {
        Projection::Unsatisfiable
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Segment {
    pub hl_action: String,
    pub ll_actions: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RefinedPlan {
    pub model: usize,
    pub hl_plan: Vec<GroundAction>,
    pub segments: Vec<Vec<GroundAction>>,
    pub ll_trace: Vec<GroundAction>,
    pub final_state: WorldState,
}

impl RefinedPlan {
    pub fn segments_text(&self) -> Vec<Segment> {
        self.hl_plan
            .iter()
            .zip(&self.segments)
            .map(|(a, s)| Segment {
                hl_action: a.to_string(),
                ll_actions: s.iter().map(|x| x.to_string()).collect(),
            })
            .collect()
    }
}

/// Which low-level initial models a refinement is computed for.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RefineMode {
    Single(usize),
    PerModel,
}

/// Refines `plan` from low-level initial model `model`, committing to the
/// canonically first execution of each step. A blocked step is reported
/// as `NoRefinement` when no choice of earlier segments would have helped
/// and as `SoundnessAssumptionViolated` otherwise.
pub fn refine_from(
    pair: &TheoryPair,
    plan: &[GroundAction],
    model: usize,
    budget: usize,
) -> Result<RefinedPlan> {
    let w0 = pair.low.initial_model(model)?.clone();
    let mut w = w0.clone();
    let mut segments = Vec::new();
    let mut trace = Vec::new();
    for (i, a) in plan.iter().enumerate() {
        let p = pair.mapping.map_action(a)?;
        let execs = do_executions(&p, &w, &pair.low, budget)?;
        let Some(first) = execs.into_iter().next() else {
            let step = i + 1;
            if i == 0 {
                return Err(Error::NoRefinement { step });
            }
            let prefix = pair.mapping.map_action_sequence(&plan[..=i])?;
            return Err(
                if do_end_states(&prefix, &w0, &pair.low, budget)?.is_empty() {
                    Error::NoRefinement { step }
                } else {
                    Error::SoundnessAssumptionViolated { step }
                },
            );
        };
        trace.extend(first.trace.iter().cloned());
        segments.push(first.trace);
        w = first.state;
    }
    Ok(RefinedPlan {
        model,
        hl_plan: plan.to_vec(),
        segments,
        ll_trace: trace,
        final_state: w,
    })
}

pub fn refine_plan(
    pair: &TheoryPair,
    plan: &[GroundAction],
    mode: RefineMode,
    budget: usize,
) -> Result<Vec<RefinedPlan>> {
    match mode {
        RefineMode::Single(m) => Ok(vec![refine_from(pair, plan, m, budget)?]),
        RefineMode::PerModel => (0..pair.low.initial_models().len())
            .map(|m| refine_from(pair, plan, m, budget))
            .collect(),
    }
}

/// Every segment-wise refinement of `plan` from one low-level model, in
/// canonical order.
pub fn refinement_alternatives(
    pair: &TheoryPair,
    plan: &[GroundAction],
    model: usize,
    budget: usize,
) -> Result<Vec<RefinedPlan>> {
    fn go(
        pair: &TheoryPair,
        plan: &[GroundAction],
        w: &WorldState,
        segs: &mut Vec<Vec<GroundAction>>,
        out: &mut Vec<(Vec<Vec<GroundAction>>, WorldState)>,
        budget: usize,
    ) -> Result<()> {
        let Some(a) = plan.get(segs.len()) else {
            out.push((segs.clone(), w.clone()));
            return Ok(());
        };
        let p = pair.mapping.map_action(a)?;
        for e in do_executions(&p, w, &pair.low, budget)? {
            segs.push(e.trace);
            go(pair, plan, &e.state, segs, out, budget)?;
            segs.pop();
        }
        Ok(())
    }
    let w0 = pair.low.initial_model(model)?;
    let mut out = Vec::new();
    go(pair, plan, w0, &mut Vec::new(), &mut out, budget)?;
    Ok(out
        .into_iter()
        .map(|(segments, final_state)| RefinedPlan {
            model,
            hl_plan: plan.to_vec(),
            ll_trace: segments.concat(),
            segments,
            final_state,
        })
        .collect())
}

//! m-isomorphism, m-bisimulation and sound/complete abstraction checks.

mod bisim;

use std::collections::{HashMap, HashSet};

use serde::Serialize;

pub use bisim::{compute_bisimulation, BisimRelation, PruneReason};

use crate::bat::{for_each_tuple, reachable_states, Lts, PrimitiveMoves};
use crate::error::{Error, Result};
use crate::kernel::{simplify, CompiledFormula, GroundAction, WorldState};
use crate::mapping::TheoryPair;

/// `hl` and `ll` agree on every high-level fluent under the mapping.
pub fn m_isomorphic(pair: &TheoryPair, hl: &WorldState, ll: &WorldState) -> bool {
    pair.abstract_state(ll) == *hl
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Condition {
    /// A low-level initial model has no m-isomorphic high-level one.
    InitialModels,
    /// Mapped precondition and existence of a refinement disagree.
    Precondition,
    /// Mapped successor-state axiom and the state after a refinement
    /// disagree.
    Effect,
    /// A high-level initial model has no low-level partner.
    NoPartner,
}

/// A replayable counterexample: start from the given low-level initial
/// model and perform `ll_trace`; then refine `hl_action`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Counterexample {
    pub condition: Condition,
    pub hl_model: Option<usize>,
    pub ll_model: Option<usize>,
    pub ll_trace: Vec<String>,
    pub hl_action: Option<String>,
    pub refinement: Vec<String>,
    pub detail: String,
}

impl Counterexample {
    fn new(condition: Condition, detail: String) -> Counterexample {
        Counterexample {
            condition,
            hl_model: None,
            ll_model: None,
            ll_trace: Vec::new(),
            hl_action: None,
            refinement: Vec::new(),
            detail,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub holds: bool,
    pub witness: Option<Counterexample>,
}

impl Verdict {
    fn ok() -> Verdict {
        Verdict {
            holds: true,
            witness: None,
        }
    }

    fn fail(c: Counterexample) -> Verdict {
        Verdict {
            holds: false,
            witness: Some(c),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AbstractionVerdict {
    pub sound: bool,
    pub complete: bool,
    pub witnesses: Vec<Counterexample>,
}

fn strings(trace: &[GroundAction]) -> Vec<String> {
    trace.iter().map(|a| a.to_string()).collect()
}

fn seed_model(pair: &TheoryPair, lts: &Lts, seed: usize) -> Option<usize> {
    pair.low
        .initial_models()
        .iter()
        .position(|w| *w == lts.nodes[seed])
}

/// Mapped, action-instantiated successor-state axioms, compiled per
/// high-level ground action.
struct EffectCache<'a> {
    pair: &'a TheoryPair,
    cache: HashMap<GroundAction, Vec<CompiledFormula>>,
}

impl EffectCache<'_> {
    fn get(&mut self, a: &GroundAction) -> Result<&[CompiledFormula]> {
        if !self.cache.contains_key(a) {
            let nonempty = !self.pair.high.domain().is_empty();
            let mut out = Vec::new();
            for ssa in self.pair.high.ssas() {
                let inst = ssa.rhs.instantiate_action(a);
                let inst = if nonempty { simplify(&inst) } else { inst };
                let mapped = self.pair.mapping.map_formula(&inst)?;
                out.push(CompiledFormula::compile(
                    &mapped,
                    self.pair.low.vocab(),
                    &ssa.params,
                )?);
            }
            self.cache.insert(a.clone(), out);
        }
        Ok(&self.cache[a])
    }
}

/// Conditions (b) and (c) over every node of a mapped-reachability LTS.
fn check_dynamics(pair: &TheoryPair, lts: &Lts) -> Result<Option<Counterexample>> {
    let high = &pair.high;
    let n = high.domain().len();
    for node in 0..lts.len() {
        let w = &lts.nodes[node];
        let labels: HashSet<&GroundAction> = lts
            .outgoing(node)
            .iter()
            .map(|&e| &lts.edges[e].label)
            .collect();
        let mut found = None;
        for (ty, decl) in high.actions().iter().enumerate() {
            for_each_tuple(decl.params.len(), n, |args| {
                if found.is_some() {
                    return;
                }
                let pre = pair.mapped_poss(ty, args, w);
                let a = high.make_action(ty, args);
                let exec = labels.contains(&a);
                if pre != exec {
                    found = Some((a, pre, exec));
                }
            });
            if let Some((a, pre, exec)) = found {
                let (seed, trace) = lts.path_to(node);
                let mut c = Counterexample::new(
                    Condition::Precondition,
                    format!(
                        "mapped precondition of {a} is {pre} but a complete refinement {}",
                        if exec { "exists" } else { "does not exist" }
                    ),
                );
                c.ll_model = seed_model(pair, lts, seed);
                c.ll_trace = strings(&trace);
                c.hl_action = Some(a.to_string());
                return Ok(Some(c));
            }
        }
    }

    let mut effects = EffectCache {
        pair,
        cache: HashMap::new(),
    };
    for edge in &lts.edges {
        let src = &lts.nodes[edge.src];
        let after = pair.abstract_state(&lts.nodes[edge.dst]);
        let codes = effects.get(&edge.label)?;
        let hv = high.vocab();
        for (f, code) in codes.iter().enumerate() {
            let decl = hv.fluent(f);
            let mut i = 0;
            let mut bad = None;
            for_each_tuple(decl.arity, n, |args| {
                if bad.is_none() && code.eval(src, args) != after.get(decl.offset() + i) {
                    bad = Some(decl.offset() + i);
                }
                i += 1;
            });
            if let Some(atom) = bad {
                let (seed, trace) = lts.path_to(edge.src);
                let mut c = Counterexample::new(
                    Condition::Effect,
                    format!(
                        "after refining {} the mapped value of {} disagrees with its successor-state axiom",
                        edge.label,
                        hv.atom_name(atom)
                    ),
                );
                c.ll_model = seed_model(pair, lts, seed);
                c.ll_trace = strings(&trace);
                c.hl_action = Some(edge.label.to_string());
                c.refinement = strings(&edge.witness);
                return Ok(Some(c));
            }
        }
    }
    Ok(None)
}

fn ensure_sd(pair: &TheoryPair, budget: usize) -> Result<()> {
    if let Some((a, _, wit)) = pair.check_templates_sd(budget)? {
        return Err(Error::NonSdTemplate {
            action: a.to_string(),
            trace: strings(&wit.trace).join(", "),
        });
    }
    Ok(())
}

fn partner(pair: &TheoryPair, hl: &WorldState) -> Vec<usize> {
    pair.low
        .initial_models()
        .iter()
        .enumerate()
        .filter(|(_, l)| m_isomorphic(pair, hl, l))
        .map(|(j, _)| j)
        .collect()
}

fn sound_conditions(pair: &TheoryPair, budget: usize) -> Result<Verdict> {
    for (j, ll) in pair.low.initial_models().iter().enumerate() {
        let abs = pair.abstract_state(ll);
        if !pair.high.initial_models().contains(&abs) {
            let mut c = Counterexample::new(
                Condition::InitialModels,
                format!(
                    "low-level initial model {j} maps to {} which is not a high-level initial model",
                    pair.high.vocab().render(&abs)
                ),
            );
            c.ll_model = Some(j);
            return Ok(Verdict::fail(c));
        }
    }
    let lts = pair.hl_reachable_ll_states(budget)?;
    Ok(match check_dynamics(pair, &lts)? {
        Some(c) => Verdict::fail(c),
        None => Verdict::ok(),
    })
}

/// Sound abstraction via the theory-level conditions: (a) every low-level
/// initial model is m-isomorphic to a high-level one; (b) mapped
/// preconditions hold exactly where a refinement exists and (c) mapped
/// successor-state axioms predict the state after every refinement, at
/// every state reachable by refinements of high-level actions.
pub fn check_sound(pair: &TheoryPair, budget: usize) -> Result<Verdict> {
    ensure_sd(pair, budget)?;
    sound_conditions(pair, budget)
}

/// Complete abstraction. When the abstraction is sound it suffices that
/// every high-level initial model has an m-isomorphic low-level one;
/// otherwise each high-level model needs a low-level partner satisfying
/// the initial, precondition and effect conditions on its own reachable
/// states.
pub fn check_complete(pair: &TheoryPair, budget: usize) -> Result<Verdict> {
    ensure_sd(pair, budget)?;
    let sound = sound_conditions(pair, budget)?.holds;
    complete_given(pair, sound, budget)
}

fn complete_given(pair: &TheoryPair, sound: bool, budget: usize) -> Result<Verdict> {
    for (i, hl) in pair.high.initial_models().iter().enumerate() {
        let candidates = partner(pair, hl);
        let ok = if sound {
            !candidates.is_empty()
        } else {
            let mut any = false;
            for &j in &candidates {
                let seed = pair.low.initial_models()[j].clone();
                let lts = pair.hl_reachable_from(&[seed], budget)?;
                if check_dynamics(pair, &lts)?.is_none() {
                    any = true;
                    break;
                }
            }
            any
        };
        if !ok {
            let mut c = Counterexample::new(
                Condition::NoPartner,
                format!(
                    "high-level initial model {i} {} has no {}low-level partner",
                    pair.high.vocab().render(hl),
                    if candidates.is_empty() {
                        "m-isomorphic "
                    } else {
                        "suitable "
                    }
                ),
            );
            c.hl_model = Some(i);
            return Ok(Verdict::fail(c));
        }
    }
    Ok(Verdict::ok())
}

/// Both checks, sharing the soundness result.
pub fn verify_abstraction(pair: &TheoryPair, budget: usize) -> Result<AbstractionVerdict> {
    ensure_sd(pair, budget)?;
    let s = sound_conditions(pair, budget)?;
    let c = complete_given(pair, s.holds, budget)?;
    Ok(AbstractionVerdict {
        sound: s.holds,
        complete: c.holds,
        witnesses: s.witness.into_iter().chain(c.witness).collect(),
    })
}

/// High-level states reachable by executable actions from every
/// high-level initial model.
pub fn hl_lts(pair: &TheoryPair, budget: usize) -> Result<Lts> {
    reachable_states(
        pair.high.initial_models(),
        &PrimitiveMoves(&pair.high),
        budget,
    )
}

/// The two reachability graphs and the largest m-bisimulation between them.
pub struct BisimulationCheck {
    pub hl: Lts,
    pub ll: Lts,
    pub relation: BisimRelation,
}

impl BisimulationCheck {
    pub fn new(pair: &TheoryPair, budget: usize) -> Result<BisimulationCheck> {
        let hl = hl_lts(pair, budget)?;
        let ll = pair.hl_reachable_ll_states(budget)?;
        let relation = compute_bisimulation(pair, &hl, &ll);
        Ok(BisimulationCheck { hl, ll, relation })
    }

    /// Whether initial model `i` of the high level and `j` of the low level
    /// are m-bisimilar; otherwise why their initial pair was removed.
    pub fn models(&self, pair: &TheoryPair, i: usize, j: usize) -> Result<Option<PruneReason>> {
        let h = self
            .hl
            .node_of(pair.high.initial_model(i)?)
            .expect("seeds are nodes");
        let l = self
            .ll
            .node_of(pair.low.initial_model(j)?)
            .expect("seeds are nodes");
        if self.relation.contains(h, l) {
            Ok(None)
        } else {
            Ok(Some(self.relation.reason(h, l)))
        }
    }

    /// Definition of sound abstraction: every low-level model is
    /// m-bisimilar to some high-level model.
    pub fn sound(&self, pair: &TheoryPair) -> Result<bool> {
        for j in 0..pair.low.initial_models().len() {
            let mut any = false;
            for i in 0..pair.high.initial_models().len() {
                any |= self.models(pair, i, j)?.is_none();
            }
            if !any {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Definition of complete abstraction: every high-level model is
    /// m-bisimilar to some low-level model.
    pub fn complete(&self, pair: &TheoryPair) -> Result<bool> {
        for i in 0..pair.high.initial_models().len() {
            let mut any = false;
            for j in 0..pair.low.initial_models().len() {
                any |= self.models(pair, i, j)?.is_none();
            }
            if !any {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

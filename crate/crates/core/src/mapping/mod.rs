//! Refinement mappings from a high-level theory into a low-level one.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use rayon::prelude::*;

use crate::bat::{
    reachable_states, validate_formula, BasicActionTheory, Lts, Move, MoveGenerator, PrimitiveMoves,
};
use crate::congolog::{
    do_end_states, final_with, is_situation_determined, trans_with, Execution, Part, Program,
    SdWitness,
};
use crate::error::{Error, Result};
use crate::kernel::{
    CompiledFormula, Env, Formula, GroundAction, Sym, Term, Vocabulary, WorldState,
};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ActionRefinement {
    pub action: Sym,
    pub params: Vec<Sym>,
    pub program: Program,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FluentRefinement {
    pub fluent: Sym,
    pub params: Vec<Sym>,
    pub formula: Formula,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RefinementMapping {
    actions: Vec<ActionRefinement>,
    fluents: Vec<FluentRefinement>,
    action_index: HashMap<Sym, usize>,
    fluent_index: HashMap<Sym, usize>,
}

fn instantiate(params: &[Sym], args: &[Term]) -> Vec<(Sym, Term)> {
    params.iter().cloned().zip(args.iter().cloned()).collect()
}

impl RefinementMapping {
    pub fn new(
        actions: Vec<ActionRefinement>,
        fluents: Vec<FluentRefinement>,
    ) -> Result<RefinementMapping> {
        let mut action_index = HashMap::new();
        for (i, a) in actions.iter().enumerate() {
            if action_index.insert(a.action.clone(), i).is_some() {
                return Err(Error::InvalidMapping(format!(
                    "action `{}` is mapped twice",
                    a.action
                )));
            }
            for v in a.program.free_vars() {
                if !a.params.contains(&v) {
                    return Err(Error::InvalidMapping(format!(
                        "template of `{}` has free variable `{v}` that is not a parameter",
                        a.action
                    )));
                }
            }
        }
        let mut fluent_index = HashMap::new();
        for (i, f) in fluents.iter().enumerate() {
            if fluent_index.insert(f.fluent.clone(), i).is_some() {
                return Err(Error::InvalidMapping(format!(
                    "fluent `{}` is mapped twice",
                    f.fluent
                )));
            }
            for v in f.formula.free_vars() {
                if !f.params.contains(&v) {
                    return Err(Error::InvalidMapping(format!(
                        "formula of `{}` has free variable `{v}` that is not a parameter",
                        f.fluent
                    )));
                }
            }
        }
        Ok(RefinementMapping {
            actions,
            fluents,
            action_index,
            fluent_index,
        })
    }

    pub fn actions(&self) -> &[ActionRefinement] {
        &self.actions
    }

    pub fn fluents(&self) -> &[FluentRefinement] {
        &self.fluents
    }

    pub fn action_entry(&self, name: &str) -> Result<&ActionRefinement> {
        self.action_index
            .get(name)
            .map(|&i| &self.actions[i])
            .ok_or_else(|| Error::UnmappedActionType(name.to_string()))
    }

    pub fn fluent_entry(&self, name: &str) -> Result<&FluentRefinement> {
        self.fluent_index
            .get(name)
            .map(|&i| &self.fluents[i])
            .ok_or_else(|| Error::UnmappedFluent(name.to_string()))
    }

    /// Replaces every fluent atom by its low-level template.
    pub fn map_formula(&self, phi: &Formula) -> Result<Formula> {
        phi.map_atoms(&mut |atom| {
            let entry = self.fluent_entry(&atom.fluent)?;
            if entry.params.len() != atom.args.len() {
                return Err(Error::ArityMismatch {
                    symbol: atom.fluent.to_string(),
                    expected: entry.params.len(),
                    found: atom.args.len(),
                });
            }
            Ok(entry
                .formula
                .substitute_terms(&instantiate(&entry.params, &atom.args)))
        })
    }

    pub fn map_action(&self, a: &GroundAction) -> Result<Program> {
        let entry = self.action_entry(&a.name)?;
        if entry.params.len() != a.args.len() {
            return Err(Error::ArityMismatch {
                symbol: a.name.to_string(),
                expected: entry.params.len(),
                found: a.args.len(),
            });
        }
        let binding: Vec<(Sym, Sym)> = entry
            .params
            .iter()
            .cloned()
            .zip(a.args.iter().cloned())
            .collect();
        Ok(entry.program.substitute(&binding))
    }

    /// `m(a1); ...; m(an)`, with `m(empty) = nil`.
    pub fn map_action_sequence(&self, alphas: &[GroundAction]) -> Result<Program> {
        Ok(Program::sequence(
            alphas
                .iter()
                .map(|a| self.map_action(a))
                .collect::<Result<Vec<_>>>()?,
        ))
    }

    /// Choice over all mapped action types of `pi params. template`, in
    /// the given type order.
    pub fn any1hl_over(&self, order: &[Sym]) -> Result<Program> {
        let branches = order
            .iter()
            .map(|name| {
                let e = self.action_entry(name)?;
                Ok(e.params.iter().rev().fold(e.program.clone(), |body, v| {
                    Program::Pick(v.clone(), Box::new(body))
                }))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Program::alternatives(branches))
    }

    pub fn any1hl(&self) -> Program {
        let order: Vec<Sym> = self.actions.iter().map(|a| a.action.clone()).collect();
        self.any1hl_over(&order).expect("entries exist")
    }

    pub fn any_seq_hl(&self) -> Program {
        Program::star(self.any1hl())
    }
}

/// A validated high-level theory, low-level theory and mapping between
/// them, with the mapped fluents and preconditions compiled against the
/// low-level vocabulary.
#[derive(Clone, Debug)]
pub struct TheoryPair {
    pub high: BasicActionTheory,
    pub low: BasicActionTheory,
    pub mapping: RefinementMapping,
    /// Per high-level fluent, its template over the low-level vocabulary.
    fluent_code: Vec<CompiledFormula>,
    /// Per high-level action type, the template.
    templates: Vec<(Vec<Sym>, Program)>,
    /// Per high-level action type, the mapped precondition.
    mapped_pre: Vec<CompiledFormula>,
    live: LiveCache,
}

/// Live high-level instances per low-level state. Scanning every ground
/// instance is the dominant cost of monitoring otherwise.
#[derive(Default)]
struct LiveCache(Mutex<HashMap<WorldState, Arc<Vec<GroundAction>>>>);

impl Clone for LiveCache {
    fn clone(&self) -> LiveCache {
        LiveCache::default()
    }
}

impl fmt::Debug for LiveCache {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("LiveCache")
    }
}

impl TheoryPair {
    pub fn new(
        high: BasicActionTheory,
        low: BasicActionTheory,
        mapping: RefinementMapping,
    ) -> Result<TheoryPair> {
        if high.domain().names() != low.domain().names() {
            return Err(Error::DomainMismatch);
        }
        let low_symbols = low.symbols();
        if let Some(s) = high.symbols().intersection(&low_symbols).next() {
            return Err(Error::VocabularyClash(s.to_string()));
        }
        for f in high.vocab().fluents() {
            if mapping.fluent_entry(&f.name).is_err() {
                return Err(Error::UnmappedSymbol(f.name.to_string()));
            }
        }
        for a in high.actions() {
            if mapping.action_entry(&a.name).is_err() {
                return Err(Error::UnmappedSymbol(a.name.to_string()));
            }
        }
        for e in mapping.fluents() {
            let i = high.vocab().fluent_index(&e.fluent).map_err(|_| {
                Error::InvalidMapping(format!("`{}` is not a high-level fluent", e.fluent))
            })?;
            let arity = high.vocab().fluent(i).arity;
            if arity != e.params.len() {
                return Err(Error::ArityMismatch {
                    symbol: e.fluent.to_string(),
                    expected: arity,
                    found: e.params.len(),
                });
            }
            check_low_formula(&e.formula, low.vocab())?;
        }
        for e in mapping.actions() {
            let (_, ty) = high.action_type(&e.action).map_err(|_| {
                Error::InvalidMapping(format!("`{}` is not a high-level action type", e.action))
            })?;
            if ty.params.len() != e.params.len() {
                return Err(Error::ArityMismatch {
                    symbol: e.action.to_string(),
                    expected: ty.params.len(),
                    found: e.params.len(),
                });
            }
            check_low_program(&e.program, &low)?;
        }

        let fluent_code = high
            .vocab()
            .fluents()
            .iter()
            .map(|f| {
                let e = mapping.fluent_entry(&f.name)?;
                CompiledFormula::compile(&e.formula, low.vocab(), &e.params)
            })
            .collect::<Result<Vec<_>>>()?;
        let templates = high
            .actions()
            .iter()
            .map(|a| {
                let e = mapping.action_entry(&a.name)?;
                Ok((e.params.clone(), e.program.clone()))
            })
            .collect::<Result<Vec<_>>>()?;
        let mapped_pre = high
            .actions()
            .iter()
            .map(|a| {
                let phi = mapping.map_formula(&a.precondition)?;
                CompiledFormula::compile(&phi, low.vocab(), &a.params)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(TheoryPair {
            high,
            low,
            mapping,
            fluent_code,
            templates,
            mapped_pre,
            live: LiveCache::default(),
        })
    }

    /// The high-level state that the low-level state `w` represents:
    /// `F(o)` holds iff `m(F)(o)` holds in `w`.
    pub fn abstract_state(&self, w: &WorldState) -> WorldState {
        let hv = self.high.vocab();
        let mut out = hv.empty_state();
        for (f, code) in self.fluent_code.iter().enumerate() {
            let decl = hv.fluent(f);
            let mut i = 0;
            crate::bat::for_each_tuple(decl.arity, hv.domain().len(), |args| {
                out.set(decl.offset() + i, code.eval(w, args));
                i += 1;
            });
        }
        out
    }

    /// `m(phi)` of the precondition of high-level action type `ty`,
    /// evaluated with arguments `args` in low-level state `w`.
    pub fn mapped_poss(&self, ty: usize, args: &[u32], w: &WorldState) -> bool {
        self.mapped_pre[ty].eval(w, args)
    }

    /// ANY1HL in high-level declaration order.
    pub fn any1hl(&self) -> Program {
        let order: Vec<Sym> = self.high.actions().iter().map(|a| a.name.clone()).collect();
        self.mapping.any1hl_over(&order).expect("validated")
    }

    pub fn any_seq_hl(&self) -> Program {
        Program::star(self.any1hl())
    }

    /// Whether the template of `ty` with arguments `args` can make a step
    /// or terminate in `w`; a cheap filter before the full search.
    pub(crate) fn template_live(&self, ty: usize, args: &[u32], w: &WorldState) -> Result<bool> {
        let (params, program) = &self.templates[ty];
        let mut env = Env::new();
        for (p, &o) in params.iter().zip(args) {
            env.push(p.clone(), o);
        }
        if final_with(program, &mut env, w, &self.low)? {
            return Ok(true);
        }
        let mut out = Vec::new();
        trans_with(program, &mut env, w, &self.low, None, &mut out)?;
        Ok(!out.is_empty())
    }

    /// Complete executions of `m(a)` from `w`, one per distinct end state.
    pub fn refinements(
        &self,
        a: &GroundAction,
        w: &WorldState,
        budget: usize,
    ) -> Result<Vec<Execution>> {
        let (ty, args) = self.high.resolve_action(a)?;
        if !self.template_live(ty, &args, w)? {
            return Ok(Vec::new());
        }
        do_end_states(&self.mapping.map_action(a)?, w, &self.low, budget)
    }

    /// Every high-level ground action whose template is live in `w`, in
    /// canonical order.
    pub(crate) fn live_instances(&self, w: &WorldState) -> Result<Arc<Vec<GroundAction>>> {
        if let Some(v) = self.live.0.lock().expect("not poisoned").get(w) {
            return Ok(v.clone());
        }
        let mut candidates = Vec::new();
        for ty in 0..self.high.actions().len() {
            self.high
                .for_each_instance(ty, |args| candidates.push((ty, args.to_vec())));
        }
        let keep = candidates
            .par_iter()
            .map(|(ty, args)| self.template_live(*ty, args, w))
            .collect::<Result<Vec<bool>>>()?;
        let out: Vec<GroundAction> = candidates
            .iter()
            .zip(keep)
            .filter(|(_, k)| *k)
            .map(|((ty, args), _)| self.high.make_action(*ty, args))
            .collect();
        let out = Arc::new(out);
        self.live
            .0
            .lock()
            .expect("not poisoned")
            .insert(w.clone(), out.clone());
        Ok(out)
    }

    /// Low-level states reachable from `from` by complete executions of
    /// instantiated templates; edges are labelled by the high-level action.
    pub fn hl_reachable_from(&self, from: &[WorldState], budget: usize) -> Result<Lts> {
        reachable_states(from, &MappedMoves { pair: self, budget }, budget)
    }

    /// [`TheoryPair::hl_reachable_from`] seeded with every low-level
    /// initial model.
    pub fn hl_reachable_ll_states(&self, budget: usize) -> Result<Lts> {
        self.hl_reachable_from(self.low.initial_models(), budget)
    }

    /// Low-level states reachable by executable primitive actions.
    pub fn ll_reachable_states(&self, budget: usize) -> Result<Lts> {
        reachable_states(
            self.low.initial_models(),
            &PrimitiveMoves(&self.low),
            budget,
        )
    }

    /// Checks that every instantiated template is situation-determined in
    /// every low-level state reachable by primitive actions. Returns the
    /// first offending instance, state and witness.
    pub fn check_templates_sd(
        &self,
        budget: usize,
    ) -> Result<Option<(GroundAction, WorldState, SdWitness)>> {
        let lts = self.ll_reachable_states(budget)?;
        for w in &lts.nodes {
            for a in self.live_instances(w)?.iter() {
                let p = self.mapping.map_action(a)?;
                if let Some(wit) = is_situation_determined(&p, w, &self.low, budget)? {
                    return Ok(Some((a.clone(), w.clone(), wit)));
                }
            }
        }
        Ok(None)
    }
}

/// Moves of the mapped high-level actions over the low-level theory.
pub struct MappedMoves<'a> {
    pub pair: &'a TheoryPair,
    pub budget: usize,
}

impl MoveGenerator for MappedMoves<'_> {
    fn moves(&self, w: &WorldState) -> Result<Vec<Move>> {
        let mut out = Vec::new();
        for a in self.pair.live_instances(w)?.iter() {
            let p = self.pair.mapping.map_action(a)?;
            for e in do_end_states(&p, w, &self.pair.low, self.budget)? {
                out.push(Move {
                    label: a.clone(),
                    dst: e.state,
                    witness: e.trace,
                });
            }
        }
        Ok(out)
    }
}

fn check_low_formula(phi: &Formula, vocab: &Vocabulary) -> Result<()> {
    if phi.mentions_action_equality() {
        return Err(Error::InvalidMapping(
            "mapping formulas cannot mention the action variable".into(),
        ));
    }
    let mut err = None;
    validate_formula(phi, vocab, &mut err);
    err.map_or(Ok(()), Err)
}

fn check_low_program(p: &Program, low: &BasicActionTheory) -> Result<()> {
    let mut err: Option<Error> = None;
    p.for_each_part(&mut |part| {
        if err.is_some() {
            return;
        }
        match part {
            Part::Test(phi) => {
                if let Err(e) = check_low_formula(phi, low.vocab()) {
                    err = Some(e);
                }
            }
            Part::Action(t) => match low.action_type(&t.name) {
                Err(e) => err = Some(e),
                Ok((_, ty)) if ty.params.len() != t.args.len() => {
                    err = Some(Error::ArityMismatch {
                        symbol: t.name.to_string(),
                        expected: ty.params.len(),
                        found: t.args.len(),
                    })
                }
                Ok(_) => {
                    for a in &t.args {
                        if let Term::Obj(o) = a {
                            if !low.domain().contains(o) {
                                err = Some(Error::UnknownObject(o.to_string()));
                            }
                        }
                    }
                }
            },
        }
    });
    err.map_or(Ok(()), Err)
}

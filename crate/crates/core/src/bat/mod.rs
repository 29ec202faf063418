//! Basic action theories as finite-state dynamics.

mod lts;

use std::collections::{BTreeSet, HashMap};
use std::sync::{Arc, RwLock};

pub use lts::{reachable_states, Edge, Lts, Move, MoveGenerator, PrimitiveMoves};

use crate::error::{Error, Result};
use crate::kernel::{
    simplify, CompiledFormula, Domain, FluentAtom, Formula, GroundAction, Sym, Term, Vocabulary,
    WorldState, ACTION_VAR,
};

/// Default cap on the number of nodes of any explored state space.
pub const DEFAULT_STATE_BUDGET: usize = 1_000_000;

#[derive(Debug, Clone)]
pub struct ActionType {
    pub name: Sym,
    pub params: Vec<Sym>,
    pub precondition: Formula,
    compiled: CompiledFormula,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuccessorStateAxiom {
    pub fluent: Sym,
    pub params: Vec<Sym>,
    pub rhs: Formula,
}

impl SuccessorStateAxiom {
    /// `F(x) <- F(x)`: the fluent is unaffected by every action.
    pub fn frame(fluent: &Sym, arity: usize) -> SuccessorStateAxiom {
        let params: Vec<Sym> = (0..arity)
            .map(|i| Sym::from(format!("x{}", i + 1)))
            .collect();
        SuccessorStateAxiom {
            fluent: fluent.clone(),
            rhs: Formula::Atom(FluentAtom {
                fluent: fluent.clone(),
                args: params.iter().cloned().map(Term::Var).collect(),
            }),
            params,
        }
    }
}

#[derive(Debug, Clone)]
enum FluentUpdate {
    Frame,
    Rule(CompiledFormula),
}

/// A history: an initial model plus the actions performed from it.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Situation {
    pub model: usize,
    pub trace: Vec<GroundAction>,
}

impl Situation {
    pub fn initial(model: usize) -> Situation {
        Situation {
            model,
            trace: Vec::new(),
        }
    }
}

/// Preconditions, successor-state axioms and a nonempty set of initial
/// models (incomplete information = more than one model).
#[derive(Debug)]
pub struct BasicActionTheory {
    vocab: Arc<Vocabulary>,
    actions: Vec<ActionType>,
    action_index: HashMap<Sym, usize>,
    ssas: Vec<SuccessorStateAxiom>,
    initial: Vec<WorldState>,
    step_cache: RwLock<HashMap<GroundAction, Arc<[FluentUpdate]>>>,
}

impl Clone for BasicActionTheory {
    fn clone(&self) -> Self {
        BasicActionTheory {
            vocab: self.vocab.clone(),
            actions: self.actions.clone(),
            action_index: self.action_index.clone(),
            ssas: self.ssas.clone(),
            initial: self.initial.clone(),
            step_cache: RwLock::new(HashMap::new()),
        }
    }
}

fn check_vars(phi: &Formula, allowed: &[Sym], context: &str) -> Result<()> {
    for v in phi.free_vars() {
        if !allowed.contains(&v) {
            return Err(Error::InvalidTheory(format!(
                "{context}: variable `{v}` is not a parameter"
            )));
        }
    }
    Ok(())
}

impl BasicActionTheory {
    /// Builds and validates a theory. `ssas` may omit fluents; those get
    /// the frame axiom. `actions` are `(name, params, precondition)`.
    pub fn new(
        vocab: Arc<Vocabulary>,
        actions: Vec<(Sym, Vec<Sym>, Formula)>,
        ssas: Vec<SuccessorStateAxiom>,
        initial: Vec<WorldState>,
    ) -> Result<BasicActionTheory> {
        if initial.is_empty() {
            return Err(Error::InvalidTheory(
                "at least one initial model is required".into(),
            ));
        }
        let mut action_index = HashMap::new();
        let mut compiled_actions = Vec::with_capacity(actions.len());
        for (name, params, pre) in actions {
            if action_index
                .insert(name.clone(), compiled_actions.len())
                .is_some()
            {
                return Err(Error::InvalidTheory(format!(
                    "action `{name}` declared twice"
                )));
            }
            if vocab.fluent_index(&name).is_ok() {
                return Err(Error::InvalidTheory(format!(
                    "`{name}` is both a fluent and an action"
                )));
            }
            check_vars(&pre, &params, &format!("precondition of `{name}`"))?;
            if pre.mentions_action_equality() {
                return Err(Error::InvalidTheory(format!(
                    "precondition of `{name}` mentions the action variable"
                )));
            }
            let compiled = CompiledFormula::compile(&pre, &vocab, &params)?;
            compiled_actions.push(ActionType {
                name,
                params,
                precondition: pre,
                compiled,
            });
        }

        let mut by_fluent: Vec<Option<SuccessorStateAxiom>> = vec![None; vocab.fluents().len()];
        for ssa in ssas {
            let f = vocab.fluent_index(&ssa.fluent)?;
            let arity = vocab.fluent(f).arity;
            if ssa.params.len() != arity {
                return Err(Error::ArityMismatch {
                    symbol: ssa.fluent.to_string(),
                    expected: arity,
                    found: ssa.params.len(),
                });
            }
            if ssa.params.iter().any(|p| &**p == ACTION_VAR) {
                return Err(Error::InvalidTheory(format!(
                    "successor-state axiom of `{}` uses the reserved action variable as a parameter",
                    ssa.fluent
                )));
            }
            check_vars(
                &ssa.rhs,
                &ssa.params,
                &format!("successor-state axiom of `{}`", ssa.fluent),
            )?;
            if by_fluent[f].is_some() {
                return Err(Error::InvalidTheory(format!(
                    "fluent `{}` has two successor-state axioms",
                    ssa.fluent
                )));
            }
            by_fluent[f] = Some(ssa);
        }
        let ssas: Vec<SuccessorStateAxiom> = by_fluent
            .into_iter()
            .enumerate()
            .map(|(i, s)| {
                s.unwrap_or_else(|| {
                    let d = vocab.fluent(i);
                    SuccessorStateAxiom::frame(&d.name, d.arity)
                })
            })
            .collect();

        let bat = BasicActionTheory {
            vocab,
            actions: compiled_actions,
            action_index,
            ssas,
            initial,
            step_cache: RwLock::new(HashMap::new()),
        };
        bat.validate_ssa_symbols()?;
        Ok(bat)
    }

    fn validate_ssa_symbols(&self) -> Result<()> {
        for ssa in &self.ssas {
            let mut err = None;
            validate_formula(&ssa.rhs, &self.vocab, &mut err);
            check_action_terms(&ssa.rhs, self, &mut err);
            if let Some(e) = err {
                return Err(e);
            }
        }
        Ok(())
    }

    pub fn vocab(&self) -> &Arc<Vocabulary> {
        &self.vocab
    }

    pub fn domain(&self) -> &Arc<Domain> {
        self.vocab.domain()
    }

    pub fn actions(&self) -> &[ActionType] {
        &self.actions
    }

    pub fn action_type(&self, name: &str) -> Result<(usize, &ActionType)> {
        let i = *self
            .action_index
            .get(name)
            .ok_or_else(|| Error::UnknownActionType(name.to_string()))?;
        Ok((i, &self.actions[i]))
    }

    pub fn ssas(&self) -> &[SuccessorStateAxiom] {
        &self.ssas
    }

    pub fn initial_models(&self) -> &[WorldState] {
        &self.initial
    }

    pub fn initial_model(&self, index: usize) -> Result<&WorldState> {
        self.initial.get(index).ok_or(Error::InvalidModelIndex {
            index,
            count: self.initial.len(),
        })
    }

    /// Resolves the arguments of `a` to object indices, checking the type
    /// and arity.
    pub fn resolve_action(&self, a: &GroundAction) -> Result<(usize, Vec<u32>)> {
        let (i, ty) = self.action_type(&a.name)?;
        if ty.params.len() != a.args.len() {
            return Err(Error::ArityMismatch {
                symbol: a.name.to_string(),
                expected: ty.params.len(),
                found: a.args.len(),
            });
        }
        let args = a
            .args
            .iter()
            .map(|o| self.domain().index_of(o))
            .collect::<Result<Vec<_>>>()?;
        Ok((i, args))
    }

    pub fn make_action(&self, ty: usize, args: &[u32]) -> GroundAction {
        GroundAction {
            name: self.actions[ty].name.clone(),
            args: args
                .iter()
                .map(|&o| self.domain().name(o).clone())
                .collect(),
        }
    }

    /// Canonical ordering key: declaration order of the action type, then
    /// the arguments in domain declaration order.
    pub fn action_key(&self, a: &GroundAction) -> (usize, Vec<u32>) {
        self.resolve_action(a).unwrap_or((usize::MAX, Vec::new()))
    }

    pub fn sort_actions(&self, actions: &mut [GroundAction]) {
        actions.sort_by_cached_key(|a| self.action_key(a));
    }

    pub fn poss(&self, a: &GroundAction, w: &WorldState) -> Result<bool> {
        let (ty, args) = self.resolve_action(a)?;
        Ok(self.actions[ty].compiled.eval(w, &args))
    }

    pub(crate) fn poss_indexed(&self, ty: usize, args: &[u32], w: &WorldState) -> bool {
        self.actions[ty].compiled.eval(w, args)
    }

    /// Successor state under `a`, whether or not `a` is possible.
    pub fn step(&self, a: &GroundAction, w: &WorldState) -> Result<WorldState> {
        let updates = self.updates_for(a)?;
        let mut next = w.clone();
        let mut args = Vec::new();
        for (f, update) in updates.iter().enumerate() {
            let FluentUpdate::Rule(code) = update else {
                continue;
            };
            let decl = self.vocab.fluent(f);
            let size = self.vocab.fluent_size(f);
            if let Some(c) = code.is_constant() {
                for i in 0..size {
                    next.set(decl.offset() + i, c);
                }
                continue;
            }
            args.clear();
            args.resize(decl.arity, 0u32);
            let n = self.domain().len() as u32;
            for i in 0..size {
                next.set(decl.offset() + i, code.eval(w, &args));
                // advance the mixed-radix argument counter
                for slot in args.iter_mut().rev() {
                    *slot += 1;
                    if *slot < n {
                        break;
                    }
                    *slot = 0;
                }
            }
        }
        Ok(next)
    }

    fn updates_for(&self, a: &GroundAction) -> Result<Arc<[FluentUpdate]>> {
        if let Some(u) = self.step_cache.read().expect("step cache poisoned").get(a) {
            return Ok(u.clone());
        }
        self.resolve_action(a)?;
        let nonempty = !self.domain().is_empty();
        let mut updates = Vec::with_capacity(self.ssas.len());
        for ssa in &self.ssas {
            let inst = ssa.rhs.instantiate_action(a);
            let inst = if nonempty { simplify(&inst) } else { inst };
            let identity = Formula::Atom(FluentAtom {
                fluent: ssa.fluent.clone(),
                args: ssa.params.iter().cloned().map(Term::Var).collect(),
            });
            if inst == identity {
                updates.push(FluentUpdate::Frame);
            } else {
                updates.push(FluentUpdate::Rule(CompiledFormula::compile(
                    &inst,
                    &self.vocab,
                    &ssa.params,
                )?));
            }
        }
        let updates: Arc<[FluentUpdate]> = updates.into();
        self.step_cache
            .write()
            .expect("step cache poisoned")
            .insert(a.clone(), updates.clone());
        Ok(updates)
    }

    /// State reached by performing `trace` from initial model `model`,
    /// without checking preconditions.
    pub fn state_of(&self, s: &Situation) -> Result<WorldState> {
        let mut w = self.initial_model(s.model)?.clone();
        for a in &s.trace {
            w = self.step(a, &w)?;
        }
        Ok(w)
    }

    /// Every action on the way to `s` was possible when performed.
    pub fn executable(&self, s: &Situation) -> Result<bool> {
        Ok(self.first_impossible(s)?.is_none())
    }

    /// Index of the first action of the trace whose precondition fails.
    pub fn first_impossible(&self, s: &Situation) -> Result<Option<usize>> {
        let mut w = self.initial_model(s.model)?.clone();
        for (i, a) in s.trace.iter().enumerate() {
            if !self.poss(a, &w)? {
                return Ok(Some(i));
            }
            w = self.step(a, &w)?;
        }
        Ok(None)
    }

    /// Number of ground instances of action type `ty`.
    pub fn instance_count(&self, ty: usize) -> usize {
        self.domain()
            .len()
            .pow(self.actions[ty].params.len() as u32)
    }

    /// Calls `f` with every argument tuple of action type `ty`, in
    /// lexicographic domain order.
    pub fn for_each_instance(&self, ty: usize, mut f: impl FnMut(&[u32])) {
        for_each_tuple(self.actions[ty].params.len(), self.domain().len(), |t| f(t));
    }

    /// All ground actions possible in `w`, canonically ordered.
    pub fn executable_actions(&self, w: &WorldState) -> Vec<GroundAction> {
        let mut out = Vec::new();
        for ty in 0..self.actions.len() {
            self.for_each_instance(ty, |args| {
                if self.poss_indexed(ty, args, w) {
                    out.push(self.make_action(ty, args));
                }
            });
        }
        out
    }

    /// Parses a ground action written `name(arg, ...)` and checks it
    /// against this theory.
    pub fn ground(&self, name: &str, args: &[&str]) -> Result<GroundAction> {
        let a = GroundAction::new(name, args);
        self.resolve_action(&a)?;
        Ok(a)
    }

    /// Fluent symbols and action symbols declared by this theory.
    pub fn symbols(&self) -> BTreeSet<Sym> {
        self.vocab
            .fluents()
            .iter()
            .map(|f| f.name.clone())
            .chain(self.actions.iter().map(|a| a.name.clone()))
            .collect()
    }
}

/// Mixed-radix enumeration of `arity`-tuples over `0..n`.
pub(crate) fn for_each_tuple(arity: usize, n: usize, mut f: impl FnMut(&[u32])) {
    if arity == 0 {
        f(&[]);
        return;
    }
    if n == 0 {
        return;
    }
    let mut t = vec![0u32; arity];
    loop {
        f(&t);
        let mut i = arity;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            t[i] += 1;
            if (t[i] as usize) < n {
                break;
            }
            t[i] = 0;
        }
    }
}

/// Records the first unknown fluent, arity error or unknown object in `phi`.
pub(crate) fn validate_formula(phi: &Formula, vocab: &Vocabulary, err: &mut Option<Error>) {
    phi.for_each_atom(&mut |a| {
        if err.is_some() {
            return;
        }
        match vocab.fluent_index(&a.fluent) {
            Err(e) => *err = Some(e),
            Ok(f) => {
                let arity = vocab.fluent(f).arity;
                if arity != a.args.len() {
                    *err = Some(Error::ArityMismatch {
                        symbol: a.fluent.to_string(),
                        expected: arity,
                        found: a.args.len(),
                    });
                }
            }
        }
    });
    phi.for_each_term(&mut |t| {
        if err.is_none() {
            if let Term::Obj(o) = t {
                if !vocab.domain().contains(o) {
                    *err = Some(Error::UnknownObject(o.to_string()));
                }
            }
        }
    });
}

fn check_action_terms(phi: &Formula, bat: &BasicActionTheory, err: &mut Option<Error>) {
    match phi {
        Formula::ActionIs(t) => {
            if err.is_none() {
                match bat.action_type(&t.name) {
                    Err(e) => *err = Some(e),
                    Ok((_, ty)) if ty.params.len() != t.args.len() => {
                        *err = Some(Error::ArityMismatch {
                            symbol: t.name.to_string(),
                            expected: ty.params.len(),
                            found: t.args.len(),
                        })
                    }
                    Ok(_) => {}
                }
            }
        }
        Formula::True | Formula::False | Formula::Atom(_) | Formula::Eq(..) => {}
        Formula::Not(x) => check_action_terms(x, bat, err),
        Formula::And(x, y) | Formula::Or(x, y) | Formula::Implies(x, y) | Formula::Iff(x, y) => {
            check_action_terms(x, bat, err);
            check_action_terms(y, bat, err);
        }
        Formula::Forall(_, b) | Formula::Exists(_, b) => check_action_terms(b, bat, err),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{sym, ActionTerm};

    /// One switch `On`, actions `flip` (always possible) and `noop`
    /// (possible only when on).
    fn switch() -> BasicActionTheory {
        let d = Arc::new(Domain::new(Vec::<&str>::new()).unwrap());
        let v = Arc::new(Vocabulary::new(d, [("On", 0usize), ("Const", 0)]).unwrap());
        let on = Formula::atom("On", vec![]);
        let is_flip = Formula::ActionIs(ActionTerm {
            name: sym("flip"),
            args: vec![],
        });
        let ssa = SuccessorStateAxiom {
            fluent: sym("On"),
            params: vec![],
            rhs: Formula::or(
                Formula::and(is_flip.clone(), Formula::not(on.clone())),
                Formula::and(Formula::not(is_flip), on.clone()),
            ),
        };
        BasicActionTheory::new(
            v.clone(),
            vec![
                (sym("flip"), vec![], Formula::True),
                (sym("noop"), vec![], on),
            ],
            vec![ssa],
            vec![v.empty_state()],
        )
        .unwrap()
    }

    #[test]
    fn step_follows_successor_state_axioms() {
        let bat = switch();
        let s0 = bat.initial_model(0).unwrap().clone();
        let flip = bat.ground("flip", &[]).unwrap();
        let s1 = bat.step(&flip, &s0).unwrap();
        assert!(s1.get(0));
        assert!(!s1.get(1));
        assert_eq!(bat.step(&flip, &s1).unwrap(), s0);
    }

    #[test]
    fn executable_folds_preconditions() {
        let bat = switch();
        let noop = bat.ground("noop", &[]).unwrap();
        let flip = bat.ground("flip", &[]).unwrap();
        assert!(bat.executable(&Situation::initial(0)).unwrap());
        let bad = Situation {
            model: 0,
            trace: vec![noop.clone()],
        };
        assert!(!bat.executable(&bad).unwrap());
        let good = Situation {
            model: 0,
            trace: vec![flip, noop],
        };
        assert!(bat.executable(&good).unwrap());
    }

    #[test]
    fn unknown_and_malformed_actions_are_rejected() {
        let bat = switch();
        let s0 = bat.initial_model(0).unwrap();
        assert_eq!(
            bat.poss(&GroundAction::new("jump", &[]), s0),
            Err(Error::UnknownActionType("jump".into()))
        );
        assert!(matches!(
            bat.poss(&GroundAction::new("flip", &["x"]), s0),
            Err(Error::ArityMismatch { .. })
        ));
        assert!(bat.step(&GroundAction::new("jump", &[]), s0).is_err());
    }

    #[test]
    fn tuples_enumerate_in_lexicographic_order() {
        let mut seen = Vec::new();
        for_each_tuple(2, 3, |t| seen.push(t.to_vec()));
        assert_eq!(seen.len(), 9);
        assert_eq!(seen[1], vec![0, 1]);
        assert_eq!(seen[3], vec![1, 0]);
        let mut zero = 0;
        for_each_tuple(0, 0, |_| zero += 1);
        assert_eq!(zero, 1);
    }

    #[test]
    fn initial_models_must_be_nonempty() {
        let d = Arc::new(Domain::new(["A"]).unwrap());
        let v = Arc::new(Vocabulary::new(d, Vec::<(&str, usize)>::new()).unwrap());
        assert!(BasicActionTheory::new(v, vec![], vec![], vec![]).is_err());
    }
}

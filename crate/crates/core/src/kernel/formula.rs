use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

/// Interned-by-refcount symbol used for every name in the ASTs.
pub type Sym = Arc<str>;

pub fn sym(s: &str) -> Sym {
    Arc::from(s)
}

/// The distinguished action variable of successor-state axioms.
pub const ACTION_VAR: &str = "a";

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(Sym),
    Obj(Sym),
}

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var(sym(name))
    }

    pub fn obj(name: &str) -> Term {
        Term::Obj(sym(name))
    }

    pub fn name(&self) -> &Sym {
        match self {
            Term::Var(s) | Term::Obj(s) => s,
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FluentAtom {
    pub fluent: Sym,
    pub args: Vec<Term>,
}

/// An action term `A(t1,...,tn)` whose arguments may still be variables.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ActionTerm {
    pub name: Sym,
    pub args: Vec<Term>,
}

/// A ground action: an action type applied to object names.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroundAction {
    pub name: Sym,
    pub args: Vec<Sym>,
}

impl GroundAction {
    pub fn new(name: &str, args: &[&str]) -> GroundAction {
        GroundAction {
            name: sym(name),
            args: args.iter().map(|a| sym(a)).collect(),
        }
    }

    pub fn as_term(&self) -> ActionTerm {
        ActionTerm {
            name: self.name.clone(),
            args: self.args.iter().cloned().map(Term::Obj).collect(),
        }
    }
}

fn write_application<T: fmt::Display>(
    f: &mut fmt::Formatter<'_>,
    name: &str,
    args: &[T],
) -> fmt::Result {
    f.write_str(name)?;
    if !args.is_empty() {
        f.write_str("(")?;
        for (i, a) in args.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{a}")?;
        }
        f.write_str(")")?;
    }
    Ok(())
}

impl fmt::Display for FluentAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_application(f, &self.fluent, &self.args)
    }
}

impl fmt::Display for ActionTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_application(f, &self.name, &self.args)
    }
}

impl fmt::Display for GroundAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_application(f, &self.name, &self.args)
    }
}

/// Situation-suppressed first-order formula over fluent atoms.
///
/// `ActionIs` is the `a = A(...)` atom of successor-state axioms; it is
/// eliminated by [`Formula::instantiate_action`] before evaluation.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    True,
    False,
    Atom(FluentAtom),
    Eq(Term, Term),
    ActionIs(ActionTerm),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
    Forall(Sym, Box<Formula>),
    Exists(Sym, Box<Formula>),
}

impl Formula {
    pub fn atom(fluent: &str, args: Vec<Term>) -> Formula {
        Formula::Atom(FluentAtom {
            fluent: sym(fluent),
            args,
        })
    }

    pub fn eq(a: Term, b: Term) -> Formula {
        Formula::Eq(a, b)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn iff(a: Formula, b: Formula) -> Formula {
        Formula::Iff(Box::new(a), Box::new(b))
    }

    pub fn forall(v: &str, body: Formula) -> Formula {
        Formula::Forall(sym(v), Box::new(body))
    }

    pub fn exists(v: &str, body: Formula) -> Formula {
        Formula::Exists(sym(v), Box::new(body))
    }

    /// Right-nested conjunction; `True` for an empty list.
    pub fn conj(items: impl IntoIterator<Item = Formula>) -> Formula {
        let mut items: Vec<Formula> = items.into_iter().collect();
        let Some(mut acc) = items.pop() else {
            return Formula::True;
        };
        while let Some(f) = items.pop() {
            acc = Formula::and(f, acc);
        }
        acc
    }

    /// Right-nested disjunction; `False` for an empty list.
    pub fn disj(items: impl IntoIterator<Item = Formula>) -> Formula {
        let mut items: Vec<Formula> = items.into_iter().collect();
        let Some(mut acc) = items.pop() else {
            return Formula::False;
        };
        while let Some(f) = items.pop() {
            acc = Formula::or(f, acc);
        }
        acc
    }

    pub fn free_vars(&self) -> BTreeSet<Sym> {
        let mut out = BTreeSet::new();
        let mut bound = Vec::new();
        self.collect_free(&mut bound, &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<Sym>, out: &mut BTreeSet<Sym>) {
        let term = |t: &Term, bound: &Vec<Sym>, out: &mut BTreeSet<Sym>| {
            if let Term::Var(v) = t {
                if !bound.contains(v) {
                    out.insert(v.clone());
                }
            }
        };
        match self {
            Formula::True | Formula::False => {}
            Formula::Atom(a) => a.args.iter().for_each(|t| term(t, bound, out)),
            Formula::ActionIs(a) => a.args.iter().for_each(|t| term(t, bound, out)),
            Formula::Eq(x, y) => {
                term(x, bound, out);
                term(y, bound, out);
            }
            Formula::Not(f) => f.collect_free(bound, out),
            Formula::And(x, y)
            | Formula::Or(x, y)
            | Formula::Implies(x, y)
            | Formula::Iff(x, y) => {
                x.collect_free(bound, out);
                y.collect_free(bound, out);
            }
            Formula::Forall(v, body) | Formula::Exists(v, body) => {
                bound.push(v.clone());
                body.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    /// Replaces free variables by object names. Bound occurrences are
    /// untouched; since the replacements are constants no capture can occur.
    pub fn substitute(&self, binding: &[(Sym, Sym)]) -> Formula {
        let map: Vec<(Sym, Term)> = binding
            .iter()
            .map(|(v, o)| (v.clone(), Term::Obj(o.clone())))
            .collect();
        self.substitute_terms(&map)
    }

    /// Capture-avoiding replacement of free variables by arbitrary terms.
    pub fn substitute_terms(&self, map: &[(Sym, Term)]) -> Formula {
        if map.is_empty() {
            return self.clone();
        }
        let sub_term = |t: &Term| -> Term {
            match t {
                Term::Var(v) => map
                    .iter()
                    .rev()
                    .find(|(k, _)| k == v)
                    .map(|(_, r)| r.clone())
                    .unwrap_or_else(|| t.clone()),
                Term::Obj(_) => t.clone(),
            }
        };
        match self {
            Formula::True => Formula::True,
            Formula::False => Formula::False,
            Formula::Atom(a) => Formula::Atom(FluentAtom {
                fluent: a.fluent.clone(),
                args: a.args.iter().map(sub_term).collect(),
            }),
            Formula::ActionIs(a) => Formula::ActionIs(ActionTerm {
                name: a.name.clone(),
                args: a.args.iter().map(sub_term).collect(),
            }),
            Formula::Eq(x, y) => Formula::Eq(sub_term(x), sub_term(y)),
            Formula::Not(f) => Formula::not(f.substitute_terms(map)),
            Formula::And(x, y) => Formula::and(x.substitute_terms(map), y.substitute_terms(map)),
            Formula::Or(x, y) => Formula::or(x.substitute_terms(map), y.substitute_terms(map)),
            Formula::Implies(x, y) => {
                Formula::implies(x.substitute_terms(map), y.substitute_terms(map))
            }
            Formula::Iff(x, y) => Formula::iff(x.substitute_terms(map), y.substitute_terms(map)),
            Formula::Forall(v, body) | Formula::Exists(v, body) => {
                let is_forall = matches!(self, Formula::Forall(..));
                let (v, body, inner) = rebind(v, body, map);
                let body = body.substitute_terms(&inner);
                if is_forall {
                    Formula::Forall(v, Box::new(body))
                } else {
                    Formula::Exists(v, Box::new(body))
                }
            }
        }
    }

    /// Replaces every fluent atom using `f`; used for refinement mappings.
    pub fn map_atoms<E>(
        &self,
        f: &mut impl FnMut(&FluentAtom) -> Result<Formula, E>,
    ) -> Result<Formula, E> {
        Ok(match self {
            Formula::Atom(a) => f(a)?,
            Formula::True | Formula::False | Formula::Eq(..) | Formula::ActionIs(..) => {
                self.clone()
            }
            Formula::Not(x) => Formula::not(x.map_atoms(f)?),
            Formula::And(x, y) => Formula::and(x.map_atoms(f)?, y.map_atoms(f)?),
            Formula::Or(x, y) => Formula::or(x.map_atoms(f)?, y.map_atoms(f)?),
            Formula::Implies(x, y) => Formula::implies(x.map_atoms(f)?, y.map_atoms(f)?),
            Formula::Iff(x, y) => Formula::iff(x.map_atoms(f)?, y.map_atoms(f)?),
            Formula::Forall(v, b) => Formula::Forall(v.clone(), Box::new(b.map_atoms(f)?)),
            Formula::Exists(v, b) => Formula::Exists(v.clone(), Box::new(b.map_atoms(f)?)),
        })
    }

    /// Resolves every `a = B(t...)` atom against the ground action `action`
    /// using unique names for actions: different types are unequal, equal
    /// types are equal iff their arguments are.
    pub fn instantiate_action(&self, action: &GroundAction) -> Formula {
        match self {
            Formula::ActionIs(t) => {
                if t.name != action.name || t.args.len() != action.args.len() {
                    Formula::False
                } else {
                    Formula::conj(
                        t.args
                            .iter()
                            .zip(&action.args)
                            .map(|(x, c)| Formula::Eq(x.clone(), Term::Obj(c.clone()))),
                    )
                }
            }
            Formula::True | Formula::False | Formula::Atom(_) | Formula::Eq(..) => self.clone(),
            Formula::Not(x) => Formula::not(x.instantiate_action(action)),
            Formula::And(x, y) => {
                Formula::and(x.instantiate_action(action), y.instantiate_action(action))
            }
            Formula::Or(x, y) => {
                Formula::or(x.instantiate_action(action), y.instantiate_action(action))
            }
            Formula::Implies(x, y) => {
                Formula::implies(x.instantiate_action(action), y.instantiate_action(action))
            }
            Formula::Iff(x, y) => {
                Formula::iff(x.instantiate_action(action), y.instantiate_action(action))
            }
            Formula::Forall(v, b) => {
                Formula::Forall(v.clone(), Box::new(b.instantiate_action(action)))
            }
            Formula::Exists(v, b) => {
                Formula::Exists(v.clone(), Box::new(b.instantiate_action(action)))
            }
        }
    }

    pub fn mentions_action_equality(&self) -> bool {
        match self {
            Formula::ActionIs(_) => true,
            Formula::True | Formula::False | Formula::Atom(_) | Formula::Eq(..) => false,
            Formula::Not(x) => x.mentions_action_equality(),
            Formula::And(x, y)
            | Formula::Or(x, y)
            | Formula::Implies(x, y)
            | Formula::Iff(x, y) => x.mentions_action_equality() || y.mentions_action_equality(),
            Formula::Forall(_, b) | Formula::Exists(_, b) => b.mentions_action_equality(),
        }
    }

    /// Visits every fluent atom and action-equality term (for validation).
    pub fn for_each_atom(&self, f: &mut impl FnMut(&FluentAtom)) {
        match self {
            Formula::Atom(a) => f(a),
            Formula::True | Formula::False | Formula::Eq(..) | Formula::ActionIs(..) => {}
            Formula::Not(x) => x.for_each_atom(f),
            Formula::And(x, y)
            | Formula::Or(x, y)
            | Formula::Implies(x, y)
            | Formula::Iff(x, y) => {
                x.for_each_atom(f);
                y.for_each_atom(f);
            }
            Formula::Forall(_, b) | Formula::Exists(_, b) => b.for_each_atom(f),
        }
    }

    pub fn for_each_term(&self, f: &mut impl FnMut(&Term)) {
        match self {
            Formula::Atom(a) => a.args.iter().for_each(&mut *f),
            Formula::ActionIs(a) => a.args.iter().for_each(&mut *f),
            Formula::Eq(x, y) => {
                f(x);
                f(y);
            }
            Formula::True | Formula::False => {}
            Formula::Not(x) => x.for_each_term(f),
            Formula::And(x, y)
            | Formula::Or(x, y)
            | Formula::Implies(x, y)
            | Formula::Iff(x, y) => {
                x.for_each_term(f);
                y.for_each_term(f);
            }
            Formula::Forall(_, b) | Formula::Exists(_, b) => b.for_each_term(f),
        }
    }
}

/// Removes `v` from the substitution (it is rebound) and renames `v` if a
/// replacement term would otherwise be captured by it.
fn rebind(v: &Sym, body: &Formula, map: &[(Sym, Term)]) -> (Sym, Formula, Vec<(Sym, Term)>) {
    let inner: Vec<(Sym, Term)> = map.iter().filter(|(k, _)| k != v).cloned().collect();
    let body_free = body.free_vars();
    let captures = inner
        .iter()
        .any(|(k, t)| body_free.contains(k) && matches!(t, Term::Var(x) if x == v));
    if !captures {
        return (v.clone(), body.clone(), inner);
    }
    let mut avoid: BTreeSet<Sym> = body_free;
    for (_, t) in &inner {
        if let Term::Var(x) = t {
            avoid.insert(x.clone());
        }
    }
    let fresh = fresh_name(v, &avoid);
    let renamed = body.substitute_terms(&[(v.clone(), Term::Var(fresh.clone()))]);
    (fresh, renamed, inner)
}

pub(crate) fn fresh_name(base: &str, avoid: &BTreeSet<Sym>) -> Sym {
    let mut i = 1usize;
    loop {
        let cand = format!("{base}_{i}");
        if !avoid.iter().any(|s| **s == *cand) {
            return sym(&cand);
        }
        i += 1;
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::True => f.write_str("true"),
            Formula::False => f.write_str("false"),
            Formula::Atom(a) => write!(f, "{a}"),
            Formula::Eq(x, y) => write!(f, "{x} = {y}"),
            Formula::ActionIs(t) => write!(f, "{ACTION_VAR} = {t}"),
            Formula::Not(x) => match **x {
                Formula::Eq(..) | Formula::ActionIs(_) => write!(f, "~({x})"),
                _ => write!(f, "~{x}"),
            },
            Formula::And(x, y) => write!(f, "({x} & {y})"),
            Formula::Or(x, y) => write!(f, "({x} | {y})"),
            Formula::Implies(x, y) => write!(f, "({x} -> {y})"),
            Formula::Iff(x, y) => write!(f, "({x} <-> {y})"),
            Formula::Forall(v, b) => write!(f, "(forall {v}. {b})"),
            Formula::Exists(v, b) => write!(f, "(exists {v}. {b})"),
        }
    }
}

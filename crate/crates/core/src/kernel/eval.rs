use super::formula::{Formula, Sym, Term};
use super::state::{Vocabulary, WorldState};
use crate::error::{Error, Result};

/// Variable bindings to object indices. Later bindings shadow earlier ones.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Env {
    binds: Vec<(Sym, u32)>,
}

impl Env {
    pub fn new() -> Env {
        Env::default()
    }

    /// Builds an environment from `(variable, object name)` pairs.
    pub fn from_names(vocab: &Vocabulary, pairs: &[(&str, &str)]) -> Result<Env> {
        let mut env = Env::new();
        for (v, o) in pairs {
            env.push(Sym::from(*v), vocab.domain().index_of(o)?);
        }
        Ok(env)
    }

    #[inline]
    pub fn push(&mut self, var: Sym, obj: u32) {
        self.binds.push((var, obj));
    }

    #[inline]
    pub fn pop(&mut self) {
        self.binds.pop();
    }

    #[inline]
    pub fn lookup(&self, var: &str) -> Option<u32> {
        self.binds
            .iter()
            .rev()
            .find(|(v, _)| &**v == var)
            .map(|(_, o)| *o)
    }

    pub fn is_empty(&self) -> bool {
        self.binds.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &(Sym, u32)> {
        self.binds.iter()
    }
}

#[inline]
pub(crate) fn resolve_term(t: &Term, vocab: &Vocabulary, env: &Env) -> Result<u32> {
    match t {
        Term::Var(v) => env
            .lookup(v)
            .ok_or_else(|| Error::UnboundVariable(v.to_string())),
        Term::Obj(o) => vocab.domain().index_of(o),
    }
}

/// Tarskian truth of `phi` in `w`; quantifiers range over the declared
/// object domain (substitutional reading).
pub fn eval(phi: &Formula, w: &WorldState, vocab: &Vocabulary, env: &Env) -> Result<bool> {
    let mut env = env.clone();
    eval_in(phi, w, vocab, &mut env)
}

pub(crate) fn eval_in(
    phi: &Formula,
    w: &WorldState,
    vocab: &Vocabulary,
    env: &mut Env,
) -> Result<bool> {
    Ok(match phi {
        Formula::True => true,
        Formula::False => false,
        Formula::Atom(a) => {
            let f = vocab.fluent_index(&a.fluent)?;
            let decl = vocab.fluent(f);
            if decl.arity != a.args.len() {
                return Err(Error::ArityMismatch {
                    symbol: a.fluent.to_string(),
                    expected: decl.arity,
                    found: a.args.len(),
                });
            }
            let n = vocab.domain().len();
            let mut idx = 0usize;
            for t in &a.args {
                idx = idx * n + resolve_term(t, vocab, env)? as usize;
            }
            w.get(decl.offset() + idx)
        }
        Formula::Eq(x, y) => resolve_term(x, vocab, env)? == resolve_term(y, vocab, env)?,
        Formula::ActionIs(t) => return Err(Error::UnresolvedActionEquality(t.to_string())),
        Formula::Not(x) => !eval_in(x, w, vocab, env)?,
        Formula::And(x, y) => eval_in(x, w, vocab, env)? && eval_in(y, w, vocab, env)?,
        Formula::Or(x, y) => eval_in(x, w, vocab, env)? || eval_in(y, w, vocab, env)?,
        Formula::Implies(x, y) => !eval_in(x, w, vocab, env)? || eval_in(y, w, vocab, env)?,
        Formula::Iff(x, y) => eval_in(x, w, vocab, env)? == eval_in(y, w, vocab, env)?,
        Formula::Forall(v, body) => {
            let mut all = true;
            for o in 0..vocab.domain().len() as u32 {
                env.push(v.clone(), o);
                let r = eval_in(body, w, vocab, env);
                env.pop();
                if !r? {
                    all = false;
                    break;
                }
            }
            all
        }
        Formula::Exists(v, body) => {
            let mut any = false;
            for o in 0..vocab.domain().len() as u32 {
                env.push(v.clone(), o);
                let r = eval_in(body, w, vocab, env);
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

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::state::Domain;
    use std::sync::Arc;

    fn setup() -> (Vocabulary, WorldState) {
        let d = Arc::new(Domain::new(["A", "B"]).unwrap());
        let v = Vocabulary::new(d, [("P", 1usize), ("Q", 0)]).unwrap();
        let mut w = v.empty_state();
        w.set(v.ground_atom("P", &[Term::obj("B")]).unwrap(), true);
        (v, w)
    }

    #[test]
    fn truth_constant() {
        let (v, w) = setup();
        assert!(eval(&Formula::True, &w, &v, &Env::new()).unwrap());
        assert!(!eval(&Formula::False, &w, &v, &Env::new()).unwrap());
    }

    #[test]
    fn quantifiers_expand_over_domain() {
        let (v, w) = setup();
        let p = Formula::atom("P", vec![Term::var("x")]);
        assert!(eval(&Formula::exists("x", p.clone()), &w, &v, &Env::new()).unwrap());
        assert!(!eval(&Formula::forall("x", p), &w, &v, &Env::new()).unwrap());
    }

    #[test]
    fn errors_for_unknown_fluent_and_unbound_variable() {
        let (v, w) = setup();
        assert_eq!(
            eval(&Formula::atom("Z", vec![]), &w, &v, &Env::new()),
            Err(Error::UnknownFluent("Z".into()))
        );
        assert_eq!(
            eval(
                &Formula::atom("P", vec![Term::var("y")]),
                &w,
                &v,
                &Env::new()
            ),
            Err(Error::UnboundVariable("y".into()))
        );
    }

    #[test]
    fn environment_binds_free_variables() {
        let (v, w) = setup();
        let env = Env::from_names(&v, &[("x", "B")]).unwrap();
        assert!(eval(&Formula::atom("P", vec![Term::var("x")]), &w, &v, &env).unwrap());
    }
}

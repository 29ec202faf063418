//! Object names, situation-suppressed formulas and world states.

mod compiled;
mod eval;
mod formula;
mod simplify;
mod state;

pub use compiled::CompiledFormula;
pub use eval::{eval, Env};
pub(crate) use eval::{eval_in, resolve_term};
pub use formula::{sym, ActionTerm, FluentAtom, Formula, GroundAction, Sym, Term, ACTION_VAR};
pub use simplify::simplify;
pub use state::{Domain, FluentDecl, Vocabulary, WorldState};

/// Convenience for `Formula::substitute` with string pairs.
pub fn substitute(phi: &Formula, binding: &[(&str, &str)]) -> Formula {
    let b: Vec<(Sym, Sym)> = binding.iter().map(|(v, o)| (sym(v), sym(o))).collect();
    phi.substitute(&b)
}

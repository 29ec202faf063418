//! Equivalence-preserving simplification over a nonempty finite domain
//! with unique names. Used after action instantiation of successor-state
//! axioms, where the one-point rule removes most quantifiers.

use super::formula::{Formula, Sym, Term};

pub fn simplify(phi: &Formula) -> Formula {
    match phi {
        Formula::True | Formula::False | Formula::Atom(_) | Formula::ActionIs(_) => phi.clone(),
        Formula::Eq(x, y) => match (x, y) {
            _ if x == y => Formula::True,
            (Term::Obj(_), Term::Obj(_)) => Formula::False,
            _ => phi.clone(),
        },
        Formula::Not(x) => negate(simplify(x)),
        Formula::And(x, y) => and(simplify(x), simplify(y)),
        Formula::Or(x, y) => or(simplify(x), simplify(y)),
        Formula::Implies(x, y) => or(negate(simplify(x)), simplify(y)),
        Formula::Iff(x, y) => match (simplify(x), simplify(y)) {
            (Formula::True, b) => b,
            (a, Formula::True) => a,
            (Formula::False, b) => negate(b),
            (a, Formula::False) => negate(a),
            (a, b) if a == b => Formula::True,
            (a, b) => Formula::iff(a, b),
        },
        Formula::Exists(v, b) => exists(v, simplify(b)),
        Formula::Forall(v, b) => negate(exists(v, negate(simplify(b)))),
    }
}

fn negate(f: Formula) -> Formula {
    match f {
        Formula::True => Formula::False,
        Formula::False => Formula::True,
        Formula::Not(x) => *x,
        other => Formula::not(other),
    }
}

fn and(a: Formula, b: Formula) -> Formula {
    match (a, b) {
        (Formula::False, _) | (_, Formula::False) => Formula::False,
        (Formula::True, x) | (x, Formula::True) => x,
        (x, y) if x == y => x,
        (x, y) => Formula::and(x, y),
    }
}

fn or(a: Formula, b: Formula) -> Formula {
    match (a, b) {
        (Formula::True, _) | (_, Formula::True) => Formula::True,
        (Formula::False, x) | (x, Formula::False) => x,
        (x, y) if x == y => x,
        (x, y) => Formula::or(x, y),
    }
}

fn conjuncts(f: Formula, out: &mut Vec<Formula>) {
    match f {
        Formula::And(x, y) => {
            conjuncts(*x, out);
            conjuncts(*y, out);
        }
        other => out.push(other),
    }
}

/// `exists v. body` where `body` is already simplified.
fn exists(v: &Sym, body: Formula) -> Formula {
    if !body.free_vars().contains(v) {
        // the domain is nonempty wherever quantifiers are simplified
        return body;
    }
    match body {
        Formula::Or(x, y) => or(exists(v, *x), exists(v, *y)),
        body => {
            let mut parts = Vec::new();
            conjuncts(body, &mut parts);
            let witness = parts.iter().find_map(|p| match p {
                Formula::Eq(Term::Var(x), Term::Obj(c))
                | Formula::Eq(Term::Obj(c), Term::Var(x))
                    if x == v =>
                {
                    Some(c.clone())
                }
                _ => None,
            });
            match witness {
                Some(c) => {
                    let rest = Formula::conj(parts).substitute(&[(v.clone(), c)]);
                    simplify(&rest)
                }
                None => Formula::Exists(v.clone(), Box::new(Formula::conj(parts))),
            }
        }
    }
}

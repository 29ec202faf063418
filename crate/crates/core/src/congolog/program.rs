use std::collections::BTreeSet;
use std::fmt;

use crate::kernel::{ActionTerm, Formula, Sym, Term};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Program {
    /// The empty program `true?`.
    Nil,
    Action(ActionTerm),
    Test(Formula),
    Seq(Box<Program>, Box<Program>),
    Choice(Box<Program>, Box<Program>),
    Pick(Sym, Box<Program>),
    Star(Box<Program>),
    Interleave(Box<Program>, Box<Program>),
}

impl Program {
    pub fn action(name: &str, args: Vec<Term>) -> Program {
        Program::Action(ActionTerm {
            name: Sym::from(name),
            args,
        })
    }

    pub fn test(phi: Formula) -> Program {
        if phi == Formula::True {
            Program::Nil
        } else {
            Program::Test(phi)
        }
    }

    pub fn seq(p: Program, q: Program) -> Program {
        Program::Seq(Box::new(p), Box::new(q))
    }

    pub fn choice(p: Program, q: Program) -> Program {
        Program::Choice(Box::new(p), Box::new(q))
    }

    pub fn pick(v: &str, body: Program) -> Program {
        Program::Pick(Sym::from(v), Box::new(body))
    }

    pub fn star(p: Program) -> Program {
        Program::Star(Box::new(p))
    }

    pub fn interleave(p: Program, q: Program) -> Program {
        Program::Interleave(Box::new(p), Box::new(q))
    }

    /// Right-nested sequence; the empty list is `nil`.
    pub fn sequence(items: impl IntoIterator<Item = Program>) -> Program {
        let items: Vec<Program> = items.into_iter().collect();
        items
            .into_iter()
            .rev()
            .reduce(|acc, p| Program::seq(p, acc))
            .unwrap_or(Program::Nil)
    }

    /// Right-nested choice; the empty list is `false?` (no transitions,
    /// never final).
    pub fn alternatives(items: impl IntoIterator<Item = Program>) -> Program {
        let items: Vec<Program> = items.into_iter().collect();
        items
            .into_iter()
            .rev()
            .reduce(|acc, p| Program::choice(p, acc))
            .unwrap_or(Program::Test(Formula::False))
    }

    /// `if phi then p else q` as `[phi?; p] | [~phi?; q]`.
    pub fn if_then_else(phi: Formula, p: Program, q: Program) -> Program {
        Program::choice(
            Program::seq(Program::test(phi.clone()), p),
            Program::seq(Program::test(Formula::not(phi)), q),
        )
    }

    /// `while phi do p` as `(phi?; p)*; ~phi?`.
    pub fn while_do(phi: Formula, p: Program) -> Program {
        Program::seq(
            Program::star(Program::seq(Program::test(phi.clone()), p)),
            Program::test(Formula::not(phi)),
        )
    }

    pub fn free_vars(&self) -> BTreeSet<Sym> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<Sym>, out: &mut BTreeSet<Sym>) {
        match self {
            Program::Nil => {}
            Program::Action(t) => {
                for a in &t.args {
                    if let Term::Var(v) = a {
                        if !bound.contains(v) {
                            out.insert(v.clone());
                        }
                    }
                }
            }
            Program::Test(phi) => {
                for v in phi.free_vars() {
                    if !bound.contains(&v) {
                        out.insert(v);
                    }
                }
            }
            Program::Seq(p, q) | Program::Choice(p, q) | Program::Interleave(p, q) => {
                p.collect_free(bound, out);
                q.collect_free(bound, out);
            }
            Program::Pick(v, p) => {
                bound.push(v.clone());
                p.collect_free(bound, out);
                bound.pop();
            }
            Program::Star(p) => p.collect_free(bound, out),
        }
    }

    /// Replaces free variables by object names. Objects cannot be
    /// captured, so only shadowing by `pi` needs care.
    pub fn substitute(&self, binding: &[(Sym, Sym)]) -> Program {
        if binding.is_empty() {
            return self.clone();
        }
        match self {
            Program::Nil => Program::Nil,
            Program::Action(t) => Program::Action(ActionTerm {
                name: t.name.clone(),
                args: t
                    .args
                    .iter()
                    .map(|a| match a {
                        Term::Var(v) => binding
                            .iter()
                            .rev()
                            .find(|(x, _)| x == v)
                            .map(|(_, o)| Term::Obj(o.clone()))
                            .unwrap_or_else(|| a.clone()),
                        Term::Obj(_) => a.clone(),
                    })
                    .collect(),
            }),
            Program::Test(phi) => Program::test(phi.substitute(binding)),
            Program::Seq(p, q) => Program::seq(p.substitute(binding), q.substitute(binding)),
            Program::Choice(p, q) => Program::choice(p.substitute(binding), q.substitute(binding)),
            Program::Interleave(p, q) => {
                Program::interleave(p.substitute(binding), q.substitute(binding))
            }
            Program::Star(p) => Program::star(p.substitute(binding)),
            Program::Pick(v, p) => {
                let inner: Vec<(Sym, Sym)> =
                    binding.iter().filter(|(x, _)| x != v).cloned().collect();
                Program::Pick(v.clone(), Box::new(p.substitute(&inner)))
            }
        }
    }

    /// Visits every test formula and action term.
    pub fn for_each_part(&self, f: &mut dyn FnMut(Part<'_>)) {
        match self {
            Program::Nil => {}
            Program::Action(t) => f(Part::Action(t)),
            Program::Test(phi) => f(Part::Test(phi)),
            Program::Seq(p, q) | Program::Choice(p, q) | Program::Interleave(p, q) => {
                p.for_each_part(f);
                q.for_each_part(f);
            }
            Program::Pick(_, p) | Program::Star(p) => p.for_each_part(f),
        }
    }

    /// Canonical form used to compare residual programs: `nil` units
    /// removed from sequences and interleavings, sequences right-nested,
    /// choice branches flattened, sorted and deduplicated, interleaved
    /// components sorted.
    pub fn normalize(&self) -> Program {
        match self {
            Program::Nil | Program::Action(_) => self.clone(),
            Program::Test(phi) => Program::test(phi.clone()),
            Program::Seq(..) => {
                let mut items = Vec::new();
                self.flatten_seq(&mut items);
                Program::sequence(items)
            }
            Program::Choice(..) => {
                let mut items = Vec::new();
                self.flatten_choice(&mut items);
                items.sort();
                items.dedup();
                Program::alternatives(items)
            }
            Program::Interleave(..) => {
                let mut items = Vec::new();
                self.flatten_interleave(&mut items);
                items.retain(|p| *p != Program::Nil);
                items.sort();
                items
                    .into_iter()
                    .rev()
                    .reduce(|acc, p| Program::interleave(p, acc))
                    .unwrap_or(Program::Nil)
            }
            Program::Star(p) => match p.normalize() {
                Program::Nil => Program::Nil,
                q => Program::star(q),
            },
            Program::Pick(v, p) => Program::Pick(v.clone(), Box::new(p.normalize())),
        }
    }

    fn flatten_seq(&self, out: &mut Vec<Program>) {
        match self {
            Program::Seq(p, q) => {
                p.flatten_seq(out);
                q.flatten_seq(out);
            }
            other => match other.normalize() {
                Program::Nil => {}
                // a choice whose branches collapse to one sequence
                n @ Program::Seq(..) => n.flatten_seq(out),
                n => out.push(n),
            },
        }
    }

    fn flatten_choice(&self, out: &mut Vec<Program>) {
        match self {
            Program::Choice(p, q) => {
                p.flatten_choice(out);
                q.flatten_choice(out);
            }
            other => match other.normalize() {
                n @ Program::Choice(..) => n.flatten_choice(out),
                n => out.push(n),
            },
        }
    }

    fn flatten_interleave(&self, out: &mut Vec<Program>) {
        match self {
            Program::Interleave(p, q) => {
                p.flatten_interleave(out);
                q.flatten_interleave(out);
            }
            other => match other.normalize() {
                n @ Program::Interleave(..) => n.flatten_interleave(out),
                n => out.push(n),
            },
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub enum Part<'a> {
    Action(&'a ActionTerm),
    Test(&'a Formula),
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Program::Nil => f.write_str("nil"),
            Program::Action(t) => write!(f, "{t}"),
            Program::Test(phi) => write!(f, "({phi})?"),
            Program::Seq(p, q) => write!(f, "({p} ; {q})"),
            Program::Choice(p, q) => write!(f, "({p} | {q})"),
            Program::Interleave(p, q) => write!(f, "({p} || {q})"),
            Program::Pick(v, p) => write!(f, "(pi {v} . {p})"),
            Program::Star(p) => write!(f, "({p})*"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn act(n: &str) -> Program {
        Program::action(n, vec![])
    }

    #[test]
    fn normalization_drops_nil_and_sorts_choices() {
        let p = Program::seq(Program::Nil, Program::seq(act("a"), Program::Nil));
        assert_eq!(p.normalize(), act("a"));
        let q = Program::choice(act("b"), Program::choice(act("a"), act("b")));
        assert_eq!(q.normalize(), Program::choice(act("a"), act("b")));
        let r = Program::interleave(act("b"), act("a"));
        assert_eq!(r.normalize(), Program::interleave(act("a"), act("b")));
    }

    #[test]
    fn sequences_are_right_nested() {
        let left = Program::seq(Program::seq(act("a"), act("b")), act("c"));
        let right = Program::seq(act("a"), Program::seq(act("b"), act("c")));
        assert_eq!(left.normalize(), right);
    }

    #[test]
    fn pick_shadows_substitution() {
        let p = Program::seq(
            Program::action("go", vec![Term::var("x")]),
            Program::pick("x", Program::action("go", vec![Term::var("x")])),
        );
        let q = p.substitute(&[(Sym::from("x"), Sym::from("A"))]);
        assert_eq!(q.to_string(), "(go(A) ; (pi x . go(x)))");
        assert!(q.free_vars().is_empty());
    }

    #[test]
    fn true_test_is_nil() {
        assert_eq!(Program::test(Formula::True), Program::Nil);
        assert_eq!(Program::sequence(vec![]), Program::Nil);
    }
}

//! Slot-resolved formulas for the hot paths (preconditions, successor-state
//! updates, mapped fluents). Names are resolved once; evaluation only
//! touches integers and the state bitset.

use super::formula::{Formula, Sym, Term};
use super::state::{Vocabulary, WorldState};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Slot {
    Const(u32),
    Var(u16),
}

#[derive(Clone, Debug)]
enum Code {
    True,
    False,
    Atom { offset: usize, args: Vec<Slot> },
    Eq(Slot, Slot),
    Not(Box<Code>),
    And(Vec<Code>),
    Or(Vec<Code>),
    Iff(Box<Code>, Box<Code>),
    Forall(u16, Box<Code>),
    Exists(u16, Box<Code>),
}

#[derive(Clone, Debug)]
pub struct CompiledFormula {
    code: Code,
    params: usize,
    slots: usize,
    domain: u32,
}

struct Compiler<'a> {
    vocab: &'a Vocabulary,
    scope: Vec<Sym>,
    max: usize,
}

impl Compiler<'_> {
    fn slot(&self, t: &Term) -> Result<Slot> {
        match t {
            Term::Var(v) => self
                .scope
                .iter()
                .rposition(|s| s == v)
                .map(|i| Slot::Var(i as u16))
                .ok_or_else(|| Error::UnboundVariable(v.to_string())),
            Term::Obj(o) => Ok(Slot::Const(self.vocab.domain().index_of(o)?)),
        }
    }

    fn compile(&mut self, phi: &Formula) -> Result<Code> {
        Ok(match phi {
            Formula::True => Code::True,
            Formula::False => Code::False,
            Formula::Atom(a) => {
                let f = self.vocab.fluent_index(&a.fluent)?;
                let decl = self.vocab.fluent(f);
                if decl.arity != a.args.len() {
                    return Err(Error::ArityMismatch {
                        symbol: a.fluent.to_string(),
                        expected: decl.arity,
                        found: a.args.len(),
                    });
                }
                let args = a.args.iter().map(|t| self.slot(t)).collect::<Result<_>>()?;
                Code::Atom {
                    offset: decl.offset(),
                    args,
                }
            }
            Formula::Eq(x, y) => match (self.slot(x)?, self.slot(y)?) {
                (Slot::Const(a), Slot::Const(b)) => {
                    if a == b {
                        Code::True
                    } else {
                        Code::False
                    }
                }
                (a, b) => Code::Eq(a, b),
            },
            Formula::ActionIs(t) => return Err(Error::UnresolvedActionEquality(t.to_string())),
            Formula::Not(x) => Code::Not(Box::new(self.compile(x)?)),
            Formula::And(x, y) => {
                let mut items = Vec::new();
                self.flatten(x, true, &mut items)?;
                self.flatten(y, true, &mut items)?;
                Code::And(items)
            }
            Formula::Or(x, y) => {
                let mut items = Vec::new();
                self.flatten(x, false, &mut items)?;
                self.flatten(y, false, &mut items)?;
                Code::Or(items)
            }
            Formula::Implies(x, y) => Code::Or(vec![
                Code::Not(Box::new(self.compile(x)?)),
                self.compile(y)?,
            ]),
            Formula::Iff(x, y) => Code::Iff(Box::new(self.compile(x)?), Box::new(self.compile(y)?)),
            Formula::Forall(v, b) | Formula::Exists(v, b) => {
                let slot = self.scope.len() as u16;
                self.scope.push(v.clone());
                self.max = self.max.max(self.scope.len());
                let body = self.compile(b);
                self.scope.pop();
                let body = Box::new(body?);
                if matches!(phi, Formula::Forall(..)) {
                    Code::Forall(slot, body)
                } else {
                    Code::Exists(slot, body)
                }
            }
        })
    }

    fn flatten(&mut self, phi: &Formula, conj: bool, out: &mut Vec<Code>) -> Result<()> {
        match (phi, conj) {
            (Formula::And(x, y), true) | (Formula::Or(x, y), false) => {
                self.flatten(x, conj, out)?;
                self.flatten(y, conj, out)
            }
            _ => {
                out.push(self.compile(phi)?);
                Ok(())
            }
        }
    }
}

impl CompiledFormula {
    /// Compiles `phi` whose free variables must be among `params`; at
    /// evaluation time the i-th argument binds `params[i]`.
    pub fn compile(phi: &Formula, vocab: &Vocabulary, params: &[Sym]) -> Result<CompiledFormula> {
        let mut c = Compiler {
            vocab,
            scope: params.to_vec(),
            max: params.len(),
        };
        let code = c.compile(phi)?;
        Ok(CompiledFormula {
            code,
            params: params.len(),
            slots: c.max,
            domain: vocab.domain().len() as u32,
        })
    }

    pub fn param_count(&self) -> usize {
        self.params
    }

    pub fn eval(&self, w: &WorldState, args: &[u32]) -> bool {
        debug_assert_eq!(args.len(), self.params);
        if self.slots <= 16 {
            let mut buf = [0u32; 16];
            buf[..args.len()].copy_from_slice(args);
            self.run(&self.code, w, &mut buf)
        } else {
            let mut buf = vec![0u32; self.slots];
            buf[..args.len()].copy_from_slice(args);
            self.run(&self.code, w, &mut buf)
        }
    }

    /// Evaluates with a caller-provided scratch buffer of at least
    /// [`CompiledFormula::scratch_len`] entries whose prefix holds the
    /// arguments.
    pub fn eval_scratch(&self, w: &WorldState, scratch: &mut [u32]) -> bool {
        self.run(&self.code, w, scratch)
    }

    pub fn scratch_len(&self) -> usize {
        self.slots
    }

    pub fn is_constant(&self) -> Option<bool> {
        match self.code {
            Code::True => Some(true),
            Code::False => Some(false),
            _ => None,
        }
    }

    #[inline]
    fn get(slot: Slot, env: &[u32]) -> u32 {
        match slot {
            Slot::Const(c) => c,
            Slot::Var(v) => env[v as usize],
        }
    }

    fn run(&self, code: &Code, w: &WorldState, env: &mut [u32]) -> bool {
        match code {
            Code::True => true,
            Code::False => false,
            Code::Atom { offset, args } => {
                let mut idx = 0usize;
                for s in args {
                    idx = idx * self.domain as usize + Self::get(*s, env) as usize;
                }
                w.get(offset + idx)
            }
            Code::Eq(a, b) => Self::get(*a, env) == Self::get(*b, env),
            Code::Not(x) => !self.run(x, w, env),
            Code::And(items) => items.iter().all(|c| self.run(c, w, env)),
            Code::Or(items) => items.iter().any(|c| self.run(c, w, env)),
            Code::Iff(x, y) => self.run(x, w, env) == self.run(y, w, env),
            Code::Forall(slot, body) => (0..self.domain).all(|o| {
                env[*slot as usize] = o;
                self.run(body, w, env)
            }),
            Code::Exists(slot, body) => (0..self.domain).any(|o| {
                env[*slot as usize] = o;
                self.run(body, w, env)
            }),
        }
    }
}

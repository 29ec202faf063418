use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use super::formula::{sym, GroundAction, Sym, Term};
use crate::error::{Error, Result};

/// The finite, closed set of object names shared by both theories.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Domain {
    names: Vec<Sym>,
    index: HashMap<Sym, u32>,
}

impl Domain {
    pub fn new<S: AsRef<str>>(names: impl IntoIterator<Item = S>) -> Result<Domain> {
        let mut out = Domain {
            names: Vec::new(),
            index: HashMap::new(),
        };
        for n in names {
            let n = sym(n.as_ref());
            if out.index.contains_key(&n) {
                return Err(Error::InvalidTheory(format!("object `{n}` declared twice")));
            }
            out.index.insert(n.clone(), out.names.len() as u32);
            out.names.push(n);
        }
        Ok(out)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[Sym] {
        &self.names
    }

    pub fn name(&self, idx: u32) -> &Sym {
        &self.names[idx as usize]
    }

    pub fn index_of(&self, name: &str) -> Result<u32> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownObject(name.to_string()))
    }

    pub fn contains(&self, name: &str) -> bool {
        self.index.contains_key(name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FluentDecl {
    pub name: Sym,
    pub arity: usize,
    offset: usize,
}

impl FluentDecl {
    pub fn offset(&self) -> usize {
        self.offset
    }
}

/// Fluent symbols of one theory, laid out so every ground atom has a
/// fixed bit position: `offset + mixed-radix(args)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    domain: Arc<Domain>,
    fluents: Vec<FluentDecl>,
    index: HashMap<Sym, usize>,
    atom_count: usize,
}

impl Vocabulary {
    pub fn new<S: AsRef<str>>(
        domain: Arc<Domain>,
        fluents: impl IntoIterator<Item = (S, usize)>,
    ) -> Result<Vocabulary> {
        let mut v = Vocabulary {
            domain,
            fluents: Vec::new(),
            index: HashMap::new(),
            atom_count: 0,
        };
        let n = v.domain.len();
        for (name, arity) in fluents {
            let name = sym(name.as_ref());
            if v.index.contains_key(&name) {
                return Err(Error::InvalidTheory(format!(
                    "fluent `{name}` declared twice"
                )));
            }
            let size = n
                .checked_pow(arity as u32)
                .filter(|s| *s <= 1 << 28)
                .ok_or_else(|| {
                    Error::InvalidTheory(format!("fluent `{name}` has too many ground atoms"))
                })?;
            v.index.insert(name.clone(), v.fluents.len());
            v.fluents.push(FluentDecl {
                name,
                arity,
                offset: v.atom_count,
            });
            v.atom_count += size;
        }
        Ok(v)
    }

    pub fn domain(&self) -> &Arc<Domain> {
        &self.domain
    }

    pub fn fluents(&self) -> &[FluentDecl] {
        &self.fluents
    }

    pub fn fluent_index(&self, name: &str) -> Result<usize> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownFluent(name.to_string()))
    }

    pub fn fluent(&self, idx: usize) -> &FluentDecl {
        &self.fluents[idx]
    }

    pub fn atom_count(&self) -> usize {
        self.atom_count
    }

    /// Number of ground atoms of fluent `idx`.
    pub fn fluent_size(&self, idx: usize) -> usize {
        self.domain.len().pow(self.fluents[idx].arity as u32)
    }

    pub fn atom_index(&self, fluent: usize, args: &[u32]) -> usize {
        let n = self.domain.len();
        let mut idx = 0usize;
        for &a in args {
            idx = idx * n + a as usize;
        }
        self.fluents[fluent].offset + idx
    }

    /// Inverse of [`Vocabulary::atom_index`].
    pub fn decode_atom(&self, atom: usize) -> (usize, Vec<u32>) {
        let f = (0..self.fluents.len())
            .find(|&i| {
                let d = &self.fluents[i];
                atom >= d.offset && atom < d.offset + self.fluent_size(i)
            })
            .expect("atom index out of range");
        let decl = &self.fluents[f];
        let mut rest = atom - decl.offset;
        let n = self.domain.len();
        let mut args = vec![0u32; decl.arity];
        for slot in args.iter_mut().rev() {
            *slot = (rest % n) as u32;
            rest /= n;
        }
        (f, args)
    }

    /// Resolves a ground atom given by names.
    pub fn ground_atom(&self, fluent: &str, args: &[Term]) -> Result<usize> {
        let f = self.fluent_index(fluent)?;
        let decl = &self.fluents[f];
        if decl.arity != args.len() {
            return Err(Error::ArityMismatch {
                symbol: fluent.to_string(),
                expected: decl.arity,
                found: args.len(),
            });
        }
        let mut idx = Vec::with_capacity(args.len());
        for a in args {
            match a {
                Term::Obj(o) => idx.push(self.domain.index_of(o)?),
                Term::Var(v) => return Err(Error::UnboundVariable(v.to_string())),
            }
        }
        Ok(self.atom_index(f, &idx))
    }

    pub fn atom_name(&self, atom: usize) -> String {
        let (f, args) = self.decode_atom(atom);
        let action = GroundAction {
            name: self.fluents[f].name.clone(),
            args: args.iter().map(|a| self.domain.name(*a).clone()).collect(),
        };
        action.to_string()
    }

    pub fn empty_state(&self) -> WorldState {
        WorldState {
            bits: vec![0u64; self.atom_count.div_ceil(64)].into_boxed_slice(),
        }
    }

    /// Renders the true atoms of `w` as `{F(a), G(b, c)}`.
    pub fn render(&self, w: &WorldState) -> String {
        let atoms: Vec<String> = w.true_atoms().map(|i| self.atom_name(i)).collect();
        format!("{{{}}}", atoms.join(", "))
    }
}

/// Total truth assignment to the ground atoms of one vocabulary. Atoms
/// absent from the bitset are false; equality and hashing are structural.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WorldState {
    bits: Box<[u64]>,
}

impl WorldState {
    #[inline]
    pub fn get(&self, atom: usize) -> bool {
        self.bits[atom / 64] >> (atom % 64) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, atom: usize, value: bool) {
        let mask = 1u64 << (atom % 64);
        if value {
            self.bits[atom / 64] |= mask;
        } else {
            self.bits[atom / 64] &= !mask;
        }
    }

    pub fn true_atoms(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.iter().enumerate().flat_map(|(w, &word)| {
            (0..64)
                .filter(move |b| word >> b & 1 == 1)
                .map(move |b| w * 64 + b)
        })
    }
}

impl fmt::Debug for WorldState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.true_atoms()).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vocab() -> Vocabulary {
        let d = Arc::new(Domain::new(["A", "B", "C"]).unwrap());
        Vocabulary::new(d, [("P", 0usize), ("Q", 2), ("R", 1)]).unwrap()
    }

    #[test]
    fn atom_indices_round_trip() {
        let v = vocab();
        assert_eq!(v.atom_count(), 1 + 9 + 3);
        for atom in 0..v.atom_count() {
            let (f, args) = v.decode_atom(atom);
            assert_eq!(v.atom_index(f, &args), atom);
        }
        assert_eq!(v.atom_name(v.atom_index(1, &[2, 0])), "Q(C, A)");
        assert_eq!(v.atom_name(0), "P");
    }

    #[test]
    fn states_compare_structurally() {
        let v = vocab();
        let mut a = v.empty_state();
        let mut b = v.empty_state();
        a.set(5, true);
        assert_ne!(a, b);
        b.set(5, true);
        assert_eq!(a, b);
        a.set(5, false);
        assert!(!a.get(5));
        assert_eq!(v.render(&b), "{Q(B, B)}");
    }

    #[test]
    fn ground_atom_checks_arity_and_names() {
        let v = vocab();
        assert!(matches!(
            v.ground_atom("Q", &[Term::obj("A")]),
            Err(Error::ArityMismatch { .. })
        ));
        assert!(matches!(
            v.ground_atom("Q", &[Term::obj("A"), Term::obj("Z")]),
            Err(Error::UnknownObject(_))
        ));
        assert!(matches!(
            v.ground_atom("Nope", &[]),
            Err(Error::UnknownFluent(_))
        ));
    }
}

use std::path::Path;
use std::sync::Arc;

use super::parser::{parse_mapping, parse_theory, MappingDecl, TheoryDecl};
use crate::bat::BasicActionTheory;
use crate::error::{Error, Result};
use crate::kernel::{Domain, Sym, Term, Vocabulary};
use crate::mapping::{RefinementMapping, TheoryPair};

/// Builds a theory over `domain`. A theory without `init model` blocks
/// gets a single model in which every atom is false.
pub fn build_theory(decl: &TheoryDecl, domain: Arc<Domain>) -> Result<BasicActionTheory> {
    for o in &decl.domain {
        domain.index_of(o)?;
    }
    let vocab = Arc::new(Vocabulary::new(
        domain,
        decl.fluents.iter().map(|(n, a)| (n.as_ref(), *a)),
    )?);
    let mut models = Vec::new();
    for lits in &decl.models {
        let mut w = vocab.empty_state();
        let mut set = std::collections::HashMap::new();
        for lit in lits {
            let args: Vec<Term> = lit.args.iter().cloned().map(Term::Obj).collect();
            let atom = vocab.ground_atom(&lit.fluent, &args)?;
            if let Some(&prev) = set.get(&atom) {
                if prev != lit.positive {
                    return Err(Error::InvalidTheory(format!(
                        "initial model lists both {} and its negation",
                        vocab.atom_name(atom)
                    )));
                }
            }
            set.insert(atom, lit.positive);
            w.set(atom, lit.positive);
        }
        models.push(w);
    }
    if models.is_empty() {
        models.push(vocab.empty_state());
    }
    BasicActionTheory::new(
        vocab,
        decl.actions
            .iter()
            .map(|a| (a.name.clone(), a.params.clone(), a.precondition.clone()))
            .collect(),
        decl.ssas.clone(),
        models,
    )
}

pub fn build_mapping(decl: &MappingDecl) -> Result<RefinementMapping> {
    RefinementMapping::new(decl.actions.clone(), decl.fluents.clone())
}

/// Object domain of a project: the high-level declaration order followed
/// by any objects only the low-level theory declares.
pub fn joint_domain(high: &TheoryDecl, low: &TheoryDecl) -> Result<Arc<Domain>> {
    let mut names: Vec<Sym> = Vec::new();
    for o in high.domain.iter().chain(&low.domain) {
        if !names.contains(o) {
            names.push(o.clone());
        }
    }
    Ok(Arc::new(Domain::new(names.iter().map(|s| s.as_ref()))?))
}

/// The three parsed source files of a workbench project.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProjectSource {
    pub high: TheoryDecl,
    pub low: TheoryDecl,
    pub mapping: MappingDecl,
}

impl ProjectSource {
    pub fn parse(high: &str, low: &str, mapping: &str) -> Result<ProjectSource> {
        Ok(ProjectSource {
            high: parse_theory(high)?,
            low: parse_theory(low)?,
            mapping: parse_mapping(mapping)?,
        })
    }

    /// Fully validated theories and mapping.
    pub fn build(&self) -> Result<TheoryPair> {
        let domain = joint_domain(&self.high, &self.low)?;
        let high = build_theory(&self.high, domain.clone())?;
        let low = build_theory(&self.low, domain)?;
        TheoryPair::new(high, low, build_mapping(&self.mapping)?)
    }
}

/// Reads and validates a project from three files.
pub fn load_project(hl: &Path, ll: &Path, map: &Path) -> Result<TheoryPair> {
    let read = |p: &Path| {
        std::fs::read_to_string(p)
            .map_err(|e| Error::Usage(format!("cannot read {}: {e}", p.display())))
    };
    ProjectSource::parse(&read(hl)?, &read(ll)?, &read(map)?)?.build()
}

pub fn parse_project(high: &str, low: &str, mapping: &str) -> Result<TheoryPair> {
    ProjectSource::parse(high, low, mapping)?.build()
}

//! Source text for parsed declarations. Output re-parses to the same
//! declarations.

use std::fmt::Write as _;

use super::parser::{MappingDecl, TheoryDecl};
use crate::kernel::Sym;

fn params(ps: &[Sym]) -> String {
    if ps.is_empty() {
        String::new()
    } else {
        format!(
            "({})",
            ps.iter().map(|p| p.as_ref()).collect::<Vec<_>>().join(", ")
        )
    }
}

pub fn print_theory(t: &TheoryDecl) -> String {
    let mut s = String::new();
    let names: Vec<&str> = t.domain.iter().map(|d| d.as_ref()).collect();
    let _ = writeln!(s, "domain: {}", names.join(", "));
    let fluents: Vec<String> = t.fluents.iter().map(|(f, a)| format!("{f}/{a}")).collect();
    let _ = writeln!(s, "fluents: {}", fluents.join(", "));
    for a in &t.actions {
        let _ = writeln!(
            s,
            "action {}{} possible when {}",
            a.name,
            params(&a.params),
            a.precondition
        );
    }
    for x in &t.ssas {
        let _ = writeln!(s, "ssa {}{} <- {}", x.fluent, params(&x.params), x.rhs);
    }
    for m in &t.models {
        let lits: Vec<String> = m
            .iter()
            .map(|l| {
                let args: Vec<&str> = l.args.iter().map(|a| a.as_ref()).collect();
                let sign = if l.positive { "" } else { "~" };
                if args.is_empty() {
                    format!("{sign}{}", l.fluent)
                } else {
                    format!("{sign}{}({})", l.fluent, args.join(", "))
                }
            })
            .collect();
        let _ = writeln!(s, "init model {{ {} }}", lits.join(", "));
    }
    s
}

pub fn print_mapping(m: &MappingDecl) -> String {
    let mut s = String::new();
    for a in &m.actions {
        let _ = writeln!(
            s,
            "map action {}{} = {}",
            a.action,
            params(&a.params),
            a.program
        );
    }
    for f in &m.fluents {
        let _ = writeln!(
            s,
            "map fluent {}{} = {}",
            f.fluent,
            params(&f.params),
            f.formula
        );
    }
    s
}

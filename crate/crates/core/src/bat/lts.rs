//! Reachable fragments of the situation tree, collapsed on world state.

use std::collections::HashMap;
use std::fmt::Write as _;

use rayon::prelude::*;

use super::BasicActionTheory;
use crate::error::{Error, Result};
use crate::kernel::{GroundAction, Vocabulary, WorldState};

/// One transition out of a state. For primitive moves `witness` is just
/// `[label]`; for mapped high-level moves it is the low-level execution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Move {
    pub label: GroundAction,
    pub dst: WorldState,
    pub witness: Vec<GroundAction>,
}

pub trait MoveGenerator: Sync {
    fn moves(&self, w: &WorldState) -> Result<Vec<Move>>;
}

/// Executable primitive actions of a theory.
pub struct PrimitiveMoves<'a>(pub &'a BasicActionTheory);

impl MoveGenerator for PrimitiveMoves<'_> {
    fn moves(&self, w: &WorldState) -> Result<Vec<Move>> {
        let bat = self.0;
        let mut out = Vec::new();
        for a in bat.executable_actions(w) {
            let dst = bat.step(&a, w)?;
            out.push(Move {
                label: a.clone(),
                dst,
                witness: vec![a],
            });
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub src: usize,
    pub label: GroundAction,
    pub dst: usize,
    pub witness: Vec<GroundAction>,
}

#[derive(Debug, Clone, Default)]
pub struct Lts {
    pub nodes: Vec<WorldState>,
    pub seeds: Vec<usize>,
    pub edges: Vec<Edge>,
    index: HashMap<WorldState, usize>,
    /// BFS tree: the edge through which each node was first reached.
    parent: Vec<Option<usize>>,
    out: Vec<Vec<usize>>,
}

impl Lts {
    pub fn node_of(&self, w: &WorldState) -> Option<usize> {
        self.index.get(w).copied()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Outgoing edge indices of `node`.
    pub fn outgoing(&self, node: usize) -> &[usize] {
        &self.out[node]
    }

    /// Seed the node descends from, and a shortest witness trace to it.
    pub fn path_to(&self, node: usize) -> (usize, Vec<GroundAction>) {
        let mut chain = Vec::new();
        let mut cur = node;
        while let Some(e) = self.parent[cur] {
            chain.push(e);
            cur = self.edges[e].src;
        }
        let trace = chain
            .iter()
            .rev()
            .flat_map(|&e| self.edges[e].witness.iter().cloned())
            .collect();
        (cur, trace)
    }

    /// `src -label-> dst` lines with rendered states, sorted.
    pub fn edge_list(&self, vocab: &Vocabulary) -> String {
        let mut lines: Vec<String> = self
            .edges
            .iter()
            .map(|e| {
                format!(
                    "{} -{}-> {}",
                    vocab.render(&self.nodes[e.src]),
                    e.label,
                    vocab.render(&self.nodes[e.dst])
                )
            })
            .collect();
        lines.sort();
        let mut s = lines.join("\n");
        s.push('\n');
        s
    }

    pub fn to_dot(&self, vocab: &Vocabulary) -> String {
        let mut s = String::from("digraph lts {\n");
        for (i, w) in self.nodes.iter().enumerate() {
            let shape = if self.seeds.contains(&i) {
                "doublecircle"
            } else {
                "circle"
            };
            let _ = writeln!(
                s,
                "  n{i} [shape={shape}, label=\"{}\"];",
                vocab.render(w).replace('"', "\\\"")
            );
        }
        for e in &self.edges {
            let _ = writeln!(s, "  n{} -> n{} [label=\"{}\"];", e.src, e.dst, e.label);
        }
        s.push_str("}\n");
        s
    }

    fn intern(&mut self, w: WorldState, parent: Option<usize>) -> (usize, bool) {
        if let Some(&i) = self.index.get(&w) {
            return (i, false);
        }
        let i = self.nodes.len();
        self.index.insert(w.clone(), i);
        self.nodes.push(w);
        self.parent.push(parent);
        self.out.push(Vec::new());
        (i, true)
    }
}

/// Least fixed point of the move relation from `from`, explored layer by
/// layer. Move generation within a layer runs in parallel; merging is
/// sequential in frontier order so node numbering is deterministic.
pub fn reachable_states(from: &[WorldState], gen: &dyn MoveGenerator, cap: usize) -> Result<Lts> {
    let mut lts = Lts::default();
    let mut frontier = Vec::new();
    for w in from {
        let (i, fresh) = lts.intern(w.clone(), None);
        if fresh {
            frontier.push(i);
        }
        if !lts.seeds.contains(&i) {
            lts.seeds.push(i);
        }
    }
    if lts.len() > cap {
        return Err(Error::StateSpaceBudgetExceeded { cap });
    }
    while !frontier.is_empty() {
        let states: Vec<&WorldState> = frontier.iter().map(|&i| &lts.nodes[i]).collect();
        let produced: Vec<Result<Vec<Move>>> = if states.len() > 8 {
            states.par_iter().map(|w| gen.moves(w)).collect()
        } else {
            states.iter().map(|w| gen.moves(w)).collect()
        };
        let mut next = Vec::new();
        for (&src, moves) in frontier.iter().zip(produced) {
            for m in moves? {
                let edge = lts.edges.len();
                let (dst, fresh) = lts.intern(m.dst, Some(edge));
                lts.edges.push(Edge {
                    src,
                    label: m.label,
                    dst,
                    witness: m.witness,
                });
                lts.out[src].push(edge);
                if fresh {
                    if lts.len() > cap {
                        return Err(Error::StateSpaceBudgetExceeded { cap });
                    }
                    next.push(dst);
                }
            }
        }
        frontier = next;
    }
    Ok(lts)
}

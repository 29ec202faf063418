use std::collections::HashMap;

use serde::Serialize;

use crate::bat::Lts;
use crate::kernel::GroundAction;
use crate::mapping::TheoryPair;

/// Why a pair of states is outside the largest m-bisimulation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "reason", rename_all = "kebab-case")]
pub enum PruneReason {
    NotIsomorphic,
    /// The high-level state can do `action` but no matching low-level move
    /// stays inside the relation.
    Forth {
        action: String,
    },
    /// A refinement of `action` from the low-level state has no matching
    /// high-level move inside the relation.
    Back {
        action: String,
    },
}

/// The largest m-bisimulation between a high-level and a low-level graph.
/// High-level nodes carry distinct states, so each low-level node is
/// related to at most one high-level node.
#[derive(Clone, Debug)]
pub struct BisimRelation {
    partner: Vec<Option<usize>>,
    iso: Vec<Option<usize>>,
    pruned: HashMap<(usize, usize), PruneReason>,
}

impl BisimRelation {
    pub fn contains(&self, hl: usize, ll: usize) -> bool {
        self.partner[ll] == Some(hl)
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.partner
            .iter()
            .enumerate()
            .filter_map(|(l, h)| h.map(|h| (h, l)))
    }

    pub fn len(&self) -> usize {
        self.partner.iter().filter(|p| p.is_some()).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn reason(&self, hl: usize, ll: usize) -> PruneReason {
        if self.iso[ll] != Some(hl) {
            return PruneReason::NotIsomorphic;
        }
        self.pruned
            .get(&(hl, ll))
            .cloned()
            .expect("pair was removed during refinement")
    }
}

fn moves(lts: &Lts, node: usize) -> impl Iterator<Item = (&GroundAction, usize)> {
    lts.outgoing(node)
        .iter()
        .map(move |&e| (&lts.edges[e].label, lts.edges[e].dst))
}

/// Starts from all m-isomorphic pairs and removes pairs violating the
/// forth or back condition until nothing changes.
pub fn compute_bisimulation(pair: &TheoryPair, hl: &Lts, ll: &Lts) -> BisimRelation {
    let iso: Vec<Option<usize>> = ll
        .nodes
        .iter()
        .map(|w| hl.node_of(&pair.abstract_state(w)))
        .collect();
    let mut partner = iso.clone();
    let mut pruned = HashMap::new();
    loop {
        let mut changed = false;
        for l in 0..ll.len() {
            let Some(h) = partner[l] else { continue };
            let related = |h2: usize, l2: usize| partner[l2] == Some(h2);
            let forth = moves(hl, h)
                .find(|&(a, h2)| !moves(ll, l).any(|(b, l2)| a == b && related(h2, l2)));
            let reason = if let Some((a, _)) = forth {
                Some(PruneReason::Forth {
                    action: a.to_string(),
                })
            } else {
                moves(ll, l)
                    .find(|&(b, l2)| !moves(hl, h).any(|(a, h2)| a == b && related(h2, l2)))
                    .map(|(b, _)| PruneReason::Back {
                        action: b.to_string(),
                    })
            };
            if let Some(r) = reason {
                partner[l] = None;
                pruned.insert((h, l), r);
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    BisimRelation {
        partner,
        iso,
        pruned,
    }
}

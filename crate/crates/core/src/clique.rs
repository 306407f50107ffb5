//! Blue-clique search on small induced subgraphs, using bitset rows.

use rayon::prelude::*;

use crate::bitset::Bits;
use crate::coloring::ColoringOracle;
use crate::vset::Vertex;

/// Blue adjacency of an induced subgraph, indexed locally.
pub struct LocalGraph {
    pub verts: Vec<Vertex>,
    pub rows: Vec<Bits>,
}

impl LocalGraph {
    pub fn blue(o: &ColoringOracle, verts: &[Vertex]) -> Self {
        let k = verts.len();
        let rows = verts
            .par_iter()
            .enumerate()
            .map(|(i, &u)| {
                let mut row = Bits::new(k);
                for (j, &v) in verts.iter().enumerate() {
                    if i != j && o.is_blue(u, v) {
                        row.set(j);
                    }
                }
                row
            })
            .collect();
        LocalGraph {
            verts: verts.to_vec(),
            rows,
        }
    }

    pub fn len(&self) -> usize {
        self.verts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.verts.is_empty()
    }

    /// Searches for a t-clique inside `cand`; the first one in lexicographic
    /// order of local indices is returned. `budget` bounds the number of
    /// search nodes; `None` budget means unlimited.
    pub fn find_clique_in(&self, cand: &Bits, t: usize, budget: Option<u64>) -> CliqueOutcome {
        let mut chosen = Vec::with_capacity(t);
        let mut nodes = 0u64;
        match self.extend(cand, t, &mut chosen, &mut nodes, budget) {
            Some(true) => CliqueOutcome::Found(chosen),
            Some(false) => CliqueOutcome::Absent,
            None => CliqueOutcome::BudgetExhausted,
        }
    }

    pub fn find_clique(&self, t: usize, budget: Option<u64>) -> CliqueOutcome {
        self.find_clique_in(&Bits::full(self.len()), t, budget)
    }

    fn extend(
        &self,
        cand: &Bits,
        need: usize,
        chosen: &mut Vec<usize>,
        nodes: &mut u64,
        budget: Option<u64>,
    ) -> Option<bool> {
        if need == 0 {
            return Some(true);
        }
        if cand.count() < need {
            return Some(false);
        }
        if need == 1 {
            chosen.push(cand.ones().next().expect("nonempty"));
            return Some(true);
        }
        for v in cand.ones() {
            *nodes += 1;
            if let Some(b) = budget {
                if *nodes > b {
                    return None;
                }
            }
            let mut next = cand.and(&self.rows[v]);
            next.keep_above(v);
            if next.count() < need - 1 {
                continue;
            }
            chosen.push(v);
            match self.extend(&next, need - 1, chosen, nodes, budget) {
                Some(true) => return Some(true),
                Some(false) => {
                    chosen.pop();
                }
                None => return None,
            }
        }
        Some(false)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CliqueOutcome {
    Found(Vec<usize>),
    Absent,
    BudgetExhausted,
}

//! Pruning of deepest-level sets to enforce the maximum degree condition.
//!
//! For every deepest-level cube C and every same-level cube A adjacent to it
//! with d(A) ≤ d(C), vertices of S_C with at least |S_A|/cut(δ) blue
//! neighbours in S_A are removed. Cuts are taken against the original S_A.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coloring::{blue_degree, ColoringOracle};
use crate::cube::{dominating_parameter, CubeError, CubeRef};
use crate::preprocess::FamilyForest;
use crate::regime::RegimeParams;
use crate::tiling::TilingRun;
use crate::vset::{Vertex, VertexSet};

#[derive(Debug, Error)]
pub enum PruneError {
    #[error("{cube}: kept {kept} of {original}, below half (removals: {tallies:?})")]
    TooMuchRemoved {
        cube: String,
        kept: usize,
        original: usize,
        tallies: Vec<Removal>,
    },
    #[error("{0} has no assigned set")]
    Unassigned(String),
    #[error(transparent)]
    Cube(#[from] CubeError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Removal {
    pub cube: String,
    pub against: String,
    pub delta: u8,
    pub removed: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrunedCube {
    pub cube: CubeRef,
    pub name: String,
    pub set: usize,
    pub original: usize,
    pub kept: VertexSet,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certification {
    pub pairs_checked: usize,
    /// Largest deg·den/|T_{C′}| seen, as "deg·den/|T|".
    pub tightest: Option<String>,
    pub violations: Vec<String>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrunedAssignment {
    /// Sorted by cube reference.
    pub cubes: Vec<PrunedCube>,
    pub ledger: Vec<Removal>,
    pub certification: Certification,
}

impl PrunedAssignment {
    pub fn get(&self, c: CubeRef) -> Option<&PrunedCube> {
        self.cubes.binary_search_by_key(&c, |p| p.cube).ok().map(|i| &self.cubes[i])
    }

    pub fn kept(&self, c: CubeRef) -> Option<&VertexSet> {
        self.get(c).map(|p| &p.kept)
    }

    pub fn kept_map(&self) -> BTreeMap<CubeRef, VertexSet> {
        self.cubes.iter().map(|p| (p.cube, p.kept.clone())).collect()
    }

    pub fn total_removed(&self) -> usize {
        self.cubes.iter().map(|p| p.original - p.kept.len()).sum()
    }
}

/// Ordered pairs (C, A, δ) of adjacent deepest-level cubes with d(A) ≤ d(C).
pub fn pruning_pairs(run: &TilingRun) -> Result<Vec<(CubeRef, CubeRef, u8)>, CubeError> {
    let t = &run.tiling;
    let top = t.top_level();
    let mut out = Vec::new();
    for r in t.refs().filter(|r| r.level == top) {
        let c = t.get(r);
        for a in t.adjacent_cubes(c, c.codim()) {
            if a.level != top {
                continue;
            }
            let ac = t.get(a);
            let rho = t.level_of_adjacency(c, ac)?;
            out.push((r, a, dominating_parameter(c, ac, rho)?));
        }
    }
    Ok(out)
}

fn deepest_sets(run: &TilingRun, forest: &FamilyForest) -> Result<BTreeMap<CubeRef, usize>, PruneError> {
    let top = run.tiling.top_level();
    run.tiling
        .refs()
        .filter(|r| r.level == top)
        .map(|r| {
            run.assignment
                .set_of(r)
                .filter(|&s| s < forest.sets.len())
                .map(|s| (r, s))
                .ok_or_else(|| PruneError::Unassigned(run.tiling.get(r).to_string()))
        })
        .collect()
}

/// Removes from each `current[C]` the vertices that are heavy into the
/// reference set of an adjacent cube. Returns the kept sets and the ledger.
pub fn prune_against(
    o: &ColoringOracle,
    run: &TilingRun,
    params: &RegimeParams,
    current: &BTreeMap<CubeRef, VertexSet>,
    reference: &BTreeMap<CubeRef, VertexSet>,
) -> Result<(BTreeMap<CubeRef, VertexSet>, Vec<Removal>), PruneError> {
    let t = &run.tiling;
    let pairs = pruning_pairs(run)?;
    let mut heavy: BTreeMap<CubeRef, Vec<Vertex>> = BTreeMap::new();
    let mut ledger = Vec::new();
    for &(c, a, delta) in &pairs {
        let sa = reference[&a].as_slice();
        let den = params.prune_cut_denominator(delta);
        let removed: Vec<Vertex> = current[&c]
            .as_slice()
            .par_iter()
            .copied()
            .filter(|&v| (blue_degree(o, v, sa) as u128).saturating_mul(den) >= sa.len() as u128)
            .collect();
        ledger.push(Removal {
            cube: t.get(c).to_string(),
            against: t.get(a).to_string(),
            delta,
            removed: removed.len(),
        });
        heavy.entry(c).or_default().extend(removed);
    }
    let kept = current
        .iter()
        .map(|(&c, s)| {
            let gone = heavy.remove(&c).map(VertexSet::from_vec).unwrap_or_default();
            (c, s.difference(&gone))
        })
        .collect();
    Ok((kept, ledger))
}

/// Prunes every deepest-level set and certifies the result.
pub fn prune(
    o: &ColoringOracle,
    run: &TilingRun,
    forest: &FamilyForest,
    params: &RegimeParams,
) -> Result<PrunedAssignment, PruneError> {
    let sets = deepest_sets(run, forest)?;
    let original: BTreeMap<CubeRef, VertexSet> =
        sets.iter().map(|(&c, &s)| (c, forest.get(s).vertices.clone())).collect();
    let (kept, ledger) = prune_against(o, run, params, &original, &original)?;
    let certification = certify(o, run, params, &kept)?;
    let mut cubes = Vec::new();
    for (c, k) in kept {
        let orig = original[&c].len();
        let name = run.tiling.get(c).to_string();
        if 2 * k.len() < orig {
            let tallies = ledger.iter().filter(|r| r.cube == name).cloned().collect();
            return Err(PruneError::TooMuchRemoved {
                cube: name,
                kept: k.len(),
                original: orig,
                tallies,
            });
        }
        cubes.push(PrunedCube {
            cube: c,
            name,
            set: sets[&c],
            original: orig,
            kept: k,
        });
    }
    Ok(PrunedAssignment {
        cubes,
        ledger,
        certification,
    })
}

/// Exhaustive check of the max-degree condition: for adjacent C, C′ with
/// d(C) ≥ d(C′), every v ∈ T_C has deg·den(δ) < |T_{C′}|.
pub fn certify(
    o: &ColoringOracle,
    run: &TilingRun,
    params: &RegimeParams,
    kept: &BTreeMap<CubeRef, VertexSet>,
) -> Result<Certification, PruneError> {
    let pairs = pruning_pairs(run)?;
    let mut violations = Vec::new();
    let mut tightest: Option<(u128, u128, String)> = None;
    for &(c, a, delta) in &pairs {
        let ta = kept[&a].as_slice();
        let den = params.degree_bound_denominator(delta);
        let (worst, v) = kept[&c]
            .as_slice()
            .par_iter()
            .map(|&v| (blue_degree(o, v, ta), v))
            .reduce(|| (0, Vertex::MAX), |x, y| if y.0 > x.0 || (y.0 == x.0 && y.1 < x.1) { y } else { x });
        let lhs = (worst as u128).saturating_mul(den);
        let size = ta.len() as u128;
        if lhs >= size {
            violations.push(format!(
                "vertex {v} of {} has {worst} blue neighbours in T of {} (bound |T|/{den} = {size}/{den})",
                run.tiling.get(c),
                run.tiling.get(a)
            ));
        }
        let better = match &tightest {
            None => true,
            Some((l, s, _)) => lhs * s > l * size,
        };
        if better && size > 0 {
            tightest = Some((lhs, size, format!("{lhs}/{size}")));
        }
    }
    Ok(Certification {
        pairs_checked: pairs.len(),
        tightest: tightest.map(|t| t.2),
        pass: violations.is_empty(),
        violations,
    })
}

/// Prunes the kept sets again against the original sets; returns the number
/// of vertices that would be removed (zero for a pruned assignment).
pub fn reprune_count(
    o: &ColoringOracle,
    run: &TilingRun,
    forest: &FamilyForest,
    params: &RegimeParams,
    pruned: &PrunedAssignment,
) -> Result<usize, PruneError> {
    let sets = deepest_sets(run, forest)?;
    let original: BTreeMap<CubeRef, VertexSet> =
        sets.iter().map(|(&c, &s)| (c, forest.get(s).vertices.clone())).collect();
    let current = pruned.kept_map();
    let (kept, _) = prune_against(o, run, params, &current, &original)?;
    Ok(current.iter().map(|(c, s)| s.len() - kept[c].len()).sum())
}

//! Leveled families of blue-clique-free sets.
//!
//! Level 0 holds the single set [N]. Each set at level ℓ−1 is split into
//! children at level ℓ that induce no blue K_{s−ℓ} and have prescribed exact
//! sizes, with an exceptional remainder whenever fewer than half of the
//! parent's vertices were extracted.

use std::collections::HashMap;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bitset::Bits;
use crate::clique::{CliqueOutcome, LocalGraph};
use crate::coloring::ColoringOracle;
use crate::regime::RegimeParams;
use crate::vset::{Vertex, VertexSet};

#[derive(Debug, Error)]
pub enum PreprocessError {
    #[error("level {level} outside 1..={max}")]
    BadLevel { level: u8, max: u8 },
    #[error("parent set {0} is not at the level above")]
    BadParent(usize),
    #[error("N = {0} does not fit 32-bit vertex ids")]
    TooLarge(u64),
    #[error("finder returned an invalid set at stage d = {stage}: {reason}")]
    Finder { stage: u8, reason: String },
    #[error("forest invariant violated: {0}")]
    Invariant(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    /// (a) then (b) then (c), then (d) when the pool is small enough.
    Auto,
    Descent,
    Greedy,
    Walk,
    Exact,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FinderConfig {
    /// Fresh full-pool degree scans allowed per descent call.
    pub descent_probes: usize,
    /// Number of pivots tried by greedy growth.
    pub greedy_restarts: usize,
    /// Largest pool handed to the exact search.
    pub exact_cap: usize,
}

impl Default for FinderConfig {
    fn default() -> Self {
        FinderConfig {
            descent_probes: 2,
            greedy_restarts: 2,
            exact_cap: 40,
        }
    }
}

/// Finder with a per-lineage cache of blue-degree upper bounds.
///
/// A degree measured against a pool stays an upper bound for every later
/// (smaller) pool of the same lineage, so failed pivots are never rescanned.
///
/// Descent is switched off for the rest of a lineage once a whole call fails
/// before any descent call has succeeded: colorings with tiny blue degrees
/// would otherwise pay two full-pool scans per extraction.
pub struct Finder {
    pub config: FinderConfig,
    degree_upper: HashMap<Vertex, u64>,
    descent_hits: usize,
    descent_off: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Found {
    pub set: VertexSet,
    pub strategy: Strategy,
}

impl Finder {
    pub fn new(config: FinderConfig) -> Self {
        Finder {
            config,
            degree_upper: HashMap::new(),
            descent_hits: 0,
            descent_off: false,
        }
    }

    /// An m-subset of `pool` (sorted) inducing no blue K_t, or `None`.
    pub fn find(
        &mut self,
        o: &ColoringOracle,
        pool: &[Vertex],
        t: usize,
        m: usize,
        strategy: Strategy,
    ) -> Option<Found> {
        if t < 2 || m > pool.len() {
            return None;
        }
        if m == 0 {
            return Some(Found {
                set: VertexSet::new(),
                strategy,
            });
        }
        let order: &[Strategy] = match strategy {
            Strategy::Auto => &[Strategy::Descent, Strategy::Greedy, Strategy::Walk, Strategy::Exact],
            Strategy::Descent => &[Strategy::Descent],
            Strategy::Greedy => &[Strategy::Greedy],
            Strategy::Walk => &[Strategy::Walk],
            Strategy::Exact => &[Strategy::Exact],
        };
        for &st in order {
            let got = match st {
                Strategy::Descent if self.descent_off && strategy == Strategy::Auto => None,
                Strategy::Descent => {
                    let got = self.descent(o, pool, t, m);
                    if got.is_some() {
                        self.descent_hits += 1;
                    } else if self.descent_hits == 0 {
                        self.descent_off = true;
                    }
                    got
                }
                Strategy::Greedy => greedy(o, pool, t, m, self.config.greedy_restarts),
                Strategy::Walk => walk(o, pool, t, m),
                Strategy::Exact => {
                    if pool.len() <= self.config.exact_cap || strategy == Strategy::Exact {
                        exact(o, pool, t, m)
                    } else {
                        None
                    }
                }
                Strategy::Auto => None,
            };
            if let Some(v) = got {
                return Some(Found {
                    set: VertexSet::from_vec(v),
                    strategy: st,
                });
            }
        }
        None
    }

    fn descent(&mut self, o: &ColoringOracle, pool: &[Vertex], t: usize, m: usize) -> Option<Vec<Vertex>> {
        let mut probes = 0;
        for &v in pool {
            if probes >= self.config.descent_probes {
                break;
            }
            if self.degree_upper.get(&v).is_some_and(|&d| d < m as u64) {
                continue;
            }
            probes += 1;
            let mut nbrs = Vec::with_capacity(m);
            let mut full = 0u64;
            for &u in pool {
                if u != v && o.is_blue(u, v) {
                    full += 1;
                    if nbrs.len() < m {
                        nbrs.push(u);
                    } else {
                        break;
                    }
                }
            }
            if nbrs.len() < m {
                self.degree_upper.insert(v, full);
                continue;
            }
            if t >= 5 || is_blue_kt_free(o, &nbrs, t) {
                return Some(nbrs);
            }
        }
        None
    }
}

/// Exact check that `set` induces no blue K_t (t ≤ 4 in practice).
pub fn is_blue_kt_free(o: &ColoringOracle, set: &[Vertex], t: usize) -> bool {
    if t == 2 {
        return set
            .par_iter()
            .enumerate()
            .all(|(i, &u)| set[i + 1..].iter().all(|&v| !o.is_blue(u, v)));
    }
    let g = LocalGraph::blue(o, set);
    g.find_clique(t, None) == CliqueOutcome::Absent
}

/// Convenience wrapper with a fresh cache.
pub fn find_free_subset(
    o: &ColoringOracle,
    pool: &VertexSet,
    t: usize,
    m: usize,
    strategy: Strategy,
    config: &FinderConfig,
) -> Option<VertexSet> {
    Finder::new(config.clone())
        .find(o, pool.as_slice(), t, m, strategy)
        .map(|f| f.set)
}

/// (b): grow from a pivot, adding every vertex that keeps the set blue-K_t-free.
fn greedy(o: &ColoringOracle, pool: &[Vertex], t: usize, m: usize, restarts: usize) -> Option<Vec<Vertex>> {
    for r in 0..restarts.min(pool.len()) {
        let pivot = pool[r];
        let mut g = LocalGraph {
            verts: vec![pivot],
            rows: vec![Bits::new(m)],
        };
        for (idx, &u) in pool.iter().enumerate() {
            if g.len() == m {
                break;
            }
            if u == pivot {
                continue;
            }
            if g.len() + (pool.len() - idx) < m {
                break;
            }
            if t == 2 {
                if g.verts.iter().all(|&w| !o.is_blue(u, w)) {
                    g.verts.push(u);
                }
                continue;
            }
            let mut nb = Bits::new(m);
            for (j, &w) in g.verts.iter().enumerate() {
                if o.is_blue(u, w) {
                    nb.set(j);
                }
            }
            let ok = nb.count() < t - 1 || g.find_clique_in(&nb, t - 1, None) == CliqueOutcome::Absent;
            if ok {
                let k = g.len();
                for j in nb.ones() {
                    g.rows[j].set(k);
                }
                g.rows.push(nb);
                g.verts.push(u);
            }
        }
        if g.len() == m {
            return Some(g.verts);
        }
    }
    None
}

/// Upper bound C(x+y−2, x−1) on the Ramsey number R(x, y), saturating.
fn ramsey_bound(x: usize, y: usize) -> u128 {
    if x == 0 || y == 0 {
        return 0;
    }
    let (n, k) = ((x + y - 2) as u128, (x - 1).min(y - 1) as u128);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul(n - i) {
            Some(v) => v / (i + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// (c): the Erdős–Szekeres descent. The red accumulator is always a red
/// clique, so a completed run is blue-K_t-free by construction.
fn walk(o: &ColoringOracle, pool: &[Vertex], t: usize, m: usize) -> Option<Vec<Vertex>> {
    let mut p: Vec<Vertex> = pool.to_vec();
    let mut red_acc = Vec::new();
    let mut blue_acc = 0usize;
    loop {
        if red_acc.len() == m {
            return Some(red_acc);
        }
        if blue_acc == t || p.is_empty() {
            return None;
        }
        let v = p[0];
        let (red, blue): (Vec<Vertex>, Vec<Vertex>) = p[1..].iter().partition(|&&u| !o.is_blue(u, v));
        let a = m - red_acc.len();
        let b = t - blue_acc;
        let go_red = if red.len() as u128 >= ramsey_bound(a - 1, b) {
            true
        } else if blue.len() as u128 >= ramsey_bound(a, b - 1) {
            false
        } else {
            red.len() >= blue.len()
        };
        if go_red {
            red_acc.push(v);
            p = red;
        } else {
            blue_acc += 1;
            p = blue;
        }
    }
}

/// (d): include/exclude branch and bound over the pool in ascending order.
fn exact(o: &ColoringOracle, pool: &[Vertex], t: usize, m: usize) -> Option<Vec<Vertex>> {
    let g = LocalGraph::blue(o, pool);
    let mut chosen = Bits::new(pool.len());
    let mut picked = Vec::with_capacity(m);
    if exact_rec(&g, t, m, 0, &mut chosen, &mut picked) {
        Some(picked.into_iter().map(|i| pool[i]).collect())
    } else {
        None
    }
}

fn exact_rec(g: &LocalGraph, t: usize, m: usize, i: usize, chosen: &mut Bits, picked: &mut Vec<usize>) -> bool {
    if picked.len() == m {
        return true;
    }
    if picked.len() + (g.len() - i) < m {
        return false;
    }
    let nb = chosen.and(&g.rows[i]);
    let fits = nb.count() < t - 1 || g.find_clique_in(&nb, t - 1, None) == CliqueOutcome::Absent;
    if fits {
        chosen.set(i);
        picked.push(i);
        if exact_rec(g, t, m, i + 1, chosen, picked) {
            return true;
        }
        picked.pop();
        chosen.clear(i);
    }
    exact_rec(g, t, m, i + 1, chosen, picked)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LeveledSet {
    pub id: usize,
    pub level: u8,
    pub level_codims: Vec<u8>,
    pub exceptional: bool,
    pub parent: Option<usize>,
    pub vertices: VertexSet,
}

impl LeveledSet {
    /// d(S) = Σ d_i.
    pub fn codim(&self) -> u32 {
        self.level_codims.iter().map(|&d| d as u32).sum()
    }

    /// d_ℓ(S) at the set's own level.
    pub fn own_codim(&self) -> u8 {
        self.level_codims.last().copied().unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Extraction {
    pub id: usize,
    pub parent: usize,
    pub stage: u8,
    pub strategy: Option<Strategy>,
}

/// All leveled sets; the id of a set is its index in `sets`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilyForest {
    pub sets: Vec<LeveledSet>,
    pub log: Vec<Extraction>,
}

impl FamilyForest {
    /// A forest holding only the level-0 set [N].
    pub fn root(n_vertices: u64) -> Result<Self, PreprocessError> {
        let n = u32::try_from(n_vertices).map_err(|_| PreprocessError::TooLarge(n_vertices))?;
        Ok(FamilyForest {
            sets: vec![LeveledSet {
                id: 0,
                level: 0,
                level_codims: vec![],
                exceptional: false,
                parent: None,
                vertices: VertexSet::range(0, n),
            }],
            log: vec![],
        })
    }

    pub fn get(&self, id: usize) -> &LeveledSet {
        &self.sets[id]
    }

    pub fn at_level(&self, level: u8) -> impl Iterator<Item = &LeveledSet> + '_ {
        self.sets.iter().filter(move |s| s.level == level)
    }

    pub fn children(&self, parent: usize) -> impl Iterator<Item = &LeveledSet> + '_ {
        self.sets.iter().filter(move |s| s.parent == Some(parent))
    }

    /// Appends a child by hand (fixtures and tests); structural checks only.
    pub fn push_child(
        &mut self,
        parent: usize,
        own_codim: u8,
        vertices: VertexSet,
        exceptional: bool,
    ) -> Result<usize, PreprocessError> {
        let p = self.sets.get(parent).ok_or(PreprocessError::BadParent(parent))?;
        if !vertices.is_subset(&p.vertices) {
            return Err(PreprocessError::Invariant(format!(
                "child of {parent} is not inside its parent"
            )));
        }
        if self.children(parent).any(|c| !c.vertices.is_disjoint(&vertices)) {
            return Err(PreprocessError::Invariant(format!(
                "child of {parent} overlaps a sibling"
            )));
        }
        let mut level_codims = p.level_codims.clone();
        level_codims.push(own_codim);
        let id = self.sets.len();
        let level = p.level + 1;
        self.sets.push(LeveledSet {
            id,
            level,
            level_codims,
            exceptional,
            parent: Some(parent),
            vertices,
        });
        self.log.push(Extraction {
            id,
            parent,
            stage: own_codim,
            strategy: None,
        });
        Ok(id)
    }

    /// Checks the structural invariants against the regime's size law.
    pub fn validate(&self, params: &RegimeParams) -> Result<(), PreprocessError> {
        for s in &self.sets {
            if s.level == 0 {
                continue;
            }
            let parent = &self.sets[s.parent.ok_or_else(|| PreprocessError::Invariant(format!("set {} has no parent", s.id)))?];
            if parent.level + 1 != s.level || !s.vertices.is_subset(&parent.vertices) {
                return Err(PreprocessError::Invariant(format!("set {} not nested in {}", s.id, parent.id)));
            }
            if s.exceptional {
                if s.own_codim() != 0 {
                    return Err(PreprocessError::Invariant(format!("exceptional set {} has d_ℓ ≠ 0", s.id)));
                }
            } else if params.set_size(s.level, s.codim()) != Some(s.len() as u64) {
                return Err(PreprocessError::Invariant(format!(
                    "set {} has size {} instead of {:?}",
                    s.id,
                    s.len(),
                    params.set_size(s.level, s.codim())
                )));
            }
        }
        for p in &self.sets {
            if p.level >= params.top_level() {
                continue;
            }
            let kids: Vec<_> = self.children(p.id).collect();
            let mass: usize = kids.iter().map(|c| c.len()).sum();
            if 2 * mass < p.len() {
                return Err(PreprocessError::Invariant(format!("children of {} cover less than half", p.id)));
            }
            for (i, a) in kids.iter().enumerate() {
                for b in &kids[i + 1..] {
                    if !a.vertices.is_disjoint(&b.vertices) {
                        return Err(PreprocessError::Invariant(format!("siblings {} and {} overlap", a.id, b.id)));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Children of `parent` at level ℓ (ids are left as placeholders; the forest
/// assigns them on insertion).
pub fn build_family(
    o: &ColoringOracle,
    parent: &LeveledSet,
    level: u8,
    params: &RegimeParams,
    finder: &mut Finder,
    strategy: Strategy,
) -> Result<Vec<(LeveledSet, Option<Strategy>)>, PreprocessError> {
    if level == 0 || level > params.top_level() {
        return Err(PreprocessError::BadLevel {
            level,
            max: params.top_level(),
        });
    }
    if parent.level + 1 != level {
        return Err(PreprocessError::BadParent(parent.id));
    }
    let child = |vertices: VertexSet, d: u8, exceptional: bool| {
        let mut level_codims = parent.level_codims.clone();
        level_codims.push(d);
        LeveledSet {
            id: usize::MAX,
            level,
            level_codims,
            exceptional,
            parent: Some(parent.id),
            vertices,
        }
    };
    if parent.exceptional {
        return Ok(vec![(child(parent.vertices.clone(), 0, true), None)]);
    }
    let t = (params.s - level) as usize;
    let base = parent.codim();
    let top = (params.codim_max(level) as u32).min(params.n as u32 - base.min(params.n as u32));
    let mut pool: Vec<Vertex> = parent.vertices.as_slice().to_vec();
    let mut out = Vec::new();
    for d in 0..=top {
        let Some(size) = params.set_size(level, base + d) else {
            continue;
        };
        let size = size as usize;
        while size <= pool.len() {
            let Some(found) = finder.find(o, &pool, t, size, strategy) else {
                break;
            };
            if found.set.len() != size || !found.set.as_slice().iter().all(|v| pool.binary_search(v).is_ok()) {
                return Err(PreprocessError::Finder {
                    stage: d as u8,
                    reason: "wrong size or vertices outside the pool".into(),
                });
            }
            remove_sorted(&mut pool, found.set.as_slice());
            out.push((child(found.set, d as u8, false), Some(found.strategy)));
        }
    }
    let mass: usize = out.iter().map(|(c, _)| c.len()).sum();
    if 2 * mass < parent.len() {
        out.push((child(VertexSet::from_sorted(pool), 0, true), None));
    }
    Ok(out)
}

/// Removes the sorted `gone` from the sorted `pool`, touching only the span
/// between its extremes.
fn remove_sorted(pool: &mut Vec<Vertex>, gone: &[Vertex]) {
    let (Some(&first), Some(&last)) = (gone.first(), gone.last()) else {
        return;
    };
    let lo = pool.partition_point(|&v| v < first);
    let hi = pool.partition_point(|&v| v <= last);
    let mut k = 0;
    let kept: Vec<Vertex> = pool[lo..hi]
        .iter()
        .copied()
        .filter(|&v| {
            while k < gone.len() && gone[k] < v {
                k += 1;
            }
            !(k < gone.len() && gone[k] == v)
        })
        .collect();
    pool.splice(lo..hi, kept);
}

/// Builds levels 1..=s−2 below the root [N].
pub fn preprocess(
    o: &ColoringOracle,
    params: &RegimeParams,
    config: &FinderConfig,
    strategy: Strategy,
) -> Result<FamilyForest, PreprocessError> {
    let mut forest = FamilyForest::root(o.n() as u64)?;
    for level in 1..=params.top_level() {
        let parents: Vec<usize> = forest.at_level(level - 1).map(|s| s.id).collect();
        for pid in parents {
            let mut finder = Finder::new(config.clone());
            let kids = build_family(o, &forest.sets[pid], level, params, &mut finder, strategy)?;
            for (mut kid, st) in kids {
                let id = forest.sets.len();
                kid.id = id;
                forest.log.push(Extraction {
                    id,
                    parent: pid,
                    stage: kid.own_codim(),
                    strategy: st,
                });
                forest.sets.push(kid);
            }
        }
    }
    Ok(forest)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundKind {
    /// Blue degree from a parent into the union of children of codim ≥ i.
    Spread,
    /// Internal maximum blue degree of a deepest-level set.
    Internal,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegreeCheck {
    pub kind: BoundKind,
    pub level: u8,
    pub set: usize,
    pub i: Option<u32>,
    pub measured: u64,
    /// The bound as a reduced fraction "num/den".
    pub bound: String,
    pub pass: bool,
    pub witness: Option<Vertex>,
    pub sampled: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegreeReport {
    pub checks: Vec<DegreeCheck>,
    pub all_pass: bool,
}

fn sample_vertices(verts: &[Vertex], keep: usize, seed: u64) -> (Vec<Vertex>, bool) {
    if keep >= verts.len() {
        return (verts.to_vec(), false);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut idx: Vec<usize> = sample(&mut rng, verts.len(), keep.max(1)).into_vec();
    idx.sort_unstable();
    (idx.into_iter().map(|i| verts[i]).collect(), true)
}

/// Largest value and the smallest vertex attaining it.
fn argmax(items: impl ParallelIterator<Item = (u64, Vertex)>) -> (u64, Option<Vertex>) {
    items
        .map(|(d, v)| (d, Some(v)))
        .reduce(
            || (0, None),
            |a, b| match (a.1, b.1) {
                (None, _) => b,
                (_, None) => a,
                (Some(va), Some(vb)) => {
                    if a.0 > b.0 || (a.0 == b.0 && va < vb) {
                        a
                    } else {
                        b
                    }
                }
            },
        )
}

/// Measures the spread and internal degree bounds. `budget` caps the number
/// of color evaluations per check; beyond it a seeded vertex sample is used
/// and the check is marked as sampled.
pub fn check_degree_bounds(o: &ColoringOracle, forest: &FamilyForest, params: &RegimeParams, budget: u64) -> DegreeReport {
    let mut checks = Vec::new();
    let n = params.n as i64;
    for level in 1..=params.top_level() {
        for parent in forest.at_level(level - 1) {
            let kids: Vec<&LeveledSet> = forest.children(parent.id).collect();
            let dmax = kids.iter().map(|k| k.own_codim()).max().unwrap_or(0) as usize;
            if dmax == 0 {
                continue;
            }
            let members: Vec<(Vertex, usize)> = {
                let mut m: Vec<(Vertex, usize)> = kids
                    .iter()
                    .filter(|k| k.own_codim() >= 1)
                    .flat_map(|k| k.vertices.iter().map(move |v| (v, k.own_codim() as usize)))
                    .collect();
                m.sort_unstable();
                m
            };
            let keep = (budget / members.len().max(1) as u64) as usize;
            let (verts, sampled) = sample_vertices(parent.vertices.as_slice(), keep, parent.id as u64);
            let per_vertex: Vec<Vec<u64>> = verts
                .par_iter()
                .map(|&v| {
                    let mut cnt = vec![0u64; dmax + 2];
                    for &(u, d) in &members {
                        if u != v && o.is_blue(u, v) {
                            cnt[d] += 1;
                        }
                    }
                    for d in (1..=dmax).rev() {
                        cnt[d] += cnt[d + 1];
                    }
                    cnt
                })
                .collect();
            for i in 1..=dmax {
                let (measured, witness) = argmax(per_vertex.par_iter().zip(verts.par_iter()).map(|(c, &v)| (c[i], v)));
                let e = n - parent.codim() as i64 - i as i64;
                let num = 2 * params.multiplier(level) as u128;
                let pass = if e >= 0 {
                    (measured as u128) <= num << e
                } else {
                    (measured as u128) << (-e) <= num
                };
                let bound = if e >= 0 {
                    format!("{}/1", num << e)
                } else {
                    format!("{}/{}", num, 1u128 << (-e))
                };
                checks.push(DegreeCheck {
                    kind: BoundKind::Spread,
                    level,
                    set: parent.id,
                    i: Some(i as u32),
                    measured,
                    bound,
                    pass,
                    witness: if measured > 0 { witness } else { None },
                    sampled,
                });
            }
        }
    }
    let den = params.internal_degree_denominator();
    for s in forest.at_level(params.top_level()) {
        let keep = (budget / s.len().max(1) as u64) as usize;
        let (verts, sampled) = sample_vertices(s.vertices.as_slice(), keep, s.id as u64 ^ 0xdead);
        let all = s.vertices.as_slice();
        let (measured, witness) = argmax(verts.par_iter().map(|&v| (crate::coloring::blue_degree(o, v, all), v)));
        let e = params.n as i64 - s.codim() as i64;
        let limit = if e >= 0 { 1u128 << e } else { 0 };
        let pass = (measured as u128) * den as u128 <= limit;
        checks.push(DegreeCheck {
            kind: BoundKind::Internal,
            level: s.level,
            set: s.id,
            i: None,
            measured,
            bound: format!("{limit}/{den}"),
            pass,
            witness: if measured > 0 { witness } else { None },
            sampled,
        });
    }
    let all_pass = checks.iter().all(|c| c.pass);
    DegreeReport { checks, all_pass }
}

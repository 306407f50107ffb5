//! The tiling algorithm: grow the (s−1)-fold tiling one cube at a time and
//! assign each cube to an unused leveled set, checking properness by exact
//! blue-edge counts.
//!
//! Each step takes a cube of minimum codimension over all candidates. For a
//! fixed codimension D, candidates are the codim-D blocks not yet covered
//! s−1 times, in lexicographic order. A candidate C at level ℓ inside the
//! covering cube C_{ℓ−1} is tested in two phases: sets bad for cubes
//! ρ-adjacent (ρ < ℓ) to C_ℓ, the codim-d block of the last insertion, are
//! dropped first; the survivors of ℓ-codimension i = D − d(C_{ℓ−1}) are then
//! tested against cubes ℓ-adjacent to C.

use std::collections::{BTreeMap, HashMap};
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coloring::{count_blue_edges, ColoringError, ColoringOracle};
use crate::cube::{dominating_parameter, CubeError, CubeRef, LeveledCube, MultiTiling, SpecialCube, TilingError};
use crate::preprocess::{FamilyForest, LeveledSet};
use crate::regime::RegimeParams;

#[derive(Debug, Error)]
pub enum TilingRunError {
    #[error("invariant breach: {0}")]
    Invariant(String),
    #[error(transparent)]
    Tiling(#[from] TilingError),
    #[error(transparent)]
    Cube(#[from] CubeError),
    #[error(transparent)]
    Coloring(#[from] ColoringError),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
}

/// Cube → set map with a cache of blue-edge counts between set pairs.
#[derive(Debug, Clone, Default)]
pub struct Assignment {
    pub cube_to_set: BTreeMap<CubeRef, usize>,
    pub set_to_cube: HashMap<usize, CubeRef>,
    edge_cache: HashMap<(usize, usize), u64>,
}

impl Assignment {
    pub fn set_of(&self, c: CubeRef) -> Option<usize> {
        self.cube_to_set.get(&c).copied()
    }

    pub fn is_used(&self, set: usize) -> bool {
        self.set_to_cube.contains_key(&set)
    }

    pub fn assign(&mut self, c: CubeRef, set: usize) {
        self.cube_to_set.insert(c, set);
        self.set_to_cube.insert(set, c);
    }

    /// Exchanges the sets of two cubes (fault injection for audits).
    pub fn swap(&mut self, a: CubeRef, b: CubeRef) {
        let (sa, sb) = (self.cube_to_set[&a], self.cube_to_set[&b]);
        self.assign(a, sb);
        self.assign(b, sa);
    }

    fn key(a: usize, b: usize) -> (usize, usize) {
        (a.min(b), a.max(b))
    }

    /// Blue edges between two sets, filling the cache in parallel.
    pub fn edge_counts(
        &mut self,
        o: &ColoringOracle,
        forest: &FamilyForest,
        pairs: &[(usize, usize)],
    ) -> Result<Vec<u64>, ColoringError> {
        let mut missing: Vec<(usize, usize)> = pairs
            .iter()
            .map(|&(a, b)| Self::key(a, b))
            .filter(|k| !self.edge_cache.contains_key(k))
            .collect();
        missing.sort_unstable();
        missing.dedup();
        let got: Vec<Result<u64, ColoringError>> = missing
            .par_iter()
            .map(|&(a, b)| count_blue_edges(o, &forest.get(a).vertices, &forest.get(b).vertices))
            .collect();
        for (k, r) in missing.into_iter().zip(got) {
            self.edge_cache.insert(k, r?);
        }
        Ok(pairs.iter().map(|&(a, b)| self.edge_cache[&Self::key(a, b)]).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BadMass {
    pub against: String,
    pub mass: u64,
    pub parent_size: u64,
    /// Holds when mass·D(ℓ−1) ≤ |S_par|·D(ℓ) for the thresholds D involved.
    pub within: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepEvent {
    pub step: usize,
    pub cube: String,
    pub level: u8,
    pub codim: u8,
    pub set: usize,
    pub candidates_examined: usize,
    pub phase1_adjacent: usize,
    pub phase2_adjacent: usize,
    pub bad_mass: Vec<BadMass>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ITally {
    pub i: u8,
    pub unassigned: usize,
    pub bad_phase1: usize,
    pub bad_phase2: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FailureReport {
    /// Lexicographically first vertex covered fewer than s−1 times.
    pub vertex: u64,
    pub vertex_bits: String,
    pub level: u8,
    pub last_codim: u8,
    pub parent_cube: String,
    pub per_i: Vec<ITally>,
    pub candidates_examined: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StepOutcome {
    Inserted { cube: CubeRef, set: usize },
    Complete,
    Failure(FailureReport),
}

/// Working state of the algorithm.
#[derive(Debug, Clone)]
pub struct TilingRun {
    pub tiling: MultiTiling,
    pub assignment: Assignment,
    pub events: Vec<StepEvent>,
}

/// Result of testing one candidate block.
enum Probe {
    Found { set: usize, event: StepEvent },
    Rejected(Vec<ITally>),
}

impl TilingRun {
    pub fn new(params: &RegimeParams) -> Result<Self, TilingRunError> {
        Ok(TilingRun {
            tiling: MultiTiling::new(params.n, params.s)?,
            assignment: Assignment::default(),
            events: Vec::new(),
        })
    }

    /// Number of levels covering vertex x.
    pub fn coverage(&self, x: u64) -> u8 {
        (0..=self.tiling.top_level())
            .take_while(|&l| self.tiling.cube_at(l, x).is_some())
            .count() as u8
    }

    fn first_uncovered(&self) -> Option<u64> {
        let n = self.tiling.n();
        let top = self.tiling.top_level();
        let mut x = 0u64;
        while x < 1u64 << n {
            match self.tiling.cube_at(top, x) {
                Some(r) => x = self.tiling.get(r).cube.end(),
                None => return Some(x),
            }
        }
        None
    }

    /// Codim-D blocks covered fewer than s−1 times, lexicographically, with
    /// their coverage (the level a new cube there would get).
    fn blocks(&self, d: u8) -> Vec<(SpecialCube, u8)> {
        let n = self.tiling.n();
        let top = self.tiling.top_level();
        let size = 1u64 << (n - d);
        let mut out = Vec::new();
        let mut x = 0u64;
        while x < 1u64 << n {
            if let Some(r) = self.tiling.cube_at(top, x) {
                x = self.tiling.get(r).cube.end().max(x + size);
                continue;
            }
            let cov = self.coverage(x);
            out.push((SpecialCube::containing(n, d, x).expect("valid block"), cov));
            x += size;
        }
        out
    }

    /// One step of the algorithm.
    pub fn step(
        &mut self,
        o: &ColoringOracle,
        forest: &FamilyForest,
        params: &RegimeParams,
    ) -> Result<StepOutcome, TilingRunError> {
        if self.tiling.is_empty() {
            let root = LeveledCube::root(params.n)?;
            let set = forest
                .sets
                .iter()
                .position(|s| s.level == 0)
                .ok_or_else(|| TilingRunError::Invariant("forest has no level-0 set".into()))?;
            let r = self.tiling.insert(root)?;
            self.assignment.assign(r, set);
            self.events.push(StepEvent {
                step: 0,
                cube: self.tiling.get(r).cube.to_string(),
                level: 0,
                codim: 0,
                set,
                candidates_examined: 1,
                phase1_adjacent: 0,
                phase2_adjacent: 0,
                bad_mass: vec![],
            });
            return Ok(StepOutcome::Inserted { cube: r, set });
        }
        let Some(first) = self.first_uncovered() else {
            return Ok(StepOutcome::Complete);
        };
        let last = self.tiling.last_codim();
        let mut examined = 0usize;
        let mut first_tallies: BTreeMap<u8, ITally> = BTreeMap::new();
        for big_d in last..=params.n {
            for (block, level) in self.blocks(big_d) {
                if level == 0 {
                    continue;
                }
                examined += 1;
                match self.probe(o, forest, params, &block, level, examined)? {
                    Probe::Found { set, event } => {
                        let c = self.candidate(&block, level)?;
                        if !self.is_proper(o, forest, params, &c, forest.get(set))? {
                            return Err(TilingRunError::Invariant(format!(
                                "selected pair {c} → set {set} is not proper"
                            )));
                        }
                        let r = self.tiling.insert(c)?;
                        self.assignment.assign(r, set);
                        self.events.push(event);
                        return Ok(StepOutcome::Inserted { cube: r, set });
                    }
                    Probe::Rejected(tallies) => {
                        if block.contains_vertex(first) {
                            for t in tallies {
                                first_tallies.entry(t.i).or_insert(t);
                            }
                        }
                    }
                }
            }
        }
        let level = self.coverage(first);
        let parent_cube = self
            .tiling
            .cube_at(level - 1, first)
            .map(|r| self.tiling.get(r).to_string())
            .unwrap_or_default();
        Ok(StepOutcome::Failure(FailureReport {
            vertex: first,
            vertex_bits: format!("{:0width$b}", first, width = params.n as usize),
            level,
            last_codim: last,
            parent_cube,
            per_i: first_tallies.into_values().collect(),
            candidates_examined: examined,
        }))
    }

    fn parent_of(&self, block: &SpecialCube, level: u8) -> Result<CubeRef, TilingRunError> {
        self.tiling
            .cube_at(level - 1, block.start())
            .ok_or_else(|| TilingRunError::Invariant(format!("{block} has no level-{} cover", level - 1)))
    }

    fn candidate(&self, block: &SpecialCube, level: u8) -> Result<LeveledCube, TilingRunError> {
        let p = self.parent_of(block, level)?;
        Ok(self.tiling.get(p).refine_at(block.start(), block.codim())?)
    }

    fn probe(
        &mut self,
        o: &ColoringOracle,
        forest: &FamilyForest,
        params: &RegimeParams,
        block: &SpecialCube,
        level: u8,
        examined: usize,
    ) -> Result<Probe, TilingRunError> {
        let pref = self.parent_of(block, level)?;
        let parent = self.tiling.get(pref).clone();
        let par_set = self
            .assignment
            .set_of(pref)
            .ok_or_else(|| TilingRunError::Invariant(format!("{parent} is unassigned")))?;
        let i = block.codim() - parent.codim();
        if i > params.codim_max(level) {
            return Ok(Probe::Rejected(vec![]));
        }
        let pool: Vec<&LeveledSet> = forest
            .children(par_set)
            .filter(|s| s.own_codim() == i && !self.assignment.is_used(s.id))
            .collect();
        let mut tally = ITally {
            i,
            unassigned: pool.len(),
            bad_phase1: 0,
            bad_phase2: 0,
        };
        if pool.is_empty() {
            return Ok(Probe::Rejected(vec![tally]));
        }
        let c = parent.refine_at(block.start(), block.codim())?;
        let c_l = parent.refine_at(block.start(), self.tiling.last_codim())?;

        // phase 1: cubes ρ-adjacent to C_ℓ for ρ < ℓ
        let mut phase1 = Vec::new();
        for a in self.tiling.adjacent_cubes(&c_l, params.n) {
            let ac = self.tiling.get(a);
            let rho = self.tiling.level_of_adjacency(&c_l, ac)?;
            if rho < level {
                phase1.push((a, rho, dominating_parameter(&c_l, ac, rho)?));
            }
        }
        self.assert_coincidence(&c, &phase1, level)?;
        let mut alive = vec![true; pool.len()];
        let mut bad_mass = Vec::new();
        for &(a, _, delta) in &phase1 {
            let sa = self.set_for(a)?;
            let pairs: Vec<(usize, usize)> = pool.iter().map(|s| (s.id, sa)).collect();
            let counts = self.assignment.edge_counts(o, forest, &pairs)?;
            let la = self.tiling.get(a).level();
            let size_a = forest.get(sa).len();
            let mut mass = 0u64;
            for (k, (s, &blue)) in pool.iter().zip(&counts).enumerate() {
                if !params.is_good(blue, s.len(), size_a, level, la, delta) {
                    mass += s.len() as u64;
                    if alive[k] {
                        alive[k] = false;
                        tally.bad_phase1 += 1;
                    }
                }
            }
            let par_size = forest.get(par_set).len() as u64;
            let lhs = (mass as u128).saturating_mul(params.density_denominator(level - 1, la, delta));
            let rhs = (par_size as u128).saturating_mul(params.density_denominator(level, la, delta));
            bad_mass.push(BadMass {
                against: self.tiling.get(a).to_string(),
                mass,
                parent_size: par_size,
                within: lhs <= rhs,
            });
        }

        // phase 2: cubes ℓ-adjacent to C with codimension ≤ d(C)
        let mut phase2 = Vec::new();
        for a in self.tiling.adjacent_cubes(&c, c.codim()) {
            let ac = self.tiling.get(a);
            let rho = self.tiling.level_of_adjacency(&c, ac)?;
            if rho == level {
                phase2.push((a, dominating_parameter(&c, ac, rho)?));
            }
        }
        let survivors: Vec<&LeveledSet> = pool.iter().zip(&alive).filter(|(_, &ok)| ok).map(|(s, _)| *s).collect();
        for s in &survivors {
            let mut good = true;
            for &(a, delta) in &phase2 {
                let sa = self.set_for(a)?;
                let blue = self.assignment.edge_counts(o, forest, &[(s.id, sa)])?[0];
                let la = self.tiling.get(a).level();
                if !params.is_good(blue, s.len(), forest.get(sa).len(), level, la, delta) {
                    good = false;
                    break;
                }
            }
            if good {
                let event = StepEvent {
                    step: self.events.len(),
                    cube: c.cube.to_string(),
                    level,
                    codim: c.codim(),
                    set: s.id,
                    candidates_examined: examined,
                    phase1_adjacent: phase1.len(),
                    phase2_adjacent: phase2.len(),
                    bad_mass,
                };
                return Ok(Probe::Found { set: s.id, event });
            }
            tally.bad_phase2 += 1;
        }
        Ok(Probe::Rejected(vec![tally]))
    }

    fn set_for(&self, a: CubeRef) -> Result<usize, TilingRunError> {
        self.assignment
            .set_of(a)
            .ok_or_else(|| TilingRunError::Invariant(format!("{} is unassigned", self.tiling.get(a))))
    }

    /// Cubes ρ-adjacent to C with ρ < ℓ must be among those ρ-adjacent to
    /// C_ℓ, with the same dominating parameter.
    fn assert_coincidence(&self, c: &LeveledCube, phase1: &[(CubeRef, u8, u8)], level: u8) -> Result<(), TilingRunError> {
        for a in self.tiling.adjacent_cubes(c, self.tiling.n()) {
            let ac = self.tiling.get(a);
            let rho = self.tiling.level_of_adjacency(c, ac)?;
            if rho >= level {
                continue;
            }
            let delta = dominating_parameter(c, ac, rho)?;
            if !phase1.iter().any(|&(b, r, d)| b == a && r == rho && d == delta) {
                return Err(TilingRunError::Invariant(format!(
                    "{ac} is {rho}-adjacent to {c} but not matched by the phase-1 family"
                )));
            }
        }
        Ok(())
    }

    /// Conditions 1–3 of a proper assignment for a candidate cube and an
    /// unassigned set, against every adjacent cube already in the tiling.
    pub fn is_proper(
        &mut self,
        o: &ColoringOracle,
        forest: &FamilyForest,
        params: &RegimeParams,
        c: &LeveledCube,
        s: &LeveledSet,
    ) -> Result<bool, TilingRunError> {
        let level = c.level();
        if level != s.level || c.d_at(level) != s.own_codim() || self.assignment.is_used(s.id) {
            return Ok(false);
        }
        if level >= 1 {
            let Some(p) = self.tiling.cube_at(level - 1, c.cube.start()) else {
                return Ok(false);
            };
            let Some(ps) = self.assignment.set_of(p) else {
                return Ok(false);
            };
            if !s.vertices.is_subset(&forest.get(ps).vertices) {
                return Ok(false);
            }
        }
        for a in self.tiling.adjacent_cubes(c, params.n) {
            let ac = self.tiling.get(a).clone();
            let rho = self.tiling.level_of_adjacency(c, &ac)?;
            let delta = dominating_parameter(c, &ac, rho)?;
            let sa = self.set_for(a)?;
            let blue = self.assignment.edge_counts(o, forest, &[(s.id, sa)])?[0];
            if !params.is_proper_count(blue, s.len(), forest.get(sa).len(), level, ac.level(), delta) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Steps until completion, failure, or `max_steps`.
    pub fn run(
        &mut self,
        o: &ColoringOracle,
        forest: &FamilyForest,
        params: &RegimeParams,
        max_steps: usize,
    ) -> Result<StepOutcome, TilingRunError> {
        for _ in 0..max_steps {
            match self.step(o, forest, params)? {
                StepOutcome::Inserted { .. } => {}
                other => return Ok(other),
            }
        }
        Err(TilingRunError::Invariant(format!("no completion within {max_steps} steps")))
    }

    pub fn write_events<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for e in &self.events {
            serde_json::to_writer(&mut w, e)?;
            writeln!(w)?;
        }
        Ok(())
    }

    pub fn checkpoint(&self) -> Checkpoint {
        Checkpoint {
            n: self.tiling.n(),
            s: self.tiling.s(),
            cubes: self
                .tiling
                .log()
                .iter()
                .map(|ins| {
                    let c = self.tiling.get(ins.cube);
                    CheckpointCube {
                        cube: c.cube,
                        level_codims: c.level_codims.clone(),
                        set: self.assignment.set_of(ins.cube),
                    }
                })
                .collect(),
        }
    }

    pub fn from_checkpoint(cp: &Checkpoint) -> Result<Self, TilingRunError> {
        let mut run = TilingRun {
            tiling: MultiTiling::new(cp.n, cp.s)?,
            assignment: Assignment::default(),
            events: Vec::new(),
        };
        for e in &cp.cubes {
            let r = run.tiling.insert(LeveledCube::new(e.cube, e.level_codims.clone())?)?;
            if let Some(s) = e.set {
                run.assignment.assign(r, s);
            }
        }
        Ok(run)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckpointCube {
    pub cube: SpecialCube,
    pub level_codims: Vec<u8>,
    pub set: Option<usize>,
}

/// Tiling and assignment in insertion order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub n: u8,
    pub s: u8,
    pub cubes: Vec<CheckpointCube>,
}

impl Checkpoint {
    pub fn save(&self, path: &Path) -> Result<(), TilingRunError> {
        let text = serde_json::to_string_pretty(self).map_err(|e| TilingRunError::Checkpoint(e.to_string()))?;
        std::fs::write(path, text).map_err(|e| TilingRunError::Checkpoint(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, TilingRunError> {
        let text = std::fs::read_to_string(path).map_err(|e| TilingRunError::Checkpoint(e.to_string()))?;
        serde_json::from_str(&text).map_err(|e| TilingRunError::Checkpoint(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditItem {
    pub check: String,
    pub pass: bool,
    pub witness: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditReport {
    pub items: Vec<AuditItem>,
    pub pass: bool,
}

impl AuditReport {
    pub fn failed(&self) -> impl Iterator<Item = &AuditItem> {
        self.items.iter().filter(|i| !i.pass)
    }
}

/// Re-derives every property of a completed run from the oracle.
pub fn audit(o: &ColoringOracle, run: &TilingRun, forest: &FamilyForest, params: &RegimeParams) -> AuditReport {
    let t = &run.tiling;
    let mut items = Vec::new();
    let mut push = |check: &str, witness: Option<String>| {
        items.push(AuditItem {
            check: check.to_string(),
            pass: witness.is_none(),
            witness,
        })
    };

    let total = 1u64 << t.n();
    let cover = (0..=t.top_level())
        .find(|&l| t.level(l).iter().map(|c| c.cube.size()).sum::<u64>() != total)
        .map(|l| format!("level {l} does not partition the cube"));
    push("coverage", cover);

    let mut refine = None;
    for l in 1..=t.top_level() {
        for c in t.level(l) {
            if t.check_parent(c).is_err() {
                refine = Some(c.to_string());
                break;
            }
        }
    }
    push("refinement", refine);

    let mono = t
        .log()
        .windows(2)
        .find(|w| w[1].codim < w[0].codim)
        .map(|w| format!("{} after {}", t.get(w[1].cube), t.get(w[0].cube)));
    push("monotone-codimension", mono);

    let mut seen = HashMap::new();
    let mut unassigned = None;
    let mut reused = None;
    for r in t.refs() {
        match run.assignment.set_of(r) {
            None => unassigned = unassigned.or(Some(t.get(r).to_string())),
            Some(s) => {
                if let Some(prev) = seen.insert(s, r) {
                    reused = reused.or(Some(format!("set {s} on {} and {}", t.get(prev), t.get(r))));
                }
            }
        }
    }
    push("every-cube-assigned", unassigned);
    push("sets-distinct", reused);

    let mut cond1 = None;
    let mut cond2 = None;
    for r in t.refs() {
        let c = t.get(r);
        let Some(sid) = run.assignment.set_of(r) else { continue };
        let Some(s) = forest.sets.get(sid) else {
            cond1 = cond1.or(Some(format!("{c} → unknown set {sid}")));
            continue;
        };
        if s.level != c.level() || s.own_codim() != c.d_at(c.level()) {
            cond1 = cond1.or(Some(format!("{c} → set {sid} (level {}, d {})", s.level, s.own_codim())));
        }
        if c.level() >= 1 {
            let parent_set = t.cube_at(c.level() - 1, c.cube.start()).and_then(|p| run.assignment.set_of(p));
            let ok = parent_set.is_some_and(|p| forest.sets.get(p).is_some_and(|ps| s.vertices.is_subset(&ps.vertices)));
            if !ok {
                cond2 = cond2.or(Some(format!("{c} → set {sid} not inside its parent's set")));
            }
        }
    }
    push("condition-1", cond1);
    push("condition-2", cond2);

    let mut pairs = Vec::new();
    for r in t.refs() {
        if r.level == 0 {
            continue;
        }
        let c = t.get(r);
        for a in t.adjacent_cubes(c, t.n()) {
            if a > r {
                pairs.push((r, a));
            }
        }
    }
    let cond3 = pairs
        .par_iter()
        .map(|&(r, a)| {
            let (c, ac) = (t.get(r), t.get(a));
            let (Some(x), Some(y)) = (run.assignment.set_of(r), run.assignment.set_of(a)) else {
                return None;
            };
            let (Some(sx), Some(sy)) = (forest.sets.get(x), forest.sets.get(y)) else {
                return None;
            };
            let rho = t.level_of_adjacency(c, ac).ok()?;
            let delta = dominating_parameter(c, ac, rho).ok()?;
            let blue = match count_blue_edges(o, &sx.vertices, &sy.vertices) {
                Ok(b) => b,
                Err(e) => return Some(format!("{c} / {ac}: {e}")),
            };
            (!params.is_proper_count(blue, sx.len(), sy.len(), c.level(), ac.level(), delta))
                .then(|| format!("{c} / {ac}: {blue} blue edges, δ = {delta}"))
        })
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .next();
    push("condition-3", cond3);

    let pass = items.iter().all(|i| i.pass);
    AuditReport { items, pass }
}

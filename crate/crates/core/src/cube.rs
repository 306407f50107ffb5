//! Special subcubes of Q_n and leveled multi-tilings.
//!
//! A vertex (a_1, ..., a_n) of Q_n is stored as the integer Σ a_i·2^(n−i),
//! so a_1 is the most significant bit. A special cube fixes a prefix
//! a_1..a_d, which makes it the index interval [p·2^(n−d), (p+1)·2^(n−d)).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Largest supported cube dimension.
pub const MAX_DIM: u8 = 32;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CubeError {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(u8, u8),
    #[error("dimension {0} outside 1..={MAX_DIM}")]
    BadDimension(u8),
    #[error("codimension {codim} exceeds dimension {n}")]
    BadCodim { n: u8, codim: u8 },
    #[error("prefix {prefix} does not fit in {codim} bits")]
    BadPrefix { prefix: u64, codim: u8 },
    #[error("cannot parse cube notation {0:?}")]
    Parse(String),
    #[error("cubes {0} and {1} are not adjacent")]
    NotAdjacent(String, String),
    #[error("ancestry of {0} at level {1} cannot be resolved in the tiling")]
    UnresolvableAncestry(String, u8),
    #[error("level {rho} out of range for cubes of levels {l1} and {l2}")]
    LevelOutOfRange { rho: u8, l1: u8, l2: u8 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Relation {
    Nested,
    Adjacent,
    NonAdjacent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SpecialCube {
    n: u8,
    codim: u8,
    prefix: u64,
}

impl SpecialCube {
    pub fn new(n: u8, codim: u8, prefix: u64) -> Result<Self, CubeError> {
        if n == 0 || n > MAX_DIM {
            return Err(CubeError::BadDimension(n));
        }
        if codim > n {
            return Err(CubeError::BadCodim { n, codim });
        }
        if codim < 64 && prefix >> codim != 0 {
            return Err(CubeError::BadPrefix { prefix, codim });
        }
        Ok(SpecialCube { n, codim, prefix })
    }

    pub fn whole(n: u8) -> Result<Self, CubeError> {
        Self::new(n, 0, 0)
    }

    /// Builds a cube from explicit fixed coordinates a_1..a_d (each 0 or 1).
    pub fn from_bits(n: u8, bits: &[u8]) -> Result<Self, CubeError> {
        let mut prefix = 0u64;
        for &b in bits {
            if b > 1 {
                return Err(CubeError::Parse(format!("{bits:?}")));
            }
            prefix = (prefix << 1) | b as u64;
        }
        let codim = u8::try_from(bits.len()).map_err(|_| CubeError::Parse(format!("{bits:?}")))?;
        Self::new(n, codim, prefix)
    }

    /// The codimension-d cube containing vertex `x`.
    pub fn containing(n: u8, d: u8, x: u64) -> Result<Self, CubeError> {
        if d > n {
            return Err(CubeError::BadCodim { n, codim: d });
        }
        Self::new(n, d, x >> (n - d))
    }

    pub fn dim(&self) -> u8 {
        self.n
    }

    pub fn codim(&self) -> u8 {
        self.codim
    }

    pub fn prefix(&self) -> u64 {
        self.prefix
    }

    /// Number of vertices, 2^(n−d).
    pub fn size(&self) -> u64 {
        1u64 << (self.n - self.codim)
    }

    pub fn start(&self) -> u64 {
        self.prefix << (self.n - self.codim)
    }

    pub fn end(&self) -> u64 {
        self.start() + self.size()
    }

    pub fn vertices(&self) -> Range<u64> {
        self.start()..self.end()
    }

    pub fn contains_vertex(&self, x: u64) -> bool {
        x >> (self.n - self.codim) == self.prefix
    }

    /// Coordinate a_j of the prefix, 1-based.
    pub fn bit(&self, j: u8) -> u8 {
        debug_assert!(j >= 1 && j <= self.codim);
        ((self.prefix >> (self.codim - j)) & 1) as u8
    }

    /// The same-codimension cube with coordinate j flipped.
    pub fn flip(&self, j: u8) -> SpecialCube {
        debug_assert!(j >= 1 && j <= self.codim);
        SpecialCube {
            prefix: self.prefix ^ (1u64 << (self.codim - j)),
            ..*self
        }
    }

    /// The ancestor with prefix truncated to length d.
    pub fn truncate(&self, d: u8) -> SpecialCube {
        let d = d.min(self.codim);
        SpecialCube {
            n: self.n,
            codim: d,
            prefix: self.prefix >> (self.codim - d),
        }
    }

    pub fn child(&self, bit: u8) -> Option<SpecialCube> {
        if self.codim == self.n {
            return None;
        }
        Some(SpecialCube {
            n: self.n,
            codim: self.codim + 1,
            prefix: (self.prefix << 1) | (bit & 1) as u64,
        })
    }

    pub fn is_whole(&self) -> bool {
        self.codim == 0
    }
}

/// True iff `c2 ⊆ c`, i.e. the prefix of `c2` extends the prefix of `c`.
pub fn contains(c: &SpecialCube, c2: &SpecialCube) -> Result<bool, CubeError> {
    if c.n != c2.n {
        return Err(CubeError::DimensionMismatch(c.n, c2.n));
    }
    Ok(c2.codim >= c.codim && c2.prefix >> (c2.codim - c.codim) == c.prefix)
}

pub fn relation(c: &SpecialCube, c2: &SpecialCube) -> Result<Relation, CubeError> {
    if contains(c, c2)? || contains(c2, c)? {
        return Ok(Relation::Nested);
    }
    let d = c.codim.min(c2.codim);
    let diff = c.truncate(d).prefix ^ c2.truncate(d).prefix;
    Ok(if diff.count_ones() == 1 {
        Relation::Adjacent
    } else {
        Relation::NonAdjacent
    })
}

pub fn enumerate_vertices(c: &SpecialCube) -> Range<u64> {
    c.vertices()
}

impl fmt::Display for SpecialCube {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::with_capacity(self.n as usize);
        for j in 1..=self.codim {
            s.push(if self.bit(j) == 1 { '1' } else { '0' });
        }
        for _ in self.codim..self.n {
            s.push('*');
        }
        f.write_str(&s)
    }
}

impl FromStr for SpecialCube {
    type Err = CubeError;

    fn from_str(s: &str) -> Result<Self, CubeError> {
        let s = s.trim();
        let n = u8::try_from(s.len()).map_err(|_| CubeError::Parse(s.to_string()))?;
        let mut bits = Vec::new();
        let mut free = false;
        for ch in s.chars() {
            match (ch, free) {
                ('0', false) => bits.push(0),
                ('1', false) => bits.push(1),
                ('*', _) => free = true,
                _ => return Err(CubeError::Parse(s.to_string())),
            }
        }
        Self::from_bits(n, &bits)
    }
}

impl Serialize for SpecialCube {
    fn serialize<S: Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        ser.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for SpecialCube {
    fn deserialize<D: Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        let s = String::deserialize(de)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A cube together with its level and per-level codimensions d_1..d_ℓ.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LeveledCube {
    pub cube: SpecialCube,
    pub level_codims: Vec<u8>,
}

impl LeveledCube {
    pub fn new(cube: SpecialCube, level_codims: Vec<u8>) -> Result<Self, CubeError> {
        let total: u32 = level_codims.iter().map(|&d| d as u32).sum();
        if total != cube.codim as u32 {
            return Err(CubeError::BadCodim {
                n: cube.n,
                codim: cube.codim,
            });
        }
        Ok(LeveledCube { cube, level_codims })
    }

    pub fn root(n: u8) -> Result<Self, CubeError> {
        Ok(LeveledCube {
            cube: SpecialCube::whole(n)?,
            level_codims: Vec::new(),
        })
    }

    pub fn level(&self) -> u8 {
        self.level_codims.len() as u8
    }

    pub fn codim(&self) -> u8 {
        self.cube.codim
    }

    /// d_ρ(C) for 1 ≤ ρ ≤ ℓ(C); zero outside that range.
    pub fn d_at(&self, rho: u8) -> u8 {
        if rho == 0 || rho as usize > self.level_codims.len() {
            0
        } else {
            self.level_codims[rho as usize - 1]
        }
    }

    /// Codimension of the level-j ancestor, Σ_{i≤j} d_i.
    pub fn ancestor_codim(&self, j: u8) -> u8 {
        self.level_codims.iter().take(j as usize).sum()
    }

    /// The level-j ancestor as read off the prefix.
    pub fn ancestor(&self, j: u8) -> SpecialCube {
        self.cube.truncate(self.ancestor_codim(j))
    }

    /// The candidate one level down: prefix of `x` of total codimension `codim`.
    pub fn refine_at(&self, x: u64, codim: u8) -> Result<LeveledCube, CubeError> {
        if codim < self.cube.codim {
            return Err(CubeError::BadCodim {
                n: self.cube.n,
                codim,
            });
        }
        let cube = SpecialCube::containing(self.cube.n, codim, x)?;
        if !contains(&self.cube, &cube)? {
            return Err(CubeError::Parse(format!("{cube} outside {}", self.cube)));
        }
        let mut level_codims = self.level_codims.clone();
        level_codims.push(codim - self.cube.codim);
        Ok(LeveledCube { cube, level_codims })
    }
}

impl fmt::Display for LeveledCube {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@L{}", self.cube, self.level())
    }
}

pub fn dominating_parameter(c: &LeveledCube, c2: &LeveledCube, rho: u8) -> Result<u8, CubeError> {
    let top = c.level().min(c2.level());
    if rho == 0 || rho > top {
        return Err(CubeError::LevelOutOfRange {
            rho,
            l1: c.level(),
            l2: c2.level(),
        });
    }
    Ok(c.d_at(rho).max(c2.d_at(rho)))
}

/// Reference to a cube stored in a [`MultiTiling`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CubeRef {
    pub level: u8,
    pub index: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Insertion {
    pub cube: CubeRef,
    pub codim: u8,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TilingError {
    #[error("level {level} outside 0..={max}")]
    BadLevel { level: u8, max: u8 },
    #[error("{0} overlaps an existing cube on its level")]
    Overlap(String),
    #[error("{0} is not nested in a consistent parent cube")]
    NoParent(String),
    #[error("insertion codimension {codim} below previous {previous}")]
    NonMonotone { codim: u8, previous: u8 },
    #[error("level 0 must be the whole cube, got {0}")]
    BadRoot(String),
    #[error(transparent)]
    Cube(#[from] CubeError),
}

/// The (s−1)-fold leveled tiling: levels 0..=s−2, each a set of disjoint
/// special cubes refining the level above.
#[derive(Debug, Clone)]
pub struct MultiTiling {
    n: u8,
    s: u8,
    levels: Vec<Vec<LeveledCube>>,
    starts: Vec<BTreeMap<u64, u32>>,
    log: Vec<Insertion>,
}

impl MultiTiling {
    pub fn new(n: u8, s: u8) -> Result<Self, CubeError> {
        if n == 0 || n > MAX_DIM {
            return Err(CubeError::BadDimension(n));
        }
        let depth = s.saturating_sub(1).max(1) as usize;
        Ok(MultiTiling {
            n,
            s,
            levels: vec![Vec::new(); depth],
            starts: vec![BTreeMap::new(); depth],
            log: Vec::new(),
        })
    }

    pub fn n(&self) -> u8 {
        self.n
    }

    pub fn s(&self) -> u8 {
        self.s
    }

    pub fn top_level(&self) -> u8 {
        (self.levels.len() - 1) as u8
    }

    pub fn level(&self, level: u8) -> &[LeveledCube] {
        &self.levels[level as usize]
    }

    pub fn get(&self, r: CubeRef) -> &LeveledCube {
        &self.levels[r.level as usize][r.index as usize]
    }

    pub fn log(&self) -> &[Insertion] {
        &self.log
    }

    pub fn is_empty(&self) -> bool {
        self.log.is_empty()
    }

    pub fn len(&self) -> usize {
        self.log.len()
    }

    pub fn last_codim(&self) -> u8 {
        self.log.last().map(|i| i.codim).unwrap_or(0)
    }

    pub fn refs(&self) -> impl Iterator<Item = CubeRef> + '_ {
        self.levels.iter().enumerate().flat_map(|(l, cubes)| {
            (0..cubes.len() as u32).map(move |index| CubeRef {
                level: l as u8,
                index,
            })
        })
    }

    /// The cube at `level` containing vertex `x`, if any.
    pub fn cube_at(&self, level: u8, x: u64) -> Option<CubeRef> {
        let map = self.starts.get(level as usize)?;
        let (_, &index) = map.range(..=x).next_back()?;
        let r = CubeRef { level, index };
        self.get(r).cube.contains_vertex(x).then_some(r)
    }

    /// Checks condition (a) and the refinement structure without inserting.
    pub fn check_insert(&self, c: &LeveledCube) -> Result<(), TilingError> {
        let level = c.level();
        if level > self.top_level() {
            return Err(TilingError::BadLevel {
                level,
                max: self.top_level(),
            });
        }
        if c.cube.n != self.n {
            return Err(CubeError::DimensionMismatch(c.cube.n, self.n).into());
        }
        if level == 0 && !c.cube.is_whole() {
            return Err(TilingError::BadRoot(c.cube.to_string()));
        }
        if let Some(last) = self.log.last() {
            if c.codim() < last.codim {
                return Err(TilingError::NonMonotone {
                    codim: c.codim(),
                    previous: last.codim,
                });
            }
        }
        let map = &self.starts[level as usize];
        if let Some((_, &i)) = map.range(..c.cube.end()).next_back() {
            let other = &self.levels[level as usize][i as usize].cube;
            if other.end() > c.cube.start() {
                return Err(TilingError::Overlap(c.to_string()));
            }
        }
        self.check_parent(c)
    }

    /// For ℓ ≥ 1: the level-(ℓ−1) cube at the start of `c` contains it and
    /// carries the same leading codimensions.
    pub fn check_parent(&self, c: &LeveledCube) -> Result<(), TilingError> {
        let level = c.level();
        if level == 0 {
            return Ok(());
        }
        let parent = self
            .cube_at(level - 1, c.cube.start())
            .map(|r| self.get(r))
            .ok_or_else(|| TilingError::NoParent(c.to_string()))?;
        let consistent = contains(&parent.cube, &c.cube)?
            && parent.level_codims[..] == c.level_codims[..level as usize - 1];
        if !consistent {
            return Err(TilingError::NoParent(c.to_string()));
        }
        Ok(())
    }

    pub fn insert(&mut self, c: LeveledCube) -> Result<CubeRef, TilingError> {
        self.check_insert(&c)?;
        let level = c.level();
        let index = self.levels[level as usize].len() as u32;
        self.starts[level as usize].insert(c.cube.start(), index);
        self.log.push(Insertion {
            cube: CubeRef { level, index },
            codim: c.codim(),
        });
        self.levels[level as usize].push(c);
        Ok(CubeRef { level, index })
    }

    /// Inserts without the monotone-codimension check; used to assemble
    /// arbitrary valid tilings.
    pub fn insert_unordered(&mut self, c: LeveledCube) -> Result<CubeRef, TilingError> {
        let saved = std::mem::take(&mut self.log);
        let res = self.check_insert(&c);
        self.log = saved;
        res?;
        let level = c.level();
        let index = self.levels[level as usize].len() as u32;
        self.starts[level as usize].insert(c.cube.start(), index);
        self.log.push(Insertion {
            cube: CubeRef { level, index },
            codim: c.codim(),
        });
        self.levels[level as usize].push(c);
        Ok(CubeRef { level, index })
    }

    /// True when every level partitions the vertex set.
    pub fn is_complete(&self) -> bool {
        let total = 1u64 << self.n;
        self.levels
            .iter()
            .all(|cubes| cubes.iter().map(|c| c.cube.size()).sum::<u64>() == total)
    }

    /// All cubes in the tiling adjacent to `c` with codimension ≤ `max_codim`.
    ///
    /// Any such cube of codimension d' meets some C^j, the copy of `c` with
    /// coordinate j ≤ d(c) flipped: it contains C^j when d' ≤ d(c) and lies
    /// inside it otherwise.
    pub fn adjacent_cubes(&self, c: &LeveledCube, max_codim: u8) -> Vec<CubeRef> {
        let mut found = BTreeSet::new();
        for (l, map) in self.starts.iter().enumerate() {
            for j in 1..=c.codim() {
                let f = c.cube.flip(j);
                let mut consider = |index: u32| {
                    let r = CubeRef {
                        level: l as u8,
                        index,
                    };
                    let other = &self.get(r).cube;
                    if other.codim <= max_codim
                        && matches!(relation(&c.cube, other), Ok(Relation::Adjacent))
                    {
                        found.insert(r);
                    }
                };
                if let Some((_, &i)) = map.range(..=f.start()).next_back() {
                    consider(i);
                }
                if max_codim > c.codim() {
                    for (_, &i) in map.range(f.start() + 1..f.end()) {
                        consider(i);
                    }
                }
            }
        }
        found.into_iter().collect()
    }

    /// The level-j ancestor of `c` as stored in the tiling (or `c` itself
    /// when j equals its level).
    pub fn ancestor_in_tiling(&self, c: &LeveledCube, j: u8) -> Result<SpecialCube, CubeError> {
        if j == c.level() {
            return Ok(c.cube);
        }
        if j > c.level() {
            return Err(CubeError::UnresolvableAncestry(c.to_string(), j));
        }
        let r = self
            .cube_at(j, c.cube.start())
            .ok_or_else(|| CubeError::UnresolvableAncestry(c.to_string(), j))?;
        let a = self.get(r).cube;
        if !contains(&a, &c.cube)? {
            return Err(CubeError::UnresolvableAncestry(c.to_string(), j));
        }
        Ok(a)
    }

    /// Smallest level at which the ancestors of two adjacent cubes differ.
    pub fn level_of_adjacency(&self, c: &LeveledCube, c2: &LeveledCube) -> Result<u8, CubeError> {
        if relation(&c.cube, &c2.cube)? != Relation::Adjacent {
            return Err(CubeError::NotAdjacent(c.to_string(), c2.to_string()));
        }
        let top = c.level().min(c2.level());
        for j in 1..=top {
            if self.ancestor_in_tiling(c, j)? != self.ancestor_in_tiling(c2, j)? {
                return Ok(j);
            }
        }
        Err(CubeError::UnresolvableAncestry(c.to_string(), top))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cube(s: &str) -> SpecialCube {
        s.parse().unwrap()
    }

    #[test]
    fn notation_round_trip() {
        for s in ["0***", "01**", "****", "1011"] {
            assert_eq!(cube(s).to_string(), s);
        }
        assert!("0*1*".parse::<SpecialCube>().is_err());
        assert!("02**".parse::<SpecialCube>().is_err());
    }

    #[test]
    fn containment_examples() {
        assert!(contains(&cube("0***"), &cube("01**")).unwrap());
        assert!(!contains(&cube("01**"), &cube("11**")).unwrap());
        assert!(contains(&cube("0***"), &cube("01*")).is_err());
    }

    #[test]
    fn relation_examples() {
        assert_eq!(relation(&cube("01**"), &cube("11**")).unwrap(), Relation::Adjacent);
        assert_eq!(relation(&cube("00**"), &cube("11**")).unwrap(), Relation::NonAdjacent);
        assert_eq!(relation(&cube("0***"), &cube("011*")).unwrap(), Relation::Nested);
        assert_eq!(relation(&cube("0***"), &cube("111*")).unwrap(), Relation::Adjacent);
    }

    #[test]
    fn vertex_intervals() {
        assert_eq!(cube("1**").vertices().collect::<Vec<_>>(), vec![4, 5, 6, 7]);
        assert_eq!(cube("***").vertices().count(), 8);
    }

    #[test]
    fn four_quarters_of_q4() {
        let mut t = MultiTiling::new(4, 3).unwrap();
        t.insert(LeveledCube::root(4).unwrap()).unwrap();
        for p in ["00**", "01**", "10**", "11**"] {
            t.insert(LeveledCube::new(cube(p), vec![2]).unwrap()).unwrap();
        }
        assert!(t.is_complete());
        for r in t.refs().filter(|r| r.level == 1) {
            let c = t.get(r).clone();
            assert_eq!(t.adjacent_cubes(&c, 2).len(), 2);
        }
        let a = t.get(CubeRef { level: 1, index: 0 }).clone();
        let b = t.get(CubeRef { level: 1, index: 3 }).clone();
        assert_eq!(relation(&a.cube, &b.cube).unwrap(), Relation::NonAdjacent);
    }

    #[test]
    fn whole_cube_has_no_neighbours() {
        let mut t = MultiTiling::new(5, 4).unwrap();
        t.insert(LeveledCube::root(5).unwrap()).unwrap();
        let cand = LeveledCube::new(cube("01***"), vec![2]).unwrap();
        assert!(t.adjacent_cubes(&cand, 5).is_empty());
    }

    #[test]
    fn insertion_rules() {
        let mut t = MultiTiling::new(3, 4).unwrap();
        assert!(t.insert(LeveledCube::new(cube("0**"), vec![1]).unwrap()).is_err());
        t.insert(LeveledCube::root(3).unwrap()).unwrap();
        t.insert(LeveledCube::new(cube("0**"), vec![1]).unwrap()).unwrap();
        assert!(matches!(
            t.insert(LeveledCube::new(cube("0**"), vec![1]).unwrap()),
            Err(TilingError::Overlap(_))
        ));
        t.insert(LeveledCube::new(cube("00*"), vec![1, 1]).unwrap()).unwrap();
        assert!(matches!(
            t.insert(LeveledCube::new(cube("1**"), vec![1]).unwrap()),
            Err(TilingError::NonMonotone { .. })
        ));
        assert!(matches!(
            t.insert(LeveledCube::new(cube("10*"), vec![1, 1]).unwrap()),
            Err(TilingError::NoParent(_))
        ));
    }

    #[test]
    fn adjacency_levels() {
        let mut t = MultiTiling::new(3, 4).unwrap();
        t.insert(LeveledCube::root(3).unwrap()).unwrap();
        t.insert(LeveledCube::new(cube("0**"), vec![1]).unwrap()).unwrap();
        t.insert(LeveledCube::new(cube("1**"), vec![1]).unwrap()).unwrap();
        let a = LeveledCube::new(cube("00*"), vec![1, 1]).unwrap();
        let b = LeveledCube::new(cube("01*"), vec![1, 1]).unwrap();
        let c = LeveledCube::new(cube("10*"), vec![1, 1]).unwrap();
        t.insert(a.clone()).unwrap();
        t.insert(b.clone()).unwrap();
        assert_eq!(t.level_of_adjacency(&a, &b).unwrap(), 2);
        assert_eq!(t.level_of_adjacency(&a, &c).unwrap(), 1);
        assert_eq!(dominating_parameter(&a, &c, 1).unwrap(), 1);
        assert!(dominating_parameter(&a, &c, 3).is_err());
        let l1 = t.get(CubeRef { level: 1, index: 1 }).clone();
        assert_eq!(t.level_of_adjacency(&a, &l1).unwrap(), 1);
    }
}

//! Two-colorings of the pairs of [N]: explicit and implicit oracles,
//! generator descriptors, the binary matrix format, blue-clique detection
//! and red-cube verification.

use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::clique::{CliqueOutcome, LocalGraph};
use crate::vset::{Vertex, VertexSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Color {
    Red,
    Blue,
}

#[derive(Debug, Error)]
pub enum ColoringError {
    #[error("self-pair ({0}, {0}) has no color")]
    SelfPair(Vertex),
    #[error("vertex {v} out of range for N = {n}")]
    OutOfRange { v: u64, n: u64 },
    #[error("vertex sets overlap at {0}")]
    Overlap(Vertex),
    #[error("exact clique search refused: |S| = {size} exceeds cap {cap}")]
    CapExceeded { size: usize, cap: usize },
    #[error("clique size t = {0} must be at least 2")]
    BadCliqueSize(usize),
    #[error("descriptor: {0}")]
    Descriptor(String),
    #[error("matrix file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GeneratorKind {
    ExplicitMatrix,
    AllRed,
    BlueRandom,
    BlueMultipartite,
    LowerBound,
    FileBacked,
    BlueMatching,
}

/// Key-value description of a coloring.
///
/// | field | used by |
/// |-------|---------|
/// | `kind` | all |
/// | `N` | all except file-backed kinds (where it is read from the file) |
/// | `s` | lower-bound (block size is N/(s−1)) |
/// | `p` | blue-random, blue-multipartite |
/// | `parts` | blue-multipartite |
/// | `seed` | blue-random, blue-multipartite |
/// | `path` | explicit-matrix, file-backed |
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Descriptor {
    pub kind: GeneratorKind,
    #[serde(rename = "N", default, skip_serializing_if = "Option::is_none")]
    pub n_vertices: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parts: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
}

impl Descriptor {
    fn bare(kind: GeneratorKind, n: u64) -> Self {
        Descriptor {
            kind,
            n_vertices: Some(n),
            s: None,
            p: None,
            parts: None,
            seed: None,
            path: None,
        }
    }

    pub fn all_red(n: u64) -> Self {
        Self::bare(GeneratorKind::AllRed, n)
    }

    pub fn blue_matching(n: u64) -> Self {
        Self::bare(GeneratorKind::BlueMatching, n)
    }

    pub fn blue_random(n: u64, p: f64, seed: u64) -> Self {
        Descriptor {
            p: Some(p),
            seed: Some(seed),
            ..Self::bare(GeneratorKind::BlueRandom, n)
        }
    }

    pub fn blue_multipartite(n: u64, parts: u32, p: f64, seed: u64) -> Self {
        Descriptor {
            p: Some(p),
            parts: Some(parts),
            seed: Some(seed),
            ..Self::bare(GeneratorKind::BlueMultipartite, n)
        }
    }

    pub fn lower_bound(s: u32, m: u64) -> Self {
        Descriptor {
            s: Some(s),
            ..Self::bare(GeneratorKind::LowerBound, (s as u64 - 1) * m)
        }
    }

    pub fn file(path: impl Into<PathBuf>) -> Self {
        Descriptor {
            kind: GeneratorKind::FileBacked,
            n_vertices: None,
            s: None,
            p: None,
            parts: None,
            seed: None,
            path: Some(path.into()),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, ColoringError> {
        toml::from_str(text).map_err(|e| ColoringError::Descriptor(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("descriptor serializes")
    }
}

fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[inline]
fn pair_hash(key: u64, u: Vertex, v: Vertex) -> u64 {
    let (a, b) = if u < v { (u, v) } else { (v, u) };
    mix(key ^ mix(((a as u64) << 32) | b as u64))
}

/// Probability p as a 64-bit acceptance threshold; `None` means always.
fn threshold(p: f64) -> Result<Option<u64>, ColoringError> {
    if !(0.0..=1.0).contains(&p) || p.is_nan() {
        return Err(ColoringError::Descriptor(format!("p = {p} outside [0, 1]")));
    }
    if p >= 1.0 {
        return Ok(None);
    }
    Ok(Some((p * 18_446_744_073_709_551_616.0) as u64))
}

#[inline]
fn accept(key: u64, t: Option<u64>, u: Vertex, v: Vertex) -> bool {
    match t {
        None => true,
        Some(t) => pair_hash(key, u, v) < t,
    }
}

/// Upper-triangle blue bit matrix, one byte-padded row per vertex, most
/// significant bit first within each byte.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitMatrix {
    n: u32,
    offsets: Vec<u64>,
    bytes: Vec<u8>,
}

const MAGIC: &[u8; 4] = b"RQCB";
const VERSION: u8 = 1;

impl BitMatrix {
    pub fn new(n: u32) -> Self {
        let mut offsets = Vec::with_capacity(n as usize + 1);
        let mut off = 0u64;
        for u in 0..n as u64 {
            offsets.push(off);
            off += (n as u64 - 1 - u).div_ceil(8);
        }
        offsets.push(off);
        BitMatrix {
            n,
            offsets,
            bytes: vec![0; off as usize],
        }
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    #[inline]
    fn locate(&self, u: Vertex, v: Vertex) -> (usize, u8) {
        let (a, b) = if u < v { (u, v) } else { (v, u) };
        let k = (b - a - 1) as u64;
        ((self.offsets[a as usize] + k / 8) as usize, 7 - (k % 8) as u8)
    }

    #[inline]
    pub fn is_blue(&self, u: Vertex, v: Vertex) -> bool {
        let (i, bit) = self.locate(u, v);
        self.bytes[i] >> bit & 1 == 1
    }

    pub fn set(&mut self, u: Vertex, v: Vertex, c: Color) {
        assert!(u != v && u < self.n && v < self.n);
        let (i, bit) = self.locate(u, v);
        match c {
            Color::Blue => self.bytes[i] |= 1 << bit,
            Color::Red => self.bytes[i] &= !(1 << bit),
        }
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> io::Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&[VERSION])?;
        w.write_all(&(self.n as u64).to_le_bytes())?;
        w.write_all(&self.bytes)
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self, ColoringError> {
        let mut head = [0u8; 13];
        r.read_exact(&mut head)
            .map_err(|_| ColoringError::Format("truncated header".into()))?;
        if &head[..4] != MAGIC {
            return Err(ColoringError::Format("bad magic".into()));
        }
        if head[4] != VERSION {
            return Err(ColoringError::Format(format!("unsupported version {}", head[4])));
        }
        let n = u64::from_le_bytes(head[5..13].try_into().expect("8 bytes"));
        let n = u32::try_from(n).map_err(|_| ColoringError::Format(format!("N = {n} too large")))?;
        let mut m = BitMatrix::new(n);
        r.read_exact(&mut m.bytes)
            .map_err(|_| ColoringError::Format("truncated body".into()))?;
        let mut rest = Vec::new();
        r.read_to_end(&mut rest)?;
        if !rest.is_empty() {
            return Err(ColoringError::Format("trailing bytes".into()));
        }
        for u in 0..n {
            let row_bits = (n - 1 - u) as u64;
            if !row_bits.is_multiple_of(8) {
                let last = m.bytes[(m.offsets[u as usize + 1] - 1) as usize];
                if last & ((1u8 << (8 - row_bits % 8)) - 1) != 0 {
                    return Err(ColoringError::Format(format!("nonzero padding in row {u}")));
                }
            }
        }
        Ok(m)
    }

    pub fn save(&self, path: &Path) -> Result<(), ColoringError> {
        let f = fs::File::create(path)?;
        self.write_to(io::BufWriter::new(f))?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, ColoringError> {
        let f = fs::File::open(path)?;
        Self::read_from(io::BufReader::new(f))
    }
}

#[derive(Debug, Clone)]
enum Kind {
    AllRed,
    BlueMatching,
    BlueRandom { key: u64, t: Option<u64> },
    BlueMultipartite { parts: Arc<Vec<u16>>, key: u64, t: Option<u64> },
    LowerBound { m: u32 },
    Explicit(Arc<BitMatrix>),
}

/// A deterministic symmetric coloring of the pairs of [N].
#[derive(Debug, Clone)]
pub struct ColoringOracle {
    n: u32,
    kind: Kind,
    descriptor: Descriptor,
}

impl ColoringOracle {
    pub fn from_descriptor(d: &Descriptor) -> Result<Self, ColoringError> {
        let need_n = || -> Result<u32, ColoringError> {
            let n = d
                .n_vertices
                .ok_or_else(|| ColoringError::Descriptor("missing N".into()))?;
            u32::try_from(n).map_err(|_| ColoringError::Descriptor(format!("N = {n} exceeds 2^32 − 1")))
        };
        let need_p = || d.p.ok_or_else(|| ColoringError::Descriptor("missing p".into()));
        let seed = d.seed.unwrap_or(0);
        let (n, kind) = match d.kind {
            GeneratorKind::AllRed => (need_n()?, Kind::AllRed),
            GeneratorKind::BlueMatching => (need_n()?, Kind::BlueMatching),
            GeneratorKind::BlueRandom => (
                need_n()?,
                Kind::BlueRandom {
                    key: mix(seed ^ 0x5eed_0001),
                    t: threshold(need_p()?)?,
                },
            ),
            GeneratorKind::BlueMultipartite => {
                let n = need_n()?;
                let k = d
                    .parts
                    .ok_or_else(|| ColoringError::Descriptor("missing parts".into()))?;
                if k == 0 || k > u16::MAX as u32 {
                    return Err(ColoringError::Descriptor(format!("parts = {k} out of range")));
                }
                let pkey = mix(seed ^ 0x5eed_0002);
                let parts = (0..n).map(|v| (mix(pkey ^ v as u64) % k as u64) as u16).collect();
                (
                    n,
                    Kind::BlueMultipartite {
                        parts: Arc::new(parts),
                        key: mix(seed ^ 0x5eed_0003),
                        t: threshold(need_p()?)?,
                    },
                )
            }
            GeneratorKind::LowerBound => {
                let n = need_n()?;
                let s = d.s.ok_or_else(|| ColoringError::Descriptor("missing s".into()))?;
                if s < 2 || n % (s - 1) != 0 {
                    return Err(ColoringError::Descriptor(format!(
                        "lower-bound needs N divisible by s − 1 (N = {n}, s = {s})"
                    )));
                }
                (n, Kind::LowerBound { m: n / (s - 1) })
            }
            GeneratorKind::ExplicitMatrix | GeneratorKind::FileBacked => {
                let path = d
                    .path
                    .as_ref()
                    .ok_or_else(|| ColoringError::Descriptor("missing path".into()))?;
                let m = BitMatrix::load(path)?;
                if let Some(want) = d.n_vertices {
                    if want != m.n as u64 {
                        return Err(ColoringError::Descriptor(format!(
                            "descriptor N = {want} but file holds N = {}",
                            m.n
                        )));
                    }
                }
                (m.n, Kind::Explicit(Arc::new(m)))
            }
        };
        Ok(ColoringOracle {
            n,
            kind,
            descriptor: d.clone(),
        })
    }

    pub fn explicit(m: BitMatrix) -> Self {
        let n = m.n;
        ColoringOracle {
            n,
            kind: Kind::Explicit(Arc::new(m)),
            descriptor: Descriptor::bare(GeneratorKind::ExplicitMatrix, n as u64),
        }
    }

    pub fn all_red(n: u32) -> Self {
        Self::from_descriptor(&Descriptor::all_red(n as u64)).expect("valid")
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn descriptor(&self) -> &Descriptor {
        &self.descriptor
    }

    /// Blue test without range checks; `u ≠ v`, both below N.
    #[inline]
    pub fn is_blue(&self, u: Vertex, v: Vertex) -> bool {
        debug_assert!(u != v && u < self.n && v < self.n);
        match &self.kind {
            Kind::AllRed => false,
            Kind::BlueMatching => u ^ 1 == v,
            Kind::BlueRandom { key, t } => accept(*key, *t, u, v),
            Kind::BlueMultipartite { parts, key, t } => {
                parts[u as usize] != parts[v as usize] && accept(*key, *t, u, v)
            }
            Kind::LowerBound { m } => u / m != v / m,
            Kind::Explicit(mat) => mat.is_blue(u, v),
        }
    }

    pub fn color(&self, u: Vertex, v: Vertex) -> Result<Color, ColoringError> {
        for w in [u, v] {
            if w >= self.n {
                return Err(ColoringError::OutOfRange {
                    v: w as u64,
                    n: self.n as u64,
                });
            }
        }
        if u == v {
            return Err(ColoringError::SelfPair(u));
        }
        Ok(if self.is_blue(u, v) { Color::Blue } else { Color::Red })
    }

    /// Materializes the coloring as a bit matrix.
    pub fn to_matrix(&self) -> BitMatrix {
        let mut m = BitMatrix::new(self.n);
        for u in 0..self.n {
            for v in u + 1..self.n {
                if self.is_blue(u, v) {
                    m.set(u, v, Color::Blue);
                }
            }
        }
        m
    }
}

/// |{u ∈ X ∖ {v} : uv blue}|.
pub fn blue_degree(o: &ColoringOracle, v: Vertex, x: &[Vertex]) -> u64 {
    let count = |chunk: &[Vertex]| chunk.iter().filter(|&&u| u != v && o.is_blue(v, u)).count() as u64;
    if x.len() >= 1 << 16 {
        x.par_chunks(1 << 14).map(count).sum()
    } else {
        count(x)
    }
}

/// Number of blue pairs between disjoint sets.
pub fn count_blue_edges(o: &ColoringOracle, a: &VertexSet, b: &VertexSet) -> Result<u64, ColoringError> {
    if let Some(v) = first_common(a, b) {
        return Err(ColoringError::Overlap(v));
    }
    Ok(count_blue_edges_unchecked(o, a.as_slice(), b.as_slice()))
}

pub(crate) fn count_blue_edges_unchecked(o: &ColoringOracle, a: &[Vertex], b: &[Vertex]) -> u64 {
    let row = |&u: &Vertex| b.iter().filter(|&&v| o.is_blue(u, v)).count() as u64;
    if a.len() * b.len() >= 1 << 15 {
        a.par_iter().map(row).sum()
    } else {
        a.iter().map(row).sum()
    }
}

fn first_common(a: &VertexSet, b: &VertexSet) -> Option<Vertex> {
    let (a, b) = (a.as_slice(), b.as_slice());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => return Some(a[i]),
        }
    }
    None
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchMode {
    /// Complete search; refuses sets larger than `cap`.
    Exact { cap: usize },
    /// Budgeted search; a miss is reported as unconfirmed.
    Heuristic { node_budget: u64 },
}

pub const DEFAULT_EXACT_CAP: usize = 2000;

impl Default for SearchMode {
    fn default() -> Self {
        SearchMode::Exact {
            cap: DEFAULT_EXACT_CAP,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "result", content = "clique")]
pub enum CliqueSearch {
    Found(Vec<Vertex>),
    Absent,
    UnconfirmedAbsence,
}

pub fn find_blue_clique(
    o: &ColoringOracle,
    s: &VertexSet,
    t: usize,
    mode: SearchMode,
) -> Result<CliqueSearch, ColoringError> {
    if t < 2 {
        return Err(ColoringError::BadCliqueSize(t));
    }
    let budget = match mode {
        SearchMode::Exact { cap } => {
            if s.len() > cap {
                return Err(ColoringError::CapExceeded { size: s.len(), cap });
            }
            None
        }
        SearchMode::Heuristic { node_budget } => Some(node_budget),
    };
    let g = LocalGraph::blue(o, s.as_slice());
    Ok(match g.find_clique(t, budget) {
        CliqueOutcome::Found(local) => CliqueSearch::Found(local.into_iter().map(|i| g.verts[i]).collect()),
        CliqueOutcome::Absent => CliqueSearch::Absent,
        CliqueOutcome::BudgetExhausted => CliqueSearch::UnconfirmedAbsence,
    })
}

/// An injective map V(Q_n) → [N], indexed by cube vertex.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Embedding {
    pub n: u8,
    pub map: Vec<Vertex>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Violation {
    WrongLength { expected: u64, found: u64 },
    OutOfRange { x: u64, image: Vertex },
    NotInjective { x: u64, y: u64, image: Vertex },
    BlueEdge { x: u64, y: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "verdict")]
pub enum Verdict {
    Valid,
    Violation(Violation),
}

impl Verdict {
    pub fn is_valid(&self) -> bool {
        matches!(self, Verdict::Valid)
    }
}

pub fn verify_red_cube(o: &ColoringOracle, e: &Embedding) -> Verdict {
    let size = 1u64 << e.n;
    if e.map.len() as u64 != size {
        return Verdict::Violation(Violation::WrongLength {
            expected: size,
            found: e.map.len() as u64,
        });
    }
    let mut seen = std::collections::HashMap::with_capacity(e.map.len());
    for (x, &img) in e.map.iter().enumerate() {
        if img >= o.n() {
            return Verdict::Violation(Violation::OutOfRange { x: x as u64, image: img });
        }
        if let Some(&y) = seen.get(&img) {
            return Verdict::Violation(Violation::NotInjective {
                x: y,
                y: x as u64,
                image: img,
            });
        }
        seen.insert(img, x as u64);
    }
    for x in 0..size {
        for k in (0..e.n).rev() {
            let y = x ^ (1u64 << k);
            if y > x && o.is_blue(e.map[x as usize], e.map[y as usize]) {
                return Verdict::Violation(Violation::BlueEdge { x, y });
            }
        }
    }
    Verdict::Valid
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lower_bound_blocks() {
        let o = ColoringOracle::from_descriptor(&Descriptor::lower_bound(3, 3)).unwrap();
        assert_eq!(o.color(0, 1).unwrap(), Color::Red);
        assert_eq!(o.color(0, 3).unwrap(), Color::Blue);
        assert_eq!(blue_degree(&o, 0, &[3, 4, 5]), 3);
        assert!(o.color(2, 2).is_err());
        assert!(o.color(2, 6).is_err());
    }

    #[test]
    fn matrix_format_round_trip() {
        let o = ColoringOracle::from_descriptor(&Descriptor::blue_random(11, 0.4, 5)).unwrap();
        let m = o.to_matrix();
        let mut buf = Vec::new();
        m.write_to(&mut buf).unwrap();
        assert_eq!(&buf[..4], b"RQCB");
        assert_eq!(buf[4], 1);
        assert_eq!(u64::from_le_bytes(buf[5..13].try_into().unwrap()), 11);
        // rows of 10,9,...,0 bits padded to bytes: 2+2+1*8+0
        assert_eq!(buf.len(), 13 + 2 + 2 + 8);
        let back = BitMatrix::read_from(&buf[..]).unwrap();
        assert_eq!(back, m);
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(BitMatrix::read_from(&bad[..]).is_err());
        let mut trunc = buf.clone();
        trunc.pop();
        assert!(BitMatrix::read_from(&trunc[..]).is_err());
    }

    #[test]
    fn first_pair_is_top_bit() {
        let mut m = BitMatrix::new(3);
        m.set(0, 1, Color::Blue);
        let mut buf = Vec::new();
        m.write_to(&mut buf).unwrap();
        assert_eq!(&buf[13..], &[0b1000_0000, 0]);
    }

    #[test]
    fn descriptor_toml() {
        let d = Descriptor::blue_multipartite(448_000, 2, 0.1, 42);
        let text = d.to_toml();
        assert!(text.contains("kind = \"blue-multipartite\""));
        assert!(text.contains("N = 448000"));
        assert_eq!(Descriptor::from_toml(&text).unwrap(), d);
        assert!(Descriptor::from_toml("kind = \"all-red\"\nbogus = 1").is_err());
    }

    #[test]
    fn verify_examples() {
        let o = ColoringOracle::all_red(8);
        let e = Embedding {
            n: 3,
            map: (0..8).collect(),
        };
        assert!(verify_red_cube(&o, &e).is_valid());
        let dup = Embedding {
            n: 2,
            map: vec![0, 1, 1, 2],
        };
        assert!(matches!(
            verify_red_cube(&o, &dup),
            Verdict::Violation(Violation::NotInjective { x: 1, y: 2, .. })
        ));
        let m = ColoringOracle::from_descriptor(&Descriptor::blue_matching(4)).unwrap();
        let e = Embedding {
            n: 2,
            map: vec![0, 1, 2, 3],
        };
        assert_eq!(
            verify_red_cube(&m, &e),
            Verdict::Violation(Violation::BlueEdge { x: 0, y: 1 })
        );
    }

    #[test]
    fn clique_examples() {
        let o = ColoringOracle::from_descriptor(&Descriptor::lower_bound(4, 7)).unwrap();
        let s = VertexSet::from_vec(vec![0, 7, 14]);
        assert_eq!(
            find_blue_clique(&o, &s, 3, SearchMode::default()).unwrap(),
            CliqueSearch::Found(vec![0, 7, 14])
        );
        let bip = ColoringOracle::from_descriptor(&Descriptor::blue_multipartite(300, 2, 0.7, 1)).unwrap();
        let s = VertexSet::range(0, 200);
        assert_eq!(
            find_blue_clique(&bip, &s, 3, SearchMode::default()).unwrap(),
            CliqueSearch::Absent
        );
        assert!(find_blue_clique(&bip, &s, 3, SearchMode::Exact { cap: 10 }).is_err());
    }
}

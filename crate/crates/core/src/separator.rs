//! Degeneracy, (t, η)-separators and recursive separator decompositions.

use std::collections::VecDeque;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

const EPS: f64 = 1e-9;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SeparatorError {
    #[error("graph format: {0}")]
    Format(String),
    #[error("vertex {v} out of range for {n} vertices")]
    OutOfRange { v: usize, n: usize },
    #[error("self-loop at {0}")]
    Loop(usize),
    #[error("oracle {oracle} returned an invalid separator for part {part} of round {round}: {reason}")]
    BadSeparator {
        oracle: String,
        round: u32,
        part: usize,
        reason: String,
    },
    #[error("decomposition invariant violated: {0}")]
    Invariant(String),
}

/// Simple undirected graph with sorted adjacency lists.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimpleGraph {
    adj: Vec<Vec<usize>>,
}

impl SimpleGraph {
    pub fn new(n: usize) -> Self {
        SimpleGraph { adj: vec![Vec::new(); n] }
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self, SeparatorError> {
        let mut g = SimpleGraph::new(n);
        for &(u, v) in edges {
            g.add_edge(u, v)?;
        }
        Ok(g)
    }

    /// Adds uv; duplicates are ignored.
    pub fn add_edge(&mut self, u: usize, v: usize) -> Result<(), SeparatorError> {
        let n = self.adj.len();
        for w in [u, v] {
            if w >= n {
                return Err(SeparatorError::OutOfRange { v: w, n });
            }
        }
        if u == v {
            return Err(SeparatorError::Loop(u));
        }
        if let Err(i) = self.adj[u].binary_search(&v) {
            self.adj[u].insert(i, v);
            let j = self.adj[v].binary_search(&u).unwrap_err();
            self.adj[v].insert(j, u);
        }
        Ok(())
    }

    pub fn path(n: usize) -> Self {
        let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        SimpleGraph::from_edges(n, &edges).expect("valid path")
    }

    pub fn complete(n: usize) -> Self {
        let mut g = SimpleGraph::new(n);
        for u in 0..n {
            for v in u + 1..n {
                g.add_edge(u, v).expect("valid");
            }
        }
        g
    }

    /// rows × cols grid; vertex r·cols + c.
    pub fn grid(rows: usize, cols: usize) -> Self {
        let mut g = SimpleGraph::new(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                let v = r * cols + c;
                if c + 1 < cols {
                    g.add_edge(v, v + 1).expect("valid");
                }
                if r + 1 < rows {
                    g.add_edge(v, v + cols).expect("valid");
                }
            }
        }
        g
    }

    pub fn n(&self) -> usize {
        self.adj.len()
    }

    pub fn m(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u].binary_search(&v).is_ok()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(u, nb)| nb.iter().filter(move |&&v| v > u).map(move |&v| (u, v)))
    }

    /// Subgraph induced by `verts`, relabeled 0..len in the given order.
    pub fn induced(&self, verts: &[usize]) -> SimpleGraph {
        let mut index = vec![usize::MAX; self.n()];
        for (i, &v) in verts.iter().enumerate() {
            index[v] = i;
        }
        let mut g = SimpleGraph::new(verts.len());
        for (i, &v) in verts.iter().enumerate() {
            for &w in &self.adj[v] {
                let j = index[w];
                if j != usize::MAX && j > i {
                    g.add_edge(i, j).expect("valid");
                }
            }
        }
        g
    }

    /// Text format: a header line "n m", then one "u v" line per edge.
    /// Blank lines and lines starting with '#' are skipped.
    pub fn parse(text: &str) -> Result<Self, SeparatorError> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines.next().ok_or_else(|| SeparatorError::Format("missing header".into()))?;
        let nums = |l: &str| -> Result<(usize, usize), SeparatorError> {
            let mut it = l.split_whitespace().map(|t| t.parse::<usize>());
            match (it.next(), it.next(), it.next()) {
                (Some(Ok(a)), Some(Ok(b)), None) => Ok((a, b)),
                _ => Err(SeparatorError::Format(format!("bad line: {l}"))),
            }
        };
        let (n, m) = nums(header)?;
        let mut g = SimpleGraph::new(n);
        let mut count = 0;
        for l in lines {
            let (u, v) = nums(l)?;
            g.add_edge(u, v)?;
            count += 1;
        }
        if count != m {
            return Err(SeparatorError::Format(format!("header says {m} edges, found {count}")));
        }
        Ok(g)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("{} {}\n", self.n(), self.m());
        for (u, v) in self.edges() {
            let _ = writeln!(s, "{u} {v}");
        }
        s
    }
}

/// Connected components of the subgraph induced by `keep` (all vertices if
/// `None`), each sorted, ordered by smallest vertex.
pub fn components(g: &SimpleGraph, keep: Option<&[bool]>) -> Vec<Vec<usize>> {
    let n = g.n();
    let inside = |v: usize| keep.is_none_or(|k| k[v]);
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for s in 0..n {
        if seen[s] || !inside(s) {
            continue;
        }
        seen[s] = true;
        let mut comp = vec![s];
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &w in g.neighbors(u) {
                if !seen[w] && inside(w) {
                    seen[w] = true;
                    comp.push(w);
                    queue.push_back(w);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

/// Smallest d such that every induced subgraph has a vertex of degree ≤ d,
/// with the min-degree elimination order.
pub fn degeneracy(g: &SimpleGraph) -> (usize, Vec<usize>) {
    let n = g.n();
    let maxd = g.max_degree();
    let mut deg: Vec<usize> = (0..n).map(|v| g.degree(v)).collect();
    let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); maxd + 1];
    for v in (0..n).rev() {
        buckets[deg[v]].push(v);
    }
    let mut removed = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut d = 0;
    let mut low = 0;
    while order.len() < n {
        low = low.min(maxd);
        while buckets[low].is_empty() {
            low += 1;
        }
        let v = buckets[low].pop().expect("nonempty");
        if removed[v] || deg[v] != low {
            continue;
        }
        removed[v] = true;
        d = d.max(low);
        order.push(v);
        for &w in g.neighbors(v) {
            if !removed[w] {
                deg[w] -= 1;
                buckets[deg[w]].push(w);
                low = low.min(deg[w]);
            }
        }
    }
    (d, order)
}

/// |T| ≤ t and every component of G − T has at most η·|V(G)| vertices.
pub fn validate_separator(g: &SimpleGraph, t_set: &[usize], t: usize, eta: f64) -> bool {
    if t_set.iter().any(|&v| v >= g.n()) {
        return false;
    }
    let mut keep = vec![true; g.n()];
    for &v in t_set {
        keep[v] = false;
    }
    let removed = keep.iter().filter(|k| !**k).count();
    removed <= t && components(g, Some(&keep)).iter().all(|c| c.len() as f64 <= eta * g.n() as f64 + EPS)
}

/// Supplies a cut set for the subgraph induced by a part.
pub trait SeparatorOracle: Sync {
    fn name(&self) -> String;
    /// A set T ⊆ part; the caller splits the rest into two sides.
    fn cut(&self, g: &SimpleGraph, part: &[usize]) -> Vec<usize>;
}

fn bfs_order(g: &SimpleGraph, start: usize, inside: &[bool]) -> (Vec<usize>, Vec<usize>, Vec<usize>) {
    let mut dist = vec![usize::MAX; g.n()];
    let mut parent = vec![usize::MAX; g.n()];
    let mut order = vec![start];
    dist[start] = 0;
    let mut i = 0;
    while i < order.len() {
        let u = order[i];
        i += 1;
        for &w in g.neighbors(u) {
            if inside[w] && dist[w] == usize::MAX {
                dist[w] = dist[u] + 1;
                parent[w] = u;
                order.push(w);
            }
        }
    }
    (order, dist, parent)
}

fn mask(g: &SimpleGraph, part: &[usize]) -> Vec<bool> {
    let mut m = vec![false; g.n()];
    for &v in part {
        m[v] = true;
    }
    m
}

/// Exact centroid of the largest component (a tree for forests).
pub struct TreeCentroid;

impl SeparatorOracle for TreeCentroid {
    fn name(&self) -> String {
        "tree-centroid".into()
    }

    fn cut(&self, g: &SimpleGraph, part: &[usize]) -> Vec<usize> {
        let inside = mask(g, part);
        let comps = components(g, Some(&inside));
        let Some(big) = comps.iter().max_by_key(|c| (c.len(), std::cmp::Reverse(c[0]))) else {
            return vec![];
        };
        let (order, _, parent) = bfs_order(g, big[0], &inside);
        let mut sub = vec![1usize; g.n()];
        for &u in order.iter().rev() {
            if parent[u] != usize::MAX {
                sub[parent[u]] += sub[u];
            }
        }
        let total = order.len();
        let worst = |u: usize| {
            let mut w = total - sub[u];
            for &c in g.neighbors(u) {
                if inside[c] && parent[c] == u {
                    w = w.max(sub[c]);
                }
            }
            w
        };
        let c = order.iter().copied().min_by_key(|&u| (worst(u), u)).expect("nonempty");
        vec![c]
    }
}

/// Cuts a grid part along the row or column (of the longer bounding-box
/// side) at the weighted median.
pub struct GridCut {
    pub width: usize,
}

impl SeparatorOracle for GridCut {
    fn name(&self) -> String {
        format!("grid-cut({})", self.width)
    }

    fn cut(&self, _g: &SimpleGraph, part: &[usize]) -> Vec<usize> {
        if part.is_empty() {
            return vec![];
        }
        let w = self.width;
        let rows = || part.iter().map(|&v| v / w);
        let cols = || part.iter().map(|&v| v % w);
        let (r0, r1) = (rows().min().unwrap(), rows().max().unwrap());
        let (c0, c1) = (cols().min().unwrap(), cols().max().unwrap());
        let by_col = c1 - c0 >= r1 - r0;
        let key = |v: usize| if by_col { v % w } else { v / w };
        let (lo, hi) = if by_col { (c0, c1) } else { (r0, r1) };
        let mut counts = vec![0usize; hi - lo + 1];
        for &v in part {
            counts[key(v) - lo] += 1;
        }
        let half = part.len() / 2;
        let mut before = 0;
        let mut line = lo;
        for (i, &c) in counts.iter().enumerate() {
            if before + c > half {
                line = lo + i;
                break;
            }
            before += c;
        }
        part.iter().copied().filter(|&v| key(v) == line).collect()
    }
}

/// BFS from the smallest vertex of the largest component; cuts the layer
/// holding the median. No quality guarantee.
pub struct BfsLayer;

impl SeparatorOracle for BfsLayer {
    fn name(&self) -> String {
        "bfs-layer".into()
    }

    fn cut(&self, g: &SimpleGraph, part: &[usize]) -> Vec<usize> {
        let inside = mask(g, part);
        let comps = components(g, Some(&inside));
        let Some(big) = comps.iter().max_by_key(|c| (c.len(), std::cmp::Reverse(c[0]))) else {
            return vec![];
        };
        let (order, dist, _) = bfs_order(g, big[0], &inside);
        let half = order.len() / 2;
        let layer = dist[order[half]];
        let mut t: Vec<usize> = order.into_iter().filter(|&v| dist[v] == layer).collect();
        t.sort_unstable();
        t
    }
}

/// A part split by one oracle application.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub separator: Vec<usize>,
    pub sides: [Vec<usize>; 2],
}

/// Components of part − T, largest first, each onto the currently smaller
/// side (ties to the first side).
fn fill_sides(g: &SimpleGraph, part: &[usize], t: &[usize]) -> [Vec<usize>; 2] {
    let mut keep = mask(g, part);
    for &v in t {
        keep[v] = false;
    }
    let mut comps = components(g, Some(&keep));
    comps.sort_by(|a, b| b.len().cmp(&a.len()).then(a[0].cmp(&b[0])));
    let mut sides = [Vec::new(), Vec::new()];
    for c in comps {
        let k = usize::from(sides[1].len() < sides[0].len());
        sides[k].extend(c);
    }
    sides[0].sort_unstable();
    sides[1].sort_unstable();
    sides
}

/// One (t, 2/3) split of a part: the empty separator when every component is
/// already small enough, otherwise the oracle's cut.
pub fn split_part(g: &SimpleGraph, part: &[usize], oracle: &dyn SeparatorOracle) -> Split {
    let m = part.len();
    let small = |len: usize| 3 * len <= 2 * m;
    let inside = mask(g, part);
    let separator = if components(g, Some(&inside)).iter().all(|c| small(c.len())) {
        vec![]
    } else {
        let mut t = oracle.cut(g, part);
        t.sort_unstable();
        t.dedup();
        t
    };
    let sides = fill_sides(g, part, &separator);
    Split { separator, sides }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundStats {
    pub round: u32,
    pub separator_size: usize,
    pub max_part: usize,
    pub max_cut: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Decomposition {
    pub depth: u32,
    pub oracle: String,
    pub separator: Vec<usize>,
    pub parts: Vec<Vec<usize>>,
    /// Largest single oracle cut.
    pub t0: usize,
    pub rounds: Vec<RoundStats>,
}

impl Decomposition {
    pub fn max_part(&self) -> usize {
        self.parts.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Partition, edge-cut soundness and the two size bounds.
    pub fn certify(&self, g: &SimpleGraph) -> Result<(), SeparatorError> {
        let n = g.n();
        let mut owner = vec![usize::MAX; n];
        for &v in &self.separator {
            owner[v] = 0;
        }
        for (i, p) in self.parts.iter().enumerate() {
            for &v in p {
                if owner[v] != usize::MAX {
                    return Err(SeparatorError::Invariant(format!("vertex {v} placed twice")));
                }
                owner[v] = i + 1;
            }
        }
        if let Some(v) = owner.iter().position(|&o| o == usize::MAX) {
            return Err(SeparatorError::Invariant(format!("vertex {v} unplaced")));
        }
        if let Some((u, v)) = g.edges().find(|&(u, v)| owner[u] != 0 && owner[v] != 0 && owner[u] != owner[v]) {
            return Err(SeparatorError::Invariant(format!("edge {u}-{v} joins two parts")));
        }
        if self.separator.len() as u128 > (self.t0 as u128) << self.depth {
            return Err(SeparatorError::Invariant(format!(
                "|T| = {} exceeds 2^{}·{}",
                self.separator.len(),
                self.depth,
                self.t0
            )));
        }
        let limit = (2.0f64 / 3.0).powi(self.depth as i32) * n as f64;
        if self.max_part() as f64 > limit + EPS {
            return Err(SeparatorError::Invariant(format!(
                "part of size {} exceeds (2/3)^{}·{n}",
                self.max_part(),
                self.depth
            )));
        }
        Ok(())
    }
}

/// Rounds needed for parts of size ≤ η·n: ⌈2·log2(1/η)⌉.
pub fn rounds_for(eta: f64) -> u32 {
    (2.0 * (1.0 / eta).log2() - EPS).ceil().max(0.0) as u32
}

/// Applies the oracle inside every part for `depth` rounds, accumulating
/// the separator, and certifies the result.
pub fn recursive_decompose(
    g: &SimpleGraph,
    oracle: &dyn SeparatorOracle,
    depth: u32,
) -> Result<Decomposition, SeparatorError> {
    let mut parts = vec![(0..g.n()).collect::<Vec<_>>()];
    let mut separator = Vec::new();
    let mut t0 = 0;
    let mut rounds = Vec::new();
    for round in 0..depth {
        let splits: Vec<Split> = parts.par_iter().map(|p| split_part(g, p, oracle)).collect();
        let mut next = Vec::with_capacity(parts.len() * 2);
        let mut max_cut = 0;
        for (j, (p, s)) in parts.iter().zip(splits).enumerate() {
            let m = p.len();
            let bad = |reason: String| SeparatorError::BadSeparator {
                oracle: oracle.name(),
                round,
                part: j,
                reason,
            };
            if let Some(&v) = s.separator.iter().find(|v| p.binary_search(v).is_err()) {
                return Err(bad(format!("vertex {v} outside the part")));
            }
            if let Some(side) = s.sides.iter().find(|side| 3 * side.len() > 2 * m) {
                return Err(bad(format!("side of {} in a part of {m}", side.len())));
            }
            max_cut = max_cut.max(s.separator.len());
            separator.extend_from_slice(&s.separator);
            let [a, b] = s.sides;
            next.push(a);
            next.push(b);
        }
        t0 = t0.max(max_cut);
        parts = next;
        separator.sort_unstable();
        rounds.push(RoundStats {
            round: round + 1,
            separator_size: separator.len(),
            max_part: parts.iter().map(Vec::len).max().unwrap_or(0),
            max_cut,
        });
    }
    let d = Decomposition {
        depth,
        oracle: oracle.name(),
        separator,
        parts,
        t0,
        rounds,
    };
    d.certify(g)?;
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_examples() {
        assert_eq!(degeneracy(&SimpleGraph::complete(5)).0, 4);
        assert_eq!(degeneracy(&SimpleGraph::path(7)).0, 1);
        assert!(validate_separator(&SimpleGraph::path(9), &[4], 1, 0.5));
        let grid = SimpleGraph::grid(5, 5);
        let col: Vec<usize> = (0..5).map(|r| r * 5 + 2).collect();
        assert!(validate_separator(&grid, &col, 5, 0.4));
        assert_eq!(rounds_for(0.1), 7);
    }

    #[test]
    fn path_centroid_two_rounds() {
        let g = SimpleGraph::path(30);
        let d = recursive_decompose(&g, &TreeCentroid, 2).unwrap();
        assert_eq!(d.parts.len(), 4);
        assert!(d.separator.len() <= 4);
        assert!(d.max_part() as f64 <= 4.0 / 9.0 * 30.0);
    }

    #[test]
    fn text_round_trip() {
        let g = SimpleGraph::grid(3, 4);
        assert_eq!(SimpleGraph::parse(&g.to_text()).unwrap(), g);
        assert!(SimpleGraph::parse("2 1\n0 0\n").is_err());
    }
}

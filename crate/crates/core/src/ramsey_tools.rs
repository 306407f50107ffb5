//! Small exact Ramsey computations, lower-bound certificates and the
//! sum Σ i^s/2^i.

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coloring::{ColoringOracle, Descriptor};
use crate::vset::Vertex;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RamseyError {
    #[error("exhaustive search needs N ≤ 8, got {0}")]
    TooLarge(u8),
    #[error("pattern needs at most 8 vertices, got {0}")]
    PatternTooLarge(usize),
    #[error("argument out of range: {0}")]
    Range(String),
    #[error("verification infeasible for s = {s}, n = {n}")]
    Infeasible { s: u32, n: u32 },
}

/// The red graph sought in a coloring.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Pattern {
    /// Q_n for n ≤ 2.
    Cube { n: u8 },
    /// Any graph on ≤ 8 vertices.
    Explicit { vertices: usize, edges: Vec<(usize, usize)> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RamseyInstance {
    pub pattern: Pattern,
    pub s: u8,
    #[serde(rename = "N")]
    pub n_vertices: u8,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "result")]
pub enum ArrowResult {
    /// Every coloring has a red pattern or a blue K_s.
    Arrows { colorings_checked: u64 },
    /// A coloring avoiding both; red edges listed.
    Witness { red_edges: Vec<(u8, u8)> },
}

/// Red adjacency masks of a coloring of K_N, N ≤ 8.
type Red = [u8; 8];

fn pairs(n: u8) -> Vec<(u8, u8)> {
    let mut out = Vec::new();
    for u in 1..n {
        for v in u + 1..n {
            out.push((u, v));
        }
    }
    out
}

/// Coloring number `idx`: vertex 0 is red exactly to 1..=r, and the bits of
/// `mask` color the pairs among 1..N−1 (set bit = red).
fn decode(r: u8, mask: u64, rest: &[(u8, u8)]) -> Red {
    let mut red = [0u8; 8];
    for v in 1..=r {
        red[0] |= 1 << v;
        red[v as usize] |= 1;
    }
    for (b, &(u, v)) in rest.iter().enumerate() {
        if mask >> b & 1 == 1 {
            red[u as usize] |= 1 << v;
            red[v as usize] |= 1 << u;
        }
    }
    red
}

fn has_blue_clique(n: u8, red: &Red, s: u8) -> bool {
    let full: u8 = if n == 8 { 0xff } else { (1u8 << n) - 1 };
    fn rec(cand: u8, need: u8, red: &Red, full: u8) -> bool {
        if need == 0 {
            return true;
        }
        if (cand.count_ones() as u8) < need {
            return false;
        }
        let mut c = cand;
        while c != 0 {
            let v = c.trailing_zeros() as usize;
            c &= c - 1;
            let blue = !red[v] & full & !(1u8 << v);
            if rec(c & blue, need - 1, red, full) {
                return true;
            }
        }
        false
    }
    rec(full, s, red, full)
}

fn has_red_c4(n: u8, red: &Red) -> bool {
    for u in 0..n as usize {
        for v in u + 1..n as usize {
            if (red[u] & red[v]).count_ones() >= 2 {
                return true;
            }
        }
    }
    false
}

fn has_red_pattern(n: u8, red: &Red, pattern: &Pattern) -> bool {
    match pattern {
        Pattern::Cube { n: 0 } => n >= 1,
        Pattern::Cube { n: 1 } => red.iter().take(n as usize).any(|&m| m != 0),
        Pattern::Cube { .. } => has_red_c4(n, red),
        Pattern::Explicit { vertices, edges } => {
            let mut adj = vec![0u8; *vertices];
            for &(a, b) in edges {
                adj[a] |= 1 << b;
                adj[b] |= 1 << a;
            }
            let mut map = vec![usize::MAX; *vertices];
            embed_pattern(0, &adj, &mut map, 0, n, red)
        }
    }
}

fn embed_pattern(i: usize, adj: &[u8], map: &mut [usize], used: u8, n: u8, red: &Red) -> bool {
    if i == adj.len() {
        return true;
    }
    for h in 0..n as usize {
        if used >> h & 1 == 1 {
            continue;
        }
        let ok = (0..i).all(|j| adj[i] >> j & 1 == 0 || red[h] >> map[j] & 1 == 1);
        if ok {
            map[i] = h;
            if embed_pattern(i + 1, adj, map, used | 1 << h, n, red) {
                return true;
            }
        }
    }
    false
}

/// Exhaustive search over all colorings of K_N up to relabeling the red
/// neighbourhood of vertex 0, N·2^C(N−1,2) colorings in total.
pub fn brute_force_arrow(inst: &RamseyInstance) -> Result<ArrowResult, RamseyError> {
    let n = inst.n_vertices;
    if n > 8 {
        return Err(RamseyError::TooLarge(n));
    }
    match &inst.pattern {
        Pattern::Cube { n: k } if *k > 2 => return Err(RamseyError::PatternTooLarge(1 << k)),
        Pattern::Explicit { vertices, .. } if *vertices > 8 => return Err(RamseyError::PatternTooLarge(*vertices)),
        _ => {}
    }
    if n == 0 {
        return Ok(ArrowResult::Witness { red_edges: vec![] });
    }
    let rest = pairs(n);
    let per_r = 1u64 << rest.len();
    let total = n as u64 * per_r;
    let avoids = |idx: u64| {
        let red = decode((idx / per_r) as u8, idx % per_r, &rest);
        !has_blue_clique(n, &red, inst.s) && !has_red_pattern(n, &red, &inst.pattern)
    };
    match (0..total).into_par_iter().find_first(|&i| avoids(i)) {
        None => Ok(ArrowResult::Arrows { colorings_checked: total }),
        Some(idx) => {
            let red = decode((idx / per_r) as u8, idx % per_r, &rest);
            let mut red_edges = Vec::new();
            for u in 0..n {
                for v in u + 1..n {
                    if red[u as usize] >> v & 1 == 1 {
                        red_edges.push((u, v));
                    }
                }
            }
            Ok(ArrowResult::Witness { red_edges })
        }
    }
}

/// Checks a coloring given by its red edges against an instance.
pub fn avoids_both(inst: &RamseyInstance, red_edges: &[(u8, u8)]) -> bool {
    let mut red = [0u8; 8];
    for &(u, v) in red_edges {
        red[u as usize] |= 1 << v;
        red[v as usize] |= 1 << u;
    }
    !has_blue_clique(inst.n_vertices, &red, inst.s) && !has_red_pattern(inst.n_vertices, &red, &inst.pattern)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LowerBoundCertificate {
    pub s: u32,
    pub n: u32,
    #[serde(rename = "N")]
    pub n_vertices: u64,
    pub block: u64,
    /// Every blue pair joins two different blocks, so the blue graph is
    /// (s−1)-partite and has no K_s.
    pub no_blue_ks: bool,
    pub max_red_component: u64,
    /// Q_n is connected with 2^n vertices; every red component is smaller.
    pub no_red_qn: bool,
}

impl LowerBoundCertificate {
    pub fn holds(&self) -> bool {
        self.no_blue_ks && self.no_red_qn
    }
}

fn find(parent: &mut [u32], mut x: u32) -> u32 {
    while parent[x as usize] != x {
        parent[x as usize] = parent[parent[x as usize] as usize];
        x = parent[x as usize];
    }
    x
}

/// Builds (s−1) red cliques of size 2^n − 1 joined by blue, and verifies
/// both avoidance properties directly on the oracle.
pub fn lower_bound_certificate(s: u32, n: u32) -> Result<LowerBoundCertificate, RamseyError> {
    if s < 3 || n < 1 {
        return Err(RamseyError::Range(format!("s = {s}, n = {n}")));
    }
    if s > 6 || n > 10 {
        return Err(RamseyError::Infeasible { s, n });
    }
    let block = (1u64 << n) - 1;
    let o = ColoringOracle::from_descriptor(&Descriptor::lower_bound(s, block)).map_err(|e| RamseyError::Range(e.to_string()))?;
    let total = o.n();
    let no_blue_ks = (0..total).into_par_iter().all(|u| {
        (u + 1..total).all(|v| !o.is_blue(u, v) || u as u64 / block != v as u64 / block)
    });
    let mut parent: Vec<Vertex> = (0..total).collect();
    for u in 0..total {
        for v in u + 1..total {
            if !o.is_blue(u, v) {
                let (a, b) = (find(&mut parent, u), find(&mut parent, v));
                if a != b {
                    parent[a.max(b) as usize] = a.min(b);
                }
            }
        }
    }
    let mut sizes = vec![0u64; total as usize];
    for v in 0..total {
        let r = find(&mut parent, v);
        sizes[r as usize] += 1;
    }
    let max_red_component = sizes.into_iter().max().unwrap_or(0);
    Ok(LowerBoundCertificate {
        s,
        n,
        n_vertices: total as u64,
        block,
        no_blue_ks,
        max_red_component,
        no_red_qn: max_red_component < 1u64 << n,
    })
}

/// Stirling number of the second kind for 0 ≤ k ≤ t ≤ 20, by the
/// recurrence S(t,k) = k·S(t−1,k) + S(t−1,k−1).
pub fn stirling(t: u32, k: u32) -> Result<BigUint, RamseyError> {
    if k > t || t > 20 {
        return Err(RamseyError::Range(format!("S({t}, {k})")));
    }
    let mut row = vec![BigUint::one()];
    for i in 1..=t as usize {
        let mut next = vec![BigUint::zero(); i + 1];
        for j in 1..=i {
            let keep = if j < i { &row[j] * BigUint::from(j) } else { BigUint::zero() };
            next[j] = keep + &row[j - 1];
        }
        row = next;
    }
    Ok(row[k as usize].clone())
}

/// (x)_t = x(x−1)…(x−t+1).
pub fn falling_factorial(x: i64, t: u32) -> BigInt {
    (0..t as i64).fold(BigInt::one(), |acc, i| acc * BigInt::from(x - i))
}

fn factorial(k: u32) -> BigUint {
    (1..=k).fold(BigUint::one(), |acc, i| acc * BigUint::from(i))
}

fn binomial(n: u32, k: u32) -> BigUint {
    (0..k).fold(BigUint::one(), |acc, i| acc * BigUint::from(n - i) / BigUint::from(i + 1))
}

/// T_s = Σ_k k!·S(s,k), the number of ordered set partitions.
pub fn surjection_count(s: u32) -> Result<BigUint, RamseyError> {
    (0..=s).try_fold(BigUint::zero(), |acc, k| Ok(acc + factorial(k) * stirling(s, k)?))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartialSum {
    /// Terms summed, i = 1..=terms.
    pub terms: u32,
    /// Σ i^s·2^(terms−i); the partial sum is this over 2^terms.
    #[serde(with = "big_string")]
    pub numerator: BigUint,
    /// Threshold from which i^s/2^i ≤ (2/3)^i.
    pub i0: u32,
    /// The integer pinned by partial sum and tail bound.
    #[serde(with = "big_string")]
    pub value: BigUint,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lemma41Report {
    pub s: u32,
    #[serde(with = "big_string")]
    pub stirling_route: BigUint,
    #[serde(with = "big_string")]
    pub explicit_route: BigUint,
    pub partial: PartialSum,
    pub routes_agree: bool,
    #[serde(with = "big_string")]
    pub bound: BigUint,
    pub bound_holds: bool,
    #[serde(with = "big_string")]
    pub surjections: BigUint,
    pub surjections_le_s_pow_s: bool,
}

mod big_string {
    use num_bigint::BigUint;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &BigUint, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigUint, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

fn pow_u(b: u32, e: u32) -> BigUint {
    BigUint::from(b).pow(e)
}

/// Smallest j with 3^j·j^s ≤ 4^j and 3(j+1)^s ≤ 4j^s; the second condition
/// makes the first persist for all larger j.
fn tail_start(s: u32) -> u32 {
    let mut j = 1;
    loop {
        let a = pow_u(3, j) * pow_u(j, s) <= pow_u(4, j);
        let b = BigUint::from(3u32) * pow_u(j + 1, s) <= BigUint::from(4u32) * pow_u(j, s);
        if a && b {
            return j;
        }
        j += 1;
    }
}

/// Σ_{i≥1} i^s/2^i computed three ways, with the bound 2s^s.
pub fn lemma41_bounds(s: u32) -> Result<Lemma41Report, RamseyError> {
    if !(1..=20).contains(&s) {
        return Err(RamseyError::Range(format!("s = {s}")));
    }
    let surjections = surjection_count(s)?;
    let stirling_route = BigUint::from(2u32) * &surjections;

    let mut explicit = BigInt::zero();
    for k in 0..=s {
        for j in 0..=k {
            let term = BigInt::from(binomial(k, j) * pow_u(j, s));
            if (k - j) % 2 == 0 {
                explicit += term;
            } else {
                explicit -= term;
            }
        }
    }
    explicit *= 2;
    let explicit_route = if explicit.is_negative() {
        return Err(RamseyError::Range("negative explicit sum".into()));
    } else {
        explicit.to_biguint().expect("non-negative")
    };

    // Partial sum P over 2^I with X − P ≤ 2(2/3)^I < 1/2, so X = ⌈P⌉.
    let i0 = tail_start(s);
    let mut terms = i0.max(4);
    while pow_u(3, terms) <= BigUint::from(4u32) * pow_u(2, terms) {
        terms += 1;
    }
    let numerator = (1..=terms).fold(BigUint::zero(), |acc, i| acc + pow_u(i, s) * pow_u(2, terms - i));
    let denom = pow_u(2, terms);
    let value = (&numerator + &denom - BigUint::one()) / &denom;
    let partial = PartialSum {
        terms,
        numerator,
        i0,
        value,
    };

    let bound = BigUint::from(2u32) * pow_u(s, s);
    Ok(Lemma41Report {
        s,
        routes_agree: stirling_route == explicit_route && stirling_route == partial.value,
        bound_holds: stirling_route <= bound,
        surjections_le_s_pow_s: surjections <= pow_u(s, s),
        stirling_route,
        explicit_route,
        partial,
        bound,
        surjections,
    })
}

/// Convenience: X_s as u128 when it fits.
pub fn x_value(s: u32) -> Option<u128> {
    lemma41_bounds(s).ok()?.stirling_route.to_u128()
}

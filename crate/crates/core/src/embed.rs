//! Greedy embedding of Q_n into the pruned sets, and the plain greedy
//! embedder for colorings of small maximum blue degree.

use std::collections::{HashMap, HashSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coloring::{blue_degree, verify_red_cube, ColoringOracle, Embedding, Verdict};
use crate::cube::CubeRef;
use crate::refine::PrunedAssignment;
use crate::regime::{Mode, RegimeParams};
use crate::tiling::TilingRun;
use crate::vset::Vertex;

#[derive(Debug, Error)]
pub enum EmbedError {
    #[error("no admissible image for {x} in {cube}: {internal} internal, {external} external, {occupancy} occupied of {t_size}")]
    NoImage {
        x: u64,
        cube: String,
        t_size: usize,
        internal: usize,
        external: usize,
        occupancy: usize,
    },
    #[error("invariant breach: {0}")]
    Invariant(String),
    #[error("refused: N = {n_vertices} < d_max·n + 2^n = {needed} (d_max = {d_max})")]
    Refused { n_vertices: u64, needed: u64, d_max: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CubeStats {
    pub cube: String,
    pub codim: u8,
    pub t_size: usize,
    pub max_internal: usize,
    pub max_external: usize,
    pub max_occupancy: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmbedReport {
    pub embedding: Embedding,
    pub cubes: Vec<CubeStats>,
    /// Steps where a forbidden class exceeded its bound.
    pub audit_violations: Vec<String>,
}

/// Deepest-level cubes in decreasing codimension, ties by reverse insertion.
pub fn embedding_order(run: &TilingRun) -> Vec<CubeRef> {
    let t = &run.tiling;
    let top = t.top_level();
    let mut order: Vec<(u8, usize, CubeRef)> = t
        .log()
        .iter()
        .enumerate()
        .filter(|(_, ins)| ins.cube.level == top)
        .map(|(pos, ins)| (ins.codim, pos, ins.cube))
        .collect();
    order.sort_by(|a, b| b.0.cmp(&a.0).then(b.1.cmp(&a.1)));
    order.into_iter().map(|x| x.2).collect()
}

/// Embeds Q_n cube by cube; each vertex takes the smallest admissible image
/// in its cube's pruned set.
pub fn greedy_embed(
    o: &ColoringOracle,
    pruned: &PrunedAssignment,
    run: &TilingRun,
    params: &RegimeParams,
) -> Result<EmbedReport, EmbedError> {
    let t = &run.tiling;
    let n = params.n;
    let size = 1usize << n;
    let top = t.top_level();
    let mut map: Vec<Option<Vertex>> = vec![None; size];
    let mut used: HashSet<Vertex> = HashSet::new();
    let mut stats = Vec::new();
    let mut audit_violations = Vec::new();
    let (ext_num, ext_den) = params.embed_external_fraction();
    let (int_num, int_den) = params.embed_internal_fraction();

    for r in embedding_order(run) {
        let c = t.get(r);
        let kept = pruned
            .kept(r)
            .ok_or_else(|| EmbedError::Invariant(format!("{c} has no pruned set")))?
            .as_slice();
        let dim = n - c.codim();
        let mut st = CubeStats {
            cube: c.cube.to_string(),
            codim: c.codim(),
            t_size: kept.len(),
            max_internal: 0,
            max_external: 0,
            max_occupancy: 0,
        };
        let mut in_cube: HashSet<Vertex> = HashSet::new();
        for x in c.cube.vertices() {
            let mut internal = Vec::new();
            let mut external = Vec::new();
            for k in 0..n {
                let y = x ^ (1u64 << k);
                let Some(img) = map[y as usize] else { continue };
                if c.cube.contains_vertex(y) {
                    internal.push(img);
                } else {
                    let other = t
                        .cube_at(top, y)
                        .ok_or_else(|| EmbedError::Invariant(format!("vertex {y} uncovered")))?;
                    if t.get(other).codim() < c.codim() {
                        return Err(EmbedError::Invariant(format!(
                            "order discipline: {} embedded before {c}",
                            t.get(other)
                        )));
                    }
                    external.push(img);
                }
            }
            let classes: Vec<(bool, bool, bool)> = kept
                .par_iter()
                .map(|&v| {
                    (
                        internal.iter().any(|&w| w != v && o.is_blue(v, w)),
                        external.iter().any(|&w| w != v && o.is_blue(v, w)),
                        in_cube.contains(&v),
                    )
                })
                .collect();
            let n_int = classes.iter().filter(|c| c.0).count();
            let n_ext = classes.iter().filter(|c| c.1).count();
            let n_occ = classes.iter().filter(|c| c.2).count();
            st.max_internal = st.max_internal.max(n_int);
            st.max_external = st.max_external.max(n_ext);
            st.max_occupancy = st.max_occupancy.max(n_occ);
            let ext_ok = (n_ext as u64) * ext_den <= ext_num * kept.len() as u64;
            let int_ok = (n_int as u64) * int_den <= int_num << dim;
            let occ_ok = (n_occ as u64) < 1u64 << dim;
            if !(ext_ok && int_ok && occ_ok) {
                audit_violations.push(format!(
                    "{x} in {c}: internal {n_int}, external {n_ext}, occupied {n_occ}, |T| {}",
                    kept.len()
                ));
            }
            let pick = kept
                .iter()
                .zip(&classes)
                .find(|(v, cl)| !cl.0 && !cl.1 && !cl.2 && !used.contains(v))
                .map(|(&v, _)| v);
            let Some(v) = pick else {
                return Err(EmbedError::NoImage {
                    x,
                    cube: c.cube.to_string(),
                    t_size: kept.len(),
                    internal: n_int,
                    external: n_ext,
                    occupancy: n_occ,
                });
            };
            map[x as usize] = Some(v);
            used.insert(v);
            in_cube.insert(v);
        }
        stats.push(st);
    }
    let map: Vec<Vertex> = map
        .into_iter()
        .enumerate()
        .map(|(x, v)| v.ok_or_else(|| EmbedError::Invariant(format!("vertex {x} never embedded"))))
        .collect::<Result<_, _>>()?;
    let embedding = Embedding { n, map };
    if let Verdict::Violation(v) = verify_red_cube(o, &embedding) {
        return Err(EmbedError::Invariant(format!("greedy embedding fails verification: {v:?}")));
    }
    if params.mode == Mode::PaperExact && !audit_violations.is_empty() {
        return Err(EmbedError::Invariant(format!(
            "forbidden-count bound exceeded: {}",
            audit_violations[0]
        )));
    }
    Ok(EmbedReport {
        embedding,
        cubes: stats,
        audit_violations,
    })
}

/// Maximum blue degree over all of [N], with the smallest vertex attaining it.
pub fn max_blue_degree(o: &ColoringOracle) -> (u64, Vertex) {
    let all: Vec<Vertex> = (0..o.n()).collect();
    all.par_iter()
        .map(|&v| (blue_degree(o, v, &all), v))
        .reduce(|| (0, 0), |a, b| if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a })
}

/// Embeds Q_n vertex by vertex in ascending order, each into the smallest
/// unused vertex red to the images of its embedded neighbours. Refuses when
/// N < d_max·n + 2^n.
pub fn baseline_embed(o: &ColoringOracle, n: u8) -> Result<Embedding, EmbedError> {
    let (d_max, _) = max_blue_degree(o);
    let needed = d_max * n as u64 + (1u64 << n);
    if (o.n() as u64) < needed {
        return Err(EmbedError::Refused {
            n_vertices: o.n() as u64,
            needed,
            d_max,
        });
    }
    let size = 1usize << n;
    let mut map: Vec<Vertex> = Vec::with_capacity(size);
    let mut used: HashMap<Vertex, ()> = HashMap::with_capacity(size);
    for x in 0..size {
        let nbrs: Vec<Vertex> = (0..n).map(|k| x ^ (1 << k)).filter(|&y| y < x).map(|y| map[y]).collect();
        let v = (0..o.n())
            .find(|v| !used.contains_key(v) && nbrs.iter().all(|&w| !o.is_blue(*v, w)))
            .ok_or_else(|| EmbedError::Invariant(format!("no image for {x} despite N ≥ d_max·n + 2^n")))?;
        map.push(v);
        used.insert(v, ());
    }
    let e = Embedding { n, map };
    if let Verdict::Violation(v) = verify_red_cube(o, &e) {
        return Err(EmbedError::Invariant(format!("baseline embedding fails verification: {v:?}")));
    }
    Ok(e)
}

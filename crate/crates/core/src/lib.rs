//! Red hypercubes in two-colorings of complete graphs: cube algebra,
//! leveled preprocessing, multi-level tilings, pruning and greedy embedding,
//! plus small Ramsey utilities and planar-style separators.

pub mod bitset;
pub mod clique;
pub mod coloring;
pub mod cube;
pub mod embed;
pub mod pipeline;
pub mod preprocess;
pub mod ramsey_tools;
pub mod refine;
pub mod regime;
pub mod separator;
pub mod tiling;
pub mod vset;

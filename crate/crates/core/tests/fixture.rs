//! A hand-built three-block instance where tiling, pruning and embedding all
//! do real work.

use cuberamsey::coloring::{verify_red_cube, BitMatrix, Color, ColoringOracle};
use cuberamsey::embed::greedy_embed;
use cuberamsey::preprocess::FamilyForest;
use cuberamsey::refine::prune;
use cuberamsey::regime::RegimeParams;
use cuberamsey::tiling::{audit, StepOutcome, TilingRun};
use cuberamsey::vset::VertexSet;

/// Blocks [0,128), [128,192), [192,256); sparse blue between them.
fn three_blocks() -> (ColoringOracle, FamilyForest, RegimeParams) {
    let mut m = BitMatrix::new(256);
    for k in 0..64u32 {
        m.set(128 + k, 2 * k, Color::Blue);
        m.set(192 + k, 2 * k + 1, Color::Blue);
        if k % 2 == 0 {
            m.set(192 + k, 128 + k, Color::Blue);
        }
    }
    for v in 40..50 {
        m.set(129, v, Color::Blue);
    }
    let o = ColoringOracle::explicit(m);
    let mut f = FamilyForest::root(256).unwrap();
    f.push_child(0, 1, VertexSet::range(0, 128), false).unwrap();
    f.push_child(0, 2, VertexSet::range(128, 192), false).unwrap();
    f.push_child(0, 2, VertexSet::range(192, 256), false).unwrap();
    let p = RegimeParams::engineering(3, 6, 256, vec![4], vec![6]).unwrap();
    f.validate(&p).unwrap();
    (o, f, p)
}

fn tiled() -> (ColoringOracle, FamilyForest, RegimeParams, TilingRun) {
    let (o, f, p) = three_blocks();
    let mut run = TilingRun::new(&p).unwrap();
    assert_eq!(run.run(&o, &f, &p, 100).unwrap(), StepOutcome::Complete);
    (o, f, p, run)
}

#[test]
fn tiling_matches_blocks() {
    let (o, f, p, run) = tiled();
    let t = &run.tiling;
    let got: Vec<(String, usize)> = t
        .level(1)
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let r = cuberamsey::cube::CubeRef { level: 1, index: i as u32 };
            (c.cube.to_string(), run.assignment.set_of(r).unwrap())
        })
        .collect();
    let mut got = got;
    got.sort();
    assert_eq!(
        got,
        vec![("0*****".to_string(), 1), ("10****".to_string(), 2), ("11****".to_string(), 3)]
    );
    assert!(t.is_complete());
    let a = audit(&o, &run, &f, &p);
    assert!(a.pass, "{:?}", a.failed().collect::<Vec<_>>());
}

#[test]
fn pruning_removes_the_heavy_vertex() {
    let (o, f, p, run) = tiled();
    let pruned = prune(&o, &run, &f, &p).unwrap();
    let mut removed: Vec<u32> = Vec::new();
    for pc in &pruned.cubes {
        let orig = &f.get(pc.set).vertices;
        removed.extend(orig.difference(&pc.kept).iter());
        assert!(2 * pc.kept.len() >= pc.original);
    }
    assert_eq!(removed, vec![129]);
    assert!(pruned.certification.pass, "{:?}", pruned.certification.violations);
}

#[test]
fn embedding_verifies() {
    let (o, f, p, run) = tiled();
    let pruned = prune(&o, &run, &f, &p).unwrap();
    let rep = greedy_embed(&o, &pruned, &run, &p).unwrap();
    assert!(verify_red_cube(&o, &rep.embedding).is_valid());
    let images: std::collections::BTreeSet<u32> = rep.embedding.map.iter().copied().collect();
    assert_eq!(images.len(), 64);
    assert!(!images.contains(&129));
    // Cube x lands in the block assigned to its prefix.
    for (x, &v) in rep.embedding.map.iter().enumerate() {
        let block = match x >> 4 {
            0..=1 => 0..128,
            2 => 128..192,
            _ => 192..256,
        };
        assert!(block.contains(&v), "{x} ↦ {v}");
    }
}

#[test]
fn audit_catches_swapped_sets() {
    let (o, f, p, mut run) = tiled();
    let a = cuberamsey::cube::CubeRef { level: 1, index: 0 };
    let b = cuberamsey::cube::CubeRef { level: 1, index: 1 };
    let (ca, cb) = (run.tiling.get(a).clone(), run.tiling.get(b).clone());
    assert_ne!(ca.codim(), cb.codim());
    run.assignment.swap(a, b);
    let rep = audit(&o, &run, &f, &p);
    assert!(!rep.pass);
    assert!(rep.failed().any(|i| i.check == "condition-1"));
}

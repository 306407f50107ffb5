use std::collections::BTreeMap;

use cuberamsey::cube::{contains, relation, CubeRef, LeveledCube, MultiTiling, Relation, SpecialCube};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn all_cubes(n: u8) -> Vec<SpecialCube> {
    (0..=n)
        .flat_map(|d| (0..1u64 << d).map(move |p| SpecialCube::new(n, d, p).unwrap()))
        .collect()
}

/// Brute-force relation from explicit vertex sets.
fn brute_relation(n: u8, a: &SpecialCube, b: &SpecialCube) -> (bool, Relation) {
    let va: Vec<u64> = a.vertices().collect();
    let b_has = |x: u64| b.vertices().contains(&x);
    let subset = b.vertices().all(|x| va.contains(&x));
    let meet = va.iter().any(|&x| b_has(x));
    let rel = if meet {
        Relation::Nested
    } else if va.iter().any(|&x| (0..n).any(|k| b_has(x ^ (1 << k)))) {
        Relation::Adjacent
    } else {
        Relation::NonAdjacent
    };
    (subset, rel)
}

#[test]
fn relation_and_contains_agree_with_enumeration() {
    for n in 1..=8u8 {
        let cubes = all_cubes(n);
        for a in &cubes {
            for b in &cubes {
                let (subset, rel) = brute_relation(n, a, b);
                assert_eq!(contains(a, b).unwrap(), subset, "{a} ⊇ {b}");
                assert_eq!(relation(a, b).unwrap(), rel, "{a} vs {b}");
            }
        }
    }
}

#[test]
fn worked_examples() {
    let c = |s: &str| s.parse::<SpecialCube>().unwrap();
    assert_eq!(relation(&c("01**"), &c("11**")).unwrap(), Relation::Adjacent);
    assert_eq!(relation(&c("00**"), &c("11**")).unwrap(), Relation::NonAdjacent);
    assert_eq!(relation(&c("0***"), &c("01**")).unwrap(), Relation::Nested);
    assert_eq!(c("10**").vertices(), 8..12);
    assert!(contains(&c("1***"), &c("10**")).unwrap());
    assert!(contains(&c("0**"), &c("1**")).is_ok_and(|x| !x));
}

#[test]
fn four_quarter_tiling_of_q4() {
    let mut t = MultiTiling::new(4, 3).unwrap();
    t.insert(LeveledCube::root(4).unwrap()).unwrap();
    for p in 0..4 {
        t.insert(LeveledCube::new(SpecialCube::new(4, 2, p).unwrap(), vec![2]).unwrap()).unwrap();
    }
    assert!(t.is_complete());
    for (i, c) in t.level(1).iter().enumerate() {
        let adj = t.adjacent_cubes(c, 2);
        assert_eq!(adj.len(), 2, "{c}");
        assert!(!adj.contains(&CubeRef { level: 1, index: i as u32 }));
    }
    let q = t.level(1);
    assert_eq!(relation(&q[0].cube, &q[3].cube).unwrap(), Relation::NonAdjacent);
    assert!(t.adjacent_cubes(&LeveledCube::root(4).unwrap(), 4).is_empty());
}

/// Random tiling of `c` by special cubes: split each cube with probability
/// `p` while its codimension is below `n`.
fn random_tiling(rng: &mut ChaCha8Rng, c: SpecialCube, n: u8, p: f64) -> Vec<SpecialCube> {
    let mut out = Vec::new();
    let mut stack = vec![c];
    while let Some(x) = stack.pop() {
        if x.codim() < n && rng.gen_bool(p) {
            stack.push(x.child(1).unwrap());
            stack.push(x.child(0).unwrap());
        } else {
            out.push(x);
        }
    }
    out
}

/// A complete multi-tiling of Q_n with s−2 proper levels.
pub fn random_multitiling(seed: u64, n: u8, s: u8) -> MultiTiling {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = MultiTiling::new(n, s).unwrap();
    t.insert_unordered(LeveledCube::root(n).unwrap()).unwrap();
    let mut prev = vec![LeveledCube::root(n).unwrap()];
    for _ in 1..=t.top_level() {
        let p = rng.gen_range(0.3..0.8);
        let mut next = Vec::new();
        for parent in &prev {
            for cube in random_tiling(&mut rng, parent.cube, n, p) {
                let mut codims = parent.level_codims.clone();
                codims.push(cube.codim() - parent.codim());
                let lc = LeveledCube::new(cube, codims).unwrap();
                t.insert_unordered(lc.clone()).unwrap();
                next.push(lc);
            }
        }
        prev = next;
    }
    assert!(t.is_complete());
    t
}

/// Violations of the per-(ρ, ℓ′) adjacency bounds, plus cross-checks of
/// `adjacent_cubes` against a quadratic scan.
pub fn adjacency_violations(t: &MultiTiling) -> Vec<String> {
    let mut bad = Vec::new();
    let refs: Vec<CubeRef> = t.refs().collect();
    for &r in &refs {
        let c = t.get(r);
        if c.level() == 0 {
            continue;
        }
        let d = c.codim();
        let listed = t.adjacent_cubes(c, d);
        let scanned: Vec<CubeRef> = refs
            .iter()
            .copied()
            .filter(|&o| {
                let oc = t.get(o);
                oc.codim() <= d && relation(&c.cube, &oc.cube).unwrap() == Relation::Adjacent
            })
            .collect();
        if listed != scanned {
            bad.push(format!("{c}: listed {listed:?} scanned {scanned:?}"));
        }
        let mut per_level: BTreeMap<u8, usize> = BTreeMap::new();
        let mut per_rho: BTreeMap<(u8, u8), usize> = BTreeMap::new();
        for &o in &listed {
            let oc = t.get(o);
            *per_level.entry(o.level).or_insert(0) += 1;
            if o.level == 0 {
                continue;
            }
            let rho = t.level_of_adjacency(c, oc).unwrap();
            *per_rho.entry((rho, o.level)).or_insert(0) += 1;
        }
        for (&l, &k) in &per_level {
            if k > d as usize {
                bad.push(format!("{c}: {k} adjacent level-{l} cubes of codim ≤ {d}"));
            }
        }
        for (&(rho, l), &k) in &per_rho {
            if k > c.d_at(rho) as usize {
                bad.push(format!("{c}: {k} level-{l} cubes with adjacency level {rho} > d_{rho} = {}", c.d_at(rho)));
            }
        }
    }
    bad
}

#[test]
fn adjacency_bounds_on_random_multitilings() {
    for s in [3u8, 4, 5] {
        for seed in 0..1000u64 {
            let t = random_multitiling(seed * 7 + s as u64, 8, s);
            let bad = adjacency_violations(&t);
            assert!(bad.is_empty(), "s = {s}, seed {seed}: {bad:?}");
        }
    }
}

proptest! {
    #[test]
    fn flip_is_adjacent_and_truncate_contains(n in 1u8..=16, d in 1u8..=16, raw in any::<u64>(), j in 1u8..=16) {
        let d = d.min(n);
        let j = j.min(d);
        let c = SpecialCube::new(n, d, raw & ((1u64 << d) - 1)).unwrap();
        prop_assert_eq!(relation(&c, &c.flip(j)).unwrap(), Relation::Adjacent);
        for k in 0..=d {
            prop_assert!(contains(&c.truncate(k), &c).unwrap());
        }
        let text = c.to_string();
        prop_assert_eq!(text.parse::<SpecialCube>().unwrap(), c);
    }

    #[test]
    fn containing_holds_its_vertex(n in 1u8..=20, d in 0u8..=20, x in any::<u64>()) {
        let d = d.min(n);
        let x = x & ((1u64 << n) - 1);
        let c = SpecialCube::containing(n, d, x).unwrap();
        prop_assert!(c.contains_vertex(x));
        prop_assert_eq!(c.size(), 1u64 << (n - d));
    }

    #[test]
    fn random_multitilings_satisfy_bounds(seed in any::<u64>(), s in 3u8..=5, n in 2u8..=7) {
        let t = random_multitiling(seed, n, s);
        let bad = adjacency_violations(&t);
        prop_assert!(bad.is_empty(), "{:?}", bad);
    }
}

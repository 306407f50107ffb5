use cuberamsey::coloring::{find_blue_clique, CliqueSearch, ColoringOracle, Descriptor, SearchMode};
use cuberamsey::ramsey_tools::{
    avoids_both, brute_force_arrow, lemma41_bounds, lower_bound_certificate, stirling, surjection_count, x_value,
    ArrowResult, Pattern, RamseyInstance,
};
use cuberamsey::vset::VertexSet;
use num_bigint::BigUint;
use petgraph::graph::UnGraph;

/// Σ_{i≥1} i^s/2^i from X_0 = 1 and X_s = 1 + Σ_{k<s} C(s,k)·X_k.
fn series_by_recurrence(max: usize) -> Vec<u128> {
    let mut binom = vec![vec![1u128]];
    for s in 1..=max {
        let prev = &binom[s - 1];
        let mut row = vec![1u128; s + 1];
        for k in 1..s {
            row[k] = prev[k - 1] + prev[k];
        }
        binom.push(row);
    }
    let mut x = vec![1u128];
    for row in &binom[1..] {
        let v = 1 + x.iter().zip(row).map(|(a, b)| a * b).sum::<u128>();
        x.push(v);
    }
    x
}

#[test]
fn cubic_series_is_twenty_six() {
    assert_eq!(x_value(3), Some(26));
    let r = lemma41_bounds(3).unwrap();
    assert!(r.routes_agree);
    assert_eq!(r.partial.value, BigUint::from(26u32));
}

#[test]
fn quintic_series_below_two_to_twelve() {
    let x5 = x_value(5).unwrap();
    assert_eq!(x5, series_by_recurrence(5)[5]);
    assert_eq!(x5, 1082);
    assert!(x5 < 1 << 12);
}

#[test]
fn three_routes_agree_and_match_recurrence() {
    let oracle = series_by_recurrence(20);
    for s in 1..=20u32 {
        let r = lemma41_bounds(s).unwrap();
        assert_eq!(r.stirling_route, BigUint::from(oracle[s as usize]), "s = {s}");
        if s <= 12 {
            assert!(r.routes_agree, "s = {s}: {r:?}");
            assert_eq!(r.explicit_route, r.partial.value);
        }
        assert!(r.bound_holds, "s = {s}");
        assert!(BigUint::from(oracle[s as usize]) <= BigUint::from(2u32) * BigUint::from(s).pow(s));
    }
    assert!(lemma41_bounds(0).is_err());
    assert!(lemma41_bounds(21).is_err());
}

#[test]
fn stirling_and_fubini_values() {
    assert_eq!(stirling(5, 2).unwrap(), BigUint::from(15u32));
    assert_eq!(stirling(6, 3).unwrap(), BigUint::from(90u32));
    assert_eq!(stirling(4, 0).unwrap(), BigUint::from(0u32));
    let fubini = [1u32, 1, 3, 13, 75, 541, 4683];
    for (s, &f) in fubini.iter().enumerate() {
        assert_eq!(surjection_count(s as u32).unwrap(), BigUint::from(f));
    }
}

fn cube_instance(n: u8, n_vertices: u8) -> RamseyInstance {
    RamseyInstance {
        pattern: Pattern::Cube { n },
        s: 3,
        n_vertices,
    }
}

#[test]
fn edge_versus_triangle() {
    assert!(matches!(brute_force_arrow(&cube_instance(1, 2)).unwrap(), ArrowResult::Witness { .. }));
    assert!(matches!(brute_force_arrow(&cube_instance(1, 3)).unwrap(), ArrowResult::Arrows { .. }));
}

#[test]
fn square_versus_triangle() {
    let inst6 = cube_instance(2, 6);
    match brute_force_arrow(&inst6).unwrap() {
        ArrowResult::Witness { red_edges } => assert!(avoids_both(&inst6, &red_edges)),
        other => panic!("expected a witness at 6, got {other:?}"),
    }
    let ArrowResult::Arrows { colorings_checked } = brute_force_arrow(&cube_instance(2, 7)).unwrap() else {
        panic!("7 must arrow");
    };
    assert_eq!(colorings_checked, 7 << 15);
    // Two red triangles, blue K_{3,3}.
    let triangles = [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)];
    assert!(avoids_both(&inst6, &triangles));
    // (|G| − 1)(χ(K_3) − 1) + σ(K_3) with |G| = 4, χ = 3, σ = 1.
    let smallest = (2..=7u8).find(|&v| matches!(brute_force_arrow(&cube_instance(2, v)).unwrap(), ArrowResult::Arrows { .. }));
    assert_eq!(smallest, Some((4 - 1) * (3 - 1) + 1));
}

#[test]
fn explicit_pattern_matches_cube() {
    let c4 = Pattern::Explicit {
        vertices: 4,
        edges: vec![(0, 1), (1, 3), (3, 2), (2, 0)],
    };
    for n in 5..=7u8 {
        let a = brute_force_arrow(&RamseyInstance { pattern: c4.clone(), s: 3, n_vertices: n }).unwrap();
        let b = brute_force_arrow(&cube_instance(2, n)).unwrap();
        assert_eq!(matches!(a, ArrowResult::Arrows { .. }), matches!(b, ArrowResult::Arrows { .. }));
    }
    assert!(brute_force_arrow(&cube_instance(3, 8)).is_err());
}

#[test]
fn lower_bound_certificates_hold() {
    for s in 3..=6u32 {
        for n in 1..=10u32 {
            let c = lower_bound_certificate(s, n).unwrap();
            assert_eq!(c.n_vertices, (s as u64 - 1) * ((1 << n) - 1));
            assert!(c.holds(), "s = {s}, n = {n}: {c:?}");
            assert_eq!(c.max_red_component, (1 << n) - 1);
        }
    }
    assert!(lower_bound_certificate(7, 3).is_err());
}

#[test]
fn lower_bound_small_cases_by_independent_checks() {
    for s in 3..=5u32 {
        for n in 1..=4u32 {
            let block = (1u64 << n) - 1;
            let o = ColoringOracle::from_descriptor(&Descriptor::lower_bound(s, block)).unwrap();
            let total = o.n();
            let mut g = UnGraph::<(), ()>::new_undirected();
            let nodes: Vec<_> = (0..total).map(|_| g.add_node(())).collect();
            for u in 0..total {
                for v in u + 1..total {
                    if !o.is_blue(u, v) {
                        g.add_edge(nodes[u as usize], nodes[v as usize], ());
                    }
                }
            }
            assert_eq!(petgraph::algo::connected_components(&g), s as usize - 1);
            let all = VertexSet::range(0, total);
            let r = find_blue_clique(&o, &all, s as usize, SearchMode::Exact { cap: 1000 }).unwrap();
            assert_eq!(r, CliqueSearch::Absent, "s = {s}, n = {n}");
        }
    }
}

use cuberamsey::separator::{
    components, degeneracy, recursive_decompose, rounds_for, split_part, validate_separator, BfsLayer, GridCut,
    SimpleGraph, TreeCentroid,
};
use petgraph::graph::UnGraph;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_graph(rng: &mut ChaCha8Rng, n: usize, p: f64) -> SimpleGraph {
    let mut g = SimpleGraph::new(n);
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(p) {
                g.add_edge(u, v).unwrap();
            }
        }
    }
    g
}

fn random_tree(rng: &mut ChaCha8Rng, n: usize) -> SimpleGraph {
    let mut g = SimpleGraph::new(n);
    for v in 1..n {
        g.add_edge(rng.gen_range(0..v), v).unwrap();
    }
    g
}

/// max over non-empty vertex subsets of the minimum induced degree.
fn exhaustive_degeneracy(g: &SimpleGraph) -> usize {
    let n = g.n();
    (1u32..1 << n)
        .map(|mask| {
            (0..n)
                .filter(|v| mask >> v & 1 == 1)
                .map(|v| g.neighbors(v).iter().filter(|&&w| mask >> w & 1 == 1).count())
                .min()
                .unwrap()
        })
        .max()
        .unwrap_or(0)
}

fn petgraph_components(g: &SimpleGraph) -> usize {
    let mut pg = UnGraph::<(), ()>::new_undirected();
    let nodes: Vec<_> = (0..g.n()).map(|_| pg.add_node(())).collect();
    for (u, v) in g.edges() {
        pg.add_edge(nodes[u], nodes[v], ());
    }
    petgraph::algo::connected_components(&pg)
}

#[test]
fn degeneracy_matches_exhaustive_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..100 {
        let p = rng.gen_range(0.1..0.9);
        let g = random_graph(&mut rng, 12, p);
        let (k, order) = degeneracy(&g);
        assert_eq!(k, exhaustive_degeneracy(&g));
        let mut seen = order.clone();
        seen.sort();
        assert_eq!(seen, (0..12).collect::<Vec<_>>());
        // Each vertex has at most k neighbours later in the order.
        let pos: Vec<usize> = {
            let mut p = vec![0; 12];
            for (i, &v) in order.iter().enumerate() {
                p[v] = i;
            }
            p
        };
        for v in 0..12 {
            assert!(g.neighbors(v).iter().filter(|&&w| pos[w] > pos[v]).count() <= k);
        }
    }
}

#[test]
fn degeneracy_of_known_graphs() {
    assert_eq!(degeneracy(&SimpleGraph::complete(7)).0, 6);
    assert_eq!(degeneracy(&SimpleGraph::path(9)).0, 1);
    assert_eq!(degeneracy(&SimpleGraph::grid(5, 5)).0, 2);
    assert_eq!(degeneracy(&SimpleGraph::new(3)).0, 0);
}

#[test]
fn components_match_petgraph() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..50 {
        let g = random_graph(&mut rng, 40, 0.04);
        let comps = components(&g, None);
        assert_eq!(comps.len(), petgraph_components(&g));
        assert_eq!(comps.iter().map(Vec::len).sum::<usize>(), 40);
    }
}

#[test]
fn grid_decomposition_meets_bounds() {
    let eta = 0.1;
    let i = rounds_for(eta);
    assert_eq!(i, 7);
    for k in 2..=40usize {
        let g = SimpleGraph::grid(k, k);
        let d = recursive_decompose(&g, &GridCut { width: k }, i).unwrap();
        d.certify(&g).unwrap();
        assert!(d.max_part() as f64 <= eta * (k * k) as f64, "k = {k}: part {}", d.max_part());
        assert!(d.separator.len() <= (1 << i) * k, "k = {k}: |T| = {}", d.separator.len());
        let mut keep = vec![true; g.n()];
        for &v in &d.separator {
            keep[v] = false;
        }
        let biggest = components(&g, Some(&keep)).iter().map(Vec::len).max().unwrap_or(0);
        assert!(biggest <= d.max_part());
        assert!(validate_separator(&g, &d.separator, d.separator.len(), eta));
    }
}

#[test]
fn tree_decomposition_meets_bounds() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..30 {
        let n = rng.gen_range(10..400);
        let g = random_tree(&mut rng, n);
        let d = recursive_decompose(&g, &TreeCentroid, 6).unwrap();
        d.certify(&g).unwrap();
        assert!(d.t0 <= 1);
    }
}

#[test]
fn bfs_layers_on_grids_are_sound() {
    for k in [5usize, 12, 20] {
        let g = SimpleGraph::grid(k, k);
        let s = split_part(&g, &(0..g.n()).collect::<Vec<_>>(), &BfsLayer);
        let total = s.separator.len() + s.sides[0].len() + s.sides[1].len();
        assert_eq!(total, g.n());
        for &u in &s.sides[0] {
            assert!(g.neighbors(u).iter().all(|w| !s.sides[1].contains(w)));
        }
    }
}

#[test]
fn rounds_for_values() {
    assert_eq!(rounds_for(0.5), 2);
    assert_eq!(rounds_for(0.25), 4);
    assert_eq!(rounds_for(1.0), 0);
}

#[test]
fn parse_rejects_bad_input() {
    assert!(SimpleGraph::parse("3 1\n0 3\n").is_err());
    assert!(SimpleGraph::parse("3 1\n1 1\n").is_err());
    assert!(SimpleGraph::parse("x").is_err());
    let g = SimpleGraph::parse("# path\n3 2\n0 1\n1 2\n").unwrap();
    assert_eq!(g, SimpleGraph::path(3));
}

proptest! {
    #[test]
    fn text_round_trip(seed in any::<u64>(), n in 1usize..30, p in 0.0f64..1.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_graph(&mut rng, n, p);
        prop_assert_eq!(SimpleGraph::parse(&g.to_text()).unwrap(), g);
    }

    #[test]
    fn split_sides_are_separated(seed in any::<u64>(), n in 2usize..60) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_tree(&mut rng, n);
        let all: Vec<usize> = (0..n).collect();
        let s = split_part(&g, &all, &TreeCentroid);
        for &u in &s.sides[0] {
            prop_assert!(g.neighbors(u).iter().all(|w| !s.sides[1].contains(w)));
        }
        prop_assert!(s.sides.iter().all(|side| 3 * side.len() <= 2 * n));
    }
}

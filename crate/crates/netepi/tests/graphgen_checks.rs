mod common;

use netepi::graphgen::{
    config_model, empirical_degree_distribution, erdos_renyi, generate, sbm, simplify, Family, GeneratorSpec,
};
use netepi::measures::DegreeDistribution;
use netepi::netstat::components;
use netepi::rng::{child_seed, seeded};
use proptest::prelude::*;

#[test]
fn er_with_p_one_is_complete() {
    let g = erdos_renyi(50, 1.0, &mut seeded(3)).unwrap();
    assert_eq!(g.edge_count(), 1225);
    assert!(g.is_simple());
    assert_eq!(erdos_renyi(50, 0.0, &mut seeded(3)).unwrap().edge_count(), 0);
}

#[test]
fn er_degree_law_is_close_to_poisson() {
    let n = 10_000;
    let poisson = DegreeDistribution::poisson(5.0).unwrap();
    let tvs: Vec<f64> = (0..20)
        .map(|s| {
            let g = erdos_renyi(n, 5.0 / n as f64, &mut seeded(child_seed(11, s))).unwrap();
            empirical_degree_distribution(&g).total_variation(&poisson)
        })
        .collect();
    assert!(common::mean(&tvs) < 0.02, "mean TV {}", common::mean(&tvs));
}

#[test]
fn two_regular_cm_over_many_seeds() {
    for s in 0..100 {
        let g = config_model(&[2; 10], &mut seeded(s)).unwrap();
        assert!(g.degrees().iter().all(|&d| d == 2));
        // Every component of a 2-regular multigraph is a cycle: edges = vertices.
        for set in components(&g).sets {
            let inside = g.edges().filter(|(u, _)| set.binary_search(u).is_ok()).count();
            assert_eq!(inside, set.len());
        }
    }
}

#[test]
fn simplify_removes_few_edges_from_sparse_cm() {
    let p = DegreeDistribution::poisson(5.0).unwrap();
    let mut lost = Vec::new();
    for s in 0..5 {
        let spec = GeneratorSpec { n: 10_000, family: Family::ConfigDistribution { dist: p.clone() }, seed: s };
        let g = generate(&spec).unwrap();
        let h = simplify(&g);
        lost.push(1.0 - h.edge_count() as f64 / g.edge_count() as f64);
    }
    assert!(common::mean(&lost) < 0.01);
}

#[test]
fn one_type_sbm_matches_er_edge_count() {
    let (n, p) = (60, 0.1);
    let counts: Vec<f64> =
        (0..200).map(|s| sbm(n, &[1.0], &[vec![p]], &mut seeded(s)).unwrap().edge_count() as f64).collect();
    let expected = (n * (n - 1)) as f64 / 2.0 * p;
    assert!((common::mean(&counts) - expected).abs() < 3.0 * common::std_err(&counts));
}

#[test]
fn bipartite_sbm_has_only_cross_edges() {
    let g = sbm(40, &[0.5, 0.5], &[vec![0.0, 0.3], vec![0.3, 0.0]], &mut seeded(2)).unwrap();
    let t = g.types.as_ref().unwrap();
    assert!(g.edge_count() > 0);
    assert!(g.edges().all(|(u, v)| t[u] != t[v]));
}

#[test]
fn supercritical_er_has_a_large_component() {
    let fractions: Vec<f64> = (0..10)
        .map(|s| {
            let g = erdos_renyi(1000, 2.0 / 1000.0, &mut seeded(s)).unwrap();
            components(&g).sets[0].len() as f64 / 1000.0
        })
        .collect();
    assert!(common::mean(&fractions) > 0.5);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cm_preserves_even_degree_sequences(mut d in prop::collection::vec(0usize..8, 1..60), seed in any::<u64>()) {
        if d.iter().sum::<usize>() % 2 == 1 {
            d[0] += 1;
        }
        let g = config_model(&d, &mut seeded(seed)).unwrap();
        prop_assert_eq!(g.degrees(), d);
    }

    #[test]
    fn same_seed_same_graph(seed in any::<u64>(), p in 0.0f64..0.3) {
        let spec = GeneratorSpec { n: 80, family: Family::ErdosRenyi { p }, seed };
        prop_assert_eq!(generate(&spec).unwrap().canonical_edges(), generate(&spec).unwrap().canonical_edges());
    }
}

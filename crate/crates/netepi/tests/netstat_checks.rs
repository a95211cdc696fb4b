use approx::assert_abs_diff_eq;
use netepi::graphgen::{complete, erdos_renyi, sbm, Graph};
use netepi::measures::{DegreeDistribution, DegreeMeasure};
use netepi::netstat::{
    adjusted_rand_index, chi2_homogeneity, cluster_modularity, coarsen, components, fit_power_law_kl, geodesic_stats,
    hill_plateau, layout, local_structure, modularity, null_modularity, refine_hierarchically, rewire, Partition,
};
use netepi::rng::{child_seed, seeded};
use proptest::prelude::*;

fn planted(n: usize, blocks: usize, p_in: f64, p_out: f64, seed: u64) -> Graph {
    let rho = vec![1.0 / blocks as f64; blocks];
    let pi: Vec<Vec<f64>> =
        (0..blocks).map(|i| (0..blocks).map(|j| if i == j { p_in } else { p_out }).collect()).collect();
    sbm(n, &rho, &pi, &mut seeded(seed)).unwrap()
}

fn type_partition(g: &Graph) -> Partition {
    Partition::from_labels(&g.types.as_ref().unwrap().iter().map(|&t| t as usize).collect::<Vec<_>>())
}

fn clusters_are_connected(g: &Graph, p: &Partition) -> bool {
    p.clusters().iter().all(|c| components(&g.induced_subgraph(c)).sets.len() == 1)
}

#[test]
fn planted_blocks_recovered() {
    let mut aris = Vec::new();
    for s in 0..20 {
        let g = planted(400, 4, 0.2, 0.01, child_seed(40, s));
        let truth = type_partition(&g);
        let found = cluster_modularity(&g, s);
        let (qf, qt) = (modularity(&g, &found).unwrap(), modularity(&g, &truth).unwrap());
        assert!(qf >= qt - 0.02, "seed {s}: found {qf}, planted {qt}");
        assert!(clusters_are_connected(&g, &found));
        aris.push(adjusted_rand_index(&found.labels, &truth.labels).unwrap());
    }
    let mean = aris.iter().sum::<f64>() / aris.len() as f64;
    assert!(mean > 0.9, "{aris:?}");
}

#[test]
fn clustering_is_deterministic_and_nonnegative() {
    for s in 0..10 {
        let g = erdos_renyi(150, 0.03, &mut seeded(s)).unwrap();
        let a = cluster_modularity(&g, 7);
        assert_eq!(a, cluster_modularity(&g, 7));
        assert!(modularity(&g, &a).unwrap() >= 0.0);
        assert!(clusters_are_connected(&g, &a));
    }
}

#[test]
fn planted_structure_beats_the_null() {
    let g = planted(160, 4, 0.25, 0.01, 3);
    let q = modularity(&g, &cluster_modularity(&g, 1)).unwrap();
    let null = null_modularity(&g, 20, 9).unwrap();
    assert!(q > null.max, "observed {q}, null max {}", null.max);
    assert!(!null.short_burn_in);
    assert_eq!(null.q.len(), 20);
    assert_eq!(null, null_modularity(&g, 20, 9).unwrap());
}

#[test]
fn null_needs_two_edges() {
    let g = Graph::new(3, vec![(0, 1)]).unwrap();
    assert!(null_modularity(&g, 5, 1).is_err());
}

fn nested() -> (Graph, Vec<usize>) {
    // Sub-blocks 0..4 of 40 vertices; sub-blocks {0,1} and {2,3} form the super-blocks.
    let (n, size) = (160, 40);
    let mut rng = seeded(5);
    let mut edges = Vec::new();
    use rand::Rng;
    for u in 0..n {
        for v in u + 1..n {
            let (a, b) = (u / size, v / size);
            let p = if a == b {
                0.5
            } else if a / 2 == b / 2 {
                0.08
            } else {
                0.004
            };
            if rng.random::<f64>() < p {
                edges.push((u, v));
            }
        }
    }
    (Graph::new(n, edges).unwrap(), (0..n).map(|u| u / size).collect())
}

#[test]
fn nested_blocks_give_four_leaves() {
    let (g, sub) = nested();
    let top = Partition::from_labels(&(0..160).map(|u| sub[u] / 2).collect::<Vec<_>>());
    let tree = refine_hierarchically(&g, &top, 2, 3, 19).unwrap();
    let leaves: Vec<Vec<usize>> = tree.iter().flat_map(|n| n.leaves()).map(|l| l.vertices.clone()).collect();
    assert_eq!(leaves.len(), 4, "{leaves:?}");
    let mut labels = vec![0; 160];
    for (i, leaf) in leaves.iter().enumerate() {
        for &v in leaf {
            labels[v] = i;
        }
    }
    assert_eq!(adjusted_rand_index(&labels, &sub).unwrap(), 1.0);
}

#[test]
fn cliques_and_singletons_have_no_substructure() {
    let g = complete(12).unwrap();
    let tree = refine_hierarchically(&g, &Partition::single(12), 4, 3, 19).unwrap();
    assert_eq!(tree.len(), 1);
    assert!(!tree[0].significant && tree[0].children.is_empty());
    let g = Graph::new(3, vec![(0, 1)]).unwrap();
    let tree = refine_hierarchically(&g, &Partition::singletons(3), 4, 3, 19).unwrap();
    assert!(tree.iter().all(|c| c.null_max.is_nan() && c.children.is_empty()));
}

#[test]
fn coarsening_planted_blocks_keeps_most_of_them() {
    let g = planted(320, 8, 0.3, 0.005, 6);
    let p = cluster_modularity(&g, 2);
    let q = modularity(&g, &p).unwrap();
    let c = coarsen(&g, &p, 0.9 * q).unwrap();
    assert!(c.partition.count >= 4, "{} clusters", c.partition.count);
    assert!(c.q >= 0.9 * q - 1e-12);
}

#[test]
fn layout_separates_two_cliques() {
    let mut edges = Vec::new();
    for base in [0, 5] {
        for i in 0..5 {
            for j in i + 1..5 {
                edges.push((base + i, base + j));
            }
        }
    }
    edges.push((4, 5));
    let g = Graph::new(10, edges).unwrap();
    for s in 0..10 {
        let l = layout(&g, 1.0, s, 2000).unwrap();
        let d = |u: usize, v: usize| {
            let (a, b) = (l.positions[u], l.positions[v]);
            (a[0] - b[0]).hypot(a[1] - b[1])
        };
        let (mut intra, mut inter) = (Vec::new(), Vec::new());
        for u in 0..10 {
            for v in u + 1..10 {
                if (u < 5) == (v < 5) {
                    intra.push(d(u, v))
                } else {
                    inter.push(d(u, v))
                }
            }
        }
        let mean = |x: &[f64]| x.iter().sum::<f64>() / x.len() as f64;
        assert!(mean(&intra) < mean(&inter), "seed {s}");
        assert!(l.energy.windows(2).all(|w| w[1] <= w[0]));
    }
}

#[test]
fn layout_of_empty_graph_only_spreads_out() {
    let g = Graph::new(8, vec![]).unwrap();
    let min_gap = |pos: &[[f64; 2]]| {
        let mut m = f64::INFINITY;
        for i in 0..pos.len() {
            for j in i + 1..pos.len() {
                m = m.min((pos[i][0] - pos[j][0]).hypot(pos[i][1] - pos[j][1]));
            }
        }
        m
    };
    let start = layout(&g, 1.0, 4, 0).unwrap();
    let end = layout(&g, 1.0, 4, 200).unwrap();
    assert!(end.energy.windows(2).all(|w| w[1] <= w[0]));
    assert!(min_gap(&end.positions) >= min_gap(&start.positions));
}

#[test]
fn kl_fit_on_exact_power_law() {
    let p = DegreeDistribution::power_law(3.0, 1, None).unwrap();
    let f = fit_power_law_kl(&p, 1).unwrap();
    assert!((2.97..=3.03).contains(&f.alpha), "{f:?}");
    assert!(f.divergence >= 0.0 && f.divergence < 1e-8, "{f:?}");
}

#[test]
fn tail_estimators_agree_on_a_power_law_sample() {
    let p = DegreeDistribution::power_law(3.0, 1, None).unwrap();
    let s = p.sampler();
    let mut rng = seeded(2024);
    let degrees: Vec<usize> = (0..10_000).map(|_| s.sample(&mut rng)).collect();
    let emp = DegreeDistribution::normalized(DegreeMeasure::census(degrees.iter().copied())).unwrap();
    let kl = fit_power_law_kl(&emp, 1).unwrap().alpha;
    let hill = hill_plateau(&degrees, 100, 5).unwrap().alpha;
    assert!((2.7..=3.3).contains(&kl), "KL {kl}");
    assert!((2.7..=3.3).contains(&hill), "Hill {hill}");
    assert!((kl - hill).abs() <= 0.3);
}

#[test]
fn chi2_matches_reference() {
    let c = chi2_homogeneity(&[vec![10.0, 20.0, 30.0], vec![25.0, 15.0, 5.0]]).unwrap();
    assert_abs_diff_eq!(c.statistic, 23.333333333333336, epsilon = 1e-10);
    assert_eq!(c.dof, 2);
    assert_abs_diff_eq!(c.p_value, 8.57493910267228e-06, epsilon = 1e-12);
}

fn small_graph() -> impl Strategy<Value = Graph> {
    (2usize..14, prop::collection::vec((0usize..14, 0usize..14), 0..40)).prop_map(|(n, e)| {
        let mut edges: Vec<(usize, usize)> = e
            .into_iter()
            .map(|(u, v)| (u % n, v % n))
            .filter(|(u, v)| u != v)
            .map(|(u, v)| (u.min(v), u.max(v)))
            .collect();
        edges.sort_unstable();
        edges.dedup();
        Graph::new(n, edges).unwrap()
    })
}

/// All-pairs distances by Floyd–Warshall.
fn distances(g: &Graph) -> Vec<Vec<f64>> {
    let n = g.vertex_count();
    let mut d = vec![vec![f64::INFINITY; n]; n];
    for (u, row) in d.iter_mut().enumerate() {
        row[u] = 0.0;
    }
    for (u, v) in g.edges() {
        d[u][v] = 1.0;
        d[v][u] = 1.0;
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if d[i][k] + d[k][j] < d[i][j] {
                    d[i][j] = d[i][k] + d[k][j];
                }
            }
        }
    }
    d
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn geodesics_match_direct_summation(g in small_graph()) {
        let n = g.vertex_count();
        let d = distances(&g);
        let off: Vec<f64> = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| d[i][j]).collect();
        let inv: f64 = off.iter().map(|x| 1.0 / x).sum();
        let s = geodesic_stats(&g);
        if inv > 0.0 {
            prop_assert!((s.harmonic_mean - off.len() as f64 / inv).abs() < 1e-9 * s.harmonic_mean);
        }
        let finite: Vec<f64> = off.iter().copied().filter(|x| x.is_finite()).collect();
        prop_assert_eq!(s.diameter as f64, finite.iter().cloned().fold(0.0, f64::max));
        if finite.len() == off.len() {
            let direct = finite.iter().sum::<f64>() / (n * (n + 1)) as f64;
            prop_assert!((s.normalized_sum.unwrap() - direct).abs() < 1e-12);
        } else {
            prop_assert!(s.normalized_sum.is_none());
        }
    }

    #[test]
    fn local_structure_matches_brute_force(g in small_graph()) {
        let n = g.vertex_count();
        let mut adj = vec![vec![false; n]; n];
        for (u, v) in g.edges() {
            adj[u][v] = true;
            adj[v][u] = true;
        }
        let mut tri = 0;
        for a in 0..n { for b in a + 1..n { for c in b + 1..n {
            if adj[a][b] && adj[b][c] && adj[a][c] { tri += 1; }
        }}}
        let l = local_structure(&g).unwrap();
        prop_assert_eq!(l.triangles, tri);
        let base = components(&g).sets.len();
        let cut: Vec<usize> = (0..n).filter(|&x| {
            let rest: Vec<usize> = (0..n).filter(|&y| y != x).collect();
            rest.is_empty() || components(&g.induced_subgraph(&rest)).sets.len() > base - usize::from(g.degrees()[x] == 0)
        }).collect();
        prop_assert_eq!(l.articulation_points, cut);
    }

    #[test]
    fn modularity_ignores_labels(g in small_graph(), raw in prop::collection::vec(0usize..5, 14), shift in 1usize..100) {
        prop_assume!(g.edge_count() > 0);
        let n = g.vertex_count();
        let a = Partition::from_labels(&raw[..n]);
        let b = Partition::from_labels(&raw[..n].iter().map(|x| (x + shift) * 7).collect::<Vec<_>>());
        prop_assert_eq!(modularity(&g, &a).unwrap(), modularity(&g, &b).unwrap());
        prop_assert_eq!(modularity(&g, &Partition::single(n)).unwrap(), 0.0);
    }

    #[test]
    fn rewiring_keeps_every_degree(g in small_graph(), seed in any::<u64>()) {
        prop_assume!(g.edge_count() >= 2);
        let (h, _) = rewire(&g, 10 * g.edge_count(), seed);
        prop_assert_eq!(g.degrees(), h.degrees());
        prop_assert!(h.is_simple());
    }
}

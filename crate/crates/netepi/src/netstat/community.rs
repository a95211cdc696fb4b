use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{domain, invalid, Result};
use crate::graphgen::Graph;
use crate::rng::{child_seed, seeded, SimRng};

/// Cluster label per vertex, labels `0..count`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    pub labels: Vec<usize>,
    pub count: usize,
}

impl Partition {
    /// Relabels arbitrary labels to `0..J` in order of first appearance.
    pub fn from_labels(raw: &[usize]) -> Self {
        let mut map = std::collections::HashMap::new();
        let labels = raw
            .iter()
            .map(|&l| {
                let next = map.len();
                *map.entry(l).or_insert(next)
            })
            .collect();
        Partition { labels, count: map.len() }
    }

    pub fn single(n: usize) -> Self {
        Partition { labels: vec![0; n], count: usize::from(n > 0) }
    }

    pub fn singletons(n: usize) -> Self {
        Partition { labels: (0..n).collect(), count: n }
    }

    pub fn clusters(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.count];
        for (v, &c) in self.labels.iter().enumerate() {
            out[c].push(v);
        }
        out
    }

    fn check(&self, g: &Graph) -> Result<()> {
        if self.labels.len() != g.vertex_count() {
            return invalid("partition does not cover the vertex set");
        }
        if self.count == 0 {
            return invalid("partition has no cluster");
        }
        if self.labels.iter().any(|&c| c >= self.count) {
            return invalid("cluster label out of range");
        }
        Ok(())
    }
}

/// Edge fractions between clusters.
#[derive(Debug, Clone, PartialEq)]
pub struct MixingMatrix {
    /// Symmetric; within-cluster edges on the diagonal, each cross edge split
    /// as `w/2` on both sides.
    pub m: Vec<Vec<f64>>,
    /// `Tr M − ‖M²‖`.
    pub q: f64,
    /// `Σ_i a_i²` with `a_i` the row sums.
    pub m2_norm: f64,
    /// `Q / (1 − ‖M²‖)`; `None` when `‖M²‖ = 1`.
    pub r: Option<f64>,
}

pub fn mixing(g: &Graph, p: &Partition) -> Result<MixingMatrix> {
    p.check(g)?;
    if g.edge_count() == 0 {
        return domain("mixing undefined on a graph without edges");
    }
    let j = p.count;
    // Half-edge counts, divided once at the end.
    let mut half = vec![vec![0u64; j]; j];
    for (u, v) in g.edges() {
        let (a, b) = (p.labels[u], p.labels[v]);
        half[a][b] += 1;
        half[b][a] += 1;
    }
    let two_m = 2.0 * g.edge_count() as f64;
    let m: Vec<Vec<f64>> = half.iter().map(|row| row.iter().map(|&x| x as f64 / two_m).collect()).collect();
    let tr: f64 = (0..j).map(|i| m[i][i]).sum();
    let m2_norm: f64 = m.iter().map(|row| row.iter().sum::<f64>().powi(2)).sum();
    let q = tr - m2_norm;
    let r = (m2_norm < 1.0 - 1e-15).then(|| q / (1.0 - m2_norm));
    Ok(MixingMatrix { m, q, m2_norm, r })
}

/// Modularity of `p` on `g`.
pub fn modularity(g: &Graph, p: &Partition) -> Result<f64> {
    Ok(mixing(g, p)?.q)
}

/// Weighted graph on clusters of a finer level.
#[derive(Debug, Clone)]
struct Level {
    /// Sorted neighbour lists with edge counts, self excluded.
    adj: Vec<Vec<(usize, f64)>>,
    /// Sum of degrees of the members.
    deg: Vec<f64>,
}

impl Level {
    fn from_graph(g: &Graph) -> Self {
        let n = g.vertex_count();
        let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        let mut deg = vec![0.0; n];
        for (u, v) in g.edges() {
            deg[u] += 1.0;
            deg[v] += 1.0;
            if u != v {
                adj[u].push((v, 1.0));
                adj[v].push((u, 1.0));
            }
        }
        for list in &mut adj {
            merge_sorted(list);
        }
        Level { adj, deg }
    }

    fn len(&self) -> usize {
        self.deg.len()
    }

    /// Contracts by `map` (node → coarse node, `0..k`).
    fn contract(&self, map: &[usize], k: usize) -> Level {
        let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); k];
        let mut deg = vec![0.0; k];
        for u in 0..self.len() {
            deg[map[u]] += self.deg[u];
            for &(v, w) in &self.adj[u] {
                if map[u] != map[v] {
                    adj[map[u]].push((map[v], w));
                }
            }
        }
        for list in &mut adj {
            merge_sorted(list);
        }
        Level { adj, deg }
    }
}

fn merge_sorted(list: &mut Vec<(usize, f64)>) {
    list.sort_by_key(|e| e.0);
    let mut out: Vec<(usize, f64)> = Vec::with_capacity(list.len());
    for &(v, w) in list.iter() {
        match out.last_mut() {
            Some(last) if last.0 == v => last.1 += w,
            _ => out.push((v, w)),
        }
    }
    *list = out;
}

/// Maximum-modularity clustering with connected clusters.
///
/// Multi-level: adjacent pairs with positive modularity gain are merged in
/// rounds (largest gain first, ties by lowest ids) until no gain remains;
/// then, from the coarsest level down, single nodes move to the neighbouring
/// cluster (or a fresh one) with the best positive gain, visiting nodes in a
/// seeded order. Finally disconnected clusters are split into their
/// components, which never lowers the modularity, and refinement repeats
/// until nothing changes.
pub fn cluster_modularity(g: &Graph, seed: u64) -> Partition {
    let n = g.vertex_count();
    let m = g.edge_count() as f64;
    if n == 0 {
        return Partition::single(0);
    }
    if m == 0.0 {
        return Partition::singletons(n);
    }
    let mut rng = seeded(seed);
    let mut levels = vec![Level::from_graph(g)];
    let mut maps: Vec<Vec<usize>> = Vec::new();
    loop {
        let lvl = levels.last().expect("non-empty");
        let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
        for a in 0..lvl.len() {
            for &(b, w) in &lvl.adj[a] {
                if a < b {
                    let gain = w / m - lvl.deg[a] * lvl.deg[b] / (2.0 * m * m);
                    if gain > 0.0 {
                        pairs.push((gain, a, b));
                    }
                }
            }
        }
        if pairs.is_empty() {
            break;
        }
        pairs.sort_by(|x, y| y.0.total_cmp(&x.0).then((x.1, x.2).cmp(&(y.1, y.2))));
        let mut map = vec![usize::MAX; lvl.len()];
        let mut k = 0;
        for &(_, a, b) in &pairs {
            if map[a] == usize::MAX && map[b] == usize::MAX {
                map[a] = k;
                map[b] = k;
                k += 1;
            }
        }
        for x in map.iter_mut() {
            if *x == usize::MAX {
                *x = k;
                k += 1;
            }
        }
        let next = lvl.contract(&map, k);
        maps.push(map);
        levels.push(next);
    }
    // Each coarsest node is a cluster; refine while projecting down.
    let mut labels: Vec<usize> = (0..levels.last().expect("non-empty").len()).collect();
    for depth in (0..levels.len()).rev() {
        if depth + 1 < levels.len() {
            let map = &maps[depth];
            labels = map.iter().map(|&c| labels[c]).collect();
        }
        refine(&levels[depth], &mut labels, m, &mut rng);
    }
    let base = &levels[0];
    for _ in 0..100 {
        let before = labels.clone();
        split_disconnected(base, &mut labels);
        refine(base, &mut labels, m, &mut rng);
        split_disconnected(base, &mut labels);
        if labels == before {
            break;
        }
    }
    Partition::from_labels(&labels)
}

/// Best-gain single-node moves until a full pass changes nothing.
fn refine(lvl: &Level, labels: &mut [usize], m: f64, rng: &mut SimRng) {
    let n = lvl.len();
    let mut k = labels.iter().max().map_or(0, |&x| x + 1);
    let mut tot = vec![0.0; k + n];
    for u in 0..n {
        tot[labels[u]] += lvl.deg[u];
    }
    let mut size = vec![0usize; k + n];
    for &c in labels.iter() {
        size[c] += 1;
    }
    let mut free: Vec<usize> = (0..k).filter(|&c| size[c] == 0).collect();
    let mut order: Vec<usize> = (0..n).collect();
    let mut w_to: Vec<f64> = vec![0.0; k + n];
    let mut touched: Vec<usize> = Vec::new();
    let two_m2 = 2.0 * m * m;
    for _ in 0..1000 {
        order.shuffle(rng);
        let mut moved = false;
        for &u in &order {
            let a = labels[u];
            let du = lvl.deg[u];
            for &(v, w) in &lvl.adj[u] {
                let c = labels[v];
                if w_to[c] == 0.0 {
                    touched.push(c);
                }
                w_to[c] += w;
            }
            // Gain of moving u from a to c, relative to isolating it.
            let leave = w_to[a] / m - du * (tot[a] - du) / two_m2;
            let mut best = (0.0, usize::MAX);
            for &c in &touched {
                if c == a {
                    continue;
                }
                let join = w_to[c] / m - du * tot[c] / two_m2;
                let gain = join - leave;
                if gain > best.0 + 1e-15 || (gain > best.0 - 1e-15 && gain > 1e-15 && c < best.1) {
                    best = (gain, c);
                }
            }
            if size[a] > 1 && -leave > best.0 + 1e-15 {
                let c = free.pop().unwrap_or_else(|| {
                    k += 1;
                    k - 1
                });
                best = (-leave, c);
            }
            for &c in &touched {
                w_to[c] = 0.0;
            }
            touched.clear();
            if best.1 != usize::MAX && best.0 > 1e-15 {
                let c = best.1;
                tot[a] -= du;
                tot[c] += du;
                size[a] -= 1;
                size[c] += 1;
                if size[a] == 0 {
                    free.push(a);
                }
                labels[u] = c;
                moved = true;
            }
        }
        if !moved {
            break;
        }
    }
}

fn split_disconnected(lvl: &Level, labels: &mut [usize]) {
    let n = lvl.len();
    let mut out = vec![usize::MAX; n];
    let mut k = 0;
    for s in 0..n {
        if out[s] != usize::MAX {
            continue;
        }
        out[s] = k;
        let mut stack = vec![s];
        while let Some(u) = stack.pop() {
            for &(v, _) in &lvl.adj[u] {
                if out[v] == usize::MAX && labels[v] == labels[s] {
                    out[v] = k;
                    stack.push(v);
                }
            }
        }
        k += 1;
    }
    let remap = Partition::from_labels(&out);
    labels.copy_from_slice(&remap.labels);
}

/// Maximal modularities of degree-preserving rewirings of `g`.
#[derive(Debug, Clone, PartialEq)]
pub struct NullSample {
    pub q: Vec<f64>,
    pub max: f64,
    pub mean: f64,
    /// Accepted swaps per sample.
    pub swaps: usize,
    /// Some chain hit the attempt cap before reaching `swaps` accepted swaps.
    pub short_burn_in: bool,
}

/// `n_samples` rewirings, each with `20|E|` accepted double-edge swaps that
/// keep the graph simple, then clustered. Samples run in parallel.
pub fn null_modularity(g: &Graph, n_samples: usize, seed: u64) -> Result<NullSample> {
    if n_samples == 0 {
        return invalid("need at least one null sample");
    }
    if g.edge_count() < 2 {
        return invalid("rewiring needs at least two edges");
    }
    if !g.is_simple() {
        return invalid("rewiring needs a simple graph");
    }
    let swaps = 20 * g.edge_count();
    let runs: Vec<(f64, bool)> = (0..n_samples)
        .into_par_iter()
        .map(|i| {
            let s = child_seed(seed, i as u64);
            let (h, short) = rewire(g, swaps, s);
            let p = cluster_modularity(&h, child_seed(s, 1));
            (modularity(&h, &p).unwrap_or(0.0), short)
        })
        .collect();
    let q: Vec<f64> = runs.iter().map(|r| r.0).collect();
    let max = q.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mean = q.iter().sum::<f64>() / q.len() as f64;
    Ok(NullSample { q, max, mean, swaps, short_burn_in: runs.iter().any(|r| r.1) })
}

/// Double-edge swaps `(a,b),(c,d) → (a,d),(c,b)` rejecting loops and
/// multi-edges. Returns the graph and whether the attempt cap was hit.
pub fn rewire(g: &Graph, accepted: usize, seed: u64) -> (Graph, bool) {
    let mut rng = seeded(seed);
    let mut edges: Vec<(usize, usize)> = g.edges().collect();
    let key = |u: usize, v: usize| if u < v { (u, v) } else { (v, u) };
    let mut set: HashSet<(usize, usize)> = edges.iter().map(|&(u, v)| key(u, v)).collect();
    let cap = 1000 * accepted.max(1);
    let (mut done, mut tries) = (0, 0);
    while done < accepted && tries < cap {
        tries += 1;
        let i = rng.random_range(0..edges.len());
        let j = rng.random_range(0..edges.len());
        if i == j {
            continue;
        }
        let (a, b) = edges[i];
        let (c, d) = if rng.random::<bool>() { edges[j] } else { (edges[j].1, edges[j].0) };
        if a == d || c == b || set.contains(&key(a, d)) || set.contains(&key(c, b)) {
            continue;
        }
        set.remove(&key(a, b));
        set.remove(&key(c, d));
        set.insert(key(a, d));
        set.insert(key(c, b));
        edges[i] = (a, d);
        edges[j] = (c, b);
        done += 1;
    }
    (g.with_edges(edges).expect("same vertex set"), done < accepted)
}

/// One cluster of a hierarchical refinement.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterNode {
    pub vertices: Vec<usize>,
    /// Modularity of the best clustering of the induced subgraph.
    pub q_sub: f64,
    /// Largest null modularity of the induced subgraph (`NaN` when skipped).
    pub null_max: f64,
    pub significant: bool,
    pub children: Vec<ClusterNode>,
}

impl ClusterNode {
    pub fn leaves(&self) -> Vec<&ClusterNode> {
        if self.children.is_empty() {
            vec![self]
        } else {
            self.children.iter().flat_map(|c| c.leaves()).collect()
        }
    }
}

/// Re-clusters each cluster's induced subgraph and keeps the sub-structure
/// only when its modularity beats every null sample. Singletons and clusters
/// too small to rewire are leaves.
pub fn refine_hierarchically(
    g: &Graph,
    p: &Partition,
    seed: u64,
    depth: usize,
    n_null: usize,
) -> Result<Vec<ClusterNode>> {
    p.check(g)?;
    Ok(p.clusters()
        .into_iter()
        .enumerate()
        .map(|(i, vs)| refine_cluster(g, vs, child_seed(seed, i as u64), depth, n_null))
        .collect())
}

fn refine_cluster(g: &Graph, vertices: Vec<usize>, seed: u64, depth: usize, n_null: usize) -> ClusterNode {
    let leaf = |vertices: Vec<usize>, q_sub, null_max| ClusterNode {
        vertices,
        q_sub,
        null_max,
        significant: false,
        children: vec![],
    };
    if depth == 0 || vertices.len() < 3 {
        return leaf(vertices, 0.0, f64::NAN);
    }
    let sub = g.induced_subgraph(&vertices);
    if sub.edge_count() < 2 || !sub.is_simple() {
        return leaf(vertices, 0.0, f64::NAN);
    }
    let part = cluster_modularity(&sub, seed);
    let q_sub = modularity(&sub, &part).unwrap_or(0.0);
    let null = match null_modularity(&sub, n_null, child_seed(seed, 7)) {
        Ok(s) => s.max,
        Err(_) => return leaf(vertices, q_sub, f64::NAN),
    };
    if part.count < 2 || q_sub <= null {
        return leaf(vertices, q_sub, null);
    }
    let children = part
        .clusters()
        .into_iter()
        .enumerate()
        .map(|(i, local)| {
            let vs = local.into_iter().map(|x| vertices[x]).collect();
            refine_cluster(g, vs, child_seed(seed, 100 + i as u64), depth - 1, n_null)
        })
        .collect();
    ClusterNode { vertices, q_sub, null_max: null, significant: true, children }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Coarsened {
    pub partition: Partition,
    pub q: f64,
    /// The floor exceeded the starting modularity; no merge was made.
    pub floor_above_start: bool,
}

/// Merges adjacent clusters, cheapest modularity loss first, while the
/// modularity stays at or above `floor`.
pub fn coarsen(g: &Graph, p: &Partition, floor: f64) -> Result<Coarsened> {
    let start = modularity(g, p)?;
    if floor > start {
        return Ok(Coarsened { partition: p.clone(), q: start, floor_above_start: true });
    }
    let m = g.edge_count() as f64;
    let mut labels = p.labels.clone();
    let mut q = start;
    loop {
        let k = labels.iter().max().map_or(0, |&x| x + 1);
        let mut deg = vec![0.0; k];
        let mut between = std::collections::BTreeMap::new();
        for (u, v) in g.edges() {
            let (a, b) = (labels[u], labels[v]);
            deg[a] += 1.0;
            deg[b] += 1.0;
            if a != b {
                *between.entry((a.min(b), a.max(b))).or_insert(0.0) += 1.0;
            }
        }
        let best = between
            .iter()
            .map(|(&(a, b), &w)| (w / m - deg[a] * deg[b] / (2.0 * m * m), a, b))
            .max_by(|x, y| x.0.total_cmp(&y.0).then((y.1, y.2).cmp(&(x.1, x.2))));
        let Some((gain, a, b)) = best else { break };
        if q + gain < floor {
            break;
        }
        for l in labels.iter_mut() {
            if *l == b {
                *l = a;
            }
        }
        q += gain;
    }
    let partition = Partition::from_labels(&labels);
    let q = modularity(g, &partition)?;
    Ok(Coarsened { partition, q, floor_above_start: false })
}

/// Adjusted Rand index between two labelings of the same vertices.
pub fn adjusted_rand_index(a: &[usize], b: &[usize]) -> Result<f64> {
    if a.len() != b.len() {
        return invalid("labelings differ in length");
    }
    let pa = Partition::from_labels(a);
    let pb = Partition::from_labels(b);
    let mut table = vec![vec![0u64; pb.count]; pa.count];
    for (x, y) in pa.labels.iter().zip(&pb.labels) {
        table[*x][*y] += 1;
    }
    let c2 = |x: u64| (x * x.saturating_sub(1) / 2) as f64;
    let sum_ij: f64 = table.iter().flatten().map(|&x| c2(x)).sum();
    let sum_a: f64 = table.iter().map(|r| c2(r.iter().sum())).sum();
    let sum_b: f64 = (0..pb.count).map(|j| c2(table.iter().map(|r| r[j]).sum())).sum();
    let total = c2(a.len() as u64);
    let expected = sum_a * sum_b / total;
    let max = 0.5 * (sum_a + sum_b);
    if max == expected {
        return Ok(1.0);
    }
    Ok((sum_ij - expected) / (max - expected))
}

/// Pearson χ² test of homogeneity on a contingency table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiSquare {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// Rows or columns with zero total are ignored.
pub fn chi2_homogeneity(table: &[Vec<f64>]) -> Result<ChiSquare> {
    let cols = table.first().map_or(0, Vec::len);
    if table.iter().any(|r| r.len() != cols) {
        return invalid("ragged contingency table");
    }
    let rows: Vec<&Vec<f64>> = table.iter().filter(|r| r.iter().sum::<f64>() > 0.0).collect();
    let col_tot: Vec<f64> = (0..cols).map(|j| rows.iter().map(|r| r[j]).sum()).collect();
    let live: Vec<usize> = (0..cols).filter(|&j| col_tot[j] > 0.0).collect();
    if rows.len() < 2 || live.len() < 2 {
        return domain("need at least two nonempty rows and columns");
    }
    let total: f64 = col_tot.iter().sum();
    let mut stat = 0.0;
    for r in &rows {
        let rt: f64 = r.iter().sum();
        for &j in &live {
            let e = rt * col_tot[j] / total;
            stat += (r[j] - e).powi(2) / e;
        }
    }
    let dof = (rows.len() - 1) * (live.len() - 1);
    let p_value = ChiSquared::new(dof as f64).map(|d| d.sf(stat)).unwrap_or(f64::NAN);
    Ok(ChiSquare { statistic: stat, dof, p_value })
}

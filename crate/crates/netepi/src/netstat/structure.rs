use std::collections::VecDeque;

use crate::error::{invalid, Result};
use crate::graphgen::Graph;

/// Connected components, largest first.
#[derive(Debug, Clone, PartialEq)]
pub struct Components {
    /// Vertex sets sorted by decreasing size, ties by smallest vertex.
    pub sets: Vec<Vec<usize>>,
    /// The largest component is at least [`GIANT_RATIO`] times the second.
    pub giant: bool,
}

pub const GIANT_RATIO: usize = 10;

impl Components {
    pub fn sizes(&self) -> Vec<usize> {
        self.sets.iter().map(Vec::len).collect()
    }
}

pub fn components(g: &Graph) -> Components {
    let n = g.vertex_count();
    let adj = g.adjacency();
    let mut comp = vec![usize::MAX; n];
    let mut sets = Vec::new();
    for s in 0..n {
        if comp[s] != usize::MAX {
            continue;
        }
        let id = sets.len();
        let mut set = vec![s];
        comp[s] = id;
        let mut i = 0;
        while i < set.len() {
            let u = set[i];
            for &(v, _) in adj.neighbors(u) {
                if comp[v as usize] == usize::MAX {
                    comp[v as usize] = id;
                    set.push(v as usize);
                }
            }
            i += 1;
        }
        set.sort_unstable();
        sets.push(set);
    }
    sets.sort_by(|a, b| b.len().cmp(&a.len()).then(a[0].cmp(&b[0])));
    let giant = match sets.as_slice() {
        [only] => only.len() > 1,
        [a, b, ..] => a.len() >= GIANT_RATIO * b.len(),
        [] => false,
    };
    Components { sets, giant }
}

/// Distances over ordered pairs of distinct vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct GeodesicStats {
    /// `n(n−1) / Σ_{x≠y} 1/d(x,y)`; unreachable pairs add 0 to the sum.
    /// Infinite when no pair is connected.
    pub harmonic_mean: f64,
    /// Mean distance over connected ordered pairs.
    pub arithmetic_mean: f64,
    /// `Σ_{(x,y)} d(x,y) / (n(n+1))` for a connected graph, `None` otherwise.
    pub normalized_sum: Option<f64>,
    /// Longest finite distance.
    pub diameter: usize,
    pub connected_pairs: u64,
}

/// Breadth-first search from every vertex.
pub fn geodesic_stats(g: &Graph) -> GeodesicStats {
    let n = g.vertex_count();
    let adj = g.adjacency();
    let mut dist = vec![usize::MAX; n];
    let mut queue = VecDeque::new();
    let (mut inv_sum, mut sum, mut pairs, mut diameter) = (0.0f64, 0u64, 0u64, 0usize);
    for s in 0..n {
        dist.fill(usize::MAX);
        dist[s] = 0;
        queue.push_back(s);
        while let Some(u) = queue.pop_front() {
            for &(v, _) in adj.neighbors(u) {
                let v = v as usize;
                if dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                    inv_sum += 1.0 / dist[v] as f64;
                    sum += dist[v] as u64;
                    pairs += 1;
                    diameter = diameter.max(dist[v]);
                }
            }
        }
    }
    let all_pairs = (n as u64) * (n as u64).saturating_sub(1);
    GeodesicStats {
        harmonic_mean: if inv_sum > 0.0 { all_pairs as f64 / inv_sum } else { f64::INFINITY },
        arithmetic_mean: if pairs > 0 { sum as f64 / pairs as f64 } else { 0.0 },
        normalized_sum: (pairs == all_pairs).then(|| sum as f64 / (n as f64 * (n as f64 + 1.0))),
        diameter,
        connected_pairs: pairs,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalStructure {
    pub triangles: u64,
    /// Paths of length two (connected triples).
    pub triples: u64,
    /// `3 · triangles / triples`; 0 when there are no triples.
    pub clustering_coefficient: f64,
    /// Sorted vertices whose removal disconnects their component.
    pub articulation_points: Vec<usize>,
}

/// Triangles, clustering and articulation points of a simple graph.
pub fn local_structure(g: &Graph) -> Result<LocalStructure> {
    if !g.is_simple() {
        return invalid("local structure needs a simple graph; simplify first");
    }
    let n = g.vertex_count();
    let adj = g.adjacency();
    let deg: Vec<usize> = (0..n).map(|u| adj.degree(u)).collect();
    // Orient each edge toward the endpoint of higher (degree, id) and count
    // triangles as pairs of out-neighbours joined by an edge.
    let rank = |u: usize| (deg[u], u);
    let mut out: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (u, v) in g.edges() {
        if rank(u) < rank(v) {
            out[u].push(v);
        } else {
            out[v].push(u);
        }
    }
    let mut mark = vec![usize::MAX; n];
    let mut triangles = 0u64;
    for u in 0..n {
        for &v in &out[u] {
            mark[v] = u;
        }
        for &v in &out[u] {
            triangles += out[v].iter().filter(|&&w| mark[w] == u).count() as u64;
        }
    }
    let triples: u64 = deg.iter().map(|&d| (d as u64) * (d as u64).saturating_sub(1) / 2).sum();
    Ok(LocalStructure {
        triangles,
        triples,
        clustering_coefficient: if triples > 0 { 3.0 * triangles as f64 / triples as f64 } else { 0.0 },
        articulation_points: articulation_points(g),
    })
}

/// Iterative lowpoint depth-first search.
fn articulation_points(g: &Graph) -> Vec<usize> {
    let n = g.vertex_count();
    let adj = g.adjacency();
    let mut disc = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut is_cut = vec![false; n];
    let mut time = 0;
    // Frames: (vertex, parent edge id, next neighbour index).
    let mut stack: Vec<(usize, u32, usize)> = Vec::new();
    for root in 0..n {
        if disc[root] != usize::MAX {
            continue;
        }
        disc[root] = time;
        low[root] = time;
        time += 1;
        let mut root_children = 0;
        stack.push((root, u32::MAX, 0));
        while let Some(&(u, pe, next)) = stack.last() {
            let nbrs = adj.neighbors(u);
            if next < nbrs.len() {
                stack.last_mut().expect("non-empty").2 += 1;
                let (v, e) = nbrs[next];
                let v = v as usize;
                if e == pe {
                    continue;
                }
                if disc[v] == usize::MAX {
                    disc[v] = time;
                    low[v] = time;
                    time += 1;
                    if u == root {
                        root_children += 1;
                    }
                    stack.push((v, e, 0));
                } else {
                    low[u] = low[u].min(disc[v]);
                }
            } else {
                stack.pop();
                if let Some(&(p, _, _)) = stack.last() {
                    low[p] = low[p].min(low[u]);
                    if p != root && low[u] >= disc[p] {
                        is_cut[p] = true;
                    }
                }
            }
        }
        if root_children > 1 {
            is_cut[root] = true;
        }
    }
    (0..n).filter(|&u| is_cut[u]).collect()
}

//! Seeded random-graph generators and the edge-list file format.
//!
//! Degrees follow the stub convention: a self-loop contributes 2 to the degree
//! of its vertex, so configuration-model degree sequences are preserved
//! exactly.

use std::collections::HashSet;
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{domain, invalid, Error, Result};
use crate::measures::{DegreeDistribution, DegreeMeasure};
use crate::rng::{seeded, SimRng};

/// Undirected multigraph with optional vertex attributes.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    n: usize,
    edges: Vec<(u32, u32)>,
    /// Type label per vertex, `1..=K`.
    pub types: Option<Vec<u32>>,
    pub households: Option<Vec<u32>>,
}

/// Compressed adjacency: for vertex `u`, `targets[offsets[u]..offsets[u+1]]`
/// lists `(neighbour, edge id)`, one entry per stub. A self-loop appears
/// twice in its vertex's list.
#[derive(Debug, Clone)]
pub struct Adjacency {
    pub offsets: Vec<usize>,
    pub targets: Vec<(u32, u32)>,
}

impl Adjacency {
    pub fn neighbors(&self, u: usize) -> &[(u32, u32)] {
        &self.targets[self.offsets[u]..self.offsets[u + 1]]
    }

    pub fn degree(&self, u: usize) -> usize {
        self.offsets[u + 1] - self.offsets[u]
    }
}

impl Graph {
    pub fn new(n: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        if n == 0 {
            return invalid("graph needs at least one vertex");
        }
        if n > u32::MAX as usize {
            return invalid("too many vertices");
        }
        let mut out = Vec::with_capacity(edges.len());
        for (u, v) in edges {
            if u >= n || v >= n {
                return invalid(format!("edge ({u}, {v}) has an endpoint >= N={n}"));
            }
            out.push((u.min(v) as u32, u.max(v) as u32));
        }
        Ok(Graph { n, edges: out, types: None, households: None })
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges as stored, each with `u ≤ v`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().map(|&(u, v)| (u as usize, v as usize))
    }

    pub fn edge(&self, id: usize) -> (usize, usize) {
        let (u, v) = self.edges[id];
        (u as usize, v as usize)
    }

    /// Edge list sorted lexicographically.
    pub fn canonical_edges(&self) -> Vec<(usize, usize)> {
        let mut e: Vec<_> = self.edges().collect();
        e.sort_unstable();
        e
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut d = vec![0usize; self.n];
        for &(u, v) in &self.edges {
            d[u as usize] += 1;
            d[v as usize] += 1;
        }
        d
    }

    pub fn adjacency(&self) -> Adjacency {
        let deg = self.degrees();
        let mut offsets = vec![0usize; self.n + 1];
        for u in 0..self.n {
            offsets[u + 1] = offsets[u] + deg[u];
        }
        let mut fill = offsets.clone();
        let mut targets = vec![(0u32, 0u32); offsets[self.n]];
        for (id, &(u, v)) in self.edges.iter().enumerate() {
            targets[fill[u as usize]] = (v, id as u32);
            fill[u as usize] += 1;
            targets[fill[v as usize]] = (u, id as u32);
            fill[v as usize] += 1;
        }
        Adjacency { offsets, targets }
    }

    pub fn has_self_loops(&self) -> bool {
        self.edges.iter().any(|&(u, v)| u == v)
    }

    pub fn has_multi_edges(&self) -> bool {
        let mut seen = HashSet::with_capacity(self.edges.len());
        self.edges.iter().any(|e| !seen.insert(*e))
    }

    pub fn is_simple(&self) -> bool {
        !self.has_self_loops() && !self.has_multi_edges()
    }

    /// Subgraph induced by `vertices`, relabelled `0..vertices.len()` in the
    /// given order. Attributes are carried over.
    pub fn induced_subgraph(&self, vertices: &[usize]) -> Graph {
        let mut index = vec![u32::MAX; self.n];
        for (i, &v) in vertices.iter().enumerate() {
            index[v] = i as u32;
        }
        let edges = self
            .edges
            .iter()
            .filter_map(|&(u, v)| {
                let (a, b) = (index[u as usize], index[v as usize]);
                (a != u32::MAX && b != u32::MAX).then_some((a.min(b), a.max(b)))
            })
            .collect();
        Graph {
            n: vertices.len().max(1),
            edges,
            types: self.types.as_ref().map(|t| vertices.iter().map(|&v| t[v]).collect()),
            households: self.households.as_ref().map(|h| vertices.iter().map(|&v| h[v]).collect()),
        }
    }

    /// Same vertices, new edge set.
    pub fn with_edges(&self, edges: Vec<(usize, usize)>) -> Result<Graph> {
        let mut g = Graph::new(self.n, edges)?;
        g.types = self.types.clone();
        g.households = self.households.clone();
        Ok(g)
    }
}

/// Generator family.
#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    Complete,
    ErdosRenyi {
        p: f64,
    },
    /// Types are assigned in contiguous blocks with sizes `ρ_i N` rounded by
    /// largest remainder; edges appear independently with probability `π_ij`.
    Sbm {
        rho: Vec<f64>,
        pi: Vec<Vec<f64>>,
    },
    ConfigSequence {
        degrees: Vec<usize>,
    },
    /// Degrees drawn i.i.d. from the distribution, then paired.
    ConfigDistribution {
        dist: DegreeDistribution,
    },
    /// Cliques of i.i.d. sizes drawn from `sizes` (the last household is cut to
    /// fit `N`), superposed with an independent `global` graph on the same
    /// vertices. Global edges joining two members of one household are dropped
    /// because the household layer already links them.
    Household {
        sizes: DegreeDistribution,
        global: Box<Family>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorSpec {
    pub n: usize,
    pub family: Family,
    pub seed: u64,
}

/// Builds the graph described by `spec`; identical output for identical specs.
pub fn generate(spec: &GeneratorSpec) -> Result<Graph> {
    if spec.n == 0 {
        return invalid("N must be positive");
    }
    let mut rng = seeded(spec.seed);
    generate_with(spec.n, &spec.family, &mut rng)
}

fn generate_with(n: usize, family: &Family, rng: &mut SimRng) -> Result<Graph> {
    match family {
        Family::Complete => complete(n),
        Family::ErdosRenyi { p } => erdos_renyi(n, *p, rng),
        Family::Sbm { rho, pi } => sbm(n, rho, pi, rng),
        Family::ConfigSequence { degrees } => {
            if degrees.len() != n {
                return invalid(format!("degree sequence has {} entries, expected N={n}", degrees.len()));
            }
            config_model(degrees, rng)
        }
        Family::ConfigDistribution { dist } => {
            let s = dist.sampler();
            let degrees: Vec<usize> = (0..n).map(|_| s.sample(rng)).collect();
            config_model(&degrees, rng)
        }
        Family::Household { sizes, global } => household(n, sizes, global, rng),
    }
}

pub fn complete(n: usize) -> Result<Graph> {
    let mut edges = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for u in 0..n {
        for v in u + 1..n {
            edges.push((u, v));
        }
    }
    Graph::new(n, edges)
}

fn check_prob(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return invalid(format!("probability {p} outside [0, 1]"));
    }
    Ok(())
}

/// Indices of successes among `count` Bernoulli(p) trials, by geometric
/// skipping.
fn bernoulli_hits(count: u64, p: f64, rng: &mut SimRng, mut hit: impl FnMut(u64)) {
    if p <= 0.0 || count == 0 {
        return;
    }
    if p >= 1.0 {
        (0..count).for_each(hit);
        return;
    }
    let ln_q = (1.0 - p).ln();
    let mut i: i64 = -1;
    loop {
        let u: f64 = 1.0 - rng.random::<f64>();
        let skip = (u.ln() / ln_q).floor();
        if !skip.is_finite() || i as f64 + 1.0 + skip >= count as f64 {
            return;
        }
        i += 1 + skip as i64;
        hit(i as u64);
    }
}

fn pair_from_index(idx: u64) -> (usize, usize) {
    // Row v, column u < v of the strict lower triangle, rows in order.
    let mut v = ((1.0 + (1.0 + 8.0 * idx as f64).sqrt()) / 2.0).floor() as u64;
    while v * (v - 1) / 2 > idx {
        v -= 1;
    }
    while (v + 1) * v / 2 <= idx {
        v += 1;
    }
    let u = idx - v * (v - 1) / 2;
    (u as usize, v as usize)
}

pub fn erdos_renyi(n: usize, p: f64, rng: &mut SimRng) -> Result<Graph> {
    check_prob(p)?;
    let pairs = (n as u64) * (n as u64 - 1) / 2;
    let mut edges = Vec::new();
    bernoulli_hits(pairs, p, rng, |i| edges.push(pair_from_index(i)));
    Graph::new(n, edges)
}

/// Block sizes from proportions by largest remainder.
pub fn block_sizes(n: usize, rho: &[f64]) -> Result<Vec<usize>> {
    if rho.is_empty() || rho.iter().any(|&r| !(r >= 0.0)) {
        return invalid("type proportions must be nonnegative and nonempty");
    }
    let total: f64 = rho.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return invalid(format!("type proportions sum to {total}, not 1"));
    }
    let raw: Vec<f64> = rho.iter().map(|r| r * n as f64).collect();
    let mut sizes: Vec<usize> = raw.iter().map(|x| x.floor() as usize).collect();
    let mut left = n - sizes.iter().sum::<usize>();
    let mut order: Vec<usize> = (0..rho.len()).collect();
    order.sort_by(|&a, &b| (raw[b] - raw[b].floor()).total_cmp(&(raw[a] - raw[a].floor())).then(a.cmp(&b)));
    for &i in order.iter().cycle() {
        if left == 0 {
            break;
        }
        sizes[i] += 1;
        left -= 1;
    }
    Ok(sizes)
}

pub fn sbm(n: usize, rho: &[f64], pi: &[Vec<f64>], rng: &mut SimRng) -> Result<Graph> {
    let k = rho.len();
    if pi.len() != k || pi.iter().any(|row| row.len() != k) {
        return invalid("pi must be a K×K matrix matching rho");
    }
    for (i, row) in pi.iter().enumerate() {
        for (j, &x) in row.iter().enumerate() {
            check_prob(x)?;
            if x != pi[j][i] {
                return invalid("pi must be symmetric");
            }
        }
    }
    let sizes = block_sizes(n, rho)?;
    let mut start = vec![0usize; k + 1];
    for i in 0..k {
        start[i + 1] = start[i] + sizes[i];
    }
    let mut edges = Vec::new();
    for a in 0..k {
        for b in a..k {
            let (sa, sb) = (sizes[a] as u64, sizes[b] as u64);
            if a == b {
                let pairs = sa * sa.saturating_sub(1) / 2;
                bernoulli_hits(pairs, pi[a][a], rng, |i| {
                    let (u, v) = pair_from_index(i);
                    edges.push((start[a] + u, start[a] + v));
                });
            } else {
                bernoulli_hits(sa * sb, pi[a][b], rng, |i| {
                    edges.push((start[a] + (i / sb) as usize, start[b] + (i % sb) as usize));
                });
            }
        }
    }
    let mut g = Graph::new(n, edges)?;
    let mut types = Vec::with_capacity(n);
    for (i, &s) in sizes.iter().enumerate() {
        types.extend(std::iter::repeat_n(i as u32 + 1, s));
    }
    g.types = Some(types);
    Ok(g)
}

/// Uniform pairing of half-edges. An odd stub total loses one stub from a
/// uniformly chosen vertex that has one.
pub fn config_model(degrees: &[usize], rng: &mut SimRng) -> Result<Graph> {
    let n = degrees.len();
    if n == 0 {
        return invalid("N must be positive");
    }
    let mut degrees = degrees.to_vec();
    let total: usize = degrees.iter().sum();
    if total % 2 == 1 {
        fix_parity(&mut degrees, rng);
    }
    let mut stubs: Vec<u32> = Vec::with_capacity(total);
    for (u, &d) in degrees.iter().enumerate() {
        stubs.extend(std::iter::repeat_n(u as u32, d));
    }
    stubs.shuffle(rng);
    let edges = stubs.chunks_exact(2).map(|c| (c[0] as usize, c[1] as usize)).collect();
    Graph::new(n, edges)
}

/// Removes one stub from a uniform vertex among those with positive degree.
pub fn fix_parity(degrees: &mut [usize], rng: &mut SimRng) {
    let candidates: Vec<usize> = (0..degrees.len()).filter(|&u| degrees[u] > 0).collect();
    if let Some(&u) = candidates.get(rng.random_range(0..candidates.len().max(1))) {
        degrees[u] -= 1;
    }
}

fn household(n: usize, sizes: &DegreeDistribution, global: &Family, rng: &mut SimRng) -> Result<Graph> {
    if sizes.get(0) > 0.0 {
        return invalid("household sizes must be >= 1");
    }
    let sampler = sizes.sampler();
    let mut hh = Vec::with_capacity(n);
    let mut edges = Vec::new();
    let mut id = 0u32;
    while hh.len() < n {
        let size = sampler.sample(rng).min(n - hh.len()).max(1);
        let first = hh.len();
        hh.extend(std::iter::repeat_n(id, size));
        for u in first..first + size {
            for v in u + 1..first + size {
                edges.push((u, v));
            }
        }
        id += 1;
    }
    let layer = generate_with(n, global, rng)?;
    edges.extend(layer.edges().filter(|&(u, v)| hh[u] != hh[v]));
    let mut g = Graph::new(n, edges)?;
    g.households = Some(hh);
    g.types = layer.types;
    Ok(g)
}

/// Degree census divided by `N`.
pub fn empirical_degree_distribution(g: &Graph) -> DegreeDistribution {
    let m = DegreeMeasure::census(g.degrees());
    DegreeDistribution::normalized(m).expect("N >= 1")
}

/// Drops self-loops and merges parallel edges.
pub fn simplify(g: &Graph) -> Graph {
    let mut e: Vec<(u32, u32)> = g.edges.iter().copied().filter(|&(u, v)| u != v).collect();
    e.sort_unstable();
    e.dedup();
    Graph { n: g.n, edges: e, types: g.types.clone(), households: g.households.clone() }
}

/// Writes `N <n>` then one `u v` line per edge, after `header` lines which
/// are emitted verbatim (callers prefix them with `#`).
pub fn write_edge_list(g: &Graph, header: &[String]) -> String {
    let mut out = String::with_capacity(16 * g.edge_count() + 64);
    for h in header {
        let _ = writeln!(out, "{h}");
    }
    let _ = writeln!(out, "N {}", g.n);
    for (u, v) in g.edges() {
        let _ = writeln!(out, "{u} {v}");
    }
    out
}

/// Parses the edge-list format; `#` lines and blank lines are skipped.
pub fn parse_edge_list(text: &str) -> Result<Graph> {
    let mut n: Option<usize> = None;
    let mut edges = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |msg: String| Error::Parse { line: i + 1, msg };
        let fields: Vec<&str> = line.split_whitespace().collect();
        match n {
            None => {
                if fields.len() != 2 || fields[0] != "N" {
                    return Err(err("expected header `N <vertex_count>`".into()));
                }
                let count: usize = fields[1].parse().map_err(|_| err("bad vertex count".into()))?;
                if count == 0 {
                    return Err(err("vertex count must be positive".into()));
                }
                n = Some(count);
            }
            Some(count) => {
                if fields.len() != 2 {
                    return Err(err("expected `u v`".into()));
                }
                let u: usize = fields[0].parse().map_err(|_| err(format!("bad vertex `{}`", fields[0])))?;
                let v: usize = fields[1].parse().map_err(|_| err(format!("bad vertex `{}`", fields[1])))?;
                if u >= count || v >= count {
                    return Err(err(format!("vertex out of range for N={count}")));
                }
                edges.push((u, v));
            }
        }
    }
    let n = n.ok_or(Error::Parse { line: 0, msg: "missing header `N <vertex_count>`".into() })?;
    Graph::new(n, edges)
}

/// `vertex,type,household` rows; empty fields mean "absent".
pub fn write_attributes(g: &Graph, header: &[String]) -> String {
    let mut out = String::new();
    for h in header {
        let _ = writeln!(out, "{h}");
    }
    out.push_str("vertex,type,household\n");
    for u in 0..g.n {
        let t = g.types.as_ref().map(|t| t[u].to_string()).unwrap_or_default();
        let h = g.households.as_ref().map(|h| h[u].to_string()).unwrap_or_default();
        let _ = writeln!(out, "{u},{t},{h}");
    }
    out
}

/// Reads an attribute sidecar into `g`. A column is attached only if every
/// vertex has a value for it.
pub fn apply_attributes(g: &mut Graph, text: &str) -> Result<()> {
    let mut types = vec![None; g.n];
    let mut hh = vec![None; g.n];
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with("vertex") {
            continue;
        }
        let err = |msg: String| Error::Parse { line: i + 1, msg };
        let f: Vec<&str> = line.split(',').map(str::trim).collect();
        if f.len() != 3 {
            return Err(err("expected `vertex,type,household`".into()));
        }
        let u: usize = f[0].parse().map_err(|_| err("bad vertex".into()))?;
        if u >= g.n {
            return Err(err(format!("vertex {u} out of range")));
        }
        if !f[1].is_empty() {
            types[u] = Some(f[1].parse::<u32>().map_err(|_| err("bad type".into()))?);
        }
        if !f[2].is_empty() {
            hh[u] = Some(f[2].parse::<u32>().map_err(|_| err("bad household".into()))?);
        }
    }
    if types.iter().all(Option::is_some) {
        g.types = Some(types.into_iter().flatten().collect());
    }
    if hh.iter().all(Option::is_some) {
        g.households = Some(hh.into_iter().flatten().collect());
    }
    if g.types.is_none() && g.households.is_none() {
        return domain("attribute file does not cover every vertex");
    }
    Ok(())
}

use rand::Rng;

use crate::error::{invalid, Result};
use crate::graphgen::Graph;
use crate::rng::seeded;

/// Planar embedding found by gradient descent.
#[derive(Debug, Clone, PartialEq)]
pub struct Layout {
    pub positions: Vec<[f64; 2]>,
    /// Energy after each accepted step, starting with the initial energy.
    pub energy: Vec<f64>,
    pub converged: bool,
}

/// Minimizes `Σ_{i<j} a_ij r³/(3δ) − δ² ln r` over planar positions, where
/// `r` is the distance between `i` and `j` and `a_ij` the edge multiplicity.
/// Edges attract, every pair repels. Starts uniform in a square of side
/// `δ√n`; steps follow Armijo backtracking.
pub fn layout(g: &Graph, delta: f64, seed: u64, max_iters: usize) -> Result<Layout> {
    if !(delta > 0.0 && delta.is_finite()) {
        return invalid("layout scale must be positive");
    }
    let n = g.vertex_count();
    let mut rng = seeded(seed);
    let side = delta * (n as f64).sqrt();
    let mut pos: Vec<[f64; 2]> = (0..n).map(|_| [rng.random::<f64>() * side, rng.random::<f64>() * side]).collect();
    let edges: Vec<(usize, usize)> = g.edges().filter(|(u, v)| u != v).collect();
    let mut e = energy(&pos, &edges, delta);
    let mut history = vec![e];
    let mut step = delta;
    let mut converged = n < 2;
    for _ in 0..max_iters {
        if converged {
            break;
        }
        let grad = gradient(&pos, &edges, delta);
        let g2: f64 = grad.iter().map(|d| d[0] * d[0] + d[1] * d[1]).sum();
        if g2.sqrt() <= 1e-9 * delta * n as f64 {
            converged = true;
            break;
        }
        let mut accepted = false;
        for _ in 0..60 {
            let trial: Vec<[f64; 2]> =
                pos.iter().zip(&grad).map(|(p, d)| [p[0] - step * d[0], p[1] - step * d[1]]).collect();
            let et = energy(&trial, &edges, delta);
            if et <= e - 1e-4 * step * g2 {
                pos = trial;
                e = et;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            converged = true;
            break;
        }
        history.push(e);
        if history.len() >= 2 && (history[history.len() - 2] - e).abs() <= 1e-12 * e.abs().max(1.0) {
            converged = true;
        }
        step *= 2.0;
    }
    Ok(Layout { positions: pos, energy: history, converged })
}

fn dist(a: [f64; 2], b: [f64; 2], delta: f64) -> f64 {
    // Coincident points would put the repulsion at infinity.
    (a[0] - b[0]).hypot(a[1] - b[1]).max(1e-9 * delta)
}

fn energy(pos: &[[f64; 2]], edges: &[(usize, usize)], delta: f64) -> f64 {
    let n = pos.len();
    let mut e = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            e -= delta * delta * dist(pos[i], pos[j], delta).ln();
        }
    }
    for &(u, v) in edges {
        e += dist(pos[u], pos[v], delta).powi(3) / (3.0 * delta);
    }
    e
}

fn gradient(pos: &[[f64; 2]], edges: &[(usize, usize)], delta: f64) -> Vec<[f64; 2]> {
    let n = pos.len();
    let mut grad = vec![[0.0; 2]; n];
    let mut pull = |i: usize, j: usize, de_dr: f64| {
        let r = dist(pos[i], pos[j], delta);
        let ux = (pos[i][0] - pos[j][0]) / r;
        let uy = (pos[i][1] - pos[j][1]) / r;
        grad[i][0] += de_dr * ux;
        grad[i][1] += de_dr * uy;
        grad[j][0] -= de_dr * ux;
        grad[j][1] -= de_dr * uy;
    };
    for i in 0..n {
        for j in i + 1..n {
            let r = dist(pos[i], pos[j], delta);
            pull(i, j, -delta * delta / r);
        }
    }
    for &(u, v) in edges {
        let r = dist(pos[u], pos[v], delta);
        pull(u, v, r * r / delta);
    }
    grad
}

//! Dormand–Prince 5(4) integrator with adaptive step size.
//!
//! Steps are clipped so that every requested grid time is hit exactly; no
//! dense output is needed.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub atol: f64,
    pub rtol: f64,
    /// Upper bound on the step size.
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions { atol: 1e-10, rtol: 1e-8, h_max: f64::INFINITY, max_steps: 10_000_000 }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
    /// Largest normalised local error estimate among accepted steps.
    pub max_error: f64,
}

#[derive(Debug, Clone)]
pub struct OdeSolution {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub stats: OdeStats,
    /// Time and state at which the halt predicate fired, if it did.
    pub halted: Option<(f64, Vec<f64>)>,
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Integrates `y' = rhs(t, y)` from `grid[0]` and records the state at every
/// grid time. `halt(t, y)` is checked after each accepted step; when it
/// returns true the integration stops and the halt point is reported.
pub fn solve<F, H>(mut rhs: F, y0: &[f64], grid: &[f64], opts: &OdeOptions, mut halt: H) -> Result<OdeSolution>
where
    F: FnMut(f64, &[f64], &mut [f64]),
    H: FnMut(f64, &[f64]) -> bool,
{
    if grid.is_empty() {
        return Err(Error::Invalid("empty time grid".into()));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Invalid("time grid must be strictly increasing".into()));
    }
    let n = y0.len();
    let mut y = y0.to_vec();
    let mut t = grid[0];
    let mut sol = OdeSolution { times: vec![t], states: vec![y.clone()], stats: OdeStats::default(), halted: None };
    if halt(t, &y) {
        sol.halted = Some((t, y));
        return Ok(sol);
    }
    let mut k1 = vec![0.0; n];
    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];
    let mut k5 = vec![0.0; n];
    let mut k6 = vec![0.0; n];
    let mut k7 = vec![0.0; n];
    let mut tmp = vec![0.0; n];
    let mut y_new = vec![0.0; n];
    rhs(t, &y, &mut k1);

    let span = grid[grid.len() - 1] - grid[0];
    let mut h = (span * 1e-3).min(opts.h_max).max(1e-12);
    let mut next = 1;
    let mut steps = 0usize;
    while next < grid.len() {
        steps += 1;
        if steps > opts.max_steps {
            return Err(Error::Numerical(format!("step limit reached at t={t}")));
        }
        let target = grid[next];
        let mut hit = false;
        let mut h_try = h.min(opts.h_max);
        if t + h_try >= target {
            h_try = target - t;
            hit = true;
        }
        for i in 0..n {
            tmp[i] = y[i] + h_try * A21 * k1[i];
        }
        rhs(t + C2 * h_try, &tmp, &mut k2);
        for i in 0..n {
            tmp[i] = y[i] + h_try * (A31 * k1[i] + A32 * k2[i]);
        }
        rhs(t + C3 * h_try, &tmp, &mut k3);
        for i in 0..n {
            tmp[i] = y[i] + h_try * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
        }
        rhs(t + C4 * h_try, &tmp, &mut k4);
        for i in 0..n {
            tmp[i] = y[i] + h_try * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
        }
        rhs(t + C5 * h_try, &tmp, &mut k5);
        for i in 0..n {
            tmp[i] = y[i] + h_try * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
        }
        rhs(t + h_try, &tmp, &mut k6);
        for i in 0..n {
            y_new[i] = y[i] + h_try * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i] + B5 * k5[i] + B6 * k6[i]);
        }
        rhs(t + h_try, &y_new, &mut k7);
        let mut err = 0.0f64;
        for i in 0..n {
            let e = h_try * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = opts.atol + opts.rtol * y[i].abs().max(y_new[i].abs());
            let r = (e / sc).abs();
            // f64::max would drop a NaN.
            err = if r.is_nan() || err.is_nan() { f64::NAN } else { err.max(r) };
        }
        if !err.is_finite() {
            sol.stats.rejected += 1;
            h = h_try * 0.2;
            if h < 1e-14 * t.abs().max(1.0) {
                return Err(Error::Numerical(format!("non-finite derivative at t={t}")));
            }
            continue;
        }
        if err <= 1.0 {
            t = if hit { target } else { t + h_try };
            std::mem::swap(&mut y, &mut y_new);
            std::mem::swap(&mut k1, &mut k7);
            sol.stats.accepted += 1;
            sol.stats.max_error = sol.stats.max_error.max(err);
            if hit {
                sol.times.push(t);
                sol.states.push(y.clone());
                next += 1;
            }
            if halt(t, &y) {
                sol.halted = Some((t, y.clone()));
                return Ok(sol);
            }
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            // A step shortened to land on the grid says nothing about the
            // step size the local error would allow.
            h = if hit { h.max(h_try * factor) } else { h_try * factor };
        } else {
            sol.stats.rejected += 1;
            h = h_try * (0.9 * err.powf(-0.2)).max(0.2);
            if h < 1e-14 * t.abs().max(1.0) {
                return Err(Error::Numerical(format!("step size underflow at t={t}")));
            }
        }
    }
    Ok(sol)
}

/// `n + 1` equally spaced points on `[t0, t1]`.
pub fn uniform_grid(t0: f64, t1: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|i| t0 + (t1 - t0) * i as f64 / n as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay_matches_closed_form() {
        let grid = uniform_grid(0.0, 5.0, 50);
        let sol = solve(|_, y, d| d[0] = -y[0], &[1.0], &grid, &OdeOptions::default(), |_, _| false).unwrap();
        for (t, y) in sol.times.iter().zip(&sol.states) {
            assert!((y[0] - (-t).exp()).abs() < 1e-9);
        }
        assert_eq!(sol.times.len(), grid.len());
    }

    #[test]
    fn harmonic_oscillator_conserves_energy() {
        let grid = uniform_grid(0.0, 20.0, 20);
        let sol = solve(
            |_, y, d| {
                d[0] = y[1];
                d[1] = -y[0];
            },
            &[1.0, 0.0],
            &grid,
            &OdeOptions::default(),
            |_, _| false,
        )
        .unwrap();
        let last = sol.states.last().unwrap();
        assert!((last[0] - 20f64.cos()).abs() < 1e-7);
    }

    #[test]
    fn halt_predicate_stops_early() {
        let grid = uniform_grid(0.0, 10.0, 100);
        let sol = solve(|_, y, d| d[0] = -y[0], &[1.0], &grid, &OdeOptions::default(), |_, y| y[0] < 0.5).unwrap();
        let (th, _) = sol.halted.unwrap();
        assert!(th > 2f64.ln() && th < 1.0);
    }
}

//! Deterministic large-population limits of SIR epidemics.
//!
//! Kermack–McKendrick and the pair moment closure for homogeneous settings;
//! Miller's one-dimensional edge-based system, Volz's four equations and the
//! countable Ball–Neal system on degree measures for configuration models.
//! In the network systems `h` is the generating function of the initial
//! susceptible degree measure, normalised by the population size, so that
//! `s = h(θ)`.

use std::fmt::Write as _;

use crate::error::{domain, invalid, Error, Result};
use crate::measures::DegreeMeasure;
use crate::numeric::{bisect, ln_factorial};
use crate::ode::{solve, OdeOptions, OdeStats};

/// Named columns sampled on a time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct OdeTrajectory {
    pub columns: Vec<&'static str>,
    pub times: Vec<f64>,
    pub rows: Vec<Vec<f64>>,
    pub stats: OdeStats,
    /// Time at which a floor condition stopped the integration; grid points
    /// past it are absent.
    pub halted_at: Option<f64>,
    /// No infection pressure: the trajectory is constant.
    pub degenerate: bool,
}

impl OdeTrajectory {
    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| *c == name)
    }

    /// Values of one column; panics on unknown names.
    pub fn column(&self, name: &str) -> Vec<f64> {
        let j = self.column_index(name).unwrap_or_else(|| panic!("no column {name}"));
        self.rows.iter().map(|r| r[j]).collect()
    }

    pub fn last(&self, name: &str) -> f64 {
        *self.column(name).last().expect("non-empty trajectory")
    }

    /// Largest absolute difference over shared grid rows and the given columns.
    pub fn sup_distance(&self, other: &OdeTrajectory, names: &[&str]) -> f64 {
        let mut d = 0.0f64;
        for name in names {
            for (a, b) in self.column(name).iter().zip(other.column(name)) {
                d = d.max((a - b).abs());
            }
        }
        d
    }

    /// CSV with a `t` column followed by the system's columns.
    pub fn to_csv(&self, header: &[String]) -> String {
        let mut out = String::new();
        for h in header {
            let _ = writeln!(out, "{h}");
        }
        out.push('t');
        for c in &self.columns {
            out.push(',');
            out.push_str(c);
        }
        out.push('\n');
        for (t, row) in self.times.iter().zip(&self.rows) {
            let _ = write!(out, "{t}");
            for v in row {
                let _ = write!(out, ",{v}");
            }
            out.push('\n');
        }
        out
    }
}

fn check_fractions(s0: f64, i0: f64) -> Result<()> {
    if !(s0 >= 0.0 && i0 >= 0.0 && s0 + i0 <= 1.0 + 1e-12) {
        return invalid("need s0, i0 >= 0 and s0 + i0 <= 1");
    }
    Ok(())
}

fn check_rates(lambda: f64, gamma: f64) -> Result<()> {
    if !(lambda >= 0.0 && lambda.is_finite() && gamma > 0.0 && gamma.is_finite()) {
        return invalid("need lambda >= 0 and gamma > 0");
    }
    Ok(())
}

/// `s' = −λ' s i`, `i' = λ' s i − γ i`.
pub fn integrate_km(
    lambda_p: f64,
    gamma: f64,
    s0: f64,
    i0: f64,
    grid: &[f64],
    opts: &OdeOptions,
) -> Result<OdeTrajectory> {
    check_rates(lambda_p, gamma)?;
    check_fractions(s0, i0)?;
    let sol = solve(
        |_, y, dy| {
            let inc = lambda_p * y[0] * y[1];
            dy[0] = -inc;
            dy[1] = inc - gamma * y[1];
        },
        &[s0, i0],
        grid,
        opts,
        |_, _| false,
    )?;
    let rows = sol.states.iter().map(|y| vec![y[0], y[1], 1.0 - y[0] - y[1]]).collect();
    Ok(OdeTrajectory {
        columns: vec!["s", "i", "r"],
        times: sol.times,
        rows,
        stats: sol.stats,
        halted_at: None,
        degenerate: i0 == 0.0,
    })
}

/// Pair moment closure with `[SS] = C S²`: `s' = −λ s ĩ`, `i' = λ s ĩ − γ i`,
/// `ĩ' = (Cλ s − λ − γ) ĩ`.
#[allow(clippy::too_many_arguments)]
pub fn integrate_moment_closure(
    lambda: f64,
    gamma: f64,
    s0: f64,
    i0: f64,
    itilde0: f64,
    c: f64,
    grid: &[f64],
    opts: &OdeOptions,
) -> Result<OdeTrajectory> {
    check_rates(lambda, gamma)?;
    check_fractions(s0, i0)?;
    if !(c > 0.0 && itilde0 >= 0.0) {
        return invalid("need C > 0 and itilde0 >= 0");
    }
    let sol = solve(
        |_, y, dy| {
            let inc = lambda * y[0] * y[2];
            dy[0] = -inc;
            dy[1] = inc - gamma * y[1];
            dy[2] = (c * lambda * y[0] - lambda - gamma) * y[2];
        },
        &[s0, i0, itilde0],
        grid,
        opts,
        |_, _| false,
    )?;
    let rows = sol.states.iter().map(|y| vec![y[0], y[1], 1.0 - y[0] - y[1], y[2]]).collect();
    Ok(OdeTrajectory {
        columns: vec!["s", "i", "r", "itilde"],
        times: sol.times,
        rows,
        stats: sol.stats,
        halted_at: None,
        degenerate: itilde0 == 0.0,
    })
}

/// Final size `z = s0 − s∞` of the moment closure: smallest nonnegative root
/// of `z = s0 (1 − exp(−λ/(λ+γ) (C z + ĩ0)))`.
pub fn final_size_moment_closure(lambda: f64, gamma: f64, s0: f64, itilde0: f64, c: f64) -> Result<f64> {
    check_rates(lambda, gamma)?;
    if !(c > 0.0 && itilde0 >= 0.0 && s0 >= 0.0) {
        return invalid("need C > 0, itilde0 >= 0 and s0 >= 0");
    }
    let k = lambda / (lambda + gamma);
    let f = |z: f64| s0 * -(-k * (c * z + itilde0)).exp_m1() - z;
    if f(0.0) <= 0.0 {
        return Ok(0.0);
    }
    // f is concave with f(0) > 0 > f(s0): one root in between.
    let z = bisect(f, 0.0, s0, 0.0)?;
    if f(z).abs() > 1e-12 {
        return Err(Error::Numerical(format!("final size residual {}", f(z).abs())));
    }
    Ok(z)
}

/// PGF value and first two derivatives of `h` at `x`.
fn pgf3(h: &DegreeMeasure, x: f64) -> (f64, f64, f64) {
    let x = x.clamp(0.0, 1.0);
    (h.pgf(x, 0).unwrap_or(f64::NAN), h.pgf(x, 1).unwrap_or(f64::NAN), h.pgf(x, 2).unwrap_or(f64::NAN))
}

fn check_pgf_measure(h: &DegreeMeasure) -> Result<()> {
    if h.total() > 1.0 + 1e-9 {
        return invalid("susceptible measure must have mass at most 1");
    }
    Ok(())
}

/// Miller's system with infection pressure at time 0.
///
/// Edges that have not transmitted (probability `θ`) split into those whose
/// partner is susceptible (`ψ_S`), infectious (`φ`) or removed (`ψ_R`), with
/// `ψ_R(0) = 0` and `ψ_S = ψ_S(0) h'(θ)/h'(θ0)`. Then `θ' = −λ φ` where
/// `φ(θ) = (θ − θ0)(λ+γ)/λ + φ0 − ψ_S(0)(h'(θ)/h'(θ0) − 1)`; `s = h(θ)`,
/// `r' = γ i`, `i = h(θ0) + i0 + r0 − s − r`.
#[allow(clippy::too_many_arguments)]
pub fn integrate_miller(
    h: &DegreeMeasure,
    lambda: f64,
    gamma: f64,
    theta0: f64,
    phi0: f64,
    i0: f64,
    r0: f64,
    grid: &[f64],
    opts: &OdeOptions,
) -> Result<OdeTrajectory> {
    check_rates(lambda, gamma)?;
    check_pgf_measure(h)?;
    if !(theta0 > 0.0 && theta0 <= 1.0 && phi0 >= 0.0 && phi0 <= theta0) {
        return invalid("need theta0 in (0, 1] and phi0 in [0, theta0]");
    }
    if !(i0 >= 0.0 && r0 >= 0.0) {
        return invalid("need i0, r0 >= 0");
    }
    let (s_init, hp0, _) = pgf3(h, theta0);
    let total = s_init + i0 + r0;
    let psi_s0 = theta0 - phi0;
    let phi = |theta: f64| -> f64 {
        let ratio = if hp0 > 0.0 { pgf3(h, theta).1 / hp0 } else { 1.0 };
        (theta - theta0) * (lambda + gamma) / lambda + phi0 - psi_s0 * (ratio - 1.0)
    };
    let sol = solve(
        |_, y, dy| {
            dy[0] = if lambda == 0.0 { 0.0 } else { -lambda * phi(y[0]) };
            let s = pgf3(h, y[0]).0;
            dy[1] = gamma * (total - s - y[1]);
        },
        &[theta0, r0],
        grid,
        opts,
        |_, _| false,
    )?;
    let rows = sol
        .states
        .iter()
        .map(|y| {
            let s = pgf3(h, y[0]).0;
            let ph = if lambda == 0.0 { phi0 } else { phi(y[0]) };
            vec![s, total - s - y[1], y[1], y[0], ph]
        })
        .collect();
    Ok(OdeTrajectory {
        columns: vec!["s", "i", "r", "theta", "phi"],
        times: sol.times,
        rows,
        stats: sol.stats,
        halted_at: None,
        degenerate: phi0 == 0.0 || lambda == 0.0,
    })
}

const EDGE_COLUMNS: [&str; 10] = ["s", "i", "r", "theta", "pI", "pS", "pR", "NS", "NIS", "NRS"];

fn edge_row(s: f64, i: f64, r: f64, theta: f64, p_i: f64, p_s: f64, ns: f64) -> Vec<f64> {
    let p_r = 1.0 - p_i - p_s;
    vec![s, i, r, theta, p_i, p_s, p_r, ns, p_i * ns, p_r * ns]
}

/// Volz's equations, starting from `θ = 1`:
/// `θ' = −λ p_I θ`,
/// `p_I' = λ p_I p_S θ h''/h' − λ p_I (1 − p_I) − γ p_I`,
/// `p_S' = λ p_I p_S (1 − θ h''/h')`,
/// `i' = λ p_I θ h'(θ) − γ i`.
/// Edge counts are `N^S = θ h'(θ)`, `N^IS = p_I N^S`, `N^RS = p_R N^S`.
#[allow(clippy::too_many_arguments)]
pub fn integrate_volz(
    h: &DegreeMeasure,
    lambda: f64,
    gamma: f64,
    p_i0: f64,
    p_s0: f64,
    i0: f64,
    grid: &[f64],
    opts: &OdeOptions,
) -> Result<OdeTrajectory> {
    check_rates(lambda, gamma)?;
    check_pgf_measure(h)?;
    if !(p_i0 >= 0.0 && p_s0 >= 0.0 && p_i0 + p_s0 <= 1.0 + 1e-12 && i0 >= 0.0) {
        return invalid("need p_I0, p_S0 >= 0 with p_I0 + p_S0 <= 1 and i0 >= 0");
    }
    let total = h.total() + i0;
    let sol = solve(
        |_, y, dy| {
            let (theta, p_i, p_s) = (y[0], y[1], y[2]);
            let (_, h1, h2) = pgf3(h, theta);
            let curv = if h1 > 0.0 { theta * h2 / h1 } else { 0.0 };
            dy[0] = -lambda * p_i * theta;
            dy[1] = lambda * p_i * p_s * curv - lambda * p_i * (1.0 - p_i) - gamma * p_i;
            dy[2] = lambda * p_i * p_s * (1.0 - curv);
            dy[3] = lambda * p_i * theta * h1 - gamma * y[3];
        },
        &[1.0, p_i0, p_s0, i0],
        grid,
        opts,
        |_, _| false,
    )?;
    let rows = sol
        .states
        .iter()
        .map(|y| {
            let (s, h1, _) = pgf3(h, y[0]);
            edge_row(s, y[3], total - s - y[3], y[0], y[1], y[2], y[0] * h1)
        })
        .collect();
    Ok(OdeTrajectory {
        columns: EDGE_COLUMNS.to_vec(),
        times: sol.times,
        rows,
        stats: sol.stats,
        halted_at: None,
        degenerate: p_i0 == 0.0,
    })
}

/// Degree measures of the countable system at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct BallNealState {
    pub k_max: usize,
    pub mu_s: Vec<f64>,
    pub mu_is: Vec<f64>,
    pub mu_rs: Vec<f64>,
}

impl BallNealState {
    pub fn total_mass(&self) -> f64 {
        self.mu_s.iter().chain(&self.mu_is).chain(&self.mu_rs).sum()
    }
}

#[derive(Debug, Clone)]
pub struct BallNealTrajectory {
    /// Aggregates with the Volz columns.
    pub aggregates: OdeTrajectory,
    pub states: Vec<BallNealState>,
}

/// Below this `N^IS` the Ball–Neal integration stops.
pub const BALL_NEAL_FLOOR: f64 = 1e-10;

/// Masses more negative than this are reported as a numerical failure;
/// smaller undershoots are clipped to 0.
const NEGATIVE_MASS_TOL: f64 = 1e-8;

/// The countable system on `(μ^S, μ^IS, μ^RS)`, truncated at `k_max`.
///
/// `μ^S_t(i) = μ^S_0(i) θ_t^i`, `θ' = −λ θ N^IS/N^S`, and for each `i`
/// `μ^IS'(i) = −γ μ^IS(i) + λ p_I Σ_{j,ℓ} (i+j+ℓ+1) μ^S(i+j+ℓ+1) M(i,j,ℓ)
///            + (λ p_I A/N^S + λ)((i+1) μ^IS(i+1) − i μ^IS(i))`,
/// `μ^RS'(i) = γ μ^IS(i) + λ p_I A/N^S ((i+1) μ^RS(i+1) − i μ^RS(i))`,
/// where `M` is the multinomial law of the other stubs' partners with
/// probabilities `(p_S, p_I, p_R)` and `A = ⟨μ^S, χ(χ−1)⟩`.
#[allow(clippy::too_many_arguments)]
pub fn integrate_ball_neal(
    mu_s0: &DegreeMeasure,
    mu_is0: &DegreeMeasure,
    mu_rs0: &DegreeMeasure,
    lambda: f64,
    gamma: f64,
    k_max: Option<usize>,
    grid: &[f64],
    opts: &OdeOptions,
) -> Result<BallNealTrajectory> {
    check_rates(lambda, gamma)?;
    let support = [mu_s0, mu_is0, mu_rs0].iter().filter_map(|m| m.max_degree()).max().unwrap_or(0);
    let k = k_max.unwrap_or(support);
    if support > k {
        return invalid(format!("inputs have mass above k_max = {k}"));
    }
    let nis0 = mu_is0.moment(1);
    if !(nis0 > 0.0) {
        return domain("need <mu_IS_0, chi> > 0");
    }
    let s0: Vec<f64> = (0..=k).map(|d| mu_s0.get(d)).collect();
    let n = k + 1;
    let lf: Vec<f64> = (0..=k as u64).map(ln_factorial).collect();
    let h = mu_s0.clone();

    let mut y0 = vec![1.0];
    y0.extend((0..=k).map(|d| mu_is0.get(d)));
    y0.extend((0..=k).map(|d| mu_rs0.get(d)));

    let rhs = |_: f64, y: &[f64], dy: &mut [f64]| {
        let theta = y[0];
        let (is, rs) = (&y[1..1 + n], &y[1 + n..]);
        let mut pow = 1.0;
        let mut ms = vec![0.0; n];
        for d in 0..n {
            ms[d] = s0[d] * pow;
            pow *= theta;
        }
        let ns: f64 = (0..n).map(|d| d as f64 * ms[d]).sum();
        let a: f64 = (0..n).map(|d| (d * d.saturating_sub(1)) as f64 * ms[d]).sum();
        let nis: f64 = (0..n).map(|d| d as f64 * is[d]).sum();
        let nrs: f64 = (0..n).map(|d| d as f64 * rs[d]).sum();
        let (p_i, p_r) = if ns > 0.0 { ((nis / ns).max(0.0), (nrs / ns).max(0.0)) } else { (0.0, 0.0) };
        let p_s = (1.0 - p_i - p_r).max(0.0);
        let (lps, lpi, lpr) = (p_s.ln(), p_i.ln(), p_r.ln());
        let pressure = if ns > 0.0 { lambda * p_i * a / ns } else { 0.0 };
        dy[0] = -lambda * p_i * theta;
        for i in 0..n {
            let mut influx = 0.0;
            for deg in (i + 1)..n {
                if ms[deg] == 0.0 {
                    continue;
                }
                let rest = deg - 1 - i;
                let mut acc = 0.0;
                for j in 0..=rest {
                    let l = rest - j;
                    let lw = lf[deg - 1] - lf[i] - lf[j] - lf[l] + term(i, lps) + term(j, lpi) + term(l, lpr);
                    acc += lw.exp();
                }
                influx += deg as f64 * ms[deg] * acc;
            }
            let up_is = if i + 1 < n { (i + 1) as f64 * is[i + 1] } else { 0.0 };
            let up_rs = if i + 1 < n { (i + 1) as f64 * rs[i + 1] } else { 0.0 };
            dy[1 + i] = -gamma * is[i] + lambda * p_i * influx + (pressure + lambda) * (up_is - i as f64 * is[i]);
            dy[1 + n + i] = gamma * is[i] + pressure * (up_rs - i as f64 * rs[i]);
        }
    };
    let nis_of = |y: &[f64]| (0..n).map(|d| d as f64 * y[1 + d]).sum::<f64>();
    let sol = solve(rhs, &y0, grid, opts, |_, y| !(nis_of(y) >= BALL_NEAL_FLOOR))?;

    let mut states = Vec::with_capacity(sol.states.len());
    let mut rows = Vec::with_capacity(sol.states.len());
    for y in &sol.states {
        let theta = y[0];
        let mu_s: Vec<f64> = (0..n).map(|d| s0[d] * theta.powi(d as i32)).collect();
        let clip = |v: &[f64]| -> Result<Vec<f64>> {
            v.iter()
                .map(|&x| {
                    if x < -NEGATIVE_MASS_TOL {
                        Err(Error::Numerical(format!("negative mass {x} in the countable system")))
                    } else {
                        Ok(x.max(0.0))
                    }
                })
                .collect()
        };
        let mu_is = clip(&y[1..1 + n])?;
        let mu_rs = clip(&y[1 + n..])?;
        let (s, i, r) = (mu_s.iter().sum::<f64>(), mu_is.iter().sum::<f64>(), mu_rs.iter().sum::<f64>());
        let ns = theta * h.pgf(theta.clamp(0.0, 1.0), 1).unwrap_or(f64::NAN);
        let nis: f64 = mu_is.iter().enumerate().map(|(d, m)| d as f64 * m).sum();
        let nrs: f64 = mu_rs.iter().enumerate().map(|(d, m)| d as f64 * m).sum();
        let (p_i, p_r) = if ns > 0.0 { (nis / ns, nrs / ns) } else { (0.0, 0.0) };
        let mut row = edge_row(s, i, r, theta, p_i, 1.0 - p_i - p_r, ns);
        row[8] = nis;
        row[9] = nrs;
        rows.push(row);
        states.push(BallNealState { k_max: k, mu_s, mu_is, mu_rs });
    }
    Ok(BallNealTrajectory {
        aggregates: OdeTrajectory {
            columns: EDGE_COLUMNS.to_vec(),
            times: sol.times,
            rows,
            stats: sol.stats,
            halted_at: sol.halted.map(|(t, _)| t),
            degenerate: false,
        },
        states,
    })
}

/// `n · ln p` with `0 · ln 0 = 0`.
fn term(n: usize, lp: f64) -> f64 {
    if n == 0 {
        0.0
    } else {
        n as f64 * lp
    }
}

/// Lower bound on the first time `N^IS` falls below `eps`:
/// `[ln(⟨μ^S_0, χ²⟩ + N^IS_0) − ln(⟨μ^S_0, χ²⟩ + ε)] / max(γ, λ)`.
pub fn horizon_bound(mu_s0: &DegreeMeasure, nis0: f64, eps: f64, lambda: f64, gamma: f64) -> Result<f64> {
    check_rates(lambda, gamma)?;
    if !(eps >= 0.0 && eps < nis0) {
        return domain("need 0 <= eps < N^IS_0");
    }
    let m2 = mu_s0.moment(2);
    Ok(((m2 + nis0).ln() - (m2 + eps).ln()) / gamma.max(lambda))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::DegreeDistribution;
    use crate::ode::uniform_grid;
    use approx::assert_abs_diff_eq;

    fn poisson_h(scale: f64) -> DegreeMeasure {
        DegreeDistribution::poisson(5.0).unwrap().measure().scaled(scale).unwrap()
    }

    #[test]
    fn km_pure_decay() {
        let grid = uniform_grid(0.0, 5.0, 51);
        let t = integrate_km(0.0, 0.7, 0.6, 0.4, &grid, &OdeOptions::default()).unwrap();
        for (time, row) in t.times.iter().zip(&t.rows) {
            assert_abs_diff_eq!(row[0], 0.6, epsilon = 1e-12);
            assert_abs_diff_eq!(row[1], 0.4 * (-0.7 * time).exp(), epsilon = 1e-6);
        }
    }

    #[test]
    fn moment_closure_without_pressure_is_flat() {
        let grid = uniform_grid(0.0, 10.0, 11);
        let t = integrate_moment_closure(1.0, 1.0, 0.9, 0.1, 0.0, 5.0, &grid, &OdeOptions::default()).unwrap();
        assert!(t.column("s").iter().all(|&s| s == 0.9));
        assert_eq!(final_size_moment_closure(1.0, 1.0, 0.9, 0.0, 5.0).unwrap(), 0.0);
        assert_eq!(final_size_moment_closure(0.0, 1.0, 0.9, 0.3, 5.0).unwrap(), 0.0);
    }

    #[test]
    fn miller_disease_free_is_stationary() {
        let grid = uniform_grid(0.0, 10.0, 11);
        let t = integrate_miller(&poisson_h(1.0), 1.0, 1.0, 1.0, 0.0, 0.0, 0.0, &grid, &OdeOptions::default()).unwrap();
        assert!(t.column("theta").iter().all(|&x| (x - 1.0).abs() < 1e-14));
    }

    #[test]
    fn volz_initial_slope() {
        let h = poisson_h(0.99);
        let dt = 1e-6;
        let t = integrate_volz(&h, 2.0, 1.0, 0.05, 0.95, 0.01, &[0.0, dt], &OdeOptions::default()).unwrap();
        let slope = (t.rows[1][3] - t.rows[0][3]) / dt;
        assert_abs_diff_eq!(slope, -2.0 * 0.05, epsilon = 1e-6);
    }

    #[test]
    fn ball_neal_halts_when_no_pressure_left() {
        let mu_s = poisson_h(0.99);
        let mu_is = DegreeMeasure::dirac(1, 0.01).unwrap();
        let grid = uniform_grid(0.0, 400.0, 41);
        let b =
            integrate_ball_neal(&mu_s, &mu_is, &DegreeMeasure::zero(), 0.1, 1.0, None, &grid, &OdeOptions::default())
                .unwrap();
        assert!(b.aggregates.halted_at.is_some());
        assert!(b.states.len() < grid.len());
    }

    #[test]
    fn horizon_bound_shape() {
        let mu = poisson_h(0.95);
        assert!(horizon_bound(&mu, 0.05, 0.05, 1.0, 1.0).is_err());
        let a = horizon_bound(&mu, 0.05, 0.01, 1.0, 1.0).unwrap();
        let b = horizon_bound(&mu, 0.05, 0.02, 1.0, 1.0).unwrap();
        assert!(a > b && b > 0.0);
    }
}

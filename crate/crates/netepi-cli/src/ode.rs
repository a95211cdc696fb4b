use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use netepi::measures::DegreeMeasure;
use netepi::ode::{uniform_grid, OdeOptions};
use netepi::odelim::{
    integrate_ball_neal, integrate_km, integrate_miller, integrate_moment_closure, integrate_volz, OdeTrajectory,
};

use crate::common::{emit, parse_degree_dist, Provenance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum System {
    Km,
    MomentClosure,
    Miller,
    Volz,
    BallNeal,
}

#[derive(Debug, Args)]
pub struct OdeArgs {
    #[arg(long, value_enum)]
    system: System,
    /// Infection rate: per edge for the network systems, the aggregate rate for km.
    #[arg(long)]
    lambda: f64,
    #[arg(long)]
    gamma: f64,
    /// Degree law for miller, volz and ball-neal.
    #[arg(long)]
    degree_dist: Option<String>,
    /// Initial infectious fraction. On networks their stubs all lead to susceptibles.
    #[arg(long, default_value_t = 0.01)]
    i0: f64,
    /// Pair-closure constant for moment-closure.
    #[arg(long)]
    c: Option<f64>,
    /// Initial value of the closure variable; defaults to `c * i0`.
    #[arg(long)]
    itilde0: Option<f64>,
    /// Degree truncation for ball-neal; defaults to the support of the law.
    #[arg(long)]
    k_max: Option<usize>,
    #[arg(long, default_value_t = 20.0)]
    t_end: f64,
    #[arg(long, default_value_t = 201)]
    points: usize,
    #[arg(long, default_value_t = 1e-10)]
    atol: f64,
    #[arg(long, default_value_t = 1e-8)]
    rtol: f64,
    /// Largest step the integrator may take.
    #[arg(long)]
    h_max: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn integrate(a: &OdeArgs) -> Result<OdeTrajectory> {
    if !(a.i0 > 0.0 && a.i0 < 1.0) {
        bail!("--i0 must lie in (0, 1)");
    }
    if a.points < 2 || !(a.t_end > 0.0) {
        bail!("need --points >= 2 and --t-end > 0");
    }
    let grid = uniform_grid(0.0, a.t_end, a.points);
    let opts =
        OdeOptions { atol: a.atol, rtol: a.rtol, h_max: a.h_max.unwrap_or(f64::INFINITY), ..OdeOptions::default() };
    let s0 = 1.0 - a.i0;
    let network = || -> Result<(DegreeMeasure, f64)> {
        let p = parse_degree_dist(a.degree_dist.as_deref().context("--degree-dist is required for this system")?)?;
        let mu_s = p.measure().scaled(s0)?;
        // Stub-weighted share of infectious partners among susceptible stubs.
        let p_i0 = a.i0 / s0;
        if p_i0 > 1.0 {
            bail!("--i0 above 1/2 leaves too few susceptible stubs");
        }
        Ok((mu_s, p_i0))
    };
    Ok(match a.system {
        System::Km => integrate_km(a.lambda, a.gamma, s0, a.i0, &grid, &opts)?,
        System::MomentClosure => {
            let c = a.c.context("--c is required for moment-closure")?;
            let it0 = a.itilde0.unwrap_or(c * a.i0);
            integrate_moment_closure(a.lambda, a.gamma, s0, a.i0, it0, c, &grid, &opts)?
        }
        System::Miller => {
            let (h, p_i0) = network()?;
            integrate_miller(&h, a.lambda, a.gamma, 1.0, p_i0, a.i0, 0.0, &grid, &opts)?
        }
        System::Volz => {
            let (h, p_i0) = network()?;
            integrate_volz(&h, a.lambda, a.gamma, p_i0, 1.0 - p_i0, a.i0, &grid, &opts)?
        }
        System::BallNeal => {
            let (mu_s, _) = network()?;
            let mu_is = mu_s.scaled(a.i0 / s0)?;
            integrate_ball_neal(&mu_s, &mu_is, &DegreeMeasure::zero(), a.lambda, a.gamma, a.k_max, &grid, &opts)?
                .aggregates
        }
    })
}

pub fn run(a: &OdeArgs, prov: Provenance) -> Result<()> {
    let traj = integrate(a)?;
    let mut header = prov.lines();
    if let Some(t) = traj.halted_at {
        header.push(format!("# halted: {t}"));
    }
    if traj.degenerate {
        header.push("# degenerate: no infection pressure".to_string());
    }
    emit(a.out.as_deref(), &traj.to_csv(&header))
}

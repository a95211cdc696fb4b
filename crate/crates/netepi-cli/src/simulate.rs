use std::fs;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Args;
use netepi::branching::extinction_probability;
use netepi::episim::{
    simulate_cm_online, simulate_household_sir, simulate_sir, track_measures, EpidemicParams, MeasureTrajectory,
    OnlineInit, OnlineOptions, SimOptions,
};
use netepi::graphgen::{empirical_degree_distribution, fix_parity, Graph};
use netepi::measures::{DegreeDistribution, DegreeMeasure};
use netepi::numeric::integrate;
use netepi::ode::uniform_grid;
use netepi::rng::{child_seed, seeded};
use rand::seq::index::sample;
use rayon::prelude::*;

use crate::common::{emit, load_graph, parse_degree_dist, read, Format, Provenance, Report};

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Edge-list file to simulate on.
    #[arg(long, required_unless_present = "online")]
    graph: Option<PathBuf>,
    /// Attribute sidecar for --graph (needed with --lambda-h).
    #[arg(long, requires = "graph")]
    attributes: Option<PathBuf>,
    /// Run on a configuration model revealed during the epidemic.
    #[arg(long, conflicts_with = "graph")]
    online: bool,
    /// Degree law for --online, sampled afresh for each replica.
    #[arg(long)]
    degree_dist: Option<String>,
    /// Fixed degree census for --online (`degree count` per line).
    #[arg(long, conflicts_with = "degree_dist")]
    census: Option<PathBuf>,
    /// Population size for --online with --degree-dist.
    #[arg(long)]
    n: Option<usize>,
    /// Per-edge infection rate.
    #[arg(long)]
    lambda: f64,
    /// Recovery rate.
    #[arg(long)]
    gamma: f64,
    /// Rate of leaving the latent state (SEIR).
    #[arg(long)]
    delta: Option<f64>,
    /// Within-household infection rate.
    #[arg(long)]
    lambda_h: Option<f64>,
    /// Number of index cases.
    #[arg(long, default_value_t = 1)]
    initial: usize,
    #[arg(long, default_value_t = 1)]
    replicas: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads; output order does not depend on it.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// End of the sampling grid.
    #[arg(long, default_value_t = 20.0)]
    t_end: f64,
    /// Number of sampling times.
    #[arg(long, default_value_t = 201)]
    points: usize,
    /// Runs infecting fewer than this fraction of the population count as extinct.
    #[arg(long, default_value_t = 0.05)]
    major_fraction: f64,
    /// Directory for the per-replica trajectory CSVs.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Summary output; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

enum Setting {
    Frozen(Graph),
    Online { dist: Option<DegreeDistribution>, census: Option<DegreeMeasure>, n: usize },
}

struct Replica {
    final_size: usize,
    trajectory: MeasureTrajectory,
}

impl Setting {
    fn size(&self) -> usize {
        match self {
            Setting::Frozen(g) => g.vertex_count(),
            Setting::Online { n, .. } => *n,
        }
    }

    fn degree_law(&self) -> Result<DegreeDistribution> {
        Ok(match self {
            Setting::Frozen(g) => empirical_degree_distribution(g),
            Setting::Online { dist: Some(d), .. } => d.clone(),
            Setting::Online { census: Some(c), .. } => DegreeDistribution::normalized(c.clone())?,
            Setting::Online { .. } => unreachable!("online runs carry a law or a census"),
        })
    }

    fn run(&self, a: &SimulateArgs, p: &EpidemicParams, grid: &[f64], replica: usize) -> Result<Replica> {
        let s = child_seed(a.seed, replica as u64);
        match self {
            Setting::Frozen(g) => {
                let mut rng = seeded(s);
                if a.initial > g.vertex_count() {
                    bail!("--initial exceeds the number of vertices");
                }
                let initial = sample(&mut rng, g.vertex_count(), a.initial).into_vec();
                let opts = SimOptions { t_max: f64::INFINITY, max_infections: None };
                let log = if p.lambda_h.is_some() {
                    simulate_household_sir(g, p, &initial, child_seed(s, 1), &opts)?
                } else {
                    simulate_sir(g, p, &initial, child_seed(s, 1))?
                };
                let trajectory = track_measures(&log, g, grid)?;
                Ok(Replica { final_size: log.total_infected(), trajectory })
            }
            Setting::Online { dist, census, n } => {
                let census = match (census, dist) {
                    (Some(c), _) => c.clone(),
                    (None, Some(d)) => {
                        let mut rng = seeded(s);
                        let sampler = d.sampler();
                        let mut deg: Vec<usize> = (0..*n).map(|_| sampler.sample(&mut rng)).collect();
                        if deg.iter().sum::<usize>() % 2 == 1 {
                            fix_parity(&mut deg, &mut rng);
                        }
                        DegreeMeasure::census(deg)
                    }
                    (None, None) => unreachable!("checked when parsing"),
                };
                let init = OnlineInit::reveal_index_cases(&census, a.initial, child_seed(s, 1))?;
                let opts = OnlineOptions { sample_times: grid.to_vec(), ..OnlineOptions::default() };
                let (log, trajectory) = simulate_cm_online(&init, p, child_seed(s, 2), &opts)?;
                Ok(Replica { final_size: log.total_infected(), trajectory })
            }
        }
    }
}

/// Probability that a uniformly chosen index case starts no major outbreak,
/// given the edge-level extinction probability `z`.
fn index_extinction(p: &DegreeDistribution, z: f64, lambda: f64, gamma: f64) -> Result<f64> {
    let r = lambda / gamma;
    Ok(integrate(|u| p.pgf_eval((z + u.powf(r) * (1.0 - z)).min(1.0), 0).unwrap_or(f64::NAN), 0.0, 1.0, 1e-12, 1e-10)?)
}

pub fn run(a: &SimulateArgs, prov: Provenance) -> Result<()> {
    let prov = prov.with_seed(a.seed).with_replicas(a.replicas);
    if a.replicas == 0 {
        bail!("--replicas must be positive");
    }
    if a.jobs == 0 {
        bail!("--jobs must be positive");
    }
    if a.points < 2 || !(a.t_end > 0.0) {
        bail!("need --points >= 2 and --t-end > 0");
    }
    let params = EpidemicParams { lambda: a.lambda, gamma: a.gamma, delta: a.delta, lambda_h: a.lambda_h };
    params.validate()?;
    let setting = if a.online {
        if let Some(path) = &a.census {
            let c = DegreeMeasure::parse_text(&read(path)?).with_context(|| format!("in {}", path.display()))?;
            let n = c.integer_counts()?.iter().sum::<u64>() as usize;
            Setting::Online { dist: None, census: Some(c), n }
        } else {
            let dist =
                parse_degree_dist(a.degree_dist.as_deref().context("--online needs --degree-dist or --census")?)?;
            Setting::Online { dist: Some(dist), census: None, n: a.n.context("--online with --degree-dist needs --n")? }
        }
    } else {
        let g = load_graph(a.graph.as_deref().expect("clap requires --graph"), a.attributes.as_ref())?;
        if a.lambda_h.is_some() && g.households.is_none() {
            bail!("--lambda-h needs household attributes");
        }
        Setting::Frozen(g)
    };

    let grid = uniform_grid(0.0, a.t_end, a.points);
    let pool = rayon::ThreadPoolBuilder::new().num_threads(a.jobs).build()?;
    let replicas: Vec<Replica> = pool.install(|| {
        (0..a.replicas).into_par_iter().map(|r| setting.run(a, &params, &grid, r)).collect::<Result<_>>()
    })?;

    if let Some(dir) = &a.out_dir {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        for (r, rep) in replicas.iter().enumerate() {
            let mut header = prov.lines();
            header.push(format!("# replica: {r}"));
            emit(Some(&dir.join(format!("replica_{r:04}.csv"))), &rep.trajectory.to_csv(&header))?;
        }
    }

    let n = setting.size();
    let threshold = (a.major_fraction * n as f64).ceil().max(1.0) as usize;
    let mut report = Report::default();
    for (r, rep) in replicas.iter().enumerate() {
        report.push("final_size", &r.to_string(), rep.final_size);
    }
    let sizes: Vec<f64> = replicas.iter().map(|r| r.final_size as f64).collect();
    let extinct = replicas.iter().filter(|r| r.final_size < threshold).count();
    report.push("summary", "population", n);
    report.push("summary", "replicas", a.replicas);
    report.push("summary", "mean_final_size", sizes.iter().sum::<f64>() / sizes.len() as f64);
    report.push("summary", "major_threshold", threshold);
    report.push("summary", "extinction_fraction", extinct as f64 / a.replicas as f64);
    let major: Vec<f64> = sizes.iter().copied().filter(|&s| s >= threshold as f64).collect();
    if !major.is_empty() {
        report.push("summary", "mean_major_final_fraction", major.iter().sum::<f64>() / major.len() as f64 / n as f64);
    }
    if params.delta.is_none() && params.lambda_h.is_none() && params.lambda > 0.0 {
        let law = setting.degree_law()?;
        if law.mean() > 0.0 {
            let z = extinction_probability(&law, params.lambda, params.gamma)?;
            let per_index = index_extinction(&law, z, params.lambda, params.gamma)?;
            report.push("branching", "edge_extinction", z);
            report.push("branching", "index_case_extinction", per_index);
            report.push("branching", "predicted_extinction_fraction", per_index.powi(a.initial as i32));
        }
    }
    emit(a.out.as_deref(), &report.render(&prov, a.format))
}

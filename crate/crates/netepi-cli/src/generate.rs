use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use netepi::graphgen::{generate, write_attributes, write_edge_list, Family, GeneratorSpec};

use crate::common::{emit, parse_degree_dist, parse_matrix, parse_vector, read, Provenance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyKind {
    Complete,
    Er,
    Sbm,
    Cm,
    Household,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GlobalKind {
    Er,
    Cm,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long, value_enum)]
    family: FamilyKind,
    /// Number of vertices.
    #[arg(long)]
    n: usize,
    /// Edge probability (er, or the er global layer of household).
    #[arg(long)]
    p: Option<f64>,
    /// Type fractions for sbm, e.g. `0.5,0.5`.
    #[arg(long)]
    rho: Option<String>,
    /// Edge probabilities between types for sbm, e.g. `0.1,0.01;0.01,0.1`.
    #[arg(long)]
    pi: Option<String>,
    /// Degree law for cm, e.g. `poisson:5`.
    #[arg(long)]
    degree_dist: Option<String>,
    /// File with one degree per line, used by cm instead of --degree-dist.
    #[arg(long, conflicts_with = "degree_dist")]
    degrees: Option<PathBuf>,
    /// Household size law, e.g. `file:sizes.txt`.
    #[arg(long)]
    household_sizes: Option<String>,
    /// Global layer of the household graph.
    #[arg(long, value_enum, default_value = "er")]
    global: GlobalKind,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Edge-list output; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Attribute sidecar output (`vertex,type,household`).
    #[arg(long)]
    attributes_out: Option<PathBuf>,
}

impl GenerateArgs {
    fn er(&self) -> Result<Family> {
        Ok(Family::ErdosRenyi { p: self.p.context("--p is required")? })
    }

    fn cm(&self) -> Result<Family> {
        if let Some(path) = &self.degrees {
            let degrees = read(path)?
                .lines()
                .enumerate()
                .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
                .map(|(i, l)| {
                    l.trim().parse::<usize>().with_context(|| format!("{}:{}: bad degree", path.display(), i + 1))
                })
                .collect::<Result<Vec<_>>>()?;
            if degrees.len() != self.n {
                bail!("{} lists {} degrees but --n is {}", path.display(), degrees.len(), self.n);
            }
            return Ok(Family::ConfigSequence { degrees });
        }
        let spec = self.degree_dist.as_deref().context("--degree-dist or --degrees is required")?;
        Ok(Family::ConfigDistribution { dist: parse_degree_dist(spec)? })
    }

    fn family(&self) -> Result<Family> {
        Ok(match self.family {
            FamilyKind::Complete => Family::Complete,
            FamilyKind::Er => self.er()?,
            FamilyKind::Sbm => Family::Sbm {
                rho: parse_vector(self.rho.as_deref().context("--rho is required")?)?,
                pi: parse_matrix(self.pi.as_deref().context("--pi is required")?)?,
            },
            FamilyKind::Cm => self.cm()?,
            FamilyKind::Household => {
                let sizes =
                    parse_degree_dist(self.household_sizes.as_deref().context("--household-sizes is required")?)?;
                let global = match self.global {
                    GlobalKind::Er => self.er()?,
                    GlobalKind::Cm => self.cm()?,
                };
                Family::Household { sizes, global: Box::new(global) }
            }
        })
    }
}

pub fn run(a: &GenerateArgs, prov: Provenance) -> Result<()> {
    let prov = prov.with_seed(a.seed);
    let g = generate(&GeneratorSpec { n: a.n, family: a.family()?, seed: a.seed })?;
    emit(a.out.as_deref(), &write_edge_list(&g, &prov.lines()))?;
    if let Some(path) = &a.attributes_out {
        emit(Some(path), &write_attributes(&g, &prov.lines()))?;
    }
    Ok(())
}

use std::path::PathBuf;

use anyhow::{bail, Result};
use clap::Args;
use netepi::branching::{
    extinction_probability, indicators, network_r0_from_alpha, overestimation_ratios, InfectiousPeriod, Model,
};
use serde_json::{json, Value};

use crate::common::{emit, parse_degree_dist, parse_matrix, parse_vector, Format, Provenance, Table};

#[derive(Debug, Args)]
pub struct IndicatorsArgs {
    /// Infection rate: aggregate for the complete graph, per edge on a configuration model.
    #[arg(long)]
    lambda: f64,
    #[arg(long)]
    gamma: f64,
    /// Mean excess degree of a configuration model.
    #[arg(long)]
    kappa: Option<f64>,
    /// Degree law of a configuration model; also gives the extinction probability.
    #[arg(long, conflicts_with = "kappa")]
    degree_dist: Option<String>,
    /// Type-to-type rate matrix of a block model, e.g. `2,0.5;0.5,2`.
    #[arg(long, requires = "rho")]
    sbm_lambda: Option<String>,
    /// Type fractions of a block model.
    #[arg(long, requires = "sbm_lambda")]
    rho: Option<String>,
    /// Observed growth rate; adds the overestimation ratios of homogeneous mixing.
    #[arg(long)]
    alpha: Option<f64>,
    /// Infectious period law for --alpha: `exp`, `gamma:MEAN:SD` or `det:T`.
    #[arg(long, default_value = "exp")]
    period: String,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

fn parse_period(s: &str, gamma: f64) -> Result<InfectiousPeriod> {
    let parts: Vec<&str> = s.split(':').collect();
    let num =
        |x: &str| -> Result<f64> { x.parse::<f64>().map_err(|_| anyhow::anyhow!("bad number `{x}` in --period")) };
    let p = match parts.as_slice() {
        ["exp"] => InfectiousPeriod::Exponential { gamma },
        ["gamma", m, sd] => InfectiousPeriod::Gamma { mean: num(m)?, sd: num(sd)? },
        ["det", t] => InfectiousPeriod::Deterministic { duration: num(t)? },
        _ => bail!("--period must be exp, gamma:MEAN:SD or det:T"),
    };
    p.validate()?;
    Ok(p)
}

pub fn run(a: &IndicatorsArgs, prov: Provenance) -> Result<()> {
    let mut table = Table::new(&["model", "alpha", "R0", "v_c", "subcritical", "extinction", "ratio_R0", "ratio_v_c"]);
    let mut push = |name: &str, m: &Model, extinction: Value| -> Result<()> {
        let ind = indicators(m)?;
        table.rows.push(vec![
            json!(name),
            json!(ind.alpha),
            json!(ind.r0),
            json!(ind.vc),
            json!(ind.subcritical),
            extinction,
            Value::Null,
            Value::Null,
        ]);
        Ok(())
    };
    push("complete", &Model::Complete { lambda: a.lambda, gamma: a.gamma }, Value::Null)?;
    let mut kappa = a.kappa;
    if let Some(spec) = &a.degree_dist {
        let p = parse_degree_dist(spec)?;
        let m = Model::cm_from_distribution(&p, a.lambda, a.gamma)?;
        if let Model::Cm { kappa: k, .. } = m {
            kappa = Some(k);
        }
        push("configuration", &m, json!(extinction_probability(&p, a.lambda, a.gamma)?))?;
    } else if let Some(k) = a.kappa {
        push("configuration", &Model::Cm { kappa: k, lambda: a.lambda, gamma: a.gamma }, Value::Null)?;
    }
    if let (Some(l), Some(r)) = (&a.sbm_lambda, &a.rho) {
        push("block", &Model::Sbm { lambda: parse_matrix(l)?, rho: parse_vector(r)?, gamma: a.gamma }, Value::Null)?;
    }
    if let Some(alpha) = a.alpha {
        let kappa = match kappa {
            Some(k) => k,
            None => bail!("--alpha needs --kappa or --degree-dist"),
        };
        let period = parse_period(&a.period, a.gamma)?;
        let (rr, rv) = overestimation_ratios(alpha, kappa, &period)?;
        let r0 = network_r0_from_alpha(alpha, kappa, &period)?;
        table.rows.push(vec![
            json!("from_growth_rate"),
            json!(alpha),
            json!(r0),
            json!(1.0 - 1.0 / r0),
            json!(r0 <= 1.0),
            Value::Null,
            json!(rr),
            json!(rv),
        ]);
    }
    emit(a.out.as_deref(), &table.render(&prov, a.format))
}

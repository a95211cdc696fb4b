use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Args;

use crate::common::{emit, parse_numeric_csv, read, Format, Provenance, Report};

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Trajectory CSVs to average; count columns (S, I, R, ...) are divided by the population.
    #[arg(long, required = true, num_args = 1..)]
    sim: Vec<PathBuf>,
    /// Reference trajectory, typically from `netepi ode`.
    #[arg(long)]
    reference: PathBuf,
    /// Columns to compare; defaults to every shared column.
    #[arg(long, value_delimiter = ',')]
    columns: Vec<String>,
    /// Drop simulated runs whose final removed fraction is below this.
    #[arg(long, default_value_t = 0.0)]
    exclude_below: f64,
    /// Largest acceptable sup distance.
    #[arg(long, default_value_t = 0.05)]
    threshold: f64,
    /// Exit with status 1 when a column fails.
    #[arg(long)]
    strict: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

/// A trajectory with a time column and per-capita value columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub times: Vec<f64>,
    pub names: Vec<String>,
    pub values: Vec<Vec<f64>>,
}

const COUNT_COLUMNS: [&str; 4] = ["S", "E", "I", "R"];
const EDGE_COLUMNS: [&str; 3] = ["NS", "NIS", "NRS"];

impl Series {
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let (header, rows) = parse_numeric_csv(text, origin)?;
        let t = header.iter().position(|h| h == "t").with_context(|| format!("{origin}: no `t` column"))?;
        if rows.is_empty() {
            bail!("{origin}: no data rows");
        }
        let times: Vec<f64> = rows.iter().map(|r| r[t]).collect();
        if times.windows(2).any(|w| w[1] < w[0]) {
            bail!("{origin}: times are not sorted");
        }
        let cols: Vec<usize> = (0..header.len()).filter(|&j| j != t).collect();
        let mut names: Vec<String> = cols.iter().map(|&j| header[j].clone()).collect();
        let mut values: Vec<Vec<f64>> = cols.iter().map(|&j| rows.iter().map(|r| r[j]).collect()).collect();
        // Simulator output holds counts; rescale by the population.
        if names.iter().any(|n| n == "S") {
            let n: f64 =
                names.iter().zip(&values).filter(|(n, _)| COUNT_COLUMNS.contains(&n.as_str())).map(|(_, v)| v[0]).sum();
            if !(n > 0.0) {
                bail!("{origin}: population is zero");
            }
            for (name, col) in names.iter_mut().zip(values.iter_mut()) {
                if COUNT_COLUMNS.contains(&name.as_str()) {
                    *name = name.to_lowercase();
                } else if !EDGE_COLUMNS.contains(&name.as_str()) {
                    continue;
                }
                col.iter_mut().for_each(|x| *x /= n);
            }
        }
        Ok(Series { times, names, values })
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.names.iter().position(|n| n == name).map(|j| self.values[j].as_slice())
    }

    fn at(&self, col: &[f64], t: f64) -> f64 {
        let k = self.times.partition_point(|&x| x <= t);
        if k == 0 {
            return col[0];
        }
        if k == self.times.len() {
            return col[k - 1];
        }
        let (t0, t1) = (self.times[k - 1], self.times[k]);
        if t1 == t0 {
            return col[k];
        }
        col[k - 1] + (col[k] - col[k - 1]) * (t - t0) / (t1 - t0)
    }
}

/// Pointwise mean of series sampled at identical times.
pub fn average(series: &[Series]) -> Result<Series> {
    let first = series.first().context("no trajectories left to average")?;
    let mut out = first.clone();
    for s in &series[1..] {
        if s.times != first.times || s.names != first.names {
            bail!("simulated trajectories must share their time grid and columns");
        }
        for (acc, col) in out.values.iter_mut().zip(&s.values) {
            acc.iter_mut().zip(col).for_each(|(a, b)| *a += b);
        }
    }
    let k = series.len() as f64;
    out.values.iter_mut().flatten().for_each(|x| *x /= k);
    Ok(out)
}

/// Sup and L² distances of one column over the shared time range, after
/// linear interpolation onto the union of both grids.
pub fn distances(a: &Series, b: &Series, name: &str) -> Result<(f64, f64)> {
    let ca = a.column(name).with_context(|| format!("column `{name}` missing from the simulated trajectory"))?;
    let cb = b.column(name).with_context(|| format!("column `{name}` missing from the reference"))?;
    let lo = a.times[0].max(b.times[0]);
    let hi = a.times[a.times.len() - 1].min(b.times[b.times.len() - 1]);
    if lo > hi {
        bail!(
            "time ranges [{}, {}] and [{}, {}] do not overlap",
            a.times[0],
            a.times[a.times.len() - 1],
            b.times[0],
            b.times[b.times.len() - 1]
        );
    }
    let mut ts: Vec<f64> = a.times.iter().chain(&b.times).copied().filter(|&t| t >= lo && t <= hi).collect();
    ts.push(lo);
    ts.push(hi);
    ts.sort_by(f64::total_cmp);
    ts.dedup();
    let diff: Vec<f64> = ts.iter().map(|&t| a.at(ca, t) - b.at(cb, t)).collect();
    let sup = diff.iter().fold(0.0f64, |m, d| m.max(d.abs()));
    let l2 = if ts.len() == 1 {
        diff[0].abs()
    } else {
        // Trapezoid rule on the squared difference.
        let s: f64 =
            ts.windows(2).zip(diff.windows(2)).map(|(t, d)| 0.5 * (t[1] - t[0]) * (d[0] * d[0] + d[1] * d[1])).sum();
        s.sqrt()
    };
    Ok((sup, l2))
}

pub fn run(a: &CompareArgs, prov: Provenance) -> Result<bool> {
    let mut sims = Vec::new();
    let mut excluded = 0usize;
    for path in &a.sim {
        let s = Series::parse(&read(path)?, &path.display().to_string())?;
        let last_r = s.column("r").map(|c| c[c.len() - 1]);
        if last_r.is_some_and(|r| r < a.exclude_below) {
            excluded += 1;
            continue;
        }
        sims.push(s);
    }
    let sim = average(&sims)?;
    let reference = Series::parse(&read(&a.reference)?, &a.reference.display().to_string())?;
    let columns: Vec<String> = if a.columns.is_empty() {
        sim.names.iter().filter(|n| reference.column(n).is_some()).cloned().collect()
    } else {
        a.columns.clone()
    };
    if columns.is_empty() {
        bail!("the trajectories share no columns");
    }
    let mut report = Report::default();
    report.push("input", "trajectories", sims.len());
    report.push("input", "excluded", excluded);
    report.push("input", "threshold", a.threshold);
    let mut all = true;
    for c in &columns {
        let (sup, l2) = distances(&sim, &reference, c)?;
        let pass = sup <= a.threshold;
        all &= pass;
        report.push(c, "sup", sup);
        report.push(c, "l2", l2);
        report.push(c, "pass", pass);
    }
    report.push("overall", "pass", all);
    emit(a.out.as_deref(), &report.render(&prov, a.format))?;
    Ok(all || !a.strict)
}

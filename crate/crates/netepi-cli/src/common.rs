use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::ValueEnum;
use netepi::graphgen::{apply_attributes, parse_edge_list, Graph};
use netepi::measures::{DegreeDistribution, DegreeMeasure};
use serde_json::{json, Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Csv,
    Json,
}

/// Header lines identifying the tool, the invocation and the seed.
#[derive(Debug, Clone)]
pub struct Provenance {
    pub args: String,
    pub seed: Option<u64>,
    pub replicas: Option<usize>,
}

impl Provenance {
    pub fn new(args: &[String]) -> Self {
        Provenance { args: args.join(" "), seed: None, replicas: None }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn with_replicas(mut self, replicas: usize) -> Self {
        self.replicas = Some(replicas);
        self
    }

    pub fn lines(&self) -> Vec<String> {
        let mut out = vec![
            format!("# netepi {}", env!("CARGO_PKG_VERSION")),
            format!("# args: {}", self.args),
            format!("# seed: {}", self.seed.map_or("none".to_string(), |s| s.to_string())),
        ];
        if let Some(r) = self.replicas {
            out.push(format!("# replicas: {r}"));
        }
        out
    }

    fn json(&self) -> Value {
        let mut m = Map::new();
        m.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
        m.insert("args".into(), json!(self.args));
        m.insert("seed".into(), json!(self.seed));
        if let Some(r) = self.replicas {
            m.insert("replicas".into(), json!(r));
        }
        Value::Object(m)
    }
}

/// Report as `section,key,value` rows.
#[derive(Debug, Default)]
pub struct Report {
    rows: Vec<(String, String, Value)>,
}

impl Report {
    pub fn push(&mut self, section: &str, key: &str, value: impl Into<Value>) {
        self.rows.push((section.to_string(), key.to_string(), value.into()));
    }

    pub fn render(&self, prov: &Provenance, format: Format) -> String {
        let cell = |v: &Value| match v {
            Value::String(s) => s.clone(),
            Value::Null => String::new(),
            v => v.to_string(),
        };
        let mut out = String::new();
        match format {
            Format::Json => {
                let rows: Vec<Value> =
                    self.rows.iter().map(|(s, k, v)| json!({"section": s, "key": k, "value": v})).collect();
                let doc = json!({"provenance": prov.json(), "rows": rows});
                out = serde_json::to_string_pretty(&doc).expect("report serializes");
                out.push('\n');
            }
            Format::Csv => {
                for l in prov.lines() {
                    let _ = writeln!(out, "{l}");
                }
                out.push_str("section,key,value\n");
                for (s, k, v) in &self.rows {
                    let _ = writeln!(out, "{s},{k},{}", csv_field(&cell(v)));
                }
            }
            Format::Text => {
                for l in prov.lines() {
                    let _ = writeln!(out, "{l}");
                }
                let ws = self.rows.iter().map(|r| r.0.len()).max().unwrap_or(0);
                let wk = self.rows.iter().map(|r| r.1.len()).max().unwrap_or(0);
                for (s, k, v) in &self.rows {
                    let _ = writeln!(out, "{s:<ws$}  {k:<wk$}  {}", cell(v));
                }
            }
        }
        out
    }
}

/// A table with named columns, rendered as aligned text, CSV or JSON records.
#[derive(Debug)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn render(&self, prov: &Provenance, format: Format) -> String {
        let text_mode = format == Format::Text;
        let cell = |v: &Value| match v {
            Value::String(s) => s.clone(),
            Value::Null => String::new(),
            Value::Number(n) if text_mode => n.as_f64().map_or(n.to_string(), fmt_num),
            v => v.to_string(),
        };
        let mut out = String::new();
        match format {
            Format::Json => {
                let rows: Vec<Value> = self
                    .rows
                    .iter()
                    .map(|r| Value::Object(self.columns.iter().cloned().zip(r.iter().cloned()).collect()))
                    .collect();
                out = serde_json::to_string_pretty(&json!({"provenance": prov.json(), "rows": rows}))
                    .expect("table serializes");
                out.push('\n');
            }
            Format::Csv => {
                for l in prov.lines() {
                    let _ = writeln!(out, "{l}");
                }
                out.push_str(&self.columns.join(","));
                out.push('\n');
                for r in &self.rows {
                    let cells: Vec<String> = r.iter().map(|v| csv_field(&cell(v))).collect();
                    out.push_str(&cells.join(","));
                    out.push('\n');
                }
            }
            Format::Text => {
                for l in prov.lines() {
                    let _ = writeln!(out, "{l}");
                }
                let text: Vec<Vec<String>> = self.rows.iter().map(|r| r.iter().map(cell).collect()).collect();
                let widths: Vec<usize> = (0..self.columns.len())
                    .map(|j| text.iter().map(|r| r[j].len()).chain([self.columns[j].len()]).max().unwrap_or(0))
                    .collect();
                let line = |cells: &[String]| {
                    let padded: Vec<String> = cells.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
                    padded.join("  ").trim_end().to_string()
                };
                let _ = writeln!(out, "{}", line(&self.columns));
                for r in &text {
                    let _ = writeln!(out, "{}", line(r));
                }
            }
        }
        out
    }
}

fn fmt_num(x: f64) -> String {
    if x == x.trunc() && x.abs() < 1e15 {
        format!("{x}")
    } else {
        format!("{x:.6}")
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Writes to `path`, or to stdout when absent.
pub fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

pub fn load_graph(path: &Path, attributes: Option<&PathBuf>) -> Result<Graph> {
    let mut g = parse_edge_list(&read(path)?).with_context(|| format!("in {}", path.display()))?;
    if let Some(a) = attributes {
        apply_attributes(&mut g, &read(a)?).with_context(|| format!("in {}", a.display()))?;
    }
    Ok(g)
}

/// Parses `poisson:A`, `geometric:R`, `dirac:K`, `binomial:N:P`,
/// `powerlaw:ALPHA:KMIN[:KMAX]` or `file:PATH` (one `degree mass` per line).
pub fn parse_degree_dist(spec: &str) -> Result<DegreeDistribution> {
    let (kind, rest) =
        spec.split_once(':').with_context(|| format!("degree law `{spec}` needs the form kind:params"))?;
    if kind == "file" {
        let m = DegreeMeasure::parse_text(&read(Path::new(rest))?).with_context(|| format!("in {rest}"))?;
        return Ok(DegreeDistribution::normalized(m)?);
    }
    let args: Vec<&str> = rest.split(':').collect();
    let f = |i: usize| -> Result<f64> {
        args.get(i)
            .with_context(|| format!("degree law `{spec}` is missing parameter {}", i + 1))?
            .parse::<f64>()
            .with_context(|| format!("bad number in degree law `{spec}`"))
    };
    let u = |i: usize| -> Result<usize> {
        args.get(i)
            .with_context(|| format!("degree law `{spec}` is missing parameter {}", i + 1))?
            .parse::<usize>()
            .with_context(|| format!("bad integer in degree law `{spec}`"))
    };
    let expect = |n: &[usize]| -> Result<()> {
        if !n.contains(&args.len()) {
            bail!("degree law `{spec}` has {} parameters", args.len());
        }
        Ok(())
    };
    Ok(match kind {
        "poisson" => {
            expect(&[1])?;
            DegreeDistribution::poisson(f(0)?)?
        }
        "geometric" => {
            expect(&[1])?;
            DegreeDistribution::geometric(f(0)?)?
        }
        "dirac" | "regular" => {
            expect(&[1])?;
            DegreeDistribution::dirac(u(0)?)
        }
        "binomial" => {
            expect(&[2])?;
            DegreeDistribution::binomial(u(0)? as u64, f(1)?)?
        }
        "powerlaw" => {
            expect(&[2, 3])?;
            let kmax = if args.len() == 3 { Some(u(2)?) } else { None };
            DegreeDistribution::power_law(f(0)?, u(1)?, kmax)?
        }
        _ => bail!("unknown degree law `{kind}`"),
    })
}

/// Comma-separated numbers.
pub fn parse_vector(s: &str) -> Result<Vec<f64>> {
    s.split(',').map(|x| x.trim().parse::<f64>().with_context(|| format!("bad number `{x}` in `{s}`"))).collect()
}

/// Rows separated by `;`, entries by `,`.
pub fn parse_matrix(s: &str) -> Result<Vec<Vec<f64>>> {
    s.split(';').map(parse_vector).collect()
}

/// Reads a CSV with a header row; lines starting with `#` are skipped.
pub fn parse_numeric_csv(text: &str, origin: &str) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut header: Option<Vec<String>> = None;
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        match &header {
            None => header = Some(fields.iter().map(|s| s.to_string()).collect()),
            Some(h) => {
                if fields.len() != h.len() {
                    bail!("{origin}:{}: expected {} fields, found {}", i + 1, h.len(), fields.len());
                }
                let row = fields
                    .iter()
                    .map(|f| f.parse::<f64>().with_context(|| format!("{origin}:{}: bad number `{f}`", i + 1)))
                    .collect::<Result<Vec<f64>>>()?;
                rows.push(row);
            }
        }
    }
    let header = header.with_context(|| format!("{origin}: no header row"))?;
    Ok((header, rows))
}

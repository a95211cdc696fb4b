use std::fmt::Write as _;
use std::path::PathBuf;

use anyhow::Result;
use clap::Args;
use netepi::graphgen::{empirical_degree_distribution, simplify, Graph};
use netepi::netstat::{
    chi2_homogeneity, cluster_modularity, components, fit_power_law_kl, geodesic_stats, hill_plateau, layout,
    local_structure, mixing, modularity, null_modularity, refine_hierarchically, Partition, ALPHA_CRITICAL,
    ALPHA_FINITE_MEAN,
};

use crate::common::{emit, load_graph, Format, Provenance, Report};

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[arg(long)]
    graph: PathBuf,
    /// Attribute sidecar (`vertex,type,household`).
    #[arg(long)]
    attributes: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Rewired graphs in the modularity null sample.
    #[arg(long, default_value_t = 100)]
    null_samples: usize,
    /// Smallest degree of the power-law tail fit.
    #[arg(long, default_value_t = 1)]
    k0: usize,
    /// Smallest tail size scanned by the Hill estimator.
    #[arg(long, default_value_t = 100)]
    hill_min_tail: usize,
    /// Depth of the significance-tested refinement of each cluster.
    #[arg(long, default_value_t = 0)]
    refine_depth: usize,
    /// Coordinates output (`vertex,x,y`) for the largest component.
    #[arg(long)]
    layout_out: Option<PathBuf>,
    /// Preferred edge length of the layout.
    #[arg(long, default_value_t = 1.0)]
    layout_delta: f64,
    #[arg(long, default_value_t = 500)]
    layout_iters: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

fn restrict(labels: &Option<Vec<u32>>, vertices: &[usize]) -> Option<Partition> {
    labels.as_ref().map(|l| Partition::from_labels(&vertices.iter().map(|&v| l[v] as usize).collect::<Vec<_>>()))
}

fn attribute_rows(report: &mut Report, name: &str, g: &Graph, p: &Partition) -> Result<()> {
    let m = mixing(g, p)?;
    report.push(name, "classes", p.count);
    report.push(name, "modularity", m.q);
    report.push(name, "assortativity", m.r);
    Ok(())
}

pub fn run(a: &AnalyzeArgs, prov: Provenance) -> Result<()> {
    let prov = prov.with_seed(a.seed);
    let full = load_graph(&a.graph, a.attributes.as_ref())?;
    let mut report = Report::default();
    report.push("graph", "vertices", full.vertex_count());
    report.push("graph", "edges", full.edge_count());
    report.push("graph", "simple", full.is_simple());

    let comps = components(&full);
    let sizes = comps.sizes();
    report.push("components", "count", sizes.len());
    report.push("components", "largest", sizes.first().copied().unwrap_or(0));
    report.push("components", "second", sizes.get(1).copied().unwrap_or(0));
    report.push("components", "giant", comps.giant);

    let vertices = comps.sets.first().cloned().unwrap_or_default();
    let g = simplify(&full.induced_subgraph(&vertices));

    let geo = geodesic_stats(&g);
    report.push("geodesics", "harmonic_mean", geo.harmonic_mean);
    report.push("geodesics", "arithmetic_mean", geo.arithmetic_mean);
    report.push("geodesics", "diameter", geo.diameter);
    report.push("geodesics", "connected_pairs", geo.connected_pairs);

    let local = local_structure(&g)?;
    report.push("local", "triangles", local.triangles);
    report.push("local", "connected_triples", local.triples);
    report.push("local", "clustering_coefficient", local.clustering_coefficient);
    report.push("local", "articulation_points", local.articulation_points.len());

    let types = restrict(&full.types, &vertices);
    if let Some(p) = &types {
        attribute_rows(&mut report, "mixing_type", &g, p)?;
    }
    if let Some(p) = restrict(&full.households, &vertices) {
        attribute_rows(&mut report, "mixing_household", &g, &p)?;
    }

    if g.edge_count() >= 2 {
        let clusters = cluster_modularity(&g, a.seed);
        let q = modularity(&g, &clusters)?;
        report.push("clustering", "clusters", clusters.count);
        report.push("clustering", "modularity", q);
        if a.null_samples > 0 {
            let null = null_modularity(&g, a.null_samples, a.seed.wrapping_add(1))?;
            let exceed = null.q.iter().filter(|&&x| x >= q).count();
            report.push("clustering", "null_max", null.max);
            report.push("clustering", "null_mean", null.mean);
            report.push("clustering", "p_value", (1 + exceed) as f64 / (1 + null.q.len()) as f64);
            report.push("clustering", "short_burn_in", null.short_burn_in);
        }
        if let Some(t) = &types {
            let mut table = vec![vec![0.0; t.count]; clusters.count];
            for (c, ty) in clusters.labels.iter().zip(&t.labels) {
                table[*c][*ty] += 1.0;
            }
            if let Ok(chi) = chi2_homogeneity(&table) {
                report.push("clustering", "type_chi2", chi.statistic);
                report.push("clustering", "type_chi2_dof", chi.dof);
                report.push("clustering", "type_chi2_p_value", chi.p_value);
            }
        }
        if a.refine_depth > 0 {
            let tree =
                refine_hierarchically(&g, &clusters, a.seed.wrapping_add(2), a.refine_depth, a.null_samples.max(1))?;
            let leaves: usize = tree.iter().map(|n| n.leaves().len()).sum();
            let significant = tree.iter().filter(|n| n.significant).count();
            report.push("refinement", "significant_clusters", significant);
            report.push("refinement", "leaves", leaves);
        }
    }

    let law = empirical_degree_distribution(&full);
    report.push("tail", "alpha_critical", ALPHA_CRITICAL);
    report.push("tail", "alpha_finite_mean", ALPHA_FINITE_MEAN);
    if let Ok(fit) = fit_power_law_kl(&law, a.k0) {
        report.push("tail", "k0", fit.k0);
        report.push("tail", "kl_alpha", fit.alpha);
        report.push("tail", "kl_divergence", fit.divergence);
        report.push("tail", "kl_degenerate", fit.degenerate);
    }
    let degrees = full.degrees();
    if let Ok(h) = hill_plateau(&degrees, a.hill_min_tail, 5) {
        report.push("tail", "hill_alpha", h.alpha);
        report.push("tail", "hill_spread", h.spread);
    }

    if let Some(path) = &a.layout_out {
        let lay = layout(&g, a.layout_delta, a.seed.wrapping_add(3), a.layout_iters)?;
        let mut text = prov.lines().join("\n");
        text.push_str("\nvertex,x,y\n");
        for (v, p) in vertices.iter().zip(&lay.positions) {
            let _ = writeln!(text, "{v},{},{}", p[0], p[1]);
        }
        emit(Some(path), &text)?;
        report.push("layout", "converged", lay.converged);
    }
    emit(a.out.as_deref(), &report.render(&prov, a.format))
}

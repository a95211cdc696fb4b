use std::fmt::Write as _;

use super::{EventKind, EventLog, StopReason};
use crate::error::{invalid, Result};
use crate::graphgen::Graph;
use crate::measures::DegreeMeasure;

/// Degree measures and edge counts at one sample time.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureSnapshot {
    pub time: f64,
    /// Degrees of susceptibles.
    pub mu_s: DegreeMeasure,
    /// Numbers of susceptible neighbours of infectious individuals.
    pub mu_is: DegreeMeasure,
    /// Numbers of susceptible neighbours of removed individuals.
    pub mu_rs: DegreeMeasure,
    pub s: usize,
    /// Latent individuals (SEIR); they are in none of the three measures.
    pub e: usize,
    pub i: usize,
    pub r: usize,
    pub ns: u64,
    pub nis: u64,
    pub nrs: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasureTrajectory {
    pub snapshots: Vec<MeasureSnapshot>,
    /// Some sample time lay beyond the end of a log that stopped before
    /// extinction; those samples repeat the final state.
    pub clamped: bool,
}

impl MeasureTrajectory {
    /// CSV `t,S,I,R,NS,NIS,NRS`, with a trailing `E` column when any
    /// snapshot has latent individuals.
    pub fn to_csv(&self, header: &[String]) -> String {
        let latent = self.snapshots.iter().any(|s| s.e > 0);
        let mut out = String::new();
        for h in header {
            let _ = writeln!(out, "{h}");
        }
        out.push_str(if latent { "t,S,I,R,NS,NIS,NRS,E\n" } else { "t,S,I,R,NS,NIS,NRS\n" });
        for s in &self.snapshots {
            let _ = write!(out, "{},{},{},{},{},{},{}", s.time, s.s, s.i, s.r, s.ns, s.nis, s.nrs);
            if latent {
                let _ = write!(out, ",{}", s.e);
            }
            out.push('\n');
        }
        out
    }

    /// Measures as text blocks, one `# t=<time>` section per snapshot.
    pub fn measures_text(&self) -> String {
        let mut out = String::new();
        for s in &self.snapshots {
            let _ = writeln!(out, "# t={} S", s.time);
            out.push_str(&s.mu_s.to_text());
            let _ = writeln!(out, "# t={} IS", s.time);
            out.push_str(&s.mu_is.to_text());
            let _ = writeln!(out, "# t={} RS", s.time);
            out.push_str(&s.mu_rs.to_text());
        }
        out
    }
}

/// Histogram with incremental updates, for integer measures.
#[derive(Debug, Clone, Default)]
pub(crate) struct Census {
    pub counts: Vec<u64>,
}

impl Census {
    pub fn inc(&mut self, k: usize) {
        if k >= self.counts.len() {
            self.counts.resize(k + 1, 0);
        }
        self.counts[k] += 1;
    }

    pub fn dec(&mut self, k: usize) {
        self.counts[k] -= 1;
    }

    pub fn measure(&self) -> DegreeMeasure {
        DegreeMeasure::from_masses(self.counts.iter().map(|&c| c as f64).collect()).expect("counts are nonnegative")
    }

    pub fn first_moment(&self) -> u64 {
        self.counts.iter().enumerate().map(|(k, &c)| k as u64 * c).sum()
    }
}

/// Replays `log` on the frozen graph `g` and records the degree measures at
/// each of the sorted `sample_times`.
pub fn track_measures(log: &EventLog, g: &Graph, sample_times: &[f64]) -> Result<MeasureTrajectory> {
    if sample_times.windows(2).any(|w| w[1] < w[0]) {
        return invalid("sample times must be sorted");
    }
    if g.vertex_count() != log.n {
        return invalid("graph and log have different population sizes");
    }
    const S: u8 = 0;
    const E: u8 = 1;
    const I: u8 = 2;
    const R: u8 = 3;
    let n = log.n;
    let adj = g.adjacency();
    let deg: Vec<usize> = (0..n).map(|u| adj.degree(u)).collect();
    let mut status = vec![S; n];
    for &u in &log.initial_infected {
        status[u] = I;
    }
    // ds[u]: stubs of a non-susceptible u whose other end is susceptible.
    let mut ds = vec![0usize; n];
    let (mut cs, mut ci, mut cr) = (Census::default(), Census::default(), Census::default());
    for u in 0..n {
        if status[u] == S {
            cs.inc(deg[u]);
        } else {
            ds[u] = adj.neighbors(u).iter().filter(|&&(v, _)| v as usize != u && status[v as usize] == S).count();
            ci.inc(ds[u]);
        }
    }
    let (mut s, mut e, mut i, mut r) = (n - log.initial_infected.len(), 0usize, log.initial_infected.len(), 0usize);
    let mut ns: u64 = (0..n).filter(|&u| status[u] == S).map(|u| deg[u] as u64).sum();
    let mut out = MeasureTrajectory { snapshots: Vec::with_capacity(sample_times.len()), clamped: false };
    let mut k = 0;
    for &t in sample_times {
        while k < log.events.len() && log.events[k].time <= t {
            match log.events[k].kind {
                EventKind::Infection { infectee: x, .. } => {
                    cs.dec(deg[x]);
                    ns -= deg[x] as u64;
                    s -= 1;
                    let latent = log.has_latent_period();
                    status[x] = if latent { E } else { I };
                    for &(v, _) in adj.neighbors(x) {
                        let v = v as usize;
                        if v == x {
                            continue;
                        }
                        match status[v] {
                            S => ds[x] += 1,
                            st => {
                                if st == I {
                                    ci.dec(ds[v]);
                                } else if st == R {
                                    cr.dec(ds[v]);
                                }
                                ds[v] -= 1;
                                if st == I {
                                    ci.inc(ds[v]);
                                } else if st == R {
                                    cr.inc(ds[v]);
                                }
                            }
                        }
                    }
                    if latent {
                        e += 1;
                    } else {
                        i += 1;
                        ci.inc(ds[x]);
                    }
                }
                EventKind::Activation { individual: x } => {
                    status[x] = I;
                    e -= 1;
                    i += 1;
                    ci.inc(ds[x]);
                }
                EventKind::Removal { individual: x } => {
                    status[x] = R;
                    ci.dec(ds[x]);
                    cr.inc(ds[x]);
                    i -= 1;
                    r += 1;
                }
            }
            k += 1;
        }
        if t > log.end_time && log.stop != StopReason::Extinct {
            out.clamped = true;
        }
        out.snapshots.push(MeasureSnapshot {
            time: t,
            mu_s: cs.measure(),
            mu_is: ci.measure(),
            mu_rs: cr.measure(),
            s,
            e,
            i,
            r,
            ns,
            nis: ci.first_moment(),
            nrs: cr.first_moment(),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::episim::{simulate_sir, EpidemicParams};
    use crate::graphgen::{config_model, Graph};
    use crate::rng::seeded;

    /// Recomputes a snapshot from scratch given the statuses at time t.
    fn brute(g: &Graph, log: &EventLog, t: f64) -> (DegreeMeasure, DegreeMeasure, DegreeMeasure) {
        let mut status = vec![0u8; g.vertex_count()];
        for &u in &log.initial_infected {
            status[u] = 2;
        }
        for ev in log.events.iter().filter(|e| e.time <= t) {
            match ev.kind {
                EventKind::Infection { infectee, .. } => status[infectee] = 2,
                EventKind::Removal { individual } => status[individual] = 3,
                EventKind::Activation { .. } => {}
            }
        }
        let adj = g.adjacency();
        let (mut a, mut b, mut c) = (vec![], vec![], vec![]);
        for u in 0..g.vertex_count() {
            let to_s = adj.neighbors(u).iter().filter(|&&(v, _)| v as usize != u && status[v as usize] == 0).count();
            match status[u] {
                0 => a.push(adj.degree(u)),
                2 => b.push(to_s),
                _ => c.push(to_s),
            }
        }
        (DegreeMeasure::census(a), DegreeMeasure::census(b), DegreeMeasure::census(c))
    }

    #[test]
    fn incremental_tracking_matches_recomputation() {
        let mut rng = seeded(2);
        let degrees: Vec<usize> = (0..300).map(|u| 1 + u % 6).collect();
        let g = config_model(&degrees, &mut rng).unwrap();
        let log = simulate_sir(&g, &EpidemicParams::sir(0.8, 1.0), &[0, 1, 2], 4).unwrap();
        let times: Vec<f64> = (0..40).map(|k| k as f64 * 0.25).collect();
        let traj = track_measures(&log, &g, &times).unwrap();
        for snap in &traj.snapshots {
            let (a, b, c) = brute(&g, &log, snap.time);
            assert_eq!((&snap.mu_s, &snap.mu_is, &snap.mu_rs), (&a, &b, &c));
            assert_eq!(snap.s + snap.i + snap.r, 300);
            assert_eq!(snap.i as f64, snap.mu_is.total());
            assert_eq!(snap.nis as f64, snap.mu_is.moment(1));
        }
        let last = track_measures(&log, &g, &[log.end_time + 1.0]).unwrap();
        assert_eq!(last.snapshots[0].mu_is.total(), 0.0);
        assert!(!last.clamped);
        let census = DegreeMeasure::census((3..300).map(|u| g.degrees()[u]));
        assert_eq!(traj.snapshots[0].mu_s, census);
    }
}

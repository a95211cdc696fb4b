//! Exact continuous-time SIR/SEIR simulation.
//!
//! [`simulate_sir`] and [`simulate_household_sir`] run on a frozen graph;
//! [`online::simulate_cm_online`] reveals a configuration-model graph as the
//! epidemic spreads. Both produce an [`EventLog`].
//!
//! The engine samples aggregate rates: the next event time is exponential
//! with the total rate, then a category (infection along an edge class,
//! activation, removal) and a uniform member of that category are drawn.
//! Each parallel edge of a multigraph carries its own clock.

mod frozen;
pub mod online;
mod tracking;

use std::fmt::Write as _;

use crate::error::{invalid, Error, Result};

pub use frozen::{simulate_household_sir, simulate_sir, simulate_sir_with, SimOptions};
pub use online::{simulate_cm_online, OnlineInit, OnlineOptions};
pub use tracking::{track_measures, MeasureSnapshot, MeasureTrajectory};

/// Rates of the compartmental dynamics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpidemicParams {
    /// Per-edge transmission rate.
    pub lambda: f64,
    /// Removal rate.
    pub gamma: f64,
    /// Latent-to-infectious rate; `None` for SIR.
    pub delta: Option<f64>,
    /// Transmission rate along edges inside a household.
    pub lambda_h: Option<f64>,
}

impl EpidemicParams {
    pub fn sir(lambda: f64, gamma: f64) -> Self {
        EpidemicParams { lambda, gamma, delta: None, lambda_h: None }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return invalid("lambda must be finite and >= 0");
        }
        if !(self.gamma.is_finite() && self.gamma > 0.0) {
            return invalid("gamma must be finite and > 0");
        }
        if let Some(d) = self.delta {
            if !(d.is_finite() && d > 0.0) {
                return invalid("delta must be finite and > 0");
            }
        }
        if let Some(l) = self.lambda_h {
            if !(l.is_finite() && l >= 0.0) {
                return invalid("lambda_h must be finite and >= 0");
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    Infection {
        infector: usize,
        infectee: usize,
    },
    /// End of the latent period (SEIR only).
    Activation {
        individual: usize,
    },
    Removal {
        individual: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event {
    pub time: f64,
    pub kind: EventKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    /// No infectious or latent individual left.
    Extinct,
    /// The time horizon was reached first.
    Horizon,
    /// The number of I–S edges fell below the ε·N floor.
    EpsilonFloor,
    /// The caller's cap on infections was reached.
    InfectionCap,
}

/// Ordered events of one realisation.
#[derive(Debug, Clone, PartialEq)]
pub struct EventLog {
    /// Population size.
    pub n: usize,
    /// Index cases, infectious at time 0.
    pub initial_infected: Vec<usize>,
    pub events: Vec<Event>,
    /// Time at which simulation stopped.
    pub end_time: f64,
    pub stop: StopReason,
    /// Consecutive events that drew the same time (flagged, kept in order).
    pub tied_times: usize,
}

impl EventLog {
    pub fn infections(&self) -> impl Iterator<Item = (f64, usize, usize)> + '_ {
        self.events.iter().filter_map(|e| match e.kind {
            EventKind::Infection { infector, infectee } => Some((e.time, infector, infectee)),
            _ => None,
        })
    }

    /// Index cases plus infections.
    pub fn total_infected(&self) -> usize {
        self.initial_infected.len() + self.infections().count()
    }

    pub fn has_latent_period(&self) -> bool {
        self.events.iter().any(|e| matches!(e.kind, EventKind::Activation { .. }))
    }

    /// Checks the log's structural invariants: strictly increasing times, at
    /// most one infection per individual, removals after infection, and
    /// infectors infectious at the infection time.
    pub fn validate(&self) -> Result<()> {
        const S: u8 = 0;
        const E: u8 = 1;
        const I: u8 = 2;
        const R: u8 = 3;
        let mut st = vec![S; self.n];
        for &u in &self.initial_infected {
            if u >= self.n || st[u] != S {
                return invalid(format!("bad index case {u}"));
            }
            st[u] = I;
        }
        let mut last = f64::NEG_INFINITY;
        for (i, e) in self.events.iter().enumerate() {
            if !(e.time > last) {
                return invalid(format!("event {i} at time {} does not follow {last}", e.time));
            }
            last = e.time;
            match e.kind {
                EventKind::Infection { infector, infectee } => {
                    if infector >= self.n || infectee >= self.n || st[infector] != I || st[infectee] != S {
                        return invalid(format!("event {i}: invalid infection {infector} -> {infectee}"));
                    }
                    st[infectee] = if self.has_latent_period() { E } else { I };
                }
                EventKind::Activation { individual } => {
                    if individual >= self.n || st[individual] != E {
                        return invalid(format!("event {i}: activation of non-latent {individual}"));
                    }
                    st[individual] = I;
                }
                EventKind::Removal { individual } => {
                    if individual >= self.n || st[individual] != I {
                        return invalid(format!("event {i}: removal of non-infectious {individual}"));
                    }
                    st[individual] = R;
                }
            }
        }
        Ok(())
    }

    /// Counts `(S, E, I, R)` right after all events with time `≤ t`.
    pub fn counts_at(&self, times: &[f64]) -> Vec<(usize, usize, usize, usize)> {
        let latent = self.has_latent_period();
        let (mut s, mut e, mut i, mut r) = (self.n - self.initial_infected.len(), 0, self.initial_infected.len(), 0);
        let mut out = Vec::with_capacity(times.len());
        let mut k = 0;
        for &t in times {
            while k < self.events.len() && self.events[k].time <= t {
                match self.events[k].kind {
                    EventKind::Infection { .. } => {
                        s -= 1;
                        if latent {
                            e += 1
                        } else {
                            i += 1
                        }
                    }
                    EventKind::Activation { .. } => {
                        e -= 1;
                        i += 1;
                    }
                    EventKind::Removal { .. } => {
                        i -= 1;
                        r += 1;
                    }
                }
                k += 1;
            }
            out.push((s, e, i, r));
        }
        out
    }

    /// CSV `time,kind,actor,infector`; index cases are not listed.
    pub fn to_csv(&self, header: &[String]) -> String {
        let mut out = String::new();
        for h in header {
            let _ = writeln!(out, "{h}");
        }
        out.push_str("time,kind,actor,infector\n");
        for e in &self.events {
            let _ = match e.kind {
                EventKind::Infection { infector, infectee } => {
                    writeln!(out, "{},infection,{infectee},{infector}", e.time)
                }
                EventKind::Activation { individual } => writeln!(out, "{},activation,{individual},", e.time),
                EventKind::Removal { individual } => writeln!(out, "{},removal,{individual},", e.time),
            };
        }
        out
    }
}

/// One node of the who-infected-whom forest.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeNode {
    pub individual: usize,
    /// Node index of the infector; `None` for index cases.
    pub parent: Option<usize>,
    pub infection_time: f64,
    pub removal_time: Option<f64>,
    pub children: Vec<usize>,
}

/// Infection forest: one tree per index case.
#[derive(Debug, Clone, PartialEq)]
pub struct InfectionForest {
    pub nodes: Vec<TreeNode>,
    pub roots: Vec<usize>,
    /// Time the underlying log stopped.
    pub horizon: f64,
}

impl InfectionForest {
    pub fn depth(&self, mut node: usize) -> usize {
        let mut d = 0;
        while let Some(p) = self.nodes[node].parent {
            node = p;
            d += 1;
        }
        d
    }
}

/// Builds the infection forest of a log.
pub fn infection_tree(log: &EventLog) -> InfectionForest {
    let mut node_of = vec![usize::MAX; log.n];
    let mut nodes = Vec::new();
    let mut roots = Vec::new();
    for &u in &log.initial_infected {
        node_of[u] = nodes.len();
        roots.push(nodes.len());
        nodes.push(TreeNode { individual: u, parent: None, infection_time: 0.0, removal_time: None, children: vec![] });
    }
    for e in &log.events {
        match e.kind {
            EventKind::Infection { infector, infectee } => {
                let p = node_of[infector];
                let id = nodes.len();
                node_of[infectee] = id;
                nodes.push(TreeNode {
                    individual: infectee,
                    parent: Some(p),
                    infection_time: e.time,
                    removal_time: None,
                    children: vec![],
                });
                nodes[p].children.push(id);
            }
            EventKind::Removal { individual } => {
                let id = node_of[individual];
                nodes[id].removal_time = Some(e.time);
            }
            EventKind::Activation { .. } => {}
        }
    }
    InfectionForest { nodes, roots, horizon: log.end_time }
}

pub(crate) fn check_initial(n: usize, initial: &[usize]) -> Result<()> {
    if initial.is_empty() {
        return Err(Error::Invalid("no index case".into()));
    }
    let mut seen = vec![false; n];
    for &u in initial {
        if u >= n {
            return invalid(format!("index case {u} is not a vertex"));
        }
        if std::mem::replace(&mut seen[u], true) {
            return invalid(format!("index case {u} listed twice"));
        }
    }
    Ok(())
}

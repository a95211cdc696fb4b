use rand::Rng;
use rand_distr::{Distribution, Exp1};

use super::{check_initial, EpidemicParams, Event, EventKind, EventLog, StopReason};
use crate::error::{invalid, Result};
use crate::graphgen::{Adjacency, Graph};
use crate::rng::{seeded, SimRng};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimOptions {
    /// Stop once this time is reached.
    pub t_max: f64,
    /// Stop once this many infections (excluding index cases) have occurred.
    pub max_infections: Option<usize>,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions { t_max: f64::INFINITY, max_infections: None }
    }
}

/// SIR (or SEIR when `params.delta` is set) on a frozen graph.
pub fn simulate_sir(g: &Graph, params: &EpidemicParams, initial: &[usize], seed: u64) -> Result<EventLog> {
    simulate_sir_with(g, params, initial, seed, &SimOptions::default())
}

pub fn simulate_sir_with(
    g: &Graph,
    params: &EpidemicParams,
    initial: &[usize],
    seed: u64,
    opts: &SimOptions,
) -> Result<EventLog> {
    params.validate()?;
    check_initial(g.vertex_count(), initial)?;
    let rates = vec![params.lambda];
    let class = vec![0u8; g.edge_count()];
    run(g, params, initial, seed, opts, &rates, &class)
}

/// Edges inside a household transmit at `λ_H`, others at `λ`.
pub fn simulate_household_sir(
    g: &Graph,
    params: &EpidemicParams,
    initial: &[usize],
    seed: u64,
    opts: &SimOptions,
) -> Result<EventLog> {
    params.validate()?;
    check_initial(g.vertex_count(), initial)?;
    let Some(hh) = g.households.as_ref() else {
        return invalid("household ids missing");
    };
    let Some(lambda_h) = params.lambda_h else {
        return invalid("household rate lambda_h missing");
    };
    // Classes are keyed by distinct rate, so λ_H = λ collapses to the plain
    // simulator, draw for draw.
    let mut rates = vec![params.lambda];
    if lambda_h != params.lambda {
        rates.push(lambda_h);
    }
    let inner = (rates.len() - 1) as u8;
    let class: Vec<u8> = g.edges().map(|(u, v)| if hh[u] == hh[v] { inner } else { 0 }).collect();
    run(g, params, initial, seed, opts, &rates, &class)
}

const S: u8 = 0;
const E: u8 = 1;
const I: u8 = 2;
const R: u8 = 3;
const ABSENT: u32 = u32::MAX;

/// Members with O(1) insert, delete and uniform choice.
struct IndexedSet {
    items: Vec<u32>,
    pos: Vec<u32>,
}

impl IndexedSet {
    fn new(capacity: usize) -> Self {
        IndexedSet { items: Vec::new(), pos: vec![ABSENT; capacity] }
    }

    fn insert(&mut self, x: u32) {
        debug_assert_eq!(self.pos[x as usize], ABSENT);
        self.pos[x as usize] = self.items.len() as u32;
        self.items.push(x);
    }

    fn remove(&mut self, x: u32) {
        let p = self.pos[x as usize];
        if p == ABSENT {
            return;
        }
        let last = self.items.pop().expect("non-empty");
        if last != x {
            self.items[p as usize] = last;
            self.pos[last as usize] = p;
        }
        self.pos[x as usize] = ABSENT;
    }

    fn len(&self) -> usize {
        self.items.len()
    }

    fn pick(&self, rng: &mut SimRng) -> u32 {
        self.items[rng.random_range(0..self.items.len())]
    }
}

struct State<'a> {
    g: &'a Graph,
    adj: Adjacency,
    status: Vec<u8>,
    class: &'a [u8],
    /// Active I–S edges per rate class; shared position array since an edge
    /// has one class.
    active: Vec<IndexedSet>,
    infectious: IndexedSet,
    latent: IndexedSet,
}

impl State<'_> {
    fn leave_susceptible(&mut self, u: usize) {
        for k in self.adj.offsets[u]..self.adj.offsets[u + 1] {
            let (v, e) = self.adj.targets[k];
            if v as usize != u && self.status[v as usize] == I {
                self.active[self.class[e as usize] as usize].remove(e);
            }
        }
    }

    fn become_infectious(&mut self, u: usize) {
        self.status[u] = I;
        self.infectious.insert(u as u32);
        for k in self.adj.offsets[u]..self.adj.offsets[u + 1] {
            let (v, e) = self.adj.targets[k];
            if v as usize != u && self.status[v as usize] == S {
                self.active[self.class[e as usize] as usize].insert(e);
            }
        }
    }

    fn remove(&mut self, u: usize) {
        self.status[u] = R;
        self.infectious.remove(u as u32);
        for k in self.adj.offsets[u]..self.adj.offsets[u + 1] {
            let (v, e) = self.adj.targets[k];
            if v as usize != u && self.status[v as usize] == S {
                self.active[self.class[e as usize] as usize].remove(e);
            }
        }
    }
}

fn run(
    g: &Graph,
    params: &EpidemicParams,
    initial: &[usize],
    seed: u64,
    opts: &SimOptions,
    rates: &[f64],
    class: &[u8],
) -> Result<EventLog> {
    let n = g.vertex_count();
    let mut rng = seeded(seed);
    let mut st = State {
        g,
        adj: g.adjacency(),
        status: vec![S; n],
        class,
        active: (0..rates.len()).map(|_| IndexedSet::new(g.edge_count())).collect(),
        infectious: IndexedSet::new(n),
        latent: IndexedSet::new(n),
    };
    for &u in initial {
        st.status[u] = I;
    }
    for &u in initial {
        st.status[u] = S;
        st.become_infectious(u);
    }
    let mut log = EventLog {
        n,
        initial_infected: initial.to_vec(),
        events: Vec::new(),
        end_time: 0.0,
        stop: StopReason::Extinct,
        tied_times: 0,
    };
    let mut t = 0.0f64;
    let mut infections = 0usize;
    loop {
        let infect: Vec<f64> = rates.iter().zip(&st.active).map(|(r, a)| r * a.len() as f64).collect();
        let remove = params.gamma * st.infectious.len() as f64;
        let activate = params.delta.map_or(0.0, |d| d * st.latent.len() as f64);
        let total = infect.iter().sum::<f64>() + remove + activate;
        if st.infectious.len() == 0 && st.latent.len() == 0 {
            log.stop = StopReason::Extinct;
            log.end_time = t;
            break;
        }
        let dt: f64 = Exp1.sample(&mut rng);
        let t_next = t + dt / total;
        if t_next >= opts.t_max {
            log.stop = StopReason::Horizon;
            log.end_time = opts.t_max;
            break;
        }
        if t_next == t {
            log.tied_times += 1;
        }
        t = t_next;
        let mut x = rng.random::<f64>() * total;
        let mut chosen = None;
        for (c, &w) in infect.iter().enumerate() {
            if x < w {
                chosen = Some(c);
                break;
            }
            x -= w;
        }
        let kind = if let Some(c) = chosen {
            let e = st.active[c].pick(&mut rng) as usize;
            let (a, b) = st.g.edge(e);
            let (infector, infectee) = if st.status[a] == I { (a, b) } else { (b, a) };
            st.leave_susceptible(infectee);
            if params.delta.is_some() {
                st.status[infectee] = E;
                st.latent.insert(infectee as u32);
            } else {
                st.become_infectious(infectee);
            }
            infections += 1;
            EventKind::Infection { infector, infectee }
        } else if x < remove || st.latent.len() == 0 {
            let u = st.infectious.pick(&mut rng) as usize;
            st.remove(u);
            EventKind::Removal { individual: u }
        } else {
            let u = st.latent.pick(&mut rng) as usize;
            st.latent.remove(u as u32);
            st.become_infectious(u);
            EventKind::Activation { individual: u }
        };
        log.events.push(Event { time: t, kind });
        if opts.max_infections.is_some_and(|m| infections >= m) {
            log.stop = StopReason::InfectionCap;
            log.end_time = t;
            break;
        }
    }
    Ok(log)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphgen::complete;

    #[test]
    fn zero_lambda_gives_pure_removals() {
        let g = complete(10).unwrap();
        let log = simulate_sir(&g, &EpidemicParams::sir(0.0, 1.0), &[0, 4, 7], 1).unwrap();
        assert_eq!(log.events.len(), 3);
        assert!(log.events.iter().all(|e| matches!(e.kind, EventKind::Removal { .. })));
        assert_eq!(log.counts_at(&[f64::INFINITY])[0], (7, 0, 0, 3));
    }

    #[test]
    fn empty_initial_set_rejected() {
        let g = complete(3).unwrap();
        let err = simulate_sir(&g, &EpidemicParams::sir(1.0, 1.0), &[], 1).unwrap_err();
        assert!(err.to_string().contains("no index case"));
    }

    #[test]
    fn logs_are_valid_and_on_edges() {
        let g = complete(30).unwrap();
        let mut p = EpidemicParams::sir(0.2, 1.0);
        for seir in [false, true] {
            p.delta = seir.then_some(2.0);
            let log = simulate_sir(&g, &p, &[0], 11).unwrap();
            log.validate().unwrap();
            assert_eq!(log.stop, StopReason::Extinct);
            assert_eq!(log.has_latent_period(), seir && log.total_infected() > 1);
        }
    }

    #[test]
    fn same_seed_same_log() {
        let g = complete(40).unwrap();
        let p = EpidemicParams::sir(0.1, 1.0);
        assert_eq!(simulate_sir(&g, &p, &[1], 5).unwrap(), simulate_sir(&g, &p, &[1], 5).unwrap());
    }
}

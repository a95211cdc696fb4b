//! SIR on a configuration-model graph revealed while the epidemic spreads.
//!
//! The state is the triple of integer measures `(μ^S, μ^IS, μ^RS)` plus the
//! per-individual counts of edges to susceptibles. Half-edges of susceptibles
//! fall in three pools: paired to an infectious individual (`N^IS` stubs),
//! to a removed one (`N^RS`), or still open toward another susceptible
//! (`P = N^S − N^IS − N^RS`).
//!
//! At rate `λ N^IS` an I–S stub transmits:
//! 1. the infector is the owner of a uniform I–S stub;
//! 2. the new infective has degree `k` with probability `k μ^S(k)/N^S`;
//! 3. the types of its other `k−1` stubs are a draw without replacement from
//!    the pools `(N^IS − 1, N^RS, P)` of the remaining `N^S − 1` susceptible
//!    stubs, giving `(j, ℓ, m)`;
//! 4. `j` further I–S stubs and `ℓ` R–S stubs, uniform without replacement,
//!    are the ones pointing at the new infective, whose owners lose one edge
//!    to `S` each;
//! 5. the new infective keeps `m` edges toward susceptibles.
//!
//! The `m` open stubs pair with open stubs of *other* susceptibles. In the
//! rare end-of-epidemic state where fewer than `m` such stubs remain, the
//! surplus is paired among the new infective's own stubs (self-loops), so it
//! keeps `min(m, P − m)` edges to `S`.
//!
//! At rate `γ I` a uniform infective is removed and carries its I–S count
//! over to `μ^RS`.

use rand::Rng;
use rand_distr::{Distribution, Exp1};

use super::tracking::{Census, MeasureSnapshot, MeasureTrajectory};
use super::{EpidemicParams, Event, EventKind, EventLog, StopReason};
use crate::error::{domain, invalid, Error, Result};
use crate::measures::DegreeMeasure;
use crate::rng::{seeded, SimRng};

#[derive(Debug, Clone, PartialEq)]
pub struct OnlineOptions {
    pub t_max: f64,
    /// Stop when `N^IS < ε N`.
    pub epsilon: Option<f64>,
    /// Sorted times at which to snapshot the measures.
    pub sample_times: Vec<f64>,
    /// Recompute the stub totals from scratch after every event and fail on
    /// any mismatch with the incremental values.
    pub debug_check: bool,
}

impl Default for OnlineOptions {
    fn default() -> Self {
        OnlineOptions { t_max: f64::INFINITY, epsilon: None, sample_times: Vec::new(), debug_check: false }
    }
}

/// Integer initial measures.
#[derive(Debug, Clone, PartialEq)]
pub struct OnlineInit {
    pub mu_s: DegreeMeasure,
    pub mu_is: DegreeMeasure,
    pub mu_rs: DegreeMeasure,
}

impl OnlineInit {
    /// Starts with everyone susceptible (degrees from `census`) and infects
    /// `count` index cases chosen uniformly among individuals, revealing the
    /// partners of their stubs with the same pool draw as an infection.
    pub fn reveal_index_cases(census: &DegreeMeasure, count: usize, seed: u64) -> Result<Self> {
        let counts = census.integer_counts()?;
        let n: u64 = counts.iter().sum();
        if count as u64 > n {
            return invalid("more index cases than individuals");
        }
        let mut rng = seeded(seed);
        let mut st = Online::new(&counts, &[], &[])?;
        for _ in 0..count {
            let x = st.pick_uniform_susceptible(&mut rng);
            st.infect(x, false, &mut rng);
        }
        Ok(OnlineInit { mu_s: st.cs_measure(), mu_is: st.ci.measure(), mu_rs: st.cr.measure() })
    }
}

/// Fenwick tree over nonnegative integer weights.
#[derive(Debug, Clone)]
struct Fenwick {
    tree: Vec<i64>,
    weight: Vec<i64>,
    total: i64,
}

impl Fenwick {
    fn new(n: usize) -> Self {
        Fenwick { tree: vec![0; n + 1], weight: vec![0; n], total: 0 }
    }

    fn add(&mut self, i: usize, delta: i64) {
        self.weight[i] += delta;
        debug_assert!(self.weight[i] >= 0);
        self.total += delta;
        let mut j = i + 1;
        while j < self.tree.len() {
            self.tree[j] += delta;
            j += j & j.wrapping_neg();
        }
    }

    /// Index `i` with `prefix(i) ≤ r < prefix(i + 1)`.
    fn find(&self, mut r: i64) -> usize {
        let mut pos = 0usize;
        let mut step = (self.tree.len() - 1).next_power_of_two();
        while step > 0 {
            let next = pos + step;
            if next < self.tree.len() && self.tree[next] <= r {
                pos = next;
                r -= self.tree[next];
            }
            step >>= 1;
        }
        pos
    }

    fn sample(&self, rng: &mut SimRng) -> usize {
        self.find(rng.random_range(0..self.total))
    }
}

struct Online {
    /// Susceptible ids grouped by degree.
    s_class: Vec<Vec<u32>>,
    /// Weight `k·|class k|` per degree.
    fs: Fenwick,
    s_count: usize,
    /// I–S and R–S stub counts per individual.
    fi: Fenwick,
    fr: Fenwick,
    infectious: Vec<u32>,
    inf_pos: Vec<u32>,
    removed: usize,
    ci: Census,
    cr: Census,
    n: usize,
}

impl Online {
    fn new(s: &[u64], is: &[u64], rs: &[u64]) -> Result<Self> {
        let n = (s.iter().sum::<u64>() + is.iter().sum::<u64>() + rs.iter().sum::<u64>()) as usize;
        if n == 0 {
            return invalid("empty population");
        }
        let kmax = s.len().max(1);
        let mut st = Online {
            s_class: vec![Vec::new(); kmax],
            fs: Fenwick::new(kmax),
            s_count: 0,
            fi: Fenwick::new(n),
            fr: Fenwick::new(n),
            infectious: Vec::new(),
            inf_pos: vec![u32::MAX; n],
            removed: 0,
            ci: Census::default(),
            cr: Census::default(),
            n,
        };
        let mut id = 0u32;
        for (k, &c) in s.iter().enumerate() {
            for _ in 0..c {
                st.s_class[k].push(id);
                id += 1;
            }
            st.fs.add(k, (k as u64 * c) as i64);
            st.s_count += c as usize;
        }
        for (k, &c) in is.iter().enumerate() {
            for _ in 0..c {
                st.add_infectious(id, k);
                id += 1;
            }
        }
        for (k, &c) in rs.iter().enumerate() {
            for _ in 0..c {
                st.fr.add(id as usize, k as i64);
                st.cr.inc(k);
                st.removed += 1;
                id += 1;
            }
        }
        if st.pool_ss() < 0 {
            return domain("N^IS + N^RS exceeds the number of susceptible stubs");
        }
        Ok(st)
    }

    fn initial_ids(&self) -> Vec<usize> {
        self.infectious.iter().map(|&u| u as usize).collect()
    }

    fn pool_ss(&self) -> i64 {
        self.fs.total - self.fi.total - self.fr.total
    }

    fn cs_measure(&self) -> DegreeMeasure {
        DegreeMeasure::from_masses(self.s_class.iter().map(|c| c.len() as f64).collect()).expect("counts")
    }

    fn add_infectious(&mut self, id: u32, ds: usize) {
        self.fi.add(id as usize, ds as i64);
        self.ci.inc(ds);
        self.inf_pos[id as usize] = self.infectious.len() as u32;
        self.infectious.push(id);
    }

    fn take_is_stub(&mut self, u: usize) {
        let w = self.fi.weight[u] as usize;
        self.ci.dec(w);
        self.ci.inc(w - 1);
        self.fi.add(u, -1);
    }

    fn take_rs_stub(&mut self, u: usize) {
        let w = self.fr.weight[u] as usize;
        self.cr.dec(w);
        self.cr.inc(w - 1);
        self.fr.add(u, -1);
    }

    fn pick_uniform_susceptible(&mut self, rng: &mut SimRng) -> (usize, u32) {
        let mut r = rng.random_range(0..self.s_count);
        for (k, class) in self.s_class.iter().enumerate() {
            if r < class.len() {
                return (k, class[r]);
            }
            r -= class.len();
        }
        unreachable!("s_count matches class sizes")
    }

    fn pick_stub_weighted_susceptible(&mut self, rng: &mut SimRng) -> (usize, u32) {
        let k = self.fs.sample(rng);
        let class = &self.s_class[k];
        (k, class[rng.random_range(0..class.len())])
    }

    /// Turns susceptible `x = (k, id)` infectious. With `contaminated`, one of
    /// its stubs is the transmitting I–S stub, already taken from the infector.
    fn infect(&mut self, x: (usize, u32), contaminated: bool, rng: &mut SimRng) -> usize {
        let (k, id) = x;
        let ns_before = self.fs.total;
        let pool_is = self.fi.total;
        let pool_rs = self.fr.total;
        // When contaminated, `pool_is` is already N^IS − 1.
        let pool_ss = ns_before - (pool_is + i64::from(contaminated)) - pool_rs;
        let draws = if contaminated { k - 1 } else { k };
        let class = &mut self.s_class[k];
        let pos = class.iter().position(|&v| v == id).expect("member of its class");
        class.swap_remove(pos);
        self.fs.add(k, -(k as i64));
        self.s_count -= 1;

        let (mut a, mut b, mut c) = (pool_is, pool_rs, pool_ss);
        let (mut j, mut l, mut m) = (0usize, 0usize, 0usize);
        for _ in 0..draws {
            let r = rng.random_range(0..a + b + c);
            if r < a {
                a -= 1;
                j += 1;
            } else if r < a + b {
                b -= 1;
                l += 1;
            } else {
                c -= 1;
                m += 1;
            }
        }
        for _ in 0..j {
            let u = self.fi.sample(rng);
            self.take_is_stub(u);
        }
        for _ in 0..l {
            let u = self.fr.sample(rng);
            self.take_rs_stub(u);
        }
        let keep = m.min((pool_ss as usize).saturating_sub(m));
        self.add_infectious(id, keep);
        id as usize
    }

    fn remove_uniform(&mut self, rng: &mut SimRng) -> usize {
        let idx = rng.random_range(0..self.infectious.len());
        let u = self.infectious.swap_remove(idx);
        if let Some(&moved) = self.infectious.get(idx) {
            self.inf_pos[moved as usize] = idx as u32;
        }
        self.inf_pos[u as usize] = u32::MAX;
        let w = self.fi.weight[u as usize];
        self.fi.add(u as usize, -w);
        self.fr.add(u as usize, w);
        self.ci.dec(w as usize);
        self.cr.inc(w as usize);
        self.removed += 1;
        u as usize
    }

    fn snapshot(&self, time: f64) -> MeasureSnapshot {
        MeasureSnapshot {
            time,
            mu_s: self.cs_measure(),
            mu_is: self.ci.measure(),
            mu_rs: self.cr.measure(),
            s: self.s_count,
            e: 0,
            i: self.infectious.len(),
            r: self.removed,
            ns: self.fs.total as u64,
            nis: self.fi.total as u64,
            nrs: self.fr.total as u64,
        }
    }

    fn check(&self) -> Result<()> {
        let ns: i64 = self.s_class.iter().enumerate().map(|(k, c)| (k * c.len()) as i64).sum();
        let nis: i64 = self.infectious.iter().map(|&u| self.fi.weight[u as usize]).sum();
        let nrs: i64 = self.fr.weight.iter().sum();
        if ns != self.fs.total || nis != self.fi.total || nrs != self.fr.total || self.pool_ss() < 0 {
            return Err(Error::Numerical(format!(
                "bookkeeping mismatch: NS {ns}/{}, NIS {nis}/{}, NRS {nrs}/{}",
                self.fs.total, self.fi.total, self.fr.total
            )));
        }
        if self.ci.first_moment() as i64 != nis || self.cr.first_moment() as i64 != nrs {
            return Err(Error::Numerical("census out of sync with stub counts".into()));
        }
        Ok(())
    }
}

/// Runs the online configuration-model SIR from integer initial measures.
///
/// Individuals are labelled: susceptibles `0..S_0` by increasing degree, then
/// the infectious, then the removed.
pub fn simulate_cm_online(
    init: &OnlineInit,
    params: &EpidemicParams,
    seed: u64,
    opts: &OnlineOptions,
) -> Result<(EventLog, MeasureTrajectory)> {
    params.validate()?;
    if params.delta.is_some() || params.lambda_h.is_some() {
        return invalid("the online simulator supports plain SIR only");
    }
    if opts.sample_times.windows(2).any(|w| w[1] < w[0]) {
        return invalid("sample times must be sorted");
    }
    let s = init.mu_s.integer_counts()?;
    let is = init.mu_is.integer_counts()?;
    let rs = init.mu_rs.integer_counts()?;
    let mut st = Online::new(&s, &is, &rs)?;
    let mut rng = seeded(seed);
    let mut log = EventLog {
        n: st.n,
        initial_infected: st.initial_ids(),
        events: Vec::new(),
        end_time: 0.0,
        stop: StopReason::Extinct,
        tied_times: 0,
    };
    let mut traj = MeasureTrajectory { snapshots: Vec::with_capacity(opts.sample_times.len()), clamped: false };
    let floor = opts.epsilon.map(|e| e * st.n as f64);
    let mut next_sample = 0;
    let mut t = 0.0f64;
    loop {
        if st.infectious.is_empty() {
            log.stop = StopReason::Extinct;
            break;
        }
        if floor.is_some_and(|f| (st.fi.total as f64) < f) {
            log.stop = StopReason::EpsilonFloor;
            break;
        }
        let infect = params.lambda * st.fi.total as f64;
        let remove = params.gamma * st.infectious.len() as f64;
        let total = infect + remove;
        let dt: f64 = Exp1.sample(&mut rng);
        let t_next = t + dt / total;
        let horizon = t_next >= opts.t_max;
        let until = if horizon { opts.t_max } else { t_next };
        while next_sample < opts.sample_times.len() && opts.sample_times[next_sample] < until {
            traj.snapshots.push(st.snapshot(opts.sample_times[next_sample]));
            next_sample += 1;
        }
        if horizon {
            t = opts.t_max;
            log.stop = StopReason::Horizon;
            break;
        }
        if t_next == t {
            log.tied_times += 1;
        }
        t = t_next;
        let kind = if rng.random::<f64>() * total < infect {
            let infector = st.fi.sample(&mut rng);
            st.take_is_stub(infector);
            let x = st.pick_stub_weighted_susceptible(&mut rng);
            let infectee = st.infect(x, true, &mut rng);
            EventKind::Infection { infector, infectee }
        } else {
            EventKind::Removal { individual: st.remove_uniform(&mut rng) }
        };
        log.events.push(Event { time: t, kind });
        if opts.debug_check {
            st.check()?;
        }
    }
    log.end_time = t;
    for &ts in &opts.sample_times[next_sample..] {
        if log.stop != StopReason::Extinct && ts > t {
            traj.clamped = true;
        }
        traj.snapshots.push(st.snapshot(ts));
    }
    Ok((log, traj))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fenwick_find_matches_linear_scan() {
        let w = [3i64, 0, 5, 1, 0, 2];
        let mut f = Fenwick::new(w.len());
        for (i, &x) in w.iter().enumerate() {
            f.add(i, x);
        }
        let mut expect = Vec::new();
        for (i, &x) in w.iter().enumerate() {
            expect.extend(std::iter::repeat_n(i, x as usize));
        }
        for (r, &e) in expect.iter().enumerate() {
            assert_eq!(f.find(r as i64), e);
        }
    }

    #[test]
    fn zero_is_degree_infectives_never_infect() {
        let init = OnlineInit {
            mu_s: DegreeMeasure::dirac(3, 100.0).unwrap(),
            mu_is: DegreeMeasure::dirac(0, 10.0).unwrap(),
            mu_rs: DegreeMeasure::zero(),
        };
        let (log, _) = simulate_cm_online(&init, &EpidemicParams::sir(5.0, 1.0), 1, &OnlineOptions::default()).unwrap();
        assert_eq!(log.events.len(), 10);
        assert_eq!(log.total_infected(), 10);
    }

    #[test]
    fn bookkeeping_holds_under_debug_check() {
        let census = DegreeMeasure::from_pairs([(1, 200.0), (2, 300.0), (3, 300.0), (6, 200.0)]).unwrap();
        let init = OnlineInit::reveal_index_cases(&census, 10, 3).unwrap();
        assert_eq!(init.mu_s.total() + init.mu_is.total(), 1000.0);
        let opts = OnlineOptions {
            debug_check: true,
            sample_times: (0..50).map(|k| k as f64 * 0.2).collect(),
            ..OnlineOptions::default()
        };
        let (log, traj) = simulate_cm_online(&init, &EpidemicParams::sir(1.5, 1.0), 9, &opts).unwrap();
        log.validate().unwrap();
        for s in &traj.snapshots {
            assert_eq!(s.s + s.i + s.r, 1000);
            assert_eq!(s.i as f64, s.mu_is.total());
            assert_eq!(s.nis as f64, s.mu_is.moment(1));
        }
        let s: Vec<usize> = traj.snapshots.iter().map(|x| x.s).collect();
        assert!(s.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn epsilon_floor_stops_the_run() {
        let init = OnlineInit {
            mu_s: DegreeMeasure::dirac(4, 1000.0).unwrap(),
            mu_is: DegreeMeasure::dirac(4, 50.0).unwrap(),
            mu_rs: DegreeMeasure::zero(),
        };
        let opts = OnlineOptions { epsilon: Some(0.1), ..OnlineOptions::default() };
        let (log, _) = simulate_cm_online(&init, &EpidemicParams::sir(0.1, 1.0), 2, &opts).unwrap();
        assert_eq!(log.stop, StopReason::EpsilonFloor);
    }

    #[test]
    fn non_integer_masses_rejected() {
        let init = OnlineInit {
            mu_s: DegreeMeasure::dirac(2, 10.5).unwrap(),
            mu_is: DegreeMeasure::dirac(1, 1.0).unwrap(),
            mu_rs: DegreeMeasure::zero(),
        };
        assert!(simulate_cm_online(&init, &EpidemicParams::sir(1.0, 1.0), 0, &OnlineOptions::default()).is_err());
    }
}

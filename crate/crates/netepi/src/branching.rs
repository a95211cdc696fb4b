//! Branching-process indicators for the early phase of an epidemic.
//!
//! Growth rate `α`, basic reproduction number `R0` and control effort `v_c`
//! for complete graphs, configuration models and stochastic block models;
//! extinction probabilities; the ratio by which homogeneous-mixing estimators
//! overstate `R0` and `v_c`; simple estimators from event logs.

use statrs::distribution::{ContinuousCDF, Gamma};

use crate::episim::{EventKind, EventLog, InfectionForest};
use crate::error::{domain, invalid, Error, Result};
use crate::measures::{DegreeDistribution, DegreeMeasure};
use crate::numeric::{brent, integrate};

/// Growth rate, reproduction number and control effort.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IndicatorSet {
    pub alpha: f64,
    pub r0: f64,
    /// Fraction of contacts to remove to stop growth; 0 when `subcritical`.
    pub vc: f64,
    /// `R0 ≤ 1`: no control needed.
    pub subcritical: bool,
}

impl IndicatorSet {
    fn new(alpha: f64, r0: f64, vc: f64) -> Self {
        let subcritical = r0 <= 1.0;
        IndicatorSet { alpha, r0, vc: if subcritical { 0.0 } else { vc }, subcritical }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Complete {
        lambda: f64,
        gamma: f64,
    },
    /// Configuration model with mean excess degree `kappa`.
    Cm {
        kappa: f64,
        lambda: f64,
        gamma: f64,
    },
    /// `lambda[i][j]/N` is the contact rate from a type-`i` to a given type-`j`
    /// individual; `rho` holds the type fractions.
    Sbm {
        lambda: Vec<Vec<f64>>,
        rho: Vec<f64>,
        gamma: f64,
    },
}

impl Model {
    pub fn cm_from_distribution(p: &DegreeDistribution, lambda: f64, gamma: f64) -> Result<Self> {
        Ok(Model::Cm { kappa: p.mean_excess_degree()?, lambda, gamma })
    }
}

fn check_rates(lambda: f64, gamma: f64) -> Result<()> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return invalid("gamma must be positive");
    }
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return invalid("lambda must be nonnegative");
    }
    Ok(())
}

/// Markov SIR indicators for `model`.
pub fn indicators(model: &Model) -> Result<IndicatorSet> {
    match *model {
        Model::Complete { lambda, gamma } => {
            check_rates(lambda, gamma)?;
            Ok(IndicatorSet::new(lambda - gamma, lambda / gamma, (lambda - gamma) / lambda))
        }
        Model::Cm { kappa, lambda, gamma } => {
            check_rates(lambda, gamma)?;
            if !(kappa > 0.0 && kappa.is_finite()) {
                return invalid("kappa must be positive");
            }
            let alpha = (kappa - 1.0) * lambda - gamma;
            let r0 = kappa * lambda / (lambda + gamma);
            Ok(IndicatorSet::new(alpha, r0, 1.0 - (lambda + gamma) / (kappa * lambda)))
        }
        Model::Sbm { ref lambda, ref rho, gamma } => {
            check_rates(0.0, gamma)?;
            let k = rho.len();
            if k == 0 || lambda.len() != k || lambda.iter().any(|row| row.len() != k) {
                return invalid("lambda must be a square matrix matching rho");
            }
            if lambda.iter().flatten().any(|&x| !(x >= 0.0 && x.is_finite())) {
                return invalid("lambda entries must be nonnegative");
            }
            if rho.iter().any(|&x| !(x >= 0.0)) || (rho.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
                return invalid("rho must be a probability vector");
            }
            let a: Vec<Vec<f64>> = lambda.iter().map(|row| row.iter().zip(rho).map(|(l, r)| l * r).collect()).collect();
            let growth = spectral_radius(&a)?;
            let r0 = growth / gamma;
            Ok(IndicatorSet::new(growth - gamma, r0, 1.0 - 1.0 / r0))
        }
    }
}

/// Spectral radius of a nonnegative square matrix: the largest over its
/// strongly connected blocks, each by power iteration on `B + I` stopped
/// when the Collatz–Wielandt bounds meet.
pub fn spectral_radius(a: &[Vec<f64>]) -> Result<f64> {
    let n = a.len();
    let mut best = 0.0f64;
    for block in strong_components(a) {
        let m = block.len();
        let mut x = vec![1.0; m];
        let mut converged = false;
        for _ in 0..1_000_000 {
            let y: Vec<f64> = (0..m)
                .map(|i| x[i] + block.iter().enumerate().map(|(j, &c)| a[block[i]][c] * x[j]).sum::<f64>())
                .collect();
            let ratios = y.iter().zip(&x).map(|(y, x)| y / x);
            let (lo, hi) = ratios.fold((f64::INFINITY, 0.0f64), |(lo, hi), r| (lo.min(r), hi.max(r)));
            let norm = y.iter().cloned().fold(0.0, f64::max);
            x = y.iter().map(|v| v / norm).collect();
            if hi - lo <= 1e-12 * hi {
                best = best.max(0.5 * (lo + hi) - 1.0);
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::Numerical(format!("power iteration did not converge on a block of size {m} (n = {n})")));
        }
    }
    Ok(best.max(0.0))
}

/// Tarjan's algorithm on the support graph `i → j` iff `a[i][j] > 0`.
fn strong_components(a: &[Vec<f64>]) -> Vec<Vec<usize>> {
    struct T<'a> {
        a: &'a [Vec<f64>],
        index: Vec<Option<usize>>,
        low: Vec<usize>,
        on_stack: Vec<bool>,
        stack: Vec<usize>,
        next: usize,
        out: Vec<Vec<usize>>,
    }
    fn visit(t: &mut T, v: usize) {
        t.index[v] = Some(t.next);
        t.low[v] = t.next;
        t.next += 1;
        t.stack.push(v);
        t.on_stack[v] = true;
        for w in 0..t.a.len() {
            if t.a[v][w] <= 0.0 {
                continue;
            }
            match t.index[w] {
                None => {
                    visit(t, w);
                    t.low[v] = t.low[v].min(t.low[w]);
                }
                Some(iw) if t.on_stack[w] => t.low[v] = t.low[v].min(iw),
                _ => {}
            }
        }
        if Some(t.low[v]) == t.index[v] {
            let mut comp = Vec::new();
            while let Some(w) = t.stack.pop() {
                t.on_stack[w] = false;
                comp.push(w);
                if w == v {
                    break;
                }
            }
            comp.sort_unstable();
            t.out.push(comp);
        }
    }
    let n = a.len();
    let mut t = T {
        a,
        index: vec![None; n],
        low: vec![0; n],
        on_stack: vec![false; n],
        stack: Vec::new(),
        next: 0,
        out: Vec::new(),
    };
    for v in 0..n {
        if t.index[v].is_none() {
            visit(&mut t, v);
        }
    }
    t.out
}

/// Probability that the epidemic started by one infective reached through an
/// edge dies out on a configuration model with degree law `p`.
///
/// Smallest fixed point of `z = ∫₀¹ g'(z + u^{λ/γ}(1−z)) du / g'(1)`, which is
/// the exponential-period integral after the substitution `u = e^{−γy}`.
pub fn extinction_probability(p: &DegreeDistribution, lambda: f64, gamma: f64) -> Result<f64> {
    check_rates(lambda, gamma)?;
    if p.mean() <= 0.0 {
        return domain("g'(1) must be positive");
    }
    let kappa = p.mean_excess_degree()?;
    if kappa * lambda / (lambda + gamma) <= 1.0 {
        return Ok(1.0);
    }
    let r = lambda / gamma;
    let g1 = p.mean();
    let phi = |z: f64| -> Result<f64> {
        let v = integrate(
            |u| p.pgf_eval((z + u.powf(r) * (1.0 - z)).min(1.0), 1).unwrap_or(f64::NAN),
            0.0,
            1.0,
            1e-14,
            1e-13,
        )?;
        Ok(v / g1)
    };
    let mut z = 0.0;
    for _ in 0..200 {
        let next = phi(z)?;
        if (next - z).abs() < 1e-12 {
            return Ok(next);
        }
        z = next;
    }
    // Slow linear convergence near criticality: the map is convex with fixed
    // points z* and 1, so Φ(x) − x < 0 on (z*, 1) and z sits just below z*.
    let mut hi = 1.0 - 0.5 * (1.0 - z);
    for _ in 0..60 {
        if phi(hi)? - hi < 0.0 {
            break;
        }
        hi = 1.0 - 0.5 * (1.0 - hi);
    }
    let root = brent(|x| phi(x).unwrap_or(f64::NAN) - x, z, hi, 1e-14)?;
    let resid = (phi(root)? - root).abs();
    if resid > 1e-9 {
        return Err(Error::Numerical(format!("extinction fixed point residual {resid}")));
    }
    Ok(root)
}

/// Law of the infectious period.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InfectiousPeriod {
    Exponential {
        gamma: f64,
    },
    /// Gamma law; `sd = 0` is the deterministic period `mean`.
    Gamma {
        mean: f64,
        sd: f64,
    },
    Deterministic {
        duration: f64,
    },
}

impl InfectiousPeriod {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            InfectiousPeriod::Exponential { gamma } => gamma > 0.0 && gamma.is_finite(),
            InfectiousPeriod::Gamma { mean, sd } => mean > 0.0 && mean.is_finite() && sd >= 0.0 && sd.is_finite(),
            InfectiousPeriod::Deterministic { duration } => duration > 0.0 && duration.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            invalid(format!("invalid infectious period {self:?}"))
        }
    }

    #[allow(clippy::redundant_guards)]
    fn canonical(&self) -> Self {
        match *self {
            InfectiousPeriod::Gamma { mean, sd } if sd == 0.0 => InfectiousPeriod::Deterministic { duration: mean },
            p => p,
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            InfectiousPeriod::Exponential { gamma } => 1.0 / gamma,
            InfectiousPeriod::Gamma { mean, .. } => mean,
            InfectiousPeriod::Deterministic { duration } => duration,
        }
    }

    /// `F̄(t) = P(T > t)`.
    pub fn survival(&self, t: f64) -> f64 {
        if t < 0.0 {
            return 1.0;
        }
        match self.canonical() {
            InfectiousPeriod::Exponential { gamma } => (-gamma * t).exp(),
            InfectiousPeriod::Gamma { mean, sd } => {
                let shape = (mean / sd).powi(2);
                let rate = mean / (sd * sd);
                Gamma::new(shape, rate).expect("validated parameters").sf(t)
            }
            InfectiousPeriod::Deterministic { duration } => {
                if t < duration {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// Exponential decay rate of `F̄`; infinite for bounded periods.
    pub fn tail_rate(&self) -> f64 {
        match self.canonical() {
            InfectiousPeriod::Exponential { gamma } => gamma,
            InfectiousPeriod::Gamma { mean, sd } => mean / (sd * sd),
            InfectiousPeriod::Deterministic { .. } => f64::INFINITY,
        }
    }

    /// `∫₀^∞ e^{−st} F̄(t) dt` for `s > −tail_rate`.
    pub fn laplace_survival(&self, s: f64) -> f64 {
        match self.canonical() {
            InfectiousPeriod::Exponential { gamma } => 1.0 / (s + gamma),
            InfectiousPeriod::Gamma { mean, sd } => {
                let shape = (mean / sd).powi(2);
                let rate = mean / (sd * sd);
                if s.abs() < 1e-300 {
                    return mean;
                }
                // (1 − (rate/(rate+s))^shape)/s, written to stay accurate near s = 0.
                -(-shape * (s / rate).ln_1p()).exp_m1() / s
            }
            InfectiousPeriod::Deterministic { duration } => {
                if s.abs() < 1e-300 {
                    duration
                } else {
                    -(-s * duration).exp_m1() / s
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthRate {
    pub r0: f64,
    pub alpha: f64,
    pub subcritical: bool,
}

/// `R0` and `α` on a configuration model with a general infectious period,
/// with infectivity profile `β(t) = κλ e^{−λt} F̄(t)`.
pub fn growth_rate_general(kappa: f64, lambda: f64, period: &InfectiousPeriod) -> Result<GrowthRate> {
    period.validate()?;
    if !(kappa > 0.0 && lambda > 0.0 && kappa.is_finite() && lambda.is_finite()) {
        return invalid("kappa and lambda must be positive");
    }
    let profile = |s: f64| kappa * lambda * period.laplace_survival(s);
    let r0 = profile(lambda);
    let s = malthus_root(profile, lambda, kappa * lambda, period.tail_rate())?;
    Ok(GrowthRate { r0, alpha: s - lambda, subcritical: r0 <= 1.0 })
}

/// Root in `s` of `profile(s) = 1` for a decreasing `profile` with
/// `profile(upper) ≤ 1`, searching below `start` toward `−tail` if needed.
fn malthus_root<F: Fn(f64) -> f64>(profile: F, start: f64, upper: f64, tail: f64) -> Result<f64> {
    let mut lo = start;
    let mut k = 0;
    while profile(lo) < 1.0 {
        k += 1;
        if k > 200 {
            return Err(Error::Numerical("could not bracket the growth rate".into()));
        }
        lo = if tail.is_finite() { -tail + (start + tail) * 0.5f64.powi(k) } else { start - 2f64.powi(k) };
    }
    let mut hi = upper.max(start);
    while profile(hi) > 1.0 {
        hi *= 2.0;
    }
    brent(|s| profile(s) - 1.0, lo, hi, 1e-14)
}

/// Homogeneous-mixing `R0` implied by a growth rate `alpha`.
pub fn homogeneous_r0_from_alpha(alpha: f64, period: &InfectiousPeriod) -> Result<f64> {
    period.validate()?;
    if alpha <= -period.tail_rate() {
        return domain("growth rate below the infectious-period tail rate");
    }
    Ok(period.mean() / period.laplace_survival(alpha))
}

/// Configuration-model `R0` implied by a growth rate `alpha`: solves
/// `∫ e^{−αt} κλ e^{−λt} F̄(t) dt = 1` for `λ`, then integrates `β`.
pub fn network_r0_from_alpha(alpha: f64, kappa: f64, period: &InfectiousPeriod) -> Result<f64> {
    period.validate()?;
    if kappa <= 1.0 {
        return domain("kappa must exceed 1");
    }
    if alpha <= -period.tail_rate() {
        return domain("growth rate below the infectious-period tail rate");
    }
    // λ ↦ κλ L(α+λ) increases from 0 toward κ.
    let g = |lambda: f64| kappa * lambda * period.laplace_survival(alpha + lambda) - 1.0;
    let lo = if alpha < 0.0 { -alpha * (1.0 + 1e-12) + f64::MIN_POSITIVE } else { 0.0 };
    let mut hi = 1.0f64.max(2.0 * lo);
    let mut k = 0;
    while g(hi) <= 0.0 {
        hi *= 2.0;
        k += 1;
        if k > 200 {
            return Err(Error::Numerical("could not bracket lambda".into()));
        }
    }
    let lambda = brent(g, lo, hi, 1e-15)?;
    Ok(kappa * lambda * period.laplace_survival(lambda))
}

/// Factors by which homogeneous-mixing estimates of `R0` and `v_c`, computed
/// from an observed growth rate, exceed the configuration-model values.
pub fn overestimation_ratios(alpha: f64, kappa: f64, period: &InfectiousPeriod) -> Result<(f64, f64)> {
    if !(alpha > 0.0) {
        return domain("growth rate must be positive");
    }
    if kappa <= 1.0 {
        return domain("v_c ratio undefined for kappa <= 1");
    }
    let r_hom = homogeneous_r0_from_alpha(alpha, period)?;
    let r_net = network_r0_from_alpha(alpha, kappa, period)?;
    Ok((r_hom / r_net, (1.0 - 1.0 / r_hom) / (1.0 - 1.0 / r_net)))
}

/// `R0 = (1 + α/δ)(1 + α/γ)` for SEIR with exponential latent and infectious
/// periods; `δ = ∞` gives the SIR value.
pub fn seir_r0_from_alpha(alpha: f64, gamma: f64, delta: f64) -> Result<f64> {
    if !(gamma > 0.0 && delta > 0.0) {
        return invalid("gamma and delta must be positive");
    }
    Ok((1.0 + alpha / delta) * (1.0 + alpha / gamma))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaEstimate {
    pub alpha: f64,
    pub stderr: f64,
    /// Events used in the fit.
    pub points: usize,
}

/// Least-squares slope of `ln(cumulative cases)` against time over the
/// events in `[t0, t1]`. Cases are counted at activation when the log has a
/// latent period, at infection otherwise; index cases count from time 0.
pub fn estimate_alpha(log: &EventLog, t0: f64, t1: f64) -> Result<AlphaEstimate> {
    if !(t0 <= t1) {
        return invalid("empty window");
    }
    let latent = log.has_latent_period();
    let mut cum = log.initial_infected.len() as f64;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for e in &log.events {
        let counts = match e.kind {
            EventKind::Activation { .. } => latent,
            EventKind::Infection { .. } => !latent,
            EventKind::Removal { .. } => false,
        };
        if !counts {
            continue;
        }
        cum += 1.0;
        if e.time >= t0 && e.time <= t1 {
            xs.push(e.time);
            ys.push(cum.ln());
        }
    }
    let n = xs.len();
    if n < 10 {
        return invalid(format!("only {n} events in the window; at least 10 needed"));
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx <= 0.0 {
        return domain("all events share one time");
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let ssr: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - my - slope * (x - mx)).powi(2)).sum();
    Ok(AlphaEstimate { alpha: slope, stderr: (ssr / (nf - 2.0) / sxx).sqrt(), points: n })
}

/// Mean number of children among cases infected by `cutoff` whose removal
/// is recorded.
pub fn estimate_r0_offspring(forest: &InfectionForest, cutoff: f64) -> Result<f64> {
    let early: Vec<_> =
        forest.nodes.iter().filter(|n| n.infection_time <= cutoff && n.removal_time.is_some()).collect();
    if early.len() < 10 {
        return invalid(format!("only {} completed early cases; at least 10 needed", early.len()));
    }
    Ok(early.iter().map(|n| n.children.len() as f64).sum::<f64>() / early.len() as f64)
}

/// Degree law of the susceptibles left once a fraction `ε` of a large
/// configuration model has been infected.
#[derive(Debug, Clone, PartialEq)]
pub struct PostEpsilonLaw {
    /// Solves `g(1 − z) = 1 − ε`.
    pub z: f64,
    /// `p_k (1 − z)^k / (1 − ε)`.
    pub law: DegreeDistribution,
    pub fifth_moment: f64,
}

pub fn post_epsilon_degree_law(p: &DegreeDistribution, epsilon: f64) -> Result<PostEpsilonLaw> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return invalid("epsilon must lie in (0, 1)");
    }
    let p0 = p.get(0);
    if 1.0 - epsilon <= p0 {
        return domain(format!(
            "epsilon = {epsilon} needs more infections than there are individuals with positive degree (p_0 = {p0})"
        ));
    }
    let f = |z: f64| p.pgf_eval(1.0 - z, 0).unwrap_or(f64::NAN) - (1.0 - epsilon);
    let z = brent(f, 0.0, 1.0, 1e-15)?;
    let resid = f(z).abs();
    if resid > 1e-10 {
        return Err(Error::Numerical(format!("post-epsilon root residual {resid}")));
    }
    let masses = p.measure().iter().map(|(k, m)| m * (1.0 - z).powi(k as i32) / (1.0 - epsilon)).collect();
    let law = DegreeDistribution::normalized(DegreeMeasure::from_masses(masses)?)?;
    let fifth_moment = law.fifth_moment();
    Ok(PostEpsilonLaw { z, law, fifth_moment })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn cm_table_row() {
        let s = indicators(&Model::Cm { kappa: 20.0, lambda: 1.0, gamma: 1.0 }).unwrap();
        assert_abs_diff_eq!(s.alpha, 18.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.r0, 10.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.vc, 0.9, epsilon = 1e-12);
    }

    #[test]
    fn critical_complete_graph() {
        let s = indicators(&Model::Complete { lambda: 1.3, gamma: 1.3 }).unwrap();
        assert_eq!((s.alpha, s.r0, s.vc), (0.0, 1.0, 0.0));
        assert!(s.subcritical);
    }

    #[test]
    fn one_type_sbm_is_complete_graph() {
        let s = indicators(&Model::Sbm { lambda: vec![vec![3.0]], rho: vec![1.0], gamma: 2.0 }).unwrap();
        let c = indicators(&Model::Complete { lambda: 3.0, gamma: 2.0 }).unwrap();
        assert_abs_diff_eq!(s.r0, c.r0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.alpha, c.alpha, epsilon = 1e-12);
    }

    #[test]
    fn reducible_sbm_uses_largest_block() {
        // Type 1 infects type 2 only; type 2 is an isolated block.
        let a = vec![vec![1.0, 4.0], vec![0.0, 2.5]];
        assert_abs_diff_eq!(spectral_radius(&a).unwrap(), 2.5, epsilon = 1e-10);
        let cyc = vec![vec![0.0, 4.0], vec![1.0, 0.0]];
        assert_abs_diff_eq!(spectral_radius(&cyc).unwrap(), 2.0, epsilon = 1e-10);
    }

    #[test]
    fn non_square_lambda_rejected() {
        let m = Model::Sbm { lambda: vec![vec![1.0, 2.0]], rho: vec![0.5, 0.5], gamma: 1.0 };
        assert!(indicators(&m).is_err());
    }

    #[test]
    fn laplace_transforms_match_quadrature() {
        let laws = [
            InfectiousPeriod::Exponential { gamma: 1.3 },
            InfectiousPeriod::Gamma { mean: 1.0, sd: 1.5 },
            InfectiousPeriod::Gamma { mean: 2.0, sd: 0.5 },
            InfectiousPeriod::Deterministic { duration: 1.0 },
        ];
        for law in laws {
            for s in [-0.2, 0.0, 0.7, 3.0] {
                let end = if law.tail_rate().is_finite() { 400.0 } else { law.mean() };
                let q = integrate(|t| (-s * t).exp() * law.survival(t), 0.0, end, 1e-12, 1e-11).unwrap();
                assert_abs_diff_eq!(law.laplace_survival(s), q, epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn exponential_growth_rate_closed_form() {
        let g = growth_rate_general(20.0, 1.0, &InfectiousPeriod::Exponential { gamma: 1.0 }).unwrap();
        assert_abs_diff_eq!(g.alpha, 18.0, epsilon = 1e-8);
        assert_abs_diff_eq!(g.r0, 10.0, epsilon = 1e-8);
        let d = growth_rate_general(20.0, 1.0, &InfectiousPeriod::Deterministic { duration: 1.0 }).unwrap();
        assert_abs_diff_eq!(d.r0, 20.0 * (1.0 - (-1.0f64).exp()), epsilon = 1e-10);
    }

    #[test]
    fn markov_ratios_match_table() {
        let (r, v) = overestimation_ratios(1.0, 20.0, &InfectiousPeriod::Exponential { gamma: 1.0 }).unwrap();
        assert_abs_diff_eq!(r, 1.05, epsilon = 1e-10);
        assert_abs_diff_eq!(v, 20.0 / 19.0, epsilon = 1e-10);
    }

    #[test]
    fn seir_example() {
        assert_abs_diff_eq!(seir_r0_from_alpha(0.1, 0.2, 0.1).unwrap(), 3.0, epsilon = 1e-12);
        assert_eq!(seir_r0_from_alpha(0.4, 2.0, f64::INFINITY).unwrap(), 1.2);
    }

    #[test]
    fn extinction_is_one_when_subcritical() {
        assert_eq!(extinction_probability(&DegreeDistribution::dirac(1), 5.0, 1.0).unwrap(), 1.0);
        let p = DegreeDistribution::poisson(2.0).unwrap();
        assert_eq!(extinction_probability(&p, 1.0, 1.0).unwrap(), 1.0);
    }

    #[test]
    fn poisson_post_epsilon_closed_form() {
        let p = DegreeDistribution::poisson(5.0).unwrap();
        let r = post_epsilon_degree_law(&p, 0.1).unwrap();
        assert_abs_diff_eq!(r.z, -(0.9f64).ln() / 5.0, epsilon = 1e-10);
        // Thinning a Poisson(a) by 1−z gives Poisson(a(1−z)).
        let q = DegreeDistribution::poisson(5.0 * (1.0 - r.z)).unwrap();
        assert!(r.law.total_variation(&q) < 1e-9);
        assert!(post_epsilon_degree_law(&DegreeDistribution::poisson(0.1).unwrap(), 0.2).is_err());
    }
}

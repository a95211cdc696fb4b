use crate::error::{domain, invalid, Result};
use crate::measures::{zeta_tail, DegreeDistribution};
use crate::numeric::golden_section;

/// Exponent above which a tail is too thin for herd immunity to need
/// vaccinating most of the population.
pub const ALPHA_CRITICAL: f64 = 3.4788;
/// Exponent below which the mean degree diverges.
pub const ALPHA_FINITE_MEAN: f64 = 2.0;

const ALPHA_LO: f64 = 1.0 + 1e-6;
const ALPHA_HI: f64 = 20.0;

/// Power law `k^{−α}/ζ(α, k0)` fitted to the tail `k ≥ k0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailFit {
    pub alpha: f64,
    pub k0: usize,
    /// Kullback–Leibler divergence of the fit from the renormalized tail.
    pub divergence: f64,
    /// Empirical mass at or above `k0`.
    pub tail_mass: f64,
    /// The minimizer sits at the edge of the search interval.
    pub degenerate: bool,
}

/// Minimizes the divergence of `k^{−α}/ζ(α, k0)` from the empirical law
/// restricted to `k ≥ k0`.
pub fn fit_power_law_kl(p: &DegreeDistribution, k0: usize) -> Result<TailFit> {
    if k0 == 0 {
        return invalid("tail threshold must be at least 1");
    }
    if k0 > p.max_degree() {
        return domain(format!("threshold {k0} beyond the largest degree {}", p.max_degree()));
    }
    let tail: Vec<(f64, f64)> =
        (k0..=p.max_degree()).filter(|&k| p.get(k) > 0.0).map(|k| (k as f64, p.get(k))).collect();
    let mass: f64 = tail.iter().map(|t| t.1).sum();
    if mass <= 0.0 {
        return domain(format!("no mass at or above {k0}"));
    }
    let entropy: f64 = tail.iter().map(|&(_, w)| w / mass * (w / mass).ln()).sum();
    let mean_ln: f64 = tail.iter().map(|&(k, w)| w / mass * k.ln()).sum();
    let kl = |a: f64| entropy + a * mean_ln + zeta_tail(a, k0).ln();
    let alpha = golden_section(kl, ALPHA_LO, ALPHA_HI, 1e-6);
    let degenerate = !(ALPHA_LO + 1e-3..=ALPHA_HI - 1e-3).contains(&alpha);
    Ok(TailFit { alpha, k0, divergence: kl(alpha).max(0.0), tail_mass: mass, degenerate })
}

/// Fits at every threshold from 1 up to the largest degree with at least
/// `min_mass` of the distribution at or above it.
pub fn kl_scan(p: &DegreeDistribution, min_mass: f64) -> Vec<TailFit> {
    (1..=p.max_degree()).map_while(|k0| fit_power_law_kl(p, k0).ok().filter(|f| f.tail_mass >= min_mass)).collect()
}

/// Discrete Hill estimate of the pmf exponent.
///
/// `u` is the `m`-th largest degree and every observation `≥ u` is used
/// (`m_eff ≥ m` with ties), with the continuity-corrected cut `u − ½`:
/// `1 + m_eff / Σ ln(k_j / (u − ½))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HillEstimate {
    pub alpha: f64,
    pub threshold: usize,
    pub m_eff: usize,
}

pub fn hill(degrees: &[usize], m: usize) -> Result<HillEstimate> {
    let mut sorted: Vec<usize> = degrees.to_vec();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    hill_sorted(&sorted, m)
}

fn hill_sorted(desc: &[usize], m: usize) -> Result<HillEstimate> {
    if m == 0 || m > desc.len() {
        return invalid(format!("order statistic {m} out of range 1..={}", desc.len()));
    }
    let u = desc[m - 1];
    if u == 0 {
        return domain("threshold degree is zero");
    }
    let cut = u as f64 - 0.5;
    let m_eff = desc.partition_point(|&k| k >= u);
    let s: f64 = desc[..m_eff].iter().map(|&k| (k as f64 / cut).ln()).sum();
    Ok(HillEstimate { alpha: 1.0 + m_eff as f64 / s, threshold: u, m_eff })
}

/// One estimate per distinct threshold with at least `min_tail` observations
/// at or above it, largest threshold first.
pub fn hill_scan(degrees: &[usize], min_tail: usize) -> Vec<HillEstimate> {
    let mut desc: Vec<usize> = degrees.to_vec();
    desc.sort_unstable_by(|a, b| b.cmp(a));
    let mut out: Vec<HillEstimate> = Vec::new();
    let mut m = min_tail.max(1);
    while m <= desc.len() && desc[m - 1] > 0 {
        let Ok(h) = hill_sorted(&desc, m) else { break };
        m = h.m_eff + 1;
        out.push(h);
    }
    out
}

/// Plateau of a Hill scan.
#[derive(Debug, Clone, PartialEq)]
pub struct HillPlateau {
    pub alpha: f64,
    /// `max − min` over the window.
    pub spread: f64,
    pub window: Vec<HillEstimate>,
}

/// Average over the `window` consecutive thresholds whose estimates vary
/// least.
pub fn hill_plateau(degrees: &[usize], min_tail: usize, window: usize) -> Result<HillPlateau> {
    let scan = hill_scan(degrees, min_tail);
    if window == 0 || scan.len() < window {
        return domain(format!("only {} thresholds with {min_tail} tail observations", scan.len()));
    }
    let best = scan
        .windows(window)
        .map(|w| {
            let (lo, hi) =
                w.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), h| (lo.min(h.alpha), hi.max(h.alpha)));
            (hi - lo, w)
        })
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .expect("at least one window");
    let alpha = best.1.iter().map(|h| h.alpha).sum::<f64>() / window as f64;
    Ok(HillPlateau { alpha, spread: best.0, window: best.1.to_vec() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn kl_recovers_exact_power_law() {
        let p = DegreeDistribution::power_law(2.7, 1, Some(200_000)).unwrap();
        let f = fit_power_law_kl(&p, 1).unwrap();
        assert_abs_diff_eq!(f.alpha, 2.7, epsilon = 1e-3);
        assert!(!f.degenerate);
    }

    #[test]
    fn kl_threshold_beyond_support() {
        let p = DegreeDistribution::poisson(3.0).unwrap();
        assert!(fit_power_law_kl(&p, p.max_degree() + 1).is_err());
        assert!(fit_power_law_kl(&p, 0).is_err());
    }

    #[test]
    fn single_point_tail_is_degenerate() {
        let f = fit_power_law_kl(&DegreeDistribution::dirac(4), 4).unwrap();
        assert!(f.degenerate);
    }

    #[test]
    fn hill_on_constant_degrees() {
        let h = hill(&[5; 50], 10).unwrap();
        assert_eq!(h.m_eff, 50);
        assert_abs_diff_eq!(h.alpha, 1.0 + 1.0 / (5.0f64 / 4.5).ln(), epsilon = 1e-12);
    }

    #[test]
    fn hill_scan_steps_through_ties() {
        let d = [1, 1, 2, 2, 2, 3, 5, 5];
        let thresholds: Vec<usize> = hill_scan(&d, 1).iter().map(|h| h.threshold).collect();
        assert_eq!(thresholds, vec![5, 3, 2, 1]);
        assert!(hill_plateau(&d, 1, 5).is_err());
    }
}

//! Finite measures on the nonnegative integers.
//!
//! A [`DegreeMeasure`] is stored densely: index `k` holds the mass at degree
//! `k`. Parametric families are truncated where the remaining tail mass drops
//! below [`TAIL_MASS`] and renormalised, so every sum below is finite and
//! exact up to rounding.

use std::fmt::Write as _;

use crate::error::{domain, invalid, Error, Result};

/// Tail mass discarded when materialising infinite-support families.
pub const TAIL_MASS: f64 = 1e-12;

/// Slack allowed when removing mass, and when checking integer values.
pub const INTEGER_TOL: f64 = 1e-9;

/// Finite nonnegative measure on `{0, 1, 2, ...}`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DegreeMeasure {
    mass: Vec<f64>,
}

impl DegreeMeasure {
    pub fn zero() -> Self {
        DegreeMeasure { mass: Vec::new() }
    }

    /// Measure with `masses[k]` at degree `k`.
    pub fn from_masses(masses: Vec<f64>) -> Result<Self> {
        if let Some(k) = masses.iter().position(|m| !(m.is_finite() && *m >= 0.0)) {
            return invalid(format!("mass at degree {k} is negative or not finite"));
        }
        let mut m = DegreeMeasure { mass: masses };
        m.trim();
        Ok(m)
    }

    pub fn from_pairs<I: IntoIterator<Item = (usize, f64)>>(pairs: I) -> Result<Self> {
        let mut m = DegreeMeasure::zero();
        for (k, w) in pairs {
            m.add(k, w)?;
        }
        Ok(m)
    }

    /// Counting measure `Σ_u δ_{d_u}`.
    pub fn census<I: IntoIterator<Item = usize>>(degrees: I) -> Self {
        let mut mass = Vec::new();
        for d in degrees {
            if d >= mass.len() {
                mass.resize(d + 1, 0.0);
            }
            mass[d] += 1.0;
        }
        DegreeMeasure { mass }
    }

    /// `w·δ_k`.
    pub fn dirac(k: usize, w: f64) -> Result<Self> {
        let mut m = DegreeMeasure::zero();
        m.add(k, w)?;
        Ok(m)
    }

    fn trim(&mut self) {
        while self.mass.last() == Some(&0.0) {
            self.mass.pop();
        }
    }

    pub fn get(&self, k: usize) -> f64 {
        self.mass.get(k).copied().unwrap_or(0.0)
    }

    /// Dense view, index = degree.
    pub fn as_slice(&self) -> &[f64] {
        &self.mass
    }

    /// Largest degree carrying positive mass.
    pub fn max_degree(&self) -> Option<usize> {
        self.mass.iter().rposition(|&m| m > 0.0)
    }

    pub fn is_zero(&self) -> bool {
        self.mass.iter().all(|&m| m == 0.0)
    }

    /// Nonzero `(degree, mass)` pairs in increasing degree order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.mass.iter().enumerate().filter(|(_, &m)| m > 0.0).map(|(k, &m)| (k, m))
    }

    /// `⟨μ, f⟩ = Σ_k f(k) μ(k)`.
    pub fn integrate<F: Fn(usize) -> f64>(&self, f: F) -> f64 {
        self.iter().map(|(k, m)| f(k) * m).sum()
    }

    /// `⟨μ, 1⟩`.
    pub fn total(&self) -> f64 {
        self.mass.iter().sum()
    }

    /// `⟨μ, χ^q⟩`.
    pub fn moment(&self, q: u32) -> f64 {
        self.integrate(|k| (k as f64).powi(q as i32))
    }

    /// `⟨μ, χ^5⟩`, the quantity bounded in the moment assumptions of the
    /// measure-valued limit theorem.
    pub fn fifth_moment(&self) -> f64 {
        self.moment(5)
    }

    /// `⟨μ, χ(χ−1)⟩`.
    pub fn factorial_moment2(&self) -> f64 {
        self.integrate(|k| (k as f64) * (k as f64 - 1.0))
    }

    /// Adds `w ≥ 0` at degree `k`.
    pub fn add(&mut self, k: usize, w: f64) -> Result<()> {
        if !(w.is_finite() && w >= 0.0) {
            return invalid(format!("cannot add mass {w}"));
        }
        if k >= self.mass.len() {
            self.mass.resize(k + 1, 0.0);
        }
        self.mass[k] += w;
        self.trim();
        Ok(())
    }

    /// Removes `w ≥ 0` from degree `k`; rejects removing more than present.
    pub fn remove(&mut self, k: usize, w: f64) -> Result<()> {
        if !(w.is_finite() && w >= 0.0) {
            return invalid(format!("cannot remove mass {w}"));
        }
        let have = self.get(k);
        if w > have + INTEGER_TOL {
            return domain(format!("removing {w} at degree {k} exceeds present mass {have}"));
        }
        if k < self.mass.len() {
            self.mass[k] = (have - w).max(0.0);
            self.trim();
        }
        Ok(())
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c.is_finite() && c >= 0.0) {
            return invalid(format!("scale factor {c} must be finite and nonnegative"));
        }
        DegreeMeasure::from_masses(self.mass.iter().map(|m| m * c).collect())
    }

    pub fn plus(&self, other: &DegreeMeasure) -> Self {
        let n = self.mass.len().max(other.mass.len());
        let mass = (0..n).map(|k| self.get(k) + other.get(k)).collect();
        DegreeMeasure { mass }
    }

    /// True when every mass is within `tol` of an integer.
    pub fn is_integer_valued(&self, tol: f64) -> bool {
        self.mass.iter().all(|m| (m - m.round()).abs() <= tol)
    }

    /// Integer masses, rejecting values further than [`INTEGER_TOL`] from an
    /// integer.
    pub fn integer_counts(&self) -> Result<Vec<u64>> {
        if !self.is_integer_valued(INTEGER_TOL) {
            return domain("measure is not integer-valued");
        }
        Ok(self.mass.iter().map(|m| m.round() as u64).collect())
    }

    /// `Σ_k μ(k) z^k` and its first two derivatives (no normalisation).
    pub fn pgf(&self, z: f64, order: u32) -> Result<f64> {
        if order > 2 {
            return invalid(format!("pgf derivative of order {order} is not supported"));
        }
        // Horner on the differentiated coefficients.
        let mut acc = 0.0;
        for k in (order as usize..self.mass.len()).rev() {
            let c = match order {
                0 => 1.0,
                1 => k as f64,
                _ => (k * (k - 1)) as f64,
            };
            acc = acc * z + c * self.mass[k];
        }
        Ok(acc)
    }

    /// One `degree mass` pair per line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (k, m) in self.iter() {
            let _ = writeln!(out, "{k} {m}");
        }
        out
    }

    /// Parses the `degree mass` text format. Blank lines and lines starting
    /// with `#` are ignored; repeated degrees accumulate.
    pub fn parse_text(text: &str) -> Result<Self> {
        let mut m = DegreeMeasure::zero();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |msg: &str| Error::Parse { line: i + 1, msg: msg.to_string() };
            let mut it = line.split_whitespace();
            let k: usize = it.next().ok_or_else(|| err("missing degree"))?.parse().map_err(|_| err("bad degree"))?;
            let w: f64 = it.next().ok_or_else(|| err("missing mass"))?.parse().map_err(|_| err("bad mass"))?;
            if it.next().is_some() {
                return Err(err("expected two fields"));
            }
            m.add(k, w).map_err(|e| err(&e.to_string()))?;
        }
        Ok(m)
    }
}

/// Probability measure on degrees with cached mean and variance.
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeDistribution {
    measure: DegreeMeasure,
    mean: f64,
    variance: f64,
}

impl DegreeDistribution {
    /// Wraps a measure of total mass 1 (absolute tolerance 1e-12).
    pub fn new(measure: DegreeMeasure) -> Result<Self> {
        let total = measure.total();
        if (total - 1.0).abs() > 1e-12 {
            return domain(format!("total mass {total} is not 1"));
        }
        Ok(Self::cache(measure))
    }

    /// Rescales a nonzero measure to a probability distribution.
    pub fn normalized(measure: DegreeMeasure) -> Result<Self> {
        let total = measure.total();
        if total <= 0.0 {
            return domain("cannot normalise a zero measure");
        }
        Ok(Self::cache(measure.scaled(1.0 / total)?))
    }

    fn cache(measure: DegreeMeasure) -> Self {
        let mean = measure.moment(1);
        let variance = measure.integrate(|k| (k as f64 - mean).powi(2));
        DegreeDistribution { measure, mean, variance }
    }

    pub fn dirac(d: usize) -> Self {
        Self::cache(DegreeMeasure::dirac(d, 1.0).expect("unit mass"))
    }

    /// Poisson(a) truncated at [`TAIL_MASS`].
    pub fn poisson(a: f64) -> Result<Self> {
        Self::poisson_truncated(a, TAIL_MASS)
    }

    pub fn poisson_truncated(a: f64, tail: f64) -> Result<Self> {
        if !(a.is_finite() && a >= 0.0) {
            return invalid(format!("Poisson parameter {a} must be finite and nonnegative"));
        }
        if a == 0.0 {
            return Ok(Self::dirac(0));
        }
        let mut masses = Vec::new();
        let mut k = 0usize;
        loop {
            let ln_p = -a + k as f64 * a.ln() - crate::numeric::ln_factorial(k as u64);
            let p = ln_p.exp();
            masses.push(p);
            // For k + 1 > a the tail beyond k is dominated by a geometric series.
            let r = a / (k as f64 + 2.0);
            if (k as f64 + 1.0) > a && p * r / (1.0 - r) < tail {
                break;
            }
            k += 1;
        }
        Self::normalized(DegreeMeasure::from_masses(masses)?)
    }

    /// Geometric law `p_k = ρ(1−ρ)^{k−1}`, `k ≥ 1`, with PGF `ρz/(1−(1−ρ)z)`.
    pub fn geometric(rho: f64) -> Result<Self> {
        if !(rho > 0.0 && rho <= 1.0) {
            return invalid(format!("geometric parameter {rho} must lie in (0, 1]"));
        }
        let mut masses = vec![0.0];
        let mut p = rho;
        let mut tail = 1.0 - rho;
        masses.push(p);
        while tail >= TAIL_MASS {
            p *= 1.0 - rho;
            tail *= 1.0 - rho;
            masses.push(p);
        }
        Self::normalized(DegreeMeasure::from_masses(masses)?)
    }

    pub fn binomial(n: u64, p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return invalid(format!("binomial probability {p} outside [0, 1]"));
        }
        let masses = (0..=n)
            .map(|k| {
                if p == 0.0 {
                    if k == 0 {
                        1.0
                    } else {
                        0.0
                    }
                } else if p == 1.0 {
                    if k == n {
                        1.0
                    } else {
                        0.0
                    }
                } else {
                    (crate::numeric::ln_choose(n, k) + k as f64 * p.ln() + (n - k) as f64 * (1.0 - p).ln()).exp()
                }
            })
            .collect();
        Self::normalized(DegreeMeasure::from_masses(masses)?)
    }

    /// Discrete power law `p_k ∝ k^{−α}` for `k ≥ k_min`, truncated at
    /// [`TAIL_MASS`] or at `k_max` when given.
    pub fn power_law(alpha: f64, k_min: usize, k_max: Option<usize>) -> Result<Self> {
        if !(alpha > 1.0) || k_min == 0 {
            return invalid("power law needs alpha > 1 and k_min >= 1");
        }
        let k_max = match k_max {
            Some(k) if k >= k_min => k,
            Some(_) => return invalid("k_max below k_min"),
            None => {
                // Tail beyond K is about K^{1−α}/(α−1) relative to k_min^{−α}·norm.
                let norm = zeta_tail(alpha, k_min);
                let bound = (TAIL_MASS * norm * (alpha - 1.0)).powf(-1.0 / (alpha - 1.0)).ceil();
                if bound > 2e7 {
                    return domain(format!("power law with alpha={alpha} needs truncation beyond 2e7; pass k_max"));
                }
                (bound as usize).max(k_min)
            }
        };
        let masses = (0..=k_max).map(|k| if k < k_min { 0.0 } else { (k as f64).powf(-alpha) }).collect();
        Self::normalized(DegreeMeasure::from_masses(masses)?)
    }

    pub fn measure(&self) -> &DegreeMeasure {
        &self.measure
    }

    pub fn into_measure(self) -> DegreeMeasure {
        self.measure
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn variance(&self) -> f64 {
        self.variance
    }

    pub fn get(&self, k: usize) -> f64 {
        self.measure.get(k)
    }

    pub fn max_degree(&self) -> usize {
        self.measure.max_degree().unwrap_or(0)
    }

    /// `g(z)`, `g'(z)` or `g''(z)` for `z ∈ [0, 1]`.
    pub fn pgf_eval(&self, z: f64, order: u32) -> Result<f64> {
        if !(0.0..=1.0).contains(&z) {
            return domain(format!("pgf argument {z} outside [0, 1]"));
        }
        if z == 1.0 && order == 0 {
            return Ok(1.0);
        }
        self.measure.pgf(z, order)
    }

    /// `q_k = k p_k / m`.
    pub fn size_biased(&self) -> Result<Self> {
        if self.mean <= 0.0 {
            return domain("size-biasing undefined for a distribution with zero mean");
        }
        let masses = self.measure.as_slice().iter().enumerate().map(|(k, p)| k as f64 * p / self.mean).collect();
        Self::normalized(DegreeMeasure::from_masses(masses)?)
    }

    /// `κ = Σ k(k−1) p_k / m`.
    pub fn mean_excess_degree(&self) -> Result<f64> {
        if self.mean <= 0.0 {
            return domain("mean excess degree undefined for a distribution with zero mean");
        }
        Ok(self.measure.factorial_moment2() / self.mean)
    }

    pub fn fifth_moment(&self) -> f64 {
        self.measure.fifth_moment()
    }

    /// Total-variation distance `½ Σ |p_k − q_k|`.
    pub fn total_variation(&self, other: &DegreeDistribution) -> f64 {
        let n = self.measure.as_slice().len().max(other.measure.as_slice().len());
        0.5 * (0..n).map(|k| (self.get(k) - other.get(k)).abs()).sum::<f64>()
    }

    /// Inverse-CDF sampler over the finite support.
    pub fn sampler(&self) -> DegreeSampler {
        let mut cdf = Vec::with_capacity(self.measure.as_slice().len());
        let mut acc = 0.0;
        for &p in self.measure.as_slice() {
            acc += p;
            cdf.push(acc);
        }
        DegreeSampler { cdf }
    }
}

/// `Σ_{k ≥ k_min} k^{−α}` to absolute accuracy about 1e-12.
pub fn zeta_tail(alpha: f64, k_min: usize) -> f64 {
    // Direct sum up to K, then Euler–Maclaurin for the remainder.
    let k_cut = (k_min + 1000).max(2000);
    let mut s = 0.0;
    for k in (k_min..k_cut).rev() {
        s += (k as f64).powf(-alpha);
    }
    let kk = k_cut as f64;
    s + kk.powf(1.0 - alpha) / (alpha - 1.0) + 0.5 * kk.powf(-alpha) + alpha / 12.0 * kk.powf(-alpha - 1.0)
}

/// Draws degrees from a [`DegreeDistribution`].
#[derive(Debug, Clone)]
pub struct DegreeSampler {
    cdf: Vec<f64>,
}

impl DegreeSampler {
    pub fn sample<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random::<f64>() * self.cdf.last().copied().unwrap_or(1.0);
        self.cdf.partition_point(|&c| c <= u).min(self.cdf.len().saturating_sub(1))
    }
}

/// Free-function form of [`DegreeDistribution::pgf_eval`].
pub fn pgf_eval(p: &DegreeDistribution, z: f64, order: u32) -> Result<f64> {
    p.pgf_eval(z, order)
}

/// Free-function form of [`DegreeDistribution::size_biased`].
pub fn size_biased(p: &DegreeDistribution) -> Result<DegreeDistribution> {
    p.size_biased()
}

/// Free-function form of [`DegreeDistribution::mean_excess_degree`].
pub fn mean_excess_degree(p: &DegreeDistribution) -> Result<f64> {
    p.mean_excess_degree()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn two_point() -> DegreeDistribution {
        DegreeDistribution::new(DegreeMeasure::from_pairs([(1, 0.5), (2, 0.5)]).unwrap()).unwrap()
    }

    #[test]
    fn pgf_hand_values() {
        let p = two_point();
        assert_abs_diff_eq!(p.pgf_eval(0.5, 1).unwrap(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p.pgf_eval(0.5, 0).unwrap(), 0.5 * 0.5 + 0.5 * 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(p.pgf_eval(0.3, 2).unwrap(), 1.0, epsilon = 1e-15);
        assert!(p.pgf_eval(0.5, 3).is_err());
        assert!(p.pgf_eval(1.5, 0).is_err());
    }

    #[test]
    fn poisson_pgf_closed_form() {
        let a = 2.0;
        let p = DegreeDistribution::poisson_truncated(a, 1e-14).unwrap();
        assert_abs_diff_eq!(p.pgf_eval(1.0, 0).unwrap(), 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(p.measure().pgf(1.0, 0).unwrap(), 1.0, epsilon = 1e-10);
        for z in [0.0, 0.2, 0.5, 0.9] {
            assert_abs_diff_eq!(p.pgf_eval(z, 0).unwrap(), (a * (z - 1.0)).exp(), epsilon = 1e-11);
            assert_abs_diff_eq!(p.pgf_eval(z, 1).unwrap(), a * (a * (z - 1.0)).exp(), epsilon = 1e-10);
        }
    }

    #[test]
    fn size_biasing_examples() {
        let q = two_point().size_biased().unwrap();
        assert_abs_diff_eq!(q.get(1), 1.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(q.get(2), 2.0 / 3.0, epsilon = 1e-15);
        assert_eq!(DegreeDistribution::dirac(4).size_biased().unwrap(), DegreeDistribution::dirac(4));
        let p = DegreeDistribution::poisson(3.0).unwrap();
        let q = p.size_biased().unwrap();
        for k in 1..15 {
            assert_abs_diff_eq!(q.get(k), p.get(k - 1), epsilon = 1e-12);
        }
        assert!(DegreeDistribution::dirac(0).size_biased().is_err());
    }

    #[test]
    fn mean_excess_degree_examples() {
        assert_abs_diff_eq!(DegreeDistribution::dirac(5).mean_excess_degree().unwrap(), 4.0, epsilon = 1e-12);
        let p = DegreeDistribution::poisson(4.5).unwrap();
        assert_abs_diff_eq!(p.mean_excess_degree().unwrap(), 4.5, epsilon = 1e-9);
        let rho = 0.3;
        let g = DegreeDistribution::geometric(rho).unwrap();
        // Truncating a 1e-12 tail shifts the k(k-1)-weighted sum by ~1e-9.
        assert_abs_diff_eq!(g.mean_excess_degree().unwrap(), 2.0 * (1.0 - rho) / rho, epsilon = 1e-8);
        assert!(DegreeDistribution::dirac(0).mean_excess_degree().is_err());
    }

    #[test]
    fn removal_rejects_excess() {
        let mut m = DegreeMeasure::dirac(3, 2.0).unwrap();
        assert!(m.remove(3, 2.5).is_err());
        m.remove(3, 2.0).unwrap();
        assert!(m.is_zero());
        assert!(m.add(1, -1.0).is_err());
    }

    #[test]
    fn text_round_trip() {
        let m = DegreeMeasure::from_pairs([(0, 0.25), (3, 0.75)]).unwrap();
        let back = DegreeMeasure::parse_text(&m.to_text()).unwrap();
        assert_eq!(m, back);
        let err = DegreeMeasure::parse_text("# c\n1 0.5\n2 x\n").unwrap_err();
        assert_eq!(err, Error::Parse { line: 3, msg: "bad mass".into() });
    }

    #[test]
    fn power_law_normalised() {
        let p = DegreeDistribution::power_law(3.0, 1, None).unwrap();
        assert_abs_diff_eq!(p.measure().total(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p.get(1), 1.0 / 1.202_056_903_159_594, epsilon = 1e-6);
        assert_abs_diff_eq!(zeta_tail(3.0, 1), 1.202_056_903_159_594, epsilon = 1e-12);
    }
}

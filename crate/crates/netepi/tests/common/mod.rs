//! Statistical helpers shared by the integration tests.
#![allow(dead_code)]

/// Two-sample Kolmogorov–Smirnov statistic and asymptotic p-value.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> (f64, f64) {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    x.sort_by(f64::total_cmp);
    y.sort_by(f64::total_cmp);
    let (n, m) = (x.len(), y.len());
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < n && j < m {
        let t = x[i].min(y[j]);
        while i < n && x[i] <= t {
            i += 1;
        }
        while j < m && y[j] <= t {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    let en = ((n * m) as f64 / (n + m) as f64).sqrt();
    (d, kolmogorov_sf((en + 0.12 + 0.11 / en) * d))
}

/// `P(K > x)` for the Kolmogorov distribution.
pub fn kolmogorov_sf(x: f64) -> f64 {
    if x < 0.2 {
        return 1.0;
    }
    let mut s = 0.0;
    for k in 1..200 {
        let term = (-2.0 * (k * k) as f64 * x * x).exp();
        s += if k % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * s).clamp(0.0, 1.0)
}

/// Anderson–Darling statistic of `sample` against the continuous cdf `cdf`.
pub fn anderson_darling(sample: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut u: Vec<f64> = sample.iter().map(|&x| cdf(x).clamp(1e-300, 1.0 - 1e-16)).collect();
    u.sort_by(f64::total_cmp);
    let n = u.len();
    let s: f64 = (0..n).map(|i| (2 * i + 1) as f64 * (u[i].ln() + (1.0 - u[n - 1 - i]).ln())).sum();
    -(n as f64) - s / n as f64
}

/// Upper 1% point of the Anderson–Darling statistic for a fully specified law.
pub const AD_CRITICAL_1PCT: f64 = 3.857;

/// Total variation distance between two pmfs given as vectors.
pub fn tv(p: &[f64], q: &[f64]) -> f64 {
    let n = p.len().max(q.len());
    0.5 * (0..n).map(|k| (p.get(k).unwrap_or(&0.0) - q.get(k).unwrap_or(&0.0)).abs()).sum::<f64>()
}

pub fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

pub fn std_err(x: &[f64]) -> f64 {
    let m = mean(x);
    let v = x.iter().map(|y| (y - m).powi(2)).sum::<f64>() / (x.len() as f64 - 1.0);
    (v / x.len() as f64).sqrt()
}

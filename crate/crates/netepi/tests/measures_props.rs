use approx::assert_abs_diff_eq;
use netepi::measures::{DegreeDistribution, DegreeMeasure};
use proptest::prelude::*;

fn distribution() -> impl Strategy<Value = DegreeDistribution> {
    prop::collection::vec(0.0f64..1.0, 2..30).prop_filter_map("needs mass above degree 0", |w| {
        if w[1..].iter().sum::<f64>() <= 1e-6 {
            return None;
        }
        DegreeDistribution::normalized(DegreeMeasure::from_masses(w).ok()?).ok()
    })
}

proptest! {
    #[test]
    fn pgf_at_one_gives_moments(p in distribution()) {
        let m = p.measure();
        prop_assert!((p.pgf_eval(1.0, 0).unwrap() - 1.0).abs() < 1e-10);
        prop_assert!((p.pgf_eval(1.0, 1).unwrap() - m.moment(1)).abs() < 1e-10);
        prop_assert!((p.pgf_eval(1.0, 2).unwrap() - m.factorial_moment2()).abs() < 1e-10);
        prop_assert!(p.pgf_eval(0.5, 3).is_err());
    }

    #[test]
    fn excess_degree_two_ways(p in distribution()) {
        let kappa = p.mean_excess_degree().unwrap();
        let m = p.mean();
        prop_assert!((kappa - (p.variance() / m + m - 1.0)).abs() < 1e-10 * kappa.abs().max(1.0));
        let q = p.size_biased().unwrap();
        prop_assert!((q.mean() - (kappa + 1.0)).abs() < 1e-9 * kappa.max(1.0));
    }

    #[test]
    fn arithmetic_keeps_masses_nonnegative(
        w in prop::collection::vec(0.0f64..5.0, 1..20),
        k in 0usize..25,
        x in 0.0f64..10.0,
        c in 0.0f64..3.0,
    ) {
        let mut m = DegreeMeasure::from_masses(w).unwrap();
        let before = m.get(k);
        m.add(k, x).unwrap();
        prop_assert!(m.iter().all(|(_, v)| v >= 0.0));
        m.remove(k, x).unwrap();
        prop_assert!((m.get(k) - before).abs() < 1e-9);
        prop_assert!(m.remove(k, before + 1.0).is_err());
        prop_assert!(m.scaled(c).unwrap().iter().all(|(_, v)| v >= 0.0));
        prop_assert!(m.scaled(-1.0).is_err());
    }
}

#[test]
fn size_biasing_fixes_dirac() {
    let d = DegreeDistribution::dirac(6);
    assert_eq!(d.size_biased().unwrap(), d);
}

#[test]
fn size_biased_poisson_is_shifted() {
    let p = DegreeDistribution::poisson(3.0).unwrap();
    let q = p.size_biased().unwrap();
    for k in 1..=p.max_degree() {
        assert_abs_diff_eq!(q.get(k), p.get(k - 1), epsilon = 1e-12);
    }
}

#[test]
fn geometric_excess_degree() {
    for rho in [0.2, 0.5, 0.8] {
        let p = DegreeDistribution::geometric(rho).unwrap();
        assert_abs_diff_eq!(p.mean_excess_degree().unwrap(), 2.0 * (1.0 - rho) / rho, epsilon = 1e-8);
    }
}

#[test]
fn poisson_normalised_after_truncation() {
    let p = DegreeDistribution::poisson_truncated(2.0, 1e-14).unwrap();
    assert_abs_diff_eq!(p.pgf_eval(1.0, 0).unwrap(), 1.0, epsilon = 1e-10);
}

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sel_core::exact_core::{binomial, eval_exact_real, expected_polynomial};
use sel_core::moments_oracle::{
    closed_form_moment, covariance_entry, isserlis_moment, isserlis_moment_of, mc_expected_polynomial, sample_vector,
    wick_expectation, CovarianceSpec,
};
use sel_core::rational::{int, ratio, to_f64};
use sel_core::Rational;

const SIGMA2_GRID: [(i64, u64); 6] = [(1, 4), (1, 2), (1, 1), (3, 2), (2, 1), (4, 1)];

#[test]
fn covariance_entries() {
    let spec = CovarianceSpec::new(4, int(2)).unwrap();
    assert_eq!(covariance_entry(&spec, 1, 1).unwrap(), ratio(5, 4));
    assert_eq!(covariance_entry(&spec, 1, 2).unwrap(), ratio(1, 4));
    let iid = CovarianceSpec::new(3, int(1)).unwrap();
    assert_eq!(covariance_entry(&iid, 1, 2).unwrap(), int(0));
    assert!(covariance_entry(&spec, 0, 1).is_err());
    assert!(covariance_entry(&spec, 1, 5).is_err());
    assert!(CovarianceSpec::new(3, int(0)).is_err());
}

#[test]
fn moment_examples() {
    for n_vars in 1..10 {
        let s2 = ratio(7, 3);
        let want = int(1) + (&s2 - int(1)) / int(n_vars);
        assert_eq!(isserlis_moment(n_vars as usize, 1, &s2).unwrap(), want);
    }
    assert_eq!(isserlis_moment(2, 2, &int(1)).unwrap(), int(1));
    assert_eq!(isserlis_moment(2, 2, &int(2)).unwrap(), ratio(11, 4));
    assert_eq!(closed_form_moment(3, 0, &int(7)).unwrap(), int(1));
    assert_eq!(closed_form_moment(3, 3, &int(1)).unwrap(), int(1));
    assert_eq!(closed_form_moment(2, 2, &int(2)).unwrap(), ratio(11, 4));
}

#[test]
fn pairing_bound_enforced() {
    let e = isserlis_moment(9, 9, &int(1)).unwrap_err();
    assert!(e.to_string().contains("n > 8 unsupported"));
    assert!(isserlis_moment(3, 4, &int(1)).is_err());
}

#[test]
fn oracle_triangle() {
    for n_vars in 1..=8usize {
        let p = expected_polynomial(n_vars).unwrap();
        for (a, b) in SIGMA2_GRID {
            let s2 = ratio(a, b);
            for n in 0..=n_vars.min(6) {
                let j = n_vars - n;
                let wick = isserlis_moment(n_vars, n, &s2).unwrap();
                let closed = closed_form_moment(n_vars, n, &s2).unwrap();
                let coeff = p.z2_coefficient_at(j, &s2) / Rational::from(binomial(n_vars, j));
                assert_eq!(wick, closed, "N={n_vars} n={n} s2={s2}");
                assert_eq!(coeff, closed, "N={n_vars} n={n} s2={s2}");
            }
        }
    }
}

#[test]
fn wick_on_odd_orders_vanishes() {
    assert_eq!(wick_expectation(&[0, 1, 2], |_, _| int(1)), int(0));
    assert_eq!(wick_expectation(&[], |_, _| int(5)), int(1));
    // E[X⁴] = 3σ⁴
    assert_eq!(wick_expectation(&[0, 0, 0, 0], |_, _| int(2)), int(12));
}

fn sample_stats(spec: &CovarianceSpec, draws: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let n = spec.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let xs: Vec<Vec<f64>> = (0..draws).map(|_| sample_vector(spec, &mut rng)).collect();
    let mut cov = vec![vec![0.0; n]; n];
    let mut se = vec![vec![0.0; n]; n];
    for k in 0..n {
        for l in 0..n {
            let prods: Vec<f64> = xs.iter().map(|x| x[k] * x[l]).collect();
            let mean = prods.iter().sum::<f64>() / draws as f64;
            let var = prods.iter().map(|p| (p - mean).powi(2)).sum::<f64>() / (draws - 1) as f64;
            cov[k][l] = mean;
            se[k][l] = (var / draws as f64).sqrt();
        }
    }
    (cov, se)
}

#[test]
fn sampler_examples() {
    let (cov, se) = sample_stats(&CovarianceSpec::new(1, int(4)).unwrap(), 100_000, 1);
    assert!((cov[0][0] - 4.0).abs() < 3.0 * se[0][0], "{} ± {}", cov[0][0], se[0][0]);
    let (cov, se) = sample_stats(&CovarianceSpec::new(2, int(2)).unwrap(), 100_000, 2);
    assert!((cov[0][1] - 0.5).abs() < 3.0 * se[0][1], "{} ± {}", cov[0][1], se[0][1]);
    let (cov, se) = sample_stats(&CovarianceSpec::new(3, ratio(1, 2)).unwrap(), 100_000, 3);
    assert!(
        (cov[0][0] - 5.0 / 6.0).abs() < 3.0 * se[0][0],
        "{} ± {}",
        cov[0][0],
        se[0][0]
    );
}

#[test]
fn covariance_reconstruction() {
    for n in 1..=6 {
        for s2 in [ratio(1, 4), ratio(1, 2), int(2), int(4)] {
            let spec = CovarianceSpec::new(n, s2.clone()).unwrap();
            let (cov, se) = sample_stats(&spec, 100_000, 17 + n as u64);
            for k in 0..n {
                for l in 0..n {
                    let want = to_f64(&covariance_entry(&spec, k + 1, l + 1).unwrap());
                    assert!(
                        (cov[k][l] - want).abs() < 5.0 * se[k][l],
                        "N={n} s2={s2} ({k},{l}): {} vs {want}",
                        cov[k][l]
                    );
                }
            }
        }
    }
}

#[test]
fn monte_carlo_examples() {
    let e = mc_expected_polynomial(1, 0.0, 2.0, 1_000_000, 7).unwrap();
    assert!((e.mean - 2.0).abs() < 3.0 * e.stderr);
    let e = mc_expected_polynomial(5, 1.0, 1.0, 1_000_000, 7).unwrap();
    assert!((e.mean - 32.0).abs() < 3.0 * e.stderr);
    let exact = to_f64(&eval_exact_real(3, &int(-2), &int(2)).unwrap());
    let e = mc_expected_polynomial(3, -2.0, 2.0, 1_000_000, 7).unwrap();
    assert!((e.mean - exact).abs() < 3.0 * e.stderr, "{} vs {exact}", e.mean);
    assert!(e.stderr >= 0.0 && e.samples == 1_000_000 && e.seed == 7);
}

#[test]
fn monte_carlo_is_deterministic() {
    let a = mc_expected_polynomial(4, -0.5, 0.5, 10_000, 99).unwrap();
    let b = mc_expected_polynomial(4, -0.5, 0.5, 10_000, 99).unwrap();
    assert_eq!(a, b);
    let c = mc_expected_polynomial(4, -0.5, 0.5, 10_000, 100).unwrap();
    assert_ne!(a.mean, c.mean);
    assert!(mc_expected_polynomial(4, 0.0, 1.0, 99, 1).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn squared_set_does_not_matter(
        n_vars in 2usize..=8,
        picks in proptest::collection::vec(0usize..8, 1..=6),
        s in 0usize..6,
    ) {
        let mut vars: Vec<usize> = picks.iter().map(|p| p % n_vars + 1).collect();
        vars.sort();
        vars.dedup();
        let (a, b) = SIGMA2_GRID[s];
        let spec = CovarianceSpec::new(n_vars, ratio(a, b)).unwrap();
        let want = isserlis_moment(n_vars, vars.len(), spec.sigma2()).unwrap();
        prop_assert_eq!(isserlis_moment_of(&spec, &vars).unwrap(), want.clone());
        vars.reverse();
        prop_assert_eq!(isserlis_moment_of(&spec, &vars).unwrap(), want);
    }

    #[test]
    fn closed_form_equals_pairings(n_vars in 1usize..=8, n in 0usize..=8, p in 1i64..=40, q in 1u64..=9) {
        prop_assume!(n <= n_vars);
        let s2 = ratio(p, q);
        prop_assert_eq!(isserlis_moment(n_vars, n, &s2).unwrap(), closed_form_moment(n_vars, n, &s2).unwrap());
    }
}

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact_core::{eval_exact_real, odd_double_factorial};
use crate::moments_oracle::wick_expectation;
use crate::rational::{int, signum, to_f64, Rational};

/// Largest K accepted; the inner moments enumerate up to (2K−1)!! pairings.
pub const MAX_SERIES_K: usize = 6;

/// Sum-of-squares expansion of E_{2K}(z;σ) for σ² ≥ 1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PositivitySeries {
    pub k: usize,
    pub z2: f64,
    pub sigma2: f64,
    pub terms: Vec<f64>,
    pub partial_sums: Vec<f64>,
    /// The j = 0 term, a lower bound for E_{2K} since every term is nonnegative.
    pub j0_lower_bound: f64,
    /// (1/σ)[√v(z² + v)]^{2K} with v = 2σ²/(σ²+1); coincides with the j = 0 term only for
    /// K = 1 or σ² = 1.
    pub j0_closed_form: f64,
    pub exact: f64,
    /// Every partial sum is ≤ E_{2K}, decided in exact arithmetic.
    pub bounded_by_exact: bool,
    pub nondecreasing: bool,
}

fn poly_mul(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    let mut out = vec![Rational::ZERO; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn poly_pow(a: &[Rational], n: usize) -> Vec<Rational> {
    (0..n).fold(vec![Rational::ONE], |acc, _| poly_mul(&acc, a))
}

fn factorial(n: usize) -> Rational {
    (1..=n).fold(Rational::ONE, |acc, i| acc * int(i as i64))
}

/// Q(s) = E_r[Π_k (z² + (s/K + r_k)²)] with r ~ N(0, I − 11ᵀ/K), as a polynomial in s.
fn inner_polynomial(k: usize, z2: &Rational) -> Vec<Rational> {
    let kk = int(k as i64);
    let a = [z2.clone(), Rational::ZERO, Rational::ONE / (&kk * &kk)];
    let b = [Rational::ZERO, int(2) / &kk];
    let var = Rational::ONE - Rational::ONE / &kk;
    let cov = -(Rational::ONE / &kk);
    let mut q = vec![Rational::ZERO; 2 * k + 1];
    // choose a, b·r_k or r_k² in each factor; the r-moment depends only on the counts
    for n1 in 0..=k {
        for n2 in 0..=k - n1 {
            if n1 % 2 == 1 {
                continue;
            }
            let labels: Vec<usize> = (0..n1).chain((n1..n1 + n2).flat_map(|v| [v, v])).collect();
            let mu = wick_expectation(&labels, |x, y| if x == y { var.clone() } else { cov.clone() });
            if mu.is_zero() {
                continue;
            }
            let n0 = k - n1 - n2;
            let multinomial = factorial(k) / (factorial(n0) * factorial(n1) * factorial(n2));
            let term = poly_mul(&poly_pow(&a, n0), &poly_pow(&b, n1));
            for (i, c) in term.into_iter().enumerate() {
                q[i] += c * &multinomial * &mu;
            }
        }
    }
    q
}

/// E_{2K}(z;σ) = Σ_j (1/σ)(1/j!)((1−σ⁻²)/(2K))ʲ·(2σ²/(σ²+1))·M_j², a series of squares.
///
/// Rotating the 2K Gaussian variables onto the sum direction leaves, for each of the two
/// K-blocks, a one-dimensional moment M_j = E_s[Q(s)sʲ] with s ~ N(0, 2Kσ²/(σ²+1)). Q is
/// obtained exactly by Wick's theorem, so every σ·term is an exact rational.
pub fn positivity_series(k: usize, z2: &Rational, sigma2: &Rational, j_max: usize) -> Result<PositivitySeries> {
    if k == 0 || k > MAX_SERIES_K {
        return Err(Error::Unsupported(format!("K must be in 1..={MAX_SERIES_K}, got {k}")));
    }
    if *sigma2 < Rational::ONE {
        return Err(Error::Domain(format!("the series requires sigma2 >= 1, got {sigma2}")));
    }
    let kk = int(k as i64);
    let v1 = int(2) * sigma2 / (sigma2 + Rational::ONE);
    let v = &kk * &v1;
    let c = (Rational::ONE - Rational::ONE / sigma2) / (int(2) * &kk);
    let q = inner_polynomial(k, z2);
    let max_m = q.len() + j_max;
    let gauss: Vec<Rational> = (0..=max_m)
        .map(|m| {
            if m % 2 == 1 {
                Rational::ZERO
            } else {
                odd_double_factorial(m / 2) * v.pow(m / 2)
            }
        })
        .collect();
    let exact = eval_exact_real(2 * k, z2, sigma2)?;
    let exact_sq = sigma2 * &exact * &exact;
    let sigma = to_f64(sigma2).sqrt();

    let mut terms = Vec::with_capacity(j_max + 1);
    let mut partial_sums = Vec::with_capacity(j_max + 1);
    let mut bounded = signum(&exact) >= 0;
    let mut sum = Rational::ZERO;
    let mut weight = v1.clone();
    for j in 0..=j_max {
        if j > 0 {
            weight = weight * &c / int(j as i64);
        }
        let m = q
            .iter()
            .enumerate()
            .fold(Rational::ZERO, |acc, (i, qi)| acc + qi * &gauss[i + j]);
        let term = &weight * &m * &m;
        sum += &term;
        bounded &= &sum * &sum <= exact_sq;
        terms.push(to_f64(&term) / sigma);
        partial_sums.push(to_f64(&sum) / sigma);
    }
    let closed = v1.pow(k) * (z2 + &v1).pow(2 * k);
    Ok(PositivitySeries {
        k,
        z2: to_f64(z2),
        sigma2: to_f64(sigma2),
        j0_lower_bound: terms[0],
        j0_closed_form: to_f64(&closed) / sigma,
        exact: to_f64(&exact),
        bounded_by_exact: bounded,
        nondecreasing: partial_sums.windows(2).all(|w| w[1] >= w[0]),
        terms,
        partial_sums,
    })
}

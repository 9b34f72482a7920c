//! Closed-form construction and exact evaluation of E_N(z;σ).
//!
//! E_N is the expectation of Π(X_k² + z²) under the centered normal law with covariance
//! I + ((σ²−1)/N)·11ᵀ. Expanded in z² it reads
//! Σ_j z^{2j} C(N,j) Σ_k C(N−j,k) (2k−1)!! ((σ²−1)/N)^k.

mod float;
mod poly;

pub use float::{default_precision_bits, eval_float, eval_float_auto, nth_root_value, HpValue};
pub use poly::BivariatePoly;

use dashu_int::{IBig, UBig};

use crate::error::{Error, Result};
use crate::rational::{ComplexRational, Rational};

pub fn binomial(n: usize, k: usize) -> UBig {
    if k > n {
        return UBig::ZERO;
    }
    let k = k.min(n - k);
    let mut acc = UBig::ONE;
    for i in 0..k {
        acc = acc * UBig::from(n - i) / UBig::from(i + 1);
    }
    acc
}

/// (2k−1)!! as an integer; 1 for k = 0.
pub fn odd_double_factorial_int(k: usize) -> UBig {
    (1..=k).fold(UBig::ONE, |acc, i| acc * UBig::from(2 * i - 1))
}

/// (2k)!/(2^k k!) = (2k−1)!!.
pub fn odd_double_factorial(k: usize) -> Rational {
    Rational::from(odd_double_factorial_int(k))
}

/// C(n,k)·(2k−1)!! for k = 0..=n.
pub(crate) fn pairing_weights(n: usize) -> Vec<UBig> {
    let mut out = Vec::with_capacity(n + 1);
    let mut binom = UBig::ONE;
    let mut dfact = UBig::ONE;
    for k in 0..=n {
        out.push(&binom * &dfact);
        if k < n {
            binom = binom * UBig::from(n - k) / UBig::from(k + 1);
            dfact *= UBig::from(2 * k + 1);
        }
    }
    out
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidArgument("N must be at least 1".into()));
    }
    Ok(())
}

fn check_sigma2(sigma2: &Rational) -> Result<()> {
    if crate::rational::signum(sigma2) <= 0 {
        return Err(Error::Domain(format!("sigma2 must be positive, got {sigma2}")));
    }
    Ok(())
}

/// The exact bivariate polynomial E_N in (z², σ²).
pub fn expected_polynomial(n: usize) -> Result<BivariatePoly> {
    check_n(n)?;
    let big_n = IBig::from(n);
    let mut poly = BivariatePoly::new();
    for j in 0..=n {
        let m = n - j;
        let cj = IBig::from(binomial(n, j));
        let weights = pairing_weights(m);
        let denom = UBig::from(n).pow(m);
        // (σ²−1)^k = Σ_d C(k,d) σ^{2d} (−1)^{k−d}; everything is scaled by N^m to stay integral
        for d in 0..=m {
            let mut acc = IBig::ZERO;
            for (k, w) in weights.iter().enumerate().skip(d) {
                let mut term = IBig::from(w * binomial(k, d)) * big_n.pow(m - k);
                if (k - d) % 2 == 1 {
                    term = -term;
                }
                acc += term;
            }
            poly.add_term(j, d, Rational::from_parts(&cj * acc, denom.clone()));
        }
    }
    Ok(poly)
}

/// Σ_k w_k u^k v^{N−k} over Gaussian integers (pairs (re, im)).
fn homogeneous_sum(weights: &[UBig], u: &IBig, v: &(IBig, IBig)) -> (IBig, IBig) {
    let n = weights.len() - 1;
    let mut vpow = Vec::with_capacity(n + 1);
    vpow.push((IBig::ONE, IBig::ZERO));
    for i in 0..n {
        let (a, b) = &vpow[i];
        let next = if v.1 == IBig::ZERO {
            (a * &v.0, IBig::ZERO)
        } else {
            (a * &v.0 - b * &v.1, a * &v.1 + b * &v.0)
        };
        vpow.push(next);
    }
    let mut re = IBig::ZERO;
    let mut im = IBig::ZERO;
    let mut upow = IBig::ONE;
    for (k, w) in weights.iter().enumerate() {
        let coef = IBig::from(w.clone()) * &upow;
        let (a, b) = &vpow[n - k];
        re += &coef * a;
        if *b != IBig::ZERO {
            im += &coef * b;
        }
        upow *= u;
    }
    (re, im)
}

/// Exact E_N(z;σ) at a point.
///
/// Sums the collapsed form Σ_k C(N,k)(2k−1)!! t^k (1+z²)^{N−k}, t = (σ²−1)/N, over a common
/// integer denominator, so one evaluation costs O(N) big-integer products.
pub fn eval_exact(n: usize, z2: &ComplexRational, sigma2: &Rational) -> Result<ComplexRational> {
    check_n(n)?;
    check_sigma2(sigma2)?;
    let p = sigma2.numerator().clone();
    let q = IBig::from(sigma2.denominator().clone());
    // common denominator s of both parts of z²
    let s_den = {
        let a = z2.re.denominator();
        let b = z2.im.denominator();
        let g = dashu_base::Gcd::gcd(a, b);
        a / g * b
    };
    let s = IBig::from(s_den.clone());
    let r_re = z2.re.numerator() * IBig::from(&s_den / z2.re.denominator());
    let r_im = z2.im.numerator() * IBig::from(&s_den / z2.im.denominator());
    let big_n = IBig::from(n);
    let u = (&p - &q) * &s;
    let qn = &q * &big_n;
    let v = (&qn * (&s + r_re), &qn * r_im);
    let (re, im) = homogeneous_sum(&pairing_weights(n), &u, &v);
    let denom = UBig::try_from(qn * s).expect("positive").pow(n);
    Ok(ComplexRational::new(
        Rational::from_parts(re, denom.clone()),
        Rational::from_parts(im, denom),
    ))
}

/// Exact E_N for real z².
pub fn eval_exact_real(n: usize, z2: &Rational, sigma2: &Rational) -> Result<Rational> {
    Ok(eval_exact(n, &ComplexRational::real(z2.clone()), sigma2)?.re)
}

/// sign(E_N)·|E_N|^{1/N} from the exact value.
pub fn nth_root_exact(n: usize, z2: &Rational, sigma2: &Rational) -> Result<f64> {
    Ok(crate::rational::signed_nth_root(&eval_exact_real(n, z2, sigma2)?, n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    #[test]
    fn double_factorials() {
        assert_eq!(odd_double_factorial(0), int(1));
        assert_eq!(odd_double_factorial(1), int(1));
        assert_eq!(odd_double_factorial(3), int(15));
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(10, 3), UBig::from(120u32));
        assert_eq!(binomial(3, 5), UBig::ZERO);
        assert_eq!(binomial(0, 0), UBig::ONE);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(expected_polynomial(0).is_err());
        assert!(eval_exact_real(2, &int(0), &int(0)).is_err());
        assert!(eval_exact_real(2, &int(0), &int(-1)).is_err());
    }

    #[test]
    fn point_values() {
        assert_eq!(eval_exact_real(5, &int(1), &int(1)).unwrap(), int(32));
        assert_eq!(eval_exact_real(4, &int(-1), &int(1)).unwrap(), int(0));
        assert_eq!(eval_exact_real(2, &int(0), &int(2)).unwrap(), ratio(11, 4));
        assert_eq!(eval_exact_real(3, &int(0), &int(4)).unwrap(), int(28));
    }

    #[test]
    fn complex_point_matches_polynomial() {
        let z2 = ComplexRational::new(ratio(1, 3), ratio(-2, 5));
        let s2 = ratio(7, 4);
        for n in 1..=7 {
            let p = expected_polynomial(n).unwrap();
            assert_eq!(p.eval(&z2, &s2), eval_exact(n, &z2, &s2).unwrap(), "N={n}");
        }
    }

    #[test]
    fn display_is_readable() {
        assert_eq!(expected_polynomial(1).unwrap().to_string(), "z2 + s2");
        assert_eq!(
            expected_polynomial(2).unwrap().to_string(),
            "z2^2 + z2*s2 + z2 + 3/4*s2^2 - 1/2*s2 + 3/4"
        );
    }
}

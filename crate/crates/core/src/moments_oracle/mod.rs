//! Independent oracles for the moments behind E_N: Isserlis (Wick) pairing sums over the
//! covariance I + ((σ²−1)/N)·11ᵀ, the closed-form single sum, and Monte Carlo sampling.

mod sampling;

pub use sampling::{mc_expected_polynomial, sample_vector, McEstimate, Sampler};

use std::sync::OnceLock;

use dashu_int::UBig;

use crate::error::{Error, Result};
use crate::exact_core::pairing_weights;
use crate::rational::{int, signum, Rational};

/// Largest n accepted by [`isserlis_moment`]; (2n−1)!! matchings are enumerated.
pub const MAX_PAIRING_ORDER: usize = 8;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CovarianceSpec {
    n: usize,
    sigma2: Rational,
}

impl CovarianceSpec {
    pub fn new(n: usize, sigma2: Rational) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("N must be at least 1".into()));
        }
        if signum(&sigma2) <= 0 {
            return Err(Error::Domain(format!("sigma2 must be positive, got {sigma2}")));
        }
        Ok(Self { n, sigma2 })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn sigma2(&self) -> &Rational {
        &self.sigma2
    }

    /// Off-diagonal entry (σ²−1)/N.
    pub fn coupling(&self) -> Rational {
        (&self.sigma2 - int(1)) / int(self.n as i64)
    }

    /// Diagonal entry 1 + (σ²−1)/N.
    pub fn variance(&self) -> Rational {
        int(1) + self.coupling()
    }
}

/// Entry (k, l) of the covariance matrix, 1-based.
pub fn covariance_entry(spec: &CovarianceSpec, k: usize, l: usize) -> Result<Rational> {
    let n = spec.n;
    if !(1..=n).contains(&k) || !(1..=n).contains(&l) {
        return Err(Error::IndexOutOfRange(format!("({k}, {l}) with N = {n}")));
    }
    Ok(if k == l { spec.variance() } else { spec.coupling() })
}

/// Calls `visit` once per perfect matching of `slots` slots, always pairing the smallest
/// unmatched slot first.
pub fn for_each_pairing<Fn_: FnMut(&[(usize, usize)])>(slots: usize, mut visit: Fn_) {
    if slots % 2 == 1 {
        return;
    }
    let mut used = vec![false; slots];
    let mut pairs = Vec::with_capacity(slots / 2);
    recurse(&mut used, &mut pairs, &mut visit);
}

fn recurse<Fn_: FnMut(&[(usize, usize)])>(used: &mut [bool], pairs: &mut Vec<(usize, usize)>, visit: &mut Fn_) {
    let Some(first) = used.iter().position(|u| !u) else {
        visit(pairs);
        return;
    };
    used[first] = true;
    for second in first + 1..used.len() {
        if used[second] {
            continue;
        }
        used[second] = true;
        pairs.push((first, second));
        recurse(used, pairs, visit);
        pairs.pop();
        used[second] = false;
    }
    used[first] = false;
}

/// E[Π_s Y_{labels[s]}] for a centered Gaussian vector with covariance `cov`, by Isserlis.
pub fn wick_expectation<C: Fn(usize, usize) -> Rational>(labels: &[usize], cov: C) -> Rational {
    let mut total = Rational::ZERO;
    for_each_pairing(labels.len(), |pairs| {
        let mut prod = Rational::ONE;
        for &(a, b) in pairs {
            prod *= cov(labels[a], labels[b]);
            if prod.is_zero() {
                return;
            }
        }
        total += prod;
    });
    total
}

/// For n squared variables: number of matchings of the 2n slots [1,1,2,2,…] with exactly i
/// pairs joining the two copies of the same variable, i = 0..=n.
fn pairing_histogram(n: usize) -> &'static [UBig] {
    static CACHE: [OnceLock<Vec<UBig>>; MAX_PAIRING_ORDER + 1] = [const { OnceLock::new() }; MAX_PAIRING_ORDER + 1];
    CACHE[n].get_or_init(|| {
        let mut counts = vec![0u64; n + 1];
        for_each_pairing(2 * n, |pairs| {
            let same = pairs.iter().filter(|&&(a, b)| a / 2 == b / 2).count();
            counts[same] += 1;
        });
        counts.into_iter().map(UBig::from).collect()
    })
}

/// E[Π_{m=1}^{n} X_m²] by enumerating all (2n−1)!! perfect matchings of the 2n slots.
///
/// Each matching contributes var^{#same-variable pairs}·cov^{#cross pairs}; the enumeration
/// is tallied once per n and reused for every σ².
pub fn isserlis_moment(n_vars: usize, n: usize, sigma2: &Rational) -> Result<Rational> {
    if n > MAX_PAIRING_ORDER {
        return Err(Error::Unsupported(format!(
            "n > {MAX_PAIRING_ORDER} unsupported (got n = {n})"
        )));
    }
    if n > n_vars {
        return Err(Error::InvalidArgument(format!("n = {n} exceeds N = {n_vars}")));
    }
    let spec = CovarianceSpec::new(n_vars, sigma2.clone())?;
    let (var, cov) = (spec.variance(), spec.coupling());
    let mut total = Rational::ZERO;
    for (i, count) in pairing_histogram(n).iter().enumerate() {
        total += Rational::from(count.clone()) * var.pow(i) * cov.pow(n - i);
    }
    Ok(total)
}

/// E[Π_{m∈vars} X_m²] for an arbitrary set of distinct 1-based indices, with every pairing
/// product built from [`covariance_entry`].
pub fn isserlis_moment_of(spec: &CovarianceSpec, vars: &[usize]) -> Result<Rational> {
    if vars.len() > MAX_PAIRING_ORDER {
        return Err(Error::Unsupported(format!(
            "n > {MAX_PAIRING_ORDER} unsupported (got n = {})",
            vars.len()
        )));
    }
    for &v in vars {
        covariance_entry(spec, v, v)?;
    }
    let labels: Vec<usize> = vars.iter().flat_map(|&v| [v, v]).collect();
    Ok(wick_expectation(&labels, |a, b| {
        covariance_entry(spec, a, b).expect("validated")
    }))
}

/// Σ_{k=0}^{n} C(n,k)(2k−1)!!((σ²−1)/N)^k.
pub fn closed_form_moment(n_vars: usize, n: usize, sigma2: &Rational) -> Result<Rational> {
    if n > n_vars {
        return Err(Error::InvalidArgument(format!("n = {n} exceeds N = {n_vars}")));
    }
    let t = CovarianceSpec::new(n_vars, sigma2.clone())?.coupling();
    let mut total = Rational::ZERO;
    let mut tpow = Rational::ONE;
    for w in pairing_weights(n) {
        total += Rational::from(w) * &tpow;
        tpow *= &t;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    #[test]
    fn covariance_entries() {
        let s = CovarianceSpec::new(4, int(2)).unwrap();
        assert_eq!(covariance_entry(&s, 1, 1).unwrap(), ratio(5, 4));
        assert_eq!(covariance_entry(&s, 1, 2).unwrap(), ratio(1, 4));
        let s = CovarianceSpec::new(3, int(1)).unwrap();
        assert_eq!(covariance_entry(&s, 1, 2).unwrap(), int(0));
        assert!(covariance_entry(&s, 0, 1).is_err());
        assert!(covariance_entry(&s, 1, 4).is_err());
        assert!(CovarianceSpec::new(3, int(0)).is_err());
    }

    #[test]
    fn pairing_counts_are_double_factorials() {
        for slots in [0usize, 2, 4, 6, 8, 10] {
            let mut count = 0u64;
            for_each_pairing(slots, |_| count += 1);
            let expected: u64 = (1..slots as u64).step_by(2).product();
            assert_eq!(count, expected, "slots={slots}");
        }
        let mut odd = 0;
        for_each_pairing(3, |_| odd += 1);
        assert_eq!(odd, 0);
    }

    #[test]
    fn small_moments() {
        assert_eq!(isserlis_moment(2, 2, &int(1)).unwrap(), int(1));
        assert_eq!(isserlis_moment(2, 2, &int(2)).unwrap(), ratio(11, 4));
        assert_eq!(isserlis_moment(7, 1, &int(3)).unwrap(), ratio(9, 7));
        assert_eq!(closed_form_moment(3, 0, &int(7)).unwrap(), int(1));
        assert_eq!(closed_form_moment(3, 3, &int(1)).unwrap(), int(1));
        assert_eq!(closed_form_moment(2, 2, &int(2)).unwrap(), ratio(11, 4));
    }

    #[test]
    fn enforces_pairing_bound() {
        let err = isserlis_moment(9, 9, &int(2)).unwrap_err();
        assert!(err.to_string().contains("n > 8 unsupported"));
        assert!(isserlis_moment(3, 4, &int(2)).is_err());
    }

    #[test]
    fn generic_enumerator_agrees_with_histogram() {
        let s2 = ratio(3, 2);
        let spec = CovarianceSpec::new(6, s2.clone()).unwrap();
        for n in 0..=5 {
            let vars: Vec<usize> = (1..=n).collect();
            assert_eq!(
                isserlis_moment_of(&spec, &vars).unwrap(),
                isserlis_moment(6, n, &s2).unwrap()
            );
        }
    }
}

use std::f64::consts::PI;

use num_complex::Complex64;

use super::BranchKind;
use crate::error::{Error, Result};

/// Critical entropy value on a branch, continued to z² < 0 with the principal logarithm.
///
/// Symmetric: ln(1 + z²). Broken: ln[2(σ²−1)] + (1+z²)/(2(σ²−1)) − 1. A negative argument
/// contributes +iπ, so exp of the result is the signed candidate 1 + z² or L₂.
pub fn entropy_value(z2: f64, sigma2: f64, branch: BranchKind) -> Result<Complex64> {
    if !(sigma2 > 0.0) {
        return Err(Error::Domain(format!("sigma2 must be positive, got {sigma2}")));
    }
    let (arg, extra) = match branch {
        BranchKind::Symmetric => {
            let v = 1.0 + z2;
            if v == 0.0 {
                return Err(Error::Domain("ln(1 + z^2) is singular at z^2 = -1".into()));
            }
            (v, 0.0)
        }
        BranchKind::Broken => {
            if sigma2 == 1.0 {
                return Err(Error::Domain("broken branch is undefined at sigma2 = 1".into()));
            }
            let c = 2.0 * (sigma2 - 1.0);
            (c, (1.0 + z2) / c - 1.0)
        }
    };
    let im = if arg < 0.0 { PI } else { 0.0 };
    Ok(Complex64::new(arg.abs().ln() + extra, im))
}

fn gap_ratio(z2: f64, sigma2: f64) -> Result<f64> {
    if !(sigma2 > 1.5) {
        return Err(Error::Domain(format!("gap series needs sigma2 > 3/2, got {sigma2}")));
    }
    let r = (2.0 * sigma2 - 3.0 - z2) / (2.0 * (sigma2 - 1.0));
    if !(0.0..1.0).contains(&r) || z2 < 0.0 {
        return Err(Error::Domain(format!(
            "need 0 <= z2 <= 2 sigma2 - 3, got z2 = {z2}, sigma2 = {sigma2}"
        )));
    }
    Ok(r)
}

/// Partial sums Σ_{n=2}^{n_terms+1} rⁿ/n with r = (2σ²−3−z²)/(2(σ²−1)).
pub fn entropy_gap_partial_sums(z2: f64, sigma2: f64, n_terms: usize) -> Result<Vec<f64>> {
    let r = gap_ratio(z2, sigma2)?;
    let mut out = Vec::with_capacity(n_terms);
    let mut acc = 0.0;
    let mut rn = r;
    for n in 2..n_terms + 2 {
        rn *= r;
        acc += rn / n as f64;
        out.push(acc);
    }
    Ok(out)
}

/// The entropy gap between broken and symmetric branches for real z, as a power series.
pub fn entropy_gap_series(z2: f64, sigma2: f64, n_terms: usize) -> Result<f64> {
    Ok(entropy_gap_partial_sums(z2, sigma2, n_terms)?
        .last()
        .copied()
        .unwrap_or(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entropy_examples() {
        let v = entropy_value(3.0, 1.0, BranchKind::Symmetric).unwrap();
        assert!((v - Complex64::new(4f64.ln(), 0.0)).norm() < 1e-15);
        let v = entropy_value(0.0, 2.0, BranchKind::Broken).unwrap();
        assert!((v - Complex64::new(2f64.ln() - 0.5, 0.0)).norm() < 1e-15);
        let v = entropy_value(-4.0, 1.0, BranchKind::Symmetric).unwrap();
        assert!((v - Complex64::new(3f64.ln(), PI)).norm() < 1e-15);
        assert!((v.exp() - Complex64::new(-3.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn singular_points() {
        assert!(entropy_value(-1.0, 2.0, BranchKind::Symmetric).is_err());
        assert!(entropy_value(0.0, 1.0, BranchKind::Broken).is_err());
    }

    #[test]
    fn gap_series() {
        let g = entropy_gap_series(0.0, 2.0, 200).unwrap();
        assert!((g - (2f64.ln() - 0.5)).abs() < 1e-12);
        assert_eq!(entropy_gap_series(5.0, 4.0, 50).unwrap(), 0.0);
        let sums = entropy_gap_partial_sums(0.3, 3.0, 100).unwrap();
        assert!(sums.windows(2).all(|w| w[1] >= w[0]));
        assert!(entropy_gap_series(0.0, 1.2, 10).is_err());
        assert!(entropy_gap_series(6.0, 4.0, 10).is_err());
    }
}

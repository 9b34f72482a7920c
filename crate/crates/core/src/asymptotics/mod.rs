//! Large-N limit objects: κ*, the threshold curves, the real-z limit, the scaled complex
//! limit, the parity-split imaginary-z case table, mean-field fixed points, critical
//! densities and entropy values.

mod conjecture;
mod entropy;
mod fixed_point;

pub use conjecture::{conjectured_limit, Parity};
pub use entropy::{entropy_gap_partial_sums, entropy_gap_series, entropy_value};
pub use fixed_point::{critical_density, m_pm_squared, mean_fixed_point_residual, CriticalDensity};

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BranchKind {
    /// m = 0
    Symmetric,
    /// m = m±
    Broken,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "+1")]
    Plus,
    #[serde(rename = "-1")]
    Minus,
}

impl Sign {
    pub fn of(x: f64) -> Sign {
        if x < 0.0 {
            Sign::Minus
        } else {
            Sign::Plus
        }
    }

    pub fn factor(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Branch {
    pub kind: BranchKind,
    pub sign: Sign,
}

impl Branch {
    pub const SYMMETRIC: Branch = Branch {
        kind: BranchKind::Symmetric,
        sign: Sign::Plus,
    };
    pub const BROKEN: Branch = Branch {
        kind: BranchKind::Broken,
        sign: Sign::Plus,
    };

    pub fn new(kind: BranchKind, sign: Sign) -> Self {
        Self { kind, sign }
    }

    pub fn negated(self) -> Self {
        let sign = match self.sign {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        };
        Self { sign, ..self }
    }
}

impl fmt::Display for BranchKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BranchKind::Symmetric => "symmetric",
            BranchKind::Broken => "broken",
        })
    }
}

impl FromStr for BranchKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "symmetric" => Ok(BranchKind::Symmetric),
            "broken" => Ok(BranchKind::Broken),
            _ => Err(Error::InvalidArgument(format!("unknown branch '{s}'"))),
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Plus => "+1",
            Sign::Minus => "-1",
        })
    }
}

impl FromStr for Sign {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "+1" | "1" => Ok(Sign::Plus),
            "-1" => Ok(Sign::Minus),
            _ => Err(Error::InvalidArgument(format!("unknown sign '{s}'"))),
        }
    }
}

/// The lines in the z² plane where the limit changes its analytic form.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Threshold {
    /// z² = 2σ² − 3
    PhaseLine,
    /// z² = z_*²(σ²)
    ZStar,
}

/// A limit value with the branch that produced it and the thresholds lying above the point
/// (z² strictly below the line).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitCurve {
    pub value: f64,
    pub branch: Branch,
    pub thresholds_crossed: Vec<Threshold>,
}

impl LimitCurve {
    fn at(z2: f64, sigma2: f64, branch: Branch, value: f64) -> Self {
        let mut thresholds_crossed = Vec::new();
        if z2 < 2.0 * sigma2 - 3.0 {
            thresholds_crossed.push(Threshold::PhaseLine);
        }
        if z2 < z_star_squared(sigma2) {
            thresholds_crossed.push(Threshold::ZStar);
        }
        Self {
            value,
            branch,
            thresholds_crossed,
        }
    }
}

fn kappa_residual(k: f64) -> f64 {
    k - (-k - 1.0).exp()
}

/// Root of κ = e^{−κ−1}: bisection on [0,1] down to 1e−14, then Newton polishing.
pub fn kappa_star(tol: f64) -> f64 {
    assert!(tol > 0.0, "tolerance must be positive");
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while hi - lo > 1e-14 {
        let mid = 0.5 * (lo + hi);
        if kappa_residual(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut k = 0.5 * (lo + hi);
    for _ in 0..2 {
        k -= kappa_residual(k) / (1.0 + (-k - 1.0).exp());
    }
    let mut extra = 0;
    while kappa_residual(k).abs() >= tol && extra < 8 {
        k -= kappa_residual(k) / (1.0 + (-k - 1.0).exp());
        extra += 1;
    }
    k
}

fn kappa() -> f64 {
    static K: OnceLock<f64> = OnceLock::new();
    *K.get_or_init(|| kappa_star(1e-15))
}

/// z_*²(σ²) = 2κ*(1−σ²) − 1.
pub fn z_star_squared(sigma2: f64) -> f64 {
    2.0 * kappa() * (1.0 - sigma2) - 1.0
}

/// y_*² = −z_*², where L₂ meets −L₁.
pub fn y_star_squared(sigma2: f64) -> f64 {
    -z_star_squared(sigma2)
}

/// L₁ in terms of z²: 1 + z² (= 1 − y² for z = iy).
pub fn l1(z2: f64) -> f64 {
    1.0 + z2
}

/// L₂ in terms of z²: 2(σ²−1)·exp((1+z²)/(2(σ²−1)) − 1).
pub fn l2(z2: f64, sigma2: f64) -> f64 {
    let c = 2.0 * (sigma2 - 1.0);
    c * ((1.0 + z2) / c - 1.0).exp()
}

fn check_sigma2(sigma2: f64) -> Result<()> {
    if !(sigma2 > 0.0) || !sigma2.is_finite() {
        return Err(Error::Domain(format!("sigma2 must be positive, got {sigma2}")));
    }
    Ok(())
}

/// lim E_N^{1/N} for real z.
pub fn limit_real(z2: f64, sigma2: f64) -> Result<LimitCurve> {
    check_sigma2(sigma2)?;
    if !(z2 >= 0.0) || !z2.is_finite() {
        return Err(Error::Domain(format!("z2 must be a nonnegative real, got {z2}")));
    }
    Ok(if z2 >= 2.0 * sigma2 - 3.0 {
        LimitCurve::at(z2, sigma2, Branch::SYMMETRIC, l1(z2))
    } else {
        LimitCurve::at(z2, sigma2, Branch::BROKEN, l2(z2, sigma2))
    })
}

/// lim E_N(z/√N;σ)/E_N(0;σ).
pub fn scaled_limit(z2: Complex64, sigma2: f64) -> Result<Complex64> {
    check_sigma2(sigma2)?;
    Ok(if sigma2 <= 1.5 {
        z2.exp()
    } else {
        (z2 / (2.0 * (sigma2 - 1.0))).exp()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kappa_value() {
        let k = kappa_star(1e-11);
        assert!((k - 0.27846454276).abs() < 5e-12);
        assert!(((-k - 1.0).exp() - k).abs() < 1e-11);
    }

    #[test]
    fn z_star_values() {
        assert!((z_star_squared(1.0) + 1.0).abs() < 1e-15);
        assert!((z_star_squared(0.0) - (2.0 * kappa() - 1.0)).abs() < 1e-15);
        assert!((z_star_squared(0.0) + 0.44307).abs() < 1e-5);
        assert!((z_star_squared(1.5) + 1.27846).abs() < 1e-5);
    }

    #[test]
    fn real_limits() {
        let c = limit_real(9.0, 4.0).unwrap();
        assert_eq!(c.value, 10.0);
        assert_eq!(c.branch, Branch::SYMMETRIC);
        let c = limit_real(0.0, 2.0).unwrap();
        assert!((c.value - 2.0 * (-0.5f64).exp()).abs() < 1e-15);
        assert_eq!(c.branch, Branch::BROKEN);
        let c4 = limit_real(0.0, 4.0).unwrap();
        assert!((c4.value - 6.0 * (-5.0f64 / 6.0).exp()).abs() < 1e-15);
        assert!((c4.value - 2.60759).abs() < 1e-5);
        assert_eq!(c.thresholds_crossed, vec![Threshold::PhaseLine]);
        assert_eq!(limit_real(1.0, 2.0).unwrap().value, 2.0);
        assert!((l2(1.0, 2.0) - 2.0).abs() < 1e-15);
        assert!(limit_real(-1.0, 2.0).is_err());
    }

    #[test]
    fn scaled_limits() {
        let e = scaled_limit(Complex64::new(1.0, 0.0), 1.0).unwrap();
        assert!((e.re - std::f64::consts::E).abs() < 1e-15);
        let v = scaled_limit(Complex64::new(-9.0, 0.0), 16.0).unwrap();
        assert!((v.re - (-0.3f64).exp()).abs() < 1e-15);
        assert!((v.re - 0.74082).abs() < 1e-5);
        for s in [0.5, 1.5, 2.0, 16.0] {
            assert_eq!(
                scaled_limit(Complex64::new(0.0, 0.0), s).unwrap(),
                Complex64::new(1.0, 0.0)
            );
        }
    }
}

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::BranchKind;
use crate::error::{Error, Result};

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// m±² = σ⁴(2σ² − 3 − z²)/(σ² − 1)². Negative values mean purely imaginary m±.
pub fn m_pm_squared(z2: f64, sigma2: f64) -> Result<Complex64> {
    if sigma2 == 1.0 {
        return Err(Error::Domain("m± is undefined at sigma2 = 1".into()));
    }
    let d = sigma2 - 1.0;
    Ok(c(sigma2 * sigma2 * (2.0 * sigma2 - 3.0 - z2) / (d * d)))
}

/// m − m(1−1/σ²)(z²+3+a²)/(z²+1+a²) with a = (1−1/σ²)m.
pub fn mean_fixed_point_residual(m: Complex64, z2: f64, sigma2: f64) -> Result<Complex64> {
    let b = 1.0 - 1.0 / sigma2;
    let a2 = (m * b) * (m * b);
    let den = a2 + z2 + 1.0;
    if den.norm() == 0.0 {
        return Err(Error::Pole(format!("z2 + 1 + a^2 vanishes at m = {m}")));
    }
    Ok(m - m * b * (a2 + z2 + 3.0) / den)
}

/// One-point critical density ν(x) ∝ (x² + z²)·exp(−x²/2 + (1−1/σ²)·m·x).
///
/// With a = (1−1/σ²)m the weight is (x² + z²) times the N(a,1) density up to e^{a²/2}, so all
/// integrals reduce to Gaussian moments and ∫ν = 1 holds as a complex identity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalDensity {
    pub z2: f64,
    pub sigma2: f64,
    pub m: Complex64,
}

impl CriticalDensity {
    /// Tilt a = (1−1/σ²)m.
    pub fn tilt(&self) -> Complex64 {
        self.m * (1.0 - 1.0 / self.sigma2)
    }

    /// ∫(x²+z²)e^{−x²/2+ax}dx/√(2π) = e^{a²/2}(1 + a² + z²).
    pub fn normalizer(&self) -> Complex64 {
        let a = self.tilt();
        (a * a / 2.0).exp() * (a * a + 1.0 + self.z2)
    }

    pub fn density(&self, x: f64) -> Complex64 {
        let a = self.tilt();
        (a * x - x * x / 2.0).exp() * (x * x + self.z2) / ((2.0 * PI).sqrt() * self.normalizer())
    }

    /// ∫x^k ν(x)dx.
    pub fn moment(&self, k: usize) -> Complex64 {
        let a = self.tilt();
        // raw moments of N(a,1): μ_{j+1} = aμ_j + jμ_{j−1}
        let mut mu = vec![c(1.0), a];
        for j in 1..k + 2 {
            let next = a * mu[j] + mu[j - 1] * j as f64;
            mu.push(next);
        }
        (mu[k + 2] + mu[k] * self.z2) / (a * a + 1.0 + self.z2)
    }

    pub fn mean(&self) -> Complex64 {
        self.moment(1)
    }

    /// ∫ν(x)/(x² + z²) dx = 1/(1 + a² + z²).
    pub fn inverse_weight_integral(&self) -> Complex64 {
        let a = self.tilt();
        (a * a + 1.0 + self.z2).inv()
    }
}

/// Critical density on the symmetric (m = 0) or broken (m = +√m±², principal root) branch.
pub fn critical_density(z2: f64, sigma2: f64, branch: BranchKind) -> Result<CriticalDensity> {
    if !(sigma2 > 0.0) {
        return Err(Error::Domain(format!("sigma2 must be positive, got {sigma2}")));
    }
    let m = match branch {
        BranchKind::Symmetric => {
            if 1.0 + z2 == 0.0 {
                return Err(Error::DivisionByZero("normalization 1 + z^2 vanishes".into()));
            }
            c(0.0)
        }
        BranchKind::Broken => {
            let m2 = m_pm_squared(z2, sigma2)?;
            if m2.norm() == 0.0 {
                return Err(Error::Domain("m± coincides with m = 0 at z^2 = 2 sigma^2 - 3".into()));
            }
            m2.sqrt()
        }
    };
    Ok(CriticalDensity { z2, sigma2, m })
}

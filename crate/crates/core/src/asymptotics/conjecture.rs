use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{l1, l2, y_star_squared, Branch, BranchKind, LimitCurve, Sign};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn of(n: usize) -> Parity {
        if n % 2 == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Parity::Even => "even",
            Parity::Odd => "odd",
        })
    }
}

impl FromStr for Parity {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "even" => Ok(Parity::Even),
            "odd" => Ok(Parity::Odd),
            _ => Err(Error::InvalidArgument(format!("unknown parity '{s}'"))),
        }
    }
}

/// Conjectured limit of the even-N or odd-N subsequence of E_N^{1/N}(iy;σ).
///
/// With S = 3 − 2σ² and Y = −z_*²(σ²) the table reads, for y² = −z²:
///
/// | σ²          | even                                   | odd                          |
/// |-------------|----------------------------------------|------------------------------|
/// | ≥ 3/2       | L₂ if y² ≤ Y, else −L₁                 | L₂ if y² ≤ Y, else L₁         |
/// | (1, 3/2)    | L₁ if y² ≤ S, L₂ if S < y² < Y, else −L₁ | L₁, L₂, L₁ on the same pieces |
/// | = 1         | \|L₁\|                                 | L₁                           |
/// | [0, 1)      | L₁ if y² ≤ Y, −L₂ if Y < y² < S, else −L₁ | L₁, L₂, L₁ on the same pieces |
///
/// where L₁ = 1 − y² and L₂ = 2(σ²−1)exp((1−y²)/(2(σ²−1)) − 1). Boundary points follow the
/// closed and open inequalities exactly as listed.
pub fn conjectured_limit(y2: f64, sigma2: f64, parity: Parity) -> Result<LimitCurve> {
    if !(y2 >= 0.0) || !y2.is_finite() {
        return Err(Error::Domain(format!("y2 must be a nonnegative real, got {y2}")));
    }
    if !(sigma2 >= 0.0) || !sigma2.is_finite() {
        return Err(Error::Domain(format!("sigma2 must be nonnegative, got {sigma2}")));
    }
    let s = 3.0 - 2.0 * sigma2;
    let y_star2 = y_star_squared(sigma2);
    let sym = Branch::SYMMETRIC;
    let broken = Branch::BROKEN;
    // the outer piece beyond the last threshold: odd keeps L₁, even flips it
    let outer = match parity {
        Parity::Even => sym.negated(),
        Parity::Odd => sym,
    };
    let branch = if sigma2 >= 1.5 {
        if y2 <= y_star2 {
            broken
        } else {
            outer
        }
    } else if sigma2 > 1.0 {
        if y2 <= s {
            sym
        } else if y2 < y_star2 {
            broken
        } else {
            outer
        }
    } else if sigma2 == 1.0 {
        match parity {
            Parity::Even => Branch::new(BranchKind::Symmetric, Sign::of(1.0 - y2)),
            Parity::Odd => sym,
        }
    } else if y2 <= y_star2 {
        sym
    } else if y2 < s {
        match parity {
            Parity::Even => broken.negated(),
            Parity::Odd => broken,
        }
    } else {
        outer
    };
    let base = match branch.kind {
        BranchKind::Symmetric => l1(-y2),
        BranchKind::Broken => l2(-y2, sigma2),
    };
    Ok(LimitCurve::at(-y2, sigma2, branch, branch.sign.factor() * base))
}

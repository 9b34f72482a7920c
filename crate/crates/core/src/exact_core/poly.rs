use std::collections::BTreeMap;
use std::fmt;

use crate::rational::{signum, ComplexRational, Rational};

/// Sparse polynomial in (z², σ²) with rational coefficients, keyed by (z²-degree, σ²-degree).
/// Zero coefficients are never stored.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BivariatePoly {
    coeffs: BTreeMap<(usize, usize), Rational>,
}

impl BivariatePoly {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_terms<I: IntoIterator<Item = ((usize, usize), Rational)>>(terms: I) -> Self {
        let mut p = Self::new();
        for ((j, d), c) in terms {
            p.add_term(j, d, c);
        }
        p
    }

    /// Adds `c·z^{2j}σ^{2d}`, dropping the entry if it cancels to zero.
    pub fn add_term(&mut self, j: usize, d: usize, c: Rational) {
        if c.is_zero() {
            return;
        }
        let entry = self.coeffs.entry((j, d)).or_insert(Rational::ZERO);
        *entry += c;
        if entry.is_zero() {
            self.coeffs.remove(&(j, d));
        }
    }

    pub fn coeff(&self, j: usize, d: usize) -> Rational {
        self.coeffs.get(&(j, d)).cloned().unwrap_or(Rational::ZERO)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(usize, usize), &Rational)> {
        self.coeffs.iter()
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn z2_degree(&self) -> Option<usize> {
        self.coeffs.keys().map(|&(j, _)| j).max()
    }

    /// Highest σ²-degree among the terms carrying z^{2j}.
    pub fn sigma2_degree(&self, j: usize) -> Option<usize> {
        self.coeffs.range((j, 0)..=(j, usize::MAX)).map(|(&(_, d), _)| d).max()
    }

    /// The z^{2j} coefficient, a polynomial in σ², evaluated at `sigma2`.
    pub fn z2_coefficient_at(&self, j: usize, sigma2: &Rational) -> Rational {
        let mut acc = Rational::ZERO;
        for (&(_, d), c) in self.coeffs.range((j, 0)..=(j, usize::MAX)) {
            acc += c * sigma2.pow(d);
        }
        acc
    }

    /// Univariate coefficients in z² after substituting σ².
    pub fn at_sigma2(&self, sigma2: &Rational) -> Vec<Rational> {
        let deg = self.z2_degree().map_or(0, |d| d + 1);
        (0..deg).map(|j| self.z2_coefficient_at(j, sigma2)).collect()
    }

    pub fn eval(&self, z2: &ComplexRational, sigma2: &Rational) -> ComplexRational {
        // Horner in z² over the σ²-substituted coefficients
        let mut acc = ComplexRational::zero();
        for c in self.at_sigma2(sigma2).into_iter().rev() {
            acc = &(&acc * z2) + &ComplexRational::real(c);
        }
        acc
    }
}

impl fmt::Display for BivariatePoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (&(j, d), c) in self.coeffs.iter().rev() {
            let neg = signum(c) < 0;
            let mag = if neg { -c.clone() } else { c.clone() };
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            first = false;
            let mut factors = Vec::new();
            if !mag.is_one() || (j == 0 && d == 0) {
                factors.push(mag.to_string());
            }
            for (name, e) in [("z2", j), ("s2", d)] {
                match e {
                    0 => {}
                    1 => factors.push(name.to_string()),
                    _ => factors.push(format!("{name}^{e}")),
                }
            }
            write!(f, "{}", factors.join("*"))?;
        }
        Ok(())
    }
}

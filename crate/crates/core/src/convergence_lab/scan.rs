use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::StudyConfig;
use crate::asymptotics::{kappa_star, y_star_squared, Parity};
use crate::error::{Error, Result};
use crate::exact_core::eval_exact_real;
use crate::rational::{int, signed_nth_root, signum, to_f64, Rational};

/// Bisection steps when locating an odd-N sign change in y².
const BISECTION_STEPS: usize = 48;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignRow {
    pub n: usize,
    pub y2: String,
    pub sign: i8,
}

/// Bracketed zero of an odd-N E_N(iy;σ) in y².
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignChange {
    pub n: usize,
    pub y2_lo: f64,
    pub y2_hi: f64,
}

impl SignChange {
    pub fn midpoint(&self) -> f64 {
        0.5 * (self.y2_lo + self.y2_hi)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignAudit {
    pub sigma2: f64,
    pub rows: Vec<SignRow>,
    /// Even-N rows with a negative sign; empty whenever even-N positivity holds.
    pub even_violations: Vec<SignRow>,
    /// Even-N rows that are exactly zero.
    pub even_zeros: Vec<SignRow>,
    pub odd_sign_changes: Vec<SignChange>,
    /// 3 − 2σ² and y_*²(σ²), the thresholds the odd-N sign changes drift toward.
    pub phase_threshold: f64,
    pub star_threshold: f64,
}

fn e_at_imaginary(n: usize, y2: &Rational, sigma2: &Rational) -> Result<Rational> {
    eval_exact_real(n, &-y2.clone(), sigma2)
}

fn bisect(n: usize, mut lo: Rational, mut hi: Rational, sigma2: &Rational) -> Result<SignChange> {
    let s_lo = signum(&e_at_imaginary(n, &lo, sigma2)?);
    let half = Rational::from_parts(1.into(), 2u8.into());
    for _ in 0..BISECTION_STEPS {
        let mid = (&lo + &hi) * &half;
        let s = signum(&e_at_imaginary(n, &mid, sigma2)?);
        if s == 0 {
            lo = mid.clone();
            hi = mid;
            break;
        }
        if s == s_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(SignChange {
        n,
        y2_lo: to_f64(&lo),
        y2_hi: to_f64(&hi),
    })
}

/// Exact signs of E_N(iy;σ) for N = 1..=n_max over a y² grid.
///
/// Even N must be nonnegative; violations and exact zeros are collected. For odd N every sign
/// change between neighbouring grid points is located by exact bisection in y².
pub fn sign_audit(cfg: &StudyConfig, sigma2: &Rational, y2_grid: &[Rational]) -> Result<SignAudit> {
    if y2_grid.iter().any(|y| signum(y) < 0) {
        return Err(Error::Domain("y2 grid must be nonnegative".into()));
    }
    let mut grid = y2_grid.to_vec();
    grid.sort();
    grid.dedup();
    let per_n: Vec<(Vec<SignRow>, Vec<SignChange>)> = (1..=cfg.n_max)
        .into_par_iter()
        .map(|n| {
            let signs: Vec<i8> = grid
                .iter()
                .map(|y| Ok(signum(&e_at_imaginary(n, y, sigma2)?)))
                .collect::<Result<_>>()?;
            let rows = grid
                .iter()
                .zip(&signs)
                .map(|(y, &sign)| SignRow {
                    n,
                    y2: y.to_string(),
                    sign,
                })
                .collect();
            let mut changes = Vec::new();
            if n % 2 == 1 {
                for i in 1..grid.len() {
                    let (a, b) = (signs[i - 1], signs[i]);
                    if a == 0 {
                        let y = to_f64(&grid[i - 1]);
                        changes.push(SignChange { n, y2_lo: y, y2_hi: y });
                    } else if b != 0 && a != b {
                        changes.push(bisect(n, grid[i - 1].clone(), grid[i].clone(), sigma2)?);
                    }
                }
            }
            Ok((rows, changes))
        })
        .collect::<Result<_>>()?;
    let mut rows = Vec::new();
    let mut odd_sign_changes = Vec::new();
    for (r, c) in per_n {
        rows.extend(r);
        odd_sign_changes.extend(c);
    }
    let even = |r: &&SignRow| r.n % 2 == 0;
    let even_violations = rows.iter().filter(even).filter(|r| r.sign < 0).cloned().collect();
    let even_zeros = rows.iter().filter(even).filter(|r| r.sign == 0).cloned().collect();
    let s = to_f64(sigma2);
    Ok(SignAudit {
        sigma2: s,
        rows,
        even_violations,
        even_zeros,
        odd_sign_changes,
        phase_threshold: 3.0 - 2.0 * s,
        star_threshold: y_star_squared(s),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FixedPointRow {
    pub sigma: f64,
    pub n: usize,
    pub parity: Parity,
    /// E_N(iy;σ), saturating beyond f64.
    pub value: f64,
    pub nth_root: f64,
    pub in_window: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FixedPointScan {
    pub y2: f64,
    pub window: (f64, f64),
    pub rows: Vec<FixedPointRow>,
}

/// (√(1/2), √(1 + 1/(2κ*))), the σ-interval where the n-th root limits at y² = 2 are ±1.
pub fn fixed_point_window() -> (f64, f64) {
    (0.5f64.sqrt(), (1.0 + 1.0 / (2.0 * kappa_star(1e-15))).sqrt())
}

/// E_N(iy;σ) and its signed n-th root over a σ grid for N = 1..=n_max, exactly.
pub fn fixed_point_scan(sigma_grid: &[Rational], y2: &Rational, n_max: usize) -> Result<FixedPointScan> {
    if signum(y2) <= 0 {
        return Err(Error::Domain(format!("y2 must be positive, got {y2}")));
    }
    if n_max < 1 {
        return Err(Error::InvalidArgument("n_max must be at least 1".into()));
    }
    let window = fixed_point_window();
    let mut rows: Vec<FixedPointRow> = sigma_grid
        .par_iter()
        .flat_map_iter(|sigma| {
            let s2 = sigma * sigma;
            let sigma = to_f64(sigma);
            (1..=n_max).map(move |n| {
                let v = e_at_imaginary(n, y2, &s2)?;
                Ok(FixedPointRow {
                    sigma,
                    n,
                    parity: Parity::of(n),
                    value: to_f64(&v),
                    nth_root: signed_nth_root(&v, n),
                    in_window: window.0 < sigma && sigma < window.1,
                })
            })
        })
        .collect::<Result<_>>()?;
    rows.sort_by(|a, b| a.sigma.total_cmp(&b.sigma).then(a.n.cmp(&b.n)));
    Ok(FixedPointScan {
        y2: to_f64(y2),
        window,
        rows,
    })
}

/// max − min of the even-N n-th roots at z = iy. A common crossing of all even-N curves would
/// make this vanish.
pub fn even_curve_spread(sigma2: &Rational, y2: &Rational, ns: &[usize]) -> Result<f64> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &n in ns.iter().filter(|&&n| n % 2 == 0 && n > 0) {
        let r = signed_nth_root(&e_at_imaginary(n, y2, sigma2)?, n);
        lo = lo.min(r);
        hi = hi.max(r);
    }
    if lo > hi {
        return Err(Error::InvalidArgument("no positive even N given".into()));
    }
    Ok(hi - lo)
}

/// Scans `steps + 1` equally spaced y² in [lo, hi] and returns the point of smallest even-curve
/// spread. A search aid only; no special y is assumed to exist.
pub fn search_even_crossing(
    sigma2: &Rational,
    lo: &Rational,
    hi: &Rational,
    steps: usize,
    ns: &[usize],
) -> Result<(f64, f64)> {
    if steps == 0 || hi < lo {
        return Err(Error::InvalidArgument("need lo <= hi and at least one step".into()));
    }
    let width = (hi - lo) / int(steps as i64);
    let spreads: Vec<(f64, f64)> = (0..=steps)
        .into_par_iter()
        .map(|i| {
            let y2 = lo + &width * int(i as i64);
            Ok((to_f64(&y2), even_curve_spread(sigma2, &y2, ns)?))
        })
        .collect::<Result<_>>()?;
    Ok(spreads
        .into_iter()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("at least one point"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convergence_lab::StudyMode;
    use crate::rational::ratio;

    fn grid() -> Vec<Rational> {
        (0..=16).map(|i| ratio(i, 4)).collect()
    }

    fn cfg(n_max: usize) -> StudyConfig {
        StudyConfig::new(n_max, Vec::new(), StudyMode::SignAudit, 64).unwrap()
    }

    #[test]
    fn even_signs_nonnegative() {
        let a = sign_audit(&cfg(12), &ratio(3, 2), &grid()).unwrap();
        assert!(a.even_violations.is_empty());
        assert!(a.even_zeros.is_empty());
    }

    #[test]
    fn unit_variance_cases() {
        let a = sign_audit(&cfg(8), &int(1), &grid()).unwrap();
        let zero = a.rows.iter().find(|r| r.n == 4 && r.y2 == "1").unwrap();
        assert_eq!(zero.sign, 0);
        let neg = a.rows.iter().find(|r| r.n == 7 && r.y2 == "2").unwrap();
        assert_eq!(neg.sign, -1);
        assert!(a.even_zeros.iter().all(|r| r.y2 == "1"));
        // 1 − y² changes sign at y² = 1 for every odd N
        assert!(a.odd_sign_changes.iter().all(|c| c.y2_lo == 1.0 && c.y2_hi == 1.0));
    }

    #[test]
    fn odd_changes_are_bracketed() {
        let s2 = ratio(1, 2);
        let a = sign_audit(&cfg(9), &s2, &grid()).unwrap();
        assert!(!a.odd_sign_changes.is_empty());
        for c in &a.odd_sign_changes {
            assert!(c.y2_hi - c.y2_lo < 1e-12);
            let lo = eval_exact_real(c.n, &-crate::rational::from_f64(c.y2_lo - 1e-9).unwrap(), &s2).unwrap();
            let hi = eval_exact_real(c.n, &-crate::rational::from_f64(c.y2_hi + 1e-9).unwrap(), &s2).unwrap();
            assert_eq!(signum(&lo) * signum(&hi), -1);
        }
    }

    #[test]
    fn window_endpoints() {
        let (lo, hi) = fixed_point_window();
        assert!((lo - 0.7071).abs() < 1e-4);
        assert!((hi - 1.67199).abs() < 1e-5);
    }

    #[test]
    fn unit_sigma_row_alternates() {
        let scan = fixed_point_scan(&[int(1), ratio(9, 5)], &int(2), 12).unwrap();
        for r in scan.rows.iter().filter(|r| r.sigma == 1.0) {
            assert_eq!(r.nth_root, if r.n % 2 == 0 { 1.0 } else { -1.0 });
            assert!(r.in_window);
        }
        let big: Vec<f64> = scan
            .rows
            .iter()
            .filter(|r| r.sigma == 1.8 && r.n % 2 == 0)
            .map(|r| r.value)
            .collect();
        assert!(big.windows(2).all(|w| w[1].abs() > w[0].abs()), "{big:?}");
        assert!(fixed_point_scan(&[int(1)], &int(0), 3).is_err());
    }

    #[test]
    fn spread_search_runs() {
        let (y2, spread) = search_even_crossing(&ratio(1681, 625), &int(1), &int(3), 20, &[2, 4, 6, 8]).unwrap();
        assert!((1.0..=3.0).contains(&y2));
        assert!(spread >= 0.0);
        assert!(even_curve_spread(&int(1), &int(2), &[1, 3]).is_err());
    }
}

//! Finite-N studies: n-th root and scaled-ratio sequences against their limit curves, exact
//! sign audits, the σ-scan at fixed imaginary z, and the sum-of-squares series for E_{2K}.

mod positivity;
mod scan;

pub use positivity::{positivity_series, PositivitySeries, MAX_SERIES_K};
pub use scan::{
    even_curve_spread, fixed_point_scan, fixed_point_window, search_even_crossing, sign_audit, FixedPointRow,
    FixedPointScan, SignAudit, SignChange, SignRow,
};

use std::cmp::Ordering;

use dashu_base::BitTest;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::asymptotics::{conjectured_limit, limit_real, scaled_limit, Branch, BranchKind, Parity};
use crate::error::{Error, Result};
use crate::exact_core::{default_precision_bits, eval_exact_real, eval_float};
use crate::rational::{ratio_to_f64, signed_nth_root, to_f64, Rational};

/// Exact evaluation is used while N·(bit size of the common denominator) stays below this.
const EXACT_BIT_BUDGET: usize = 1 << 22;

/// Significant digits the float fallback must certify.
const FALLBACK_DIGITS: i32 = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StudyMode {
    NthRoot,
    ScaledRatio,
    SignAudit,
    PositivitySeries,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StudyConfig {
    pub n_max: usize,
    /// (z², σ²) points.
    pub grid: Vec<(Rational, Rational)>,
    pub mode: StudyMode,
    /// Starting precision of the float fallback.
    pub precision_bits: usize,
}

impl StudyConfig {
    pub fn new(n_max: usize, grid: Vec<(Rational, Rational)>, mode: StudyMode, precision_bits: usize) -> Result<Self> {
        if n_max < 1 {
            return Err(Error::InvalidArgument("n_max must be at least 1".into()));
        }
        if precision_bits < 53 {
            return Err(Error::InvalidArgument(format!(
                "precision_bits must be >= 53, got {precision_bits}"
            )));
        }
        Ok(Self {
            n_max,
            grid,
            mode,
            precision_bits,
        })
    }

    /// N ≤ 1000, 53-bit floor, empty grid.
    pub fn with_mode(mode: StudyMode) -> Self {
        Self {
            n_max: 1000,
            grid: Vec::new(),
            mode,
            precision_bits: 53,
        }
    }
}

/// One row of a convergence study.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SequenceRecord {
    pub n: usize,
    pub parity: Parity,
    pub z2: f64,
    pub sigma2: f64,
    /// E_N, or the ratio E_N(z²/N)/E_N(0) in scaled studies. Saturates to ±inf beyond f64.
    pub value: f64,
    /// sign(E_N)|E_N|^{1/N}; equal to `value` in scaled studies.
    pub nth_root: f64,
    pub ref_limit: f64,
    pub abs_err: f64,
    pub branch: Branch,
    /// Working precision of the evaluation; 0 when it was exact.
    pub bits: usize,
}

impl SequenceRecord {
    fn sort_key(&self, other: &Self) -> Ordering {
        self.n
            .cmp(&other.n)
            .then(self.z2.total_cmp(&other.z2))
            .then(self.sigma2.total_cmp(&other.sigma2))
    }
}

fn exact_cost(n: usize, z2: &Rational, sigma2: &Rational) -> usize {
    let size = |x: &Rational| x.numerator().bit_len() + x.denominator().bit_len();
    n.saturating_mul(size(z2) + size(sigma2) + usize::BITS as usize)
}

struct Point {
    value: f64,
    nth_root: f64,
    bits: usize,
}

fn evaluate(n: usize, z2: &Rational, sigma2: &Rational, bits: usize) -> Result<Point> {
    if exact_cost(n, z2, sigma2) <= EXACT_BIT_BUDGET {
        let v = eval_exact_real(n, z2, sigma2)?;
        return Ok(Point {
            value: to_f64(&v),
            nth_root: signed_nth_root(&v, n),
            bits: 0,
        });
    }
    let z = Complex64::new(to_f64(z2), 0.0);
    let s = to_f64(sigma2);
    let target = 10f64.powi(-FALLBACK_DIGITS);
    let mut bits = bits.max(default_precision_bits(n));
    loop {
        let attempt = eval_float(n, z, s, bits);
        match attempt {
            Ok(v) if v.rel_error_bound < target => {
                let sign = v.signum_re();
                let root = if sign == 0.0 {
                    0.0
                } else {
                    sign * (v.ln_abs_re() / n as f64).exp()
                };
                return Ok(Point {
                    value: v.re_f64(),
                    nth_root: root,
                    bits,
                });
            }
            Ok(_) | Err(Error::PrecisionInsufficient { .. }) if bits < 1 << 18 => bits *= 2,
            Ok(v) => {
                return Err(Error::PrecisionInsufficient {
                    n,
                    z2: z2.to_string(),
                    sigma2: sigma2.to_string(),
                    bits,
                    bound: v.rel_error_bound,
                })
            }
            Err(e) => return Err(e),
        }
    }
}

/// The limit the n-th root sequence is compared against: the real-z limit for z² ≥ 0, the
/// parity-split conjectured limit for z² < 0.
pub fn reference_limit(n: usize, z2: f64, sigma2: f64) -> Result<(f64, Branch)> {
    let curve = if z2 >= 0.0 {
        limit_real(z2, sigma2)?
    } else {
        conjectured_limit(-z2, sigma2, Parity::of(n))?
    };
    Ok((curve.value, curve.branch))
}

/// The n-th root record for a single N.
pub fn nth_root_record(n: usize, z2: &Rational, sigma2: &Rational, bits: usize) -> Result<SequenceRecord> {
    if n == 0 {
        return Err(Error::InvalidArgument("N must be at least 1".into()));
    }
    let p = evaluate(n, z2, sigma2, bits)?;
    let (z, s) = (to_f64(z2), to_f64(sigma2));
    let (ref_limit, branch) = reference_limit(n, z, s)?;
    Ok(SequenceRecord {
        n,
        parity: Parity::of(n),
        z2: z,
        sigma2: s,
        value: p.value,
        nth_root: p.nth_root,
        ref_limit,
        abs_err: (p.nth_root - ref_limit).abs(),
        branch,
        bits: p.bits,
    })
}

/// sign(E_N)|E_N|^{1/N} for N = 1..=n_max, evaluated exactly where affordable.
pub fn nth_root_sequence(cfg: &StudyConfig, z2: &Rational, sigma2: &Rational) -> Result<Vec<SequenceRecord>> {
    (1..=cfg.n_max)
        .into_par_iter()
        .map(|n| nth_root_record(n, z2, sigma2, cfg.precision_bits))
        .collect()
}

/// The scaled-ratio record E_N(z²/N;σ)/E_N(0;σ) for a single N.
pub fn scaled_ratio_record(n: usize, z2: &Rational, sigma2: &Rational) -> Result<SequenceRecord> {
    if n == 0 {
        return Err(Error::InvalidArgument("N must be at least 1".into()));
    }
    let base = eval_exact_real(n, &Rational::ZERO, sigma2)?;
    if base.is_zero() {
        return Err(Error::DivisionByZero(format!("E_{n}(0; sigma2 = {sigma2}) vanishes")));
    }
    let top = eval_exact_real(n, &(z2 / Rational::from(n)), sigma2)?;
    let ratio = ratio_to_f64(&top, &base);
    let (z, s) = (to_f64(z2), to_f64(sigma2));
    let ref_limit = scaled_limit(Complex64::new(z, 0.0), s)?.re;
    let kind = if s <= 1.5 {
        BranchKind::Symmetric
    } else {
        BranchKind::Broken
    };
    Ok(SequenceRecord {
        n,
        parity: Parity::of(n),
        z2: z,
        sigma2: s,
        value: ratio,
        nth_root: ratio,
        ref_limit,
        abs_err: (ratio - ref_limit).abs(),
        branch: Branch {
            kind,
            sign: crate::asymptotics::Sign::Plus,
        },
        bits: 0,
    })
}

pub fn scaled_ratio_sequence(cfg: &StudyConfig, z2: &Rational, sigma2: &Rational) -> Result<Vec<SequenceRecord>> {
    (1..=cfg.n_max)
        .into_par_iter()
        .map(|n| scaled_ratio_record(n, z2, sigma2))
        .collect()
}

/// Runs an n-th root or scaled-ratio study over every grid point, sorted by (N, z², σ²).
pub fn run_sequences(cfg: &StudyConfig) -> Result<Vec<SequenceRecord>> {
    let study: fn(&StudyConfig, &Rational, &Rational) -> Result<Vec<SequenceRecord>> = match cfg.mode {
        StudyMode::NthRoot => nth_root_sequence,
        StudyMode::ScaledRatio => scaled_ratio_sequence,
        other => {
            return Err(Error::InvalidArgument(format!(
                "{other:?} does not produce sequence records"
            )))
        }
    };
    let mut rows = Vec::new();
    for (z2, s2) in &cfg.grid {
        rows.extend(study(cfg, z2, s2)?);
    }
    rows.sort_by(SequenceRecord::sort_key);
    Ok(rows)
}

/// Outcome of the soft monotone-error check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrendReport {
    pub monotone: bool,
    /// N at which abs_err increased relative to N − 1.
    pub violations: Vec<usize>,
}

/// Checks that abs_err does not increase from N = from_n onward (records sorted by N).
pub fn monotone_trend(records: &[SequenceRecord], from_n: usize) -> TrendReport {
    let tail: Vec<_> = records.iter().filter(|r| r.n >= from_n).collect();
    let violations: Vec<usize> = tail
        .windows(2)
        .filter(|w| w[1].abs_err > w[0].abs_err)
        .map(|w| w[1].n)
        .collect();
    TrendReport {
        monotone: violations.is_empty(),
        violations,
    }
}

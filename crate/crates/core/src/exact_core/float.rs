use dashu_base::{Abs, UnsignedAbs};
use dashu_float::{round::mode::HalfEven, Context, FBig};
use dashu_int::UBig;
use num_complex::Complex64;

use super::pairing_weights;
use crate::error::{Error, Result};
use crate::rational::ln_ubig;

type F = FBig<HalfEven, 2>;

/// Working precision that survives the sign cancellation at z² < 0 for typical inputs.
pub fn default_precision_bits(n: usize) -> usize {
    64 + 4 * n
}

/// Result of a working-precision evaluation together with its tracked error bound.
#[derive(Clone, Debug)]
pub struct HpValue {
    pub re: FBig<HalfEven, 2>,
    pub im: FBig<HalfEven, 2>,
    pub bits: usize,
    /// A-priori bound on |computed − true| / |true|.
    pub rel_error_bound: f64,
}

fn ln_abs_f(x: &F) -> f64 {
    let repr = x.repr();
    if repr.is_zero() {
        return f64::NEG_INFINITY;
    }
    ln_ubig(&repr.significand().clone().unsigned_abs()) + repr.exponent() as f64 * std::f64::consts::LN_2
}

fn sign_f(x: &F) -> f64 {
    let repr = x.repr();
    if repr.is_zero() {
        0.0
    } else if repr.sign() == dashu_base::Sign::Negative {
        -1.0
    } else {
        1.0
    }
}

impl HpValue {
    /// Nearest doubles; components outside the f64 range saturate to ±inf.
    pub fn to_complex64(&self) -> Complex64 {
        Complex64::new(self.re.to_f64().value(), self.im.to_f64().value())
    }

    pub fn re_f64(&self) -> f64 {
        self.re.to_f64().value()
    }

    /// ln of the real part's magnitude, valid far outside the f64 range.
    pub fn ln_abs_re(&self) -> f64 {
        ln_abs_f(&self.re)
    }

    pub fn signum_re(&self) -> f64 {
        sign_f(&self.re)
    }
}

fn hp_f64(x: f64, p: usize) -> F {
    F::try_from(x).expect("finite").with_precision(p).value()
}

fn hp_int(x: &UBig, p: usize) -> F {
    F::from_repr(dashu_float::Repr::from(x.clone()), Context::new(0))
        .with_precision(p)
        .value()
}

fn cmul(a: &(F, F), b: &(F, F)) -> (F, F) {
    (&a.0 * &b.0 - &a.1 * &b.1, &a.0 * &b.1 + &a.1 * &b.0)
}

/// E_N in binary floating point with `bits` of working precision.
///
/// Sums the same collapsed series as the exact path and tracks a running bound from the
/// magnitude sum Σ|term|; fails with `PrecisionInsufficient` if the bound exceeds 2^{−bits/2}.
pub fn eval_float(n: usize, z2: Complex64, sigma2: f64, bits: usize) -> Result<HpValue> {
    if n == 0 {
        return Err(Error::InvalidArgument("N must be at least 1".into()));
    }
    if !(sigma2 > 0.0) || !sigma2.is_finite() {
        return Err(Error::Domain(format!("sigma2 must be positive, got {sigma2}")));
    }
    if !z2.re.is_finite() || !z2.im.is_finite() {
        return Err(Error::InvalidArgument("z2 must be finite".into()));
    }
    if bits < 53 {
        return Err(Error::InvalidArgument(format!(
            "precision_bits must be >= 53, got {bits}"
        )));
    }
    let p = bits;
    let zero = F::ZERO.with_precision(p).value();
    let one = hp_f64(1.0, p);
    let t = (hp_f64(sigma2, p) - &one) / hp_f64(n as f64, p);
    let a = (&one + hp_f64(z2.re, p), hp_f64(z2.im, p));

    let mut apow = Vec::with_capacity(n + 1);
    apow.push((one.clone(), zero.clone()));
    for i in 0..n {
        let next = cmul(&apow[i], &a);
        apow.push(next);
    }

    let mut re = zero.clone();
    let mut im = zero.clone();
    let mut mag = zero.clone();
    let mut tpow = one.clone();
    for (k, w) in pairing_weights(n).iter().enumerate() {
        let c = hp_int(w, p) * &tpow;
        let (ar, ai) = &apow[n - k];
        let tr = &c * ar;
        let ti = &c * ai;
        mag += tr.clone().abs() + ti.clone().abs();
        re += tr;
        im += ti;
        tpow *= &t;
    }

    let modulus_lb = if ln_abs_f(&re) > ln_abs_f(&im) { &re } else { &im };
    let ln_bound = if mag.repr().is_zero() {
        f64::NEG_INFINITY
    } else if modulus_lb.repr().is_zero() {
        f64::INFINITY
    } else {
        // every term carries at most ~(2N+6) roundings, complex products double that
        ((4 * n + 16) as f64).ln() + (1.0 - p as f64) * std::f64::consts::LN_2 + ln_abs_f(&mag) - ln_abs_f(modulus_lb)
    };
    let rel_error_bound = ln_bound.exp();
    // compared in logs: 2^{-bits/2} underflows for large precisions
    if !(ln_bound < -(bits as f64) / 2.0 * std::f64::consts::LN_2) {
        return Err(Error::PrecisionInsufficient {
            n,
            z2: format!("{z2}"),
            sigma2: format!("{sigma2}"),
            bits,
            bound: rel_error_bound,
        });
    }
    Ok(HpValue {
        re,
        im,
        bits,
        rel_error_bound,
    })
}

/// Doubles the precision from the default until at least `digits` significant digits survive.
pub fn eval_float_auto(n: usize, z2: Complex64, sigma2: f64, digits: u32) -> Result<HpValue> {
    let target = 10f64.powi(-(digits as i32));
    let mut bits = default_precision_bits(n);
    loop {
        match eval_float(n, z2, sigma2, bits) {
            Ok(v) if v.rel_error_bound < target => return Ok(v),
            Ok(_) | Err(Error::PrecisionInsufficient { .. }) if bits < (1 << 18) => bits *= 2,
            other => return other,
        }
    }
}

/// sign(E_N)·|E_N|^{1/N} for real z².
pub fn nth_root_value(n: usize, z2: f64, sigma2: f64, bits: usize) -> Result<f64> {
    let v = eval_float(n, Complex64::new(z2, 0.0), sigma2, bits)?;
    let s = v.signum_re();
    if s == 0.0 {
        return Ok(0.0);
    }
    Ok(s * (v.ln_abs_re() / n as f64).exp())
}

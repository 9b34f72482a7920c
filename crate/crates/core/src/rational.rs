//! Exact scalars: [`Rational`], [`ComplexRational`], text parsing and log-domain conversion to floats.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use dashu_base::{BitTest, Sign, UnsignedAbs};
use dashu_int::{IBig, UBig};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Arbitrary-precision rational, always kept in lowest terms with a positive denominator.
pub use dashu_ratio::RBig as Rational;

pub fn int(n: i64) -> Rational {
    Rational::from(IBig::from(n))
}

pub fn ratio(num: i64, den: u64) -> Rational {
    assert!(den != 0, "zero denominator");
    Rational::from_parts(IBig::from(num), UBig::from(den))
}

pub fn to_f64(x: &Rational) -> f64 {
    x.to_f64().value()
}

/// Exact rational value of a finite double.
pub fn from_f64(x: f64) -> Result<Rational> {
    Rational::try_from(x).map_err(|_| Error::InvalidArgument(format!("{x} is not a finite number")))
}

pub fn signum(x: &Rational) -> i8 {
    if x.is_zero() {
        0
    } else if x.sign() == Sign::Negative {
        -1
    } else {
        1
    }
}

pub fn abs(x: &Rational) -> Rational {
    if signum(x) < 0 {
        -x.clone()
    } else {
        x.clone()
    }
}

/// Natural log of a positive integer of any size.
pub fn ln_ubig(x: &UBig) -> f64 {
    let bits = x.bit_len();
    if bits == 0 {
        return f64::NEG_INFINITY;
    }
    if bits <= 64 {
        return (u64::try_from(x.clone()).expect("fits") as f64).ln();
    }
    let shift = bits - 64;
    let top = u64::try_from(x >> shift).expect("fits");
    (top as f64).ln() + shift as f64 * std::f64::consts::LN_2
}

/// ln|x|; `-inf` at zero. Works far outside the f64 range.
pub fn ln_abs(x: &Rational) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    ln_ubig(&x.numerator().clone().unsigned_abs()) - ln_ubig(x.denominator())
}

/// sign(x)·|x|^{1/n}, computed in the log domain so huge values do not overflow.
pub fn signed_nth_root(x: &Rational, n: usize) -> f64 {
    match signum(x) {
        0 => 0.0,
        s => f64::from(s) * (ln_abs(x) / n as f64).exp(),
    }
}

/// a/b as a double, safe when both are far outside the f64 range.
pub fn ratio_to_f64(a: &Rational, b: &Rational) -> f64 {
    let s = signum(a) * signum(b);
    if s == 0 {
        return if b.is_zero() { f64::NAN } else { 0.0 };
    }
    let q = a / b;
    let ln = ln_abs(&q);
    if ln.abs() < 700.0 {
        return to_f64(&q);
    }
    f64::from(s) * ln.exp()
}

/// Parses `p/q`, integers and decimals (`-1.15`, `2.5e-3`) exactly.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let p = parse_decimal(p)?;
        let q = parse_decimal(q)?;
        if q.is_zero() {
            return Err(Error::InvalidArgument(format!("zero denominator in '{s}'")));
        }
        return Ok(p / q);
    }
    parse_decimal(s)
}

fn parse_decimal(s: &str) -> Result<Rational> {
    let bad = || Error::InvalidArgument(format!("cannot parse '{s}' as a number"));
    let s = s.trim();
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (neg, body) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (whole, frac) = body.split_once('.').unwrap_or((body, ""));
    if whole.is_empty() && frac.is_empty() {
        return Err(bad());
    }
    if !whole.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{whole}{frac}");
    let mut num = IBig::from_str(if digits.is_empty() { "0" } else { &digits }).map_err(|_| bad())?;
    if neg {
        num = -num;
    }
    let scale = exp - frac.len() as i32;
    let ten = UBig::from(10u8);
    Ok(if scale >= 0 {
        Rational::from(num * IBig::from(ten.pow(scale as usize)))
    } else {
        Rational::from_parts(num, ten.pow((-scale) as usize))
    })
}

/// Exact complex number with rational parts.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ComplexRational {
    pub re: Rational,
    pub im: Rational,
}

impl ComplexRational {
    pub fn new(re: Rational, im: Rational) -> Self {
        Self { re, im }
    }

    pub fn real(re: Rational) -> Self {
        Self { re, im: Rational::ZERO }
    }

    pub fn zero() -> Self {
        Self::real(Rational::ZERO)
    }

    pub fn one() -> Self {
        Self::real(Rational::ONE)
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn scale(&self, k: &Rational) -> Self {
        Self::new(&self.re * k, &self.im * k)
    }

    pub fn pow(&self, mut n: usize) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one();
        while n > 0 {
            if n & 1 == 1 {
                acc = &acc * &base;
            }
            n >>= 1;
            if n > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    pub fn to_complex64(&self) -> Complex64 {
        Complex64::new(to_f64(&self.re), to_f64(&self.im))
    }

    /// Parses `a`, `bi`, `a+bi` or `a-bi`, each part decimal or `p/q`.
    pub fn parse(s: &str) -> Result<Self> {
        let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let Some(body) = s.strip_suffix('i') else {
            return Ok(Self::real(parse_rational(&s)?));
        };
        // the split point is the last sign that is not leading and not part of an exponent
        let bytes = body.as_bytes();
        let split = (1..bytes.len())
            .rev()
            .find(|&i| (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E'));
        let (re, im) = match split {
            Some(i) => (&body[..i], &body[i..]),
            None => ("0", body),
        };
        let im = match im {
            "" | "+" => Rational::ONE,
            "-" => -Rational::ONE,
            other => parse_rational(other)?,
        };
        Ok(Self::new(parse_rational(re)?, im))
    }
}

impl From<Rational> for ComplexRational {
    fn from(re: Rational) -> Self {
        Self::real(re)
    }
}

impl Add for &ComplexRational {
    type Output = ComplexRational;
    fn add(self, rhs: Self) -> ComplexRational {
        ComplexRational::new(&self.re + &rhs.re, &self.im + &rhs.im)
    }
}

impl Sub for &ComplexRational {
    type Output = ComplexRational;
    fn sub(self, rhs: Self) -> ComplexRational {
        ComplexRational::new(&self.re - &rhs.re, &self.im - &rhs.im)
    }
}

impl Mul for &ComplexRational {
    type Output = ComplexRational;
    fn mul(self, rhs: Self) -> ComplexRational {
        if self.is_real() && rhs.is_real() {
            return ComplexRational::real(&self.re * &rhs.re);
        }
        ComplexRational::new(
            &self.re * &rhs.re - &self.im * &rhs.im,
            &self.re * &rhs.im + &self.im * &rhs.re,
        )
    }
}

impl Neg for ComplexRational {
    type Output = ComplexRational;
    fn neg(self) -> ComplexRational {
        ComplexRational::new(-self.re, -self.im)
    }
}

impl fmt::Display for ComplexRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            return write!(f, "{}", self.re);
        }
        let sign = if signum(&self.im) < 0 { '-' } else { '+' };
        write!(f, "{}{}{}i", self.re, sign, abs(&self.im))
    }
}

//! Scalar fields used throughout the crate.
//!
//! Two modes are supported: [`GaussRat`], an exact complex number with
//! rational real and imaginary parts, and [`Complex64`] for floating point
//! work. Generic code is written against the [`Scalar`] trait, so a single
//! computation can never mix the two.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

/// Arithmetic mode of a computation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    Float,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::Exact => f.write_str("exact"),
            Mode::Float => f.write_str("float"),
        }
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "exact" => Ok(Mode::Exact),
            "float" => Ok(Mode::Float),
            other => Err(Error::Parse(format!("unknown mode `{other}`"))),
        }
    }
}

/// A complex field element, either exact or floating point.
pub trait Scalar:
    Clone
    + fmt::Debug
    + fmt::Display
    + PartialEq
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    const MODE: Mode;

    fn zero() -> Self;
    fn one() -> Self;
    /// The imaginary unit.
    fn i() -> Self;
    fn from_i64(n: i64) -> Self;
    /// The real rational `num/den`.
    fn from_ratio(num: i64, den: i64) -> Self;
    /// Rounds (float) or converts exactly (exact) a double-precision complex.
    fn from_c64(z: Complex64) -> Self;
    fn conj(&self) -> Self;
    fn is_zero(&self) -> bool;
    /// `|z|^2` as an element of the field.
    fn norm_sqr(&self) -> Self;
    fn to_c64(&self) -> Complex64;

    fn modulus(&self) -> f64 {
        self.to_c64().norm()
    }

    /// `(1 + i) / 2`
    fn alpha_plus() -> Self {
        (Self::one() + Self::i()) / Self::from_i64(2)
    }

    /// `(1 - i) / 2`
    fn alpha_minus() -> Self {
        (Self::one() - Self::i()) / Self::from_i64(2)
    }

    fn from_gauss(z: &GaussRat) -> Self;

    /// Serializes as a `[re, im]` pair: `"p/q"` strings in exact mode, numbers in float mode.
    fn to_json_pair(&self) -> (Value, Value);
    fn from_json_pair(re: &Value, im: &Value) -> Result<Self>;

    fn pow(&self, exp: u32) -> Self {
        let mut acc = Self::one();
        let mut base = self.clone();
        let mut e = exp;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base.clone();
            }
            base = base.clone() * base;
            e >>= 1;
        }
        acc
    }
}

/// Exact Gaussian rational `re + i·im`.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct GaussRat {
    pub re: BigRational,
    pub im: BigRational,
}

impl GaussRat {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        Self { re, im }
    }

    pub fn from_parts(re_num: i64, re_den: i64, im_num: i64, im_den: i64) -> Self {
        Self {
            re: ratio(re_num, re_den),
            im: ratio(im_num, im_den),
        }
    }

    pub fn real(r: BigRational) -> Self {
        Self {
            re: r,
            im: BigRational::zero(),
        }
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }
}

pub(crate) fn ratio(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

fn rat_to_f64(r: &BigRational) -> f64 {
    if let Some(x) = r.to_f64().filter(|x| x.is_finite()) {
        return x;
    }
    // Scale to a 64-bit quotient, then apply the binary exponent.
    let n = r.numer().bits() as i64;
    let d = r.denom().bits() as i64;
    let shift = 64 - (n - d);
    let scaled = if shift >= 0 {
        (r.numer() << shift as usize) / r.denom()
    } else {
        r.numer() / (r.denom() << (-shift) as usize)
    };
    ldexp(scaled.to_f64().unwrap_or(f64::NAN), -shift)
}

fn ldexp(mut x: f64, mut exp: i64) -> f64 {
    while exp > 1000 {
        x *= 2f64.powi(1000);
        exp -= 1000;
    }
    while exp < -1000 {
        x *= 2f64.powi(-1000);
        exp += 1000;
    }
    x * 2f64.powi(exp as i32)
}

fn rat_from_f64(x: f64) -> BigRational {
    BigRational::from_float(x).unwrap_or_else(BigRational::zero)
}

pub(crate) fn format_rat(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub(crate) fn parse_rat(s: &str) -> Result<BigRational> {
    let s = s.trim();
    if s.is_empty() {
        return Err(Error::Parse("empty rational".into()));
    }
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad numerator in `{s}`")))?;
        let q: BigInt = q
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad denominator in `{s}`")))?;
        if q.is_zero() {
            return Err(Error::Parse(format!("zero denominator in `{s}`")));
        }
        return Ok(BigRational::new(p, q));
    }
    if let Ok(n) = s.parse::<BigInt>() {
        return Ok(BigRational::from_integer(n));
    }
    // Decimal literal: read exactly, not through f64.
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    if let Some((int, frac)) = body.split_once('.') {
        if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
            return Err(Error::Parse(format!("bad number `{s}`")));
        }
        let digits = format!("{int}{frac}");
        let n: BigInt = if digits.is_empty() {
            BigInt::zero()
        } else {
            digits
                .parse()
                .map_err(|_| Error::Parse(format!("bad number `{s}`")))?
        };
        let d = num_traits::pow(BigInt::from(10), frac.len());
        let r = BigRational::new(n, d);
        return Ok(if neg { -r } else { r });
    }
    Err(Error::Parse(format!("bad number `{s}`")))
}

fn fmt_rat_plain(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Display for GaussRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            return f.write_str(&fmt_rat_plain(&self.re));
        }
        let im_abs = self.im.abs();
        let im_str = if im_abs.is_one() {
            "i".to_string()
        } else {
            format!("{}i", fmt_rat_plain(&im_abs))
        };
        if self.re.is_zero() {
            if self.im.is_negative() {
                write!(f, "-{im_str}")
            } else {
                f.write_str(&im_str)
            }
        } else {
            let sign = if self.im.is_negative() { '-' } else { '+' };
            write!(f, "{}{sign}{im_str}", fmt_rat_plain(&self.re))
        }
    }
}

impl fmt::Debug for GaussRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GaussRat({self})")
    }
}

/// Splits `a+bi` style text into real and imaginary parts.
fn split_complex(s: &str) -> Result<(String, String)> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if t.is_empty() {
        return Err(Error::Parse("empty number".into()));
    }
    let Some(body) = t.strip_suffix('i').or_else(|| t.strip_suffix('j')) else {
        return Ok((t, "0".into()));
    };
    // Locate the sign separating the real part from the imaginary part.
    let bytes = body.as_bytes();
    let mut split = None;
    for idx in (1..bytes.len()).rev() {
        let c = bytes[idx] as char;
        if (c == '+' || c == '-') && !matches!(bytes[idx - 1] as char, 'e' | 'E' | '/') {
            split = Some(idx);
            break;
        }
    }
    let (re, im) = match split {
        Some(idx) => (body[..idx].to_string(), body[idx..].to_string()),
        None => ("0".to_string(), body.to_string()),
    };
    let im = match im.as_str() {
        "" | "+" => "1".to_string(),
        "-" => "-1".to_string(),
        other => other.trim_start_matches('+').to_string(),
    };
    Ok((re, im))
}

impl FromStr for GaussRat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (re, im) = split_complex(s)?;
        Ok(Self {
            re: parse_rat(&re)?,
            im: parse_rat(&im)?,
        })
    }
}

/// Parses `a+bi` text into a floating point complex number.
pub fn parse_c64(s: &str) -> Result<Complex64> {
    let (re, im) = split_complex(s)?;
    let parse = |x: &str| -> Result<f64> {
        if x.contains('/') {
            Ok(rat_to_f64(&parse_rat(x)?))
        } else {
            x.parse::<f64>()
                .map_err(|_| Error::Parse(format!("bad number `{x}`")))
        }
    };
    Ok(Complex64::new(parse(&re)?, parse(&im)?))
}

/// Parses text into any scalar mode.
pub fn parse_scalar<T: Scalar>(s: &str) -> Result<T> {
    match T::MODE {
        Mode::Exact => Ok(T::from_gauss(&s.parse::<GaussRat>()?)),
        Mode::Float => Ok(T::from_c64(parse_c64(s)?)),
    }
}

impl Add for GaussRat {
    type Output = GaussRat;
    fn add(self, rhs: Self) -> Self {
        GaussRat {
            re: self.re + rhs.re,
            im: self.im + rhs.im,
        }
    }
}

impl Sub for GaussRat {
    type Output = GaussRat;
    fn sub(self, rhs: Self) -> Self {
        GaussRat {
            re: self.re - rhs.re,
            im: self.im - rhs.im,
        }
    }
}

impl Mul for GaussRat {
    type Output = GaussRat;
    fn mul(self, rhs: Self) -> Self {
        if self.im.is_zero() && rhs.im.is_zero() {
            return GaussRat::real(self.re * rhs.re);
        }
        GaussRat {
            re: &self.re * &rhs.re - &self.im * &rhs.im,
            im: &self.re * &rhs.im + &self.im * &rhs.re,
        }
    }
}

impl Div for GaussRat {
    type Output = GaussRat;
    fn div(self, rhs: Self) -> Self {
        assert!(!rhs.is_zero(), "division by zero Gaussian rational");
        if rhs.im.is_zero() {
            return GaussRat {
                re: self.re / &rhs.re,
                im: self.im / &rhs.re,
            };
        }
        let den = &rhs.re * &rhs.re + &rhs.im * &rhs.im;
        GaussRat {
            re: (&self.re * &rhs.re + &self.im * &rhs.im) / &den,
            im: (&self.im * &rhs.re - &self.re * &rhs.im) / &den,
        }
    }
}

impl Neg for GaussRat {
    type Output = GaussRat;
    fn neg(self) -> Self {
        GaussRat {
            re: -self.re,
            im: -self.im,
        }
    }
}

impl Scalar for GaussRat {
    const MODE: Mode = Mode::Exact;

    fn zero() -> Self {
        GaussRat::default()
    }
    fn one() -> Self {
        GaussRat::real(BigRational::one())
    }
    fn i() -> Self {
        GaussRat::new(BigRational::zero(), BigRational::one())
    }
    fn from_i64(n: i64) -> Self {
        GaussRat::real(BigRational::from_integer(BigInt::from(n)))
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        GaussRat::real(ratio(num, den))
    }
    fn from_c64(z: Complex64) -> Self {
        GaussRat::new(rat_from_f64(z.re), rat_from_f64(z.im))
    }
    fn conj(&self) -> Self {
        GaussRat::new(self.re.clone(), -self.im.clone())
    }
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
    fn norm_sqr(&self) -> Self {
        GaussRat::real(&self.re * &self.re + &self.im * &self.im)
    }
    fn to_c64(&self) -> Complex64 {
        Complex64::new(rat_to_f64(&self.re), rat_to_f64(&self.im))
    }
    fn from_gauss(z: &GaussRat) -> Self {
        z.clone()
    }
    fn to_json_pair(&self) -> (Value, Value) {
        (
            Value::String(format_rat(&self.re)),
            Value::String(format_rat(&self.im)),
        )
    }
    fn from_json_pair(re: &Value, im: &Value) -> Result<Self> {
        let part = |v: &Value| -> Result<BigRational> {
            match v {
                Value::String(s) => parse_rat(s),
                Value::Number(n) => {
                    if let Some(i) = n.as_i64() {
                        Ok(BigRational::from_integer(BigInt::from(i)))
                    } else {
                        Ok(rat_from_f64(n.as_f64().unwrap_or(f64::NAN)))
                    }
                }
                other => Err(Error::Parse(format!("expected rational, found {other}"))),
            }
        };
        Ok(GaussRat::new(part(re)?, part(im)?))
    }
}

impl Scalar for Complex64 {
    const MODE: Mode = Mode::Float;

    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn i() -> Self {
        Complex64::new(0.0, 1.0)
    }
    fn from_i64(n: i64) -> Self {
        Complex64::new(n as f64, 0.0)
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        Complex64::new(num as f64 / den as f64, 0.0)
    }
    fn from_c64(z: Complex64) -> Self {
        z
    }
    fn conj(&self) -> Self {
        Complex64::conj(self)
    }
    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }
    fn norm_sqr(&self) -> Self {
        Complex64::new(Complex64::norm_sqr(self), 0.0)
    }
    fn to_c64(&self) -> Complex64 {
        *self
    }
    fn modulus(&self) -> f64 {
        self.norm()
    }
    fn from_gauss(z: &GaussRat) -> Self {
        z.to_c64()
    }
    fn to_json_pair(&self) -> (Value, Value) {
        (json_f64(self.re), json_f64(self.im))
    }
    fn from_json_pair(re: &Value, im: &Value) -> Result<Self> {
        let part = |v: &Value| -> Result<f64> {
            match v {
                Value::Number(n) => n
                    .as_f64()
                    .ok_or_else(|| Error::Parse(format!("bad number {n}"))),
                Value::String(s) => Ok(rat_to_f64(&parse_rat(s)?)),
                other => Err(Error::Parse(format!("expected number, found {other}"))),
            }
        };
        Ok(Complex64::new(part(re)?, part(im)?))
    }
}

fn json_f64(x: f64) -> Value {
    serde_json::Number::from_f64(x)
        .map(Value::Number)
        .unwrap_or(Value::Null)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(s: &str) -> GaussRat {
        s.parse().unwrap()
    }

    #[test]
    fn alphas_are_exact() {
        let ap = GaussRat::alpha_plus();
        let am = GaussRat::alpha_minus();
        assert_eq!(ap, GaussRat::from_parts(1, 2, 1, 2));
        assert_eq!(am, GaussRat::from_parts(1, 2, -1, 2));
        assert_eq!(ap.clone() * am.clone(), GaussRat::from_ratio(1, 2));
        assert_eq!(ap - am, GaussRat::i());
    }

    #[test]
    fn parse_and_display() {
        assert_eq!(g("3").to_string(), "3");
        assert_eq!(g("-1/2+1/2i").to_string(), "-1/2+1/2i");
        assert_eq!(g("2-4i"), GaussRat::from_parts(2, 1, -4, 1));
        assert_eq!(g("i"), GaussRat::i());
        assert_eq!(g("-i"), -GaussRat::i());
        assert_eq!(g("0.5"), GaussRat::from_ratio(1, 2));
        assert_eq!(g("1/2i").to_string(), "1/2i");
        assert_eq!(g("4/5+3/5i").to_string(), "4/5+3/5i");
        assert!("1/0".parse::<GaussRat>().is_err());
        assert!("abc".parse::<GaussRat>().is_err());
    }

    #[test]
    fn parse_float_complex() {
        let z = parse_c64("0.7i").unwrap();
        assert_eq!(z, Complex64::new(0.0, 0.7));
        let z = parse_c64("1e-3-2i").unwrap();
        assert_eq!(z, Complex64::new(1e-3, -2.0));
    }

    #[test]
    fn division_is_exact() {
        let q = g("3+i") / g("3-i");
        assert_eq!(q, g("4/5+3/5i"));
        assert_eq!(q * g("3-i"), g("3+i"));
    }

    #[test]
    fn json_pair_round_trip() {
        let z = g("-7/3+5/2i");
        let (re, im) = z.to_json_pair();
        assert_eq!(re, Value::String("-7/3".into()));
        assert_eq!(GaussRat::from_json_pair(&re, &im).unwrap(), z);
        let w = Complex64::new(0.1, -2.5);
        let (re, im) = w.to_json_pair();
        assert_eq!(Complex64::from_json_pair(&re, &im).unwrap(), w);
    }

    #[test]
    fn huge_rationals_convert_to_f64() {
        let big = BigRational::new(
            num_traits::pow(BigInt::from(3), 800),
            num_traits::pow(BigInt::from(2), 1300),
        );
        let x = rat_to_f64(&big);
        let expect = (800.0 * 3f64.ln() - 1300.0 * 2f64.ln()).exp();
        assert!((x - expect).abs() <= 1e-12 * expect);
    }
}

//! Coefficient fields.
//!
//! Everything in the crate is generic over [`Scalar`], which has two
//! implementations: [`GaussRational`] (exact arithmetic in ℚ(i)) and
//! [`Complex64`] (double precision). Exact mode is lossless; numeric mode
//! compares to zero with [`NUMERIC_ZERO_TOL`].

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix, RankInfo};

/// Absolute threshold below which a numeric coefficient is treated as zero.
pub const NUMERIC_ZERO_TOL: f64 = 1e-10;

/// Arithmetic mode of a model or computation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    Numeric,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::Exact => f.write_str("exact"),
            Mode::Numeric => f.write_str("numeric"),
        }
    }
}

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
    + Neg<Output = Self>
{
    const MODE: Mode;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_i64(v: i64) -> Self;
    /// `num/den`; panics on `den == 0`.
    fn from_ratio(num: i64, den: i64) -> Self;
    /// The imaginary unit.
    fn imag_unit() -> Self;
    fn is_zero(&self) -> bool;
    fn conj(&self) -> Self;
    fn inv(&self) -> Option<Self>;
    fn to_c64(&self) -> Complex64;
    fn real_part(&self) -> Self;
    fn imag_part(&self) -> Self;
    /// Parse a coefficient string in this field's grammar.
    fn parse(s: &str) -> Result<Self>;
    /// Rank of a matrix over this field.
    fn rank(m: &Matrix<Self>) -> RankInfo;

    fn norm_sqr(&self) -> Self {
        self.clone() * self.conj()
    }

    fn abs_f64(&self) -> f64 {
        self.to_c64().norm()
    }
}

/// An element `re + im·i` of ℚ(i). Components are always reduced with
/// positive denominators (maintained by `BigRational`).
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct GaussRational {
    pub re: BigRational,
    pub im: BigRational,
}

impl GaussRational {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        GaussRational { re, im }
    }

    pub fn from_parts(re_num: i64, re_den: i64, im_num: i64, im_den: i64) -> Self {
        GaussRational {
            re: BigRational::new(re_num.into(), re_den.into()),
            im: BigRational::new(im_num.into(), im_den.into()),
        }
    }

    pub fn real(r: BigRational) -> Self {
        GaussRational {
            re: r,
            im: BigRational::zero(),
        }
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    /// Sign of the real part when the value is real and nonzero.
    pub fn real_sign(&self) -> Option<std::cmp::Ordering> {
        if !self.im.is_zero() {
            return None;
        }
        Some(self.re.cmp(&BigRational::zero()))
    }
}

fn fmt_ratio(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Display for GaussRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.re.is_zero(), self.im.is_zero()) {
            (_, true) => write!(f, "{}", fmt_ratio(&self.re)),
            (true, false) => write!(f, "{}i", fmt_ratio(&self.im)),
            (false, false) => {
                let sign = if self.im.is_negative() { "-" } else { "+" };
                write!(f, "{}{}{}i", fmt_ratio(&self.re), sign, fmt_ratio(&self.im.abs()))
            }
        }
    }
}

impl Add for GaussRational {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        GaussRational {
            re: self.re + o.re,
            im: self.im + o.im,
        }
    }
}

impl Sub for GaussRational {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        GaussRational {
            re: self.re - o.re,
            im: self.im - o.im,
        }
    }
}

impl Mul for GaussRational {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        GaussRational {
            re: &self.re * &o.re - &self.im * &o.im,
            im: &self.re * &o.im + &self.im * &o.re,
        }
    }
}

impl Neg for GaussRational {
    type Output = Self;
    fn neg(self) -> Self {
        GaussRational {
            re: -self.re,
            im: -self.im,
        }
    }
}

impl Scalar for GaussRational {
    const MODE: Mode = Mode::Exact;

    fn zero() -> Self {
        GaussRational::default()
    }
    fn one() -> Self {
        GaussRational::real(BigRational::one())
    }
    fn from_i64(v: i64) -> Self {
        GaussRational::real(BigRational::from_integer(v.into()))
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        GaussRational::real(BigRational::new(num.into(), den.into()))
    }
    fn imag_unit() -> Self {
        GaussRational::new(BigRational::zero(), BigRational::one())
    }
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
    fn conj(&self) -> Self {
        GaussRational {
            re: self.re.clone(),
            im: -self.im.clone(),
        }
    }
    fn inv(&self) -> Option<Self> {
        if Scalar::is_zero(self) {
            return None;
        }
        let d = &self.re * &self.re + &self.im * &self.im;
        Some(GaussRational {
            re: &self.re / &d,
            im: -(&self.im / &d),
        })
    }
    fn to_c64(&self) -> Complex64 {
        Complex64::new(
            self.re.to_f64().unwrap_or(f64::NAN),
            self.im.to_f64().unwrap_or(f64::NAN),
        )
    }
    fn real_part(&self) -> Self {
        GaussRational::real(self.re.clone())
    }
    fn imag_part(&self) -> Self {
        GaussRational::real(self.im.clone())
    }
    fn parse(s: &str) -> Result<Self> {
        parse_exact(s)
    }
    fn rank(m: &Matrix<Self>) -> RankInfo {
        RankInfo::exact(linalg::bareiss_rank(m))
    }
}

impl Scalar for Complex64 {
    const MODE: Mode = Mode::Numeric;

    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn from_i64(v: i64) -> Self {
        Complex64::new(v as f64, 0.0)
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        Complex64::new(num as f64 / den as f64, 0.0)
    }
    fn imag_unit() -> Self {
        Complex64::new(0.0, 1.0)
    }
    fn is_zero(&self) -> bool {
        self.norm() <= NUMERIC_ZERO_TOL
    }
    fn conj(&self) -> Self {
        Complex64::conj(self)
    }
    fn inv(&self) -> Option<Self> {
        if Scalar::is_zero(self) {
            None
        } else {
            Some(Complex64::new(1.0, 0.0) / *self)
        }
    }
    fn to_c64(&self) -> Complex64 {
        *self
    }
    fn real_part(&self) -> Self {
        Complex64::new(self.re, 0.0)
    }
    fn imag_part(&self) -> Self {
        Complex64::new(self.im, 0.0)
    }
    fn parse(s: &str) -> Result<Self> {
        parse_numeric(s)
    }
    fn rank(m: &Matrix<Self>) -> RankInfo {
        linalg::numeric_rank(&m.to_dmatrix())
    }
}

/// Relative comparison used for numeric scalars.
pub fn approx_eq(a: Complex64, b: Complex64) -> bool {
    let scale = 1.0f64.max(a.norm()).max(b.norm());
    (a - b).norm() <= NUMERIC_ZERO_TOL * scale
}

fn coeff_err(input: &str, position: usize, message: impl Into<String>) -> Error {
    Error::Coefficient {
        input: input.to_string(),
        position,
        message: message.into(),
    }
}

/// Splits `s` into signed terms, returning `(start_offset, negative, body)`.
/// A sign directly after an exponent marker belongs to the number.
fn split_terms(s: &str) -> Vec<(usize, bool, &str)> {
    let bytes = s.as_bytes();
    let mut out = Vec::new();
    let mut negative = false;
    let mut body_start = 0;
    for (i, &c) in bytes.iter().enumerate() {
        if c != b'+' && c != b'-' {
            continue;
        }
        if i > body_start && matches!(bytes[i - 1], b'e' | b'E') {
            continue;
        }
        if i == 0 {
            negative = c == b'-';
            body_start = 1;
            continue;
        }
        out.push((body_start, negative, &s[body_start..i]));
        negative = c == b'-';
        body_start = i + 1;
    }
    out.push((body_start, negative, &s[body_start..]));
    out
}

fn parse_rational(input: &str, offset: usize, body: &str) -> Result<BigRational> {
    let (num, den) = match body.split_once('/') {
        Some((a, b)) => (a, Some(b)),
        None => (body, None),
    };
    let num: BigInt = num
        .trim()
        .parse()
        .map_err(|_| coeff_err(input, offset, format!("expected an integer, found {num:?}")))?;
    let den: BigInt = match den {
        Some(d) => d.trim().parse().map_err(|_| {
            coeff_err(input, offset, format!("expected an integer denominator, found {d:?}"))
        })?,
        None => BigInt::one(),
    };
    if !den.is_positive() {
        return Err(coeff_err(input, offset, "denominator must be a positive integer"));
    }
    Ok(BigRational::new(num, den))
}

/// Parse `a/b`, `a/b+c/di`, `c/di`, `i`, ... into an exact Gaussian rational.
pub fn parse_exact(s: &str) -> Result<GaussRational> {
    let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if compact.is_empty() {
        return Err(coeff_err(s, 0, "empty coefficient"));
    }
    let mut value = GaussRational::zero();
    for (offset, negative, body) in split_terms(&compact) {
        if body.is_empty() {
            return Err(coeff_err(s, offset, "dangling sign"));
        }
        let (body, imaginary) = match body.strip_suffix('i') {
            Some(b) => (b.strip_suffix('*').unwrap_or(b), true),
            None => (body, false),
        };
        let mut r = if imaginary && body.is_empty() {
            BigRational::one()
        } else {
            parse_rational(s, offset, body)?
        };
        if negative {
            r = -r;
        }
        if imaginary {
            value.im += r;
        } else {
            value.re += r;
        }
    }
    Ok(value)
}

/// Parse a numeric coefficient: decimal literals or rationals, optional
/// imaginary part with suffix `i`.
pub fn parse_numeric(s: &str) -> Result<Complex64> {
    let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if compact.is_empty() {
        return Err(coeff_err(s, 0, "empty coefficient"));
    }
    let mut value = Complex64::new(0.0, 0.0);
    for (offset, negative, body) in split_terms(&compact) {
        if body.is_empty() {
            return Err(coeff_err(s, offset, "dangling sign"));
        }
        let (body, imaginary) = match body.strip_suffix('i') {
            Some(b) => (b.strip_suffix('*').unwrap_or(b), true),
            None => (body, false),
        };
        let mut x = if imaginary && body.is_empty() {
            1.0
        } else if body.contains('/') {
            parse_rational(s, offset, body)?
                .to_f64()
                .ok_or_else(|| coeff_err(s, offset, "rational out of range"))?
        } else {
            body.parse::<f64>()
                .map_err(|_| coeff_err(s, offset, format!("expected a number, found {body:?}")))?
        };
        if negative {
            x = -x;
        }
        if imaginary {
            value.im += x;
        } else {
            value.re += x;
        }
    }
    Ok(value)
}

/// Convert an exact value to a numeric one.
pub fn to_numeric(x: &GaussRational) -> Complex64 {
    x.to_c64()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(a: i64, b: i64, c: i64, d: i64) -> GaussRational {
        GaussRational::from_parts(a, b, c, d)
    }

    #[test]
    fn parses_the_coefficient_grammar() {
        assert_eq!(parse_exact("1/2").unwrap(), q(1, 2, 0, 1));
        assert_eq!(parse_exact("1/2+3/4i").unwrap(), q(1, 2, 3, 4));
        assert_eq!(parse_exact("-1/2-3/4i").unwrap(), q(-1, 2, -3, 4));
        assert_eq!(parse_exact("3/4i").unwrap(), q(0, 1, 3, 4));
        assert_eq!(parse_exact("i").unwrap(), q(0, 1, 1, 1));
        assert_eq!(parse_exact("-i").unwrap(), q(0, 1, -1, 1));
        assert_eq!(parse_exact("2").unwrap(), q(2, 1, 0, 1));
        assert_eq!(parse_exact(" 4/6 ").unwrap(), q(2, 3, 0, 1));
    }

    #[test]
    fn rejects_zero_denominator() {
        let err = parse_exact("1/0").unwrap_err();
        assert!(matches!(err, Error::Coefficient { .. }), "{err}");
        assert!(parse_exact("1/-2").is_err());
        assert!(parse_exact("").is_err());
        assert!(parse_exact("abc").is_err());
        assert!(parse_exact("1+").is_err());
    }

    #[test]
    fn numeric_grammar_accepts_decimals() {
        let z = parse_numeric("0.5-1.25i").unwrap();
        assert_eq!(z, Complex64::new(0.5, -1.25));
        let z = parse_numeric("1e-3+2/4i").unwrap();
        assert_eq!(z, Complex64::new(1e-3, 0.5));
    }

    #[test]
    fn display_round_trips_through_parser() {
        for v in [q(1, 2, 3, 4), q(-5, 3, 0, 1), q(0, 1, -7, 2), q(0, 1, 0, 1), q(3, 1, -1, 1)] {
            assert_eq!(parse_exact(&v.to_string()).unwrap(), v, "{v}");
        }
    }

    #[test]
    fn exact_field_operations() {
        let a = q(1, 2, 1, 3);
        let inv = a.inv().unwrap();
        assert_eq!(a.clone() * inv, GaussRational::one());
        assert_eq!(a.norm_sqr(), q(13, 36, 0, 1));
        assert!(GaussRational::zero().inv().is_none());
    }
}

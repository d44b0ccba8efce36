//! Scalar fields used throughout the crate.
//!
//! Three modes are supported: exact rationals, exact Gaussian rationals
//! (`a + b i` with rational `a`, `b`) and double-precision complex floats.
//! The exact modes never round, so algebraic identities can be checked with
//! zero residual.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ScalarMode {
    #[default]
    Rational,
    Gaussian,
    Float,
}

impl ScalarMode {
    pub fn is_exact(self) -> bool {
        !matches!(self, ScalarMode::Float)
    }

    pub fn name(self) -> &'static str {
        match self {
            ScalarMode::Rational => "rational",
            ScalarMode::Gaussian => "gaussian",
            ScalarMode::Float => "float",
        }
    }
}

impl FromStr for ScalarMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rational" => Ok(ScalarMode::Rational),
            "gaussian" => Ok(ScalarMode::Gaussian),
            "float" => Ok(ScalarMode::Float),
            other => Err(Error::Parse(format!("unknown scalar mode `{other}`"))),
        }
    }
}

impl fmt::Display for ScalarMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A field element. Arithmetic is by reference since the exact modes are
/// heap-allocated big rationals.
pub trait Scalar: Clone + fmt::Debug + PartialEq + Send + Sync + 'static {
    const MODE: ScalarMode;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_i64(v: i64) -> Self;
    fn from_rational(q: &BigRational) -> Self;

    fn plus(&self, other: &Self) -> Self;
    fn minus(&self, other: &Self) -> Self;
    fn times(&self, other: &Self) -> Self;
    fn negated(&self) -> Self;
    /// Multiplicative inverse, `None` for (numerical) zero.
    fn recip(&self) -> Option<Self>;
    fn conj(&self) -> Self;

    /// Exact zero test in exact modes; `== 0` in float mode.
    fn is_zero(&self) -> bool;
    /// Modulus as a double, used for pivot selection and residual norms.
    fn magnitude(&self) -> f64;
    fn to_c64(&self) -> Complex64;

    fn to_json(&self) -> Value;
    fn from_json(v: &Value) -> Result<Self>;

    /// Exact real and imaginary parts; `None` in float mode.
    fn exact_parts(&self) -> Option<(BigRational, BigRational)>;
    /// Builds a scalar from exact parts. Rational mode drops the imaginary
    /// part, so callers check [`Scalar::MODE`] first when that matters.
    fn from_parts(re: &BigRational, im: &BigRational) -> Self;
    /// Nearest representable value of a complex double.
    fn from_c64(z: Complex64) -> Self;

    /// Mode conversion: exact data converts exactly, floats are rounded to
    /// the nearest rational.
    fn convert<T: Scalar>(&self) -> T {
        match self.exact_parts() {
            Some((re, im)) => T::from_parts(&re, &im),
            None => T::from_c64(self.to_c64()),
        }
    }

    fn is_exact() -> bool {
        Self::MODE.is_exact()
    }

    fn scaled_by_i64(&self, k: i64) -> Self {
        self.times(&Self::from_i64(k))
    }
}

fn bigint_to_json(n: &BigInt) -> Value {
    match n.to_i64() {
        Some(v) => Value::from(v),
        None => Value::String(n.to_string()),
    }
}

fn bigint_from_json(v: &Value) -> Result<BigInt> {
    match v {
        Value::Number(n) => n.as_i64().map(BigInt::from).ok_or_else(|| Error::Parse(format!("expected an integer, got {n}"))),
        Value::String(s) => s.parse::<BigInt>().map_err(|e| Error::Parse(format!("bad integer `{s}`: {e}"))),
        other => Err(Error::Parse(format!("expected an integer, got {other}"))),
    }
}

pub(crate) fn rational_to_json(q: &BigRational) -> Value {
    Value::Array(vec![bigint_to_json(q.numer()), bigint_to_json(q.denom())])
}

pub(crate) fn rational_from_json(v: &Value) -> Result<BigRational> {
    match v {
        Value::Array(parts) if parts.len() == 2 => {
            let num = bigint_from_json(&parts[0])?;
            let den = bigint_from_json(&parts[1])?;
            if den.is_zero() {
                return Err(Error::Parse("zero denominator".into()));
            }
            Ok(BigRational::new(num, den))
        }
        Value::Number(_) | Value::String(_) => Ok(BigRational::from_integer(bigint_from_json(v)?)),
        other => Err(Error::Parse(format!("expected [num, den], got {other}"))),
    }
}

fn rational_to_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

impl Scalar for BigRational {
    const MODE: ScalarMode = ScalarMode::Rational;

    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }
    fn from_rational(q: &BigRational) -> Self {
        q.clone()
    }
    fn plus(&self, other: &Self) -> Self {
        self + other
    }
    fn minus(&self, other: &Self) -> Self {
        self - other
    }
    fn times(&self, other: &Self) -> Self {
        self * other
    }
    fn negated(&self) -> Self {
        -self
    }
    fn recip(&self) -> Option<Self> {
        if Zero::is_zero(self) {
            None
        } else {
            Some(BigRational::recip(self))
        }
    }
    fn conj(&self) -> Self {
        self.clone()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn magnitude(&self) -> f64 {
        rational_to_f64(&self.abs())
    }
    fn to_c64(&self) -> Complex64 {
        Complex64::new(rational_to_f64(self), 0.0)
    }
    fn to_json(&self) -> Value {
        rational_to_json(self)
    }
    fn from_json(v: &Value) -> Result<Self> {
        rational_from_json(v)
    }
    fn exact_parts(&self) -> Option<(BigRational, BigRational)> {
        Some((self.clone(), Zero::zero()))
    }
    fn from_parts(re: &BigRational, _im: &BigRational) -> Self {
        re.clone()
    }
    fn from_c64(z: Complex64) -> Self {
        BigRational::from_float(z.re).unwrap_or_else(Zero::zero)
    }
}

/// `re + im·i` with exact rational parts.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GaussianRational {
    pub re: BigRational,
    pub im: BigRational,
}

impl GaussianRational {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        Self { re, im }
    }

    pub fn i() -> Self {
        Self::new(Zero::zero(), One::one())
    }

    pub fn norm_sqr(&self) -> BigRational {
        &self.re * &self.re + &self.im * &self.im
    }
}

impl Scalar for GaussianRational {
    const MODE: ScalarMode = ScalarMode::Gaussian;

    fn zero() -> Self {
        Self::new(Zero::zero(), Zero::zero())
    }
    fn one() -> Self {
        Self::new(One::one(), Zero::zero())
    }
    fn from_i64(v: i64) -> Self {
        Self::new(BigRational::from_i64(v), Zero::zero())
    }
    fn from_rational(q: &BigRational) -> Self {
        Self::new(q.clone(), Zero::zero())
    }
    fn plus(&self, other: &Self) -> Self {
        Self::new(&self.re + &other.re, &self.im + &other.im)
    }
    fn minus(&self, other: &Self) -> Self {
        Self::new(&self.re - &other.re, &self.im - &other.im)
    }
    fn times(&self, other: &Self) -> Self {
        Self::new(&self.re * &other.re - &self.im * &other.im, &self.re * &other.im + &self.im * &other.re)
    }
    fn negated(&self) -> Self {
        Self::new(-&self.re, -&self.im)
    }
    fn recip(&self) -> Option<Self> {
        let n = self.norm_sqr();
        if Zero::is_zero(&n) {
            return None;
        }
        Some(Self::new(&self.re / &n, -&self.im / &n))
    }
    fn conj(&self) -> Self {
        Self::new(self.re.clone(), -&self.im)
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(&self.re) && Zero::is_zero(&self.im)
    }
    fn magnitude(&self) -> f64 {
        self.to_c64().norm()
    }
    fn to_c64(&self) -> Complex64 {
        Complex64::new(rational_to_f64(&self.re), rational_to_f64(&self.im))
    }
    fn to_json(&self) -> Value {
        Value::Array(vec![rational_to_json(&self.re), rational_to_json(&self.im)])
    }
    fn from_json(v: &Value) -> Result<Self> {
        // A bare rational is accepted as a real Gaussian rational.
        if let Value::Array(parts) = v {
            if parts.len() == 2 && parts.iter().all(|p| p.is_array()) {
                return Ok(Self::new(rational_from_json(&parts[0])?, rational_from_json(&parts[1])?));
            }
        }
        Ok(Self::from_rational(&rational_from_json(v)?))
    }
    fn exact_parts(&self) -> Option<(BigRational, BigRational)> {
        Some((self.re.clone(), self.im.clone()))
    }
    fn from_parts(re: &BigRational, im: &BigRational) -> Self {
        Self::new(re.clone(), im.clone())
    }
    fn from_c64(z: Complex64) -> Self {
        Self::new(BigRational::from_float(z.re).unwrap_or_else(Zero::zero), BigRational::from_float(z.im).unwrap_or_else(Zero::zero))
    }
}

impl Scalar for Complex64 {
    const MODE: ScalarMode = ScalarMode::Float;

    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn from_i64(v: i64) -> Self {
        Complex64::new(v as f64, 0.0)
    }
    fn from_rational(q: &BigRational) -> Self {
        Complex64::new(rational_to_f64(q), 0.0)
    }
    fn plus(&self, other: &Self) -> Self {
        self + other
    }
    fn minus(&self, other: &Self) -> Self {
        self - other
    }
    fn times(&self, other: &Self) -> Self {
        self * other
    }
    fn negated(&self) -> Self {
        -self
    }
    fn recip(&self) -> Option<Self> {
        if self.norm() == 0.0 {
            None
        } else {
            Some(self.inv())
        }
    }
    fn conj(&self) -> Self {
        Complex64::conj(self)
    }
    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
    fn to_c64(&self) -> Complex64 {
        *self
    }
    fn to_json(&self) -> Value {
        Value::Array(vec![Value::from(self.re), Value::from(self.im)])
    }
    fn from_json(v: &Value) -> Result<Self> {
        match v {
            Value::Number(n) => Ok(Complex64::new(n.as_f64().unwrap_or(f64::NAN), 0.0)),
            Value::Array(parts) if parts.len() == 2 => {
                // [re, im] with plain numbers, or a pair of [num, den] rationals.
                if parts.iter().all(|p| p.is_number()) {
                    Ok(Complex64::new(parts[0].as_f64().unwrap_or(f64::NAN), parts[1].as_f64().unwrap_or(f64::NAN)))
                } else {
                    let g = GaussianRational::from_json(v)?;
                    Ok(g.to_c64())
                }
            }
            other => Err(Error::Parse(format!("expected [re, im], got {other}"))),
        }
    }
    fn exact_parts(&self) -> Option<(BigRational, BigRational)> {
        None
    }
    fn from_parts(re: &BigRational, im: &BigRational) -> Self {
        Complex64::new(rational_to_f64(re), rational_to_f64(im))
    }
    fn from_c64(z: Complex64) -> Self {
        z
    }
}

/// Convenience constructor for rationals in tests and builders.
pub fn ratio(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_json_round_trip() {
        let q = ratio(-3, 7);
        assert_eq!(BigRational::from_json(&q.to_json()).unwrap(), q);
        assert_eq!(BigRational::from_json(&Value::from(5)).unwrap(), ratio(5, 1));
    }

    #[test]
    fn gaussian_inverse_is_exact() {
        let z = GaussianRational::new(ratio(1, 2), ratio(-3, 1));
        let w = z.recip().unwrap();
        assert_eq!(z.times(&w), GaussianRational::one());
        assert!(GaussianRational::zero().recip().is_none());
    }

    #[test]
    fn gaussian_i_squares_to_minus_one() {
        let i = GaussianRational::i();
        assert_eq!(i.times(&i), GaussianRational::from_i64(-1));
    }

    #[test]
    fn float_parses_rational_pairs() {
        let v: Value = serde_json::from_str("[[1,2],[0,1]]").unwrap();
        assert_eq!(Complex64::from_json(&v).unwrap(), Complex64::new(0.5, 0.0));
        let v: Value = serde_json::from_str("[0.25, -1.0]").unwrap();
        assert_eq!(Complex64::from_json(&v).unwrap(), Complex64::new(0.25, -1.0));
    }

    #[test]
    fn mode_conversion_is_exact_for_exact_data() {
        let q = ratio(1, 3);
        let g: GaussianRational = q.convert();
        assert_eq!(g, GaussianRational::new(ratio(1, 3), ratio(0, 1)));
        let z: Complex64 = g.convert();
        assert!((z.re - 1.0 / 3.0).abs() < 1e-16);
        let back: BigRational = Complex64::new(0.5, 0.0).convert();
        assert_eq!(back, ratio(1, 2));
    }

    #[test]
    fn zero_denominator_rejected() {
        let v: Value = serde_json::from_str("[1,0]").unwrap();
        assert!(BigRational::from_json(&v).is_err());
    }
}

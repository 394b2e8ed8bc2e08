//! Exact dyadic rationals and the two exact angle encodings.
//!
//! A [`Dyadic`] is `numerator / 2^scale` kept in canonical form (odd numerator
//! or zero scale). Angles come in two flavours that almost never meet:
//!
//! * [`AnglePi`]: a dyadic multiple of π, reduced into `[0, 2π)`.
//! * [`AngleCos`]: an angle whose cosine is dyadic, disambiguated by the sign
//!   of its sine.
//!
//! The only angles representable both ways are `0, π/2, π, 3π/2`. The
//! functions [`cos_exact`] and [`angle_to_pi`] decide membership exactly.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DyadicError {
    #[error("cannot parse `{input}` at byte {position}: {reason}")]
    Parse {
        input: String,
        position: usize,
        reason: &'static str,
    },
    #[error("cosine {0} lies outside [-1, 1]")]
    CosineOutOfRange(Dyadic),
    #[error("sine sign {sign} is inconsistent with cosine {cos}")]
    InconsistentSinSign { cos: Dyadic, sign: SinSign },
    #[error("invalid Pythagorean parametrization (u={u}, v={v}): {reason}")]
    InvalidParametrization {
        u: BigInt,
        v: BigInt,
        reason: &'static str,
    },
    #[error("angle is not a dyadic multiple of pi")]
    Incommensurable,
}

/// Exact rational with a power-of-two denominator.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Dyadic {
    numerator: BigInt,
    scale: u32,
}

impl Dyadic {
    /// Builds `numerator / 2^scale` and brings it to canonical form.
    pub fn new(numerator: impl Into<BigInt>, scale: u32) -> Dyadic {
        let mut numerator = numerator.into();
        let mut scale = scale;
        if numerator.is_zero() {
            return Dyadic::zero();
        }
        let tz = numerator.trailing_zeros().unwrap_or(0);
        let shift = tz.min(u64::from(scale)) as u32;
        if shift > 0 {
            numerator >>= shift;
            scale -= shift;
        }
        Dyadic { numerator, scale }
    }

    pub fn zero() -> Dyadic {
        Dyadic {
            numerator: BigInt::zero(),
            scale: 0,
        }
    }

    pub fn one() -> Dyadic {
        Dyadic::from_int(1)
    }

    pub fn from_int(value: impl Into<BigInt>) -> Dyadic {
        Dyadic {
            numerator: value.into(),
            scale: 0,
        }
    }

    pub fn numerator(&self) -> &BigInt {
        &self.numerator
    }

    /// The exponent `k` of the canonical denominator `2^k`.
    pub fn scale(&self) -> u32 {
        self.scale
    }

    pub fn is_zero(&self) -> bool {
        self.numerator.is_zero()
    }

    pub fn is_integer(&self) -> bool {
        self.scale == 0
    }

    pub fn is_negative(&self) -> bool {
        self.numerator.is_negative()
    }

    pub fn signum(&self) -> i32 {
        match self.numerator.sign() {
            Sign::Minus => -1,
            Sign::NoSign => 0,
            Sign::Plus => 1,
        }
    }

    pub fn abs(&self) -> Dyadic {
        Dyadic {
            numerator: self.numerator.abs(),
            scale: self.scale,
        }
    }

    /// Multiplies by `2^exp` (negative `exp` divides).
    pub fn mul_pow2(&self, exp: i64) -> Dyadic {
        if exp >= 0 {
            let exp = exp as u64;
            let drop = exp.min(u64::from(self.scale));
            let left = exp - drop;
            Dyadic::new(&self.numerator << left, self.scale - drop as u32)
        } else {
            let add = u32::try_from(-exp).expect("scale overflow");
            Dyadic::new(self.numerator.clone(), self.scale + add)
        }
    }

    /// Returns `self * 2^k` as an integer when that product is integral.
    pub fn scaled_integer(&self, k: u32) -> Option<BigInt> {
        if self.scale <= k {
            Some(&self.numerator << (k - self.scale))
        } else {
            None
        }
    }

    /// Rounds `self * 2^k` to the nearest integer, ties to even.
    pub fn round_scaled(&self, k: u32) -> BigInt {
        if let Some(v) = self.scaled_integer(k) {
            return v;
        }
        let drop = self.scale - k;
        let denom = BigInt::one() << drop;
        let (q, r) = self.numerator.div_mod_floor(&denom);
        let twice = &r << 1u32;
        match twice.cmp(&denom) {
            Ordering::Less => q,
            Ordering::Greater => q + 1,
            Ordering::Equal => {
                if q.is_even() {
                    q
                } else {
                    q + 1
                }
            }
        }
    }

    pub fn to_rational(&self) -> BigRational {
        BigRational::new(self.numerator.clone(), BigInt::one() << self.scale)
    }

    /// Returns the dyadic value of `r` if its reduced denominator is a power of two.
    pub fn from_rational(r: &BigRational) -> Option<Dyadic> {
        let denom = r.denom().abs();
        if denom.is_zero() {
            return None;
        }
        let k = denom.trailing_zeros().unwrap_or(0);
        if denom != (BigInt::one() << k) {
            return None;
        }
        let sign = if r.denom().is_negative() { -1 } else { 1 };
        Some(Dyadic::new(r.numer() * sign, k as u32))
    }

    pub fn to_f64(&self) -> f64 {
        // Shift into an i64-friendly window first so huge numerators stay finite.
        let bits = self.numerator.bits();
        if bits <= 60 {
            let n = self.numerator.to_f64().unwrap_or(f64::NAN);
            n / 2f64.powi(self.scale as i32)
        } else {
            let drop = bits - 60;
            let n = (&self.numerator >> drop).to_f64().unwrap_or(f64::NAN);
            n * 2f64.powi(drop as i32 - self.scale as i32)
        }
    }

    /// Exact square root when it is itself dyadic.
    pub fn sqrt_exact(&self) -> Option<Dyadic> {
        if self.is_negative() {
            return None;
        }
        let (num, scale) = if self.scale % 2 == 1 {
            (&self.numerator << 1u32, self.scale + 1)
        } else {
            (self.numerator.clone(), self.scale)
        };
        let root = num.sqrt();
        if &root * &root == num {
            Some(Dyadic::new(root, scale / 2))
        } else {
            None
        }
    }

    /// Renders as `m/2^k`, or `m` when the scale is zero.
    pub fn to_pow2_string(&self) -> String {
        if self.scale == 0 {
            self.numerator.to_string()
        } else {
            format!("{}/2^{}", self.numerator, self.scale)
        }
    }

    fn align(&self, other: &Dyadic) -> (BigInt, BigInt, u32) {
        let k = self.scale.max(other.scale);
        (
            &self.numerator << (k - self.scale),
            &other.numerator << (k - other.scale),
            k,
        )
    }
}

impl Default for Dyadic {
    fn default() -> Self {
        Dyadic::zero()
    }
}

impl From<i64> for Dyadic {
    fn from(v: i64) -> Self {
        Dyadic::from_int(v)
    }
}

impl From<i32> for Dyadic {
    fn from(v: i32) -> Self {
        Dyadic::from_int(v)
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let (a, b, _) = self.align(other);
        a.cmp(&b)
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Add<&Dyadic> for &Dyadic {
    type Output = Dyadic;
    fn add(self, rhs: &Dyadic) -> Dyadic {
        let (a, b, k) = self.align(rhs);
        Dyadic::new(a + b, k)
    }
}

impl Sub<&Dyadic> for &Dyadic {
    type Output = Dyadic;
    fn sub(self, rhs: &Dyadic) -> Dyadic {
        let (a, b, k) = self.align(rhs);
        Dyadic::new(a - b, k)
    }
}

impl Mul<&Dyadic> for &Dyadic {
    type Output = Dyadic;
    fn mul(self, rhs: &Dyadic) -> Dyadic {
        Dyadic::new(&self.numerator * &rhs.numerator, self.scale + rhs.scale)
    }
}

impl Neg for &Dyadic {
    type Output = Dyadic;
    fn neg(self) -> Dyadic {
        Dyadic {
            numerator: -&self.numerator,
            scale: self.scale,
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $method:ident) => {
        impl $tr<Dyadic> for Dyadic {
            type Output = Dyadic;
            fn $method(self, rhs: Dyadic) -> Dyadic {
                (&self).$method(&rhs)
            }
        }
        impl $tr<&Dyadic> for Dyadic {
            type Output = Dyadic;
            fn $method(self, rhs: &Dyadic) -> Dyadic {
                (&self).$method(rhs)
            }
        }
        impl $tr<Dyadic> for &Dyadic {
            type Output = Dyadic;
            fn $method(self, rhs: Dyadic) -> Dyadic {
                self.$method(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for Dyadic {
    type Output = Dyadic;
    fn neg(self) -> Dyadic {
        -&self
    }
}

/// `3/4` style: numerator over the decimal power of two.
impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.scale == 0 {
            write!(f, "{}", self.numerator)
        } else {
            write!(f, "{}/{}", self.numerator, BigInt::one() << self.scale)
        }
    }
}

impl fmt::Debug for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Dyadic({})", self.to_pow2_string())
    }
}

fn parse_err(input: &str, position: usize, reason: &'static str) -> DyadicError {
    DyadicError::Parse {
        input: input.to_string(),
        position,
        reason,
    }
}

fn parse_bigint(input: &str, s: &str, position: usize) -> Result<BigInt, DyadicError> {
    let t = s.trim();
    let body = t.strip_prefix(['+', '-']).unwrap_or(t);
    if body.is_empty() || !body.bytes().all(|b| b.is_ascii_digit()) {
        return Err(parse_err(input, position, "expected an integer"));
    }
    t.parse::<BigInt>()
        .map_err(|_| parse_err(input, position, "expected an integer"))
}

/// Accepts `m`, `m/d` with `d` a power of two, and `m/2^k`.
impl FromStr for Dyadic {
    type Err = DyadicError;

    fn from_str(input: &str) -> Result<Self, Self::Err> {
        let s = input.trim();
        if s.is_empty() {
            return Err(parse_err(input, 0, "empty value"));
        }
        let Some(slash) = s.find('/') else {
            return Ok(Dyadic::from_int(parse_bigint(input, s, 0)?));
        };
        let num = parse_bigint(input, &s[..slash], 0)?;
        let den = s[slash + 1..].trim();
        let den_pos = slash + 1;
        if let Some(exp) = den.strip_prefix("2^") {
            let k: u32 = exp
                .trim()
                .parse()
                .map_err(|_| parse_err(input, den_pos + 2, "expected exponent after 2^"))?;
            return Ok(Dyadic::new(num, k));
        }
        let d = parse_bigint(input, den, den_pos)?;
        if !d.is_positive() {
            return Err(parse_err(input, den_pos, "denominator must be positive"));
        }
        let k = d.trailing_zeros().unwrap_or(0);
        if d != (BigInt::one() << k) {
            return Err(parse_err(input, den_pos, "denominator is not a power of two"));
        }
        Ok(Dyadic::new(num, k as u32))
    }
}

impl Serialize for Dyadic {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Dyadic {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// An angle `(m / 2^k) π`, reduced into `[0, 2π)`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct AnglePi {
    half_turns: Dyadic,
}

impl AnglePi {
    pub fn new(half_turns: Dyadic) -> AnglePi {
        // Reduce modulo 2: numerator mod 2^(k+1).
        let k = half_turns.scale();
        let modulus = BigInt::one() << (k + 1);
        let m = half_turns.numerator().mod_floor(&modulus);
        AnglePi {
            half_turns: Dyadic::new(m, k),
        }
    }

    pub fn from_parts(m: impl Into<BigInt>, k: u32) -> AnglePi {
        AnglePi::new(Dyadic::new(m, k))
    }

    pub fn zero() -> AnglePi {
        AnglePi::from_parts(0, 0)
    }

    pub fn half_pi() -> AnglePi {
        AnglePi::from_parts(1, 1)
    }

    pub fn pi() -> AnglePi {
        AnglePi::from_parts(1, 0)
    }

    pub fn three_half_pi() -> AnglePi {
        AnglePi::from_parts(3, 1)
    }

    /// The multiple of π, in `[0, 2)`.
    pub fn half_turns(&self) -> &Dyadic {
        &self.half_turns
    }

    pub fn numerator(&self) -> &BigInt {
        self.half_turns.numerator()
    }

    pub fn scale(&self) -> u32 {
        self.half_turns.scale()
    }

    /// Grid index `m` with `self = m π / 2^level`, when the angle lies on that grid.
    pub fn grid_index(&self, level: u32) -> Option<u64> {
        self.half_turns.scaled_integer(level)?.to_u64()
    }

    /// Whether this is one of `0, π/2, π, 3π/2`.
    pub fn is_quadrantal(&self) -> bool {
        self.scale() <= 1
    }

    pub fn to_angle_cos(&self) -> Option<AngleCos> {
        if !self.is_quadrantal() {
            return None;
        }
        let q = self.half_turns.scaled_integer(1)?.to_u8()?;
        Some(match q {
            0 => AngleCos::from_parts_unchecked(Dyadic::one(), SinSign::Zero),
            1 => AngleCos::from_parts_unchecked(Dyadic::zero(), SinSign::Positive),
            2 => AngleCos::from_parts_unchecked(-Dyadic::one(), SinSign::Zero),
            _ => AngleCos::from_parts_unchecked(Dyadic::zero(), SinSign::Negative),
        })
    }

    pub fn to_radians(&self) -> f64 {
        self.half_turns.to_f64() * std::f64::consts::PI
    }
}

impl Add<&AnglePi> for &AnglePi {
    type Output = AnglePi;
    fn add(self, rhs: &AnglePi) -> AnglePi {
        AnglePi::new(&self.half_turns + &rhs.half_turns)
    }
}

impl Sub<&AnglePi> for &AnglePi {
    type Output = AnglePi;
    fn sub(self, rhs: &AnglePi) -> AnglePi {
        AnglePi::new(&self.half_turns - &rhs.half_turns)
    }
}

impl Neg for &AnglePi {
    type Output = AnglePi;
    fn neg(self) -> AnglePi {
        AnglePi::new(-&self.half_turns)
    }
}

impl fmt::Display for AnglePi {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} pi", self.half_turns.to_pow2_string())
    }
}

impl fmt::Debug for AnglePi {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "AnglePi({self})")
    }
}

/// Accepts `m/2^k pi`, `m/d pi`, `m pi`, `pi`, or a bare `0`.
impl FromStr for AnglePi {
    type Err = DyadicError;

    fn from_str(input: &str) -> Result<Self, Self::Err> {
        let s = input.trim();
        let body = match s.strip_suffix("pi") {
            Some(b) => b.trim(),
            None => {
                let d: Dyadic = s.parse()?;
                if d.is_zero() {
                    return Ok(AnglePi::zero());
                }
                return Err(parse_err(input, s.len(), "expected trailing `pi`"));
            }
        };
        let body = body.strip_suffix('*').map(str::trim).unwrap_or(body);
        if body.is_empty() {
            return Ok(AnglePi::pi());
        }
        if body == "-" {
            return Ok(AnglePi::new(-Dyadic::one()));
        }
        Ok(AnglePi::new(body.parse()?))
    }
}

impl Serialize for AnglePi {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for AnglePi {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SinSign {
    Negative,
    Zero,
    Positive,
}

impl SinSign {
    pub fn as_i32(self) -> i32 {
        match self {
            SinSign::Negative => -1,
            SinSign::Zero => 0,
            SinSign::Positive => 1,
        }
    }

    pub fn flipped(self) -> SinSign {
        match self {
            SinSign::Negative => SinSign::Positive,
            SinSign::Zero => SinSign::Zero,
            SinSign::Positive => SinSign::Negative,
        }
    }

    fn symbol(self) -> &'static str {
        match self {
            SinSign::Negative => "-",
            SinSign::Zero => "0",
            SinSign::Positive => "+",
        }
    }
}

impl fmt::Display for SinSign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

impl FromStr for SinSign {
    type Err = DyadicError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "+" | "+1" | "1" | "pos" | "positive" => Ok(SinSign::Positive),
            "-" | "-1" | "neg" | "negative" => Ok(SinSign::Negative),
            "0" | "zero" => Ok(SinSign::Zero),
            _ => Err(parse_err(s, 0, "expected one of + - 0")),
        }
    }
}

/// An angle with dyadic cosine; the sine sign picks the half-plane.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct AngleCos {
    cos: Dyadic,
    sin_sign: SinSign,
}

impl AngleCos {
    pub fn new(cos: Dyadic, sin_sign: SinSign) -> Result<AngleCos, DyadicError> {
        let one = Dyadic::one();
        if cos > one || cos < -&one {
            return Err(DyadicError::CosineOutOfRange(cos));
        }
        let at_pole = cos.abs() == one;
        if at_pole != (sin_sign == SinSign::Zero) {
            return Err(DyadicError::InconsistentSinSign {
                cos,
                sign: sin_sign,
            });
        }
        Ok(AngleCos { cos, sin_sign })
    }

    /// The angle in `[0, π]` with the given cosine.
    pub fn upper(cos: Dyadic) -> Result<AngleCos, DyadicError> {
        let sign = if cos.abs() == Dyadic::one() {
            SinSign::Zero
        } else {
            SinSign::Positive
        };
        AngleCos::new(cos, sign)
    }

    fn from_parts_unchecked(cos: Dyadic, sin_sign: SinSign) -> AngleCos {
        AngleCos { cos, sin_sign }
    }

    pub fn cos(&self) -> &Dyadic {
        &self.cos
    }

    pub fn sin_sign(&self) -> SinSign {
        self.sin_sign
    }

    /// `sin θ` when it is also dyadic (only at the four quadrantal angles).
    pub fn sin_dyadic(&self) -> Option<Dyadic> {
        let one_minus = Dyadic::one() - &self.cos * &self.cos;
        let s = one_minus.sqrt_exact()?;
        Some(if self.sin_sign == SinSign::Negative {
            -s
        } else {
            s
        })
    }

    /// θ + π.
    pub fn opposite(&self) -> AngleCos {
        AngleCos::from_parts_unchecked(-&self.cos, self.sin_sign.flipped())
    }

    /// −θ.
    pub fn reflected(&self) -> AngleCos {
        AngleCos::from_parts_unchecked(self.cos.clone(), self.sin_sign.flipped())
    }

    /// 3θ, via `cos 3θ = 4c³ − 3c` and `sin 3θ = sin θ (4c² − 1)`.
    pub fn tripled(&self) -> AngleCos {
        let c = &self.cos;
        let c2 = c * c;
        let cos3 = &(&Dyadic::from_int(4) * &(&c2 * c)) - &(&Dyadic::from_int(3) * c);
        let sign = if cos3.abs() == Dyadic::one() {
            SinSign::Zero
        } else {
            let factor = (&Dyadic::from_int(4) * &c2 - Dyadic::one()).signum();
            match self.sin_sign.as_i32() * factor {
                1 => SinSign::Positive,
                -1 => SinSign::Negative,
                _ => SinSign::Zero,
            }
        };
        AngleCos::from_parts_unchecked(cos3, sign)
    }

    pub fn to_radians(&self) -> f64 {
        let base = self.cos.to_f64().clamp(-1.0, 1.0).acos();
        if self.sin_sign == SinSign::Negative {
            2.0 * std::f64::consts::PI - base
        } else {
            base
        }
    }
}

impl fmt::Display for AngleCos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "cos={},sin={}", self.cos.to_pow2_string(), self.sin_sign)
    }
}

impl fmt::Debug for AngleCos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "AngleCos({self})")
    }
}

/// Accepts `cos=m/2^k,sin=+|-|0`, or a bare cosine (upper half-plane).
impl FromStr for AngleCos {
    type Err = DyadicError;
    fn from_str(input: &str) -> Result<Self, Self::Err> {
        let s = input.trim();
        let Some(rest) = s.strip_prefix("cos=") else {
            return AngleCos::upper(s.parse()?);
        };
        let Some((c, sgn)) = rest.split_once(",sin=") else {
            return AngleCos::upper(rest.parse()?);
        };
        AngleCos::new(c.parse()?, sgn.parse()?)
    }
}

impl Serialize for AngleCos {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for AngleCos {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Result of asking for the exact cosine of a dyadic multiple of π.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum ExactCos {
    Dyadic(Dyadic),
    NotDyadic,
}

/// Exact cosine of `a`, which is dyadic only at `0, π/2, π, 3π/2`.
///
/// For `0 < θ/π < 1/2` the cosine of a dyadic multiple of π is never dyadic
/// (iterating `2cos 2θ = (2cos θ)² − 2` grows the denominator without bound
/// while `θ/π = m/n` only admits `n` values). Cosine symmetry carries the
/// result to the other quadrants.
pub fn cos_exact(a: &AnglePi) -> ExactCos {
    if !a.is_quadrantal() {
        return ExactCos::NotDyadic;
    }
    match a.to_angle_cos() {
        Some(c) => ExactCos::Dyadic(c.cos),
        None => ExactCos::NotDyadic,
    }
}

/// The [`AnglePi`] naming the same angle as `a`, if one exists.
pub fn angle_to_pi(a: &AngleCos) -> Result<AnglePi, DyadicError> {
    let one = Dyadic::one();
    if a.cos == one {
        Ok(AnglePi::zero())
    } else if a.cos == -&one {
        Ok(AnglePi::pi())
    } else if a.cos.is_zero() {
        match a.sin_sign {
            SinSign::Positive => Ok(AnglePi::half_pi()),
            _ => Ok(AnglePi::three_half_pi()),
        }
    } else {
        Err(DyadicError::Incommensurable)
    }
}

/// `(2uv/(u²+v²), (u²−v²)/(u²+v²))` for coprime `u > v > 0` of opposite parity.
pub fn pyth_pair(
    u: impl Into<BigInt>,
    v: impl Into<BigInt>,
) -> Result<(BigRational, BigRational), DyadicError> {
    let u = u.into();
    let v = v.into();
    let bad = |reason| DyadicError::InvalidParametrization {
        u: u.clone(),
        v: v.clone(),
        reason,
    };
    if !(v.is_positive() && u > v) {
        return Err(bad("need u > v > 0"));
    }
    if !u.gcd(&v).is_one() {
        return Err(bad("u and v must be coprime"));
    }
    if u.is_even() == v.is_even() {
        return Err(bad("u and v must have opposite parity"));
    }
    let z = &u * &u + &v * &v;
    let x = BigInt::from(2) * &u * &v;
    let y = &u * &u - &v * &v;
    Ok((BigRational::new(x, z.clone()), BigRational::new(y, z)))
}

/// Classification of `cos(pπ/q)` for a rational multiple of π.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CosClass {
    Dyadic(Dyadic),
    /// Rational but not dyadic (only `±1/2`).
    Rational(BigRational),
    Irrational,
}

/// Cosine of `(p/q) π`: rational only when it lies in `{0, ±1/2, ±1}`.
pub fn cos_of_rational_multiple(p: i64, q: u64) -> CosClass {
    assert!(q > 0, "denominator must be positive");
    // Reduce p/q into [0, 2) and compare against the six rational points.
    let r = BigRational::new(BigInt::from(p), BigInt::from(q));
    let two = BigRational::from_integer(BigInt::from(2));
    let r = &r - &two * (&r / &two).floor();
    let frac = |a: i64, b: i64| BigRational::new(BigInt::from(a), BigInt::from(b));
    let dy = |n: i64, k: u32| CosClass::Dyadic(Dyadic::new(n, k));
    if r.is_zero() {
        dy(1, 0)
    } else if r == frac(1, 1) {
        dy(-1, 0)
    } else if r == frac(1, 2) || r == frac(3, 2) {
        dy(0, 0)
    } else if r == frac(1, 3) || r == frac(5, 3) {
        CosClass::Rational(frac(1, 2))
    } else if r == frac(2, 3) || r == frac(4, 3) {
        CosClass::Rational(frac(-1, 2))
    } else {
        CosClass::Irrational
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(s: &str) -> Dyadic {
        s.parse().unwrap()
    }

    #[test]
    fn arithmetic_examples() {
        assert_eq!(d("1/2") + d("1/4"), d("3/4"));
        assert_eq!(d("3/4") * d("3/4"), d("9/16"));
        let x = d("-5/2^7");
        let z = &x + &(-&x);
        assert!(z.is_zero());
        assert_eq!(z.scale(), 0);
    }

    #[test]
    fn canonical_form() {
        let x = Dyadic::new(12, 4);
        assert_eq!(x.numerator(), &BigInt::from(3));
        assert_eq!(x.scale(), 2);
        assert_eq!(Dyadic::new(8, 2), Dyadic::from_int(2));
        assert_eq!(Dyadic::new(0, 9).scale(), 0);
    }

    #[test]
    fn parse_and_render_forms() {
        assert_eq!(d("3/4"), d("3/2^2"));
        assert_eq!(d(" -7 / 2^3 "), Dyadic::new(-7, 3));
        assert_eq!(d("6/8"), d("3/4"));
        assert_eq!(d("3/4").to_string(), "3/4");
        assert_eq!(d("3/4").to_pow2_string(), "3/2^2");
        assert!("3/5".parse::<Dyadic>().is_err());
        assert!("x/4".parse::<Dyadic>().is_err());
        assert!("1/0".parse::<Dyadic>().is_err());
        let err = "3/6".parse::<Dyadic>().unwrap_err();
        assert!(matches!(err, DyadicError::Parse { position: 2, .. }));
    }

    #[test]
    fn rounding_ties_to_even() {
        assert_eq!(d("5/2").round_scaled(0), BigInt::from(2));
        assert_eq!(d("7/2").round_scaled(0), BigInt::from(4));
        assert_eq!(d("-5/2").round_scaled(0), BigInt::from(-2));
        assert_eq!(d("5/8").round_scaled(1), BigInt::from(1));
        assert_eq!(d("3/4").round_scaled(4), BigInt::from(12));
    }

    #[test]
    fn rational_membership() {
        let r = BigRational::new(BigInt::from(6), BigInt::from(8));
        assert_eq!(Dyadic::from_rational(&r), Some(d("3/4")));
        let r = BigRational::new(BigInt::from(1), BigInt::from(3));
        assert_eq!(Dyadic::from_rational(&r), None);
    }

    #[test]
    fn sqrt_exact() {
        assert_eq!(d("9/16").sqrt_exact(), Some(d("3/4")));
        assert_eq!(d("1/2").sqrt_exact(), None);
        assert_eq!(d("7/16").sqrt_exact(), None);
    }

    #[test]
    fn angle_pi_reduction() {
        let a = AnglePi::from_parts(9, 2); // 9π/4 ≡ π/4
        assert_eq!(a, AnglePi::from_parts(1, 2));
        let b = AnglePi::from_parts(-1, 1); // −π/2 ≡ 3π/2
        assert_eq!(b, AnglePi::three_half_pi());
        assert_eq!(&AnglePi::pi() + &AnglePi::pi(), AnglePi::zero());
        assert_eq!("3/2^2 pi".parse::<AnglePi>().unwrap(), AnglePi::from_parts(3, 2));
        assert_eq!("pi".parse::<AnglePi>().unwrap(), AnglePi::pi());
        assert_eq!("1/2pi".parse::<AnglePi>().unwrap(), AnglePi::half_pi());
        assert_eq!("0".parse::<AnglePi>().unwrap(), AnglePi::zero());
        assert_eq!(AnglePi::from_parts(3, 2).to_string(), "3/2^2 pi");
    }

    #[test]
    fn cos_exact_examples() {
        assert_eq!(cos_exact(&AnglePi::zero()), ExactCos::Dyadic(Dyadic::one()));
        assert_eq!(cos_exact(&AnglePi::half_pi()), ExactCos::Dyadic(Dyadic::zero()));
        assert_eq!(cos_exact(&AnglePi::pi()), ExactCos::Dyadic(-Dyadic::one()));
        assert_eq!(cos_exact(&AnglePi::three_half_pi()), ExactCos::Dyadic(Dyadic::zero()));
        assert_eq!(cos_exact(&AnglePi::from_parts(1, 2)), ExactCos::NotDyadic);
    }

    #[test]
    fn angle_cos_validation() {
        assert!(AngleCos::new(d("3/2"), SinSign::Positive).is_err());
        assert!(AngleCos::new(d("1"), SinSign::Positive).is_err());
        assert!(AngleCos::new(d("1/2"), SinSign::Zero).is_err());
        let a: AngleCos = "cos=3/2^2,sin=-".parse().unwrap();
        assert_eq!(a.cos(), &d("3/4"));
        assert_eq!(a.sin_sign(), SinSign::Negative);
        assert_eq!(a.to_string(), "cos=3/2^2,sin=-");
        assert_eq!("3/4".parse::<AngleCos>().unwrap().sin_sign(), SinSign::Positive);
        assert_eq!("-1".parse::<AngleCos>().unwrap().sin_sign(), SinSign::Zero);
    }

    #[test]
    fn angle_to_pi_examples() {
        let up = |c: &str| AngleCos::upper(d(c)).unwrap();
        assert_eq!(angle_to_pi(&up("1")).unwrap(), AnglePi::zero());
        assert_eq!(angle_to_pi(&up("0")).unwrap(), AnglePi::half_pi());
        assert_eq!(angle_to_pi(&up("-1")).unwrap(), AnglePi::pi());
        let down = AngleCos::new(Dyadic::zero(), SinSign::Negative).unwrap();
        assert_eq!(angle_to_pi(&down).unwrap(), AnglePi::three_half_pi());
        assert_eq!(angle_to_pi(&up("3/4")), Err(DyadicError::Incommensurable));
    }

    #[test]
    fn four_points_round_trip() {
        for a in [
            AnglePi::zero(),
            AnglePi::half_pi(),
            AnglePi::pi(),
            AnglePi::three_half_pi(),
        ] {
            let c = a.to_angle_cos().unwrap();
            assert_eq!(angle_to_pi(&c).unwrap(), a);
        }
        assert!(AnglePi::from_parts(1, 3).to_angle_cos().is_none());
    }

    #[test]
    fn pyth_examples() {
        let r = |a: i64, b: i64| BigRational::new(BigInt::from(a), BigInt::from(b));
        assert_eq!(pyth_pair(2, 1).unwrap(), (r(4, 5), r(3, 5)));
        assert_eq!(pyth_pair(3, 2).unwrap(), (r(12, 13), r(5, 13)));
        assert!(pyth_pair(3, 1).is_err()); // same parity
        assert!(pyth_pair(4, 2).is_err()); // common factor
        assert!(pyth_pair(1, 2).is_err()); // u < v
        assert!(pyth_pair(1, 0).is_err());
    }

    #[test]
    fn pyth_pairs_never_dyadic() {
        for u in 2..40i64 {
            for v in 1..u {
                if let Ok((c, s)) = pyth_pair(u, v) {
                    assert!(Dyadic::from_rational(&c).is_none());
                    assert!(Dyadic::from_rational(&s).is_none());
                    assert_eq!(&c * &c + &s * &s, BigRational::one());
                }
            }
        }
    }

    #[test]
    fn tripled_angle() {
        let a = AngleCos::upper(d("181/256")).unwrap();
        let t = a.tripled();
        assert_eq!(t.cos(), &Dyadic::new(-2966771, 22));
        // θ ≈ 0.785, 3θ ≈ 2.356 is still in the upper half-plane.
        assert_eq!(t.sin_sign(), SinSign::Positive);
        let x = AngleCos::upper(d("1/4")).unwrap(); // θ ≈ 1.318, 3θ ≈ 3.95
        assert_eq!(x.tripled().sin_sign(), SinSign::Negative);
    }

    #[test]
    fn rational_multiple_classification() {
        assert_eq!(
            cos_of_rational_multiple(1, 3),
            CosClass::Rational(BigRational::new(1.into(), 2.into()))
        );
        assert_eq!(
            cos_of_rational_multiple(4, 3),
            CosClass::Rational(BigRational::new((-1).into(), 2.into()))
        );
        assert_eq!(cos_of_rational_multiple(1, 5), CosClass::Irrational);
        assert_eq!(cos_of_rational_multiple(-1, 2), CosClass::Dyadic(Dyadic::zero()));
        // Agrees with the dyadic decision procedure on dyadic multiples.
        for k in 0..8u32 {
            for m in 0..(2i64 << k) {
                let a = AnglePi::from_parts(m, k);
                let via_niven = cos_of_rational_multiple(m, 1 << k);
                match cos_exact(&a) {
                    ExactCos::Dyadic(v) => assert_eq!(via_niven, CosClass::Dyadic(v)),
                    ExactCos::NotDyadic => assert_eq!(via_niven, CosClass::Irrational),
                }
            }
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn dyadic() -> impl Strategy<Value = Dyadic> {
            (any::<i64>(), 0u32..40).prop_map(|(n, k)| Dyadic::new(n, k))
        }

        proptest! {
            #[test]
            fn field_identities(a in dyadic(), b in dyadic(), c in dyadic()) {
                prop_assert_eq!(&a + &b, &b + &a);
                prop_assert_eq!(&a * &b, &b * &a);
                prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
                prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
                prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
                prop_assert_eq!(&a + &Dyadic::zero(), a.clone());
                prop_assert_eq!(&a * &Dyadic::one(), a.clone());
                prop_assert!((&a + &(-&a)).is_zero());
            }

            #[test]
            fn canonical_after_ops(a in dyadic(), b in dyadic()) {
                for x in [&a + &b, &a * &b, &a - &b] {
                    prop_assert!(x.scale() == 0 || x.numerator().is_odd());
                }
            }

            #[test]
            fn ordering_matches_rationals(a in dyadic(), b in dyadic()) {
                prop_assert_eq!(a.cmp(&b), a.to_rational().cmp(&b.to_rational()));
            }

            #[test]
            fn text_round_trip(a in dyadic()) {
                prop_assert_eq!(a.to_string().parse::<Dyadic>().unwrap(), a.clone());
                prop_assert_eq!(a.to_pow2_string().parse::<Dyadic>().unwrap(), a);
            }

            #[test]
            fn angle_reduction_preserves_angle(m in any::<i32>(), k in 0u32..20) {
                let a = AnglePi::from_parts(m, k);
                let ht = a.half_turns();
                prop_assert!(*ht >= Dyadic::zero() && *ht < Dyadic::from_int(2));
                // Difference from the raw value is an even integer.
                let diff = Dyadic::new(m, k) - ht.clone();
                prop_assert!(diff.is_integer());
                prop_assert!(diff.numerator().is_even());
            }
        }
    }
}

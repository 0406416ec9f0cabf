//! Exact arbitrary-precision naturals and rationals.
//!
//! Every quantity in the bound recursions and every point of a generated
//! iteration lives here. There is no floating point anywhere in the crate.
//!
//! Rationals are kept in lowest terms with a positive denominator. Iteration
//! points grow to tens of thousands of bits, so the hot paths avoid a full
//! big-by-big gcd: [`Rational::affine`] reduces using only a small probe
//! integer, and [`Difference`] compares differences by cross-multiplication
//! without ever normalising them.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Deref, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Default bit-length limit for naturals produced by the bound calculators.
pub const DEFAULT_CAP_BITS: u64 = 4096;

/// Default iteration limit for [`log_ceil_base_lt1`].
pub const DEFAULT_LOG_CAP: u64 = 1_000_000;

// ---------------------------------------------------------------------------
// Nat

/// Arbitrary-precision natural number.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Nat(BigUint);

impl Nat {
    pub fn zero() -> Self {
        Nat(BigUint::zero())
    }

    pub fn one() -> Self {
        Nat(BigUint::one())
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn as_biguint(&self) -> &BigUint {
        &self.0
    }

    pub fn to_u64(&self) -> Option<u64> {
        self.0.to_u64()
    }

    pub fn to_usize(&self) -> Option<usize> {
        self.0.to_usize()
    }

    pub fn bits(&self) -> u64 {
        self.0.bits()
    }

    /// `self - other`, or `None` when the result would be negative.
    pub fn checked_sub(&self, other: &Nat) -> Option<Nat> {
        if self.0 >= other.0 {
            Some(Nat(&self.0 - &other.0))
        } else {
            None
        }
    }

    pub fn to_rational(&self) -> Rational {
        Rational::from_integer(BigInt::from(self.0.clone()))
    }

    /// Errors when the bit length exceeds `cap_bits`.
    pub fn check_bits(&self, cap_bits: u64, what: &str) -> Result<()> {
        if self.bits() > cap_bits {
            Err(Error::cap(
                format!("{what} has {} bits", self.bits()),
                format!("{cap_bits} bits"),
            ))
        } else {
            Ok(())
        }
    }
}

impl From<u64> for Nat {
    fn from(v: u64) -> Self {
        Nat(BigUint::from(v))
    }
}

impl From<u32> for Nat {
    fn from(v: u32) -> Self {
        Nat(BigUint::from(v))
    }
}

impl From<usize> for Nat {
    fn from(v: usize) -> Self {
        Nat(BigUint::from(v))
    }
}

impl From<BigUint> for Nat {
    fn from(v: BigUint) -> Self {
        Nat(v)
    }
}

impl Add<&Nat> for &Nat {
    type Output = Nat;
    fn add(self, rhs: &Nat) -> Nat {
        Nat(&self.0 + &rhs.0)
    }
}

impl Add for Nat {
    type Output = Nat;
    fn add(self, rhs: Nat) -> Nat {
        Nat(self.0 + rhs.0)
    }
}

impl Add<u64> for &Nat {
    type Output = Nat;
    fn add(self, rhs: u64) -> Nat {
        Nat(&self.0 + rhs)
    }
}

impl Mul<&Nat> for &Nat {
    type Output = Nat;
    fn mul(self, rhs: &Nat) -> Nat {
        Nat(&self.0 * &rhs.0)
    }
}

impl Mul<u64> for &Nat {
    type Output = Nat;
    fn mul(self, rhs: u64) -> Nat {
        Nat(&self.0 * rhs)
    }
}

impl fmt::Display for Nat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl FromStr for Nat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if t.is_empty() || !t.bytes().all(|b| b.is_ascii_digit()) {
            return Err(Error::Parse {
                what: "natural number",
                input: s.to_string(),
            });
        }
        t.parse::<BigUint>().map(Nat).map_err(|_| Error::Parse {
            what: "natural number",
            input: s.to_string(),
        })
    }
}

impl Serialize for Nat {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Nat {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct NatVisitor;
        impl Visitor<'_> for NatVisitor {
            type Value = Nat;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a natural number as a decimal string")
            }
            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Nat, E> {
                v.parse().map_err(E::custom)
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Nat, E> {
                Ok(Nat::from(v))
            }
        }
        deserializer.deserialize_any(NatVisitor)
    }
}

// ---------------------------------------------------------------------------
// Rational

/// Exact signed rational in lowest terms with a positive denominator.
#[derive(Clone, Debug)]
pub struct Rational(BigRational);

impl Rational {
    /// Builds `num/den`, reducing to lowest terms.
    pub fn new(num: impl Into<BigInt>, den: impl Into<BigInt>) -> Result<Self> {
        let den = den.into();
        if den.is_zero() {
            return Err(Error::Domain("zero denominator".into()));
        }
        Ok(Rational(BigRational::new(num.into(), den)))
    }

    /// Shorthand for small literals. Panics on a zero denominator.
    pub fn frac(num: i64, den: i64) -> Self {
        Rational::new(num, den).expect("nonzero denominator")
    }

    pub fn from_integer(n: impl Into<BigInt>) -> Self {
        Rational(BigRational::from_integer(n.into()))
    }

    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Rational(BigRational::one())
    }

    /// Caller guarantees `gcd(num, den) = 1` and `den > 0`.
    fn from_reduced(num: BigInt, den: BigInt) -> Self {
        debug_assert!(den.is_positive());
        Rational(BigRational::new_raw(num, den))
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.numer().is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.numer().is_negative()
    }

    pub fn signum(&self) -> Ordering {
        self.numer().sign().cmp(&Sign::NoSign)
    }

    pub fn abs(&self) -> Rational {
        Rational(self.0.abs())
    }

    pub fn recip(&self) -> Result<Rational> {
        if self.is_zero() {
            return Err(Error::Domain("reciprocal of zero".into()));
        }
        Ok(Rational(self.0.recip()))
    }

    /// Least integer `>= self`.
    pub fn ceil(&self) -> BigInt {
        self.numer().div_ceil(self.denom())
    }

    /// Greatest integer `<= self`.
    pub fn floor(&self) -> BigInt {
        self.numer().div_floor(self.denom())
    }

    pub fn is_integer(&self) -> bool {
        self.denom().is_one()
    }

    /// `base^exp` for a non-negative exponent.
    pub fn pow(&self, exp: u32) -> Rational {
        // Powers of coprime integers stay coprime.
        let num = num_traits::pow(self.numer().clone(), exp as usize);
        let den = num_traits::pow(self.denom().clone(), exp as usize);
        Rational::from_reduced(num, den)
    }

    /// Computes `a·self + b` exactly, in lowest terms.
    ///
    /// The result's common factor can only contain primes of
    /// `numer(a)·denom(a)·denom(b)`, so reduction needs gcds against that
    /// small probe only. This keeps one affine step linear in the size of
    /// `self`, which is what makes long exact iterations affordable.
    pub fn affine(&self, a: &Rational, b: &Rational) -> Rational {
        if a.is_zero() || self.is_zero() {
            return b.clone();
        }
        let (xn, xd) = (self.numer(), self.denom());
        let (an, ad) = (a.numer(), a.denom());
        let (bn, bd) = (b.numer(), b.denom());
        let num = (an * bd) * xn + (bn * ad) * xd;
        let den = (ad * bd) * xd;
        let probe = (an * ad * bd).abs();
        reduce_with_probe(num, den, &probe)
    }

    /// Decimal-free canonical text form `num/den`.
    pub fn to_frac_string(&self) -> String {
        format!("{}/{}", self.numer(), self.denom())
    }
}

/// Removes every common factor of `num` and `den`, assuming all of them divide
/// `probe`.
fn reduce_with_probe(mut num: BigInt, mut den: BigInt, probe: &BigInt) -> Rational {
    if num.is_zero() {
        return Rational::zero();
    }
    if !probe.is_zero() {
        loop {
            let h = (&num % probe).gcd(probe);
            if h.is_one() {
                break;
            }
            let h = (&den % &h).gcd(&h);
            if h.is_one() {
                break;
            }
            num /= &h;
            den /= &h;
        }
    } else {
        let g = num.gcd(&den);
        num /= &g;
        den /= &g;
    }
    Rational::from_reduced(num, den)
}

impl PartialEq for Rational {
    fn eq(&self, other: &Self) -> bool {
        self.numer() == other.numer() && self.denom() == other.denom()
    }
}

impl Eq for Rational {}

impl std::hash::Hash for Rational {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.numer().hash(state);
        self.denom().hash(state);
    }
}

impl Ord for Rational {
    fn cmp(&self, other: &Self) -> Ordering {
        if self.denom() == other.denom() {
            return self.numer().cmp(other.numer());
        }
        let ls = self.numer().sign();
        let rs = other.numer().sign();
        if ls != rs {
            return ls.cmp(&rs);
        }
        (self.numer() * other.denom()).cmp(&(other.numer() * self.denom()))
    }
}

impl PartialOrd for Rational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident) => {
        impl $trait<&Rational> for &Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                Rational((&self.0).$method(&rhs.0))
            }
        }
        impl $trait for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational(self.0.$method(rhs.0))
            }
        }
        impl $trait<&Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                Rational(self.0.$method(&rhs.0))
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);
forward_binop!(Div, div);

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0.clone())
    }
}

impl From<i64> for Rational {
    fn from(v: i64) -> Self {
        Rational::from_integer(v)
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numer(), self.denom())
    }
}

impl FromStr for Rational {
    type Err = Error;

    /// Accepts `num/den` or a bare integer `num`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse {
            what: "rational",
            input: s.to_string(),
        };
        let t = s.trim();
        let (n, d) = match t.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (t, "1"),
        };
        let valid_int = |x: &str, signed: bool| {
            let digits = if signed { x.strip_prefix('-').unwrap_or(x) } else { x };
            !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit())
        };
        if !valid_int(n, true) || !valid_int(d, false) {
            return Err(bad());
        }
        let num: BigInt = n.parse().map_err(|_| bad())?;
        let den: BigInt = d.parse().map_err(|_| bad())?;
        Rational::new(num, den).map_err(|_| bad())
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_frac_string())
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(de::Error::custom)
    }
}

// ---------------------------------------------------------------------------
// Difference

/// The exact value `x − y`, kept unreduced.
///
/// Used wherever two large iteration points are compared: normalising the
/// difference would cost a full gcd, while every question the oracle asks
/// (is `|x − y| ≤ ε`? is one gap smaller than another?) is answered by
/// cross-multiplication.
#[derive(Clone, Debug)]
pub struct Difference {
    num: BigInt,
    den: BigInt,
}

impl Difference {
    pub fn between(x: &Rational, y: &Rational) -> Self {
        let (a, b) = (x.numer(), x.denom());
        let (c, d) = (y.numer(), y.denom());
        if b == d {
            return Difference {
                num: a - c,
                den: b.clone(),
            };
        }
        if b.bits() >= d.bits() {
            let (q, r) = b.div_rem(d);
            if r.is_zero() {
                return Difference {
                    num: a - c * q,
                    den: b.clone(),
                };
            }
        } else {
            let (q, r) = d.div_rem(b);
            if r.is_zero() {
                return Difference {
                    num: a * q - c,
                    den: d.clone(),
                };
            }
        }
        Difference {
            num: a * d - c * b,
            den: b * d,
        }
    }

    pub fn signum(&self) -> Ordering {
        self.num.sign().cmp(&Sign::NoSign)
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// `|x − y| ≤ bound`.
    pub fn abs_le(&self, bound: &Rational) -> bool {
        if bound.is_negative() {
            return false;
        }
        (self.num.magnitude() * bound.denom().magnitude())
            <= (bound.numer().magnitude() * self.den.magnitude())
    }

    /// `|x − y| < bound`.
    pub fn abs_lt(&self, bound: &Rational) -> bool {
        if !bound.is_positive() {
            return false;
        }
        (self.num.magnitude() * bound.denom().magnitude())
            < (bound.numer().magnitude() * self.den.magnitude())
    }

    /// Compares `|self|` with `|other|`.
    pub fn abs_cmp(&self, other: &Difference) -> Ordering {
        (self.num.magnitude() * other.den.magnitude())
            .cmp(&(other.num.magnitude() * self.den.magnitude()))
    }

    /// `|self| ≤ factor·|other|` for a non-negative `factor`.
    pub fn abs_le_scaled(&self, factor: &Rational, other: &Difference) -> bool {
        if factor.is_negative() {
            return false;
        }
        let lhs = self.num.magnitude() * other.den.magnitude() * factor.denom().magnitude();
        let rhs = factor.numer().magnitude() * other.num.magnitude() * self.den.magnitude();
        lhs <= rhs
    }

    /// Normalises to a [`Rational`]. Costs a full gcd.
    pub fn to_rational(&self) -> Rational {
        Rational(BigRational::new(self.num.clone(), self.den.clone()))
    }
}

// ---------------------------------------------------------------------------
// PosRational / UnitRational

/// Rational strictly greater than zero.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PosRational(Rational);

impl PosRational {
    pub fn new(value: Rational) -> Result<Self> {
        if value.is_positive() {
            Ok(PosRational(value))
        } else {
            Err(Error::Domain(format!("{value} is not positive")))
        }
    }

    /// Shorthand for small literals. Panics unless `num/den > 0`.
    pub fn frac(num: i64, den: i64) -> Self {
        PosRational::new(Rational::frac(num, den)).expect("positive literal")
    }

    pub fn one() -> Self {
        PosRational(Rational::one())
    }

    pub fn from_nat(n: &Nat) -> Result<Self> {
        PosRational::new(n.to_rational())
    }

    pub fn value(&self) -> &Rational {
        &self.0
    }

    pub fn into_inner(self) -> Rational {
        self.0
    }

    pub fn recip(&self) -> PosRational {
        PosRational(self.0.recip().expect("positive is nonzero"))
    }

    /// Least natural `n` with `n ≥ self`.
    pub fn ceil(&self) -> Nat {
        ceil(self)
    }

    pub fn mul(&self, other: &PosRational) -> PosRational {
        PosRational(&self.0 * &other.0)
    }

    pub fn div(&self, other: &PosRational) -> PosRational {
        PosRational(&self.0 / &other.0)
    }

    pub fn min(&self, other: &PosRational) -> PosRational {
        PosRational(self.0.clone().min(other.0.clone()))
    }
}

impl Deref for PosRational {
    type Target = Rational;
    fn deref(&self) -> &Rational {
        &self.0
    }
}

impl fmt::Display for PosRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl FromStr for PosRational {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        PosRational::new(s.parse()?)
    }
}

impl Serialize for PosRational {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.0.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for PosRational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let r = Rational::deserialize(deserializer)?;
        PosRational::new(r).map_err(de::Error::custom)
    }
}

/// Rational in the closed unit interval.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct UnitRational(Rational);

impl UnitRational {
    pub fn new(value: Rational) -> Result<Self> {
        if value.is_negative() || value > Rational::one() {
            Err(Error::Domain(format!("{value} is outside [0,1]")))
        } else {
            Ok(UnitRational(value))
        }
    }

    /// Shorthand for small literals. Panics outside `[0,1]`.
    pub fn frac(num: i64, den: i64) -> Self {
        UnitRational::new(Rational::frac(num, den)).expect("literal in [0,1]")
    }

    pub fn zero() -> Self {
        UnitRational(Rational::zero())
    }

    pub fn one() -> Self {
        UnitRational(Rational::one())
    }

    pub fn value(&self) -> &Rational {
        &self.0
    }

    pub fn into_inner(self) -> Rational {
        self.0
    }

    /// `1 − self`.
    pub fn complement(&self) -> UnitRational {
        UnitRational(Rational::one() - &self.0)
    }

    /// Exact `|self − other|`, normalised.
    pub fn abs_diff(&self, other: &UnitRational) -> Rational {
        Difference::between(&self.0, &other.0).to_rational().abs()
    }

    /// Wraps a value the caller has already proven to lie in `[0,1]`.
    pub(crate) fn new_unchecked(value: Rational) -> Self {
        debug_assert!(!value.is_negative() && value <= Rational::one());
        UnitRational(value)
    }
}

impl Deref for UnitRational {
    type Target = Rational;
    fn deref(&self) -> &Rational {
        &self.0
    }
}

impl fmt::Display for UnitRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl FromStr for UnitRational {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        UnitRational::new(s.parse()?)
    }
}

impl Serialize for UnitRational {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.0.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for UnitRational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let r = Rational::deserialize(deserializer)?;
        UnitRational::new(r).map_err(de::Error::custom)
    }
}

// ---------------------------------------------------------------------------
// Ceilings and discrete logarithms

/// `⌈p⌉` as a natural.
pub fn ceil(p: &PosRational) -> Nat {
    let c = p.value().ceil();
    Nat(c.to_biguint().expect("ceiling of a positive rational is positive"))
}

/// `⌈a / q⌉`, e.g. `⌈6/ε⌉`.
pub fn ceil_div(a: &PosRational, q: &PosRational) -> Nat {
    ceil(&a.div(q))
}

/// Least integer `k` with `base^k ≤ e`, for `0 < base < 1` and `e > 0`.
///
/// Evaluated by repeated exact multiplication; `k` is non-positive when
/// `e ≥ 1`. Fails with [`Error::CapExceeded`] after `cap` multiplications.
pub fn log_ceil_base_lt1(base: &PosRational, e: &PosRational, cap: u64) -> Result<i64> {
    if base.value() >= &Rational::one() {
        return Err(Error::Domain(format!("logarithm base {base} is not below 1")));
    }
    let (bn, bd) = (base.numer().magnitude(), base.denom().magnitude());
    let (en, ed) = (e.numer().magnitude(), e.denom().magnitude());
    // pow = pn/pd, compared against e via pn·ed ≤ en·pd.
    let mut pn = BigUint::one();
    let mut pd = BigUint::one();
    let le = |pn: &BigUint, pd: &BigUint| pn * ed <= en * pd;
    let mut steps = 0u64;
    if le(&pn, &pd) {
        // e ≥ 1: walk k downwards while base^(k-1) = (1/base)^(1-k) still fits.
        let mut k = 0i64;
        loop {
            let nn = &pn * bd;
            let nd = &pd * bn;
            if !le(&nn, &nd) {
                return Ok(k);
            }
            pn = nn;
            pd = nd;
            k -= 1;
            steps += 1;
            if steps > cap {
                return Err(Error::cap("discrete logarithm iterations", cap));
            }
        }
    }
    let mut k = 0i64;
    loop {
        pn *= bn;
        pd *= bd;
        k += 1;
        if le(&pn, &pd) {
            return Ok(k);
        }
        steps += 1;
        if steps > cap {
            return Err(Error::cap("discrete logarithm iterations", cap));
        }
    }
}

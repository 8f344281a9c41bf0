//! Dyadic rationals `m * 2^e` and closed intervals with dyadic endpoints.
//!
//! All interval operations round outward, so an interval produced here always
//! contains every value the exact operation could produce from its inputs.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Exact value `mant * 2^exp`.
#[derive(Clone, Debug)]
pub struct Dyadic {
    mant: BigInt,
    exp: i64,
}

impl Dyadic {
    pub fn new(mant: BigInt, exp: i64) -> Self {
        Self { mant, exp }
    }

    pub fn zero() -> Self {
        Self::new(BigInt::zero(), 0)
    }

    pub fn from_int(n: impl Into<BigInt>) -> Self {
        Self::new(n.into(), 0)
    }

    /// Exact conversion; every finite double is dyadic.
    pub fn from_f64(x: f64) -> Option<Self> {
        if !x.is_finite() {
            return None;
        }
        if x == 0.0 {
            return Some(Self::zero());
        }
        let bits = x.to_bits();
        let sign = if bits >> 63 == 1 { -1i64 } else { 1 };
        let raw_exp = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (mant, exp) = if raw_exp == 0 {
            (frac, -1074)
        } else {
            (frac | (1u64 << 52), raw_exp - 1075)
        };
        Some(Self::new(BigInt::from(mant) * sign, exp))
    }

    pub fn mantissa(&self) -> &BigInt {
        &self.mant
    }

    pub fn exponent(&self) -> i64 {
        self.exp
    }

    pub fn is_zero(&self) -> bool {
        self.mant.is_zero()
    }

    pub fn signum(&self) -> i32 {
        match self.mant.sign() {
            Sign::Minus => -1,
            Sign::NoSign => 0,
            Sign::Plus => 1,
        }
    }

    /// Mantissa rescaled to exponent `exp`, which must not exceed `self.exp`.
    fn mant_at(&self, exp: i64) -> BigInt {
        debug_assert!(exp <= self.exp);
        &self.mant << ((self.exp - exp) as usize)
    }

    pub fn neg(&self) -> Self {
        Self::new(-&self.mant, self.exp)
    }

    pub fn abs(&self) -> Self {
        Self::new(self.mant.abs(), self.exp)
    }

    pub fn add(&self, other: &Self) -> Self {
        let exp = self.exp.min(other.exp);
        Self::new(self.mant_at(exp) + other.mant_at(exp), exp)
    }

    pub fn sub(&self, other: &Self) -> Self {
        let exp = self.exp.min(other.exp);
        Self::new(self.mant_at(exp) - other.mant_at(exp), exp)
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self::new(&self.mant * &other.mant, self.exp + other.exp)
    }

    pub fn mul_int(&self, k: &BigInt) -> Self {
        Self::new(&self.mant * k, self.exp)
    }

    /// `self * 2^k`.
    pub fn shl(&self, k: i64) -> Self {
        Self::new(self.mant.clone(), self.exp + k)
    }

    /// Greatest multiple of `2^exp` not above `self`.
    pub fn round_down(&self, exp: i64) -> Self {
        if self.exp >= exp {
            return self.clone();
        }
        let shift = (exp - self.exp) as usize;
        Self::new(&self.mant >> shift, exp)
    }

    /// Least multiple of `2^exp` not below `self`.
    pub fn round_up(&self, exp: i64) -> Self {
        if self.exp >= exp {
            return self.clone();
        }
        let shift = (exp - self.exp) as usize;
        let q = -((-&self.mant) >> shift);
        Self::new(q, exp)
    }

    pub fn floor(&self) -> BigInt {
        if self.exp >= 0 {
            &self.mant << (self.exp as usize)
        } else {
            &self.mant >> ((-self.exp) as usize)
        }
    }

    pub fn ceil(&self) -> BigInt {
        -(self.neg().floor())
    }

    pub fn is_integer(&self) -> bool {
        self.exp >= 0
            || self
                .mant
                .trailing_zeros()
                .is_none_or(|tz| tz as i64 >= -self.exp)
    }

    pub fn to_rational(&self) -> BigRational {
        if self.exp >= 0 {
            BigRational::from_integer(&self.mant << (self.exp as usize))
        } else {
            BigRational::new(self.mant.clone(), BigInt::one() << ((-self.exp) as usize))
        }
    }

    /// Floor of `r * 2^-exp`, returned as a dyadic at exponent `exp`.
    pub fn from_rational_down(r: &BigRational, exp: i64) -> Self {
        let (num, den) = scaled_parts(r, exp);
        Self::new(num.div_floor(&den), exp)
    }

    pub fn from_rational_up(r: &BigRational, exp: i64) -> Self {
        let (num, den) = scaled_parts(r, exp);
        Self::new(-((-num).div_floor(&den)), exp)
    }

    /// Binary logarithm of `|self|`, accurate to double precision even when
    /// the value is far outside the range of `f64`.
    pub fn log2_abs(&self) -> f64 {
        if self.mant.is_zero() {
            return f64::NEG_INFINITY;
        }
        let bits = self.mant.bits() as i64;
        let keep = 60.min(bits);
        let top = (self.mant.abs() >> ((bits - keep) as usize)).to_u64().unwrap_or(u64::MAX);
        (top as f64).log2() + (bits - keep + self.exp) as f64
    }

    pub fn ln_abs(&self) -> f64 {
        self.log2_abs() * std::f64::consts::LN_2
    }

    /// Nearest-ish double; saturates to +-inf or 0 outside the double range.
    pub fn to_f64(&self) -> f64 {
        if self.mant.is_zero() {
            return 0.0;
        }
        let l = self.log2_abs();
        let sign = if self.mant.is_negative() { -1.0 } else { 1.0 };
        if l > 1023.0 {
            return sign * f64::INFINITY;
        }
        if l < -1070.0 {
            return sign * 0.0;
        }
        let bits = self.mant.bits() as i64;
        let keep = 62.min(bits);
        let shift = bits - keep;
        let top = (&self.mant >> (shift as usize)).to_i64().unwrap_or(0) as f64;
        let e = (shift + self.exp) as i32;
        // Two steps keep the intermediate inside the normal range.
        top * 2f64.powi(e / 2) * 2f64.powi(e - e / 2)
    }
}

fn scaled_parts(r: &BigRational, exp: i64) -> (BigInt, BigInt) {
    let mut num = r.numer().clone();
    let mut den = r.denom().clone();
    if exp <= 0 {
        num <<= (-exp) as usize;
    } else {
        den <<= exp as usize;
    }
    (num, den)
}

impl PartialEq for Dyadic {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Dyadic {}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let exp = self.exp.min(other.exp);
        self.mant_at(exp).cmp(&other.mant_at(exp))
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_f64())
    }
}

/// Closed interval `[lo, hi]` with dyadic endpoints, `lo <= hi`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interval {
    lo: Dyadic,
    hi: Dyadic,
}

impl Interval {
    pub fn new(lo: Dyadic, hi: Dyadic) -> Self {
        assert!(lo <= hi, "interval endpoints out of order");
        Self { lo, hi }
    }

    pub fn point(x: Dyadic) -> Self {
        Self {
            lo: x.clone(),
            hi: x,
        }
    }

    /// Tightest interval at exponent `exp` containing the rational `r`.
    pub fn from_rational(r: &BigRational, exp: i64) -> Self {
        Self::new(Dyadic::from_rational_down(r, exp), Dyadic::from_rational_up(r, exp))
    }

    pub fn lo(&self) -> &Dyadic {
        &self.lo
    }

    pub fn hi(&self) -> &Dyadic {
        &self.hi
    }

    pub fn width(&self) -> Dyadic {
        self.hi.sub(&self.lo)
    }

    pub fn midpoint(&self) -> Dyadic {
        self.lo.add(&self.hi).shl(-1)
    }

    /// True when `width <= 2^-bits`.
    pub fn width_at_most(&self, bits: u32) -> bool {
        self.width() <= Dyadic::new(BigInt::one(), -(bits as i64))
    }

    pub fn contains(&self, x: &Dyadic) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn contains_rational(&self, r: &BigRational) -> bool {
        self.lo.to_rational() <= *r && *r <= self.hi.to_rational()
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    /// Widens both ends by `pad`.
    pub fn padded(&self, pad: &Dyadic) -> Self {
        Self::new(self.lo.sub(pad), self.hi.add(pad))
    }

    pub fn neg(&self) -> Self {
        Self::new(self.hi.neg(), self.lo.neg())
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::new(self.lo.add(&other.lo), self.hi.add(&other.hi))
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self::new(self.lo.sub(&other.hi), self.hi.sub(&other.lo))
    }

    /// Exact interval product (no rounding).
    pub fn mul(&self, other: &Self) -> Self {
        let c = [
            self.lo.mul(&other.lo),
            self.lo.mul(&other.hi),
            self.hi.mul(&other.lo),
            self.hi.mul(&other.hi),
        ];
        let lo = c.iter().min().cloned().unwrap_or_else(Dyadic::zero);
        let hi = c.iter().max().cloned().unwrap_or_else(Dyadic::zero);
        Self::new(lo, hi)
    }

    pub fn mul_int(&self, k: &BigInt) -> Self {
        if k.is_negative() {
            Self::new(self.hi.mul_int(k), self.lo.mul_int(k))
        } else {
            Self::new(self.lo.mul_int(k), self.hi.mul_int(k))
        }
    }

    /// Outward rounding of both endpoints to multiples of `2^exp`.
    pub fn round_out(&self, exp: i64) -> Self {
        Self::new(self.lo.round_down(exp), self.hi.round_up(exp))
    }

    /// Encloses `self / r` at exponent `exp`. `r` must be nonzero.
    pub fn div_rational(&self, r: &BigRational, exp: i64) -> Self {
        assert!(!r.is_zero(), "division by zero rational");
        let inv = r.recip();
        let a = self.lo.to_rational() * &inv;
        let b = self.hi.to_rational() * &inv;
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        Self::new(Dyadic::from_rational_down(&lo, exp), Dyadic::from_rational_up(&hi, exp))
    }

    /// The common floor of every point, if the interval lies in one unit cell.
    pub fn common_floor(&self) -> Option<BigInt> {
        let a = self.lo.floor();
        let b = self.hi.floor();
        (a == b).then_some(a)
    }

    /// `Some(sign)` when the interval excludes zero or is exactly zero.
    pub fn sign(&self) -> Option<i32> {
        if self.lo.signum() > 0 {
            Some(1)
        } else if self.hi.signum() < 0 {
            Some(-1)
        } else if self.lo.is_zero() && self.hi.is_zero() {
            Some(0)
        } else {
            None
        }
    }

    /// Position relative to `r`: `Some(Less)` if entirely below, etc.
    pub fn compare_rational(&self, r: &BigRational) -> Option<Ordering> {
        let lo = self.lo.to_rational();
        let hi = self.hi.to_rational();
        if hi < *r {
            Some(Ordering::Less)
        } else if lo > *r {
            Some(Ordering::Greater)
        } else if lo == *r && hi == *r {
            Some(Ordering::Equal)
        } else {
            None
        }
    }

    /// Interval of absolute values.
    pub fn abs(&self) -> Self {
        if self.lo.signum() >= 0 {
            self.clone()
        } else if self.hi.signum() <= 0 {
            self.neg()
        } else {
            let m = self.lo.abs().max(self.hi.abs());
            Self::new(Dyadic::zero(), m)
        }
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

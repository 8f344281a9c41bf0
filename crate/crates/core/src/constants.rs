//! Exact real constants as expression trees, refinable to dyadic intervals of
//! any requested width.
//!
//! Subtrees that are purely rational are folded when a node is built, so a
//! rational expression never reaches interval iteration: its floor is exact.

use std::cmp::Ordering;
use std::fmt;
use std::ops;
use std::sync::atomic::{AtomicU32, Ordering as AtomicOrdering};
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::dyadic::{Dyadic, Interval};
use crate::error::{Error, Result};
use crate::parse;

/// First precision tried by certified floors and comparisons.
pub const START_PRECISION: u32 = 64;

/// Default cap for precision escalation.
pub const DEFAULT_PRECISION_CEILING: u32 = 4096;

static PRECISION_CEILING: AtomicU32 = AtomicU32::new(DEFAULT_PRECISION_CEILING);

/// Process-wide precision ceiling used by certified floors and comparisons.
pub fn precision_ceiling() -> u32 {
    PRECISION_CEILING.load(AtomicOrdering::Relaxed)
}

pub fn set_precision_ceiling(bits: u32) {
    PRECISION_CEILING.store(bits.max(START_PRECISION), AtomicOrdering::Relaxed);
}

#[derive(Debug)]
enum Node {
    Rational(BigRational),
    Sqrt(BigInt),
    Pi,
    E,
    /// `sum_{j >= 1} b^(-j!)`
    Liouville(u64),
    Add(ComputableReal, ComputableReal),
    Sub(ComputableReal, ComputableReal),
    Mul(ComputableReal, ComputableReal),
    Neg(ComputableReal),
    DivRational(ComputableReal, BigRational),
}

#[derive(Debug)]
struct Inner {
    node: Node,
    /// Exact value when the subtree folds to a rational.
    rational: Option<BigRational>,
}

/// An exact real constant. Cheap to clone; immutable and shareable across threads.
#[derive(Clone, Debug)]
pub struct ComputableReal(Arc<Inner>);

/// Exact floor of a real constant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FloorResult {
    pub value: BigInt,
    /// The input was proven to equal `value`.
    pub exact_integer: bool,
    /// Bits of precision that resolved the floor; 0 for symbolic resolution.
    pub precision_used: u32,
}

fn perfect_square_root(k: &BigInt) -> Option<BigInt> {
    if k.is_negative() {
        return None;
    }
    let r = k.sqrt();
    (&r * &r == *k).then_some(r)
}

impl ComputableReal {
    fn build(node: Node) -> Self {
        let rational = fold(&node);
        Self(Arc::new(Inner { node, rational }))
    }

    pub fn rational(r: BigRational) -> Self {
        Self::build(Node::Rational(r))
    }

    /// `num/den` in lowest terms.
    pub fn ratio(num: impl Into<BigInt>, den: impl Into<BigInt>) -> Result<Self> {
        let den = den.into();
        if den.is_zero() {
            return Err(Error::ZeroDenominator { pos: 0 });
        }
        Ok(Self::rational(BigRational::new(num.into(), den)))
    }

    pub fn integer(n: impl Into<BigInt>) -> Self {
        Self::rational(BigRational::from_integer(n.into()))
    }

    pub fn zero() -> Self {
        Self::integer(0)
    }

    pub fn one() -> Self {
        Self::integer(1)
    }

    pub fn sqrt(k: impl Into<BigInt>) -> Result<Self> {
        let k = k.into();
        if k.is_negative() {
            return Err(Error::InvalidArgument(format!("sqrt of negative integer {k}")));
        }
        Ok(Self::build(Node::Sqrt(k)))
    }

    pub fn pi() -> Self {
        Self::build(Node::Pi)
    }

    pub fn e() -> Self {
        Self::build(Node::E)
    }

    pub fn liouville(base: u64) -> Result<Self> {
        if base < 2 {
            return Err(Error::LiouvilleBase { base, pos: 0 });
        }
        Ok(Self::build(Node::Liouville(base)))
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::build(Node::Add(self.clone(), other.clone()))
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self::build(Node::Sub(self.clone(), other.clone()))
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self::build(Node::Mul(self.clone(), other.clone()))
    }

    pub fn neg(&self) -> Self {
        Self::build(Node::Neg(self.clone()))
    }

    pub fn div_rational(&self, r: &BigRational) -> Result<Self> {
        if r.is_zero() {
            return Err(Error::ZeroDenominator { pos: 0 });
        }
        Ok(Self::build(Node::DivRational(self.clone(), r.clone())))
    }

    /// Multiplies by a rational, folding when the result is rational.
    pub fn scale(&self, r: &BigRational) -> Self {
        if let Some(v) = self.as_rational() {
            return Self::rational(v * r);
        }
        if r.is_one() {
            return self.clone();
        }
        self.mul(&Self::rational(r.clone()))
    }

    /// Parses an expression in the constant grammar.
    pub fn parse(text: &str) -> Result<Self> {
        parse::parse_constant(text)
    }

    /// The exact rational value, when symbolic folding proved one.
    pub fn as_rational(&self) -> Option<&BigRational> {
        self.0.rational.as_ref()
    }

    pub fn is_rational(&self) -> bool {
        self.0.rational.is_some()
    }

    /// Interval of width at most `2^-bits` containing the exact value.
    pub fn refine(&self, bits: u32) -> Interval {
        let bits = bits.max(1);
        if let Some(r) = self.as_rational() {
            return Interval::from_rational(r, -(bits as i64));
        }
        let mut work = bits as i64 + 8;
        loop {
            let iv = self.eval(work);
            if iv.width_at_most(bits) {
                return iv;
            }
            // Overshoot by the observed excess so the next pass usually lands.
            let excess = iv.width().log2_abs().ceil() as i64 + bits as i64;
            work += excess.max(8) + 4;
        }
    }

    /// Outward enclosure with endpoints on the grid `2^-work`.
    fn eval(&self, work: i64) -> Interval {
        if let Some(r) = self.as_rational() {
            return Interval::from_rational(r, -work);
        }
        match &self.0.node {
            Node::Rational(r) => Interval::from_rational(r, -work),
            Node::Sqrt(k) => sqrt_interval(k, work),
            Node::Pi => pi_interval(work),
            Node::E => e_interval(work),
            Node::Liouville(b) => liouville_interval(*b, work),
            Node::Add(a, b) => a.eval(work).add(&b.eval(work)),
            Node::Sub(a, b) => a.eval(work).sub(&b.eval(work)),
            Node::Mul(a, b) => a.eval(work).mul(&b.eval(work)).round_out(-work),
            Node::Neg(a) => a.eval(work).neg(),
            Node::DivRational(a, r) => a.eval(work).div_rational(r, -work),
        }
    }

    /// Exact floor, escalating precision up to the process-wide ceiling.
    pub fn certified_floor(&self) -> Result<FloorResult> {
        self.certified_floor_with(precision_ceiling())
    }

    pub fn certified_floor_with(&self, ceiling: u32) -> Result<FloorResult> {
        if let Some(r) = self.as_rational() {
            return Ok(FloorResult {
                value: r.floor().to_integer(),
                exact_integer: r.is_integer(),
                precision_used: 0,
            });
        }
        let mut bits = START_PRECISION.min(ceiling);
        loop {
            if let Some(value) = self.refine(bits).common_floor() {
                return Ok(FloorResult {
                    value,
                    exact_integer: false,
                    precision_used: bits,
                });
            }
            if bits >= ceiling {
                return Err(Error::FloorUndecided {
                    at: None,
                    precision: bits,
                });
            }
            bits = (bits * 2).min(ceiling);
        }
    }

    /// `x - floor(x)` as an interval of width at most `2^-bits`, clipped to `[0, 1]`.
    pub fn fractional_part(&self, bits: u32) -> Result<Interval> {
        let floor = self.certified_floor()?;
        if let Some(r) = self.as_rational() {
            let f = r - BigRational::from_integer(floor.value);
            return Ok(Interval::from_rational(&f, -(bits.max(1) as i64)));
        }
        let shift = Interval::point(Dyadic::from_int(floor.value));
        let iv = self.refine(bits).sub(&shift);
        let zero = Dyadic::zero();
        let one = Dyadic::from_int(1);
        let lo = iv.lo().clone().max(zero);
        let hi = iv.hi().clone().min(one);
        Ok(Interval::new(lo.clone().min(hi.clone()), hi))
    }

    /// Certified comparison against a rational, escalating up to the ceiling.
    pub fn compare_rational(&self, r: &BigRational) -> Result<Ordering> {
        if let Some(v) = self.as_rational() {
            return Ok(v.cmp(r));
        }
        let ceiling = precision_ceiling();
        let mut bits = START_PRECISION.min(ceiling);
        loop {
            match self.refine(bits).compare_rational(r) {
                Some(Ordering::Equal) | None => {}
                Some(ord) => return Ok(ord),
            }
            if bits >= ceiling {
                return Err(Error::PrecisionExhausted {
                    precision: bits,
                    context: format!("comparing {self} with {r}"),
                });
            }
            bits = (bits * 2).min(ceiling);
        }
    }

    /// Certified sign: -1, 0 or 1.
    pub fn signum(&self) -> Result<i32> {
        Ok(match self.compare_rational(&BigRational::zero())? {
            Ordering::Less => -1,
            Ordering::Equal => 0,
            Ordering::Greater => 1,
        })
    }

    /// Double-precision approximation, for reporting only.
    pub fn to_f64(&self) -> f64 {
        self.refine(64).midpoint().to_f64()
    }
}

/// Parses an expression in the constant grammar.
pub fn parse_constant(text: &str) -> Result<ComputableReal> {
    parse::parse_constant(text)
}

/// Interval of width at most `2^-bits` containing `x`.
pub fn refine(x: &ComputableReal, bits: u32) -> Interval {
    x.refine(bits)
}

pub fn certified_floor(x: &ComputableReal) -> Result<FloorResult> {
    x.certified_floor()
}

pub fn fractional_part(x: &ComputableReal, bits: u32) -> Result<Interval> {
    x.fractional_part(bits)
}

fn fold(node: &Node) -> Option<BigRational> {
    let r = |x: &ComputableReal| x.0.rational.clone();
    match node {
        Node::Rational(v) => Some(v.clone()),
        Node::Sqrt(k) => perfect_square_root(k).map(BigRational::from_integer),
        Node::Pi | Node::E | Node::Liouville(_) => None,
        Node::Add(a, b) => Some(r(a)? + r(b)?),
        Node::Sub(a, b) => Some(r(a)? - r(b)?),
        Node::Mul(a, b) => match (r(a), r(b)) {
            (Some(x), Some(y)) => Some(x * y),
            (Some(x), _) | (_, Some(x)) if x.is_zero() => Some(x),
            _ => match (&a.0.node, &b.0.node) {
                (Node::Sqrt(p), Node::Sqrt(q)) => perfect_square_root(&(p * q)).map(BigRational::from_integer),
                _ => None,
            },
        },
        Node::Neg(a) => Some(-r(a)?),
        Node::DivRational(a, d) => Some(r(a)? / d),
    }
}

fn sqrt_interval(k: &BigInt, work: i64) -> Interval {
    let scaled = k << (2 * work as usize);
    let s = scaled.sqrt();
    let lo = Dyadic::new(s.clone(), -work);
    if &s * &s == scaled {
        Interval::point(lo)
    } else {
        Interval::new(lo, Dyadic::new(s + 1, -work))
    }
}

/// Fixed-point `atan(1/x)` at scale `2^guard` with an error bound in ulps.
fn atan_inv(x: u32, scale: u64) -> (BigInt, u64) {
    let x2 = BigInt::from(x) * x;
    let mut power = (BigInt::one() << scale as usize) / x;
    let mut sum = BigInt::zero();
    let mut k = 0u64;
    while !power.is_zero() {
        let term = &power / (2 * k + 1);
        if k % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
        power /= &x2;
        k += 1;
    }
    // Each truncated term is off by < 3 ulps; the tail is < 2 ulps.
    (sum, 3 * k + 2)
}

fn widen(center: BigInt, err: u64, scale: u64, work: i64) -> Interval {
    let exp = -(scale as i64);
    Interval::new(
        Dyadic::new(&center - err, exp),
        Dyadic::new(center + err, exp),
    )
    .round_out(-work)
}

fn pi_interval(work: i64) -> Interval {
    let scale = work.max(1) as u64 + 16;
    let (a, ea) = atan_inv(5, scale);
    let (b, eb) = atan_inv(239, scale);
    widen(a * 16 - b * 4, 16 * ea + 4 * eb, scale, work)
}

fn e_interval(work: i64) -> Interval {
    let scale = work.max(1) as u64 + 16;
    let mut term = BigInt::one() << scale as usize;
    let mut sum = term.clone();
    let mut k = 1u64;
    while !term.is_zero() {
        term /= k;
        sum += &term;
        k += 1;
    }
    widen(sum, 2 * k + 4, scale, work)
}

/// Truncates after the smallest `J` with `2 b^{-(J+1)!} <= 2^-work`.
fn liouville_interval(b: u64, work: i64) -> Interval {
    let log2b = (b as f64).log2();
    let mut j: u64 = 1;
    let mut fact_j: u64 = 1;
    while ((fact_j * (j + 1)) as f64) * log2b < (work + 2) as f64 {
        j += 1;
        fact_j *= j;
    }
    // Partial sum N / b^{J!} with N = sum_{i <= J} b^{J! - i!}.
    let base = BigInt::from(b);
    let mut num = BigInt::zero();
    let mut fi: u64 = 1;
    for i in 1..=j {
        fi *= i;
        num += num_traits::pow(base.clone(), (fact_j - fi) as usize);
    }
    let den = num_traits::pow(base, fact_j as usize);
    let partial = BigRational::new(num, den);
    let lo = Dyadic::from_rational_down(&partial, -work);
    let hi = Dyadic::from_rational_up(&partial, -work).add(&Dyadic::new(BigInt::one(), -work));
    Interval::new(lo, hi)
}

impl ops::Add for &ComputableReal {
    type Output = ComputableReal;
    fn add(self, rhs: Self) -> ComputableReal {
        ComputableReal::add(self, rhs)
    }
}

impl ops::Sub for &ComputableReal {
    type Output = ComputableReal;
    fn sub(self, rhs: Self) -> ComputableReal {
        ComputableReal::sub(self, rhs)
    }
}

impl ops::Mul for &ComputableReal {
    type Output = ComputableReal;
    fn mul(self, rhs: Self) -> ComputableReal {
        ComputableReal::mul(self, rhs)
    }
}

impl ops::Neg for &ComputableReal {
    type Output = ComputableReal;
    fn neg(self) -> ComputableReal {
        ComputableReal::neg(self)
    }
}

fn fmt_rational(r: &BigRational, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if r.is_integer() {
        write!(f, "{}", r.numer())
    } else {
        write!(f, "({}/{})", r.numer(), r.denom())
    }
}

/// Renders in the constant grammar, fully parenthesised.
impl fmt::Display for ComputableReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0.node {
            Node::Rational(r) => fmt_rational(r, f),
            Node::Sqrt(k) => write!(f, "sqrt({k})"),
            Node::Pi => write!(f, "pi"),
            Node::E => write!(f, "e"),
            Node::Liouville(b) => write!(f, "liouville({b})"),
            Node::Add(a, b) => write!(f, "({a} + {b})"),
            Node::Sub(a, b) => write!(f, "({a} - {b})"),
            Node::Mul(a, b) => write!(f, "({a} * {b})"),
            Node::Neg(a) => write!(f, "(0 - {a})"),
            Node::DivRational(a, r) => {
                write!(f, "({a} / ")?;
                fmt_rational(r, f)?;
                write!(f, ")")
            }
        }
    }
}

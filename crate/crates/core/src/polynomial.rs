//! Real polynomials with exact constant coefficients.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::constants::{ComputableReal, FloorResult};
use crate::error::{Error, Result};
use crate::parse;

/// Highest supported degree.
pub const MAX_DEGREE: usize = 16;

/// `P(x) = sum_j c_j x^j`, constant term first. Immutable and shareable.
#[derive(Clone, Debug)]
pub struct RealPolynomial {
    coeffs: Vec<ComputableReal>,
}

impl RealPolynomial {
    /// Trailing coefficients that fold to zero are dropped; an irrational
    /// leading coefficient must be certified nonzero.
    pub fn new(mut coeffs: Vec<ComputableReal>) -> Result<Self> {
        while coeffs.len() > 1 && coeffs.last().and_then(|c| c.as_rational()).is_some_and(|r| r.is_zero()) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(ComputableReal::zero());
        }
        let degree = coeffs.len() - 1;
        if degree > MAX_DEGREE {
            return Err(Error::DegreeTooLarge {
                degree,
                max: MAX_DEGREE,
            });
        }
        let lead = &coeffs[degree];
        if degree > 0 && !lead.is_rational() && lead.signum()? == 0 {
            return Err(Error::InvalidArgument("leading coefficient is zero".into()));
        }
        Ok(Self { coeffs })
    }

    pub fn parse(text: &str) -> Result<Self> {
        Self::new(parse::parse_terms(text)?.into_dense())
    }

    pub fn zero() -> Self {
        Self {
            coeffs: vec![ComputableReal::zero()],
        }
    }

    /// `c * x^degree`.
    pub fn monomial(c: ComputableReal, degree: usize) -> Result<Self> {
        let mut coeffs = vec![ComputableReal::zero(); degree + 1];
        coeffs[degree] = c;
        Self::new(coeffs)
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coefficients(&self) -> &[ComputableReal] {
        &self.coeffs
    }

    /// Coefficient of `x^j`; zero above the degree.
    pub fn coefficient(&self, j: usize) -> ComputableReal {
        self.coeffs.get(j).cloned().unwrap_or_else(ComputableReal::zero)
    }

    /// The coefficient of `x`.
    pub fn linear_coefficient(&self) -> Result<ComputableReal> {
        if self.degree() == 0 {
            return Err(Error::InvalidArgument(
                "degree-0 polynomial has no linear coefficient".into(),
            ));
        }
        Ok(self.coefficient(1))
    }

    pub fn is_rational(&self) -> bool {
        self.coeffs.iter().all(ComputableReal::is_rational)
    }

    /// Exact value `P(n)` as an expression tree in Horner form.
    pub fn eval(&self, n: &BigInt) -> ComputableReal {
        let x = ComputableReal::integer(n.clone());
        let mut acc = self.coeffs[self.degree()].clone();
        for c in self.coeffs[..self.degree()].iter().rev() {
            acc = acc.mul(&x).add(c);
        }
        acc
    }

    /// `P(n)` as a sum of powers, without Horner nesting.
    pub fn eval_powers(&self, n: &BigInt) -> ComputableReal {
        let mut acc = ComputableReal::zero();
        for (j, c) in self.coeffs.iter().enumerate() {
            let p = num_traits::pow(n.clone(), j);
            acc = acc.add(&c.mul(&ComputableReal::integer(p)));
        }
        acc
    }

    /// Exact `floor(P(n))`.
    pub fn floor_eval(&self, n: i64) -> Result<BigInt> {
        Ok(self.certified_floor_at(n)?.value)
    }

    pub fn certified_floor_at(&self, n: i64) -> Result<FloorResult> {
        self.eval(&BigInt::from(n)).certified_floor().map_err(|e| e.at_point(n))
    }

    /// `Q(x) = m * P(d x) / d`: coefficient `j` becomes `m d^(j-1) c_j`.
    pub fn dilate(&self, d: u64, m: u64) -> Self {
        assert!(d > 0 && m > 0, "dilation factors must be positive");
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(j, c)| {
                let scale = if j == 0 {
                    BigRational::new(BigInt::from(m), BigInt::from(d))
                } else {
                    BigRational::from_integer(BigInt::from(m) * num_traits::pow(BigInt::from(d), j - 1))
                };
                c.scale(&scale)
            })
            .collect();
        Self { coeffs }
    }

    /// Same polynomial with the constant term replaced by zero.
    pub fn without_constant(&self) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs[0] = ComputableReal::zero();
        Self { coeffs }
    }

    /// Compiles a certified evaluator for `|n| <= max_abs_n` resolving at
    /// least `frac_bits` bits after the binary point.
    pub fn evaluator(&self, max_abs_n: u64, frac_bits: u32) -> PolyEvaluator {
        PolyEvaluator::new(self, max_abs_n, frac_bits)
    }
}

impl fmt::Display for RealPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (j, c) in self.coeffs.iter().enumerate().rev() {
            if c.as_rational().is_some_and(|r| r.is_zero()) && !(j == 0 && first) {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match j {
                0 => write!(f, "{c}")?,
                1 => write!(f, "{c}*x")?,
                _ => write!(f, "{c}*x^{j}")?,
            }
        }
        Ok(())
    }
}

/// Rational enclosure `[lo, hi] / den` of `P(n)`.
#[derive(Clone, Debug)]
pub struct Enclosure {
    pub lo: BigInt,
    pub hi: BigInt,
    pub den: BigInt,
    /// Exact when the polynomial has only rational coefficients.
    pub exact: bool,
}

/// `P` split into an exact rational part and interval-valued irrational
/// coefficients, all on a common denominator `den_rational * 2^bits`.
///
/// Per-`n` work is a handful of big-integer multiply-adds. Anything the
/// enclosure cannot settle falls back to expression-tree escalation.
#[derive(Clone, Debug)]
pub struct PolyEvaluator {
    poly: RealPolynomial,
    /// Numerators of the rational coefficients over `rat_den`.
    rat_num: Vec<BigInt>,
    rat_den: BigInt,
    /// Lower/upper mantissas of irrational coefficients at scale `2^-bits`.
    irr_lo: Vec<BigInt>,
    irr_hi: Vec<BigInt>,
    has_irrational: bool,
    bits: u32,
    den: BigInt,
}

impl PolyEvaluator {
    pub fn new(poly: &RealPolynomial, max_abs_n: u64, frac_bits: u32) -> Self {
        let k = poly.degree();
        let mut rat_den = BigInt::one();
        for c in poly.coefficients() {
            if let Some(r) = c.as_rational() {
                rat_den = rat_den.lcm(r.denom());
            }
        }
        let n_bits = 64 - max_abs_n.max(1).leading_zeros();
        let bits = frac_bits + k as u32 * n_bits + 8;
        let mut rat_num = Vec::with_capacity(k + 1);
        let mut irr_lo = Vec::with_capacity(k + 1);
        let mut irr_hi = Vec::with_capacity(k + 1);
        let mut has_irrational = false;
        for c in poly.coefficients() {
            match c.as_rational() {
                Some(r) => {
                    rat_num.push(r.numer() * (&rat_den / r.denom()));
                    irr_lo.push(BigInt::zero());
                    irr_hi.push(BigInt::zero());
                }
                None => {
                    has_irrational = true;
                    let iv = c.refine(bits).round_out(-(bits as i64));
                    rat_num.push(BigInt::zero());
                    irr_lo.push(iv.lo().mantissa() << (iv.lo().exponent() + bits as i64) as usize);
                    irr_hi.push(iv.hi().mantissa() << (iv.hi().exponent() + bits as i64) as usize);
                }
            }
        }
        let den = &rat_den << bits as usize;
        Self {
            poly: poly.clone(),
            rat_num,
            rat_den,
            irr_lo,
            irr_hi,
            has_irrational,
            bits,
            den,
        }
    }

    pub fn polynomial(&self) -> &RealPolynomial {
        &self.poly
    }

    /// Encloses `P(n)`; exact when every coefficient is rational.
    pub fn enclose(&self, n: i64) -> Enclosure {
        let x = BigInt::from(n);
        let mut exact = BigInt::zero();
        for c in self.rat_num.iter().rev() {
            exact = exact * &x + c;
        }
        if !self.has_irrational {
            return Enclosure {
                lo: exact.clone(),
                hi: exact,
                den: self.rat_den.clone(),
                exact: true,
            };
        }
        let (lo, hi) = if n >= 0 {
            let mut lo = BigInt::zero();
            let mut hi = BigInt::zero();
            for (l, h) in self.irr_lo.iter().zip(&self.irr_hi).rev() {
                lo = lo * &x + l;
                hi = hi * &x + h;
            }
            (lo, hi)
        } else {
            let mut lo = BigInt::zero();
            let mut hi = BigInt::zero();
            let mut pow = BigInt::one();
            for (l, h) in self.irr_lo.iter().zip(&self.irr_hi) {
                if pow.is_negative() {
                    lo += h * &pow;
                    hi += l * &pow;
                } else {
                    lo += l * &pow;
                    hi += h * &pow;
                }
                pow *= &x;
            }
            (lo, hi)
        };
        let base = exact << self.bits as usize;
        Enclosure {
            lo: &base + lo * &self.rat_den,
            hi: base + hi * &self.rat_den,
            den: self.den.clone(),
            exact: false,
        }
    }

    /// Exact `floor(P(n))`, falling back to escalation when the enclosure straddles an integer.
    pub fn floor(&self, n: i64) -> Result<FloorResult> {
        let e = self.enclose(n);
        if e.exact || e.lo == e.hi {
            let (q, r) = e.lo.div_mod_floor(&e.den);
            return Ok(FloorResult {
                value: q,
                exact_integer: r.is_zero(),
                precision_used: 0,
            });
        }
        let lo = e.lo.div_floor(&e.den);
        let hi = e.hi.div_floor(&e.den);
        if lo == hi {
            return Ok(FloorResult {
                value: lo,
                exact_integer: false,
                precision_used: self.bits,
            });
        }
        self.poly.certified_floor_at(n)
    }

    /// Lower end of the fractional part of `P(n)` in 128-bit fixed point,
    /// with an upper bound on the enclosure width in the same units.
    ///
    /// The value is `frac(P(n))` up to the returned width, modulo 1; it is not
    /// certified against wrap-around at integers, which is harmless for phases.
    pub fn frac_fixed(&self, n: i64) -> (u128, u128) {
        let e = self.enclose(n);
        let r = e.lo.mod_floor(&e.den);
        let lo = to_u128((r << 128usize) / &e.den);
        let width = if e.exact {
            0
        } else {
            let w: BigInt = ((&e.hi - &e.lo) << 128usize) / &e.den + 1;
            to_u128(w.min(BigInt::from(u128::MAX)))
        };
        (lo, width)
    }

    /// Fractional part of `P(n)` in 128-bit fixed point, certified on the
    /// correct side of every integer (escalates when the enclosure straddles one).
    pub fn frac_certified(&self, n: i64) -> Result<u128> {
        let e = self.enclose(n);
        if e.exact || e.lo.div_floor(&e.den) == e.hi.div_floor(&e.den) {
            let r = e.lo.mod_floor(&e.den);
            return Ok(to_u128((r << 128usize) / &e.den));
        }
        let x = self.poly.eval(&BigInt::from(n));
        let iv = x.fractional_part(136).map_err(|err| err.at_point(n))?;
        let fixed = iv.lo().mantissa() << (iv.lo().exponent() + 128).max(0) as usize
            >> (-(iv.lo().exponent() + 128)).max(0) as usize;
        Ok(to_u128(fixed))
    }
}

fn to_u128(x: BigInt) -> u128 {
    use num_traits::ToPrimitive;
    x.to_u128().unwrap_or(if x.is_negative() { 0 } else { u128::MAX })
}

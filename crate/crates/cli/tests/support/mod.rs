//! Independent reference arithmetic for the acceptance checks.
//!
//! Values are big integers at a fixed binary scale with an explicit error
//! bound in units of the last place. None of this shares code with the
//! library: constants use different series, square roots use Newton steps.

#![allow(dead_code)]

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;

/// `value * 2^-scale` with `|true - value| <= err` ulps.
#[derive(Clone, Debug)]
pub struct Fixed {
    pub value: BigInt,
    pub err: BigInt,
    pub scale: u32,
}

impl Fixed {
    fn exact_int(n: &BigInt, scale: u32) -> Self {
        Fixed {
            value: n << scale as usize,
            err: BigInt::zero(),
            scale,
        }
    }

    fn add(&self, o: &Fixed) -> Fixed {
        Fixed {
            value: &self.value + &o.value,
            err: &self.err + &o.err,
            scale: self.scale,
        }
    }

    fn neg(&self) -> Fixed {
        Fixed {
            value: -&self.value,
            err: self.err.clone(),
            scale: self.scale,
        }
    }

    fn mul(&self, o: &Fixed) -> Fixed {
        let s = self.scale as usize;
        let value = (&self.value * &o.value) >> s;
        let cross = self.value.abs() * &o.err + o.value.abs() * &self.err + &self.err * &o.err;
        Fixed {
            value,
            err: (cross >> s) + 2,
            scale: self.scale,
        }
    }

    fn mul_int(&self, n: &BigInt) -> Fixed {
        Fixed {
            value: &self.value * n,
            err: &self.err * n.abs(),
            scale: self.scale,
        }
    }

    /// `self * den / num` for a nonzero rational `num/den`.
    fn div_ratio(&self, num: &BigInt, den: &BigInt) -> Fixed {
        let value = (&self.value * den).div_floor(num);
        let err = (&self.err * den.abs()).div_ceil(&num.abs()) + 1;
        Fixed {
            value,
            err,
            scale: self.scale,
        }
    }

    /// The common floor of the enclosure, if it has one.
    pub fn floor(&self) -> Option<BigInt> {
        let s = self.scale as usize;
        let lo = (&self.value - &self.err) >> s;
        let hi = (&self.value + &self.err) >> s;
        (lo == hi).then_some(lo)
    }

    pub fn to_f64(&self) -> f64 {
        self.value.to_f64().unwrap() / 2f64.powi(self.scale as i32)
    }
}

fn isqrt_newton(n: &BigInt) -> BigInt {
    assert!(!n.is_negative());
    if n.is_zero() {
        return BigInt::zero();
    }
    let mut x = BigInt::one() << (n.bits() as usize).div_ceil(2);
    loop {
        let y = (&x + n / &x) >> 1usize;
        if y >= x {
            return x;
        }
        x = y;
    }
}

/// `floor(2^bits / k)`-based arctangent of `1/k`, error below `terms + 1` ulps.
fn atan_inv(k: u64, bits: u32) -> BigInt {
    let one = BigInt::one() << bits as usize;
    let k2 = BigInt::from(k * k);
    let mut power = &one / k;
    let mut sum = BigInt::zero();
    let mut i = 0u64;
    while !power.is_zero() {
        let term = &power / (2 * i + 1);
        if i % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
        power /= &k2;
        i += 1;
    }
    sum
}

const GUARD: u32 = 64;

fn round_guard(v: BigInt, scale: u32) -> Fixed {
    Fixed {
        value: v >> GUARD as usize,
        err: BigInt::from(2),
        scale,
    }
}

/// Pi from `48 atan(1/18) + 32 atan(1/57) - 20 atan(1/239)`.
pub fn pi_fixed(scale: u32) -> Fixed {
    let b = scale + GUARD;
    let v = atan_inv(18, b) * 48 + atan_inv(57, b) * 32 - atan_inv(239, b) * 20;
    round_guard(v, scale)
}

/// e as `sum 1/j!` evaluated backwards in Horner form.
pub fn e_fixed(scale: u32) -> Fixed {
    let b = scale + GUARD;
    let one = BigInt::one() << b as usize;
    let mut terms = 1u64;
    let mut log2_fact = 0.0f64;
    while log2_fact < b as f64 + 8.0 {
        terms += 1;
        log2_fact += (terms as f64).log2();
    }
    let mut acc = one.clone();
    for j in (1..=terms).rev() {
        acc = &one + acc / j;
    }
    round_guard(acc, scale)
}

pub fn sqrt_fixed(k: u64, scale: u32) -> Fixed {
    let v = isqrt_newton(&(BigInt::from(k) << (2 * (scale + GUARD)) as usize));
    round_guard(v, scale)
}

pub fn liouville_fixed(base: u64, scale: u32) -> Fixed {
    let b = scale + GUARD;
    let one = BigInt::one() << b as usize;
    let mut sum = BigInt::zero();
    let mut fact = 1u32;
    let mut j = 1u32;
    loop {
        let den = num_traits::pow(BigInt::from(base), fact as usize);
        let term = &one / den;
        if term.is_zero() {
            break;
        }
        sum += term;
        j += 1;
        fact *= j;
    }
    round_guard(sum, scale)
}

/// Constant expressions over the textual grammar.
#[derive(Clone, Debug)]
pub enum Expr {
    Rat(i64, i64),
    Sqrt(u64),
    Pi,
    E,
    Liouville(u64),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    /// `a / (num/den)`.
    Div(Box<Expr>, i64, i64),
}

impl Expr {
    pub fn text(&self) -> String {
        match self {
            Expr::Rat(n, d) if *n < 0 => format!("(0 - {}/{})", -n, d),
            Expr::Rat(n, d) => format!("{n}/{d}"),
            Expr::Sqrt(k) => format!("sqrt({k})"),
            Expr::Pi => "pi".into(),
            Expr::E => "e".into(),
            Expr::Liouville(b) => format!("liouville({b})"),
            Expr::Add(a, b) => format!("({} + {})", a.text(), b.text()),
            Expr::Sub(a, b) => format!("({} - {})", a.text(), b.text()),
            Expr::Mul(a, b) => format!("({} * {})", a.text(), b.text()),
            Expr::Div(a, n, d) if *n < 0 => format!("({} / (0 - {}/{}))", a.text(), -n, d),
            Expr::Div(a, n, d) => format!("({} / ({}/{}))", a.text(), n, d),
        }
    }

    pub fn fixed(&self, scale: u32) -> Fixed {
        match self {
            Expr::Rat(n, d) => {
                let v = (BigInt::from(*n) << scale as usize).div_floor(&BigInt::from(*d));
                Fixed {
                    value: v,
                    err: BigInt::one(),
                    scale,
                }
            }
            Expr::Sqrt(k) => sqrt_fixed(*k, scale),
            Expr::Pi => pi_fixed(scale),
            Expr::E => e_fixed(scale),
            Expr::Liouville(b) => liouville_fixed(*b, scale),
            Expr::Add(a, b) => a.fixed(scale).add(&b.fixed(scale)),
            Expr::Sub(a, b) => a.fixed(scale).add(&b.fixed(scale).neg()),
            Expr::Mul(a, b) => a.fixed(scale).mul(&b.fixed(scale)),
            Expr::Div(a, n, d) => a.fixed(scale).div_ratio(&BigInt::from(*n), &BigInt::from(*d)),
        }
    }

    /// Exact value when the expression is rational by construction or by perfect squares.
    pub fn exact(&self) -> Option<BigRational> {
        let r = |n: i64, d: i64| BigRational::new(n.into(), d.into());
        match self {
            Expr::Rat(n, d) => Some(r(*n, *d)),
            Expr::Sqrt(k) => {
                let s = (*k as f64).sqrt().round() as i64;
                (s * s == *k as i64).then(|| r(s, 1))
            }
            Expr::Pi | Expr::E | Expr::Liouville(_) => None,
            Expr::Add(a, b) => Some(a.exact()? + b.exact()?),
            Expr::Sub(a, b) => Some(a.exact()? - b.exact()?),
            Expr::Mul(a, b) => Some(a.exact()? * b.exact()?),
            Expr::Div(a, n, d) => Some(a.exact()? / r(*n, *d)),
        }
    }

    pub fn random(rng: &mut impl Rng, depth: u32, rational_only: bool) -> Expr {
        let leaf = depth == 0 || rng.gen_bool(0.35);
        if leaf {
            let kind = if rational_only { rng.gen_range(0..2) * 5 } else { rng.gen_range(0..6) };
            return match kind {
                0 => {
                    let d = rng.gen_range(1..13);
                    Expr::Rat(rng.gen_range(-30..31), d)
                }
                1 => Expr::Sqrt(rng.gen_range(1..60)),
                2 => Expr::Pi,
                3 => Expr::E,
                4 => Expr::Liouville(rng.gen_range(2..11)),
                _ => {
                    let s: u64 = rng.gen_range(1..12);
                    Expr::Sqrt(s * s)
                }
            };
        }
        let a = Box::new(Expr::random(rng, depth - 1, rational_only));
        match rng.gen_range(0..4) {
            0 => Expr::Add(a, Box::new(Expr::random(rng, depth - 1, rational_only))),
            1 => Expr::Sub(a, Box::new(Expr::random(rng, depth - 1, rational_only))),
            2 => Expr::Mul(a, Box::new(Expr::random(rng, depth - 1, rational_only))),
            _ => {
                let mut n = rng.gen_range(-9..10);
                if n == 0 {
                    n = 7;
                }
                Expr::Div(a, n, rng.gen_range(1..10))
            }
        }
    }
}

/// Reference polynomial: coefficient expressions evaluated once, then summed exactly.
pub struct RefPoly {
    coeffs: Vec<Fixed>,
    exact: Option<Vec<BigRational>>,
}

impl RefPoly {
    pub fn new(coeffs: &[Expr], scale: u32) -> Self {
        let exact: Option<Vec<BigRational>> = coeffs.iter().map(Expr::exact).collect();
        Self {
            coeffs: coeffs.iter().map(|c| c.fixed(scale)).collect(),
            exact,
        }
    }

    /// `floor(P(n))` when the enclosure decides it.
    pub fn floor_at(&self, n: i64) -> Option<BigInt> {
        let x = BigInt::from(n);
        if let Some(ex) = &self.exact {
            let mut acc = BigRational::zero();
            for c in ex.iter().rev() {
                acc = acc * BigRational::from_integer(x.clone()) + c;
            }
            return Some(acc.floor().to_integer());
        }
        let scale = self.coeffs[0].scale;
        let mut total = Fixed::exact_int(&BigInt::zero(), scale);
        let mut power = BigInt::one();
        for c in &self.coeffs {
            total = total.add(&c.mul_int(&power));
            power *= &x;
        }
        total.floor()
    }
}

pub fn gcd_u64(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd_u64(b, a % b)
    }
}

/// `n mod m` for a possibly negative big integer, in `0..m`.
pub fn residue(n: &BigInt, m: u64) -> u64 {
    let r = n % BigInt::from(m);
    let r = if r.sign() == Sign::Minus { r + m } else { r };
    r.to_u64().unwrap()
}

/// Number of distinct prime factors by trial division.
pub fn omega_trial(mut n: u64) -> u32 {
    let mut count = 0;
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            count += 1;
            while n % p == 0 {
                n /= p;
            }
        }
        p += 1;
    }
    count + (n > 1) as u32
}

//! Continued fractions, Liouville witnesses, irrationality-exponent estimates,
//! Weyl-exponent parameters and simultaneous rational approximation.
//!
//! Every comparison against a real constant goes through certified interval
//! enclosures; rational constants are handled exactly.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::constants::{precision_ceiling, ComputableReal, START_PRECISION};
use crate::dyadic::{Dyadic, Interval};
use crate::error::{Error, Result};
use crate::scalar::FieldScalar;

/// Brute-force scan limit for witness searches.
pub const WITNESS_SCAN_LIMIT: u64 = 10_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Convergent {
    pub p: BigInt,
    pub q: BigInt,
}

impl Convergent {
    pub fn to_rational(&self) -> BigRational {
        BigRational::new(self.p.clone(), self.q.clone())
    }
}

/// `a0 + 1/(a1 + 1/(a2 + ...))` with its convergents `p_j / q_j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CFExpansion {
    pub a0: BigInt,
    pub partial_quotients: Vec<BigInt>,
    pub convergents: Vec<Convergent>,
    /// The value is rational and the expansion ended before the requested length.
    pub terminated: bool,
}

impl CFExpansion {
    fn from_quotients(quotients: Vec<BigInt>, terminated: bool) -> Self {
        let mut convergents = Vec::with_capacity(quotients.len());
        let (mut p0, mut q0) = (BigInt::one(), BigInt::zero());
        let (mut p1, mut q1) = (quotients[0].clone(), BigInt::one());
        convergents.push(Convergent {
            p: p1.clone(),
            q: q1.clone(),
        });
        for a in &quotients[1..] {
            let p2 = a * &p1 + &p0;
            let q2 = a * &q1 + &q0;
            (p0, q0, p1, q1) = (p1, q1, p2, q2);
            convergents.push(Convergent {
                p: p1.clone(),
                q: q1.clone(),
            });
        }
        let mut it = quotients.into_iter();
        let a0 = it.next().unwrap_or_default();
        Self {
            a0,
            partial_quotients: it.collect(),
            convergents,
            terminated,
        }
    }

    /// Number of quotients including `a0`.
    pub fn len(&self) -> usize {
        1 + self.partial_quotients.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

fn euclid_quotients(r: &BigRational, terms: usize) -> (Vec<BigInt>, bool) {
    let mut num = r.numer().clone();
    let mut den = r.denom().clone();
    let mut out = Vec::new();
    while out.len() < terms {
        let (a, rem) = num.div_mod_floor(&den);
        out.push(a);
        if rem.is_zero() {
            return (out, true);
        }
        num = den;
        den = rem;
    }
    (out, false)
}

/// Quotients shared by every real in `[lo, hi]`.
fn common_quotients(lo: BigRational, hi: BigRational, terms: usize) -> Vec<BigInt> {
    let (mut lo, mut hi) = (lo, hi);
    let mut out = Vec::new();
    while out.len() < terms {
        let a = lo.floor();
        if a != hi.floor() {
            break;
        }
        out.push(a.to_integer());
        let rlo = &lo - &a;
        let rhi = &hi - &a;
        if rlo.is_zero() {
            break;
        }
        // x -> 1/(x - a) reverses order.
        (lo, hi) = (rhi.recip(), rlo.recip());
    }
    out
}

/// First `terms` quotients (including `a0`) of the simple continued fraction of `alpha`.
pub fn continued_fraction(alpha: &ComputableReal, terms: usize) -> Result<CFExpansion> {
    if terms == 0 {
        return Err(Error::InvalidArgument("terms must be at least 1".into()));
    }
    if let Some(r) = alpha.as_rational() {
        let (q, done) = euclid_quotients(r, terms);
        return Ok(CFExpansion::from_quotients(q.clone(), done && q.len() <= terms));
    }
    let ceiling = precision_ceiling();
    let mut bits = START_PRECISION.max(8 * terms as u32).min(ceiling);
    loop {
        let iv = alpha.refine(bits);
        let q = common_quotients(iv.lo().to_rational(), iv.hi().to_rational(), terms);
        if q.len() == terms {
            return Ok(CFExpansion::from_quotients(q, false));
        }
        if bits >= ceiling {
            return Err(Error::PrecisionExhausted {
                precision: bits,
                context: format!("expanding {alpha} to {terms} partial quotients"),
            });
        }
        bits = (bits * 2).min(ceiling);
    }
}

/// Certified bound on `|q alpha - p|` relative to a threshold.
enum Residual {
    Within(BigRational),
    Beyond,
}

/// Cached enclosure of one constant for repeated residual checks.
struct Enclosed<'a> {
    alpha: &'a ComputableReal,
    iv: Interval,
    bits: u32,
}

impl<'a> Enclosed<'a> {
    fn new(alpha: &'a ComputableReal, bits: u32) -> Self {
        Self {
            alpha,
            iv: alpha.refine(bits),
            bits,
        }
    }

    fn nearest(&self, q: &BigInt) -> BigInt {
        let m = self.iv.midpoint().mul_int(q).add(&Dyadic::new(BigInt::one(), -1));
        m.floor()
    }

    /// Decides `|q alpha - p| <= thr`, escalating precision when the cached enclosure cannot.
    fn residual(&self, q: &BigInt, p: &BigInt, thr: &BigRational) -> Result<Residual> {
        if let Some(a) = self.alpha.as_rational() {
            let r = (a * BigRational::from_integer(q.clone()) - BigRational::from_integer(p.clone())).abs();
            return Ok(if r <= *thr { Residual::Within(r) } else { Residual::Beyond });
        }
        let ceiling = precision_ceiling().max(self.bits);
        let mut bits = self.bits;
        let mut owned;
        let mut iv = &self.iv;
        loop {
            let pd = Dyadic::from_int(p.clone());
            let lo = iv.lo().mul_int(q).sub(&pd).to_rational();
            let hi = iv.hi().mul_int(q).sub(&pd).to_rational();
            let upper = lo.abs().max(hi.abs());
            if upper <= *thr {
                return Ok(Residual::Within(upper));
            }
            let lower = if lo.is_negative() && hi.is_positive() {
                BigRational::zero()
            } else {
                lo.abs().min(hi.abs())
            };
            if lower > *thr {
                return Ok(Residual::Beyond);
            }
            if bits >= ceiling {
                return Err(Error::PrecisionExhausted {
                    precision: bits,
                    context: format!("bounding |{q} * {} - {p}|", self.alpha),
                });
            }
            bits = (bits * 2).min(ceiling);
            owned = self.alpha.refine(bits);
            iv = &owned;
        }
    }
}

/// A pair `(p, q)`, `q > 1`, with `|alpha - p/q| <= err <= q^-n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LiouvilleWitness {
    pub n: u32,
    pub p: BigInt,
    pub q: BigInt,
    /// Certified upper bound on `|alpha - p/q|`, exact for rational `alpha`.
    pub err: BigRational,
}

impl LiouvilleWitness {
    /// `err * q^n`, at most 1; smaller is a stronger witness.
    pub fn margin(&self) -> BigRational {
        &self.err * BigRational::from_integer(num_traits::pow(self.q.clone(), self.n as usize))
    }
}

fn bit_len(x: &BigInt) -> u32 {
    x.bits() as u32
}

/// Searches `2 <= q <= q_max` for `|alpha - p/q| <= q^-n`.
///
/// Candidates are the continued-fraction convergents followed by a direct scan
/// of `q <= min(q_max, 10^4)` with `p` the nearest integer to `q alpha`. Among
/// all certified candidates the one with the smallest `q^n |alpha - p/q|` is
/// returned (smaller `q` on ties). `None` means no witness with `q <= q_max`.
pub fn liouville_witness(alpha: &ComputableReal, n: u32, q_max: &BigInt) -> Result<Option<LiouvilleWitness>> {
    if n == 0 {
        return Err(Error::InvalidArgument("exponent n must be at least 1".into()));
    }
    let two = BigInt::from(2);
    if *q_max < two {
        return Err(Error::InvalidArgument("q_max must be at least 2".into()));
    }
    let mut candidates: Vec<(BigInt, BigInt)> = Vec::new();
    for c in convergents_up_to(alpha, q_max)? {
        if c.q >= two {
            candidates.push((c.p, c.q));
        }
    }
    let scan_hi = q_max.to_u64().unwrap_or(u64::MAX).min(WITNESS_SCAN_LIMIT);
    let bits = START_PRECISION + n * bit_len(q_max).min(4096 / n.max(1)) + 16;
    let enc = Enclosed::new(alpha, bits.min(precision_ceiling().max(START_PRECISION)));
    for q in 2..=scan_hi {
        let q = BigInt::from(q);
        let p = enc.nearest(&q);
        candidates.push((p, q));
    }

    let mut best: Option<LiouvilleWitness> = None;
    for (p, q) in candidates {
        // |alpha - p/q| <= q^-n  <=>  |q alpha - p| <= q^(1-n)
        let thr = BigRational::new(BigInt::one(), num_traits::pow(q.clone(), n as usize - 1));
        if let Residual::Within(r) = enc.residual(&q, &p, &thr)? {
            let w = LiouvilleWitness {
                n,
                err: r / BigRational::from_integer(q.clone()),
                p,
                q,
            };
            let better = match &best {
                None => true,
                Some(b) => match w.margin().cmp(&b.margin()) {
                    Ordering::Less => true,
                    Ordering::Equal => w.q < b.q,
                    Ordering::Greater => false,
                },
            };
            if better {
                best = Some(w);
            }
        }
    }
    Ok(best)
}

/// Convergents with `q <= q_max` (the whole expansion for rationals).
pub fn convergents_up_to(alpha: &ComputableReal, q_max: &BigInt) -> Result<Vec<Convergent>> {
    let mut terms = 8;
    loop {
        let cf = continued_fraction(alpha, terms)?;
        let done = cf.terminated || cf.convergents.last().is_some_and(|c| &c.q > q_max);
        if done {
            return Ok(cf.convergents.into_iter().filter(|c| &c.q <= q_max).collect());
        }
        terms *= 2;
    }
}

/// Empirical irrationality exponent `-ln|alpha - p/q| / ln q` at one convergent.
#[derive(Clone, Debug, PartialEq)]
pub struct ExponentEstimate {
    /// Position in the estimate sequence (convergents with `q >= 2`, from 0).
    pub index: usize,
    pub p: BigInt,
    pub q: BigInt,
    /// `+inf` when `p/q` equals `alpha` exactly.
    pub estimate: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExponentSequence {
    pub estimates: Vec<ExponentEstimate>,
    /// `alpha` is rational and its expansion ended early.
    pub terminated: bool,
}

/// Relative accuracy of each `|alpha - p/q|`, in bits.
const ESTIMATE_REL_BITS: i64 = 40;

fn ln_abs_distance(alpha: &ComputableReal, c: &Convergent) -> Result<f64> {
    let target = c.to_rational();
    if let Some(a) = alpha.as_rational() {
        let d = (a - &target).abs();
        if d.is_zero() {
            return Ok(f64::NEG_INFINITY);
        }
        let lnum = Dyadic::from_int(d.numer().clone()).ln_abs();
        let lden = Dyadic::from_int(d.denom().clone()).ln_abs();
        return Ok(lnum - lden);
    }
    let ceiling = precision_ceiling();
    let mut bits = (2 * bit_len(&c.q) + 64).max(START_PRECISION).min(ceiling);
    loop {
        let iv = alpha.refine(bits);
        let lo = iv.lo().to_rational() - &target;
        let hi = iv.hi().to_rational() - &target;
        if lo.signum() == hi.signum() && !lo.is_zero() {
            let (a, b) = (lo.abs(), hi.abs());
            let small = a.clone().min(b.clone());
            let big = a.max(b);
            // Stop once (big - small) / small < 2^-ESTIMATE_REL_BITS.
            if (&big - &small) * BigRational::from_integer(BigInt::one() << ESTIMATE_REL_BITS as usize) < small {
                let lnum = Dyadic::from_int(small.numer().clone()).ln_abs();
                let lden = Dyadic::from_int(small.denom().clone()).ln_abs();
                return Ok(lnum - lden);
            }
        }
        if bits >= ceiling {
            return Err(Error::PrecisionExhausted {
                precision: bits,
                context: format!("measuring |{alpha} - {}/{}|", c.p, c.q),
            });
        }
        bits = (bits * 2).min(ceiling);
    }
}

/// Estimates for every convergent with `q >= 2` among the first `terms`.
pub fn irrationality_exponent_estimate(alpha: &ComputableReal, terms: usize) -> Result<ExponentSequence> {
    if terms < 2 {
        return Err(Error::InvalidArgument("at least two terms are required".into()));
    }
    let cf = continued_fraction(alpha, terms)?;
    let mut estimates = Vec::new();
    for c in cf.convergents.iter().filter(|c| c.q > BigInt::one()) {
        let ln_err = ln_abs_distance(alpha, c)?;
        let ln_q = Dyadic::from_int(c.q.clone()).ln_abs();
        estimates.push(ExponentEstimate {
            index: estimates.len(),
            p: c.p.clone(),
            q: c.q.clone(),
            estimate: -ln_err / ln_q,
        });
    }
    Ok(ExponentSequence {
        estimates,
        terminated: cf.terminated,
    })
}

/// The exponent bundle `(omega, k, delta, rho, tau, X0)` for Weyl-sum decay.
#[derive(Clone, Debug, PartialEq)]
pub struct WeylParams<T> {
    pub omega: T,
    pub k: u32,
    pub delta: T,
    pub rho: T,
    pub tau: T,
    pub x0: T,
}

impl<T: FieldScalar> WeylParams<T> {
    /// `delta < 1/(omega+1)`, `rho > 0`, `tau^-1 >= 4k(k-1)` and `delta > k tau`.
    pub fn satisfies_invariants(&self) -> bool {
        let one = T::one();
        let k = T::from_u32(self.k).expect("degree fits the scalar");
        let four_kk = T::from_u32(4 * self.k * (self.k - 1)).expect("fits");
        let zero = T::zero();
        self.delta < one.clone() / (self.omega.clone() + one.clone())
            && self.rho > zero
            && self.tau > T::zero()
            && one / self.tau.clone() >= four_kk
            && self.delta > k * self.tau.clone()
    }

    /// Largest admissible frequency `X^rho`.
    pub fn frequency_limit(&self, x: f64) -> f64 {
        x.powf(self.rho.to_f64_lossy())
    }

    /// Exponent `1 - tau` the Weyl sums must stay below.
    pub fn decay_exponent(&self) -> f64 {
        1.0 - self.tau.to_f64_lossy()
    }
}

/// Parameters with `delta = 1/(2(omega+1))`, `rho = (1 - (omega+1) delta)/(2 omega)`,
/// `tau = delta/(2k(k-1))` and `X0 = 1`.
pub fn weyl_exponent_params<T: FieldScalar>(omega: T, k: u32) -> Result<WeylParams<T>> {
    let one = T::one();
    let two = one.clone() + one.clone();
    let delta = one.clone() / (two.clone() * (omega.clone() + one.clone()));
    weyl_params_with_delta(omega, k, delta)
}

/// As [`weyl_exponent_params`] with an explicit `delta < min(1/(omega+1), 1/2)`.
pub fn weyl_params_with_delta<T: FieldScalar>(omega: T, k: u32, delta: T) -> Result<WeylParams<T>> {
    if k < 2 {
        return Err(Error::InvalidArgument(format!(
            "degree k = {k}: the Weyl-exponent calculus needs k >= 2"
        )));
    }
    if omega <= T::zero() {
        return Err(Error::InvalidArgument("omega must be positive".into()));
    }
    let one = T::one();
    let two = one.clone() + one.clone();
    if delta <= T::zero() || delta >= one.clone() / (omega.clone() + one.clone()) {
        return Err(Error::InvalidArgument("delta must lie in (0, 1/(omega+1))".into()));
    }
    let rho = (one.clone() - (omega.clone() + one.clone()) * delta.clone()) / (two.clone() * omega.clone());
    let kk = T::from_u32(2 * k * (k - 1)).expect("fits");
    let tau = delta.clone() / kk;
    let params = WeylParams {
        omega,
        k,
        delta,
        rho,
        tau,
        x0: one,
    };
    if !params.satisfies_invariants() {
        return Err(Error::InvalidArgument(
            "delta above 1/2 gives tau^-1 < 4k(k-1)".into(),
        ));
    }
    Ok(params)
}

/// `q` and integers `a_j` with `|q alpha_j - a_j| <= X^(delta - j)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimultaneousApprox {
    pub q: u64,
    pub a: Vec<BigInt>,
}

/// Smallest `1 <= q <= X^delta` with `|q alpha_j - a_j| <= X^(delta-j)` for all
/// `j = 1..k`, taking `a_j` nearest to `q alpha_j`.
pub fn simultaneous_approx_search(
    alphas: &[ComputableReal],
    x: f64,
    delta: f64,
) -> Result<Option<SimultaneousApprox>> {
    if !(x > 1.0) || !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidArgument("need X > 1 and 0 < delta < 1".into()));
    }
    let q_max = x.powf(delta).floor() as u64;
    let q_bits = 64 - q_max.max(1).leading_zeros();
    let mut thresholds = Vec::with_capacity(alphas.len());
    let mut encs = Vec::with_capacity(alphas.len());
    for (i, a) in alphas.iter().enumerate() {
        let thr = x.powf(delta - (i + 1) as f64);
        let thr_d = Dyadic::from_f64(thr)
            .ok_or_else(|| Error::InvalidArgument(format!("threshold X^(delta-{}) is not finite", i + 1)))?;
        let need = (-thr.log2()).max(0.0).ceil() as u32;
        thresholds.push(thr_d.to_rational());
        encs.push(Enclosed::new(a, START_PRECISION + q_bits + need));
    }
    let hit = (1..=q_max).into_par_iter().map(|q| -> Result<Option<SimultaneousApprox>> {
        let qb = BigInt::from(q);
        let mut a = Vec::with_capacity(encs.len());
        for (enc, thr) in encs.iter().zip(&thresholds) {
            let p = enc.nearest(&qb);
            match enc.residual(&qb, &p, thr)? {
                Residual::Within(_) => a.push(p),
                Residual::Beyond => return Ok(None),
            }
        }
        Ok(Some(SimultaneousApprox { q, a }))
    });
    // find_first keeps the smallest q regardless of scheduling.
    match hit.find_first(|r| !matches!(r, Ok(None))) {
        Some(r) => r,
        None => Ok(None),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(s: &str) -> ComputableReal {
        ComputableReal::parse(s).unwrap()
    }

    fn ints(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn sqrt2_expansion() {
        let cf = continued_fraction(&c("sqrt(2)"), 4).unwrap();
        assert_eq!(cf.a0, BigInt::from(1));
        assert_eq!(cf.partial_quotients, ints(&[2, 2, 2]));
        let pq: Vec<(i64, i64)> = cf
            .convergents
            .iter()
            .map(|c| (c.p.to_i64().unwrap(), c.q.to_i64().unwrap()))
            .collect();
        assert_eq!(pq, vec![(1, 1), (3, 2), (7, 5), (17, 12)]);
        assert!(!cf.terminated);
    }

    #[test]
    fn rational_expansion_terminates() {
        let cf = continued_fraction(&c("7/3"), 10).unwrap();
        assert_eq!(cf.a0, BigInt::from(2));
        assert_eq!(cf.partial_quotients, ints(&[3]));
        assert!(cf.terminated);
        let cf = continued_fraction(&c("-7/3"), 10).unwrap();
        assert_eq!(cf.a0, BigInt::from(-3));
        assert_eq!(cf.partial_quotients, ints(&[1, 2]));
    }

    #[test]
    fn liouville_expansion_prefix() {
        let cf = continued_fraction(&c("liouville(10)"), 8).unwrap();
        assert_eq!(cf.a0, BigInt::zero());
        assert_eq!(&cf.partial_quotients[..6], &ints(&[9, 11, 99, 1, 10, 9])[..]);
        assert_eq!(cf.partial_quotients[6], BigInt::from(999_999_999_999i64));
        assert_eq!(cf.convergents[6].q, BigInt::from(1_000_000));
    }

    #[test]
    fn witness_examples() {
        let w = liouville_witness(&c("liouville(10)"), 2, &BigInt::from(1000)).unwrap().unwrap();
        assert_eq!((w.p, w.q), (BigInt::from(11), BigInt::from(100)));
        let w = liouville_witness(&c("sqrt(2)"), 3, &BigInt::from(1000)).unwrap().unwrap();
        assert_eq!((w.p.clone(), w.q.clone()), (BigInt::from(3), BigInt::from(2)));
        assert!(w.err <= BigRational::new(1.into(), 8.into()));
        assert!(liouville_witness(&c("sqrt(2)"), 4, &BigInt::from(1_000_000)).unwrap().is_none());
    }

    #[test]
    fn rational_alpha_always_has_witness() {
        let w = liouville_witness(&c("3/7"), 9, &BigInt::from(100)).unwrap().unwrap();
        assert!(w.err.is_zero());
        let w = liouville_witness(&c("5"), 20, &BigInt::from(2)).unwrap().unwrap();
        assert_eq!((w.p, w.q), (BigInt::from(10), BigInt::from(2)));
    }

    #[test]
    fn exponent_estimates_for_sqrt2() {
        let seq = irrationality_exponent_estimate(&c("sqrt(2)"), 6).unwrap();
        let e = seq.estimates.iter().find(|e| e.q == BigInt::from(12)).unwrap();
        assert!((e.estimate - 2.418763295747528).abs() < 1e-9);
    }

    #[test]
    fn weyl_params_examples() {
        let p = weyl_exponent_params(2.0f64, 2).unwrap();
        assert!((p.delta - 1.0 / 6.0).abs() < 1e-15);
        assert!((p.rho - 1.0 / 8.0).abs() < 1e-15);
        assert!((p.tau - 1.0 / 24.0).abs() < 1e-15);
        assert!(p.satisfies_invariants());
        let r = |n: i64, d: i64| BigRational::new(n.into(), d.into());
        let e = weyl_exponent_params(r(1, 1), 2).unwrap();
        assert_eq!((e.delta.clone(), e.rho.clone(), e.tau.clone()), (r(1, 4), r(1, 4), r(1, 16)));
        assert!(e.satisfies_invariants());
        assert!(weyl_exponent_params(2.0f64, 1).is_err());
        assert!(weyl_exponent_params(0.0f64, 3).is_err());
    }

    #[test]
    fn simultaneous_examples() {
        let got = simultaneous_approx_search(&[c("1/2"), c("1/3")], 100.0, 0.5).unwrap().unwrap();
        assert_eq!(got.q, 6);
        assert_eq!(got.a, ints(&[3, 2]));
        let got = simultaneous_approx_search(&[c("0"), c("0"), c("0")], 50.0, 0.3).unwrap().unwrap();
        assert_eq!(got.q, 1);
        assert_eq!(got.a, ints(&[0, 0, 0]));
        let got = simultaneous_approx_search(&[c("sqrt(2)")], 1e4, 0.5).unwrap().unwrap();
        assert_eq!((got.q, got.a.clone()), (70, ints(&[99])));
        assert!(simultaneous_approx_search(&[c("sqrt(2)")], 1e4, 0.2).unwrap().is_none());
    }
}

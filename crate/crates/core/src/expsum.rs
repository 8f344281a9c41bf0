//! Weyl sums `sum_{x <= X} e(m P(d x) / d)`, star discrepancy and the explicit
//! Erdős–Turán bound.
//!
//! Phases come from [`PolyEvaluator`] as 128-bit fixed-point fractional parts.
//! Since `e(t)` has period 1 the phase only matters modulo 1, so frequency `m`
//! phases are obtained from the `m = 1` phases by wrapping multiplication.

use std::ops::RangeInclusive;

use rayon::prelude::*;

use crate::constants::ComputableReal;
use crate::error::{Error, Result};
use crate::polynomial::{PolyEvaluator, RealPolynomial};
use crate::scalar::Real;

/// Terms per parallel block. Fixed so results do not depend on the thread count.
pub const BLOCK: usize = 4096;

/// Bits resolved below the binary point of each phase, before frequency scaling.
const PHASE_BITS: u32 = 64;

/// One Weyl sum with its normalised size `log|s| / log X`.
#[derive(Clone, Debug, PartialEq)]
pub struct WeylSumValue<F> {
    pub m: u64,
    pub d: u64,
    pub x: u64,
    pub re: F,
    pub im: F,
    pub magnitude: F,
    pub exponent: F,
}

impl<F: Real> WeylSumValue<F> {
    fn new(m: u64, d: u64, x: u64, re: F, im: F) -> Self {
        let magnitude = re.hypot(im);
        let mut v = Self {
            m,
            d,
            x,
            re,
            im,
            magnitude,
            exponent: F::zero(),
        };
        v.exponent = sum_exponent(&v);
        v
    }
}

/// `log(magnitude) / log(X)`; `-inf` for a vanishing sum and NaN when `X = 1`.
pub fn sum_exponent<F: Real>(s: &WeylSumValue<F>) -> F {
    if s.magnitude.is_zero() {
        return F::neg_infinity();
    }
    let x = F::from_u64(s.x).unwrap_or_else(F::infinity);
    if x <= F::one() {
        return F::nan();
    }
    s.magnitude.ln() / x.ln()
}

/// Compensated (Neumaier) accumulator.
#[derive(Clone, Copy, Debug)]
struct Compensated<F> {
    sum: F,
    carry: F,
}

impl<F: Real> Compensated<F> {
    fn new() -> Self {
        Self {
            sum: F::zero(),
            carry: F::zero(),
        }
    }

    fn add(&mut self, v: F) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.carry = self.carry + ((self.sum - t) + v);
        } else {
            self.carry = self.carry + ((v - t) + self.sum);
        }
        self.sum = t;
    }

    fn value(&self) -> F {
        self.sum + self.carry
    }
}

/// `e(phase)` for a phase in units of `2^-128` turns.
fn unit<F: Real>(phase: u128) -> (F, F) {
    // Centre on [-1/2, 1/2) so the angle stays small.
    let turns = ((phase as i128) >> 64) as f64 / 18_446_744_073_709_551_616.0;
    let angle = F::from_f64_lossy(turns) * (F::PI() + F::PI());
    let (s, c) = angle.sin_cos();
    (c, s)
}

fn sum_units<F: Real>(phases: impl Iterator<Item = u128>) -> (F, F) {
    let mut re = Compensated::new();
    let mut im = Compensated::new();
    for p in phases {
        let (c, s) = unit::<F>(p);
        re.add(c);
        im.add(s);
    }
    (re.value(), im.value())
}

/// Sums fixed-size blocks independently, then combines block totals in order.
fn blocked<F: Real>(n: u64, block: impl Fn(u64, u64) -> (F, F) + Sync) -> (F, F) {
    let starts: Vec<u64> = (1..=n).step_by(BLOCK).collect();
    let partial: Vec<(F, F)> = starts
        .par_iter()
        .map(|&a| block(a, (a + BLOCK as u64 - 1).min(n)))
        .collect();
    let mut re = Compensated::new();
    let mut im = Compensated::new();
    for (r, i) in partial {
        re.add(r);
        im.add(i);
    }
    (re.value(), im.value())
}

fn check_args(d: u64, m: u64, x: u64) -> Result<()> {
    if d == 0 || m == 0 {
        return Err(Error::InvalidArgument("d and m must be positive".into()));
    }
    if x == 0 {
        return Err(Error::InvalidArgument("X must be at least 1".into()));
    }
    Ok(())
}

fn phase_evaluator(p: &RealPolynomial, d: u64, m: u64, x: u64, extra_bits: u32) -> PolyEvaluator {
    p.dilate(d, m).without_constant().evaluator(x, PHASE_BITS + extra_bits)
}

/// `s_m(X) = sum_{x=1}^{X} e(m P(d x) / d)` with the constant term of the
/// dilated polynomial dropped, summed in parallel blocks.
pub fn weyl_sum<F: Real>(p: &RealPolynomial, d: u64, m: u64, x: u64) -> Result<WeylSumValue<F>> {
    check_args(d, m, x)?;
    let ev = phase_evaluator(p, d, m, x, 0);
    let (re, im) = blocked(x, |a, b| sum_units((a..=b).map(|n| ev.frac_fixed(n as i64).0)));
    Ok(WeylSumValue::new(m, d, x, re, im))
}

/// [`weyl_sum`] accumulated serially in ascending `x`; the reference order.
pub fn weyl_sum_serial<F: Real>(p: &RealPolynomial, d: u64, m: u64, x: u64) -> Result<WeylSumValue<F>> {
    check_args(d, m, x)?;
    let ev = phase_evaluator(p, d, m, x, 0);
    let (re, im) = sum_units((1..=x).map(|n| ev.frac_fixed(n as i64).0));
    Ok(WeylSumValue::new(m, d, x, re, im))
}

/// `f(alpha; X) = sum_{n=1}^{X} e(alpha_1 n + ... + alpha_k n^k)`.
pub fn weyl_sum_general<F: Real>(alphas: &[ComputableReal], x: u64) -> Result<WeylSumValue<F>> {
    if alphas.is_empty() {
        return Err(Error::InvalidArgument("at least one coefficient is required".into()));
    }
    let mut coeffs = Vec::with_capacity(alphas.len() + 1);
    coeffs.push(ComputableReal::zero());
    coeffs.extend_from_slice(alphas);
    weyl_sum(&RealPolynomial::new(coeffs)?, 1, 1, x)
}

/// `m = 1` phases of `P(d x)/d` without constant term, for `x = 1..=X`.
fn base_phases(p: &RealPolynomial, d: u64, x: u64, m_max: u64) -> Vec<u128> {
    let extra = 64 - m_max.max(1).leading_zeros();
    let ev = phase_evaluator(p, d, 1, x, extra);
    let mut out = vec![0u128; x as usize];
    out.par_chunks_mut(BLOCK).enumerate().for_each(|(b, chunk)| {
        let start = (b * BLOCK) as i64 + 1;
        for (i, slot) in chunk.iter_mut().enumerate() {
            *slot = ev.frac_fixed(start + i as i64).0;
        }
    });
    out
}

fn sums_from_phases<F: Real>(phases: &[u128], d: u64, ms: RangeInclusive<u64>) -> Vec<WeylSumValue<F>> {
    let x = phases.len() as u64;
    ms.map(|m| {
        let (re, im) = blocked(x, |a, b| {
            sum_units(phases[(a - 1) as usize..b as usize].iter().map(|&p| p.wrapping_mul(m as u128)))
        });
        WeylSumValue::new(m, d, x, re, im)
    })
    .collect()
}

/// `s_m(X)` for every `m` in `ms`, sharing one pass of phase evaluation.
pub fn weyl_sums<F: Real>(
    p: &RealPolynomial,
    d: u64,
    ms: RangeInclusive<u64>,
    x: u64,
) -> Result<Vec<WeylSumValue<F>>> {
    check_args(d, (*ms.start()).max(1), x)?;
    if *ms.start() == 0 {
        return Err(Error::InvalidArgument("frequencies start at m = 1".into()));
    }
    if ms.is_empty() {
        return Ok(Vec::new());
    }
    let phases = base_phases(p, d, x, *ms.end());
    Ok(sums_from_phases(&phases, d, ms))
}

/// `D*_N = max_i max(i/N - u_(i), u_(i) - (i-1)/N)` over the sorted sample.
pub fn star_discrepancy<F: Real>(points: &[F]) -> Result<F> {
    if points.is_empty() {
        return Err(Error::InvalidArgument("star discrepancy of an empty sample".into()));
    }
    if let Some(bad) = points.iter().find(|&&u| !(u >= F::zero() && u < F::one())) {
        return Err(Error::InvalidArgument(format!("point {bad} is outside [0, 1)")));
    }
    let mut sorted = points.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("points are finite"));
    let n = F::from_usize(sorted.len()).expect("sample size fits");
    let mut worst = F::zero();
    for (i, &u) in sorted.iter().enumerate() {
        let below = F::from_usize(i).unwrap() / n;
        let above = F::from_usize(i + 1).unwrap() / n;
        worst = worst.max(above - u).max(u - below);
    }
    Ok(worst)
}

/// Star discrepancy of the phases `frac(P(d x)/d)`, `x <= X/d`, against the
/// Erdős–Turán bound `D* <= 1/(T+1) + (3/N) sum_{m<=T} |s_m|/m`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscrepancyReport<F> {
    pub d: u64,
    pub x: u64,
    /// Sample size `floor(X/d)`.
    pub n: u64,
    pub t: u64,
    pub d_star: F,
    pub et_bound: F,
    /// `|s_m(X/d)| / m` for `m = 1..=T`.
    pub weyl_terms: Vec<F>,
}

impl<F: Real> DiscrepancyReport<F> {
    /// `sum_{m<=T} |s_m| / m`.
    pub fn weyl_total(&self) -> F {
        let mut acc = Compensated::new();
        for &w in &self.weyl_terms {
            acc.add(w);
        }
        acc.value()
    }

    /// Count-level bound `(X/d)/(T+1) + 3 sum |s_m|/m + 1` on `|A_d(X) - X/d^2|`.
    pub fn count_bound(&self) -> F {
        let xd = F::from_f64_lossy(self.x as f64 / self.d as f64);
        let three = F::from_u8(3).unwrap();
        xd / F::from_u64(self.t + 1).unwrap() + three * self.weyl_total() + F::one()
    }
}

/// Builds the [`DiscrepancyReport`] for `P`, dilation `d`, range `X` and cutoff `T`.
pub fn erdos_turan_bound<F: Real>(p: &RealPolynomial, d: u64, x: u64, t: u64) -> Result<DiscrepancyReport<F>> {
    if t == 0 {
        return Err(Error::InvalidArgument("cutoff T must be at least 1".into()));
    }
    if d == 0 || x / d == 0 {
        return Err(Error::InvalidArgument("need d >= 1 and X/d >= 1".into()));
    }
    let n = x / d;
    let ev = p.dilate(d, 1).evaluator(n, PHASE_BITS);
    let scale = F::from_f64_lossy(2f64.powi(-64));
    let points: Vec<F> = (1..=n as i64)
        .into_par_iter()
        .map(|k| {
            ev.frac_certified(k)
                .map(|f| F::from_u64((f >> 64) as u64).unwrap() * scale)
                // Rounding to F can reach 1.0; wrap it back.
                .map(|u| if u >= F::one() { F::zero() } else { u })
        })
        .collect::<Result<_>>()?;
    let d_star = star_discrepancy(&points)?;

    let phases = base_phases(p, d, n, t);
    let weyl_terms: Vec<F> = sums_from_phases::<F>(&phases, d, 1..=t)
        .into_iter()
        .map(|s| s.magnitude / F::from_u64(s.m).unwrap())
        .collect();
    let mut report = DiscrepancyReport {
        d,
        x,
        n,
        t,
        d_star,
        et_bound: F::zero(),
        weyl_terms,
    };
    let nf = F::from_u64(n).unwrap();
    let three = F::from_u8(3).unwrap();
    report.et_bound = F::one() / F::from_u64(t + 1).unwrap() + three * report.weyl_total() / nf;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(s: &str) -> RealPolynomial {
        RealPolynomial::parse(s).unwrap()
    }

    #[test]
    fn integral_phases_sum_to_count() {
        let s: WeylSumValue<f64> = weyl_sum(&poly("x"), 1, 5, 7).unwrap();
        assert!((s.re - 7.0).abs() < 1e-12 && s.im.abs() < 1e-12);
        assert!((s.exponent - 1.0).abs() < 1e-12);
    }

    #[test]
    fn quarter_turns_cancel() {
        let s: WeylSumValue<f64> = weyl_sum(&poly("x/4"), 1, 1, 4).unwrap();
        assert!(s.magnitude < 1e-12);
        assert_eq!(sum_exponent(&WeylSumValue::<f64>::new(1, 1, 4, 0.0, 0.0)), f64::NEG_INFINITY);
    }

    #[test]
    fn general_sum_examples() {
        let z = [ComputableReal::zero(), ComputableReal::zero()];
        let s: WeylSumValue<f64> = weyl_sum_general(&z, 9).unwrap();
        assert!((s.re - 9.0).abs() < 1e-12 && s.im.abs() < 1e-12);
        let h = [ComputableReal::parse("1/2").unwrap()];
        let s: WeylSumValue<f64> = weyl_sum_general(&h, 2).unwrap();
        assert!(s.magnitude < 1e-12);
    }

    #[test]
    fn dilated_coefficients_agree() {
        let p = poly("sqrt(2)*x^2 + x/3");
        let a: WeylSumValue<f64> = weyl_sum(&p, 2, 3, 100).unwrap();
        let q = p.dilate(2, 3);
        let b: WeylSumValue<f64> = weyl_sum_general(&q.coefficients()[1..], 100).unwrap();
        assert!((a.magnitude - b.magnitude).abs() < 1e-9);
    }

    #[test]
    fn exponent_examples() {
        let v = WeylSumValue::<f64>::new(1, 1, 100, 10.0, 0.0);
        assert!((v.exponent - 0.5).abs() < 1e-12);
        let v = WeylSumValue::<f64>::new(1, 1, 100, 0.0, 100.0);
        assert!((v.exponent - 1.0).abs() < 1e-12);
    }

    #[test]
    fn quadratic_sum_cancels() {
        let s: WeylSumValue<f64> = weyl_sum(&poly("sqrt(2)*x^2"), 1, 1, 10_000).unwrap();
        assert!(s.exponent <= 0.9, "exponent {}", s.exponent);
    }

    #[test]
    fn batched_sums_match_single() {
        let p = poly("sqrt(3)*x^2 + pi*x");
        let batch: Vec<WeylSumValue<f64>> = weyl_sums(&p, 3, 1..=6, 5000).unwrap();
        for s in &batch {
            let one: WeylSumValue<f64> = weyl_sum(&p, 3, s.m, 5000).unwrap();
            assert!((one.re - s.re).abs() < 1e-8 && (one.im - s.im).abs() < 1e-8);
        }
    }

    #[test]
    fn parallel_matches_serial() {
        let p = poly("sqrt(2)*x^2");
        let a: WeylSumValue<f64> = weyl_sum(&p, 1, 2, 50_000).unwrap();
        let b: WeylSumValue<f64> = weyl_sum_serial(&p, 1, 2, 50_000).unwrap();
        assert!((a.magnitude - b.magnitude).abs() <= 1e-9 * b.magnitude.max(1.0));
    }

    #[test]
    fn single_precision_sums() {
        let s: WeylSumValue<f32> = weyl_sum(&poly("x/4"), 1, 1, 400).unwrap();
        assert!(s.magnitude < 1e-3);
    }

    #[test]
    fn star_discrepancy_examples() {
        assert_eq!(star_discrepancy(&[0.5f64]).unwrap(), 0.5);
        assert_eq!(star_discrepancy(&[0.75f64, 0.25]).unwrap(), 0.25);
        assert_eq!(star_discrepancy(&[0.0f64, 0.25, 0.5, 0.75]).unwrap(), 0.25);
        assert!(star_discrepancy::<f64>(&[]).is_err());
        assert!(star_discrepancy(&[1.0f64]).is_err());
    }

    #[test]
    fn et_report_for_sqrt2() {
        let r: DiscrepancyReport<f64> = erdos_turan_bound(&poly("sqrt(2)*x"), 2, 10, 10).unwrap();
        assert_eq!(r.n, 5);
        let mut pts: Vec<f64> = (1..=5).map(|x| (x as f64 * 2f64.sqrt()).fract()).collect();
        pts.sort_by(f64::total_cmp);
        assert!((r.d_star - star_discrepancy(&pts).unwrap()).abs() < 1e-12);
        assert!(r.et_bound >= r.d_star);
        assert!(r.count_bound() >= 0.5);
        assert_eq!(r.weyl_terms.len(), 10);
    }

    #[test]
    fn resonant_bound_is_vacuous() {
        let r: DiscrepancyReport<f64> = erdos_turan_bound(&poly("x"), 1, 50, 8).unwrap();
        for (i, w) in r.weyl_terms.iter().enumerate() {
            assert!((w * (i + 1) as f64 - 50.0).abs() < 1e-9);
        }
        assert!(r.et_bound > 1.0);
        assert!((r.d_star - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bound_first_term_shrinks_with_cutoff() {
        let p = poly("sqrt(2)*x");
        let small: DiscrepancyReport<f64> = erdos_turan_bound(&p, 1, 1000, 5).unwrap();
        let large: DiscrepancyReport<f64> = erdos_turan_bound(&p, 1, 1000, 50).unwrap();
        assert!(large.t > small.t);
        assert!(large.weyl_total() >= small.weyl_total());
    }
}

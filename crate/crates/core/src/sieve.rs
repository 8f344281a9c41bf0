//! Counting `x <= X` by `g(x) = gcd(x, |floor(P(x))|)`: the coprime count
//! `S(X)`, divisor classes `A_d(X)`, the sifted count `S(X, z)` and its
//! Legendre expansion, plus the prime products and normal-order statistics
//! that go with them.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::polynomial::{PolyEvaluator, RealPolynomial};
use crate::scalar::Real;

/// `1/zeta(2) = 6/pi^2`.
pub const INV_ZETA2: f64 = 0.607_927_101_854_026_6;

/// Integers per parallel counting block.
pub const COUNT_BLOCK: u64 = 1 << 14;

/// Default limit on `2^pi(z)` for the Legendre expansion.
pub const DEFAULT_DIVISOR_CAP: u64 = 1 << 16;

/// Default sieve level used alongside the asymptotic choice.
pub const DEFAULT_Z: f64 = 13.0;

pub const DEFAULT_EPSILON: f64 = 0.5;

/// Fractional bits the compiled evaluator resolves before falling back.
const FLOOR_BITS: u32 = 32;

/// Evaluates `g(x) = gcd(x, |floor(P(x))|)` with `gcd(x, 0) = x`.
struct GcdProbe {
    ev: PolyEvaluator,
}

impl GcdProbe {
    fn new(p: &RealPolynomial, x_max: u64) -> Self {
        Self {
            ev: p.evaluator(x_max, FLOOR_BITS),
        }
    }

    fn floor_mod(&self, x: u64, modulus: u64) -> Result<u64> {
        let f = self.ev.floor(x as i64)?.value;
        Ok(f.mod_floor(&BigInt::from(modulus)).to_u64().expect("residue fits"))
    }

    fn gcd(&self, x: u64) -> Result<u64> {
        Ok(x.gcd(&self.floor_mod(x, x)?))
    }
}

/// Splits `1..=x` at block boundaries and at every `cut`, counts each piece in
/// parallel and returns the running totals at each cut.
fn count_segments(x: u64, cuts: &[u64], pred: impl Fn(u64) -> Result<bool> + Sync) -> Result<Vec<u64>> {
    let mut ends: Vec<u64> = (1..=x.div_ceil(COUNT_BLOCK)).map(|b| (b * COUNT_BLOCK).min(x)).collect();
    ends.extend(cuts.iter().copied().filter(|&c| c >= 1 && c <= x));
    ends.sort_unstable();
    ends.dedup();
    let starts: Vec<u64> = std::iter::once(1).chain(ends.iter().map(|e| e + 1)).collect();
    let pieces: Vec<u64> = ends
        .par_iter()
        .zip(&starts)
        .map(|(&b, &a)| {
            let mut c = 0;
            for n in a..=b {
                c += pred(n)? as u64;
            }
            Ok(c)
        })
        .collect::<Result<_>>()?;
    let mut total = 0;
    let mut running = Vec::with_capacity(cuts.len());
    let mut k = 0;
    for &c in cuts {
        while k < ends.len() && ends[k] <= c {
            total += pieces[k];
            k += 1;
        }
        running.push(total);
    }
    Ok(running)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub x: u64,
    pub count: u64,
    pub ratio: f64,
}

/// `S(X)` with geometrically spaced partial counts.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityReport {
    pub x: u64,
    pub count: u64,
    pub ratio: f64,
    pub target: f64,
    pub abs_error: f64,
    pub checkpoints: Vec<Checkpoint>,
}

/// `X, X/2, X/4, ...` (at most `count` of them, all `>= 1`), ascending.
pub fn geometric_checkpoints(x: u64, count: usize) -> Vec<u64> {
    let mut out: Vec<u64> = (0..count.max(1) as u32)
        .map_while(|i| x.checked_shr(i).filter(|&c| c >= 1))
        .collect();
    out.reverse();
    out.dedup();
    out
}

/// Number of `x <= X` with `gcd(x, |floor(P(x))|) = 1`.
pub fn coprime_count(p: &RealPolynomial, x: u64, checkpoints: usize) -> Result<DensityReport> {
    if x == 0 {
        return Err(Error::InvalidArgument("X must be at least 1".into()));
    }
    let probe = GcdProbe::new(p, x);
    let cuts = geometric_checkpoints(x, checkpoints);
    let counts = count_segments(x, &cuts, |n| Ok(probe.gcd(n)? == 1))?;
    let checkpoints: Vec<Checkpoint> = cuts
        .iter()
        .zip(&counts)
        .map(|(&c, &k)| Checkpoint {
            x: c,
            count: k,
            ratio: k as f64 / c as f64,
        })
        .collect();
    let count = *counts.last().expect("X is always a checkpoint");
    let ratio = count as f64 / x as f64;
    Ok(DensityReport {
        x,
        count,
        ratio,
        target: INV_ZETA2,
        abs_error: (ratio - INV_ZETA2).abs(),
        checkpoints,
    })
}

/// `|A_d(X)|` against its expected size `X/d^2`.
#[derive(Clone, Debug, PartialEq)]
pub struct DivisorCount {
    pub d: u64,
    pub x: u64,
    pub count: u64,
    pub expected: f64,
    pub deviation: f64,
}

fn count_multiples(probe: &GcdProbe, d: u64, x: u64) -> Result<u64> {
    let n = x / d;
    if d == 1 {
        return Ok(n);
    }
    Ok(count_segments(n, &[n], |y| Ok(probe.floor_mod(d * y, d)? == 0))?[0])
}

/// `|A_d(X)| = #{x <= X : d | gcd(x, floor(P(x)))}`, scanning multiples of `d`.
pub fn divisor_count(p: &RealPolynomial, d: u64, x: u64) -> Result<DivisorCount> {
    if d == 0 {
        return Err(Error::InvalidArgument("d must be positive".into()));
    }
    let count = count_multiples(&GcdProbe::new(p, x), d, x)?;
    let expected = x as f64 / (d as f64 * d as f64);
    Ok(DivisorCount {
        d,
        x,
        count,
        expected,
        deviation: (count as f64 - expected).abs(),
    })
}

/// Primes `p < z` in ascending order.
pub fn primes_below(z: f64) -> Vec<u64> {
    if !(z > 2.0) {
        return Vec::new();
    }
    let limit = z.ceil() as usize;
    let mut composite = vec![false; limit];
    let mut out = Vec::new();
    for i in 2..limit {
        if composite[i] {
            continue;
        }
        if (i as f64) < z {
            out.push(i as u64);
        }
        for j in (i * i..limit).step_by(i) {
            composite[j] = true;
        }
    }
    out
}

fn smallest_prime_factor(n: u64) -> u64 {
    if n % 2 == 0 {
        return 2;
    }
    let mut p = 3;
    while p * p <= n {
        if n % p == 0 {
            return p;
        }
        p += 2;
    }
    n
}

/// `S(X, z)`: `x <= X` whose `g(x)` has no prime factor below `z`.
pub fn sifted_count(p: &RealPolynomial, x: u64, z: f64) -> Result<u64> {
    if !(z >= 2.0) {
        return Err(Error::InvalidArgument("sieve level z must be at least 2".into()));
    }
    let probe = GcdProbe::new(p, x);
    Ok(count_segments(x, &[x], |n| {
        let g = probe.gcd(n)?;
        Ok(g == 1 || (smallest_prime_factor(g) as f64) >= z)
    })?[0])
}

/// Product of primes strictly below `z`.
pub fn primorial(z: f64) -> BigInt {
    primes_below(z).into_iter().fold(BigInt::one(), |acc, p| acc * p)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LegendreTerm {
    pub d: u64,
    pub mu: i8,
    pub count: u64,
}

/// `sum_{d | P_z, d <= X} mu(d) |A_d(X)|` with its terms by ascending `d`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LegendreExpansion {
    pub value: i64,
    pub terms: Vec<LegendreTerm>,
}

/// [`legendre_expansion_capped`] with [`DEFAULT_DIVISOR_CAP`].
pub fn legendre_expansion(p: &RealPolynomial, x: u64, z: f64) -> Result<LegendreExpansion> {
    legendre_expansion_capped(p, x, z, DEFAULT_DIVISOR_CAP)
}

/// Möbius inclusion-exclusion over the squarefree divisors of `P_z` up to `X`.
///
/// Divisors above `X` contribute nothing since `A_d(X)` is empty there.
pub fn legendre_expansion_capped(p: &RealPolynomial, x: u64, z: f64, cap: u64) -> Result<LegendreExpansion> {
    if !(z >= 2.0) {
        return Err(Error::InvalidArgument("sieve level z must be at least 2".into()));
    }
    let primes = primes_below(z);
    if primes.len() >= 64 || (1u64 << primes.len()) > cap {
        return Err(Error::DivisorExplosion {
            primes: primes.len(),
            cap,
        });
    }
    let mut divisors: Vec<(u64, i8)> = vec![(1, 1)];
    for &q in &primes {
        let extra: Vec<(u64, i8)> = divisors
            .iter()
            .filter_map(|&(d, mu)| d.checked_mul(q).filter(|&dq| dq <= x).map(|dq| (dq, -mu)))
            .collect();
        divisors.extend(extra);
    }
    divisors.sort_unstable();
    let probe = GcdProbe::new(p, x);
    let terms: Vec<LegendreTerm> = divisors
        .into_iter()
        .map(|(d, mu)| {
            Ok(LegendreTerm {
                d,
                mu,
                count: count_multiples(&probe, d, x)?,
            })
        })
        .collect::<Result<_>>()?;
    let value = terms.iter().map(|t| t.mu as i64 * t.count as i64).sum();
    Ok(LegendreExpansion { value, terms })
}

/// `S(X, z) - S(X)` against `sum |A_d(X)|` over `1 < d <= X` free of primes below `z`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SieveGap {
    pub gap: u64,
    pub bound: u64,
}

impl SieveGap {
    pub fn holds(&self) -> bool {
        self.gap <= self.bound
    }
}

pub fn sieve_gap(p: &RealPolynomial, x: u64, z: f64) -> Result<SieveGap> {
    let sifted = sifted_count(p, x, z)?;
    let coprime = coprime_count(p, x, 1)?.count;
    let probe = GcdProbe::new(p, x);
    let mut bound = 0;
    for d in 2..=x {
        if (smallest_prime_factor(d) as f64) >= z {
            bound += count_multiples(&probe, d, x)?;
        }
    }
    Ok(SieveGap {
        gap: sifted - coprime,
        bound,
    })
}

/// An exact finite product over primes with a floating view.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactProduct {
    pub exact: BigRational,
}

impl ExactProduct {
    pub fn approx<F: Real>(&self) -> F {
        F::from_f64_lossy(self.exact.to_f64().unwrap_or(f64::NAN))
    }
}

fn prime_product(z: f64, factor: impl Fn(u64) -> BigRational) -> ExactProduct {
    let exact = primes_below(z)
        .into_iter()
        .fold(BigRational::one(), |acc, p| acc * factor(p));
    ExactProduct { exact }
}

/// `prod_{p < z} (1 - 1/p)`.
pub fn mertens_product(z: f64) -> ExactProduct {
    prime_product(z, |p| BigRational::new(BigInt::from(p - 1), BigInt::from(p)))
}

/// `prod_{p < z} (1 - 1/p^2)`, decreasing to `6/pi^2`.
pub fn zeta2_partial(z: f64) -> ExactProduct {
    prime_product(z, |p| {
        let pp = BigInt::from(p) * p;
        BigRational::new(&pp - 1, pp)
    })
}

/// Sieve parameters `A`, `c = 1/(2(A+1))`, `z` and `epsilon`.
#[derive(Clone, Debug, PartialEq)]
pub struct SieveConfig {
    pub a: f64,
    pub c: f64,
    /// Level in use: the override if present, else the formula value (at least 2).
    pub z: f64,
    pub epsilon: f64,
    /// `X^(c / ln ln X)`, when `ln ln X > 1`.
    pub formula_z: Option<f64>,
    pub explicit_z_override: Option<f64>,
}

impl SieveConfig {
    pub fn new(x: f64, a: f64, epsilon: f64, z_override: Option<f64>) -> Result<Self> {
        if !(a > 0.0) {
            return Err(Error::InvalidArgument("A must be positive".into()));
        }
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::InvalidArgument("epsilon must lie in (0, 1)".into()));
        }
        if let Some(z) = z_override {
            if !(z >= 2.0) {
                return Err(Error::InvalidArgument("sieve level z must be at least 2".into()));
            }
        }
        let c = 1.0 / (2.0 * (a + 1.0));
        let lnln = x.ln().ln();
        let formula_z = (lnln > 1.0).then(|| (c * x.ln() / lnln).exp());
        let z = match (z_override, formula_z) {
            (Some(z), _) => z,
            (None, Some(f)) => f.max(2.0),
            (None, None) => {
                return Err(Error::InvalidArgument(format!(
                    "X = {x} does not exceed e^e; pass an explicit z"
                )))
            }
        };
        Ok(Self {
            a,
            c,
            z,
            epsilon,
            formula_z,
            explicit_z_override: z_override,
        })
    }
}

/// `z = X^(c / ln ln X)` with `c = 1/(2(A+1))`.
pub fn choose_z(x: f64, a: f64) -> Result<SieveConfig> {
    SieveConfig::new(x, a, DEFAULT_EPSILON, None)
}

/// Smallest-prime-factor table for `0..=n` (entries 0 and 1 are 0), built by a linear sieve.
pub fn spf_table(n: u32) -> Vec<u32> {
    let n = n as usize;
    let mut spf = vec![0u32; n + 1];
    let mut primes: Vec<u32> = Vec::new();
    for i in 2..=n {
        if spf[i] == 0 {
            spf[i] = i as u32;
            primes.push(i as u32);
        }
        for &p in &primes {
            let ip = i * p as usize;
            if p > spf[i] || ip > n {
                break;
            }
            spf[ip] = p;
        }
    }
    spf
}

/// Number of distinct prime factors of `n`, read off an [`spf_table`].
pub fn omega(mut n: u32, spf: &[u32]) -> u32 {
    let mut count = 0;
    while n > 1 {
        let p = spf[n as usize];
        count += 1;
        while n % p == 0 {
            n /= p;
        }
    }
    count
}

/// Whether `|omega(n) - ln ln n| > (ln ln n)^(2/3)`.
pub fn omega_deviates(n: u64, omega_n: u32) -> bool {
    let ll = (n as f64).ln().ln();
    (omega_n as f64 - ll).abs() > ll.powf(2.0 / 3.0)
}

#[derive(Clone, Debug, PartialEq)]
pub struct OmegaDeviationReport {
    pub x: u64,
    pub n_min: u64,
    pub count: u64,
    pub fraction: f64,
}

/// Counts `n_min <= n <= X` whose `omega(n)` strays from `ln ln n` by more than `(ln ln n)^(2/3)`.
pub fn omega_deviation_count(x: u64, n_min: u64) -> Result<OmegaDeviationReport> {
    if n_min < 3 || x < n_min {
        return Err(Error::InvalidArgument("need 3 <= n_min <= X".into()));
    }
    let top = u32::try_from(x).map_err(|_| Error::InvalidArgument("X exceeds the sieve range".into()))?;
    let spf = spf_table(top);
    let count = (n_min as u32..=top)
        .into_par_iter()
        .filter(|&n| omega_deviates(n as u64, omega(n, &spf)))
        .count() as u64;
    Ok(OmegaDeviationReport {
        x,
        n_min,
        count,
        fraction: count as f64 / (x - n_min + 1) as f64,
    })
}

//! Counting `n <= X` with `gcd(n, floor(P(n))) = 1` for real polynomials `P`,
//! together with the machinery that controls the count: certified floors of
//! exact constants, Weyl sums and discrepancy bounds, the Legendre sieve, and
//! diophantine tools (continued fractions, Liouville witnesses, irrationality
//! exponent estimates, simultaneous approximation).
//!
//! ```
//! use polycoprime::{coprime_count, RealPolynomial};
//!
//! let p = RealPolynomial::parse("sqrt(2)*x").unwrap();
//! let report = coprime_count(&p, 10, 1).unwrap();
//! assert_eq!(report.count, 6);
//! ```

pub mod constants;
pub mod diophantine;
pub mod dyadic;
pub mod error;
pub mod expsum;
mod parse;
pub mod polynomial;
pub mod scalar;
pub mod sieve;

pub use constants::{certified_floor, fractional_part, parse_constant, refine, ComputableReal, FloorResult};
pub use diophantine::{
    continued_fraction, convergents_up_to, irrationality_exponent_estimate, liouville_witness,
    simultaneous_approx_search, weyl_exponent_params, weyl_params_with_delta, CFExpansion, Convergent,
    ExponentEstimate, ExponentSequence, LiouvilleWitness, SimultaneousApprox, WeylParams,
};
pub use dyadic::{Dyadic, Interval};
pub use error::{Error, Result};
pub use expsum::{
    erdos_turan_bound, star_discrepancy, sum_exponent, weyl_sum, weyl_sum_general, weyl_sum_serial, weyl_sums,
    DiscrepancyReport, WeylSumValue,
};
pub use polynomial::{PolyEvaluator, RealPolynomial, MAX_DEGREE};
pub use scalar::{FieldScalar, Real};
pub use sieve::{
    choose_z, coprime_count, divisor_count, geometric_checkpoints, legendre_expansion, legendre_expansion_capped,
    mertens_product, omega, omega_deviates, omega_deviation_count, primes_below, primorial, sieve_gap, sifted_count,
    spf_table, zeta2_partial, Checkpoint, DensityReport, DivisorCount, ExactProduct, LegendreExpansion, LegendreTerm,
    OmegaDeviationReport, SieveConfig, SieveGap, INV_ZETA2,
};

/// Weyl parameters in double precision.
pub type WeylParams64 = WeylParams<f64>;
/// Weyl parameters in exact rational arithmetic.
pub type ExactWeylParams = WeylParams<num_rational::BigRational>;
pub type WeylSum64 = WeylSumValue<f64>;
pub type WeylSum32 = WeylSumValue<f32>;
pub type DiscrepancyReport64 = DiscrepancyReport<f64>;

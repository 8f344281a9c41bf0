use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use polycoprime::{
    continued_fraction, coprime_count, divisor_count, legendre_expansion, sifted_count, star_discrepancy,
    weyl_exponent_params, weyl_params_with_delta, weyl_sum, weyl_sum_general, zeta2_partial, ComputableReal,
    Dyadic, ExactWeylParams, RealPolynomial, WeylParams64, WeylSum64, INV_ZETA2,
};
use proptest::prelude::*;

const LEAVES: [&str; 8] = ["sqrt(2)", "sqrt(7)", "pi", "e", "liouville(2)", "liouville(10)", "3/7", "(0 - 5/3)"];

fn constant() -> impl Strategy<Value = String> {
    let leaf = proptest::sample::select(&LEAVES[..]).prop_map(str::to_owned);
    leaf.prop_recursive(3, 12, 2, |inner| {
        (inner.clone(), inner, 0..4usize).prop_map(|(a, b, op)| match op {
            0 => format!("({a} + {b})"),
            1 => format!("({a} - {b})"),
            2 => format!("({a} * {b})"),
            _ => format!("({a} / 7/3)"),
        })
    })
}

fn polynomial() -> impl Strategy<Value = String> {
    (proptest::collection::vec(constant(), 1..4), any::<bool>()).prop_map(|(cs, rational_tail)| {
        let mut terms: Vec<String> = cs
            .iter()
            .enumerate()
            .map(|(j, c)| format!("{c} * x^{}", j + 1))
            .collect();
        if rational_tail {
            terms.push("1/3".into());
        }
        terms.join(" + ")
    })
}

fn parse(text: &str) -> ComputableReal {
    ComputableReal::parse(text).unwrap()
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn refinements_are_nested(text in constant(), t1 in 8u32..120, extra in 1u32..200) {
        let x = parse(&text);
        let coarse = x.refine(t1);
        let fine = x.refine(t1 + extra);
        prop_assert!(coarse.width_at_most(t1));
        prop_assert!(fine.width_at_most(t1 + extra));
        prop_assert!(coarse.padded(&coarse.width()).contains_interval(&fine));
    }

    #[test]
    fn horner_and_power_evaluation_agree(text in polynomial(), n in -300i64..300) {
        let Ok(p) = RealPolynomial::parse(&text) else { return Ok(()) };
        let a = p.eval(&BigInt::from(n)).refine(80);
        let b = p.eval_powers(&BigInt::from(n)).refine(80);
        prop_assert!(a.padded(&a.width()).contains_interval(&b) || b.padded(&b.width()).contains_interval(&a));
    }

    #[test]
    fn compiled_floor_matches_tree(text in polynomial(), n in -2000i64..2000) {
        let Ok(p) = RealPolynomial::parse(&text) else { return Ok(()) };
        let ev = p.evaluator(2000, 24);
        match (ev.floor(n), p.certified_floor_at(n)) {
            (Ok(a), Ok(b)) => prop_assert_eq!((a.value, a.exact_integer), (b.value, b.exact_integer)),
            (Err(_), Err(_)) => {}
            (a, b) => prop_assert!(false, "{:?} vs {:?}", a, b),
        }
    }

    #[test]
    fn dilations_compose(d1 in 1u64..6, d2 in 1u64..6, m in 1u64..5, a in -20i64..20, b in 1i64..9, c in -9i64..9) {
        let p = RealPolynomial::parse(&format!("{a}/{b} * x^2 + x/{b} + {}", c.abs())).unwrap();
        let twice = p.dilate(d1, 1).dilate(d2, m);
        let once = p.dilate(d1 * d2, m);
        for j in 0..=p.degree() {
            let (lhs, rhs) = (twice.coefficient(j), once.coefficient(j));
            prop_assert_eq!(lhs.as_rational(), rhs.as_rational());
        }
        let irr = RealPolynomial::parse("sqrt(3)*x^3 + pi*x").unwrap();
        let lhs = irr.dilate(d1, 1).dilate(d2, m).eval(&BigInt::from(5)).refine(60);
        let rhs = irr.dilate(d1 * d2, m).eval(&BigInt::from(5)).refine(60);
        prop_assert!(lhs.padded(&lhs.width()).contains_interval(&rhs));
    }

    #[test]
    fn sieve_is_monotone(x in 1u64..3000, z1 in 2.0f64..20.0, dz in 0.0f64..30.0) {
        let p = RealPolynomial::parse("sqrt(2)*x^2 + sqrt(5)*x").unwrap();
        let s1 = sifted_count(&p, x, z1).unwrap();
        let s2 = sifted_count(&p, x, z1 + dz).unwrap();
        prop_assert!(s2 <= s1);
        prop_assert!(coprime_count(&p, x, 1).unwrap().count <= s2);
    }

    #[test]
    fn legendre_identity(x in 1u64..2500, zi in 0usize..6, which in 0usize..3) {
        let texts = ["sqrt(2)*x", "e*x^2 + 1/5", "liouville(3)*x^3 + sqrt(11)*x"];
        let p = RealPolynomial::parse(texts[which]).unwrap();
        let z = [2.0, 3.0, 5.0, 7.0, 11.0, 13.0][zi];
        prop_assert_eq!(legendre_expansion(&p, x, z).unwrap().value, sifted_count(&p, x, z).unwrap() as i64);
    }

    #[test]
    fn divisor_deviation_is_bounded(d in 1u64..60, x in 1u64..5000) {
        let p = RealPolynomial::parse("pi*x").unwrap();
        let dc = divisor_count(&p, d, x).unwrap();
        prop_assert!(dc.count <= x / d);
        prop_assert!(dc.deviation <= x as f64 / d as f64);
    }

    #[test]
    fn checkpoints_are_prefix_counts(x in 1u64..40_000, k in 1usize..8) {
        let p = RealPolynomial::parse("sqrt(3)*x + 1/2").unwrap();
        let r = coprime_count(&p, x, k).unwrap();
        for w in r.checkpoints.windows(2) {
            prop_assert!(w[0].x < w[1].x && w[0].count <= w[1].count);
        }
        let first = &r.checkpoints[0];
        prop_assert_eq!(coprime_count(&p, first.x, 1).unwrap().count, first.count);
    }

    #[test]
    fn weyl_sums_are_bounded(text in polynomial(), d in 1u64..4, m in 1u64..6, x in 1u64..3000) {
        let Ok(p) = RealPolynomial::parse(&text) else { return Ok(()) };
        let s: WeylSum64 = weyl_sum(&p, d, m, x).unwrap();
        prop_assert!(s.magnitude <= x as f64 * (1.0 + 1e-12));
    }

    #[test]
    fn star_discrepancy_range(points in proptest::collection::vec(0.0f64..1.0, 1..200)) {
        let d = star_discrepancy(&points).unwrap();
        let n = points.len() as f64;
        prop_assert!(d >= 0.5 / n - 1e-15 && d <= 1.0);
    }

    #[test]
    fn convergents_alternate(num in 1i64..100_000, den in 1i64..100_000) {
        let cf = continued_fraction(&ComputableReal::ratio(num, den).unwrap(), 64).unwrap();
        prop_assert!(cf.terminated);
        let last = cf.convergents.last().unwrap();
        prop_assert_eq!(last.to_rational(), rat(num, den));
        for w in cf.convergents.windows(2) {
            let det = &w[1].p * &w[0].q - &w[0].p * &w[1].q;
            prop_assert_eq!(det.abs(), BigInt::one());
        }
    }

    #[test]
    fn weyl_params_satisfy_invariants(omega in 0.05f64..20.0, k in 2u32..10, frac in 0.05f64..0.95) {
        let p: WeylParams64 = weyl_exponent_params(omega, k).unwrap();
        prop_assert!(p.satisfies_invariants());
        let delta = frac / (omega + 1.0);
        match weyl_params_with_delta::<f64>(omega, k, delta) {
            Ok(q) => prop_assert!(q.satisfies_invariants() && q.rho > 0.0),
            Err(_) => prop_assert!(delta > 0.5),
        }
    }
}

#[test]
fn exact_weyl_params_are_rational() {
    for (num, den) in [(1, 1), (2, 1), (5, 2), (7, 3)] {
        for k in 2..6 {
            let p: ExactWeylParams = weyl_exponent_params(rat(num, den), k).unwrap();
            assert!(p.satisfies_invariants());
            let omega = rat(num, den);
            assert_eq!(p.delta, BigRational::one() / (rat(2, 1) * (&omega + BigRational::one())));
            assert_eq!(p.tau, &p.delta / rat(2 * k as i64 * (k as i64 - 1), 1));
        }
    }
}

#[test]
fn zero_frequency_vector_sums_to_range() {
    for x in [1u64, 9, 1000] {
        let s: WeylSum64 = weyl_sum_general(&vec![ComputableReal::zero(); 3], x).unwrap();
        assert!((s.magnitude - x as f64).abs() < 1e-9);
    }
}

#[test]
fn zeta2_partials_decrease_to_limit() {
    let mut prev = zeta2_partial(2.5).exact;
    let lower = Dyadic::from_f64(INV_ZETA2 - 1e-15).unwrap().to_rational();
    for z in [3.5, 5.5, 7.5, 11.5, 13.5, 17.5, 50.5, 200.5] {
        let cur = zeta2_partial(z).exact;
        assert!(cur < prev);
        assert!(cur > lower);
        prev = cur;
    }
    assert!(!prev.is_zero());
}

#[test]
fn thread_count_does_not_change_counts() {
    let p = RealPolynomial::parse("sqrt(2)*x^3 + sqrt(3)*x + 1/3").unwrap();
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| {
                let c = coprime_count(&p, 60_000, 6).unwrap();
                let s: WeylSum64 = weyl_sum(&p, 2, 3, 60_000).unwrap();
                (c, s.re.to_bits(), s.im.to_bits())
            })
    };
    assert_eq!(run(1), run(3));
}

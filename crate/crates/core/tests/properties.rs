use std::cmp::Ordering;

use proptest::prelude::*;

use hrw_core::expr::{eval_real, parse};
use hrw_core::hyperreal::compare;
use hrw_core::scalar::{self, ratio, Scalar};
use hrw_core::{Exponent, ExtendedReal, HyperReal};

const W: i64 = 16;

fn window() -> Exponent {
    Exponent(scalar::int(W))
}

fn rational() -> impl Strategy<Value = Scalar> {
    (-40i64..=40, 1i64..=12).prop_map(|(p, q)| ratio(p, q))
}

/// Sums of a few powers of ε with exponents in `lo..=hi`, small enough
/// that no arithmetic below reaches the truncation window.
fn hyper(lo: i64, hi: i64) -> impl Strategy<Value = HyperReal> {
    prop::collection::vec((lo..=hi, rational()), 0..4).prop_map(|terms| {
        HyperReal::from_terms(terms.into_iter().map(|(e, c)| (Exponent(scalar::int(e)), c)), window())
    })
}

fn limited() -> impl Strategy<Value = HyperReal> {
    hyper(0, 4)
}

fn expression() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![
        (0u32..50).prop_map(|n| n.to_string()),
        (1u32..20, 2u32..9).prop_map(|(p, q)| format!("{p}/{q}")),
        Just("x".to_string()),
        Just("y".to_string()),
        Just("pi".to_string()),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone(), prop::sample::select(vec!["+", "-", "*", "/"]))
                .prop_map(|(a, b, op)| format!("({a}){op}({b})")),
            (inner.clone(), 0u32..4).prop_map(|(a, n)| format!("({a})^{n}")),
            inner.clone().prop_map(|a| format!("-({a})")),
            (inner.clone(), prop::sample::select(vec!["sin", "exp", "abs", "sqrt", "ln"]))
                .prop_map(|(a, f)| format!("{f}({a})")),
            (inner.clone(), inner).prop_map(|(a, b)| format!("root(3, {a}) + {b}")),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn addition_is_a_commutative_group(x in hyper(-3, 6), y in hyper(-3, 6), z in hyper(-3, 6)) {
        prop_assert_eq!(&x + &y, &y + &x);
        prop_assert_eq!(&(&x + &y) + &z, &x + &(&y + &z));
        prop_assert!((&x - &x).is_zero());
        prop_assert_eq!(&x + &HyperReal::zero(window()), x.clone());
    }

    #[test]
    fn multiplication_is_commutative_associative_and_distributive(
        x in limited(), y in limited(), z in limited()
    ) {
        prop_assert_eq!(&x * &y, &y * &x);
        prop_assert_eq!(&(&x * &y) * &z, &x * &(&y * &z));
        prop_assert_eq!(&x * &(&y + &z), &(&x * &y) + &(&x * &z));
        prop_assert_eq!(&x * &HyperReal::one(window()), x.clone());
    }

    #[test]
    fn inverses_agree_with_one_up_to_the_window(x in hyper(-3, 6)) {
        prop_assume!(!x.is_zero());
        let product = &x * &x.inv().unwrap();
        let one = HyperReal::one(window());
        let gap = &product - &one;
        if let Some(lead) = gap.leading_exponent() {
            prop_assert!(lead.0 >= scalar::int(W), "x = {x}, x * 1/x - 1 = {gap}");
        }
        prop_assert_eq!(product.st(), ExtendedReal::Finite(scalar::int(1)));
    }

    #[test]
    fn order_matches_the_sign_of_the_difference(x in hyper(-3, 6), y in hyper(-3, 6), z in hyper(-3, 6)) {
        prop_assert_eq!(compare(&x, &y), (&x - &y).signum().cmp(&0));
        prop_assert_eq!(compare(&x, &y), compare(&(&x + &z), &(&y + &z)));
        if compare(&z, &HyperReal::zero(window())) == Ordering::Greater {
            prop_assert_eq!(compare(&x, &y), compare(&(&x * &z), &(&y * &z)));
        }
    }

    #[test]
    fn standard_part_is_a_ring_homomorphism_on_limited_values(x in limited(), y in limited()) {
        let st = |h: &HyperReal| h.st_finite().unwrap();
        prop_assert_eq!(st(&(&x + &y)), st(&x) + st(&y));
        prop_assert_eq!(st(&(&x * &y)), st(&x) * st(&y));
        prop_assert!(x.infinitesimal_part().is_infinitesimal());
        prop_assert!(x.in_monad(&st(&x)));
    }

    #[test]
    fn classification_follows_the_leading_exponent(x in hyper(-3, 6)) {
        let c = x.classify();
        match x.leading_exponent() {
            None => prop_assert!(x.is_zero()),
            Some(e) if e.0 < scalar::int(0) => prop_assert!(c.is_infinite()),
            Some(e) if e.0 > scalar::int(0) => prop_assert!(c.is_infinitesimal() && !x.is_zero()),
            Some(_) => prop_assert!(c.is_limited() && !c.is_infinitesimal()),
        }
    }

    #[test]
    fn hyperreals_round_trip_through_text(x in hyper(-3, 6)) {
        let back = HyperReal::parse_with_window(&x.to_string(), window()).unwrap();
        prop_assert_eq!(back, x);
    }

    #[test]
    fn rationals_round_trip_through_text(p in any::<i64>(), q in 1i64..1_000_000) {
        let r = ratio(p, q);
        prop_assert_eq!(scalar::parse_rational(&scalar::render(&r)).unwrap(), r);
    }

    #[test]
    fn expressions_round_trip_through_text(src in expression()) {
        let e = parse(&src).unwrap();
        let again = parse(&e.to_string()).unwrap();
        prop_assert_eq!(&again, &e, "rendered as {}", e);
    }

    #[test]
    fn polynomial_evaluation_is_exact(a in rational(), b in rational(), x in rational()) {
        let e = parse(&format!("({a})*x^2 + ({b})*x - 1")).unwrap();
        let value = eval_real(&e, &[("x".to_string(), x.clone())].into_iter().collect(), 40).unwrap();
        prop_assert_eq!(value, &a * &x * &x + &b * &x - scalar::int(1));
    }
}

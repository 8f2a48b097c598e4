use minset::automata::{
    build_avoidance_dfa, intersect, residue_class_dfa, union, valid_numeral_dfa,
};
use minset::numerals::is_subsequence_digits;
use minset::{incomparable, is_subsequence, reduce_to_antichain, Numeral};
use num_bigint::BigUint;
use proptest::prelude::*;

fn numeral(base: u32) -> impl Strategy<Value = Numeral> {
    (
        1u8..base as u8,
        prop::collection::vec(0u8..base as u8, 0..7),
    )
        .prop_map(move |(lead, rest)| {
            let mut d = vec![lead];
            d.extend(rest);
            Numeral::from_digits(d, base).unwrap()
        })
}

fn value_of(digits: &[u8], base: u32) -> BigUint {
    digits.iter().fold(BigUint::ZERO, |acc, &d| acc * base + d)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn subsequence_is_a_partial_order(a in numeral(10), b in numeral(10), c in numeral(10)) {
        prop_assert!(is_subsequence(&a, &a).unwrap());
        if is_subsequence(&a, &b).unwrap() && is_subsequence(&b, &a).unwrap() {
            prop_assert_eq!(&a, &b);
        }
        if is_subsequence(&a, &b).unwrap() && is_subsequence(&b, &c).unwrap() {
            prop_assert!(is_subsequence(&a, &c).unwrap());
        }
        let inc = incomparable(&a, &b).unwrap();
        prop_assert_eq!(inc, !is_subsequence(&a, &b).unwrap() && !is_subsequence(&b, &a).unwrap());
    }

    #[test]
    fn subsequence_implies_no_larger_value(a in numeral(7), b in numeral(7)) {
        if is_subsequence(&a, &b).unwrap() {
            prop_assert!(a.value() <= b.value());
        }
    }

    #[test]
    fn reduction_yields_a_dominating_antichain(nums in prop::collection::vec(numeral(4), 1..25)) {
        let a = reduce_to_antichain(&nums).unwrap();
        let els = a.elements();
        for (i, x) in els.iter().enumerate() {
            for y in &els[i + 1..] {
                prop_assert!(incomparable(x, y).unwrap());
            }
        }
        for n in &nums {
            prop_assert!(a.dominates(n.digits()));
        }
    }

    #[test]
    fn avoidance_dfa_matches_direct_check(
        base in 2u32..11,
        pats in prop::collection::vec(prop::collection::vec(0u8..10, 1..4), 1..5),
        text in prop::collection::vec(0u8..10, 0..12),
    ) {
        let b = base as u8;
        let pats: Vec<Vec<u8>> = pats.into_iter().map(|p| {
            let mut p: Vec<u8> = p.into_iter().map(|d| d % b).collect();
            if p[0] == 0 { p[0] = 1; }
            p
        }).collect();
        let text: Vec<u8> = text.into_iter().map(|d| d % b).collect();
        let nums: Vec<Numeral> = pats.iter().map(|p| Numeral::from_digits(p.clone(), base).unwrap()).collect();
        let dfa = build_avoidance_dfa(&reduce_to_antichain(&nums).unwrap());
        let direct = !pats.iter().any(|p| is_subsequence_digits(p, &text));
        prop_assert_eq!(dfa.accepts_digits(&text), direct);
        prop_assert_eq!(dfa.trimmed().accepts_digits(&text), direct);
    }

    #[test]
    fn residue_dfa_tracks_the_value(base in 2u32..17, m in 1u64..60, r in 0u64..60, n in numeral(16)) {
        let r = r % m;
        let digits: Vec<u8> = n.digits().iter().map(|d| d % base as u8).collect();
        let dfa = residue_class_dfa(base, m, &[r]).unwrap();
        let v = value_of(&digits, base);
        prop_assert_eq!(dfa.accepts_digits(&digits), &v % m == BigUint::from(r));
    }

    #[test]
    fn product_constructions_are_boolean(m1 in 1u64..20, m2 in 1u64..20, r1 in 0u64..20, r2 in 0u64..20, n in numeral(10)) {
        let a = residue_class_dfa(10, m1, &[r1 % m1]).unwrap();
        let b = residue_class_dfa(10, m2, &[r2 % m2]).unwrap();
        let both = intersect(&a, &b).unwrap();
        let either = union(&a, &b).unwrap();
        let d = n.digits();
        prop_assert_eq!(both.accepts_digits(d), a.accepts_digits(d) && b.accepts_digits(d));
        prop_assert_eq!(either.accepts_digits(d), a.accepts_digits(d) || b.accepts_digits(d));
        prop_assert_eq!(both.trimmed().accepts_digits(d), both.accepts_digits(d));
        prop_assert!(valid_numeral_dfa(10).unwrap().accepts_digits(d));
    }
}

use proptest::prelude::*;

use stirval::basep::{
    carries, digit_sum, factorial_valuation, gen_binom_valuation, int_valuation, is_bottom_segment,
    Prime, Valuation,
};
use stirval::cases::{classify, estimates, is_mzc_second, is_smzc_second, Fraction};
use stirval::poles::{kimura_chain, kimura_n, max_pole};
use stirval::scan::Grid;
use stirval::stirling::{stirling_valuation, StirlingKind};

fn prime() -> impl Strategy<Value = Prime> {
    prop::sample::select(vec![2u64, 3, 5, 7, 11, 13]).prop_map(|p| Prime::new(p).unwrap())
}

fn kind() -> impl Strategy<Value = StirlingKind> {
    prop::sample::select(vec![StirlingKind::First, StirlingKind::Second])
}

proptest! {
    #[test]
    fn kummer_matches_legendre(a in 0u64..1_000_000, b in 0u64..1_000_000, p in prime()) {
        let lhs = carries(a, b, p);
        let rhs = factorial_valuation(a + b, p) - factorial_valuation(a, p) - factorial_valuation(b, p);
        prop_assert_eq!(lhs, rhs);
        let sums = digit_sum(a, p) + digit_sum(b, p) - digit_sum(a + b, p);
        prop_assert_eq!(lhs * p.pm1(), sums);
    }

    #[test]
    fn negative_upper_binomials(t in 0u64..100_000, d in 0u64..100_000, p in prime()) {
        // C(-t-1, d) = (-1)^d C(t + d, d)
        let s = -(t as i64) - 1;
        prop_assert_eq!(gen_binom_valuation(s, d, p), Valuation::Finite(carries(t, d, p)));
    }

    #[test]
    fn kimura_links(n in 1u64..10_000_000, p in prime()) {
        if let Some(k) = kimura_n(n, p) {
            prop_assert_eq!(digit_sum(k, p), p.pm1());
            prop_assert!(is_bottom_segment(n, k, p));
        } else {
            prop_assert!(digit_sum(n, p) < p.pm1());
        }
    }

    #[test]
    fn chain_is_bounded(n in 0u64..1_000_000, l in -1_000_000i64..1_000_000, p in prime()) {
        let c = kimura_chain(n, l, p);
        prop_assert!(c.max_pole() <= digit_sum(n, p) / p.pm1());
        prop_assert_eq!(c.first_pole_degree() + c.links.iter().sum::<u64>(), n);
        for w in c.vertices.windows(2) {
            prop_assert!(w[0].0 < w[1].0 && w[1].1 == w[0].1 - 1);
        }
    }

    #[test]
    fn zero_case_shift(n in 1u64..100_000, k in 1u64..100_000, p in prime()) {
        prop_assume!(k <= n);
        prop_assert_eq!(is_mzc_second(n, k, p), is_smzc_second(n + 1, k + 1, p));
        if is_mzc_second(n, k, p) {
            prop_assert!(int_valuation(k, p) <= int_valuation(n, p));
        }
    }

    #[test]
    fn estimates_are_lower_bounds(n in 1u64..=250, k in 1u64..=250, p in prime(), kind in kind()) {
        prop_assume!(k <= n);
        let e = estimates(n, k, p, kind).unwrap();
        prop_assert!(e.amz >= 0 && e.samz >= 0);
        let v = stirling_valuation(n, k, p, kind).unwrap();
        for b in [e.mz, e.smz, e.amz, e.samz] {
            prop_assert!(v.at_least(b));
        }
        let rep = classify(n, k, p, kind).unwrap();
        prop_assert!(rep.agree);
    }

    #[test]
    fn max_pole_is_at_most_digit_bound(n in 0u64..5000, k in 1u64..5000, p in prime()) {
        prop_assert!(max_pole(n, -(k as i64), p) <= digit_sum(n, p) / p.pm1());
    }

    #[test]
    fn fraction_ceiling(num in -10_000i64..10_000, den in 1u64..100) {
        let f = Fraction::new(num, den);
        let c = f.ceil();
        prop_assert!((c as f64) >= f.to_f64() && ((c - 1) as f64) < f.to_f64());
    }

    #[test]
    fn grid_round_trip(start in 0u64..1000, len in 0u64..1000, step in 1u64..10) {
        let text = format!("n={start}..{},{step};p=3", start + len);
        let g: Grid = text.parse().unwrap();
        prop_assert_eq!(g.to_string().parse::<Grid>().unwrap(), g);
    }
}

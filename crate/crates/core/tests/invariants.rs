//! Property-based invariants over random maps and points.

mod common;

use common::{random_injective, rng, Family};
use num_traits::{One, Signed, Zero};
use pamdecide::bijection::{tau_rationality, BijectionParams, RotationRep};
use pamdecide::decision::Witness;
use pamdecide::gap::{to_gap_params, GapParams};
use pamdecide::numerics::{rat, Rational};
use pamdecide::pam::{AffineMap, Interval, IntervalSet, OrbitCursor};
use pamdecide::query;
use proptest::prelude::*;

fn family() -> impl Strategy<Value = Family> {
    prop_oneof![Just(Family::Any), Just(Family::Negative), Just(Family::Bijection), Just(Family::Gap)]
}

fn unit_rat(max_den: i64) -> impl Strategy<Value = Rational> {
    (1..=max_den).prop_flat_map(|d| (0..d).prop_map(move |n| rat(n, d)))
}

fn open_unit_rat(max_den: i64) -> impl Strategy<Value = Rational> {
    (2..=max_den).prop_flat_map(|d| (1..d).prop_map(move |n| rat(n, d)))
}

fn interval(max_den: i64) -> impl Strategy<Value = Interval> {
    (unit_rat(max_den), unit_rat(max_den), any::<bool>(), any::<bool>()).prop_filter_map("empty", |(a, b, lc, hc)| {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        Interval::new(lo, hi, lc, hc)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cursor_tracks_reduced_iteration(seed in any::<u64>(), fam in family(), x0 in unit_rat(40)) {
        let f = random_injective(&mut rng(seed), fam, 32);
        let mut cur = OrbitCursor::new(&f, &x0);
        let mut x = x0;
        for _ in 0..80 {
            let (y, k) = f.eval(&x).unwrap();
            prop_assert_eq!(cur.step().unwrap(), k);
            prop_assert_eq!(cur.value(), y.clone());
            x = y;
        }
    }

    #[test]
    fn conjugation_commutes(seed in any::<u64>(), fam in family(), a in open_unit_rat(9), b in unit_rat(9), flip in any::<bool>(), x in unit_rat(40)) {
        let f = random_injective(&mut rng(seed), fam, 32);
        let h = AffineMap::new(if flip { -a } else { a }, b);
        let g = f.conjugate(&h).unwrap();
        prop_assert_eq!(g.eval(&h.apply(&x)).unwrap().0, h.apply(&f.eval(&x).unwrap().0));
    }

    #[test]
    fn yes_witnesses_replay(seed in any::<u64>(), fam in family(), x0 in unit_rat(32), k in 0u64..6) {
        let f = random_injective(&mut rng(seed), fam, 32);
        let t = f.nth(&x0, k).unwrap();
        let d = query::reach(&f, &x0, &t).unwrap();
        // t lies on the orbit, so only yes is sound, with a witness at most k.
        prop_assert!(d.is_yes(), "{} x0={} t={}: {}", f, x0, t, d);
        if let Some(Witness::Steps(n)) = d.witness {
            prop_assert!(n <= k);
            prop_assert_eq!(f.nth(&x0, n).unwrap(), t);
        }
    }

    #[test]
    fn image_set_contains_images(seed in any::<u64>(), fam in family(), iv in interval(24), x in unit_rat(48)) {
        let f = random_injective(&mut rng(seed), fam, 32);
        let s = IntervalSet::from_interval(iv);
        let img = f.image_set(&s);
        if s.contains(&x) {
            prop_assert!(img.contains(&f.eval(&x).unwrap().0));
        }
        // |f(S)| <= max |slope| * |S|.
        let steepest = f.slopes().map(|a| a.abs()).max().unwrap();
        prop_assert!(img.measure() <= s.measure() * steepest);
    }

    #[test]
    fn interval_sets_normalize(ivs in proptest::collection::vec(interval(16), 0..6), x in unit_rat(48)) {
        let s = IntervalSet::from_intervals(ivs.clone());
        prop_assert_eq!(s.contains(&x), ivs.iter().any(|iv| iv.contains(&x)));
        for w in s.parts().windows(2) {
            prop_assert!(w[0].precedes(&w[1]));
            prop_assert!(!w[0].meets(&w[1]));
        }
        let total = ivs.iter().fold(Rational::zero(), |acc, iv| acc + iv.length());
        prop_assert!(s.measure() <= total);
    }

    #[test]
    fn rational_rotations_have_finite_order(c in open_unit_rat(12), d in open_unit_rat(12), x in unit_rat(40)) {
        let params = BijectionParams::from_cd(c, d).unwrap();
        if let RotationRep::Rational { q, .. } = tau_rationality(&params).unwrap() {
            let f = params.canonical_map();
            prop_assert_eq!(f.nth(&x, q).unwrap(), x.clone());
            let d = query::periodic(&f, &x).unwrap();
            let Some(Witness::Steps(n)) = d.witness else { panic!("periodic point without a period: {d}") };
            prop_assert!(q % n == 0);
        }
    }

    #[test]
    fn gap_parameters_round_trip(l in open_unit_rat(10), m in (1i64..40, 1i64..10), dd in open_unit_rat(30)) {
        let (lambda, mu) = (l, rat(m.0, m.1));
        let one = Rational::one();
        // Map dd into the admissible window (1 - lambda, d_bound).
        let upper = if &lambda * &mu < one { one.clone() } else { (&mu - &lambda * &mu) / (&mu - &one) };
        let lower = &one - &lambda;
        prop_assume!(lower < upper);
        let delta = &lower + (&upper - &lower) * dd;
        let params = GapParams::new(lambda, mu, delta).unwrap();
        let (back, h) = to_gap_params(&params.canonical_map()).unwrap();
        prop_assert_eq!(back, params);
        prop_assert_eq!(h, AffineMap::identity());
    }
}

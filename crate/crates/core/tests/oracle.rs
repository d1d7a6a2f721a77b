//! Random instances checked against straightforward iteration.

mod common;

use common::{rand_unit, random_injective, rng, Family, Oracle, ORACLE_DEPTH};
use pamdecide::decision::{Answer, Witness};
use pamdecide::pam::{Interval, IntervalSet};
use pamdecide::query;

fn run_family(family: Family, seed: u64, count: usize) -> (usize, usize, usize) {
    let mut r = rng(seed);
    let (mut yes, mut no, mut unknown) = (0, 0, 0);
    for i in 0..count {
        let f = random_injective(&mut r, family, 32);
        let x0 = rand_unit(&mut r, 32);
        let oracle = Oracle::new(&f);
        let t = if i % 3 == 0 {
            let k = (i % 7) + 1;
            oracle.orbit(&x0, k)[k].clone()
        } else {
            rand_unit(&mut r, 32)
        };
        let got = query::reach(&f, &x0, &t).unwrap_or_else(|e| panic!("{f} x0={x0} t={t}: {e}"));
        match got.answer {
            Answer::Yes => {
                yes += 1;
                if let Some(Witness::Steps(n)) = got.witness {
                    let want = oracle.first_hit_point(&x0, &t, n);
                    assert_eq!(Some(n), want, "{f} x0={x0} t={t}\n{}", got.trace);
                }
            }
            Answer::No => {
                no += 1;
                let want = oracle.first_hit_point(&x0, &t, ORACLE_DEPTH);
                assert_eq!(want, None, "{f} x0={x0} t={t}\n{}", got.trace);
            }
            Answer::Unknown => unknown += 1,
        }
    }
    (yes, no, unknown)
}

#[test]
fn point_queries_agree_with_iteration() {
    for (family, seed) in [(Family::Any, 1), (Family::Negative, 2), (Family::Bijection, 3), (Family::Gap, 4)] {
        let (y, n, u) = run_family(family, seed, 60);
        eprintln!("{family:?}: yes {y} no {n} unknown {u}");
        assert!(u * 10 <= y + n + u, "{family:?}: too many unknown answers ({u})");
    }
}

#[test]
fn interval_targets_agree_with_iteration() {
    let mut r = rng(11);
    let mut unknown = 0;
    for _ in 0..200 {
        let f = random_injective(&mut r, Family::Any, 24);
        let x0 = rand_unit(&mut r, 24);
        let (a, b) = (rand_unit(&mut r, 24), rand_unit(&mut r, 24));
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let target = Interval::closed(lo, hi);
        let want = Oracle::new(&f).first_hit(&x0, &IntervalSet::from_interval(target.clone()), ORACLE_DEPTH);
        let got = query::point_to_interval(&f, &x0, &target).unwrap();
        match got.answer {
            Answer::Yes => {
                if let Some(Witness::Steps(n)) = got.witness {
                    assert_eq!(Some(n), want, "{f} x0={x0} I={target}");
                }
            }
            Answer::No => assert_eq!(want, None, "{f} x0={x0} I={target}"),
            Answer::Unknown => unknown += 1,
        }
    }
    eprintln!("interval targets: unknown {unknown}");
}

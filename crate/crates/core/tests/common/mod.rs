//! Brute-force oracle and random instance generation shared by the
//! integration tests.
#![allow(dead_code)]

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use pamdecide::numerics::{rat, Rational};
use pamdecide::pam::{Interval, IntervalSet, Pam};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub const ORACLE_DEPTH: u64 = 10_000;

/// Straightforward exact iteration, independent of the decision code.
/// Points are carried as unreduced `num / den` pairs with `den > 0`.
pub struct Oracle<'a> {
    f: &'a Pam,
}

fn below(num: &BigInt, den: &BigInt, r: &Rational) -> std::cmp::Ordering {
    (num * r.denom()).cmp(&(r.numer() * den))
}

fn inside(num: &BigInt, den: &BigInt, iv: &Interval) -> bool {
    use std::cmp::Ordering::*;
    let lo = below(num, den, &iv.lo);
    let hi = below(num, den, &iv.hi);
    (lo == Greater || (lo == Equal && iv.lo_closed)) && (hi == Less || (hi == Equal && iv.hi_closed))
}

impl<'a> Oracle<'a> {
    pub fn new(f: &'a Pam) -> Oracle<'a> {
        Oracle { f }
    }

    fn step(&self, num: &mut BigInt, den: &mut BigInt) -> Option<()> {
        let p = self.f.pieces().iter().find(|p| inside(num, den, &p.domain))?;
        let (a, b) = (&p.map.a, &p.map.b);
        *num = a.numer() * b.denom() * &*num + b.numer() * a.denom() * &*den;
        *den = a.denom() * b.denom() * &*den;
        Some(())
    }

    /// Least `n <= depth` with `f^n(x0)` in `target`, or `None`.
    pub fn first_hit(&self, x0: &Rational, target: &IntervalSet, depth: u64) -> Option<u64> {
        let (mut num, mut den) = (x0.numer().clone(), x0.denom().clone());
        for n in 0..=depth {
            if target.parts().iter().any(|iv| inside(&num, &den, iv)) {
                return Some(n);
            }
            self.step(&mut num, &mut den)?;
        }
        None
    }

    pub fn first_hit_point(&self, x0: &Rational, t: &Rational, depth: u64) -> Option<u64> {
        self.first_hit(x0, &IntervalSet::from_interval(Interval::point(t.clone())), depth)
    }

    pub fn orbit(&self, x0: &Rational, n: usize) -> Vec<Rational> {
        let (mut num, mut den) = (x0.numer().clone(), x0.denom().clone());
        let mut out = vec![x0.clone()];
        for _ in 0..n {
            self.step(&mut num, &mut den).expect("orbit stays in the carrier");
            out.push(Rational::new(num.clone(), den.clone()));
        }
        out
    }
}

pub fn rand_rat(rng: &mut ChaCha8Rng, max_den: i64) -> Rational {
    let d = rng.gen_range(1..=max_den);
    rat(rng.gen_range(0..d), d)
}

/// Random point of `[0, 1)` with denominator at most `max_den`.
pub fn rand_unit(rng: &mut ChaCha8Rng, max_den: i64) -> Rational {
    rand_rat(rng, max_den)
}

/// Which family a random map is drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Any,
    Bijection,
    Gap,
    Negative,
}

fn map_onto(dom_lo: &Rational, dom_hi: &Rational, img_lo: &Rational, img_hi: &Rational, increasing: bool) -> (Rational, Rational) {
    let a = (img_hi - img_lo) / (dom_hi - dom_lo);
    if increasing {
        (a.clone(), img_lo - &a * dom_lo)
    } else {
        (-a.clone(), img_hi + &a * dom_lo)
    }
}

/// Random injective two-piece map on `[0, 1)` with denominators at most
/// `max_den` in its defining points.
pub fn random_injective(rng: &mut ChaCha8Rng, family: Family, max_den: i64) -> Pam {
    loop {
        if let Some(f) = try_random(rng, family, max_den) {
            return f;
        }
    }
}

fn try_random(rng: &mut ChaCha8Rng, family: Family, max_den: i64) -> Option<Pam> {
    let c = rand_rat(rng, max_den);
    if c.is_zero() {
        return None;
    }
    let mut pts: Vec<Rational> = (0..4).map(|_| rand_rat(rng, max_den)).collect();
    pts.sort();
    let (zero, one) = (Rational::zero(), Rational::one());
    match family {
        Family::Bijection => {
            pts[0] = zero.clone();
            pts[3] = one.clone();
            pts[2] = pts[1].clone();
        }
        Family::Gap => {
            pts[0] = zero.clone();
            pts[3] = one.clone();
        }
        _ => {
            if rng.gen_bool(0.3) {
                pts[3] = one.clone();
            }
        }
    }
    if pts[0] >= pts[1] || pts[2] >= pts[3] || pts[1] > pts[2] {
        return None;
    }
    let low = (pts[0].clone(), pts[1].clone());
    let high = (pts[2].clone(), pts[3].clone());
    let (first_img, second_img, inc1, inc2) = match family {
        Family::Bijection | Family::Gap => (high, low, true, true),
        Family::Negative => {
            let swap = rng.gen_bool(0.5);
            let (a, b) = if swap { (high, low) } else { (low, high) };
            let s1 = rng.gen_bool(0.5);
            let s2 = if s1 { rng.gen_bool(0.5) } else { false };
            (a, b, s1, s2)
        }
        Family::Any => {
            let swap = rng.gen_bool(0.5);
            let (a, b) = if swap { (high, low) } else { (low, high) };
            (a, b, rng.gen_bool(0.6), rng.gen_bool(0.6))
        }
    };
    // Half-open domains give half-open images; the closed end must stay below 1.
    for (img, inc) in [(&first_img, inc1), (&second_img, inc2)] {
        if !inc && img.1 >= one {
            return None;
        }
    }
    let m1 = map_onto(&zero, &c, &first_img.0, &first_img.1, inc1);
    let m2 = map_onto(&c, &one, &second_img.0, &second_img.1, inc2);
    Pam::two_piece(c, m1, m2).ok()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    use rand::SeedableRng;
    ChaCha8Rng::seed_from_u64(seed)
}

/// Largest bit length among the map coefficients, as a size guard.
pub fn coefficient_bits(f: &Pam) -> u64 {
    f.pieces()
        .iter()
        .flat_map(|p| [p.map.a.numer().clone(), p.map.a.denom().clone(), p.map.b.numer().clone(), p.map.b.denom().clone()])
        .map(|n: BigInt| n.abs().bits())
        .max()
        .unwrap_or(0)
}

pub fn is_positive(x: &Rational) -> bool {
    x.is_positive()
}

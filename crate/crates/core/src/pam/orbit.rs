//! Fast exact orbit stepping.
//!
//! Points are kept as unreduced fractions `num / den` with `den > 0`, so a
//! step costs a few multiplications by small integers instead of a gcd on
//! numbers whose size grows with the step count. Every comparison is a
//! cross-multiplication, exact regardless of reduction.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed};

use super::interval::{Interval, IntervalSet};
use super::map::Pam;
use crate::error::{Error, Result};
use crate::numerics::Rational;

// Reductions happen at geometrically spaced steps: a gcd is quadratic in the
// operand size while unreduced growth is only a constant factor.
const FIRST_REDUCE: u64 = 32;

pub struct OrbitCursor<'a> {
    f: &'a Pam,
    num: BigInt,
    den: BigInt,
    steps: u64,
    next_reduce: u64,
}

impl<'a> OrbitCursor<'a> {
    pub fn new(f: &'a Pam, x0: &Rational) -> OrbitCursor<'a> {
        OrbitCursor { f, num: x0.numer().clone(), den: x0.denom().clone(), steps: 0, next_reduce: FIRST_REDUCE }
    }

    pub fn compare(&self, r: &Rational) -> Ordering {
        (&self.num * r.denom()).cmp(&(r.numer() * &self.den))
    }

    pub fn equals(&self, r: &Rational) -> bool {
        self.compare(r) == Ordering::Equal
    }

    pub fn in_interval(&self, iv: &Interval) -> bool {
        let lo = self.compare(&iv.lo);
        let hi = self.compare(&iv.hi);
        let above = if iv.lo_closed { lo != Ordering::Less } else { lo == Ordering::Greater };
        let below = if iv.hi_closed { hi != Ordering::Greater } else { hi == Ordering::Less };
        above && below
    }

    pub fn in_set(&self, s: &IntervalSet) -> bool {
        s.parts().iter().any(|p| self.in_interval(p))
    }

    /// `floor((x - lo) / width)` for `width > 0`.
    pub fn floor_scaled(&self, lo: &Rational, width: &Rational) -> BigInt {
        let num = (&self.num * lo.denom() - lo.numer() * &self.den) * width.denom();
        let den = &self.den * lo.denom() * width.numer();
        num.div_floor(&den)
    }

    pub fn value(&self) -> Rational {
        Rational::new(self.num.clone(), self.den.clone())
    }

    pub fn piece(&self) -> Result<usize> {
        let pieces = self.f.pieces();
        let k = pieces.partition_point(|p| {
            let c = self.compare(&p.domain.hi);
            c == Ordering::Greater || (c == Ordering::Equal && !p.domain.hi_closed)
        });
        match pieces.get(k) {
            Some(p) if self.in_interval(&p.domain) => Ok(k),
            _ => Err(Error::OutOfCarrier(format!("{} of {}", self.value(), self.f.carrier()))),
        }
    }

    /// Apply the map once; returns the piece used.
    pub fn step(&mut self) -> Result<usize> {
        let k = self.piece()?;
        let m = &self.f.piece(k).map;
        // a n / d + b = (an bd n + bn ad d) / (ad bd d)
        let (an, ad, bn, bd) = (m.a.numer(), m.a.denom(), m.b.numer(), m.b.denom());
        self.num = an * bd * &self.num + bn * ad * &self.den;
        self.den = ad * bd * &self.den;
        self.steps += 1;
        if self.steps == self.next_reduce {
            let g = self.num.gcd(&self.den);
            if !g.is_one() {
                self.num /= &g;
                self.den /= &g;
            }
            self.next_reduce *= 2;
        }
        debug_assert!(self.den.is_positive());
        Ok(k)
    }
}

/// First `n <= horizon` with `f^n(x0)` in `targets`.
pub fn first_hit(f: &Pam, x0: &Rational, targets: &IntervalSet, horizon: u64) -> Result<Option<u64>> {
    let mut cur = OrbitCursor::new(f, x0);
    for n in 0..=horizon {
        if cur.in_set(targets) {
            return Ok(Some(n));
        }
        if n < horizon {
            cur.step()?;
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{int, rat};

    #[test]
    fn agrees_with_eval() {
        let f = Pam::two_piece(rat(1, 2), (rat(4, 3), int(0)), (rat(4, 3), rat(-1, 3))).unwrap();
        let mut cur = OrbitCursor::new(&f, &rat(1, 5));
        let mut x = rat(1, 5);
        for _ in 0..100 {
            let (y, k) = f.eval(&x).unwrap();
            assert_eq!(cur.step().unwrap(), k);
            x = y;
            assert_eq!(cur.value(), x);
        }
        let mut cur = OrbitCursor::new(&f, &rat(5, 8));
        cur.step().unwrap();
        assert_eq!(cur.floor_scaled(&int(0), &rat(1, 64)), 32.into());
        assert_eq!(cur.floor_scaled(&rat(1, 2), &rat(1, 8)), 0.into());
        let t = IntervalSet::from_interval(Interval::point(rat(1, 7)));
        assert_eq!(first_hit(&f, &rat(1, 5), &t, 10_000).unwrap(), None);
    }
}

//! Rigorous enclosures with dyadic endpoints.
//!
//! Every operation computes exact rational endpoint candidates and then
//! rounds outward onto the grid `2^-prec`, so the true value always stays
//! inside. Refinement is by re-evaluating at a higher precision.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use super::rational::{rat, rmax, rmin, Rational};
use crate::error::{Error, Result};

/// `mantissa * 2^exponent`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dyadic {
    pub mantissa: BigInt,
    pub exponent: i64,
}

impl Dyadic {
    pub fn to_rational(&self) -> Rational {
        let two = BigInt::from(2);
        if self.exponent >= 0 {
            Rational::from_integer(&self.mantissa * num_traits::pow(two, self.exponent as usize))
        } else {
            Rational::new(self.mantissa.clone(), num_traits::pow(two, (-self.exponent) as usize))
        }
    }

    fn floor_of(x: &Rational, prec: u32) -> Dyadic {
        let scale = Rational::from_integer(num_traits::pow(BigInt::from(2), prec as usize));
        Dyadic { mantissa: (x * scale).floor().to_integer(), exponent: -(prec as i64) }
    }

    fn ceil_of(x: &Rational, prec: u32) -> Dyadic {
        let scale = Rational::from_integer(num_traits::pow(BigInt::from(2), prec as usize));
        Dyadic { mantissa: (x * scale).ceil().to_integer(), exponent: -(prec as i64) }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DyadicInterval {
    pub lo: Dyadic,
    pub hi: Dyadic,
}

impl fmt::Display for DyadicInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let lo = self.lo_rational();
        let hi = self.hi_rational();
        write!(
            f,
            "[{}, {}]",
            super::rational::to_decimal(&lo, 15),
            super::rational::to_decimal(&hi, 15)
        )
    }
}

impl DyadicInterval {
    /// Smallest grid interval at `prec` bits that contains `[lo, hi]`.
    pub fn outward(lo: &Rational, hi: &Rational, prec: u32) -> DyadicInterval {
        debug_assert!(lo <= hi);
        DyadicInterval { lo: Dyadic::floor_of(lo, prec), hi: Dyadic::ceil_of(hi, prec) }
    }

    pub fn point(x: &Rational, prec: u32) -> DyadicInterval {
        Self::outward(x, x, prec)
    }

    pub fn lo_rational(&self) -> Rational {
        self.lo.to_rational()
    }

    pub fn hi_rational(&self) -> Rational {
        self.hi.to_rational()
    }

    pub fn width(&self) -> Rational {
        self.hi_rational() - self.lo_rational()
    }

    pub fn contains(&self, x: &Rational) -> bool {
        self.lo_rational() <= *x && *x <= self.hi_rational()
    }

    pub fn overlaps(&self, other: &DyadicInterval) -> bool {
        self.lo_rational() <= other.hi_rational() && other.lo_rational() <= self.hi_rational()
    }

    /// `Some(ordering)` once the enclosure separates from `x`.
    pub fn compare(&self, x: &Rational) -> Option<Ordering> {
        if self.hi_rational() < *x {
            Some(Ordering::Less)
        } else if self.lo_rational() > *x {
            Some(Ordering::Greater)
        } else {
            None
        }
    }

    pub fn add(&self, other: &DyadicInterval, prec: u32) -> DyadicInterval {
        Self::outward(
            &(self.lo_rational() + other.lo_rational()),
            &(self.hi_rational() + other.hi_rational()),
            prec,
        )
    }

    pub fn sub(&self, other: &DyadicInterval, prec: u32) -> DyadicInterval {
        Self::outward(
            &(self.lo_rational() - other.hi_rational()),
            &(self.hi_rational() - other.lo_rational()),
            prec,
        )
    }

    pub fn neg(&self) -> DyadicInterval {
        DyadicInterval {
            lo: Dyadic { mantissa: -&self.hi.mantissa, exponent: self.hi.exponent },
            hi: Dyadic { mantissa: -&self.lo.mantissa, exponent: self.lo.exponent },
        }
    }

    pub fn add_rational(&self, x: &Rational, prec: u32) -> DyadicInterval {
        Self::outward(&(self.lo_rational() + x), &(self.hi_rational() + x), prec)
    }

    pub fn mul(&self, other: &DyadicInterval, prec: u32) -> DyadicInterval {
        let (a, b) = (self.lo_rational(), self.hi_rational());
        let (c, d) = (other.lo_rational(), other.hi_rational());
        let products = [&a * &c, &a * &d, &b * &c, &b * &d];
        let lo = products.iter().fold(products[0].clone(), |m, p| rmin(&m, p));
        let hi = products.iter().fold(products[0].clone(), |m, p| rmax(&m, p));
        Self::outward(&lo, &hi, prec)
    }

    /// Quotient; the divisor must not contain zero.
    pub fn div(&self, other: &DyadicInterval, prec: u32) -> Result<DyadicInterval> {
        let (c, d) = (other.lo_rational(), other.hi_rational());
        if c <= Rational::zero() && d >= Rational::zero() {
            return Err(Error::PreconditionViolated("division by an interval containing 0".into()));
        }
        let (a, b) = (self.lo_rational(), self.hi_rational());
        let q = [&a / &c, &a / &d, &b / &c, &b / &d];
        let lo = q.iter().fold(q[0].clone(), |m, p| rmin(&m, p));
        let hi = q.iter().fold(q[0].clone(), |m, p| rmax(&m, p));
        Ok(Self::outward(&lo, &hi, prec))
    }
}

/// Partial sum of `2 * atanh(z)` with enough terms that the tail is at most
/// `tol`; returns `(sum, tail_bound)`. Requires `|z| <= 1/3`.
fn atanh2_series(z: &Rational, tol: &Rational) -> (Rational, Rational) {
    let z2 = z * z;
    let one_minus = Rational::one() - &z2;
    let mut power = z.clone();
    let mut sum = Rational::zero();
    let mut k: i64 = 0;
    loop {
        let denom = Rational::from_integer(BigInt::from(2 * k + 1));
        sum += &power * rat(2, 1) / &denom;
        power *= &z2;
        k += 1;
        // Remaining terms are bounded by a geometric series in z^2.
        let tail = power.abs() * rat(2, 1) / (Rational::from_integer(BigInt::from(2 * k + 1)) * &one_minus);
        if tail <= *tol {
            return (sum, tail);
        }
    }
}

fn pow2(k: i64) -> Rational {
    let p = Rational::from_integer(num_traits::pow(BigInt::from(2), k.unsigned_abs() as usize));
    if k >= 0 { p } else { p.recip() }
}

/// Enclosure of `ln x` of width at most `2^-precision`.
pub fn log_enclosure(x: &Rational, precision: u32) -> Result<DyadicInterval> {
    if !x.is_positive() {
        return Err(Error::PreconditionViolated(format!("log of nonpositive {x}")));
    }
    // x = 2^k * m with m in [2/3, 4/3].
    let mut k = x.numer().bits() as i64 - x.denom().bits() as i64;
    let mut m = x * pow2(-k);
    while m > rat(4, 3) {
        m /= rat(2, 1);
        k += 1;
    }
    while m < rat(2, 3) {
        m *= rat(2, 1);
        k -= 1;
    }
    let eps = pow2(-(precision as i64) - 2);
    let z = (&m - Rational::one()) / (&m + Rational::one());
    let (lm, tm) = atanh2_series(&z, &eps);
    let (lo, hi) = if k == 0 {
        (&lm - &tm, &lm + &tm)
    } else {
        let (l2, t2) = atanh2_series(&rat(1, 3), &(&eps / Rational::from_integer(BigInt::from(k.abs()))));
        let kk = Rational::from_integer(BigInt::from(k));
        let center = &lm + &kk * &l2;
        let radius = &tm + kk.abs() * &t2;
        (&center - &radius, &center + &radius)
    };
    Ok(DyadicInterval::outward(&lo, &hi, precision + 2))
}

/// Refine `enclose(prec)` by doubling precision until it separates from
/// `x`; gives up with `ResourceLimit` beyond `cap` bits.
pub fn compare_enclosed<F>(mut enclose: F, x: &Rational, start: u32, cap: u32) -> Result<Ordering>
where
    F: FnMut(u32) -> Result<DyadicInterval>,
{
    let mut prec = start.max(1);
    loop {
        if let Some(ord) = enclose(prec)?.compare(x) {
            return Ok(ord);
        }
        if prec >= cap {
            return Err(Error::ResourceLimit(format!("could not separate from {x} within {cap} bits")));
        }
        prec = (prec * 2).min(cap);
    }
}

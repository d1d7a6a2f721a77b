//! Orbits of a single affine map `g(x) = a*x + b`.
//!
//! Every query reduces to a monotone sequence: for `a > 0, a != 1` the orbit
//! moves monotonically relative to the fixed point, for `a < 0` the even and
//! odd subsequences do, and `a = 1` is an arithmetic progression solved in
//! closed form.

use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::numerics::{rpow, Rational};
use crate::pam::{AffineMap, Interval};

/// Iteration cap for the monotone loops.
pub const ITERATION_CAP: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrbitResult {
    Hit(u64),
    Never,
    AlwaysIn,
    Escapes(u64),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AffineOrbitAnswer {
    pub result: OrbitResult,
    pub certificate: String,
}

impl AffineOrbitAnswer {
    fn new(result: OrbitResult, certificate: impl Into<String>) -> Self {
        AffineOrbitAnswer { result, certificate: certificate.into() }
    }

    pub fn hit(&self) -> Option<u64> {
        match self.result {
            OrbitResult::Hit(n) => Some(n),
            _ => None,
        }
    }
}

impl fmt::Display for AffineOrbitAnswer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.result {
            OrbitResult::Hit(n) => write!(f, "hit({n})")?,
            OrbitResult::Never => write!(f, "never")?,
            OrbitResult::AlwaysIn => write!(f, "always-in")?,
            OrbitResult::Escapes(n) => write!(f, "escapes({n})")?,
        }
        write!(f, ": {}", self.certificate)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FixedPoint {
    Unique(Rational),
    NoneExists,
    All,
}

pub fn fixed_point(g: &AffineMap) -> FixedPoint {
    if g.a.is_one() {
        if g.b.is_zero() { FixedPoint::All } else { FixedPoint::NoneExists }
    } else {
        FixedPoint::Unique(&g.b / (Rational::one() - &g.a))
    }
}

pub fn closed_form(g: &AffineMap, x: &Rational, n: u64) -> Rational {
    if g.a.is_one() {
        return x + Rational::from_integer(n.into()) * &g.b;
    }
    let an = rpow(&g.a, n);
    &an * x + (&an - Rational::one()) / (&g.a - Rational::one()) * &g.b
}

/// A convex target: a bounded interval or a ray.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Region {
    Bounded(Interval),
    /// `x < bound`, or `x <= bound` when closed.
    Below(Rational, bool),
    /// `x > bound`, or `x >= bound` when closed.
    Above(Rational, bool),
}

impl Region {
    pub fn contains(&self, x: &Rational) -> bool {
        match self {
            Region::Bounded(iv) => iv.contains(x),
            Region::Below(b, closed) => x < b || (*closed && x == b),
            Region::Above(b, closed) => x > b || (*closed && x == b),
        }
    }

    /// Some point of the region is strictly above `x`.
    fn has_point_above(&self, x: &Rational) -> bool {
        match self {
            Region::Bounded(iv) => iv.hi > *x,
            Region::Below(b, _) => b > x,
            Region::Above(..) => true,
        }
    }

    fn has_point_below(&self, x: &Rational) -> bool {
        match self {
            Region::Bounded(iv) => iv.lo < *x,
            Region::Above(b, _) => b < x,
            Region::Below(..) => true,
        }
    }

    /// Lower end as `(bound, closed)`; `None` for an unbounded-below ray.
    fn lower(&self) -> Option<(&Rational, bool)> {
        match self {
            Region::Bounded(iv) => Some((&iv.lo, iv.lo_closed)),
            Region::Above(b, c) => Some((b, *c)),
            Region::Below(..) => None,
        }
    }

    fn upper(&self) -> Option<(&Rational, bool)> {
        match self {
            Region::Bounded(iv) => Some((&iv.hi, iv.hi_closed)),
            Region::Below(b, c) => Some((b, *c)),
            Region::Above(..) => None,
        }
    }
}

type Entry = (Option<u64>, String);

/// Smallest `n >= 0` with `g^n(x0)` in `target`, if any.
pub fn first_entry(g: &AffineMap, x0: &Rational, target: &Region) -> Result<Entry> {
    if target.contains(x0) {
        return Ok((Some(0), "starts inside".into()));
    }
    let x1 = g.apply(x0);
    if g.a.is_zero() {
        let hit = target.contains(&x1).then_some(1);
        return Ok((hit, "constant map: orbit is x0, b, b, ...".into()));
    }
    if g.a == -Rational::one() {
        let hit = target.contains(&x1).then_some(1);
        return Ok((hit, "slope -1: orbit has period 2".into()));
    }
    if g.a.is_one() {
        return Ok(arithmetic_entry(x0, &g.b, target));
    }
    if g.a.is_negative() {
        let g2 = g.after(g);
        let (even, ce) = first_entry(&g2, x0, target)?;
        let (odd, _) = first_entry(&g2, &x1, target)?;
        let best = match (even.map(|e| 2 * e), odd.map(|o| 2 * o + 1)) {
            (Some(e), Some(o)) => Some(e.min(o)),
            (e, o) => e.or(o),
        };
        return Ok((best, format!("negative slope: even and odd subsequences are monotone ({ce})")));
    }
    monotone_entry(g, x0, target)
}

fn arithmetic_entry(x0: &Rational, b: &Rational, target: &Region) -> Entry {
    if b.is_zero() {
        return (None, "identity map: orbit is constant".into());
    }
    // Smallest n with x0 + n*b on the far side of the near boundary.
    let near = if b.is_positive() { target.lower() } else { target.upper() };
    let n = match near {
        None => 0,
        Some((bound, closed)) => {
            let steps = (bound - x0) / b;
            if steps.is_negative() {
                0
            } else {
                let mut n = steps.ceil().to_integer();
                if !closed && steps.is_integer() {
                    n += 1;
                }
                match u64::try_from(n) {
                    Ok(n) => n,
                    Err(_) => return (None, "progression target beyond range".into()),
                }
            }
        }
    };
    let xn = x0 + Rational::from_integer(n.into()) * b;
    let hit = target.contains(&xn).then_some(n);
    (hit, format!("arithmetic progression with step {b}: first candidate n = {n}"))
}

/// Requires `a > 0`, `a != 1`.
fn monotone_entry(g: &AffineMap, x0: &Rational, target: &Region) -> Result<Entry> {
    let FixedPoint::Unique(p) = fixed_point(g) else { unreachable!("slope is not one") };
    if *x0 == p {
        return Ok((None, format!("x0 is the fixed point {p}")));
    }
    let contracting = g.a < Rational::one();
    let increasing = (*x0 < p) == contracting;
    if contracting {
        // The orbit stays strictly on the side of p where it starts.
        let reachable = if *x0 < p { target.has_point_below(&p) } else { target.has_point_above(&p) };
        if !reachable {
            return Ok((None, format!("contracts monotonically to {p} without reaching the target side")));
        }
    }
    let mut x = x0.clone();
    let mut n = 0u64;
    loop {
        if target.contains(&x) {
            return Ok((Some(n), format!("monotone orbit, fixed point {p}, slope {}", g.a)));
        }
        let dead = if increasing { !target.has_point_above(&x) } else { !target.has_point_below(&x) };
        if dead {
            return Ok((None, format!("monotone orbit passed the target at n = {n}, fixed point {p}")));
        }
        n += 1;
        if n > ITERATION_CAP {
            return Err(Error::ResourceLimit(format!("affine orbit exceeded {ITERATION_CAP} iterations")));
        }
        x = g.apply(&x);
    }
}

/// First `n` with `g^n(x0)` outside `domain`, if the orbit ever leaves.
pub fn first_exit(g: &AffineMap, x0: &Rational, domain: &Interval) -> Result<Entry> {
    if !domain.contains(x0) {
        return Ok((Some(0), "starts outside".into()));
    }
    let below = Region::Below(domain.lo.clone(), !domain.lo_closed);
    let above = Region::Above(domain.hi.clone(), !domain.hi_closed);
    let (lo_hit, c1) = first_entry(g, x0, &below)?;
    let (hi_hit, c2) = first_entry(g, x0, &above)?;
    let n = match (lo_hit, hi_hit) {
        (Some(a), Some(b)) => Some(a.min(b)),
        (a, b) => a.or(b),
    };
    Ok((n, format!("below: {c1}; above: {c2}")))
}

pub fn hits_point(g: &AffineMap, x0: &Rational, t: &Rational) -> Result<AffineOrbitAnswer> {
    let (n, cert) = first_entry(g, x0, &Region::Bounded(Interval::point(t.clone())))?;
    Ok(AffineOrbitAnswer::new(n.map_or(OrbitResult::Never, OrbitResult::Hit), cert))
}

/// Entry time when `x0` starts outside `iv`; exit time when it starts inside.
pub fn hits_interval(g: &AffineMap, x0: &Rational, iv: &Interval) -> Result<AffineOrbitAnswer> {
    if iv.contains(x0) {
        let (n, cert) = first_exit(g, x0, iv)?;
        return Ok(AffineOrbitAnswer::new(n.map_or(OrbitResult::AlwaysIn, OrbitResult::Escapes), cert));
    }
    let (n, cert) = first_entry(g, x0, &Region::Bounded(iv.clone()))?;
    Ok(AffineOrbitAnswer::new(n.map_or(OrbitResult::Never, OrbitResult::Hit), cert))
}

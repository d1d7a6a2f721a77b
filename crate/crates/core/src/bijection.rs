//! Surjective injective two-piece maps with positive slopes.
//!
//! On `[0, 1)` such a map is fixed by its cut `c` and `d = f(0)`. When
//! `c + d = 1` it is the rotation by `d`. Otherwise, after the reflection
//! `x -> (1 - x) mod 1` when needed, `c + d < 1` and the map is conjugate to
//! a rotation through `h(x) = ln(a x + 1) / ln(a + 1)`, which turns every
//! reachability question into the exponent equation `q1^m = q0 q2^n`.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::decision::{Decision, StepKind};
use crate::error::{Error, Result};
use crate::numerics::{
    floor_int, log_enclosure, mult_dependent, solve_mult_relation, DyadicInterval, Rational,
};
use crate::pam::{classify, AffineMap, Interval, Pam, Shape};

/// Largest rational period handled by explicit iteration.
pub const PERIOD_CAP: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BijectionParams {
    pub c: Rational,
    pub d: Rational,
    pub reflected: bool,
    /// Zero for a pure rotation.
    pub alpha: Rational,
    pub q1: Rational,
    pub q2: Rational,
}

impl fmt::Display for BijectionParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "c = {}, d = {}, alpha = {}, q1 = {}, q2 = {}", self.c, self.d, self.alpha, self.q1, self.q2)?;
        if self.reflected {
            f.write_str(", reflected")?;
        }
        Ok(())
    }
}

impl BijectionParams {
    pub fn from_cd(c: Rational, d: Rational) -> Result<BijectionParams> {
        let zero = Rational::zero();
        let one = Rational::one();
        if c <= zero || c >= one || d <= zero || d >= one {
            return Err(Error::PreconditionViolated(format!("need c, d in (0, 1), got c = {c}, d = {d}")));
        }
        let reflected = &c + &d > one;
        let (c, d) = if reflected { (&one - &c, &one - &d) } else { (c, d) };
        let alpha = (&one - &c - &d) / (&c * &d);
        let q1 = &alpha + &one;
        let q2 = &alpha * &d + &one;
        Ok(BijectionParams { c, d, reflected, alpha, q1, q2 })
    }

    pub fn is_pure_rotation(&self) -> bool {
        self.alpha.is_zero()
    }

    /// The normalized map on `[0, 1)`.
    pub fn canonical_map(&self) -> Pam {
        let one = Rational::one();
        let a1 = (&one - &self.d) / &self.c;
        let a2 = &self.d / (&one - &self.c);
        let b2 = -(&self.c * &self.d) / (&one - &self.c);
        Pam::two_piece(self.c.clone(), (a1, self.d.clone()), (a2, b2)).expect("canonical map is valid")
    }

    /// Transport a point of the original unit map into normalized coordinates.
    pub fn canonical_point(&self, x: &Rational) -> Rational {
        if self.reflected && !x.is_zero() {
            Rational::one() - x
        } else {
            x.clone()
        }
    }

    /// Transport an interval of `[0, 1)`; reflection may split off `{0}`.
    pub fn canonical_interval(&self, iv: &Interval) -> Vec<Interval> {
        if !self.reflected {
            return vec![iv.clone()];
        }
        let mut out = Vec::new();
        if iv.contains(&Rational::zero()) {
            out.push(Interval::point(Rational::zero()));
        }
        let mirrored = AffineMap::new(-Rational::one(), Rational::one()).image(iv);
        let open_unit = Interval::new(Rational::zero(), Rational::one(), false, false).expect("nonempty");
        out.extend(mirrored.intersect(&open_unit));
        out
    }
}

/// Extract the normalized parameters of a bijection on `[0, 1)`.
pub fn to_canonical(f: &Pam) -> Result<BijectionParams> {
    if classify(f).shape != Shape::Bijection {
        return Err(Error::PreconditionViolated("map is not a twisted surjective bijection".into()));
    }
    if f.carrier() != &Interval::closed_open(Rational::zero(), Rational::one()) {
        return Err(Error::PreconditionViolated(format!("expected carrier [0, 1), got {}", f.carrier())));
    }
    let c = f.piece(0).domain.hi.clone();
    let d = f.piece(0).map.b.clone();
    BijectionParams::from_cd(c, d)
}

/// Parameters of any twisted surjective bijection, after rescaling to the
/// unit interval and reflecting a carrier that is open below.
pub fn normalized_params(f: &Pam) -> Result<BijectionParams> {
    let (mut g, _) = f.rescale_to_unit()?;
    if !g.carrier().lo_closed {
        g = g.reflect()?.0;
    }
    to_canonical(&g)
}

fn traced(mut d: Decision, params: &BijectionParams, detail: String) -> Decision {
    d.trace.push(0, StepKind::Bijection, format!("{params}; {detail}"));
    d
}

/// `x0 + n d = t (mod 1)` with the least `n >= 0`.
pub fn decide_pure_rotation(params: &BijectionParams, x0: &Rational, t: &Rational) -> Result<Decision> {
    if !params.is_pure_rotation() {
        return Err(Error::PreconditionViolated("c + d is not 1".into()));
    }
    let delta = t - x0;
    let p = params.d.numer();
    let q = params.d.denom();
    // n p / q = delta (mod 1) needs delta q to be an integer.
    let dq = &delta * Rational::from_integer(q.clone());
    if !dq.is_integer() {
        return Ok(traced(Decision::no(), params, format!("rotation by {}; {t} - {x0} is not a multiple of 1/{q}", params.d)));
    }
    let k = dq.to_integer().mod_floor(q);
    let inv = mod_inverse(p, q).expect("p and q are coprime");
    let n = (k * inv).mod_floor(q);
    let n = n.to_u64().ok_or_else(|| Error::ResourceLimit(format!("witness {n} does not fit in 64 bits")))?;
    Ok(traced(Decision::yes(n), params, format!("rotation by {}; n = {n}", params.d)))
}

fn mod_inverse(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    if m.is_one() {
        return Some(BigInt::zero());
    }
    let e = a.mod_floor(m).extended_gcd(m);
    e.gcd.is_one().then(|| e.x.mod_floor(m))
}

/// Point reachability for a normalized bijection, through the exponent equation.
pub fn decide_bijection(params: &BijectionParams, x0: &Rational, t: &Rational) -> Result<Decision> {
    if params.is_pure_rotation() {
        return decide_pure_rotation(params, x0, t);
    }
    if x0 == t {
        return Ok(traced(Decision::yes(0), params, "t = x0".into()));
    }
    let one = Rational::one();
    let q0 = (&params.alpha * x0 + &one) / (&params.alpha * t + &one);
    let sols = solve_mult_relation(&q0, &params.q1, &params.q2)?;
    let detail = format!("q0 = {q0}; solving q1^m = q0 * q2^n");
    Ok(match sols.min_by_n() {
        Some((n, m)) => traced(Decision::yes(n), params, format!("{detail}; minimal (n, m) = ({n}, {m})")),
        None => traced(Decision::no(), params, format!("{detail}; no nonnegative solution")),
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RotationRep {
    /// `tau = p / q` in lowest terms; the map has period `q`.
    Rational { p: u64, q: u64 },
    Irrational { q1: Rational, q2: Rational },
}

impl fmt::Display for RotationRep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RotationRep::Rational { p, q } => write!(f, "rational {p}/{q}"),
            RotationRep::Irrational { q1, q2 } => write!(f, "irrational (q1 = {q1}, q2 = {q2})"),
        }
    }
}

impl RotationRep {
    pub fn period(&self) -> Option<u64> {
        match self {
            RotationRep::Rational { q, .. } => Some(*q),
            RotationRep::Irrational { .. } => None,
        }
    }
}

/// Rationality of `tau = ln q2 / ln q1`.
pub fn tau_rationality(params: &BijectionParams) -> Result<RotationRep> {
    if params.is_pure_rotation() {
        let p = params.d.numer().to_u64();
        let q = params.d.denom().to_u64();
        return match (p, q) {
            (Some(p), Some(q)) => Ok(RotationRep::Rational { p, q }),
            _ => Err(Error::ResourceLimit(format!("rotation number {} is too large", params.d))),
        };
    }
    if params.q1 == params.q2 {
        return Err(Error::PreconditionViolated("q1 = q2 gives a full turn".into()));
    }
    // q1^a = q2^b means tau = a / b.
    Ok(match mult_dependent(&params.q1, &params.q2)? {
        Some((a, b)) => {
            let g = a.gcd(&b);
            RotationRep::Rational { p: a / g, q: b / g }
        }
        None => RotationRep::Irrational { q1: params.q1.clone(), q2: params.q2.clone() },
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConjugacyReport {
    pub samples: usize,
    pub precision: u32,
    pub all_overlap: bool,
    /// Largest enclosure width seen, as an upper bound.
    pub max_width: Rational,
}

fn h_enclosure(params: &BijectionParams, x: &Rational, prec: u32) -> Result<DyadicInterval> {
    let num = log_enclosure(&(&params.alpha * x + Rational::one()), prec + 8)?;
    let den = log_enclosure(&params.q1, prec + 8)?;
    num.div(&den, prec + 8)
}

/// Check numerically that `h(f(x))` and `h(x) + tau mod 1` agree at sample points.
pub fn verify_conjugacy(params: &BijectionParams, sample_count: usize, precision: u32) -> Result<ConjugacyReport> {
    if params.is_pure_rotation() {
        return Err(Error::PreconditionViolated("pure rotation needs no conjugacy".into()));
    }
    if precision > 4096 {
        return Err(Error::ResourceLimit(format!("precision {precision} exceeds 4096 bits")));
    }
    let f = params.canonical_map();
    let tau = log_enclosure(&params.q2, precision + 8)?.div(&log_enclosure(&params.q1, precision + 8)?, precision + 8)?;
    let mut xs: Vec<Rational> = (0..sample_count)
        .map(|k| Rational::new(BigInt::from(k), BigInt::from(sample_count.max(1))))
        .collect();
    // Just left of the cut exercises the wrap branch boundary.
    xs.push(&params.c - Rational::new(BigInt::one(), BigInt::from(1u64 << 20)));
    let mut all = true;
    let mut max_width = Rational::zero();
    for x in &xs {
        let lhs = h_enclosure(params, &f.eval(x)?.0, precision)?;
        let mut rhs = h_enclosure(params, x, precision)?.add(&tau, precision + 8);
        if x >= &params.c {
            rhs = rhs.add_rational(&-Rational::one(), precision + 8);
        }
        all &= lhs.overlaps(&rhs);
        max_width = max_width.max(lhs.width()).max(rhs.width());
    }
    Ok(ConjugacyReport { samples: xs.len(), precision, all_overlap: all, max_width })
}

/// Smallest `n < period` with `f^n(x0)` in `iv`, by exact iteration.
pub fn first_hit_within(f: &Pam, x0: &Rational, iv: &Interval, period: u64) -> Result<Option<u64>> {
    if period > PERIOD_CAP {
        return Err(Error::ResourceLimit(format!("period {period} exceeds {PERIOD_CAP}")));
    }
    let mut x = x0.clone();
    for n in 0..period {
        if iv.contains(&x) {
            return Ok(Some(n));
        }
        x = f.eval(&x)?.0;
    }
    Ok(None)
}

/// Integer part, used when wrapping a rotation coordinate.
pub fn wrap(x: &Rational) -> Rational {
    x - Rational::from_integer(floor_int(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{int, rat};

    fn intro() -> Pam {
        Pam::two_piece(rat(1, 2), (rat(2, 3), rat(2, 3)), (rat(4, 3), rat(-2, 3))).unwrap()
    }

    #[test]
    fn canonical_params() {
        let p = to_canonical(&intro()).unwrap();
        assert!(p.reflected);
        assert_eq!((p.c.clone(), p.d.clone(), p.alpha.clone()), (rat(1, 2), rat(1, 3), int(1)));
        let p = BijectionParams::from_cd(rat(1, 3), rat(1, 3)).unwrap();
        assert_eq!((p.alpha.clone(), p.q1.clone(), p.q2.clone()), (int(3), int(4), int(2)));
        assert!(BijectionParams::from_cd(rat(1, 2), rat(1, 2)).unwrap().is_pure_rotation());
    }

    #[test]
    fn reflection_conjugates() {
        let f = intro();
        let p = to_canonical(&f).unwrap();
        let g = p.canonical_map();
        for k in 0..24 {
            let x = rat(k, 24);
            assert_eq!(p.canonical_point(&f.eval(&x).unwrap().0), g.eval(&p.canonical_point(&x)).unwrap().0);
        }
    }

    #[test]
    fn pure_rotation() {
        let half = BijectionParams::from_cd(rat(1, 2), rat(1, 2)).unwrap();
        assert_eq!(decide_pure_rotation(&half, &int(0), &rat(1, 2)).unwrap().steps(), Some(1));
        let third = BijectionParams::from_cd(rat(2, 3), rat(1, 3)).unwrap();
        assert!(decide_pure_rotation(&third, &int(0), &rat(1, 2)).unwrap().is_no());
        assert_eq!(decide_pure_rotation(&third, &rat(1, 3), &int(0)).unwrap().steps(), Some(2));
        assert_eq!(decide_pure_rotation(&third, &rat(1, 5), &rat(1, 5)).unwrap().steps(), Some(0));
    }

    #[test]
    fn exponent_equation() {
        let p = BijectionParams::from_cd(rat(1, 2), rat(1, 3)).unwrap();
        assert_eq!(decide_bijection(&p, &int(0), &rat(7, 9)).unwrap().steps(), Some(2));
        assert!(decide_bijection(&p, &int(0), &rat(1, 2)).unwrap().is_no());
        assert_eq!(decide_bijection(&p, &rat(2, 5), &rat(2, 5)).unwrap().steps(), Some(0));
    }

    #[test]
    fn rotation_numbers() {
        let p = BijectionParams::from_cd(rat(1, 3), rat(1, 3)).unwrap();
        assert_eq!(tau_rationality(&p).unwrap(), RotationRep::Rational { p: 1, q: 2 });
        assert_eq!(p.canonical_map().compose_power(2).unwrap().pieces().len(), 1);
        let p = BijectionParams::from_cd(rat(1, 2), rat(1, 3)).unwrap();
        assert!(matches!(tau_rationality(&p).unwrap(), RotationRep::Irrational { .. }));
    }

    #[test]
    fn conjugacy_overlaps() {
        let p = BijectionParams::from_cd(rat(1, 2), rat(1, 3)).unwrap();
        for prec in [10, 40] {
            let r = verify_conjugacy(&p, 8, prec).unwrap();
            assert!(r.all_overlap);
        }
    }
}

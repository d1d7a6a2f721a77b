use std::fmt;

use num_traits::{One, Signed, Zero};

use super::interval::{Interval, IntervalSet, Preimage};
use crate::error::{Error, Result};
use crate::numerics::Rational;

/// Default bound on the number of pieces produced by [`Pam::compose_power`].
pub const DEFAULT_PIECE_BOUND: usize = 1 << 16;

/// `x -> a*x + b`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AffineMap {
    pub a: Rational,
    pub b: Rational,
}

impl AffineMap {
    pub fn new(a: Rational, b: Rational) -> AffineMap {
        AffineMap { a, b }
    }

    pub fn identity() -> AffineMap {
        AffineMap::new(Rational::one(), Rational::zero())
    }

    pub fn apply(&self, x: &Rational) -> Rational {
        &self.a * x + &self.b
    }

    /// `self ∘ inner`.
    pub fn after(&self, inner: &AffineMap) -> AffineMap {
        AffineMap::new(&self.a * &inner.a, &self.a * &inner.b + &self.b)
    }

    pub fn inverse(&self) -> Option<AffineMap> {
        if self.a.is_zero() {
            return None;
        }
        let inv = self.a.recip();
        Some(AffineMap::new(inv.clone(), -(&self.b * inv)))
    }

    pub fn image(&self, iv: &Interval) -> Interval {
        iv.affine_image(&self.a, &self.b)
    }

    pub fn preimage(&self, iv: &Interval) -> Preimage {
        iv.affine_preimage(&self.a, &self.b)
    }
}

impl fmt::Display for AffineMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_negative() {
            write!(f, "{}*x - {}", self.a, -&self.b)
        } else {
            write!(f, "{}*x + {}", self.a, self.b)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Piece {
    pub domain: Interval,
    pub map: AffineMap,
}

impl Piece {
    pub fn new(domain: Interval, map: AffineMap) -> Piece {
        Piece { domain, map }
    }

    pub fn image(&self) -> Interval {
        self.map.image(&self.domain)
    }
}

/// A piecewise affine self-map of `carrier`.
///
/// Invariants: pieces are sorted, their domains partition the carrier
/// exactly, and every piece image lies inside the carrier.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pam {
    carrier: Interval,
    pieces: Vec<Piece>,
}

/// Invertible affine change of coordinates between two levels of a reduction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transport {
    pub forward: AffineMap,
    pub backward: AffineMap,
}

impl Transport {
    pub fn new(forward: AffineMap) -> Transport {
        let backward = forward.inverse().expect("transport must be invertible");
        Transport { forward, backward }
    }

    pub fn identity() -> Transport {
        Transport::new(AffineMap::identity())
    }

    pub fn apply(&self, x: &Rational) -> Rational {
        self.forward.apply(x)
    }

    pub fn unapply(&self, y: &Rational) -> Rational {
        self.backward.apply(y)
    }

    pub fn apply_interval(&self, iv: &Interval) -> Interval {
        self.forward.image(iv)
    }

    pub fn apply_set(&self, s: &IntervalSet) -> IntervalSet {
        IntervalSet::from_intervals(s.parts().iter().map(|p| self.apply_interval(p)))
    }
}

impl Pam {
    pub fn new(carrier: Interval, pieces: Vec<Piece>) -> Result<Pam> {
        let bad = |msg: String| Err(Error::InvalidPam(msg));
        let (Some(first), Some(last)) = (pieces.first(), pieces.last()) else {
            return bad("a map needs at least one piece".into());
        };
        if first.domain.lo != carrier.lo || first.domain.lo_closed != carrier.lo_closed {
            return bad(format!("first piece {} does not start the carrier {carrier}", first.domain));
        }
        if last.domain.hi != carrier.hi || last.domain.hi_closed != carrier.hi_closed {
            return bad(format!("last piece {} does not end the carrier {carrier}", last.domain));
        }
        for w in pieces.windows(2) {
            let (l, r) = (&w[0].domain, &w[1].domain);
            if l.hi != r.lo || l.hi_closed == r.lo_closed {
                return bad(format!("pieces {l} and {r} do not meet exactly"));
            }
        }
        for (k, p) in pieces.iter().enumerate() {
            let img = p.image();
            if !img.is_subset_of(&carrier) {
                return bad(format!("piece {} maps {} onto {img}, outside the carrier {carrier}", k + 1, p.domain));
            }
        }
        Ok(Pam { carrier, pieces })
    }

    /// Convenience constructor on `[lo, hi)` from cut points and `(a, b)` pairs.
    pub fn from_cuts(cuts: &[Rational], maps: &[(Rational, Rational)]) -> Result<Pam> {
        if cuts.len() != maps.len() + 1 {
            return Err(Error::InvalidPam("need one more cut point than maps".into()));
        }
        let mut pieces = Vec::with_capacity(maps.len());
        for (k, (a, b)) in maps.iter().enumerate() {
            let dom = Interval::new(cuts[k].clone(), cuts[k + 1].clone(), true, false)
                .ok_or_else(|| Error::InvalidPam(format!("cut points must increase at {}", cuts[k])))?;
            pieces.push(Piece::new(dom, AffineMap::new(a.clone(), b.clone())));
        }
        let carrier = Interval::new(cuts[0].clone(), cuts[maps.len()].clone(), true, false)
            .ok_or_else(|| Error::InvalidPam("empty carrier".into()))?;
        Pam::new(carrier, pieces)
    }

    /// The usual two-piece map on `[0,1)` with cut `c`.
    pub fn two_piece(c: Rational, m1: (Rational, Rational), m2: (Rational, Rational)) -> Result<Pam> {
        Pam::from_cuts(&[Rational::zero(), c, Rational::one()], &[m1, m2])
    }

    pub fn carrier(&self) -> &Interval {
        &self.carrier
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn piece(&self, k: usize) -> &Piece {
        &self.pieces[k]
    }

    pub fn len(&self) -> usize {
        self.pieces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    /// Index of the piece containing `x`.
    pub fn piece_index(&self, x: &Rational) -> Result<usize> {
        let k = self.pieces.partition_point(|p| {
            p.domain.hi < *x || (p.domain.hi == *x && !p.domain.hi_closed)
        });
        match self.pieces.get(k) {
            Some(p) if p.domain.contains(x) => Ok(k),
            _ => Err(Error::OutOfCarrier(format!("{x} of {}", self.carrier))),
        }
    }

    pub fn eval(&self, x: &Rational) -> Result<(Rational, usize)> {
        let k = self.piece_index(x)?;
        Ok((self.pieces[k].map.apply(x), k))
    }

    /// `n + 1` orbit points `x0, f(x0), ..., f^n(x0)` with the piece of each.
    pub fn iterate(&self, x0: &Rational, n: u64) -> Result<Vec<(Rational, usize)>> {
        let mut out = Vec::with_capacity(n.min(1 << 20) as usize + 1);
        let mut x = x0.clone();
        for _ in 0..n {
            let (y, k) = self.eval(&x)?;
            out.push((x, k));
            x = y;
        }
        let k = self.piece_index(&x)?;
        out.push((x, k));
        Ok(out)
    }

    pub fn nth(&self, x0: &Rational, n: u64) -> Result<Rational> {
        let mut x = x0.clone();
        for _ in 0..n {
            x = self.eval(&x)?.0;
        }
        Ok(x)
    }

    /// `g ∘ self`, refined to the cylinders of both maps. Requires that the
    /// image of `self` lies in the carrier of `g`.
    pub fn then(&self, g: &Pam, bound: usize) -> Result<Pam> {
        let mut pieces = Vec::new();
        for p in &self.pieces {
            for q in &g.pieces {
                let dom = match p.map.preimage(&q.domain) {
                    Preimage::Empty => None,
                    Preimage::Everything => Some(p.domain.clone()),
                    Preimage::Interval(iv) => p.domain.intersect(&iv),
                };
                if let Some(dom) = dom {
                    pieces.push(Piece::new(dom, q.map.after(&p.map)));
                    if pieces.len() > bound {
                        return Err(Error::ResourceLimit(format!("composition exceeds {bound} pieces")));
                    }
                }
            }
        }
        pieces.sort_by(|x, y| (&x.domain.lo, !x.domain.lo_closed).cmp(&(&y.domain.lo, !y.domain.lo_closed)));
        Pam::new(self.carrier.clone(), merge_equal_neighbours(pieces))
    }

    pub fn compose_power(&self, k: u64) -> Result<Pam> {
        self.compose_power_bounded(k, DEFAULT_PIECE_BOUND)
    }

    pub fn compose_power_bounded(&self, k: u64, bound: usize) -> Result<Pam> {
        if k == 0 {
            return Err(Error::PreconditionViolated("compose_power needs k >= 1".into()));
        }
        let mut acc = self.clone();
        for _ in 1..k {
            acc = acc.then(self, bound)?;
        }
        Ok(acc)
    }

    /// `h ∘ self ∘ h⁻¹` on the carrier `h(carrier)`.
    pub fn conjugate(&self, h: &AffineMap) -> Result<Pam> {
        let inv = h
            .inverse()
            .ok_or_else(|| Error::PreconditionViolated("conjugation needs a nonzero slope".into()))?;
        let carrier = h.image(&self.carrier);
        let mut pieces: Vec<Piece> = self
            .pieces
            .iter()
            .map(|p| Piece::new(h.image(&p.domain), h.after(&p.map).after(&inv)))
            .collect();
        if h.a.is_negative() {
            pieces.reverse();
        }
        Pam::new(carrier, pieces)
    }

    /// Conjugate onto the unit interval by `h(x) = (x - lo) / (hi - lo)`.
    pub fn rescale_to_unit(&self) -> Result<(Pam, Transport)> {
        if self.carrier.is_degenerate() {
            return Err(Error::PreconditionViolated("carrier is a single point".into()));
        }
        let s = self.carrier.length().recip();
        let h = AffineMap::new(s.clone(), -(&self.carrier.lo * &s));
        Ok((self.conjugate(&h)?, Transport::new(h)))
    }

    /// Conjugate by `h(x) = 1 - x`; flags of every interval flip.
    pub fn reflect(&self) -> Result<(Pam, Transport)> {
        if !self.carrier.lo.is_zero() || !self.carrier.hi.is_one() {
            return Err(Error::PreconditionViolated(format!("reflect needs carrier [0,1], got {}", self.carrier)));
        }
        let h = AffineMap::new(-Rational::one(), Rational::one());
        Ok((self.conjugate(&h)?, Transport::new(h)))
    }

    /// Replace the carrier by a subinterval that the map sends into itself.
    pub fn restrict(&self, carrier: &Interval) -> Result<Pam> {
        let pieces = self
            .pieces
            .iter()
            .filter_map(|p| p.domain.intersect(carrier).map(|d| Piece::new(d, p.map.clone())))
            .collect();
        Pam::new(carrier.clone(), pieces).map_err(|e| match e {
            Error::InvalidPam(m) => Error::NotSelfMap(m),
            other => other,
        })
    }

    pub fn image_of_piece(&self, k: usize) -> Interval {
        self.pieces[k].image()
    }

    pub fn image_set(&self, s: &IntervalSet) -> IntervalSet {
        IntervalSet::from_intervals(s.parts().iter().flat_map(|part| {
            self.pieces.iter().filter_map(move |p| p.domain.intersect(part).map(|d| p.map.image(&d)))
        }))
    }

    pub fn full_image(&self) -> IntervalSet {
        IntervalSet::from_intervals((0..self.len()).map(|k| self.image_of_piece(k)))
    }

    pub fn preimage_set(&self, s: &IntervalSet) -> IntervalSet {
        IntervalSet::from_intervals(self.pieces.iter().flat_map(|p| {
            s.parts().iter().filter_map(move |part| match p.map.preimage(part) {
                Preimage::Empty => None,
                Preimage::Everything => Some(p.domain.clone()),
                Preimage::Interval(iv) => p.domain.intersect(&iv),
            })
        }))
    }

    /// All `(x, k)` with `x` in piece `k` and `f(x) = y`.
    pub fn preimages_of_point(&self, y: &Rational) -> Vec<(Rational, usize)> {
        let mut out = Vec::new();
        for (k, p) in self.pieces.iter().enumerate() {
            if p.map.a.is_zero() {
                if p.map.b == *y {
                    // A constant piece has a whole interval of preimages; report its left end.
                    let x = p.domain.lo.clone();
                    if p.domain.contains(&x) {
                        out.push((x, k));
                    } else {
                        out.push(((&p.domain.lo + &p.domain.hi) / Rational::from_integer(2.into()), k));
                    }
                }
            } else {
                let x = (y - &p.map.b) / &p.map.a;
                if p.domain.contains(&x) {
                    out.push((x, k));
                }
            }
        }
        out
    }

    pub fn slopes(&self) -> impl Iterator<Item = &Rational> {
        self.pieces.iter().map(|p| &p.map.a)
    }
}

fn merge_equal_neighbours(pieces: Vec<Piece>) -> Vec<Piece> {
    let mut out: Vec<Piece> = Vec::with_capacity(pieces.len());
    for p in pieces {
        if let Some(last) = out.last_mut() {
            if last.map == p.map && last.domain.hi == p.domain.lo && last.domain.hi_closed != p.domain.lo_closed {
                last.domain.hi = p.domain.hi;
                last.domain.hi_closed = p.domain.hi_closed;
                continue;
            }
        }
        out.push(p);
    }
    out
}

impl fmt::Display for Pam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", super::text::format_pam(self))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{int, rat};

    pub(crate) fn intro() -> Pam {
        Pam::two_piece(rat(1, 2), (rat(2, 3), rat(2, 3)), (rat(4, 3), rat(-2, 3))).unwrap()
    }

    #[test]
    fn eval_examples() {
        let f = intro();
        assert_eq!(f.eval(&int(0)).unwrap(), (rat(2, 3), 0));
        assert_eq!(f.eval(&rat(1, 2)).unwrap(), (int(0), 1));
        assert!(matches!(f.eval(&int(1)), Err(Error::OutOfCarrier(_))));
        let vals: Vec<Rational> = f.iterate(&rat(1, 2), 3).unwrap().into_iter().map(|p| p.0).collect();
        assert_eq!(vals, vec![rat(1, 2), int(0), rat(2, 3), rat(2, 9)]);
        assert_eq!(f.iterate(&rat(1, 3), 0).unwrap().len(), 1);
    }

    #[test]
    fn constructor_rejects_escaping_images() {
        let bad = Pam::two_piece(rat(1, 2), (int(1), rat(3, 4)), (int(1), rat(-1, 2)));
        assert!(matches!(bad, Err(Error::InvalidPam(_))));
        let gap = Pam::new(
            Interval::unit(),
            vec![
                Piece::new(Interval::closed_open(int(0), rat(1, 2)), AffineMap::identity()),
                Piece::new(Interval::new(rat(1, 2), int(1), false, false).unwrap(), AffineMap::identity()),
            ],
        );
        assert!(matches!(gap, Err(Error::InvalidPam(_))));
    }

    #[test]
    fn powers() {
        let f = Pam::two_piece(rat(1, 3), (int(2), rat(1, 3)), (rat(1, 2), rat(-1, 6))).unwrap();
        let g = f.compose_power(2).unwrap();
        for p in g.pieces() {
            assert_eq!(p.map, AffineMap::identity());
        }
        assert_eq!(f.compose_power(1).unwrap(), f);
        let gap = Pam::two_piece(rat(1, 2), (rat(1, 2), rat(3, 4)), (rat(1, 2), rat(-1, 4))).unwrap();
        assert!(gap.compose_power(2).unwrap().slopes().all(|a| *a == rat(1, 4)));
    }

    #[test]
    fn rescale_and_reflect() {
        let carrier = Interval::closed_open(rat(1, 4), rat(3, 4));
        let f = Pam::new(carrier.clone(), vec![Piece::new(carrier, AffineMap::new(rat(1, 2), rat(1, 4)))]).unwrap();
        let (g, h) = f.rescale_to_unit().unwrap();
        assert_eq!(g.carrier(), &Interval::unit());
        assert_eq!(g.piece(0).map, AffineMap::new(rat(1, 2), rat(1, 4)));
        assert_eq!(h.apply(&rat(1, 2)), rat(1, 2));

        let (r, _) = intro().reflect().unwrap();
        assert_eq!(r.carrier(), &Interval::new(int(0), int(1), false, true).unwrap());
        assert_eq!(r.piece(0).domain, Interval::new(int(0), rat(1, 2), false, true).unwrap());
        assert_eq!(r.piece(1).map.apply(&int(1)), rat(1, 3));
        assert_eq!(r.reflect().unwrap().0, intro());
    }

    #[test]
    fn gap_image() {
        let gap = Pam::two_piece(rat(1, 2), (rat(1, 2), rat(3, 4)), (rat(1, 2), rat(-1, 4))).unwrap();
        let img = gap.image_set(&IntervalSet::from_interval(Interval::unit()));
        assert_eq!(
            img.parts(),
            &[Interval::closed_open(int(0), rat(1, 4)), Interval::closed_open(rat(3, 4), int(1))]
        );
        assert!(gap.image_set(&IntervalSet::empty()).is_empty());
    }
}

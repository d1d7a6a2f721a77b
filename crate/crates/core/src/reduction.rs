//! Structural reductions between maps and the two easy graph cases.
//!
//! A [`Level`] is a map together with the number of original steps each of
//! its pieces stands for. Targets carry an offset in original steps: a level
//! point `y` inside a tagged part `(J, k)` means the original orbit meets the
//! target `k` steps after it visits `y`. Offsets are always smaller than the
//! stride of the piece containing the part, so the earliest level step that
//! meets any part also gives the earliest original step.

use std::fmt;

use num_traits::{Signed, Zero};

use crate::affine_orbit::{closed_form, first_entry, first_exit, Region};
use crate::error::{Error, Result};
use crate::numerics::Rational;
use crate::pam::{AffineMap, Interval, IntervalSet, Pam, Piece, Preimage};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tagged {
    pub part: Interval,
    pub offset: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Targets(pub Vec<Tagged>);

impl Targets {
    pub fn from_set(s: &IntervalSet) -> Targets {
        Targets(s.parts().iter().map(|p| Tagged { part: p.clone(), offset: 0 }).collect())
    }

    pub fn point(t: &Rational) -> Targets {
        Targets(vec![Tagged { part: Interval::point(t.clone()), offset: 0 }])
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Smallest offset among parts containing `x`.
    pub fn hit_offset(&self, x: &Rational) -> Option<u64> {
        self.0.iter().filter(|t| t.part.contains(x)).map(|t| t.offset).min()
    }

    pub fn restrict(&self, iv: &Interval) -> Targets {
        Targets(
            self.0
                .iter()
                .filter_map(|t| t.part.intersect(iv).map(|part| Tagged { part, offset: t.offset }))
                .collect(),
        )
    }

    pub fn transport(&self, h: &AffineMap) -> Targets {
        Targets(self.0.iter().map(|t| Tagged { part: h.image(&t.part), offset: t.offset }).collect())
    }

    pub fn untagged(&self) -> bool {
        self.0.iter().all(|t| t.offset == 0)
    }

    pub fn to_set(&self) -> IntervalSet {
        IntervalSet::from_intervals(self.0.iter().map(|t| t.part.clone()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Level {
    pub pam: Pam,
    pub strides: Vec<u64>,
}

impl Level {
    pub fn top(pam: Pam) -> Level {
        let strides = vec![1; pam.len()];
        Level { pam, strides }
    }

    pub fn is_unit(&self) -> bool {
        self.strides.iter().all(|&s| s == 1)
    }

    /// One level step: the image and its cost in original steps.
    pub fn step(&self, x: &Rational) -> Result<(Rational, u64)> {
        let (y, k) = self.pam.eval(x)?;
        Ok((y, self.strides[k]))
    }

    pub fn conjugate(&self, h: &AffineMap) -> Result<Level> {
        let pam = self.pam.conjugate(h)?;
        let mut strides = self.strides.clone();
        if h.a.is_negative() {
            strides.reverse();
        }
        Ok(Level { pam, strides })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LevelOutcome {
    /// Earliest hit, in original steps from the level's start point.
    Hit(u64),
    Never,
    /// A hit exists; no step count was computed.
    Exists,
    Unknown(String),
}

impl fmt::Display for LevelOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LevelOutcome::Hit(n) => write!(f, "hit after {n} steps"),
            LevelOutcome::Never => write!(f, "never hits"),
            LevelOutcome::Exists => write!(f, "hit exists"),
            LevelOutcome::Unknown(m) => write!(f, "unknown ({m})"),
        }
    }
}

impl LevelOutcome {
    pub fn shifted(self, by: u64) -> LevelOutcome {
        match self {
            LevelOutcome::Hit(n) => LevelOutcome::Hit(n + by),
            other => other,
        }
    }
}

fn earliest(best: &mut Option<(u64, u64)>, cand: (u64, u64)) {
    if best.is_none_or(|b| cand < b) {
        *best = Some(cand);
    }
}

/// Walk a map whose graph has no cycle except self-loops.
pub fn walk_dag(level: &Level, x0: &Rational, targets: &Targets) -> Result<LevelOutcome> {
    let f = &level.pam;
    let mut x = x0.clone();
    let mut time = 0u64;
    for _ in 0..=2 * f.len() + 2 {
        let k = f.piece_index(&x)?;
        let piece = f.piece(k);
        let stride = level.strides[k];
        let (exit, _) = first_exit(&piece.map, &x, &piece.domain)?;
        let mut best: Option<(u64, u64)> = None;
        for t in &targets.0 {
            let (m, _) = first_entry(&piece.map, &x, &Region::Bounded(t.part.clone()))?;
            if let Some(m) = m.filter(|&m| exit.is_none_or(|e| m < e)) {
                earliest(&mut best, (m, t.offset));
            }
        }
        if let Some((m, off)) = best {
            return Ok(LevelOutcome::Hit(time + m * stride + off));
        }
        let Some(exit) = exit else { return Ok(LevelOutcome::Never) };
        x = closed_form(&piece.map, &x, exit);
        time += exit * stride;
    }
    Err(Error::PreconditionViolated("trajectory revisited a piece; the graph has a longer cycle".into()))
}

/// Walk a map whose graph gives every piece exactly one successor.
pub fn walk_functional(level: &Level, x0: &Rational, targets: &Targets) -> Result<LevelOutcome> {
    let f = &level.pam;
    let mut x = x0.clone();
    let mut time = 0u64;
    // After `len` steps the trajectory is on the cycle of the successor graph.
    for _ in 0..f.len() {
        if let Some(off) = targets.hit_offset(&x) {
            return Ok(LevelOutcome::Hit(time + off));
        }
        let (y, s) = level.step(&x)?;
        x = y;
        time += s;
    }
    let start = f.piece_index(&x)?;
    let mut cycle = vec![start];
    loop {
        let last = *cycle.last().expect("nonempty");
        let next = f.piece_index(&f.piece(last).map.apply(&f.piece(last).domain.lo))
            .or_else(|_| f.piece_index(&f.piece(last).map.apply(&f.piece(last).domain.hi)))?;
        if next == start {
            break;
        }
        if cycle.len() > f.len() {
            return Err(Error::PreconditionViolated("successor graph is not functional".into()));
        }
        cycle.push(next);
    }
    let p = cycle.len();
    let period: u64 = cycle.iter().map(|&k| level.strides[k]).sum();
    let mut best: Option<(u64, u64)> = None;
    let mut phase_x = x;
    let mut phase_time = time;
    for j in 0..p {
        let mut a = AffineMap::identity();
        for i in 0..p {
            a = f.piece(cycle[(j + i) % p]).map.after(&a);
        }
        for t in &targets.0 {
            let (m, _) = first_entry(&a, &phase_x, &Region::Bounded(t.part.clone()))?;
            if let Some(m) = m {
                earliest(&mut best, (phase_time + m * period, t.offset));
            }
        }
        phase_time += level.strides[cycle[j]];
        phase_x = f.piece(cycle[j]).map.apply(&phase_x);
    }
    Ok(best.map_or(LevelOutcome::Never, |(t, off)| LevelOutcome::Hit(t + off)))
}

/// Points of `carrier` outside `d`.
fn complement(carrier: &Interval, d: &Interval) -> Vec<Interval> {
    let mut out = Vec::new();
    if let Some(left) = Interval::new(carrier.lo.clone(), d.lo.clone(), carrier.lo_closed, !d.lo_closed) {
        if let Some(l) = left.intersect(carrier) {
            out.push(l);
        }
    }
    if let Some(right) = Interval::new(d.hi.clone(), carrier.hi.clone(), !d.hi_closed, carrier.hi_closed) {
        if let Some(r) = right.intersect(carrier) {
            out.push(r);
        }
    }
    out
}

fn pull_back(map: &AffineMap, within: &Interval, target: &Interval) -> Option<Interval> {
    match map.preimage(target) {
        Preimage::Empty => None,
        Preimage::Everything => Some(within.clone()),
        Preimage::Interval(iv) => within.intersect(&iv),
    }
}

struct Cylinder {
    domain: Interval,
    map: AffineMap,
    stride: u64,
    /// Composite map to each intermediate point and its time offset.
    stops: Vec<(AffineMap, u64)>,
}

/// First-return map onto `d`, with targets carried over.
///
/// Requires every point of `d` to come back to `d` within `max_return`
/// level steps; otherwise `ResourceLimit`.
pub fn first_return(level: &Level, d: &Interval, targets: &Targets, max_return: usize) -> Result<(Level, Targets)> {
    let f = &level.pam;
    let outside = complement(f.carrier(), d);
    let mut open: Vec<Cylinder> = f
        .pieces()
        .iter()
        .zip(&level.strides)
        .filter_map(|(p, &s)| {
            p.domain.intersect(d).map(|dom| Cylinder { domain: dom, map: p.map.clone(), stride: s, stops: vec![] })
        })
        .collect();
    let mut done: Vec<Cylinder> = Vec::new();
    for _ in 0..max_return {
        let mut next = Vec::new();
        for cyl in open {
            if let Some(home) = pull_back(&cyl.map, &cyl.domain, d) {
                done.push(Cylinder { domain: home, map: cyl.map.clone(), stride: cyl.stride, stops: cyl.stops.clone() });
            }
            for (q, &s) in f.pieces().iter().zip(&level.strides) {
                for out in &outside {
                    let Some(region) = q.domain.intersect(out) else { continue };
                    if let Some(dom) = pull_back(&cyl.map, &cyl.domain, &region) {
                        let mut stops = cyl.stops.clone();
                        stops.push((cyl.map.clone(), cyl.stride));
                        next.push(Cylinder { domain: dom, map: q.map.after(&cyl.map), stride: cyl.stride + s, stops });
                    }
                }
            }
        }
        open = next;
        if open.is_empty() {
            break;
        }
    }
    if !open.is_empty() {
        return Err(Error::ResourceLimit(format!("first return to {d} takes more than {max_return} steps")));
    }
    done.sort_by(|a, b| (&a.domain.lo, !a.domain.lo_closed).cmp(&(&b.domain.lo, !b.domain.lo_closed)));

    let mut new_targets = targets.restrict(d);
    for cyl in &done {
        for (m, t0) in &cyl.stops {
            for t in &targets.0 {
                if let Some(part) = pull_back(m, &cyl.domain, &t.part) {
                    new_targets.0.push(Tagged { part, offset: t0 + t.offset });
                }
            }
        }
    }
    let strides = done.iter().map(|c| c.stride).collect();
    let pieces = done.into_iter().map(|c| Piece::new(c.domain, c.map)).collect();
    let pam = Pam::new(d.clone(), pieces)?;
    Ok((Level { pam, strides }, new_targets))
}

/// Push `x0` forward until it lies in `d`, checking targets on the way.
/// Returns the entry point and elapsed time, or the earliest hit.
pub fn push_into(
    level: &Level,
    x0: &Rational,
    d: &Interval,
    targets: &Targets,
    cap: usize,
) -> Result<std::result::Result<(Rational, u64), LevelOutcome>> {
    let mut x = x0.clone();
    let mut time = 0u64;
    for _ in 0..=cap {
        if d.contains(&x) {
            return Ok(Ok((x, time)));
        }
        if let Some(off) = targets.hit_offset(&x) {
            return Ok(Err(LevelOutcome::Hit(time + off)));
        }
        let (y, s) = level.step(&x)?;
        x = y;
        time += s;
    }
    Ok(Err(LevelOutcome::Unknown(format!("orbit did not enter {d} within {cap} steps"))))
}

/// Parameters of one negative-slope reduction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NegativeReduction {
    /// Piece whose domain becomes the new carrier.
    pub kept: usize,
    /// Slope sign of that piece: negative is the first lemma, positive the second.
    pub kept_slope_negative: bool,
    /// Cut point of the original map.
    pub c: Rational,
    /// Interior cut points of the produced map.
    pub new_cuts: Vec<Rational>,
}

/// Locate the piece whose image contains the cut point of a two-piece map.
pub fn negative_plan(f: &Pam) -> Result<NegativeReduction> {
    if f.len() != 2 {
        return Err(Error::PreconditionViolated("negative-slope reduction needs two pieces".into()));
    }
    let c = f.piece(0).domain.hi.clone();
    let kept = (0..2)
        .find(|&k| f.image_of_piece(k).contains(&c))
        .ok_or_else(|| Error::PreconditionViolated(format!("cut point {c} lies in no piece image")))?;
    Ok(NegativeReduction {
        kept,
        kept_slope_negative: f.piece(kept).map.a.is_negative(),
        c,
        new_cuts: vec![],
    })
}

/// Apply [`negative_plan`]: first-return map onto the kept piece's domain.
pub fn reduce_negative(level: &Level, targets: &Targets) -> Result<(NegativeReduction, Level, Targets)> {
    let mut plan = negative_plan(&level.pam)?;
    let d = level.pam.piece(plan.kept).domain.clone();
    let (g, t) = first_return(level, &d, targets, 4)?;
    plan.new_cuts = g.pam.pieces().iter().skip(1).map(|p| p.domain.lo.clone()).collect();
    Ok((plan, g, t))
}

/// The first lemma's map: requires `a2 < 0` and the cut inside the second image.
pub fn reduce_neg1(f: &Pam) -> Result<(Pam, Rational)> {
    let plan = negative_plan(f)?;
    if plan.kept != 1 || !plan.kept_slope_negative {
        return Err(Error::PreconditionViolated("needs a negative second slope whose image contains the cut".into()));
    }
    if !f.image_of_piece(1).interior_contains(&plan.c) {
        return Err(Error::PreconditionViolated("cut point is on the boundary of the second image".into()));
    }
    let (g, _) = first_return(&Level::top(f.clone()), &f.piece(1).domain, &Targets::default(), 4)?;
    let c_prime = f.piece(1).map.inverse().expect("nonzero slope").apply(&plan.c);
    Ok((g.pam, c_prime))
}

/// One iteration of the second lemma: `a2 < 0 < a1` and the cut inside the first image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Neg2Iterate {
    pub map: Pam,
    pub strides: Vec<u64>,
    /// The new cut point `c_k`.
    pub cut: Rational,
    /// Minimum of the first piece image, constant along the iteration.
    pub m0: Rational,
}

/// Iterate the second lemma until its precondition fails.
pub fn reduce_neg2(f: &Pam, max_iterations: usize) -> Result<Vec<Neg2Iterate>> {
    let neg2_applies = |g: &Pam| -> bool {
        g.len() == 2 && g.piece(0).map.a.is_positive() && g.piece(1).map.a.is_negative() && {
            let c = &g.piece(0).domain.hi;
            g.image_of_piece(0).contains(c)
        }
    };
    if !neg2_applies(f) {
        return Err(Error::PreconditionViolated("needs a2 < 0 < a1 with the cut inside the first image".into()));
    }
    let mut level = Level::top(f.clone());
    let mut out = Vec::new();
    for _ in 0..max_iterations {
        if !neg2_applies(&level.pam) {
            break;
        }
        let d = level.pam.piece(0).domain.clone();
        let (g, _) = first_return(&level, &d, &Targets::default(), 4)?;
        let cut = g.pam.piece(0).domain.hi.clone();
        let m0 = g.pam.image_of_piece(0).lo.clone();
        out.push(Neg2Iterate { map: g.pam.clone(), strides: g.strides.clone(), cut, m0 });
        level = g;
    }
    Ok(out)
}

/// Restrict a side-gap map to the hull of its image.
pub fn side_gap_hull(f: &Pam) -> Result<Interval> {
    f.full_image()
        .hull()
        .ok_or_else(|| Error::PreconditionViolated("map has an empty image".into()))
}

/// The point-to-interval construction on an enlarged carrier.
///
/// The carrier is extended to `[lo, hi + len]`, the target interval is sent
/// to the constant `t' = hi + len/2`, and the added segment is sent there too.
/// The result is rescaled to the unit interval; the returned point is the
/// rescaled `t'`.
pub fn point_to_interval_general(f: &Pam, target: &Interval) -> Result<(Pam, Rational, AffineMap)> {
    if !target.is_subset_of(f.carrier()) {
        return Err(Error::PreconditionViolated(format!("{target} is not inside {}", f.carrier())));
    }
    let carrier = f.carrier();
    let len = carrier.length();
    let top = &carrier.hi + &len;
    let t_prime = &carrier.hi + &len / Rational::from_integer(2.into());
    let constant = AffineMap::new(Rational::zero(), t_prime.clone());
    let mut pieces = Vec::new();
    for p in f.pieces() {
        let mut rest = vec![p.domain.clone()];
        if let Some(inside) = p.domain.intersect(target) {
            rest = complement(&p.domain, &inside);
            pieces.push(Piece::new(inside, constant.clone()));
        }
        for r in rest {
            pieces.push(Piece::new(r, p.map.clone()));
        }
    }
    let tail = Interval::new(carrier.hi.clone(), top.clone(), !carrier.hi_closed, true).expect("nonempty tail");
    pieces.push(Piece::new(tail, constant));
    pieces.sort_by(|a, b| (&a.domain.lo, !a.domain.lo_closed).cmp(&(&b.domain.lo, !b.domain.lo_closed)));
    let big = Interval::new(carrier.lo.clone(), top, carrier.lo_closed, true).expect("nonempty carrier");
    let g = Pam::new(big, pieces)?;
    let (unit, h) = g.rescale_to_unit()?;
    let t = h.apply(&t_prime);
    Ok((unit, t, h.forward))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{int, rat};
    use crate::pam::{classify, ReachGraph, Shape};

    fn neg1_instance() -> Pam {
        Pam::two_piece(rat(1, 2), (rat(1, 4), rat(11, 16)), (rat(-3, 4), int(1))).unwrap()
    }

    #[test]
    fn neg1_example() {
        let (g, c_prime) = reduce_neg1(&neg1_instance()).unwrap();
        assert_eq!(c_prime, rat(2, 3));
        assert_eq!(g.carrier(), &Interval::closed_open(rat(1, 2), int(1)));
        assert_eq!(g.piece(0).domain, Interval::closed(rat(1, 2), rat(2, 3)));
        assert_eq!(g.piece(1).map, AffineMap::new(rat(-3, 16), rat(15, 16)));
        assert!(ReachGraph::of(&g).only_self_loops());
        assert_eq!(classify(&g).shape, Shape::EasyDag);
        assert_eq!(g.eval(&rat(11, 16)).unwrap().0, rat(207, 256));
    }

    #[test]
    fn dag_walk_examples() {
        let f = neg1_instance();
        let (g, _) = reduce_neg1(&f).unwrap();
        let lvl = Level::top(g);
        assert_eq!(walk_dag(&lvl, &rat(11, 16), &Targets::point(&rat(207, 256))).unwrap(), LevelOutcome::Hit(1));
        assert_eq!(walk_dag(&lvl, &rat(3, 4), &Targets::point(&rat(3, 4))).unwrap(), LevelOutcome::Hit(0));
        let single = Level::top(Pam::from_cuts(&[int(0), int(1)], &[(rat(1, 2), rat(1, 2))]).unwrap());
        assert_eq!(walk_dag(&single, &int(0), &Targets::point(&rat(1, 3))).unwrap(), LevelOutcome::Never);
    }

    #[test]
    fn functional_walk() {
        let f = Pam::two_piece(rat(1, 2), (rat(1, 4), rat(1, 2)), (rat(1, 4), int(0))).unwrap();
        let lvl = Level::top(f.clone());
        assert_eq!(walk_functional(&lvl, &int(0), &Targets::point(&rat(1, 8))).unwrap(), LevelOutcome::Hit(2));
        assert_eq!(walk_functional(&lvl, &int(0), &Targets::point(&rat(17, 128))).unwrap(), LevelOutcome::Hit(4));
        assert_eq!(walk_functional(&lvl, &int(0), &Targets::point(&rat(1, 3))).unwrap(), LevelOutcome::Never);
    }

    #[test]
    fn first_return_strides_and_offsets() {
        let f = neg1_instance();
        let lvl = Level::top(f.clone());
        // 31/64 lies in the first piece; it is reached in between two returns.
        let (g, t) = first_return(&lvl, &f.piece(1).domain, &Targets::point(&rat(31, 64)), 4).unwrap();
        assert_eq!(g.strides, vec![1, 2]);
        assert_eq!(t.0.len(), 1);
        assert_eq!(t.0[0].offset, 1);
        assert_eq!(walk_dag(&g, &rat(11, 16), &t).unwrap(), LevelOutcome::Hit(1));
    }

    #[test]
    fn general_point_to_interval_shape() {
        let f = neg1_instance();
        let target = Interval::closed_open(rat(1, 8), rat(1, 4));
        let (g, t, h) = point_to_interval_general(&f, &target).unwrap();
        // Split around the target adds at most two pieces; the carrier extension adds one.
        assert!(g.len() <= f.len() + 3);
        assert_eq!(g.carrier(), &Interval::closed(int(0), int(1)));
        assert_eq!(g.eval(&h.apply(&rat(1, 8))).unwrap().0, t);
    }
}

//! Shape strategies behind a common trait, registered by name.
//!
//! The [`Engine`] classifies the current level, asks the registry for the
//! strategy of that shape (or the one forced by configuration) and either
//! returns its outcome or continues with the reduced level it produced.

use std::fmt;

use crate::bijection::{decide_bijection, first_hit_within, tau_rationality, to_canonical, RotationRep};
use crate::decision::{ReductionTrace, StepKind};
use crate::error::{Error, Result};
use crate::gap::{decide_gap, find_cycle, set_orbit, to_gap_params, OrbitLimits, SetOrbit};
use crate::numerics::Rational;
use crate::pam::{classify, Classification, IntervalSet, OrbitCursor, Shape};
use crate::reduction::{
    first_return, negative_plan, push_into, side_gap_hull, walk_dag, walk_functional, Level, LevelOutcome, Tagged,
    Targets,
};

/// A reachability question on one level.
#[derive(Debug, Clone)]
pub struct LevelQuery {
    pub level: Level,
    pub x0: Rational,
    pub targets: Targets,
}

// One value per reduction level, so the size gap is harmless.
#[allow(clippy::large_enum_variant)]
pub enum StrategyStep {
    Done(LevelOutcome),
    /// Continue on `query`; its times are offset by `elapsed` original steps.
    Reduce { query: LevelQuery, elapsed: u64 },
}

pub struct Ctx {
    pub trace: ReductionTrace,
    pub depth: usize,
    pub config: EngineConfig,
}

impl Ctx {
    fn note(&mut self, kind: StepKind, params: impl Into<String>) {
        self.trace.push(self.depth, kind, params);
    }
}

pub trait ShapeStrategy: Send + Sync {
    fn name(&self) -> &'static str;
    fn handles(&self, shape: Shape) -> bool;
    fn step(&self, ctx: &mut Ctx, query: LevelQuery, cls: &Classification) -> Result<StrategyStep>;
}

struct EasyDag;

impl ShapeStrategy for EasyDag {
    fn name(&self) -> &'static str {
        "easy-dag"
    }
    fn handles(&self, shape: Shape) -> bool {
        shape == Shape::EasyDag
    }
    fn step(&self, ctx: &mut Ctx, q: LevelQuery, _: &Classification) -> Result<StrategyStep> {
        let out = walk_dag(&q.level, &q.x0, &q.targets)?;
        ctx.note(StepKind::DagWalk, format!("from {}: {out}", q.x0));
        Ok(StrategyStep::Done(out))
    }
}

struct EasyFunctional;

impl ShapeStrategy for EasyFunctional {
    fn name(&self) -> &'static str {
        "easy-functional"
    }
    fn handles(&self, shape: Shape) -> bool {
        shape == Shape::EasyFunctional
    }
    fn step(&self, ctx: &mut Ctx, q: LevelQuery, _: &Classification) -> Result<StrategyStep> {
        let out = walk_functional(&q.level, &q.x0, &q.targets)?;
        ctx.note(StepKind::FunctionalCycle, format!("from {}: {out}", q.x0));
        Ok(StrategyStep::Done(out))
    }
}

struct NegativeSlope;

impl ShapeStrategy for NegativeSlope {
    fn name(&self) -> &'static str {
        "negative-slope"
    }
    fn handles(&self, shape: Shape) -> bool {
        shape == Shape::NegativeSlope
    }
    fn step(&self, ctx: &mut Ctx, q: LevelQuery, _: &Classification) -> Result<StrategyStep> {
        let plan = negative_plan(&q.level.pam)?;
        let d = q.level.pam.piece(plan.kept).domain.clone();
        let (x, elapsed) = match push_into(&q.level, &q.x0, &d, &q.targets, 8)? {
            Ok(entry) => entry,
            Err(out) => return Ok(StrategyStep::Done(out)),
        };
        if elapsed > 0 {
            ctx.note(StepKind::Prefix, format!("{} enters {d} as {x} after {elapsed} steps", q.x0));
        }
        let (level, targets) = match first_return(&q.level, &d, &q.targets, 4) {
            Ok(r) => r,
            Err(Error::ResourceLimit(m)) => return Ok(StrategyStep::Done(LevelOutcome::Unknown(m))),
            Err(e) => return Err(e),
        };
        let kind = if plan.kept_slope_negative { StepKind::Neg1 } else { StepKind::Neg2Iteration };
        let cuts: Vec<String> = level.pam.pieces().iter().skip(1).map(|p| p.domain.lo.to_string()).collect();
        let params = format!(
            "c = {}, first return to piece {} = {d}, new cut {}, strides {:?}",
            plan.c,
            plan.kept + 1,
            cuts.join(", "),
            level.strides
        );
        ctx.trace.push_map(ctx.depth, kind, params, level.pam.clone());
        Ok(StrategyStep::Reduce { query: LevelQuery { level, x0: x, targets }, elapsed })
    }
}

fn require_unit(q: &LevelQuery) -> Option<StrategyStep> {
    (!q.level.is_unit() || !q.targets.untagged()).then(|| {
        StrategyStep::Done(LevelOutcome::Unknown("positive twisted map inside a first-return level".into()))
    })
}

struct SideGap;

impl ShapeStrategy for SideGap {
    fn name(&self) -> &'static str {
        "side-gap"
    }
    fn handles(&self, shape: Shape) -> bool {
        shape == Shape::SideGap
    }
    fn step(&self, ctx: &mut Ctx, q: LevelQuery, _: &Classification) -> Result<StrategyStep> {
        if let Some(s) = require_unit(&q) {
            return Ok(s);
        }
        let hull = side_gap_hull(&q.level.pam)?;
        let (x, elapsed) = match push_into(&q.level, &q.x0, &hull, &q.targets, 2)? {
            Ok(entry) => entry,
            Err(out) => return Ok(StrategyStep::Done(out)),
        };
        let restricted = q.level.pam.restrict(&hull)?;
        ctx.trace.push_map(ctx.depth, StepKind::Restrict, format!("image hull {hull}"), restricted.clone());
        let (unit, h) = restricted.rescale_to_unit()?;
        ctx.trace.push_map(ctx.depth, StepKind::Rescale, format!("y = {}", h.forward), unit.clone());
        let targets = q.targets.restrict(&hull).transport(&h.forward);
        Ok(StrategyStep::Reduce { query: LevelQuery { level: Level::top(unit), x0: h.apply(&x), targets }, elapsed })
    }
}

struct Bijection;

impl ShapeStrategy for Bijection {
    fn name(&self) -> &'static str {
        "bijection"
    }
    fn handles(&self, shape: Shape) -> bool {
        shape == Shape::Bijection
    }
    fn step(&self, ctx: &mut Ctx, q: LevelQuery, _: &Classification) -> Result<StrategyStep> {
        if let Some(s) = require_unit(&q) {
            return Ok(s);
        }
        let (mut f, h) = q.level.pam.rescale_to_unit()?;
        let mut x = h.apply(&q.x0);
        let mut targets = q.targets.transport(&h.forward);
        if !f.carrier().lo_closed {
            let (g, r) = f.reflect()?;
            ctx.trace.push_map(ctx.depth, StepKind::Reflect, "carrier closed at the top", g.clone());
            f = g;
            x = r.apply(&x);
            targets = targets.transport(&r.forward);
        }
        let params = to_canonical(&f)?;
        let g = params.canonical_map();
        let x = params.canonical_point(&x);
        let rep = tau_rationality(&params)?;
        ctx.note(StepKind::Bijection, format!("{params}; rotation {rep}"));
        let mut best: Option<u64> = None;
        let mut exists = false;
        for t in &targets.0 {
            for part in params.canonical_interval(&t.part) {
                let hit = if part.is_degenerate() {
                    let d = decide_bijection(&params, &x, &part.lo)?;
                    for s in &d.trace.steps {
                        ctx.note(s.kind, s.params.clone());
                    }
                    d.steps()
                } else {
                    match rep {
                        RotationRep::Rational { q, .. } => first_hit_within(&g, &x, &part, q)?,
                        RotationRep::Irrational { .. } => {
                            // Dense orbit: some iterate enters any open set.
                            exists = true;
                            None
                        }
                    }
                };
                if let Some(n) = hit {
                    best = Some(best.map_or(n, |b| b.min(n)));
                }
            }
        }
        Ok(StrategyStep::Done(match (best, exists) {
            (_, true) => LevelOutcome::Exists,
            (Some(n), false) => LevelOutcome::Hit(n),
            (None, false) => LevelOutcome::Never,
        }))
    }
}

struct MiddleGap;

impl ShapeStrategy for MiddleGap {
    fn name(&self) -> &'static str {
        "middle-gap"
    }
    fn handles(&self, shape: Shape) -> bool {
        shape == Shape::MiddleGap
    }
    fn step(&self, ctx: &mut Ctx, q: LevelQuery, _: &Classification) -> Result<StrategyStep> {
        if let Some(s) = require_unit(&q) {
            return Ok(s);
        }
        let f = &q.level.pam;
        match to_gap_params(f) {
            Ok((p, h)) => ctx.note(StepKind::Gap, format!("{p}; coordinates y = {h}")),
            Err(e) => ctx.note(StepKind::Note, format!("normal form unavailable: {e}")),
        }
        let cycle = match find_cycle(f) {
            Ok(c) => {
                ctx.note(StepKind::Gap, c.to_string());
                Some(c)
            }
            Err(e) => {
                ctx.note(StepKind::Note, format!("no verified cycle: {e}"));
                None
            }
        };
        if let ([t], Some(c)) = (q.targets.0.as_slice(), &cycle) {
            if t.part.is_degenerate() {
                let d = decide_gap(f, &q.x0, &t.part.lo)?;
                // The cycle line is already in the trace.
                let seen = c.to_string();
                for s in d.trace.steps.iter().filter(|s| s.params != seen) {
                    ctx.note(s.kind, s.params.clone());
                }
                return Ok(StrategyStep::Done(match d.steps() {
                    Some(n) => LevelOutcome::Hit(n),
                    None => LevelOutcome::Never,
                }));
            }
        }
        let start = IntervalSet::from_interval(crate::pam::Interval::point(q.x0.clone()));
        let out = set_orbit(f, &start, &q.targets.to_set(), cycle.as_ref(), OrbitLimits::default())?;
        ctx.note(StepKind::Gap, format!("set orbit: {out}"));
        Ok(StrategyStep::Done(match out {
            SetOrbit::Hit(n) => LevelOutcome::Hit(n),
            SetOrbit::Never => LevelOutcome::Never,
            SetOrbit::Unknown(m) => LevelOutcome::Unknown(m),
        }))
    }
}

/// Bounded simulation; never answers no.
struct Simulate;

impl ShapeStrategy for Simulate {
    fn name(&self) -> &'static str {
        "simulate"
    }
    fn handles(&self, _: Shape) -> bool {
        true
    }
    fn step(&self, ctx: &mut Ctx, q: LevelQuery, cls: &Classification) -> Result<StrategyStep> {
        let mut cur = OrbitCursor::new(&q.level.pam, &q.x0);
        let mut time = 0u64;
        for _ in 0..=ctx.config.horizon {
            if let Some(off) = q.targets.0.iter().filter(|t| cur.in_interval(&t.part)).map(|t| t.offset).min() {
                ctx.note(StepKind::Simulate, format!("hit after {} steps", time + off));
                return Ok(StrategyStep::Done(LevelOutcome::Hit(time + off)));
            }
            let k = cur.step()?;
            time += q.level.strides[k];
        }
        let why = if cls.injective { cls.shape.name() } else { "non-injective" };
        let msg = format!("{why}; no hit ≤ {}", ctx.config.horizon);
        ctx.note(StepKind::Simulate, msg.clone());
        Ok(StrategyStep::Done(LevelOutcome::Unknown(msg)))
    }
}

pub struct Registry {
    strategies: Vec<Box<dyn ShapeStrategy>>,
}

impl Default for Registry {
    fn default() -> Self {
        Registry::standard()
    }
}

impl Registry {
    pub fn empty() -> Registry {
        Registry { strategies: Vec::new() }
    }

    pub fn standard() -> Registry {
        let mut r = Registry::empty();
        r.register(Box::new(EasyDag));
        r.register(Box::new(EasyFunctional));
        r.register(Box::new(NegativeSlope));
        r.register(Box::new(Bijection));
        r.register(Box::new(SideGap));
        r.register(Box::new(MiddleGap));
        r.register(Box::new(Simulate));
        r
    }

    /// Later registrations with the same name replace earlier ones.
    pub fn register(&mut self, s: Box<dyn ShapeStrategy>) {
        self.strategies.retain(|t| t.name() != s.name());
        self.strategies.push(s);
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.strategies.iter().map(|s| s.name()).collect()
    }

    pub fn get(&self, name: &str) -> Option<&dyn ShapeStrategy> {
        self.strategies.iter().find(|s| s.name() == name).map(|s| s.as_ref())
    }

    /// First registered strategy for `shape`, else `simulate`.
    pub fn select(&self, shape: Shape) -> Option<&dyn ShapeStrategy> {
        self.strategies
            .iter()
            .find(|s| s.name() != "simulate" && s.handles(shape))
            .or_else(|| self.strategies.iter().find(|s| s.name() == "simulate"))
            .map(|s| s.as_ref())
    }
}

impl fmt::Debug for Registry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.names()).finish()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EngineConfig {
    /// Simulation depth for unsupported shapes and witness searches.
    pub horizon: u64,
    pub max_depth: usize,
    /// Strategy forced for the top level.
    pub forced: Option<String>,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig { horizon: 10_000, max_depth: 64, forced: None }
    }
}

#[derive(Debug, Default)]
pub struct Engine {
    pub registry: Registry,
    pub config: EngineConfig,
}

impl Engine {
    pub fn new(registry: Registry, config: EngineConfig) -> Engine {
        Engine { registry, config }
    }

    pub fn with_config(config: EngineConfig) -> Engine {
        Engine { registry: Registry::standard(), config }
    }

    /// Earliest time the orbit of `query.x0` meets the targets.
    pub fn run(&self, query: LevelQuery) -> Result<(LevelOutcome, ReductionTrace)> {
        let mut ctx = Ctx { trace: ReductionTrace::default(), depth: 0, config: self.config.clone() };
        let mut query = query;
        let mut elapsed = 0u64;
        loop {
            if query.targets.is_empty() {
                ctx.note(StepKind::Note, "no target part remains at this level");
                return Ok((LevelOutcome::Never, ctx.trace));
            }
            if let Some(off) = query.targets.hit_offset(&query.x0) {
                ctx.note(StepKind::Note, format!("start point {} meets a target", query.x0));
                return Ok((LevelOutcome::Hit(elapsed + off), ctx.trace));
            }
            if ctx.depth > self.config.max_depth {
                let m = format!("reduction depth exceeds {}", self.config.max_depth);
                return Ok((LevelOutcome::Unknown(m), ctx.trace));
            }
            let cls = classify(&query.level.pam);
            ctx.note(
                StepKind::Classify,
                format!("{} pieces, shape {}, graph {}", cls.piece_count, cls.shape, cls.graph),
            );
            let strategy = match (&self.config.forced, ctx.depth) {
                (Some(name), 0) => {
                    let s = self
                        .registry
                        .get(name)
                        .ok_or_else(|| Error::PreconditionViolated(format!("no strategy named {name}")))?;
                    if !s.handles(cls.shape) {
                        return Err(Error::PreconditionViolated(format!(
                            "strategy {name} does not apply to shape {}",
                            cls.shape
                        )));
                    }
                    s
                }
                _ => self
                    .registry
                    .select(cls.shape)
                    .ok_or_else(|| Error::PreconditionViolated(format!("no strategy for shape {}", cls.shape)))?,
            };
            match strategy.step(&mut ctx, query, &cls)? {
                StrategyStep::Done(out) => return Ok((out.shifted(elapsed), ctx.trace)),
                StrategyStep::Reduce { query: next, elapsed: e } => {
                    query = next;
                    elapsed += e;
                    ctx.depth += 1;
                }
            }
        }
    }

    pub fn run_point(&self, level: Level, x0: &Rational, t: &Rational) -> Result<(LevelOutcome, ReductionTrace)> {
        self.run(LevelQuery { level, x0: x0.clone(), targets: Targets::point(t) })
    }
}

/// Untagged targets for a set.
pub fn untagged(s: &IntervalSet) -> Targets {
    Targets(s.parts().iter().map(|p| Tagged { part: p.clone(), offset: 0 }).collect())
}

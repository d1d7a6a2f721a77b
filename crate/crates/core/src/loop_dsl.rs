//! The two-branch loop language and its reduction to point reachability.
//!
//! ```text
//! program := "x" ":=" rat ";" "while" "x" "!=" rat
//!            "{" "if" "x" "<" rat "{" assign "}" "else" "{" assign "}" "}"
//! assign  := "x" ":=" rat "*" "x" ("+"|"-") rat
//!          | "x" ":=" "x" ("+"|"-") rat
//!          | "x" ":=" rat
//! ```
//!
//! `rat` is a signed integer, fraction or finite decimal. Whitespace and `#`
//! line comments are ignored.

use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::decision::Witness;
use crate::error::{Error, Result};
use crate::numerics::{parse_rational, Rational};
use crate::pam::{AffineMap, Interval, Pam, Transport};
use crate::strategy::Engine;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Span {
    pub line: usize,
    pub col: usize,
}

/// Source positions of the literals, for diagnostics only.
#[derive(Debug, Clone, Copy, Default)]
pub struct Spans {
    pub x0: Span,
    pub target: Span,
    pub guard: Span,
    pub branch_lt: Span,
    pub branch_ge: Span,
}

#[derive(Debug, Clone)]
pub struct LoopProgram {
    pub x0: Rational,
    pub target: Rational,
    pub guard: Rational,
    /// Taken when `x < guard`.
    pub branch_lt: AffineMap,
    pub branch_ge: AffineMap,
    pub spans: Spans,
}

/// Equality ignores source positions.
impl PartialEq for LoopProgram {
    fn eq(&self, other: &Self) -> bool {
        self.x0 == other.x0
            && self.target == other.target
            && self.guard == other.guard
            && self.branch_lt == other.branch_lt
            && self.branch_ge == other.branch_ge
    }
}

impl Eq for LoopProgram {}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    X,
    Assign,
    Semi,
    While,
    If,
    Else,
    Ne,
    Lt,
    LBrace,
    RBrace,
    Star,
    Plus,
    Minus,
    Num(Rational),
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::X => f.write_str("`x`"),
            Tok::Assign => f.write_str("`:=`"),
            Tok::Semi => f.write_str("`;`"),
            Tok::While => f.write_str("`while`"),
            Tok::If => f.write_str("`if`"),
            Tok::Else => f.write_str("`else`"),
            Tok::Ne => f.write_str("`!=`"),
            Tok::Lt => f.write_str("`<`"),
            Tok::LBrace => f.write_str("`{`"),
            Tok::RBrace => f.write_str("`}`"),
            Tok::Star => f.write_str("`*`"),
            Tok::Plus => f.write_str("`+`"),
            Tok::Minus => f.write_str("`-`"),
            Tok::Num(r) => write!(f, "number {r}"),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, Span)>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let ch = chars[i];
        let span = Span { line, col };
        let syntax = |msg: String| Error::Syntax { line: span.line, col: span.col, msg };
        if ch == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if ch.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if ch == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let two: String = chars[i..(i + 2).min(chars.len())].iter().collect();
        let (tok, width) = match ch {
            ':' if two == ":=" => (Tok::Assign, 2),
            '!' if two == "!=" => (Tok::Ne, 2),
            ';' => (Tok::Semi, 1),
            '<' => (Tok::Lt, 1),
            '{' => (Tok::LBrace, 1),
            '}' => (Tok::RBrace, 1),
            '*' => (Tok::Star, 1),
            '+' => (Tok::Plus, 1),
            '-' | '\u{2212}' => (Tok::Minus, 1),
            c if c.is_ascii_digit() || c == '.' => {
                let start = i;
                let mut j = i;
                while j < chars.len() && (chars[j].is_ascii_alphanumeric() || matches!(chars[j], '.' | '/' | '_')) {
                    j += 1;
                }
                let lit: String = chars[start..j].iter().collect();
                match parse_rational(&lit) {
                    Some(r) => (Tok::Num(r), j - start),
                    None => return Err(Error::NonRationalLiteral { line, col, text: lit }),
                }
            }
            c if c.is_alphabetic() || c == '_' => {
                let mut j = i;
                while j < chars.len() && (chars[j].is_alphanumeric() || chars[j] == '_') {
                    j += 1;
                }
                let word: String = chars[i..j].iter().collect();
                let tok = match word.as_str() {
                    "x" => Tok::X,
                    "while" => Tok::While,
                    "if" => Tok::If,
                    "else" => Tok::Else,
                    _ => return Err(syntax(format!("unknown word `{word}`; the only variable is `x`"))),
                };
                (tok, j - i)
            }
            c => return Err(syntax(format!("unexpected character `{c}`"))),
        };
        out.push((tok, span));
        i += width;
        col += width;
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, Span)>,
    pos: usize,
    end: Span,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn span(&self) -> Span {
        self.toks.get(self.pos).map_or(self.end, |(_, s)| *s)
    }

    fn error(&self, expected: &str) -> Error {
        let s = self.span();
        let found = self.peek().map_or("end of input".to_string(), |t| t.to_string());
        Error::Syntax { line: s.line, col: s.col, msg: format!("expected {expected}, found {found}") }
    }

    fn expect(&mut self, tok: Tok) -> Result<Span> {
        if self.peek() == Some(&tok) {
            let s = self.span();
            self.pos += 1;
            Ok(s)
        } else {
            Err(self.error(&tok.to_string()))
        }
    }

    fn rat(&mut self) -> Result<(Rational, Span)> {
        let span = self.span();
        let neg = match self.peek() {
            Some(Tok::Minus) => {
                self.pos += 1;
                true
            }
            Some(Tok::Plus) => {
                self.pos += 1;
                false
            }
            _ => false,
        };
        match self.peek().cloned() {
            Some(Tok::Num(r)) => {
                self.pos += 1;
                Ok((if neg { -r } else { r }, span))
            }
            _ => Err(self.error("a rational literal")),
        }
    }

    fn offset(&mut self) -> Result<Rational> {
        let sign = match self.peek() {
            Some(Tok::Plus) => Rational::one(),
            Some(Tok::Minus) => -Rational::one(),
            _ => return Err(self.error("`+` or `-`")),
        };
        self.pos += 1;
        Ok(sign * self.rat()?.0)
    }

    fn assign(&mut self) -> Result<(AffineMap, Span)> {
        let span = self.expect(Tok::X)?;
        self.expect(Tok::Assign)?;
        if self.peek() == Some(&Tok::X) {
            self.pos += 1;
            let b = self.offset()?;
            return Ok((AffineMap::new(Rational::one(), b), span));
        }
        let (r, _) = self.rat()?;
        if self.peek() == Some(&Tok::Star) {
            self.pos += 1;
            self.expect(Tok::X)?;
            let b = self.offset()?;
            Ok((AffineMap::new(r, b), span))
        } else {
            Ok((AffineMap::new(Rational::zero(), r), span))
        }
    }

    fn program(&mut self) -> Result<LoopProgram> {
        self.expect(Tok::X)?;
        self.expect(Tok::Assign)?;
        let (x0, x0_span) = self.rat()?;
        self.expect(Tok::Semi)?;
        self.expect(Tok::While)?;
        self.expect(Tok::X)?;
        self.expect(Tok::Ne)?;
        let (target, target_span) = self.rat()?;
        self.expect(Tok::LBrace)?;
        self.expect(Tok::If)?;
        self.expect(Tok::X)?;
        self.expect(Tok::Lt)?;
        let (guard, guard_span) = self.rat()?;
        self.expect(Tok::LBrace)?;
        let (branch_lt, lt_span) = self.assign()?;
        self.expect(Tok::RBrace)?;
        self.expect(Tok::Else)?;
        self.expect(Tok::LBrace)?;
        let (branch_ge, ge_span) = self.assign()?;
        self.expect(Tok::RBrace)?;
        self.expect(Tok::RBrace)?;
        if self.pos < self.toks.len() {
            return Err(self.error("end of input"));
        }
        let spans = Spans { x0: x0_span, target: target_span, guard: guard_span, branch_lt: lt_span, branch_ge: ge_span };
        Ok(LoopProgram { x0, target, guard, branch_lt, branch_ge, spans })
    }
}

pub fn parse(text: &str) -> Result<LoopProgram> {
    let toks = lex(text)?;
    let end = {
        let line = text.lines().count().max(1);
        let col = text.lines().last().map_or(0, |l| l.chars().count()) + 1;
        Span { line, col }
    };
    Parser { toks, pos: 0, end }.program()
}

fn fmt_assign(m: &AffineMap) -> String {
    let offset = |b: &Rational| if b.is_negative() { format!("- {}", -b) } else { format!("+ {b}") };
    if m.a.is_zero() {
        format!("x := {}", m.b)
    } else if m.a.is_one() {
        format!("x := x {}", offset(&m.b))
    } else {
        format!("x := {} * x {}", m.a, offset(&m.b))
    }
}

/// Normal form; `parse` of the output gives back an equal program.
impl fmt::Display for LoopProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "x := {};", self.x0)?;
        writeln!(f, "while x != {} {{", self.target)?;
        writeln!(f, "    if x < {} {{", self.guard)?;
        writeln!(f, "        {}", fmt_assign(&self.branch_lt))?;
        writeln!(f, "    }} else {{")?;
        writeln!(f, "        {}", fmt_assign(&self.branch_ge))?;
        writeln!(f, "    }}")?;
        writeln!(f, "}}")
    }
}

impl LoopProgram {
    pub fn step(&self, x: &Rational) -> Rational {
        if x < &self.guard { self.branch_lt.apply(x) } else { self.branch_ge.apply(x) }
    }

    /// Number of loop iterations before exit, if at most `max_steps`.
    pub fn interpret(&self, max_steps: u64) -> Option<u64> {
        let mut x = self.x0.clone();
        for n in 0..=max_steps {
            if x == self.target {
                return Some(n);
            }
            x = self.step(&x);
        }
        None
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompiledLoop {
    /// Two-piece map on the unit interval.
    pub pam: Pam,
    pub x0: Rational,
    pub t: Rational,
    /// The verified invariant carrier before rescaling.
    pub carrier: Interval,
    pub transport: Transport,
}

fn invariant(p: &LoopProgram, lo: &Rational, hi: &Rational) -> bool {
    let carrier = Interval::closed_open(lo.clone(), hi.clone());
    let left = Interval::new(lo.clone(), p.guard.clone().min(hi.clone()), true, false);
    let right = Interval::new(p.guard.clone().max(lo.clone()), hi.clone(), true, false);
    left.is_none_or(|iv| p.branch_lt.image(&iv).is_subset_of(&carrier))
        && right.is_none_or(|iv| p.branch_ge.image(&iv).is_subset_of(&carrier))
}

/// Candidate carrier endpoints: the literals, branch fixed points, and a few
/// rounds of their images.
fn endpoint_candidates(p: &LoopProgram) -> Vec<Rational> {
    let mut pts = vec![p.x0.clone(), p.target.clone(), p.guard.clone(), Rational::zero(), Rational::one()];
    for m in [&p.branch_lt, &p.branch_ge] {
        if !m.a.is_one() {
            pts.push(&m.b / (Rational::one() - &m.a));
        }
    }
    for _ in 0..2 {
        let mut next = pts.clone();
        for x in &pts {
            next.push(p.branch_lt.apply(x));
            next.push(p.branch_ge.apply(x));
        }
        next.sort();
        next.dedup();
        if next.len() > 96 {
            break;
        }
        pts = next;
    }
    pts.sort();
    pts.dedup();
    pts
}

fn find_carrier(p: &LoopProgram) -> Option<(Rational, Rational)> {
    let (zero, one) = (Rational::zero(), Rational::one());
    let inside = |lo: &Rational, hi: &Rational| [&p.x0, &p.target].iter().all(|x| lo <= *x && *x < hi);
    if inside(&zero, &one) && invariant(p, &zero, &one) {
        return Some((zero, one));
    }
    let pts = endpoint_candidates(p);
    let mut best: Option<(Rational, Rational)> = None;
    for (i, lo) in pts.iter().enumerate() {
        for hi in &pts[i + 1..] {
            if !inside(lo, hi) || best.as_ref().is_some_and(|(l, h)| h - l <= hi - lo) {
                continue;
            }
            if invariant(p, lo, hi) {
                best = Some((lo.clone(), hi.clone()));
            }
        }
    }
    best
}

/// The loop as a two-piece map on the unit interval, with `x0` and `t`
/// transported.
pub fn compile(p: &LoopProgram) -> Result<CompiledLoop> {
    let (lo, hi) = find_carrier(p).ok_or_else(|| {
        Error::NotSelfMap(format!("no interval containing {} and {} is invariant under the loop body", p.x0, p.target))
    })?;
    if !(lo < p.guard && p.guard < hi) {
        return Err(Error::GuardOutsideCarrier(format!("{} (carrier [{lo}, {hi}))", p.guard)));
    }
    let raw = Pam::new(
        Interval::closed_open(lo.clone(), hi.clone()),
        vec![
            crate::pam::Piece::new(Interval::closed_open(lo.clone(), p.guard.clone()), p.branch_lt.clone()),
            crate::pam::Piece::new(Interval::closed_open(p.guard.clone(), hi.clone()), p.branch_ge.clone()),
        ],
    )?;
    let (pam, transport) = raw.rescale_to_unit()?;
    Ok(CompiledLoop {
        x0: transport.apply(&p.x0),
        t: transport.apply(&p.target),
        pam,
        carrier: raw.carrier().clone(),
        transport,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HaltingAnswer {
    Halts(u64),
    Diverges,
    Unsupported { reason: String, diagnostics: Vec<String> },
}

impl fmt::Display for HaltingAnswer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HaltingAnswer::Halts(n) => write!(f, "halts n={n}"),
            HaltingAnswer::Diverges => f.write_str("diverges"),
            HaltingAnswer::Unsupported { reason, .. } => write!(f, "unsupported: {reason}"),
        }
    }
}

pub fn decide_halting(p: &LoopProgram) -> Result<HaltingAnswer> {
    decide_halting_with(&Engine::default(), p)
}

pub fn decide_halting_with(engine: &Engine, p: &LoopProgram) -> Result<HaltingAnswer> {
    let c = compile(p)?;
    let d = engine.reach(&c.pam, &c.x0, &c.t)?;
    let unsupported = |reason: String, d: &crate::decision::Decision| HaltingAnswer::Unsupported {
        reason,
        diagnostics: d.diagnostics.clone(),
    };
    Ok(match (d.answer, d.witness) {
        (crate::decision::Answer::Yes, Some(Witness::Steps(n))) => {
            // Direct interpretation must exit after exactly n iterations.
            if p.interpret(n) == Some(n) {
                HaltingAnswer::Halts(n)
            } else {
                unsupported(format!("witness {n} failed direct interpretation"), &d)
            }
        }
        (crate::decision::Answer::Yes, _) => unsupported("halts, but no iteration count was produced".into(), &d),
        (crate::decision::Answer::No, _) => HaltingAnswer::Diverges,
        (crate::decision::Answer::Unknown, _) => {
            let reason = d.diagnostics.first().cloned().unwrap_or_else(|| "undecided".into());
            unsupported(reason, &d)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{int, rat};
    use proptest::prelude::*;

    const INTRO: &str = "# intro map\nx := 1/2;\nwhile x != 2/9 {\n  if x < 1/2 { x := 2/3 * x + 2/3 }\n  else { x := 4/3 * x - 2/3 }\n}\n";

    fn bij(t: &str) -> String {
        format!("x := 0; while x != {t} {{ if x < 1/2 {{ x := 4/3 * x + 1/3 }} else {{ x := 2/3 * x - 1/3 }} }}")
    }

    #[test]
    fn parses_and_round_trips() {
        let p = parse(INTRO).unwrap();
        assert_eq!((p.x0.clone(), p.target.clone(), p.guard.clone()), (rat(1, 2), rat(2, 9), rat(1, 2)));
        assert_eq!(p.branch_ge, AffineMap::new(rat(4, 3), rat(-2, 3)));
        assert_eq!(p.spans.target, Span { line: 3, col: 12 });
        let again = parse(&p.to_string()).unwrap();
        assert_eq!(again, p);
        assert_eq!(again.to_string(), p.to_string());
        let dec = parse("x := 0; while x != 1 { if x < 0.5 { x := x + 1/4 } else { x := -0.25 } }").unwrap();
        assert_eq!(dec.guard, rat(1, 2));
        assert_eq!(dec.branch_ge, AffineMap::new(int(0), rat(-1, 4)));
    }

    #[test]
    fn syntax_errors_have_positions() {
        let missing_else = "x := 0;\nwhile x != 1 { if x < 1/2 { x := x + 1 } }";
        match parse(missing_else) {
            Err(Error::Syntax { line, col, msg }) => {
                assert_eq!((line, col), (2, 42));
                assert!(msg.contains("`else`"), "{msg}");
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse("x := 1e3; while x != 1 {}"), Err(Error::NonRationalLiteral { line: 1, col: 6, .. })));
        assert!(matches!(parse("y := 1;"), Err(Error::Syntax { line: 1, col: 1, .. })));
    }

    #[test]
    fn compiles_to_the_intro_map() {
        let c = compile(&parse(INTRO).unwrap()).unwrap();
        let intro = Pam::two_piece(rat(1, 2), (rat(2, 3), rat(2, 3)), (rat(4, 3), rat(-2, 3))).unwrap();
        assert_eq!((c.pam, c.x0, c.t), (intro, rat(1, 2), rat(2, 9)));
        let escape = parse("x := 0; while x != 1/2 { if x < 1/2 { x := x + 1 } else { x := x + 1 } }").unwrap();
        assert!(matches!(compile(&escape), Err(Error::NotSelfMap(_))));
        let outside = parse("x := 0; while x != 1/2 { if x < 5 { x := 1/2 * x + 1/4 } else { x := 0 } }").unwrap();
        assert!(matches!(compile(&outside), Err(Error::GuardOutsideCarrier(_))));
    }

    #[test]
    fn infers_a_carrier_beyond_the_unit_interval() {
        let p = parse("x := 2; while x != 5/2 { if x < 3 { x := 1/2 * x + 2 } else { x := 1/2 * x + 0 } }").unwrap();
        let c = compile(&p).unwrap();
        assert!(c.carrier.lo <= int(2) && c.carrier.hi > rat(5, 2));
        assert_eq!(*c.pam.carrier(), Interval::unit());
        let mut x = p.x0.clone();
        let mut y = c.x0.clone();
        for _ in 0..30 {
            x = p.step(&x);
            y = c.pam.eval(&y).unwrap().0;
            assert_eq!(c.transport.apply(&x), y);
        }
    }

    #[test]
    fn halting() {
        assert_eq!(decide_halting(&parse(INTRO).unwrap()).unwrap(), HaltingAnswer::Halts(3));
        assert_eq!(decide_halting(&parse(&bij("7/9")).unwrap()).unwrap(), HaltingAnswer::Halts(2));
        assert_eq!(decide_halting(&parse(&bij("1/2")).unwrap()).unwrap(), HaltingAnswer::Diverges);
        let expanding = parse("x := 1/5; while x != 1/7 { if x < 1/2 { x := 4/3 * x + 0 } else { x := 4/3 * x - 1/3 } }").unwrap();
        match decide_halting(&expanding).unwrap() {
            HaltingAnswer::Unsupported { reason, .. } => assert!(reason.contains("non-injective"), "{reason}"),
            other => panic!("{other:?}"),
        }
    }

    fn small_rat() -> impl Strategy<Value = Rational> {
        (-40i64..40, 1i64..13).prop_map(|(n, d)| rat(n, d))
    }

    fn affine() -> impl Strategy<Value = AffineMap> {
        (small_rat(), small_rat(), 0u8..4).prop_map(|(a, b, form)| match form {
            0 => AffineMap::new(int(0), b),
            1 => AffineMap::new(int(1), b),
            _ => AffineMap::new(a, b),
        })
    }

    proptest! {
        #[test]
        fn pretty_print_round_trips(x0 in small_rat(), t in small_rat(), c in small_rat(), l in affine(), g in affine()) {
            let p = LoopProgram { x0, target: t, guard: c, branch_lt: l, branch_ge: g, spans: Spans::default() };
            prop_assert_eq!(parse(&p.to_string()).unwrap(), p);
        }

        #[test]
        fn compilation_preserves_semantics(x0 in 0i64..12, t in 0i64..12, c in 1i64..12, a1 in 1i64..12, b1 in 0i64..12, a2 in 1i64..12, b2 in 0i64..12) {
            let p = LoopProgram {
                x0: rat(x0, 12), target: rat(t, 12), guard: rat(c, 12),
                branch_lt: AffineMap::new(rat(a1, 12), rat(b1, 24)),
                branch_ge: AffineMap::new(rat(a2, 12), rat(b2, 24) - rat(1, 2)),
                spans: Spans::default(),
            };
            if let Ok(comp) = compile(&p) {
                let (mut x, mut y) = (p.x0.clone(), comp.x0.clone());
                for _ in 0..100 {
                    prop_assert_eq!(comp.transport.apply(&x), y.clone());
                    x = p.step(&x);
                    y = comp.pam.eval(&y).unwrap().0;
                }
            }
        }
    }
}

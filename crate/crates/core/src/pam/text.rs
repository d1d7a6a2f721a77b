//! Line-oriented text form of a map.
//!
//! ```text
//! carrier 0 1
//! piece 0 1/2 2/3 2/3
//! piece 1/2 1 4/3 -2/3
//! ```
//!
//! Intervals default to closed-below, open-above; the trailing tokens
//! `lo_open` and `hi_closed` override either side. `#` starts a comment.

use std::fmt::Write;

use super::interval::Interval;
use super::map::{AffineMap, Pam, Piece};
use crate::error::{Error, Result};
use crate::numerics::{parse_rational, Rational};

struct Token<'a> {
    text: &'a str,
    col: usize,
}

fn tokens(line: &str) -> Vec<Token<'_>> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in line.char_indices() {
        if ch.is_whitespace() {
            if let Some(s) = start.take() {
                out.push(Token { text: &line[s..i], col: s + 1 });
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push(Token { text: &line[s..], col: s + 1 });
    }
    out
}

fn number(tok: &Token<'_>, line: usize) -> Result<Rational> {
    parse_rational(tok.text).ok_or_else(|| Error::NonRationalLiteral { line, col: tok.col, text: tok.text.to_string() })
}

fn flags(rest: &[Token<'_>], line: usize) -> Result<(bool, bool)> {
    let (mut lo_closed, mut hi_closed) = (true, false);
    for tok in rest {
        match tok.text {
            "lo_open" => lo_closed = false,
            "hi_closed" => hi_closed = true,
            other => {
                return Err(Error::Syntax { line, col: tok.col, msg: format!("unexpected token `{other}`") });
            }
        }
    }
    Ok((lo_closed, hi_closed))
}

fn interval(lo: Rational, hi: Rational, fl: (bool, bool), line: usize, col: usize) -> Result<Interval> {
    Interval::new(lo, hi, fl.0, fl.1).ok_or_else(|| Error::Syntax { line, col, msg: "empty interval".into() })
}

/// Bracket notation such as `[1/4, 1/2)` or `(0, 1]`; a bare number is a
/// single point.
pub fn parse_interval(text: &str) -> Result<Interval> {
    let t = text.trim();
    let bad = |msg: &str| Error::Syntax { line: 1, col: 1, msg: format!("{msg} in interval `{t}`") };
    if let Some(x) = parse_rational(t) {
        return Ok(Interval::point(x));
    }
    let lo_closed = match t.chars().next() {
        Some('[') => true,
        Some('(') => false,
        _ => return Err(bad("expected `[` or `(`")),
    };
    let hi_closed = match t.chars().last() {
        Some(']') => true,
        Some(')') => false,
        _ => return Err(bad("expected `]` or `)`")),
    };
    let inner = &t[1..t.len() - 1];
    let (a, b) = inner.split_once(',').ok_or_else(|| bad("expected `,`"))?;
    let lo = parse_rational(a).ok_or_else(|| Error::NonRationalLiteral { line: 1, col: 2, text: a.trim().to_string() })?;
    let hi = parse_rational(b).ok_or_else(|| Error::NonRationalLiteral { line: 1, col: 2 + a.len() + 1, text: b.trim().to_string() })?;
    Interval::new(lo, hi, lo_closed, hi_closed).ok_or_else(|| bad("empty set"))
}

pub fn parse_pam(src: &str) -> Result<Pam> {
    let mut carrier: Option<Interval> = None;
    let mut pieces = Vec::new();
    for (idx, raw) in src.lines().enumerate() {
        let line = idx + 1;
        let body = raw.split('#').next().unwrap_or("");
        let toks = tokens(body);
        let Some(head) = toks.first() else { continue };
        match head.text {
            "carrier" => {
                if carrier.is_some() {
                    return Err(Error::Syntax { line, col: head.col, msg: "second carrier line".into() });
                }
                if toks.len() < 3 {
                    return Err(Error::Syntax { line, col: head.col, msg: "expected `carrier <lo> <hi>`".into() });
                }
                let (lo, hi) = (number(&toks[1], line)?, number(&toks[2], line)?);
                if toks.len() > 3 && parse_rational(toks[3].text).is_some() {
                    return Err(multi_dim(line, toks[3].col));
                }
                carrier = Some(interval(lo, hi, flags(&toks[3..], line)?, line, head.col)?);
            }
            "piece" => {
                if carrier.is_none() {
                    return Err(Error::Syntax { line, col: head.col, msg: "piece before carrier".into() });
                }
                if toks.len() < 5 {
                    return Err(Error::Syntax {
                        line,
                        col: raw.len() + 1,
                        msg: "expected `piece <lo> <hi> <a> <b>`".into(),
                    });
                }
                let v: Vec<Rational> = toks[1..5].iter().map(|t| number(t, line)).collect::<Result<_>>()?;
                if let Some(extra) = toks.get(5).filter(|t| parse_rational(t.text).is_some()) {
                    return Err(multi_dim(line, extra.col));
                }
                let dom = interval(v[0].clone(), v[1].clone(), flags(&toks[5..], line)?, line, head.col)?;
                pieces.push(Piece::new(dom, AffineMap::new(v[2].clone(), v[3].clone())));
            }
            "dimension" | "dim" => {
                let two_d = toks.get(1).is_none_or(|t| t.text != "1");
                if two_d {
                    return Err(multi_dim(line, head.col));
                }
            }
            other => {
                return Err(Error::Syntax { line, col: head.col, msg: format!("unknown directive `{other}`") });
            }
        }
    }
    let carrier = carrier.ok_or(Error::Syntax { line: 1, col: 1, msg: "missing carrier line".into() })?;
    Pam::new(carrier, pieces)
}

fn multi_dim(line: usize, col: usize) -> Error {
    Error::Syntax { line, col, msg: "only one-dimensional maps are supported".into() }
}

fn flag_suffix(iv: &Interval) -> String {
    let mut s = String::new();
    if !iv.lo_closed {
        s.push_str(" lo_open");
    }
    if iv.hi_closed {
        s.push_str(" hi_closed");
    }
    s
}

pub fn format_pam(f: &Pam) -> String {
    let mut out = String::new();
    let c = f.carrier();
    let _ = writeln!(out, "carrier {} {}{}", c.lo, c.hi, flag_suffix(c));
    for p in f.pieces() {
        let d = &p.domain;
        let _ = writeln!(out, "piece {} {} {} {}{}", d.lo, d.hi, p.map.a, p.map.b, flag_suffix(d));
    }
    out
}

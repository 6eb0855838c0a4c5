//! Finite unions of real intervals, the Borel sets the measurement layer
//! works with.
//!
//! Text syntax, whitespace-insensitive:
//!
//! ```text
//! set   := "R" | "empty" | piece ( "|" piece )*
//! piece := "{" num ( "," num )* "}" | ( "[" | "(" ) end "," end ( "]" | ")" )
//! end   := num | "-inf" | "inf" | "+inf"
//! num   := decimal | p/q
//! ```
//!
//! Infinite endpoints are always open.

use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};
use crate::rational::{parse_rational, to_f64};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    lo: f64,
    hi: f64,
    lo_closed: bool,
    hi_closed: bool,
}

impl Interval {
    pub fn new(lo: f64, hi: f64, lo_closed: bool, hi_closed: bool) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() {
            return Err(Error::MalformedSet("NaN endpoint".into()));
        }
        if lo == f64::INFINITY || hi == f64::NEG_INFINITY {
            return Err(Error::MalformedSet(format!("endpoints ({lo}, {hi}) point the wrong way")));
        }
        if lo > hi {
            return Err(Error::MalformedSet(format!("lower endpoint {lo} exceeds upper endpoint {hi}")));
        }
        Ok(Self { lo, hi, lo_closed: lo_closed && lo.is_finite(), hi_closed: hi_closed && hi.is_finite() })
    }

    pub fn point(v: f64) -> Result<Self> {
        if !v.is_finite() {
            return Err(Error::MalformedSet(format!("point {v} is not finite")));
        }
        Self::new(v, v, true, true)
    }

    pub fn is_empty(&self) -> bool {
        self.lo == self.hi && !(self.lo_closed && self.hi_closed)
    }

    pub fn contains(&self, v: f64) -> bool {
        let above = if self.lo_closed { v >= self.lo } else { v > self.lo };
        let below = if self.hi_closed { v <= self.hi } else { v < self.hi };
        above && below
    }

    /// `other ⊆ self`.
    pub fn covers(&self, other: &Interval) -> bool {
        if other.is_empty() {
            return true;
        }
        let lo_ok = match self.lo.partial_cmp(&other.lo) {
            Some(Ordering::Less) => true,
            Some(Ordering::Equal) => self.lo_closed || !other.lo_closed,
            _ => false,
        };
        let hi_ok = match self.hi.partial_cmp(&other.hi) {
            Some(Ordering::Greater) => true,
            Some(Ordering::Equal) => self.hi_closed || !other.hi_closed,
            _ => false,
        };
        lo_ok && hi_ok
    }

    fn lower_key(&self) -> (f64, bool) {
        // Closed starts sort before open starts at the same value.
        (self.lo, !self.lo_closed)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.lo == self.hi && self.lo_closed && self.hi_closed {
            return write!(f, "{{{}}}", self.lo);
        }
        let end = |v: f64| {
            if v == f64::INFINITY {
                "inf".to_string()
            } else if v == f64::NEG_INFINITY {
                "-inf".to_string()
            } else {
                v.to_string()
            }
        };
        write!(
            f,
            "{}{},{}{}",
            if self.lo_closed { '[' } else { '(' },
            end(self.lo),
            end(self.hi),
            if self.hi_closed { ']' } else { ')' }
        )
    }
}

/// A finite union of intervals, kept sorted and merged. Empty pieces are dropped.
#[derive(Debug, Clone, PartialEq)]
pub struct RealSet {
    pieces: Vec<Interval>,
}

impl RealSet {
    pub fn empty() -> Self {
        Self { pieces: Vec::new() }
    }

    pub fn all() -> Self {
        Self { pieces: vec![Interval { lo: f64::NEG_INFINITY, hi: f64::INFINITY, lo_closed: false, hi_closed: false }] }
    }

    pub fn from_intervals(pieces: impl IntoIterator<Item = Interval>) -> Self {
        let mut pieces: Vec<Interval> = pieces.into_iter().filter(|p| !p.is_empty()).collect();
        pieces.sort_by(|a, b| a.lower_key().partial_cmp(&b.lower_key()).unwrap_or(Ordering::Equal));
        let mut merged: Vec<Interval> = Vec::with_capacity(pieces.len());
        for p in pieces {
            if let Some(last) = merged.last_mut() {
                let touches = p.lo < last.hi || (p.lo == last.hi && (p.lo_closed || last.hi_closed));
                if touches {
                    match p.hi.partial_cmp(&last.hi) {
                        Some(Ordering::Greater) => {
                            last.hi = p.hi;
                            last.hi_closed = p.hi_closed;
                        }
                        Some(Ordering::Equal) => last.hi_closed |= p.hi_closed,
                        _ => {}
                    }
                    continue;
                }
            }
            merged.push(p);
        }
        Self { pieces: merged }
    }

    pub fn points(values: &[f64]) -> Result<Self> {
        Ok(Self::from_intervals(values.iter().map(|&v| Interval::point(v)).collect::<Result<Vec<_>>>()?))
    }

    /// `(-inf, v]`.
    pub fn at_most(v: f64) -> Result<Self> {
        Ok(Self::from_intervals([Interval::new(f64::NEG_INFINITY, v, false, true)?]))
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.pieces
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    pub fn contains(&self, v: f64) -> bool {
        self.pieces.iter().any(|p| p.contains(v))
    }

    /// `interval ⊆ self`. Pieces are merged, so one piece must cover it.
    pub fn covers(&self, interval: &Interval) -> bool {
        interval.is_empty() || self.pieces.iter().any(|p| p.covers(interval))
    }

    pub fn union(&self, other: &RealSet) -> RealSet {
        Self::from_intervals(self.pieces.iter().chain(&other.pieces).copied())
    }

    /// `R \ self`.
    pub fn complement(&self) -> RealSet {
        let mut gaps = Vec::with_capacity(self.pieces.len() + 1);
        let (mut lo, mut lo_closed) = (f64::NEG_INFINITY, false);
        for p in &self.pieces {
            if p.lo > f64::NEG_INFINITY {
                gaps.push(Interval { lo, hi: p.lo, lo_closed, hi_closed: !p.lo_closed });
            }
            (lo, lo_closed) = (p.hi, !p.hi_closed && p.hi.is_finite());
        }
        if lo < f64::INFINITY {
            gaps.push(Interval { lo, hi: f64::INFINITY, lo_closed, hi_closed: false });
        }
        Self::from_intervals(gaps)
    }

    pub fn intersection(&self, other: &RealSet) -> RealSet {
        self.complement().union(&other.complement()).complement()
    }

    pub fn difference(&self, other: &RealSet) -> RealSet {
        self.intersection(&other.complement())
    }

    pub fn parse(text: &str) -> Result<Self> {
        let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        match compact.as_str() {
            "" => return Err(Error::MalformedSet("empty input".into())),
            "R" | "all" => return Ok(Self::all()),
            "empty" | "{}" => return Ok(Self::empty()),
            _ => {}
        }
        let mut pieces = Vec::new();
        for part in compact.split('|') {
            let bad = || Error::MalformedSet(format!("cannot parse `{part}`"));
            let (open, inner, close) = match (part.chars().next(), part.chars().last()) {
                (Some(o), Some(c)) if part.chars().nth(1).is_some() => {
                    (o, &part[o.len_utf8()..part.len() - c.len_utf8()], c)
                }
                _ => return Err(bad()),
            };
            match (open, close) {
                ('{', '}') => {
                    for v in inner.split(',') {
                        pieces.push(Interval::point(parse_number(v).ok_or_else(bad)?)?);
                    }
                }
                ('[' | '(', ']' | ')') => {
                    let (a, b) = inner.split_once(',').ok_or_else(bad)?;
                    let lo = parse_endpoint(a).ok_or_else(bad)?;
                    let hi = parse_endpoint(b).ok_or_else(bad)?;
                    pieces.push(Interval::new(lo, hi, open == '[', close == ']')?);
                }
                _ => return Err(bad()),
            }
        }
        Ok(Self::from_intervals(pieces))
    }
}

fn parse_number(s: &str) -> Option<f64> {
    let v = if s.contains('/') { parse_rational(s).ok().map(|r| to_f64(&r))? } else { s.parse::<f64>().ok()? };
    v.is_finite().then_some(v)
}

fn parse_endpoint(s: &str) -> Option<f64> {
    match s {
        "-inf" => Some(f64::NEG_INFINITY),
        "inf" | "+inf" => Some(f64::INFINITY),
        _ => parse_number(s),
    }
}

impl fmt::Display for RealSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.pieces.is_empty() {
            return write!(f, "empty");
        }
        if *self == Self::all() {
            return write!(f, "R");
        }
        for (i, p) in self.pieces.iter().enumerate() {
            if i > 0 {
                write!(f, " | ")?;
            }
            write!(f, "{p}")?;
        }
        Ok(())
    }
}

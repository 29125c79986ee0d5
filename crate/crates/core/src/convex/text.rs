//! Text form of points, relative to the space that owns them.
//!
//! | carrier          | syntax                         |
//! |------------------|--------------------------------|
//! | 1-d box          | `1/2`                          |
//! | box / simplex    | `(1/2,0,1/2)`                  |
//! | extended line    | `-3/4`, `inf`                  |
//! | chain            | `7`                            |
//! | labels           | `u`                            |
//! | product          | `<a;b>`                        |
//! | semidirect       | `H@3/10` (branch label `@` point) |

use super::{Carrier, ConvexSpaceSpec, Point};
use crate::error::{Error, Result};
use crate::rational::{fmt_rational, parse_rational, ExtValue};

impl ConvexSpaceSpec {
    pub fn fmt_point(&self, x: &Point) -> String {
        match (&self.carrier, x) {
            (Carrier::Box { .. } | Carrier::Simplex { .. }, Point::Vector(v)) if v.len() == 1 => {
                fmt_rational(&v[0])
            }
            (_, Point::Vector(v)) => {
                format!(
                    "({})",
                    v.iter().map(fmt_rational).collect::<Vec<_>>().join(",")
                )
            }
            (_, Point::Ext(e)) => e.to_string(),
            (Carrier::Labels { names, .. }, Point::Label(i)) if *i < names.len() => {
                names[*i].clone()
            }
            (_, Point::Label(i)) => i.to_string(),
            (Carrier::Product(a, b), Point::Pair(x, y)) => {
                format!("<{};{}>", a.fmt_point(x), b.fmt_point(y))
            }
            (_, Point::Pair(x, y)) => format!("<{x:?};{y:?}>"),
            (
                Carrier::Semidirect {
                    base, components, ..
                },
                Point::Branch(b, x),
            ) if *b < components.len() => {
                format!(
                    "{}@{}",
                    base.fmt_point(&Point::Label(*b)),
                    components[*b].fmt_point(x)
                )
            }
            (_, Point::Branch(b, x)) => format!("{b}@{x:?}"),
        }
    }

    pub fn parse_point(&self, s: &str) -> Result<Point> {
        let s = s.trim();
        let point = match &self.carrier {
            Carrier::Box { lo, .. } if lo.len() == 1 && !s.starts_with('(') => {
                Point::Vector(vec![parse_rational(s)?])
            }
            Carrier::Simplex { dim: 1 } if !s.starts_with('(') => {
                Point::Vector(vec![parse_rational(s)?])
            }
            Carrier::Box { .. } | Carrier::Simplex { .. } => {
                let inner = s
                    .strip_prefix('(')
                    .and_then(|r| r.strip_suffix(')'))
                    .ok_or_else(|| {
                        Error::Parse(format!("expected (x,y,...) for {}, got {s:?}", self.id))
                    })?;
                Point::Vector(
                    inner
                        .split(',')
                        .map(parse_rational)
                        .collect::<Result<_>>()?,
                )
            }
            Carrier::ExtendedReal | Carrier::ExtendedNonneg => Point::Ext(ExtValue::parse(s)?),
            Carrier::Chain { .. } => Point::Label(
                s.parse()
                    .map_err(|_| Error::Parse(format!("expected a chain value, got {s:?}")))?,
            ),
            Carrier::Labels { names, .. } => Point::Label(
                names
                    .iter()
                    .position(|n| n == s)
                    .ok_or_else(|| Error::Parse(format!("unknown label {s:?} in {}", self.id)))?,
            ),
            Carrier::Product(a, b) => {
                let inner = s
                    .strip_prefix('<')
                    .and_then(|r| r.strip_suffix('>'))
                    .ok_or_else(|| {
                        Error::Parse(format!("expected <a;b> for {}, got {s:?}", self.id))
                    })?;
                let parts = split_top_level(inner, ';');
                if parts.len() != 2 {
                    return Err(Error::Parse(format!("expected two components in {s:?}")));
                }
                Point::pair(a.parse_point(parts[0])?, b.parse_point(parts[1])?)
            }
            Carrier::Semidirect {
                base, components, ..
            } => {
                let (label, rest) = s.split_once('@').ok_or_else(|| {
                    Error::Parse(format!("expected branch@point for {}, got {s:?}", self.id))
                })?;
                let b = match base.parse_point(label)? {
                    Point::Label(b) => b,
                    other => return Err(Error::Parse(format!("bad branch {other:?}"))),
                };
                let comp = components
                    .get(b)
                    .ok_or_else(|| Error::Parse(format!("no branch {label:?}")))?;
                Point::branch(b, comp.parse_point(rest)?)
            }
        };
        self.check(&point)?;
        Ok(point)
    }

    /// Looks up a named point (labels, chains) by its text form.
    pub fn label(&self, name: &str) -> Result<Point> {
        self.parse_point(name)
    }
}

/// Splits on `sep` outside of `()` and `<>` nesting.
pub(crate) fn split_top_level(s: &str, sep: char) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in s.char_indices() {
        match c {
            '(' | '<' => depth += 1,
            ')' | '>' => depth -= 1,
            c if c == sep && depth == 0 => {
                out.push(&s[start..i]);
                start = i + c.len_utf8();
            }
            _ => {}
        }
    }
    out.push(&s[start..]);
    out
}

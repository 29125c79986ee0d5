//! Line-oriented space definitions.
//!
//! ```text
//! # comment
//! space <id> kind=<geometric|discrete|mixed> carrier=<carrier> [rule=<rule>] [metric=<metric>] [expect=<reject|accept>]
//! glue <from> -> <to> at <point>
//! ```
//!
//! Carriers: `interval <lo> <hi>`, `box <lo>..<hi> ...`, `simplex <dim>`,
//! `extended-real`, `extended-nonneg`, `chain <n>`, `naturals <n>`,
//! `labels <name> ...`, `product <id> <id>` and `semidirect <base-id> <component-id> ...`.
//! `rule` is `min` or `max` for chains and labels, or `example-C` for the
//! labels `0 u 1`. A `glue` line attaches to the semidirect space defined just before it.
//! File definitions may replace built-ins of the same id.

use std::collections::BTreeSet;
use std::fmt;

use giry::convex::builtin::space_c;
use giry::convex::{
    chain, interval, ordered_labels, product_space, semidirect_space, truncated_naturals, Carrier,
    ChainRule, ConvexSpaceSpec, Glue, Point, SpaceKind,
};
use giry::metric::Metric;
use giry::rational::parse_rational;
use giry::registry::{Registry, SpaceEntry};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "line {}, column {}: {}",
            self.line, self.column, self.message
        )
    }
}

impl std::error::Error for ParseError {}

/// A whitespace-separated word and its 1-based column.
#[derive(Clone, Copy, Debug)]
struct Token<'a> {
    column: usize,
    text: &'a str,
}

fn tokenize(line: &str) -> Vec<Token<'_>> {
    let mut tokens = Vec::new();
    let mut start: Option<usize> = None;
    for (i, c) in line
        .char_indices()
        .chain(std::iter::once((line.len(), ' ')))
    {
        match (c.is_whitespace(), start) {
            (true, Some(s)) => {
                tokens.push(Token {
                    column: line[..s].chars().count() + 1,
                    text: &line[s..i],
                });
                start = None;
            }
            (false, None) => start = Some(i),
            _ => {}
        }
    }
    tokens
}

/// A `key=value words...` field of a `space` line.
struct Field<'a> {
    key: &'a str,
    column: usize,
    /// The value after `=` followed by any continuation words.
    words: Vec<Token<'a>>,
}

const KEYS: [&str; 5] = ["kind", "carrier", "rule", "metric", "expect"];

/// A semidirect space waits for its `glue` lines.
struct Pending {
    line: usize,
    column: usize,
    id: String,
    base: ConvexSpaceSpec,
    components: Vec<ConvexSpaceSpec>,
    glues: Vec<Glue>,
    metric: Option<(usize, String)>,
    expect_reject: bool,
}

struct Parser {
    registry: Registry,
    defined: BTreeSet<String>,
    pending: Option<Pending>,
}

/// Parses a space file into a registry holding the built-ins plus every defined space.
pub fn parse_space_file(text: &str) -> Result<Registry, ParseError> {
    let mut parser = Parser {
        registry: Registry::builtins(),
        defined: BTreeSet::new(),
        pending: None,
    };
    for (index, raw) in text.lines().enumerate() {
        let line = index + 1;
        let content = raw.split('#').next().unwrap_or("");
        let tokens = tokenize(content);
        let Some(head) = tokens.first() else { continue };
        match head.text {
            "space" => {
                parser.flush()?;
                parser.space_line(line, &tokens)?;
            }
            "glue" => parser.glue_line(line, &tokens)?,
            other => {
                return Err(err(
                    line,
                    head.column,
                    format!("unknown directive {other:?}"),
                ))
            }
        }
    }
    parser.flush()?;
    Ok(parser.registry)
}

fn err(line: usize, column: usize, message: impl Into<String>) -> ParseError {
    ParseError {
        line,
        column,
        message: message.into(),
    }
}

impl Parser {
    fn space_line(&mut self, line: usize, tokens: &[Token<'_>]) -> Result<(), ParseError> {
        let id_token = tokens
            .get(1)
            .ok_or_else(|| err(line, tokens[0].column, "missing space id"))?;
        if id_token.text.contains('=') {
            return Err(err(line, id_token.column, "missing space id"));
        }
        let id = id_token.text.to_string();
        if self.defined.contains(&id) {
            return Err(err(
                line,
                id_token.column,
                format!("duplicate space id {id:?}"),
            ));
        }
        let fields = split_fields(line, &tokens[2..])?;
        let field = |key: &str| fields.iter().find(|f| f.key == key);
        let single = |key: &str| -> Result<Option<(usize, &str)>, ParseError> {
            match field(key) {
                None => Ok(None),
                Some(f) if f.words.len() == 1 => Ok(Some((f.words[0].column, f.words[0].text))),
                Some(f) => Err(err(line, f.column, format!("{key} takes a single value"))),
            }
        };

        let (kind_col, kind_text) =
            single("kind")?.ok_or_else(|| err(line, id_token.column, "missing kind="))?;
        let kind = SpaceKind::parse(kind_text).map_err(|e| err(line, kind_col, e.to_string()))?;
        let carrier =
            field("carrier").ok_or_else(|| err(line, id_token.column, "missing carrier="))?;
        let rule = single("rule")?;
        let metric = single("metric")?.map(|(c, m)| (c, m.to_string()));
        let expect_reject = match single("expect")? {
            None | Some((_, "accept")) => false,
            Some((_, "reject")) => true,
            Some((c, other)) => {
                return Err(err(
                    line,
                    c,
                    format!("expect must be reject or accept, got {other:?}"),
                ))
            }
        };

        let built = self.carrier(line, &id, carrier, rule)?;
        let space = match built {
            Built::Space(space) => space,
            Built::Semidirect { base, components } => {
                if kind != SpaceKind::Mixed {
                    return Err(err(
                        line,
                        kind_col,
                        format!("kind={kind_text} does not match a semidirect carrier"),
                    ));
                }
                self.defined.insert(id.clone());
                self.pending = Some(Pending {
                    line,
                    column: carrier.column,
                    id,
                    base,
                    components,
                    glues: Vec::new(),
                    metric,
                    expect_reject,
                });
                return Ok(());
            }
        };
        if space.kind != kind {
            return Err(err(
                line,
                kind_col,
                format!(
                    "kind={kind_text} does not match carrier {} of kind {}",
                    carrier.words[0].text,
                    space.kind.as_str()
                ),
            ));
        }
        self.defined.insert(id);
        self.register(line, space, metric, expect_reject)
    }

    fn register(
        &mut self,
        line: usize,
        space: ConvexSpaceSpec,
        metric: Option<(usize, String)>,
        expect_reject: bool,
    ) -> Result<(), ParseError> {
        let (column, metric) = match metric {
            None => (0, Metric::default_for(&space)),
            Some((c, text)) => (
                c,
                Metric::parse(&text).map_err(|e| err(line, c, e.to_string()))?,
            ),
        };
        let entry = SpaceEntry::new(space, metric, expect_reject)
            .map_err(|e| err(line, column, e.to_string()))?;
        self.registry.upsert(entry);
        Ok(())
    }

    fn lookup(&self, line: usize, token: &Token<'_>) -> Result<ConvexSpaceSpec, ParseError> {
        if self.pending.as_ref().is_some_and(|p| p.id == token.text) {
            return Err(err(
                line,
                token.column,
                format!("space {:?} is not complete yet", token.text),
            ));
        }
        self.registry
            .get(token.text)
            .map(|e| e.space.clone())
            .map_err(|_| {
                err(
                    line,
                    token.column,
                    format!("unknown space id {:?}", token.text),
                )
            })
    }

    fn carrier(
        &self,
        line: usize,
        id: &str,
        field: &Field<'_>,
        rule: Option<(usize, &str)>,
    ) -> Result<Built, ParseError> {
        let name = field.words[0];
        let args = &field.words[1..];
        let arity = |n: usize| -> Result<(), ParseError> {
            if args.len() == n {
                Ok(())
            } else {
                Err(err(
                    line,
                    name.column,
                    format!(
                        "carrier {} takes {n} argument(s), got {}",
                        name.text,
                        args.len()
                    ),
                ))
            }
        };
        let number =
            |t: &Token<'_>| parse_rational(t.text).map_err(|e| err(line, t.column, e.to_string()));
        let count = |t: &Token<'_>| -> Result<usize, ParseError> {
            match t.text.parse::<usize>() {
                Ok(n) if n > 0 => Ok(n),
                _ => Err(err(
                    line,
                    t.column,
                    format!("expected a positive integer, got {:?}", t.text),
                )),
            }
        };
        let chain_rule = || -> Result<ChainRule, ParseError> {
            match rule {
                None | Some((_, "min")) => Ok(ChainRule::Min),
                Some((_, "max")) => Ok(ChainRule::Max),
                Some((c, other)) => Err(err(
                    line,
                    c,
                    format!("rule must be min or max here, got {other:?}"),
                )),
            }
        };
        let no_rule = || match rule {
            Some((c, _)) => Err(err(line, c, format!("carrier {} takes no rule", name.text))),
            None => Ok(()),
        };
        let space = match name.text {
            "interval" => {
                arity(2)?;
                no_rule()?;
                let (lo, hi) = (number(&args[0])?, number(&args[1])?);
                if lo > hi {
                    return Err(err(line, args[0].column, "interval bounds out of order"));
                }
                interval(id, lo, hi)
            }
            "box" => {
                no_rule()?;
                if args.is_empty() {
                    return Err(err(
                        line,
                        name.column,
                        "box needs at least one lo..hi range",
                    ));
                }
                let mut lo = Vec::new();
                let mut hi = Vec::new();
                for t in args {
                    let (a, b) = t.text.split_once("..").ok_or_else(|| {
                        err(line, t.column, format!("expected lo..hi, got {:?}", t.text))
                    })?;
                    let (a, b) = (
                        parse_rational(a).map_err(|e| err(line, t.column, e.to_string()))?,
                        parse_rational(b).map_err(|e| err(line, t.column, e.to_string()))?,
                    );
                    if a > b {
                        return Err(err(line, t.column, "box range out of order"));
                    }
                    lo.push(a);
                    hi.push(b);
                }
                ConvexSpaceSpec::new(id, SpaceKind::Geometric, Carrier::Box { lo, hi })
            }
            "simplex" => {
                arity(1)?;
                no_rule()?;
                ConvexSpaceSpec::new(
                    id,
                    SpaceKind::Geometric,
                    Carrier::Simplex {
                        dim: count(&args[0])?,
                    },
                )
            }
            "extended-real" | "extended-nonneg" => {
                arity(0)?;
                no_rule()?;
                let carrier = if name.text == "extended-real" {
                    Carrier::ExtendedReal
                } else {
                    Carrier::ExtendedNonneg
                };
                ConvexSpaceSpec::new(id, SpaceKind::Geometric, carrier)
            }
            "chain" => {
                arity(1)?;
                chain(id, count(&args[0])?, chain_rule()?)
            }
            "naturals" => {
                arity(1)?;
                no_rule()?;
                truncated_naturals(id, count(&args[0])?)
            }
            "labels" => {
                if args.is_empty() {
                    return Err(err(line, name.column, "labels needs at least one name"));
                }
                let names: Vec<&str> = args.iter().map(|t| t.text).collect();
                if let Some(dup) = args
                    .iter()
                    .enumerate()
                    .find(|(i, t)| names[..*i].contains(&t.text))
                {
                    return Err(err(
                        line,
                        dup.1.column,
                        format!("duplicate label {:?}", dup.1.text),
                    ));
                }
                if let Some((c, "example-C")) = rule {
                    let mut sorted = names.clone();
                    sorted.sort_unstable();
                    if sorted != ["0", "1", "u"] {
                        return Err(err(
                            line,
                            c,
                            "rule=example-C needs exactly the labels 0 u 1",
                        ));
                    }
                    space_c().with_id(id)
                } else {
                    ordered_labels(id, &names, chain_rule()?)
                        .map_err(|e| err(line, name.column, e.to_string()))?
                }
            }
            "product" => {
                arity(2)?;
                no_rule()?;
                product_space(&self.lookup(line, &args[0])?, &self.lookup(line, &args[1])?)
                    .with_id(id)
            }
            "semidirect" => {
                no_rule()?;
                if args.len() < 2 {
                    return Err(err(
                        line,
                        name.column,
                        "semidirect needs a base and at least one component",
                    ));
                }
                let base = self.lookup(line, &args[0])?;
                let components = args[1..]
                    .iter()
                    .map(|t| self.lookup(line, t))
                    .collect::<Result<_, _>>()?;
                return Ok(Built::Semidirect { base, components });
            }
            other => return Err(err(line, name.column, format!("unknown carrier {other:?}"))),
        };
        Ok(Built::Space(space))
    }

    fn glue_line(&mut self, line: usize, tokens: &[Token<'_>]) -> Result<(), ParseError> {
        let pending = self.pending.as_mut().ok_or_else(|| {
            err(
                line,
                tokens[0].column,
                "glue must follow a semidirect space",
            )
        })?;
        let shape_ok = tokens.len() == 6 && tokens[2].text == "->" && tokens[4].text == "at";
        if !shape_ok {
            return Err(err(
                line,
                tokens[0].column,
                "expected: glue <from> -> <to> at <point>",
            ));
        }
        let branch = |t: &Token<'_>| match pending.base.parse_point(t.text) {
            Ok(Point::Label(i)) => Ok(i),
            _ => Err(err(
                line,
                t.column,
                format!("{:?} is not a point of {}", t.text, pending.base.id),
            )),
        };
        let (from, to) = (branch(&tokens[1])?, branch(&tokens[3])?);
        let point = pending.components[to]
            .parse_point(tokens[5].text)
            .map_err(|e| err(line, tokens[5].column, e.to_string()))?;
        pending.glues.push(Glue { from, to, point });
        Ok(())
    }

    fn flush(&mut self) -> Result<(), ParseError> {
        let Some(p) = self.pending.take() else {
            return Ok(());
        };
        let space = semidirect_space(&p.id, &p.base, p.components, p.glues)
            .map_err(|e| err(p.line, p.column, e.to_string()))?;
        self.register(p.line, space, p.metric, p.expect_reject)
    }
}

enum Built {
    Space(ConvexSpaceSpec),
    Semidirect {
        base: ConvexSpaceSpec,
        components: Vec<ConvexSpaceSpec>,
    },
}

fn split_fields<'a>(line: usize, tokens: &[Token<'a>]) -> Result<Vec<Field<'a>>, ParseError> {
    let mut fields: Vec<Field<'a>> = Vec::new();
    for t in tokens {
        let keyed = t.text.split_once('=').filter(|(k, _)| KEYS.contains(k));
        match keyed {
            Some((key, value)) => {
                if fields.iter().any(|f| f.key == key) {
                    return Err(err(line, t.column, format!("{key}= given twice")));
                }
                let column = t.column + key.len() + 1;
                let words = if value.is_empty() {
                    Vec::new()
                } else {
                    vec![Token {
                        column,
                        text: value,
                    }]
                };
                fields.push(Field {
                    key,
                    column: t.column,
                    words,
                });
            }
            None => match (t.text.split_once('='), fields.last_mut()) {
                (Some((key, _)), _) => {
                    return Err(err(line, t.column, format!("unknown field {key:?}")))
                }
                (None, Some(f)) if f.key == "carrier" => f.words.push(*t),
                (None, _) => {
                    return Err(err(line, t.column, format!("unexpected word {:?}", t.text)))
                }
            },
        }
    }
    if let Some(f) = fields.iter().find(|f| f.words.is_empty()) {
        return Err(err(line, f.column, format!("{}= has no value", f.key)));
    }
    Ok(fields)
}

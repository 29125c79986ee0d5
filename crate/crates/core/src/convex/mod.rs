//! Concrete convex spaces and their binary combination rules.
//!
//! A [`ConvexSpaceSpec`] pairs a carrier description with the combination
//! semantics of that carrier. Points are plain payloads ([`Point`]); a space
//! decides which payloads it owns through [`ConvexSpaceSpec::contains`].
//! All weights are exact rationals.

mod affine;
pub mod builtin;
mod ideal;
mod poset;
mod text;

use std::fmt;

use num_traits::{One, Signed, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{rat, ExtValue, Rational};

pub(crate) use affine::structured_points;
pub use affine::{coseparates, is_affine, AffineMap, AffinityReport, CoseparationReport};
pub use ideal::{char_map, enumerate_ideals, Ideal, IDEAL_ENUMERATION_LIMIT};
pub use poset::{classify_kind, discrete_poset, KindDecision, KindReport, PosetReport};
pub(crate) use text::split_top_level;

/// The three structural types of convex spaces.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpaceKind {
    Geometric,
    Discrete,
    Mixed,
}

impl SpaceKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "geometric" => Ok(SpaceKind::Geometric),
            "discrete" => Ok(SpaceKind::Discrete),
            "mixed" => Ok(SpaceKind::Mixed),
            other => Err(Error::Parse(format!("unknown kind {other:?}"))),
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            SpaceKind::Geometric => "geometric",
            SpaceKind::Discrete => "discrete",
            SpaceKind::Mixed => "mixed",
        }
    }
}

impl fmt::Display for SpaceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Combination rule of a finite chain `{0, …, n-1}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ChainRule {
    Min,
    Max,
}

/// A point of some space. Which variant is valid depends on the carrier.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Point {
    /// Rational coordinates (boxes, simplices).
    Vector(Vec<Rational>),
    /// A point of an extended line.
    Ext(ExtValue),
    /// Index into a finite discrete carrier (chain value or label position).
    Label(usize),
    /// A point of a product space.
    Pair(Box<Point>, Box<Point>),
    /// A point of a semidirect product: branch index and a point of that branch.
    Branch(usize, Box<Point>),
}

impl Point {
    pub fn scalar(r: Rational) -> Point {
        Point::Vector(vec![r])
    }

    pub fn pair(a: Point, b: Point) -> Point {
        Point::Pair(Box::new(a), Box::new(b))
    }

    pub fn branch(b: usize, x: Point) -> Point {
        Point::Branch(b, Box::new(x))
    }

    pub fn as_ext(&self) -> Option<&ExtValue> {
        match self {
            Point::Ext(v) => Some(v),
            _ => None,
        }
    }

    pub fn as_vector(&self) -> Option<&[Rational]> {
        match self {
            Point::Vector(v) => Some(v),
            _ => None,
        }
    }
}

/// Constant gluing map: every point of branch `from` is sent to `point` of branch `to`
/// when the two branches are combined.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Glue {
    pub from: usize,
    pub to: usize,
    pub point: Point,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Carrier {
    /// Axis-aligned rational box `∏ [lo_i, hi_i]`.
    Box {
        lo: Vec<Rational>,
        hi: Vec<Rational>,
    },
    /// Probability vectors of length `dim`.
    Simplex {
        dim: usize,
    },
    /// `ℚ ∪ {+∞}` with `∞` absorbing every positive-weight combination.
    ExtendedReal,
    /// `ℚ₊ ∪ {+∞}`.
    ExtendedNonneg,
    /// `{0, …, size-1}` with `p·i + (1-p)·j = min(i,j)` or `max(i,j)`.
    /// `naturals` marks a truncation of ℕ, which forces the min rule.
    Chain {
        size: usize,
        rule: ChainRule,
        naturals: bool,
    },
    /// Finite labels with a p-independent combination table: `table[a][b]` is
    /// `p·a + (1-p)·b` for every `p ∈ (0,1)`.
    Labels {
        names: Vec<String>,
        table: Vec<Vec<usize>>,
    },
    Product(Box<ConvexSpaceSpec>, Box<ConvexSpaceSpec>),
    /// Semidirect product over a totally ordered discrete base. Branch `b`
    /// carries `components[b]`; points of an absorbed branch are sent through
    /// the gluing map into the surviving branch before combining.
    Semidirect {
        base: Box<ConvexSpaceSpec>,
        components: Vec<ConvexSpaceSpec>,
        glues: Vec<Glue>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConvexSpaceSpec {
    pub id: String,
    /// Declared kind; [`classify_kind`] computes the observed one.
    pub kind: SpaceKind,
    pub carrier: Carrier,
}

/// Nonnegative exact weights summing to one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightVector(Vec<Rational>);

impl WeightVector {
    pub fn new(weights: Vec<Rational>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidWeights("no weights".into()));
        }
        if let Some(w) = weights.iter().find(|w| w.is_negative()) {
            return Err(Error::InvalidWeights(format!("negative weight {w}")));
        }
        let total: Rational = weights.iter().sum();
        if !total.is_one() {
            return Err(Error::InvalidWeights(format!(
                "weights sum to {total}, not 1"
            )));
        }
        Ok(WeightVector(weights))
    }

    pub fn uniform(n: usize) -> Self {
        WeightVector(vec![rat(1, n as i64); n])
    }

    pub fn as_slice(&self) -> &[Rational] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Probability grid used by exhaustive affinity, kind and compatibility checks:
/// `{k/8 : k = 1..7} ∪ {1/3, 2/3}`, simplest fractions first.
pub fn default_p_grid() -> Vec<Rational> {
    let mut grid: Vec<Rational> = (1..8).map(|k| rat(k, 8)).collect();
    grid.push(rat(1, 3));
    grid.push(rat(2, 3));
    grid.sort_by(|a, b| a.denom().cmp(b.denom()).then(a.numer().cmp(b.numer())));
    grid.dedup();
    grid
}

impl ConvexSpaceSpec {
    pub fn new(id: impl Into<String>, kind: SpaceKind, carrier: Carrier) -> Self {
        ConvexSpaceSpec {
            id: id.into(),
            kind,
            carrier,
        }
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = id.into();
        self
    }

    /// Binary combination `p·x + (1-p)·y`.
    pub fn combine2(&self, p: &Rational, x: &Point, y: &Point) -> Result<Point> {
        if p.is_negative() || *p > Rational::one() {
            return Err(Error::InvalidWeights(format!("p = {p} outside [0,1]")));
        }
        self.check(x)?;
        self.check(y)?;
        self.combine2_unchecked(p, x, y)
    }

    fn combine2_unchecked(&self, p: &Rational, x: &Point, y: &Point) -> Result<Point> {
        if p.is_one() {
            return Ok(x.clone());
        }
        if p.is_zero() {
            return Ok(y.clone());
        }
        let q = Rational::one() - p;
        match (&self.carrier, x, y) {
            (Carrier::Box { .. } | Carrier::Simplex { .. }, Point::Vector(a), Point::Vector(b)) => {
                Ok(Point::Vector(
                    a.iter().zip(b).map(|(a, b)| p * a + &q * b).collect(),
                ))
            }
            (Carrier::ExtendedReal | Carrier::ExtendedNonneg, Point::Ext(a), Point::Ext(b)) => {
                Ok(Point::Ext(&a.scale(p) + &b.scale(&q)))
            }
            (Carrier::Chain { rule, .. }, Point::Label(a), Point::Label(b)) => {
                Ok(Point::Label(match rule {
                    ChainRule::Min => *a.min(b),
                    ChainRule::Max => *a.max(b),
                }))
            }
            (Carrier::Labels { table, .. }, Point::Label(a), Point::Label(b)) => {
                Ok(Point::Label(table[*a][*b]))
            }
            (Carrier::Product(sa, sb), Point::Pair(xa, xb), Point::Pair(ya, yb)) => {
                Ok(Point::pair(
                    sa.combine2_unchecked(p, xa, ya)?,
                    sb.combine2_unchecked(p, xb, yb)?,
                ))
            }
            (
                Carrier::Semidirect {
                    base, components, ..
                },
                Point::Branch(i, xi),
                Point::Branch(j, yj),
            ) => {
                let survivor =
                    match base.combine2_unchecked(p, &Point::Label(*i), &Point::Label(*j))? {
                        Point::Label(s) => s,
                        other => unreachable!("discrete base produced {other:?}"),
                    };
                if survivor != *i && survivor != *j {
                    return Err(Error::NotTotal(format!(
                        "branches {} and {} combine to a third branch",
                        base.fmt_point(&Point::Label(*i)),
                        base.fmt_point(&Point::Label(*j))
                    )));
                }
                let xs = self.move_to_branch(*i, xi, survivor)?;
                let ys = self.move_to_branch(*j, yj, survivor)?;
                Ok(Point::branch(
                    survivor,
                    components[survivor].combine2_unchecked(p, &xs, &ys)?,
                ))
            }
            _ => Err(Error::NotInSpace {
                space: self.id.clone(),
                element: format!("{x:?} / {y:?}"),
            }),
        }
    }

    /// Image of a branch-`from` point in branch `to` (identity when equal).
    pub fn move_to_branch(&self, from: usize, x: &Point, to: usize) -> Result<Point> {
        if from == to {
            return Ok(x.clone());
        }
        match &self.carrier {
            Carrier::Semidirect { glues, .. } => {
                glue_point(glues, from, to).cloned().ok_or_else(|| {
                    Error::Invalid(format!(
                        "no gluing map from branch {from} to branch {to} in {}",
                        self.id
                    ))
                })
            }
            _ => Err(Error::Invalid(format!(
                "{} is not a semidirect product",
                self.id
            ))),
        }
    }

    /// n-ary combination: zero weights are dropped, then the binary rule is
    /// left-folded with renormalized weights.
    pub fn combine(&self, w: &WeightVector, xs: &[Point]) -> Result<Point> {
        if w.len() != xs.len() {
            return Err(Error::LengthMismatch(w.len(), xs.len()));
        }
        for x in xs {
            self.check(x)?;
        }
        let mut terms = w.as_slice().iter().zip(xs).filter(|(w, _)| !w.is_zero());
        let (w0, x0) = terms.next().ok_or(Error::EmptySupport)?;
        let mut acc = x0.clone();
        let mut mass = w0.clone();
        for (wi, xi) in terms {
            let total = &mass + wi;
            acc = self.combine2_unchecked(&(&mass / &total), &acc, xi)?;
            mass = total;
        }
        Ok(acc)
    }

    pub fn contains(&self, x: &Point) -> bool {
        match (&self.carrier, x) {
            (Carrier::Box { lo, hi }, Point::Vector(v)) => {
                v.len() == lo.len()
                    && v.iter()
                        .zip(lo.iter().zip(hi))
                        .all(|(c, (l, h))| l <= c && c <= h)
            }
            (Carrier::Simplex { dim }, Point::Vector(v)) => {
                v.len() == *dim
                    && v.iter().all(|c| !c.is_negative())
                    && v.iter().sum::<Rational>().is_one()
            }
            (Carrier::ExtendedReal, Point::Ext(_)) => true,
            (Carrier::ExtendedNonneg, Point::Ext(v)) => match v {
                ExtValue::Finite(r) => !r.is_negative(),
                ExtValue::Infinity => true,
            },
            (Carrier::Chain { size, .. }, Point::Label(i)) => i < size,
            (Carrier::Labels { names, .. }, Point::Label(i)) => *i < names.len(),
            (Carrier::Product(a, b), Point::Pair(x, y)) => a.contains(x) && b.contains(y),
            (Carrier::Semidirect { components, .. }, Point::Branch(b, x)) => {
                components.get(*b).is_some_and(|c| c.contains(x))
            }
            _ => false,
        }
    }

    pub fn check(&self, x: &Point) -> Result<()> {
        if self.contains(x) {
            Ok(())
        } else {
            Err(Error::NotInSpace {
                space: self.id.clone(),
                element: format!("{x:?}"),
            })
        }
    }

    /// Cardinality of a finite carrier.
    pub fn finite_size(&self) -> Option<usize> {
        match &self.carrier {
            Carrier::Box { lo, hi } => lo.iter().zip(hi).all(|(l, h)| l == h).then_some(1),
            Carrier::Simplex { dim } => (*dim == 1).then_some(1),
            Carrier::ExtendedReal | Carrier::ExtendedNonneg => None,
            Carrier::Chain { size, .. } => Some(*size),
            Carrier::Labels { names, .. } => Some(names.len()),
            Carrier::Product(a, b) => Some(a.finite_size()? * b.finite_size()?),
            Carrier::Semidirect { components, .. } => components
                .iter()
                .map(|c| c.finite_size())
                .sum::<Option<usize>>(),
        }
    }

    /// All points of a finite carrier, in canonical order.
    pub fn enumerate(&self) -> Option<Vec<Point>> {
        match &self.carrier {
            Carrier::Box { lo, hi } => lo
                .iter()
                .zip(hi)
                .all(|(l, h)| l == h)
                .then(|| vec![Point::Vector(lo.clone())]),
            Carrier::Simplex { dim } => {
                (*dim == 1).then(|| vec![Point::Vector(vec![Rational::one()])])
            }
            Carrier::ExtendedReal | Carrier::ExtendedNonneg => None,
            Carrier::Chain { size, .. } => Some((0..*size).map(Point::Label).collect()),
            Carrier::Labels { names, .. } => Some((0..names.len()).map(Point::Label).collect()),
            Carrier::Product(a, b) => {
                let (xs, ys) = (a.enumerate()?, b.enumerate()?);
                Some(
                    xs.iter()
                        .flat_map(|x| ys.iter().map(move |y| Point::pair(x.clone(), y.clone())))
                        .collect(),
                )
            }
            Carrier::Semidirect { components, .. } => {
                let mut out = Vec::new();
                for (b, c) in components.iter().enumerate() {
                    out.extend(c.enumerate()?.into_iter().map(|x| Point::branch(b, x)));
                }
                Some(out)
            }
        }
    }

    /// Draws a point from a coarse rational grid of the carrier.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        const DENOMS: [i64; 7] = [1, 2, 3, 4, 6, 8, 12];
        match &self.carrier {
            Carrier::Box { lo, hi } => Point::Vector(
                lo.iter()
                    .zip(hi)
                    .map(|(l, h)| {
                        let d = DENOMS[rng.gen_range(0..DENOMS.len())];
                        let k = rng.gen_range(0..=d);
                        l + (h - l) * rat(k, d)
                    })
                    .collect(),
            ),
            Carrier::Simplex { dim } => {
                let mut raw: Vec<i64> = (0..*dim).map(|_| rng.gen_range(0..=6)).collect();
                if raw.iter().all(|&r| r == 0) {
                    let i = rng.gen_range(0..*dim);
                    raw[i] = 1;
                }
                let total: i64 = raw.iter().sum();
                Point::Vector(raw.into_iter().map(|r| rat(r, total)).collect())
            }
            Carrier::ExtendedReal => {
                if rng.gen_ratio(1, 8) {
                    Point::Ext(ExtValue::Infinity)
                } else {
                    Point::Ext(ExtValue::Finite(rat(rng.gen_range(-16..=16), 4)))
                }
            }
            Carrier::ExtendedNonneg => {
                if rng.gen_ratio(1, 8) {
                    Point::Ext(ExtValue::Infinity)
                } else {
                    Point::Ext(ExtValue::Finite(rat(rng.gen_range(0..=16), 4)))
                }
            }
            Carrier::Chain { size, .. } => Point::Label(rng.gen_range(0..*size)),
            Carrier::Labels { names, .. } => Point::Label(rng.gen_range(0..names.len())),
            Carrier::Product(a, b) => Point::pair(a.sample(rng), b.sample(rng)),
            Carrier::Semidirect { components, .. } => {
                let b = rng.gen_range(0..components.len());
                Point::branch(b, components[b].sample(rng))
            }
        }
    }

    /// Whether the carrier has a discrete (p-independent) component.
    pub fn has_discrete_part(&self) -> bool {
        match &self.carrier {
            Carrier::Chain { .. } | Carrier::Labels { .. } | Carrier::Semidirect { .. } => true,
            Carrier::Product(a, b) => a.has_discrete_part() || b.has_discrete_part(),
            _ => false,
        }
    }

    pub fn is_discrete_carrier(&self) -> bool {
        matches!(self.carrier, Carrier::Chain { .. } | Carrier::Labels { .. })
    }

    /// Component-wise projections of a product space.
    pub fn product_parts(&self) -> Option<(&ConvexSpaceSpec, &ConvexSpaceSpec)> {
        match &self.carrier {
            Carrier::Product(a, b) => Some((a, b)),
            _ => None,
        }
    }
}

pub(crate) fn glue_point(glues: &[Glue], from: usize, to: usize) -> Option<&Point> {
    glues
        .iter()
        .find(|g| g.from == from && g.to == to)
        .or_else(|| glues.iter().find(|g| g.to == to))
        .map(|g| &g.point)
}

/// Unit interval `[0,1]`.
pub fn interval(id: &str, lo: Rational, hi: Rational) -> ConvexSpaceSpec {
    ConvexSpaceSpec::new(
        id,
        SpaceKind::Geometric,
        Carrier::Box {
            lo: vec![lo],
            hi: vec![hi],
        },
    )
}

/// Componentwise product `a × b`; the declared kind is shared when equal, mixed otherwise.
pub fn product_space(a: &ConvexSpaceSpec, b: &ConvexSpaceSpec) -> ConvexSpaceSpec {
    let kind = if a.kind == b.kind {
        a.kind
    } else {
        SpaceKind::Mixed
    };
    ConvexSpaceSpec::new(
        format!("{}x{}", a.id, b.id),
        kind,
        Carrier::Product(Box::new(a.clone()), Box::new(b.clone())),
    )
}

/// Semidirect product of a totally ordered discrete part with one component per base point.
///
/// Every branch that absorbs another must be the target of a gluing map, and
/// gluing maps into the same branch must agree (constant maps compose to the
/// last one).
pub fn semidirect_space(
    id: &str,
    discrete_part: &ConvexSpaceSpec,
    components: Vec<ConvexSpaceSpec>,
    glues: Vec<Glue>,
) -> Result<ConvexSpaceSpec> {
    let poset = discrete_poset(discrete_part)?;
    if let Some(w) = &poset.witness {
        return Err(Error::NotTotal(format!(
            "{} + {} = {}",
            discrete_part.fmt_point(&w.0),
            discrete_part.fmt_point(&w.1),
            discrete_part.fmt_point(&w.2)
        )));
    }
    let n = discrete_part
        .finite_size()
        .ok_or_else(|| Error::InfiniteCarrier(discrete_part.id.clone()))?;
    if components.len() != n {
        return Err(Error::Invalid(format!(
            "{} components for {} branches",
            components.len(),
            n
        )));
    }
    for g in &glues {
        let target = components
            .get(g.to)
            .ok_or_else(|| Error::Invalid(format!("glue target branch {} out of range", g.to)))?;
        if g.from >= n {
            return Err(Error::Invalid(format!(
                "glue source branch {} out of range",
                g.from
            )));
        }
        target.check(&g.point)?;
        if glues.iter().any(|h| h.to == g.to && h.point != g.point) {
            return Err(Error::Invalid(format!(
                "conflicting gluing points into branch {}",
                g.to
            )));
        }
    }
    let half = rat(1, 2);
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            if discrete_part.combine2(&half, &Point::Label(i), &Point::Label(j))? == Point::Label(j)
                && glue_point(&glues, i, j).is_none()
            {
                return Err(Error::Invalid(format!(
                    "branch {} absorbs branch {} but has no gluing map",
                    discrete_part.fmt_point(&Point::Label(j)),
                    discrete_part.fmt_point(&Point::Label(i))
                )));
            }
        }
    }
    Ok(ConvexSpaceSpec::new(
        id,
        SpaceKind::Mixed,
        Carrier::Semidirect {
            base: Box::new(discrete_part.clone()),
            components,
            glues,
        },
    ))
}

/// Finite label space with an explicit p-independent combination table.
///
/// The table must be idempotent and symmetric.
pub fn label_space(id: &str, names: &[&str], table: Vec<Vec<usize>>) -> Result<ConvexSpaceSpec> {
    let n = names.len();
    if n == 0 {
        return Err(Error::Invalid(
            "label space needs at least one label".into(),
        ));
    }
    if table.len() != n
        || table
            .iter()
            .any(|row| row.len() != n || row.iter().any(|&c| c >= n))
    {
        return Err(Error::Invalid(format!(
            "combination table of {id} is not {n}x{n} over the labels"
        )));
    }
    for a in 0..n {
        if table[a][a] != a {
            return Err(Error::Invalid(format!(
                "{id}: {} + {} is not idempotent",
                names[a], names[a]
            )));
        }
        for b in 0..n {
            if table[a][b] != table[b][a] {
                return Err(Error::Invalid(format!(
                    "{id}: table not symmetric at ({}, {})",
                    names[a], names[b]
                )));
            }
        }
    }
    Ok(ConvexSpaceSpec::new(
        id,
        SpaceKind::Discrete,
        Carrier::Labels {
            names: names.iter().map(|s| s.to_string()).collect(),
            table,
        },
    ))
}

/// Labels combined by the listed order: `rule=min` keeps the earlier label, `max` the later.
pub fn ordered_labels(id: &str, names: &[&str], rule: ChainRule) -> Result<ConvexSpaceSpec> {
    let n = names.len();
    let table = (0..n)
        .map(|a| {
            (0..n)
                .map(|b| match rule {
                    ChainRule::Min => a.min(b),
                    ChainRule::Max => a.max(b),
                })
                .collect()
        })
        .collect();
    label_space(id, names, table)
}

pub fn chain(id: &str, size: usize, rule: ChainRule) -> ConvexSpaceSpec {
    ConvexSpaceSpec::new(
        id,
        SpaceKind::Discrete,
        Carrier::Chain {
            size,
            rule,
            naturals: false,
        },
    )
}

/// `{0, …, size-1}` as a truncation of ℕ; always the min rule.
pub fn truncated_naturals(id: &str, size: usize) -> ConvexSpaceSpec {
    ConvexSpaceSpec::new(
        id,
        SpaceKind::Discrete,
        Carrier::Chain {
            size,
            rule: ChainRule::Min,
            naturals: true,
        },
    )
}

//! Extended metrics, the two compatibility inequalities between a metric and
//! the convex structure, and exact Wasserstein-1 transport.

mod brute;
mod transport;

use std::fmt;

use num_traits::{Signed, Zero};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use crate::check::{witness, CheckConfig, CheckResult, Witness};
use crate::convex::{split_top_level, Carrier, ConvexSpaceSpec, Point};
use crate::error::{Error, Result};
use crate::measures::FinMeasure;
use crate::rational::{fmt_rational, ExtValue, Rational};
use crate::sampling::random_measure;

pub use brute::{brute_force_wasserstein, BRUTE_FORCE_LIMIT};
pub use transport::{wasserstein, Coupling, Method, TransportResult};

/// Distance functions on the carriers of [`Carrier`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Metric {
    /// `Σ |a_i - b_i|` on rational vectors.
    L1,
    /// `max |a_i - b_i|` on rational vectors.
    LInf,
    /// `|a - b|` on an extended line, `∞` between a finite value and `∞`.
    Abs,
    /// `1` between distinct points.
    Discrete,
    /// `∞` between distinct points.
    DiscreteInf,
    /// `|i - j|` on chain or label indices.
    Order,
    /// `d_a + d_b` on a product.
    Sum(Box<Metric>, Box<Metric>),
    /// Component metrics within a branch, `∞` across branches.
    Branch(Vec<Metric>),
    /// Explicit symmetric table over a finite carrier's enumeration order.
    Table(Vec<Vec<ExtValue>>),
}

impl Metric {
    /// Parses `l1`, `linf`, `abs`, `discrete`, `discrete-inf`, `order`,
    /// `sum(<a>,<b>)` and `branch(<m0>,<m1>,...)`.
    pub fn parse(s: &str) -> Result<Metric> {
        let s = s.trim();
        let args = |prefix: &str| -> Option<Result<Vec<Metric>>> {
            let inner = s
                .strip_prefix(prefix)?
                .strip_prefix('(')?
                .strip_suffix(')')?;
            Some(
                split_top_level(inner, ',')
                    .into_iter()
                    .map(Metric::parse)
                    .collect(),
            )
        };
        if let Some(parts) = args("sum") {
            let mut parts = parts?;
            if parts.len() != 2 {
                return Err(Error::Parse(format!(
                    "sum metric takes two components: {s:?}"
                )));
            }
            let b = parts.pop().expect("two");
            let a = parts.pop().expect("two");
            return Ok(Metric::Sum(Box::new(a), Box::new(b)));
        }
        if let Some(parts) = args("branch") {
            return Ok(Metric::Branch(parts?));
        }
        Ok(match s {
            "l1" => Metric::L1,
            "linf" => Metric::LInf,
            "abs" => Metric::Abs,
            "discrete" => Metric::Discrete,
            "discrete-inf" => Metric::DiscreteInf,
            "order" => Metric::Order,
            other => return Err(Error::Parse(format!("unknown metric {other:?}"))),
        })
    }

    /// The metric used when a space declares none.
    pub fn default_for(space: &ConvexSpaceSpec) -> Metric {
        match &space.carrier {
            Carrier::Box { .. } | Carrier::Simplex { .. } => Metric::L1,
            Carrier::ExtendedReal | Carrier::ExtendedNonneg => Metric::Abs,
            Carrier::Chain { .. } | Carrier::Labels { .. } => Metric::DiscreteInf,
            Carrier::Product(a, b) => Metric::Sum(
                Box::new(Metric::default_for(a)),
                Box::new(Metric::default_for(b)),
            ),
            Carrier::Semidirect { components, .. } => {
                Metric::Branch(components.iter().map(Metric::default_for).collect())
            }
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Metric::L1 => f.write_str("l1"),
            Metric::LInf => f.write_str("linf"),
            Metric::Abs => f.write_str("abs"),
            Metric::Discrete => f.write_str("discrete"),
            Metric::DiscreteInf => f.write_str("discrete-inf"),
            Metric::Order => f.write_str("order"),
            Metric::Sum(a, b) => write!(f, "sum({a},{b})"),
            Metric::Branch(ms) => {
                let parts: Vec<String> = ms.iter().map(|m| m.to_string()).collect();
                write!(f, "branch({})", parts.join(","))
            }
            Metric::Table(_) => f.write_str("table"),
        }
    }
}

/// A metric bound to the space it measures.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtMetric {
    pub space: ConvexSpaceSpec,
    pub metric: Metric,
}

impl ExtMetric {
    /// Checks that the metric shape fits the carrier.
    pub fn new(space: &ConvexSpaceSpec, metric: Metric) -> Result<Self> {
        fits(space, &metric)?;
        Ok(ExtMetric {
            space: space.clone(),
            metric,
        })
    }

    pub fn default_for(space: &ConvexSpaceSpec) -> Self {
        ExtMetric {
            space: space.clone(),
            metric: Metric::default_for(space),
        }
    }

    pub fn distance(&self, x: &Point, y: &Point) -> Result<ExtValue> {
        self.space.check(x)?;
        self.space.check(y)?;
        Ok(distance(&self.space, &self.metric, x, y))
    }
}

fn fits(space: &ConvexSpaceSpec, metric: &Metric) -> Result<()> {
    let bad = || {
        Error::Invalid(format!(
            "metric {metric} does not apply to space {}",
            space.id
        ))
    };
    match (&space.carrier, metric) {
        (_, Metric::Discrete | Metric::DiscreteInf) => Ok(()),
        (Carrier::Box { .. } | Carrier::Simplex { .. }, Metric::L1 | Metric::LInf) => Ok(()),
        (Carrier::ExtendedReal | Carrier::ExtendedNonneg, Metric::Abs) => Ok(()),
        (Carrier::Chain { .. } | Carrier::Labels { .. }, Metric::Order) => Ok(()),
        (Carrier::Product(a, b), Metric::Sum(ma, mb)) => fits(a, ma).and_then(|_| fits(b, mb)),
        (Carrier::Semidirect { components, .. }, Metric::Branch(ms))
            if ms.len() == components.len() =>
        {
            components.iter().zip(ms).try_for_each(|(c, m)| fits(c, m))
        }
        (_, Metric::Table(rows)) => {
            let n = space.finite_size().ok_or_else(bad)?;
            if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                return Err(bad());
            }
            for i in 0..n {
                if !rows[i][i].is_zero_ext() {
                    return Err(Error::Invalid(format!(
                        "metric table has nonzero diagonal at {i}"
                    )));
                }
                for j in 0..n {
                    if rows[i][j] != rows[j][i] || rows[i][j] < ExtValue::zero() {
                        return Err(Error::Invalid(format!(
                            "metric table is not symmetric and nonnegative at ({i},{j})"
                        )));
                    }
                }
            }
            Ok(())
        }
        _ => Err(bad()),
    }
}

trait ZeroExt {
    fn is_zero_ext(&self) -> bool;
}

impl ZeroExt for ExtValue {
    fn is_zero_ext(&self) -> bool {
        self.as_finite().is_some_and(|r| r.is_zero())
    }
}

fn vector_diffs<'a>(x: &'a Point, y: &'a Point) -> impl Iterator<Item = Rational> + 'a {
    let (a, b) = (x.as_vector().unwrap_or(&[]), y.as_vector().unwrap_or(&[]));
    a.iter().zip(b).map(|(a, b)| (a - b).abs())
}

fn label(x: &Point) -> usize {
    match x {
        Point::Label(i) => *i,
        other => panic!("expected a label, got {other:?}"),
    }
}

/// Distance on points already known to lie in `space`.
fn distance(space: &ConvexSpaceSpec, metric: &Metric, x: &Point, y: &Point) -> ExtValue {
    match metric {
        Metric::Discrete | Metric::DiscreteInf if x == y => ExtValue::zero(),
        Metric::Discrete => ExtValue::Finite(crate::rational::int(1)),
        Metric::DiscreteInf => ExtValue::Infinity,
        Metric::L1 => ExtValue::Finite(vector_diffs(x, y).sum()),
        Metric::LInf => ExtValue::Finite(vector_diffs(x, y).max().unwrap_or_else(Rational::zero)),
        Metric::Abs => x
            .as_ext()
            .expect("extended point")
            .abs_diff(y.as_ext().expect("extended point")),
        Metric::Order => ExtValue::Finite(Rational::from_integer(
            (label(x) as i64 - label(y) as i64).abs().into(),
        )),
        Metric::Sum(ma, mb) => match (&space.carrier, x, y) {
            (Carrier::Product(a, b), Point::Pair(xa, xb), Point::Pair(ya, yb)) => {
                &distance(a, ma, xa, ya) + &distance(b, mb, xb, yb)
            }
            _ => unreachable!("sum metric on a non-product point"),
        },
        Metric::Branch(ms) => match (&space.carrier, x, y) {
            (
                Carrier::Semidirect { components, .. },
                Point::Branch(i, xi),
                Point::Branch(j, yj),
            ) => {
                if i == j {
                    distance(&components[*i], &ms[*i], xi, yj)
                } else {
                    ExtValue::Infinity
                }
            }
            _ => unreachable!("branch metric on a non-semidirect point"),
        },
        Metric::Table(rows) => {
            let points = space
                .enumerate()
                .expect("table metrics need a finite carrier");
            let i = points
                .iter()
                .position(|p| p == x)
                .expect("point in carrier");
            let j = points
                .iter()
                .position(|p| p == y)
                .expect("point in carrier");
            rows[i][j].clone()
        }
    }
}

/// Outcome of one compatibility search.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CompatReport {
    pub holds: bool,
    pub exhaustive: bool,
    pub checked: usize,
    /// `p`, the points, `lhs` and `rhs` of the first violation.
    pub witness: Option<Witness>,
}

impl CompatReport {
    pub fn to_check(&self) -> CheckResult {
        match &self.witness {
            Some(w) => CheckResult::fail(w.clone()),
            None => CheckResult::pass(self.exhaustive),
        }
    }
}

/// Probe points for sampled searches: corners first, then random draws.
fn probes(space: &ConvexSpaceSpec, rng: &mut impl Rng, n: usize) -> Vec<Point> {
    let mut out = crate::convex::structured_points(space);
    out.extend((0..n).map(|_| space.sample(rng)));
    out
}

/// `d(p·x + (1-p)·z, p·y + (1-p)·z) ≤ p·d(x, y)`.
pub fn compat_check_2pt(metric: &ExtMetric, cfg: &CheckConfig) -> CompatReport {
    let space = &metric.space;
    let d = |a: &Point, b: &Point| distance(space, &metric.metric, a, b);
    let test = |p: &Rational, x: &Point, y: &Point, z: &Point| -> Option<Witness> {
        let lhs = d(
            &space.combine2(p, x, z).ok()?,
            &space.combine2(p, y, z).ok()?,
        );
        let rhs = d(x, y).scale(p);
        (lhs > rhs).then(|| {
            witness([
                ("p", fmt_rational(p)),
                ("x", space.fmt_point(x)),
                ("y", space.fmt_point(y)),
                ("z", space.fmt_point(z)),
                ("lhs", lhs.to_string()),
                ("rhs", rhs.to_string()),
            ])
        })
    };
    let mut checked = 0;
    if let Some(points) = space.enumerate().filter(|e| cfg.fits(e.len(), 3)) {
        for p in &cfg.grid {
            for x in &points {
                for y in &points {
                    for z in &points {
                        checked += 1;
                        if let Some(w) = test(p, x, y, z) {
                            return CompatReport {
                                holds: false,
                                exhaustive: true,
                                checked,
                                witness: Some(w),
                            };
                        }
                    }
                }
            }
        }
        return CompatReport {
            holds: true,
            exhaustive: true,
            checked,
            witness: None,
        };
    }
    let mut rng = cfg.rng(&format!("compat2:{}", space.id));
    let pool = probes(space, &mut rng, cfg.budget);
    for _ in 0..cfg.budget {
        let x = pool.choose(&mut rng).expect("nonempty");
        let y = pool.choose(&mut rng).expect("nonempty");
        let z = pool.choose(&mut rng).expect("nonempty");
        let p = cfg.grid.choose(&mut rng).expect("nonempty");
        checked += 1;
        if let Some(w) = test(p, x, y, z) {
            return CompatReport {
                holds: false,
                exhaustive: false,
                checked,
                witness: Some(w),
            };
        }
    }
    CompatReport {
        holds: true,
        exhaustive: false,
        checked,
        witness: None,
    }
}

/// `d(p·x + (1-p)·x', p·y + (1-p)·y') ≤ p·d(x, y) + (1-p)·d(x', y')`.
pub fn compat_check_4pt(metric: &ExtMetric, cfg: &CheckConfig) -> CompatReport {
    let space = &metric.space;
    let d = |a: &Point, b: &Point| distance(space, &metric.metric, a, b);
    let test = |p: &Rational, x: &Point, x2: &Point, y: &Point, y2: &Point| -> Option<Witness> {
        let q = Rational::from_integer(1.into()) - p;
        let lhs = d(
            &space.combine2(p, x, x2).ok()?,
            &space.combine2(p, y, y2).ok()?,
        );
        let rhs = &d(x, y).scale(p) + &d(x2, y2).scale(&q);
        (lhs > rhs).then(|| {
            witness([
                ("p", fmt_rational(p)),
                ("x", space.fmt_point(x)),
                ("x'", space.fmt_point(x2)),
                ("y", space.fmt_point(y)),
                ("y'", space.fmt_point(y2)),
                ("lhs", lhs.to_string()),
                ("rhs", rhs.to_string()),
            ])
        })
    };
    let mut checked = 0;
    if let Some(points) = space.enumerate().filter(|e| cfg.fits(e.len(), 4)) {
        for p in &cfg.grid {
            for x in &points {
                for y in &points {
                    for x2 in &points {
                        for y2 in &points {
                            checked += 1;
                            if let Some(w) = test(p, x, x2, y, y2) {
                                return CompatReport {
                                    holds: false,
                                    exhaustive: true,
                                    checked,
                                    witness: Some(w),
                                };
                            }
                        }
                    }
                }
            }
        }
        return CompatReport {
            holds: true,
            exhaustive: true,
            checked,
            witness: None,
        };
    }
    let mut rng = cfg.rng(&format!("compat4:{}", space.id));
    let pool = probes(space, &mut rng, cfg.budget);
    for _ in 0..cfg.budget {
        let pick = |rng: &mut _| pool.choose(rng).expect("nonempty").clone();
        let (x, x2, y, y2) = (
            pick(&mut rng),
            pick(&mut rng),
            pick(&mut rng),
            pick(&mut rng),
        );
        let p = cfg.grid.choose(&mut rng).expect("nonempty");
        checked += 1;
        if let Some(w) = test(p, &x, &x2, &y, &y2) {
            return CompatReport {
                holds: false,
                exhaustive: false,
                checked,
                witness: Some(w),
            };
        }
    }
    CompatReport {
        holds: true,
        exhaustive: false,
        checked,
        witness: None,
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EquivReport {
    pub two_point: CompatReport,
    pub four_point: CompatReport,
}

impl EquivReport {
    /// The two verdicts agree.
    pub fn agree(&self) -> bool {
        self.two_point.holds == self.four_point.holds
    }
}

pub fn equiv_check(metric: &ExtMetric, cfg: &CheckConfig) -> EquivReport {
    EquivReport {
        two_point: compat_check_2pt(metric, cfg),
        four_point: compat_check_4pt(metric, cfg),
    }
}

/// Zero diagonal, symmetry and the triangle inequality on enumerated or sampled triples.
pub fn metric_axioms(metric: &ExtMetric, cfg: &CheckConfig) -> CheckResult {
    let space = &metric.space;
    let d = |a: &Point, b: &Point| distance(space, &metric.metric, a, b);
    let test = |x: &Point, y: &Point, z: &Point| -> Option<Witness> {
        let show = |name: &str| {
            witness([
                ("axiom", name.to_string()),
                ("x", space.fmt_point(x)),
                ("y", space.fmt_point(y)),
                ("z", space.fmt_point(z)),
            ])
        };
        if !d(x, x).is_zero_ext() {
            return Some(show("identity"));
        }
        if d(x, y) != d(y, x) {
            return Some(show("symmetry"));
        }
        (d(x, z) > &d(x, y) + &d(y, z)).then(|| show("triangle"))
    };
    let (points, exhaustive) = match space.enumerate().filter(|e| e.len() <= 64) {
        Some(all) => (all, true),
        None => {
            let mut rng = cfg.rng(&format!("axioms:{}", space.id));
            (probes(space, &mut rng, 40), false)
        }
    };
    for x in &points {
        for y in &points {
            for z in &points {
                if let Some(w) = test(x, y, z) {
                    return CheckResult::fail(w);
                }
            }
        }
    }
    CheckResult::pass(exhaustive)
}

/// Samples pairs `P, Q` and checks `d(h(P), h(Q)) ≤ d_W(P, Q)`.
pub fn lipschitz_check(
    h: &dyn Fn(&FinMeasure) -> Result<Point>,
    metric: &ExtMetric,
    pairs: usize,
    cfg: &CheckConfig,
) -> CheckResult {
    let space = &metric.space;
    let mut rng = cfg.rng(&format!("lipschitz:{}", space.id));
    for _ in 0..pairs {
        let p = random_measure(space, &mut rng, 4);
        let q = random_measure(space, &mut rng, 4);
        let verdict = (|| -> Result<Option<Witness>> {
            let lhs = metric.distance(&h(&p)?, &h(&q)?)?;
            let rhs = wasserstein(&p, &q, metric)?.cost;
            Ok((lhs > rhs).then(|| {
                witness([
                    ("P", p.to_text(space)),
                    ("Q", q.to_text(space)),
                    ("lhs", lhs.to_string()),
                    ("rhs", rhs.to_string()),
                ])
            }))
        })();
        match verdict {
            Ok(None) => {}
            Ok(Some(w)) => return CheckResult::fail(w),
            Err(e) => {
                return CheckResult::fail(witness([
                    ("P", p.to_text(space)),
                    ("Q", q.to_text(space)),
                    ("error", e.to_string()),
                ]))
            }
        }
    }
    CheckResult::pass(false)
}

/// Shortest-path closure of a symmetric table: the largest metric below it.
pub fn metric_closure(mut rows: Vec<Vec<ExtValue>>) -> Vec<Vec<ExtValue>> {
    let n = rows.len();
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = &rows[i][k] + &rows[k][j];
                if via < rows[i][j] {
                    rows[i][j] = via;
                }
            }
        }
    }
    rows
}

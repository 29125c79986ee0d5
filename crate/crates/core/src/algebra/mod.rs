//! Algebra maps `GX → X`: construction per space, the unit and
//! multiplication laws, the coseparator property and the support condition.

mod functionals;

use std::fmt;
use std::sync::Arc;

use num_traits::Zero;
use rand::Rng;
use serde::Serialize;

use crate::check::{witness, CheckConfig, CheckResult, Verdict, Witness};
use crate::convex::builtin::space_c;
use crate::convex::{
    char_map, coseparates, discrete_poset, enumerate_ideals, glue_point, AffineMap, Carrier,
    ChainRule, ConvexSpaceSpec, CoseparationReport, Point, WeightVector,
};
use crate::error::{Error, Result};
use crate::measures::{expectation_functional, mu, FinMeasure, MetaMeasure};
use crate::metric::{compat_check_2pt, lipschitz_check, ExtMetric, Metric};
use crate::rational::{fmt_fraction, ExtValue, Rational};
use crate::sampling::{random_measure, random_meta, random_weights};

pub use functionals::coseparating_maps;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    GeometricBarycenter,
    DiscreteMin,
    DiscreteMax,
    MixedConditional,
    Product,
    UserSupplied,
}

type UserRule = dyn Fn(&FinMeasure) -> Result<Point> + Send + Sync;

#[derive(Clone)]
enum Rule {
    Barycenter,
    Chain(ChainRule),
    /// Folds a total label table over the support.
    LabelFold,
    Product(Box<AlgebraMap>, Box<AlgebraMap>),
    /// Survivor branch from the base, other branches through their glue points.
    Semidirect(Vec<AlgebraMap>),
    User(Arc<UserRule>),
}

/// An evaluable map from measures on a space to points of it.
#[derive(Clone)]
pub struct AlgebraMap {
    pub space: ConvexSpaceSpec,
    pub provenance: Provenance,
    rule: Rule,
}

impl fmt::Debug for AlgebraMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "AlgebraMap({}, {:?})", self.space.id, self.provenance)
    }
}

impl AlgebraMap {
    pub fn user(
        space: &ConvexSpaceSpec,
        rule: impl Fn(&FinMeasure) -> Result<Point> + Send + Sync + 'static,
    ) -> Self {
        AlgebraMap {
            space: space.clone(),
            provenance: Provenance::UserSupplied,
            rule: Rule::User(Arc::new(rule)),
        }
    }

    pub fn apply(&self, p: &FinMeasure) -> Result<Point> {
        if p.space_id != self.space.id {
            return Err(Error::SpaceMismatch {
                expected: self.space.id.clone(),
                found: p.space_id.clone(),
            });
        }
        match &self.rule {
            Rule::Barycenter => barycenter(&self.space, p),
            Rule::Chain(rule) => {
                let support = p.support();
                Ok(match rule {
                    ChainRule::Min => support.first(),
                    ChainRule::Max => support.last(),
                }
                .expect("nonempty support")
                .clone())
            }
            Rule::LabelFold => {
                let half = Rational::new(1.into(), 2.into());
                let mut points = p.support().into_iter();
                let first = points.next().expect("nonempty support");
                points.try_fold(first, |acc, x| self.space.combine2(&half, &acc, &x))
            }
            Rule::Product(ha, hb) => {
                let (a, b) = self
                    .space
                    .product_parts()
                    .expect("product rule on a product space");
                let project = |first: bool, target: &ConvexSpaceSpec| FinMeasure {
                    space_id: target.id.clone(),
                    dist: p.dist.map(|x| match x {
                        Point::Pair(l, r) => {
                            if first {
                                (**l).clone()
                            } else {
                                (**r).clone()
                            }
                        }
                        other => other.clone(),
                    }),
                };
                Ok(Point::pair(
                    ha.apply(&project(true, a))?,
                    hb.apply(&project(false, b))?,
                ))
            }
            Rule::Semidirect(components) => {
                let Carrier::Semidirect { base, glues, .. } = &self.space.carrier else {
                    unreachable!("semidirect rule on a semidirect space")
                };
                let half = Rational::new(1.into(), 2.into());
                let mut branches = p.support().into_iter().map(|x| match x {
                    Point::Branch(b, _) => b,
                    other => unreachable!("{other:?} in a semidirect measure"),
                });
                let first = branches.next().expect("nonempty support");
                let survivor = branches.try_fold(first, |acc, b| {
                    match base.combine2(&half, &Point::Label(acc), &Point::Label(b))? {
                        Point::Label(s) => Ok::<usize, Error>(s),
                        other => unreachable!("discrete base produced {other:?}"),
                    }
                })?;
                let target = &components[survivor];
                let dist = p.dist.try_map(|x| match x {
                    Point::Branch(b, inner) if *b == survivor => Ok((**inner).clone()),
                    Point::Branch(b, _) => {
                        glue_point(glues, *b, survivor).cloned().ok_or_else(|| {
                            Error::Invalid(format!(
                                "no gluing map from branch {b} to branch {survivor}"
                            ))
                        })
                    }
                    other => unreachable!("{other:?} in a semidirect measure"),
                })?;
                let inner = target.apply(&FinMeasure {
                    space_id: target.space.id.clone(),
                    dist,
                })?;
                Ok(Point::branch(survivor, inner))
            }
            Rule::User(f) => f(p),
        }
    }

    /// Pushes each inner measure of `q` through the map.
    pub fn push_meta(&self, q: &MetaMeasure) -> Result<FinMeasure> {
        Ok(FinMeasure {
            space_id: self.space.id.clone(),
            dist: q.dist.try_map(|p| self.apply(p))?,
        })
    }
}

fn barycenter(space: &ConvexSpaceSpec, p: &FinMeasure) -> Result<Point> {
    let mut atoms = p.atoms();
    let (x0, _) = atoms.next().expect("nonempty support");
    match x0 {
        Point::Vector(v) => {
            let mut acc = vec![Rational::zero(); v.len()];
            for (x, w) in p.atoms() {
                let coords = x.as_vector().ok_or_else(|| Error::NotInSpace {
                    space: space.id.clone(),
                    element: format!("{x:?}"),
                })?;
                for (a, c) in acc.iter_mut().zip(coords) {
                    *a += w * c;
                }
            }
            Ok(Point::Vector(acc))
        }
        Point::Ext(_) => Ok(Point::Ext(
            p.atoms()
                .map(|(x, w)| x.as_ext().cloned().unwrap_or(ExtValue::Infinity).scale(w))
                .sum(),
        )),
        other => Err(Error::Invalid(format!(
            "barycenter of non-geometric point {other:?}"
        ))),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Condition {
    NonTotalPoset,
    CompatViolation,
    NotDiscrete,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Failure {
    pub condition: Condition,
    /// Id of the (sub)space where the condition fails.
    pub component: String,
    pub witness: Witness,
}

/// Why no algebra exists, with every failing condition.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Rejection {
    pub space_id: String,
    pub failures: Vec<Failure>,
}

impl Rejection {
    pub fn failure(&self, condition: Condition) -> Option<&Failure> {
        self.failures.iter().find(|f| f.condition == condition)
    }
}

impl fmt::Display for Rejection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "no algebra on {}:", self.space_id)?;
        for failure in &self.failures {
            let w: Vec<String> = failure
                .witness
                .iter()
                .map(|(k, v)| format!("{k}={v}"))
                .collect();
            write!(
                f,
                " [{:?} in {}: {}]",
                failure.condition,
                failure.component,
                w.join(", ")
            )?;
        }
        Ok(())
    }
}

/// The expectation operator of a space, or a rejection naming every failing
/// condition: the compatibility inequality for the metric and a total order on
/// every discrete part.
pub fn build_algebra(
    metric: &ExtMetric,
    cfg: &CheckConfig,
) -> std::result::Result<AlgebraMap, Rejection> {
    let space = &metric.space;
    let mut failures = Vec::new();
    let built = structural_rule(space, &mut failures);
    let compat = compat_check_2pt(metric, cfg);
    if let Some(w) = compat.witness {
        failures.push(Failure {
            condition: Condition::CompatViolation,
            component: space.id.clone(),
            witness: w,
        });
    }
    match built {
        Some(h) if failures.is_empty() => Ok(h),
        _ => Err(Rejection {
            space_id: space.id.clone(),
            failures,
        }),
    }
}

fn structural_rule(space: &ConvexSpaceSpec, failures: &mut Vec<Failure>) -> Option<AlgebraMap> {
    let make = |provenance, rule| {
        Some(AlgebraMap {
            space: space.clone(),
            provenance,
            rule,
        })
    };
    match &space.carrier {
        Carrier::Box { .. }
        | Carrier::Simplex { .. }
        | Carrier::ExtendedReal
        | Carrier::ExtendedNonneg => make(Provenance::GeometricBarycenter, Rule::Barycenter),
        Carrier::Chain {
            rule: ChainRule::Min,
            ..
        } => make(Provenance::DiscreteMin, Rule::Chain(ChainRule::Min)),
        Carrier::Chain {
            rule: ChainRule::Max,
            ..
        } => make(Provenance::DiscreteMax, Rule::Chain(ChainRule::Max)),
        Carrier::Labels { .. } => match discrete_poset(space) {
            Ok(poset) => match poset.witness {
                None if poset.is_total_order => make(Provenance::DiscreteMax, Rule::LabelFold),
                found => {
                    let w = match found {
                        Some((x, y, z)) => witness([
                            ("x", space.fmt_point(&x)),
                            ("y", space.fmt_point(&y)),
                            ("combined", space.fmt_point(&z)),
                        ]),
                        None => witness([("reason", "incomparable pair".to_string())]),
                    };
                    failures.push(Failure {
                        condition: Condition::NonTotalPoset,
                        component: space.id.clone(),
                        witness: w,
                    });
                    None
                }
            },
            Err(e) => {
                failures.push(Failure {
                    condition: Condition::NotDiscrete,
                    component: space.id.clone(),
                    witness: witness([("error", e.to_string())]),
                });
                None
            }
        },
        Carrier::Product(a, b) => {
            let ha = structural_rule(a, failures);
            let hb = structural_rule(b, failures);
            make(
                Provenance::Product,
                Rule::Product(Box::new(ha?), Box::new(hb?)),
            )
        }
        Carrier::Semidirect { components, .. } => {
            let hs: Vec<Option<AlgebraMap>> = components
                .iter()
                .map(|c| structural_rule(c, failures))
                .collect();
            let hs: Option<Vec<AlgebraMap>> = hs.into_iter().collect();
            make(Provenance::MixedConditional, Rule::Semidirect(hs?))
        }
    }
}

/// Deterministic probe points: the whole carrier when small, else corners and samples.
fn probe_points(space: &ConvexSpaceSpec, cfg: &CheckConfig, salt: &str) -> (Vec<Point>, bool) {
    match space.enumerate().filter(|e| e.len() <= 4096) {
        Some(all) => (all, true),
        None => {
            let mut rng = cfg.rng(salt);
            let mut pts = crate::convex::structured_points(space);
            pts.extend((0..cfg.budget).map(|_| space.sample(&mut rng)));
            (pts, false)
        }
    }
}

fn show(space: &ConvexSpaceSpec, r: &Result<Point>) -> String {
    match r {
        Ok(x) => space.fmt_point(x),
        Err(e) => format!("error: {e}"),
    }
}

/// Text of a meta-measure: `w·[measure]` terms joined by ` + `.
pub fn meta_text(q: &MetaMeasure, space: &ConvexSpaceSpec) -> String {
    q.atoms()
        .map(|(p, w)| format!("{}·[{}]", fmt_fraction(w), p.to_text(space)))
        .collect::<Vec<_>>()
        .join(" + ")
}

/// `h(δ_a) = a`.
pub fn verify_unit_law(h: &AlgebraMap, cfg: &CheckConfig) -> CheckResult {
    let space = &h.space;
    let (points, exhaustive) = probe_points(space, cfg, &format!("unit:{}", space.id));
    for a in points {
        let out = FinMeasure::dirac(space, a.clone()).and_then(|d| h.apply(&d));
        if out.as_ref().ok() != Some(&a) {
            return CheckResult::fail(witness([
                ("a", space.fmt_point(&a)),
                ("h(dirac(a))", show(space, &out)),
            ]));
        }
    }
    CheckResult::pass(exhaustive)
}

/// `h(μ(Q)) = h(Gh(Q))` on `cfg.budget` random meta-measures.
pub fn verify_mult_law(h: &AlgebraMap, cfg: &CheckConfig) -> CheckResult {
    let space = &h.space;
    let mut rng = cfg.rng(&format!("mult:{}", space.id));
    for _ in 0..cfg.budget {
        let q = random_meta(space, &mut rng, 5);
        let lhs = h.apply(&mu(&q));
        let rhs = h.push_meta(&q).and_then(|p| h.apply(&p));
        if lhs.is_err() || lhs != rhs {
            return CheckResult::fail(witness([
                ("Q", meta_text(&q, space)),
                ("h(mu(Q))", show(space, &lhs)),
                ("h(Gh(Q))", show(space, &rhs)),
            ]));
        }
    }
    CheckResult::pass(false)
}

/// `m(h(P)) = E_P(m)` for every map on `cfg.budget` random measures.
pub fn verify_coseparator_property(
    h: &AlgebraMap,
    maps: &[AffineMap],
    cfg: &CheckConfig,
) -> CheckResult {
    let space = &h.space;
    let mut rng = cfg.rng(&format!("cosep-law:{}", space.id));
    for _ in 0..cfg.budget {
        let p = random_measure(space, &mut rng, 5);
        for m in maps {
            let lhs = h.apply(&p).and_then(|x| m.eval_ext(&x));
            let rhs = expectation_functional(&p, m);
            if lhs.is_err() || lhs != rhs {
                let fmt = |r: &Result<ExtValue>| match r {
                    Ok(v) => v.to_string(),
                    Err(e) => format!("error: {e}"),
                };
                return CheckResult::fail(witness([
                    ("P", p.to_text(space)),
                    ("m", m.name.clone()),
                    ("m(h(P))", fmt(&lhs)),
                    ("E_P(m)", fmt(&rhs)),
                ]));
            }
        }
    }
    CheckResult::pass(false)
}

/// The discrete coordinate of a point: itself on chains and labels, the branch
/// label on semidirect products, componentwise on products.
fn discrete_part(space: &ConvexSpaceSpec, x: &Point) -> Option<Point> {
    match (&space.carrier, x) {
        (Carrier::Chain { .. } | Carrier::Labels { .. }, _) => Some(x.clone()),
        (Carrier::Semidirect { .. }, Point::Branch(b, _)) => Some(Point::Label(*b)),
        (Carrier::Product(a, b), Point::Pair(xa, xb)) => {
            match (discrete_part(a, xa), discrete_part(b, xb)) {
                (Some(l), Some(r)) => Some(Point::pair(l, r)),
                (one, None) | (None, one) => one,
            }
        }
        _ => None,
    }
}

/// The discrete coordinate of `h(P)` lies in that of `Supp(P)`. Uniform
/// measures on small subsets come first, then random measures.
pub fn support_condition_check(h: &AlgebraMap, cfg: &CheckConfig) -> CheckResult {
    let space = &h.space;
    if !space.has_discrete_part() {
        return CheckResult::not_applicable();
    }
    let mut candidates: Vec<FinMeasure> = Vec::new();
    if let Some(points) = space.enumerate().filter(|e| e.len() <= 16) {
        for size in 1..=3.min(points.len()) {
            for subset in subsets(points.len(), size) {
                let w = Rational::new(1.into(), (size as i64).into());
                candidates.push(
                    FinMeasure::new(
                        space,
                        subset.iter().map(|&i| (points[i].clone(), w.clone())),
                    )
                    .expect("uniform"),
                );
            }
        }
    }
    let mut rng = cfg.rng(&format!("support:{}", space.id));
    candidates.extend((0..cfg.budget).map(|_| random_measure(space, &mut rng, 5)));
    for p in candidates {
        let out = h.apply(&p);
        let ok = out.as_ref().is_ok_and(|x| {
            let label = discrete_part(space, x);
            p.support().iter().any(|s| discrete_part(space, s) == label)
        });
        if !ok {
            return CheckResult::fail(witness([
                ("P", p.to_text(space)),
                ("h(P)", show(space, &out)),
            ]));
        }
    }
    CheckResult::pass(false)
}

/// Index subsets of `0..n` of the given size, lexicographic.
fn subsets(n: usize, size: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if left == 0 {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, left - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, size, &mut Vec::new(), &mut out);
    out
}

/// `h(Σ w_i δ_{x_i})` equals the space's own `combine(w, xs)` on random families.
pub fn induced_structure_check(h: &AlgebraMap, cfg: &CheckConfig) -> CheckResult {
    let space = &h.space;
    let mut rng = cfg.rng(&format!("induced:{}", space.id));
    for _ in 0..cfg.budget {
        let k = rng.gen_range(1..=4);
        let xs: Vec<Point> = (0..k).map(|_| space.sample(&mut rng)).collect();
        let w: WeightVector = random_weights(&mut rng, k);
        let native = space.combine(&w, &xs);
        let induced = FinMeasure::new(space, xs.iter().cloned().zip(w.as_slice().iter().cloned()))
            .and_then(|p| h.apply(&p));
        if native.is_err() || native != induced {
            let family: Vec<String> = xs
                .iter()
                .zip(w.as_slice())
                .map(|(x, w)| format!("{}:{}", space.fmt_point(x), fmt_fraction(w)))
                .collect();
            return CheckResult::fail(witness([
                ("family", family.join(", ")),
                ("native", show(space, &native)),
                ("induced", show(space, &induced)),
            ]));
        }
    }
    CheckResult::pass(false)
}

/// Full report for a built algebra.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AlgebraReport {
    pub space_id: String,
    pub provenance: Provenance,
    pub unit_law: CheckResult,
    pub mult_law: CheckResult,
    pub coseparator_law: CheckResult,
    pub support_condition: CheckResult,
    pub compat: CheckResult,
    pub induced_structure: CheckResult,
    /// `d(h(P), h(Q)) ≤ d_W(P, Q)`, geometric spaces only.
    pub lipschitz: CheckResult,
}

impl AlgebraReport {
    pub fn passed(&self) -> bool {
        [
            &self.unit_law,
            &self.mult_law,
            &self.coseparator_law,
            &self.support_condition,
            &self.compat,
            &self.induced_structure,
            &self.lipschitz,
        ]
        .iter()
        .all(|c| c.passed())
    }
}

pub fn algebra_report(h: &AlgebraMap, metric: &ExtMetric, cfg: &CheckConfig) -> AlgebraReport {
    let maps = coseparating_maps(&h.space);
    let lipschitz = if h.provenance == Provenance::GeometricBarycenter {
        lipschitz_check(&|p| h.apply(p), metric, cfg.budget, cfg)
    } else {
        CheckResult::not_applicable()
    };
    AlgebraReport {
        space_id: h.space.id.clone(),
        provenance: h.provenance,
        unit_law: verify_unit_law(h, cfg),
        mult_law: verify_mult_law(h, cfg),
        coseparator_law: verify_coseparator_property(h, &maps, cfg),
        support_condition: support_condition_check(h, cfg),
        compat: compat_check_2pt(metric, cfg).to_check(),
        induced_structure: induced_structure_check(h, cfg),
        lipschitz,
    }
}

/// Everything that goes wrong on the three-point space `C`, recomputed by the general checks.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CounterexampleReport {
    pub ideals: Vec<String>,
    pub coseparating: bool,
    pub unseparated_pair: Option<(String, String)>,
    pub compat_witness: Option<Witness>,
    pub support_witness: Option<Witness>,
    pub poset_witness: Option<Witness>,
    pub rejection: Option<Rejection>,
}

pub fn counterexample_c(cfg: &CheckConfig) -> Result<CounterexampleReport> {
    let c = space_c();
    let ideals = enumerate_ideals(&c)?;
    let maps: Vec<AffineMap> = ideals.iter().map(char_map).collect::<Result<_>>()?;
    let CoseparationReport {
        separated, pair, ..
    } = coseparates(&maps, &c, cfg);
    let metric = ExtMetric::new(&c, Metric::Discrete)?;
    let compat = compat_check_2pt(&metric, cfg);
    // the combination rule of C read as a map on measures
    let space = c.clone();
    let candidate = AlgebraMap::user(&c, move |p| {
        let (xs, ws): (Vec<Point>, Vec<Rational>) =
            p.atoms().map(|(x, w)| (x.clone(), w.clone())).unzip();
        space.combine(&WeightVector::new(ws)?, &xs)
    });
    let support = support_condition_check(&candidate, cfg);
    let poset = discrete_poset(&c)?;
    let rejection = build_algebra(&metric, cfg).err();
    Ok(CounterexampleReport {
        ideals: ideals.iter().map(|i| i.describe()).collect(),
        coseparating: separated,
        unseparated_pair: pair.map(|(a, b)| (c.fmt_point(&a), c.fmt_point(&b))),
        compat_witness: compat.witness,
        support_witness: (support.verdict == Verdict::Fail)
            .then_some(support.witness)
            .flatten(),
        poset_witness: poset.witness.map(|(x, y, z)| {
            witness([
                ("x", c.fmt_point(&x)),
                ("y", c.fmt_point(&y)),
                ("combined", c.fmt_point(&z)),
            ])
        }),
        rejection,
    })
}

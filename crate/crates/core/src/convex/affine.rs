use std::fmt;
use std::sync::Arc;

use super::{ConvexSpaceSpec, Point};
use crate::check::{witness, CheckConfig, Witness};
use crate::error::{Error, Result};
use crate::rational::{fmt_rational, ExtValue};

type Rule = dyn Fn(&Point) -> Option<Point> + Send + Sync;

/// An evaluable map between two spaces. Affinity is a contract checked by [`is_affine`].
#[derive(Clone)]
pub struct AffineMap {
    pub name: String,
    pub domain: ConvexSpaceSpec,
    pub codomain: ConvexSpaceSpec,
    rule: Arc<Rule>,
}

impl fmt::Debug for AffineMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "AffineMap({}: {} -> {})",
            self.name, self.domain.id, self.codomain.id
        )
    }
}

impl AffineMap {
    /// `rule` returns `None` where the map is undefined.
    pub fn new(
        name: impl Into<String>,
        domain: ConvexSpaceSpec,
        codomain: ConvexSpaceSpec,
        rule: impl Fn(&Point) -> Option<Point> + Send + Sync + 'static,
    ) -> Self {
        AffineMap {
            name: name.into(),
            domain,
            codomain,
            rule: Arc::new(rule),
        }
    }

    pub fn identity(space: &ConvexSpaceSpec) -> Self {
        AffineMap::new("id", space.clone(), space.clone(), |x| Some(x.clone()))
    }

    pub fn apply(&self, x: &Point) -> Result<Point> {
        let undefined = || Error::Undefined {
            map: self.name.clone(),
            element: self.domain.fmt_point(x),
        };
        if !self.domain.contains(x) {
            return Err(Error::NotInSpace {
                space: self.domain.id.clone(),
                element: format!("{x:?}"),
            });
        }
        let y = (self.rule)(x).ok_or_else(undefined)?;
        if !self.codomain.contains(&y) {
            return Err(undefined());
        }
        Ok(y)
    }

    /// Evaluates a map into an extended line.
    pub fn eval_ext(&self, x: &Point) -> Result<ExtValue> {
        match self.apply(x)? {
            Point::Ext(v) => Ok(v),
            other => Err(Error::Invalid(format!(
                "{} is not extended-real valued at {other:?}",
                self.name
            ))),
        }
    }

    pub fn compose(&self, then: &AffineMap) -> Result<AffineMap> {
        if self.codomain.id != then.domain.id {
            return Err(Error::SpaceMismatch {
                expected: then.domain.id.clone(),
                found: self.codomain.id.clone(),
            });
        }
        let (f, g) = (self.rule.clone(), then.rule.clone());
        Ok(AffineMap::new(
            format!("{}∘{}", then.name, self.name),
            self.domain.clone(),
            then.codomain.clone(),
            move |x| f(x).and_then(|y| g(&y)),
        ))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffinityReport {
    pub affine: bool,
    /// Every pair of a finite domain was tested on the full p-grid.
    pub exhaustive: bool,
    pub checked: usize,
    /// `p, x, y, lhs = m(p·x+(1-p)·y), rhs = p·m(x)+(1-p)·m(y)`.
    pub witness: Option<Witness>,
}

/// Searches for `p, x, y` with `m(p·x + (1-p)·y) ≠ p·m(x) + (1-p)·m(y)`.
pub fn is_affine(m: &AffineMap, cfg: &CheckConfig) -> AffinityReport {
    let dom = &m.domain;
    let cod = &m.codomain;
    let check = |p: &_, x: &Point, y: &Point| -> Option<Witness> {
        let lhs = dom.combine2(p, x, y).and_then(|z| m.apply(&z));
        let rhs = m
            .apply(x)
            .and_then(|mx| m.apply(y).and_then(|my| cod.combine2(p, &mx, &my)));
        let show = |r: &Result<Point>| match r {
            Ok(v) => cod.fmt_point(v),
            Err(e) => format!("undefined ({e})"),
        };
        match (&lhs, &rhs) {
            (Ok(a), Ok(b)) if a == b => None,
            _ => Some(witness([
                ("p", fmt_rational(p)),
                ("x", dom.fmt_point(x)),
                ("y", dom.fmt_point(y)),
                ("lhs", show(&lhs)),
                ("rhs", show(&rhs)),
            ])),
        }
    };
    let mut checked = 0;
    if let Some(points) = dom.enumerate().filter(|e| cfg.fits(e.len(), 2)) {
        for p in &cfg.grid {
            for x in &points {
                for y in &points {
                    checked += 1;
                    if let Some(w) = check(p, x, y) {
                        return AffinityReport {
                            affine: false,
                            exhaustive: true,
                            checked,
                            witness: Some(w),
                        };
                    }
                }
            }
        }
        return AffinityReport {
            affine: true,
            exhaustive: true,
            checked,
            witness: None,
        };
    }
    let mut rng = cfg.rng(&format!("affine:{}", m.name));
    use rand::seq::SliceRandom;
    // structured points first so simple witnesses surface before random ones
    let mut probes = structured_points(dom);
    probes.extend((0..cfg.budget).map(|_| dom.sample(&mut rng)));
    for (i, x) in probes.iter().enumerate() {
        let y = if i + 1 < probes.len() {
            probes[i + 1].clone()
        } else {
            dom.sample(&mut rng)
        };
        let random_p = cfg.grid.choose(&mut rng).expect("nonempty grid").clone();
        for p in [&cfg.grid[0], &random_p] {
            checked += 1;
            if let Some(w) = check(p, x, &y) {
                return AffinityReport {
                    affine: false,
                    exhaustive: false,
                    checked,
                    witness: Some(w),
                };
            }
        }
    }
    AffinityReport {
        affine: true,
        exhaustive: false,
        checked,
        witness: None,
    }
}

/// Corner points tried before random samples (endpoints of boxes, vertices of simplices).
pub(crate) fn structured_points(space: &ConvexSpaceSpec) -> Vec<Point> {
    use super::Carrier;
    use num_traits::{One, Zero};
    match &space.carrier {
        Carrier::Box { lo, hi } => vec![Point::Vector(lo.clone()), Point::Vector(hi.clone())],
        Carrier::Simplex { dim } => (0..*dim)
            .map(|k| {
                Point::Vector(
                    (0..*dim)
                        .map(|i| {
                            if i == k {
                                crate::rational::Rational::one()
                            } else {
                                crate::rational::Rational::zero()
                            }
                        })
                        .collect(),
                )
            })
            .collect(),
        Carrier::ExtendedReal | Carrier::ExtendedNonneg => vec![
            Point::Ext(ExtValue::zero()),
            Point::Ext(ExtValue::Finite(crate::rational::int(1))),
            Point::Ext(ExtValue::Infinity),
        ],
        _ => Vec::new(),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoseparationReport {
    pub separated: bool,
    pub exhaustive: bool,
    pub pair: Option<(Point, Point)>,
}

/// Checks that for every pair `a ≠ b` some map takes different values.
pub fn coseparates(
    maps: &[AffineMap],
    space: &ConvexSpaceSpec,
    cfg: &CheckConfig,
) -> CoseparationReport {
    let separated = |a: &Point, b: &Point| {
        maps.iter().any(|m| match (m.apply(a), m.apply(b)) {
            (Ok(x), Ok(y)) => x != y,
            _ => false,
        })
    };
    if let Some(points) = space.enumerate().filter(|e| cfg.fits(e.len(), 2)) {
        for (i, a) in points.iter().enumerate() {
            for b in &points[i + 1..] {
                if !separated(a, b) {
                    return CoseparationReport {
                        separated: false,
                        exhaustive: true,
                        pair: Some((a.clone(), b.clone())),
                    };
                }
            }
        }
        return CoseparationReport {
            separated: true,
            exhaustive: true,
            pair: None,
        };
    }
    let mut rng = cfg.rng(&format!("cosep:{}", space.id));
    let mut probes = structured_points(space);
    probes.extend((0..cfg.budget).map(|_| space.sample(&mut rng)));
    for (i, a) in probes.iter().enumerate() {
        for b in probes.iter().skip(i + 1).take(2) {
            if a != b && !separated(a, b) {
                return CoseparationReport {
                    separated: false,
                    exhaustive: false,
                    pair: Some((a.clone(), b.clone())),
                };
            }
        }
    }
    CoseparationReport {
        separated: true,
        exhaustive: false,
        pair: None,
    }
}

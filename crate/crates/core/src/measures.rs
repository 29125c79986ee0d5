//! Finitely supported probability measures and the monad structure on them.
//!
//! [`Dist`] is the generic finite distribution; [`FinMeasure`] ties one to a
//! convex space and [`MetaMeasure`] is a distribution over measures of a
//! single space. Atoms are kept in a `BTreeMap`, so equal measures have equal
//! representations and equality is structural.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::convex::{split_top_level, AffineMap, ConvexSpaceSpec, Point, WeightVector};
use crate::error::{Error, Result};
use crate::rational::{fmt_fraction, parse_rational, ExtValue, Rational};

/// Positive exact weights summing to one over distinct atoms.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Dist<T: Ord> {
    atoms: BTreeMap<T, Rational>,
}

impl<T: Ord + Clone> Dist<T> {
    /// Merges repeated atoms and drops zero weights.
    pub fn from_weighted(atoms: impl IntoIterator<Item = (T, Rational)>) -> Result<Self> {
        let mut merged: BTreeMap<T, Rational> = BTreeMap::new();
        for (x, w) in atoms {
            if w.is_negative() {
                return Err(Error::InvalidWeights(format!("negative weight {w}")));
            }
            *merged.entry(x).or_insert_with(Rational::zero) += w;
        }
        merged.retain(|_, w| !w.is_zero());
        if merged.is_empty() {
            return Err(Error::EmptySupport);
        }
        let total: Rational = merged.values().sum();
        if !total.is_one() {
            return Err(Error::InvalidWeights(format!(
                "weights sum to {total}, not 1"
            )));
        }
        Ok(Dist { atoms: merged })
    }

    pub fn dirac(x: T) -> Self {
        Dist {
            atoms: BTreeMap::from([(x, Rational::one())]),
        }
    }

    pub fn atoms(&self) -> impl Iterator<Item = (&T, &Rational)> {
        self.atoms.iter()
    }

    pub fn weight(&self, x: &T) -> Rational {
        self.atoms.get(x).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn support(&self) -> BTreeSet<T> {
        self.atoms.keys().cloned().collect()
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn map<U: Ord + Clone>(&self, mut f: impl FnMut(&T) -> U) -> Dist<U> {
        self.try_map(|x| Ok(f(x))).expect("infallible map")
    }

    pub fn try_map<U: Ord + Clone>(&self, mut f: impl FnMut(&T) -> Result<U>) -> Result<Dist<U>> {
        let mut out: BTreeMap<U, Rational> = BTreeMap::new();
        for (x, w) in &self.atoms {
            *out.entry(f(x)?).or_insert_with(Rational::zero) += w;
        }
        Ok(Dist { atoms: out })
    }

    /// `Σ w_i · d_i`, pointwise.
    pub fn mix(weights: &WeightVector, dists: &[Dist<T>]) -> Result<Self> {
        if weights.len() != dists.len() {
            return Err(Error::LengthMismatch(weights.len(), dists.len()));
        }
        Dist::from_weighted(
            weights
                .as_slice()
                .iter()
                .zip(dists)
                .flat_map(|(w, d)| d.atoms.iter().map(move |(x, p)| (x.clone(), w * p))),
        )
    }
}

impl<T: Ord + Clone> Dist<Dist<T>> {
    /// Weight of `x` is `Σ_j q_j · P_j({x})`.
    pub fn flatten(&self) -> Dist<T> {
        let mut out: BTreeMap<T, Rational> = BTreeMap::new();
        for (inner, q) in &self.atoms {
            for (x, p) in &inner.atoms {
                *out.entry(x.clone()).or_insert_with(Rational::zero) += q * p;
            }
        }
        Dist { atoms: out }
    }
}

/// A finitely supported probability measure on a named space.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FinMeasure {
    pub space_id: String,
    pub dist: Dist<Point>,
}

impl FinMeasure {
    pub fn new(
        space: &ConvexSpaceSpec,
        atoms: impl IntoIterator<Item = (Point, Rational)>,
    ) -> Result<Self> {
        let dist = Dist::from_weighted(atoms)?;
        for x in dist.atoms.keys() {
            space.check(x)?;
        }
        Ok(FinMeasure {
            space_id: space.id.clone(),
            dist,
        })
    }

    pub fn dirac(space: &ConvexSpaceSpec, x: Point) -> Result<Self> {
        space.check(&x)?;
        Ok(FinMeasure {
            space_id: space.id.clone(),
            dist: Dist::dirac(x),
        })
    }

    pub fn atoms(&self) -> impl Iterator<Item = (&Point, &Rational)> {
        self.dist.atoms()
    }

    pub fn support(&self) -> BTreeSet<Point> {
        self.dist.support()
    }

    pub fn weight(&self, x: &Point) -> Rational {
        self.dist.weight(x)
    }

    /// Canonical text `measure on <space>: <point>:<num>/<den>, ...` in atom order.
    pub fn to_text(&self, space: &ConvexSpaceSpec) -> String {
        let atoms: Vec<String> = self
            .atoms()
            .map(|(x, w)| format!("{}:{}", space.fmt_point(x), fmt_fraction(w)))
            .collect();
        format!("measure on {}: {}", self.space_id, atoms.join(", "))
    }

    /// Parses the canonical text; weights may also be integers or decimals.
    pub fn parse(text: &str, space: &ConvexSpaceSpec) -> Result<Self> {
        let (id, body) = split_header(text)?;
        if id != space.id {
            return Err(Error::SpaceMismatch {
                expected: space.id.clone(),
                found: id.to_string(),
            });
        }
        let mut atoms = Vec::new();
        for item in split_top_level(body, ',') {
            let item = item.trim();
            if item.is_empty() {
                continue;
            }
            let (pt, w) = item
                .rsplit_once(':')
                .ok_or_else(|| Error::Parse(format!("expected point:weight, got {item:?}")))?;
            let w = parse_rational(w)?;
            if !w.is_positive() {
                return Err(Error::InvalidWeights(format!(
                    "weight of {} must be positive",
                    pt.trim()
                )));
            }
            atoms.push((space.parse_point(pt)?, w));
        }
        FinMeasure::new(space, atoms)
    }
}

/// The space named in a measure's text header.
pub fn measure_space_id(text: &str) -> Result<&str> {
    split_header(text).map(|(id, _)| id)
}

fn split_header(text: &str) -> Result<(&str, &str)> {
    let rest = text
        .trim()
        .strip_prefix("measure on ")
        .ok_or_else(|| Error::Parse("expected `measure on <space>: ...`".into()))?;
    let (id, body) = rest
        .split_once(": ")
        .ok_or_else(|| Error::Parse("missing `: ` after the space name".into()))?;
    Ok((id.trim(), body))
}

impl fmt::Display for FinMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let atoms: Vec<String> = self
            .atoms()
            .map(|(x, w)| format!("{x:?}:{}", fmt_fraction(w)))
            .collect();
        write!(f, "measure on {}: {}", self.space_id, atoms.join(", "))
    }
}

/// A distribution over measures of one space.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MetaMeasure {
    pub space_id: String,
    pub dist: Dist<FinMeasure>,
}

impl MetaMeasure {
    pub fn new(atoms: impl IntoIterator<Item = (FinMeasure, Rational)>) -> Result<Self> {
        let dist = Dist::from_weighted(atoms)?;
        let space_id = dist.atoms.keys().next().expect("nonempty").space_id.clone();
        if let Some(other) = dist.atoms.keys().find(|p| p.space_id != space_id) {
            return Err(Error::SpaceMismatch {
                expected: space_id,
                found: other.space_id.clone(),
            });
        }
        Ok(MetaMeasure { space_id, dist })
    }

    pub fn from_dist(dist: Dist<FinMeasure>) -> Result<Self> {
        MetaMeasure::new(dist.atoms)
    }

    /// `P ↦ Σ p_x δ_{δ_x}`, the inner unit applied under `P`.
    pub fn of_diracs(p: &FinMeasure) -> Self {
        let space_id = p.space_id.clone();
        MetaMeasure {
            space_id: space_id.clone(),
            dist: p.dist.map(|x| FinMeasure {
                space_id: space_id.clone(),
                dist: Dist::dirac(x.clone()),
            }),
        }
    }

    pub fn dirac(p: FinMeasure) -> Self {
        MetaMeasure {
            space_id: p.space_id.clone(),
            dist: Dist::dirac(p),
        }
    }

    pub fn atoms(&self) -> impl Iterator<Item = (&FinMeasure, &Rational)> {
        self.dist.atoms()
    }

    pub fn len(&self) -> usize {
        self.dist.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dist.is_empty()
    }

    /// Applies `f` to every inner measure, merging collisions.
    pub fn map_inner(
        &self,
        f: impl FnMut(&FinMeasure) -> Result<FinMeasure>,
    ) -> Result<MetaMeasure> {
        let dist = self.dist.try_map(f)?;
        let space_id = dist.atoms.keys().next().expect("nonempty").space_id.clone();
        Ok(MetaMeasure { space_id, dist })
    }
}

/// Multiplication of the monad: flattens a measure over measures.
pub fn mu(q: &MetaMeasure) -> FinMeasure {
    FinMeasure {
        space_id: q.space_id.clone(),
        dist: q.dist.map(|p| p.dist.clone()).flatten(),
    }
}

/// Multiplication one level up: flattens a distribution over meta-measures.
pub fn mu_meta(t: &Dist<MetaMeasure>) -> MetaMeasure {
    let space_id = t.atoms().next().expect("nonempty").0.space_id.clone();
    MetaMeasure {
        space_id,
        dist: t.map(|q| q.dist.clone()).flatten(),
    }
}

/// Image measure `f_* P`.
pub fn pushforward(f: &AffineMap, p: &FinMeasure) -> Result<FinMeasure> {
    if p.space_id != f.domain.id {
        return Err(Error::SpaceMismatch {
            expected: f.domain.id.clone(),
            found: p.space_id.clone(),
        });
    }
    Ok(FinMeasure {
        space_id: f.codomain.id.clone(),
        dist: p.dist.try_map(|x| f.apply(x))?,
    })
}

/// `Σ w_i P_i`, pointwise.
pub fn convex_combine_measures(w: &WeightVector, ps: &[FinMeasure]) -> Result<FinMeasure> {
    let first = ps.first().ok_or(Error::EmptySupport)?;
    if let Some(other) = ps.iter().find(|p| p.space_id != first.space_id) {
        return Err(Error::SpaceMismatch {
            expected: first.space_id.clone(),
            found: other.space_id.clone(),
        });
    }
    let dists: Vec<Dist<Point>> = ps.iter().map(|p| p.dist.clone()).collect();
    Ok(FinMeasure {
        space_id: first.space_id.clone(),
        dist: Dist::mix(w, &dists)?,
    })
}

pub fn support(p: &FinMeasure) -> BTreeSet<Point> {
    p.support()
}

/// `∫ m dP = Σ p_i · m(x_i)` with `∞` absorbing and `0·∞ = 0`.
pub fn expectation_functional(p: &FinMeasure, m: &AffineMap) -> Result<ExtValue> {
    if p.space_id != m.domain.id {
        return Err(Error::SpaceMismatch {
            expected: m.domain.id.clone(),
            found: p.space_id.clone(),
        });
    }
    let mut total = ExtValue::zero();
    for (x, w) in p.atoms() {
        total = &total + &m.eval_ext(x)?.scale(w);
    }
    Ok(total)
}

/// `P(U)`.
pub fn measure_eval(p: &FinMeasure, u: &BTreeSet<Point>) -> Rational {
    p.atoms()
        .filter(|(x, _)| u.contains(x))
        .map(|(_, w)| w.clone())
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convex::builtin::{meng_space, space_c, unit_interval};
    use crate::convex::{char_map, Ideal};
    use crate::rational::{int, rat};

    fn s(r: Rational) -> Point {
        Point::scalar(r)
    }

    fn on_i(atoms: &[(Rational, Rational)]) -> FinMeasure {
        FinMeasure::new(
            &unit_interval(),
            atoms.iter().map(|(x, w)| (s(x.clone()), w.clone())),
        )
        .unwrap()
    }

    fn chi_u() -> AffineMap {
        let c = space_c();
        char_map(&Ideal {
            members: [c.label("u").unwrap()].into(),
            space: c,
        })
        .unwrap()
    }

    #[test]
    fn dirac_has_one_atom() {
        let d = FinMeasure::dirac(&unit_interval(), s(int(0))).unwrap();
        assert_eq!(d.atoms().count(), 1);
        assert_eq!(d.weight(&s(int(0))), int(1));
        let c = space_c();
        assert!(FinMeasure::dirac(&c, c.label("u").unwrap()).is_ok());
        assert!(FinMeasure::dirac(&unit_interval(), s(int(3))).is_err());
    }

    #[test]
    fn construction_merges_and_validates() {
        let p = on_i(&[
            (int(0), rat(1, 4)),
            (int(0), rat(1, 4)),
            (int(1), rat(1, 2)),
        ]);
        assert_eq!(p.weight(&s(int(0))), rat(1, 2));
        assert_eq!(p.atoms().count(), 2);
        let i = unit_interval();
        assert!(FinMeasure::new(&i, [(s(int(0)), rat(1, 2))]).is_err());
        assert!(FinMeasure::new(&i, [(s(int(0)), int(2)), (s(int(1)), int(-1))]).is_err());
        assert!(matches!(FinMeasure::new(&i, []), Err(Error::EmptySupport)));
    }

    #[test]
    fn pushforward_merges_collisions() {
        let i = unit_interval();
        let flip = AffineMap::new("flip", i.clone(), i.clone(), |x| {
            Some(Point::scalar(int(1) - &x.as_vector()?[0]))
        });
        let p = on_i(&[(int(0), rat(1, 3)), (int(1), rat(2, 3))]);
        assert_eq!(
            pushforward(&flip, &p).unwrap(),
            on_i(&[(int(1), rat(1, 3)), (int(0), rat(2, 3))])
        );
        assert_eq!(pushforward(&AffineMap::identity(&i), &p).unwrap(), p);

        let c = space_c();
        let half = FinMeasure::new(
            &c,
            [
                (c.label("0").unwrap(), rat(1, 2)),
                (c.label("1").unwrap(), rat(1, 2)),
            ],
        )
        .unwrap();
        let image = pushforward(&chi_u(), &half).unwrap();
        assert_eq!(
            image.atoms().collect::<Vec<_>>(),
            vec![(&Point::Ext(ExtValue::zero()), &int(1))]
        );
    }

    #[test]
    fn mu_flattens_pointwise() {
        let d0 = on_i(&[(int(0), int(1))]);
        assert_eq!(mu(&MetaMeasure::dirac(d0.clone())), d0);
        let q = MetaMeasure::new([
            (d0, rat(1, 2)),
            (on_i(&[(int(0), rat(1, 2)), (int(1), rat(1, 2))]), rat(1, 2)),
        ])
        .unwrap();
        assert_eq!(mu(&q), on_i(&[(int(0), rat(3, 4)), (int(1), rat(1, 4))]));
    }

    #[test]
    fn meta_measures_share_a_space() {
        let c = space_c();
        let a = FinMeasure::dirac(&c, c.label("0").unwrap()).unwrap();
        let b = on_i(&[(int(0), int(1))]);
        assert!(matches!(
            MetaMeasure::new([(a, rat(1, 2)), (b, rat(1, 2))]),
            Err(Error::SpaceMismatch { .. })
        ));
    }

    #[test]
    fn convex_combination_is_pointwise() {
        let (d0, d1) = (on_i(&[(int(0), int(1))]), on_i(&[(int(1), int(1))]));
        let out = convex_combine_measures(&WeightVector::uniform(2), &[d0.clone(), d1]).unwrap();
        assert_eq!(out, on_i(&[(int(0), rat(1, 2)), (int(1), rat(1, 2))]));
        assert_eq!(
            convex_combine_measures(&WeightVector::uniform(1), std::slice::from_ref(&d0)).unwrap(),
            d0
        );
        let c = space_c();
        let other = FinMeasure::dirac(&c, c.label("0").unwrap()).unwrap();
        assert!(convex_combine_measures(&WeightVector::uniform(2), &[d0, other]).is_err());
    }

    #[test]
    fn support_and_evaluation() {
        let p = on_i(&[(int(0), rat(1, 3)), (int(1), rat(2, 3))]);
        assert_eq!(support(&p), BTreeSet::from([s(int(0)), s(int(1))]));
        assert_eq!(measure_eval(&p, &BTreeSet::from([s(int(0))])), rat(1, 3));
        assert_eq!(measure_eval(&p, &BTreeSet::new()), int(0));
        assert_eq!(measure_eval(&p, &support(&p)), int(1));
    }

    #[test]
    fn expectation_absorbs_infinity() {
        let c = space_c();
        let m = chi_u();
        let half = FinMeasure::new(
            &c,
            [
                (c.label("0").unwrap(), rat(1, 2)),
                (c.label("1").unwrap(), rat(1, 2)),
            ],
        )
        .unwrap();
        assert_eq!(expectation_functional(&half, &m).unwrap(), ExtValue::zero());
        let charged = FinMeasure::new(
            &c,
            [
                (c.label("u").unwrap(), rat(1, 4)),
                (c.label("0").unwrap(), rat(3, 4)),
            ],
        )
        .unwrap();
        assert_eq!(
            expectation_functional(&charged, &m).unwrap(),
            ExtValue::Infinity
        );
        let dirac_u = FinMeasure::dirac(&c, c.label("u").unwrap()).unwrap();
        assert_eq!(
            expectation_functional(&dirac_u, &m).unwrap(),
            ExtValue::Infinity
        );
    }

    #[test]
    fn text_round_trip() {
        let m = meng_space(int(1), int(1));
        let p = FinMeasure::new(
            &m,
            [
                (m.parse_point("L@0.4").unwrap(), rat(1, 2)),
                (m.parse_point("H@3/5").unwrap(), rat(1, 2)),
            ],
        )
        .unwrap();
        let text = p.to_text(&m);
        assert_eq!(text, "measure on meng: L@2/5:1/2, H@3/5:1/2");
        assert_eq!(FinMeasure::parse(&text, &m).unwrap(), p);
        assert_eq!(measure_space_id(&text).unwrap(), "meng");
        assert_eq!(FinMeasure::parse(&text, &m).unwrap().to_text(&m), text);
        assert!(FinMeasure::parse("measure on I: 0:1/2", &unit_interval()).is_err());
        assert!(FinMeasure::parse("measure on I: 0:1", &m).is_err());
        assert!(FinMeasure::parse("measure on I: 0:0, 1:1", &unit_interval()).is_err());
    }

    mod laws {
        use proptest::prelude::*;

        use super::super::*;
        use crate::check::CheckConfig;
        use crate::convex::builtin::{all, space_c};
        use crate::sampling::{random_measure, random_meta, random_tower, random_weights};

        fn pick(i: usize) -> ConvexSpaceSpec {
            let spaces = all();
            spaces[i % spaces.len()].clone()
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn unit_laws(seed: u64, which: usize) {
                let space = pick(which);
                let mut rng = CheckConfig::with_seed(seed).rng("unit");
                let p = random_measure(&space, &mut rng, 5);
                prop_assert_eq!(mu(&MetaMeasure::dirac(p.clone())), p.clone());
                prop_assert_eq!(mu(&MetaMeasure::of_diracs(&p)), p);
            }

            #[test]
            fn associativity(seed: u64, which: usize) {
                let space = pick(which);
                let mut rng = CheckConfig::with_seed(seed).rng("assoc");
                let t = random_tower(&space, &mut rng, 4);
                let outer_first = mu(&mu_meta(&t));
                let inner_first = mu(&MetaMeasure::from_dist(t.map(mu)).unwrap());
                prop_assert_eq!(outer_first, inner_first);
            }

            #[test]
            fn mu_is_natural_and_pushforward_functorial(seed: u64) {
                let c = space_c();
                let mut rng = CheckConfig::with_seed(seed).rng("natural");
                let q = random_meta(&c, &mut rng, 4);
                let ideals = crate::convex::enumerate_ideals(&c).unwrap();
                let f = crate::convex::char_map(&ideals[1]).unwrap();
                let lhs = pushforward(&f, &mu(&q)).unwrap();
                let rhs = mu(&q.map_inner(|p| pushforward(&f, p)).unwrap());
                prop_assert_eq!(lhs, rhs);

                let r = crate::convex::builtin::extended_real();
                let double = AffineMap::new("double", r.clone(), r, |x| Some(Point::Ext(x.as_ext()?.scale(&crate::rational::int(2)))));
                let p = random_measure(&c, &mut rng, 5);
                let composed = f.compose(&double).unwrap();
                prop_assert_eq!(
                    pushforward(&composed, &p).unwrap(),
                    pushforward(&double, &pushforward(&f, &p).unwrap()).unwrap()
                );
            }

            #[test]
            fn expectation_is_affine_in_the_measure(seed: u64) {
                let c = space_c();
                let mut rng = CheckConfig::with_seed(seed).rng("affine-e");
                let ideals = crate::convex::enumerate_ideals(&c).unwrap();
                let ps: Vec<FinMeasure> = (0..3).map(|_| random_measure(&c, &mut rng, 3)).collect();
                let w = random_weights(&mut rng, 3);
                let mixed = convex_combine_measures(&w, &ps).unwrap();
                let meta = MetaMeasure::new(ps.iter().cloned().zip(w.as_slice().iter().cloned())).unwrap();
                prop_assert_eq!(&mixed, &mu(&meta));
                for ideal in &ideals {
                    let m = crate::convex::char_map(ideal).unwrap();
                    let lhs = expectation_functional(&mixed, &m).unwrap();
                    let mut rhs = ExtValue::zero();
                    for (p, wi) in ps.iter().zip(w.as_slice()) {
                        rhs = &rhs + &expectation_functional(p, &m).unwrap().scale(wi);
                    }
                    prop_assert_eq!(lhs, rhs);
                }
            }
        }
    }
}

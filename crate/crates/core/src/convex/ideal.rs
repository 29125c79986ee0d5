use std::collections::BTreeSet;

use super::affine::structured_points;
use super::builtin::extended_real;
use super::{default_p_grid, AffineMap, ConvexSpaceSpec, Point};
use crate::check::CheckConfig;
use crate::error::{Error, Result};
use crate::rational::ExtValue;

/// Largest carrier `enumerate_ideals` will search.
pub const IDEAL_ENUMERATION_LIMIT: usize = 16;

/// A proper nonempty subset absorbing every positive-weight combination with
/// any point of the carrier.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ideal {
    pub space: ConvexSpaceSpec,
    pub members: BTreeSet<Point>,
}

impl Ideal {
    pub fn new(space: &ConvexSpaceSpec, members: impl IntoIterator<Item = Point>) -> Result<Self> {
        let ideal = Ideal {
            space: space.clone(),
            members: members.into_iter().collect(),
        };
        ideal.validate()?;
        Ok(ideal)
    }

    /// Checks the ideal invariant: exhaustively on finite carriers, on structured and
    /// sampled partners otherwise.
    pub fn validate(&self) -> Result<()> {
        let space = &self.space;
        if self.members.is_empty() {
            return Err(Error::InvalidIdeal("empty".into()));
        }
        for a in &self.members {
            space.check(a)?;
        }
        let partners = match space.enumerate() {
            Some(all) => {
                if all.len() == self.members.len() {
                    return Err(Error::InvalidIdeal("not proper: equals the carrier".into()));
                }
                all
            }
            None => {
                let cfg = CheckConfig::default().with_budget(200);
                let mut rng = cfg.rng(&format!("ideal:{}", space.id));
                let mut ps = structured_points(space);
                ps.extend((0..cfg.budget).map(|_| space.sample(&mut rng)));
                ps
            }
        };
        for a in &self.members {
            for b in &partners {
                for p in default_p_grid() {
                    let c = space.combine2(&p, a, b)?;
                    if !self.members.contains(&c) {
                        return Err(Error::InvalidIdeal(format!(
                            "{p}·{} + (1-{p})·{} = {} leaves the set",
                            space.fmt_point(a),
                            space.fmt_point(b),
                            space.fmt_point(&c)
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn contains(&self, x: &Point) -> bool {
        self.members.contains(x)
    }

    pub fn describe(&self) -> String {
        let names: Vec<String> = self
            .members
            .iter()
            .map(|m| self.space.fmt_point(m))
            .collect();
        format!("{{{}}}", names.join(","))
    }
}

/// All proper nonempty ideals of a finite space, smallest first.
///
/// Every ideal is the union of the principal ideals of its members, so the
/// search closes the principal ideals under union.
pub fn enumerate_ideals(space: &ConvexSpaceSpec) -> Result<Vec<Ideal>> {
    let points = space
        .enumerate()
        .ok_or_else(|| Error::InfiniteCarrier(space.id.clone()))?;
    if points.len() > IDEAL_ENUMERATION_LIMIT {
        return Err(Error::CarrierTooLarge {
            space: space.id.clone(),
            size: points.len(),
            limit: IDEAL_ENUMERATION_LIMIT,
        });
    }
    let grid = default_p_grid();
    let mut principals: BTreeSet<BTreeSet<Point>> = BTreeSet::new();
    for a in &points {
        let mut closure: BTreeSet<Point> = BTreeSet::from([a.clone()]);
        let mut frontier = vec![a.clone()];
        while let Some(s) = frontier.pop() {
            for b in &points {
                for p in &grid {
                    let c = space.combine2(p, &s, b)?;
                    if closure.insert(c.clone()) {
                        frontier.push(c);
                    }
                }
            }
        }
        principals.insert(closure);
    }
    let mut found: BTreeSet<BTreeSet<Point>> = principals.clone();
    let mut frontier: Vec<BTreeSet<Point>> = principals.iter().cloned().collect();
    while let Some(s) = frontier.pop() {
        for q in &principals {
            let union: BTreeSet<Point> = s.union(q).cloned().collect();
            if found.insert(union.clone()) {
                frontier.push(union);
            }
        }
    }
    let mut ideals: Vec<Ideal> = found
        .into_iter()
        .filter(|s| s.len() < points.len())
        .map(|members| Ideal {
            space: space.clone(),
            members,
        })
        .collect();
    ideals.sort_by(|a, b| {
        a.members
            .len()
            .cmp(&b.members.len())
            .then_with(|| a.members.cmp(&b.members))
    });
    Ok(ideals)
}

/// The `{0, ∞}`-valued characteristic map of an ideal: members go to `∞`, the rest to `0`.
pub fn char_map(ideal: &Ideal) -> Result<AffineMap> {
    ideal.validate()?;
    let members = ideal.members.clone();
    Ok(AffineMap::new(
        format!("chi{}", ideal.describe()),
        ideal.space.clone(),
        extended_real(),
        move |x| {
            Some(Point::Ext(if members.contains(x) {
                ExtValue::Infinity
            } else {
                ExtValue::zero()
            }))
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::super::builtin::*;
    use super::super::{chain, ChainRule};
    use super::*;

    fn described(space: &ConvexSpaceSpec) -> Vec<String> {
        enumerate_ideals(space)
            .unwrap()
            .iter()
            .map(Ideal::describe)
            .collect()
    }

    #[test]
    fn ideals_of_c() {
        assert_eq!(described(&space_c()), vec!["{u}", "{0,u}", "{1,u}"]);
    }

    #[test]
    fn ideals_of_two() {
        assert_eq!(described(&two()), vec!["{1}"]);
    }

    #[test]
    fn ideals_of_a_max_chain_are_up_sets() {
        assert_eq!(
            described(&chain("K3", 3, ChainRule::Max)),
            vec!["{2}", "{1,2}"]
        );
    }

    #[test]
    fn char_map_values() {
        let c = space_c();
        let u = Ideal::new(&c, [c.label("u").unwrap()]).unwrap();
        let m = char_map(&u).unwrap();
        assert_eq!(
            m.eval_ext(&c.label("u").unwrap()).unwrap(),
            ExtValue::Infinity
        );
        assert_eq!(
            m.eval_ext(&c.label("0").unwrap()).unwrap(),
            ExtValue::zero()
        );
        assert_eq!(
            m.eval_ext(&c.label("1").unwrap()).unwrap(),
            ExtValue::zero()
        );

        let t = two();
        let one = Ideal::new(&t, [t.label("1").unwrap()]).unwrap();
        let m = char_map(&one).unwrap();
        assert_eq!(
            m.eval_ext(&t.label("1").unwrap()).unwrap(),
            ExtValue::Infinity
        );
        assert_eq!(
            m.eval_ext(&t.label("0").unwrap()).unwrap(),
            ExtValue::zero()
        );
    }

    #[test]
    fn invalid_candidates_are_rejected() {
        let c = space_c();
        assert!(Ideal::new(&c, []).is_err());
        assert!(Ideal::new(&c, [c.label("0").unwrap()]).is_err());
        assert!(Ideal::new(&c, c.enumerate().unwrap()).is_err());
        let bogus = Ideal {
            space: c.clone(),
            members: BTreeSet::new(),
        };
        assert!(char_map(&bogus).is_err());
    }

    #[test]
    fn infinity_is_an_ideal_of_the_extended_line() {
        let r = extended_real();
        assert!(Ideal::new(&r, [Point::Ext(ExtValue::Infinity)]).is_ok());
        assert!(Ideal::new(&r, [Point::Ext(ExtValue::zero())]).is_err());
    }

    #[test]
    fn enumeration_limits() {
        assert!(matches!(
            enumerate_ideals(&unit_interval()),
            Err(Error::InfiniteCarrier(_))
        ));
        assert!(matches!(
            enumerate_ideals(&naturals_min()),
            Err(Error::CarrierTooLarge { .. })
        ));
    }

    /// Every map from a 3-chain into C; the affine ones pull ideals back to ideals.
    #[test]
    fn preimages_of_ideals_under_affine_maps() {
        let dom = chain("K3", 3, ChainRule::Min);
        let c = space_c();
        let cfg = CheckConfig::default();
        let targets = enumerate_ideals(&c).unwrap();
        let mut affine_maps = 0;
        for code in 0..27usize {
            let values = [code % 3, code / 3 % 3, code / 9];
            let m = AffineMap::new("f", dom.clone(), c.clone(), move |x| match x {
                Point::Label(i) => Some(Point::Label(values[*i])),
                _ => None,
            });
            if !super::super::is_affine(&m, &cfg).affine {
                continue;
            }
            affine_maps += 1;
            for ideal in &targets {
                let pre: BTreeSet<Point> = dom
                    .enumerate()
                    .unwrap()
                    .into_iter()
                    .filter(|x| ideal.contains(&m.apply(x).unwrap()))
                    .collect();
                if !pre.is_empty() && pre.len() < 3 {
                    assert!(
                        Ideal::new(&dom, pre).is_ok(),
                        "preimage of {} under {values:?}",
                        ideal.describe()
                    );
                }
            }
        }
        assert!(affine_maps > 3);
    }

    /// Brute force over all subsets agrees with the union-closure search.
    #[test]
    fn enumeration_matches_subset_filter() {
        for space in [
            space_c(),
            two(),
            chain("K4", 4, ChainRule::Max),
            product_i_d_small(),
        ] {
            let points = space.enumerate().unwrap();
            let mut brute: Vec<BTreeSet<Point>> = (1..(1u32 << points.len()))
                .map(|mask| {
                    points
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| mask >> i & 1 == 1)
                        .map(|(_, p)| p.clone())
                        .collect()
                })
                .filter(|s: &BTreeSet<Point>| Ideal::new(&space, s.clone()).is_ok())
                .collect();
            brute.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
            let found: Vec<BTreeSet<Point>> = enumerate_ideals(&space)
                .unwrap()
                .into_iter()
                .map(|i| i.members)
                .collect();
            assert_eq!(found, brute, "{}", space.id);
        }
    }

    fn product_i_d_small() -> ConvexSpaceSpec {
        crate::convex::product_space(&two(), &chain("K3", 3, ChainRule::Min))
    }
}
